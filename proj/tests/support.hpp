#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <unistd.h>

#include "oracles.hpp"
#include "techgap/graph.hpp"
#include "techgap/kg_store.hpp"
#include "techgap/landscape.hpp"
#include "techgap/ontology.hpp"
#include "techgap/scenario.hpp"

namespace testkit {

inline std::string concept_name(int i) { return "c" + std::to_string(i); }
inline std::string concept_label(int i) { return "concept " + std::to_string(i); }

// Concept i gets id "c<i>" and the unique label "concept <i>".
inline techgap::Ontology to_ontology(const oracle::Dag& dag) {
  std::vector<techgap::ConceptNode> nodes;
  for (int i = 0; i < dag.n; ++i) nodes.push_back({concept_name(i), concept_label(i), {}, {}});
  std::vector<techgap::OntologyEdge> edges;
  for (auto [p, c, r] : dag.edges) {
    edges.push_back({concept_name(p), concept_name(c), techgap::kAllRelations[static_cast<std::size_t>(r)]});
  }
  return techgap::Ontology(std::move(nodes), std::move(edges));
}

inline techgap::UndirectedGraph to_graph(const oracle::Adjacency& adj) {
  techgap::UndirectedGraph g(adj.size());
  for (auto [u, v] : oracle::edge_list(adj)) g.add_edge(static_cast<techgap::NodeId>(u), static_cast<techgap::NodeId>(v));
  return g;
}

// Removed with its contents on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("techgap-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline techgap::SnapshotPtr materialize(const techgap::Scenario& scenario) {
  auto onto = std::make_shared<const techgap::Ontology>(techgap::Ontology::from_json(scenario.ontology));
  techgap::ViewScript script;
  script.name = "scenario";
  return techgap::materialize_view(onto, scenario.sources, script);
}

// Generated once per process.
inline const techgap::Scenario& gap_scenario() {
  static const techgap::Scenario s = techgap::generate_scenario(techgap::ScenarioSpec::gap_default(11));
  return s;
}

inline techgap::SnapshotPtr gap_snapshot() {
  static const techgap::SnapshotPtr snap = materialize(gap_scenario());
  return snap;
}

inline techgap::LandscapeParams gap_params() {
  techgap::LandscapeParams p;
  p.roi.min_nodes = 10;
  return p;
}

}  // namespace testkit
