// Acceptance run: one PASS/FAIL line per criterion, each with its own time
// limit. Exit status is nonzero when any line fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "support.hpp"
#include "techgap/error.hpp"
#include "techgap/gap.hpp"
#include "techgap/service.hpp"

using namespace techgap;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

int failures = 0;

void criterion(const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = elapsed < limit_s;
  const bool pass = o.ok && in_time;
  if (!pass) ++failures;
  std::printf("%s  %-22s %s; %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", name, o.detail.c_str(), elapsed,
              limit_s, in_time ? "" : " over time");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome expansion_oracle() {
  std::mt19937_64 rng(20240101);
  std::size_t queries = 0, mismatches = 0, empty = 0, depth8 = 0;
  for (int g = 0; g < 100; ++g) {
    const oracle::Dag dag = oracle::random_dag(rng, 200);
    const Ontology onto = testkit::to_ontology(dag);
    std::uniform_int_distribution<int> node(0, dag.n - 1);
    for (int q = 0; q < 12; ++q) {
      std::set<int> pos, neg;
      const int npos = 1 + static_cast<int>(rng() % 3);
      const int nneg = static_cast<int>(rng() % 3);
      while (static_cast<int>(pos.size()) < std::min(npos, dag.n)) pos.insert(node(rng));
      for (int i = 0; i < nneg; ++i) {
        const int c = node(rng);
        if (!pos.count(c)) neg.insert(c);
      }
      // Depth draws cover 0..8 with extra weight on 8, plus unbounded.
      const int draw = static_cast<int>(rng() % 12);
      const int depth = draw <= 8 ? draw : (draw == 11 ? -1 : 8);
      if (depth == 8) ++depth8;
      const int neg_depth = rng() % 4 == 0 ? static_cast<int>(rng() % 3) : -1;
      std::set<int> rels;
      ExpansionQuery query;
      query.relations = RelationMask{};
      while (rels.empty()) {
        for (int r = 0; r < 3; ++r) {
          if (rng() % 2) rels.insert(r);
        }
      }
      for (int r : rels) query.relations.set(kAllRelations[static_cast<std::size_t>(r)]);
      for (int c : pos) query.pos.push_back(testkit::concept_label(c));
      for (int c : neg) query.neg.push_back(testkit::concept_label(c));
      query.max_depth = depth < 0 ? std::nullopt : std::optional<unsigned>(static_cast<unsigned>(depth));
      query.neg_max_depth = neg_depth < 0 ? std::nullopt : std::optional<unsigned>(static_cast<unsigned>(neg_depth));

      const auto expected = oracle::closure_difference(dag, {pos.begin(), pos.end()}, {neg.begin(), neg.end()}, rels,
                                                       depth, neg_depth);
      ++queries;
      std::set<std::string> want;
      for (int c : expected) want.insert(testkit::concept_name(c));
      try {
        if (onto.expand_query(query) != want) ++mismatches;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::EmptyExpansion && want.empty()) {
          ++empty;
        } else {
          ++mismatches;
        }
      }
    }
  }
  return {mismatches == 0 && depth8 > 0,
          fmt("100 DAGs, %zu queries (%zu at maxD=8, %zu empty), %zu mismatches", queries, depth8, empty, mismatches)};
}

Outcome reachability_oracle() {
  std::mt19937_64 rng(77);
  std::size_t pairs = 0, mismatches = 0;
  for (int g = 0; g < 20; ++g) {
    const oracle::Dag dag = oracle::random_dag(rng, 100);
    const Ontology onto = testkit::to_ontology(dag);
    for (int r = 0; r < 3; ++r) {
      for (int a = 0; a < dag.n; ++a) {
        for (int b = 0; b < dag.n; ++b) {
          ++pairs;
          if (onto.is_descendant(static_cast<ConceptIndex>(a), static_cast<ConceptIndex>(b), kAllRelations[r]) !=
              oracle::dfs_reachable(dag, a, b, r)) {
            ++mismatches;
          }
        }
      }
    }
  }
  return {mismatches == 0, fmt("20 DAGs, %zu ordered pairs over 3 relations, %zu mismatches", pairs, mismatches)};
}

Outcome truss_clustering_oracle() {
  std::mt19937_64 rng(4096);
  std::size_t edges = 0, nodes = 0, mismatches = 0;
  for (int g = 0; g < 50; ++g) {
    const auto adj = oracle::random_graph(rng, 30, 0.1, 0.8);
    const UndirectedGraph graph = testkit::to_graph(adj);
    const auto decomposition = truss_decomposition(graph);
    const auto expected = oracle::peel_trussness(adj);
    unsigned kmax = 2;
    for (auto [e, k] : expected) {
      ++edges;
      kmax = std::max(kmax, k);
      if (decomposition.at(make_edge(static_cast<NodeId>(e.first), static_cast<NodeId>(e.second))) != k) ++mismatches;
    }
    for (unsigned k = 2; k <= kmax + 1; ++k) {
      std::set<std::pair<int, int>> got;
      for (Edge e : k_truss(graph, k)) got.insert({static_cast<int>(e.u), static_cast<int>(e.v)});
      if (got != oracle::peel_truss(adj, k)) ++mismatches;
    }
    for (int v = 0; v < static_cast<int>(adj.size()); ++v) {
      ++nodes;
      // Both sides compute 2t / (d(d-1)) from integers.
      if (clustering_coefficient(graph, static_cast<NodeId>(v)) != oracle::clustering_by_triangles(adj, v)) {
        ++mismatches;
      }
    }
  }
  return {mismatches == 0, fmt("50 graphs, %zu edges, %zu nodes, %zu mismatches", edges, nodes, mismatches)};
}

Outcome quasi_clique_oracle() {
  std::mt19937_64 rng(1515);
  std::size_t sets = 0, mismatches = 0, runs = 0;
  for (int g = 0; g < 30; ++g) {
    const auto adj = oracle::random_graph(rng, 15, 0.25, 0.85);
    const UndirectedGraph graph = testkit::to_graph(adj);
    for (double gamma : {0.6, 0.8, 1.0}) {
      const auto expected = oracle::subset_quasi_cliques(adj, gamma, 2);
      std::set<std::vector<int>> got;
      for (const auto& s : quasi_cliques(graph, gamma, 2)) got.insert(std::vector<int>(s.begin(), s.end()));
      ++runs;
      sets += expected.size();
      if (got != expected) ++mismatches;
    }
  }
  return {mismatches == 0,
          fmt("30 graphs x 3 gammas, %zu maximal sets, %zu of %zu runs differ", sets, mismatches, runs)};
}

Outcome densification() {
  RoiParams params;
  params.min_nodes = 100;
  params.min_clust = 0.7;
  params.history = 5;
  auto detect = [&](const ScenarioSpec& spec, const Scenario& scenario) {
    const auto snap = testkit::materialize(scenario);
    const auto index = build_temporal_index(*snap);
    ExpansionQuery q;
    q.pos = {spec.roi->term};
    const auto seeds = snap->concepts_to_instances(snap->ontology().expand_query(q));
    auto rois = detect_densifying_regions(snap->graph(), index, seeds, params);
    std::set<std::string> covered;
    for (const auto& r : rois) {
      for (NodeId n : r.nodes) covered.insert(snap->graph().node(n).entity_id);
    }
    std::size_t hit = 0, planted = 0;
    for (const auto& p : scenario.ledger["roi"]["planted_nodes"]) {
      ++planted;
      hit += covered.count(p.get<std::string>());
    }
    return std::tuple{rois.size(), planted == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(planted),
                      planted};
  };
  const ScenarioSpec planted_spec = ScenarioSpec::densification(7);
  const ScenarioSpec control_spec = ScenarioSpec::control(7);
  const auto [planted_rois, coverage, planted] = detect(planted_spec, generate_scenario(planted_spec));
  const auto [control_rois, control_cov, control_planted] = detect(control_spec, generate_scenario(control_spec));
  (void)control_cov;
  (void)control_planted;
  return {planted_rois >= 1 && coverage >= 0.9 && control_rois == 0,
          fmt("planted: %zu ROI(s), coverage %.1f%% of %zu nodes; control: %zu ROI(s)", planted_rois, 100.0 * coverage,
              planted, control_rois)};
}

Outcome gap_end_to_end() {
  const Scenario& scenario = testkit::gap_scenario();
  const auto snap = testkit::gap_snapshot();
  const auto& ledger = scenario.ledger["gap"];
  ExpansionQuery q;
  q.pos = {ledger["term"].get<std::string>()};
  const Landscape l = run_landscape(*snap, q, testkit::gap_params());

  auto run = [&](double theta) {
    GapQuery gq;
    gq.landscape_id = l.landscape_id;
    gq.me = ledger["me"];
    gq.theta = theta;
    std::set<std::string> out;
    for (const auto& e : run_gap(*snap, l, gq).results) out.insert(e.org);
    return out;
  };
  const std::set<std::string> competitors(ledger["competitors"].begin(), ledger["competitors"].end());
  const auto at_theta = run(ledger["theta"].get<double>());
  bool ok = at_theta == competitors;
  for (const auto& p : ledger["partners"]) ok = ok && !at_theta.count(p.get<std::string>());

  const double inf = std::numeric_limits<double>::infinity();
  std::ostringstream chain;
  std::set<std::string> previous;
  bool first = true, nested = true, oracle_match = true;
  for (double theta : {0.0, 0.2, 0.5, 1.0, inf}) {
    const auto cur = run(theta);
    std::set<std::string> want;
    for (const auto& p : ledger["participants"]) {
      if (ledger["expected_distances"][p.get<std::string>()].get<double>() > theta) want.insert(p);
    }
    oracle_match = oracle_match && cur == want;
    if (!first) nested = nested && std::includes(previous.begin(), previous.end(), cur.begin(), cur.end());
    chain << (first ? "" : " ⊇ ") << cur.size();
    previous = cur;
    first = false;
  }
  ok = ok && nested && oracle_match;
  return {ok, fmt("competitors %zu/%zu exact, partners excluded, chain %s%s", at_theta.size(), competitors.size(),
                  chain.str().c_str(), oracle_match ? "" : " (differs from ledger)")};
}

// generate → write → materialize (three sources) → ingest partnerships →
// landscape → gap, all through the on-disk workspace.
std::string pipeline_bundle(const std::filesystem::path& root) {
  const Scenario s = generate_scenario(ScenarioSpec::gap_default(11));
  write_scenario(s, root / "corpus");
  ViewScript partial = ViewScript::load(root / "corpus" / "view.toml");
  partial.source_paths.erase(SourceKind::Partnerships);
  Workspace ws(root / "data");
  ws.materialize(partial);
  ws.ingest(SourceKind::Partnerships, root / "corpus" / "partnerships.jsonl");
  PipelineDefaults defaults;
  defaults.min_nodes = 10;
  Pipeline p(ws, defaults);
  const nlohmann::json landscape = p.landscape({{"pos", {"sensor fusion"}}});
  const nlohmann::json gap = p.gap({{"landscape_id", landscape["landscape_id"]}, {"me", "Meridian Systems"}});
  return render(landscape) + render(gap) + ws.current()->dump().entities + ws.current()->dump().edges;
}

Outcome determinism() {
  testkit::TempDir a("det-a"), b("det-b");
  const std::string first = pipeline_bundle(a.path());
  const std::string second = pipeline_bundle(b.path());
  return {first == second && !first.empty(),
          fmt("two runs from seed 11: %zu bytes, %s", first.size(), first == second ? "identical" : "DIFFERENT")};
}

Outcome cube_consistency() {
  ExpansionQuery q;
  q.pos = {"sensor fusion"};
  const Landscape l = run_landscape(*testkit::gap_snapshot(), q, testkit::gap_params());
  const KpiMetrics grand = kpi_cube(l, {}).at(0).metrics;
  const std::vector<std::string> dims{"org", "interval", "tech"};
  std::size_t checks = 0, bad = 0;
  for (unsigned mask = 1; mask < 8; ++mask) {
    std::vector<std::string> subset;
    for (unsigned i = 0; i < 3; ++i) {
      if (mask >> i & 1u) subset.push_back(dims[i]);
    }
    KpiMetrics total{};
    for (const auto& row : kpi_cube(l, subset)) {
      for (std::size_t m = 0; m < kMetricCount; ++m) total[m] += row.metrics[m];
    }
    for (std::size_t m = 0; m < kMetricCount; ++m) {
      ++checks;
      if (std::abs(total[m] - grand[m]) > 1e-9 * std::max(1.0, std::abs(grand[m]))) ++bad;
    }
  }
  return {bad == 0 && !l.performance.empty(),
          fmt("%zu P rows, 7 dimension subsets x 4 metrics, %zu of %zu disagree", l.performance.size(), bad, checks)};
}

}  // namespace

int main() {
  criterion("expansion-oracle", 10, expansion_oracle);
  criterion("reachability-oracle", 5, reachability_oracle);
  criterion("truss-clustering", 10, truss_clustering_oracle);
  criterion("quasi-clique-oracle", 60, quasi_clique_oracle);
  criterion("densification", 30, densification);
  criterion("gap-end-to-end", 30, gap_end_to_end);
  criterion("determinism", 60, determinism);
  criterion("cube-consistency", 60, cube_consistency);
  std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
