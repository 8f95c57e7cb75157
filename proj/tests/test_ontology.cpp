#include <random>

#include "doctest.h"
#include "support.hpp"
#include "techgap/error.hpp"
#include "techgap/ontology.hpp"

using namespace techgap;

namespace {

// technology
//   sensing ─ radar ─(componentOf)─ antenna ─ phased array
//           └ sonar ───────────────────────┘
//   computing
Ontology sample() {
  std::vector<ConceptNode> nodes{
      {"T", "technology", {}, NodeKind::Class},
      {"S", "sensing", {}, NodeKind::Class},
      {"C", "computing", {}, NodeKind::Class},
      {"R", "radar", {"RADAR systems"}, NodeKind::Class},
      {"N", "sonar", {}, NodeKind::Class},
      {"A", "antenna", {}, NodeKind::Class},
      {"P", "phased array", {}, NodeKind::Class},
  };
  std::vector<OntologyEdge> edges{
      {"T", "S", Relation::SubclassOf},  {"T", "C", Relation::SubclassOf},
      {"S", "R", Relation::SubclassOf},  {"S", "N", Relation::SubclassOf},
      {"R", "A", Relation::ComponentOf}, {"A", "P", Relation::SubclassOf},
      {"N", "P", Relation::SubclassOf},
  };
  return Ontology(std::move(nodes), std::move(edges));
}

ExpansionQuery query(std::vector<std::string> pos, std::vector<std::string> neg = {},
                     std::optional<unsigned> depth = 8) {
  ExpansionQuery q;
  q.pos = std::move(pos);
  q.neg = std::move(neg);
  q.max_depth = depth;
  return q;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("expansion follows subclass and component edges together") {
  const Ontology o = sample();
  CHECK(o.expand_query(query({"sensing"})) == std::set<std::string>{"S", "R", "N", "A", "P"});
  CHECK(o.expand_query(query({"sensing"}, {}, 1)) == std::set<std::string>{"S", "R", "N"});
  CHECK(o.expand_query(query({"sensing"}, {}, 0)) == std::set<std::string>{"S"});
  CHECK(o.expand_query(query({"technology"}, {}, std::nullopt)).size() == 7);
}

TEST_CASE("negative terms prune whole subtrees") {
  const Ontology o = sample();
  // phased array sits under sonar, so it goes even though radar reaches it.
  CHECK(o.expand_query(query({"sensing"}, {"sonar"})) == std::set<std::string>{"S", "R", "A"});
  ExpansionQuery bounded = query({"sensing"}, {"sonar"});
  bounded.neg_max_depth = 0;
  CHECK(o.expand_query(bounded) == std::set<std::string>{"S", "R", "A", "P"});
}

TEST_CASE("relation mask restricts the closure") {
  const Ontology o = sample();
  ExpansionQuery q = query({"radar"});
  q.relations = RelationMask{Relation::SubclassOf};
  CHECK(o.expand_query(q) == std::set<std::string>{"R"});
  q.pos = {"sensing"};
  CHECK(o.expand_query(q) == std::set<std::string>{"S", "R", "N", "P"});
}

TEST_CASE("term resolution folds case and synonyms") {
  const Ontology o = sample();
  CHECK(o.resolve_term("RADAR") == std::set<std::string>{"R"});
  CHECK(o.resolve_term("  radar   Systems ") == std::set<std::string>{"R"});
  CHECK(o.resolve_term("lidar").empty());
}

TEST_CASE("expansion errors") {
  const Ontology o = sample();
  CHECK(code_of([&] { o.expand_query(query({"lidar"})); }) == ErrorCode::UnknownTerm);
  CHECK(code_of([&] { o.expand_query(query({"radar"}, {"Radar"})); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { o.expand_query(query({"antenna"}, {"radar"})); }) == ErrorCode::EmptyExpansion);
  CHECK(code_of([&] { o.expand_query(query({})); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("construction rejects malformed graphs") {
  CHECK(code_of([] {
          Ontology({{"a", "a", {}, {}}, {"b", "b", {}, {}}},
                   {{"a", "b", Relation::SubclassOf}, {"b", "a", Relation::SubclassOf}});
        }) == ErrorCode::CycleDetected);
  CHECK(code_of([] { Ontology({{"a", "a", {}, {}}, {"a", "b", {}, {}}}, {}); }) ==
        ErrorCode::DuplicateConceptId);
  CHECK(code_of([] { Ontology({{"a", "a", {}, {}}}, {{"a", "z", Relation::SubclassOf}}); }) ==
        ErrorCode::DanglingEdge);
  // A cycle split across relations is not a cycle of either relation.
  CHECK_NOTHROW(Ontology({{"a", "a", {}, {}}, {"b", "b", {}, {}}},
                         {{"a", "b", Relation::SubclassOf}, {"b", "a", Relation::ComponentOf}}));
}

TEST_CASE("path labels: join nodes carry one short label per parent") {
  const Ontology o = sample();
  const ConceptIndex p = o.index_of("P");
  const auto labels = o.labels(p, Relation::SubclassOf);
  // One full path from the root T and a two-step label per parent (A, N).
  REQUIRE(labels.size() == 3);
  std::size_t short_labels = 0;
  for (const auto& l : labels) {
    CHECK(l.node() == p);
    if (l.path.size() == 2) ++short_labels;
  }
  CHECK(short_labels == 2);
  CHECK(o.is_descendant("N", "P", Relation::SubclassOf));
  CHECK(o.is_descendant("A", "P", Relation::SubclassOf));
  CHECK_FALSE(o.is_descendant("R", "P", Relation::SubclassOf));
  CHECK(o.is_descendant("R", "A", Relation::ComponentOf));
  CHECK(o.is_descendant("P", "P", Relation::ComponentOf));
}

TEST_CASE("json round trip preserves nodes, edges and behaviour") {
  const Ontology o = sample();
  const Ontology back = Ontology::from_json(o.to_json());
  CHECK(back.to_json() == o.to_json());
  CHECK(back.expand_query(query({"sensing"})) == o.expand_query(query({"sensing"})));
  CHECK(code_of([] { Ontology::from_json({{"format", 2}, {"nodes", nlohmann::json::array()}}); }) ==
        ErrorCode::InvalidOntology);
}

TEST_CASE("with_additions grows the ontology without touching the original") {
  const Ontology o = sample();
  const Ontology grown = o.with_additions({{"L", "lidar", {}, {}}}, {{"S", "L", Relation::SubclassOf}});
  CHECK(grown.size() == o.size() + 1);
  CHECK(grown.expand_query(query({"sensing"})).count("L"));
  CHECK(o.resolve_term("lidar").empty());
}

TEST_CASE("property: reachability agrees with DFS on random DAGs") {
  std::mt19937_64 rng(4242);
  for (int g = 0; g < 8; ++g) {
    const oracle::Dag dag = oracle::random_dag(rng, 40);
    const Ontology o = testkit::to_ontology(dag);
    for (int r = 0; r < 3; ++r) {
      for (int a = 0; a < dag.n; ++a) {
        for (int b = 0; b < dag.n; ++b) {
          REQUIRE(o.is_descendant(static_cast<ConceptIndex>(a), static_cast<ConceptIndex>(b), kAllRelations[r]) ==
                  oracle::dfs_reachable(dag, a, b, r));
        }
      }
    }
  }
}

TEST_CASE("property: bounded expansion equals BFS closure difference") {
  std::mt19937_64 rng(99);
  for (int g = 0; g < 20; ++g) {
    const oracle::Dag dag = oracle::random_dag(rng, 60);
    const Ontology o = testkit::to_ontology(dag);
    std::uniform_int_distribution<int> node(0, dag.n - 1);
    std::uniform_int_distribution<int> depth(0, 4);
    for (int trial = 0; trial < 10; ++trial) {
      const int seed = node(rng);
      const int neg = node(rng);
      const int d = depth(rng);
      std::vector<int> negs;
      if (neg != seed) negs.push_back(neg);
      const auto expected =
          oracle::closure_difference(dag, {seed}, negs, {0, 1}, d, -1);
      ExpansionQuery q = query({testkit::concept_label(seed)}, {}, static_cast<unsigned>(d));
      for (int n : negs) q.neg.push_back(testkit::concept_label(n));
      if (expected.empty()) {
        CHECK(code_of([&] { o.expand_query(q); }) == ErrorCode::EmptyExpansion);
        continue;
      }
      std::set<std::string> want;
      for (int c : expected) want.insert(testkit::concept_name(c));
      REQUIRE(o.expand_query(q) == want);
    }
  }
}

TEST_CASE("property: expansion grows monotonically with max depth") {
  std::mt19937_64 rng(7);
  const oracle::Dag dag = oracle::random_dag(rng, 80);
  const Ontology o = testkit::to_ontology(dag);
  std::set<std::string> previous;
  for (unsigned d = 0; d <= 10; ++d) {
    auto cur = o.expand_query(query({testkit::concept_label(0)}, {}, d));
    CHECK(std::includes(cur.begin(), cur.end(), previous.begin(), previous.end()));
    previous = std::move(cur);
  }
}
