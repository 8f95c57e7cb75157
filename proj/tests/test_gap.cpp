#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "techgap/error.hpp"
#include "techgap/gap.hpp"

using namespace techgap;

namespace {

const Landscape& landscape() {
  static const Landscape l = [] {
    ExpansionQuery q;
    q.pos = {"sensor fusion"};
    return run_landscape(*testkit::gap_snapshot(), q, testkit::gap_params());
  }();
  return l;
}

const nlohmann::json& ledger() { return testkit::gap_scenario().ledger["gap"]; }

GapQuery query(double theta) {
  GapQuery q;
  q.landscape_id = landscape().landscape_id;
  q.me = "Meridian Systems";
  q.theta = theta;
  return q;
}

std::set<std::string> orgs(const GapResult& r) {
  std::set<std::string> out;
  for (const auto& e : r.results) out.insert(e.org);
  return out;
}

std::set<std::string> expected_at(double theta) {
  std::set<std::string> out;
  for (const auto& p : ledger()["participants"]) {
    if (ledger()["expected_distances"][p.get<std::string>()].get<double>() > theta) out.insert(p);
  }
  return out;
}

Predicate pred(std::string field, Comparator op, Scalar v) { return {std::move(field), op, std::move(v)}; }

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("comparators and predicates") {
  CHECK(parse_comparator("≥") == Comparator::Ge);
  CHECK(parse_comparator("<=") == Comparator::Le);
  CHECK(parse_comparator("==") == Comparator::Eq);
  CHECK(parse_comparator("contains") == Comparator::Contains);
  CHECK_FALSE(parse_comparator("~").has_value());
  for (auto op : {Comparator::Lt, Comparator::Le, Comparator::Eq, Comparator::Ge, Comparator::Gt, Comparator::Contains}) {
    CHECK(parse_comparator(to_string(op)) == op);
  }
  CHECK(evaluate(pred("x", Comparator::Ge, 3.0), Scalar{3.0}));
  CHECK_FALSE(evaluate(pred("x", Comparator::Gt, 3.0), Scalar{3.0}));
  CHECK(evaluate(pred("x", Comparator::Eq, std::string("ACME")), Scalar{std::string("acme")}));
  CHECK(evaluate(pred("x", Comparator::Contains, std::string("Dyn")), Scalar{std::string("Tessera Dynamics")}));
  // Missing values and type mismatches fail closed.
  CHECK_FALSE(evaluate(pred("x", Comparator::Ge, 3.0), std::nullopt));
  CHECK_FALSE(evaluate(pred("x", Comparator::Ge, 3.0), Scalar{std::string("5")}));
  CHECK_FALSE(evaluate(pred("x", Comparator::Lt, std::string("b")), Scalar{std::string("a")}));
}

TEST_CASE("o_rule: conjunction over entity properties with a trace") {
  EntityRecord org{"org:acme", EntityKind::Organization, {{"name", std::string("Acme")}, {"patent_count", 4.0}}};
  std::vector<RuleCheck> trace;
  const std::vector<Predicate> rules{pred("patent_count", Comparator::Ge, 2.0),
                                     pred("name", Comparator::Eq, std::string("acme"))};
  CHECK(o_rule(org, rules, &trace));
  CHECK(trace.size() == 2);
  CHECK(o_rule(org, {}));
  const std::vector<Predicate> missing{pred("country", Comparator::Eq, std::string("NL"))};
  trace.clear();
  CHECK_FALSE(o_rule(org, missing, &trace));
  REQUIRE(trace.size() == 1);
  CHECK_FALSE(trace[0].actual.has_value());
}

TEST_CASE("t_rule: clique aggregates") {
  const Date as_of = make_date(2021, 1, 1);
  std::vector<QuasiCliqueInfo> cliques(2);
  cliques[0].nodes = {"org:a", "tech:x", "tech:y", "tech:z"};
  cliques[0].technologies = {"tech:x", "tech:y", "tech:z"};
  cliques[0].organizations = {"org:a"};
  cliques[0].newest_activity = make_date(2020, 1, 1);
  cliques[1].nodes = {"tech:x", "tech:y", "tech:z"};
  cliques[1].technologies = cliques[1].nodes;
  cliques[1].newest_activity = make_date(2015, 1, 1);
  CHECK(std::get<double>(*clique_aggregate(cliques[0], "member_count", as_of)) == 4.0);
  CHECK(std::get<double>(*clique_aggregate(cliques[0], "org_count", as_of)) == 1.0);
  CHECK(std::get<double>(*clique_aggregate(cliques[0], "newest_activity_age_days", as_of)) == 366.0);
  CHECK_FALSE(clique_aggregate(cliques[0], "colour", as_of).has_value());

  const std::vector<std::size_t> both{0, 1};
  const std::vector<Predicate> recent{pred("newest_activity_age_years", Comparator::Le, 2.0)};
  std::vector<RuleCheck> trace;
  CHECK(t_rule(cliques, both, recent, as_of, &trace) == std::vector<std::size_t>{0});
  CHECK(trace.size() == 2);
  CHECK(trace[1].clique == std::size_t{1});
  CHECK(t_rule(cliques, both, {}, as_of) == both);
}

TEST_CASE("kpi distance: symmetric, max-normalized, frozen examples") {
  CHECK(kpi_distance({1, 0}, {0, 1}, {1, 1}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(kpi_distance({4, 0, 7}, {2, 0, 7}, {4, 0, 7}) == doctest::Approx(0.5));
  CHECK(kpi_distance({3, 9}, {3, 9}, {3, 9}) == 0.0);
  CHECK_THROWS_AS(kpi_distance({1}, {1, 2}, {1, 2}), Error);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    KpiVector a(4), b(4), m(4);
    for (std::size_t k = 0; k < 4; ++k) {
      a[k] = u(rng);
      b[k] = u(rng);
      m[k] = std::max(a[k], b[k]) + u(rng);
    }
    const double c = 0.5 + u(rng);
    KpiVector ac = a, bc = b, mc = m;
    for (std::size_t k = 0; k < 4; ++k) {
      ac[k] *= c;
      bc[k] *= c;
      mc[k] *= c;
    }
    REQUIRE(kpi_distance(a, b, m) == doctest::Approx(kpi_distance(b, a, m)));
    REQUIRE(kpi_distance(a, b, m) == doctest::Approx(kpi_distance(ac, bc, mc)));
    REQUIRE(kpi_distance(a, b, m) <= std::sqrt(4.0) + 1e-12);
  }
}

TEST_CASE("condition sets: toml, json and validation") {
  const ConditionSet c = ConditionSet::parse_toml(
      "[[org]]\nfield = \"patent_count\"\nop = \">=\"\nvalue = 1\n"
      "[[org]]\nfield = \"name\"\nop = \"contains\"\nvalue = \"dyn\"\n"
      "[[clique]]\nfield = \"newest_activity_age_years\"\nop = \"<=\"\nvalue = 3\n");
  REQUIRE(c.org_rules.size() == 2);
  REQUIRE(c.clique_rules.size() == 1);
  CHECK(c.org_rules[0].value == Scalar{1.0});
  CHECK(ConditionSet::from_json(c.to_json()) == c);
  CHECK_THROWS_AS(ConditionSet::parse_toml("[[clique]]\nfield = \"colour\"\nop = \"=\"\nvalue = 1\n"), Error);
  CHECK_THROWS_AS(ConditionSet::parse_toml("[[org]]\nfield = \"x\"\nop = \">\"\nvalue = \"a\"\n"), Error);
  CHECK_THROWS_AS(ConditionSet::parse_toml("[[org]]\nfield = \"x\"\nop = \"contains\"\nvalue = 2\n"), Error);
  CHECK_THROWS_AS(ConditionSet::parse_toml("[[org]]\nfield = \"x\"\nop = \"~\"\nvalue = 2\n"), Error);
  CHECK_THROWS_AS(ConditionSet::parse_toml("[[org]"), Error);
}

TEST_CASE("theta json accepts infinity spellings") {
  CHECK(theta_from_json(0.25) == 0.25);
  CHECK(std::isinf(theta_from_json("inf")));
  CHECK(std::isinf(theta_from_json("Infinity")));
  CHECK_THROWS_AS(theta_from_json(-1.0), Error);
  CHECK_THROWS_AS(theta_from_json("lots"), Error);
  CHECK(theta_to_json(kInf) == "inf");
  const GapQuery q = gap_query_from_json({{"landscape_id", "L1"}, {"me", "x"}, {"theta", "inf"}, {"gamma", 0.9}});
  CHECK(std::isinf(q.theta));
  CHECK(q.gamma == 0.9);
  CHECK(gap_query_from_json(to_json(q)).landscape_id == "L1");
}

TEST_CASE("organization resolution") {
  const auto snap = testkit::gap_snapshot();
  CHECK(resolve_organization(*snap, "meridian  SYSTEMS") == "org:meridian systems");
  CHECK(resolve_organization(*snap, "org:meridian systems") == "org:meridian systems");
  CHECK_THROWS_AS(resolve_organization(*snap, "Nobody Inc"), Error);
}

TEST_CASE("planted gap: competitors, partners and the threshold chain") {
  const auto snap = testkit::gap_snapshot();
  const GapResult r = run_gap(*snap, landscape(), query(0.5));
  CHECK(orgs(r) == std::set<std::string>(ledger()["competitors"].begin(), ledger()["competitors"].end()));
  for (const auto& p : ledger()["partners"]) CHECK_FALSE(orgs(r).count(p.get<std::string>()));
  for (const auto& e : r.ego) CHECK_FALSE(orgs(r).count(e));
  CHECK(std::count(r.ego.begin(), r.ego.end(), r.me) == 1);
  for (const auto& e : r.results) {
    CHECK(e.trace.distance == doctest::Approx(ledger()["expected_distances"][e.org].get<double>()));
  }
  for (double theta : {0.0, 0.2, 0.5, 1.0, kInf}) {
    CHECK(orgs(run_gap(*snap, landscape(), query(theta))) == expected_at(theta));
  }
}

TEST_CASE("property: results shrink as theta grows") {
  const auto snap = testkit::gap_snapshot();
  std::set<std::string> previous = orgs(run_gap(*snap, landscape(), query(0.0)));
  for (double theta = 0.05; theta < 2.0; theta += 0.05) {
    const auto cur = orgs(run_gap(*snap, landscape(), query(theta)));
    CHECK(std::includes(previous.begin(), previous.end(), cur.begin(), cur.end()));
    previous = cur;
  }
}

TEST_CASE("property: adding rules never adds results") {
  const auto snap = testkit::gap_snapshot();
  const auto base = orgs(run_gap(*snap, landscape(), query(0.0)));
  const std::vector<std::vector<Predicate>> org_sets{
      {pred("patent_count", Comparator::Ge, 1.0)},
      {pred("patent_count", Comparator::Ge, 1.0), pred("award_total", Comparator::Gt, 1e6)},
      {pred("name", Comparator::Contains, std::string("umbra"))},
  };
  for (const auto& rules : org_sets) {
    GapQuery q = query(0.0);
    q.cond.org_rules = rules;
    const auto narrowed = orgs(run_gap(*snap, landscape(), q));
    CHECK(std::includes(base.begin(), base.end(), narrowed.begin(), narrowed.end()));
  }
  GapQuery stale = query(0.0);
  stale.cond.clique_rules = {pred("newest_activity_age_days", Comparator::Gt, 1e5)};
  CHECK(run_gap(*snap, landscape(), stale).results.empty());
  GapQuery name = query(0.0);
  name.cond.org_rules = {pred("name", Comparator::Contains, std::string("umbra"))};
  CHECK(orgs(run_gap(*snap, landscape(), name)) == std::set<std::string>{"org:umbra sensing"});
}

TEST_CASE("property: every trace replays to its decision") {
  const auto snap = testkit::gap_snapshot();
  GapQuery q = query(0.3);
  q.cond.org_rules = {pred("patent_count", Comparator::Ge, 1.0)};
  q.cond.clique_rules = {pred("newest_activity_age_years", Comparator::Le, 10.0)};
  const GapResult r = run_gap(*snap, landscape(), q);
  std::size_t seen = 0;
  for (const auto* list : {&r.results, &r.excluded}) {
    for (const auto& e : *list) {
      CHECK(replay(e.trace) == e.trace.included);
      CHECK(e.trace.included == (list == &r.results));
      ++seen;
    }
  }
  CHECK(seen > 0);
  GapTrace tampered = r.results.at(0).trace;
  tampered.distance = 0.0;
  CHECK_FALSE(replay(tampered));
}

TEST_CASE("property: scaling every KPI leaves the decision unchanged") {
  const auto snap = testkit::gap_snapshot();
  Landscape scaled = landscape();
  for (auto& row : scaled.performance) {
    for (double& m : row.metrics) m *= 7.5;
  }
  const GapResult a = run_gap(*snap, landscape(), query(0.2));
  const GapResult b = run_gap(*snap, scaled, query(0.2));
  REQUIRE(a.results.size() == b.results.size());
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    CHECK(a.results[i].org == b.results[i].org);
    CHECK(a.results[i].trace.distance == doctest::Approx(b.results[i].trace.distance));
  }
}

TEST_CASE("run_gap errors and edge cases") {
  const auto snap = testkit::gap_snapshot();
  GapQuery wrong = query(0.5);
  wrong.landscape_id = "Lnope";
  CHECK_THROWS_AS(run_gap(*snap, landscape(), wrong), Error);
  GapQuery nobody = query(0.5);
  nobody.me = "Nobody Inc";
  CHECK_THROWS_AS(run_gap(*snap, landscape(), nobody), Error);

  // An organization outside C has an ego network of itself alone.
  GapQuery outsider = query(0.0);
  outsider.me = "Kestrel Computing 05";
  const GapResult r = run_gap(*snap, landscape(), outsider);
  CHECK(r.ego == std::vector<std::string>{"org:kestrel computing 05"});

  GapQuery wider = query(0.0);
  wider.ego_radius = 2;
  const auto narrow_results = orgs(run_gap(*snap, landscape(), query(0.0)));
  const auto wide_results = orgs(run_gap(*snap, landscape(), wider));
  CHECK(std::includes(narrow_results.begin(), narrow_results.end(), wide_results.begin(), wide_results.end()));

  GapQuery tight = query(0.0);
  tight.max_branches = 1;
  CHECK_THROWS_AS(run_gap(*snap, landscape(), tight), Error);
}

TEST_CASE("gap result json layout") {
  const GapResult r = run_gap(*testkit::gap_snapshot(), landscape(), query(0.5));
  const nlohmann::json j = to_json(r);
  for (const char* key : {"query", "landscape_id", "as_of", "window", "ego", "me", "maxima", "cliques", "results", "excluded"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["results"][0]["org"] == "org:tessera dynamics");
  CHECK(j["results"][0]["trace"]["included"] == true);
  CHECK(j["window"].front() == ledger()["kpi_window"][0]);
  CHECK(j["window"].back() == ledger()["kpi_window"][1]);
}

TEST_CASE("comparative gap over two technologies") {
  const auto snap = testkit::gap_snapshot();
  const auto index = build_temporal_index(*snap);
  ComparativeQuery q;
  q.me = "Meridian Systems";
  q.tech_a = "sensor fusion";
  q.tech_b = "computing technique 02";
  q.params = testkit::gap_params();
  q.gap = query(0.5);
  q.gap.landscape_id.clear();
  const ComparativeResult r = comparative_gap(*snap, index, q);
  CHECK(r.a.tech == "sensor fusion");
  CHECK(r.a.landscape.rois.size() == 1);
  REQUIRE_FALSE(r.a.gap.results.empty());
  CHECK(r.a.gap.results[0].org == "org:tessera dynamics");
  CHECK(std::is_sorted(r.a.leaders.begin(), r.a.leaders.end(),
                       [](const Leader& x, const Leader& y) { return x.score > y.score; }));
  CHECK(r.b.gap.results.empty());
  const auto j = to_json(r);
  CHECK(j["a"]["gap_magnitude"] == doctest::Approx(1.5));

  ComparativeQuery same = q;
  same.tech_b = same.tech_a;
  const ComparativeResult twin = comparative_gap(*snap, index, same);
  CHECK(to_json(twin.a) == to_json(twin.b));
}
