#include "doctest.h"
#include "support.hpp"
#include "techgap/error.hpp"
#include "techgap/landscape.hpp"

using namespace techgap;

namespace {

const Landscape& gap_landscape() {
  static const Landscape l = [] {
    ExpansionQuery q;
    q.pos = {"sensor fusion"};
    return run_landscape(*testkit::gap_snapshot(), q, testkit::gap_params());
  }();
  return l;
}

KpiMetrics sum_rows(const std::vector<CubeRow>& rows) {
  KpiMetrics total{};
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < kMetricCount; ++i) total[i] += r.metrics[i];
  }
  return total;
}

}  // namespace

TEST_CASE("gap landscape: shape") {
  const Landscape& l = gap_landscape();
  CHECK(l.rois.size() == 1);
  CHECK(l.organizations().size() == 6);
  CHECK_FALSE(l.performance.empty());
  CHECK(l.landscape_id.rfind("L", 0) == 0);
  CHECK(l.provenance.snapshot_id == testkit::gap_snapshot()->id());
  CHECK(std::is_sorted(l.intervals.begin(), l.intervals.end()));
}

TEST_CASE("gap landscape: P, T and C agree with each other") {
  const Landscape& l = gap_landscape();
  const std::set<std::string> t_nodes(l.tech.nodes.begin(), l.tech.nodes.end());
  const std::set<std::string> c_nodes(l.organizations().begin(), l.organizations().end());
  std::set<std::string> p_orgs;
  for (const auto& r : l.performance) {
    p_orgs.insert(r.org);
    CHECK(t_nodes.count(r.tech));
    CHECK(std::find(l.intervals.begin(), l.intervals.end(), r.interval) != l.intervals.end());
    for (double m : r.metrics) CHECK(m >= 0.0);
  }
  CHECK(p_orgs == c_nodes);
  for (const auto& e : l.tech.edges) {
    CHECK(t_nodes.count(e.from));
    CHECK(t_nodes.count(e.to));
    if (e.kind == "coOccurrence") CHECK(e.from < e.to);
  }
  for (const auto& e : l.partnerships.edges) {
    CHECK(e.a < e.b);
    CHECK(c_nodes.count(e.a));
    CHECK(c_nodes.count(e.b));
    CHECK_FALSE(e.evidence.empty());
  }
  // The reference organization's declared partners are its C neighbours.
  const auto& ledger = testkit::gap_scenario().ledger["gap"];
  const std::string me = ledger["me"];
  std::set<std::string> neighbours;
  for (const auto& e : l.partnerships.edges) {
    if (e.a == me) neighbours.insert(e.b);
    if (e.b == me) neighbours.insert(e.a);
  }
  for (const auto& p : ledger["partners"]) CHECK(neighbours.count(p.get<std::string>()));
}

TEST_CASE("landscape bundle round trips through json") {
  const Landscape& l = gap_landscape();
  const GraphStore& g = testkit::gap_snapshot()->graph();
  const nlohmann::json j = to_json(l, g);
  for (const char* key : {"landscape_id", "provenance", "expansion", "intervals", "roi_refs", "rois", "P", "T", "C"}) {
    CHECK(j.contains(key));
  }
  const Landscape back = landscape_from_json(j, g);
  CHECK(to_json(back, g) == j);
  CHECK(back.performance == l.performance);
  CHECK(back.tech == l.tech);
  CHECK(back.partnerships == l.partnerships);
}

TEST_CASE("landscape construction is deterministic and id tracks provenance") {
  ExpansionQuery q;
  q.pos = {"sensor fusion"};
  const auto snap = testkit::gap_snapshot();
  const Landscape again = run_landscape(*snap, q, testkit::gap_params());
  CHECK(to_json(again, snap->graph()).dump() == to_json(gap_landscape(), snap->graph()).dump());
  LandscapeParams other = testkit::gap_params();
  other.ontology_levels = 1;
  CHECK(run_landscape(*snap, q, other).landscape_id != gap_landscape().landscape_id);
  CHECK(landscape_params_from_json(to_json(other)) == other);
}

TEST_CASE("context bounds the expansion") {
  ExpansionQuery q;
  q.pos = {"sensor fusion"};
  const auto snap = testkit::gap_snapshot();
  const auto index = build_temporal_index(*snap);
  CHECK_THROWS_AS(run_landscape(*snap, index, q, testkit::gap_params(), {"computing"}), Error);
  const Landscape bounded = run_landscape(*snap, index, q, testkit::gap_params(), {"sensor fusion method 03"});
  CHECK(bounded.expansion == std::vector<std::string>{"c:sensor-fusion-method-03"});
}

TEST_CASE("no region: T falls back to the expansion and P is empty") {
  ExpansionQuery q;
  q.pos = {"sensor fusion"};
  LandscapeParams strict = testkit::gap_params();
  strict.roi.min_nodes = 1000;
  const Landscape l = run_landscape(*testkit::gap_snapshot(), q, strict);
  CHECK(l.rois.empty());
  CHECK(l.performance.empty());
  CHECK(l.tech.nodes == l.expansion);
  CHECK(kpi_cube(l, {}).size() == 1);
}

TEST_CASE("cube roll-ups agree with the grand total for every dimension subset") {
  const Landscape& l = gap_landscape();
  const auto grand = kpi_cube(l, {});
  REQUIRE(grand.size() == 1);
  const std::vector<std::vector<std::string>> subsets{
      {"org"}, {"tech"}, {"interval"}, {"org", "tech"}, {"org", "interval"}, {"tech", "interval"},
      {"org", "tech", "interval"}};
  for (const auto& dims : subsets) {
    const auto cube = kpi_cube(l, dims);
    const KpiMetrics total = sum_rows(cube);
    for (std::size_t i = 0; i < kMetricCount; ++i) CHECK(total[i] == doctest::Approx(grand[0].metrics[i]));
  }
  CHECK(kpi_cube(l, {"org", "tech", "interval"}).size() == l.performance.size());
  // A coarser cube is the roll-up of a finer one.
  std::map<std::string, KpiMetrics> by_org;
  for (const auto& r : kpi_cube(l, {"org", "interval"})) {
    for (std::size_t i = 0; i < kMetricCount; ++i) by_org[*r.org][i] += r.metrics[i];
  }
  for (const auto& r : kpi_cube(l, {"org"})) {
    for (std::size_t i = 0; i < kMetricCount; ++i) CHECK(by_org.at(*r.org)[i] == doctest::Approx(r.metrics[i]));
  }
  CHECK_THROWS_AS(kpi_cube(l, {"region"}), Error);
  const auto j = to_json(kpi_cube(l, {"org"}), {"org"});
  CHECK(j["dims"] == nlohmann::json::array({"org"}));
  CHECK(j["rows"].size() == l.organizations().size());
}
