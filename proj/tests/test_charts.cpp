#include "doctest.h"
#include "support.hpp"
#include "techgap/charts.hpp"
#include "techgap/error.hpp"

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

}  // namespace

TEST_CASE("chart kinds") {
  CHECK(parse_chart_kind("spider") == ChartKind::Spider);
  CHECK(parse_chart_kind("comparative_bars") == ChartKind::Comparative);
  CHECK(to_string(parse_chart_kind("timeline")) == "timeline");
  try {
    parse_chart_kind("pie");
    FAIL("expected UnknownChartKind");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownChartKind);
  }
}

TEST_CASE("spider totals equal the cube grand totals per source") {
  const nlohmann::json chart = spider_chart(*testkit::gap_snapshot(), landscape());
  const KpiMetrics grand = kpi_cube(landscape(), {}).at(0).metrics;
  CHECK(chart["totals"]["patents"].get<double>() == doctest::Approx(grand[0]));
  CHECK(chart["totals"]["news"].get<double>() == doctest::Approx(grand[1] + grand[3]));
  CHECK(chart["totals"]["funding"].get<double>() == doctest::Approx(grand[2]));
  const std::size_t axes = chart["axes"].size();
  CHECK(axes > 0);
  for (const auto& s : chart["series"]) {
    REQUIRE(s["values"].size() == axes);
    double sum = 0.0;
    for (const auto& v : s["values"]) sum += v.get<double>();
    CHECK(sum == doctest::Approx(s["total"].get<double>()));
    CHECK(s["total"].get<double>() > 0.0);
  }
  // The sensor fusion seed has children, so the axes are those children.
  for (const auto& a : chart["axes"]) CHECK(a["concept"] != "c:sensor-fusion");
}

TEST_CASE("spider on an empty landscape has no series") {
  ExpansionQuery q;
  q.pos = {"sensor fusion"};
  LandscapeParams strict = testkit::gap_params();
  strict.roi.min_nodes = 1000;
  const Landscape empty = run_landscape(*testkit::gap_snapshot(), q, strict);
  const nlohmann::json chart = spider_chart(*testkit::gap_snapshot(), empty);
  CHECK(chart["series"].empty());
  CHECK(chart["totals"]["patents"] == 0.0);
}

TEST_CASE("timeline events stay inside the landscape interval") {
  const nlohmann::json chart = timeline_chart(*testkit::gap_snapshot(), landscape());
  std::set<std::string> p_techs;
  for (const auto& r : landscape().performance) p_techs.insert(r.tech);
  REQUIRE(chart["rows"].size() == p_techs.size());
  const std::string first = std::to_string(landscape().intervals.front());
  const std::string last = std::to_string(landscape().intervals.back());
  std::size_t patents = 0;
  for (const auto& row : chart["rows"]) {
    CHECK(p_techs.count(row["tech"].get<std::string>()));
    std::string previous;
    for (const auto& ev : row["events"]) {
      const std::string date = ev["date"];
      CHECK(date.substr(0, 4) >= first);
      CHECK(date.substr(0, 4) <= last);
      CHECK(date >= previous);
      previous = date;
      const std::string type = ev["type"];
      CHECK((type == "patent" || type == "award"));
      if (type == "patent") ++patents;
      if (type == "award") CHECK(ev["amount"].get<double>() > 0.0);
    }
  }
  CHECK(patents > 0);
}

TEST_CASE("comparative chart carries both panels") {
  const auto snap = testkit::gap_snapshot();
  ComparativeQuery q;
  q.me = "Meridian Systems";
  q.tech_a = "sensor fusion";
  q.tech_b = "sensor fusion method 03";
  q.params = testkit::gap_params();
  const ComparativeResult r = comparative_gap(*snap, build_temporal_index(*snap), q);
  const nlohmann::json chart = comparative_chart(r, landscape().landscape_id);
  CHECK(chart["kind"] == "comparative");
  CHECK(chart["me"] == "org:meridian systems");
  REQUIRE(chart["panels"].size() == 2);
  CHECK(chart["panels"][0]["tech"] == "sensor fusion");
  CHECK(chart["panels"][0]["gap_magnitude"].get<double>() == doctest::Approx(1.5));
  CHECK(chart["panels"][0]["competitors"][0]["org"] == "org:tessera dynamics");
}
