// Command-line front end. Every pipeline command builds the same request
// object the HTTP API accepts and prints the same payload with --json.

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "techgap/error.hpp"
#include "techgap/scenario.hpp"
#include "techgap/service.hpp"

namespace {

using techgap::Error;
using techgap::ErrorCode;
using nlohmann::json;

struct Globals {
  std::string data_dir;
  std::string config;
  bool json_out = false;
};

techgap::ServiceConfig load_config(const Globals& g) {
  techgap::ServiceConfig c = g.config.empty() ? techgap::ServiceConfig{} : techgap::ServiceConfig::load(g.config);
  c.apply_env();
  if (!g.data_dir.empty()) c.data_dir = g.data_dir;
  return c;
}

struct ExpansionArgs {
  std::vector<std::string> pos;
  std::vector<std::string> neg;
  std::optional<unsigned> max_depth;
  bool unbounded = false;
  std::optional<unsigned> neg_max_depth;
  std::vector<std::string> relations;

  void attach(CLI::App* cmd) {
    cmd->add_option("--pos", pos, "Positive term (repeatable)")->required();
    cmd->add_option("--neg", neg, "Negative term (repeatable)");
    cmd->add_option("--max-depth", max_depth, "Edges followed from each positive seed");
    cmd->add_flag("--unbounded", unbounded, "No depth bound for positive seeds");
    cmd->add_option("--neg-max-depth", neg_max_depth, "Depth bound for negative seeds");
    cmd->add_option("--relation", relations, "Relation to follow (repeatable)");
  }

  json request() const {
    json r = {{"pos", pos}, {"neg", neg}};
    if (unbounded) {
      r["max_depth"] = nullptr;
    } else if (max_depth) {
      r["max_depth"] = *max_depth;
    }
    if (neg_max_depth) r["neg_max_depth"] = *neg_max_depth;
    if (!relations.empty()) r["relations"] = relations;
    return r;
  }
};

struct RoiArgs {
  std::optional<std::size_t> min_nodes;
  std::optional<double> min_clust;
  std::optional<unsigned> history;
  std::optional<double> merge_jaccard;
  std::optional<unsigned> ontology_levels;
  std::vector<std::string> context;

  void attach(CLI::App* cmd) {
    cmd->add_option("--min-nodes", min_nodes, "Smallest region kept");
    cmd->add_option("--min-clust", min_clust, "Smallest average clustering kept");
    cmd->add_option("--history", history, "Densification window in intervals");
    cmd->add_option("--merge-jaccard", merge_jaccard, "Overlap above which regions merge");
    cmd->add_option("--ontology-levels", ontology_levels, "Ancestor levels added to T");
    cmd->add_option("--context", context, "Context term bounding the expansion (repeatable)");
  }

  void apply(json& r) const {
    if (min_nodes) r["min_nodes"] = *min_nodes;
    if (min_clust) r["min_clust"] = *min_clust;
    if (history) r["history"] = *history;
    if (merge_jaccard) r["merge_jaccard"] = *merge_jaccard;
    if (ontology_levels) r["ontology_levels"] = *ontology_levels;
    if (!context.empty()) r["context"] = context;
  }
};

json theta_json(const std::string& text) {
  auto j = json::parse(text, nullptr, false);
  return j.is_number() ? j : json(text);
}

void emit(const Globals& g, const json& payload, const std::string& summary) {
  if (g.json_out) {
    std::cout << techgap::render(payload);
  } else {
    std::cout << summary << "\n";
  }
}

std::string kpi_line(const json& kpis) {
  std::string out;
  for (const auto& [k, v] : kpis.items()) {
    if (!out.empty()) out += ", ";
    out += k + "=" + v.dump();
  }
  return out;
}

volatile std::sig_atomic_t g_stop = 0;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Technology landscape and gap analysis over a knowledge graph"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  Globals g;
  app.add_option("--data-dir", g.data_dir, "Workspace directory (default: config, TECHGAP_DATA_DIR or techgap-data)");
  app.add_option("--config", g.config, "Service config TOML (pipeline defaults, data_dir)");
  app.add_flag("--json", g.json_out, "Print machine-readable JSON");

  // generate
  auto* generate = app.add_subcommand("generate", "Write a synthetic corpus with planted regions");
  std::string spec_path, preset, out_dir;
  std::optional<std::uint64_t> seed;
  generate->add_option("--spec", spec_path, "Scenario TOML");
  generate->add_option("--preset", preset, "densification | control | gap")
      ->check(CLI::IsMember({"densification", "control", "gap"}));
  generate->add_option("--seed", seed, "Random seed");
  generate->add_option("--out", out_dir, "Output directory")->required();

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate a source file and add it to the current snapshot");
  std::string ingest_kind, ingest_file;
  bool validate_only = false;
  ingest->add_option("--kind", ingest_kind, "patents | news | funding | partnerships")->required();
  ingest->add_option("file", ingest_file, "JSONL source file")->required();
  ingest->add_flag("--validate-only", validate_only, "Report accepted and rejected records only");

  // materialize
  auto* materialize = app.add_subcommand("materialize", "Build the view snapshot from a view script");
  std::string view_path;
  materialize->add_option("--view", view_path, "View script (view.toml)")->required();

  // expand
  auto* expand = app.add_subcommand("expand", "Expand Pos/Neg terms over the ontology");
  ExpansionArgs expand_args;
  expand_args.attach(expand);

  // detect-roi
  auto* detect = app.add_subcommand("detect-roi", "Find densifying regions around the expansion");
  ExpansionArgs detect_args;
  RoiArgs detect_roi;
  detect_args.attach(detect);
  detect_roi.attach(detect);

  // landscape
  auto* landscape = app.add_subcommand("landscape", "Build and store a landscape");
  ExpansionArgs land_args;
  RoiArgs land_roi;
  land_args.attach(landscape);
  land_roi.attach(landscape);

  // gap
  auto* gap = app.add_subcommand("gap", "Competitor gaps against a landscape");
  std::string gap_landscape, gap_me, gap_theta, gap_cond;
  std::optional<double> gap_gamma;
  std::optional<unsigned> gap_radius;
  std::optional<std::size_t> gap_min_size, gap_branches;
  gap->add_option("--landscape", gap_landscape, "Landscape id (default: latest)");
  gap->add_option("--me", gap_me, "Reference organization (entity id or name)")->required();
  gap->add_option("--theta", gap_theta, "KPI distance threshold (number or inf)");
  gap->add_option("--cond", gap_cond, "Condition set TOML");
  gap->add_option("--gamma", gap_gamma, "Quasi-clique density");
  gap->add_option("--ego-radius", gap_radius, "Partnership hops removed around me");
  gap->add_option("--min-size", gap_min_size, "Smallest quasi-clique");
  gap->add_option("--max-branches", gap_branches, "Quasi-clique search bound (0: none)");

  // compare
  auto* compare = app.add_subcommand("compare", "Comparative gap analysis for two technologies");
  std::string cmp_me, cmp_a, cmp_b, cmp_theta;
  RoiArgs cmp_roi;
  std::optional<unsigned> cmp_depth;
  compare->add_option("--me", cmp_me, "Reference organization")->required();
  compare->add_option("--tech-a", cmp_a, "First technology term")->required();
  compare->add_option("--tech-b", cmp_b, "Second technology term")->required();
  compare->add_option("--theta", cmp_theta, "KPI distance threshold");
  compare->add_option("--max-depth", cmp_depth, "Expansion depth");
  cmp_roi.attach(compare);

  // chart
  auto* chart = app.add_subcommand("chart", "Chart payload for a stored landscape");
  std::string chart_landscape, chart_kind, chart_me, chart_a, chart_b;
  chart->add_option("--landscape", chart_landscape, "Landscape id")->required();
  chart->add_option("--kind", chart_kind, "spider | timeline | comparative")->required();
  chart->add_option("--me", chart_me, "Comparative: reference organization");
  chart->add_option("--tech-a", chart_a, "Comparative: first technology");
  chart->add_option("--tech-b", chart_b, "Comparative: second technology");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::optional<int> serve_port;
  std::string serve_host, serve_view;
  serve->add_option("--port", serve_port, "Listen port (0: any free port)");
  serve->add_option("--host", serve_host, "Listen address");
  serve->add_option("--view", serve_view, "View script materialized at startup");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }

  try {
    if (generate->parsed()) {
      techgap::ScenarioSpec spec;
      if (!spec_path.empty()) {
        spec = techgap::ScenarioSpec::load(spec_path);
      } else if (preset == "control") {
        spec = techgap::ScenarioSpec::control();
      } else if (preset == "gap") {
        spec = techgap::ScenarioSpec::gap_default();
      } else {
        spec = techgap::ScenarioSpec::densification();
      }
      if (seed) spec.seed = *seed;
      auto scenario = techgap::generate_scenario(spec);
      techgap::write_scenario(scenario, out_dir);
      json out = {{"out", out_dir}, {"spec", spec.to_json()}, {"ledger", scenario.ledger}};
      emit(g, out, "wrote scenario (seed " + std::to_string(spec.seed) + ") to " + out_dir);
      return 0;
    }

    const techgap::ServiceConfig config = load_config(g);

    if (serve->parsed()) {
      techgap::ServiceConfig c = config;
      if (serve_port) c.port = *serve_port;
      if (!serve_host.empty()) c.host = serve_host;
      if (!serve_view.empty()) c.view = serve_view;
      techgap::Service service(c);
      service.start();
      std::cout << "listening on " << c.host << ":" << service.port() << std::endl;
      std::signal(SIGINT, [](int) { g_stop = 1; });
      std::signal(SIGTERM, [](int) { g_stop = 1; });
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
      service.stop();
      return 0;
    }

    techgap::Workspace ws(config.data_dir);
    techgap::Pipeline pipe(ws, config.defaults);

    if (ingest->parsed()) {
      auto kind = techgap::parse_source_kind(ingest_kind);
      if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown source kind '" + ingest_kind + "'");
      techgap::LoadedBatch batch;
      json out;
      if (validate_only || !ws.has_snapshot()) {
        batch = techgap::load_source(*kind, ingest_file);
        out = {{"batch", techgap::to_json(batch)}, {"snapshot_id", nullptr}};
      } else {
        auto snap = ws.ingest(*kind, ingest_file, &batch);
        out = {{"batch", techgap::to_json(batch)}, {"snapshot_id", snap->id()}};
      }
      emit(g, out,
           std::to_string(batch.records.record_count()) + " accepted, " + std::to_string(batch.rejected.size()) +
               " rejected" + (out["snapshot_id"].is_null() ? "" : "; snapshot " + out["snapshot_id"].get<std::string>()));
      return 0;
    }
    if (materialize->parsed()) {
      json out = pipe.materialize({{"view", view_path}});
      emit(g, out, "snapshot " + out["snapshot_id"].get<std::string>() + " as of " + out["as_of"].get<std::string>());
      return 0;
    }
    if (expand->parsed()) {
      json out = pipe.expand(expand_args.request());
      std::string summary;
      for (const auto& c : out["concepts"]) summary += c["id"].get<std::string>() + "\t" + c["label"].get<std::string>() + "\n";
      summary += std::to_string(out["concepts"].size()) + " concepts, " + out["instances"].dump() + " instances";
      emit(g, out, summary);
      return 0;
    }
    if (detect->parsed()) {
      json req = detect_args.request();
      detect_roi.apply(req);
      auto snap = ws.current();
      auto params = pipe.landscape_params(req);
      auto q = techgap::expansion_query_from_json(req);
      if (!req.contains("max_depth")) q.max_depth = config.defaults.max_depth;
      auto expansion = snap->ontology().expand_query(q);
      auto index = ws.index(snap, params.roi.mask);
      auto seeds = snap->concepts_to_instances(expansion);
      auto rois = techgap::detect_densifying_regions(snap->graph(), *index, seeds, params.roi);
      json list = json::array();
      std::string summary;
      for (const auto& r : rois) {
        list.push_back(techgap::to_json(r, snap->graph()));
        summary += r.roi_id + "\t" + std::to_string(r.nodes.size()) + " nodes\n";
      }
      summary += std::to_string(rois.size()) + " regions";
      emit(g, {{"snapshot_id", snap->id()}, {"query", techgap::to_json(q)}, {"rois", list}}, summary);
      return 0;
    }
    if (landscape->parsed()) {
      json req = land_args.request();
      land_roi.apply(req);
      json out = pipe.landscape(req);
      emit(g, out,
           "landscape " + out["landscape_id"].get<std::string>() + ": " + std::to_string(out["rois"].size()) +
               " regions, " + std::to_string(out["C"]["nodes"].size()) + " organizations, " +
               std::to_string(out["P"]["rows"].size()) + " performance rows");
      return 0;
    }
    if (gap->parsed()) {
      json req = {{"me", gap_me}};
      if (!gap_landscape.empty()) req["landscape_id"] = gap_landscape;
      if (!gap_theta.empty()) req["theta"] = theta_json(gap_theta);
      if (!gap_cond.empty()) req["cond"] = techgap::ConditionSet::load(gap_cond).to_json();
      if (gap_gamma) req["gamma"] = *gap_gamma;
      if (gap_radius) req["ego_radius"] = *gap_radius;
      if (gap_min_size) req["min_size"] = *gap_min_size;
      if (gap_branches) req["max_branches"] = *gap_branches;
      json out = pipe.gap(req);
      std::string summary;
      for (const auto& r : out["results"]) {
        summary += r["name"].get<std::string>() + "\t" + r["distance"].dump() + "\t" + kpi_line(r["kpis"]) + "\n";
      }
      summary += std::to_string(out["results"].size()) + " competitors above theta " + out["query"]["theta"].dump();
      emit(g, out, summary);
      return 0;
    }
    if (compare->parsed()) {
      json req = {{"me", cmp_me}, {"tech_a", cmp_a}, {"tech_b", cmp_b}};
      if (!cmp_theta.empty()) req["theta"] = theta_json(cmp_theta);
      if (cmp_depth) req["max_depth"] = *cmp_depth;
      cmp_roi.apply(req);
      json out = pipe.compare(req);
      std::string summary;
      for (const char* side : {"a", "b"}) {
        const auto& s = out[side];
        summary += s["tech"].get<std::string>() + ": gap " + s["gap_magnitude"].dump() + ", leaders";
        for (const auto& l : s["leaders"]) summary += " " + l["name"].get<std::string>();
        summary += "\n";
      }
      summary.pop_back();
      emit(g, out, summary);
      return 0;
    }
    if (chart->parsed()) {
      std::map<std::string, std::string> params;
      if (!chart_me.empty()) params["me"] = chart_me;
      if (!chart_a.empty()) params["tech_a"] = chart_a;
      if (!chart_b.empty()) params["tech_b"] = chart_b;
      json out = pipe.chart(chart_landscape, chart_kind, params);
      std::cout << techgap::render(out);
      return 0;
    }
  } catch (const Error& e) {
    if (g.json_out) std::cout << techgap::render(techgap::error_json(techgap::to_string(e.code()), e.what()));
    std::cerr << "error: " << techgap::to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
