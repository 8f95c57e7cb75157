#include "techgap/service.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "techgap/error.hpp"
#include "toml.hpp"

namespace techgap {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Write-then-rename so readers never observe a partial file.
void write_file(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// Ids become file names; only a conservative alphabet is accepted.
bool safe_id(std::string_view id) {
  return !id.empty() && id.size() <= 128 && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
}

std::string source_file(SourceKind kind) { return std::string(to_string(kind)) + ".jsonl"; }

template <typename T>
void set_if(const toml::table& t, std::string_view key, T& target) {
  if (auto v = t[key].value<T>()) target = *v;
}

template <typename T>
void set_unsigned(const toml::table& t, std::string_view key, T& target) {
  if (auto v = t[key].value<std::int64_t>()) {
    if (*v < 0) throw Error(ErrorCode::InvalidArgument, std::string(key) + " must be nonnegative");
    target = static_cast<T>(*v);
  }
}

double parse_number(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, key + " must be numeric, got '" + text + "'");
  }
}

/// "0.4", "inf" and the like, as accepted on query strings and in the environment.
double theta_from_text(const std::string& text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  return theta_from_json(j.is_number() ? j : nlohmann::json(text));
}

nlohmann::json merged(nlohmann::json base, const nlohmann::json& patch) {
  base.merge_patch(patch);
  return base;
}

}  // namespace

std::string render(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json error_json(std::string_view code, std::string_view message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

nlohmann::json to_json(const PipelineDefaults& d) {
  return {{"max_depth", d.max_depth}, {"min_nodes", d.min_nodes}, {"min_clust", d.min_clust},
          {"history", d.history},     {"gamma", d.gamma},         {"theta", theta_to_json(d.theta)}};
}

// ---------------------------------------------------------------- config

ServiceConfig ServiceConfig::parse_toml(std::string_view text, const fs::path& base_dir) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("service config: ") + std::string(e.description()));
  }
  ServiceConfig c;
  set_if(tbl, "host", c.host);
  if (auto p = tbl["port"].value<std::int64_t>()) {
    if (*p < 0 || *p > 65535) throw Error(ErrorCode::InvalidArgument, "port out of range");
    c.port = static_cast<int>(*p);
  }
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base_dir / p; };
  if (auto d = tbl["data_dir"].value<std::string>()) c.data_dir = resolve(*d);
  if (auto v = tbl["view"].value<std::string>()) c.view = resolve(*v);
  set_unsigned(tbl, "workers", c.workers);
  set_unsigned(tbl, "request_timeout_s", c.request_timeout_s);
  if (const auto* p = tbl["pipeline"].as_table()) {
    set_unsigned(*p, "max_depth", c.defaults.max_depth);
    set_unsigned(*p, "min_nodes", c.defaults.min_nodes);
    set_if(*p, "min_clust", c.defaults.min_clust);
    set_unsigned(*p, "history", c.defaults.history);
    set_if(*p, "gamma", c.defaults.gamma);
    if (auto t = (*p)["theta"].value<double>()) {
      c.defaults.theta = *t;
    } else if (auto s = (*p)["theta"].value<std::string>()) {
      c.defaults.theta = theta_from_json(*s);
    }
  }
  if (c.workers == 0) throw Error(ErrorCode::InvalidArgument, "workers must be at least 1");
  return c;
}

ServiceConfig ServiceConfig::load(const fs::path& path) {
  return parse_toml(read_file(path), fs::absolute(path).parent_path());
}

void ServiceConfig::apply_env(const std::function<std::optional<std::string>(const std::string&)>& lookup) {
  auto get = [&](const char* name) -> std::optional<std::string> {
    const std::string key = std::string(kEnvPrefix) + name;
    if (lookup) return lookup(key);
    if (const char* v = std::getenv(key.c_str())) return std::string(v);
    return std::nullopt;
  };
  auto num = [&](const char* name) -> std::optional<double> {
    auto v = get(name);
    if (!v) return std::nullopt;
    return parse_number(std::string(kEnvPrefix) + name, *v);
  };
  auto whole = [&](const char* name) -> std::optional<std::size_t> {
    auto v = num(name);
    if (!v) return std::nullopt;
    if (*v < 0 || *v != std::floor(*v)) {
      throw Error(ErrorCode::InvalidArgument, std::string(kEnvPrefix) + name + " must be a nonnegative integer");
    }
    return static_cast<std::size_t>(*v);
  };
  if (auto v = get("HOST")) host = *v;
  if (auto v = whole("PORT")) port = static_cast<int>(*v);
  if (auto v = get("DATA_DIR")) data_dir = *v;
  if (auto v = get("VIEW")) view = fs::path(*v);
  if (auto v = whole("WORKERS")) workers = static_cast<unsigned>(*v);
  if (auto v = whole("REQUEST_TIMEOUT_S")) request_timeout_s = static_cast<unsigned>(*v);
  if (auto v = whole("MAX_DEPTH")) defaults.max_depth = static_cast<unsigned>(*v);
  if (auto v = whole("MIN_NODES")) defaults.min_nodes = *v;
  if (auto v = num("MIN_CLUST")) defaults.min_clust = *v;
  if (auto v = whole("HISTORY")) defaults.history = static_cast<unsigned>(*v);
  if (auto v = num("GAMMA")) defaults.gamma = *v;
  if (auto v = get("THETA")) defaults.theta = theta_from_text(*v);
  if (workers == 0) throw Error(ErrorCode::InvalidArgument, "workers must be at least 1");
}

nlohmann::json ServiceConfig::to_json() const {
  return {{"host", host},
          {"port", port},
          {"data_dir", data_dir.string()},
          {"view", view ? nlohmann::json(view->string()) : nlohmann::json(nullptr)},
          {"workers", workers},
          {"request_timeout_s", request_timeout_s},
          {"pipeline", techgap::to_json(defaults)}};
}

// ---------------------------------------------------------------- workspace

Workspace::Workspace(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_ / "snapshots");
  fs::create_directories(root_ / "landscapes");
  fs::create_directories(root_ / "rois");
  fs::create_directories(root_ / "jobs");
}

SnapshotPtr Workspace::materialize(const ViewScript& script, std::vector<LoadedBatch>* batches) {
  std::lock_guard writer(writer_);
  auto onto = std::make_shared<const Ontology>(Ontology::load(script.ontology_path));
  SourceBundle sources = load_script_sources(script, batches);
  return persist(materialize_view(std::move(onto), std::move(sources), script));
}

SnapshotPtr Workspace::ingest(SourceKind kind, const fs::path& path, LoadedBatch* batch) {
  std::lock_guard writer(writer_);
  SnapshotPtr base = current();
  LoadedBatch loaded = load_source(kind, path);
  SnapshotPtr next = persist(refresh(*base, loaded.records));
  if (batch) *batch = std::move(loaded);
  return next;
}

SnapshotPtr Workspace::persist(SnapshotPtr snapshot) {
  const fs::path dir = root_ / "snapshots" / snapshot->id();
  write_file(dir / "ontology.json", snapshot->ontology().to_json().dump(2) + "\n");
  ViewScript script = snapshot->script();
  script.ontology_path = "ontology.json";
  script.source_paths.clear();
  for (SourceKind kind : kAllSourceKinds) {
    std::ostringstream out;
    write_source(kind, snapshot->sources(), out);
    write_file(dir / source_file(kind), out.str());
    script.source_paths[kind].push_back(source_file(kind));
  }
  write_file(dir / "view.json", script.to_json().dump(2) + "\n");
  snapshot->dump().write(dir / "store");
  write_file(root_ / "snapshots" / "CURRENT", snapshot->id() + "\n");
  std::lock_guard lock(mutex_);
  snapshots_[snapshot->id()] = snapshot;
  return snapshot;
}

SnapshotPtr Workspace::read_snapshot(const std::string& id) const {
  const fs::path dir = root_ / "snapshots" / id;
  if (!safe_id(id) || !fs::exists(dir / "view.json")) {
    throw Error(ErrorCode::MissingSnapshot, "no snapshot '" + id + "' in " + root_.string());
  }
  ViewScript script = ViewScript::from_json(nlohmann::json::parse(read_file(dir / "view.json")));
  script.ontology_path = dir / script.ontology_path;
  for (auto& [kind, paths] : script.source_paths) {
    for (auto& p : paths) p = dir / p;
  }
  auto onto = std::make_shared<const Ontology>(Ontology::load(script.ontology_path));
  SnapshotPtr snap = materialize_view(std::move(onto), load_script_sources(script), script);
  if (snap->id() != id) {
    throw Error(ErrorCode::IoError, "snapshot " + id + " re-materialized as " + snap->id());
  }
  return snap;
}

bool Workspace::has_snapshot() const { return fs::exists(root_ / "snapshots" / "CURRENT"); }

SnapshotPtr Workspace::current() const {
  if (!has_snapshot()) {
    throw Error(ErrorCode::MissingSnapshot, "no snapshot has been materialized in " + root_.string());
  }
  std::string id = read_file(root_ / "snapshots" / "CURRENT");
  while (!id.empty() && std::isspace(static_cast<unsigned char>(id.back()))) id.pop_back();
  return snapshot(id);
}

SnapshotPtr Workspace::snapshot(const std::string& id) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = snapshots_.find(id); it != snapshots_.end()) return it->second;
  }
  SnapshotPtr snap = read_snapshot(id);
  std::lock_guard lock(mutex_);
  return snapshots_.emplace(id, std::move(snap)).first->second;
}

std::shared_ptr<const TemporalCommunityIndex> Workspace::index(const SnapshotPtr& snapshot,
                                                               EdgeKindMask mask) const {
  const auto key = std::make_pair(snapshot->id(), techgap::to_json(mask).dump());
  {
    std::lock_guard lock(mutex_);
    if (auto it = indices_.find(key); it != indices_.end()) return it->second;
  }
  auto built = std::make_shared<const TemporalCommunityIndex>(build_temporal_index(*snapshot, mask));
  std::lock_guard lock(mutex_);
  return indices_.emplace(key, std::move(built)).first->second;
}

nlohmann::json Workspace::save_landscape(const ViewSnapshot& snapshot, const Landscape& landscape) {
  nlohmann::json bundle = to_json(landscape, snapshot.graph());
  for (const auto& roi : landscape.rois) {
    write_file(root_ / "rois" / (roi.roi_id + ".json"), render(to_json(roi, snapshot.graph())));
  }
  write_file(root_ / "landscapes" / (landscape.landscape_id + ".json"), render(bundle));
  write_file(root_ / "landscapes" / "LATEST", landscape.landscape_id + "\n");
  return bundle;
}

nlohmann::json Workspace::landscape_json(const std::string& id) const {
  const fs::path path = root_ / "landscapes" / (id + ".json");
  if (!safe_id(id) || !fs::exists(path)) throw Error(ErrorCode::UnknownLandscape, "unknown landscape '" + id + "'");
  return nlohmann::json::parse(read_file(path));
}

std::pair<SnapshotPtr, Landscape> Workspace::load_landscape(const std::string& id) const {
  nlohmann::json j = landscape_json(id);
  SnapshotPtr snap = snapshot(j.at("provenance").at("snapshot_id").get<std::string>());
  return {snap, landscape_from_json(j, snap->graph())};
}

std::optional<std::string> Workspace::latest_landscape() const {
  const fs::path path = root_ / "landscapes" / "LATEST";
  if (!fs::exists(path)) return std::nullopt;
  std::string id = read_file(path);
  while (!id.empty() && std::isspace(static_cast<unsigned char>(id.back()))) id.pop_back();
  return id;
}

// ---------------------------------------------------------------- pipeline

namespace {

ExpansionQuery expansion_request(const nlohmann::json& request, const PipelineDefaults& defaults) {
  if (!request.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
  ExpansionQuery q = expansion_query_from_json(request);
  if (!request.contains("max_depth")) q.max_depth = defaults.max_depth;
  if (q.pos.empty()) throw Error(ErrorCode::InvalidArgument, "pos must name at least one term");
  return q;
}

}  // namespace

LandscapeParams Pipeline::landscape_params(const nlohmann::json& request) const {
  LandscapeParams base;
  base.roi.min_nodes = defaults_.min_nodes;
  base.roi.min_clust = defaults_.min_clust;
  base.roi.history = defaults_.history;
  nlohmann::json j = to_json(base);
  if (request.contains("params")) j.merge_patch(request["params"]);
  for (const char* key : {"min_nodes", "min_clust", "history", "merge_jaccard", "mask"}) {
    if (request.contains(key)) j["roi"][key] = request[key];
  }
  if (request.contains("ontology_levels")) j["ontology_levels"] = request["ontology_levels"];
  return landscape_params_from_json(j);
}

GapQuery Pipeline::gap_defaults() const {
  GapQuery q;
  q.theta = defaults_.theta;
  q.gamma = defaults_.gamma;
  return q;
}

nlohmann::json Pipeline::expand(const nlohmann::json& request) const {
  SnapshotPtr snap = ws_.current();
  const ExpansionQuery q = expansion_request(request, defaults_);
  const Ontology& onto = snap->ontology();
  const std::set<std::string> concepts = onto.expand_query(q);
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : concepts) list.push_back({{"id", c}, {"label", onto.node(onto.index_of(c)).preferred_label}});
  return {{"snapshot_id", snap->id()},
          {"query", to_json(q)},
          {"concepts", list},
          {"instances", snap->concepts_to_instances(concepts).size()}};
}

nlohmann::json Pipeline::landscape(const nlohmann::json& request, const std::function<void(double)>& progress) {
  SnapshotPtr snap = ws_.current();
  const ExpansionQuery q = expansion_request(request, defaults_);
  const auto context = request.value("context", std::vector<std::string>{});
  const LandscapeParams params = landscape_params(request);
  if (progress) progress(0.1);
  auto index = ws_.index(snap, params.roi.mask);
  if (progress) progress(0.4);
  Landscape l = run_landscape(*snap, *index, q, params, context);
  if (progress) progress(0.9);
  return ws_.save_landscape(*snap, l);
}

nlohmann::json Pipeline::get_landscape(const std::string& id) const { return ws_.landscape_json(id); }

nlohmann::json Pipeline::gap(const nlohmann::json& request) const {
  if (!request.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
  nlohmann::json patch = request;
  patch.erase("async");
  GapQuery q = gap_query_from_json(merged(to_json(gap_defaults()), patch));
  if (q.me.empty()) throw Error(ErrorCode::InvalidArgument, "me is required");
  if (q.landscape_id.empty()) {
    // No snapshot at all is the more fundamental failure.
    if (!ws_.has_snapshot()) ws_.current();
    auto latest = ws_.latest_landscape();
    if (!latest) throw Error(ErrorCode::UnknownLandscape, "no landscape has been built yet");
    q.landscape_id = *latest;
  }
  auto [snap, l] = ws_.load_landscape(q.landscape_id);
  return to_json(run_gap(*snap, l, q));
}

nlohmann::json Pipeline::compare(const nlohmann::json& request) const {
  SnapshotPtr snap = ws_.current();
  ComparativeQuery q = comparative_query_from_json(request, landscape_params(request), gap_defaults());
  if (!request.contains("max_depth")) q.max_depth = defaults_.max_depth;
  auto index = ws_.index(snap, q.params.roi.mask);
  return to_json(comparative_gap(*snap, *index, q));
}

nlohmann::json Pipeline::chart(const std::string& landscape_id, std::string_view kind,
                               const std::map<std::string, std::string>& params) const {
  const ChartKind k = parse_chart_kind(kind);
  auto [snap, l] = ws_.load_landscape(landscape_id);
  switch (k) {
    case ChartKind::Spider: return spider_chart(*snap, l);
    case ChartKind::Timeline: return timeline_chart(*snap, l);
    case ChartKind::Comparative: break;
  }
  auto need = [&](const char* key) {
    auto it = params.find(key);
    if (it == params.end() || it->second.empty()) {
      throw Error(ErrorCode::InvalidArgument, std::string("comparative chart needs '") + key + "'");
    }
    return it->second;
  };
  ComparativeQuery q;
  q.me = need("me");
  q.tech_a = need("tech_a");
  q.tech_b = need("tech_b");
  q.context = l.provenance.query.pos;
  q.max_depth = l.provenance.query.max_depth;
  q.params = l.provenance.params;
  q.gap = gap_defaults();
  if (auto it = params.find("theta"); it != params.end()) {
    q.gap.theta = theta_from_text(it->second);
  }
  q.gap.me = q.me;
  auto index = ws_.index(snap, q.params.roi.mask);
  return comparative_chart(comparative_gap(*snap, *index, q), landscape_id);
}

nlohmann::json Pipeline::materialize(const nlohmann::json& request) {
  if (!request.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
  ViewScript script;
  if (request.contains("view")) {
    script = ViewScript::load(request["view"].get<std::string>());
  } else if (request.contains("script")) {
    script = ViewScript::from_json(request["script"]);
  } else {
    throw Error(ErrorCode::InvalidArgument, "materialize needs 'view' or 'script'");
  }
  std::vector<LoadedBatch> batches;
  SnapshotPtr snap = ws_.materialize(script, &batches);
  nlohmann::json sources = nlohmann::json::array();
  for (const auto& b : batches) sources.push_back(to_json(b));
  return {{"snapshot_id", snap->id()},
          {"as_of", format_date(snap->as_of())},
          {"counts",
           {{"entities", snap->table().size()},
            {"nodes", snap->graph().node_count()},
            {"edges", snap->graph().edges().size()},
            {"documents", snap->text().documents().size()}}},
          {"sources", sources}};
}

nlohmann::json Pipeline::health() const {
  nlohmann::json id = nullptr;
  if (ws_.has_snapshot()) id = ws_.current()->id();
  return {{"status", "ok"}, {"snapshot_id", id}};
}

// ---------------------------------------------------------------- jobs

std::string_view to_string(JobKind kind) noexcept {
  switch (kind) {
    case JobKind::Materialize: return "materialize";
    case JobKind::Landscape: return "landscape";
    case JobKind::Gap: return "gap";
  }
  return "landscape";
}

std::string_view to_string(JobState state) noexcept {
  switch (state) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
  }
  return "failed";
}

nlohmann::json JobTicket::to_json() const {
  return {{"job_id", job_id},
          {"kind", techgap::to_string(kind)},
          {"state", techgap::to_string(state)},
          {"progress", progress},
          {"result", result},
          {"error", error ? nlohmann::json{{"code", error->first}, {"message", error->second}}
                          : nlohmann::json(nullptr)}};
}

JobTicket JobTicket::from_json(const nlohmann::json& j) {
  JobTicket t;
  t.job_id = j.at("job_id").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  for (JobKind k : {JobKind::Materialize, JobKind::Landscape, JobKind::Gap}) {
    if (kind == techgap::to_string(k)) t.kind = k;
  }
  const auto state = j.at("state").get<std::string>();
  for (JobState s : {JobState::Queued, JobState::Running, JobState::Done, JobState::Failed}) {
    if (state == techgap::to_string(s)) t.state = s;
  }
  t.progress = j.value("progress", 0.0);
  t.result = j.value("result", nlohmann::json(nullptr));
  if (j.contains("error") && j["error"].is_object()) {
    t.error = std::make_pair(j["error"].value("code", std::string{}), j["error"].value("message", std::string{}));
  }
  return t;
}

JobManager::JobManager(fs::path dir, unsigned workers) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.path().extension() != ".json") continue;
    JobTicket t = JobTicket::from_json(nlohmann::json::parse(read_file(entry.path())));
    if (t.state == JobState::Queued || t.state == JobState::Running) {
      t.state = JobState::Failed;
      t.error = std::make_pair(std::string("JobInterrupted"), std::string("the service stopped before the job finished"));
      store(t);
    }
    if (t.job_id.starts_with("job-")) {
      next_id_ = std::max<std::uint64_t>(next_id_, std::stoull(t.job_id.substr(4)) + 1);
    }
    jobs_.emplace(t.job_id, std::move(t));
  }
  for (unsigned i = 0; i < std::max(1u, workers); ++i) workers_.emplace_back([this] { run_worker(); });
}

JobManager::~JobManager() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  queued_.notify_all();
  for (auto& w : workers_) w.join();
}

void JobManager::store(const JobTicket& ticket) {
  write_file(dir_ / (ticket.job_id + ".json"), render(ticket.to_json()));
}

JobTicket JobManager::submit(JobKind kind, Work work) {
  std::lock_guard lock(mutex_);
  char id[32];
  std::snprintf(id, sizeof id, "job-%06llu", static_cast<unsigned long long>(next_id_++));
  JobTicket t;
  t.job_id = id;
  t.kind = kind;
  store(t);
  jobs_.emplace(t.job_id, t);
  queue_.emplace_back(t.job_id, std::move(work));
  queued_.notify_one();
  return t;
}

JobTicket JobManager::get(const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw Error(ErrorCode::UnknownJob, "unknown job '" + job_id + "'");
  return it->second;
}

JobTicket JobManager::wait(const std::string& job_id) const {
  std::unique_lock lock(mutex_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw Error(ErrorCode::UnknownJob, "unknown job '" + job_id + "'");
  changed_.wait(lock, [&] { return it->second.state == JobState::Done || it->second.state == JobState::Failed; });
  return it->second;
}

void JobManager::run_worker() {
  for (;;) {
    std::pair<std::string, Work> next;
    {
      std::unique_lock lock(mutex_);
      queued_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      next = std::move(queue_.front());
      queue_.pop_front();
      auto& t = jobs_.at(next.first);
      t.state = JobState::Running;
      store(t);
    }
    changed_.notify_all();
    auto progress = [&](double p) {
      std::lock_guard lock(mutex_);
      jobs_.at(next.first).progress = std::clamp(p, 0.0, 1.0);
    };
    nlohmann::json result;
    std::optional<std::pair<std::string, std::string>> error;
    try {
      result = next.second(progress);
    } catch (const Error& e) {
      error = std::make_pair(std::string(to_string(e.code())), std::string(e.what()));
    } catch (const std::exception& e) {
      error = std::make_pair(std::string("Internal"), std::string(e.what()));
    }
    {
      std::lock_guard lock(mutex_);
      auto& t = jobs_.at(next.first);
      if (error) {
        t.state = JobState::Failed;
        t.error = std::move(error);
      } else {
        t.state = JobState::Done;
        t.progress = 1.0;
        t.result = std::move(result);
      }
      store(t);
    }
    changed_.notify_all();
  }
}

// ---------------------------------------------------------------- http

struct Service::Impl {
  httplib::Server server;
  std::thread thread;
};

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  workspace_ = std::make_unique<Workspace>(config_.data_dir);
  pipeline_ = std::make_unique<Pipeline>(*workspace_, config_.defaults);
  if (config_.view) {
    workspace_->materialize(ViewScript::load(*config_.view));
  } else if (!workspace_->has_snapshot()) {
    throw Error(ErrorCode::MissingSnapshot,
                "no snapshot in " + config_.data_dir.string() + "; materialize one or configure a view");
  }
  jobs_ = std::make_unique<JobManager>(workspace_->jobs_dir(), config_.workers);
  impl_ = std::make_unique<Impl>();
}

Service::~Service() { stop(); }

namespace {

nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  auto j = nlohmann::json::parse(req.body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::InvalidArgument, "request body is not valid JSON");
  return j;
}

template <typename F>
void respond(httplib::Response& res, F&& produce) {
  try {
    auto [status, body] = produce();
    res.status = status;
    res.set_content(render(body), "application/json");
  } catch (const Error& e) {
    res.status = http_status(e.code());
    res.set_content(render(error_json(to_string(e.code()), e.what())), "application/json");
  } catch (const nlohmann::json::exception& e) {
    res.status = 400;
    res.set_content(render(error_json("InvalidArgument", e.what())), "application/json");
  } catch (const std::exception& e) {
    res.status = 500;
    res.set_content(render(error_json("Internal", e.what())), "application/json");
  }
}

}  // namespace

void Service::start() {
  auto& srv = impl_->server;
  Pipeline& pipe = *pipeline_;
  JobManager& jobs = *jobs_;
  using Req = httplib::Request;
  using Res = httplib::Response;
  using Out = std::pair<int, nlohmann::json>;

  // SO_REUSEADDR only: the library default adds SO_REUSEPORT, which would let
  // a second service share the port silently.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });
  srv.set_read_timeout(config_.request_timeout_s, 0);
  srv.set_write_timeout(config_.request_timeout_s, 0);

  srv.Get("/health", [&](const Req&, Res& res) { respond(res, [&] { return Out{200, pipe.health()}; }); });
  srv.Post("/expand", [&](const Req& req, Res& res) {
    respond(res, [&] { return Out{200, pipe.expand(parse_body(req))}; });
  });
  srv.Post("/landscape", [&](const Req& req, Res& res) {
    respond(res, [&] {
      nlohmann::json body = parse_body(req);
      pipe.expand(body);  // unknown terms fail here rather than inside the job
      pipe.landscape_params(body);
      auto ticket = jobs.submit(JobKind::Landscape, [&pipe, body](const auto& progress) {
        auto bundle = pipe.landscape(body, progress);
        return nlohmann::json{{"landscape_id", bundle["landscape_id"]}};
      });
      return Out{202, ticket.to_json()};
    });
  });
  srv.Post("/materialize", [&](const Req& req, Res& res) {
    respond(res, [&] {
      nlohmann::json body = parse_body(req);
      auto ticket = jobs.submit(JobKind::Materialize, [&pipe, body](const auto&) {
        auto out = pipe.materialize(body);
        return nlohmann::json{{"snapshot_id", out["snapshot_id"]}};
      });
      return Out{202, ticket.to_json()};
    });
  });
  srv.Get(R"(/landscape/([^/]+))", [&](const Req& req, Res& res) {
    respond(res, [&] { return Out{200, pipe.get_landscape(req.matches[1])}; });
  });
  srv.Post("/gap", [&](const Req& req, Res& res) {
    respond(res, [&] {
      nlohmann::json body = parse_body(req);
      if (body.is_object() && body.value("async", false)) {
        auto ticket = jobs.submit(JobKind::Gap, [&pipe, body](const auto&) { return pipe.gap(body); });
        return Out{202, ticket.to_json()};
      }
      return Out{200, pipe.gap(body)};
    });
  });
  srv.Post("/compare", [&](const Req& req, Res& res) {
    respond(res, [&] { return Out{200, pipe.compare(parse_body(req))}; });
  });
  srv.Get(R"(/chart/([^/]+)/([^/]+))", [&](const Req& req, Res& res) {
    respond(res, [&] {
      std::map<std::string, std::string> params;
      for (const auto& [k, v] : req.params) params.emplace(k, v);
      return Out{200, pipe.chart(req.matches[1], std::string(req.matches[2]), params)};
    });
  });
  srv.Get(R"(/jobs/([^/]+))", [&](const Req& req, Res& res) {
    respond(res, [&] { return Out{200, jobs.get(req.matches[1]).to_json()}; });
  });
  srv.set_error_handler([](const Req& req, Res& res) {
    if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
    res.set_content(render(error_json("NotFound", "no route for " + req.method + " " + req.path)),
                    "application/json");
    return httplib::Server::HandlerResponse::Handled;
  });

  if (config_.port == 0) {
    port_ = srv.bind_to_any_port(config_.host);
    if (port_ <= 0) throw Error(ErrorCode::PortInUse, "cannot bind " + config_.host);
  } else {
    if (!srv.bind_to_port(config_.host, config_.port)) {
      throw Error(ErrorCode::PortInUse, "cannot bind " + config_.host + ":" + std::to_string(config_.port));
    }
    port_ = config_.port;
  }
  impl_->thread = std::thread([&srv] { srv.listen_after_bind(); });
  srv.wait_until_ready();
}

void Service::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void Service::wait() {
  if (impl_ && impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace techgap
