#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "techgap/charts.hpp"
#include "techgap/gap.hpp"
#include "techgap/kg_store.hpp"
#include "techgap/landscape.hpp"

namespace techgap {

/// Payload text shared by the HTTP API and the CLI: two-space indented JSON
/// plus a trailing newline.
std::string render(const nlohmann::json& j);

/// `{"error": {"code", "message"}}`.
nlohmann::json error_json(std::string_view code, std::string_view message);

struct PipelineDefaults {
  unsigned max_depth = 8;
  std::size_t min_nodes = 100;
  double min_clust = 0.7;
  unsigned history = 5;
  double gamma = 0.8;
  double theta = 0.5;

  bool operator==(const PipelineDefaults&) const = default;
};

nlohmann::json to_json(const PipelineDefaults& d);

inline constexpr std::string_view kEnvPrefix = "TECHGAP_";

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "techgap-data";
  /// View script materialized at startup when set.
  std::optional<std::filesystem::path> view;
  unsigned workers = 2;
  /// Socket read/write bound per request.
  unsigned request_timeout_s = 30;
  PipelineDefaults defaults;

  /// Top-level host, port, data_dir, view, workers, request_timeout_s and a
  /// [pipeline] table. Relative paths resolve against `base_dir`.
  static ServiceConfig parse_toml(std::string_view text, const std::filesystem::path& base_dir = {});
  static ServiceConfig load(const std::filesystem::path& path);

  /// Applies TECHGAP_HOST, TECHGAP_PORT, TECHGAP_DATA_DIR, TECHGAP_VIEW,
  /// TECHGAP_WORKERS, TECHGAP_REQUEST_TIMEOUT_S, TECHGAP_MAX_DEPTH,
  /// TECHGAP_MIN_NODES, TECHGAP_MIN_CLUST, TECHGAP_HISTORY, TECHGAP_GAMMA and
  /// TECHGAP_THETA. `lookup` defaults to the process environment.
  void apply_env(const std::function<std::optional<std::string>(const std::string&)>& lookup = {});

  nlohmann::json to_json() const;
};

/// On-disk state under one data directory:
///   snapshots/<id>/{ontology.json, <kind>.jsonl, view.json, store/}
///   snapshots/CURRENT
///   landscapes/<id>.json, landscapes/LATEST
///   rois/<roi_id>.json
///   jobs/<id>.json
/// Snapshots are reloaded by re-materializing their persisted inputs.
class Workspace {
 public:
  explicit Workspace(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  /// Loads the script's ontology and sources, materializes and makes the
  /// result current.
  SnapshotPtr materialize(const ViewScript& script, std::vector<LoadedBatch>* batches = nullptr);
  /// Refreshes the current snapshot with one more source file.
  SnapshotPtr ingest(SourceKind kind, const std::filesystem::path& path, LoadedBatch* batch = nullptr);

  /// Throws MissingSnapshot.
  SnapshotPtr current() const;
  bool has_snapshot() const;
  /// Throws MissingSnapshot.
  SnapshotPtr snapshot(const std::string& id) const;

  /// Cached per snapshot and mask.
  std::shared_ptr<const TemporalCommunityIndex> index(const SnapshotPtr& snapshot, EdgeKindMask mask) const;

  /// Writes the bundle and its ROIs; returns the bundle.
  nlohmann::json save_landscape(const ViewSnapshot& snapshot, const Landscape& landscape);
  /// Throws UnknownLandscape.
  nlohmann::json landscape_json(const std::string& id) const;
  /// The landscape with the snapshot it was built on. Throws UnknownLandscape.
  std::pair<SnapshotPtr, Landscape> load_landscape(const std::string& id) const;
  std::optional<std::string> latest_landscape() const;

  std::filesystem::path jobs_dir() const { return root_ / "jobs"; }

 private:
  SnapshotPtr persist(SnapshotPtr snapshot);
  SnapshotPtr read_snapshot(const std::string& id) const;

  std::filesystem::path root_;
  mutable std::mutex mutex_;
  std::mutex writer_;
  mutable std::map<std::string, SnapshotPtr> snapshots_;
  mutable std::map<std::pair<std::string, std::string>, std::shared_ptr<const TemporalCommunityIndex>> indices_;
};

/// Request → payload functions behind both the HTTP routes and the CLI.
class Pipeline {
 public:
  Pipeline(Workspace& workspace, PipelineDefaults defaults) : ws_(workspace), defaults_(defaults) {}

  Workspace& workspace() { return ws_; }
  const PipelineDefaults& defaults() const { return defaults_; }

  /// `{pos, neg?, max_depth?, neg_max_depth?, relations?}` →
  /// `{query, concepts: [{id, label}], instances}`.
  nlohmann::json expand(const nlohmann::json& request) const;
  /// Expansion query fields plus `context?`, `params?` or the flat overrides
  /// min_nodes, min_clust, history, merge_jaccard, mask, ontology_levels.
  /// Persists and returns the landscape bundle.
  nlohmann::json landscape(const nlohmann::json& request, const std::function<void(double)>& progress = {});
  nlohmann::json get_landscape(const std::string& id) const;
  /// Gap query; a missing landscape_id means the latest landscape.
  nlohmann::json gap(const nlohmann::json& request) const;
  /// `{me, tech_a, tech_b, context?, ...}`.
  nlohmann::json compare(const nlohmann::json& request) const;
  /// `params` carries me, tech_a, tech_b for the comparative chart.
  nlohmann::json chart(const std::string& landscape_id, std::string_view kind,
                       const std::map<std::string, std::string>& params) const;
  /// `{view: path}` or `{script: {...}}` → `{snapshot_id, as_of, counts, rejected}`.
  nlohmann::json materialize(const nlohmann::json& request);
  nlohmann::json health() const;

  LandscapeParams landscape_params(const nlohmann::json& request) const;
  GapQuery gap_defaults() const;

 private:
  Workspace& ws_;
  PipelineDefaults defaults_;
};

enum class JobKind : std::uint8_t { Materialize, Landscape, Gap };
enum class JobState : std::uint8_t { Queued, Running, Done, Failed };

std::string_view to_string(JobKind kind) noexcept;
std::string_view to_string(JobState state) noexcept;

struct JobTicket {
  std::string job_id;
  JobKind kind = JobKind::Landscape;
  JobState state = JobState::Queued;
  double progress = 0.0;
  /// Reference to the produced artifact, e.g. {landscape_id}.
  nlohmann::json result;
  std::optional<std::pair<std::string, std::string>> error;

  nlohmann::json to_json() const;
  static JobTicket from_json(const nlohmann::json& j);
};

/// Fixed worker pool; every state change is written to `dir`. Tickets left
/// queued or running by a previous process are marked failed on startup.
class JobManager {
 public:
  using Work = std::function<nlohmann::json(const std::function<void(double)>& progress)>;

  JobManager(std::filesystem::path dir, unsigned workers);
  ~JobManager();
  JobManager(const JobManager&) = delete;
  JobManager& operator=(const JobManager&) = delete;

  JobTicket submit(JobKind kind, Work work);
  /// Throws UnknownJob.
  JobTicket get(const std::string& job_id) const;
  /// Blocks until the job is done or failed.
  JobTicket wait(const std::string& job_id) const;

 private:
  void run_worker();
  void store(const JobTicket& ticket);

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::condition_variable queued_;
  std::map<std::string, JobTicket> jobs_;
  std::deque<std::pair<std::string, Work>> queue_;
  std::vector<std::thread> workers_;
  std::uint64_t next_id_ = 1;
  bool stopping_ = false;
};

/// HTTP front end: POST /expand, /landscape, /materialize, /gap, /compare;
/// GET /landscape/{id}, /chart/{landscape}/{kind}, /jobs/{id}, /health.
class Service {
 public:
  /// Materializes `config.view` when set. Throws MissingSnapshot when the
  /// data directory holds no snapshot either.
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds (port 0 picks a free one) and serves on a background thread.
  /// Throws PortInUse.
  void start();
  void stop();
  /// Blocks until stop().
  void wait();
  int port() const { return port_; }

  Pipeline& pipeline() { return *pipeline_; }

 private:
  struct Impl;
  ServiceConfig config_;
  std::unique_ptr<Workspace> workspace_;
  std::unique_ptr<Pipeline> pipeline_;
  std::unique_ptr<JobManager> jobs_;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace techgap
