#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tableforge/eval.hpp"
#include "tableforge/trajectory.hpp"

namespace tableforge {

enum class RunMode { kTwoStage, kOracle, kEndToEnd };
std::string_view to_string(RunMode m);
std::optional<RunMode> parse_run_mode(std::string_view name);

struct PromptTemplate {
  std::string system;
  std::string user;  // placeholders: {question} {image} {anchors} {labels}
};

struct Prompts {
  std::string version;
  PromptTemplate stage1;
  PromptTemplate stage2;
  PromptTemplate end_to_end;
  std::string anchor_block;  // wraps {anchors} when stage 2 has any
};

// Throws Error{kIoError | kSchemaError}.
Prompts load_prompts(const std::string& path);
Prompts prompts_from_json(const nlohmann::json& j);

// Replaces each {name} present in vars; unknown placeholders stay verbatim.
std::string fill_template(std::string_view text, const std::map<std::string, std::string>& vars);

struct ModelRequest {
  std::string instance_id;
  int stage = 1;  // 2 also for end-to-end
  std::string system_prompt;
  std::string prompt;
  std::string question;
  std::string image_path;
  std::optional<std::string> anchors;
};

// Implementations must be safe to call from several threads at once.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual std::string_view kind() const = 0;
  // Throws Error{kBackendTimeout | kBackendError}.
  virtual std::string complete(const ModelRequest& request) = 0;
};

// Stage 1: the instance's ground-truth boxes. Stage 2: reads the cell under
// the last anchored cell box and answers with its value.
class OracleBackend : public ModelBackend {
 public:
  OracleBackend(const std::vector<TrajectoryInstance>& instances, const std::map<std::string, TableAsset>& tables);
  std::string_view kind() const override { return "oracle"; }
  std::string complete(const ModelRequest& request) override;

 private:
  std::map<std::string, const TrajectoryInstance*> instances_;
  const std::map<std::string, TableAsset>& tables_;
};

// Canned responses keyed by (id, stage), loaded from JSON Lines
// {"id", "stage", "text"}; a later line replaces an earlier one.
class ReplayBackend : public ModelBackend {
 public:
  explicit ReplayBackend(const std::string& path);
  explicit ReplayBackend(std::map<std::pair<std::string, int>, std::string> responses);
  std::string_view kind() const override { return "replay"; }
  std::string complete(const ModelRequest& request) override;

 private:
  std::map<std::pair<std::string, int>, std::string> responses_;
};

struct RemoteConfig {
  std::string url;  // scheme://host:port
  std::string path = "/v1/complete";
  int timeout_ms = 30000;
  int retries = 2;  // extra attempts after the first
};

// POST {"stage", "question", "image" (base64 PNG), "anchors"?, "system", "prompt"}
// and expects {"text"}.
class RemoteBackend : public ModelBackend {
 public:
  explicit RemoteBackend(RemoteConfig config);
  std::string_view kind() const override { return "remote"; }
  std::string complete(const ModelRequest& request) override;

 private:
  RemoteConfig config_;
};

struct StageOneResult {
  std::string reason;
  std::vector<GroundingLine> predicted;
  std::string raw;
};

// Throws Error{kBackendTimeout | kBackendError | kNoValidLines}.
StageOneResult run_stage1(const TrajectoryInstance& instance, ModelBackend& backend, const Prompts& prompts);

struct StageTwoResult {
  std::string answer;
  std::string raw;
};

// Text after the last "Answer:" marker, to the end of its line, trimmed.
// Throws Error{kAnswerMissing}.
std::string extract_answer(std::string_view text);

// Stage-2 prompt; anchors == nullopt sends no anchor block. Throws Error{kBackendTimeout |
// kBackendError | kAnswerMissing}.
StageTwoResult run_stage2(const TrajectoryInstance& instance, const std::optional<std::string>& anchors,
                          ModelBackend& backend, const Prompts& prompts);

// Single prompt with the end-to-end template and no anchors.
StageTwoResult run_end_to_end(const TrajectoryInstance& instance, ModelBackend& backend, const Prompts& prompts);

struct StageOneRecord {
  StageOneResult result;
  bool gt_substituted = false;
  bool localization_failed = false;
};

struct RunRecord {
  std::string instance_id;
  RunMode mode = RunMode::kTwoStage;
  Category category = Category::kRetrieval;
  std::size_t n_gt_boxes = 0;
  std::optional<StageOneRecord> stage1;
  std::optional<std::string> anchors_sent;
  std::string stage2_raw;
  std::string stage2_answer;
  std::string gold;
  bool correct = false;
  std::vector<std::string> errors;
  std::vector<double> ious;  // matched pair IoUs, two-stage only
  double stage1_ms = 0;
  double stage2_ms = 0;
};

// Timing varies run to run; leave it out for reproducible result files.
nlohmann::json to_json(const RunRecord& r, bool include_timing = true);

struct RunOptions {
  RunMode mode = RunMode::kTwoStage;
  std::size_t jobs = 1;
};

struct RunResult {
  std::vector<RunRecord> records;  // sorted by instance id
  AccuracyReport report;
  std::optional<IoUSummary> iou;
};

// Per-instance failures are recorded on the record and never stop the run.
// Throws Error{kEmptyInput} for an empty instance list.
RunResult run_pipeline(const std::vector<TrajectoryInstance>& instances, ModelBackend& stage1_backend,
                       ModelBackend& stage2_backend, const Prompts& prompts, const RunOptions& options);

struct RunPoint {
  std::string name;
  double median_iou = 0;
  double accuracy = 0;
};

struct Trend {
  std::vector<RunPoint> points;  // ascending median IoU
  double rank_correlation = 0;   // Spearman; 0 when either side has no spread
};

// Throws Error{kTooFewRuns}.
Trend correlate_runs(std::vector<RunPoint> runs);

}  // namespace tableforge
