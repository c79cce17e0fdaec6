#include "tableforge/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "tableforge/error.hpp"

namespace tableforge {

using nlohmann::json;

namespace {

constexpr std::string_view kLabels = "column, row, cell, colhead, rowhead";
constexpr std::string_view kMarker = "Answer:";

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::vector<GroundingLine> gt_lines(const TrajectoryInstance& in) {
  std::vector<GroundingLine> out;
  for (const auto& e : in.evidence) out.push_back({e.label, e.bbox_norm});
  return out;
}

std::vector<double> average_ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::kTwoStage: return "two_stage";
    case RunMode::kOracle: return "oracle";
    case RunMode::kEndToEnd: return "end_to_end";
  }
  return "";
}

std::optional<RunMode> parse_run_mode(std::string_view name) {
  for (RunMode m : {RunMode::kTwoStage, RunMode::kOracle, RunMode::kEndToEnd}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

Prompts prompts_from_json(const json& j) {
  try {
    auto tmpl = [&](const char* key) {
      const auto& t = j.at(key);
      return PromptTemplate{t.at("system").get<std::string>(), t.at("user").get<std::string>()};
    };
    Prompts p;
    p.version = j.at("version").get<std::string>();
    p.stage1 = tmpl("stage1");
    p.stage2 = tmpl("stage2");
    p.end_to_end = tmpl("end_to_end");
    p.anchor_block = j.at("anchor_block").get<std::string>();
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("prompt config: ") + e.what());
  }
}

Prompts load_prompts(const std::string& path) {
  try {
    return prompts_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError, path + ": " + e.what());
  }
}

std::string fill_template(std::string_view text, const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      const std::size_t close = text.find('}', i);
      if (close != std::string_view::npos) {
        auto it = vars.find(std::string(text.substr(i + 1, close - i - 1)));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += text[i++];
  }
  return out;
}

OracleBackend::OracleBackend(const std::vector<TrajectoryInstance>& instances,
                             const std::map<std::string, TableAsset>& tables)
    : tables_(tables) {
  for (const auto& in : instances) instances_[in.id] = &in;
}

std::string OracleBackend::complete(const ModelRequest& req) {
  auto it = instances_.find(req.instance_id);
  if (it == instances_.end()) throw Error(ErrorCode::kBackendError, "oracle has no instance " + req.instance_id);
  const TrajectoryInstance& in = *it->second;
  if (req.stage == 1) {
    return "Ground-truth evidence regions.\n" + format_grounding_lines(gt_lines(in));
  }
  auto asset = tables_.find(in.table_id);
  if (asset == tables_.end()) throw Error(ErrorCode::kBackendError, "oracle has no table " + in.table_id);
  const RegionMap& map = asset->second.map;
  std::optional<GroundingLine> last;
  if (req.anchors) {
    for (const auto& line : scan_grounding_output(*req.anchors).lines) {
      if (line.label == LabelType::kCell) last = line;
    }
  }
  if (!last) return "No cell anchor was provided.\nAnswer: unknown";
  const BBox box = denormalize_bbox(last->bbox, map.image_w(), map.image_h());
  const Region* best = nullptr;
  double best_iou = 0.0;
  for (const auto& r : map.regions()) {
    if (r.label != LabelType::kCell) continue;
    const double v = iou(box, r.bbox);
    if (v > best_iou) {
      best_iou = v;
      best = &r;
    }
  }
  if (!best) return "The anchored box covers no cell.\nAnswer: unknown";
  const auto& value = asset->second.spec.cells[*best->grid.row][*best->grid.col];
  return "Reading the anchored cell " + best->id + ".\nAnswer: " + (value.numeric ? value.numeric->to_string() : trim(value.raw));
}

ReplayBackend::ReplayBackend(std::map<std::pair<std::string, int>, std::string> responses)
    : responses_(std::move(responses)) {}

ReplayBackend::ReplayBackend(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIoError, "cannot open replay file " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      responses_[{j.at("id").get<std::string>(), j.at("stage").get<int>()}] = j.at("text").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchemaError, path + ": " + e.what(), line_no);
    }
  }
}

std::string ReplayBackend::complete(const ModelRequest& req) {
  auto it = responses_.find({req.instance_id, req.stage});
  if (it == responses_.end()) {
    throw Error(ErrorCode::kBackendError,
                "no replay response for " + req.instance_id + " stage " + std::to_string(req.stage));
  }
  return it->second;
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
  if (config_.url.empty()) throw Error(ErrorCode::kSchemaError, "remote backend needs a url");
  if (config_.timeout_ms <= 0) throw Error(ErrorCode::kSchemaError, "remote backend needs a positive timeout");
  if (config_.retries < 0) throw Error(ErrorCode::kSchemaError, "remote retry budget cannot be negative");
}

std::string RemoteBackend::complete(const ModelRequest& req) {
  json body = {{"stage", req.stage},
               {"question", req.question},
               {"system", req.system_prompt},
               {"prompt", req.prompt},
               {"image", req.image_path.empty() ? std::string() : httplib::detail::base64_encode(read_file(req.image_path))}};
  if (req.anchors) body["anchors"] = *req.anchors;
  const std::string payload = body.dump();
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  std::string last_error;
  bool timed_out = false;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    httplib::Client client(config_.url);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(config_.path, payload, "application/json");
    if (!res) {
      const auto err = res.error();
      timed_out = err == httplib::Error::Read || err == httplib::Error::Write ||
                  err == httplib::Error::ConnectionTimeout;
      last_error = httplib::to_string(err);
      continue;
    }
    timed_out = false;
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      return json::parse(res->body).at("text").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kBackendError, std::string("malformed response: ") + e.what());
    }
  }
  const std::string what = req.instance_id + " stage " + std::to_string(req.stage) + " after " +
                           std::to_string(config_.retries + 1) + " attempts: " + last_error;
  throw Error(timed_out ? ErrorCode::kBackendTimeout : ErrorCode::kBackendError, what);
}

StageOneResult run_stage1(const TrajectoryInstance& in, ModelBackend& backend, const Prompts& prompts) {
  const std::map<std::string, std::string> vars = {
      {"question", in.question}, {"image", in.image}, {"labels", std::string(kLabels)}};
  ModelRequest req{in.id, 1, fill_template(prompts.stage1.system, vars), fill_template(prompts.stage1.user, vars),
                   in.question, in.image, std::nullopt};
  StageOneResult r;
  r.raw = backend.complete(req);
  const GroundingParse parsed = parse_grounding_output(r.raw);
  r.reason = parsed.reason;
  r.predicted = parsed.lines;
  return r;
}

std::string extract_answer(std::string_view text) {
  const std::size_t at = text.rfind(kMarker);
  if (at == std::string_view::npos) throw Error(ErrorCode::kAnswerMissing, "no \"Answer:\" marker in response");
  std::string_view rest = text.substr(at + kMarker.size());
  rest = rest.substr(0, rest.find('\n'));
  return trim(rest);
}

namespace {

StageTwoResult answer_with(const TrajectoryInstance& in, const PromptTemplate& t,
                           const std::optional<std::string>& anchors, const std::string& block, ModelBackend& backend) {
  const std::map<std::string, std::string> vars = {
      {"question", in.question}, {"image", in.image}, {"labels", std::string(kLabels)}, {"anchors", block}};
  ModelRequest req{in.id, 2, fill_template(t.system, vars), fill_template(t.user, vars), in.question, in.image, anchors};
  StageTwoResult r;
  r.raw = backend.complete(req);
  r.answer = extract_answer(r.raw);
  return r;
}

}  // namespace

StageTwoResult run_stage2(const TrajectoryInstance& in, const std::optional<std::string>& anchors,
                          ModelBackend& backend, const Prompts& prompts) {
  const std::string block = anchors ? fill_template(prompts.anchor_block, {{"anchors", *anchors}}) : std::string();
  return answer_with(in, prompts.stage2, anchors, block, backend);
}

StageTwoResult run_end_to_end(const TrajectoryInstance& in, ModelBackend& backend, const Prompts& prompts) {
  return answer_with(in, prompts.end_to_end, std::nullopt, std::string(), backend);
}

json to_json(const RunRecord& r, bool include_timing) {
  json j = {{"id", r.instance_id},
            {"mode", std::string(to_string(r.mode))},
            {"category", std::string(to_string(r.category))},
            {"level", std::string(to_string(level_of(r.category)))},
            {"n_gt_boxes", r.n_gt_boxes},
            {"stage2_raw", r.stage2_raw},
            {"answer", r.stage2_answer},
            {"gold", r.gold},
            {"correct", r.correct}};
  if (include_timing) j["timing_ms"] = {{"stage1", r.stage1_ms}, {"stage2", r.stage2_ms}};
  if (r.stage1) {
    j["stage1"] = {{"reason", r.stage1->result.reason},
                   {"predicted", format_grounding_lines(r.stage1->result.predicted)},
                   {"raw", r.stage1->result.raw},
                   {"gt_substituted", r.stage1->gt_substituted},
                   {"localization_failed", r.stage1->localization_failed}};
  }
  if (r.anchors_sent) j["anchors"] = *r.anchors_sent;
  if (!r.errors.empty()) j["errors"] = r.errors;
  if (!r.ious.empty()) j["ious"] = r.ious;
  return j;
}

namespace {

RunRecord run_one(const TrajectoryInstance& in, ModelBackend& b1, ModelBackend& b2, const Prompts& prompts,
                  RunMode mode) {
  RunRecord rec;
  rec.instance_id = in.id;
  rec.mode = mode;
  rec.category = in.category;
  rec.n_gt_boxes = in.total_boxes();
  rec.gold = in.answer;
  if (mode == RunMode::kTwoStage) {
    StageOneRecord s1;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      s1.result = run_stage1(in, b1, prompts);
    } catch (const Error& e) {
      s1.localization_failed = true;
      if (e.code() != ErrorCode::kNoValidLines) rec.errors.push_back(e.what());
    }
    rec.stage1_ms = elapsed_ms(t0);
    if (!s1.result.predicted.empty()) {
      rec.anchors_sent = format_grounding_lines(s1.result.predicted);
      std::vector<NormBBox> preds;
      std::vector<NormBBox> gts;
      for (const auto& l : s1.result.predicted) preds.push_back(l.bbox);
      for (const auto& e : in.evidence) gts.push_back(e.bbox_norm);
      for (const auto& p : match_boxes(preds, gts).pairs) rec.ious.push_back(p.iou);
    }
    rec.stage1 = std::move(s1);
  } else if (mode == RunMode::kOracle) {
    StageOneRecord s1;
    s1.gt_substituted = true;
    s1.result.predicted = gt_lines(in);
    s1.result.raw = format_grounding_lines(s1.result.predicted);
    rec.anchors_sent = s1.result.raw;
    rec.stage1 = std::move(s1);
  }
  // Stage 2 always runs; without anchors it degrades to an anchor-free prompt.
  const auto t1 = std::chrono::steady_clock::now();
  try {
    StageTwoResult s2 = mode == RunMode::kEndToEnd ? run_end_to_end(in, b2, prompts)
                                                   : run_stage2(in, rec.anchors_sent, b2, prompts);
    rec.stage2_raw = std::move(s2.raw);
    rec.stage2_answer = std::move(s2.answer);
    rec.correct = answers_match(rec.stage2_answer, rec.gold);
  } catch (const Error& e) {
    rec.errors.push_back(e.what());
    rec.correct = false;
  }
  rec.stage2_ms = elapsed_ms(t1);
  return rec;
}

}  // namespace

RunResult run_pipeline(const std::vector<TrajectoryInstance>& instances, ModelBackend& b1, ModelBackend& b2,
                       const Prompts& prompts, const RunOptions& options) {
  if (instances.empty()) throw Error(ErrorCode::kEmptyInput, "no instances to run");
  std::vector<RunRecord> records(instances.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < instances.size(); k = next++) {
      records[k] = run_one(instances[k], b1, b2, prompts, options.mode);
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, instances.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::sort(records.begin(), records.end(),
            [](const RunRecord& a, const RunRecord& b) { return a.instance_id < b.instance_id; });

  RunResult out;
  std::vector<ScoredItem> scored;
  std::vector<double> ious;
  for (const auto& r : records) {
    scored.push_back({r.instance_id, r.category, level_of(r.category), r.n_gt_boxes, r.correct});
    ious.insert(ious.end(), r.ious.begin(), r.ious.end());
  }
  out.report = aggregate(scored);
  if (!ious.empty()) out.iou = iou_summary(ious);
  out.records = std::move(records);
  return out;
}

Trend correlate_runs(std::vector<RunPoint> runs) {
  if (runs.size() < 2) throw Error(ErrorCode::kTooFewRuns, "need at least two runs to correlate");
  std::stable_sort(runs.begin(), runs.end(),
                   [](const RunPoint& a, const RunPoint& b) { return a.median_iou < b.median_iou; });
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : runs) {
    xs.push_back(r.median_iou);
    ys.push_back(r.accuracy);
  }
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(runs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  Trend t;
  t.points = std::move(runs);
  t.rank_correlation = (sxx == 0 || syy == 0) ? 0.0 : sxy / std::sqrt(sxx * syy);
  return t;
}

}  // namespace tableforge
