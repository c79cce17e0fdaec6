#include "tableforge/verifier.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include "tableforge/error.hpp"
#include "tableforge/rng.hpp"

namespace tableforge {

using nlohmann::json;

namespace {

bool alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::string box_text(const BBox& b) {
  return "(" + std::to_string(b.x1) + "," + std::to_string(b.y1) + "," + std::to_string(b.x2) + "," +
         std::to_string(b.y2) + ")";
}

bool close_enough(const Decimal& a, const Decimal& b) {
  if (a == b) return true;
  const double x = a.to_double();
  const double y = b.to_double();
  return std::fabs(x - y) <= 1e-9 * std::max(std::fabs(x), std::fabs(y));
}

}  // namespace

std::string_view to_string(FlagKind kind) {
  switch (kind) {
    case FlagKind::kSpatialOutOfBounds: return "SpatialOutOfBounds";
    case FlagKind::kSpatialMisaligned: return "SpatialMisaligned";
    case FlagKind::kLogicalUnanchored: return "LogicalUnanchored";
    case FlagKind::kAnswerInconsistent: return "AnswerInconsistent";
  }
  return "";
}

std::optional<FlagKind> parse_flag_kind(std::string_view name) {
  for (FlagKind k : {FlagKind::kSpatialOutOfBounds, FlagKind::kSpatialMisaligned, FlagKind::kLogicalUnanchored,
                     FlagKind::kAnswerInconsistent}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::vector<Flag> check_spatial(const TrajectoryInstance& in, const RegionMap& map) {
  std::vector<Flag> flags;
  for (std::size_t k = 0; k < in.evidence.size(); ++k) {
    const auto& e = in.evidence[k];
    if (!e.bbox_px.within(map.image_w(), map.image_h()) || !e.bbox_px.valid()) {
      flags.push_back({in.id, FlagKind::kSpatialOutOfBounds,
                       "box " + box_text(e.bbox_px) + " leaves the " + std::to_string(map.image_w()) + "x" +
                           std::to_string(map.image_h()) + " image",
                       k});
    } else if (!map.find_box(e.bbox_px, e.label)) {
      flags.push_back({in.id, FlagKind::kSpatialMisaligned,
                       std::string(to_string(e.label)) + " box " + box_text(e.bbox_px) + " matches no region", k});
    } else if (e.bbox_norm != normalize_bbox(e.bbox_px, map.image_w(), map.image_h())) {
      flags.push_back({in.id, FlagKind::kSpatialMisaligned, "normalized box disagrees with pixel box " +
                                                                box_text(e.bbox_px), k});
    }
  }
  return flags;
}

std::vector<NumericLiteral> numeric_literals(std::string_view text) {
  std::vector<NumericLiteral> out;
  bool quoted = false;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '"') {
      quoted = !quoted;
      ++i;
      continue;
    }
    if (quoted || !digit(c) || (i > 0 && (alnum(text[i - 1]) || text[i - 1] == '.'))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (start > 0 && text[start - 1] == '-' && (start == 1 || !alnum(text[start - 2]))) --start;
    std::size_t end = i;
    while (end < text.size() && digit(text[end])) ++end;
    if (end - i <= 3) {
      while (end + 3 < text.size() && text[end] == ',' && digit(text[end + 1]) && digit(text[end + 2]) &&
             digit(text[end + 3]) && (end + 4 == text.size() || !digit(text[end + 4]))) {
        end += 4;
      }
    }
    if (end + 1 < text.size() && text[end] == '.' && digit(text[end + 1])) {
      ++end;
      while (end < text.size() && digit(text[end])) ++end;
    }
    if (end < text.size() && alnum(text[end])) {
      while (end < text.size() && alnum(text[end])) ++end;
      i = end;
      continue;
    }
    const std::string lit(text.substr(start, end - start));
    std::string plain = lit;
    plain.erase(std::remove(plain.begin(), plain.end(), ','), plain.end());
    if (auto v = Decimal::parse(plain)) out.push_back({start, lit, *v});
    i = end;
  }
  return out;
}

std::vector<Flag> check_logical(const TrajectoryInstance& in, const TableAsset& asset) {
  std::vector<Flag> flags;
  std::vector<Decimal> derived;
  try {
    const AnswerTrace t = compute_answer(in.category, selection_from_evidence(in, asset.spec, asset.map));
    derived = t.derived;
    if (!answers_match(in.answer, t.answer)) {
      flags.push_back({in.id, FlagKind::kAnswerInconsistent,
                       "stored answer '" + in.answer + "' but evidence gives '" + t.answer + "'", std::nullopt});
    }
  } catch (const Error& e) {
    flags.push_back({in.id, FlagKind::kAnswerInconsistent, std::string("answer cannot be re-derived: ") + e.what(),
                     std::nullopt});
  }
  for (const auto& step : in.steps) {
    std::vector<Decimal> allowed = derived;
    for (std::size_t b : step.boxes) {
      if (b >= in.evidence.size() || in.evidence[b].label != LabelType::kCell) continue;
      const Region* r = asset.map.find_box(in.evidence[b].bbox_px, LabelType::kCell);
      if (!r) continue;
      const auto& v = asset.spec.cells[*r->grid.row][*r->grid.col];
      if (v.numeric) allowed.push_back(*v.numeric);
    }
    for (const auto& lit : numeric_literals(step.text)) {
      const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const Decimal& a) { return close_enough(a, lit.value); });
      if (!ok) {
        flags.push_back({in.id, FlagKind::kLogicalUnanchored,
                         "step " + std::to_string(step.index) + " states " + lit.text +
                             ", which no cited cell or computed result supports",
                         std::nullopt});
      }
    }
  }
  return flags;
}

std::vector<Flag> verify_instance(const TrajectoryInstance& in, const TableAsset& asset) {
  auto flags = check_spatial(in, asset.map);
  auto logical = check_logical(in, asset);
  flags.insert(flags.end(), logical.begin(), logical.end());
  return flags;
}

AuditSample sample_audit(const std::vector<std::string>& ids, double rate, std::uint64_t seed,
                         const std::vector<Flag>& flags) {
  if (!(rate > 0.0 && rate <= 1.0)) throw Error(ErrorCode::kRateInvalid, "audit rate must lie in (0, 1]");
  std::vector<std::string> pool = ids;
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  const auto n = std::min(pool.size(), static_cast<std::size_t>(std::ceil(rate * static_cast<double>(pool.size()) - 1e-9)));
  Rng rng(seed);
  rng.shuffle(pool);
  AuditSample s;
  s.sampled.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
  std::sort(s.sampled.begin(), s.sampled.end());
  std::set<std::string> all(s.sampled.begin(), s.sampled.end());
  for (const auto& f : flags) all.insert(f.instance_id);
  s.ids.assign(all.begin(), all.end());
  return s;
}

std::string_view to_string(ReviewAction a) {
  switch (a) {
    case ReviewAction::kAccept: return "accept";
    case ReviewAction::kModify: return "modify";
    case ReviewAction::kDrop: return "drop";
  }
  return "";
}

json to_json(const ReviewDecision& d) {
  json j = {{"id", d.instance_id},
            {"action", std::string(to_string(d.action))},
            {"reviewer", d.reviewer},
            {"timestamp", d.timestamp}};
  if (d.patch) {
    json p = json::object();
    if (d.patch->answer) p["answer"] = *d.patch->answer;
    json ev = json::array();
    for (const auto& e : d.patch->evidence) {
      ev.push_back({{"index", e.index}, {"bbox_px", {e.bbox_px.x1, e.bbox_px.y1, e.bbox_px.x2, e.bbox_px.y2}}});
    }
    p["evidence"] = ev;
    j["patch"] = p;
  }
  return j;
}

ReviewDecision decision_from_json(const json& j) {
  ReviewDecision d;
  try {
    d.instance_id = j.at("id").get<std::string>();
    const auto action = j.at("action").get<std::string>();
    if (action == "accept") {
      d.action = ReviewAction::kAccept;
    } else if (action == "modify") {
      d.action = ReviewAction::kModify;
    } else if (action == "drop") {
      d.action = ReviewAction::kDrop;
    } else {
      throw Error(ErrorCode::kSchemaError, "unknown action '" + action + "'");
    }
    d.reviewer = j.value("reviewer", std::string());
    d.timestamp = j.value("timestamp", std::string());
    const bool has_patch = j.contains("patch") && !j["patch"].is_null();
    if (has_patch != (d.action == ReviewAction::kModify)) {
      throw Error(ErrorCode::kPatchInvalid, "a patch is required for modify and forbidden otherwise");
    }
    if (has_patch) {
      const auto& pj = j["patch"];
      if (!pj.is_object()) throw Error(ErrorCode::kPatchInvalid, "patch must be an object");
      ReviewPatch p;
      if (pj.contains("answer")) p.answer = pj["answer"].get<std::string>();
      for (const auto& ej : pj.value("evidence", json::array())) {
        const auto b = ej.at("bbox_px").get<std::array<int, 4>>();
        p.evidence.push_back({ej.at("index").get<std::size_t>(), {b[0], b[1], b[2], b[3]}});
      }
      if (!p.answer && p.evidence.empty()) throw Error(ErrorCode::kPatchInvalid, "patch changes nothing");
      d.patch = std::move(p);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kPatchInvalid, std::string("malformed decision: ") + e.what());
  }
  return d;
}

json to_json(const Flag& f) {
  json j = {{"id", f.instance_id}, {"kind", std::string(to_string(f.kind))}, {"detail", f.detail}};
  if (f.evidence_index) j["evidence_index"] = *f.evidence_index;
  return j;
}

Flag flag_from_json(const json& j) {
  try {
    Flag f;
    f.instance_id = j.at("id").get<std::string>();
    const auto kind = parse_flag_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::kSchemaError, "unknown flag kind");
    f.kind = *kind;
    f.detail = j.value("detail", std::string());
    if (j.contains("evidence_index")) f.evidence_index = j["evidence_index"].get<std::size_t>();
    return f;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("flag record: ") + e.what());
  }
}

void write_flags(const std::string& path, const std::vector<Flag>& flags) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path);
  for (const auto& fl : flags) f << to_json(fl).dump() << '\n';
}

std::vector<Flag> read_flags(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::vector<Flag> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(flag_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchemaError, path + ": " + e.what(), line_no);
    }
  }
  return out;
}

std::vector<Flag> apply_decision(ReviewCorpus& corpus, const ReviewDecision& d,
                                 const std::map<std::string, TableAsset>& tables) {
  auto it = std::find_if(corpus.instances.begin(), corpus.instances.end(),
                         [&](const TrajectoryInstance& in) { return in.id == d.instance_id; });
  if (it == corpus.instances.end()) throw Error(ErrorCode::kUnknownInstance, "no instance '" + d.instance_id + "'");
  if (d.patch.has_value() != (d.action == ReviewAction::kModify)) {
    throw Error(ErrorCode::kPatchInvalid, "a patch is required for modify and forbidden otherwise");
  }
  auto drop_flags = [&] {
    std::erase_if(corpus.flags, [&](const Flag& f) { return f.instance_id == d.instance_id; });
  };
  std::vector<Flag> open;
  switch (d.action) {
    case ReviewAction::kAccept:
      drop_flags();
      break;
    case ReviewAction::kDrop:
      drop_flags();
      corpus.instances.erase(it);
      break;
    case ReviewAction::kModify: {
      auto asset = tables.find(it->table_id);
      if (asset == tables.end()) {
        throw Error(ErrorCode::kPatchInvalid, "table '" + it->table_id + "' is not loaded; cannot re-verify");
      }
      TrajectoryInstance patched = *it;
      if (d.patch->answer) patched.answer = *d.patch->answer;
      for (const auto& e : d.patch->evidence) {
        if (e.index >= patched.evidence.size()) {
          throw Error(ErrorCode::kPatchInvalid, "evidence index " + std::to_string(e.index) + " out of range");
        }
        try {
          patched.evidence[e.index].bbox_px = e.bbox_px;
          patched.evidence[e.index].bbox_norm =
              normalize_bbox(e.bbox_px, asset->second.map.image_w(), asset->second.map.image_h());
        } catch (const Error& err) {
          throw Error(ErrorCode::kPatchInvalid, err.what());
        }
      }
      try {
        validate_instance(patched);
      } catch (const Error& err) {
        throw Error(ErrorCode::kPatchInvalid, err.what());
      }
      open = verify_instance(patched, asset->second);
      *it = std::move(patched);
      drop_flags();
      corpus.flags.insert(corpus.flags.end(), open.begin(), open.end());
      break;
    }
  }
  corpus.log.push_back(d);
  return open;
}

void append_audit_log(const std::string& path, const ReviewDecision& d) {
  std::ofstream f(path, std::ios::binary | std::ios::app);
  if (!f) throw Error(ErrorCode::kIoError, "cannot append to " + path);
  f << to_json(d).dump() << '\n';
  f.flush();
  if (!f) throw Error(ErrorCode::kIoError, "append failed for " + path);
}

std::vector<ReviewDecision> read_audit_log(const std::string& path) {
  std::ifstream f(path);
  if (!f) return {};
  std::vector<ReviewDecision> out;
  std::string line;
  while (std::getline(f, line)) {
    if (!trim(line).empty()) out.push_back(decision_from_json(json::parse(line)));
  }
  return out;
}

}  // namespace tableforge
