#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tableforge/trajectory.hpp"

namespace tableforge {

enum class FlagKind { kSpatialOutOfBounds, kSpatialMisaligned, kLogicalUnanchored, kAnswerInconsistent };

std::string_view to_string(FlagKind kind);
std::optional<FlagKind> parse_flag_kind(std::string_view name);

struct Flag {
  std::string instance_id;
  FlagKind kind = FlagKind::kSpatialMisaligned;
  std::string detail;
  std::optional<std::size_t> evidence_index;  // set for spatial kinds

  friend bool operator==(const Flag&, const Flag&) = default;
};

// Boxes outside the image, or not exactly a region of the map (box and label
// type), or whose normalized form disagrees with the pixel box.
std::vector<Flag> check_spatial(const TrajectoryInstance& instance, const RegionMap& map);

// Numeric literals outside quoted spans must equal a value of a cell the step
// cites, or a parameter or result of the instance's operation (relative
// tolerance 1e-9). The answer must re-derive from the evidence.
std::vector<Flag> check_logical(const TrajectoryInstance& instance, const TableAsset& asset);

// Both checks.
std::vector<Flag> verify_instance(const TrajectoryInstance& instance, const TableAsset& asset);

struct NumericLiteral {
  std::size_t offset = 0;
  std::string text;
  Decimal value;
};

// Numbers standing alone in prose: not inside "..." and not glued to letters
// (so "Q1" or "2nd" are not literals). A '-' directly before the digits is a sign.
std::vector<NumericLiteral> numeric_literals(std::string_view text);

struct AuditSample {
  std::vector<std::string> sampled;  // ceil(rate * N) ids, sorted
  std::vector<std::string> ids;      // sampled plus every flagged id, sorted
};

// Throws Error{kRateInvalid} unless rate is in (0, 1].
AuditSample sample_audit(const std::vector<std::string>& ids, double rate, std::uint64_t seed,
                         const std::vector<Flag>& flags);

enum class ReviewAction { kAccept, kModify, kDrop };
std::string_view to_string(ReviewAction a);

struct EvidencePatch {
  std::size_t index = 0;
  BBox bbox_px;
};

struct ReviewPatch {
  std::optional<std::string> answer;
  std::vector<EvidencePatch> evidence;
};

struct ReviewDecision {
  std::string instance_id;
  ReviewAction action = ReviewAction::kAccept;
  std::optional<ReviewPatch> patch;  // present iff action is modify
  std::string reviewer;
  std::string timestamp;
};

nlohmann::json to_json(const ReviewDecision& d);
// Throws Error{kSchemaError}, or kPatchInvalid for a malformed or misplaced patch.
ReviewDecision decision_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Flag& f);
Flag flag_from_json(const nlohmann::json& j);
void write_flags(const std::string& path, const std::vector<Flag>& flags);
std::vector<Flag> read_flags(const std::string& path);

// Instances under review, their open flags and the decisions applied so far.
struct ReviewCorpus {
  std::vector<TrajectoryInstance> instances;
  std::vector<Flag> flags;
  std::vector<ReviewDecision> log;
};

// Applies one decision and appends it to corpus.log. Returns the instance's
// open flags afterwards. Throws Error{kUnknownInstance | kPatchInvalid}.
std::vector<Flag> apply_decision(ReviewCorpus& corpus, const ReviewDecision& decision,
                                 const std::map<std::string, TableAsset>& tables);

// Append-only audit log: one decision per line, existing lines never touched.
void append_audit_log(const std::string& path, const ReviewDecision& decision);
std::vector<ReviewDecision> read_audit_log(const std::string& path);

}  // namespace tableforge
