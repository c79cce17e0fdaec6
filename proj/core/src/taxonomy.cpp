#include "tableforge/taxonomy.hpp"

namespace tableforge {

Level level_of(Category c) {
  switch (c) {
    case Category::kRetrieval:
    case Category::kListing:
    case Category::kStructure:
      return Level::kL1;
    case Category::kComparison:
    case Category::kArithmetic:
    case Category::kRanking:
    case Category::kCounting:
    case Category::kCondFiltering:
    case Category::kVerification:
      return Level::kL2;
    case Category::kCompArithmetic:
    case Category::kMultiHop:
    case Category::kTemporal:
    case Category::kCrossHierAgg:
      return Level::kL3;
  }
  return Level::kL1;
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kRetrieval: return "Retrieval";
    case Category::kListing: return "Listing";
    case Category::kStructure: return "Structure";
    case Category::kComparison: return "Comparison";
    case Category::kArithmetic: return "Arithmetic";
    case Category::kRanking: return "Ranking";
    case Category::kCounting: return "Counting";
    case Category::kCondFiltering: return "Cond. Filtering";
    case Category::kVerification: return "Verification";
    case Category::kCompArithmetic: return "Comp. Arithmetic";
    case Category::kMultiHop: return "Multi-hop";
    case Category::kTemporal: return "Temporal";
    case Category::kCrossHierAgg: return "Cross-hier. Agg.";
  }
  return "";
}

std::string_view slug(Category c) {
  switch (c) {
    case Category::kRetrieval: return "retrieval";
    case Category::kListing: return "listing";
    case Category::kStructure: return "structure";
    case Category::kComparison: return "comparison";
    case Category::kArithmetic: return "arithmetic";
    case Category::kRanking: return "ranking";
    case Category::kCounting: return "counting";
    case Category::kCondFiltering: return "cond-filtering";
    case Category::kVerification: return "verification";
    case Category::kCompArithmetic: return "comp-arithmetic";
    case Category::kMultiHop: return "multi-hop";
    case Category::kTemporal: return "temporal";
    case Category::kCrossHierAgg: return "cross-hier-agg";
  }
  return "";
}

std::string_view to_string(Level l) {
  switch (l) {
    case Level::kL1: return "L1";
    case Level::kL2: return "L2";
    case Level::kL3: return "L3";
  }
  return "L1";
}

std::optional<Category> parse_category(std::string_view name) {
  for (Category c : kAllCategories) {
    if (name == to_string(c) || name == slug(c)) return c;
  }
  return std::nullopt;
}

std::optional<Level> parse_level(std::string_view name) {
  for (Level l : kAllLevels) {
    if (name == to_string(l)) return l;
  }
  return std::nullopt;
}

}  // namespace tableforge
