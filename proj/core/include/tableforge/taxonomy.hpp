#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace tableforge {

enum class Level { kL1, kL2, kL3 };

// The 13 task categories, three cognitive levels.
enum class Category {
  kRetrieval,
  kListing,
  kStructure,
  kComparison,
  kArithmetic,
  kRanking,
  kCounting,
  kCondFiltering,
  kVerification,
  kCompArithmetic,
  kMultiHop,
  kTemporal,
  kCrossHierAgg,
};

inline constexpr std::array<Category, 13> kAllCategories = {
    Category::kRetrieval,   Category::kListing,        Category::kStructure,  Category::kComparison,
    Category::kArithmetic,  Category::kRanking,        Category::kCounting,   Category::kCondFiltering,
    Category::kVerification, Category::kCompArithmetic, Category::kMultiHop,  Category::kTemporal,
    Category::kCrossHierAgg,
};

inline constexpr std::array<Level, 3> kAllLevels = {Level::kL1, Level::kL2, Level::kL3};

Level level_of(Category c);
std::string_view to_string(Category c);  // e.g. "Cond. Filtering"
std::string_view to_string(Level l);     // "L1" | "L2" | "L3"
std::string_view slug(Category c);       // e.g. "cond-filtering"
std::optional<Category> parse_category(std::string_view name);  // accepts name or slug
std::optional<Level> parse_level(std::string_view name);

}  // namespace tableforge
