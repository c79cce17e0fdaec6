#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "tableforge/error.hpp"
#include "tableforge/eval.hpp"
#include "testkit.hpp"

namespace tableforge {
namespace {

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize_coord(0, 640), 0);
  EXPECT_EQ(normalize_coord(640, 640), 999);
  EXPECT_EQ(normalize_bbox({160, 80, 280, 120}, 640, 160), (NormBBox{250, 500, 437, 749}));
  EXPECT_EQ(denormalize_coord(0, 640), 0);
  EXPECT_EQ(denormalize_coord(999, 640), 640);
  EXPECT_EQ(denormalize_coord(250, 640), 160);
  EXPECT_THROW(normalize_bbox({0, 0, 641, 10}, 640, 160), Error);
}

TEST(Normalize, MatchesNearestGridScan) {
  for (int dim : {1, 7, 160, 640, 999, 1000, 1998, 2000}) {
    for (int v = 0; v <= dim; ++v) {
      ASSERT_EQ(normalize_coord(v, dim), testkit::scan_normalize(v, dim)) << v << "/" << dim;
    }
  }
}

TEST(Normalize, MonotoneWithBoundedRoundTrip) {
  for (int dim : {160, 640, 1280, 2000}) {
    int prev = 0;
    for (int v = 0; v <= dim; ++v) {
      const int n = normalize_coord(v, dim);
      ASSERT_GE(n, prev);
      prev = n;
      ASSERT_LE(std::abs(denormalize_coord(n, dim) - v), dim / 999.0 + 1.0);
    }
  }
}

TEST(Grounding, ParsesReasonAndLines) {
  const GroundingParse p = parse_grounding_output("The target cell sits under Revenue.\n[cell] (250,500)(437,749)");
  EXPECT_EQ(p.reason, "The target cell sits under Revenue.");
  ASSERT_EQ(p.lines.size(), 1u);
  EXPECT_EQ(p.lines[0], (GroundingLine{LabelType::kCell, {250, 500, 437, 749}}));

  const GroundingParse spaced = parse_grounding_output("[rowhead]( 1 , 2 ) ( 3,4 )\n[blob] (0,0)(1,1)");
  ASSERT_EQ(spaced.lines.size(), 1u);
  EXPECT_EQ(spaced.lines[0].bbox, (NormBBox{1, 2, 3, 4}));
  ASSERT_EQ(spaced.rejected.size(), 1u);
  EXPECT_EQ(spaced.rejected[0].line_no, 2u);
}

TEST(Grounding, RejectsUnknownLabels) {
  try {
    parse_grounding_output("[blob] (0,0)(10,10)");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoValidLines);
  }
  EXPECT_THROW(parse_grounding_output(""), Error);
  EXPECT_THROW(parse_grounding_output("[cell] (0,0)(1000,10)"), Error);
  EXPECT_TRUE(scan_grounding_output("").lines.empty());
}

TEST(Grounding, FormatParseRoundTrip) {
  const std::vector<GroundingLine> lines = {{LabelType::kColHead, {0, 0, 999, 100}},
                                            {LabelType::kCell, {250, 500, 437, 749}}};
  const std::string text = format_grounding_lines(lines);
  EXPECT_EQ(text, "[colhead] (0,0)(999,100)\n[cell] (250,500)(437,749)");
  EXPECT_EQ(parse_grounding_output(text).lines, lines);
}

TEST(GroundingProperty, GeneratedOutputsParseAsExpected) {
  Rng rng(51);
  for (int i = 0; i < 3000; ++i) {
    const auto g = testkit::random_grounding_output(rng);
    const GroundingParse p = scan_grounding_output(g.text);
    ASSERT_EQ(p.lines, g.valid) << g.text;
    ASSERT_EQ(p.rejected.size(), g.invalid) << g.text;
    ASSERT_EQ(p.reason, g.reason);
  }
}

TEST(Iou, Examples) {
  const BBox a{160, 80, 280, 120};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, BBox{0, 0, 10, 10}), 0.0);
  EXPECT_NEAR(iou(a, BBox{170, 85, 290, 125}), 3850.0 / 5750.0, 1e-12);
  EXPECT_DOUBLE_EQ(iou(a, BBox{200, 100, 200, 110}), 0.0);
}

TEST(IouProperty, MatchesPixelCountingAndIsSymmetric) {
  Rng rng(52);
  auto box = [&] {
    int x1 = static_cast<int>(rng.below(50)), y1 = static_cast<int>(rng.below(50));
    return BBox{x1, y1, x1 + 1 + static_cast<int>(rng.below(30)), y1 + 1 + static_cast<int>(rng.below(30))};
  };
  for (int i = 0; i < 500; ++i) {
    const BBox a = box(), b = box();
    const double v = iou(a, b);
    ASSERT_NEAR(v, testkit::pixel_iou(a, b), 1e-9);
    ASSERT_DOUBLE_EQ(v, iou(b, a));
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    ASSERT_DOUBLE_EQ(iou(a, a), 1.0);
  }
}

TEST(Match, Examples) {
  const std::vector<NormBBox> three = {{0, 0, 10, 10}, {20, 20, 30, 30}, {40, 40, 50, 50}};
  const MatchResult same = match_boxes(three, three);
  EXPECT_EQ(same.pairs.size(), 3u);
  for (const auto& p : same.pairs) EXPECT_DOUBLE_EQ(p.iou, 1.0);
  EXPECT_EQ(same.unmatched_pred + same.unmatched_gt, 0u);

  const MatchResult none = match_boxes({{0, 0, 1, 1}, {2, 2, 3, 3}}, {});
  EXPECT_TRUE(none.pairs.empty());
  EXPECT_EQ(none.unmatched_pred, 2u);

  const MatchResult m = match_iou_matrix({{0.8, 0.3}, {0.4, 0.7}}, 2);
  ASSERT_EQ(m.pairs.size(), 2u);
  EXPECT_EQ(m.pairs[0].gt, 0u);
  EXPECT_EQ(m.pairs[1].gt, 1u);
  EXPECT_NEAR(m.total_iou, 1.5, 1e-12);

  const MatchResult disjoint = match_boxes({{0, 0, 1, 1}}, {{5, 5, 6, 6}});
  EXPECT_TRUE(disjoint.pairs.empty());
  EXPECT_EQ(disjoint.unmatched_pred, 1u);
  EXPECT_EQ(disjoint.unmatched_gt, 1u);
}

TEST(MatchProperty, OptimalAgainstExhaustiveSearch) {
  Rng rng(53);
  for (int i = 0; i < 400; ++i) {
    const std::size_t np = rng.below(7), ng = rng.below(7);
    auto box = [&] {
      int x1 = static_cast<int>(rng.below(80)), y1 = static_cast<int>(rng.below(80));
      return NormBBox{x1, y1, x1 + 5 + static_cast<int>(rng.below(40)), y1 + 5 + static_cast<int>(rng.below(40))};
    };
    std::vector<NormBBox> preds, gts;
    for (std::size_t k = 0; k < np; ++k) preds.push_back(box());
    for (std::size_t k = 0; k < ng; ++k) gts.push_back(box());
    std::vector<std::vector<double>> matrix(np, std::vector<double>(ng));
    for (std::size_t a = 0; a < np; ++a) {
      for (std::size_t b = 0; b < ng; ++b) matrix[a][b] = iou(preds[a], gts[b]);
    }
    const MatchResult got = match_boxes(preds, gts);
    ASSERT_NEAR(got.total_iou, testkit::brute_force_assignment(matrix, ng), 1e-9);
    ASSERT_EQ(got.pairs.size() + got.unmatched_pred, np);
    ASSERT_EQ(got.pairs.size() + got.unmatched_gt, ng);
  }
}

TEST(Summary, Examples) {
  const IoUSummary s = iou_summary({1.0, 0.5, 0.0});
  EXPECT_DOUBLE_EQ(s.mean, 0.5);
  EXPECT_DOUBLE_EQ(s.median, 0.5);
  EXPECT_DOUBLE_EQ(s.frac_ge_50, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.frac_ge_75, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.frac_ge_90, 1.0 / 3.0);

  const IoUSummary one = iou_summary({0.672});
  EXPECT_DOUBLE_EQ(one.median, 0.672);
  EXPECT_DOUBLE_EQ(one.frac_ge_50, 1.0);

  EXPECT_DOUBLE_EQ(iou_summary({0.2, 0.4, 0.6, 0.9}).median, 0.5);
  EXPECT_THROW(iou_summary({}), Error);
}

TEST(Summary, EngineeredCheckpointShape) {
  std::vector<double> v;
  v.insert(v.end(), 122, 0.95);
  v.insert(v.end(), 272, 0.8);
  v.insert(v.end(), 224, 0.672);
  v.insert(v.end(), 382, 0.2);
  const IoUSummary s = iou_summary(v);
  EXPECT_EQ(s.pairs, 1000u);
  EXPECT_DOUBLE_EQ(s.median, 0.672);
  EXPECT_DOUBLE_EQ(s.frac_ge_50, 0.618);
  EXPECT_DOUBLE_EQ(s.frac_ge_75, 0.394);
  EXPECT_DOUBLE_EQ(s.frac_ge_90, 0.122);
}

TEST(SummaryProperty, ThresholdFractionsAreMonotone) {
  Rng rng(54);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> v(1 + rng.below(50));
    for (auto& x : v) x = static_cast<double>(rng.below(1001)) / 1000.0;
    const IoUSummary s = iou_summary(v);
    ASSERT_LE(s.frac_ge_90, s.frac_ge_75);
    ASSERT_LE(s.frac_ge_75, s.frac_ge_50);
    ASSERT_LE(s.frac_ge_50, 1.0);
    ASSERT_GE(s.median, 0.0);
    ASSERT_LE(s.mean, 1.0);
  }
}

TEST(Canonicalize, Examples) {
  EXPECT_EQ(canonicalize_answer(" 42.0 "), "42");
  EXPECT_EQ(canonicalize_answer("1,234"), "1234");
  EXPECT_EQ(canonicalize_answer("Paris"), canonicalize_answer("paris"));
  EXPECT_EQ(canonicalize_answer("  New   York "), "new york");
  EXPECT_EQ(canonicalize_answer("12.50%"), "12.5");
  EXPECT_TRUE(answers_match("YES", "yes"));
  EXPECT_FALSE(answers_match("30", "31"));
}

std::vector<ScoredItem> level_fixture(std::size_t c1, std::size_t n1, std::size_t c2, std::size_t n2,
                                      std::size_t c3, std::size_t n3) {
  std::vector<ScoredItem> items;
  auto add = [&](Category cat, std::size_t correct, std::size_t total) {
    for (std::size_t i = 0; i < total; ++i) {
      items.push_back({std::to_string(items.size()), cat, level_of(cat), 1 + i % 15, i < correct});
    }
  };
  add(Category::kRetrieval, c1, n1);
  add(Category::kComparison, c2, n2);
  add(Category::kMultiHop, c3, n3);
  return items;
}

TEST(Aggregate, PublishedLevelMix) {
  const AccuracyReport zero_shot = aggregate(level_fixture(412, 513, 260, 425, 99, 363));
  EXPECT_NEAR(zero_shot.per_level.at(Level::kL1).value(), 0.803, 0.001);
  EXPECT_NEAR(zero_shot.per_level.at(Level::kL2).value(), 0.611, 0.001);
  EXPECT_NEAR(zero_shot.per_level.at(Level::kL3).value(), 0.273, 0.001);
  EXPECT_NEAR(zero_shot.overall.value(), 0.593, 0.001);
  // Overall is an exact ratio of integer counts, checked against the weighted sum.
  EXPECT_EQ(zero_shot.overall.correct, 771u);
  EXPECT_EQ(zero_shot.overall.total, 1301u);
}

TEST(Aggregate, AllCorrectAndDensityBuckets) {
  std::vector<ScoredItem> items = {{"a", Category::kRetrieval, Level::kL1, 1, true},
                                   {"b", Category::kMultiHop, Level::kL3, 17, true},
                                   {"c", Category::kCounting, Level::kL2, 6, true}};
  const AccuracyReport r = aggregate(items);
  EXPECT_DOUBLE_EQ(r.overall.value(), 1.0);
  for (const auto& [k, v] : r.per_category) EXPECT_DOUBLE_EQ(v.value(), 1.0);
  EXPECT_EQ(density_bucket(17), DensityBucket::kDense);
  EXPECT_EQ(density_bucket(5), DensityBucket::kSparse);
  EXPECT_EQ(density_bucket(6), DensityBucket::kMedium);
  EXPECT_EQ(density_bucket(10), DensityBucket::kMedium);
  EXPECT_EQ(density_bucket(11), DensityBucket::kDense);
  EXPECT_EQ(r.per_density.at(DensityBucket::kDense).total, 1u);
  EXPECT_THROW(aggregate({}), Error);
}

TEST(AggregateProperty, OverallEqualsCountRatio) {
  Rng rng(55);
  for (int i = 0; i < 200; ++i) {
    std::vector<ScoredItem> items(1 + rng.below(100));
    std::size_t correct = 0;
    for (auto& it : items) {
      it.category = kAllCategories[rng.below(kAllCategories.size())];
      it.level = level_of(it.category);
      it.n_gt_boxes = 1 + rng.below(20);
      it.correct = rng.below(2) == 0;
      correct += it.correct;
    }
    const AccuracyReport r = aggregate(items);
    ASSERT_EQ(r.overall.correct, correct);
    ASSERT_EQ(r.overall.total, items.size());
    std::size_t by_level = 0;
    for (const auto& [k, v] : r.per_level) by_level += v.correct;
    ASSERT_EQ(by_level, correct);
  }
}

}  // namespace
}  // namespace tableforge
