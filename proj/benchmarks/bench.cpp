#include <benchmark/benchmark.h>

#include <nlohmann/json.hpp>

#include "tableforge/eval.hpp"
#include "tableforge/layout.hpp"
#include "tableforge/resolver.hpp"
#include "tableforge/rng.hpp"
#include "tableforge/table.hpp"
#include "tableforge/tag.hpp"

namespace {

using namespace tableforge;
using nlohmann::json;

// Two-level column header (groups x leaves) over a flat row header.
TableSpec grid_table(int rows, int groups, int leaves) {
  json cols = json::array();
  for (int g = 0; g < groups; ++g) {
    json children = json::array();
    for (int l = 0; l < leaves; ++l) children.push_back({{"label", "L" + std::to_string(l)}});
    cols.push_back({{"label", "G" + std::to_string(g)}, {"children", children}});
  }
  json row_nodes = json::array();
  json cells = json::array();
  for (int r = 0; r < rows; ++r) {
    row_nodes.push_back({{"label", "R" + std::to_string(r)}});
    json row = json::array();
    for (int c = 0; c < groups * leaves; ++c) row.push_back(std::to_string(r * 31 + c));
    cells.push_back(row);
  }
  return load_spec({{"table_id", "bench"}, {"columns", cols}, {"rows", row_nodes}, {"cells", cells}});
}

void BM_ComputeLayout(benchmark::State& state) {
  const TableSpec spec = grid_table(static_cast<int>(state.range(0)), 4, 3);
  const LayoutMetrics m;
  for (auto _ : state) benchmark::DoNotOptimize(compute_layout(spec, m));
}
BENCHMARK(BM_ComputeLayout)->Arg(5)->Arg(20)->Arg(80);

void BM_RenderSvg(benchmark::State& state) {
  const TableSpec spec = grid_table(static_cast<int>(state.range(0)), 4, 3);
  const LayoutMetrics m;
  const RegionMap map = compute_layout(spec, m);
  for (auto _ : state) benchmark::DoNotOptimize(render_image(spec, map, m).to_svg());
}
BENCHMARK(BM_RenderSvg)->Arg(5)->Arg(20);

void BM_ResolveTag(benchmark::State& state) {
  const TableSpec spec = grid_table(20, 4, 3);
  const RegionMap map = compute_layout(spec, LayoutMetrics{});
  const SemanticTag tags[] = {parse_tag("cell:G2>L1@R7"), parse_tag("row:R13"), parse_tag("col:G3>L2"),
                              parse_tag("colhead:G1"), parse_tag("cell:G0>L0@R19")};
  std::size_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(resolve_tag(tags[k++ % 5], spec, map));
}
BENCHMARK(BM_ResolveTag);

void BM_ParseTag(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(parse_tag("cell:Revenue>Q1@\"2020\""));
}
BENCHMARK(BM_ParseTag);

void BM_Iou(benchmark::State& state) {
  Rng rng(1);
  std::vector<BBox> boxes(256);
  for (auto& b : boxes) {
    const int x = static_cast<int>(rng.below(900)), y = static_cast<int>(rng.below(900));
    b = {x, y, x + 1 + static_cast<int>(rng.below(99)), y + 1 + static_cast<int>(rng.below(99))};
  }
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(iou(boxes[k % 256], boxes[(k * 7 + 3) % 256]));
    ++k;
  }
}
BENCHMARK(BM_Iou);

void BM_MatchBoxes(benchmark::State& state) {
  Rng rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<NormBBox> preds(n), gts(n);
  auto box = [&] {
    const int x = static_cast<int>(rng.below(900)), y = static_cast<int>(rng.below(900));
    return NormBBox{x, y, x + 1 + static_cast<int>(rng.below(99)), y + 1 + static_cast<int>(rng.below(99))};
  };
  for (std::size_t i = 0; i < n; ++i) {
    gts[i] = box();
    preds[i] = rng.below(2) == 0 ? gts[(i + 1) % n] : box();
  }
  for (auto _ : state) benchmark::DoNotOptimize(match_boxes(preds, gts));
}
BENCHMARK(BM_MatchBoxes)->Arg(4)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
