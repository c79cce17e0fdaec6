#include <fstream>
#include <sstream>

#include "tableforge/error.hpp"
#include "tableforge/trajectory.hpp"

namespace tableforge {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const TrajectoryInstance& in, const std::string& why) {
  throw Error(ErrorCode::kSchemaError, "instance " + in.id + ": " + why);
}

std::string_view to_string(Axis a) { return a == Axis::kRow ? "row" : "col"; }

json box_json(const std::array<int, 4>& a) { return json::array({a[0], a[1], a[2], a[3]}); }

}  // namespace

void validate_instance(const TrajectoryInstance& in) {
  if (in.id.empty()) invalid(in, "empty id");
  if (in.image.empty()) invalid(in, "missing image reference");
  if (trim(in.question).empty()) invalid(in, "empty question");
  if (trim(in.answer).empty()) invalid(in, "empty answer");
  if (in.evidence.empty()) invalid(in, "empty evidence set");
  if (in.steps.empty()) invalid(in, "no reasoning steps");
  for (std::size_t k = 0; k < in.evidence.size(); ++k) {
    const auto& e = in.evidence[k];
    if (!e.bbox_px.valid()) invalid(in, "evidence " + std::to_string(k) + " has a degenerate pixel box");
    if (!e.bbox_norm.valid()) invalid(in, "evidence " + std::to_string(k) + " has an invalid normalized box");
  }
  for (std::size_t s = 0; s < in.steps.size(); ++s) {
    const auto& st = in.steps[s];
    if (st.index != s) invalid(in, "step " + std::to_string(s) + " is numbered " + std::to_string(st.index));
    if (st.boxes.empty()) invalid(in, "step " + std::to_string(s) + " cites no box");
    for (std::size_t b : st.boxes) {
      if (b >= in.evidence.size()) invalid(in, "step " + std::to_string(s) + " cites missing box " + std::to_string(b));
    }
  }
  for (const auto& g : in.program.groups) {
    for (std::size_t b : g) {
      if (b >= in.evidence.size()) invalid(in, "program refers to missing box " + std::to_string(b));
    }
  }
}

Selection selection_from_evidence(const TrajectoryInstance& in, const TableSpec& spec, const RegionMap& map) {
  Selection sel;
  sel.op = in.program.op;
  sel.threshold = in.program.threshold;
  sel.k = in.program.k;
  for (const auto& g : in.program.groups) {
    std::vector<Operand> ops;
    for (std::size_t b : g) {
      if (b >= in.evidence.size()) {
        throw Error(ErrorCode::kRegionNotFound, "program refers to missing box " + std::to_string(b));
      }
      const auto& e = in.evidence[b];
      const Region* r = map.find_box(e.bbox_px, e.label);
      if (!r) throw Error(ErrorCode::kRegionNotFound, "evidence " + std::to_string(b) + " matches no region", b);
      if (r->label == LabelType::kCell) {
        const std::size_t row = *r->grid.row;
        const std::size_t col = *r->grid.col;
        const Path& p = in.program.label_axis == Axis::kRow ? spec.index.row_paths()[row] : spec.index.col_paths()[col];
        ops.push_back({join_path(p, " > "), spec.cells[row][col]});
      } else {
        ops.push_back({join_path(r->grid.path, " > "), CellValue::from_raw(r->grid.path.back())});
      }
    }
    sel.groups.push_back(std::move(ops));
  }
  return sel;
}

json to_json(const TrajectoryInstance& in) {
  json evidence = json::array();
  for (const auto& e : in.evidence) {
    evidence.push_back({{"tag", e.tag},
                        {"label", std::string(to_string(e.label))},
                        {"bbox_px", box_json(e.bbox_px.as_array())},
                        {"bbox_norm", box_json(e.bbox_norm.as_array())}});
  }
  json steps = json::array();
  for (const auto& s : in.steps) steps.push_back({{"index", s.index}, {"text", s.text}, {"boxes", s.boxes}});
  json program = {{"op", std::string(to_string(in.program.op))},
                  {"groups", in.program.groups},
                  {"label_axis", std::string(to_string(in.program.label_axis))}};
  if (in.program.threshold) program["threshold"] = in.program.threshold->to_string();
  if (in.program.k != 0) program["k"] = in.program.k;
  return {{"id", in.id},
          {"table_id", in.table_id},
          {"image", in.image},
          {"question", in.question},
          {"category", std::string(to_string(in.category))},
          {"level", std::string(to_string(in.level()))},
          {"answer", in.answer},
          {"tags", in.tags},
          {"evidence", evidence},
          {"steps", steps},
          {"program", program}};
}

TrajectoryInstance instance_from_json(const json& j) {
  TrajectoryInstance in;
  try {
    in.id = j.at("id").get<std::string>();
    in.table_id = j.value("table_id", std::string());
    in.image = j.at("image").get<std::string>();
    in.question = j.at("question").get<std::string>();
    const auto cat = parse_category(j.at("category").get<std::string>());
    if (!cat) throw Error(ErrorCode::kSchemaError, in.id + ": unknown category");
    in.category = *cat;
    if (j.contains("level") && j["level"].get<std::string>() != to_string(level_of(in.category))) {
      throw Error(ErrorCode::kSchemaError, in.id + ": level does not match category");
    }
    in.answer = j.at("answer").get<std::string>();
    in.tags = j.value("tags", std::vector<std::string>{});
    for (const auto& ej : j.at("evidence")) {
      EvidenceEntry e;
      e.tag = ej.value("tag", std::string());
      const auto label = parse_label_type(ej.at("label").get<std::string>());
      if (!label) throw Error(ErrorCode::kSchemaError, in.id + ": unknown evidence label");
      e.label = *label;
      const auto px = ej.at("bbox_px").get<std::array<int, 4>>();
      const auto nm = ej.at("bbox_norm").get<std::array<int, 4>>();
      e.bbox_px = {px[0], px[1], px[2], px[3]};
      e.bbox_norm = {nm[0], nm[1], nm[2], nm[3]};
      in.evidence.push_back(e);
    }
    for (const auto& sj : j.at("steps")) {
      ReasoningStep s;
      s.index = sj.value("index", in.steps.size());
      s.text = sj.at("text").get<std::string>();
      s.boxes = sj.at("boxes").get<std::vector<std::size_t>>();
      in.steps.push_back(std::move(s));
    }
    if (j.contains("program")) {
      const auto& pj = j["program"];
      const auto op = parse_op(pj.at("op").get<std::string>());
      if (!op) throw Error(ErrorCode::kSchemaError, in.id + ": unknown program op");
      in.program.op = *op;
      in.program.groups = pj.at("groups").get<std::vector<std::vector<std::size_t>>>();
      in.program.label_axis = pj.value("label_axis", std::string("row")) == "col" ? Axis::kCol : Axis::kRow;
      if (pj.contains("threshold")) {
        in.program.threshold = Decimal::parse(pj["threshold"].get<std::string>());
        if (!in.program.threshold) throw Error(ErrorCode::kSchemaError, in.id + ": bad program threshold");
      }
      in.program.k = pj.value("k", 0);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, "trajectory record " + in.id + ": " + e.what());
  }
  return in;
}

std::string to_jsonl(const std::vector<TrajectoryInstance>& instances) {
  std::string out;
  for (const auto& in : instances) {
    out += to_json(in).dump();
    out += '\n';
  }
  return out;
}

std::vector<TrajectoryInstance> read_jsonl(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::vector<TrajectoryInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchemaError, path + ": " + e.what(), line_no);
    }
    try {
      out.push_back(instance_from_json(j));
    } catch (const Error& e) {
      throw Error(e.code(), path + ": " + e.what(), line_no);
    }
  }
  return out;
}

void write_jsonl(const std::string& path, const std::vector<TrajectoryInstance>& instances) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path);
  f << to_jsonl(instances);
  if (!f) throw Error(ErrorCode::kIoError, "write failed for " + path);
}

}  // namespace tableforge
