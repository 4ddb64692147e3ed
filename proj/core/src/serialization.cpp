#include "anchorkit/serialization.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "anchorkit/widerface.hpp"

namespace anchorkit {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("failed to format number");
  return std::string(buf, ptr);
}

namespace {

struct Lines {
  explicit Lines(std::istream& in) : in_(in) {}

  // Next non-blank line, comments included.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  }

  std::size_t number = 0;

 private:
  std::istream& in_;
};

std::vector<std::string_view> tokens_of(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <typename T>
T to_number(std::string_view token, std::size_t line, const char* what) {
  T value{};
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line, std::string("malformed ") + what + " '" + std::string(token) + "'");
  }
  return value;
}

// Parses "# <magic> v1 key=value ..." into a key map.
std::map<std::string, std::string> read_header(Lines& lines, std::string_view magic) {
  std::string line;
  if (!lines.next(line)) throw ParseError(lines.number + 1, "missing " + std::string(magic) + " header");
  const auto tokens = tokens_of(line);
  if (tokens.size() < 3 || tokens[0] != "#" || tokens[1] != magic || tokens[2] != "v1") {
    throw ParseError(lines.number, "expected '# " + std::string(magic) + " v1' header");
  }
  std::map<std::string, std::string> fields;
  for (std::size_t i = 3; i < tokens.size(); ++i) {
    const auto eq = tokens[i].find('=');
    if (eq == std::string_view::npos) throw ParseError(lines.number, "malformed header field");
    fields[std::string(tokens[i].substr(0, eq))] = std::string(tokens[i].substr(eq + 1));
  }
  return fields;
}

template <typename T>
T header_field(const std::map<std::string, std::string>& fields, const std::string& key, std::size_t line) {
  auto it = fields.find(key);
  if (it == fields.end()) throw ParseError(line, "header is missing '" + key + "'");
  return to_number<T>(it->second, line, key.c_str());
}

}  // namespace

void write_anchor_grid(std::ostream& out, const AnchorGrid& grid) {
  out << "# anchorkit-anchors v1 width=" << grid.image_width() << " height=" << grid.image_height()
      << " count=" << grid.size() << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Anchor a = grid.anchor(i);
    out << a.index << ' ' << layer_name(a.layer) << ' ' << a.row << ' ' << a.col << ' '
        << format_double(a.box.x_min()) << ' ' << format_double(a.box.y_min()) << ' '
        << format_double(a.box.x_max()) << ' ' << format_double(a.box.y_max()) << '\n';
  }
}

AnchorGrid read_anchor_grid(std::istream& in) {
  Lines lines(in);
  const auto fields = read_header(lines, "anchorkit-anchors");
  const std::size_t header_line = lines.number;
  const AnchorGrid grid(header_field<int>(fields, "width", header_line),
                        header_field<int>(fields, "height", header_line));
  if (header_field<std::size_t>(fields, "count", header_line) != grid.size()) {
    throw ParseError(header_line, "anchor count does not match the grid dimensions");
  }
  std::string line;
  std::size_t expected = 0;
  while (lines.next(line)) {
    const auto t = tokens_of(line);
    if (t.size() != 8) throw ParseError(lines.number, "expected 8 fields per anchor record");
    const auto index = to_number<std::size_t>(t[0], lines.number, "anchor index");
    if (index != expected || index >= grid.size()) throw ParseError(lines.number, "anchor index out of sequence");
    const Anchor a = grid.anchor(index);
    const auto layer = parse_layer(t[1]);
    const bool same = layer == a.layer && to_number<int>(t[2], lines.number, "row") == a.row &&
                      to_number<int>(t[3], lines.number, "col") == a.col &&
                      to_number<double>(t[4], lines.number, "x_min") == a.box.x_min() &&
                      to_number<double>(t[5], lines.number, "y_min") == a.box.y_min() &&
                      to_number<double>(t[6], lines.number, "x_max") == a.box.x_max() &&
                      to_number<double>(t[7], lines.number, "y_max") == a.box.y_max();
    if (!same) throw ParseError(lines.number, "anchor record does not match the grid");
    ++expected;
  }
  if (expected != grid.size()) throw ParseError(lines.number + 1, "anchor file is truncated");
  return grid;
}

void write_assignment(std::ostream& out, const AssignmentResult& result, const ScoreMap* scores) {
  if (scores && scores->size() != result.labels.size()) {
    throw std::invalid_argument("score map does not match the assignment");
  }
  out << "# anchorkit-assignment v1 width=" << result.grid.image_width()
      << " height=" << result.grid.image_height() << " anchors=" << result.labels.size()
      << " gts=" << result.num_gts << '\n';
  for (std::size_t i = 0; i < result.labels.size(); ++i) {
    const AnchorLabel& l = result.labels[i];
    out << i << ' ' << static_cast<int>(l.kind) << ' ' << (l.is_positive() ? l.gt_index : -1) << ' '
        << (scores ? format_double((*scores)[i]) : std::string("-")) << '\n';
  }
}

AssignmentResult read_assignment(std::istream& in) {
  Lines lines(in);
  const auto fields = read_header(lines, "anchorkit-assignment");
  const std::size_t header_line = lines.number;
  const AnchorGrid grid(header_field<int>(fields, "width", header_line),
                        header_field<int>(fields, "height", header_line));
  if (header_field<std::size_t>(fields, "anchors", header_line) != grid.size()) {
    throw ParseError(header_line, "anchor count does not match the grid dimensions");
  }
  const auto gts = header_field<std::size_t>(fields, "gts", header_line);
  AssignmentResult result(grid, gts);
  std::string line;
  std::size_t expected = 0;
  while (lines.next(line)) {
    const auto t = tokens_of(line);
    if (t.size() != 4) throw ParseError(lines.number, "expected 4 fields per assignment record");
    const auto index = to_number<std::size_t>(t[0], lines.number, "anchor index");
    if (index != expected || index >= grid.size()) throw ParseError(lines.number, "anchor index out of sequence");
    const int label = to_number<int>(t[1], lines.number, "label");
    const int gt = to_number<int>(t[2], lines.number, "gt index");
    if (label == 1) {
      if (gt < 0 || static_cast<std::size_t>(gt) >= gts) throw ParseError(lines.number, "gt index out of range");
      result.labels[index] = AnchorLabel::positive(gt);
    } else if (label == 0 || label == -1) {
      if (gt != -1) throw ParseError(lines.number, "non-positive anchor must carry gt index -1");
      result.labels[index] = label == 0 ? AnchorLabel::negative() : AnchorLabel::ignore();
    } else {
      throw ParseError(lines.number, "label must be 1, 0 or -1");
    }
    ++expected;
  }
  if (expected != grid.size()) throw ParseError(lines.number + 1, "assignment file is truncated");
  result.refresh_statistics();
  return result;
}

void write_scores(std::ostream& out, const ScoreMap& scores) {
  for (std::size_t i = 0; i < scores.size(); ++i) out << i << ' ' << format_double(scores[i]) << '\n';
}

ScoreMap read_scores(std::istream& in) {
  Lines lines(in);
  std::vector<double> values;
  std::string line;
  while (lines.next(line)) {
    if (line.find_first_not_of(" \t") == line.find('#')) continue;
    const auto t = tokens_of(line);
    if (t.size() != 2) throw ParseError(lines.number, "expected 'index score'");
    const auto index = to_number<std::size_t>(t[0], lines.number, "anchor index");
    if (index != values.size()) throw ParseError(lines.number, "anchor index out of sequence");
    const double v = to_number<double>(t[1], lines.number, "score");
    if (!(v >= 0.0 && v <= 1.0)) throw ParseError(lines.number, "score outside [0, 1]");
    values.push_back(v);
  }
  return ScoreMap(std::move(values));
}

void write_masks(std::ostream& out, const AnchorGrid& grid, const std::array<AttentionMask, kNumLayers>& masks) {
  std::size_t ones = 0;
  for (const auto& m : masks) ones += m.count_ones();
  out << "# anchorkit-mask v1 width=" << grid.image_width() << " height=" << grid.image_height()
      << " n=" << masks[0].neighborhood << " ones=" << ones << '\n';
  for (LayerId layer : kAllLayers) {
    const AttentionMask& m = masks[layer_position(layer)];
    for (int r = 0; r < m.height; ++r) {
      for (int c = 0; c < m.width; ++c) {
        if (m.at(r, c)) out << grid.index_of(layer, r, c) << " 1\n";
      }
    }
  }
}

void write_discrepancy_labels(std::ostream& out, std::span<const DiscrepancyLabel> labels) {
  out << "# anchorkit-discrepancy v1 anchors=" << labels.size() << '\n';
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ' ' << static_cast<int>(labels[i]) << '\n';
}

nlohmann::ordered_json plan_to_json(const TransformPlan& plan) {
  nlohmann::ordered_json j;
  j["version"] = kPlanRecordVersion;
  j["strategy"] = std::string(strategy_name(plan.strategy));
  j["source"] = {plan.source.width, plan.source.height};
  j["pre_resize_ratio"] = plan.pre_resize_ratio;
  j["target_layer"] = plan.target_layer ? nlohmann::ordered_json(std::string(layer_name(*plan.target_layer)))
                                        : nlohmann::ordered_json(nullptr);
  j["sampled_face_index"] =
      plan.sampled_face_index ? nlohmann::ordered_json(*plan.sampled_face_index) : nlohmann::ordered_json(nullptr);
  j["sampled_face_scale"] = plan.sampled_face_scale;
  j["target_scale"] = plan.target_scale;
  j["target_resize_ratio"] = plan.target_resize_ratio;
  j["crop_window"] = {plan.crop_window.x_min(), plan.crop_window.y_min(), plan.crop_window.x_max(),
                      plan.crop_window.y_max()};
  j["output_size"] = {plan.output_size.width, plan.output_size.height};
  j["fallback_rsc"] = plan.fallback_rsc;
  return j;
}

TransformPlan plan_from_json(const nlohmann::json& j) {
  if (j.at("version").get<int>() != kPlanRecordVersion) {
    throw std::invalid_argument("unsupported plan record version");
  }
  TransformPlan plan;
  const auto strategy = parse_strategy(j.at("strategy").get<std::string>());
  if (!strategy) throw std::invalid_argument("unknown strategy in plan record");
  plan.strategy = *strategy;
  plan.source = {j.at("source").at(0).get<int>(), j.at("source").at(1).get<int>()};
  plan.pre_resize_ratio = j.at("pre_resize_ratio").get<double>();
  if (!j.at("target_layer").is_null()) {
    plan.target_layer = parse_layer(j.at("target_layer").get<std::string>());
    if (!plan.target_layer) throw std::invalid_argument("unknown layer in plan record");
  }
  if (!j.at("sampled_face_index").is_null()) plan.sampled_face_index = j.at("sampled_face_index").get<std::size_t>();
  plan.sampled_face_scale = j.at("sampled_face_scale").get<double>();
  plan.target_scale = j.at("target_scale").get<double>();
  plan.target_resize_ratio = j.at("target_resize_ratio").get<double>();
  const auto& c = j.at("crop_window");
  plan.crop_window = Box(c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>(), c.at(3).get<double>());
  plan.output_size = {j.at("output_size").at(0).get<int>(), j.at("output_size").at(1).get<int>()};
  plan.fallback_rsc = j.at("fallback_rsc").get<bool>();
  return plan;
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, sub] : report.subsets) {
    nlohmann::ordered_json curve = nlohmann::ordered_json::array();
    for (const CurvePoint& p : sub.curve) curve.push_back({p.precision, p.recall, p.threshold});
    j[name] = {{"ap", sub.ap}, {"nfa", sub.nfa}, {"num_gts", sub.num_gts}, {"curve", std::move(curve)}};
  }
  return j;
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "subset,threshold,precision,recall\n";
  for (const auto& [name, sub] : report.subsets) {
    for (const CurvePoint& p : sub.curve) {
      out << name << ',' << format_double(p.threshold) << ',' << format_double(p.precision) << ','
          << format_double(p.recall) << '\n';
    }
  }
}

std::map<std::string, SubsetSpec> parse_subsets(std::istream& in, const std::string& default_name) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(1, std::string("subset file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(1, "subset file must hold a JSON object");
  auto read_spec = [](const nlohmann::json& obj) {
    SubsetSpec spec;
    for (const auto& [path, indices] : obj.items()) {
      if (!indices.is_array()) throw ParseError(1, "subset entry for " + path + " must be an index list");
      auto& list = spec[path];
      for (const auto& v : indices) {
        if (!v.is_number_unsigned()) throw ParseError(1, "subset indices must be non-negative integers");
        list.push_back(v.get<std::size_t>());
      }
    }
    return spec;
  };
  std::map<std::string, SubsetSpec> out;
  const bool nested = !j.empty() && j.begin()->is_object();
  if (nested) {
    for (const auto& [name, obj] : j.items()) {
      if (!obj.is_object()) throw ParseError(1, "subset '" + name + "' must map image paths to index lists");
      out[name] = read_spec(obj);
    }
  } else {
    out[default_name] = read_spec(j);
  }
  return out;
}

}  // namespace anchorkit
