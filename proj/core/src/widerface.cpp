#include "anchorkit/widerface.hpp"

#include <charconv>
#include <cmath>
#include <string>
#include <vector>

namespace anchorkit {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

struct NumberedLines {
  std::vector<std::string> text;
  std::vector<std::size_t> number;
};

NumberedLines read_nonblank(std::istream& in) {
  NumberedLines out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string_view t = trim(line);
    if (t.empty()) continue;
    out.text.emplace_back(t);
    out.number.push_back(n);
  }
  return out;
}

bool is_count_line(std::string_view line, long& count) {
  const auto tokens = split_ws(line);
  return tokens.size() == 1 && parse_number(tokens[0], count);
}

bool parse_face_record(std::string_view line, FaceAnnotation& face) {
  const auto tokens = split_ws(line);
  if (tokens.size() != 10) return false;
  int v[10];
  for (int i = 0; i < 10; ++i) {
    if (!parse_number(tokens[static_cast<std::size_t>(i)], v[i])) return false;
  }
  face.x = v[0];
  face.y = v[1];
  face.w = v[2];
  face.h = v[3];
  face.attributes = {v[4], v[5], v[6], v[7], v[8], v[9]};
  face.box.reset();
  if (face.w > 0 && face.h > 0) face.box = Box::from_xywh(face.x, face.y, face.w, face.h);
  face.skip = face.attributes.invalid == 1 || !face.box.has_value();
  return true;
}

}  // namespace

std::vector<Box> ImageAnnotation::valid_boxes() const {
  std::vector<Box> out;
  for (const FaceAnnotation& f : faces) {
    if (!f.skip) out.push_back(*f.box);
  }
  return out;
}

GroundTruthSet parse_widerface_annotations(std::istream& in) {
  GroundTruthSet out;
  NumberedLines input = read_nonblank(in);
  const auto& lines = input.text;
  const auto& numbers = input.number;

  std::size_t i = 0;
  while (i < lines.size()) {
    ImageAnnotation image;
    image.path = lines[i++];
    if (i >= lines.size()) throw ParseError(numbers[i - 1] + 1, "missing face count for " + image.path);
    long count = 0;
    if (!is_count_line(lines[i], count) || count < 0) {
      throw ParseError(numbers[i], "expected a face count, got '" + lines[i] + "'");
    }
    ++i;
    if (count == 0) {
      FaceAnnotation dummy;
      if (i < lines.size() && parse_face_record(lines[i], dummy)) ++i;
    }
    for (long k = 0; k < count; ++k) {
      if (i >= lines.size()) {
        throw ParseError(numbers.empty() ? 1 : numbers.back() + 1,
                         "expected " + std::to_string(count) + " face records for " + image.path +
                             ", found " + std::to_string(k));
      }
      FaceAnnotation face;
      if (!parse_face_record(lines[i], face)) {
        throw ParseError(numbers[i], "malformed face record '" + lines[i] + "'");
      }
      image.faces.push_back(face);
      ++i;
    }
    out.push_back(std::move(image));
  }
  return out;
}

PredictionSet parse_predictions(std::istream& in) {
  PredictionSet out;
  NumberedLines input = read_nonblank(in);
  const auto& lines = input.text;
  const auto& numbers = input.number;

  std::size_t i = 0;
  while (i < lines.size()) {
    ImagePredictions image;
    image.name = lines[i++];
    if (i >= lines.size()) throw ParseError(numbers[i - 1] + 1, "missing detection count for " + image.name);
    long count = 0;
    if (!is_count_line(lines[i], count) || count < 0) {
      throw ParseError(numbers[i], "expected a detection count, got '" + lines[i] + "'");
    }
    ++i;
    for (long k = 0; k < count; ++k) {
      if (i >= lines.size()) {
        throw ParseError(numbers.back() + 1, "count mismatch for " + image.name + ": expected " +
                                                 std::to_string(count) + " detections, found " +
                                                 std::to_string(k));
      }
      const auto tokens = split_ws(lines[i]);
      double v[5];
      bool ok = tokens.size() == 5;
      for (std::size_t t = 0; ok && t < 5; ++t) ok = parse_number(tokens[t], v[t]) && std::isfinite(v[t]);
      if (!ok) {
        throw ParseError(numbers[i], "count mismatch or malformed detection '" + lines[i] + "'");
      }
      if (!(v[2] > 0.0) || !(v[3] > 0.0)) {
        throw ParseError(numbers[i], "detection with non-positive size");
      }
      if (!(v[4] >= 0.0 && v[4] <= 1.0)) {
        throw ParseError(numbers[i], "detection score outside [0, 1]");
      }
      image.detections.push_back({Box::from_xywh(v[0], v[1], v[2], v[3]), v[4]});
      ++i;
    }
    out.push_back(std::move(image));
  }
  return out;
}

std::string image_key(std::string_view path) {
  const auto slash = path.find_last_of("/\\");
  std::string_view name = slash == std::string_view::npos ? path : path.substr(slash + 1);
  const auto dot = name.find_last_of('.');
  if (dot != std::string_view::npos && dot > 0) name = name.substr(0, dot);
  return std::string(name);
}

}  // namespace anchorkit
