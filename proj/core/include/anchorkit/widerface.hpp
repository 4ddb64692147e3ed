#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "anchorkit/geometry.hpp"

namespace anchorkit {

// Malformed input, with the 1-based line number where parsing stopped.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct FaceAttributes {
  int blur = 0;
  int expression = 0;
  int illumination = 0;
  int invalid = 0;
  int occlusion = 0;
  int pose = 0;
};

struct FaceAnnotation {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  FaceAttributes attributes;
  // Empty when w <= 0 or h <= 0.
  std::optional<Box> box;
  // Excluded from matching and scale statistics: invalid flag set or no area.
  bool skip = false;
};

struct ImageAnnotation {
  std::string path;
  std::vector<FaceAnnotation> faces;

  std::vector<Box> valid_boxes() const;
};

using GroundTruthSet = std::vector<ImageAnnotation>;

struct Detection {
  Box box;
  double score;
};

struct ImagePredictions {
  std::string name;
  std::vector<Detection> detections;
};

using PredictionSet = std::vector<ImagePredictions>;

// Image path line, face-count line, then one "x y w h blur expression
// illumination invalid occlusion pose" line per face. A count of 0 may be
// followed by a single all-zero placeholder record, which is consumed.
GroundTruthSet parse_widerface_annotations(std::istream& in);

// Submission layout: name line, count line, "x y w h score" lines. Several
// images may be concatenated in one stream.
PredictionSet parse_predictions(std::istream& in);

// Lookup key shared by annotation paths, prediction names and subset lists:
// the file name without directories or extension.
std::string image_key(std::string_view path);

}  // namespace anchorkit
