#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "anchorkit/assignment.hpp"
#include "anchorkit/eval.hpp"

// Contiguous-buffer entry points for foreign callers. Boxes are row-major
// (x_min, y_min, x_max, y_max) quadruples unless stated otherwise.
namespace anchorkit::flat {

const char* version();

// Raised for malformed buffers; field() names the offending argument.
class BoundaryError : public std::invalid_argument {
 public:
  BoundaryError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class AssignStrategy { Standard, AliAms };

struct FlatBatch {
  std::span<const float> anchors;  // n*4, must equal the grid for the image dims
  std::span<const float> gts;      // m*4
  std::span<const float> scores;   // n, required for AliAms
  int image_width = 0;
  int image_height = 0;
};

struct AssignOutput {
  std::vector<std::int8_t> labels;      // 1 Positive, 0 Negative, -1 Ignore
  std::vector<std::int32_t> gt_index;   // -1 unless Positive
};

AssignOutput assign_flat(const FlatBatch& batch, AssignStrategy strategy = AssignStrategy::AliAms,
                         const MatchConfig& cfg = {});

// Gt and detection boxes are (x, y, w, h) as in the Wider Face files. Every
// gt and detection names its image through an index in [0, num_images).
struct FlatEvalInput {
  std::size_t num_images = 0;
  std::span<const float> gt_boxes;        // m*4
  std::span<const std::int32_t> gt_image; // m
  std::span<const std::uint8_t> gt_skip;  // m or empty; nonzero marks a skipped gt
  std::span<const float> det_boxes;       // k*4
  std::span<const float> det_scores;      // k
  std::span<const std::int32_t> det_image;// k
};

struct EvalOutput {
  double ap = 0.0;
  std::size_t nfa = 0;
  std::vector<double> curve;  // rows of (precision, recall, threshold)
};

EvalOutput evaluate_flat(const FlatEvalInput& input, const EvalConfig& cfg = {});

}  // namespace anchorkit::flat
