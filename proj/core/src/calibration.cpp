#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "anchorkit/augmentation.hpp"

namespace anchorkit {

void CalibrationConfig::validate() const {
  if (!(target_ratio > 0.0 && target_ratio <= 1.0)) {
    throw std::invalid_argument("target ratio must be in (0, 1]");
  }
  if (!(start_scale > 0.0) || !(end_scale > start_scale)) {
    throw std::invalid_argument("calibration interval must satisfy 0 < start < end");
  }
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  match.validate();
}

double layer_match_ratio(const GroundTruthSet& annotations, LayerId layer, double scale,
                         const MatchConfig& match, std::uint64_t seed,
                         std::span<const std::optional<ImageSize>> image_sizes) {
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  Rng rng(seed);
  std::size_t total = 0;
  std::size_t matched = 0;
  const auto bit = static_cast<std::uint8_t>(1u << layer_position(layer));
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const std::vector<Box> boxes = annotations[i].valid_boxes();
    if (boxes.empty()) continue;
    const std::size_t sampled = rng.index(boxes.size());
    const double ratio = scale / face_scale(boxes[sampled]);

    std::vector<Box> resized;
    resized.reserve(boxes.size());
    double extent_x = 1.0;
    double extent_y = 1.0;
    for (const Box& b : boxes) {
      resized.push_back(b.scaled(ratio));
      extent_x = std::max(extent_x, resized.back().x_max());
      extent_y = std::max(extent_y, resized.back().y_max());
    }
    int width = static_cast<int>(std::ceil(extent_x));
    int height = static_cast<int>(std::ceil(extent_y));
    if (i < image_sizes.size() && image_sizes[i]) {
      width = resized_extent(image_sizes[i]->width, ratio);
      height = resized_extent(image_sizes[i]->height, ratio);
    }
    const AnchorGrid grid(width, height);
    const SparseAssignment sparse = standard_match_sparse(grid, resized, match);
    for (std::uint8_t layers : matched_layer_mask(grid, sparse, resized.size())) {
      if (layers & bit) ++matched;
    }
    total += resized.size();
  }
  if (total == 0) throw std::invalid_argument("calibration needs at least one valid face");
  return static_cast<double>(matched) / static_cast<double>(total);
}

CalibrationState calibrate_scale_control(const GroundTruthSet& annotations,
                                         const CalibrationConfig& cfg) {
  cfg.validate();
  CalibrationState state;
  state.target_layer = cfg.target_layer;
  state.target_ratio = cfg.target_ratio;
  state.start_scale = cfg.start_scale;
  state.end_scale = cfg.end_scale;

  auto measure = [&](double s) {
    return layer_match_ratio(annotations, cfg.target_layer, s, cfg.match, cfg.seed, cfg.image_sizes);
  };

  // Response direction from the interval ends.
  const double r_start = measure(cfg.start_scale);
  const double r_end = measure(cfg.end_scale);
  if (r_start == r_end) {
    state.note = "ratio is flat across the interval; the response is not monotone";
  }
  const bool increasing = r_end >= r_start;

  double lo = cfg.start_scale;
  double hi = cfg.end_scale;
  for (int step = 0; step < cfg.max_iterations; ++step) {
    const double mid = 0.5 * (lo + hi);
    const double rc = measure(mid);
    state.trace.push_back({mid, rc});
    state.iterations = step + 1;
    state.scale = mid;
    state.achieved_ratio = rc;
    if (std::abs(rc - cfg.target_ratio) < cfg.tolerance) {
      state.converged = true;
      break;
    }
    if ((rc > cfg.target_ratio) == increasing) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  state.start_scale = lo;
  state.end_scale = hi;
  if (!state.converged && state.note.empty()) {
    state.note = "iteration cap reached before the target ratio was within tolerance";
  }
  return state;
}

}  // namespace anchorkit
