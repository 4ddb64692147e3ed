#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anchorkit/assignment.hpp"
#include "anchorkit/geometry.hpp"
#include "anchorkit/random.hpp"
#include "anchorkit/widerface.hpp"

namespace anchorkit {

struct ImageSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

struct ScaleRange {
  double start;
  double end;
};

// Face-scale interval matched by each pyramid layer at 640 input.
inline constexpr std::array<ScaleRange, kNumLayers> kDefaultScaleRanges = {{
    {8.4, 20.7},
    {20.7, 48.2},
    {48.2, 106.2},
    {106.2, 212.4},
    {212.4, 420.8},
    {420.8, 640.0},
}};

inline constexpr std::array<double, kNumLayers> kAnchorScaleSet = {16, 32, 64, 128, 256, 512};

struct SseConfig {
  double tr_p5 = 0.20;
  double tr_p6 = 0.16;  // (1 - tr_p5) * r_p6 with r_p6 = 0.2
  std::array<ScaleRange, kNumLayers> scale_ranges = kDefaultScaleRanges;
  int output_side = 640;
  int pre_resize_min = 640;
  int pre_resize_max = 1280;

  void validate() const;
};

struct DasConfig {
  std::optional<double> r_th;
  int output_side = 640;

  void validate() const;
};

enum class Strategy { Mst, Rsc, Das, Sse };

std::string_view strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

// One image's augmentation decision. The source image is resized by
// pre_resize_ratio * target_resize_ratio, the crop window (in resized
// coordinates) is cut out and placed at the origin of an output frame of
// output_size, zero-padded where the crop is smaller.
struct TransformPlan {
  Strategy strategy = Strategy::Mst;
  ImageSize source;
  double pre_resize_ratio = 1.0;
  std::optional<LayerId> target_layer;
  std::optional<std::size_t> sampled_face_index;
  double sampled_face_scale = 0.0;  // after pre-resize
  double target_scale = 0.0;
  double target_resize_ratio = 1.0;
  Box crop_window{0, 0, 1, 1};
  ImageSize output_size;
  // Set when a face-driven planner fell back to random square crop.
  bool fallback_rsc = false;

  double total_ratio() const { return pre_resize_ratio * target_resize_ratio; }
  ImageSize resized_size() const;
};

// Pixel dimension of an image side after resizing; at least 1.
int resized_extent(int side, double ratio);

TransformPlan mst_plan(ImageSize image, Rng& rng, int min_short_side = 640, int max_short_side = 1280);
TransformPlan rsc_plan(ImageSize image, Rng& rng);
TransformPlan das_plan(ImageSize image, std::span<const Box> faces, const DasConfig& cfg, Rng& rng);
TransformPlan sse_plan(ImageSize image, std::span<const Box> faces, const SseConfig& cfg, Rng& rng);

// Anchor scale closest to `scale`; the smaller one wins a tie.
double nearest_anchor_scale(double scale);

struct PlacedFace {
  std::size_t source_index;
  Box box;
};

// Faces mapped into the output frame. Faces whose center leaves the crop are
// dropped; survivors are clipped to the crop.
std::vector<PlacedFace> place_faces(std::span<const Box> faces, const TransformPlan& plan);
std::vector<Box> apply_plan(std::span<const Box> faces, const TransformPlan& plan);

// Interleaved raster, row-major, `channels` values per pixel.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;

  Raster() = default;
  Raster(int w, int h, int c, float fill = 0.0f);

  float& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(x)) * static_cast<std::size_t>(channels) +
                static_cast<std::size_t>(c)];
  }
  float at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(x)) * static_cast<std::size_t>(channels) +
                static_cast<std::size_t>(c)];
  }
  friend bool operator==(const Raster&, const Raster&) = default;
};

// Bilinear resample + crop + zero pad into plan.output_size.
Raster apply_raster(const Raster& image, const TransformPlan& plan);

struct ScaleDensityPoint {
  double threshold;
  double fraction;  // of valid faces with face_scale < threshold
};

// Thresholds are sorted ascending (duplicates removed) before evaluation.
std::vector<ScaleDensityPoint> scale_distribution(const GroundTruthSet& annotations,
                                                  std::vector<double> thresholds);

struct CalibrationConfig {
  LayerId target_layer = LayerId::P2;
  double target_ratio = 0.5;
  double start_scale = 8.0;
  double end_scale = 640.0;
  int max_iterations = 30;
  double tolerance = 0.05;
  MatchConfig match;
  std::uint64_t seed = 0;
  // Canvas for images with unknown size: the extent of their faces.
  std::vector<std::optional<ImageSize>> image_sizes;

  void validate() const;
};

struct CalibrationStep {
  double scale;
  double ratio;
};

struct CalibrationState {
  LayerId target_layer = LayerId::P2;
  double target_ratio = 0.0;
  double start_scale = 0.0;
  double end_scale = 0.0;
  double scale = 0.0;           // s_i
  double achieved_ratio = 0.0;  // r_c
  int iterations = 0;
  bool converged = false;
  std::string note;
  std::vector<CalibrationStep> trace;
};

// Fraction of valid gts matched in `layer` after resizing every image so that
// one randomly sampled face (per image) reaches `scale`. The sampling stream is
// reseeded from `seed` on every call.
double layer_match_ratio(const GroundTruthSet& annotations, LayerId layer, double scale,
                         const MatchConfig& match, std::uint64_t seed,
                         std::span<const std::optional<ImageSize>> image_sizes = {});

// Bisection on the face scale until the layer ratio is within tolerance of
// the target.
CalibrationState calibrate_scale_control(const GroundTruthSet& annotations,
                                         const CalibrationConfig& cfg);

}  // namespace anchorkit
