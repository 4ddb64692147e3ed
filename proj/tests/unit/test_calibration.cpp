#include <gtest/gtest.h>

#include <cmath>

#include "anchorkit/augmentation.hpp"
#include "oracles.hpp"

using namespace anchorkit;

namespace {

FaceAnnotation face(double x, double y, double w, double h) {
  FaceAnnotation f;
  f.box = Box(x, y, x + w, y + h);
  return f;
}

// Per-image face sets with a spread of relative sizes.
GroundTruthSet spread_dataset(std::uint64_t seed, int images, int faces_per_image) {
  oracle::Gen gen(seed);
  GroundTruthSet set(static_cast<std::size_t>(images));
  for (auto& image : set) {
    for (int f = 0; f < faces_per_image; ++f) {
      const double s = 20.0 * std::pow(2.0, gen.real(-2.0, 2.0));
      image.faces.push_back(face(gen.real(0, 300), gen.real(0, 300), s, s * gen.real(0.8, 1.25)));
    }
  }
  return set;
}

// Recomputes the layer ratio with the exhaustive matcher.
double oracle_ratio(const GroundTruthSet& set, LayerId layer, double scale, std::uint64_t seed) {
  Rng rng(seed);
  std::size_t matched = 0, total = 0;
  for (const auto& image : set) {
    const auto boxes = image.valid_boxes();
    const double ratio = scale / face_scale(boxes[rng.index(boxes.size())]);
    std::vector<Box> resized;
    double ex = 1.0, ey = 1.0;
    for (const Box& b : boxes) {
      resized.push_back(b.scaled(ratio));
      ex = std::max(ex, resized.back().x_max());
      ey = std::max(ey, resized.back().y_max());
    }
    const AnchorGrid grid(static_cast<int>(std::ceil(ex)), static_cast<int>(std::ceil(ey)));
    const auto labels = oracle::standard_match(grid, resized, {});
    std::set<int> hit;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i].is_positive() && grid.layer_of(i) == layer) hit.insert(labels[i].gt_index);
    }
    matched += hit.size();
    total += resized.size();
  }
  return static_cast<double>(matched) / static_cast<double>(total);
}

}  // namespace

TEST(Calibration, DeterministicLayerConvergesToFullRatio) {
  // One face per image; every face lands at the trial scale, so at any scale
  // inside the deepest layer's range all gts match there.
  GroundTruthSet set;
  for (int i = 0; i < 6; ++i) {
    ImageAnnotation image;
    image.faces.push_back(face(3.0 * i, 7.0, 30.0 + 5 * i, 30.0 + 5 * i));
    set.push_back(image);
  }
  CalibrationConfig cfg;
  cfg.target_layer = LayerId::P7;
  cfg.target_ratio = 1.0;
  const CalibrationState state = calibrate_scale_control(set, cfg);
  EXPECT_TRUE(state.converged) << state.note;
  EXPECT_DOUBLE_EQ(state.achieved_ratio, 1.0);
}

TEST(Calibration, ConvergedImpliesWithinTolerance) {
  const GroundTruthSet set = spread_dataset(4, 20, 6);
  for (double r : {0.2, 0.5, 0.8}) {
    CalibrationConfig cfg;
    cfg.target_layer = LayerId::P2;
    cfg.target_ratio = r;
    cfg.seed = 9;
    const CalibrationState state = calibrate_scale_control(set, cfg);
    if (state.converged) EXPECT_LT(std::abs(state.achieved_ratio - r), 0.05);
    EXPECT_LE(state.iterations, 30);
    EXPECT_EQ(state.trace.size(), static_cast<std::size_t>(state.iterations));
  }
}

TEST(Calibration, RerunningReturnedScaleReproducesRatio) {
  const GroundTruthSet set = spread_dataset(8, 15, 5);
  CalibrationConfig cfg;
  cfg.target_layer = LayerId::P2;
  cfg.target_ratio = 0.4;
  cfg.seed = 21;
  const CalibrationState state = calibrate_scale_control(set, cfg);
  EXPECT_EQ(layer_match_ratio(set, LayerId::P2, state.scale, cfg.match, cfg.seed), state.achieved_ratio);
  for (const CalibrationStep& step : state.trace) {
    EXPECT_EQ(layer_match_ratio(set, LayerId::P2, step.scale, cfg.match, cfg.seed), step.ratio);
  }
}

TEST(Calibration, TraceMatchesExhaustiveMatcher) {
  const GroundTruthSet set = spread_dataset(15, 4, 3);
  CalibrationConfig cfg;
  cfg.target_layer = LayerId::P3;
  cfg.target_ratio = 0.5;
  cfg.start_scale = 8.0;
  cfg.end_scale = 64.0;
  cfg.max_iterations = 6;
  cfg.seed = 5;
  const CalibrationState state = calibrate_scale_control(set, cfg);
  ASSERT_FALSE(state.trace.empty());
  for (const CalibrationStep& step : state.trace) {
    EXPECT_DOUBLE_EQ(step.ratio, oracle_ratio(set, LayerId::P3, step.scale, cfg.seed)) << step.scale;
  }
}

TEST(Calibration, CapReachedIsFlagged) {
  const GroundTruthSet set = spread_dataset(3, 10, 4);
  CalibrationConfig cfg;
  cfg.target_layer = LayerId::P2;
  cfg.target_ratio = 0.5;
  cfg.tolerance = 1e-9;
  cfg.max_iterations = 3;
  const CalibrationState state = calibrate_scale_control(set, cfg);
  EXPECT_FALSE(state.converged);
  EXPECT_EQ(state.iterations, 3);
  EXPECT_FALSE(state.note.empty());
}

TEST(Calibration, ConfigValidation) {
  CalibrationConfig cfg;
  cfg.target_ratio = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.target_ratio = 0.5;
  cfg.start_scale = 100;
  cfg.end_scale = 50;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_THROW(calibrate_scale_control({}, CalibrationConfig{}), std::invalid_argument);
}
