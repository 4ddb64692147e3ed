#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "anchorkit/augmentation.hpp"
#include "oracles.hpp"

using namespace anchorkit;

namespace {

TransformPlan identity_plan(ImageSize size) {
  TransformPlan plan;
  plan.source = size;
  plan.crop_window = Box(0, 0, size.width, size.height);
  plan.output_size = size;
  return plan;
}

}  // namespace

TEST(Mst, RatioFromShortSide) {
  Rng rng(1);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const TransformPlan plan = mst_plan({1000, 800}, rng);
    const double target = plan.pre_resize_ratio * 800.0;
    const auto rounded = std::llround(target);
    ASSERT_NEAR(target, static_cast<double>(rounded), 1e-9);
    ASSERT_GE(rounded, 640);
    ASSERT_LE(rounded, 1280);
    seen.insert(rounded);
    EXPECT_EQ(plan.crop_window, Box(0, 0, plan.resized_size().width, plan.resized_size().height));
    EXPECT_EQ(plan.output_size, plan.resized_size());
    EXPECT_FALSE(plan.target_layer.has_value());
  }
  EXPECT_GT(seen.size(), 500u);
}

TEST(Mst, FixedRangeGivesUnitRatio) {
  Rng rng(3);
  EXPECT_DOUBLE_EQ(mst_plan({900, 640}, rng, 640, 640).pre_resize_ratio, 1.0);
  EXPECT_DOUBLE_EQ(mst_plan({1000, 800}, rng, 1200, 1200).pre_resize_ratio, 1.5);
}

TEST(Mst, RatiosAreUniform) {
  // Kolmogorov-Smirnov against U(0.8, 1.6); the draw is over 641 integer
  // short sides, which adds at most 1/641 to the statistic.
  Rng rng(42);
  const int n = 100000;
  std::vector<double> ratios(n);
  for (auto& r : ratios) r = mst_plan({1000, 800}, rng).pre_resize_ratio;
  std::sort(ratios.begin(), ratios.end());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cdf = (ratios[i] - 0.8) / 0.8;
    d = std::max({d, std::abs(cdf - static_cast<double>(i) / n), std::abs(cdf - static_cast<double>(i + 1) / n)});
  }
  EXPECT_LT(d, 1.63 / std::sqrt(n) + 1.0 / 641.0);
}

TEST(Rsc, SidesAndOffsets) {
  Rng rng(5);
  std::map<int, int> counts;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const TransformPlan plan = rsc_plan({1000, 800}, rng);
    const int side = static_cast<int>(plan.crop_window.width());
    ASSERT_EQ(plan.crop_window.height(), side);
    ASSERT_EQ(plan.output_size, (ImageSize{side, side}));
    ASSERT_GE(plan.crop_window.x_min(), 0);
    ASSERT_LE(plan.crop_window.x_min(), 1000 - side);
    ASSERT_GE(plan.crop_window.y_min(), 0);
    ASSERT_LE(plan.crop_window.y_min(), 800 - side);
    ++counts[side];
  }
  ASSERT_EQ(counts.size(), 5u);
  const std::vector<int> expected_sides = {80, 240, 400, 560, 720};
  double chi2 = 0.0;
  std::size_t k = 0;
  for (const auto& [side, count] : counts) {
    EXPECT_EQ(side, expected_sides[k++]);
    const double e = n / 5.0;
    chi2 += (count - e) * (count - e) / e;
  }
  EXPECT_LT(chi2, 18.47);  // df 4, p = 0.001
}

TEST(Rsc, SquareImageSmallestFactor) {
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    const TransformPlan plan = rsc_plan({500, 500}, rng);
    const double side = plan.crop_window.width();
    EXPECT_TRUE(side == 50 || side == 150 || side == 250 || side == 350 || side == 450);
  }
}

TEST(Das, NearestScale) {
  EXPECT_EQ(nearest_anchor_scale(40), 32);
  EXPECT_EQ(nearest_anchor_scale(48), 32);  // tie -> smaller
  EXPECT_EQ(nearest_anchor_scale(5), 16);
  EXPECT_EQ(nearest_anchor_scale(3000), 512);
}

TEST(Das, ResizeChoices) {
  const std::vector<Box> faces = {Box(100, 100, 140, 140)};  // scale 40
  Rng rng(12);
  std::set<double> ratios;
  for (int i = 0; i < 500; ++i) {
    const TransformPlan plan = das_plan({800, 600}, faces, {}, rng);
    EXPECT_TRUE(plan.target_scale == 16 || plan.target_scale == 32);
    EXPECT_DOUBLE_EQ(plan.target_resize_ratio, plan.target_scale / 40.0);
    EXPECT_EQ(plan.output_size, (ImageSize{640, 640}));
    ratios.insert(plan.target_resize_ratio);
  }
  EXPECT_EQ(ratios, (std::set<double>{0.4, 0.8}));
}

TEST(Das, ClampedByRth) {
  const std::vector<Box> faces = {Box(100, 100, 140, 140)};
  DasConfig cfg;
  cfg.r_th = 2.0;
  Rng rng(12);
  std::set<double> ratios;
  for (int i = 0; i < 500; ++i) ratios.insert(das_plan({800, 600}, faces, cfg, rng).target_resize_ratio);
  EXPECT_EQ(ratios, (std::set<double>{0.5, 0.8}));
  cfg.r_th = 0.5;
  EXPECT_THROW(das_plan({800, 600}, faces, cfg, rng), std::invalid_argument);
}

TEST(Das, EmptyFacesFallBack) {
  Rng rng(1);
  const TransformPlan plan = das_plan({300, 200}, {}, {}, rng);
  EXPECT_TRUE(plan.fallback_rsc);
  EXPECT_EQ(plan.strategy, Strategy::Das);
}

TEST(Sse, TargetScaleAndRatio) {
  const std::vector<Box> faces = {Box(10, 10, 60, 60), Box(300, 200, 420, 300)};
  Rng rng(77);
  const SseConfig cfg;
  for (int i = 0; i < 2000; ++i) {
    const TransformPlan plan = sse_plan({1024, 768}, faces, cfg, rng);
    ASSERT_TRUE(plan.target_layer && plan.sampled_face_index);
    const double short_target = plan.pre_resize_ratio * 768.0;
    ASSERT_NEAR(short_target, std::round(short_target), 1e-9);
    ASSERT_GE(short_target, 640 - 1e-9);
    ASSERT_LE(short_target, 1280 + 1e-9);
    const double fs = face_scale(faces[*plan.sampled_face_index]) * plan.pre_resize_ratio;
    ASSERT_DOUBLE_EQ(plan.sampled_face_scale, fs);
    const ScaleRange range = kDefaultScaleRanges[layer_position(*plan.target_layer)];
    ASSERT_GE(plan.target_scale, range.start);
    ASSERT_LE(plan.target_scale, range.end);
    ASSERT_DOUBLE_EQ(plan.target_resize_ratio, plan.target_scale / fs);
    // The sampled face's center lies in the crop window.
    const Box& face = faces[*plan.sampled_face_index];
    const double cx = face.center_x() * plan.total_ratio();
    const double cy = face.center_y() * plan.total_ratio();
    ASSERT_GE(cx, plan.crop_window.x_min());
    ASSERT_LT(cx, plan.crop_window.x_min() + 640);
    ASSERT_GE(cy, plan.crop_window.y_min());
    ASSERT_LT(cy, plan.crop_window.y_min() + 640);
    ASSERT_LE(plan.crop_window.width(), 640);
    ASSERT_LE(plan.crop_window.height(), 640);
    ASSERT_EQ(plan.output_size, (ImageSize{640, 640}));
  }
}

TEST(Sse, ResizeRatioArithmetic) {
  // fs 50 after pre-resize with a target of 150 gives a ratio of 3.
  const std::vector<Box> faces = {Box(0, 0, 50, 50)};
  SseConfig cfg;
  cfg.tr_p5 = 1.0;
  cfg.tr_p6 = 0.0;
  cfg.pre_resize_min = cfg.pre_resize_max = 640;
  cfg.scale_ranges[layer_position(LayerId::P4)].end = 150.0;
  cfg.scale_ranges[layer_position(LayerId::P5)] = {150.0, 150.0 + 1e-9};
  cfg.scale_ranges[layer_position(LayerId::P6)].start = 150.0 + 1e-9;
  Rng rng(3);
  const TransformPlan plan = sse_plan({640, 640}, faces, cfg, rng);
  EXPECT_EQ(plan.target_layer, LayerId::P5);
  EXPECT_DOUBLE_EQ(plan.sampled_face_scale, 50.0);
  EXPECT_NEAR(plan.target_resize_ratio, 3.0, 1e-9);
}

TEST(Sse, DegenerateBranches) {
  const std::vector<Box> faces = {Box(0, 0, 50, 50)};
  SseConfig all_p5;
  all_p5.tr_p5 = 1.0;
  all_p5.tr_p6 = 0.0;
  SseConfig all_p6;
  all_p6.tr_p5 = 0.0;
  all_p6.tr_p6 = 1.0;
  Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    EXPECT_EQ(sse_plan({800, 800}, faces, all_p5, rng).target_layer, LayerId::P5);
    EXPECT_EQ(sse_plan({800, 800}, faces, all_p6, rng).target_layer, LayerId::P6);
  }
}

TEST(Sse, BranchFrequencies) {
  const std::vector<Box> faces = {Box(100, 100, 150, 160)};
  Rng rng(2023);
  std::map<LayerId, int> counts;
  const int n = 20000;
  for (int i = 0; i < n; ++i) ++counts[*sse_plan({1024, 768}, faces, {}, rng).target_layer];
  EXPECT_NEAR(counts[LayerId::P5] / double(n), 0.20, 0.02);
  EXPECT_NEAR(counts[LayerId::P6] / double(n), 0.16, 0.02);
  for (LayerId l : {LayerId::P2, LayerId::P3, LayerId::P4, LayerId::P7}) {
    EXPECT_NEAR(counts[l] / double(n), 0.16, 0.02);
  }
}

TEST(Sse, EmptyFacesFallBack) {
  Rng rng(1);
  const TransformPlan plan = sse_plan({300, 200}, {}, {}, rng);
  EXPECT_TRUE(plan.fallback_rsc);
  EXPECT_FALSE(plan.target_layer.has_value());
}

TEST(Sse, ConfigValidation) {
  SseConfig cfg;
  cfg.tr_p5 = 0.7;
  cfg.tr_p6 = 0.4;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  SseConfig gap;
  gap.scale_ranges[2].start = 50.0;
  EXPECT_THROW(gap.validate(), std::invalid_argument);
}

TEST(Planners, DeterministicForSeed) {
  const std::vector<Box> faces = {Box(10, 10, 60, 60), Box(300, 200, 420, 300)};
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    Rng a(seed), b(seed);
    for (int i = 0; i < 100; ++i) {
      const TransformPlan pa = sse_plan({1024, 768}, faces, {}, a);
      const TransformPlan pb = sse_plan({1024, 768}, faces, {}, b);
      ASSERT_EQ(pa.crop_window, pb.crop_window);
      ASSERT_EQ(pa.target_resize_ratio, pb.target_resize_ratio);
      ASSERT_EQ(pa.target_layer, pb.target_layer);
    }
  }
}

TEST(ApplyPlan, IdentityKeepsFaces) {
  const std::vector<Box> faces = {Box(1, 2, 30, 40), Box(50, 60, 70, 90)};
  EXPECT_EQ(apply_plan(faces, identity_plan({100, 100})), faces);
}

TEST(ApplyPlan, DoublingAtOrigin) {
  TransformPlan plan = identity_plan({100, 100});
  plan.target_resize_ratio = 2.0;
  plan.crop_window = Box(0, 0, 200, 200);
  const std::vector<Box> faces = {Box(1, 2, 30, 40)};
  EXPECT_EQ(apply_plan(faces, plan), std::vector<Box>{Box(2, 4, 60, 80)});
}

TEST(ApplyPlan, DropsFacesCenteredOutside) {
  TransformPlan plan = identity_plan({100, 100});
  plan.crop_window = Box(50, 50, 100, 100);
  plan.output_size = {50, 50};
  const std::vector<Box> faces = {Box(0, 0, 20, 20), Box(40, 40, 70, 70), Box(60, 60, 80, 80)};
  const auto placed = place_faces(faces, plan);
  ASSERT_EQ(placed.size(), 2u);
  EXPECT_EQ(placed[0].source_index, 1u);
  EXPECT_EQ(placed[0].box, Box(0, 0, 20, 20));  // clipped
  EXPECT_EQ(placed[1].box, Box(10, 10, 30, 30));
}

TEST(ApplyPlan, InverseAffineRecoversFaces) {
  oracle::Gen gen(31);
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Box> faces;
    for (int f = 0; f < 5; ++f) faces.push_back(gen.box(900, 700, 5, 120));
    const TransformPlan plan = sse_plan({1024, 800}, faces, {}, rng);
    const double ratio = plan.total_ratio();
    for (const PlacedFace& p : place_faces(faces, plan)) {
      const Box& src = faces[p.source_index];
      const Box moved = src.scaled(ratio).translated(-plan.crop_window.x_min(), -plan.crop_window.y_min());
      if (!(moved == p.box)) continue;  // clipped faces are not invertible
      const Box back = p.box.translated(plan.crop_window.x_min(), plan.crop_window.y_min()).scaled(1.0 / ratio);
      ASSERT_NEAR(back.x_min(), src.x_min(), 1e-6);
      ASSERT_NEAR(back.y_min(), src.y_min(), 1e-6);
      ASSERT_NEAR(back.x_max(), src.x_max(), 1e-6);
      ASSERT_NEAR(back.y_max(), src.y_max(), 1e-6);
    }
  }
}

TEST(ApplyRaster, IdentityIsBitExact) {
  Raster image(7, 5, 3);
  oracle::Gen gen(2);
  for (auto& v : image.data) v = static_cast<float>(gen.real(-10, 10));
  EXPECT_EQ(apply_raster(image, identity_plan({7, 5})), image);
}

TEST(ApplyRaster, UpscaledConstantStaysConstant) {
  const Raster image(10, 8, 1, 3.25f);
  TransformPlan plan = identity_plan({10, 8});
  plan.target_resize_ratio = 2.0;
  plan.crop_window = Box(0, 0, 20, 16);
  plan.output_size = {20, 16};
  const Raster out = apply_raster(image, plan);
  for (float v : out.data) EXPECT_EQ(v, 3.25f);
}

TEST(ApplyRaster, PaddingIsZero) {
  const Raster image(10, 8, 2, 1.0f);
  TransformPlan plan = identity_plan({10, 8});
  plan.crop_window = Box(0, 0, 10, 8);
  plan.output_size = {16, 16};
  const Raster out = apply_raster(image, plan);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      for (int c = 0; c < 2; ++c) EXPECT_EQ(out.at(x, y, c), (x < 10 && y < 8) ? 1.0f : 0.0f);
    }
  }
}

TEST(ApplyRaster, RejectsWrongSource) {
  EXPECT_THROW(apply_raster(Raster(4, 4, 1), identity_plan({5, 4})), std::invalid_argument);
}

TEST(ScaleDistribution, Examples) {
  GroundTruthSet set(1);
  for (int i = 0; i < 4; ++i) {
    FaceAnnotation f;
    f.box = Box(0, 0, 10, 10);
    set[0].faces.push_back(f);
  }
  const auto points = scale_distribution(set, {20});
  ASSERT_EQ(points.size(), 1u);
  EXPECT_DOUBLE_EQ(points[0].fraction, 1.0);
}

TEST(ScaleDistribution, SortedMonotoneAndSkipsInvalid) {
  GroundTruthSet set(2);
  const double sides[] = {5, 12, 19, 25, 60, 300};
  for (double s : sides) {
    FaceAnnotation f;
    f.box = Box(0, 0, s, s);
    set[s < 20 ? 0 : 1].faces.push_back(f);
  }
  FaceAnnotation skipped;
  skipped.box = Box(0, 0, 1, 1);
  skipped.skip = true;
  set[0].faces.push_back(skipped);
  const auto points = scale_distribution(set, {100, 20, 10, 20, 1000});
  ASSERT_EQ(points.size(), 4u);
  EXPECT_EQ(points[0].threshold, 10);
  EXPECT_DOUBLE_EQ(points[0].fraction, 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(points[1].fraction, 0.5);
  EXPECT_DOUBLE_EQ(points[2].fraction, 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(points[3].fraction, 1.0);
  for (std::size_t i = 1; i < points.size(); ++i) EXPECT_GE(points[i].fraction, points[i - 1].fraction);
}

TEST(ScaleDistribution, EmptyDatasetIsAnError) {
  EXPECT_THROW(scale_distribution({}, {20}), std::invalid_argument);
}
