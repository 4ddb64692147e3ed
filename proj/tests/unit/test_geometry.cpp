#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "anchorkit/geometry.hpp"
#include "oracles.hpp"

using namespace anchorkit;

TEST(Box, RejectsDegenerateAndNonFinite) {
  EXPECT_THROW(Box(0, 0, 0, 1), std::invalid_argument);
  EXPECT_THROW(Box(0, 0, 1, 0), std::invalid_argument);
  EXPECT_THROW(Box(2, 0, 1, 1), std::invalid_argument);
  EXPECT_THROW(Box(0, 0, std::numeric_limits<double>::infinity(), 1), std::invalid_argument);
  EXPECT_THROW(Box(std::nan(""), 0, 1, 1), std::invalid_argument);
  EXPECT_NO_THROW(Box(0, 0, 1e-9, 1e-9));
}

TEST(Box, XywhConversion) {
  const Box b = Box::from_xywh(10, 20, 30, 40);
  EXPECT_EQ(b, Box(10, 20, 40, 60));
  EXPECT_DOUBLE_EQ(b.width(), 30);
  EXPECT_DOUBLE_EQ(b.height(), 40);
}

TEST(Iou, Examples) {
  const Box a(0, 0, 10, 10);
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, Box(20, 20, 30, 30)), 0.0);
  EXPECT_DOUBLE_EQ(iou(a, Box(10, 0, 20, 10)), 0.0);  // touching edges
  EXPECT_NEAR(iou(a, Box(5, 0, 15, 10)), 1.0 / 3.0, 1e-15);
}

TEST(Iou, MatchesPixelCountOnIntegerBoxes) {
  oracle::Gen gen(11);
  for (int trial = 0; trial < 400; ++trial) {
    const int ax0 = gen.integer(0, 20), ay0 = gen.integer(0, 20);
    const int ax1 = ax0 + gen.integer(1, 12), ay1 = ay0 + gen.integer(1, 12);
    const int bx0 = gen.integer(0, 20), by0 = gen.integer(0, 20);
    const int bx1 = bx0 + gen.integer(1, 12), by1 = by0 + gen.integer(1, 12);
    const double expected = oracle::pixel_iou(ax0, ay0, ax1, ay1, bx0, by0, bx1, by1);
    EXPECT_NEAR(iou(Box(ax0, ay0, ax1, ay1), Box(bx0, by0, bx1, by1)), expected, 1e-9);
  }
}

TEST(CenterDistance, Examples) {
  EXPECT_DOUBLE_EQ(center_distance(Box(0, 0, 10, 10), Box(2, 2, 8, 8)), 0.0);
  const Box a = Box::from_center(0, 0, 2, 2);
  const Box b = Box::from_center(3, 4, 2, 2);
  EXPECT_DOUBLE_EQ(center_distance(a, b), 5.0);
  EXPECT_DOUBLE_EQ(center_distance(b, a), 5.0);
}

TEST(FaceScale, Examples) {
  EXPECT_DOUBLE_EQ(face_scale(Box(0, 0, 10, 10)), 10.0);
  EXPECT_DOUBLE_EQ(face_scale(Box(0, 0, 20, 5)), 10.0);
  EXPECT_DOUBLE_EQ(face_scale(Box(0, 0, 16, 64)), 32.0);
  EXPECT_DOUBLE_EQ(face_scale(Box(0, 0, 64, 16)), 32.0);
}

TEST(Layers, StridesAndScales) {
  const int strides[] = {4, 8, 16, 32, 64, 128};
  for (std::size_t i = 0; i < kNumLayers; ++i) {
    EXPECT_EQ(kPyramidLayers[i].stride, strides[i]);
    EXPECT_DOUBLE_EQ(kPyramidLayers[i].anchor_scale, 4.0 * strides[i]);
  }
  for (LayerId id : kAllLayers) EXPECT_EQ(parse_layer(layer_name(id)), id);
  EXPECT_FALSE(parse_layer("p8").has_value());
}

TEST(AnchorGrid, Grid640) {
  const AnchorGrid grid = generate_anchor_grid(640, 640);
  EXPECT_EQ(grid.shape(LayerId::P2).rows, 160);
  EXPECT_EQ(grid.shape(LayerId::P2).cols, 160);
  EXPECT_DOUBLE_EQ(grid.anchor(0).box.width(), 16.0);
  std::size_t expected = 0;
  for (int i = 2; i <= 7; ++i) expected += (640u >> i) * (640u >> i);
  EXPECT_EQ(expected, 34125u);
  EXPECT_EQ(grid.size(), expected);
}

TEST(AnchorGrid, OnePixelImageHasOneAnchorPerLayer) {
  const AnchorGrid grid(1, 1);
  EXPECT_EQ(grid.size(), kNumLayers);
  for (LayerId id : kAllLayers) EXPECT_EQ(grid.shape(id).count(), 1u);
}

TEST(AnchorGrid, RejectsNonPositiveDims) {
  EXPECT_THROW(AnchorGrid(0, 10), std::invalid_argument);
  EXPECT_THROW(AnchorGrid(10, -1), std::invalid_argument);
}

TEST(AnchorGrid, LayoutAndCenters) {
  const AnchorGrid grid(100, 70);
  std::size_t expected_index = 0;
  for (LayerId id : kAllLayers) {
    const int s = pyramid_layer(id).stride;
    const int rows = (70 + s - 1) / s;
    const int cols = (100 + s - 1) / s;
    ASSERT_EQ(grid.shape(id).rows, rows);
    ASSERT_EQ(grid.shape(id).cols, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const Anchor a = grid.anchor(expected_index);
        EXPECT_EQ(a.index, expected_index);
        EXPECT_EQ(a.layer, id);
        EXPECT_EQ(a.row, r);
        EXPECT_EQ(a.col, c);
        EXPECT_DOUBLE_EQ(a.box.center_x(), s * (c + 0.5));
        EXPECT_DOUBLE_EQ(a.box.center_y(), s * (r + 0.5));
        EXPECT_DOUBLE_EQ(a.box.width(), 4.0 * s);
        EXPECT_EQ(grid.index_of(id, r, c), expected_index);
        EXPECT_EQ(grid.layer_of(expected_index), id);
        ++expected_index;
      }
    }
  }
  EXPECT_EQ(expected_index, grid.size());
  EXPECT_THROW(grid.anchor(grid.size()), std::out_of_range);
}

TEST(AnchorGrid, CentersInsideImageForMultiplesOf128) {
  for (int w : {128, 256, 384}) {
    for (int h : {128, 640}) {
      const AnchorGrid grid(w, h);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const Box b = grid.anchor(i).box;
        ASSERT_GT(b.center_x(), 0.0);
        ASSERT_LT(b.center_x(), w);
        ASSERT_GT(b.center_y(), 0.0);
        ASSERT_LT(b.center_y(), h);
      }
    }
  }
}

TEST(AnchorGrid, AnchorsAreNotClipped) {
  const AnchorGrid grid(128, 128);
  const Box first_p7 = grid.anchor(grid.layer_begin(LayerId::P7)).box;
  EXPECT_DOUBLE_EQ(first_p7.x_min(), 64.0 - 256.0);
  EXPECT_DOUBLE_EQ(first_p7.x_max(), 64.0 + 256.0);
}

TEST(IouProperties, SymmetricAndReflexive) {
  oracle::Gen gen(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const Box a = gen.box(100, 100, 0.5, 80);
    const Box b = gen.box(100, 100, 0.5, 80);
    EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
    EXPECT_EQ(iou(a, b), iou(b, a));
    const double v = iou(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}
