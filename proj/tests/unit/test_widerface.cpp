#include <gtest/gtest.h>

#include <sstream>

#include "anchorkit/widerface.hpp"

using namespace anchorkit;

namespace {

GroundTruthSet parse_gt(const std::string& text) {
  std::istringstream in(text);
  return parse_widerface_annotations(in);
}

PredictionSet parse_pred(const std::string& text) {
  std::istringstream in(text);
  return parse_predictions(in);
}

std::size_t error_line(const std::string& text, bool predictions) {
  try {
    predictions ? (void)parse_pred(text) : (void)parse_gt(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(Annotations, SingleFace) {
  const auto set = parse_gt("a/b.jpg\n1\n10 20 30 40 0 0 0 0 0 0\n");
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set[0].path, "a/b.jpg");
  ASSERT_EQ(set[0].faces.size(), 1u);
  EXPECT_EQ(*set[0].faces[0].box, Box(10, 20, 40, 60));
  EXPECT_FALSE(set[0].faces[0].skip);
}

TEST(Annotations, ZeroCountDummyLine) {
  const auto set = parse_gt("x.jpg\n0\n0 0 0 0 0 0 0 0 0 0\ny.jpg\n1\n1 1 5 5 0 0 0 0 0 0\n");
  ASSERT_EQ(set.size(), 2u);
  EXPECT_TRUE(set[0].faces.empty());
  EXPECT_EQ(set[1].faces.size(), 1u);
  // The placeholder is optional.
  EXPECT_EQ(parse_gt("x.jpg\n0\ny.jpg\n0\n").size(), 2u);
}

TEST(Annotations, InvalidAndEmptyFacesAreSkipMarked) {
  const auto set = parse_gt("x.jpg\n3\n1 1 5 5 2 0 1 1 0 2\n1 1 0 5 0 0 0 0 0 0\n3 3 4 4 0 1 0 0 2 0\n");
  ASSERT_EQ(set[0].faces.size(), 3u);
  EXPECT_TRUE(set[0].faces[0].skip);
  EXPECT_EQ(set[0].faces[0].attributes.pose, 2);
  EXPECT_EQ(set[0].faces[0].attributes.blur, 2);
  EXPECT_TRUE(set[0].faces[1].skip);
  EXPECT_FALSE(set[0].faces[1].box.has_value());
  EXPECT_FALSE(set[0].faces[2].skip);
  EXPECT_EQ(set[0].faces[2].attributes.occlusion, 2);
  EXPECT_EQ(set[0].valid_boxes().size(), 1u);
}

TEST(Annotations, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("x.jpg\nabc\n", false), 2u);
  EXPECT_EQ(error_line("x.jpg\n2\n1 1 5 5 0 0 0 0 0 0\n1 1 5 5 0 0\n", false), 4u);
  EXPECT_EQ(error_line("x.jpg\n2\n1 1 5 5 0 0 0 0 0 0\n", false), 4u);
  EXPECT_EQ(error_line("x.jpg\n-1\n", false), 2u);
  EXPECT_EQ(error_line("x.jpg\n", false), 2u);
}

TEST(Annotations, WindowsLineEndings) {
  const auto set = parse_gt("x.jpg\r\n1\r\n1 1 5 5 0 0 0 0 0 0\r\n");
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set[0].path, "x.jpg");
}

TEST(Predictions, Basic) {
  const auto set = parse_pred("img\n1\n0 0 10 10 0.9\n");
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set[0].detections[0].box, Box(0, 0, 10, 10));
  EXPECT_DOUBLE_EQ(set[0].detections[0].score, 0.9);
  EXPECT_TRUE(parse_pred("").empty());
}

TEST(Predictions, Errors) {
  EXPECT_EQ(error_line("img\n2\n0 0 10 10 0.9\n", true), 4u);
  EXPECT_EQ(error_line("img\n2\n0 0 10 10 0.9\nnext\n1\n0 0 1 1 0.1\n", true), 4u);
  EXPECT_EQ(error_line("img\n1\n0 0 10 10 nan\n", true), 3u);
  EXPECT_EQ(error_line("img\n1\n0 0 10 10 1.5\n", true), 3u);
  EXPECT_EQ(error_line("img\n1\n0 0 0 10 0.5\n", true), 3u);
  EXPECT_EQ(error_line("img\nx\n", true), 2u);
}

TEST(ImageKey, StripsDirectoriesAndExtension) {
  EXPECT_EQ(image_key("0--Parade/0_Parade_marchingband_1_5.jpg"), "0_Parade_marchingband_1_5");
  EXPECT_EQ(image_key("img_a"), "img_a");
  EXPECT_EQ(image_key("a\\b\\c.txt"), "c");
  EXPECT_EQ(image_key(".hidden"), ".hidden");
}
