#include <gtest/gtest.h>

#include <limits>
#include <sstream>

#include "anchorkit/serialization.hpp"
#include "oracles.hpp"

using namespace anchorkit;

namespace {

std::size_t error_line(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(-8), "-8");
  oracle::Gen gen(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = gen.real(-1e6, 1e6);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(AnchorFile, RoundTrip) {
  const AnchorGrid grid(130, 70);
  std::stringstream ss;
  write_anchor_grid(ss, grid);
  std::string first_line;
  std::getline(std::istringstream(ss.str()) >> std::ws, first_line);
  EXPECT_EQ(first_line, "# anchorkit-anchors v1 width=130 height=70 count=" + std::to_string(grid.size()));
  EXPECT_EQ(read_anchor_grid(ss), grid);
}

TEST(AnchorFile, DetectsTampering) {
  const AnchorGrid grid(16, 16);
  std::stringstream ss;
  write_anchor_grid(ss, grid);
  std::string text = ss.str();
  text.replace(text.find("\n0 p2 0 0 -6 -6 10 10"), 21, "\n0 p2 0 0 -6 -6 10 11");
  std::istringstream bad(text);
  EXPECT_EQ(error_line([&] { read_anchor_grid(bad); }), 2u);
  std::istringstream truncated("# anchorkit-anchors v1 width=16 height=16 count=21\n");
  EXPECT_THROW(read_anchor_grid(truncated), ParseError);
  std::istringstream wrong_count("# anchorkit-anchors v1 width=16 height=16 count=3\n");
  EXPECT_EQ(error_line([&] { read_anchor_grid(wrong_count); }), 1u);
}

TEST(AssignmentFile, RoundTripWithScores) {
  const AnchorGrid grid(40, 40);
  const std::vector<Box> gts = {Box(3, 3, 20, 22), Box(10, 18, 34, 39)};
  const AssignmentResult r = standard_match(grid, gts);
  std::vector<double> s(grid.size());
  oracle::Gen gen(3);
  for (auto& v : s) v = gen.real();
  const ScoreMap scores(s);
  std::stringstream ss;
  write_assignment(ss, r, &scores);
  const AssignmentResult back = read_assignment(ss);
  EXPECT_EQ(back.labels, r.labels);
  EXPECT_EQ(back.per_gt_counts, r.per_gt_counts);
  EXPECT_EQ(back.num_gts, 2u);

  std::stringstream plain;
  write_assignment(plain, r);
  EXPECT_NE(plain.str().find(" -\n"), std::string::npos);
}

TEST(AssignmentFile, RejectsBadRecords) {
  const std::string header = "# anchorkit-assignment v1 width=1 height=1 anchors=6 gts=1\n";
  std::istringstream bad_label(header + "0 2 -1 -\n");
  EXPECT_EQ(error_line([&] { read_assignment(bad_label); }), 2u);
  std::istringstream bad_gt(header + "0 1 3 -\n");
  EXPECT_EQ(error_line([&] { read_assignment(bad_gt); }), 2u);
  std::istringstream negative_with_gt(header + "0 0 0 -\n");
  EXPECT_EQ(error_line([&] { read_assignment(negative_with_gt); }), 2u);
}

TEST(ScoresFile, ParseAndErrors) {
  std::istringstream ok("# scores\n0 0.5\n1 1\n\n2 0\n");
  const ScoreMap s = read_scores(ok);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], 0.5);
  std::istringstream gap("0 0.5\n2 0.1\n");
  EXPECT_EQ(error_line([&] { read_scores(gap); }), 2u);
  std::istringstream range("0 0.5\n1 0.1\n2 1.5\n");
  EXPECT_EQ(error_line([&] { read_scores(range); }), 3u);
  std::istringstream junk("0 abc\n");
  EXPECT_EQ(error_line([&] { read_scores(junk); }), 1u);
}

TEST(MaskFile, ListsOnes) {
  const AnchorGrid grid(16, 16);
  const std::vector<std::size_t> anchors = {grid.index_of(LayerId::P2, 0, 0)};
  std::stringstream ss;
  write_masks(ss, grid, attention_masks(grid, anchors, 3));
  EXPECT_EQ(ss.str(), "# anchorkit-mask v1 width=16 height=16 n=3 ones=4\n0 1\n1 1\n4 1\n5 1\n");
}

TEST(DiscrepancyFile, Format) {
  const std::vector<DiscrepancyLabel> y = {DiscrepancyLabel::Ignore, DiscrepancyLabel::PositiveSample,
                                           DiscrepancyLabel::NegativeSample};
  std::stringstream ss;
  write_discrepancy_labels(ss, y);
  EXPECT_EQ(ss.str(), "# anchorkit-discrepancy v1 anchors=3\n0 -1\n1 1\n2 0\n");
}

TEST(PlanRecord, RoundTrip) {
  Rng rng(4);
  const std::vector<Box> faces = {Box(10, 10, 60, 70)};
  for (int i = 0; i < 50; ++i) {
    for (const TransformPlan& plan : {sse_plan({900, 700}, faces, {}, rng), mst_plan({900, 700}, rng),
                                      rsc_plan({900, 700}, rng), das_plan({900, 700}, faces, {}, rng),
                                      sse_plan({900, 700}, {}, {}, rng)}) {
      const auto j = plan_to_json(plan);
      EXPECT_EQ(j["version"], kPlanRecordVersion);
      const TransformPlan back = plan_from_json(nlohmann::json::parse(j.dump()));
      EXPECT_EQ(plan_to_json(back).dump(), j.dump());
      EXPECT_EQ(back.crop_window, plan.crop_window);
      EXPECT_EQ(back.target_resize_ratio, plan.target_resize_ratio);
    }
  }
  nlohmann::json bad = plan_to_json(mst_plan({10, 10}, rng));
  bad["version"] = 99;
  EXPECT_THROW(plan_from_json(bad), std::invalid_argument);
}

TEST(Report, JsonAndCsv) {
  EvalReport report;
  report.subsets["all"] = SubsetReport{0.5, 2, 4, {{1.0, 0.25, 0.9}, {0.5, 0.5, 0.1}}};
  const auto j = report_to_json(report);
  EXPECT_EQ(j.dump(), R"({"all":{"ap":0.5,"nfa":2,"num_gts":4,"curve":[[1.0,0.25,0.9],[0.5,0.5,0.1]]}})");
  std::stringstream csv;
  write_report_csv(csv, report);
  EXPECT_EQ(csv.str(), "subset,threshold,precision,recall\nall,0.9,1,0.25\nall,0.1,0.5,0.5\n");
}

TEST(Subsets, FlatAndNested) {
  std::istringstream flat(R"({"a/x.jpg": [0, 2], "b/y.jpg": []})");
  const auto one = parse_subsets(flat, "hard");
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one.at("hard").at("a/x.jpg"), (std::vector<std::size_t>{0, 2}));
  std::istringstream nested(R"({"easy": {"a/x.jpg": [1]}, "hard": {"b/y.jpg": [0]}})");
  EXPECT_EQ(parse_subsets(nested, "unused").size(), 2u);
  std::istringstream bad(R"({"a/x.jpg": [-1]})");
  EXPECT_THROW(parse_subsets(bad, "s"), ParseError);
  std::istringstream not_json("{oops");
  EXPECT_THROW(parse_subsets(not_json, "s"), ParseError);
}
