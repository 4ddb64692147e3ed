#pragma once

#include <array>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "anchorkit/assignment.hpp"
#include "anchorkit/augmentation.hpp"
#include "anchorkit/eval.hpp"
#include "anchorkit/hcam.hpp"

namespace anchorkit {

inline constexpr int kPlanRecordVersion = 1;

// Shortest decimal that round-trips.
std::string format_double(double v);

// "# anchorkit-anchors v1 width=W height=H count=N", then one
// "index layer row col x_min y_min x_max y_max" line per anchor.
void write_anchor_grid(std::ostream& out, const AnchorGrid& grid);
AnchorGrid read_anchor_grid(std::istream& in);

// "# anchorkit-assignment v1 width=W height=H anchors=N gts=M", then one
// "index label gt_index score" line per anchor. label is 1/0/-1, gt_index is
// -1 unless Positive, score is "-" when no score map is given.
void write_assignment(std::ostream& out, const AssignmentResult& result, const ScoreMap* scores = nullptr);
AssignmentResult read_assignment(std::istream& in);

// One "index score" line per anchor, indices 0..N-1 in order; '#' lines are comments.
void write_scores(std::ostream& out, const ScoreMap& scores);
ScoreMap read_scores(std::istream& in);

// "# anchorkit-mask v1 width=W height=H n=N ones=K", then "index 1" for every
// anchor cell set in the layer masks.
void write_masks(std::ostream& out, const AnchorGrid& grid, const std::array<AttentionMask, kNumLayers>& masks);

// "# anchorkit-discrepancy v1 anchors=N", then "index label" with label 1/0/-1.
void write_discrepancy_labels(std::ostream& out, std::span<const DiscrepancyLabel> labels);

nlohmann::ordered_json plan_to_json(const TransformPlan& plan);
TransformPlan plan_from_json(const nlohmann::json& j);

nlohmann::ordered_json report_to_json(const EvalReport& report);
// Columns: subset,threshold,precision,recall
void write_report_csv(std::ostream& out, const EvalReport& report);

// Either {image_path: [indices]} (one subset named `default_name`) or
// {subset_name: {image_path: [indices]}}.
std::map<std::string, SubsetSpec> parse_subsets(std::istream& in, const std::string& default_name);

}  // namespace anchorkit
