#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anchorkit/widerface.hpp"

namespace anchorkit {

struct NmsConfig {
  double iou_threshold = 0.6;
  std::size_t pre_topk = 5000;
  std::size_t post_topk = 750;
};

// Greedy NMS. Returns indices into `dets` of the kept boxes in descending
// score order; equal scores keep input order.
std::vector<std::size_t> nms_indices(std::span<const Detection> dets, const NmsConfig& cfg = {});
std::vector<Detection> nms(std::span<const Detection> dets, const NmsConfig& cfg = {});

enum class MatchOutcome { TruePositive, FalsePositive, Ignored };

// Per-image greedy matching in descending score order. `skip[i]` marks gts
// that can neither be matched nor penalize a detection that hits them.
std::vector<MatchOutcome> match_detections(std::span<const Detection> dets, std::span<const Box> gts,
                                           const std::vector<bool>& skip, double iou_threshold = 0.5);

struct ScoredOutcome {
  double score;
  MatchOutcome outcome;
};

struct CurvePoint {
  double precision;
  double recall;
  double threshold;
};

enum class ThresholdGrid {
  Uniform1000,     // 1.000, 0.999, ..., 0.001
  DistinctScores,  // every distinct detection score, descending
};

// Points ordered by descending threshold, so recall is non-decreasing.
std::vector<CurvePoint> pr_curve(std::span<const ScoredOutcome> outcomes, std::size_t num_gts,
                                 ThresholdGrid grid = ThresholdGrid::Uniform1000);

// Area under the monotone precision envelope, summed over recall increments.
double average_precision(std::span<const CurvePoint> curve);

std::size_t count_false_alarms(std::span<const ScoredOutcome> outcomes, double score_threshold = 0.8);

struct EvalConfig {
  double match_iou = 0.5;
  double nfa_threshold = 0.8;
  ThresholdGrid grid = ThresholdGrid::Uniform1000;
  std::optional<NmsConfig> nms;
};

struct SubsetReport {
  double ap = 0.0;
  std::size_t nfa = 0;
  std::size_t num_gts = 0;
  std::vector<CurvePoint> curve;
};

struct EvalReport {
  std::map<std::string, SubsetReport> subsets;
};

// image key -> kept gt indices.
using SubsetSpec = std::map<std::string, std::vector<std::size_t>>;

class UnknownImageError : public std::runtime_error {
 public:
  explicit UnknownImageError(std::vector<std::string> names);
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

// The "all" subset is always reported. Within a named subset, gts not listed
// for their image are skip-marked.
EvalReport evaluate(const GroundTruthSet& gts, const PredictionSet& preds,
                    const std::map<std::string, SubsetSpec>& subsets = {}, const EvalConfig& cfg = {});

}  // namespace anchorkit
