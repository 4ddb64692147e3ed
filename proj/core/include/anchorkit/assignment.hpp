#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "anchorkit/geometry.hpp"

namespace anchorkit {

struct MatchConfig {
  double pos_iou_threshold = 0.5;
  double neg_iou_threshold = 0.4;
  // Each gt's highest-IoU anchor is forced Positive to it.
  bool guarantee_best_anchor = true;

  void validate() const;
};

// Integer values are the wire encoding used by every line format and the flat API.
enum class LabelKind : std::int8_t { Ignore = -1, Negative = 0, Positive = 1 };

struct AnchorLabel {
  LabelKind kind = LabelKind::Negative;
  int gt_index = -1;

  static constexpr AnchorLabel positive(int gt) { return {LabelKind::Positive, gt}; }
  static constexpr AnchorLabel negative() { return {LabelKind::Negative, -1}; }
  static constexpr AnchorLabel ignore() { return {LabelKind::Ignore, -1}; }

  bool is_positive() const { return kind == LabelKind::Positive; }
  friend bool operator==(const AnchorLabel&, const AnchorLabel&) = default;
};

struct LayerStats {
  std::set<int> matched_gts;  // G
  int max_match_count = 0;    // T
  friend bool operator==(const LayerStats&, const LayerStats&) = default;
};

struct AssignmentResult {
  AnchorGrid grid;
  std::size_t num_gts = 0;
  std::vector<AnchorLabel> labels;
  // gt index -> number of Positive anchors over all layers. Gts without any
  // Positive anchor are absent.
  std::map<int, int> per_gt_counts;
  std::array<LayerStats, kNumLayers> per_layer_stats{};

  AssignmentResult(const AnchorGrid& g, std::size_t gts)
      : grid(g), num_gts(gts), labels(g.size(), AnchorLabel::negative()) {}

  // Recomputes per_gt_counts and per_layer_stats from labels.
  void refresh_statistics();

  const LayerStats& layer_stats(LayerId layer) const { return per_layer_stats[layer_position(layer)]; }
};

// Predicted classification score per anchor, indexed by global anchor index.
class ScoreMap {
 public:
  ScoreMap() = default;
  explicit ScoreMap(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

// Labels for the anchors that overlap at least one gt. Every other anchor has
// IoU 0 against all gts and carries `background`.
struct SparseAssignment {
  AnchorLabel background = AnchorLabel::negative();
  std::vector<std::pair<std::size_t, AnchorLabel>> overrides;  // sorted by index
};

SparseAssignment standard_match_sparse(const AnchorGrid& grid, std::span<const Box> gts,
                                       const MatchConfig& cfg = {});

AssignmentResult standard_match(const AnchorGrid& grid, std::span<const Box> gts,
                                const MatchConfig& cfg = {});

// Per gt, bit L is set when the gt owns at least one Positive anchor in layer L.
std::vector<std::uint8_t> matched_layer_mask(const AnchorGrid& grid, const SparseAssignment& sparse,
                                             std::size_t num_gts);

// Adaptive online incremental anchor mining. For every layer, gts matched in
// that layer with fewer than T anchors there are topped up to T using the
// union of their T nearest-center and T highest-IoU non-Positive anchors,
// ranked by predicted score (ties by lower global index).
AssignmentResult ali_ams(const AssignmentResult& base, const AnchorGrid& grid,
                         std::span<const Box> gts, const ScoreMap& scores);

struct LayerMatchSummary {
  int gt_count = 0;
  int anchor_count = 0;
  std::map<int, int> per_gt;  // gt index -> Positive anchors in this layer
  friend bool operator==(const LayerMatchSummary&, const LayerMatchSummary&) = default;
};

std::array<LayerMatchSummary, kNumLayers> layer_match_stats(const AssignmentResult& result);

}  // namespace anchorkit
