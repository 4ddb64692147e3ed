#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "anchorkit/assignment.hpp"
#include "anchorkit/geometry.hpp"

namespace anchorkit {

// Dense per-layer feature map, channel-major (c, row, col).
struct FeatureMap {
  LayerId layer = LayerId::P2;
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> values;

  FeatureMap() = default;
  FeatureMap(LayerId l, int h, int w, int c, double fill = 0.0);

  double& at(int c, int row, int col) { return values[offset(c, row, col)]; }
  double at(int c, int row, int col) const { return values[offset(c, row, col)]; }

  // Spatial dims match the layer's anchor grid.
  bool matches(const AnchorGrid& grid) const;

 private:
  std::size_t offset(int c, int row, int col) const {
    return (static_cast<std::size_t>(c) * static_cast<std::size_t>(height) + static_cast<std::size_t>(row)) *
               static_cast<std::size_t>(width) +
           static_cast<std::size_t>(col);
  }
};

struct AttentionMask {
  LayerId layer = LayerId::P2;
  int height = 0;
  int width = 0;
  int neighborhood = 1;
  std::vector<std::uint8_t> values;  // row-major, strictly 0 or 1

  std::uint8_t at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)];
  }
  std::size_t count_ones() const;
};

struct CellPosition {
  int row;
  int col;
  friend auto operator<=>(const CellPosition&, const CellPosition&) = default;
};

struct HcamLossConfig {
  double gamma_balance = 1.0;
  double focal_alpha = 0.25;
  double focal_gamma = 2.0;
  double confidence_threshold = 0.5;
  std::vector<int> neighborhood_sizes = {3, 5};

  void validate() const;
};

// Per-anchor target for the sigmoid focal loss. Values match LabelKind.
enum class FocalTarget : std::int8_t { Ignore = -1, Negative = 0, Positive = 1 };

enum class DiscrepancyLabel : std::int8_t { Ignore = -1, NegativeSample = 0, PositiveSample = 1 };

struct HighConfidenceSets {
  std::vector<std::size_t> correct_positive;  // Positive anchors with score >= threshold
  std::vector<std::size_t> false_negative;    // Negative anchors with score >= threshold
};

HighConfidenceSets select_high_confidence(const ScoreMap& scores, const AssignmentResult& assignment,
                                          double threshold);

// Ones at every cell within Chebyshev radius (n - 1) / 2 of a position.
AttentionMask attention_mask(std::span<const CellPosition> positions, LayerId layer, int height,
                             int width, int n);

// One mask per pyramid layer for the given global anchor indices.
std::array<AttentionMask, kNumLayers> attention_masks(const AnchorGrid& grid,
                                                      std::span<const std::size_t> anchors, int n);

// pyramid + sum_k context_k * mask_k, masks broadcast across channels. A single
// context is shared by every mask; otherwise one context per mask.
FeatureMap combine_features(std::span<const FeatureMap> contexts, std::span<const AttentionMask> masks,
                            const FeatureMap& pyramid);
FeatureMap combine_features(const FeatureMap& context, std::span<const AttentionMask> masks,
                            const FeatureMap& pyramid);

std::vector<DiscrepancyLabel> discrepancy_labels(const ScoreMap& scores, const AssignmentResult& assignment,
                                                 double threshold);

std::vector<FocalTarget> focal_targets(const AssignmentResult& assignment);
std::vector<FocalTarget> focal_targets(std::span<const DiscrepancyLabel> labels);

inline constexpr double kFocalEpsilon = 1e-7;

// Sigmoid focal loss over probabilities, summed over non-ignored anchors and
// divided by max(1, #positives). The log argument is floored at kFocalEpsilon.
double focal_loss(std::span<const double> scores, std::span<const FocalTarget> targets, double alpha,
                  double gamma);

// d focal_loss / d score for every anchor (zero for ignored anchors).
std::vector<double> focal_loss_gradient(std::span<const double> scores, std::span<const FocalTarget> targets,
                                        double alpha, double gamma);

// focal(main, y) + gamma_balance * focal(progressive, y_hc).
double hcam_loss(const ScoreMap& main_scores, const ScoreMap& progressive_scores,
                 const AssignmentResult& assignment, std::span<const DiscrepancyLabel> y_hc,
                 const HcamLossConfig& cfg);

}  // namespace anchorkit
