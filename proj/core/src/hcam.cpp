#include "anchorkit/hcam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace anchorkit {

FeatureMap::FeatureMap(LayerId l, int h, int w, int c, double fill)
    : layer(l), height(h), width(w), channels(c) {
  if (h < 1 || w < 1 || c < 1) throw std::invalid_argument("feature map dims must be positive");
  values.assign(static_cast<std::size_t>(h) * static_cast<std::size_t>(w) * static_cast<std::size_t>(c), fill);
}

bool FeatureMap::matches(const AnchorGrid& grid) const {
  const auto& s = grid.shape(layer);
  return s.rows == height && s.cols == width;
}

std::size_t AttentionMask::count_ones() const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::uint8_t{1}));
}

void HcamLossConfig::validate() const {
  if (!(gamma_balance >= 0.0)) throw std::invalid_argument("gamma_balance must be >= 0");
  if (!(focal_gamma >= 0.0)) throw std::invalid_argument("focal_gamma must be >= 0");
  if (!(focal_alpha >= 0.0 && focal_alpha <= 1.0)) throw std::invalid_argument("focal_alpha must be in [0, 1]");
  if (!(confidence_threshold > 0.0 && confidence_threshold < 1.0)) {
    throw std::invalid_argument("confidence_threshold must be in (0, 1)");
  }
  for (int n : neighborhood_sizes) {
    if (n < 1 || n % 2 == 0) throw std::invalid_argument("neighborhood sizes must be odd and positive");
  }
}

namespace {

void check_same_grid(const ScoreMap& scores, const AssignmentResult& assignment) {
  if (scores.size() != assignment.labels.size()) {
    throw std::invalid_argument("score map has " + std::to_string(scores.size()) + " entries, assignment has " +
                                std::to_string(assignment.labels.size()));
  }
}

}  // namespace

HighConfidenceSets select_high_confidence(const ScoreMap& scores, const AssignmentResult& assignment,
                                          double threshold) {
  check_same_grid(scores, assignment);
  HighConfidenceSets out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] < threshold) continue;
    switch (assignment.labels[i].kind) {
      case LabelKind::Positive: out.correct_positive.push_back(i); break;
      case LabelKind::Negative: out.false_negative.push_back(i); break;
      case LabelKind::Ignore: break;
    }
  }
  return out;
}

AttentionMask attention_mask(std::span<const CellPosition> positions, LayerId layer, int height,
                             int width, int n) {
  if (n < 1 || n % 2 == 0) throw std::invalid_argument("neighborhood size must be odd and positive");
  if (height < 1 || width < 1) throw std::invalid_argument("mask dims must be positive");
  AttentionMask mask;
  mask.layer = layer;
  mask.height = height;
  mask.width = width;
  mask.neighborhood = n;
  mask.values.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), 0);
  const int radius = (n - 1) / 2;
  for (const CellPosition& p : positions) {
    if (p.row < 0 || p.row >= height || p.col < 0 || p.col >= width) {
      throw std::out_of_range("mask position outside the map");
    }
    const int r0 = std::max(0, p.row - radius);
    const int r1 = std::min(height - 1, p.row + radius);
    const int c0 = std::max(0, p.col - radius);
    const int c1 = std::min(width - 1, p.col + radius);
    for (int r = r0; r <= r1; ++r) {
      std::fill_n(mask.values.begin() + static_cast<std::ptrdiff_t>(r) * width + c0, c1 - c0 + 1,
                  std::uint8_t{1});
    }
  }
  return mask;
}

std::array<AttentionMask, kNumLayers> attention_masks(const AnchorGrid& grid,
                                                      std::span<const std::size_t> anchors, int n) {
  std::array<std::vector<CellPosition>, kNumLayers> per_layer;
  for (std::size_t index : anchors) {
    const Anchor a = grid.anchor(index);
    per_layer[layer_position(a.layer)].push_back({a.row, a.col});
  }
  std::array<AttentionMask, kNumLayers> out;
  for (LayerId layer : kAllLayers) {
    const auto& shape = grid.shape(layer);
    out[layer_position(layer)] = attention_mask(per_layer[layer_position(layer)], layer, shape.rows, shape.cols, n);
  }
  return out;
}

FeatureMap combine_features(std::span<const FeatureMap> contexts, std::span<const AttentionMask> masks,
                            const FeatureMap& pyramid) {
  if (contexts.size() != 1 && contexts.size() != masks.size()) {
    throw std::invalid_argument("need one shared context map or one context map per mask");
  }
  for (const FeatureMap& ctx : contexts) {
    if (ctx.height != pyramid.height || ctx.width != pyramid.width || ctx.channels != pyramid.channels) {
      throw std::invalid_argument("context and pyramid feature maps differ in shape");
    }
  }
  for (const AttentionMask& m : masks) {
    if (m.height != pyramid.height || m.width != pyramid.width) {
      throw std::invalid_argument("attention mask and pyramid feature map differ in spatial shape");
    }
  }
  FeatureMap out = pyramid;
  for (std::size_t k = 0; k < masks.size(); ++k) {
    const FeatureMap& ctx = contexts.size() == 1 ? contexts[0] : contexts[k];
    const AttentionMask& mask = masks[k];
    for (int c = 0; c < pyramid.channels; ++c) {
      for (int r = 0; r < pyramid.height; ++r) {
        for (int col = 0; col < pyramid.width; ++col) {
          if (mask.at(r, col)) out.at(c, r, col) += ctx.at(c, r, col);
        }
      }
    }
  }
  return out;
}

FeatureMap combine_features(const FeatureMap& context, std::span<const AttentionMask> masks,
                            const FeatureMap& pyramid) {
  return combine_features(std::span<const FeatureMap>(&context, 1), masks, pyramid);
}

std::vector<DiscrepancyLabel> discrepancy_labels(const ScoreMap& scores, const AssignmentResult& assignment,
                                                 double threshold) {
  const HighConfidenceSets sets = select_high_confidence(scores, assignment, threshold);
  std::vector<DiscrepancyLabel> out(scores.size(), DiscrepancyLabel::Ignore);
  for (std::size_t i : sets.correct_positive) out[i] = DiscrepancyLabel::PositiveSample;
  for (std::size_t i : sets.false_negative) out[i] = DiscrepancyLabel::NegativeSample;
  return out;
}

std::vector<FocalTarget> focal_targets(const AssignmentResult& assignment) {
  std::vector<FocalTarget> out(assignment.labels.size());
  std::transform(assignment.labels.begin(), assignment.labels.end(), out.begin(),
                 [](const AnchorLabel& l) { return static_cast<FocalTarget>(l.kind); });
  return out;
}

std::vector<FocalTarget> focal_targets(std::span<const DiscrepancyLabel> labels) {
  std::vector<FocalTarget> out(labels.size());
  std::transform(labels.begin(), labels.end(), out.begin(),
                 [](DiscrepancyLabel l) { return static_cast<FocalTarget>(l); });
  return out;
}

namespace {

void check_focal_inputs(std::span<const double> scores, std::span<const FocalTarget> targets) {
  if (scores.size() != targets.size()) {
    throw std::invalid_argument("focal loss: " + std::to_string(scores.size()) + " scores for " +
                                std::to_string(targets.size()) + " targets");
  }
}

double positive_count(std::span<const FocalTarget> targets) {
  const auto n = std::count(targets.begin(), targets.end(), FocalTarget::Positive);
  return std::max(1.0, static_cast<double>(n));
}

}  // namespace

double focal_loss(std::span<const double> scores, std::span<const FocalTarget> targets, double alpha,
                  double gamma) {
  check_focal_inputs(scores, targets);
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (targets[i] == FocalTarget::Ignore) continue;
    const bool pos = targets[i] == FocalTarget::Positive;
    const double pt = pos ? scores[i] : 1.0 - scores[i];
    const double at = pos ? alpha : 1.0 - alpha;
    sum += -at * std::pow(1.0 - pt, gamma) * std::log(std::max(pt, kFocalEpsilon));
  }
  return sum / positive_count(targets);
}

std::vector<double> focal_loss_gradient(std::span<const double> scores, std::span<const FocalTarget> targets,
                                        double alpha, double gamma) {
  check_focal_inputs(scores, targets);
  const double norm = positive_count(targets);
  std::vector<double> grad(scores.size(), 0.0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (targets[i] == FocalTarget::Ignore) continue;
    const bool pos = targets[i] == FocalTarget::Positive;
    const double pt = pos ? scores[i] : 1.0 - scores[i];
    const double at = pos ? alpha : 1.0 - alpha;
    const double q = 1.0 - pt;
    // d/dpt of -at * q^gamma * log(max(pt, eps))
    double d = 0.0;
    if (q > 0.0 && gamma != 0.0) d += at * gamma * std::pow(q, gamma - 1.0) * std::log(std::max(pt, kFocalEpsilon));
    if (pt >= kFocalEpsilon) d -= at * std::pow(q, gamma) / pt;
    grad[i] = (pos ? d : -d) / norm;
  }
  return grad;
}

double hcam_loss(const ScoreMap& main_scores, const ScoreMap& progressive_scores,
                 const AssignmentResult& assignment, std::span<const DiscrepancyLabel> y_hc,
                 const HcamLossConfig& cfg) {
  cfg.validate();
  const double main = focal_loss(main_scores.values(), focal_targets(assignment), cfg.focal_alpha, cfg.focal_gamma);
  const double progressive =
      focal_loss(progressive_scores.values(), focal_targets(y_hc), cfg.focal_alpha, cfg.focal_gamma);
  return main + cfg.gamma_balance * progressive;
}

}  // namespace anchorkit
