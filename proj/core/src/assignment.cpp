#include "anchorkit/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>

namespace anchorkit {

void MatchConfig::validate() const {
  if (!(neg_iou_threshold >= 0.0) || !(pos_iou_threshold <= 1.0) ||
      !(neg_iou_threshold <= pos_iou_threshold)) {
    throw std::invalid_argument("match thresholds must satisfy 0 <= neg <= pos <= 1");
  }
}

ScoreMap::ScoreMap(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("score at anchor " + std::to_string(i) + " is outside [0, 1]");
    }
  }
}

namespace {

AnchorLabel label_for(double best_iou, int best_gt, const MatchConfig& cfg) {
  if (best_iou >= cfg.pos_iou_threshold) return AnchorLabel::positive(best_gt);
  if (best_iou < cfg.neg_iou_threshold) return AnchorLabel::negative();
  return AnchorLabel::ignore();
}

struct Overlap {
  std::size_t anchor;
  int gt;
  double iou;
};

// Column (or row) range of anchors of one layer whose boxes may overlap [lo, hi).
// Widened by one cell on each side; exact IoU filters the extras.
std::pair<int, int> cell_range(double lo, double hi, int stride, int cells) {
  const double s = static_cast<double>(stride);
  const double first = std::floor(lo / s - 2.5);
  const double last = std::ceil(hi / s + 1.5);
  const int a = static_cast<int>(std::clamp(first, 0.0, static_cast<double>(cells - 1)));
  const int b = static_cast<int>(std::clamp(last, 0.0, static_cast<double>(cells - 1)));
  return {a, b};
}

void append_layer_overlaps(const AnchorGrid& grid, const Box& gt, int gt_index, LayerId id,
                           std::vector<Overlap>& out) {
  const PyramidLayer& layer = pyramid_layer(id);
  const auto& shape = grid.shape(id);
  const auto [c0, c1] = cell_range(gt.x_min(), gt.x_max(), layer.stride, shape.cols);
  const auto [r0, r1] = cell_range(gt.y_min(), gt.y_max(), layer.stride, shape.rows);
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const double v = iou(grid.anchor_box(id, r, c), gt);
      if (v > 0.0) out.push_back({grid.index_of(id, r, c), gt_index, v});
    }
  }
}

// Upper bound on the IoU between a gt and any anchor of the layer.
double iou_bound(const Box& gt, LayerId id) {
  const double a = pyramid_layer(id).anchor_scale;
  const double inter = std::min(a, gt.width()) * std::min(a, gt.height());
  return inter / (a * a + gt.area() - inter);
}

}  // namespace

SparseAssignment standard_match_sparse(const AnchorGrid& grid, std::span<const Box> gts,
                                       const MatchConfig& cfg) {
  cfg.validate();
  SparseAssignment out;
  if (gts.empty()) return out;
  out.background = label_for(0.0, 0, cfg);

  // Layers whose IoU bound is below the negative threshold cannot change any
  // label and are skipped, unless they could still hold the gt's best anchor.
  std::vector<Overlap> overlaps;
  std::vector<std::vector<Overlap>> by_gt(gts.size());
  std::vector<std::vector<LayerId>> skipped(gts.size());
  for (std::size_t g = 0; g < gts.size(); ++g) {
    std::array<LayerId, kNumLayers> order = kAllLayers;
    std::stable_sort(order.begin(), order.end(), [&](LayerId a, LayerId b) {
      return iou_bound(gts[g], a) > iou_bound(gts[g], b);
    });
    double best_seen = 0.0;
    for (LayerId id : order) {
      const double bound = iou_bound(gts[g], id);
      const bool needed = bound >= cfg.neg_iou_threshold ||
                          (cfg.guarantee_best_anchor && bound >= best_seen);
      if (!needed) {
        skipped[g].push_back(id);
        continue;
      }
      const std::size_t first = by_gt[g].size();
      append_layer_overlaps(grid, gts[g], static_cast<int>(g), id, by_gt[g]);
      for (std::size_t k = first; k < by_gt[g].size(); ++k) best_seen = std::max(best_seen, by_gt[g][k].iou);
    }
    overlaps.insert(overlaps.end(), by_gt[g].begin(), by_gt[g].end());
  }
  std::sort(overlaps.begin(), overlaps.end(), [](const Overlap& a, const Overlap& b) {
    return std::tie(a.anchor, a.gt) < std::tie(b.anchor, b.gt);
  });

  // Per-anchor argmax over gts; overlaps are grouped by anchor with ascending gt,
  // so a strict comparison keeps the lowest gt index on ties.
  std::map<std::size_t, AnchorLabel> labels;
  for (std::size_t i = 0; i < overlaps.size();) {
    const std::size_t anchor = overlaps[i].anchor;
    double best = 0.0;
    int best_gt = 0;
    for (; i < overlaps.size() && overlaps[i].anchor == anchor; ++i) {
      if (overlaps[i].iou > best) {
        best = overlaps[i].iou;
        best_gt = overlaps[i].gt;
      }
    }
    labels.emplace_hint(labels.end(), anchor, label_for(best, best_gt, cfg));
  }

  if (cfg.guarantee_best_anchor) {
    // Gts claim their best anchor in ascending order; an anchor claimed by an
    // earlier gt is unavailable to later ones, so every gt overlapping the grid
    // ends with at least one Positive.
    std::set<std::size_t> claimed;
    auto best_unclaimed = [&](const std::vector<Overlap>& list) {
      const Overlap* best = nullptr;
      for (const Overlap& o : list) {
        if (claimed.count(o.anchor)) continue;
        if (best == nullptr || o.iou > best->iou ||
            (o.iou == best->iou && o.anchor < best->anchor)) {
          best = &o;
        }
      }
      return best;
    };
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const Overlap* best = best_unclaimed(by_gt[g]);
      double skipped_bound = 0.0;
      for (LayerId id : skipped[g]) skipped_bound = std::max(skipped_bound, iou_bound(gts[g], id));
      if (!skipped[g].empty() && (best == nullptr || best->iou <= skipped_bound)) {
        for (LayerId id : skipped[g]) append_layer_overlaps(grid, gts[g], static_cast<int>(g), id, by_gt[g]);
        skipped[g].clear();
        best = best_unclaimed(by_gt[g]);
      }
      if (best == nullptr) continue;
      claimed.insert(best->anchor);
      labels[best->anchor] = AnchorLabel::positive(static_cast<int>(g));
    }
  }

  out.overrides.assign(labels.begin(), labels.end());
  return out;
}

AssignmentResult standard_match(const AnchorGrid& grid, std::span<const Box> gts,
                                const MatchConfig& cfg) {
  const SparseAssignment sparse = standard_match_sparse(grid, gts, cfg);
  AssignmentResult result(grid, gts.size());
  std::fill(result.labels.begin(), result.labels.end(), sparse.background);
  for (const auto& [index, label] : sparse.overrides) result.labels[index] = label;
  result.refresh_statistics();
  return result;
}

std::vector<std::uint8_t> matched_layer_mask(const AnchorGrid& grid, const SparseAssignment& sparse,
                                             std::size_t num_gts) {
  std::vector<std::uint8_t> mask(num_gts, 0);
  if (num_gts == 0) return mask;
  if (sparse.background.is_positive()) {
    // pos threshold 0 makes every non-overlapping anchor Positive; scan densely.
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      AnchorLabel label = sparse.background;
      if (cursor < sparse.overrides.size() && sparse.overrides[cursor].first == i) {
        label = sparse.overrides[cursor++].second;
      }
      if (label.is_positive()) {
        mask[static_cast<std::size_t>(label.gt_index)] |=
            static_cast<std::uint8_t>(1u << layer_position(grid.layer_of(i)));
      }
    }
    return mask;
  }
  for (const auto& [index, label] : sparse.overrides) {
    if (!label.is_positive()) continue;
    mask[static_cast<std::size_t>(label.gt_index)] |=
        static_cast<std::uint8_t>(1u << layer_position(grid.layer_of(index)));
  }
  return mask;
}

void AssignmentResult::refresh_statistics() {
  per_gt_counts.clear();
  for (auto& s : per_layer_stats) s = LayerStats{};
  for (LayerId layer : kAllLayers) {
    std::map<int, int> counts;
    for (std::size_t i = grid.layer_begin(layer); i < grid.layer_end(layer); ++i) {
      if (labels[i].is_positive()) ++counts[labels[i].gt_index];
    }
    LayerStats& stats = per_layer_stats[layer_position(layer)];
    for (const auto& [gt, n] : counts) {
      stats.matched_gts.insert(gt);
      stats.max_match_count = std::max(stats.max_match_count, n);
      per_gt_counts[gt] += n;
    }
  }
}

AssignmentResult ali_ams(const AssignmentResult& base, const AnchorGrid& grid,
                         std::span<const Box> gts, const ScoreMap& scores) {
  if (!(base.grid == grid) || base.labels.size() != grid.size()) {
    throw std::invalid_argument("ali_ams: assignment was produced on a different anchor grid");
  }
  if (base.num_gts != gts.size()) {
    throw std::invalid_argument("ali_ams: assignment was produced for a different gt list");
  }
  if (scores.size() != grid.size()) {
    throw std::invalid_argument("ali_ams: score map has " + std::to_string(scores.size()) +
                                " entries, grid has " + std::to_string(grid.size()) + " anchors");
  }

  AssignmentResult result = base;
  std::vector<std::pair<double, std::size_t>> keyed;
  std::vector<std::size_t> candidates;

  for (LayerId layer : kAllLayers) {
    const std::size_t begin = grid.layer_begin(layer);
    const std::size_t end = grid.layer_end(layer);

    // A[g] and T restricted to this layer, taken from the input assignment.
    std::map<int, int> counts;
    for (std::size_t i = begin; i < end; ++i) {
      if (base.labels[i].is_positive()) ++counts[base.labels[i].gt_index];
    }
    int target = 0;
    for (const auto& [gt, n] : counts) target = std::max(target, n);

    for (const auto& [gt, matched] : counts) {
      if (matched >= target) continue;
      const auto needed = static_cast<std::size_t>(target - matched);
      const auto top = static_cast<std::size_t>(target);
      const Box& gt_box = gts[static_cast<std::size_t>(gt)];

      candidates.clear();
      auto take_top = [&](auto key_of) {
        keyed.clear();
        for (std::size_t i = begin; i < end; ++i) {
          if (result.labels[i].is_positive()) continue;
          keyed.emplace_back(key_of(i), i);
        }
        const std::size_t k = std::min(top, keyed.size());
        std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(k),
                          keyed.end());
        for (std::size_t j = 0; j < k; ++j) candidates.push_back(keyed[j].second);
      };
      take_top([&](std::size_t i) { return center_distance(grid.anchor(i).box, gt_box); });
      take_top([&](std::size_t i) { return -iou(grid.anchor(i).box, gt_box); });

      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
      std::stable_sort(candidates.begin(), candidates.end(),
                       [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

      const std::size_t granted = std::min(needed, candidates.size());
      for (std::size_t j = 0; j < granted; ++j) {
        result.labels[candidates[j]] = AnchorLabel::positive(gt);
      }
    }
  }
  result.refresh_statistics();
  return result;
}

std::array<LayerMatchSummary, kNumLayers> layer_match_stats(const AssignmentResult& result) {
  std::array<LayerMatchSummary, kNumLayers> out{};
  for (std::size_t i = 0; i < result.labels.size(); ++i) {
    const AnchorLabel& label = result.labels[i];
    if (!label.is_positive()) continue;
    LayerMatchSummary& s = out[layer_position(result.grid.layer_of(i))];
    ++s.per_gt[label.gt_index];
    ++s.anchor_count;
  }
  for (auto& s : out) s.gt_count = static_cast<int>(s.per_gt.size());
  return out;
}

}  // namespace anchorkit
