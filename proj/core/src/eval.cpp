#include "anchorkit/eval.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace anchorkit {

namespace {

std::vector<std::size_t> score_order(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  return order;
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

std::vector<std::size_t> nms_indices(std::span<const Detection> dets, const NmsConfig& cfg) {
  std::vector<std::size_t> order = score_order(dets);
  if (order.size() > cfg.pre_topk) order.resize(cfg.pre_topk);
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    if (kept.size() >= cfg.post_topk) break;
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return iou(dets[i].box, dets[k].box) > cfg.iou_threshold;
    });
    if (!suppressed) kept.push_back(i);
  }
  return kept;
}

std::vector<Detection> nms(std::span<const Detection> dets, const NmsConfig& cfg) {
  std::vector<Detection> out;
  for (std::size_t i : nms_indices(dets, cfg)) out.push_back(dets[i]);
  return out;
}

std::vector<MatchOutcome> match_detections(std::span<const Detection> dets, std::span<const Box> gts,
                                           const std::vector<bool>& skip, double iou_threshold) {
  if (skip.size() != gts.size()) throw std::invalid_argument("skip mask and gt list differ in length");
  std::vector<MatchOutcome> out(dets.size(), MatchOutcome::FalsePositive);
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t d : score_order(dets)) {
    double best = iou_threshold;
    std::optional<std::size_t> best_gt;
    bool hits_skipped = false;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double v = iou(dets[d].box, gts[g]);
      if (v < iou_threshold) continue;
      if (skip[g]) {
        hits_skipped = true;
        continue;
      }
      if (taken[g]) continue;
      if (!best_gt || v > best) {
        best = v;
        best_gt = g;
      }
    }
    if (best_gt) {
      taken[*best_gt] = true;
      out[d] = MatchOutcome::TruePositive;
    } else if (hits_skipped) {
      out[d] = MatchOutcome::Ignored;
    }
  }
  return out;
}

std::vector<CurvePoint> pr_curve(std::span<const ScoredOutcome> outcomes, std::size_t num_gts,
                                 ThresholdGrid grid) {
  std::vector<double> thresholds;
  if (grid == ThresholdGrid::Uniform1000) {
    for (int k = 1000; k >= 1; --k) thresholds.push_back(k / 1000.0);
  } else {
    std::set<double, std::greater<>> distinct;
    for (const ScoredOutcome& o : outcomes) {
      if (o.outcome != MatchOutcome::Ignored) distinct.insert(o.score);
    }
    thresholds.assign(distinct.begin(), distinct.end());
  }

  std::vector<ScoredOutcome> sorted(outcomes.begin(), outcomes.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredOutcome& a, const ScoredOutcome& b) { return a.score > b.score; });

  std::vector<CurvePoint> curve;
  curve.reserve(thresholds.size());
  std::size_t cursor = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (double t : thresholds) {
    while (cursor < sorted.size() && sorted[cursor].score >= t) {
      if (sorted[cursor].outcome == MatchOutcome::TruePositive) ++tp;
      if (sorted[cursor].outcome == MatchOutcome::FalsePositive) ++fp;
      ++cursor;
    }
    const double precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = num_gts == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(num_gts);
    curve.push_back({precision, recall, t});
  }
  return curve;
}

double average_precision(std::span<const CurvePoint> curve) {
  std::vector<double> rec{0.0};
  std::vector<double> prec{0.0};
  for (const CurvePoint& p : curve) {
    rec.push_back(p.recall);
    prec.push_back(p.precision);
  }
  rec.push_back(1.0);
  prec.push_back(0.0);
  for (std::size_t i = prec.size() - 1; i > 0; --i) prec[i - 1] = std::max(prec[i - 1], prec[i]);
  double ap = 0.0;
  for (std::size_t i = 0; i + 1 < rec.size(); ++i) {
    if (rec[i + 1] != rec[i]) ap += (rec[i + 1] - rec[i]) * prec[i + 1];
  }
  return ap;
}

std::size_t count_false_alarms(std::span<const ScoredOutcome> outcomes, double score_threshold) {
  return static_cast<std::size_t>(std::count_if(outcomes.begin(), outcomes.end(), [&](const ScoredOutcome& o) {
    return o.outcome == MatchOutcome::FalsePositive && o.score >= score_threshold;
  }));
}

UnknownImageError::UnknownImageError(std::vector<std::string> names)
    : std::runtime_error("predictions for unknown images: " + join(names)), names_(std::move(names)) {}

EvalReport evaluate(const GroundTruthSet& gts, const PredictionSet& preds,
                    const std::map<std::string, SubsetSpec>& subsets, const EvalConfig& cfg) {
  // Images are keyed by name so the report does not depend on file order.
  std::map<std::string, const ImageAnnotation*> gt_by_key;
  for (const ImageAnnotation& image : gts) gt_by_key[image_key(image.path)] = &image;

  std::map<std::string, std::vector<Detection>> dets_by_key;
  std::vector<std::string> unknown;
  for (const ImagePredictions& p : preds) {
    const std::string key = image_key(p.name);
    if (!gt_by_key.count(key)) {
      unknown.push_back(p.name);
      continue;
    }
    auto& dets = dets_by_key[key];
    dets.insert(dets.end(), p.detections.begin(), p.detections.end());
  }
  if (!unknown.empty()) {
    std::sort(unknown.begin(), unknown.end());
    throw UnknownImageError(std::move(unknown));
  }
  if (cfg.nms) {
    for (auto& [key, dets] : dets_by_key) dets = nms(dets, *cfg.nms);
  }

  std::map<std::string, const SubsetSpec*> plan;
  plan["all"] = nullptr;
  for (const auto& [name, spec] : subsets) {
    if (name != "all") plan[name] = &spec;
  }
  std::map<std::string, const std::vector<std::size_t>*> subset_lists;

  EvalReport report;
  for (const auto& [name, spec] : plan) {
    subset_lists.clear();
    if (spec) {
      for (const auto& [path, indices] : *spec) subset_lists[image_key(path)] = &indices;
    }
    std::vector<ScoredOutcome> outcomes;
    std::size_t num_gts = 0;
    for (const auto& [key, image] : gt_by_key) {
      std::vector<Box> boxes;
      std::vector<bool> skip;
      std::set<std::size_t> kept;
      if (spec) {
        auto it = subset_lists.find(key);
        if (it != subset_lists.end()) kept.insert(it->second->begin(), it->second->end());
      }
      for (std::size_t f = 0; f < image->faces.size(); ++f) {
        const FaceAnnotation& face = image->faces[f];
        if (!face.box) continue;  // no area: cannot be matched at all
        boxes.push_back(*face.box);
        skip.push_back(face.skip || (spec && !kept.count(f)));
        if (!skip.back()) ++num_gts;
      }
      auto dit = dets_by_key.find(key);
      if (dit == dets_by_key.end()) continue;
      if (spec && kept.empty()) continue;  // image outside the subset
      const auto flags = match_detections(dit->second, boxes, skip, cfg.match_iou);
      for (std::size_t d = 0; d < flags.size(); ++d) outcomes.push_back({dit->second[d].score, flags[d]});
    }
    SubsetReport sub;
    sub.num_gts = num_gts;
    sub.curve = pr_curve(outcomes, num_gts, cfg.grid);
    sub.ap = average_precision(sub.curve);
    sub.nfa = count_false_alarms(outcomes, cfg.nfa_threshold);
    report.subsets[name] = std::move(sub);
  }
  return report;
}

}  // namespace anchorkit
