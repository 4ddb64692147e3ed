#include "anchorkit/flat_api.hpp"

#include <cmath>

namespace anchorkit::flat {

const char* version() { return ANCHORKIT_VERSION; }

BoundaryError::BoundaryError(std::string field, const std::string& message)
    : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

namespace {

void require_finite(std::span<const float> values, const char* field) {
  for (float v : values) {
    if (!std::isfinite(v)) throw BoundaryError(field, "contains a non-finite value");
  }
}

std::size_t rows_of(std::span<const float> values, const char* field) {
  if (values.size() % 4 != 0) {
    throw BoundaryError(field, "length " + std::to_string(values.size()) + " is not a multiple of 4");
  }
  require_finite(values, field);
  return values.size() / 4;
}

Box box_at(std::span<const float> values, std::size_t i, const char* field) {
  try {
    return Box(values[4 * i], values[4 * i + 1], values[4 * i + 2], values[4 * i + 3]);
  } catch (const std::invalid_argument&) {
    throw BoundaryError(field, "row " + std::to_string(i) + " is not a valid box");
  }
}

Box xywh_at(std::span<const float> values, std::size_t i, const char* field) {
  const double x = values[4 * i];
  const double y = values[4 * i + 1];
  const double w = values[4 * i + 2];
  const double h = values[4 * i + 3];
  if (!(w > 0.0 && h > 0.0)) throw BoundaryError(field, "row " + std::to_string(i) + " has no area");
  return Box(x, y, x + w, y + h);
}

std::size_t image_of(std::int32_t id, std::size_t num_images, const char* field) {
  if (id < 0 || static_cast<std::size_t>(id) >= num_images) {
    throw BoundaryError(field, "image index " + std::to_string(id) + " out of range");
  }
  return static_cast<std::size_t>(id);
}

}  // namespace

AssignOutput assign_flat(const FlatBatch& batch, AssignStrategy strategy, const MatchConfig& cfg) {
  if (batch.image_width < 1 || batch.image_height < 1) {
    throw BoundaryError("image_dims", "width and height must be positive");
  }
  const AnchorGrid grid(batch.image_width, batch.image_height);
  const std::size_t n = rows_of(batch.anchors, "anchors");
  if (n != grid.size()) {
    throw BoundaryError("anchors", std::to_string(n) + " rows, grid has " + std::to_string(grid.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Box expected = grid.anchor(i).box;
    const bool same = static_cast<float>(expected.x_min()) == batch.anchors[4 * i] &&
                      static_cast<float>(expected.y_min()) == batch.anchors[4 * i + 1] &&
                      static_cast<float>(expected.x_max()) == batch.anchors[4 * i + 2] &&
                      static_cast<float>(expected.y_max()) == batch.anchors[4 * i + 3];
    if (!same) throw BoundaryError("anchors", "row " + std::to_string(i) + " differs from the anchor grid");
  }
  const std::size_t m = rows_of(batch.gts, "gts");
  std::vector<Box> gts;
  gts.reserve(m);
  for (std::size_t g = 0; g < m; ++g) gts.push_back(box_at(batch.gts, g, "gts"));

  AssignmentResult result = standard_match(grid, gts, cfg);
  if (strategy == AssignStrategy::AliAms) {
    if (batch.scores.size() != n) {
      throw BoundaryError("scores", std::to_string(batch.scores.size()) + " values for " + std::to_string(n) +
                                        " anchors");
    }
    require_finite(batch.scores, "scores");
    std::vector<double> values(batch.scores.begin(), batch.scores.end());
    for (double v : values) {
      if (v < 0.0 || v > 1.0) throw BoundaryError("scores", "value outside [0, 1]");
    }
    result = ali_ams(result, grid, gts, ScoreMap(std::move(values)));
  }

  AssignOutput out;
  out.labels.resize(n);
  out.gt_index.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const AnchorLabel& l = result.labels[i];
    out.labels[i] = static_cast<std::int8_t>(l.kind);
    out.gt_index[i] = l.is_positive() ? l.gt_index : -1;
  }
  return out;
}

EvalOutput evaluate_flat(const FlatEvalInput& input, const EvalConfig& cfg) {
  const std::size_t m = rows_of(input.gt_boxes, "gt_boxes");
  if (input.gt_image.size() != m) throw BoundaryError("gt_image", "length differs from gt_boxes rows");
  if (!input.gt_skip.empty() && input.gt_skip.size() != m) {
    throw BoundaryError("gt_skip", "length differs from gt_boxes rows");
  }
  const std::size_t k = rows_of(input.det_boxes, "det_boxes");
  if (input.det_scores.size() != k) throw BoundaryError("det_scores", "length differs from det_boxes rows");
  if (input.det_image.size() != k) throw BoundaryError("det_image", "length differs from det_boxes rows");
  for (float s : input.det_scores) {
    if (!(s >= 0.0f && s <= 1.0f)) throw BoundaryError("det_scores", "score is NaN or outside [0, 1]");
  }

  // Zero-padded names keep the per-image order of the native report.
  GroundTruthSet gts(input.num_images);
  PredictionSet preds(input.num_images);
  for (std::size_t i = 0; i < input.num_images; ++i) {
    std::string name = std::to_string(i);
    name.insert(0, 12 - std::min<std::size_t>(12, name.size()), '0');
    gts[i].path = name;
    preds[i].name = name;
  }
  for (std::size_t g = 0; g < m; ++g) {
    FaceAnnotation face;
    face.box = xywh_at(input.gt_boxes, g, "gt_boxes");
    face.skip = !input.gt_skip.empty() && input.gt_skip[g] != 0;
    face.attributes.invalid = face.skip ? 1 : 0;
    gts[image_of(input.gt_image[g], input.num_images, "gt_image")].faces.push_back(face);
  }
  for (std::size_t d = 0; d < k; ++d) {
    const Box box = xywh_at(input.det_boxes, d, "det_boxes");
    preds[image_of(input.det_image[d], input.num_images, "det_image")].detections.push_back(
        {box, static_cast<double>(input.det_scores[d])});
  }

  const EvalReport report = evaluate(gts, preds, {}, cfg);
  const SubsetReport& all = report.subsets.at("all");
  EvalOutput out;
  out.ap = all.ap;
  out.nfa = all.nfa;
  out.curve.reserve(all.curve.size() * 3);
  for (const CurvePoint& p : all.curve) {
    out.curve.push_back(p.precision);
    out.curve.push_back(p.recall);
    out.curve.push_back(p.threshold);
  }
  return out;
}

}  // namespace anchorkit::flat
