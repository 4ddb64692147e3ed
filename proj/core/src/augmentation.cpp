#include "anchorkit/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace anchorkit {

void SseConfig::validate() const {
  if (!(tr_p5 >= 0.0) || !(tr_p6 >= 0.0) || tr_p5 + tr_p6 > 1.0) {
    throw std::invalid_argument("SSE ratios must be non-negative with tr_p5 + tr_p6 <= 1");
  }
  for (std::size_t i = 0; i < scale_ranges.size(); ++i) {
    if (!(scale_ranges[i].start > 0.0) || !(scale_ranges[i].end > scale_ranges[i].start)) {
      throw std::invalid_argument("SSE scale range for " + std::string(layer_name(kAllLayers[i])) +
                                  " must be increasing and positive");
    }
    if (i > 0 && scale_ranges[i].start != scale_ranges[i - 1].end) {
      throw std::invalid_argument("SSE scale ranges must be contiguous");
    }
  }
  if (output_side < 1) throw std::invalid_argument("SSE output side must be positive");
  if (pre_resize_min < 1 || pre_resize_max < pre_resize_min) {
    throw std::invalid_argument("SSE pre-resize range must be positive and ordered");
  }
}

void DasConfig::validate() const {
  if (r_th && !(*r_th >= 1.0)) throw std::invalid_argument("DAS r_th must be >= 1");
  if (output_side < 1) throw std::invalid_argument("DAS output side must be positive");
}

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Mst: return "mst";
    case Strategy::Rsc: return "rsc";
    case Strategy::Das: return "das";
    case Strategy::Sse: return "sse";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (Strategy s : {Strategy::Mst, Strategy::Rsc, Strategy::Das, Strategy::Sse}) {
    if (strategy_name(s) == name) return s;
  }
  return std::nullopt;
}

int resized_extent(int side, double ratio) {
  return std::max(1, static_cast<int>(std::lround(static_cast<double>(side) * ratio)));
}

ImageSize TransformPlan::resized_size() const {
  return {resized_extent(source.width, total_ratio()), resized_extent(source.height, total_ratio())};
}

namespace {

void check_image(ImageSize image) {
  if (image.width < 1 || image.height < 1) {
    throw std::invalid_argument("image dimensions must be positive");
  }
}

// Random crop offset along one axis: the full extent when it fits, otherwise
// an integer offset with the crop inside the image.
int random_offset(int extent, int side, Rng& rng) {
  if (extent <= side) return 0;
  return static_cast<int>(rng.uniform_int(0, extent - side));
}

// Offset so that `center` falls in [offset, offset + side).
int offset_containing(double center, int extent, int side, Rng& rng) {
  if (extent <= side) return 0;
  const double max_offset = static_cast<double>(extent - side);
  const double lo = std::clamp(std::floor(center - side) + 1.0, 0.0, max_offset);
  const double hi = std::clamp(std::floor(center), 0.0, max_offset);
  return static_cast<int>(rng.uniform_int(static_cast<std::int64_t>(lo),
                                          static_cast<std::int64_t>(std::max(lo, hi))));
}

void place_fixed_crop(TransformPlan& plan, int ox, int oy, int side) {
  const ImageSize resized = plan.resized_size();
  plan.crop_window = Box(ox, oy, ox + std::min(side, resized.width), oy + std::min(side, resized.height));
  plan.output_size = {side, side};
}

}  // namespace

TransformPlan mst_plan(ImageSize image, Rng& rng, int min_short_side, int max_short_side) {
  check_image(image);
  TransformPlan plan;
  plan.strategy = Strategy::Mst;
  plan.source = image;
  const int short_side = std::min(image.width, image.height);
  const auto target = rng.uniform_int(min_short_side, max_short_side);
  plan.pre_resize_ratio = static_cast<double>(target) / short_side;
  const ImageSize resized = plan.resized_size();
  plan.crop_window = Box(0, 0, resized.width, resized.height);
  plan.output_size = resized;
  return plan;
}

TransformPlan rsc_plan(ImageSize image, Rng& rng) {
  static constexpr std::array<double, 5> kFactors = {0.1, 0.3, 0.5, 0.7, 0.9};
  check_image(image);
  TransformPlan plan;
  plan.strategy = Strategy::Rsc;
  plan.source = image;
  const int short_side = std::min(image.width, image.height);
  const double factor = kFactors[rng.index(kFactors.size())];
  const int side = std::max(1, static_cast<int>(std::lround(factor * short_side)));
  const int ox = random_offset(image.width, side, rng);
  const int oy = random_offset(image.height, side, rng);
  plan.crop_window = Box(ox, oy, ox + side, oy + side);
  plan.output_size = {side, side};
  return plan;
}

double nearest_anchor_scale(double scale) {
  double best = kAnchorScaleSet.front();
  for (double s : kAnchorScaleSet) {
    if (std::abs(scale - s) < std::abs(scale - best)) best = s;
  }
  return best;
}

TransformPlan das_plan(ImageSize image, std::span<const Box> faces, const DasConfig& cfg, Rng& rng) {
  check_image(image);
  cfg.validate();
  if (faces.empty()) {
    TransformPlan plan = rsc_plan(image, rng);
    plan.strategy = Strategy::Das;
    plan.fallback_rsc = true;
    return plan;
  }
  TransformPlan plan;
  plan.strategy = Strategy::Das;
  plan.source = image;
  const std::size_t face = rng.index(faces.size());
  const double fs = face_scale(faces[face]);
  const double nearest = nearest_anchor_scale(fs);
  std::size_t eligible = 0;
  while (eligible < kAnchorScaleSet.size() && kAnchorScaleSet[eligible] <= nearest) ++eligible;
  const double sr = kAnchorScaleSet[rng.index(eligible)];
  double tr = sr / fs;
  if (cfg.r_th) tr = std::clamp(tr, 1.0 / *cfg.r_th, *cfg.r_th);

  plan.sampled_face_index = face;
  plan.sampled_face_scale = fs;
  plan.target_scale = sr;
  plan.target_resize_ratio = tr;
  const ImageSize resized = plan.resized_size();
  const int ox = random_offset(resized.width, cfg.output_side, rng);
  const int oy = random_offset(resized.height, cfg.output_side, rng);
  place_fixed_crop(plan, ox, oy, cfg.output_side);
  return plan;
}

TransformPlan sse_plan(ImageSize image, std::span<const Box> faces, const SseConfig& cfg, Rng& rng) {
  check_image(image);
  cfg.validate();
  if (faces.empty()) {
    TransformPlan plan = rsc_plan(image, rng);
    plan.strategy = Strategy::Sse;
    plan.fallback_rsc = true;
    return plan;
  }
  TransformPlan plan;
  plan.strategy = Strategy::Sse;
  plan.source = image;

  const int short_side = std::min(image.width, image.height);
  const auto short_target = rng.uniform_int(cfg.pre_resize_min, cfg.pre_resize_max);
  plan.pre_resize_ratio = static_cast<double>(short_target) / short_side;

  const std::size_t face = rng.index(faces.size());
  const double fs = face_scale(faces[face]) * plan.pre_resize_ratio;

  static constexpr std::array<LayerId, 4> kOtherLayers = {LayerId::P2, LayerId::P3, LayerId::P4,
                                                          LayerId::P7};
  const double rn = rng.uniform01();
  LayerId layer;
  if (rn < cfg.tr_p5) {
    layer = LayerId::P5;
  } else if (rn <= cfg.tr_p5 + cfg.tr_p6) {
    layer = LayerId::P6;
  } else {
    layer = kOtherLayers[rng.index(kOtherLayers.size())];
  }
  const ScaleRange range = cfg.scale_ranges[layer_position(layer)];
  const double target = rng.uniform(range.start, range.end);

  plan.target_layer = layer;
  plan.sampled_face_index = face;
  plan.sampled_face_scale = fs;
  plan.target_scale = target;
  plan.target_resize_ratio = target / fs;

  const ImageSize resized = plan.resized_size();
  const double total = plan.total_ratio();
  const int ox = offset_containing(faces[face].center_x() * total, resized.width, cfg.output_side, rng);
  const int oy = offset_containing(faces[face].center_y() * total, resized.height, cfg.output_side, rng);
  place_fixed_crop(plan, ox, oy, cfg.output_side);
  return plan;
}

std::vector<PlacedFace> place_faces(std::span<const Box> faces, const TransformPlan& plan) {
  std::vector<PlacedFace> out;
  const double ratio = plan.total_ratio();
  const Box& crop = plan.crop_window;
  const double cw = crop.width();
  const double ch = crop.height();
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const Box moved = faces[i].scaled(ratio).translated(-crop.x_min(), -crop.y_min());
    const double cx = moved.center_x();
    const double cy = moved.center_y();
    if (cx < 0.0 || cx >= cw || cy < 0.0 || cy >= ch) continue;
    out.push_back({i, Box(std::max(0.0, moved.x_min()), std::max(0.0, moved.y_min()),
                          std::min(cw, moved.x_max()), std::min(ch, moved.y_max()))});
  }
  return out;
}

std::vector<Box> apply_plan(std::span<const Box> faces, const TransformPlan& plan) {
  std::vector<Box> out;
  for (const PlacedFace& f : place_faces(faces, plan)) out.push_back(f.box);
  return out;
}

Raster::Raster(int w, int h, int c, float fill) : width(w), height(h), channels(c) {
  if (w < 0 || h < 0 || c < 1) throw std::invalid_argument("invalid raster shape");
  data.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), fill);
}

Raster apply_raster(const Raster& image, const TransformPlan& plan) {
  if (image.width != plan.source.width || image.height != plan.source.height) {
    throw std::invalid_argument("raster size does not match the plan's source image");
  }
  const ImageSize resized = plan.resized_size();
  const double sx = static_cast<double>(resized.width) / image.width;
  const double sy = static_cast<double>(resized.height) / image.height;
  const int ox = static_cast<int>(std::lround(plan.crop_window.x_min()));
  const int oy = static_cast<int>(std::lround(plan.crop_window.y_min()));
  const int cw = std::min(static_cast<int>(std::lround(plan.crop_window.width())), plan.output_size.width);
  const int ch = std::min(static_cast<int>(std::lround(plan.crop_window.height())), plan.output_size.height);

  Raster out(plan.output_size.width, plan.output_size.height, image.channels, 0.0f);
  for (int v = 0; v < ch; ++v) {
    const int y = v + oy;
    if (y < 0 || y >= resized.height) continue;
    const double src_y = std::clamp((y + 0.5) / sy - 0.5, 0.0, image.height - 1.0);
    const int y0 = static_cast<int>(std::floor(src_y));
    const int y1 = std::min(y0 + 1, image.height - 1);
    const float wy = static_cast<float>(src_y - y0);
    for (int u = 0; u < cw; ++u) {
      const int x = u + ox;
      if (x < 0 || x >= resized.width) continue;
      const double src_x = std::clamp((x + 0.5) / sx - 0.5, 0.0, image.width - 1.0);
      const int x0 = static_cast<int>(std::floor(src_x));
      const int x1 = std::min(x0 + 1, image.width - 1);
      const float wx = static_cast<float>(src_x - x0);
      for (int c = 0; c < image.channels; ++c) {
        const float a = image.at(x0, y0, c);
        const float b = image.at(x1, y0, c);
        const float d = image.at(x0, y1, c);
        const float e = image.at(x1, y1, c);
        const float top = a + (b - a) * wx;
        const float bottom = d + (e - d) * wx;
        out.at(u, v, c) = top + (bottom - top) * wy;
      }
    }
  }
  return out;
}

std::vector<ScaleDensityPoint> scale_distribution(const GroundTruthSet& annotations,
                                                  std::vector<double> thresholds) {
  std::vector<double> scales;
  for (const ImageAnnotation& image : annotations) {
    for (const FaceAnnotation& face : image.faces) {
      if (!face.skip) scales.push_back(face_scale(*face.box));
    }
  }
  if (scales.empty()) throw std::invalid_argument("scale distribution needs at least one valid face");
  std::sort(scales.begin(), scales.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<ScaleDensityPoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto below = std::lower_bound(scales.begin(), scales.end(), t) - scales.begin();
    out.push_back({t, static_cast<double>(below) / static_cast<double>(scales.size())});
  }
  return out;
}

}  // namespace anchorkit
