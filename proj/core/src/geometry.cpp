#include "anchorkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace anchorkit {

Box::Box(double x_min, double y_min, double x_max, double y_max)
    : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
  if (!std::isfinite(x_min) || !std::isfinite(y_min) || !std::isfinite(x_max) ||
      !std::isfinite(y_max)) {
    throw std::invalid_argument("box coordinates must be finite");
  }
  if (!(x_max > x_min) || !(y_max > y_min)) {
    throw std::invalid_argument("degenerate box (" + std::to_string(x_min) + ", " +
                                std::to_string(y_min) + ", " + std::to_string(x_max) + ", " +
                                std::to_string(y_max) + ")");
  }
}

Box Box::from_xywh(double x, double y, double w, double h) { return Box(x, y, x + w, y + h); }

Box Box::from_center(double cx, double cy, double w, double h) {
  return Box(cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h);
}

Box Box::scaled(double factor) const {
  return Box(x_min_ * factor, y_min_ * factor, x_max_ * factor, y_max_ * factor);
}

Box Box::translated(double dx, double dy) const {
  return Box(x_min_ + dx, y_min_ + dy, x_max_ + dx, y_max_ + dy);
}

double intersection_area(const Box& a, const Box& b) {
  const double iw = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const double ih = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

double iou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  if (inter == 0.0) return 0.0;
  return inter / (a.area() + b.area() - inter);
}

double center_distance(const Box& a, const Box& b) {
  return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y());
}

double face_scale(const Box& b) { return std::sqrt(b.width() * b.height()); }

std::string_view layer_name(LayerId id) {
  static constexpr std::array<std::string_view, kNumLayers> kNames = {"p2", "p3", "p4",
                                                                      "p5", "p6", "p7"};
  return kNames[layer_position(id)];
}

std::optional<LayerId> parse_layer(std::string_view name) {
  for (LayerId id : kAllLayers) {
    if (layer_name(id) == name) return id;
  }
  return std::nullopt;
}

AnchorGrid::AnchorGrid(int image_width, int image_height)
    : width_(image_width), height_(image_height) {
  if (image_width < 1 || image_height < 1) {
    throw std::invalid_argument("anchor grid needs positive image dimensions, got " +
                                std::to_string(image_width) + "x" + std::to_string(image_height));
  }
  std::size_t offset = 0;
  for (const PyramidLayer& layer : kPyramidLayers) {
    LayerShape& s = shapes_[layer_position(layer.id)];
    s.rows = (image_height + layer.stride - 1) / layer.stride;
    s.cols = (image_width + layer.stride - 1) / layer.stride;
    s.offset = offset;
    offset += s.count();
  }
  total_ = offset;
}

LayerId AnchorGrid::layer_of(std::size_t index) const {
  if (index >= total_) throw std::out_of_range("anchor index out of range");
  for (LayerId id : kAllLayers) {
    if (index < layer_end(id)) return id;
  }
  return LayerId::P7;
}

std::size_t AnchorGrid::index_of(LayerId layer, int row, int col) const {
  const LayerShape& s = shape(layer);
  if (row < 0 || row >= s.rows || col < 0 || col >= s.cols) {
    throw std::out_of_range("anchor cell out of range");
  }
  return s.offset + static_cast<std::size_t>(row) * static_cast<std::size_t>(s.cols) +
         static_cast<std::size_t>(col);
}

Box AnchorGrid::anchor_box(LayerId layer, int row, int col) const {
  const PyramidLayer& p = pyramid_layer(layer);
  const double cx = p.stride * (col + 0.5);
  const double cy = p.stride * (row + 0.5);
  const double half = 0.5 * p.anchor_scale;
  return Box(cx - half, cy - half, cx + half, cy + half);
}

Anchor AnchorGrid::anchor(std::size_t index) const {
  const LayerId layer = layer_of(index);
  const LayerShape& s = shape(layer);
  const std::size_t local = index - s.offset;
  const int row = static_cast<int>(local / static_cast<std::size_t>(s.cols));
  const int col = static_cast<int>(local % static_cast<std::size_t>(s.cols));
  return Anchor{index, layer, row, col, anchor_box(layer, row, col)};
}

AnchorGrid generate_anchor_grid(int width, int height) { return AnchorGrid(width, height); }

}  // namespace anchorkit
