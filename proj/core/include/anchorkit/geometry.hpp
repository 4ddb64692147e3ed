#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace anchorkit {

// Axis-aligned rectangle in continuous pixel coordinates.
// Construction rejects degenerate or non-finite boxes.
class Box {
 public:
  Box(double x_min, double y_min, double x_max, double y_max);

  // Integer annotation layout (x, y, w, h); x_max = x + w.
  static Box from_xywh(double x, double y, double w, double h);
  static Box from_center(double cx, double cy, double w, double h);

  double x_min() const { return x_min_; }
  double y_min() const { return y_min_; }
  double x_max() const { return x_max_; }
  double y_max() const { return y_max_; }

  double width() const { return x_max_ - x_min_; }
  double height() const { return y_max_ - y_min_; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x_min_ + x_max_); }
  double center_y() const { return 0.5 * (y_min_ + y_max_); }

  Box scaled(double factor) const;
  Box translated(double dx, double dy) const;

  friend bool operator==(const Box&, const Box&) = default;

 private:
  double x_min_;
  double y_min_;
  double x_max_;
  double y_max_;
};

double iou(const Box& a, const Box& b);
double intersection_area(const Box& a, const Box& b);

// Euclidean distance between box centers.
double center_distance(const Box& a, const Box& b);

// sqrt(width * height).
double face_scale(const Box& b);

enum class LayerId : std::uint8_t { P2 = 0, P3, P4, P5, P6, P7 };

inline constexpr std::size_t kNumLayers = 6;

inline constexpr std::array<LayerId, kNumLayers> kAllLayers = {
    LayerId::P2, LayerId::P3, LayerId::P4, LayerId::P5, LayerId::P6, LayerId::P7};

struct PyramidLayer {
  LayerId id;
  int stride;
  double anchor_scale;
};

inline constexpr std::array<PyramidLayer, kNumLayers> kPyramidLayers = {{
    {LayerId::P2, 4, 16.0},
    {LayerId::P3, 8, 32.0},
    {LayerId::P4, 16, 64.0},
    {LayerId::P5, 32, 128.0},
    {LayerId::P6, 64, 256.0},
    {LayerId::P7, 128, 512.0},
}};

constexpr std::size_t layer_position(LayerId id) { return static_cast<std::size_t>(id); }
constexpr const PyramidLayer& pyramid_layer(LayerId id) { return kPyramidLayers[layer_position(id)]; }

std::string_view layer_name(LayerId id);
std::optional<LayerId> parse_layer(std::string_view name);

struct Anchor {
  std::size_t index;
  LayerId layer;
  int row;
  int col;
  Box box;
};

// All anchors of the p2..p7 pyramid for one image. Anchor boxes are computed on
// demand from (layer, row, col) so that very large canvases stay cheap; global
// indices are contiguous and layer-major.
class AnchorGrid {
 public:
  struct LayerShape {
    int rows = 0;
    int cols = 0;
    std::size_t offset = 0;
    std::size_t count() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
  };

  AnchorGrid(int image_width, int image_height);

  int image_width() const { return width_; }
  int image_height() const { return height_; }
  std::size_t size() const { return total_; }

  const LayerShape& shape(LayerId layer) const { return shapes_[layer_position(layer)]; }
  std::size_t layer_begin(LayerId layer) const { return shape(layer).offset; }
  std::size_t layer_end(LayerId layer) const { return shape(layer).offset + shape(layer).count(); }

  LayerId layer_of(std::size_t index) const;
  std::size_t index_of(LayerId layer, int row, int col) const;
  Anchor anchor(std::size_t index) const;
  Box anchor_box(LayerId layer, int row, int col) const;

  friend bool operator==(const AnchorGrid& a, const AnchorGrid& b) {
    return a.width_ == b.width_ && a.height_ == b.height_;
  }

 private:
  int width_;
  int height_;
  std::array<LayerShape, kNumLayers> shapes_{};
  std::size_t total_ = 0;
};

AnchorGrid generate_anchor_grid(int width, int height);

}  // namespace anchorkit
