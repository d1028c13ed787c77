#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace diver {

/// 2-D row-major buffer of double-precision samples.
class Plane {
 public:
  Plane() = default;
  Plane(int width, int height, double fill = 0.0)
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * height, fill) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("Plane: dimensions must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<double> samples() { return data_; }
  std::span<const double> samples() const { return data_; }

  bool same_shape(const Plane& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

enum class Channel { R = 0, G = 1, B = 2 };

/// Planar RGB image. Samples are nominally in [0,1]; operations that
/// document clamping guarantee it on their outputs.
struct ImagePlanar {
  ImagePlanar() = default;
  ImagePlanar(int width, int height, double fill = 0.0)
      : planes{Plane(width, height, fill), Plane(width, height, fill),
               Plane(width, height, fill)} {}

  int width() const { return planes[0].width(); }
  int height() const { return planes[0].height(); }
  std::size_t pixel_count() const { return planes[0].size(); }
  bool empty() const { return planes[0].empty(); }

  Plane& plane(int c) { return planes[static_cast<std::size_t>(c)]; }
  const Plane& plane(int c) const { return planes[static_cast<std::size_t>(c)]; }
  Plane& plane(Channel c) { return plane(static_cast<int>(c)); }
  const Plane& plane(Channel c) const { return plane(static_cast<int>(c)); }

  bool same_shape(const ImagePlanar& o) const {
    return planes[0].same_shape(o.planes[0]);
  }

  std::array<Plane, 3> planes;
};

/// Relative scene depth, nonnegative, dimensions match the paired image.
struct DepthMap {
  DepthMap() = default;
  explicit DepthMap(Plane p) : plane(std::move(p)) {}
  DepthMap(int width, int height, double fill = 0.0) : plane(width, height, fill) {}

  int width() const { return plane.width(); }
  int height() const { return plane.height(); }

  Plane plane;
};

struct PlaneStats {
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Per-channel mean / median / min / max, indexed R,G,B.
using ChannelStats = std::array<PlaneStats, 3>;

/// Exact per-plane statistics; the median of an even-count sample set is
/// the mean of the two central order statistics.
PlaneStats plane_stats(const Plane& p);
ChannelStats channel_stats(const ImagePlanar& img);

/// True when every sample of every plane is finite.
bool all_finite(const ImagePlanar& img);
bool all_finite(const Plane& p);

void clamp01(Plane& p);
void clamp01(ImagePlanar& img);

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

/// Throws std::invalid_argument unless img and depth share dimensions.
void require_same_shape(const ImagePlanar& img, const DepthMap& depth);
void require_same_shape(const ImagePlanar& a, const ImagePlanar& b);

}  // namespace diver
