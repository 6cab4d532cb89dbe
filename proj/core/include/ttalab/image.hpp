#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ttalab {

// Grayscale image, values nominally in [0,1], row-major.
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0)
      : w_(width), h_(height), pix_(static_cast<std::size_t>(width) * height, fill) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("Image: non-positive dims");
  }

  int width() const { return w_; }
  int height() const { return h_; }
  std::size_t size() const { return pix_.size(); }

  double& at(int x, int y) { return pix_[static_cast<std::size_t>(y) * w_ + x]; }
  double at(int x, int y) const { return pix_[static_cast<std::size_t>(y) * w_ + x]; }

  double* data() { return pix_.data(); }
  const double* data() const { return pix_.data(); }

  // Bilinear sample at continuous coordinates; out-of-range coordinates are
  // clamped to the border (replicate padding).
  double sample(double x, double y) const {
    x = std::clamp(x, 0.0, static_cast<double>(w_ - 1));
    y = std::clamp(y, 0.0, static_cast<double>(h_ - 1));
    const int x0 = static_cast<int>(x);
    const int y0 = static_cast<int>(y);
    const int x1 = std::min(x0 + 1, w_ - 1);
    const int y1 = std::min(y0 + 1, h_ - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
    const double bot = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
    return top * (1.0 - fy) + bot * fy;
  }

  void clamp01() {
    for (double& v : pix_) v = std::clamp(v, 0.0, 1.0);
  }

  bool same_shape(const Image& o) const { return w_ == o.w_ && h_ == o.h_; }

  bool operator==(const Image& o) const { return w_ == o.w_ && h_ == o.h_ && pix_ == o.pix_; }

 private:
  int w_ = 0;
  int h_ = 0;
  std::vector<double> pix_;
};

inline double l2_distance(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("l2_distance: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace ttalab
