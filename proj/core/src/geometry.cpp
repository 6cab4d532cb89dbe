#include "ttalab/geometry.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ttalab {

CropRegion crop_square(const BBox& b) {
  if (!(b.w > 0.0) || !(b.h > 0.0)) throw std::invalid_argument("crop_square: degenerate box");
  if (!(b.image_w > 0.0) || !(b.image_h > 0.0)) {
    throw std::invalid_argument("crop_square: degenerate frame");
  }
  if (b.x0 >= b.image_w || b.y0 >= b.image_h || b.x0 + b.w <= 0.0 || b.y0 + b.h <= 0.0) {
    throw std::invalid_argument("crop_square: box outside frame");
  }
  CropRegion r;
  r.side = 1.1 * std::max(b.w, b.h);
  r.cx = b.x0 + b.w / 2.0;
  r.cy = b.y0 + b.h / 2.0;
  const double max_side = std::min(b.image_w, b.image_h);
  if (r.side > max_side) r.side = max_side;
  // Translate into the frame; the clamp range collapses to a point when the
  // side equals the frame extent.
  r.cx = std::clamp(r.cx, r.side / 2.0, b.image_w - r.side / 2.0);
  r.cy = std::clamp(r.cy, r.side / 2.0, b.image_h - r.side / 2.0);
  return r;
}

std::vector<std::size_t> subsample_indices(std::size_t count, int interval) {
  if (interval < 1) throw std::invalid_argument("subsample: interval must be >= 1");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count; i += static_cast<std::size_t>(interval)) out.push_back(i);
  return out;
}

std::vector<FrameAnnotation> load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw std::runtime_error("load_annotations: cannot open " + path);
  double image_w = 0.0, image_h = 0.0;
  bool have_size = false;
  std::vector<FrameAnnotation> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "image_size") {
      if (!(ls >> image_w >> image_h) || image_w <= 0.0 || image_h <= 0.0) {
        throw std::runtime_error("load_annotations: bad image_size line");
      }
      have_size = true;
      continue;
    }
    if (!have_size) throw std::runtime_error("load_annotations: image_size must come first");
    FrameAnnotation f;
    f.image_path = first;
    if (!(ls >> f.box.x0 >> f.box.y0 >> f.box.w >> f.box.h)) {
      throw std::runtime_error("load_annotations: bad frame line: " + line);
    }
    f.box.image_w = image_w;
    f.box.image_h = image_h;
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<CropPlan> plan_crops(const std::vector<FrameAnnotation>& frames, int interval) {
  std::vector<CropPlan> out;
  for (std::size_t i : subsample_indices(frames.size(), interval)) {
    out.push_back({frames[i].image_path, crop_square(frames[i].box)});
  }
  return out;
}

}  // namespace ttalab
