#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ttalab {

// Axis-aligned box inside a frame of image_w x image_h pixels.
struct BBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double w = 0.0;
  double h = 0.0;
  double image_w = 0.0;
  double image_h = 0.0;
};

struct CropRegion {
  double cx = 0.0;
  double cy = 0.0;
  double side = 0.0;
};

// Square crop region 10% larger than the box's largest side, centered on the
// box. Translated (never shrunk) to lie inside the frame when it fits; when
// it cannot fit, the side is clamped to min(image_w, image_h) first.
// Throws on a degenerate box or one that misses the frame entirely.
CropRegion crop_square(const BBox& b);

// Indices 0, interval, 2*interval, ... below count.
std::vector<std::size_t> subsample_indices(std::size_t count, int interval);

template <typename T>
std::vector<T> subsample_frames(const std::vector<T>& frames, int interval) {
  std::vector<T> out;
  for (std::size_t i : subsample_indices(frames.size(), interval)) out.push_back(frames[i]);
  return out;
}

// One line of a tracklet annotation file.
struct FrameAnnotation {
  std::string image_path;
  BBox box;
};

// Parses a per-tracklet annotation file. Format, whitespace separated:
//   image_size <image_w> <image_h>
//   <frame_path> <x0> <y0> <w> <h>     (one line per frame, in order)
// Lines starting with '#' and blank lines are ignored.
std::vector<FrameAnnotation> load_annotations(const std::string& path);

struct CropPlan {
  std::string image_path;
  CropRegion region;
};

// Applies the frame-interval subsampling and square-crop rule to an
// annotation sequence; image decoding is the caller's concern.
std::vector<CropPlan> plan_crops(const std::vector<FrameAnnotation>& frames, int interval);

}  // namespace ttalab
