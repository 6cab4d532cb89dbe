#pragma once

#include <cstdint>
#include <vector>

#include "ttalab/image.hpp"
#include "ttalab/rng.hpp"

namespace ttalab {

// One object instance: an oriented grating plus a Gaussian blob, both in
// normalized coordinates u, v in [-1, 1].
struct PatternParams {
  double theta = 0.0;        // grating orientation
  double freq = 2.0;         // grating cycles across the frame
  double phase = 0.0;
  double grating_amp = 0.18;
  double blob_x = 0.0;
  double blob_y = 0.0;
  double blob_amp = 0.25;
  double blob_sigma = 0.25;
};

// 7 orientations x 3 frequencies give 21 distinct classes.
inline constexpr int kPatternClasses = 21;

// Class prototype: orientation/frequency pair plus a class-specific blob
// position on a fixed ring. Throws on class outside [0, kPatternClasses).
PatternParams prototype_params(int cls);

// Instance-level jitter applied once per tracklet at frame 0.
PatternParams jitter_params(const PatternParams& base, Rng& rng);

// One random-walk step of the per-frame drift; step sizes are a fixed
// fraction of the instance jitter scales, multiplied by drift.
PatternParams walk_params(const PatternParams& p, double drift, Rng& rng);

Image render_pattern(const PatternParams& p, int width = 16, int height = 16);

struct Tracklet {
  int id = 0;
  int label = 0;
  std::vector<Image> frames;
  std::uint64_t corruption_seed = 0;
};

void validate_tracklet(const Tracklet& t);

// Frame 0 is the jittered class prototype; each later frame takes one walk
// step. drift = 0 repeats frame 0 exactly.
Tracklet synth_tracklet(int cls, int length, double drift, Rng& rng, int width = 16,
                        int height = 16);

}  // namespace ttalab
