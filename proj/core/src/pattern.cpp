#include "ttalab/pattern.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ttalab {
namespace {

// Instance jitter scales; walk steps are 15% of these per unit drift.
constexpr double kJitterPhase = 0.6;
constexpr double kJitterTheta = 0.04;
constexpr double kJitterFreqRel = 0.02;
constexpr double kJitterBlobPos = 0.06;
constexpr double kJitterAmpRel = 0.08;
constexpr double kWalkFraction = 0.15;

}  // namespace

PatternParams prototype_params(int cls) {
  if (cls < 0 || cls >= kPatternClasses) throw std::invalid_argument("pattern: unknown class");
  PatternParams p;
  p.theta = std::numbers::pi * (cls % 7) / 7.0;
  p.freq = 2.0 + (cls / 7);
  p.phase = 0.0;
  // Golden-angle ring keeps blob positions distinct across classes.
  const double a = 2.399963229728653 * cls;
  p.blob_x = 0.55 * std::cos(a);
  p.blob_y = 0.55 * std::sin(a);
  return p;
}

PatternParams jitter_params(const PatternParams& base, Rng& rng) {
  PatternParams p = base;
  p.phase += rng.uniform(-kJitterPhase, kJitterPhase);
  p.theta += rng.uniform(-kJitterTheta, kJitterTheta);
  p.freq *= 1.0 + rng.uniform(-kJitterFreqRel, kJitterFreqRel);
  p.blob_x += rng.uniform(-kJitterBlobPos, kJitterBlobPos);
  p.blob_y += rng.uniform(-kJitterBlobPos, kJitterBlobPos);
  p.grating_amp *= 1.0 + rng.uniform(-kJitterAmpRel, kJitterAmpRel);
  p.blob_amp *= 1.0 + rng.uniform(-kJitterAmpRel, kJitterAmpRel);
  return p;
}

PatternParams walk_params(const PatternParams& p, double drift, Rng& rng) {
  const double k = kWalkFraction * drift;
  PatternParams q = p;
  q.phase += k * kJitterPhase * rng.normal();
  q.theta += k * kJitterTheta * rng.normal();
  q.freq *= 1.0 + k * kJitterFreqRel * rng.normal();
  q.blob_x += k * kJitterBlobPos * rng.normal();
  q.blob_y += k * kJitterBlobPos * rng.normal();
  q.grating_amp *= 1.0 + k * kJitterAmpRel * rng.normal();
  q.blob_amp *= 1.0 + k * kJitterAmpRel * rng.normal();
  return q;
}

Image render_pattern(const PatternParams& p, int width, int height) {
  Image img(width, height);
  const double ct = std::cos(p.theta);
  const double st = std::sin(p.theta);
  const double two_sigma_sq = 2.0 * p.blob_sigma * p.blob_sigma;
  for (int y = 0; y < height; ++y) {
    const double v = height > 1 ? 2.0 * y / (height - 1) - 1.0 : 0.0;
    for (int x = 0; x < width; ++x) {
      const double u = width > 1 ? 2.0 * x / (width - 1) - 1.0 : 0.0;
      const double proj = u * ct + v * st;
      const double grating = p.grating_amp * std::sin(std::numbers::pi * p.freq * proj + p.phase);
      const double dx = u - p.blob_x;
      const double dy = v - p.blob_y;
      const double blob = p.blob_amp * std::exp(-(dx * dx + dy * dy) / two_sigma_sq);
      img.at(x, y) = 0.5 + grating + blob;
    }
  }
  img.clamp01();
  return img;
}

void validate_tracklet(const Tracklet& t) {
  if (t.frames.empty()) throw std::invalid_argument("tracklet: no frames");
  for (const Image& f : t.frames) {
    if (!f.same_shape(t.frames.front())) throw std::invalid_argument("tracklet: mixed dims");
  }
  if (t.label < 0) throw std::invalid_argument("tracklet: negative label");
}

Tracklet synth_tracklet(int cls, int length, double drift, Rng& rng, int width, int height) {
  if (length < 1) throw std::invalid_argument("synth_tracklet: length must be >= 1");
  if (drift < 0.0) throw std::invalid_argument("synth_tracklet: negative drift");
  Tracklet t;
  t.label = cls;
  t.corruption_seed = rng.next_u64();
  PatternParams p = jitter_params(prototype_params(cls), rng);
  t.frames.reserve(static_cast<std::size_t>(length));
  t.frames.push_back(render_pattern(p, width, height));
  for (int i = 1; i < length; ++i) {
    p = walk_params(p, drift, rng);
    t.frames.push_back(drift == 0.0 ? t.frames.front() : render_pattern(p, width, height));
  }
  return t;
}

}  // namespace ttalab
