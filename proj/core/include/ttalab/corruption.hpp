#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ttalab/image.hpp"

namespace ttalab {

// The fourteen taxonomy kinds (noise / blur / weather / digital) plus the
// directional motion blur that only the frame-wise comparison uses.
enum class CorruptionKind {
  GaussianNoise,
  ShotNoise,
  ImpulseNoise,
  DefocusBlur,
  GlassBlur,
  ZoomBlur,
  Snow,
  Frost,
  Fog,
  Brightness,
  Contrast,
  ElasticTransform,
  Pixelate,
  JpegLike,
  MotionBlur,
};

inline constexpr int kCorruptionKindCount = 15;

std::string_view corruption_name(CorruptionKind kind);
CorruptionKind parse_corruption(std::string_view name);

// All kinds in canonical report order (noise, blur, weather, digital groups,
// then motion blur last).
const std::vector<CorruptionKind>& all_corruption_kinds();

// The fourteen-kind set used by the default experiment grid.
const std::vector<CorruptionKind>& default_corruption_set();

// Severity parameter table. Integer levels 1..5 carry documented parameters;
// level 0 is the implicit identity. Fractional severities interpolate
// linearly between adjacent levels. Parameters with discrete meaning
// (iteration counts, pixel offsets) are rounded at the point of use.
const std::vector<double>& severity_params(CorruptionKind kind, int level);
std::vector<double> identity_params(CorruptionKind kind);
std::vector<double> severity_params_at(CorruptionKind kind, double severity);

// Canonical plain-text rendering of the full table; data/corruption_params.txt
// ships exactly this text so tests can pin the values.
std::string severity_table_text();

// Applies one corruption at the given severity. Pure function of its
// arguments: identical calls produce bit-identical images. Output is clamped
// to [0,1]. severity must lie in (0, 5]; inputs must lie in [0,1].
Image corrupt(const Image& x, CorruptionKind kind, double severity, std::uint64_t seed);

struct SeveritySchedule {
  enum class Mode { Static, Dynamic };
  Mode mode = Mode::Static;
  int level = 5;  // s, integer 1..5
  double omega = 0.19634954084936207;  // 2*pi/32: one oscillation per 32 frames
  double phi = 0.0;
  // Dynamic evaluates s*|sin(omega*t + phi)| by default; the literal form
  // s*|sign(t)| (constant s for every t >= 1) is selectable here.
  bool literal_sign = false;

  static SeveritySchedule static_level(int s);
  static SeveritySchedule dynamic(int s, double omega, double phi, bool literal_sign = false);
};

void validate_schedule(const SeveritySchedule& schedule);

// Severity at frame index t (within-tracklet time); always in [0, s].
double severity_at(const SeveritySchedule& schedule, int t);

}  // namespace ttalab
