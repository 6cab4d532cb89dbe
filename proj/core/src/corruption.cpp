#include "ttalab/corruption.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "ttalab/rng.hpp"

namespace ttalab {
namespace {

struct KindInfo {
  CorruptionKind kind;
  std::string_view name;
  std::string_view param_names;
  std::vector<double> identity;          // implicit level-0 parameters
  std::array<std::vector<double>, 5> levels;
};

// Severity tables. Levels interpolate linearly; level 0 is the identity.
// Discrete parameters (offsets, iteration counts) are rounded at use.
const std::vector<KindInfo>& kind_table() {
  static const std::vector<KindInfo> table = {
      {CorruptionKind::GaussianNoise, "gaussian-noise", "stddev",
       {0.0}, {{{0.04}, {0.08}, {0.12}, {0.18}, {0.26}}}},
      {CorruptionKind::ShotNoise, "shot-noise", "scale (noise std = scale*sqrt(x))",
       {0.0}, {{{0.06}, {0.09}, {0.13}, {0.18}, {0.26}}}},
      {CorruptionKind::ImpulseNoise, "impulse-noise", "flip probability",
       {0.0}, {{{0.02}, {0.05}, {0.09}, {0.14}, {0.22}}}},
      {CorruptionKind::DefocusBlur, "defocus-blur", "disk radius (px)",
       {0.0}, {{{0.8}, {1.2}, {1.7}, {2.3}, {3.0}}}},
      {CorruptionKind::GlassBlur, "glass-blur", "max displacement (px), shuffle iterations",
       {0.0, 0.0}, {{{1, 1}, {1, 2}, {2, 2}, {2, 3}, {3, 4}}}},
      {CorruptionKind::ZoomBlur, "zoom-blur", "max zoom factor",
       {1.0}, {{{1.06}, {1.12}, {1.18}, {1.26}, {1.35}}}},
      {CorruptionKind::Snow, "snow", "speck density, whitening blend",
       {0.0, 0.0}, {{{0.03, 0.05}, {0.06, 0.08}, {0.10, 0.12}, {0.15, 0.18}, {0.22, 0.25}}}},
      {CorruptionKind::Frost, "frost", "patch coverage, blend strength",
       {0.0, 0.0}, {{{0.10, 0.30}, {0.18, 0.40}, {0.28, 0.50}, {0.40, 0.60}, {0.55, 0.70}}}},
      {CorruptionKind::Fog, "fog", "fog blend",
       {0.0}, {{{0.15}, {0.25}, {0.35}, {0.50}, {0.65}}}},
      {CorruptionKind::Brightness, "brightness", "additive offset",
       {0.0}, {{{0.08}, {0.14}, {0.20}, {0.28}, {0.38}}}},
      {CorruptionKind::Contrast, "contrast", "contrast factor about the mean",
       {1.0}, {{{0.75}, {0.60}, {0.45}, {0.30}, {0.18}}}},
      {CorruptionKind::ElasticTransform, "elastic-transform", "displacement amplitude (px)",
       {0.0}, {{{0.5}, {1.0}, {1.5}, {2.2}, {3.0}}}},
      {CorruptionKind::Pixelate, "pixelate", "block size (px)",
       {1.0}, {{{1.6}, {2.0}, {2.6}, {3.2}, {4.0}}}},
      {CorruptionKind::JpegLike, "jpeg-like", "DCT quantization step",
       {0.0}, {{{0.03}, {0.06}, {0.10}, {0.16}, {0.24}}}},
      {CorruptionKind::MotionBlur, "motion-blur", "blur length (px)",
       {1.0}, {{{2}, {3}, {4}, {6}, {8}}}},
  };
  return table;
}

const KindInfo& info_for(CorruptionKind kind) {
  for (const KindInfo& k : kind_table()) {
    if (k.kind == kind) return k;
  }
  throw std::invalid_argument("corruption: unknown kind");
}

// --- small image helpers ------------------------------------------------

Image convolve(const Image& x, const std::vector<double>& kernel, int kw, int kh) {
  Image out(x.width(), x.height());
  const int rx = kw / 2, ry = kh / 2;
  for (int y = 0; y < x.height(); ++y) {
    for (int px = 0; px < x.width(); ++px) {
      double acc = 0.0;
      for (int ky = 0; ky < kh; ++ky) {
        const int sy = std::clamp(y + ky - ry, 0, x.height() - 1);
        for (int kx = 0; kx < kw; ++kx) {
          const int sx = std::clamp(px + kx - rx, 0, x.width() - 1);
          acc += kernel[ky * kw + kx] * x.at(sx, sy);
        }
      }
      out.at(px, y) = acc;
    }
  }
  return out;
}

Image gaussian_smooth(const Image& x, double sigma) {
  if (sigma <= 0.0) return x;
  const int r = std::max(1, static_cast<int>(std::ceil(2.5 * sigma)));
  std::vector<double> k(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + r];
  }
  for (double& v : k) v /= sum;
  // Separable: horizontal then vertical.
  Image tmp = convolve(x, k, 2 * r + 1, 1);
  return convolve(tmp, k, 1, 2 * r + 1);
}

// Smoothed standardized noise field (zero mean, unit variance).
Image smooth_field(int w, int h, Rng& rng, double sigma = 2.0) {
  Image f(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f.at(x, y) = rng.normal();
  }
  f = gaussian_smooth(f, sigma);
  double mean = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) mean += f.data()[i];
  mean /= static_cast<double>(f.size());
  double var = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = f.data()[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(f.size());
  const double inv = var > 1e-18 ? 1.0 / std::sqrt(var) : 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) f.data()[i] = (f.data()[i] - mean) * inv;
  return f;
}

Image block_average(const Image& x, int block) {
  if (block <= 1) return x;
  Image out(x.width(), x.height());
  for (int by = 0; by < x.height(); by += block) {
    const int y1 = std::min(by + block, x.height());
    for (int bx = 0; bx < x.width(); bx += block) {
      const int x1 = std::min(bx + block, x.width());
      double acc = 0.0;
      for (int y = by; y < y1; ++y) {
        for (int px = bx; px < x1; ++px) acc += x.at(px, y);
      }
      acc /= static_cast<double>((y1 - by) * (x1 - bx));
      for (int y = by; y < y1; ++y) {
        for (int px = bx; px < x1; ++px) out.at(px, y) = acc;
      }
    }
  }
  return out;
}

// Orthonormal 8x8 DCT-II basis.
const std::array<std::array<double, 8>, 8>& dct_basis() {
  static const auto basis = [] {
    std::array<std::array<double, 8>, 8> c{};
    for (int k = 0; k < 8; ++k) {
      const double a = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int n = 0; n < 8; ++n) {
        c[k][n] = a * std::cos(std::numbers::pi * (2 * n + 1) * k / 16.0);
      }
    }
    return c;
  }();
  return basis;
}

// --- per-kind operators ---------------------------------------------------

Image apply_gaussian_noise(const Image& x, double stddev, Rng& rng) {
  Image out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += stddev * rng.normal();
  return out;
}

Image apply_shot_noise(const Image& x, double scale, Rng& rng) {
  Image out = x;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] += scale * std::sqrt(std::max(0.0, x.data()[i])) * rng.normal();
  }
  return out;
}

Image apply_impulse_noise(const Image& x, double prob, Rng& rng) {
  Image out = x;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double gate = rng.uniform();
    const double polarity = rng.uniform();
    if (gate < prob) out.data()[i] = polarity < 0.5 ? 0.0 : 1.0;
  }
  return out;
}

Image apply_defocus(const Image& x, double radius) {
  if (radius < 1e-9) return x;
  const int r = static_cast<int>(std::ceil(radius));
  const int side = 2 * r + 1;
  std::vector<double> k(static_cast<std::size_t>(side) * side);
  double sum = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double dist = std::sqrt(static_cast<double>(dx * dx + dy * dy));
      const double w = std::clamp(radius + 0.5 - dist, 0.0, 1.0);  // soft disk edge
      k[(dy + r) * side + (dx + r)] = w;
      sum += w;
    }
  }
  for (double& v : k) v /= sum;
  return convolve(x, k, side, side);
}

Image apply_glass(const Image& x, double disp, double iters, Rng& rng) {
  const int d = static_cast<int>(std::lround(disp));
  const int n = static_cast<int>(std::lround(iters));
  if (d < 1 || n < 1) return x;
  Image out = x;
  for (int it = 0; it < n; ++it) {
    for (int y = 0; y < out.height(); ++y) {
      for (int px = 0; px < out.width(); ++px) {
        const int dx = static_cast<int>(rng.bounded(2 * d + 1)) - d;
        const int dy = static_cast<int>(rng.bounded(2 * d + 1)) - d;
        const int sx = std::clamp(px + dx, 0, out.width() - 1);
        const int sy = std::clamp(y + dy, 0, out.height() - 1);
        std::swap(out.at(px, y), out.at(sx, sy));
      }
    }
  }
  return gaussian_smooth(out, 0.5);
}

Image apply_zoom(const Image& x, double max_scale) {
  if (max_scale <= 1.0 + 1e-9) return x;
  const int copies = 6;
  const double cx = (x.width() - 1) / 2.0;
  const double cy = (x.height() - 1) / 2.0;
  Image out(x.width(), x.height());
  for (int c = 0; c < copies; ++c) {
    const double scale = 1.0 + (max_scale - 1.0) * c / (copies - 1);
    for (int y = 0; y < x.height(); ++y) {
      for (int px = 0; px < x.width(); ++px) {
        out.at(px, y) += x.sample(cx + (px - cx) / scale, cy + (y - cy) / scale);
      }
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] /= copies;
  return out;
}

Image apply_motion(const Image& x, double length, Rng& rng) {
  const double angle = rng.uniform(0.0, std::numbers::pi);
  const int taps = std::max(1, static_cast<int>(std::lround(length)));
  if (taps == 1) return x;
  const double ca = std::cos(angle), sa = std::sin(angle);
  Image out(x.width(), x.height());
  for (int y = 0; y < x.height(); ++y) {
    for (int px = 0; px < x.width(); ++px) {
      double acc = 0.0;
      for (int t = 0; t < taps; ++t) {
        const double off = t - (taps - 1) / 2.0;
        acc += x.sample(px + off * ca, y + off * sa);
      }
      out.at(px, y) = acc / taps;
    }
  }
  return out;
}

Image apply_snow(const Image& x, double density, double whitening, Rng& rng) {
  Image out = x;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double gate = rng.uniform();
    const double bright = rng.uniform(0.7, 1.0);
    if (gate < density) out.data()[i] = std::max(out.data()[i], bright);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = (1.0 - whitening) * out.data()[i] + whitening * 0.65;
  }
  return out;
}

Image apply_frost(const Image& x, double coverage, double blend, Rng& rng) {
  if (coverage < 1e-9 || blend < 1e-9) return x;
  Image field = smooth_field(x.width(), x.height(), rng);
  std::vector<double> sorted(field.data(), field.data() + field.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const int k = std::clamp(static_cast<int>(std::lround(coverage * static_cast<double>(field.size()))),
                           1, static_cast<int>(field.size()));
  const double threshold = sorted[k - 1];
  Image out = x;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (field.data()[i] >= threshold) {
      out.data()[i] = (1.0 - blend) * out.data()[i] + blend * 0.85;
    }
  }
  return out;
}

Image apply_fog(const Image& x, double t, Rng& rng) {
  Image field = smooth_field(x.width(), x.height(), rng);
  Image out = x;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double fog = std::clamp(0.7 + 0.15 * field.data()[i], 0.0, 1.0);
    out.data()[i] = (1.0 - t) * out.data()[i] + t * fog;
  }
  return out;
}

Image apply_brightness(const Image& x, double offset) {
  Image out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += offset;
  return out;
}

Image apply_contrast(const Image& x, double factor) {
  double mean = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mean += x.data()[i];
  mean /= static_cast<double>(x.size());
  Image out = x;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = mean + factor * (out.data()[i] - mean);
  }
  return out;
}

Image apply_elastic(const Image& x, double amplitude, Rng& rng) {
  if (amplitude < 1e-9) return x;
  Image dx = smooth_field(x.width(), x.height(), rng);
  Image dy = smooth_field(x.width(), x.height(), rng);
  Image out(x.width(), x.height());
  for (int y = 0; y < x.height(); ++y) {
    for (int px = 0; px < x.width(); ++px) {
      out.at(px, y) = x.sample(px + amplitude * dx.at(px, y), y + amplitude * dy.at(px, y));
    }
  }
  return out;
}

Image apply_pixelate(const Image& x, double block) {
  if (block <= 1.0 + 1e-12) return x;
  const int b0 = static_cast<int>(std::floor(block));
  const int b1 = static_cast<int>(std::ceil(block));
  const double frac = block - b0;
  Image lo = block_average(x, b0);
  if (b1 == b0 || frac < 1e-12) return lo;
  Image hi = block_average(x, b1);
  Image out(x.width(), x.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = (1.0 - frac) * lo.data()[i] + frac * hi.data()[i];
  }
  return out;
}

Image apply_jpeg(const Image& x, double delta) {
  if (delta < 1e-12) return x;
  const auto& c = dct_basis();
  // Pad to a multiple of 8 with border replication, transform, crop back.
  const int wpad = (x.width() + 7) / 8 * 8;
  const int hpad = (x.height() + 7) / 8 * 8;
  Image padded(wpad, hpad);
  for (int y = 0; y < hpad; ++y) {
    for (int px = 0; px < wpad; ++px) {
      padded.at(px, y) = x.at(std::min(px, x.width() - 1), std::min(y, x.height() - 1));
    }
  }
  for (int by = 0; by < hpad; by += 8) {
    for (int bx = 0; bx < wpad; bx += 8) {
      double block[8][8], coef[8][8], tmp[8][8];
      for (int y = 0; y < 8; ++y) {
        for (int px = 0; px < 8; ++px) block[y][px] = padded.at(bx + px, by + y);
      }
      // coef = C * block * C^T
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
          double acc = 0.0;
          for (int n = 0; n < 8; ++n) acc += c[i][n] * block[n][j];
          tmp[i][j] = acc;
        }
      }
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
          double acc = 0.0;
          for (int n = 0; n < 8; ++n) acc += tmp[i][n] * c[j][n];
          coef[i][j] = acc;
        }
      }
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
          const double step = (i == 0 && j == 0) ? delta * 0.25 : delta;  // finer DC step
          coef[i][j] = std::round(coef[i][j] / step) * step;
        }
      }
      // block = C^T * coef * C
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
          double acc = 0.0;
          for (int n = 0; n < 8; ++n) acc += c[n][i] * coef[n][j];
          tmp[i][j] = acc;
        }
      }
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
          double acc = 0.0;
          for (int n = 0; n < 8; ++n) acc += tmp[i][n] * c[n][j];
          padded.at(bx + j, by + i) = acc;
        }
      }
    }
  }
  Image out(x.width(), x.height());
  for (int y = 0; y < x.height(); ++y) {
    for (int px = 0; px < x.width(); ++px) out.at(px, y) = padded.at(px, y);
  }
  return out;
}

}  // namespace

std::string_view corruption_name(CorruptionKind kind) { return info_for(kind).name; }

CorruptionKind parse_corruption(std::string_view name) {
  for (const KindInfo& k : kind_table()) {
    if (k.name == name) return k.kind;
  }
  throw std::invalid_argument("corruption: unknown kind name: " + std::string(name));
}

const std::vector<CorruptionKind>& all_corruption_kinds() {
  static const std::vector<CorruptionKind> kinds = [] {
    std::vector<CorruptionKind> v;
    for (const KindInfo& k : kind_table()) v.push_back(k.kind);
    return v;
  }();
  return kinds;
}

const std::vector<CorruptionKind>& default_corruption_set() {
  static const std::vector<CorruptionKind> kinds = [] {
    std::vector<CorruptionKind> v;
    for (const KindInfo& k : kind_table()) {
      if (k.kind != CorruptionKind::MotionBlur) v.push_back(k.kind);
    }
    return v;
  }();
  return kinds;
}

const std::vector<double>& severity_params(CorruptionKind kind, int level) {
  if (level < 1 || level > 5) throw std::invalid_argument("severity_params: level must be 1..5");
  return info_for(kind).levels[level - 1];
}

std::vector<double> identity_params(CorruptionKind kind) { return info_for(kind).identity; }

std::vector<double> severity_params_at(CorruptionKind kind, double severity) {
  if (!(severity > 0.0) || severity > 5.0) {
    throw std::invalid_argument("severity out of range (0, 5]");
  }
  const KindInfo& info = info_for(kind);
  const int lo = static_cast<int>(std::floor(severity));
  const int hi = static_cast<int>(std::ceil(severity));
  const std::vector<double>& plo = lo == 0 ? info.identity : info.levels[lo - 1];
  const std::vector<double>& phi = info.levels[hi - 1];
  const double frac = severity - lo;
  std::vector<double> out(plo.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = plo[i] + frac * (phi[i] - plo[i]);
  return out;
}

std::string severity_table_text() {
  std::string out;
  out += "# Corruption severity parameter table.\n";
  out += "# One line per (kind, level): kind level param...\n";
  out += "# Level 0 is the implicit identity; fractional severities interpolate linearly.\n";
  out += "#\n";
  for (const KindInfo& k : kind_table()) {
    out += "# ";
    out += k.name;
    out += ": ";
    out += k.param_names;
    out += "\n";
  }
  for (const KindInfo& k : kind_table()) {
    for (int level = 1; level <= 5; ++level) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%s %d", std::string(k.name).c_str(), level);
      out += buf;
      for (double p : k.levels[level - 1]) {
        std::snprintf(buf, sizeof(buf), " %g", p);
        out += buf;
      }
      out += "\n";
    }
  }
  return out;
}

Image corrupt(const Image& x, CorruptionKind kind, double severity, std::uint64_t seed) {
  if (!(severity > 0.0) || severity > 5.0) {
    throw std::invalid_argument("corrupt: severity out of range (0, 5]");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("corrupt: input outside [0,1]");
  }
  const std::vector<double> p = severity_params_at(kind, severity);
  // The random stream depends on (seed, kind) but not on severity, so a
  // dynamic schedule modulates the intensity of one fixed realization.
  Rng rng = Rng::from(seed, static_cast<std::uint64_t>(kind));

  Image out;
  switch (kind) {
    case CorruptionKind::GaussianNoise: out = apply_gaussian_noise(x, p[0], rng); break;
    case CorruptionKind::ShotNoise: out = apply_shot_noise(x, p[0], rng); break;
    case CorruptionKind::ImpulseNoise: out = apply_impulse_noise(x, p[0], rng); break;
    case CorruptionKind::DefocusBlur: out = apply_defocus(x, p[0]); break;
    case CorruptionKind::GlassBlur: out = apply_glass(x, p[0], p[1], rng); break;
    case CorruptionKind::ZoomBlur: out = apply_zoom(x, p[0]); break;
    case CorruptionKind::Snow: out = apply_snow(x, p[0], p[1], rng); break;
    case CorruptionKind::Frost: out = apply_frost(x, p[0], p[1], rng); break;
    case CorruptionKind::Fog: out = apply_fog(x, p[0], rng); break;
    case CorruptionKind::Brightness: out = apply_brightness(x, p[0]); break;
    case CorruptionKind::Contrast: out = apply_contrast(x, p[0]); break;
    case CorruptionKind::ElasticTransform: out = apply_elastic(x, p[0], rng); break;
    case CorruptionKind::Pixelate: out = apply_pixelate(x, p[0]); break;
    case CorruptionKind::JpegLike: out = apply_jpeg(x, p[0]); break;
    case CorruptionKind::MotionBlur: out = apply_motion(x, p[0], rng); break;
    default: throw std::invalid_argument("corrupt: unknown kind");
  }
  out.clamp01();
  return out;
}

}  // namespace ttalab
