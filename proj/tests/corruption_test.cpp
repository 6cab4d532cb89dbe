#include "ttalab/corruption.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include "ttalab/rng.hpp"

namespace ttalab {
namespace {

Image random_image(std::uint64_t seed, int w = 16, int h = 16) {
  Rng rng = Rng::from(seed, 7);
  Image x(w, h);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
  return x;
}

double max_abs_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

TEST(Corruption, NamesRoundTrip) {
  EXPECT_EQ(all_corruption_kinds().size(), static_cast<std::size_t>(kCorruptionKindCount));
  for (CorruptionKind k : all_corruption_kinds()) {
    EXPECT_EQ(parse_corruption(corruption_name(k)), k);
  }
  EXPECT_EQ(corruption_name(CorruptionKind::GaussianNoise), "gaussian-noise");
  EXPECT_EQ(corruption_name(CorruptionKind::JpegLike), "jpeg-like");
  EXPECT_THROW(parse_corruption("sepia"), std::invalid_argument);
  EXPECT_EQ(all_corruption_kinds().front(), CorruptionKind::GaussianNoise);
  EXPECT_EQ(all_corruption_kinds().back(), CorruptionKind::MotionBlur);
}

TEST(Corruption, DefaultSetExcludesMotionBlur) {
  const auto& set = default_corruption_set();
  EXPECT_EQ(set.size(), 14u);
  for (CorruptionKind k : set) EXPECT_NE(k, CorruptionKind::MotionBlur);
}

TEST(Corruption, SeverityTableShape) {
  for (CorruptionKind k : all_corruption_kinds()) {
    const std::size_t arity = identity_params(k).size();
    for (int level = 1; level <= 5; ++level) {
      EXPECT_EQ(severity_params(k, level).size(), arity) << corruption_name(k);
    }
  }
  EXPECT_THROW(severity_params(CorruptionKind::Fog, 0), std::invalid_argument);
  EXPECT_THROW(severity_params(CorruptionKind::Fog, 6), std::invalid_argument);
}

TEST(Corruption, GaussianTableValues) {
  const std::vector<double> expected = {0.04, 0.08, 0.12, 0.18, 0.26};
  for (int level = 1; level <= 5; ++level) {
    ASSERT_EQ(severity_params(CorruptionKind::GaussianNoise, level).size(), 1u);
    EXPECT_DOUBLE_EQ(severity_params(CorruptionKind::GaussianNoise, level)[0],
                     expected[level - 1]);
  }
}

TEST(Corruption, FractionalSeverityInterpolates) {
  // Between integer levels: midpoint of the two parameter rows.
  const auto mid = severity_params_at(CorruptionKind::GaussianNoise, 1.5);
  EXPECT_NEAR(mid[0], 0.06, 1e-12);
  // Below level 1: interpolates toward the identity parameters.
  const auto low = severity_params_at(CorruptionKind::Contrast, 0.5);
  EXPECT_NEAR(low[0], 0.875, 1e-12);
  EXPECT_THROW(severity_params_at(CorruptionKind::Fog, 0.0), std::invalid_argument);
  EXPECT_THROW(severity_params_at(CorruptionKind::Fog, 5.1), std::invalid_argument);
}

TEST(Corruption, ZeroSeverityLimit) {
  const Image x = random_image(11);
  const Image y = corrupt(x, CorruptionKind::GaussianNoise, 1e-6, 42);
  EXPECT_LE(max_abs_diff(x, y), 1e-6);
  for (CorruptionKind k : all_corruption_kinds()) {
    const Image z = corrupt(x, k, 1e-7, 42);
    EXPECT_LE(max_abs_diff(x, z), 1e-6) << corruption_name(k);
  }
}

TEST(Corruption, BrightnessConstantFieldExactOffset) {
  const Image half(16, 16, 0.5);
  for (int level = 1; level <= 5; ++level) {
    const double offset = severity_params(CorruptionKind::Brightness, level)[0];
    const Image y = corrupt(half, CorruptionKind::Brightness, level, 3);
    // All pixels stay identical, so the mean shift equals the pixel shift.
    for (std::size_t i = 1; i < y.size(); ++i) ASSERT_EQ(y.data()[i], y.data()[0]);
    EXPECT_DOUBLE_EQ(y.data()[0] - 0.5, offset);
  }
}

TEST(Corruption, PixelateMatchesNaiveBlockAverage) {
  const Image x = random_image(29);
  const Image y = corrupt(x, CorruptionKind::Pixelate, 5.0, 17);
  const int block = 4;  // severity-5 table value
  Image oracle(x.width(), x.height());
  for (int by = 0; by < x.height(); by += block) {
    for (int bx = 0; bx < x.width(); bx += block) {
      double acc = 0.0;
      for (int y2 = by; y2 < by + block; ++y2) {
        for (int x2 = bx; x2 < bx + block; ++x2) acc += x.at(x2, y2);
      }
      acc /= block * block;
      for (int y2 = by; y2 < by + block; ++y2) {
        for (int x2 = bx; x2 < bx + block; ++x2) oracle.at(x2, y2) = acc;
      }
    }
  }
  EXPECT_LE(max_abs_diff(y, oracle), 1e-12);
}

TEST(Corruption, DeterministicGivenArguments) {
  const Image x = random_image(5);
  for (CorruptionKind k : all_corruption_kinds()) {
    for (double s : {1.0, 2.5, 5.0}) {
      const Image a = corrupt(x, k, s, 1234);
      const Image b = corrupt(x, k, s, 1234);
      EXPECT_TRUE(a == b) << corruption_name(k) << " severity " << s;
    }
  }
}

TEST(Corruption, SeedChangesStochasticKinds) {
  const Image x = random_image(6);
  for (CorruptionKind k : {CorruptionKind::GaussianNoise, CorruptionKind::ShotNoise,
                           CorruptionKind::ImpulseNoise, CorruptionKind::GlassBlur,
                           CorruptionKind::Snow, CorruptionKind::Frost, CorruptionKind::Fog,
                           CorruptionKind::ElasticTransform, CorruptionKind::MotionBlur}) {
    const Image a = corrupt(x, k, 5.0, 1);
    const Image b = corrupt(x, k, 5.0, 2);
    EXPECT_FALSE(a == b) << corruption_name(k);
  }
}

TEST(Corruption, RangeSafety) {
  for (std::uint64_t i = 0; i < 3; ++i) {
    Image x = random_image(100 + i);
    if (i == 1) x = Image(16, 16, 0.0);
    if (i == 2) x = Image(16, 16, 1.0);
    for (CorruptionKind k : all_corruption_kinds()) {
      for (double s : {0.6, 1.0, 2.0, 3.7, 5.0}) {
        const Image y = corrupt(x, k, s, i);
        for (std::size_t j = 0; j < y.size(); ++j) {
          ASSERT_TRUE(std::isfinite(y.data()[j]));
          ASSERT_GE(y.data()[j], 0.0);
          ASSERT_LE(y.data()[j], 1.0);
        }
      }
    }
  }
}

TEST(Corruption, SeverityMonotonicity) {
  // Noise, blur, and contrast families: mean L2 distortion over 100 seeded
  // samples is non-decreasing in the integer severity level.
  const std::vector<CorruptionKind> families = {
      CorruptionKind::GaussianNoise, CorruptionKind::ShotNoise, CorruptionKind::ImpulseNoise,
      CorruptionKind::DefocusBlur,   CorruptionKind::GlassBlur, CorruptionKind::ZoomBlur,
      CorruptionKind::MotionBlur,    CorruptionKind::Contrast,
  };
  for (CorruptionKind k : families) {
    double prev = -1.0;
    for (int s = 1; s <= 5; ++s) {
      double mean = 0.0;
      for (std::uint64_t i = 0; i < 100; ++i) {
        const Image x = random_image(1000 + i);
        mean += l2_distance(x, corrupt(x, k, s, i));
      }
      mean /= 100.0;
      EXPECT_GE(mean, prev) << corruption_name(k) << " severity " << s;
      prev = mean;
    }
  }
}

TEST(Corruption, InputValidation) {
  Image x = random_image(1);
  EXPECT_THROW(corrupt(x, CorruptionKind::Fog, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(corrupt(x, CorruptionKind::Fog, -1.0, 1), std::invalid_argument);
  EXPECT_THROW(corrupt(x, CorruptionKind::Fog, 5.0001, 1), std::invalid_argument);
  x.at(3, 3) = 1.5;
  EXPECT_THROW(corrupt(x, CorruptionKind::Fog, 1.0, 1), std::invalid_argument);
  x.at(3, 3) = -0.5;
  EXPECT_THROW(corrupt(x, CorruptionKind::Fog, 1.0, 1), std::invalid_argument);
}

TEST(Corruption, TableFileMatchesBuiltins) {
  const std::string path = std::string(TTALAB_DATA_DIR) + "/corruption_params.txt";
  std::ifstream in(path, std::ios::binary);
  ASSERT_TRUE(in.good()) << "missing " << path;
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(buf.str(), severity_table_text());
}

TEST(Schedule, StaticAlwaysLevel) {
  const SeveritySchedule s = SeveritySchedule::static_level(5);
  for (int t : {0, 1, 7, 100, 100000}) EXPECT_DOUBLE_EQ(severity_at(s, t), 5.0);
  EXPECT_THROW(SeveritySchedule::static_level(0), std::invalid_argument);
  EXPECT_THROW(SeveritySchedule::static_level(6), std::invalid_argument);
}

TEST(Schedule, DynamicSineForm) {
  const SeveritySchedule s =
      SeveritySchedule::dynamic(3, std::numbers::pi / 2.0, 0.0);
  EXPECT_DOUBLE_EQ(severity_at(s, 0), 0.0);
  EXPECT_DOUBLE_EQ(severity_at(s, 1), 3.0);
  // |sin| keeps the value in [0, s] everywhere.
  const SeveritySchedule d = SeveritySchedule::dynamic(4, 0.7, 0.3);
  for (int t = 0; t < 200; ++t) {
    const double v = severity_at(d, t);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 4.0);
  }
}

TEST(Schedule, LiteralSignForm) {
  const SeveritySchedule s = SeveritySchedule::dynamic(5, 0.19634954084936207, 0.0, true);
  EXPECT_DOUBLE_EQ(severity_at(s, 0), 0.0);
  for (int t : {1, 2, 31, 32, 500}) EXPECT_DOUBLE_EQ(severity_at(s, t), 5.0);
}

TEST(Schedule, DefaultsAndValidation) {
  const SeveritySchedule d = SeveritySchedule::dynamic(5, 2.0 * std::numbers::pi / 32.0, 0.0);
  EXPECT_NEAR(d.omega, 0.19634954084936207, 1e-18);
  EXPECT_THROW(severity_at(d, -1), std::invalid_argument);
  EXPECT_THROW(SeveritySchedule::dynamic(0, 1.0, 0.0), std::invalid_argument);
  SeveritySchedule bad;
  bad.level = 9;
  EXPECT_THROW(validate_schedule(bad), std::invalid_argument);
}

}  // namespace
}  // namespace ttalab
