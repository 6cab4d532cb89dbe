#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ttalab/pattern.hpp"

namespace ttalab {

struct ToyDatasetConfig {
  int classes = 21;              // at most kPatternClasses
  int tracklets_per_class = 40;  // split 50/30/20 into train/val/test
  int frames_per_tracklet = 64;
  double drift = 1.0;
  int width = 16;
  int height = 16;
  std::uint64_t seed = 0;
};

struct ToyDataset {
  ToyDatasetConfig config;
  std::vector<Tracklet> train;
  std::vector<Tracklet> val;
  std::vector<Tracklet> test;
};

void validate_dataset_config(const ToyDatasetConfig& config);

// Deterministic synthetic tracklet corpus; per-class tracklets are assigned
// to splits in generation order (tracklets are exchangeable by construction).
ToyDataset make_toy_dataset(const ToyDatasetConfig& config);

// Persists <dir>/manifest.txt (documented text format: one header block plus
// one line per tracklet) and <dir>/frames.ttab (named-array container shared
// with model checkpoints).
void save_dataset(const ToyDataset& ds, const std::string& dir);
ToyDataset load_dataset(const std::string& dir);

}  // namespace ttalab
