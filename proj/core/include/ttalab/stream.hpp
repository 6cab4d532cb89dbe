#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "ttalab/corruption.hpp"
#include "ttalab/dataset.hpp"
#include "ttalab/matrix.hpp"

namespace ttalab {

enum class Scenario {
  FrameWiseIID,
  TrackletWiseIID,
  TrackletWiseNonIID,
  TrackletMimic,
};

std::string_view scenario_name(Scenario s);
Scenario parse_scenario(std::string_view name);
const std::vector<Scenario>& all_scenarios();

struct ScenarioConfig {
  Scenario scenario = Scenario::TrackletWiseIID;
  double gamma = 0.0;  // Dirichlet concentration; set iff scenario is NonIID
  CorruptionKind corruption = CorruptionKind::GaussianNoise;
  SeveritySchedule schedule = SeveritySchedule::static_level(5);
  int batch_size = 64;
  std::uint64_t seed = 0;
  int num_slots = 0;  // NonIID slot count; 0 means one slot per class
};

void validate_scenario_config(const ScenarioConfig& cfg);

struct Batch {
  Matrix x;  // rows x feature_dim, corrupted features
  std::vector<int> labels;
  std::vector<int> tracklet_ids;
  std::vector<int> frame_index;  // within-tracklet time of each row
  int rows() const { return static_cast<int>(labels.size()); }
};

struct Stream {
  std::vector<Batch> batches;
  std::size_t total_rows = 0;
  int feature_dim = 0;
};

// K independent Gamma(gamma, 1) draws normalized by their sum; small gamma
// goes through log-space draws so the result stays a valid distribution.
std::vector<double> dirichlet(double gamma, int k, Rng& rng);

// Slot construction behind the non-iid ordering: per class, a Dir(gamma) draw
// over num_slots distributes that class's tracklets proportionally (largest
// remainder); within a slot, class runs stay contiguous and both the run
// order and each run's content are shuffled.
std::vector<std::vector<std::size_t>> noniid_slot_assignment(const std::vector<int>& labels,
                                                             double gamma, int num_slots,
                                                             Rng& rng);

// Concatenated slots; a permutation of 0..tracklets.size()-1.
std::vector<std::size_t> order_tracklets_noniid(const std::vector<Tracklet>& tracklets,
                                                double gamma, int num_slots, Rng& rng);

// Ordered corrupted batches over the dataset's test split.
Stream build_stream(const ToyDataset& ds, const ScenarioConfig& cfg);

}  // namespace ttalab
