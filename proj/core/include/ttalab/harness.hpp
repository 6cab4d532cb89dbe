#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ttalab/adapter.hpp"
#include "ttalab/dataset.hpp"
#include "ttalab/stream.hpp"

namespace ttalab {

// One grid cell's outcome. error_rate counts online mistakes exactly:
// every prediction is scored against the held label at arrival time.
struct RunReport {
  Method method = Method::Source;
  MemInit mem_init = MemInit::Empty;
  Scenario scenario = Scenario::FrameWiseIID;
  CorruptionKind corruption = CorruptionKind::GaussianNoise;
  double gamma = 0.0;
  int batch_size = 0;
  std::uint64_t seed = 0;
  double error_rate = 0.0;
  int n_samples = 0;
  double wall_time = 0.0;  // seconds; never serialized (schedule-dependent)
  std::string error;       // non-empty when the cell failed
  bool failed = false;
};

// One axis-aligned block of cells. A sweep is a union of blocks; invalid
// combinations (non-memory methods with non-empty init, γ on iid scenarios)
// are skipped during expansion rather than rejected.
struct GridSpec {
  std::vector<Method> methods;
  std::vector<MemInit> mem_inits;
  std::vector<Scenario> scenarios;
  std::vector<CorruptionKind> corruptions;
  std::vector<double> gammas;      // consumed by tracklet-noniid cells only
  std::vector<int> batch_sizes;
  std::vector<std::uint64_t> seeds;
  ToyDatasetConfig dataset;
  AdapterHyper hyper;
  double severity = 5.0;
  bool dynamic_severity = false;   // severity_at(|sin|) schedule instead of static
};

void validate_grid(const GridSpec& g);

struct AdapterSpec {
  Method method = Method::Source;
  AdapterHyper hyper;
  std::uint64_t seed = 0;
};

// Identity of one expanded cell; orders reports canonically.
struct Cell {
  Method method;
  MemInit mem_init;
  Scenario scenario;
  CorruptionKind corruption;
  double gamma;
  int batch_size;
  std::uint64_t seed;
  double severity;
  bool dynamic_severity;
  AdapterHyper hyper;
};

// Mini-batch cross-entropy training with running-statistic updates. Throws
// unless the clean test error reaches threshold within `epochs`. Appends the
// mean training loss of each epoch to `epoch_losses` when given.
Model train_source_model(const ToyDataset& ds, int epochs, double lr, Rng& rng,
                         std::vector<double>* epoch_losses = nullptr,
                         double error_threshold = 0.05);

// Clean-split error of a trained model (Running mode, batched evaluation).
double evaluate_error(const Model& m, const std::vector<Tracklet>& split);

// Builds the stream for the cell, runs a fresh adapter over it in order,
// and scores predictions online.
RunReport run_one(const Model& model, const ToyDataset& ds, const AdapterSpec& adapter_spec,
                  const ScenarioConfig& stream_config);

// Expands blocks into the canonical deduplicated cell list.
std::vector<Cell> expand_cells(const std::vector<GridSpec>& blocks);

// Runs every cell with a bounded worker pool. Results come back in canonical
// cell order no matter the schedule; per-cell failures are captured in the
// report rather than thrown.
std::vector<RunReport> run_grid(const Model& model, const ToyDataset& ds,
                                const std::vector<GridSpec>& blocks, int parallelism);

// Artifact emission. CSV is the source of truth; the other formats are
// derived views. All numbers print shortest-round-trip so parsing any
// artifact back reproduces the exact doubles.
std::string reports_to_csv(const std::vector<RunReport>& reports);
std::vector<RunReport> reports_from_csv(const std::string& csv);

// Per-corruption table grouped Noise | Blur | Weather | Digital with a
// trailing seed-mean average column; one row per (method, mem_init). All
// reports must share scenario, batch size, and γ.
std::string reports_to_md_table(const std::vector<RunReport>& reports);

// Error-rate line chart, one polyline per (method, mem_init) series.
// x_axis is "gamma" (log-scale) or "batch_size"; y is the seed-and-
// corruption-mean error rate.
std::string reports_to_svg_lines(const std::vector<RunReport>& reports,
                                 const std::string& x_axis);

}  // namespace ttalab
