#include <algorithm>
#include <atomic>
#include <chrono>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "ttalab/harness.hpp"

namespace ttalab {
namespace {

SeveritySchedule cell_schedule(double severity, bool dynamic) {
  const int level = static_cast<int>(severity);
  if (dynamic) return SeveritySchedule::dynamic(level, SeveritySchedule{}.omega, 0.0);
  return SeveritySchedule::static_level(level);
}

ScenarioConfig cell_stream_config(const Cell& c) {
  ScenarioConfig cfg;
  cfg.scenario = c.scenario;
  cfg.gamma = c.gamma;
  cfg.corruption = c.corruption;
  cfg.schedule = cell_schedule(c.severity, c.dynamic_severity);
  cfg.batch_size = c.batch_size;
  cfg.seed = c.seed;
  return cfg;
}

// Orders cells canonically; hyper fields are tiebreakers so distinct cells
// with the same report identity still sort deterministically.
auto cell_key(const Cell& c) {
  return std::make_tuple(static_cast<int>(c.scenario), static_cast<int>(c.corruption),
                         c.gamma, c.batch_size, c.seed, static_cast<int>(c.method),
                         static_cast<int>(c.mem_init), c.severity, c.dynamic_severity,
                         c.hyper.lr, c.hyper.memory_capacity, c.hyper.ema_decay,
                         c.hyper.bn_blend, c.hyper.adapt_on_input);
}

// Cells sharing one stream: everything that affects build_stream.
auto stream_key(const Cell& c) {
  return std::make_tuple(static_cast<int>(c.scenario), static_cast<int>(c.corruption),
                         c.gamma, c.batch_size, c.seed, c.severity, c.dynamic_severity);
}

RunReport cell_report(const Cell& c) {
  RunReport r;
  r.method = c.method;
  r.mem_init = c.mem_init;
  r.scenario = c.scenario;
  r.corruption = c.corruption;
  r.gamma = c.gamma;
  r.batch_size = c.batch_size;
  r.seed = c.seed;
  return r;
}

RunReport run_cell_on_stream(const Model& model, const ToyDataset& ds, const Cell& c,
                             const Stream& stream) {
  RunReport rep = cell_report(c);
  const auto t0 = std::chrono::steady_clock::now();
  AdapterHyper hyper = c.hyper;
  hyper.mem_init = c.mem_init;
  Adapter adapter(c.method, model, hyper, c.seed, &ds);
  int wrong = 0, total = 0;
  for (const Batch& b : stream.batches) {
    const std::vector<int> preds = adapter.predict_and_adapt(b.x);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      wrong += preds[i] != b.labels[i] ? 1 : 0;
    }
    total += b.rows();
  }
  rep.error_rate = static_cast<double>(wrong) / static_cast<double>(total);
  rep.n_samples = total;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace

void validate_grid(const GridSpec& g) {
  if (g.methods.empty() || g.mem_inits.empty() || g.scenarios.empty() ||
      g.corruptions.empty() || g.batch_sizes.empty() || g.seeds.empty()) {
    throw std::invalid_argument("grid: empty axis");
  }
  const bool has_noniid =
      std::find(g.scenarios.begin(), g.scenarios.end(), Scenario::TrackletWiseNonIID) !=
      g.scenarios.end();
  if (has_noniid && g.gammas.empty()) {
    throw std::invalid_argument("grid: tracklet-noniid requires a gamma list");
  }
  for (double gamma : g.gammas) {
    if (!(gamma > 0.0)) throw std::invalid_argument("grid: gamma must be positive");
  }
  for (int b : g.batch_sizes) {
    if (b < 1) throw std::invalid_argument("grid: batch size must be >= 1");
  }
  if (!(g.severity > 0.0 && g.severity <= 5.0)) {
    throw std::invalid_argument("grid: severity must be in (0,5]");
  }
  validate_dataset_config(g.dataset);
}

RunReport run_one(const Model& model, const ToyDataset& ds, const AdapterSpec& adapter_spec,
                  const ScenarioConfig& stream_config) {
  validate_scenario_config(stream_config);
  RunReport rep;
  rep.method = adapter_spec.method;
  rep.mem_init = adapter_spec.hyper.mem_init;
  rep.scenario = stream_config.scenario;
  rep.corruption = stream_config.corruption;
  rep.gamma = stream_config.gamma;
  rep.batch_size = stream_config.batch_size;
  rep.seed = stream_config.seed;
  const auto t0 = std::chrono::steady_clock::now();
  const Stream stream = build_stream(ds, stream_config);
  Adapter adapter(adapter_spec.method, model, adapter_spec.hyper, adapter_spec.seed, &ds);
  int wrong = 0, total = 0;
  for (const Batch& b : stream.batches) {
    const std::vector<int> preds = adapter.predict_and_adapt(b.x);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      wrong += preds[i] != b.labels[i] ? 1 : 0;
    }
    total += b.rows();
  }
  rep.error_rate = static_cast<double>(wrong) / static_cast<double>(total);
  rep.n_samples = total;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::vector<Cell> expand_cells(const std::vector<GridSpec>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("expand_cells: no grid blocks");
  std::vector<Cell> cells;
  for (const GridSpec& g : blocks) {
    validate_grid(g);
    for (Scenario sc : g.scenarios) {
      const std::vector<double> gammas =
          sc == Scenario::TrackletWiseNonIID ? g.gammas : std::vector<double>{0.0};
      for (CorruptionKind kind : g.corruptions) {
        for (double gamma : gammas) {
          for (int b : g.batch_sizes) {
            for (std::uint64_t seed : g.seeds) {
              for (Method m : g.methods) {
                // Non-memory methods carry no bank: only the empty init applies.
                std::vector<MemInit> inits;
                if (method_owns_memory(m)) {
                  inits = g.mem_inits;
                } else if (std::find(g.mem_inits.begin(), g.mem_inits.end(),
                                     MemInit::Empty) != g.mem_inits.end()) {
                  inits = {MemInit::Empty};
                }
                for (MemInit init : inits) {
                  Cell c;
                  c.method = m;
                  c.mem_init = init;
                  c.scenario = sc;
                  c.corruption = kind;
                  c.gamma = gamma;
                  c.batch_size = b;
                  c.seed = seed;
                  c.severity = g.severity;
                  c.dynamic_severity = g.dynamic_severity;
                  c.hyper = g.hyper;
                  cells.push_back(c);
                }
              }
            }
          }
        }
      }
    }
  }
  std::sort(cells.begin(), cells.end(),
            [](const Cell& a, const Cell& b) { return cell_key(a) < cell_key(b); });
  cells.erase(std::unique(cells.begin(), cells.end(),
                          [](const Cell& a, const Cell& b) { return cell_key(a) == cell_key(b); }),
              cells.end());
  return cells;
}

std::vector<RunReport> run_grid(const Model& model, const ToyDataset& ds,
                                const std::vector<GridSpec>& blocks, int parallelism) {
  if (parallelism < 1) throw std::invalid_argument("run_grid: parallelism must be >= 1");
  for (const GridSpec& g : blocks) {
    const ToyDatasetConfig &a = g.dataset, &b = ds.config;
    if (a.classes != b.classes || a.tracklets_per_class != b.tracklets_per_class ||
        a.frames_per_tracklet != b.frames_per_tracklet || a.drift != b.drift ||
        a.width != b.width || a.height != b.height || a.seed != b.seed) {
      throw std::invalid_argument("run_grid: dataset does not match grid spec");
    }
  }
  const std::vector<Cell> cells = expand_cells(blocks);

  // Cells sharing a stream form one unit of work so the stream is built once.
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0 && stream_key(cells[i]) == stream_key(cells[i - 1])) {
      groups.back().push_back(i);
    } else {
      groups.push_back({i});
    }
  }

  std::vector<RunReport> out(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t g = next.fetch_add(1);
      if (g >= groups.size()) return;
      Stream stream;
      bool stream_ok = false;
      std::string stream_error;
      try {
        stream = build_stream(ds, cell_stream_config(cells[groups[g].front()]));
        stream_ok = true;
      } catch (const std::exception& e) {
        stream_error = e.what();
      }
      for (const std::size_t idx : groups[g]) {
        if (!stream_ok) {
          out[idx] = cell_report(cells[idx]);
          out[idx].failed = true;
          out[idx].error = stream_error;
          continue;
        }
        try {
          out[idx] = run_cell_on_stream(model, ds, cells[idx], stream);
        } catch (const std::exception& e) {
          out[idx] = cell_report(cells[idx]);
          out[idx].failed = true;
          out[idx].error = e.what();
        }
      }
    }
  };
  if (parallelism == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < parallelism; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return out;
}

}  // namespace ttalab
