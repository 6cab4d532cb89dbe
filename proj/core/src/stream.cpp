#include "ttalab/stream.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace ttalab {

std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::FrameWiseIID: return "framewise-iid";
    case Scenario::TrackletWiseIID: return "tracklet-iid";
    case Scenario::TrackletWiseNonIID: return "tracklet-noniid";
    case Scenario::TrackletMimic: return "tracklet-mimic";
  }
  throw std::invalid_argument("scenario_name: unknown scenario");
}

Scenario parse_scenario(std::string_view name) {
  for (Scenario s : all_scenarios()) {
    if (scenario_name(s) == name) return s;
  }
  throw std::invalid_argument("parse_scenario: unknown scenario: " + std::string(name));
}

const std::vector<Scenario>& all_scenarios() {
  static const std::vector<Scenario> v = {
      Scenario::FrameWiseIID,
      Scenario::TrackletWiseIID,
      Scenario::TrackletWiseNonIID,
      Scenario::TrackletMimic,
  };
  return v;
}

void validate_scenario_config(const ScenarioConfig& cfg) {
  const bool noniid = cfg.scenario == Scenario::TrackletWiseNonIID;
  if (noniid && !(cfg.gamma > 0.0)) {
    throw std::invalid_argument("scenario config: NonIID requires gamma > 0");
  }
  if (!noniid && cfg.gamma != 0.0) {
    throw std::invalid_argument("scenario config: gamma is only valid for NonIID");
  }
  if (cfg.batch_size < 1) throw std::invalid_argument("scenario config: batch_size must be >= 1");
  if (cfg.num_slots < 0) throw std::invalid_argument("scenario config: negative num_slots");
  validate_schedule(cfg.schedule);
}

std::vector<double> dirichlet(double gamma, int k, Rng& rng) {
  if (!(gamma > 0.0)) throw std::invalid_argument("dirichlet: gamma must be > 0");
  if (k < 2) throw std::invalid_argument("dirichlet: need k >= 2");
  std::vector<double> p(static_cast<std::size_t>(k));
  if (gamma < 0.05) {
    // Tiny concentration: Gamma draws underflow, so normalize in log space.
    for (double& v : p) v = rng.log_gamma(gamma);
    const double m = *std::max_element(p.begin(), p.end());
    for (double& v : p) v = std::exp(v - m);
  } else {
    for (double& v : p) v = rng.gamma(gamma);
  }
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v /= sum;
  return p;
}

std::vector<std::vector<std::size_t>> noniid_slot_assignment(const std::vector<int>& labels,
                                                             double gamma, int num_slots,
                                                             Rng& rng) {
  if (labels.empty()) throw std::invalid_argument("noniid: empty tracklet list");
  if (num_slots < 1) throw std::invalid_argument("noniid: num_slots must be >= 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("noniid: gamma must be > 0");

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  // slots[s] holds contiguous per-class runs.
  std::vector<std::vector<std::vector<std::size_t>>> runs(static_cast<std::size_t>(num_slots));
  for (auto& [cls, members] : by_class) {
    rng.shuffle(members);
    std::vector<double> p =
        num_slots == 1 ? std::vector<double>{1.0} : dirichlet(gamma, num_slots, rng);
    // Largest-remainder quotas; remainder ties resolve to the lower slot.
    const std::size_t n = members.size();
    std::vector<std::size_t> quota(p.size());
    std::vector<std::pair<double, int>> rem;
    std::size_t assigned = 0;
    for (int s = 0; s < num_slots; ++s) {
      const double exact = static_cast<double>(n) * p[static_cast<std::size_t>(s)];
      quota[static_cast<std::size_t>(s)] = static_cast<std::size_t>(std::floor(exact));
      assigned += quota[static_cast<std::size_t>(s)];
      rem.push_back({exact - std::floor(exact), s});
    }
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (std::size_t j = 0; assigned < n; ++j, ++assigned) {
      quota[static_cast<std::size_t>(rem[j % rem.size()].second)] += 1;
    }
    std::size_t next = 0;
    for (int s = 0; s < num_slots; ++s) {
      const std::size_t q = quota[static_cast<std::size_t>(s)];
      if (q == 0) continue;
      runs[static_cast<std::size_t>(s)].emplace_back(members.begin() + next,
                                                     members.begin() + next + q);
      next += q;
    }
  }

  std::vector<std::vector<std::size_t>> slots(static_cast<std::size_t>(num_slots));
  for (int s = 0; s < num_slots; ++s) {
    auto& slot_runs = runs[static_cast<std::size_t>(s)];
    rng.shuffle(slot_runs);
    for (const auto& run : slot_runs) {
      slots[static_cast<std::size_t>(s)].insert(slots[static_cast<std::size_t>(s)].end(),
                                                run.begin(), run.end());
    }
  }
  return slots;
}

std::vector<std::size_t> order_tracklets_noniid(const std::vector<Tracklet>& tracklets,
                                                double gamma, int num_slots, Rng& rng) {
  std::vector<int> labels;
  labels.reserve(tracklets.size());
  for (const Tracklet& t : tracklets) labels.push_back(t.label);
  std::vector<std::size_t> out;
  out.reserve(tracklets.size());
  for (const auto& slot : noniid_slot_assignment(labels, gamma, num_slots, rng)) {
    out.insert(out.end(), slot.begin(), slot.end());
  }
  return out;
}

namespace {

Image corrupted_frame(const Tracklet& t, int frame_idx, const ScenarioConfig& cfg) {
  const double severity = severity_at(cfg.schedule, frame_idx);
  if (severity <= 0.0) return t.frames[static_cast<std::size_t>(frame_idx)];
  return corrupt(t.frames[static_cast<std::size_t>(frame_idx)], cfg.corruption, severity,
                 t.corruption_seed);
}

struct RowRef {
  const Tracklet* tracklet;
  int frame_idx;
};

Stream batch_rows(const std::vector<RowRef>& rows, const ScenarioConfig& cfg, int dim) {
  Stream out;
  out.feature_dim = dim;
  for (std::size_t start = 0; start < rows.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
    const std::size_t end = std::min(rows.size(), start + static_cast<std::size_t>(cfg.batch_size));
    Batch b;
    b.x = Matrix(static_cast<int>(end - start), dim);
    for (std::size_t i = start; i < end; ++i) {
      const Image img = corrupted_frame(*rows[i].tracklet, rows[i].frame_idx, cfg);
      std::copy(img.data(), img.data() + img.size(), b.x.row(static_cast<int>(i - start)));
      b.labels.push_back(rows[i].tracklet->label);
      b.tracklet_ids.push_back(rows[i].tracklet->id);
      b.frame_index.push_back(rows[i].frame_idx);
    }
    out.total_rows += b.labels.size();
    out.batches.push_back(std::move(b));
  }
  return out;
}

}  // namespace

Stream build_stream(const ToyDataset& ds, const ScenarioConfig& cfg) {
  validate_scenario_config(cfg);
  const std::vector<Tracklet>& test = ds.test;
  if (test.empty()) throw std::invalid_argument("build_stream: empty test split");
  const int dim = ds.config.width * ds.config.height;

  Rng frame_rng = Rng::from(cfg.seed, 1);
  Rng order_rng = Rng::from(cfg.seed, 2);

  switch (cfg.scenario) {
    case Scenario::FrameWiseIID:
    case Scenario::TrackletMimic: {
      // One uniformly chosen frame per tracklet, globally shuffled. Mimic
      // replays the exact frame-wise sample sequence, so the two scenarios
      // score identical sample sets.
      std::vector<RowRef> rows;
      rows.reserve(test.size());
      for (const Tracklet& t : test) {
        rows.push_back({&t, static_cast<int>(frame_rng.bounded(t.frames.size()))});
      }
      order_rng.shuffle(rows);
      if (cfg.scenario == Scenario::FrameWiseIID) return batch_rows(rows, cfg, dim);

      Stream out;
      out.feature_dim = dim;
      for (const RowRef& r : rows) {
        const Image img = corrupted_frame(*r.tracklet, r.frame_idx, cfg);
        Batch b;
        b.x = Matrix(cfg.batch_size, dim);
        for (int i = 0; i < cfg.batch_size; ++i) {
          std::copy(img.data(), img.data() + img.size(), b.x.row(i));
          b.labels.push_back(r.tracklet->label);
          b.tracklet_ids.push_back(r.tracklet->id);
          b.frame_index.push_back(r.frame_idx);
        }
        out.total_rows += b.labels.size();
        out.batches.push_back(std::move(b));
      }
      return out;
    }
    case Scenario::TrackletWiseIID:
    case Scenario::TrackletWiseNonIID: {
      std::vector<std::size_t> order;
      if (cfg.scenario == Scenario::TrackletWiseIID) {
        order.resize(test.size());
        std::iota(order.begin(), order.end(), 0);
        order_rng.shuffle(order);
      } else {
        const int slots = cfg.num_slots > 0 ? cfg.num_slots : ds.config.classes;
        order = order_tracklets_noniid(test, cfg.gamma, slots, order_rng);
      }
      std::vector<RowRef> rows;
      for (std::size_t idx : order) {
        const Tracklet& t = test[idx];
        for (int f = 0; f < static_cast<int>(t.frames.size()); ++f) rows.push_back({&t, f});
      }
      return batch_rows(rows, cfg, dim);
    }
  }
  throw std::invalid_argument("build_stream: unknown scenario");
}

}  // namespace ttalab
