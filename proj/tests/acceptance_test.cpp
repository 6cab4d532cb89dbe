// Acceptance gate: twelve checks, one PASS/FAIL line each, non-zero exit if
// any fails. Tolerances and runtime budgets are pinned in code next to each
// check. The binary drives the installed CLI end to end for data generation,
// training, and the sweeps, then audits the produced CSV for the trend
// checks; everything else runs in-process against the library.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ttalab/bank.hpp"
#include "ttalab/corruption.hpp"
#include "ttalab/dataset.hpp"
#include "ttalab/geometry.hpp"
#include "ttalab/harness.hpp"
#include "ttalab/nn.hpp"
#include "ttalab/rng.hpp"
#include "ttalab/stream.hpp"

namespace {

using namespace ttalab;
using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Check {
  int id = 0;
  bool pass = false;
  std::string detail;
  double secs = 0.0;
};

std::string num(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string pp(double v) {  // signed percentage points
  char buf[64];
  std::snprintf(buf, sizeof buf, "%+.2fpp", v * 100.0);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const std::string& log) {
  const std::string cmd = std::string(TTALAB_CLI_PATH) + " " + args + " >> " + log + " 2>&1";
  return std::system(cmd.c_str());
}

// ---------------------------------------------------------------------------
// 1. Gradient oracle: every legal objective/parameter-set combination against
//    central finite differences on randomized small models.

Check check_gradients() {
  const auto t0 = Clock::now();
  Check c{1, false, "", 0.0};
  struct Combo {
    ObjectiveKind kind;
    GradScope scope;
    BnMode mode;
  };
  const std::vector<Combo> combos = {
      {ObjectiveKind::CrossEntropy, GradScope::InputOnly, BnMode::Running},
      {ObjectiveKind::CrossEntropy, GradScope::AllParams, BnMode::BatchStats},
      {ObjectiveKind::EntropyMin, GradScope::BnAffineOnly, BnMode::BatchStats},
      {ObjectiveKind::InfoMax, GradScope::BnAffineOnly, BnMode::BatchStats},
      {ObjectiveKind::Consistency, GradScope::BnAffineOnly, BnMode::BatchStats},
  };
  const int configs = 24;
  const double h = 1e-5;
  const double tol = 1e-3;
  double max_rel = 0.0;
  long coords = 0;
  for (int i = 0; i < configs; ++i) {
    Rng rng(9000 + static_cast<std::uint64_t>(i));
    const int in = 3 + i % 3, hidden = 4 + i % 4, k = 3 + i % 3, b = 2 + i % 3;
    Model m = make_mlp(in, hidden, k, rng);
    for (auto& layer : m.layers) {
      if (auto* bn = std::get_if<BatchNormLayer>(&layer)) {
        for (std::size_t j = 0; j < bn->scale.size(); ++j) {
          bn->running_mean[j] = rng.uniform(-0.3, 0.3);
          bn->running_var[j] = rng.uniform(0.5, 1.5);
          bn->scale[j] = rng.uniform(0.7, 1.3);
          bn->shift[j] = rng.uniform(-0.2, 0.2);
        }
      }
    }
    Matrix x(b, in);
    for (int r = 0; r < b; ++r)
      for (int cc = 0; cc < in; ++cc) x(r, cc) = rng.uniform();
    std::vector<int> labels;
    for (int r = 0; r < b; ++r) labels.push_back(static_cast<int>(rng.bounded(k)));
    Matrix targets(b, k);
    for (int r = 0; r < b; ++r) {
      double s = 0.0;
      for (int cc = 0; cc < k; ++cc) {
        targets(r, cc) = rng.uniform(0.05, 1.0);
        s += targets(r, cc);
      }
      for (int cc = 0; cc < k; ++cc) targets(r, cc) /= s;
    }
    for (const Combo& combo : combos) {
      Objective obj = Objective::entropy_min();
      switch (combo.kind) {
        case ObjectiveKind::CrossEntropy: obj = Objective::cross_entropy(labels); break;
        case ObjectiveKind::EntropyMin: obj = Objective::entropy_min(); break;
        case ObjectiveKind::InfoMax: obj = Objective::info_max(); break;
        case ObjectiveKind::Consistency: obj = Objective::consistency(targets); break;
      }
      const Model& cm = m;
      const LossResult an = loss_and_grads(cm, x, obj, combo.scope, combo.mode);
      auto record = [&](double fd, double a) {
        ++coords;
        const double diff = std::fabs(fd - a);
        if (diff <= 1e-9) return true;
        const double rel = diff / std::max({std::fabs(fd), std::fabs(a), 1e-6});
        max_rel = std::max(max_rel, rel);
        return rel <= tol;
      };
      bool ok = true;
      if (combo.scope == GradScope::InputOnly) {
        Matrix xp = x;
        for (int r = 0; r < b && ok; ++r) {
          for (int cc = 0; cc < in && ok; ++cc) {
            const double v = xp(r, cc);
            xp(r, cc) = v + h;
            const double lp = loss_and_grads(cm, xp, obj, combo.scope, combo.mode).loss;
            xp(r, cc) = v - h;
            const double lm = loss_and_grads(cm, xp, obj, combo.scope, combo.mode).loss;
            xp(r, cc) = v;
            ok = record((lp - lm) / (2 * h), an.grads.input(r, cc));
          }
        }
      } else {
        Model mc = m;
        std::vector<std::pair<double*, double>> slots;
        std::size_t di = 0, bi = 0;
        for (auto& layer : mc.layers) {
          if (auto* dl = std::get_if<DenseLayer>(&layer)) {
            if (combo.scope == GradScope::AllParams) {
              for (int r = 0; r < dl->w.rows(); ++r)
                for (int cc = 0; cc < dl->w.cols(); ++cc)
                  slots.emplace_back(&dl->w(r, cc), an.grads.dense[di].w(r, cc));
              for (std::size_t j = 0; j < dl->b.size(); ++j)
                slots.emplace_back(&dl->b[j], an.grads.dense[di].b[j]);
            }
            ++di;
          } else if (auto* bn = std::get_if<BatchNormLayer>(&layer)) {
            for (std::size_t j = 0; j < bn->scale.size(); ++j) {
              slots.emplace_back(&bn->scale[j], an.grads.bn[bi].scale[j]);
              slots.emplace_back(&bn->shift[j], an.grads.bn[bi].shift[j]);
            }
            ++bi;
          }
        }
        const Model& cmc = mc;
        for (auto& [p, a] : slots) {
          const double v = *p;
          *p = v + h;
          const double lp = loss_and_grads(cmc, x, obj, combo.scope, combo.mode).loss;
          *p = v - h;
          const double lm = loss_and_grads(cmc, x, obj, combo.scope, combo.mode).loss;
          *p = v;
          if (!record((lp - lm) / (2 * h), a)) {
            ok = false;
            break;
          }
        }
      }
      if (!ok) {
        c.secs = elapsed(t0);
        c.detail = "finite-difference mismatch, max rel err " + num(max_rel, 6);
        return c;
      }
    }
  }
  c.secs = elapsed(t0);
  c.pass = c.secs < 10.0;
  c.detail = std::to_string(configs) + " configs x " + std::to_string(combos.size()) +
             " combos, " + std::to_string(coords) + " coordinates, max rel err " +
             num(max_rel, 6) + (c.pass ? "" : " (over 10s budget)");
  return c;
}

// ---------------------------------------------------------------------------
// 2. Synthetic-memory contract: every generated entry is classified as its
//    assigned label; balanced generation with N = 63 yields 3 per class.

Check check_advmem(const Model& model) {
  const auto t0 = Clock::now();
  Check c{2, false, "", 0.0};
  const int k = model.num_classes, n = 63;
  auto mismatches = [&](const MemoryBank& bank) {
    Matrix x(bank.size(), model.input_dim);
    for (int i = 0; i < bank.size(); ++i)
      std::copy(bank.entries()[i].x.begin(), bank.entries()[i].x.end(), x.row(i));
    const Matrix logits = forward(model, x, BnMode::Running);
    int bad = 0;
    for (int i = 0; i < bank.size(); ++i) {
      int arg = 0;
      for (int j = 1; j < logits.cols(); ++j)
        if (logits(i, j) > logits(i, arg)) arg = j;
      if (arg != bank.entries()[i].y) ++bad;
    }
    return bad;
  };
  Rng r1(21001);
  const MemoryBank plain = advmem_init(model, k, n, kAdvMemAlpha, kAdvMemMaxIters, r1, false);
  Rng r2(21002);
  const MemoryBank balanced = advmem_init(model, k, n, kAdvMemAlpha, kAdvMemMaxIters, r2, true);
  const int bad = mismatches(plain) + mismatches(balanced);
  const std::vector<int> counts = balanced.class_counts();
  bool exact = static_cast<int>(counts.size()) == k;
  for (int cnt : counts) exact = exact && cnt == n / k;
  c.secs = elapsed(t0);
  c.pass = bad == 0 && exact && c.secs < 30.0;
  c.detail = "2x63 entries, " + std::to_string(bad) + " label mismatches; balanced counts " +
             (exact ? "all " + std::to_string(n / k) : "uneven") +
             (c.secs < 30.0 ? "" : " (over 30s budget)");
  return c;
}

// ---------------------------------------------------------------------------
// 3. Dirichlet sampler statistics against the closed-form moments.

Check check_dirichlet() {
  const auto t0 = Clock::now();
  Check c{3, false, "", 0.0};
  const int k = 8, n = 10000;
  auto moments = [&](double gamma, std::uint64_t seed, double* worst_dev) {
    Rng rng(seed);
    std::vector<double> sum(k, 0.0), sumsq(k, 0.0);
    for (int i = 0; i < n; ++i) {
      const std::vector<double> p = dirichlet(gamma, k, rng);
      for (int j = 0; j < k; ++j) {
        sum[j] += p[j];
        sumsq[j] += p[j] * p[j];
      }
    }
    const double var_formula = (1.0 / k) * (1.0 - 1.0 / k) / (gamma * k + 1.0);
    const double sigma_mean = std::sqrt(var_formula / n);
    double pooled = 0.0;
    *worst_dev = 0.0;
    for (int j = 0; j < k; ++j) {
      const double mean = sum[j] / n;
      *worst_dev = std::max(*worst_dev, std::fabs(mean - 1.0 / k) / sigma_mean);
      pooled += (sumsq[j] / n - mean * mean);
    }
    return pooled / k;
  };
  double dev_lo = 0.0, dev_hi = 0.0;
  const double var_lo = moments(1e-1, 31001, &dev_lo);
  const double var_hi = moments(1e3, 31002, &dev_hi);
  const double f_lo = (1.0 / k) * (1.0 - 1.0 / k) / (1e-1 * k + 1.0);
  const double f_hi = (1.0 / k) * (1.0 - 1.0 / k) / (1e3 * k + 1.0);
  const bool means_ok = dev_lo <= 3.0 && dev_hi <= 3.0;
  const bool order_ok = var_lo > var_hi;
  const bool scale_ok = var_lo > 0.5 * f_lo && var_lo < 2.0 * f_lo && var_hi > 0.5 * f_hi &&
                        var_hi < 2.0 * f_hi;
  c.secs = elapsed(t0);
  c.pass = means_ok && order_ok && scale_ok && c.secs < 5.0;
  c.detail = "k=8, 1e4 draws: worst mean dev " + num(std::max(dev_lo, dev_hi), 2) +
             " sigma; var " + num(var_lo, 5) + " (gamma 0.1) > " + num(var_hi, 7) +
             " (gamma 1e3)" + (scale_ok ? "" : ", variance off formula");
  return c;
}

// ---------------------------------------------------------------------------
// 10. Stream and adapter property suite, 1000 randomized cases.

struct PropertyCounter {
  int cases = 0;
  int failures = 0;
  std::string first;
  void note(bool ok, const std::string& what) {
    ++cases;
    if (!ok && failures++ == 0) first = what;
  }
};

void conservation_cases(const ToyDataset& ds, PropertyCounter* pc) {
  const auto& kinds = all_corruption_kinds();
  const std::vector<Scenario> scen = {Scenario::FrameWiseIID, Scenario::TrackletWiseIID,
                                      Scenario::TrackletWiseNonIID, Scenario::TrackletMimic};
  std::map<int, const Tracklet*> by_id;
  for (const auto& t : ds.test) by_id[t.id] = &t;
  const int frames = ds.config.frames_per_tracklet;
  for (int i = 0; i < 350; ++i) {
    ScenarioConfig cfg;
    cfg.scenario = scen[i % scen.size()];
    cfg.corruption = kinds[i % kinds.size()];
    cfg.batch_size = std::vector<int>{3, 5, 8}[i % 3];
    cfg.seed = 777 + static_cast<std::uint64_t>(i);
    cfg.gamma = cfg.scenario == Scenario::TrackletWiseNonIID
                    ? std::pow(10.0, Rng(5000 + i).uniform(-4.0, 3.0))
                    : 0.0;
    if (i % 5 == 0) {
      cfg.schedule = SeveritySchedule::dynamic(5, 0.19634954084936207, 0.3);
    } else {
      cfg.schedule = SeveritySchedule::static_level(1 + i % 5);
    }
    const Stream s = build_stream(ds, cfg);
    bool ok = s.feature_dim == ds.config.width * ds.config.height;
    std::vector<std::pair<int, int>> rows;
    for (const Batch& b : s.batches) {
      ok = ok && b.rows() >= 1 && b.x.rows() == b.rows() && b.x.cols() == s.feature_dim;
      for (int r = 0; r < b.rows(); ++r) {
        rows.emplace_back(b.tracklet_ids[r], b.frame_index[r]);
        auto it = by_id.find(b.tracklet_ids[r]);
        ok = ok && it != by_id.end() && b.labels[r] == it->second->label;
      }
    }
    ok = ok && rows.size() == s.total_rows;
    if (cfg.scenario == Scenario::TrackletWiseIID || cfg.scenario == Scenario::TrackletWiseNonIID) {
      ok = ok && rows.size() == by_id.size() * static_cast<std::size_t>(frames);
      std::set<int> seen;
      for (std::size_t r = 0; r < rows.size() && ok; r += frames) {
        const int tid = rows[r].first;
        ok = seen.insert(tid).second;  // one contiguous run per tracklet
        for (int f = 0; f < frames && ok; ++f)
          ok = rows[r + f] == std::make_pair(tid, f);
      }
      ok = ok && seen.size() == by_id.size();
    } else if (cfg.scenario == Scenario::FrameWiseIID) {
      ok = ok && rows.size() == by_id.size();
      std::set<int> seen;
      for (auto& [tid, fi] : rows) ok = ok && seen.insert(tid).second && fi >= 0 && fi < frames;
    } else {  // TrackletMimic: each batch replicates one frame batch_size times
      ok = ok && s.batches.size() == by_id.size();
      std::set<int> seen;
      for (const Batch& b : s.batches) {
        ok = ok && b.rows() == cfg.batch_size && seen.insert(b.tracklet_ids[0]).second;
        for (int r = 1; r < b.rows() && ok; ++r) {
          ok = b.tracklet_ids[r] == b.tracklet_ids[0] && b.frame_index[r] == b.frame_index[0];
          for (int cc = 0; cc < b.x.cols() && ok; ++cc) ok = b.x(r, cc) == b.x(0, cc);
        }
      }
    }
    pc->note(ok, "conservation case " + std::to_string(i));
  }
}

void consistency_cases(const ToyDataset& flat, PropertyCounter* pc) {
  // drift = 0 makes every frame of a tracklet identical, so a corruption
  // that is consistent within the tracklet must emit identical rows.
  const auto& kinds = all_corruption_kinds();
  for (int i = 0; i < 250; ++i) {
    ScenarioConfig cfg;
    cfg.scenario = i % 2 == 0 ? Scenario::TrackletWiseIID : Scenario::TrackletWiseNonIID;
    cfg.gamma = cfg.scenario == Scenario::TrackletWiseNonIID ? 0.1 : 0.0;
    cfg.corruption = kinds[i % kinds.size()];
    cfg.batch_size = 4;
    cfg.seed = 333 + static_cast<std::uint64_t>(i);
    cfg.schedule = SeveritySchedule::static_level(1 + i % 5);
    const Stream s = build_stream(flat, cfg);
    std::map<int, std::vector<double>> first;
    std::map<int, const Tracklet*> by_id;
    for (const auto& t : flat.test) by_id[t.id] = &t;
    bool ok = true;
    for (const Batch& b : s.batches) {
      for (int r = 0; r < b.rows() && ok; ++r) {
        std::vector<double> row(b.x.row(r), b.x.row(r) + b.x.cols());
        auto [it, fresh] = first.emplace(b.tracklet_ids[r], row);
        if (!fresh) ok = it->second == row;
        if (fresh) {
          // must differ from the clean frame: the corruption really applied
          const Image& src = by_id[b.tracklet_ids[r]]->frames[0];
          ok = ok && !std::equal(row.begin(), row.end(), src.data());
        }
      }
    }
    pc->note(ok, "corruption consistency case " + std::to_string(i));
  }
}

std::uint64_t stream_fingerprint(const Stream& s) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  for (const Batch& b : s.batches) {
    for (int r = 0; r < b.rows(); ++r) {
      mix(static_cast<std::uint64_t>(b.tracklet_ids[r]));
      mix(static_cast<std::uint64_t>(b.frame_index[r]));
      for (int cc = 0; cc < b.x.cols(); ++cc) {
        std::uint64_t bits;
        const double v = b.x(r, cc);
        std::memcpy(&bits, &v, sizeof bits);
        mix(bits);
      }
    }
  }
  return h;
}

bool streams_equal(const Stream& a, const Stream& b) {
  if (a.batches.size() != b.batches.size() || a.total_rows != b.total_rows) return false;
  for (std::size_t i = 0; i < a.batches.size(); ++i) {
    const Batch &x = a.batches[i], &y = b.batches[i];
    if (x.labels != y.labels || x.tracklet_ids != y.tracklet_ids ||
        x.frame_index != y.frame_index || !x.x.same_shape(y.x))
      return false;
    for (int r = 0; r < x.rows(); ++r)
      for (int cc = 0; cc < x.x.cols(); ++cc)
        if (x.x(r, cc) != y.x(r, cc)) return false;
  }
  return true;
}

void determinism_cases(const ToyDataset& ds, const Model& trained, PropertyCounter* pc) {
  const auto& kinds = all_corruption_kinds();
  const std::vector<Scenario> scen = {Scenario::FrameWiseIID, Scenario::TrackletWiseIID,
                                      Scenario::TrackletWiseNonIID, Scenario::TrackletMimic};
  for (int i = 0; i < 200; ++i) {  // identical rebuild
    ScenarioConfig cfg;
    cfg.scenario = scen[i % scen.size()];
    cfg.gamma = cfg.scenario == Scenario::TrackletWiseNonIID ? std::pow(10.0, -4.0 + i % 8) : 0.0;
    cfg.corruption = kinds[i % kinds.size()];
    cfg.batch_size = 3 + i % 6;
    cfg.seed = 12000 + static_cast<std::uint64_t>(i);
    cfg.schedule = i % 2 == 0 ? SeveritySchedule::static_level(1 + i % 5)
                              : SeveritySchedule::dynamic(4, 0.19634954084936207, 0.1 * (i % 7));
    pc->note(streams_equal(build_stream(ds, cfg), build_stream(ds, cfg)),
             "rebuild determinism case " + std::to_string(i));
  }
  for (int i = 0; i < 20; ++i) {  // reseeding moves the stream
    ScenarioConfig cfg;
    cfg.scenario = scen[i % scen.size()];
    cfg.gamma = cfg.scenario == Scenario::TrackletWiseNonIID ? 0.1 : 0.0;
    cfg.corruption = kinds[i % kinds.size()];
    cfg.batch_size = 4;
    cfg.seed = 21000 + static_cast<std::uint64_t>(i);
    ScenarioConfig other = cfg;
    other.seed += 9999;
    pc->note(stream_fingerprint(build_stream(ds, cfg)) !=
                 stream_fingerprint(build_stream(ds, other)),
             "reseed divergence case " + std::to_string(i));
  }
  const std::vector<Method> methods = all_methods();
  for (int i = 0; i < 30; ++i) {  // adapter replay after reset
    const Method m = methods[i % methods.size()];
    AdapterHyper hyper;
    hyper.lr = 0.3;
    hyper.memory_capacity = 16;
    hyper.ema_decay = 0.99;
    hyper.adapt_on_input = i % 2 == 0;
    if (method_owns_memory(m)) {
      hyper.mem_init = std::vector<MemInit>{MemInit::Empty, MemInit::AdvMem,
                                            MemInit::TrainMem}[i % 3];
    }
    ScenarioConfig cfg;
    cfg.scenario = Scenario::TrackletWiseIID;
    cfg.corruption = CorruptionKind::GaussianNoise;
    cfg.batch_size = 8;
    cfg.seed = 500 + static_cast<std::uint64_t>(i);
    cfg.schedule = SeveritySchedule::static_level(3);
    const Stream s = build_stream(ds, cfg);
    Adapter adapter(m, trained, hyper, 400 + static_cast<std::uint64_t>(i), &ds);
    std::vector<std::vector<int>> preds;
    for (int bi = 0; bi < 3; ++bi) preds.push_back(adapter.predict_and_adapt(s.batches[bi].x));
    const std::uint64_t h1 = hash_all_state(adapter.model());
    adapter.reset(trained);
    bool ok = true;
    for (int bi = 0; bi < 3; ++bi) ok = ok && adapter.predict_and_adapt(s.batches[bi].x) == preds[bi];
    ok = ok && hash_all_state(adapter.model()) == h1;
    pc->note(ok, "adapter replay case " + std::to_string(i));
  }
}

void capacity_cases(PropertyCounter* pc) {
  for (int i = 0; i < 100; ++i) {
    const int k = 3 + i % 6, cap = 1 + i % 10;
    MemoryBank bank(cap, k);
    Rng rng(600 + static_cast<std::uint64_t>(i));
    bool ok = true;
    for (int op = 0; op < 60 && ok; ++op) {
      if (rng.uniform() < 0.8) {
        const int before = bank.size();
        const auto evicted = bank.insert(std::vector<double>(5, rng.uniform()),
                                         static_cast<int>(rng.bounded(k)),
                                         rng.uniform(0.0, std::log(static_cast<double>(k))));
        ok = before == cap ? (evicted.has_value() && bank.size() == cap)
                           : (!evicted.has_value() && bank.size() == before + 1);
      } else {
        bank.tick();
      }
      ok = ok && bank.size() <= bank.capacity();
      const std::vector<int> counts = bank.class_counts();
      int sum = 0;
      for (int cnt : counts) {
        ok = ok && cnt >= 0;
        sum += cnt;
      }
      ok = ok && sum == bank.size();
    }
    pc->note(ok, "capacity case " + std::to_string(i));
  }
}

void scope_cases(const ToyDataset& ds, const Model& trained, PropertyCounter* pc) {
  const auto& kinds = all_corruption_kinds();
  const std::vector<Method> methods = all_methods();
  for (int i = 0; i < 50; ++i) {
    const Method m = methods[i % methods.size()];
    AdapterHyper hyper;
    hyper.lr = 0.3;
    hyper.memory_capacity = 16;
    if (method_owns_memory(m)) {
      hyper.mem_init = std::vector<MemInit>{MemInit::Empty, MemInit::AdvMem,
                                            MemInit::TrainMem}[i % 3];
    }
    ScenarioConfig cfg;
    cfg.scenario = Scenario::TrackletWiseIID;
    cfg.corruption = kinds[i % kinds.size()];
    cfg.batch_size = 8;
    cfg.seed = 901 + static_cast<std::uint64_t>(i);
    cfg.schedule = SeveritySchedule::static_level(3);
    const Stream s = build_stream(ds, cfg);
    Adapter adapter(m, trained, hyper, 900 + static_cast<std::uint64_t>(i), &ds);
    Adapter bystander(Method::MemShotIM, trained, hyper, 950 + static_cast<std::uint64_t>(i), &ds);
    const std::uint64_t b0 = hash_all_state(bystander.model());
    const std::uint64_t d0 = hash_dense_params(adapter.model());
    const std::uint64_t a0 = hash_bn_affine(adapter.model());
    const std::uint64_t s0 = hash_bn_stats(adapter.model());
    adapter.predict_and_adapt(s.batches[0].x);
    adapter.predict_and_adapt(s.batches[1].x);
    const bool dense_same = hash_dense_params(adapter.model()) == d0;
    const bool affine_same = hash_bn_affine(adapter.model()) == a0;
    const bool stats_same = hash_bn_stats(adapter.model()) == s0;
    bool ok = dense_same && hash_all_state(bystander.model()) == b0;
    switch (m) {
      case Method::Source: ok = ok && affine_same && stats_same; break;
      case Method::AdaBN: ok = ok && affine_same && !stats_same; break;
      case Method::Tent:
      case Method::ShotIM:
      case Method::MemTent:
      case Method::MemShotIM: ok = ok && !affine_same && stats_same; break;
      case Method::RoTTALite: ok = ok && !affine_same && !stats_same; break;
    }
    pc->note(ok, std::string("scope case ") + method_name(m) + " #" + std::to_string(i));
  }
}

Check check_properties() {
  const auto t0 = Clock::now();
  Check c{10, false, "", 0.0};
  ToyDatasetConfig small;
  small.classes = 4;
  small.tracklets_per_class = 10;
  small.frames_per_tracklet = 8;
  small.width = 8;
  small.height = 8;
  small.drift = 1.0;
  small.seed = 101;
  const ToyDataset ds = make_toy_dataset(small);
  ToyDatasetConfig flat_cfg = small;
  flat_cfg.drift = 0.0;
  flat_cfg.seed = 102;
  const ToyDataset flat = make_toy_dataset(flat_cfg);
  Rng train_rng(77);
  const Model trained = train_source_model(ds, 30, 0.05, train_rng);
  PropertyCounter pc;
  conservation_cases(ds, &pc);
  consistency_cases(flat, &pc);
  determinism_cases(ds, trained, &pc);
  capacity_cases(&pc);
  scope_cases(ds, trained, &pc);
  c.secs = elapsed(t0);
  c.pass = pc.cases == 1000 && pc.failures == 0 && c.secs < 60.0;
  c.detail = std::to_string(pc.cases) + " cases, " + std::to_string(pc.failures) + " failures" +
             (pc.failures ? " (first: " + pc.first + ")" : "") +
             (c.secs < 60.0 ? "" : " (over 60s budget)");
  return c;
}

// ---------------------------------------------------------------------------
// 11. Square-crop oracle: brute-force reference from the documented rule.

Check check_geometry() {
  const auto t0 = Clock::now();
  Check c{11, false, "", 0.0};
  auto reference = [](const BBox& b) {
    CropRegion r;
    r.side = 1.1 * std::max(b.w, b.h);
    const double cap = std::min(b.image_w, b.image_h);
    if (r.side > cap) r.side = cap;
    double cx = b.x0 + b.w / 2.0, cy = b.y0 + b.h / 2.0;
    cx = std::min(std::max(cx, r.side / 2.0), b.image_w - r.side / 2.0);
    cy = std::min(std::max(cy, r.side / 2.0), b.image_h - r.side / 2.0);
    r.cx = cx;
    r.cy = cy;
    return r;
  };
  Rng rng(11111);
  int exact = 0;
  for (int i = 0; i < 500; ++i) {
    BBox b;
    b.image_w = rng.uniform(10.0, 300.0);
    b.image_h = rng.uniform(10.0, 300.0);
    b.w = rng.uniform(0.5, b.image_w * 1.4);
    b.h = rng.uniform(0.5, b.image_h * 1.4);
    b.x0 = rng.uniform(0.0, b.image_w) - b.w / 2.0;
    b.y0 = rng.uniform(0.0, b.image_h) - b.h / 2.0;
    const CropRegion got = crop_square(b);
    const CropRegion want = reference(b);
    if (got.cx == want.cx && got.cy == want.cy && got.side == want.side) ++exact;
  }
  BBox square{50.0, 50.0, 100.0, 100.0, 1000.0, 1000.0};
  const double side = crop_square(square).side;
  const bool cell_ok = std::fabs(side - 110.0) <= 110.0 * 1e-15;  // one ulp
  c.secs = elapsed(t0);
  c.pass = exact == 500 && cell_ok && c.secs < 1.0;
  c.detail = std::to_string(exact) + "/500 boxes exact; 100x100 box -> side " + num(side, 12) +
             (c.secs < 1.0 ? "" : " (over 1s budget)");
  return c;
}

// ---------------------------------------------------------------------------
// 12. End-to-end reproducibility and the sweep budget, through the CLI.

Check check_reproducibility(const std::string& dir, const std::string& log,
                            std::string* sweep_csv) {
  Check c{12, false, "", 0.0};
  const auto t0 = Clock::now();
  const std::string medium = dir + "/medium.cfg";
  {
    std::ofstream out(medium);
    out << "methods = tent, memshotim\n"
           "mem-inits = empty, advmem\n"
           "scenarios = tracklet-iid, tracklet-noniid\n"
           "gammas = 1e-1\n"
           "corruptions = gaussian-noise, fog\n"
           "batch-sizes = 64\n"
           "seeds = 0, 1\n"
           "lr = 0.3\n"
           "severity = 5\n";
  }
  const std::string base = " --data " + dir + "/data --model " + dir + "/model.ttab";
  int rc = run_cli("sweep --config " + medium + base + " --out " + dir + "/medium_p1.csv" +
                       " --parallelism 1",
                   log);
  rc |= run_cli("sweep --config " + medium + base + " --out " + dir + "/medium_p8.csv" +
                    " --parallelism 8",
                log);
  const std::string p1 = read_file(dir + "/medium_p1.csv");
  const bool identical = rc == 0 && !p1.empty() && p1 == read_file(dir + "/medium_p8.csv");
  const long medium_cells = std::count(p1.begin(), p1.end(), '\n') - 1;

  const auto sweep_start = Clock::now();
  const int sweep_rc = run_cli(std::string("sweep --config ") + TTALAB_SWEEP_CFG + base +
                                   " --out " + dir + "/default_sweep.csv --parallelism 1",
                               log);
  const double sweep_secs = elapsed(sweep_start);
  *sweep_csv = dir + "/default_sweep.csv";
  long cells = -1;
  if (sweep_rc == 0) {
    const std::string csv = read_file(*sweep_csv);
    cells = std::count(csv.begin(), csv.end(), '\n') - 1;
  }
  c.secs = elapsed(t0);
  c.pass = identical && sweep_rc == 0 && sweep_secs < 900.0;
  c.detail = "parallelism 1 vs 8 " + std::string(identical ? "byte-identical" : "DIFFER") + " (" +
             std::to_string(medium_cells) + " cells); default sweep " + std::to_string(cells) +
             " cells in " + num(sweep_secs, 1) + "s (budget 900s)";
  return c;
}

// ---------------------------------------------------------------------------
// 4-9. Trend checks on the default sweep CSV.

struct SweepView {
  std::vector<RunReport> reports;

  std::vector<const RunReport*> rows(Method m, Scenario sc,
                                     std::optional<MemInit> init = std::nullopt,
                                     std::optional<double> gamma = std::nullopt,
                                     std::optional<int> batch = std::nullopt) const {
    std::vector<const RunReport*> out;
    for (const RunReport& r : reports) {
      if (r.method != m || r.scenario != sc) continue;
      if (init && r.mem_init != *init) continue;
      if (gamma && std::fabs(r.gamma - *gamma) > *gamma * 1e-9) continue;
      if (batch && r.batch_size != *batch) continue;
      out.push_back(&r);
    }
    return out;
  }

  // Seed-and-corruption mean; throws if the slice is empty or has failures.
  double mean(Method m, Scenario sc, std::optional<MemInit> init = std::nullopt,
              std::optional<double> gamma = std::nullopt,
              std::optional<int> batch = std::nullopt) const {
    const auto sel = rows(m, sc, init, gamma, batch);
    if (sel.empty()) throw std::runtime_error("empty slice in default sweep");
    double sum = 0.0;
    for (const RunReport* r : sel) {
      if (r->failed) throw std::runtime_error("failed cell in default sweep: " + r->error);
      sum += r->error_rate;
    }
    return sum / static_cast<double>(sel.size());
  }
};

Check check_mimic_drop(const SweepView& v) {
  Check c{4, false, "", 0.0};
  const auto t0 = Clock::now();
  const double tent_fw = v.mean(Method::Tent, Scenario::FrameWiseIID);
  const double tent_mm = v.mean(Method::Tent, Scenario::TrackletMimic);
  const double adabn_fw = v.mean(Method::AdaBN, Scenario::FrameWiseIID);
  const double adabn_mm = v.mean(Method::AdaBN, Scenario::TrackletMimic);
  // Source must agree cell-for-cell across the two stream layouts.
  const auto src_fw = v.rows(Method::Source, Scenario::FrameWiseIID);
  std::map<std::pair<int, std::uint64_t>, double> fw_err;
  for (const RunReport* r : src_fw)
    fw_err[{static_cast<int>(r->corruption), r->seed}] = r->error_rate;
  int pairs = 0;
  bool src_equal = !src_fw.empty();
  for (const RunReport* r : v.rows(Method::Source, Scenario::TrackletMimic)) {
    auto it = fw_err.find({static_cast<int>(r->corruption), r->seed});
    src_equal = src_equal && it != fw_err.end() && it->second == r->error_rate;
    ++pairs;
  }
  const bool drops = tent_mm >= tent_fw - 0.01 && adabn_mm >= adabn_fw - 0.01;
  c.secs = elapsed(t0);
  c.pass = drops && src_equal && pairs > 0;
  c.detail = "tent " + num(tent_fw) + " -> " + num(tent_mm) + ", adabn " + num(adabn_fw) +
             " -> " + num(adabn_mm) + " under frame replication; source identical on " +
             std::to_string(pairs) + " cell pairs";
  return c;
}

Check check_tracklet_degradation(const SweepView& v) {
  Check c{5, false, "", 0.0};
  const auto t0 = Clock::now();
  const double tent_fw = v.mean(Method::Tent, Scenario::FrameWiseIID);
  const double tent_ti = v.mean(Method::Tent, Scenario::TrackletWiseIID, std::nullopt,
                                std::nullopt, 64);
  const double shot_fw = v.mean(Method::ShotIM, Scenario::FrameWiseIID);
  const double shot_ti = v.mean(Method::ShotIM, Scenario::TrackletWiseIID, std::nullopt,
                                std::nullopt, 64);
  c.secs = elapsed(t0);
  c.pass = tent_ti >= tent_fw + 0.05 && shot_ti >= shot_fw + 0.05;
  c.detail = "tent " + num(tent_fw) + " -> " + num(tent_ti) + " (" + pp(tent_ti - tent_fw) +
             "), shotim " + num(shot_fw) + " -> " + num(shot_ti) + " (" + pp(shot_ti - shot_fw) +
             "), need >= +5pp on single-class batches";
  return c;
}

Check check_advmem_rescue(const SweepView& v) {
  Check c{6, false, "", 0.0};
  const auto t0 = Clock::now();
  const double empty = v.mean(Method::MemShotIM, Scenario::TrackletWiseIID, MemInit::Empty);
  const double adv = v.mean(Method::MemShotIM, Scenario::TrackletWiseIID, MemInit::AdvMem);
  c.secs = elapsed(t0);
  c.pass = empty - adv >= 0.05;
  c.detail = "memshotim tracklet-iid: empty " + num(empty) + ", advmem " + num(adv) +
             ", margin " + pp(empty - adv) + " (need >= +5pp)";
  return c;
}

Check check_rotta_advmem(const SweepView& v) {
  Check c{7, false, "", 0.0};
  const auto t0 = Clock::now();
  const double empty =
      v.mean(Method::RoTTALite, Scenario::TrackletWiseNonIID, MemInit::Empty, 1e-4);
  const double adv =
      v.mean(Method::RoTTALite, Scenario::TrackletWiseNonIID, MemInit::AdvMem, 1e-4);
  c.secs = elapsed(t0);
  c.pass = adv <= empty;
  c.detail = "rottalite gamma 1e-4: advmem " + num(adv) + " <= empty " + num(empty) + " (" +
             pp(empty - adv) + ")";
  return c;
}

Check check_gamma_profile(const SweepView& v) {
  Check c{8, false, "", 0.0};
  const auto t0 = Clock::now();
  auto improvement = [&](double gamma) {
    return v.mean(Method::MemShotIM, Scenario::TrackletWiseNonIID, MemInit::Empty, gamma) -
           v.mean(Method::MemShotIM, Scenario::TrackletWiseNonIID, MemInit::AdvMem, gamma);
  };
  const double lo = improvement(1e-4), mid = improvement(1e-1), hi = improvement(1e3);
  const bool largest_at_lo = lo >= mid && lo >= hi;
  const bool flat_at_hi = std::fabs(hi) <= 0.02;
  c.secs = elapsed(t0);
  c.pass = largest_at_lo && flat_at_hi;
  c.detail = "empty-minus-advmem by gamma: 1e-4 " + pp(lo) + ", 1e-1 " + pp(mid) + ", 1e3 " +
             pp(hi) + "; need max at 1e-4 " + std::string(largest_at_lo ? "(holds)" : "(violated)") +
             " and |1e3| <= 2pp " + (flat_at_hi ? "(holds)" : "(violated)");
  return c;
}

Check check_batch_size(const SweepView& v) {
  Check c{9, false, "", 0.0};
  const auto t0 = Clock::now();
  const double b8 = v.mean(Method::Tent, Scenario::TrackletWiseIID, std::nullopt, std::nullopt, 8);
  const double b32 =
      v.mean(Method::Tent, Scenario::TrackletWiseIID, std::nullopt, std::nullopt, 32);
  c.secs = elapsed(t0);
  c.pass = b32 <= b8;
  c.detail = "tent tracklet-iid: B=32 " + num(b32) + " <= B=8 " + num(b8) + " (" + pp(b8 - b32) +
             ")";
  return c;
}

Check guarded(int id, const std::function<Check()>& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return Check{id, false, std::string("exception: ") + e.what(), 0.0};
  }
}

}  // namespace

int main() {
  std::vector<Check> checks;
  const std::string dir = "acceptance_run";
  const std::string log = dir + "/cli.log";
  std::string sweep_csv;
  try {
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    std::ofstream(log).close();
    if (run_cli("gen-data --out " + dir + "/data --seed 0", log) != 0)
      throw std::runtime_error("gen-data failed, see " + log);
    if (run_cli("train --data " + dir + "/data --out " + dir + "/model.ttab --seed 42", log) != 0)
      throw std::runtime_error("train failed, see " + log);
  } catch (const std::exception& e) {
    std::printf("acceptance fixtures failed: %s\n", e.what());
    return 1;
  }
  const ToyDataset ds = load_dataset(dir + "/data");
  const Model model = load_model_file(dir + "/model.ttab");

  checks.push_back(guarded(1, [] { return check_gradients(); }));
  checks.push_back(guarded(2, [&] { return check_advmem(model); }));
  checks.push_back(guarded(3, [] { return check_dirichlet(); }));
  checks.push_back(guarded(10, [] { return check_properties(); }));
  checks.push_back(guarded(11, [] { return check_geometry(); }));
  checks.push_back(guarded(12, [&] { return check_reproducibility(dir, log, &sweep_csv); }));

  SweepView view;
  try {
    view.reports = reports_from_csv(read_file(sweep_csv));
  } catch (const std::exception&) {
    view.reports.clear();
  }
  checks.push_back(guarded(4, [&] { return check_mimic_drop(view); }));
  checks.push_back(guarded(5, [&] { return check_tracklet_degradation(view); }));
  checks.push_back(guarded(6, [&] { return check_advmem_rescue(view); }));
  checks.push_back(guarded(7, [&] { return check_rotta_advmem(view); }));
  checks.push_back(guarded(8, [&] { return check_gamma_profile(view); }));
  checks.push_back(guarded(9, [&] { return check_batch_size(view); }));

  std::sort(checks.begin(), checks.end(), [](const Check& a, const Check& b) { return a.id < b.id; });
  int failures = 0;
  for (const Check& c : checks) {
    failures += c.pass ? 0 : 1;
    std::printf("criterion %2d: %s  %s  [%.1fs]\n", c.id, c.pass ? "PASS" : "FAIL",
                c.detail.c_str(), c.secs);
  }
  std::printf("%d of 12 criteria pass\n", 12 - failures);
  return failures == 0 ? 0 : 1;
}
