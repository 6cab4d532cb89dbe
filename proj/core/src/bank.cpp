#include "ttalab/bank.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ttalab {

MemoryBank::MemoryBank(int capacity, int num_classes) : capacity_(capacity), k_(num_classes) {
  if (capacity < 0) throw std::invalid_argument("memory bank: negative capacity");
  if (num_classes < 2) throw std::invalid_argument("memory bank: need >= 2 classes");
  entries_.reserve(static_cast<std::size_t>(capacity));
}

std::vector<int> MemoryBank::class_counts() const {
  std::vector<int> counts(static_cast<std::size_t>(k_), 0);
  for (const MemoryEntry& e : entries_) counts[static_cast<std::size_t>(e.y)] += 1;
  return counts;
}

std::optional<MemoryEntry> MemoryBank::insert(MemoryEntry e) {
  if (e.y < 0 || e.y >= k_) throw std::invalid_argument("memory insert: label out of range");
  const double max_u = std::log(static_cast<double>(k_)) + 1e-9;
  if (!(e.uncertainty >= 0.0) || e.uncertainty > max_u) {
    throw std::invalid_argument("memory insert: uncertainty outside [0, ln K]");
  }
  if (e.age < 0) throw std::invalid_argument("memory insert: negative age");
  if (capacity_ == 0) return std::nullopt;
  if (size() < capacity_) {
    entries_.push_back(std::move(e));
    return std::nullopt;
  }

  const std::vector<int> counts = class_counts();
  const int max_count = *std::max_element(counts.begin(), counts.end());
  const bool incoming_is_max = counts[static_cast<std::size_t>(e.y)] == max_count;

  int max_age = 1;
  for (const MemoryEntry& m : entries_) max_age = std::max(max_age, m.age);
  const double ln_k = std::log(static_cast<double>(k_));

  int best = -1;
  bool best_synth = false;
  double best_score = -1.0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const MemoryEntry& m = entries_[i];
    if (incoming_is_max ? m.y != e.y : counts[static_cast<std::size_t>(m.y)] != max_count) {
      continue;
    }
    const double score = 0.5 * static_cast<double>(m.age) / static_cast<double>(max_age) +
                         0.5 * m.uncertainty / ln_k;
    if (best < 0 || (m.synthetic && !best_synth) ||
        (m.synthetic == best_synth && score > best_score)) {
      best = static_cast<int>(i);
      best_synth = m.synthetic;
      best_score = score;
    }
  }
  MemoryEntry evicted = std::move(entries_[static_cast<std::size_t>(best)]);
  entries_[static_cast<std::size_t>(best)] = std::move(e);
  return evicted;
}

std::optional<MemoryEntry> MemoryBank::insert(std::vector<double> x, int pseudo_label,
                                              double uncertainty) {
  MemoryEntry e;
  e.x = std::move(x);
  e.y = pseudo_label;
  e.uncertainty = uncertainty;
  return insert(std::move(e));
}

void MemoryBank::tick() {
  for (MemoryEntry& e : entries_) e.age += 1;
}

Batch MemoryBank::snapshot(Rng& rng) const {
  Batch b;
  if (entries_.empty()) return b;
  std::vector<std::size_t> order(entries_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  const int dim = static_cast<int>(entries_.front().x.size());
  b.x = Matrix(size(), dim);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const MemoryEntry& e = entries_[order[i]];
    if (static_cast<int>(e.x.size()) != dim) {
      throw std::logic_error("memory snapshot: mixed entry dims");
    }
    std::copy(e.x.begin(), e.x.end(), b.x.row(static_cast<int>(i)));
    b.labels.push_back(e.y);
  }
  return b;
}

MemoryBank advmem_init(const Model& model, int k, int n, double alpha, int max_iters, Rng& rng,
                       bool balanced) {
  if (n < 0) throw std::invalid_argument("advmem: negative capacity");
  if (!(alpha > 0.0)) throw std::invalid_argument("advmem: alpha must be > 0");
  if (max_iters < 1) throw std::invalid_argument("advmem: max_iters must be >= 1");
  if (k != model.num_classes) throw std::invalid_argument("advmem: k must match the model");
  constexpr int kRetries = 5;

  MemoryBank bank(n, k);
  const int dim = model.input_dim;
  for (int i = 0; i < n; ++i) {
    const int y = balanced ? i % k : rng.bounded_int(k);
    bool accepted = false;
    for (int attempt = 0; attempt <= kRetries && !accepted; ++attempt) {
      Matrix x(1, dim);
      for (int j = 0; j < dim; ++j) {
        x.row(0)[j] = std::clamp(0.5 + 0.15 * rng.normal(), 0.0, 1.0);
      }
      const Objective obj = Objective::cross_entropy({y});
      for (int it = 0; it < max_iters; ++it) {
        const LossResult r =
            loss_and_grads(model, x, obj, GradScope::InputOnly, BnMode::Running);
        const double* p = r.probs.row(0);
        const int argmax = static_cast<int>(std::max_element(p, p + k) - p);
        if (argmax == y) {
          MemoryEntry e;
          e.x.assign(x.row(0), x.row(0) + dim);
          e.y = y;
          e.uncertainty = entropy(std::vector<double>(p, p + k));
          e.synthetic = true;
          bank.insert(std::move(e));
          accepted = true;
          break;
        }
        for (int j = 0; j < dim; ++j) x.row(0)[j] -= alpha * r.grads.input.row(0)[j];
      }
    }
    if (!accepted) {
      throw std::runtime_error(
          "advmem: attack failed to reach the assigned label after retries; "
          "the model looks untrainable");
    }
  }
  return bank;
}

MemoryBank trainmem_init(const ToyDataset& ds, int k, int n, Rng& rng) {
  if (n < 0) throw std::invalid_argument("trainmem: negative capacity");
  if (k < 2) throw std::invalid_argument("trainmem: need >= 2 classes");
  // Per-class pools of (tracklet, frame) indices; draws remove the pick.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> pools(
      static_cast<std::size_t>(k));
  std::size_t total = 0;
  for (std::size_t t = 0; t < ds.train.size(); ++t) {
    const Tracklet& tr = ds.train[t];
    if (tr.label >= k) continue;
    for (std::size_t f = 0; f < tr.frames.size(); ++f) {
      pools[static_cast<std::size_t>(tr.label)].push_back({t, f});
      ++total;
    }
  }
  if (total < static_cast<std::size_t>(n)) {
    throw std::invalid_argument("trainmem: train split smaller than the bank");
  }

  MemoryBank bank(n, k);
  for (int i = 0; i < n; ++i) {
    int y = rng.bounded_int(k);
    // Exhausted class: redraw until one with samples remains.
    int guard = 0;
    while (pools[static_cast<std::size_t>(y)].empty()) {
      y = rng.bounded_int(k);
      if (++guard > 4096) throw std::runtime_error("trainmem: all classes exhausted");
    }
    auto& pool = pools[static_cast<std::size_t>(y)];
    const std::size_t pick = rng.bounded(pool.size());
    const auto [t, f] = pool[pick];
    pool[pick] = pool.back();
    pool.pop_back();

    const Image& img = ds.train[t].frames[f];
    MemoryEntry e;
    e.x.assign(img.data(), img.data() + img.size());
    e.y = y;
    e.uncertainty = 0.0;  // no model involved at initialization time
    e.synthetic = false;
    bank.insert(std::move(e));
  }
  return bank;
}

}  // namespace ttalab
