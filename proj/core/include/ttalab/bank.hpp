#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ttalab/nn.hpp"
#include "ttalab/stream.hpp"

namespace ttalab {

struct MemoryEntry {
  std::vector<double> x;  // flat sample features
  int y = 0;              // assigned label (synthetic) or pseudo-label (stream)
  double uncertainty = 0.0;  // prediction entropy at insertion, in [0, ln K]
  int age = 0;               // batches since insertion
  bool synthetic = false;
};

// Fixed-capacity category-balanced store. Eviction targets a class with the
// maximal entry count; when the incoming class is itself maximal the eviction
// stays inside it (balance is preserved, and its stale entries rotate out).
// Entry ties prefer synthetic entries, then the highest score
//   0.5 * age / max_age + 0.5 * uncertainty / ln K.
// A capacity-0 bank ignores inserts.
class MemoryBank {
 public:
  MemoryBank(int capacity, int num_classes);

  int capacity() const { return capacity_; }
  int num_classes() const { return k_; }
  const std::vector<MemoryEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  int size() const { return static_cast<int>(entries_.size()); }

  // Returns the evicted entry when the bank was full.
  std::optional<MemoryEntry> insert(MemoryEntry e);
  std::optional<MemoryEntry> insert(std::vector<double> x, int pseudo_label, double uncertainty);

  // Advances every entry's age by one batch.
  void tick();

  // All entries as one batch, order shuffled by rng; the bank is unchanged.
  // An empty bank yields a zero-row batch: no adaptation material.
  Batch snapshot(Rng& rng) const;

  std::vector<int> class_counts() const;

 private:
  int capacity_;
  int k_;
  std::vector<MemoryEntry> entries_;
};

// Adversarial initialization: per entry, x starts as clamp(0.5 + 0.15 N(0,I))
// and descends the cross-entropy gradient toward a drawn label until the
// model classifies it as that label. balanced cycles labels 0..K-1 instead of
// drawing them uniformly. Throws after 5 fresh-draw retries of a
// non-converging entry.
MemoryBank advmem_init(const Model& model, int k, int n, double alpha, int max_iters, Rng& rng,
                       bool balanced = false);

inline constexpr double kAdvMemAlpha = 0.05;
inline constexpr int kAdvMemMaxIters = 200;

// Training-set initialization: repeat n times, draw label uniformly, take one
// unused training frame of that class; exhausted classes trigger a redraw.
MemoryBank trainmem_init(const ToyDataset& ds, int k, int n, Rng& rng);

}  // namespace ttalab
