#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ttalab/bank.hpp"
#include "ttalab/dataset.hpp"
#include "ttalab/nn.hpp"

namespace ttalab {

// The method suite. Source is the no-adaptation baseline; AdaBN rewrites BN
// statistics; Tent and ShotIM optimize BN affine parameters on the live
// batch; the Mem variants optimize on a memory-bank snapshot instead; and
// RoTTALite distills a student against an EMA teacher on the snapshot.
enum class Method {
  Source,
  AdaBN,
  Tent,
  ShotIM,
  RoTTALite,
  MemTent,
  MemShotIM,
};

inline constexpr int kMethodCount = 7;

const char* method_name(Method m);
Method parse_method(std::string_view name);
std::vector<Method> all_methods();

// True for methods that own a MemoryBank (the Mem variants and RoTTALite).
bool method_owns_memory(Method m);

enum class MemInit { Empty, AdvMem, TrainMem };

const char* mem_init_name(MemInit m);
MemInit parse_mem_init(std::string_view name);

struct AdapterHyper {
  double lr = 1e-3;
  int memory_capacity = 64;
  MemInit mem_init = MemInit::Empty;
  double ema_decay = 0.999;   // RoTTALite teacher momentum
  double bn_blend = 0.05;     // RoTTALite robust-BN blend factor
  bool adapt_on_input = false;  // Mem variants: extra step on the live batch
};

// Throws unless lr > 0, memory_capacity >= 0, ema_decay and bn_blend in
// (0,1), and mem_init is Empty for methods that own no memory.
void validate_hyper(const AdapterHyper& h, Method m);

// One adapter exclusively owns its model, bank, and teacher; nothing is
// shared between adapters, so independent streams can run concurrently.
class Adapter {
 public:
  // Copies `source` as the working model. `seed` drives memory
  // initialization and snapshot sampling; reset() replays it. TrainMem
  // requires `train_data` (only its train split is read, at init time).
  Adapter(Method method, const Model& source, const AdapterHyper& hyper,
          std::uint64_t seed, const ToyDataset* train_data = nullptr);

  // Consumes one unlabeled batch: returns argmax predictions for every row
  // and performs the method's adaptation side effects. Predictions never
  // depend on the update step the same batch triggers. Single-row batches
  // fall back to Running-mode prediction and skip live-batch optimization
  // (batch statistics need two rows); memory methods still insert the row
  // and step on the snapshot.
  std::vector<int> predict_and_adapt(const Matrix& x);

  // Restores the initial condition against a pristine source model: working
  // model and teacher become copies of it, the bank is rebuilt exactly as at
  // construction (same init seed), and the snapshot RNG restarts. Throws on
  // layer-shape mismatch.
  void reset(const Model& pristine);

  Method method() const { return method_; }
  const AdapterHyper& hyper() const { return hyper_; }
  const Model& model() const { return model_; }
  const Model* teacher() const { return teacher_ ? teacher_.get() : nullptr; }
  const MemoryBank* bank() const { return bank_ ? bank_.get() : nullptr; }

  // Debugging artifact: model, bank, and teacher in one named-array file.
  void save_checkpoint(const std::string& path) const;

 private:
  MemoryBank initial_bank(const Model& pristine) const;
  void apply_bn_policy();
  std::vector<int> adapt_live(const Matrix& x);
  std::vector<int> adapt_memory(const Matrix& x);
  std::vector<int> adapt_rotta(const Matrix& x);

  Method method_;
  AdapterHyper hyper_;
  Model model_;
  std::unique_ptr<Model> teacher_;
  std::unique_ptr<MemoryBank> bank_;
  std::uint64_t seed_;
  const ToyDataset* train_data_;
  Rng rng_;
};

}  // namespace ttalab
