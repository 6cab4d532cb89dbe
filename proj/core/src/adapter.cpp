#include "ttalab/adapter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ttalab {
namespace {

constexpr std::uint64_t kInitTag = 0xA5;
constexpr std::uint64_t kSnapshotTag = 0x5A;

const char* const kMethodNames[kMethodCount] = {
    "source", "adabn", "tent", "shotim", "rottalite", "memtent", "memshotim",
};

std::vector<int> argmax_rows(const Matrix& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (int i = 0; i < m.rows(); ++i) {
    const double* row = m.row(i);
    out[static_cast<std::size_t>(i)] =
        static_cast<int>(std::max_element(row, row + m.cols()) - row);
  }
  return out;
}

std::vector<double> row_vector(const Matrix& m, int i) {
  return std::vector<double>(m.row(i), m.row(i) + m.cols());
}

void set_bn_momentum(Model& m, double momentum) {
  for (Layer& l : m.layers) {
    if (auto* bn = std::get_if<BatchNormLayer>(&l)) bn->momentum = momentum;
  }
}

void require_compatible(const Model& a, const Model& b) {
  bool ok = a.input_dim == b.input_dim && a.num_classes == b.num_classes &&
            a.layers.size() == b.layers.size();
  for (std::size_t i = 0; ok && i < a.layers.size(); ++i) {
    if (a.layers[i].index() != b.layers[i].index()) {
      ok = false;
    } else if (const auto* d = std::get_if<DenseLayer>(&a.layers[i])) {
      const auto& e = std::get<DenseLayer>(b.layers[i]);
      ok = d->w.rows() == e.w.rows() && d->w.cols() == e.w.cols();
    } else if (const auto* bn = std::get_if<BatchNormLayer>(&a.layers[i])) {
      ok = bn->scale.size() == std::get<BatchNormLayer>(b.layers[i]).scale.size();
    }
  }
  if (!ok) throw std::invalid_argument("adapter: model shape mismatch");
}

// teacher <- decay*teacher + (1-decay)*student for parameters; running
// statistics are copied, both models sharing the blended robust estimate.
void ema_update(Model& teacher, const Model& student, double decay) {
  for (std::size_t i = 0; i < teacher.layers.size(); ++i) {
    if (auto* td = std::get_if<DenseLayer>(&teacher.layers[i])) {
      const auto& sd = std::get<DenseLayer>(student.layers[i]);
      for (int j = 0; j < td->w.size(); ++j) {
        td->w.data()[j] = decay * td->w.data()[j] + (1.0 - decay) * sd.w.data()[j];
      }
      for (std::size_t j = 0; j < td->b.size(); ++j) {
        td->b[j] = decay * td->b[j] + (1.0 - decay) * sd.b[j];
      }
    } else if (auto* tb = std::get_if<BatchNormLayer>(&teacher.layers[i])) {
      const auto& sb = std::get<BatchNormLayer>(student.layers[i]);
      for (std::size_t j = 0; j < tb->scale.size(); ++j) {
        tb->scale[j] = decay * tb->scale[j] + (1.0 - decay) * sb.scale[j];
        tb->shift[j] = decay * tb->shift[j] + (1.0 - decay) * sb.shift[j];
      }
      tb->running_mean = sb.running_mean;
      tb->running_var = sb.running_var;
    }
  }
}

}  // namespace

const char* method_name(Method m) { return kMethodNames[static_cast<int>(m)]; }

Method parse_method(std::string_view name) {
  for (int i = 0; i < kMethodCount; ++i) {
    if (name == kMethodNames[i]) return static_cast<Method>(i);
  }
  throw std::invalid_argument("unknown method: " + std::string(name));
}

std::vector<Method> all_methods() {
  std::vector<Method> out;
  for (int i = 0; i < kMethodCount; ++i) out.push_back(static_cast<Method>(i));
  return out;
}

bool method_owns_memory(Method m) {
  return m == Method::RoTTALite || m == Method::MemTent || m == Method::MemShotIM;
}

const char* mem_init_name(MemInit m) {
  switch (m) {
    case MemInit::Empty: return "empty";
    case MemInit::AdvMem: return "advmem";
    case MemInit::TrainMem: return "trainmem";
  }
  throw std::logic_error("unreachable");
}

MemInit parse_mem_init(std::string_view name) {
  if (name == "empty") return MemInit::Empty;
  if (name == "advmem") return MemInit::AdvMem;
  if (name == "trainmem") return MemInit::TrainMem;
  throw std::invalid_argument("unknown mem-init: " + std::string(name));
}

void validate_hyper(const AdapterHyper& h, Method m) {
  if (!(h.lr > 0.0)) throw std::invalid_argument("hyper: lr must be positive");
  if (h.memory_capacity < 0) throw std::invalid_argument("hyper: memory_capacity must be >= 0");
  if (!(h.ema_decay > 0.0 && h.ema_decay < 1.0)) {
    throw std::invalid_argument("hyper: ema_decay must be in (0,1)");
  }
  if (!(h.bn_blend > 0.0 && h.bn_blend < 1.0)) {
    throw std::invalid_argument("hyper: bn_blend must be in (0,1)");
  }
  if (h.mem_init != MemInit::Empty && !method_owns_memory(m)) {
    throw std::invalid_argument("hyper: mem_init requires a memory-owning method");
  }
}

Adapter::Adapter(Method method, const Model& source, const AdapterHyper& hyper,
                 std::uint64_t seed, const ToyDataset* train_data)
    : method_(method),
      hyper_(hyper),
      model_(source),
      seed_(seed),
      train_data_(train_data),
      rng_(Rng::from(seed, kSnapshotTag)) {
  validate_hyper(hyper_, method_);
  validate_model(source);
  if (hyper_.mem_init == MemInit::TrainMem && train_data_ == nullptr) {
    throw std::invalid_argument("adapter: trainmem init needs training data");
  }
  apply_bn_policy();
  if (method_ == Method::RoTTALite) teacher_ = std::make_unique<Model>(source);
  if (method_owns_memory(method_)) {
    bank_ = std::make_unique<MemoryBank>(initial_bank(source));
  }
}

MemoryBank Adapter::initial_bank(const Model& pristine) const {
  Rng init_rng = Rng::from(seed_, kInitTag);
  switch (hyper_.mem_init) {
    case MemInit::Empty:
      return MemoryBank(hyper_.memory_capacity, pristine.num_classes);
    case MemInit::AdvMem:
      return advmem_init(pristine, pristine.num_classes, hyper_.memory_capacity,
                         kAdvMemAlpha, kAdvMemMaxIters, init_rng, /*balanced=*/true);
    case MemInit::TrainMem:
      return trainmem_init(*train_data_, pristine.num_classes, hyper_.memory_capacity,
                           init_rng);
  }
  throw std::logic_error("unreachable");
}

void Adapter::apply_bn_policy() {
  // AdaBN overwrites running statistics outright: an UpdateRunning pass at
  // momentum 1 leaves exactly the batch statistics behind. RoTTALite's
  // student blends them gently instead.
  if (method_ == Method::AdaBN) set_bn_momentum(model_, 1.0);
  if (method_ == Method::RoTTALite) set_bn_momentum(model_, hyper_.bn_blend);
}

void Adapter::reset(const Model& pristine) {
  require_compatible(model_, pristine);
  validate_model(pristine);
  model_ = pristine;
  apply_bn_policy();
  if (method_ == Method::RoTTALite) *teacher_ = pristine;
  if (method_owns_memory(method_)) {
    *bank_ = initial_bank(pristine);
  }
  rng_ = Rng::from(seed_, kSnapshotTag);
}

std::vector<int> Adapter::predict_and_adapt(const Matrix& x) {
  if (x.rows() < 1) throw std::invalid_argument("predict_and_adapt: empty batch");
  if (x.cols() != model_.input_dim) {
    throw std::invalid_argument("predict_and_adapt: feature dim mismatch");
  }
  const Model& frozen = model_;
  switch (method_) {
    case Method::Source:
      return argmax_rows(forward(frozen, x, BnMode::Running));
    case Method::AdaBN:
      if (x.rows() < 2) return argmax_rows(forward(frozen, x, BnMode::Running));
      return argmax_rows(forward(model_, x, BnMode::UpdateRunning));
    case Method::Tent:
    case Method::ShotIM:
      return adapt_live(x);
    case Method::MemTent:
    case Method::MemShotIM:
      return adapt_memory(x);
    case Method::RoTTALite:
      return adapt_rotta(x);
  }
  throw std::logic_error("unreachable");
}

std::vector<int> Adapter::adapt_live(const Matrix& x) {
  if (x.rows() < 2) {
    return argmax_rows(forward(static_cast<const Model&>(model_), x, BnMode::Running));
  }
  const Objective obj =
      method_ == Method::Tent ? Objective::entropy_min() : Objective::info_max();
  const LossResult r =
      loss_and_grads(model_, x, obj, GradScope::BnAffineOnly, BnMode::BatchStats);
  const std::vector<int> preds = argmax_rows(r.probs);  // pre-step forward
  sgd_step(model_, r.grads, hyper_.lr, GradScope::BnAffineOnly);
  return preds;
}

std::vector<int> Adapter::adapt_memory(const Matrix& x) {
  const Matrix logits = forward(static_cast<const Model&>(model_), x, BnMode::Running);
  Matrix probs;
  softmax_rows(logits, probs);
  const std::vector<int> preds = argmax_rows(probs);
  for (int i = 0; i < x.rows(); ++i) {
    bank_->insert(row_vector(x, i), preds[static_cast<std::size_t>(i)],
                  entropy(row_vector(probs, i)));
  }
  const Objective obj =
      method_ == Method::MemTent ? Objective::entropy_min() : Objective::info_max();
  const Batch snap = bank_->snapshot(rng_);
  if (snap.rows() >= 2) {
    const LossResult r =
        loss_and_grads(model_, snap.x, obj, GradScope::BnAffineOnly, BnMode::BatchStats);
    sgd_step(model_, r.grads, hyper_.lr, GradScope::BnAffineOnly);
  }
  if (hyper_.adapt_on_input && x.rows() >= 2) {
    const LossResult r =
        loss_and_grads(model_, x, obj, GradScope::BnAffineOnly, BnMode::BatchStats);
    sgd_step(model_, r.grads, hyper_.lr, GradScope::BnAffineOnly);
  }
  bank_->tick();
  return preds;
}

std::vector<int> Adapter::adapt_rotta(const Matrix& x) {
  const Model& teacher = *teacher_;
  const Matrix t_logits = forward(teacher, x, BnMode::Running);
  Matrix t_probs;
  softmax_rows(t_logits, t_probs);
  const std::vector<int> preds = argmax_rows(t_probs);
  for (int i = 0; i < x.rows(); ++i) {
    bank_->insert(row_vector(x, i), preds[static_cast<std::size_t>(i)],
                  entropy(row_vector(t_probs, i)));
  }
  const Batch snap = bank_->snapshot(rng_);
  if (snap.rows() >= 2) {
    const Matrix mem_logits = forward(teacher, snap.x, BnMode::Running);
    Matrix mem_probs;
    softmax_rows(mem_logits, mem_probs);
    // Sharpened teacher targets at temperature 0.5: q ∝ p².
    Matrix targets(mem_probs.rows(), mem_probs.cols());
    for (int i = 0; i < mem_probs.rows(); ++i) {
      double total = 0.0;
      for (int j = 0; j < mem_probs.cols(); ++j) {
        const double q = mem_probs.row(i)[j] * mem_probs.row(i)[j];
        targets.row(i)[j] = q;
        total += q;
      }
      for (int j = 0; j < mem_probs.cols(); ++j) targets.row(i)[j] /= total;
    }
    // UpdateRunning at momentum bn_blend folds the memory batch statistics
    // into the student's running estimates during the same pass.
    const LossResult r = loss_and_grads(model_, snap.x, Objective::consistency(targets),
                                        GradScope::BnAffineOnly, BnMode::UpdateRunning);
    sgd_step(model_, r.grads, hyper_.lr, GradScope::BnAffineOnly);
    ema_update(*teacher_, model_, hyper_.ema_decay);
  }
  bank_->tick();
  return preds;
}

void Adapter::save_checkpoint(const std::string& path) const {
  ArrayFile f;
  save_model(model_, f);
  if (teacher_) save_model(*teacher_, f, "teacher/");
  if (bank_) {
    const int n = bank_->size();
    const int dim = model_.input_dim;
    std::vector<double> x(static_cast<std::size_t>(n) * static_cast<std::size_t>(dim));
    std::vector<double> y, uncertainty, age, synthetic;
    for (int i = 0; i < n; ++i) {
      const MemoryEntry& e = bank_->entries()[static_cast<std::size_t>(i)];
      std::copy(e.x.begin(), e.x.end(), x.begin() + static_cast<std::size_t>(i) * dim);
      y.push_back(e.y);
      uncertainty.push_back(e.uncertainty);
      age.push_back(e.age);
      synthetic.push_back(e.synthetic ? 1.0 : 0.0);
    }
    f.put("bank/x", {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(dim)},
          std::move(x));
    f.put_vector("bank/y", y);
    f.put_vector("bank/uncertainty", uncertainty);
    f.put_vector("bank/age", age);
    f.put_vector("bank/synthetic", synthetic);
    f.put_scalar("bank/capacity", bank_->capacity());
    f.put_scalar("bank/num_classes", bank_->num_classes());
  }
  f.save(path);
}

}  // namespace ttalab
