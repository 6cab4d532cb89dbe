#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ttalab/array_file.hpp"
#include "ttalab/matrix.hpp"
#include "ttalab/rng.hpp"

namespace ttalab {

struct DenseLayer {
  Matrix w;                // [in × out]
  std::vector<double> b;   // [out]
};

struct BatchNormLayer {
  std::vector<double> running_mean;
  std::vector<double> running_var;   // elementwise >= 0
  std::vector<double> scale;         // affine gamma
  std::vector<double> shift;         // affine beta
  double momentum = 0.1;
  double eps = 1e-5;
};

struct ReluLayer {};

using Layer = std::variant<DenseLayer, BatchNormLayer, ReluLayer>;

struct Model {
  std::vector<Layer> layers;
  int input_dim = 0;
  int num_classes = 0;
};

// The fixed classifier shape: Dense(in→H) → BN → ReLU → Dense(H→H) → BN →
// ReLU → Dense(H→K). Weights He-initialized from rng, biases zero, BN at
// identity with zero running mean and unit running variance.
Model make_mlp(int input_dim, int hidden, int num_classes, Rng& rng);

// Single dense layer with identity weights and zero bias (test fixture shape).
Model make_identity_model(int dim);

void validate_model(const Model& m);

enum class BnMode { Running, BatchStats, UpdateRunning };

// Forward pass. Running normalizes by stored statistics and never mutates.
// BatchStats normalizes by the batch's own mean and biased variance.
// UpdateRunning behaves like BatchStats and additionally blends the batch
// statistics into the running statistics with each layer's momentum.
// Batch-stat modes require B >= 2.
Matrix forward(Model& model, const Matrix& x, BnMode mode);
Matrix forward(const Model& model, const Matrix& x, BnMode mode);  // rejects UpdateRunning

void softmax_rows(const Matrix& logits, Matrix& probs_out);
std::vector<double> softmax(const std::vector<double>& logits);

// Shannon entropy in nats; p must be a valid distribution. 0·ln 0 := 0.
double entropy(const std::vector<double>& p);

enum class ObjectiveKind {
  CrossEntropy,  // hard labels
  EntropyMin,    // mean per-sample prediction entropy
  InfoMax,       // mean per-sample entropy minus entropy of the mean prediction
  Consistency,   // cross-entropy against fixed soft targets
};

struct Objective {
  ObjectiveKind kind;
  std::vector<int> labels;  // CrossEntropy
  Matrix targets;           // Consistency: [B × K] rows are distributions

  static Objective cross_entropy(std::vector<int> labels);
  static Objective entropy_min();
  static Objective info_max();
  static Objective consistency(Matrix targets);
};

enum class GradScope { InputOnly, BnAffineOnly, AllParams };

struct DenseGrads {
  Matrix w;
  std::vector<double> b;
};

struct BnAffineGrads {
  std::vector<double> scale;
  std::vector<double> shift;
};

struct Gradients {
  std::vector<DenseGrads> dense;  // per dense layer in model order (AllParams)
  std::vector<BnAffineGrads> bn;  // per BN layer in model order (BnAffineOnly, AllParams)
  Matrix input;                   // [B × input_dim] (InputOnly)
};

struct LossResult {
  double loss = 0.0;
  Gradients grads;
  Matrix probs;  // softmax of the forward pass that produced the loss
};

// Computes the objective and its gradient for the requested parameter set;
// everything outside the set is left untouched and gets no gradient entry.
// Allowed combinations: CrossEntropy with InputOnly (Running mode only) or
// AllParams (batch-stat modes); EntropyMin / InfoMax / Consistency with
// BnAffineOnly (BatchStats, or UpdateRunning where the caller wants the
// side-effect blend). UpdateRunning mutates the model's running statistics.
LossResult loss_and_grads(Model& model, const Matrix& x, const Objective& objective,
                          GradScope wrt, BnMode mode = BnMode::BatchStats);
LossResult loss_and_grads(const Model& model, const Matrix& x, const Objective& objective,
                          GradScope wrt, BnMode mode = BnMode::BatchStats);

// p ← p − lr·g for every gradient entry present, restricted to the scope.
// lr must be non-negative; lr = 0 is a legal null step.
void sgd_step(Model& model, const Gradients& grads, double lr, GradScope scope);

// State fingerprints for parameter-isolation checks.
std::uint64_t hash_dense_params(const Model& m);
std::uint64_t hash_bn_affine(const Model& m);
std::uint64_t hash_bn_stats(const Model& m);
std::uint64_t hash_all_state(const Model& m);

// Checkpoint round trip in the shared named-array container; bit-exact.
// `prefix` namespaces the arrays so several models can share one file.
void save_model(const Model& m, ArrayFile& out, const std::string& prefix = "");
Model load_model(const ArrayFile& in, const std::string& prefix = "");
void save_model_file(const Model& m, const std::string& path);
Model load_model_file(const std::string& path);

}  // namespace ttalab
