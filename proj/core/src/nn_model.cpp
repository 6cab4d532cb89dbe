#include "ttalab/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace ttalab {
namespace {

bool all_finite(const double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(p[i])) return false;
  }
  return true;
}

int layer_output_dim(const Layer& layer, int in_dim) {
  if (const auto* d = std::get_if<DenseLayer>(&layer)) {
    if (d->w.rows() != in_dim) throw std::invalid_argument("model: dense input dim mismatch");
    if (static_cast<int>(d->b.size()) != d->w.cols()) throw std::invalid_argument("model: dense bias dim mismatch");
    return d->w.cols();
  }
  if (const auto* bn = std::get_if<BatchNormLayer>(&layer)) {
    const auto n = static_cast<std::size_t>(in_dim);
    if (bn->running_mean.size() != n || bn->running_var.size() != n || bn->scale.size() != n ||
        bn->shift.size() != n) {
      throw std::invalid_argument("model: batchnorm dim mismatch");
    }
    if (!(bn->eps > 0.0)) throw std::invalid_argument("model: batchnorm eps must be positive");
    if (!(bn->momentum > 0.0 && bn->momentum <= 1.0)) throw std::invalid_argument("model: batchnorm momentum out of range");
    for (double v : bn->running_var) {
      if (v < 0.0) throw std::invalid_argument("model: negative running variance");
    }
    return in_dim;
  }
  return in_dim;  // ReLU
}

void bn_forward_running(const BatchNormLayer& bn, Matrix& x) {
  const int n = x.cols();
  std::vector<double> a(n), c(n);
  for (int j = 0; j < n; ++j) {
    const double inv = 1.0 / std::sqrt(bn.running_var[j] + bn.eps);
    a[j] = bn.scale[j] * inv;
    c[j] = bn.shift[j] - bn.running_mean[j] * a[j];
  }
  for (int i = 0; i < x.rows(); ++i) {
    double* r = x.row(i);
    for (int j = 0; j < n; ++j) r[j] = r[j] * a[j] + c[j];
  }
}

void batch_mean_var(const Matrix& x, std::vector<double>& mean, std::vector<double>& var) {
  const int b = x.rows(), n = x.cols();
  mean.assign(n, 0.0);
  var.assign(n, 0.0);
  for (int i = 0; i < b; ++i) {
    const double* r = x.row(i);
    for (int j = 0; j < n; ++j) mean[j] += r[j];
  }
  for (int j = 0; j < n; ++j) mean[j] /= b;
  for (int i = 0; i < b; ++i) {
    const double* r = x.row(i);
    for (int j = 0; j < n; ++j) {
      const double d = r[j] - mean[j];
      var[j] += d * d;
    }
  }
  for (int j = 0; j < n; ++j) var[j] /= b;  // biased estimator
}

void bn_forward_batch(BatchNormLayer& bn, Matrix& x, bool update_running) {
  const int n = x.cols();
  std::vector<double> mean, var;
  batch_mean_var(x, mean, var);
  if (update_running) {
    const double m = bn.momentum;
    for (int j = 0; j < n; ++j) {
      bn.running_mean[j] = (1.0 - m) * bn.running_mean[j] + m * mean[j];
      bn.running_var[j] = (1.0 - m) * bn.running_var[j] + m * var[j];
    }
  }
  std::vector<double> a(n), c(n);
  for (int j = 0; j < n; ++j) {
    const double inv = 1.0 / std::sqrt(var[j] + bn.eps);
    a[j] = bn.scale[j] * inv;
    c[j] = bn.shift[j] - mean[j] * a[j];
  }
  for (int i = 0; i < x.rows(); ++i) {
    double* r = x.row(i);
    for (int j = 0; j < n; ++j) r[j] = r[j] * a[j] + c[j];
  }
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t hash_vec(std::uint64_t h, const std::vector<double>& v) {
  return fnv1a(h, v.data(), v.size() * sizeof(double));
}

}  // namespace

Model make_mlp(int input_dim, int hidden, int num_classes, Rng& rng) {
  if (input_dim < 1 || hidden < 1 || num_classes < 2) throw std::invalid_argument("make_mlp: bad dims");
  Model m;
  m.input_dim = input_dim;
  m.num_classes = num_classes;
  auto dense = [&rng](int in, int out) {
    DenseLayer d;
    d.w = Matrix(in, out);
    const double std = std::sqrt(2.0 / in);
    for (int i = 0; i < in; ++i) {
      for (int j = 0; j < out; ++j) d.w(i, j) = rng.normal(0.0, std);
    }
    d.b.assign(out, 0.0);
    return d;
  };
  auto bn = [](int n) {
    BatchNormLayer l;
    l.running_mean.assign(n, 0.0);
    l.running_var.assign(n, 1.0);
    l.scale.assign(n, 1.0);
    l.shift.assign(n, 0.0);
    return l;
  };
  m.layers.emplace_back(dense(input_dim, hidden));
  m.layers.emplace_back(bn(hidden));
  m.layers.emplace_back(ReluLayer{});
  m.layers.emplace_back(dense(hidden, hidden));
  m.layers.emplace_back(bn(hidden));
  m.layers.emplace_back(ReluLayer{});
  m.layers.emplace_back(dense(hidden, num_classes));
  validate_model(m);
  return m;
}

Model make_identity_model(int dim) {
  Model m;
  m.input_dim = dim;
  m.num_classes = dim;
  DenseLayer d;
  d.w = Matrix(dim, dim);
  for (int i = 0; i < dim; ++i) d.w(i, i) = 1.0;
  d.b.assign(dim, 0.0);
  m.layers.emplace_back(std::move(d));
  return m;
}

void validate_model(const Model& m) {
  if (m.input_dim < 1) throw std::invalid_argument("model: input_dim must be positive");
  if (m.num_classes < 1) throw std::invalid_argument("model: num_classes must be positive");
  int dim = m.input_dim;
  for (const Layer& l : m.layers) dim = layer_output_dim(l, dim);
  if (dim != m.num_classes) throw std::invalid_argument("model: final dim != num_classes");
}

Matrix forward(Model& model, const Matrix& x, BnMode mode) {
  if (x.cols() != model.input_dim) throw std::invalid_argument("forward: input dim mismatch");
  if (x.rows() < 1) throw std::invalid_argument("forward: empty batch");
  if ((mode == BnMode::BatchStats || mode == BnMode::UpdateRunning) && x.rows() < 2) {
    throw std::invalid_argument("forward: batch-stat modes require B >= 2");
  }
  if (!all_finite(x.data(), x.size())) throw std::invalid_argument("forward: non-finite input");

  Matrix cur = x;
  for (Layer& layer : model.layers) {
    if (auto* d = std::get_if<DenseLayer>(&layer)) {
      Matrix next(cur.rows(), d->w.cols());
      matmul(cur, d->w, next);
      for (int i = 0; i < next.rows(); ++i) {
        double* r = next.row(i);
        for (int j = 0; j < next.cols(); ++j) r[j] += d->b[j];
      }
      cur = std::move(next);
    } else if (auto* bn = std::get_if<BatchNormLayer>(&layer)) {
      if (mode == BnMode::Running) {
        bn_forward_running(*bn, cur);
      } else {
        bn_forward_batch(*bn, cur, mode == BnMode::UpdateRunning);
      }
    } else {
      for (int i = 0; i < cur.rows(); ++i) {
        double* r = cur.row(i);
        for (int j = 0; j < cur.cols(); ++j) r[j] = std::max(0.0, r[j]);
      }
    }
  }
  return cur;
}

Matrix forward(const Model& model, const Matrix& x, BnMode mode) {
  if (mode == BnMode::UpdateRunning) {
    throw std::invalid_argument("forward: UpdateRunning requires a mutable model");
  }
  return forward(const_cast<Model&>(model), x, mode);  // modes above never mutate
}

void softmax_rows(const Matrix& logits, Matrix& probs_out) {
  if (!all_finite(logits.data(), logits.size())) throw std::invalid_argument("softmax: non-finite logits");
  if (!probs_out.same_shape(logits)) probs_out = Matrix(logits.rows(), logits.cols());
  const int k = logits.cols();
  for (int i = 0; i < logits.rows(); ++i) {
    const double* z = logits.row(i);
    double* p = probs_out.row(i);
    double zmax = z[0];
    for (int j = 1; j < k; ++j) zmax = std::max(zmax, z[j]);
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      p[j] = std::exp(z[j] - zmax);
      sum += p[j];
    }
    const double inv = 1.0 / sum;
    for (int j = 0; j < k; ++j) p[j] *= inv;
  }
}

std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty input");
  Matrix z(1, static_cast<int>(logits.size()));
  for (std::size_t j = 0; j < logits.size(); ++j) z(0, static_cast<int>(j)) = logits[j];
  Matrix p;
  softmax_rows(z, p);
  return std::vector<double>(p.row(0), p.row(0) + logits.size());
}

double entropy(const std::vector<double>& p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw std::invalid_argument("entropy: negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument("entropy: probabilities do not sum to 1");
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return std::max(0.0, h);
}

void sgd_step(Model& model, const Gradients& grads, double lr, GradScope scope) {
  if (!(lr >= 0.0)) throw std::invalid_argument("sgd_step: negative learning rate");
  if (scope == GradScope::InputOnly) {
    throw std::invalid_argument("sgd_step: InputOnly gradients do not apply to model parameters");
  }
  std::size_t di = 0, bi = 0;
  for (Layer& layer : model.layers) {
    if (auto* d = std::get_if<DenseLayer>(&layer)) {
      if (scope == GradScope::AllParams) {
        if (di >= grads.dense.size()) throw std::invalid_argument("sgd_step: missing dense gradients");
        const DenseGrads& g = grads.dense[di];
        if (!g.w.same_shape(d->w) || g.b.size() != d->b.size()) throw std::invalid_argument("sgd_step: dense shape mismatch");
        for (std::size_t i = 0; i < d->w.size(); ++i) d->w.data()[i] -= lr * g.w.data()[i];
        for (std::size_t i = 0; i < d->b.size(); ++i) d->b[i] -= lr * g.b[i];
      }
      ++di;
    } else if (auto* bn = std::get_if<BatchNormLayer>(&layer)) {
      if (bi >= grads.bn.size()) throw std::invalid_argument("sgd_step: missing batchnorm gradients");
      const BnAffineGrads& g = grads.bn[bi];
      if (g.scale.size() != bn->scale.size() || g.shift.size() != bn->shift.size()) {
        throw std::invalid_argument("sgd_step: batchnorm shape mismatch");
      }
      for (std::size_t i = 0; i < bn->scale.size(); ++i) bn->scale[i] -= lr * g.scale[i];
      for (std::size_t i = 0; i < bn->shift.size(); ++i) bn->shift[i] -= lr * g.shift[i];
      ++bi;
    }
  }
}

std::uint64_t hash_dense_params(const Model& m) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const Layer& l : m.layers) {
    if (const auto* d = std::get_if<DenseLayer>(&l)) {
      h = fnv1a(h, d->w.data(), d->w.size() * sizeof(double));
      h = hash_vec(h, d->b);
    }
  }
  return h;
}

std::uint64_t hash_bn_affine(const Model& m) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const Layer& l : m.layers) {
    if (const auto* bn = std::get_if<BatchNormLayer>(&l)) {
      h = hash_vec(h, bn->scale);
      h = hash_vec(h, bn->shift);
    }
  }
  return h;
}

std::uint64_t hash_bn_stats(const Model& m) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const Layer& l : m.layers) {
    if (const auto* bn = std::get_if<BatchNormLayer>(&l)) {
      h = hash_vec(h, bn->running_mean);
      h = hash_vec(h, bn->running_var);
    }
  }
  return h;
}

std::uint64_t hash_all_state(const Model& m) {
  std::uint64_t h = hash_dense_params(m);
  h ^= hash_bn_affine(m) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  h ^= hash_bn_stats(m) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

void save_model(const Model& m, ArrayFile& out, const std::string& ns) {
  out.put_scalar(ns + "model/input_dim", m.input_dim);
  out.put_scalar(ns + "model/num_classes", m.num_classes);
  out.put_scalar(ns + "model/num_layers", static_cast<double>(m.layers.size()));
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const std::string prefix = ns + "model/layer" + std::to_string(i) + "/";
    if (const auto* d = std::get_if<DenseLayer>(&m.layers[i])) {
      out.put_scalar(prefix + "kind", 0.0);
      out.put(prefix + "w", {static_cast<std::uint64_t>(d->w.rows()), static_cast<std::uint64_t>(d->w.cols())},
              std::vector<double>(d->w.data(), d->w.data() + d->w.size()));
      out.put_vector(prefix + "b", d->b);
    } else if (const auto* bn = std::get_if<BatchNormLayer>(&m.layers[i])) {
      out.put_scalar(prefix + "kind", 1.0);
      out.put_vector(prefix + "running_mean", bn->running_mean);
      out.put_vector(prefix + "running_var", bn->running_var);
      out.put_vector(prefix + "scale", bn->scale);
      out.put_vector(prefix + "shift", bn->shift);
      out.put_scalar(prefix + "momentum", bn->momentum);
      out.put_scalar(prefix + "eps", bn->eps);
    } else {
      out.put_scalar(prefix + "kind", 2.0);
    }
  }
}

Model load_model(const ArrayFile& in, const std::string& ns) {
  Model m;
  m.input_dim = static_cast<int>(in.get_scalar(ns + "model/input_dim"));
  m.num_classes = static_cast<int>(in.get_scalar(ns + "model/num_classes"));
  const auto n_layers = static_cast<std::size_t>(in.get_scalar(ns + "model/num_layers"));
  for (std::size_t i = 0; i < n_layers; ++i) {
    const std::string prefix = ns + "model/layer" + std::to_string(i) + "/";
    const int kind = static_cast<int>(in.get_scalar(prefix + "kind"));
    if (kind == 0) {
      const NamedArray& wa = in.get(prefix + "w");
      if (wa.dims.size() != 2) throw std::runtime_error("checkpoint: dense weight must be 2-d");
      DenseLayer d;
      d.w = Matrix(static_cast<int>(wa.dims[0]), static_cast<int>(wa.dims[1]));
      std::copy(wa.data.begin(), wa.data.end(), d.w.data());
      d.b = in.get(prefix + "b").data;
      m.layers.emplace_back(std::move(d));
    } else if (kind == 1) {
      BatchNormLayer bn;
      bn.running_mean = in.get(prefix + "running_mean").data;
      bn.running_var = in.get(prefix + "running_var").data;
      bn.scale = in.get(prefix + "scale").data;
      bn.shift = in.get(prefix + "shift").data;
      bn.momentum = in.get_scalar(prefix + "momentum");
      bn.eps = in.get_scalar(prefix + "eps");
      m.layers.emplace_back(std::move(bn));
    } else if (kind == 2) {
      m.layers.emplace_back(ReluLayer{});
    } else {
      throw std::runtime_error("checkpoint: unknown layer kind");
    }
  }
  validate_model(m);
  return m;
}

void save_model_file(const Model& m, const std::string& path) {
  ArrayFile f;
  save_model(m, f);
  f.save(path);
}

Model load_model_file(const std::string& path) { return load_model(ArrayFile::load(path)); }

}  // namespace ttalab
