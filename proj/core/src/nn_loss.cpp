#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ttalab/nn.hpp"

namespace ttalab {
namespace {

bool all_finite(const double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(p[i])) return false;
  }
  return true;
}

struct BnTrace {
  Matrix xhat;                  // normalized pre-affine activations
  std::vector<double> inv_std;  // 1/sqrt(var + eps), batch or running
  bool batch_stats = false;
};

// Activations before/after every layer plus the BN internals the backward
// pass needs. acts[i] is the input of layer i; acts.back() is the logits.
struct ForwardTrace {
  std::vector<Matrix> acts;
  std::vector<BnTrace> bn;  // parallel to BN layers in model order
};

ForwardTrace forward_trace(Model& model, const Matrix& x, BnMode mode) {
  ForwardTrace t;
  t.acts.reserve(model.layers.size() + 1);
  t.acts.push_back(x);
  for (Layer& layer : model.layers) {
    const Matrix& cur = t.acts.back();
    if (auto* d = std::get_if<DenseLayer>(&layer)) {
      Matrix next(cur.rows(), d->w.cols());
      matmul(cur, d->w, next);
      for (int i = 0; i < next.rows(); ++i) {
        double* r = next.row(i);
        for (int j = 0; j < next.cols(); ++j) r[j] += d->b[j];
      }
      t.acts.push_back(std::move(next));
    } else if (auto* bn = std::get_if<BatchNormLayer>(&layer)) {
      const int b = cur.rows(), n = cur.cols();
      BnTrace bt;
      bt.batch_stats = mode != BnMode::Running;
      std::vector<double> mean(n, 0.0), var(n, 0.0);
      if (bt.batch_stats) {
        for (int i = 0; i < b; ++i) {
          const double* r = cur.row(i);
          for (int j = 0; j < n; ++j) mean[j] += r[j];
        }
        for (int j = 0; j < n; ++j) mean[j] /= b;
        for (int i = 0; i < b; ++i) {
          const double* r = cur.row(i);
          for (int j = 0; j < n; ++j) {
            const double dv = r[j] - mean[j];
            var[j] += dv * dv;
          }
        }
        for (int j = 0; j < n; ++j) var[j] /= b;
        if (mode == BnMode::UpdateRunning) {
          const double m = bn->momentum;
          for (int j = 0; j < n; ++j) {
            bn->running_mean[j] = (1.0 - m) * bn->running_mean[j] + m * mean[j];
            bn->running_var[j] = (1.0 - m) * bn->running_var[j] + m * var[j];
          }
        }
      } else {
        mean = bn->running_mean;
        var = bn->running_var;
      }
      bt.inv_std.resize(n);
      for (int j = 0; j < n; ++j) bt.inv_std[j] = 1.0 / std::sqrt(var[j] + bn->eps);
      bt.xhat = Matrix(b, n);
      Matrix out(b, n);
      for (int i = 0; i < b; ++i) {
        const double* r = cur.row(i);
        double* xh = bt.xhat.row(i);
        double* o = out.row(i);
        for (int j = 0; j < n; ++j) {
          xh[j] = (r[j] - mean[j]) * bt.inv_std[j];
          o[j] = bn->scale[j] * xh[j] + bn->shift[j];
        }
      }
      t.bn.push_back(std::move(bt));
      t.acts.push_back(std::move(out));
    } else {
      Matrix out = cur;
      for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::max(0.0, out.data()[i]);
      t.acts.push_back(std::move(out));
    }
  }
  return t;
}

// Row-wise log-softmax and softmax computed together from the logits.
void log_softmax_rows(const Matrix& z, Matrix& logp, Matrix& p) {
  const int b = z.rows(), k = z.cols();
  logp = Matrix(b, k);
  p = Matrix(b, k);
  for (int i = 0; i < b; ++i) {
    const double* zi = z.row(i);
    double zmax = zi[0];
    for (int j = 1; j < k; ++j) zmax = std::max(zmax, zi[j]);
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += std::exp(zi[j] - zmax);
    const double lse = zmax + std::log(sum);
    double* lp = logp.row(i);
    double* pi = p.row(i);
    for (int j = 0; j < k; ++j) {
      lp[j] = zi[j] - lse;
      pi[j] = std::exp(lp[j]);
    }
  }
}

void validate_combination(const Objective& objective, GradScope wrt, BnMode mode) {
  switch (objective.kind) {
    case ObjectiveKind::CrossEntropy:
      if (wrt == GradScope::InputOnly) {
        if (mode != BnMode::Running) {
          throw std::invalid_argument("loss_and_grads: input-gradient cross-entropy runs in Running mode");
        }
      } else if (wrt == GradScope::AllParams) {
        if (mode == BnMode::Running) {
          throw std::invalid_argument("loss_and_grads: training cross-entropy needs batch statistics");
        }
      } else {
        throw std::invalid_argument("loss_and_grads: cross-entropy supports InputOnly or AllParams");
      }
      break;
    case ObjectiveKind::EntropyMin:
    case ObjectiveKind::InfoMax:
      if (wrt != GradScope::BnAffineOnly || mode != BnMode::BatchStats) {
        throw std::invalid_argument("loss_and_grads: entropy objectives require BnAffineOnly with BatchStats");
      }
      break;
    case ObjectiveKind::Consistency:
      if (wrt != GradScope::BnAffineOnly || mode == BnMode::Running) {
        throw std::invalid_argument("loss_and_grads: consistency requires BnAffineOnly with batch statistics");
      }
      break;
  }
}

// Loss value and its gradient with respect to the logits.
double logits_gradient(const Objective& objective, const Matrix& logp, const Matrix& p, Matrix& dz) {
  const int b = p.rows(), k = p.cols();
  dz = Matrix(b, k);
  const double invb = 1.0 / b;
  switch (objective.kind) {
    case ObjectiveKind::CrossEntropy: {
      if (static_cast<int>(objective.labels.size()) != b) {
        throw std::invalid_argument("loss_and_grads: label count != batch size");
      }
      double loss = 0.0;
      for (int i = 0; i < b; ++i) {
        const int y = objective.labels[i];
        if (y < 0 || y >= k) throw std::invalid_argument("loss_and_grads: label out of range");
        loss -= logp(i, y);
        const double* pi = p.row(i);
        double* d = dz.row(i);
        for (int j = 0; j < k; ++j) d[j] = pi[j] * invb;
        d[y] -= invb;
      }
      return loss * invb;
    }
    case ObjectiveKind::Consistency: {
      const Matrix& q = objective.targets;
      if (q.rows() != b || q.cols() != k) throw std::invalid_argument("loss_and_grads: target shape mismatch");
      double loss = 0.0;
      for (int i = 0; i < b; ++i) {
        const double* qi = q.row(i);
        const double* pi = p.row(i);
        const double* lpi = logp.row(i);
        double* d = dz.row(i);
        double qsum = 0.0;
        for (int j = 0; j < k; ++j) {
          if (qi[j] < 0.0) throw std::invalid_argument("loss_and_grads: negative target probability");
          qsum += qi[j];
          loss -= qi[j] * lpi[j];
          d[j] = (pi[j] - qi[j]) * invb;
        }
        if (std::abs(qsum - 1.0) > 1e-6) throw std::invalid_argument("loss_and_grads: target row not a distribution");
      }
      return loss * invb;
    }
    case ObjectiveKind::EntropyMin: {
      double loss = 0.0;
      for (int i = 0; i < b; ++i) {
        const double* pi = p.row(i);
        const double* lpi = logp.row(i);
        double* d = dz.row(i);
        double h = 0.0;
        for (int j = 0; j < k; ++j) h -= pi[j] * lpi[j];
        loss += h;
        for (int j = 0; j < k; ++j) d[j] = -pi[j] * (lpi[j] + h) * invb;
      }
      return loss * invb;
    }
    case ObjectiveKind::InfoMax: {
      // Mean per-sample entropy minus entropy of the mean prediction; the
      // marginal term rewards diverse predictions across the batch.
      std::vector<double> pbar(k, 0.0);
      for (int i = 0; i < b; ++i) {
        const double* pi = p.row(i);
        for (int j = 0; j < k; ++j) pbar[j] += pi[j];
      }
      std::vector<double> ln_pbar(k, 0.0);
      double h_bar = 0.0;
      for (int j = 0; j < k; ++j) {
        pbar[j] *= invb;
        if (pbar[j] > 0.0) {
          ln_pbar[j] = std::log(pbar[j]);
          h_bar -= pbar[j] * ln_pbar[j];
        }
      }
      double mean_h = 0.0;
      for (int i = 0; i < b; ++i) {
        const double* pi = p.row(i);
        const double* lpi = logp.row(i);
        double* d = dz.row(i);
        double h = 0.0;
        for (int j = 0; j < k; ++j) h -= pi[j] * lpi[j];
        mean_h += h;
        double s = 0.0;
        for (int j = 0; j < k; ++j) s += pi[j] * ln_pbar[j];
        for (int j = 0; j < k; ++j) {
          d[j] = (-pi[j] * (lpi[j] + h) + pi[j] * (ln_pbar[j] - s)) * invb;
        }
      }
      return mean_h * invb - h_bar;
    }
  }
  throw std::logic_error("loss_and_grads: unhandled objective");
}

}  // namespace

Objective Objective::cross_entropy(std::vector<int> labels) {
  return Objective{ObjectiveKind::CrossEntropy, std::move(labels), Matrix()};
}
Objective Objective::entropy_min() { return Objective{ObjectiveKind::EntropyMin, {}, Matrix()}; }
Objective Objective::info_max() { return Objective{ObjectiveKind::InfoMax, {}, Matrix()}; }
Objective Objective::consistency(Matrix targets) {
  return Objective{ObjectiveKind::Consistency, {}, std::move(targets)};
}

LossResult loss_and_grads(Model& model, const Matrix& x, const Objective& objective,
                          GradScope wrt, BnMode mode) {
  validate_combination(objective, wrt, mode);
  if (x.cols() != model.input_dim) throw std::invalid_argument("loss_and_grads: input dim mismatch");
  if (x.rows() < 1) throw std::invalid_argument("loss_and_grads: empty batch");
  if (mode != BnMode::Running && x.rows() < 2) {
    throw std::invalid_argument("loss_and_grads: batch-stat modes require B >= 2");
  }
  if (!all_finite(x.data(), x.size())) throw std::invalid_argument("loss_and_grads: non-finite input");

  ForwardTrace trace = forward_trace(model, x, mode);
  Matrix logp, probs;
  log_softmax_rows(trace.acts.back(), logp, probs);

  LossResult result;
  Matrix dcur;
  result.loss = logits_gradient(objective, logp, probs, dcur);
  if (!std::isfinite(result.loss)) throw std::runtime_error("loss_and_grads: non-finite loss");
  result.probs = std::move(probs);

  const int n_layers = static_cast<int>(model.layers.size());
  const bool want_dense = wrt == GradScope::AllParams;
  const bool want_bn = wrt == GradScope::BnAffineOnly || wrt == GradScope::AllParams;
  const bool want_input = wrt == GradScope::InputOnly;

  // Index of the lowest layer whose gradients are requested; the backward
  // chain stops once it has passed it.
  int lowest = want_input ? -1 : n_layers;
  if (!want_input) {
    for (int i = 0; i < n_layers; ++i) {
      const bool is_dense = std::holds_alternative<DenseLayer>(model.layers[i]);
      const bool is_bn = std::holds_alternative<BatchNormLayer>(model.layers[i]);
      if ((want_dense && is_dense) || (want_bn && is_bn)) {
        lowest = i;
        break;
      }
    }
  }

  int bn_count = 0;
  for (const Layer& l : model.layers) bn_count += std::holds_alternative<BatchNormLayer>(l) ? 1 : 0;
  int dense_count = 0;
  for (const Layer& l : model.layers) dense_count += std::holds_alternative<DenseLayer>(l) ? 1 : 0;
  if (want_bn) result.grads.bn.resize(bn_count);
  if (want_dense) result.grads.dense.resize(dense_count);

  int bn_idx = bn_count;
  int dense_idx = dense_count;
  for (int li = n_layers - 1; li >= lowest && li >= 0; --li) {
    const bool need_below = li > lowest || want_input;
    const Matrix& input = trace.acts[li];
    if (auto* d = std::get_if<DenseLayer>(&model.layers[li])) {
      --dense_idx;
      if (want_dense) {
        DenseGrads& g = result.grads.dense[dense_idx];
        g.w = Matrix(d->w.rows(), d->w.cols());
        matmul_at_b(input, dcur, g.w);
        g.b.assign(d->b.size(), 0.0);
        for (int i = 0; i < dcur.rows(); ++i) {
          const double* r = dcur.row(i);
          for (std::size_t j = 0; j < g.b.size(); ++j) g.b[j] += r[j];
        }
      }
      if (need_below) {
        Matrix dx(dcur.rows(), d->w.rows());
        matmul_a_bt(dcur, d->w, dx);
        dcur = std::move(dx);
      }
    } else if (auto* bn = std::get_if<BatchNormLayer>(&model.layers[li])) {
      --bn_idx;
      const BnTrace& bt = trace.bn[bn_idx];
      const int b = dcur.rows(), n = dcur.cols();
      if (want_bn) {
        BnAffineGrads& g = result.grads.bn[bn_idx];
        g.scale.assign(n, 0.0);
        g.shift.assign(n, 0.0);
        for (int i = 0; i < b; ++i) {
          const double* dr = dcur.row(i);
          const double* xh = bt.xhat.row(i);
          for (int j = 0; j < n; ++j) {
            g.scale[j] += dr[j] * xh[j];
            g.shift[j] += dr[j];
          }
        }
      }
      if (need_below) {
        if (bt.batch_stats) {
          // d/dx of batch normalization with the biased variance estimator:
          // dx = inv_std * (dxhat - mean(dxhat) - xhat * mean(dxhat*xhat)).
          std::vector<double> mean_dxh(n, 0.0), mean_dxh_xh(n, 0.0);
          Matrix dxhat(b, n);
          for (int i = 0; i < b; ++i) {
            const double* dr = dcur.row(i);
            const double* xh = bt.xhat.row(i);
            double* dxh = dxhat.row(i);
            for (int j = 0; j < n; ++j) {
              dxh[j] = dr[j] * bn->scale[j];
              mean_dxh[j] += dxh[j];
              mean_dxh_xh[j] += dxh[j] * xh[j];
            }
          }
          for (int j = 0; j < n; ++j) {
            mean_dxh[j] /= b;
            mean_dxh_xh[j] /= b;
          }
          Matrix dx(b, n);
          for (int i = 0; i < b; ++i) {
            const double* dxh = dxhat.row(i);
            const double* xh = bt.xhat.row(i);
            double* o = dx.row(i);
            for (int j = 0; j < n; ++j) {
              o[j] = bt.inv_std[j] * (dxh[j] - mean_dxh[j] - xh[j] * mean_dxh_xh[j]);
            }
          }
          dcur = std::move(dx);
        } else {
          for (int i = 0; i < b; ++i) {
            double* dr = dcur.row(i);
            for (int j = 0; j < n; ++j) dr[j] *= bn->scale[j] * bt.inv_std[j];
          }
        }
      }
    } else {
      if (need_below) {
        const Matrix& out = trace.acts[li + 1];
        for (int i = 0; i < dcur.rows(); ++i) {
          double* dr = dcur.row(i);
          const double* o = out.row(i);
          for (int j = 0; j < dcur.cols(); ++j) {
            if (o[j] <= 0.0) dr[j] = 0.0;
          }
        }
      }
      (void)input;
    }
  }
  if (want_input) result.grads.input = std::move(dcur);
  return result;
}

LossResult loss_and_grads(const Model& model, const Matrix& x, const Objective& objective,
                          GradScope wrt, BnMode mode) {
  if (mode == BnMode::UpdateRunning) {
    throw std::invalid_argument("loss_and_grads: UpdateRunning requires a mutable model");
  }
  return loss_and_grads(const_cast<Model&>(model), x, objective, wrt, mode);
}

}  // namespace ttalab
