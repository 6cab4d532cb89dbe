#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ttalab/harness.hpp"

namespace ttalab {
namespace {

constexpr int kHiddenUnits = 128;
constexpr int kTrainBatch = 64;
constexpr int kEvalBatch = 256;

struct FlatSplit {
  std::vector<const Image*> frames;
  std::vector<int> labels;
};

FlatSplit flatten(const std::vector<Tracklet>& split) {
  FlatSplit out;
  for (const Tracklet& t : split) {
    for (const Image& f : t.frames) {
      out.frames.push_back(&f);
      out.labels.push_back(t.label);
    }
  }
  return out;
}

void fill_rows(Matrix& x, const FlatSplit& flat, const std::vector<int>& idx, int from,
               int count) {
  for (int i = 0; i < count; ++i) {
    const Image& img = *flat.frames[static_cast<std::size_t>(idx[static_cast<std::size_t>(from + i)])];
    std::copy(img.data(), img.data() + img.size(), x.row(i));
  }
}

}  // namespace

double evaluate_error(const Model& m, const std::vector<Tracklet>& split) {
  const FlatSplit flat = flatten(split);
  if (flat.frames.empty()) throw std::invalid_argument("evaluate_error: empty split");
  const int dim = m.input_dim;
  int wrong = 0;
  std::vector<int> idx(flat.frames.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t at = 0; at < flat.frames.size(); at += kEvalBatch) {
    const int b = static_cast<int>(std::min<std::size_t>(kEvalBatch, flat.frames.size() - at));
    Matrix x(b, dim);
    fill_rows(x, flat, idx, static_cast<int>(at), b);
    const Matrix logits = forward(m, x, BnMode::Running);
    for (int i = 0; i < b; ++i) {
      const double* row = logits.row(i);
      const int pred = static_cast<int>(std::max_element(row, row + logits.cols()) - row);
      wrong += pred != flat.labels[at + static_cast<std::size_t>(i)] ? 1 : 0;
    }
  }
  return static_cast<double>(wrong) / static_cast<double>(flat.frames.size());
}

Model train_source_model(const ToyDataset& ds, int epochs, double lr, Rng& rng,
                         std::vector<double>* epoch_losses, double error_threshold) {
  if (ds.train.empty()) throw std::invalid_argument("train: empty train split");
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("train: lr must be positive");
  const FlatSplit flat = flatten(ds.train);
  const int dim = ds.config.width * ds.config.height;
  Model m = make_mlp(dim, kHiddenUnits, ds.config.classes, rng);

  std::vector<int> order(flat.frames.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> labels;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    int steps = 0;
    for (std::size_t at = 0; at + 2 <= order.size(); at += kTrainBatch) {
      const int b = static_cast<int>(std::min<std::size_t>(kTrainBatch, order.size() - at));
      if (b < 2) break;  // batch statistics need two rows
      Matrix x(b, dim);
      fill_rows(x, flat, order, static_cast<int>(at), b);
      labels.clear();
      for (int i = 0; i < b; ++i) {
        labels.push_back(flat.labels[static_cast<std::size_t>(order[at + static_cast<std::size_t>(i)])]);
      }
      const LossResult r = loss_and_grads(m, x, Objective::cross_entropy(labels),
                                          GradScope::AllParams, BnMode::UpdateRunning);
      sgd_step(m, r.grads, lr, GradScope::AllParams);
      loss_sum += r.loss;
      ++steps;
    }
    if (steps == 0) throw std::invalid_argument("train: split smaller than one batch");
    if (epoch_losses) epoch_losses->push_back(loss_sum / steps);
  }

  const double err = evaluate_error(m, ds.test);
  if (err > error_threshold) {
    std::ostringstream msg;
    msg << "train: clean test error " << err << " exceeds threshold " << error_threshold
        << " after " << epochs << " epochs";
    throw std::runtime_error(msg.str());
  }
  return m;
}

}  // namespace ttalab
