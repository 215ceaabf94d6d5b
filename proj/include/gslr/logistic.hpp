#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gslr/graph.hpp"

namespace gslr {

// K rows of d coefficients plus K intercepts. Binary problems use K = 2
// so every class count runs through the same softmax code path.
struct WeightVector {
  Eigen::MatrixXd coefficients;  // K x d
  Eigen::VectorXd intercept;     // K

  static WeightVector zeros(int class_count, int dim) {
    WeightVector w;
    w.coefficients = Eigen::MatrixXd::Zero(class_count, dim);
    w.intercept = Eigen::VectorXd::Zero(class_count);
    return w;
  }
  int class_count() const { return static_cast<int>(coefficients.rows()); }
  int dim() const { return static_cast<int>(coefficients.cols()); }
  bool all_finite() const { return coefficients.allFinite() && intercept.allFinite(); }
};

struct LabeledDataset {
  Eigen::MatrixXd features;  // n x d
  std::vector<int> labels;   // values in 0..class_count-1
  int class_count = 2;
  std::optional<NodeSet> ground_truth_support;
  std::vector<std::string> feature_names;

  int sample_count() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

inline void validate_dataset(const LabeledDataset& ds) {
  if (ds.class_count < 2) throw InvalidInput("class_count must be at least 2");
  if (ds.features.rows() == 0) throw InvalidInput("dataset has no samples");
  if (!ds.features.allFinite()) throw InvalidInput("feature matrix has non-finite entries");
  if (ds.labels.size() != static_cast<std::size_t>(ds.features.rows()))
    throw InvalidInput("label count " + std::to_string(ds.labels.size()) +
                       " does not match sample count " + std::to_string(ds.features.rows()));
  std::vector<int> seen(ds.class_count, 0);
  for (int y : ds.labels) {
    if (y < 0 || y >= ds.class_count)
      throw InvalidInput("label " + std::to_string(y) + " outside 0.." +
                         std::to_string(ds.class_count - 1));
    seen[y] = 1;
  }
  for (int k = 0; k < ds.class_count; ++k)
    if (!seen[k]) throw InvalidInput("class " + std::to_string(k) + " absent from dataset");
  if (!ds.feature_names.empty() &&
      ds.feature_names.size() != static_cast<std::size_t>(ds.features.cols()))
    throw InvalidInput("feature name count does not match feature dimension");
}

inline void check_shapes(const Eigen::MatrixXd& x, const WeightVector& w) {
  if (x.cols() != w.coefficients.cols())
    throw InvalidInput("feature dimension " + std::to_string(x.cols()) +
                       " does not match weight dimension " + std::to_string(w.coefficients.cols()));
  if (w.intercept.size() != w.coefficients.rows())
    throw InvalidInput("intercept length does not match class count");
}

namespace detail {

// Row-wise stabilized logits -> probabilities; also returns the
// per-sample log normalizer for the loss.
inline Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits, Eigen::VectorXd* log_norm) {
  Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
  Eigen::MatrixXd shifted = logits.colwise() - row_max;
  Eigen::MatrixXd expd = shifted.array().exp().matrix();
  Eigen::VectorXd sums = expd.rowwise().sum();
  if (log_norm) *log_norm = sums.array().log().matrix() + row_max;
  return expd.array().colwise() / sums.array();
}

inline Eigen::MatrixXd logits_of(const Eigen::MatrixXd& x, const WeightVector& w) {
  return (x * w.coefficients.transpose()).rowwise() + w.intercept.transpose();
}

}  // namespace detail

inline Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x, const WeightVector& w) {
  check_shapes(x, w);
  return detail::softmax_rows(detail::logits_of(x, w), nullptr);
}

inline double logistic_loss(const LabeledDataset& ds, const WeightVector& w) {
  check_shapes(ds.features, w);
  if (w.class_count() != ds.class_count)
    throw InvalidInput("weight class count " + std::to_string(w.class_count()) +
                       " does not match dataset class count " + std::to_string(ds.class_count));
  Eigen::MatrixXd logits = detail::logits_of(ds.features, w);
  Eigen::VectorXd log_norm;
  detail::softmax_rows(logits, &log_norm);
  const int n = static_cast<int>(logits.rows());
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += log_norm(i) - logits(i, ds.labels[i]);
  return total / n;
}

// Gradient of logistic_loss in the same shape as the weights.
inline WeightVector logistic_gradient(const LabeledDataset& ds, const WeightVector& w) {
  check_shapes(ds.features, w);
  if (w.class_count() != ds.class_count)
    throw InvalidInput("weight class count " + std::to_string(w.class_count()) +
                       " does not match dataset class count " + std::to_string(ds.class_count));
  const int n = ds.sample_count();
  Eigen::MatrixXd probs = detail::softmax_rows(detail::logits_of(ds.features, w), nullptr);
  for (int i = 0; i < n; ++i) probs(i, ds.labels[i]) -= 1.0;  // now P - Y
  WeightVector grad;
  grad.coefficients = (probs.transpose() * ds.features) / n;
  grad.intercept = probs.colwise().sum().transpose() / n;
  return grad;
}

inline Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t) {
  if (!(t >= 0.0)) throw InvalidInput("soft_threshold requires a nonnegative threshold");
  return v.array().sign() * (v.array().abs() - t).max(0.0);
}

inline Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& m, double t) {
  if (!(t >= 0.0)) throw InvalidInput("soft_threshold requires a nonnegative threshold");
  return m.array().sign() * (m.array().abs() - t).max(0.0);
}

// Curvature bound for the softmax loss on this dataset, from 20 power
// iterations on the intercept-augmented Gram matrix. The softmax
// Hessian in logit space has spectral norm at most 1/2, hence the 2n.
inline double lipschitz_estimate(const Eigen::MatrixXd& x, std::uint64_t seed = 1) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  if (n == 0) throw InvalidInput("lipschitz_estimate needs at least one sample");
  Eigen::MatrixXd aug(n, d + 1);
  aug.leftCols(d) = x;
  aug.col(d).setOnes();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d + 1);
  std::uint64_t state = seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull;
  for (int i = 0; i <= d; ++i) {
    state ^= state >> 33;
    state *= 0xff51afd7ed558ccdull;
    state ^= state >> 29;
    v(i) = static_cast<double>(state >> 11) * 0x1.0p-53 + 1e-3;
  }
  v.normalize();
  double eig = 0.0;
  for (int it = 0; it < 20; ++it) {
    Eigen::VectorXd next = aug.transpose() * (aug * v);
    eig = next.norm();
    if (eig == 0.0) return 1.0 / (2.0 * n);  // degenerate all-zero matrix
    v = next / eig;
  }
  return eig / (2.0 * n);
}

struct L1Config {
  std::optional<double> step_size;  // empty = 1 / lipschitz_estimate
  int max_iters = 500;
  double tolerance = 1e-9;
};

struct L1FitResult {
  WeightVector weights;
  std::vector<double> objective_trace;  // composite loss + penalty, per accepted iterate
  int iterations = 0;
};

// Proximal gradient for logistic loss + reg * ||coefficients||_1.
// Intercepts take plain gradient steps. Stops when the composite
// objective improves by less than tolerance.
inline L1FitResult fit_l1_logistic(const LabeledDataset& ds, double reg_strength,
                                   const L1Config& config = {}) {
  validate_dataset(ds);
  if (!(reg_strength >= 0.0)) throw InvalidInput("regularization strength must be >= 0");
  if (config.max_iters < 1) throw InvalidInput("max_iters must be >= 1");
  const double step =
      config.step_size ? *config.step_size : 1.0 / lipschitz_estimate(ds.features);
  if (!(step >= 0.0) || !std::isfinite(step)) throw InvalidInput("step size must be finite and >= 0");

  L1FitResult result;
  WeightVector w = WeightVector::zeros(ds.class_count, ds.dim());
  auto composite = [&](const WeightVector& wv) {
    return logistic_loss(ds, wv) + reg_strength * wv.coefficients.array().abs().sum();
  };
  double obj = composite(w);
  result.objective_trace.push_back(obj);
  for (int it = 0; it < config.max_iters; ++it) {
    WeightVector grad = logistic_gradient(ds, w);
    WeightVector next;
    next.coefficients = soft_threshold(
        (w.coefficients - step * grad.coefficients).eval(), step * reg_strength);
    next.intercept = w.intercept - step * grad.intercept;
    const double next_obj = composite(next);
    if (!std::isfinite(next_obj))
      throw Error("objective became non-finite during L1 fit; step size too large");
    w = next;
    result.iterations = it + 1;
    result.objective_trace.push_back(next_obj);
    const double gain = obj - next_obj;
    obj = next_obj;
    if (gain < config.tolerance) break;
  }
  if (!w.all_finite()) throw Error("L1 fit produced non-finite weights");
  result.weights = std::move(w);
  return result;
}

// Feature indices any class uses, under the harness nonzero threshold.
inline NodeSet nonzero_support(const WeightVector& w, double threshold = 1e-8) {
  NodeSet support;
  for (int j = 0; j < w.dim(); ++j)
    for (int k = 0; k < w.class_count(); ++k)
      if (std::abs(w.coefficients(k, j)) > threshold) {
        support.push_back(static_cast<NodeId>(j));
        break;
      }
  return support;
}

inline std::vector<int> predict_labels(const Eigen::MatrixXd& x, const WeightVector& w) {
  Eigen::MatrixXd probs = predict_proba(x, w);
  std::vector<int> labels(probs.rows());
  for (int i = 0; i < probs.rows(); ++i) {
    int best = 0;
    for (int k = 1; k < probs.cols(); ++k)
      if (probs(i, k) > probs(i, best)) best = k;
    labels[i] = best;
  }
  return labels;
}

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw InvalidInput("prediction/label length mismatch");
  if (predicted.empty()) throw InvalidInput("accuracy of an empty set is undefined");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace gslr
