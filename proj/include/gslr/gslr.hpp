#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gslr/graph.hpp"
#include "gslr/logistic.hpp"
#include "gslr/projection.hpp"

namespace gslr {

enum class MulticlassRule { shared, per_class };

struct GSLRConfig {
  std::uint32_t sparsity = 1;
  std::optional<double> step_size;  // empty = 1 / lipschitz_estimate; 0 is a legal no-op step
  int iterations = 100;
  MulticlassRule rule = MulticlassRule::shared;
  ProjectionConfig projection;
  double support_slack = 0.10;
  std::uint64_t seed = 0;
  bool refit = true;  // unregularized refit on the final support
};

struct GSLRTraceEntry {
  int iteration = 0;
  double loss_before_projection = 0.0;
  double loss_after_projection = 0.0;
  std::uint32_t support_size = 0;
  std::vector<double> lambdas;  // one per projection call this iteration
  NodeSet support;
};

struct GSLRModel {
  WeightVector weights;
  NodeSet support;
  std::vector<GSLRTraceEntry> trace;
  double step_size_used = 0.0;
  bool refit_applied = false;
};

namespace detail {

inline LabeledDataset restrict_columns(const LabeledDataset& ds, const NodeSet& support) {
  LabeledDataset out;
  out.features.resize(ds.features.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) out.features.col(j) = ds.features.col(support[j]);
  out.labels = ds.labels;
  out.class_count = ds.class_count;
  return out;
}

}  // namespace detail

// Projected gradient descent: from zero weights, alternate a full-batch
// gradient step with a projection of the coefficients onto supports that
// are small connected subgraphs of g. Intercepts follow plain gradient
// steps and are never projected. With the shared rule one support is
// chosen from the per-feature coefficient column norms and applied to
// every class row; with per_class each row is projected on its own.
inline GSLRModel fit_gslr(const LabeledDataset& ds, const FeatureGraph& g,
                          const GSLRConfig& cfg) {
  validate_dataset(ds);
  if (ds.dim() != static_cast<int>(g.node_count()))
    throw InvalidInput("dataset has " + std::to_string(ds.dim()) +
                       " features but graph has " + std::to_string(g.node_count()) + " nodes");
  if (cfg.sparsity < 1) throw InvalidInput("sparsity must be >= 1");
  if (cfg.sparsity > g.node_count())
    throw InvalidInput("sparsity " + std::to_string(cfg.sparsity) + " exceeds node count " +
                       std::to_string(g.node_count()));
  if (cfg.iterations < 1) throw InvalidInput("iterations must be >= 1");
  if (cfg.step_size && (!std::isfinite(*cfg.step_size) || *cfg.step_size < 0.0))
    throw InvalidInput("step size must be finite and >= 0");

  const int d = ds.dim();
  const int K = ds.class_count;
  const double step =
      cfg.step_size ? *cfg.step_size : 1.0 / lipschitz_estimate(ds.features);
  const SparsityTarget target{cfg.sparsity, cfg.support_slack};

  GSLRModel model;
  model.step_size_used = step;
  WeightVector w = WeightVector::zeros(K, d);

  for (int it = 0; it < cfg.iterations; ++it) {
    WeightVector grad = logistic_gradient(ds, w);
    w.coefficients -= step * grad.coefficients;
    w.intercept -= step * grad.intercept;
    if (!w.all_finite())
      throw Error("weights became non-finite at iteration " + std::to_string(it) +
                  "; step size " + std::to_string(step) + " too large");

    GSLRTraceEntry entry;
    entry.iteration = it;
    entry.loss_before_projection = logistic_loss(ds, w);

    if (cfg.rule == MulticlassRule::shared) {
      std::vector<double> column_norm(d);
      for (int j = 0; j < d; ++j) column_norm[j] = w.coefficients.col(j).norm();
      ProjectionResult proj = project(g, column_norm, target, cfg.projection);
      entry.lambdas.push_back(proj.lambda_used);
      std::vector<char> keep(d, 0);
      for (NodeId v : proj.support) keep[v] = 1;
      for (int j = 0; j < d; ++j)
        if (!keep[j]) w.coefficients.col(j).setZero();
      entry.support = std::move(proj.support);
    } else {
      std::vector<char> keep_any(d, 0);
      for (int k = 0; k < K; ++k) {
        std::vector<double> row(d);
        for (int j = 0; j < d; ++j) row[j] = w.coefficients(k, j);
        ProjectionResult proj = project(g, row, target, cfg.projection);
        entry.lambdas.push_back(proj.lambda_used);
        std::vector<char> keep(d, 0);
        for (NodeId v : proj.support) {
          keep[v] = 1;
          keep_any[v] = 1;
        }
        for (int j = 0; j < d; ++j)
          if (!keep[j]) w.coefficients(k, j) = 0.0;
      }
      for (int j = 0; j < d; ++j)
        if (keep_any[j]) entry.support.push_back(static_cast<NodeId>(j));
    }

    entry.support_size = static_cast<std::uint32_t>(entry.support.size());
    entry.loss_after_projection = logistic_loss(ds, w);
    if (!std::isfinite(entry.loss_after_projection))
      throw Error("loss became non-finite at iteration " + std::to_string(it) +
                  "; step size " + std::to_string(step) + " too large");
    model.trace.push_back(std::move(entry));
  }

  model.support = model.trace.back().support;

  if (cfg.refit && !model.support.empty()) {
    LabeledDataset sub = detail::restrict_columns(ds, model.support);
    L1Config refit_cfg;
    refit_cfg.max_iters = 400;
    refit_cfg.tolerance = 1e-11;
    L1FitResult refit = fit_l1_logistic(sub, 0.0, refit_cfg);
    w.coefficients.setZero();
    for (std::size_t j = 0; j < model.support.size(); ++j)
      w.coefficients.col(model.support[j]) = refit.weights.coefficients.col(j);
    w.intercept = refit.weights.intercept;
    model.refit_applied = true;
  }

  model.weights = std::move(w);
  return model;
}

}  // namespace gslr
