#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gslr/graph.hpp"
#include "gslr/logistic.hpp"
#include "gslr/random.hpp"

namespace gslr {

// Empirical gaussian kept in factored form: covariance = AA^T where
// A = centered_data^T / sqrt(n0 - 1), so sampling mean + A z is exact
// without ever materializing a d x d matrix.
struct GaussianModel {
  Eigen::VectorXd mean;                         // d
  Eigen::MatrixXd centered_factor;              // d x n0
  Eigen::VectorXd per_feature_std;              // d
  int source_sample_count = 0;                  // n0
  std::vector<std::uint32_t> constant_features; // columns with zero variance

  int dim() const { return static_cast<int>(mean.size()); }
};

inline GaussianModel fit_gaussian_model(const Eigen::MatrixXd& data) {
  const int n0 = static_cast<int>(data.rows());
  const int d = static_cast<int>(data.cols());
  if (n0 < 2) throw InvalidInput("gaussian model needs at least 2 source samples, got " +
                                 std::to_string(n0));
  if (d < 1) throw InvalidInput("gaussian model needs at least 1 feature");
  if (!data.allFinite()) throw InvalidInput("source data has non-finite entries");

  GaussianModel m;
  m.source_sample_count = n0;
  m.mean = data.colwise().mean();
  Eigen::MatrixXd centered = data.rowwise() - m.mean.transpose();
  m.centered_factor = centered.transpose() / std::sqrt(static_cast<double>(n0 - 1));
  m.per_feature_std = m.centered_factor.rowwise().norm();
  for (int j = 0; j < d; ++j)
    if (m.per_feature_std(j) == 0.0) m.constant_features.push_back(static_cast<std::uint32_t>(j));
  return m;
}

inline Eigen::MatrixXd sample_from_model(const GaussianModel& m, int count, std::uint64_t seed) {
  if (count < 1) throw InvalidInput("sample count must be >= 1");
  const int d = m.dim();
  const int n0 = static_cast<int>(m.centered_factor.cols());
  Rng rng = Rng::derive(seed, "sample-from-model");
  Eigen::MatrixXd out(count, d);
  Eigen::VectorXd z(n0);
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < n0; ++j) z(j) = rng.gaussian();
    out.row(i) = (m.mean + m.centered_factor * z).transpose();
  }
  return out;
}

enum class PerturbationScheme { scheme1, scheme2 };
enum class SignRule { random_sign, all_positive };

struct PerturbationSpec {
  NodeSet pathway;
  PerturbationScheme scheme = PerturbationScheme::scheme1;
  SignRule sign_rule = SignRule::random_sign;  // scheme 2 only
  std::uint64_t seed = 0;
};

// One translation vector, zero off-pathway. Scheme 1 centers each
// on-pathway entry at 0; scheme 2 centers it at +-sigma_p, so the shift
// is rarely negligible.
inline Eigen::VectorXd make_perturbation(const GaussianModel& m, const PerturbationSpec& spec) {
  if (spec.pathway.empty()) throw InvalidInput("perturbation pathway must be nonempty");
  const int d = m.dim();
  for (NodeId v : spec.pathway)
    if (static_cast<int>(v) >= d)
      throw InvalidInput("pathway node " + std::to_string(v) + " outside feature range 0.." +
                         std::to_string(d - 1));
  Rng rng = Rng::derive(spec.seed, "perturbation");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  for (NodeId v : spec.pathway) {
    const double sigma = m.per_feature_std(static_cast<int>(v));
    double center = 0.0;
    if (spec.scheme == PerturbationScheme::scheme2) {
      const double sign =
          spec.sign_rule == SignRule::all_positive ? 1.0 : (rng.coin() ? 1.0 : -1.0);
      center = sign * sigma;
    }
    x(static_cast<int>(v)) = center + sigma * rng.gaussian();
  }
  return x;
}

// Negatives are model samples; positives are model samples translated by
// a single perturbation vector shared across the whole dataset. Rows are
// the n_neg negatives (label 0) followed by the n_pos positives (label 1).
inline LabeledDataset generate_dataset(const GaussianModel& m, const PerturbationSpec& spec,
                                       int n_pos, int n_neg, std::uint64_t seed) {
  if (n_pos < 1 || n_neg < 1) throw InvalidInput("sample counts must be >= 1");
  const Eigen::VectorXd x = make_perturbation(m, spec);
  LabeledDataset ds;
  ds.class_count = 2;
  ds.features.resize(n_neg + n_pos, m.dim());
  ds.features.topRows(n_neg) = sample_from_model(m, n_neg, mix_seed(seed, 1));
  ds.features.bottomRows(n_pos) =
      sample_from_model(m, n_pos, mix_seed(seed, 2)).rowwise() + x.transpose();
  ds.labels.assign(static_cast<std::size_t>(n_neg), 0);
  ds.labels.insert(ds.labels.end(), static_cast<std::size_t>(n_pos), 1);
  ds.ground_truth_support = spec.pathway;
  return ds;
}

// Stand-in for a real source cohort: a random rank-limited gaussian
// matrix with a little isotropic noise, n0 rows by d columns.
inline Eigen::MatrixXd make_low_rank_source(int n0, int d, int rank, std::uint64_t seed,
                                            double noise = 0.1) {
  if (n0 < 2) throw InvalidInput("source needs at least 2 samples");
  if (d < 1 || rank < 1) throw InvalidInput("dimension and rank must be >= 1");
  if (!(noise >= 0.0)) throw InvalidInput("noise must be >= 0");
  Rng rng = Rng::derive(seed, "low-rank-source");
  Eigen::MatrixXd left(n0, rank);
  Eigen::MatrixXd right(rank, d);
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < rank; ++j) left(i, j) = rng.gaussian();
  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < d; ++j) right(i, j) = rng.gaussian();
  Eigen::MatrixXd data = left * right / std::sqrt(static_cast<double>(rank));
  if (noise > 0.0)
    for (int i = 0; i < n0; ++i)
      for (int j = 0; j < d; ++j) data(i, j) += noise * rng.gaussian();
  return data;
}

// Random connected node set grown by uniform frontier expansion, for
// planting ground-truth pathways.
inline NodeSet random_connected_subset(const FeatureGraph& g, std::uint32_t size,
                                       std::uint64_t seed) {
  const std::uint32_t n = g.node_count();
  if (size < 1 || size > n)
    throw InvalidInput("subset size must be in [1, " + std::to_string(n) + "]");
  Rng rng = Rng::derive(seed, "connected-subset");
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<char> in(n, 0);
    std::vector<NodeId> members;
    std::vector<NodeId> frontier;
    const NodeId start = static_cast<NodeId>(rng.below(n));
    in[start] = 1;
    members.push_back(start);
    auto extend = [&](NodeId v) {
      for (std::uint32_t e : g.incident(v)) {
        const NodeId w = g.other_end(e, v);
        if (!in[w]) frontier.push_back(w);
      }
    };
    extend(start);
    while (members.size() < size && !frontier.empty()) {
      const std::size_t pick = static_cast<std::size_t>(rng.below(frontier.size()));
      const NodeId v = frontier[pick];
      frontier[pick] = frontier.back();
      frontier.pop_back();
      if (in[v]) continue;
      in[v] = 1;
      members.push_back(v);
      extend(v);
    }
    if (members.size() == size) return make_node_set(members);
  }
  throw InvalidInput("graph has no reachable connected subset of size " + std::to_string(size));
}

}  // namespace gslr
