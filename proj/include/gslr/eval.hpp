#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gslr/graph.hpp"
#include "gslr/gslr.hpp"
#include "gslr/logistic.hpp"
#include "gslr/random.hpp"

namespace gslr {

struct PrecisionRecall {
  std::optional<double> precision;  // empty when nothing was selected
  double recall = 0.0;
};

inline PrecisionRecall feature_precision_recall(const NodeSet& selected, const NodeSet& truth) {
  if (truth.empty()) throw InvalidInput("ground-truth set must be nonempty");
  PrecisionRecall pr;
  if (selected.empty()) return pr;  // precision undefined, recall 0
  const std::size_t overlap = intersection_size(selected, truth);
  pr.precision = static_cast<double>(overlap) / static_cast<double>(selected.size());
  pr.recall = static_cast<double>(overlap) / static_cast<double>(truth.size());
  return pr;
}

// Upper-tail P(X >= k) for a hypergeometric(N, K, n) count, summed in
// log space so large populations stay accurate.
inline double hypergeometric_pvalue(std::int64_t population, std::int64_t successes,
                                    std::int64_t draws, std::int64_t overlap) {
  if (population < 0 || successes < 0 || draws < 0 || overlap < 0)
    throw InvalidInput("hypergeometric counts must be nonnegative");
  if (successes > population || draws > population)
    throw InvalidInput("successes and draws cannot exceed the population");
  if (overlap > std::min(successes, draws))
    throw InvalidInput("overlap cannot exceed min(successes, draws)");
  const std::int64_t lo = std::max<std::int64_t>(0, draws + successes - population);
  if (overlap <= lo) return 1.0;

  auto log_choose = [](std::int64_t n, std::int64_t k) {
    return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(k + 1)) -
           std::lgamma(static_cast<double>(n - k + 1));
  };
  const double log_denom = log_choose(population, draws);
  const std::int64_t hi = std::min(successes, draws);
  std::vector<double> log_terms;
  log_terms.reserve(static_cast<std::size_t>(hi - overlap + 1));
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::int64_t j = overlap; j <= hi; ++j) {
    const double lt =
        log_choose(successes, j) + log_choose(population - successes, draws - j) - log_denom;
    log_terms.push_back(lt);
    max_log = std::max(max_log, lt);
  }
  double sum = 0.0;
  for (double lt : log_terms) sum += std::exp(lt - max_log);
  return std::min(1.0, std::exp(max_log) * sum);
}

// Stratified fold labels, one per sample. Within each class the sample
// indices are shuffled by the seeded generator and dealt round-robin, so
// per-class fold sizes differ by at most one.
inline std::vector<int> stratified_folds(const std::vector<int>& labels, int class_count,
                                         int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidInput("folds must be >= 2");
  std::vector<int> assignment(labels.size(), -1);
  Rng rng = Rng::derive(seed, "stratified-folds");
  for (int k = 0; k < class_count; ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == k) members.push_back(i);
    for (std::size_t i = members.size(); i > 1; --i)
      std::swap(members[i - 1], members[rng.below(i)]);
    for (std::size_t i = 0; i < members.size(); ++i)
      assignment[members[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
    if (!members.empty() && members.size() < 2)
      throw Error("class " + std::to_string(k) +
                  " has a single sample; it would be absent from its holdout's training split");
  }
  for (int a : assignment)
    if (a < 0) throw InvalidInput("labels contain values outside 0..class_count-1");
  return assignment;
}

struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // 1 for constant columns
};

inline Standardization fit_standardization(const Eigen::MatrixXd& x) {
  Standardization st;
  st.mean = x.colwise().mean();
  const int n = static_cast<int>(x.rows());
  Eigen::MatrixXd centered = x.rowwise() - st.mean.transpose();
  st.scale = (centered.colwise().squaredNorm() / std::max(1, n - 1)).cwiseSqrt();
  for (int j = 0; j < st.scale.size(); ++j)
    if (st.scale(j) == 0.0) st.scale(j) = 1.0;
  return st;
}

inline Eigen::MatrixXd apply_standardization(const Eigen::MatrixXd& x, const Standardization& st) {
  return (x.rowwise() - st.mean.transpose()).array().rowwise() / st.scale.transpose().array();
}

struct FoldResult {
  int fold_index = 0;
  std::string method;
  double sparsity_param = 0.0;
  double holdout_accuracy = 0.0;
  NodeSet selected;
  std::optional<double> feature_precision;
  double feature_recall = 0.0;
};

// A trainer sees the (already preprocessed) training split and a seed
// derived for its cell.
using TrainerFn = std::function<WeightVector(const LabeledDataset&, std::uint64_t)>;

struct MethodSpec {
  std::string name;    // "gslr" or "l1" for the built-ins
  double grid_value = 0.0;  // sparsity s or regularization strength
  TrainerFn trainer;
};

inline MethodSpec make_l1_method(double reg_strength, L1Config config = {}) {
  MethodSpec spec;
  spec.name = "l1";
  spec.grid_value = reg_strength;
  spec.trainer = [reg_strength, config](const LabeledDataset& train, std::uint64_t) {
    return fit_l1_logistic(train, reg_strength, config).weights;
  };
  return spec;
}

inline MethodSpec make_gslr_method(const FeatureGraph& g, std::uint32_t sparsity,
                                   GSLRConfig base = {}) {
  MethodSpec spec;
  spec.name = "gslr";
  spec.grid_value = static_cast<double>(sparsity);
  const FeatureGraph* graph = &g;
  spec.trainer = [graph, sparsity, base](const LabeledDataset& train, std::uint64_t seed) {
    GSLRConfig cfg = base;
    cfg.sparsity = sparsity;
    cfg.seed = seed;
    return fit_gslr(train, *graph, cfg).weights;
  };
  return spec;
}

namespace detail {

inline void split_dataset(const LabeledDataset& ds, const std::vector<int>& fold_of, int fold,
                          bool standardize, LabeledDataset* train, LabeledDataset* holdout) {
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> hold_rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    (fold_of[i] == fold ? hold_rows : train_rows).push_back(i);
  if (hold_rows.empty()) throw Error("fold " + std::to_string(fold) + " is empty");

  auto take = [&](const std::vector<std::size_t>& rows, LabeledDataset* out) {
    out->features.resize(static_cast<Eigen::Index>(rows.size()), ds.features.cols());
    out->labels.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out->features.row(static_cast<Eigen::Index>(r)) = ds.features.row(rows[r]);
      out->labels[r] = ds.labels[rows[r]];
    }
    out->class_count = ds.class_count;
    out->ground_truth_support = ds.ground_truth_support;
    out->feature_names = ds.feature_names;
  };
  take(train_rows, train);
  take(hold_rows, holdout);

  std::vector<int> seen(ds.class_count, 0);
  for (int y : train->labels) seen[y] = 1;
  for (int k = 0; k < ds.class_count; ++k)
    if (!seen[k])
      throw Error("class " + std::to_string(k) + " absent from training split of fold " +
                  std::to_string(fold));

  if (standardize) {
    const Standardization st = fit_standardization(train->features);
    train->features = apply_standardization(train->features, st);
    holdout->features = apply_standardization(holdout->features, st);
  }
}

inline FoldResult evaluate_fold(const LabeledDataset& ds, const std::vector<int>& fold_of,
                                int fold, const MethodSpec& method, bool standardize,
                                std::uint64_t cell_seed) {
  LabeledDataset train;
  LabeledDataset holdout;
  split_dataset(ds, fold_of, fold, standardize, &train, &holdout);
  const WeightVector w = method.trainer(train, cell_seed);
  FoldResult fr;
  fr.fold_index = fold;
  fr.method = method.name;
  fr.sparsity_param = method.grid_value;
  fr.holdout_accuracy = accuracy(predict_labels(holdout.features, w), holdout.labels);
  fr.selected = nonzero_support(w);
  if (ds.ground_truth_support) {
    const PrecisionRecall pr = feature_precision_recall(fr.selected, *ds.ground_truth_support);
    fr.feature_precision = pr.precision;
    fr.feature_recall = pr.recall;
  }
  return fr;
}

}  // namespace detail

inline std::vector<FoldResult> cross_validate(const LabeledDataset& ds, const MethodSpec& method,
                                              int folds, std::uint64_t seed,
                                              bool standardize = true) {
  validate_dataset(ds);
  const std::vector<int> fold_of = stratified_folds(ds.labels, ds.class_count, folds, seed);
  std::vector<FoldResult> results;
  results.reserve(static_cast<std::size_t>(folds));
  for (int f = 0; f < folds; ++f) {
    const std::uint64_t cell_seed =
        mix_seed(seed, fnv1a64(method.name) ^ (static_cast<std::uint64_t>(f) + 1));
    results.push_back(detail::evaluate_fold(ds, fold_of, f, method, standardize, cell_seed));
  }
  return results;
}

struct BenchmarkCell {
  std::string dataset;
  std::string method;
  double grid_value = 0.0;
  int fold = 0;
  bool failed = false;
  std::string error;
  double accuracy = 0.0;
  std::optional<double> precision;
  double recall = 0.0;
  std::uint32_t support_size = 0;
};

struct GridSummary {
  std::string method;
  double grid_value = 0.0;
  int cells = 0;
  int failed_cells = 0;
  double mean_accuracy = 0.0;
  std::optional<double> mean_precision;  // empty if every cell had empty support
  int precision_excluded = 0;            // empty-support cells left out of the mean
  double mean_recall = 0.0;
  double mean_support_size = 0.0;
};

// One GSLR grid point against the L1 grid point with the closest mean
// realized support size.
struct MatchedPair {
  double gslr_grid = 0.0;
  double l1_grid = 0.0;
  double gslr_support = 0.0;
  double l1_support = 0.0;
  std::optional<double> gslr_precision;
  std::optional<double> l1_precision;
  double gslr_recall = 0.0;
  double l1_recall = 0.0;
  double gslr_accuracy = 0.0;
  double l1_accuracy = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkCell> cells;        // full factorial, failures included
  std::vector<GridSummary> summaries;      // one per (method, grid value)
  std::vector<MatchedPair> matched;        // gslr vs nearest-sparsity l1
  std::vector<std::string> dataset_names;
  int folds = 0;
  std::uint64_t seed = 0;
  bool standardized = true;
};

namespace detail {

inline void summarize_report(BenchmarkReport* report) {
  std::vector<std::pair<std::string, double>> keys;
  for (const BenchmarkCell& c : report->cells) {
    const std::pair<std::string, double> key{c.method, c.grid_value};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& key : keys) {
    GridSummary s;
    s.method = key.first;
    s.grid_value = key.second;
    double acc = 0.0;
    double prec = 0.0;
    int prec_n = 0;
    double rec = 0.0;
    double supp = 0.0;
    int ok = 0;
    for (const BenchmarkCell& c : report->cells) {
      if (c.method != key.first || c.grid_value != key.second) continue;
      ++s.cells;
      if (c.failed) {
        ++s.failed_cells;
        continue;
      }
      ++ok;
      acc += c.accuracy;
      rec += c.recall;
      supp += c.support_size;
      if (c.precision) {
        prec += *c.precision;
        ++prec_n;
      } else {
        ++s.precision_excluded;
      }
    }
    if (ok > 0) {
      s.mean_accuracy = acc / ok;
      s.mean_recall = rec / ok;
      s.mean_support_size = supp / ok;
      if (prec_n > 0) s.mean_precision = prec / prec_n;
    }
    report->summaries.push_back(s);
  }

  for (const GridSummary& gs : report->summaries) {
    if (gs.method != "gslr") continue;
    const GridSummary* best = nullptr;
    for (const GridSummary& ls : report->summaries) {
      if (ls.method != "l1") continue;
      if (!best || std::abs(ls.mean_support_size - gs.mean_support_size) <
                       std::abs(best->mean_support_size - gs.mean_support_size))
        best = &ls;
    }
    if (!best) continue;
    MatchedPair mp;
    mp.gslr_grid = gs.grid_value;
    mp.l1_grid = best->grid_value;
    mp.gslr_support = gs.mean_support_size;
    mp.l1_support = best->mean_support_size;
    mp.gslr_precision = gs.mean_precision;
    mp.l1_precision = best->mean_precision;
    mp.gslr_recall = gs.mean_recall;
    mp.l1_recall = best->mean_recall;
    mp.gslr_accuracy = gs.mean_accuracy;
    mp.l1_accuracy = best->mean_accuracy;
    report->matched.push_back(mp);
  }
}

}  // namespace detail

// Full factorial of dataset x method x fold. Cells are independent jobs
// on a bounded worker pool writing to preallocated slots; each cell's
// seed is keyed by its coordinates so scheduling never changes results.
// A cell that throws is recorded as failed and the run continues.
inline BenchmarkReport run_benchmark(const std::vector<std::pair<std::string, LabeledDataset>>& datasets,
                                     const std::vector<MethodSpec>& methods, int folds,
                                     std::uint64_t seed, int jobs = 1, bool standardize = true) {
  if (datasets.empty()) throw InvalidInput("benchmark needs at least one dataset");
  if (methods.empty()) throw InvalidInput("benchmark needs at least one method");
  if (folds < 2) throw InvalidInput("folds must be >= 2");
  if (jobs < 1) throw InvalidInput("jobs must be >= 1");

  BenchmarkReport report;
  report.folds = folds;
  report.seed = seed;
  report.standardized = standardize;

  std::vector<std::vector<int>> fold_assignments;
  for (const auto& [name, ds] : datasets) {
    validate_dataset(ds);
    report.dataset_names.push_back(name);
    fold_assignments.push_back(
        stratified_folds(ds.labels, ds.class_count, folds, mix_seed(seed, fnv1a64(name))));
  }

  struct Job {
    std::size_t dataset_index;
    std::size_t method_index;
    int fold;
  };
  std::vector<Job> jobs_list;
  for (std::size_t di = 0; di < datasets.size(); ++di)
    for (std::size_t mi = 0; mi < methods.size(); ++mi)
      for (int f = 0; f < folds; ++f) jobs_list.push_back({di, mi, f});

  report.cells.resize(jobs_list.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs_list.size()) return;
      const Job& job = jobs_list[i];
      const auto& [name, ds] = datasets[job.dataset_index];
      const MethodSpec& method = methods[job.method_index];
      BenchmarkCell& cell = report.cells[i];
      cell.dataset = name;
      cell.method = method.name;
      cell.grid_value = method.grid_value;
      cell.fold = job.fold;
      const std::uint64_t cell_seed = mix_seed(
          seed, fnv1a64(name) ^ fnv1a64(method.name) ^
                    std::bit_cast<std::uint64_t>(method.grid_value) ^
                    (static_cast<std::uint64_t>(job.fold) + 0x9e37u));
      try {
        const FoldResult fr = detail::evaluate_fold(ds, fold_assignments[job.dataset_index],
                                                    job.fold, method, standardize, cell_seed);
        cell.accuracy = fr.holdout_accuracy;
        cell.precision = fr.feature_precision;
        cell.recall = fr.feature_recall;
        cell.support_size = static_cast<std::uint32_t>(fr.selected.size());
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
    }
  };

  const std::size_t worker_count =
      std::min(static_cast<std::size_t>(jobs), jobs_list.size());
  if (worker_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < worker_count; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  detail::summarize_report(&report);
  return report;
}

inline std::vector<double> default_l1_grid(int count = 16, double lo = 1e-3, double hi = 1e2) {
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i)
    grid[i] = lo * std::pow(hi / lo, count == 1 ? 0.0 : static_cast<double>(i) / (count - 1));
  return grid;
}

inline std::vector<std::uint32_t> default_gslr_grid(std::uint32_t node_count) {
  std::vector<std::uint32_t> grid;
  for (std::uint32_t s : {5u, 10u, 20u, 40u, 80u})
    if (s <= node_count / 2) grid.push_back(s);
  if (grid.empty()) grid.push_back(std::max(1u, node_count / 4));
  return grid;
}

}  // namespace gslr
