#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gslr/eval.hpp"
#include "gslr/synthetic.hpp"

using namespace gslr;
using Eigen::MatrixXd;

namespace {

// exact upper tail via Pascal's triangle in unsigned 64-bit, valid for N <= 30
double exact_hypergeometric_tail(int N, int K, int n, int k) {
  std::vector<std::vector<std::uint64_t>> choose(N + 1, std::vector<std::uint64_t>(N + 1, 0));
  for (int i = 0; i <= N; ++i) {
    choose[i][0] = 1;
    for (int j = 1; j <= i; ++j)
      choose[i][j] = choose[i - 1][j - 1] + (j <= i - 1 ? choose[i - 1][j] : 0);
  }
  std::uint64_t numer = 0;
  for (int t = k; t <= std::min(K, n); ++t)
    if (n - t <= N - K) numer += choose[K][t] * choose[N - K][n - t];
  return static_cast<double>(numer) / static_cast<double>(choose[N][n]);
}

LabeledDataset tiny_planted(Rng& rng, int n, int d) {
  LabeledDataset ds;
  ds.features.resize(n, d);
  ds.labels.resize(n);
  ds.class_count = 2;
  for (int i = 0; i < n; ++i) {
    const int y = static_cast<int>(rng.coin());
    ds.labels[i] = y;
    for (int j = 0; j < d; ++j) ds.features(i, j) = rng.gaussian();
    ds.features(i, 0) += y ? 1.5 : -1.5;
  }
  ds.labels[0] = 0;
  ds.labels[1] = 1;
  return ds;
}

}  // namespace

TEST_CASE("precision and recall follow their definitions", "[eval]") {
  const PrecisionRecall perfect = feature_precision_recall({1, 2, 3}, {1, 2, 3});
  REQUIRE(perfect.precision.has_value());
  CHECK(*perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);

  const PrecisionRecall half = feature_precision_recall({1, 2, 3, 4}, {1, 2});
  REQUIRE(half.precision.has_value());
  CHECK(*half.precision == 0.5);
  CHECK(half.recall == 1.0);

  const PrecisionRecall empty = feature_precision_recall({}, {1, 2});
  CHECK_FALSE(empty.precision.has_value());
  CHECK(empty.recall == 0.0);

  REQUIRE_THROWS_AS(feature_precision_recall({1}, {}), InvalidInput);
}

TEST_CASE("hypergeometric tail matches hand values", "[eval]") {
  CHECK(hypergeometric_pvalue(10, 5, 5, 5) == Catch::Approx(1.0 / 252.0).epsilon(1e-10));
  CHECK(hypergeometric_pvalue(10, 5, 5, 3) == Catch::Approx(0.5).epsilon(1e-10));
  CHECK(hypergeometric_pvalue(10, 5, 5, 0) == 1.0);
  CHECK(hypergeometric_pvalue(50, 10, 8, 0) == 1.0);
}

TEST_CASE("hypergeometric tail matches exact rationals for small populations", "[eval]") {
  for (int N : {6, 11, 17, 23, 30}) {
    for (int K = 0; K <= N; K += 3) {
      for (int n = 1; n <= N; n += 4) {
        for (int k = 0; k <= std::min(K, n); ++k) {
          const double exact = exact_hypergeometric_tail(N, K, n, k);
          const double approx = hypergeometric_pvalue(N, K, n, k);
          REQUIRE(approx == Catch::Approx(exact).epsilon(1e-10));
        }
      }
    }
  }
}

TEST_CASE("hypergeometric tail is monotone in the overlap", "[eval]") {
  double prev = 2.0;
  for (int k = 0; k <= 12; ++k) {
    const double p = hypergeometric_pvalue(100, 30, 12, k);
    CHECK(p <= prev + 1e-15);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    prev = p;
  }
}

TEST_CASE("hypergeometric rejects inconsistent counts", "[eval]") {
  REQUIRE_THROWS_AS(hypergeometric_pvalue(10, 11, 5, 0), InvalidInput);
  REQUIRE_THROWS_AS(hypergeometric_pvalue(10, 5, 11, 0), InvalidInput);
  REQUIRE_THROWS_AS(hypergeometric_pvalue(10, 5, 5, 6), InvalidInput);
  REQUIRE_THROWS_AS(hypergeometric_pvalue(-1, 0, 0, 0), InvalidInput);
}

TEST_CASE("stratified folds balance every class", "[eval]") {
  std::vector<int> labels;
  for (int i = 0; i < 47; ++i) labels.push_back(0);
  for (int i = 0; i < 23; ++i) labels.push_back(1);
  for (int i = 0; i < 11; ++i) labels.push_back(2);

  const int folds = 5;
  const std::vector<int> assignment = stratified_folds(labels, 3, folds, 99);
  REQUIRE(assignment.size() == labels.size());

  // partition: every sample lands in exactly one fold
  for (int a : assignment) {
    CHECK(a >= 0);
    CHECK(a < folds);
  }
  // per-class fold sizes differ by at most 1
  for (int cls = 0; cls < 3; ++cls) {
    std::vector<int> count(folds, 0);
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) ++count[assignment[i]];
    const auto [lo, hi] = std::minmax_element(count.begin(), count.end());
    CHECK(*hi - *lo <= 1);
  }

  CHECK(assignment == stratified_folds(labels, 3, folds, 99));
  CHECK(assignment != stratified_folds(labels, 3, folds, 100));
}

TEST_CASE("single-member classes cannot be stratified", "[eval]") {
  std::vector<int> labels{0, 0, 0, 1};
  REQUIRE_THROWS_AS(stratified_folds(labels, 2, 3, 1), Error);
}

TEST_CASE("standardization centers and scales on the training statistics", "[eval]") {
  Rng rng(7);
  MatrixXd x(40, 3);
  for (int i = 0; i < 40; ++i) {
    x(i, 0) = 5.0 + 2.0 * rng.gaussian();
    x(i, 1) = -1.0 + 0.1 * rng.gaussian();
    x(i, 2) = 3.0;  // constant
  }
  const Standardization st = fit_standardization(x);
  const MatrixXd z = apply_standardization(x, st);
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(z.col(j).mean()) < 1e-12);
    const double var = (z.col(j).array() - z.col(j).mean()).square().sum() / 39.0;
    CHECK(var == Catch::Approx(1.0).epsilon(1e-12));
  }
  CHECK(st.scale(2) == 1.0);
  CHECK((z.col(2).array() == 0.0).all());
}

TEST_CASE("constant trainer scores the base rate", "[eval]") {
  Rng rng(8);
  LabeledDataset ds = tiny_planted(rng, 100, 3);
  // fix a 70/30 imbalance
  for (int i = 0; i < 100; ++i) ds.labels[i] = i < 70 ? 0 : 1;

  MethodSpec constant;
  constant.name = "const";
  constant.grid_value = 0.0;
  constant.trainer = [](const LabeledDataset& train, std::uint64_t) {
    // always predicts class 0 regardless of input
    WeightVector w = WeightVector::zeros(train.class_count, train.dim());
    w.intercept(0) = 10.0;
    return w;
  };

  const std::vector<FoldResult> results = cross_validate(ds, constant, 10, 3);
  REQUIRE(results.size() == 10);
  double mean_acc = 0.0;
  for (const FoldResult& r : results) mean_acc += r.holdout_accuracy;
  mean_acc /= 10.0;
  CHECK(mean_acc == Catch::Approx(0.7).margin(1e-12));
}

TEST_CASE("cross validation reports per-fold selections against the truth", "[eval]") {
  Rng rng(9);
  LabeledDataset ds = tiny_planted(rng, 80, 4);
  ds.ground_truth_support = NodeSet{0};

  const MethodSpec l1 = make_l1_method(0.05);
  const std::vector<FoldResult> results = cross_validate(ds, l1, 4, 17);
  REQUIRE(results.size() == 4);
  for (const FoldResult& r : results) {
    CHECK(r.method == "l1");
    CHECK(r.holdout_accuracy >= 0.0);
    CHECK(r.holdout_accuracy <= 1.0);
    if (!r.selected.empty()) {
      REQUIRE(r.feature_precision.has_value());
      const PrecisionRecall pr = feature_precision_recall(r.selected, {0});
      CHECK(*r.feature_precision == *pr.precision);
      CHECK(r.feature_recall == pr.recall);
    }
  }
}

TEST_CASE("benchmark covers the full factorial and records failures", "[eval]") {
  Rng rng(10);
  std::vector<std::pair<std::string, LabeledDataset>> datasets;
  datasets.push_back({"ds_a", tiny_planted(rng, 40, 3)});
  datasets.push_back({"ds_b", tiny_planted(rng, 44, 3)});

  MethodSpec ok = make_l1_method(0.1);
  MethodSpec boom;
  boom.name = "boom";
  boom.grid_value = 1.0;
  boom.trainer = [](const LabeledDataset&, std::uint64_t) -> WeightVector {
    throw Error("injected failure");
  };

  const int folds = 4;
  const BenchmarkReport report = run_benchmark(datasets, {ok, boom}, folds, 5, 2);

  REQUIRE(report.cells.size() == 2u * 2u * folds);
  for (const auto& name : {"ds_a", "ds_b"}) {
    for (const auto& method : {"l1", "boom"}) {
      for (int f = 0; f < folds; ++f) {
        const auto it = std::find_if(report.cells.begin(), report.cells.end(),
                                     [&](const BenchmarkCell& c) {
                                       return c.dataset == name && c.method == method &&
                                              c.fold == f;
                                     });
        REQUIRE(it != report.cells.end());
        if (std::string(method) == "boom") {
          CHECK(it->failed);
          CHECK(it->error.find("injected failure") != std::string::npos);
        } else {
          CHECK_FALSE(it->failed);
        }
      }
    }
  }

  // summaries: failures excluded from means, recorded in failed_cells
  const auto boom_summary = std::find_if(report.summaries.begin(), report.summaries.end(),
                                         [](const GridSummary& s) { return s.method == "boom"; });
  REQUIRE(boom_summary != report.summaries.end());
  CHECK(boom_summary->failed_cells == 2 * folds);
}

TEST_CASE("summary means equal recomputation from raw cells", "[eval]") {
  Rng rng(11);
  std::vector<std::pair<std::string, LabeledDataset>> datasets;
  LabeledDataset ds = tiny_planted(rng, 60, 4);
  ds.ground_truth_support = NodeSet{0};
  datasets.push_back({"ds", ds});

  const std::vector<MethodSpec> methods{make_l1_method(0.02), make_l1_method(0.3)};
  const BenchmarkReport report = run_benchmark(datasets, methods, 5, 21, 1);

  for (const GridSummary& s : report.summaries) {
    double acc = 0.0, rec = 0.0, sup = 0.0, prec = 0.0;
    int count = 0, prec_count = 0;
    for (const BenchmarkCell& c : report.cells) {
      if (c.method != s.method || c.grid_value != s.grid_value || c.failed) continue;
      ++count;
      acc += c.accuracy;
      rec += c.recall;
      sup += c.support_size;
      if (c.precision) {
        prec += *c.precision;
        ++prec_count;
      }
    }
    REQUIRE(count == s.cells - s.failed_cells);
    CHECK(s.mean_accuracy == Catch::Approx(acc / count).margin(1e-12));
    CHECK(s.mean_recall == Catch::Approx(rec / count).margin(1e-12));
    CHECK(s.mean_support_size == Catch::Approx(sup / count).margin(1e-12));
    if (prec_count > 0) {
      REQUIRE(s.mean_precision.has_value());
      CHECK(*s.mean_precision == Catch::Approx(prec / prec_count).margin(1e-12));
      CHECK(s.precision_excluded == count - prec_count);
    } else {
      CHECK_FALSE(s.mean_precision.has_value());
    }
  }
}

TEST_CASE("parallel and serial benchmarks agree", "[eval]") {
  Rng rng(12);
  std::vector<std::pair<std::string, LabeledDataset>> datasets;
  datasets.push_back({"p", tiny_planted(rng, 50, 3)});

  const std::vector<MethodSpec> methods{make_l1_method(0.05), make_l1_method(0.5)};
  const BenchmarkReport serial = run_benchmark(datasets, methods, 5, 33, 1);
  const BenchmarkReport parallel = run_benchmark(datasets, methods, 5, 33, 4);

  REQUIRE(serial.cells.size() == parallel.cells.size());
  for (std::size_t i = 0; i < serial.cells.size(); ++i) {
    CHECK(serial.cells[i].accuracy == parallel.cells[i].accuracy);
    CHECK(serial.cells[i].support_size == parallel.cells[i].support_size);
    CHECK(serial.cells[i].failed == parallel.cells[i].failed);
  }
}

TEST_CASE("default grids have the documented shape", "[eval]") {
  const std::vector<double> l1 = default_l1_grid();
  REQUIRE(l1.size() == 16);
  CHECK(l1.front() == Catch::Approx(1e-3).epsilon(1e-12));
  CHECK(l1.back() == Catch::Approx(1e2).epsilon(1e-12));
  for (std::size_t i = 1; i < l1.size(); ++i) {
    CHECK(l1[i] > l1[i - 1]);
    // log-spaced: constant ratio
    CHECK(l1[i] / l1[i - 1] ==
          Catch::Approx(l1[1] / l1[0]).epsilon(1e-9));
  }

  const std::vector<std::uint32_t> big = default_gslr_grid(400);
  CHECK(big == std::vector<std::uint32_t>{5, 10, 20, 40, 80});
  const std::vector<std::uint32_t> small = default_gslr_grid(30);
  for (std::uint32_t s : small) CHECK(s <= 15);
  CHECK_FALSE(small.empty());
}

TEST_CASE("gslr method plugs into cross validation", "[eval]") {
  Rng rng(13);
  const int n = 60, d = 6;
  LabeledDataset ds;
  ds.features.resize(n, d);
  ds.labels.resize(n);
  ds.class_count = 2;
  for (int i = 0; i < n; ++i) {
    const int y = static_cast<int>(rng.coin());
    ds.labels[i] = y;
    for (int j = 0; j < d; ++j) ds.features(i, j) = rng.gaussian();
    ds.features(i, 1) += y ? 1.2 : -1.2;
    ds.features(i, 2) += y ? 1.2 : -1.2;
  }
  ds.labels[0] = 0;
  ds.labels[1] = 1;
  ds.ground_truth_support = NodeSet{1, 2};

  std::vector<std::string> names;
  for (int j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
  std::vector<GraphEdge> edges;
  for (std::uint32_t j = 0; j + 1 < static_cast<std::uint32_t>(d); ++j)
    edges.push_back({j, j + 1, 1.0});
  const FeatureGraph g(names, edges);

  GSLRConfig base;
  base.iterations = 25;
  const MethodSpec spec = make_gslr_method(g, 2, base);
  const std::vector<FoldResult> results = cross_validate(ds, spec, 4, 55);
  REQUIRE(results.size() == 4);
  for (const FoldResult& r : results) {
    CHECK(r.method == "gslr");
    CHECK(r.sparsity_param == 2.0);
    CHECK_FALSE(r.selected.empty());
    CHECK(is_connected_subgraph(g, r.selected));
  }
}
