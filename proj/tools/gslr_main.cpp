// gslr: generate synthetic graph-labeled datasets, train sparse logistic
// models whose supports are connected subgraphs, and benchmark them.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gslr/eval.hpp"
#include "gslr/graph.hpp"
#include "gslr/gslr.hpp"
#include "gslr/io.hpp"
#include "gslr/logistic.hpp"
#include "gslr/manifest.hpp"
#include "gslr/pcst.hpp"
#include "gslr/projection.hpp"
#include "gslr/random.hpp"
#include "gslr/synthetic.hpp"
#include "gslr/version.hpp"

namespace fs = std::filesystem;
using gslr::Json;

namespace {

struct GlobalOpts {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;
  bool quiet = false;
};

struct RunContext {
  GlobalOpts globals;
  std::vector<std::string> argv;
  std::string command;
  Json config = Json::object();
  std::vector<std::string> input_files;
};

void emit(const RunContext& ctx, const Json& payload) {
  if (!ctx.globals.quiet) std::cout << payload.dump(2) << '\n';
}

void write_json_file(const fs::path& path, const Json& payload) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw gslr::InvalidInput("cannot write " + path.string());
  out << payload.dump(2) << '\n';
}

gslr::FeatureGraph load_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gslr::InvalidInput("cannot open graph file " + path);
  return gslr::load_graph(in, gslr::NamePolicy::by_name);
}

gslr::LabeledDataset load_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gslr::InvalidInput("cannot open data file " + path);
  return gslr::read_dataset_csv(in);
}

void check_names_match(const gslr::FeatureGraph& g, const gslr::LabeledDataset& ds,
                       const std::string& data_path) {
  if (ds.dim() != static_cast<int>(g.node_count()))
    throw gslr::InvalidInput(data_path + " has " + std::to_string(ds.dim()) +
                             " features but the graph has " + std::to_string(g.node_count()) +
                             " nodes");
  for (int j = 0; j < ds.dim(); ++j)
    if (ds.feature_names[j] != g.node_name(static_cast<gslr::NodeId>(j)))
      throw gslr::InvalidInput(data_path + " column " + std::to_string(j) + " is '" +
                               ds.feature_names[j] + "' but graph node " + std::to_string(j) +
                               " is '" + g.node_name(static_cast<gslr::NodeId>(j)) + "'");
}

std::vector<std::string> node_names(const gslr::FeatureGraph& g, const gslr::NodeSet& nodes) {
  std::vector<std::string> names;
  names.reserve(nodes.size());
  for (gslr::NodeId v : nodes) names.push_back(g.node_name(v));
  return names;
}

// ---- generate ----

struct GenerateOpts {
  std::string graph_path;
  std::string pathway_path;
  int scheme = 1;
  std::string sign_rule = "random";
  int n_pos = 100;
  int n_neg = 100;
  int source_samples = 50;
  int source_rank = 20;
  double source_noise = 0.1;
};

void run_generate(RunContext& ctx, const GenerateOpts& opt) {
  if (ctx.globals.out.empty()) throw gslr::InvalidInput("generate requires --out");
  const gslr::FeatureGraph g = load_graph_file(opt.graph_path);
  std::ifstream pin(opt.pathway_path, std::ios::binary);
  if (!pin) throw gslr::InvalidInput("cannot open pathway file " + opt.pathway_path);
  const gslr::NodeSet pathway = gslr::names_to_nodes(g, gslr::read_name_list(pin));
  if (pathway.empty()) throw gslr::InvalidInput("pathway file lists no nodes");
  ctx.input_files = {opt.graph_path, opt.pathway_path};

  const Eigen::MatrixXd source =
      gslr::make_low_rank_source(opt.source_samples, static_cast<int>(g.node_count()),
                                 opt.source_rank, gslr::mix_seed(ctx.globals.seed, 11),
                                 opt.source_noise);
  const gslr::GaussianModel model = gslr::fit_gaussian_model(source);

  gslr::PerturbationSpec spec;
  spec.pathway = pathway;
  spec.scheme = opt.scheme == 1 ? gslr::PerturbationScheme::scheme1
                                : gslr::PerturbationScheme::scheme2;
  spec.sign_rule = opt.sign_rule == "positive" ? gslr::SignRule::all_positive
                                               : gslr::SignRule::random_sign;
  spec.seed = gslr::mix_seed(ctx.globals.seed, 12);

  gslr::LabeledDataset ds =
      gslr::generate_dataset(model, spec, opt.n_pos, opt.n_neg,
                             gslr::mix_seed(ctx.globals.seed, 13));
  ds.feature_names = g.node_names();

  const fs::path out_dir(ctx.globals.out);
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "data.csv", std::ios::binary);
    if (!out) throw gslr::InvalidInput("cannot write " + (out_dir / "data.csv").string());
    gslr::write_dataset_csv(out, ds);
  }

  const Eigen::VectorXd x = gslr::make_perturbation(model, spec);
  Json perturbation = Json::object();
  for (gslr::NodeId v : pathway)
    perturbation[g.node_name(v)] = x(static_cast<int>(v));
  Json truth;
  truth["pathway"] = node_names(g, pathway);
  truth["scheme"] = opt.scheme;
  truth["sign_rule"] = opt.sign_rule;
  truth["seed"] = ctx.globals.seed;
  truth["rng"] = gslr::kRngName;
  truth["perturbation"] = perturbation;
  truth["source"] = Json{{"samples", opt.source_samples},
                         {"rank", opt.source_rank},
                         {"noise", opt.source_noise}};
  write_json_file(out_dir / "truth.json", truth);

  Json summary;
  summary["data"] = (out_dir / "data.csv").string();
  summary["truth"] = (out_dir / "truth.json").string();
  summary["samples"] = ds.sample_count();
  summary["features"] = ds.dim();
  emit(ctx, summary);
}

// ---- project ----

struct ProjectOpts {
  std::string graph_path;
  std::string vector_path;
  std::uint32_t sparsity = 1;
  double slack = 0.10;
  bool uniform_costs = false;
  int max_steps = 30;
};

void run_project(RunContext& ctx, const ProjectOpts& opt) {
  const gslr::FeatureGraph g = load_graph_file(opt.graph_path);
  std::ifstream vin(opt.vector_path, std::ios::binary);
  if (!vin) throw gslr::InvalidInput("cannot open vector file " + opt.vector_path);
  const std::vector<double> p = gslr::read_vector_file(vin);
  ctx.input_files = {opt.graph_path, opt.vector_path};

  gslr::ProjectionConfig pc;
  pc.use_graph_costs = !opt.uniform_costs;
  pc.max_bisection_steps = opt.max_steps;
  const gslr::ProjectionResult res =
      gslr::project(g, p, gslr::SparsityTarget{opt.sparsity, opt.slack}, pc);

  Json out;
  out["support"] = node_names(g, res.support);
  out["lambda"] = res.lambda_used;
  out["solver_calls"] = res.solver_calls;
  Json projected = Json::object();
  for (gslr::NodeId v : res.support) projected[g.node_name(v)] = res.projected[v];
  out["projected"] = projected;
  emit(ctx, out);
  if (!ctx.globals.out.empty()) {
    fs::create_directories(ctx.globals.out);
    write_json_file(fs::path(ctx.globals.out) / "projection.json", out);
  }
}

// ---- solve-pcst ----

struct SolvePcstOpts {
  std::string graph_path;
  std::string prizes_path;
  double prize_scale = 1.0;
  double component_penalty = 0.0;
};

void run_solve_pcst(RunContext& ctx, const SolvePcstOpts& opt) {
  const gslr::FeatureGraph g = load_graph_file(opt.graph_path);
  std::ifstream pin(opt.prizes_path, std::ios::binary);
  if (!pin) throw gslr::InvalidInput("cannot open prizes file " + opt.prizes_path);
  const std::vector<double> prizes = gslr::read_vector_file(pin);
  ctx.input_files = {opt.graph_path, opt.prizes_path};

  gslr::PCSTInstance inst;
  inst.graph = &g;
  inst.prizes = prizes;
  inst.prize_scale = opt.prize_scale;
  inst.component_penalty = opt.component_penalty;
  const gslr::PCSTSolution sol = gslr::solve_pcst(inst);

  Json out;
  out["nodes"] = node_names(g, sol.nodes);
  Json edges = Json::array();
  for (std::uint32_t e : sol.edges) {
    const gslr::GraphEdge& ge = g.edge(e);
    edges.push_back(Json::array({g.node_name(ge.u), g.node_name(ge.v)}));
  }
  out["edges"] = edges;
  out["objective"] = sol.objective_value;
  emit(ctx, out);
  if (!ctx.globals.out.empty()) {
    fs::create_directories(ctx.globals.out);
    write_json_file(fs::path(ctx.globals.out) / "pcst.json", out);
  }
}

// ---- train-gslr ----

struct TrainGslrOpts {
  std::string graph_path;
  std::string data_path;
  std::uint32_t sparsity = 1;
  std::optional<double> eta;
  int iters = 100;
  double slack = 0.10;
  bool uniform_costs = false;
  std::string rule = "shared";
  bool no_refit = false;
};

Json gslr_model_json(const gslr::GSLRModel& model, const std::vector<std::string>& names,
                     const Json& config) {
  Json out = gslr::model_to_json(model.weights, names, model.support);
  out["trace"] = gslr::trace_to_json(model.trace);
  out["step_size_used"] = model.step_size_used;
  out["refit_applied"] = model.refit_applied;
  out["config"] = config;
  return out;
}

void run_train_gslr(RunContext& ctx, const TrainGslrOpts& opt) {
  if (ctx.globals.out.empty()) throw gslr::InvalidInput("train-gslr requires --out");
  const gslr::FeatureGraph g = load_graph_file(opt.graph_path);
  const gslr::LabeledDataset ds = load_dataset_file(opt.data_path);
  check_names_match(g, ds, opt.data_path);
  ctx.input_files = {opt.graph_path, opt.data_path};

  gslr::GSLRConfig cfg;
  cfg.sparsity = opt.sparsity;
  cfg.step_size = opt.eta;
  cfg.iterations = opt.iters;
  cfg.rule = opt.rule == "per-class" ? gslr::MulticlassRule::per_class
                                     : gslr::MulticlassRule::shared;
  cfg.projection.use_graph_costs = !opt.uniform_costs;
  cfg.support_slack = opt.slack;
  cfg.seed = ctx.globals.seed;
  cfg.refit = !opt.no_refit;

  const gslr::GSLRModel model = gslr::fit_gslr(ds, g, cfg);

  Json config;
  config["sparsity"] = opt.sparsity;
  if (opt.eta) config["eta"] = *opt.eta;
  config["iterations"] = opt.iters;
  config["rule"] = opt.rule;
  config["support_slack"] = opt.slack;
  config["uniform_costs"] = opt.uniform_costs;
  config["refit"] = !opt.no_refit;
  config["seed"] = ctx.globals.seed;

  const Json out = gslr_model_json(model, ds.feature_names, config);
  fs::create_directories(ctx.globals.out);
  write_json_file(fs::path(ctx.globals.out) / "model.json", out);
  Json summary;
  summary["model"] = (fs::path(ctx.globals.out) / "model.json").string();
  summary["support"] = out["support"];
  summary["final_loss"] = model.trace.back().loss_after_projection;
  emit(ctx, summary);
}

// ---- train-l1 ----

struct TrainL1Opts {
  std::string data_path;
  double reg = 0.0;
  std::optional<double> step;
  int max_iters = 500;
  double tolerance = 1e-9;
};

void run_train_l1(RunContext& ctx, const TrainL1Opts& opt) {
  if (ctx.globals.out.empty()) throw gslr::InvalidInput("train-l1 requires --out");
  const gslr::LabeledDataset ds = load_dataset_file(opt.data_path);
  ctx.input_files = {opt.data_path};

  gslr::L1Config cfg;
  cfg.step_size = opt.step;
  cfg.max_iters = opt.max_iters;
  cfg.tolerance = opt.tolerance;
  const gslr::L1FitResult fit = gslr::fit_l1_logistic(ds, opt.reg, cfg);
  const gslr::NodeSet support = gslr::nonzero_support(fit.weights);

  Json out = gslr::model_to_json(fit.weights, ds.feature_names, support);
  out["iterations"] = fit.iterations;
  out["final_objective"] = fit.objective_trace.back();
  Json config;
  config["reg"] = opt.reg;
  if (opt.step) config["step"] = *opt.step;
  config["max_iters"] = opt.max_iters;
  config["tolerance"] = opt.tolerance;
  out["config"] = config;

  fs::create_directories(ctx.globals.out);
  write_json_file(fs::path(ctx.globals.out) / "model.json", out);
  Json summary;
  summary["model"] = (fs::path(ctx.globals.out) / "model.json").string();
  summary["sparsity"] = support.size();
  summary["final_objective"] = fit.objective_trace.back();
  emit(ctx, summary);
}

// ---- evaluate ----

struct EvaluateOpts {
  std::string data_path;
  std::string model_path;
  std::string truth_path;
};

void run_evaluate(RunContext& ctx, const EvaluateOpts& opt) {
  const gslr::LabeledDataset ds = load_dataset_file(opt.data_path);
  std::ifstream min(opt.model_path, std::ios::binary);
  if (!min) throw gslr::InvalidInput("cannot open model file " + opt.model_path);
  Json model_json;
  try {
    min >> model_json;
  } catch (const std::exception& e) {
    throw gslr::InvalidInput("model file is not valid JSON: " + std::string(e.what()));
  }
  const gslr::WeightVector w = gslr::model_from_json(model_json, ds.feature_names);
  ctx.input_files = {opt.data_path, opt.model_path};

  const gslr::NodeSet selected = gslr::nonzero_support(w);
  Json out;
  out["accuracy"] = gslr::accuracy(gslr::predict_labels(ds.features, w), ds.labels);
  out["support_size"] = selected.size();

  if (!opt.truth_path.empty()) {
    std::ifstream tin(opt.truth_path, std::ios::binary);
    if (!tin) throw gslr::InvalidInput("cannot open truth file " + opt.truth_path);
    Json truth_json;
    try {
      tin >> truth_json;
    } catch (const std::exception& e) {
      throw gslr::InvalidInput("truth file is not valid JSON: " + std::string(e.what()));
    }
    ctx.input_files.push_back(opt.truth_path);
    std::vector<gslr::NodeId> truth_ids;
    std::map<std::string, gslr::NodeId> name_index;
    for (int j = 0; j < ds.dim(); ++j)
      name_index[ds.feature_names[j]] = static_cast<gslr::NodeId>(j);
    for (const auto& name : truth_json.at("pathway")) {
      const auto it = name_index.find(name.get<std::string>());
      if (it == name_index.end())
        throw gslr::InvalidInput("truth pathway node '" + name.get<std::string>() +
                                 "' not in dataset");
      truth_ids.push_back(it->second);
    }
    const gslr::NodeSet truth = gslr::make_node_set(truth_ids);
    const gslr::PrecisionRecall pr = gslr::feature_precision_recall(selected, truth);
    out["feature_precision"] = pr.precision ? Json(*pr.precision) : Json(nullptr);
    out["feature_recall"] = pr.recall;
    const std::int64_t overlap =
        static_cast<std::int64_t>(gslr::intersection_size(selected, truth));
    out["hypergeometric_pvalue"] = gslr::hypergeometric_pvalue(
        ds.dim(), static_cast<std::int64_t>(truth.size()),
        static_cast<std::int64_t>(selected.size()), overlap);
  }

  emit(ctx, out);
  if (!ctx.globals.out.empty()) {
    fs::create_directories(ctx.globals.out);
    write_json_file(fs::path(ctx.globals.out) / "metrics.json", out);
  }
}

// ---- benchmark ----

struct BenchmarkOpts {
  std::string graph_path;
  std::string datasets_dir;
  int folds = 10;
  std::vector<std::uint32_t> gslr_grid;
  std::vector<double> l1_grid;
  int gslr_iters = 100;
  bool no_standardize = false;
};

void run_benchmark_cmd(RunContext& ctx, const BenchmarkOpts& opt) {
  if (ctx.globals.out.empty()) throw gslr::InvalidInput("benchmark requires --out");
  const gslr::FeatureGraph g = load_graph_file(opt.graph_path);
  ctx.input_files = {opt.graph_path};

  std::vector<fs::path> csv_files;
  if (!fs::is_directory(opt.datasets_dir))
    throw gslr::InvalidInput("--datasets-dir " + opt.datasets_dir + " is not a directory");
  for (const auto& entry : fs::directory_iterator(opt.datasets_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv")
      csv_files.push_back(entry.path());
  std::sort(csv_files.begin(), csv_files.end());
  if (csv_files.empty())
    throw gslr::InvalidInput("no .csv datasets found in " + opt.datasets_dir);

  std::vector<std::pair<std::string, gslr::LabeledDataset>> datasets;
  for (const fs::path& p : csv_files) {
    gslr::LabeledDataset ds = load_dataset_file(p.string());
    check_names_match(g, ds, p.string());
    ctx.input_files.push_back(p.string());
    fs::path truth_path = p;
    truth_path.replace_extension(".truth.json");
    if (fs::exists(truth_path)) {
      std::ifstream tin(truth_path, std::ios::binary);
      Json truth_json;
      tin >> truth_json;
      std::vector<std::string> names;
      for (const auto& nm : truth_json.at("pathway")) names.push_back(nm.get<std::string>());
      ds.ground_truth_support = gslr::names_to_nodes(g, names);
      ctx.input_files.push_back(truth_path.string());
    }
    datasets.emplace_back(p.stem().string(), std::move(ds));
  }

  std::vector<std::uint32_t> gslr_grid = opt.gslr_grid;
  if (gslr_grid.empty()) gslr_grid = gslr::default_gslr_grid(g.node_count());
  std::vector<double> l1_grid = opt.l1_grid;
  if (l1_grid.empty()) l1_grid = gslr::default_l1_grid();

  std::vector<gslr::MethodSpec> methods;
  gslr::GSLRConfig base;
  base.iterations = opt.gslr_iters;
  for (std::uint32_t s : gslr_grid) methods.push_back(gslr::make_gslr_method(g, s, base));
  for (double reg : l1_grid) methods.push_back(gslr::make_l1_method(reg));

  const gslr::BenchmarkReport report =
      gslr::run_benchmark(datasets, methods, opt.folds, ctx.globals.seed, ctx.globals.jobs,
                          !opt.no_standardize);

  Json out = gslr::report_to_json(report);
  out["gslr_grid"] = gslr_grid;
  out["l1_grid"] = l1_grid;
  out["gslr_iterations"] = opt.gslr_iters;

  fs::create_directories(ctx.globals.out);
  write_json_file(fs::path(ctx.globals.out) / "report.json", out);
  {
    std::ofstream csv(fs::path(ctx.globals.out) / "report.csv", std::ios::binary);
    if (!csv) throw gslr::InvalidInput("cannot write report.csv");
    gslr::write_report_csv(csv, report);
  }

  Json summary;
  summary["report"] = (fs::path(ctx.globals.out) / "report.json").string();
  summary["cells"] = report.cells.size();
  int failed = 0;
  for (const auto& c : report.cells) failed += c.failed ? 1 : 0;
  summary["failed_cells"] = failed;
  emit(ctx, summary);
}

int run_cli(const std::vector<std::string>& args);

// ---- replay ----

struct ReplayOpts {
  std::string manifest_path;
};

void run_replay(RunContext& ctx, const ReplayOpts& opt) {
  if (ctx.globals.out.empty()) throw gslr::InvalidInput("replay requires --out");
  const gslr::RunManifest m = gslr::read_manifest(opt.manifest_path);
  ctx.input_files = {opt.manifest_path};
  std::vector<std::string> args = m.argv;
  if (args.empty()) throw gslr::InvalidInput("manifest has an empty argv");
  args.erase(args.begin());  // drop program name
  bool replaced = false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out" && i + 1 < args.size()) {
      args[i + 1] = ctx.globals.out;
      replaced = true;
    } else if (args[i].rfind("--out=", 0) == 0) {
      args[i] = "--out=" + ctx.globals.out;
      replaced = true;
    }
  }
  if (!replaced) {
    args.push_back("--out");
    args.push_back(ctx.globals.out);
  }
  const int rc = run_cli(args);
  if (rc != 0) throw gslr::Error("replayed command exited with status " + std::to_string(rc));
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"graph-sparse logistic regression toolkit", "gslr"};
  app.set_version_flag("--version", std::string(gslr::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts globals;
  app.add_option("--seed", globals.seed, "random seed for all derived streams");
  app.add_option("--jobs", globals.jobs, "worker threads for benchmark cells")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", globals.out, "output directory (gets a run manifest)");
  app.add_flag("--quiet", globals.quiet, "suppress stdout summaries");

  GenerateOpts gen;
  CLI::App* c_gen = app.add_subcommand("generate", "sample a synthetic labeled dataset");
  c_gen->add_option("--graph", gen.graph_path, "edge list file")->required();
  c_gen->add_option("--pathway", gen.pathway_path, "file with one node name per line")->required();
  c_gen->add_option("--scheme", gen.scheme, "perturbation scheme")
      ->required()
      ->check(CLI::IsMember({1, 2}));
  c_gen->add_option("--sign-rule", gen.sign_rule, "scheme 2 sign rule")
      ->check(CLI::IsMember({"random", "positive"}));
  c_gen->add_option("--n-pos", gen.n_pos, "positive sample count")->check(CLI::PositiveNumber);
  c_gen->add_option("--n-neg", gen.n_neg, "negative sample count")->check(CLI::PositiveNumber);
  c_gen->add_option("--source-samples", gen.source_samples, "synthetic source cohort size");
  c_gen->add_option("--source-rank", gen.source_rank, "synthetic source rank");
  c_gen->add_option("--source-noise", gen.source_noise, "synthetic source noise level");

  ProjectOpts proj;
  CLI::App* c_proj = app.add_subcommand("project", "project a vector onto connected supports");
  c_proj->add_option("--graph", proj.graph_path, "edge list file")->required();
  c_proj->add_option("--vector", proj.vector_path, "file with one value per line")->required();
  c_proj->add_option("--sparsity", proj.sparsity, "target support size")->required();
  c_proj->add_option("--slack", proj.slack, "accepted overshoot fraction");
  c_proj->add_flag("--uniform-costs", proj.uniform_costs, "ignore graph edge costs");
  c_proj->add_option("--max-steps", proj.max_steps, "bisection budget");

  SolvePcstOpts pcst;
  CLI::App* c_pcst = app.add_subcommand("solve-pcst", "solve one prize-collecting Steiner tree");
  c_pcst->add_option("--graph", pcst.graph_path, "edge list file")->required();
  c_pcst->add_option("--prizes", pcst.prizes_path, "file with one prize per line")->required();
  c_pcst->add_option("--prize-scale", pcst.prize_scale, "multiplier on prizes");
  c_pcst->add_option("--component-penalty", pcst.component_penalty, "cost per tree");

  TrainGslrOpts tg;
  CLI::App* c_tg = app.add_subcommand("train-gslr", "projected gradient descent with graph-sparse supports");
  c_tg->add_option("--graph", tg.graph_path, "edge list file")->required();
  c_tg->add_option("--data", tg.data_path, "labeled CSV")->required();
  c_tg->add_option("--sparsity", tg.sparsity, "target support size")->required();
  double eta_value = 0.0;
  CLI::Option* eta_opt = c_tg->add_option("--eta", eta_value, "step size (default 1/L)");
  c_tg->add_option("--iters", tg.iters, "iteration count")->check(CLI::PositiveNumber);
  c_tg->add_option("--slack", tg.slack, "accepted support overshoot fraction");
  c_tg->add_flag("--uniform-costs", tg.uniform_costs, "ignore graph edge costs");
  c_tg->add_option("--rule", tg.rule, "multiclass support rule")
      ->check(CLI::IsMember({"shared", "per-class"}));
  c_tg->add_flag("--no-refit", tg.no_refit, "skip the unregularized refit on the final support");

  TrainL1Opts tl;
  CLI::App* c_tl = app.add_subcommand("train-l1", "L1-regularized logistic regression");
  c_tl->add_option("--data", tl.data_path, "labeled CSV")->required();
  c_tl->add_option("--reg", tl.reg, "L1 regularization strength")->required();
  double l1_step = 0.0;
  CLI::Option* l1_step_opt = c_tl->add_option("--step", l1_step, "step size (default 1/L)");
  c_tl->add_option("--max-iters", tl.max_iters, "iteration budget")->check(CLI::PositiveNumber);
  c_tl->add_option("--tol", tl.tolerance, "objective improvement stop threshold");

  EvaluateOpts ev;
  CLI::App* c_ev = app.add_subcommand("evaluate", "score a saved model on a dataset");
  c_ev->add_option("--data", ev.data_path, "labeled CSV")->required();
  c_ev->add_option("--model", ev.model_path, "model JSON")->required();
  c_ev->add_option("--truth", ev.truth_path, "truth JSON with the ground-truth pathway");

  BenchmarkOpts bm;
  CLI::App* c_bm = app.add_subcommand("benchmark", "cross-validated method comparison");
  c_bm->add_option("--graph", bm.graph_path, "edge list file")->required();
  c_bm->add_option("--datasets-dir", bm.datasets_dir, "directory of data CSVs (+ .truth.json)")
      ->required();
  c_bm->add_option("--folds", bm.folds, "cross-validation folds")->check(CLI::PositiveNumber);
  c_bm->add_option("--gslr-grid", bm.gslr_grid, "sparsity grid")->delimiter(',');
  c_bm->add_option("--l1-grid", bm.l1_grid, "regularization grid")->delimiter(',');
  c_bm->add_option("--gslr-iters", bm.gslr_iters, "iterations per fit")->check(CLI::PositiveNumber);
  c_bm->add_flag("--no-standardize", bm.no_standardize, "train on raw features");

  ReplayOpts rp;
  CLI::App* c_rp = app.add_subcommand("replay", "rerun the command recorded in a manifest");
  c_rp->add_option("--manifest", rp.manifest_path, "manifest.json from a previous run")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  }

  RunContext ctx;
  ctx.globals = globals;
  ctx.argv.push_back("gslr");
  ctx.argv.insert(ctx.argv.end(), args.begin(), args.end());

  const auto started = std::chrono::steady_clock::now();
  try {
    if (c_gen->parsed()) {
      ctx.command = "generate";
      ctx.config = {{"graph", gen.graph_path}, {"pathway", gen.pathway_path},
                    {"scheme", gen.scheme},    {"sign_rule", gen.sign_rule},
                    {"n_pos", gen.n_pos},      {"n_neg", gen.n_neg},
                    {"source_samples", gen.source_samples}, {"source_rank", gen.source_rank},
                    {"source_noise", gen.source_noise}};
      run_generate(ctx, gen);
    } else if (c_proj->parsed()) {
      ctx.command = "project";
      ctx.config = {{"graph", proj.graph_path}, {"vector", proj.vector_path},
                    {"sparsity", proj.sparsity}, {"slack", proj.slack},
                    {"uniform_costs", proj.uniform_costs}, {"max_steps", proj.max_steps}};
      run_project(ctx, proj);
    } else if (c_pcst->parsed()) {
      ctx.command = "solve-pcst";
      ctx.config = {{"graph", pcst.graph_path}, {"prizes", pcst.prizes_path},
                    {"prize_scale", pcst.prize_scale},
                    {"component_penalty", pcst.component_penalty}};
      run_solve_pcst(ctx, pcst);
    } else if (c_tg->parsed()) {
      if (eta_opt->count() > 0) tg.eta = eta_value;
      ctx.command = "train-gslr";
      ctx.config = {{"graph", tg.graph_path}, {"data", tg.data_path},
                    {"sparsity", tg.sparsity}, {"iters", tg.iters},
                    {"slack", tg.slack}, {"uniform_costs", tg.uniform_costs},
                    {"rule", tg.rule}, {"refit", !tg.no_refit}};
      if (tg.eta) ctx.config["eta"] = *tg.eta;
      run_train_gslr(ctx, tg);
    } else if (c_tl->parsed()) {
      if (l1_step_opt->count() > 0) tl.step = l1_step;
      ctx.command = "train-l1";
      ctx.config = {{"data", tl.data_path}, {"reg", tl.reg},
                    {"max_iters", tl.max_iters}, {"tolerance", tl.tolerance}};
      if (tl.step) ctx.config["step"] = *tl.step;
      run_train_l1(ctx, tl);
    } else if (c_ev->parsed()) {
      ctx.command = "evaluate";
      ctx.config = {{"data", ev.data_path}, {"model", ev.model_path}, {"truth", ev.truth_path}};
      run_evaluate(ctx, ev);
    } else if (c_bm->parsed()) {
      ctx.command = "benchmark";
      ctx.config = {{"graph", bm.graph_path}, {"datasets_dir", bm.datasets_dir},
                    {"folds", bm.folds}, {"gslr_iters", bm.gslr_iters},
                    {"standardize", !bm.no_standardize}};
      run_benchmark_cmd(ctx, bm);
    } else if (c_rp->parsed()) {
      ctx.command = "replay";
      ctx.config = {{"manifest", rp.manifest_path}};
      run_replay(ctx, rp);
    }
  } catch (const gslr::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }

  if (!ctx.globals.out.empty() && ctx.command != "replay") {
    gslr::RunManifest m;
    m.command = ctx.command;
    m.argv = ctx.argv;
    m.config = ctx.config;
    m.config["seed"] = ctx.globals.seed;
    m.config["jobs"] = ctx.globals.jobs;
    m.config["out"] = ctx.globals.out;
    m.seed = ctx.globals.seed;
    for (const std::string& path : ctx.input_files)
      m.input_digests[path] = gslr::digest_file(path);
    m.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    gslr::write_manifest(ctx.globals.out, m);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args);
}
