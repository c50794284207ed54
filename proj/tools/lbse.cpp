// Command-line driver: synth | train | encode | eval | bench.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lbse/dataset.hpp"
#include "lbse/detail/rng.hpp"
#include "lbse/encoder.hpp"
#include "lbse/evaluate.hpp"
#include "lbse/index.hpp"
#include "lbse/metrics.hpp"
#include "lbse/similarity.hpp"
#include "lbse/trainer.hpp"

namespace {

namespace fs = std::filesystem;

lbse::DatasetFormat format_from_name(const std::string& name) {
  if (name == "csv") return lbse::DatasetFormat::Csv;
  if (name == "lbse-binary") return lbse::DatasetFormat::LbseBinary;
  lbse::fail(lbse::ErrorCode::ConfigViolation, "unknown dataset format '" + name + "'");
}

lbse::Dataset load_dataset_any(const fs::path& path, const std::string& format) {
  if (format != "auto") return lbse::load_dataset(path, format_from_name(format));
  std::ifstream probe(path, std::ios::binary);
  if (!probe) lbse::fail(lbse::ErrorCode::IoError, "cannot open " + path.string());
  char magic[4] = {};
  probe.read(magic, 4);
  const bool binary = probe && std::string_view(magic, 4) == "LBSE";
  return lbse::load_dataset(path, binary ? lbse::DatasetFormat::LbseBinary
                                         : lbse::DatasetFormat::Csv);
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.10g", value);
  return buffer;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) lbse::fail(lbse::ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << content;
  if (!out) lbse::fail(lbse::ErrorCode::IoError, "failed writing " + path.string());
}

nlohmann::json stats_to_json(const lbse::LbseModel& model) {
  const auto& h = model.history;
  nlohmann::json j;
  j["iterations"] = h.iterations();
  if (h.converged_at)
    j["converged_at"] = *h.converged_at;
  else
    j["converged_at"] = nullptr;
  j["objective_per_iter"] = h.objective_per_iter;
  j["bits_flipped_per_iter"] = h.bits_flipped_per_iter;
  j["w_orthogonality_error"] = h.w_orthogonality_error;
  j["b_balance_error"] = h.b_balance_error;
  j["b_uncorrelation_error"] = h.b_uncorrelation_error;
  j["seconds"] = {{"w", h.seconds_w}, {"b", h.seconds_b}, {"h", h.seconds_h}, {"p", h.seconds_p}};
  j["config"] = {{"bits", model.config.code_length}, {"alpha", model.config.alpha},
                 {"beta", model.config.beta},        {"gamma", model.config.gamma},
                 {"lambda", model.config.lambda},    {"max_iters", model.config.max_iters},
                 {"seed", model.config.seed},        {"block", model.config.block},
                 {"tol", model.config.tol}};
  return j;
}

std::vector<std::uint32_t> require_labels(const lbse::CodeFile& file, const std::string& role) {
  if (!file.labels)
    lbse::fail(lbse::ErrorCode::ConfigViolation,
               role + " code file carries no labels; encode from a labeled dataset");
  return *file.labels;
}

// "name=lo..hi", "name=lo..hi:count" (log-spaced) or "name=value"
struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

SweepAxis parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos)
    lbse::fail(lbse::ErrorCode::ConfigViolation, "sweep '" + text + "' must look like name=lo..hi");
  SweepAxis axis;
  axis.name = text.substr(0, eq);
  if (axis.name != "alpha" && axis.name != "beta" && axis.name != "gamma" && axis.name != "lambda")
    lbse::fail(lbse::ErrorCode::ConfigViolation, "unknown sweep parameter '" + axis.name + "'");
  std::string range = text.substr(eq + 1);
  std::size_t count = 0;
  if (const auto colon = range.find(':'); colon != std::string::npos) {
    count = std::stoul(range.substr(colon + 1));
    if (count < 2) lbse::fail(lbse::ErrorCode::ConfigViolation, "sweep counts need at least 2 points");
    range = range.substr(0, colon);
  }
  const auto dots = range.find("..");
  if (dots == std::string::npos) {
    axis.values.push_back(std::stod(range));
    return axis;
  }
  const double lo = std::stod(range.substr(0, dots));
  const double hi = std::stod(range.substr(dots + 2));
  if (!(lo > 0) || !(hi >= lo))
    lbse::fail(lbse::ErrorCode::ConfigViolation,
               "sweep range must satisfy 0 < lo <= hi for a log grid");
  if (count == 0) {
    for (double v = lo; v <= hi * (1.0 + 1e-12); v *= 10.0) axis.values.push_back(v);
  } else {
    const double step = (std::log(hi) - std::log(lo)) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i)
      axis.values.push_back(std::exp(std::log(lo) + step * static_cast<double>(i)));
  }
  return axis;
}

struct TrainFlags {
  std::string data;
  std::string data_format = "auto";
  lbse::LbseConfig config;
  bool normalize = false;
};

void add_hyper_options(CLI::App* cmd, lbse::LbseConfig& config) {
  cmd->add_option("--alpha", config.alpha, "label-regression weight")->capture_default_str();
  cmd->add_option("--beta", config.beta, "code-agreement weight")->capture_default_str();
  cmd->add_option("--gamma", config.gamma, "feature-regression weight")->capture_default_str();
  cmd->add_option("--lambda", config.lambda, "ridge regularization")->capture_default_str();
  cmd->add_option("--iters", config.max_iters, "iteration cap")->capture_default_str();
  cmd->add_option("--block", config.block, "column block width for similarity products")
      ->capture_default_str();
  cmd->add_option("--tol", config.tol, "constraint diagnostic tolerance")->capture_default_str();
}

int run(int argc, char** argv) {
  CLI::App app{"Binary semantic embedding: discrete-optimization training, Hamming retrieval "
               "and evaluation"};
  app.require_subcommand(1);

  if (const char* threads = std::getenv("LBSE_THREADS")) {
    const int n = std::atoi(threads);
    if (n > 0) Eigen::setNbThreads(n);
  }

  // ---- synth ----------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate a Gaussian-cluster dataset");
  synth->set_config("--config");
  struct {
    std::size_t per_class = 0;
    std::uint32_t classes = 0;
    Eigen::Index dim = 0;
    double spread = 1.0;
    std::uint64_t seed = 0;
    std::string output;
    std::string format = "lbse-binary";
  } synth_args;
  synth->add_option("--per-class", synth_args.per_class, "samples per class")
      ->required()
      ->check(CLI::PositiveNumber);
  synth->add_option("--classes", synth_args.classes, "number of classes (>= 2)")
      ->required()
      ->check(CLI::Range(2u, 4096u));
  synth->add_option("--dim", synth_args.dim, "feature dimension")
      ->required()
      ->check(CLI::PositiveNumber);
  synth->add_option("--spread", synth_args.spread, "within-class standard deviation")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_args.seed, "RNG seed")->capture_default_str();
  synth->add_option("-o,--output", synth_args.output, "output dataset path")->required();
  synth->add_option("--format", synth_args.format, "csv or lbse-binary")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "lbse-binary"}));
  synth->callback([&] {
    const auto dataset = lbse::synth_clusters(synth_args.per_class, synth_args.classes,
                                              synth_args.dim, synth_args.spread, synth_args.seed);
    lbse::save_dataset(dataset, synth_args.output, format_from_name(synth_args.format));
  });

  // ---- train ----------------------------------------------------------
  auto* train = app.add_subcommand("train", "learn a model from a labeled dataset");
  train->set_config("--config");
  TrainFlags train_args;
  std::string model_out, stats_out;
  train->add_option("--data", train_args.data, "dataset path")->required();
  train->add_option("--data-format", train_args.data_format, "auto, csv or lbse-binary")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "csv", "lbse-binary"}));
  train->add_option("--bits", train_args.config.code_length, "code length L")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train->add_option("--seed", train_args.config.seed, "RNG seed")->capture_default_str();
  add_hyper_options(train, train_args.config);
  train->add_flag("--normalize", train_args.normalize,
                  "standardize features (zero mean, unit variance) before training");
  train->add_option("-o,--output", model_out, "output model path")->required();
  train->add_option("--stats", stats_out, "optional training-stats JSON path");
  train->callback([&] {
    auto dataset = load_dataset_any(train_args.data, train_args.data_format);
    if (train_args.normalize) lbse::standardize_features(dataset);
    const auto model = lbse::train(dataset, train_args.config);
    lbse::save_model(model, model_out);
    if (!stats_out.empty()) write_text_file(stats_out, stats_to_json(model).dump(2) + "\n");
  });

  // ---- encode ---------------------------------------------------------
  auto* encode = app.add_subcommand("encode", "binarize a dataset with a trained model");
  encode->set_config("--config");
  struct {
    std::string model;
    std::string data;
    std::string data_format = "auto";
    std::string output;
    bool normalize = false;
  } encode_args;
  encode->add_option("--model", encode_args.model, "model path")->required();
  encode->add_option("--data", encode_args.data, "dataset path")->required();
  encode->add_option("--data-format", encode_args.data_format, "auto, csv or lbse-binary")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "csv", "lbse-binary"}));
  encode->add_flag("--normalize", encode_args.normalize,
                   "standardize features before projecting (stats from this dataset)");
  encode->add_option("-o,--output", encode_args.output, "output code path")->required();
  encode->callback([&] {
    const auto model = lbse::load_model(encode_args.model);
    auto dataset = load_dataset_any(encode_args.data, encode_args.data_format);
    if (encode_args.normalize) lbse::standardize_features(dataset);
    const auto codes = lbse::encode(model, dataset.features);
    lbse::save_codes(codes, dataset.labels, encode_args.output);
  });

  // ---- eval -----------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "retrieval + classification metrics for code files");
  eval->set_config("--config");
  struct {
    std::string database;
    std::string queries;
    lbse::EvalOptions options;
    std::string output;
    std::string csv;
  } eval_args;
  eval->add_option("--database", eval_args.database, "database code file")->required();
  eval->add_option("--queries", eval_args.queries, "query code file")->required();
  eval->add_option("-k,--depth", eval_args.options.depth, "retrieval depth")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  eval->add_option("--k-vote", eval_args.options.k_vote, "kNN votes for classification")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  auto* exclude_flag = eval->add_flag("--exclude-self", "drop database item i for query i");
  auto* include_flag = eval->add_flag("--include-self", "keep self matches");
  include_flag->excludes(exclude_flag);
  eval->add_option("--pk", eval_args.options.precision_ks, "precision@K cut-offs")
      ->delimiter(',')
      ->capture_default_str();
  eval->add_flag("--per-query", eval_args.options.per_query, "emit per-query detail rows");
  eval->add_option("-o,--output", eval_args.output, "JSON report path (default: stdout)");
  eval->add_option("--csv", eval_args.csv, "CSV report path");
  eval->callback([&] {
    const auto database = lbse::load_codes(eval_args.database);
    const auto queries = lbse::load_codes(eval_args.queries);
    const auto db_labels = require_labels(database, "database");
    const auto query_labels = require_labels(queries, "query");

    if (exclude_flag->count() > 0) {
      eval_args.options.exclude_self = true;
    } else if (include_flag->count() > 0) {
      eval_args.options.exclude_self = false;
    } else {
      std::error_code ec;
      eval_args.options.exclude_self =
          fs::weakly_canonical(eval_args.database, ec) == fs::weakly_canonical(eval_args.queries, ec);
    }

    std::uint32_t num_classes = 0;
    for (const auto label : db_labels) num_classes = std::max(num_classes, label + 1);
    for (const auto label : query_labels) num_classes = std::max(num_classes, label + 1);

    const lbse::HammingIndex index(database.codes, db_labels);
    const auto report =
        lbse::evaluate_retrieval(index, queries.codes, query_labels, num_classes, eval_args.options);
    const std::string json = lbse::to_json(report) + "\n";
    if (eval_args.output.empty())
      std::cout << json;
    else
      write_text_file(eval_args.output, json);
    if (!eval_args.csv.empty()) write_text_file(eval_args.csv, lbse::to_csv(report));
  });

  // ---- bench ----------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "sweep code lengths / hyperparameters and report metrics");
  bench->set_config("--config");
  struct {
    std::string data;
    std::string data_format = "auto";
    std::size_t per_class = 50;
    std::uint32_t classes = 4;
    Eigen::Index dim = 16;
    double spread = 1.0;
    std::uint64_t synth_seed = 7;
    double query_fraction = 0.2;
    std::uint64_t split_seed = 1;
    std::vector<Eigen::Index> bits{32};
    std::vector<std::string> sweeps;
    lbse::LbseConfig base;
    std::size_t runs = 1;
    std::size_t depth = 99;
    std::size_t k_vote = 5;
    std::vector<std::size_t> pks{1, 5, 10, 99};
    bool normalize = false;
    std::string output;
  } bench_args;
  bench->add_option("--data", bench_args.data, "dataset path (otherwise synthesize)");
  bench->add_option("--data-format", bench_args.data_format, "auto, csv or lbse-binary")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "csv", "lbse-binary"}));
  bench->add_option("--per-class", bench_args.per_class, "synthetic samples per class")
      ->capture_default_str();
  bench->add_option("--classes", bench_args.classes, "synthetic class count")
      ->capture_default_str()
      ->check(CLI::Range(2u, 4096u));
  bench->add_option("--dim", bench_args.dim, "synthetic feature dimension")->capture_default_str();
  bench->add_option("--spread", bench_args.spread, "synthetic within-class spread")
      ->capture_default_str();
  bench->add_option("--synth-seed", bench_args.synth_seed, "synthetic data seed")
      ->capture_default_str();
  bench->add_option("--query-fraction", bench_args.query_fraction, "held-out query fraction")
      ->capture_default_str();
  bench->add_option("--split-seed", bench_args.split_seed, "split seed")->capture_default_str();
  bench->add_option("--bits", bench_args.bits, "code lengths to sweep")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--sweep", bench_args.sweeps,
                    "hyperparameter grid, e.g. alpha=1e-3..1e3 or gamma=1e-6..1:13 (log-spaced)");
  bench->add_option("--seed", bench_args.base.seed, "base training seed")->capture_default_str();
  add_hyper_options(bench, bench_args.base);
  bench->add_option("--runs", bench_args.runs, "runs averaged per cell (seed varies per run)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_option("--depth", bench_args.depth, "retrieval depth")->capture_default_str();
  bench->add_option("--k-vote", bench_args.k_vote, "kNN votes")->capture_default_str();
  bench->add_option("--pk", bench_args.pks, "precision@K cut-offs")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_flag("--normalize", bench_args.normalize, "standardize features before splitting");
  bench->add_option("-o,--output", bench_args.output, "CSV path (default: stdout)");
  bench->callback([&] {
    lbse::Dataset dataset =
        bench_args.data.empty()
            ? lbse::synth_clusters(bench_args.per_class, bench_args.classes, bench_args.dim,
                                   bench_args.spread, bench_args.synth_seed)
            : load_dataset_any(bench_args.data, bench_args.data_format);
    if (bench_args.normalize) lbse::standardize_features(dataset);
    const auto parts = lbse::split(dataset, {bench_args.query_fraction, bench_args.split_seed});

    std::vector<double> alphas{bench_args.base.alpha};
    std::vector<double> betas{bench_args.base.beta};
    std::vector<double> gammas{bench_args.base.gamma};
    std::vector<double> lambdas{bench_args.base.lambda};
    for (const auto& text : bench_args.sweeps) {
      const auto axis = parse_sweep(text);
      if (axis.name == "alpha") alphas = axis.values;
      if (axis.name == "beta") betas = axis.values;
      if (axis.name == "gamma") gammas = axis.values;
      if (axis.name == "lambda") lambdas = axis.values;
    }

    std::ostringstream csv;
    csv << "bits,alpha,beta,gamma,lambda,runs,oa,sensitivity,ppv,f1,map";
    for (const auto k : bench_args.pks) csv << ",p_at_" << k;
    csv << ",mean_iters\n";

    lbse::EvalOptions eval_options;
    eval_options.depth = bench_args.depth;
    eval_options.k_vote = bench_args.k_vote;
    eval_options.precision_ks = bench_args.pks;

    for (const auto bits : bench_args.bits)
      for (const auto alpha : alphas)
        for (const auto beta : betas)
          for (const auto gamma : gammas)
            for (const auto lambda : lambdas) {
              lbse::LbseConfig config = bench_args.base;
              config.code_length = bits;
              config.alpha = alpha;
              config.beta = beta;
              config.gamma = gamma;
              config.lambda = lambda;

              double oa = 0, sen = 0, ppv = 0, f1 = 0, map = 0, iters = 0;
              std::vector<double> pk(bench_args.pks.size(), 0.0);
              for (std::size_t run = 0; run < bench_args.runs; ++run) {
                config.seed = bench_args.base.seed + run;
                const auto model = lbse::train(parts.database, config);
                const auto db_codes = lbse::encode(model, parts.database.features);
                const auto query_codes = lbse::encode(model, parts.query.features);
                const lbse::HammingIndex index(db_codes, parts.database.labels);
                const auto report = lbse::evaluate_retrieval(
                    index, query_codes, parts.query.labels, dataset.num_classes, eval_options);
                oa += report.oa;
                sen += report.sensitivity;
                ppv += report.ppv;
                f1 += report.f1;
                map += report.map;
                iters += static_cast<double>(model.history.iterations());
                for (std::size_t i = 0; i < pk.size(); ++i)
                  pk[i] += report.precision_at_k[i].second;
              }
              const double r = static_cast<double>(bench_args.runs);
              csv << bits << ',' << format_double(alpha) << ',' << format_double(beta) << ','
                  << format_double(gamma) << ',' << format_double(lambda) << ','
                  << bench_args.runs << ',' << format_double(oa / r) << ','
                  << format_double(sen / r) << ',' << format_double(ppv / r) << ','
                  << format_double(f1 / r) << ',' << format_double(map / r);
              for (const auto value : pk) csv << ',' << format_double(value / r);
              csv << ',' << format_double(iters / r) << '\n';
            }

    if (bench_args.output.empty())
      std::cout << csv.str();
    else
      write_text_file(bench_args.output, csv.str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const lbse::LbseError& e) {
    std::cerr << "lbse: error [" << lbse::to_string(e.code()) << "] " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "lbse: error [E_INTERNAL] " << e.what() << '\n';
    return 1;
  }
}
