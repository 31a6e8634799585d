// uca: command-line front end for the combinatorial assignment laboratory.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "uca/bench.hpp"
#include "uca/dataset.hpp"
#include "uca/exact.hpp"
#include "uca/experiment.hpp"
#include "uca/neural.hpp"
#include "uca/search.hpp"
#include "uca/valuegen.hpp"

namespace {

std::string csv_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct GenerateArgs {
  std::string dist;
  int n = 0, m = 0;
  std::uint64_t seed = 0;
  double mu = 1.0, sigma = 0.1, delta = 0.1, eps = 0.1;
  std::optional<double> tau;
  std::string out;
};

struct SolveArgs {
  std::string table;
  std::uint64_t budget = uca::kDefaultNodeBudget;
};

struct LabelArgs {
  std::string table, out;
  int kappa = 1, pairs = 10'000;
  std::uint64_t seed = 0;
};

struct TrainArgs {
  std::string data, out, trace;
  std::vector<double> lr_grid = {1e-4, 3e-4, 1e-3, 3e-3};
  std::vector<int> batch_grid = {32, 64, 128};
  int epochs = 200;
  double split = 0.10;
  std::uint64_t seed = 0;
};

struct RolloutArgs {
  std::string table, estimator, model;
  int evals = 2000;
  std::vector<int> checkpoints;
  std::uint64_t seed = 0;
};

struct ConfigArgs {
  std::string experiment, config, out_dir;
};

void run_generate(const GenerateArgs& a) {
  const uca::ProblemSpec spec{a.n, a.m, a.seed};
  spec.validate();
  const auto dist = uca::parse_distribution(a.dist);
  const auto table = dist == uca::Distribution::kNpd
                         ? uca::generate_npd(spec, {a.mu, a.sigma})
                         : uca::generate_trap(spec, {a.sigma, a.delta, a.tau.value_or(a.n / 2.0), a.eps});
  table.save(a.out);
}

void run_solve(const SolveArgs& a) {
  const auto table = uca::ValueTable::load(a.table);
  const auto solution = uca::solve_exact(table, a.budget);
  std::cout << csv_number(solution.value);
  for (auto label : solution.assignment.labels()) std::cout << ',' << int{label};
  std::cout << '\n';
}

void run_label(const LabelArgs& a) {
  const auto table = uca::ValueTable::load(a.table);
  uca::DatasetConfig cfg;
  cfg.kappa = a.kappa;
  cfg.pairs_per_level = a.pairs;
  cfg.seed = a.seed;
  uca::Dataset{table.n(), table.m(), a.kappa, uca::build_dataset(table, cfg)}.save(a.out);
}

void run_train(const TrainArgs& a) {
  auto data = uca::Dataset::load(a.data);
  uca::Rng split_rng = uca::make_substream(a.seed, 0);
  auto split = uca::split_dataset(std::move(data.pairs), a.split, split_rng);
  uca::TrainConfig base;
  base.epochs = a.epochs;
  base.seed = a.seed;
  const auto result = uca::grid_search(split.train, split.test, data.n, data.m, a.lr_grid,
                                       a.batch_grid, base);
  result.result.model.save(a.out);
  const auto trace = a.trace.empty()
                         ? std::filesystem::path(a.out).parent_path() / "training_trace.csv"
                         : std::filesystem::path(a.trace);
  uca::write_training_trace_csv(trace, result.result.trace);
  std::cout << "selected lr=" << result.best.learning_rate << " batch=" << result.best.batch_size
            << " test_loss=" << result.result.trace.back().test_loss << '\n';
}

void run_rollout(const RolloutArgs& a) {
  const auto table = uca::ValueTable::load(a.table);
  const auto kind = uca::parse_estimator(a.estimator);
  std::optional<uca::MlpModel> model;
  if (kind == uca::EstimatorKind::kNeural) {
    if (a.model.empty()) throw uca::UsageError("--model is required for the neural estimator");
    model = uca::MlpModel::load(a.model);
  }
  const uca::Estimator est{kind, model ? &*model : nullptr};
  auto checkpoints = a.checkpoints.empty() ? std::vector<int>{a.evals} : a.checkpoints;
  uca::Rng rng = uca::make_rng(a.seed);
  const auto result = uca::best_of_n(table, est, a.evals, checkpoints, rng);
  std::cout << "checkpoint,best_value\n";
  for (const auto& [count, value] : result.checkpoints) {
    std::cout << count << ',' << csv_number(value) << '\n';
  }
}

uca::ExperimentConfig load_experiment(const ConfigArgs& a, std::vector<std::string> required) {
  auto config = uca::Config::load(a.config);
  if (!a.out_dir.empty()) config.set("out_dir", a.out_dir);
  return uca::ExperimentConfig::from(config, required);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Utilitarian combinatorial assignment: generators, exact search, learned heuristics"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate an NPD or TRAP value table");
  generate->add_option("--dist", gen.dist, "npd | trap")->required()->check(CLI::IsMember({"npd", "trap"}));
  generate->add_option("--n", gen.n, "element count (1..30)")->required();
  generate->add_option("--m", gen.m, "alternative count")->required();
  generate->add_option("--seed", gen.seed, "table seed")->required();
  generate->add_option("--mu", gen.mu, "NPD mean")->capture_default_str();
  generate->add_option("--sigma", gen.sigma, "noise standard deviation")->capture_default_str();
  generate->add_option("--delta", gen.delta, "TRAP scale")->capture_default_str();
  generate->add_option("--tau", gen.tau, "TRAP threshold (default n/2)");
  generate->add_option("--eps", gen.eps, "TRAP exponent bump")->capture_default_str();
  generate->add_option("--out", gen.out, "output table file")->required();

  SolveArgs sol;
  auto* solve = app.add_subcommand("solve", "Exhaustive exact optimum of a value table");
  solve->add_option("--table", sol.table, "table file")->required()->check(CLI::ExistingFile);
  solve->add_option("--budget", sol.budget, "search node budget")->capture_default_str();

  LabelArgs lab;
  auto* label = app.add_subcommand("label", "Build an exactly labeled training dataset");
  label->add_option("--table", lab.table, "table file")->required()->check(CLI::ExistingFile);
  label->add_option("--kappa", lab.kappa, "deepest unassigned level")->required();
  label->add_option("--pairs", lab.pairs, "pairs per level")->capture_default_str();
  label->add_option("--seed", lab.seed, "sampling seed")->required();
  label->add_option("--out", lab.out, "output dataset file")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Grid-search and train the value-to-go network");
  train->add_option("--data", tr.data, "dataset file")->required()->check(CLI::ExistingFile);
  train->add_option("--out", tr.out, "output model file")->required();
  train->add_option("--lr-grid", tr.lr_grid, "learning rates")->delimiter(',')->capture_default_str();
  train->add_option("--batch-grid", tr.batch_grid, "mini-batch sizes")->delimiter(',')->capture_default_str();
  train->add_option("--epochs", tr.epochs, "epochs per grid cell")->capture_default_str();
  train->add_option("--split", tr.split, "test share")->capture_default_str();
  train->add_option("--seed", tr.seed, "split and training seed")->capture_default_str();
  train->add_option("--trace", tr.trace, "loss trace CSV (default: training_trace.csv next to the model)");

  RolloutArgs ro;
  auto* rollout = app.add_subcommand("rollout", "Best-of-N greedy rollouts with an estimator");
  rollout->add_option("--table", ro.table, "table file")->required()->check(CLI::ExistingFile);
  rollout->add_option("--estimator", ro.estimator, "current | random | neural")->required();
  rollout->add_option("--model", ro.model, "model file for the neural estimator");
  rollout->add_option("--evals", ro.evals, "number of rollouts")->capture_default_str();
  rollout->add_option("--checkpoints", ro.checkpoints, "evaluation counts to report")->delimiter(',');
  rollout->add_option("--seed", ro.seed, "rollout seed")->capture_default_str();

  ConfigArgs be;
  auto* bench = app.add_subcommand("bench", "Run an experiment from a key=value config file");
  bench->add_option("--experiment", be.experiment, "probability | histogram | prediction | curves")
      ->required()
      ->check(CLI::IsMember({"probability", "histogram", "prediction", "curves"}));
  bench->add_option("--config", be.config, "config file")->required();
  bench->add_option("--out-dir", be.out_dir, "output directory (overrides out_dir)");

  ConfigArgs pl;
  auto* pipeline = app.add_subcommand("pipeline", "generate -> label -> train -> curves from one config");
  pipeline->add_option("--config", pl.config, "config file")->required();
  pipeline->add_option("--out-dir", pl.out_dir, "output directory (overrides out_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*generate) run_generate(gen);
    if (*solve) run_solve(sol);
    if (*label) run_label(lab);
    if (*train) run_train(tr);
    if (*rollout) run_rollout(ro);
    if (*bench) {
      auto required = uca::ExperimentConfig::required_keys();
      if (be.experiment == "prediction" || be.experiment == "curves") required.push_back("kappa");
      uca::run_bench(be.experiment, load_experiment(be, required));
    }
    if (*pipeline) {
      auto required = uca::ExperimentConfig::required_keys();
      required.push_back("kappa");
      uca::run_pipeline(load_experiment(pl, required));
    }
  } catch (const uca::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
