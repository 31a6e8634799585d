#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "uca/bench.hpp"
#include "uca/dataset.hpp"
#include "uca/neural.hpp"
#include "uca/valuegen.hpp"

namespace uca {

// Flat key=value configuration. Blank lines and '#' comments are ignored;
// keys use the CLI flag names with '-' or '_'.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  // Throws UsageError naming the key when it is absent or malformed.
  std::string require(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::int64_t require_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<int> get_ints(const std::string& key, std::vector<int> fallback) const;

  void reject_unknown(const std::set<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
};

enum class Distribution { kNpd, kTrap };

Distribution parse_distribution(const std::string& name);
const char* to_string(Distribution d);

struct ExperimentConfig {
  Distribution dist = Distribution::kNpd;
  int n = 10;
  int m = 4;
  std::uint64_t seed = 0;
  NpdParams npd;
  TrapParams trap;

  // labeling and training
  int kappa = 4;
  int pairs_per_level = 10'000;
  double split_fraction = 0.10;
  std::vector<double> lr_grid = {1e-4, 3e-4, 1e-3, 3e-3};
  std::vector<int> batch_grid = {32, 64, 128};
  int epochs = 200;

  // curves
  int instances = 5;
  int evals = 2000;
  std::vector<int> checkpoints = {10, 50, 100, 250, 500, 750, 1000, 1500, 2000};
  std::vector<EstimatorKind> estimators = {EstimatorKind::kCurrentValue, EstimatorKind::kRandom,
                                           EstimatorKind::kNeural};
  std::uint64_t solve_budget = kDefaultNodeBudget;

  // probability / histogram
  std::uint64_t samples = 100'000'000;
  int bins = 100;

  // prediction
  int train_kappa = 0;  // 0: same as kappa
  int samples_per_level = 1000;

  std::filesystem::path out_dir = "out";

  // Keys that must appear in a config file for every experiment.
  static const std::vector<std::string>& required_keys();
  static const std::set<std::string>& known_keys();
  static ExperimentConfig from(const Config& config, const std::vector<std::string>& required);

  ProblemSpec instance_spec(int index) const;
};

ValueTable generate_table(const ExperimentConfig& cfg, const ProblemSpec& spec);

// Everything produced for one problem instance of a curves experiment.
struct PreparedInstance {
  ValueTable table;
  std::vector<LabeledPair> dataset;
  std::optional<GridResult> training;
  std::optional<ExactSolution> optimum;
};

bool needs_model(const ExperimentConfig& cfg);

// Generates instance `index`, and when the neural estimator is requested
// labels a dataset and grid-searches a model on it.
PreparedInstance prepare_instance(const ExperimentConfig& cfg, int index);

ProbabilityEstimate run_probability(const ExperimentConfig& cfg);
Histogram run_histogram(const ExperimentConfig& cfg);
PredictionReport run_prediction(const ExperimentConfig& cfg);
CurveReport run_curves(const ExperimentConfig& cfg, std::span<const PreparedInstance> prepared);

// Runs one named bench experiment and writes its CSV/SVG files to cfg.out_dir.
void run_bench(const std::string& experiment, const ExperimentConfig& cfg);

// generate -> label -> train -> curves for every instance, with stage files
// and manifest.txt under cfg.out_dir.
void run_pipeline(const ExperimentConfig& cfg);

void write_training_trace_csv(const std::filesystem::path& path,
                              const std::vector<EpochLoss>& trace);
void write_grid_csv(const std::filesystem::path& path, const std::vector<GridCell>& cells);

// FNV-1a 64 of the file contents, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

}  // namespace uca
