#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uca/core.hpp"
#include "uca/exact.hpp"
#include "uca/neural.hpp"
#include "uca/rng.hpp"
#include "uca/search.hpp"

namespace uca {

// Uniform complete assignment: every element labeled independently.
PartialAssignment sample_complete_assignment(int n, int m, Rng& rng);

struct ProbabilityEstimate {
  double probability = 0.0;
  std::uint64_t positives = 0;
  std::uint64_t samples = 0;
};

// Monte Carlo estimate of P(V(S) > 0) over uniform complete assignments.
// Samples are drawn in fixed-size chunks, chunk c on substream c of a seed
// drawn from `rng`, so the count does not depend on the thread count.
ProbabilityEstimate estimate_positive_probability(const ValueTable& v, std::uint64_t samples,
                                                  Rng& rng);

struct Histogram {
  double low = 0.0;
  double high = 0.0;
  std::vector<std::uint64_t> counts;

  double bin_width() const { return (high - low) / static_cast<double>(counts.size()); }
  std::uint64_t total() const;
};

// Histogram of V over uniform complete assignments, spanning the observed
// range in `bins` equal bins (two passes over the same sample stream).
Histogram value_histogram(const ValueTable& v, std::uint64_t samples, int bins, Rng& rng);

// Predicts V*(S) from a partial assignment and its current value V(S).
using ValuePredictor = std::function<double(const PartialAssignment&, double current_value)>;

ValuePredictor model_predictor(const MlpModel& model);
ValuePredictor current_value_predictor();

struct LevelErrors {
  int unassigned = 0;
  double mean_error = 0.0;  // mean of V* - prediction
  double std_error = 0.0;   // population standard deviation
  std::size_t samples = 0;
};

struct ScatterPoint {
  int unassigned = 0;
  double true_value = 0.0;
  double predicted = 0.0;
};

struct PredictionReport {
  std::vector<LevelErrors> levels;
  std::vector<ScatterPoint> scatter;
};

// For each unassigned count in `levels`, draws `samples_per_level` uniform
// partial assignments (pair p of level index l on substream l * samples + p)
// and compares exact V* with the prediction.
PredictionReport prediction_error_report(const ValuePredictor& predictor, const ValueTable& v,
                                         std::span<const int> levels, int samples_per_level,
                                         Rng& rng,
                                         std::uint64_t node_budget = kDefaultNodeBudget);

struct BenchInstance {
  const ValueTable* table = nullptr;
  const MlpModel* model = nullptr;    // required for the neural estimator
  std::optional<double> optimum;      // exact optimum when tractable
};

struct CurvePoint {
  EstimatorKind estimator = EstimatorKind::kCurrentValue;
  int checkpoint = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<double> per_instance;
};

struct CurveReport {
  std::vector<CurvePoint> points;
  std::optional<double> optimum;  // mean optimum, present only if every instance has one
};

inline constexpr int kPaperCheckpoints[] = {10, 50, 100, 250, 500, 750, 1000, 1500, 2000};

// 95% interval as mean +- 1.96 sd / sqrt(k) over k per-instance values (sample sd).
std::pair<double, double> normal_ci95(std::span<const double> values);

// best_of_n for every (estimator, instance), averaged over instances at each
// checkpoint. Instance i with estimator e uses substream (e, i) of `seed`.
CurveReport benchmark_curves(std::span<const BenchInstance> instances,
                             std::span<const EstimatorKind> estimators, int n_evals,
                             std::span<const int> checkpoints, std::uint64_t seed);

// Report writers. CSVs are the machine-readable output; SVGs are fixed
// 800x500 plots.
void write_probability_csv(const std::filesystem::path& path, const ProbabilityEstimate& p);
void write_histogram_csv(const std::filesystem::path& path, const Histogram& h);
void write_histogram_svg(const std::filesystem::path& path, const Histogram& h,
                         const std::string& title);
void write_prediction_csv(const std::filesystem::path& path, const PredictionReport& r);
void write_scatter_csv(const std::filesystem::path& path, const PredictionReport& r);
void write_prediction_svg(const std::filesystem::path& path, const PredictionReport& r,
                          const std::string& title);
void write_scatter_svg(const std::filesystem::path& path, const PredictionReport& r,
                       const std::string& title);
void write_curves_csv(const std::filesystem::path& path, const CurveReport& r);
void write_curves_svg(const std::filesystem::path& path, const CurveReport& r,
                      const std::string& title);

}  // namespace uca
