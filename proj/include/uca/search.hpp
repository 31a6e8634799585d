#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "uca/core.hpp"
#include "uca/neural.hpp"
#include "uca/rng.hpp"

namespace uca {

enum class EstimatorKind { kCurrentValue, kRandom, kNeural };

const char* to_string(EstimatorKind kind);
EstimatorKind parse_estimator(std::string_view name);  // "current" | "random" | "neural"

// Scores the children of a greedy step. Neural estimators borrow the model;
// it must outlive the estimator.
struct Estimator {
  EstimatorKind kind = EstimatorKind::kCurrentValue;
  const MlpModel* model = nullptr;

  static Estimator current_value() { return {EstimatorKind::kCurrentValue, nullptr}; }
  static Estimator random() { return {EstimatorKind::kRandom, nullptr}; }
  static Estimator neural(const MlpModel& model) { return {EstimatorKind::kNeural, &model}; }
};

// One greedy pass: a fresh uniform element order, then for each element the
// child with the best estimator score (lowest alternative on ties).
PartialAssignment greedy_rollout(const ValueTable& v, const Estimator& est, Rng& rng);

struct RolloutResult {
  PartialAssignment best_assignment;
  double best_value = 0.0;
  std::vector<std::pair<int, double>> checkpoints;  // (evaluations, best value so far)
};

// n_evals independent rollouts, rollout r on substream r of a seed drawn from
// `rng`. The running maximum of V is recorded at each checkpoint.
RolloutResult best_of_n(const ValueTable& v, const Estimator& est, int n_evals,
                        std::span<const int> checkpoints, Rng& rng);

}  // namespace uca
