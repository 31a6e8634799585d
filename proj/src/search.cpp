#include "uca/search.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "uca/exact.hpp"
#include "uca/parallel.hpp"

namespace uca {

const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kCurrentValue:
      return "current";
    case EstimatorKind::kRandom:
      return "random";
    case EstimatorKind::kNeural:
      return "neural";
  }
  return "?";
}

EstimatorKind parse_estimator(std::string_view name) {
  if (name == "current") return EstimatorKind::kCurrentValue;
  if (name == "random") return EstimatorKind::kRandom;
  if (name == "neural") return EstimatorKind::kNeural;
  throw UsageError("unknown estimator '" + std::string(name) + "' (current|random|neural)");
}

PartialAssignment greedy_rollout(const ValueTable& v, const Estimator& est, Rng& rng) {
  if (est.kind == EstimatorKind::kNeural) {
    if (est.model == nullptr) throw UsageError("neural estimator without a model");
    if (est.model->n() != v.n() || est.model->m() != v.m()) {
      throw UsageError("neural estimator dimensions do not match the value table");
    }
  }
  std::vector<int> order(v.n());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  ChildScore score;
  switch (est.kind) {
    case EstimatorKind::kCurrentValue:
      score = [&](const PartialAssignment& child) { return value_of(child, v); };
      break;
    case EstimatorKind::kRandom:
      score = [&](const PartialAssignment&) { return uniform(rng); };
      break;
    case EstimatorKind::kNeural:
      score = [&](const PartialAssignment& child) {
        return predict_value_to_go(*est.model, child, v);
      };
      break;
  }

  PartialAssignment s(v.n(), v.m());
  for (int element : order) s.assign(element, argmax_over_children(s, element, v, score));
  return s;
}

RolloutResult best_of_n(const ValueTable& v, const Estimator& est, int n_evals,
                        std::span<const int> checkpoints, Rng& rng) {
  if (n_evals < 1) throw UsageError("best_of_n needs at least one evaluation");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) {
    throw UsageError("checkpoints must be sorted");
  }
  if (!checkpoints.empty() && (checkpoints.front() < 1 || checkpoints.back() > n_evals)) {
    throw UsageError("checkpoints must lie in [1, evaluations]");
  }
  const std::uint64_t base = rng();
  std::vector<PartialAssignment> samples(n_evals);
  std::vector<double> values(n_evals);
  parallel_for(samples.size(), [&](std::size_t r) {
    Rng local = make_substream(base, r);
    samples[r] = greedy_rollout(v, est, local);
    values[r] = value_of(samples[r], v);
  });

  RolloutResult result;
  std::size_t best = 0;
  auto next = checkpoints.begin();
  for (int r = 0; r < n_evals; ++r) {
    if (values[r] > values[best]) best = r;
    while (next != checkpoints.end() && *next == r + 1) {
      result.checkpoints.emplace_back(*next, values[best]);
      ++next;
    }
  }
  result.best_value = values[best];
  result.best_assignment = std::move(samples[best]);
  return result;
}

}  // namespace uca
