#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <algorithm>
#include <map>
#include <numeric>

#include "oracles.hpp"
#include "uca/bench.hpp"
#include "uca/exact.hpp"
#include "uca/search.hpp"
#include "uca/valuegen.hpp"

using namespace uca;

namespace {

// v(C, t) = sum_{a in C} w(a, t) with w on a 1/8 grid, so every sum is exact.
struct AdditiveTable {
  ValueTable table;
  double optimum;
};

AdditiveTable additive_table(int n, int m, Rng& rng) {
  std::vector<double> w(static_cast<std::size_t>(n) * m);
  for (auto& x : w) x = static_cast<double>(static_cast<int>(rng() % 161) - 80) / 8.0;
  std::vector<double> values((std::size_t{1} << n) * m, 0.0);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    for (int t = 0; t < m; ++t) {
      for (int a = 0; a < n; ++a) {
        if ((mask >> a) & 1U) values[mask * m + t] += w[static_cast<std::size_t>(a) * m + t];
      }
    }
  }
  double optimum = 0.0;
  for (int a = 0; a < n; ++a) {
    double best = w[static_cast<std::size_t>(a) * m];
    for (int t = 1; t < m; ++t) best = std::max(best, w[static_cast<std::size_t>(a) * m + t]);
    optimum += best;
  }
  return {ValueTable(n, m, 0, std::move(values)), optimum};
}

void check_feasible(const PartialAssignment& s) {
  CHECK(s.is_complete());
  Mask seen = 0;
  for (Mask b : s.bundles()) {
    CHECK((seen & b) == 0);
    seen |= b;
  }
  CHECK(seen == (Mask{1} << s.n()) - 1);
}

}  // namespace

TEST_CASE("estimator names") {
  CHECK(parse_estimator("current") == EstimatorKind::kCurrentValue);
  CHECK(parse_estimator("random") == EstimatorKind::kRandom);
  CHECK(parse_estimator("neural") == EstimatorKind::kNeural);
  CHECK_THROWS_AS(parse_estimator("beam"), UsageError);
}

TEST_CASE("greedy_rollout with a single alternative") {
  const auto v = generate_npd({6, 1, 1}, {});
  const auto model = MlpModel::for_problem(6, 1, 2);
  Rng rng(1);
  for (const auto& est : {Estimator::current_value(), Estimator::random(), Estimator::neural(model)}) {
    const auto s = greedy_rollout(v, est, rng);
    CHECK(s == PartialAssignment::from_labels(1, std::vector<Alternative>(6, 0)));
  }
}

TEST_CASE("random rollouts are uniform over complete assignments") {
  const auto v = generate_npd({3, 2, 4}, {});
  Rng rng(8);
  const int draws = 100'000;
  std::map<std::vector<Alternative>, int> counts;
  for (int k = 0; k < draws; ++k) counts[greedy_rollout(v, Estimator::random(), rng).labels()] += 1;
  CHECK(counts.size() == 8);
  const double p = 1.0 / 8.0, sigma = std::sqrt(draws * p * (1 - p));
  for (const auto& [labels, count] : counts) CHECK(std::abs(count - draws * p) <= 3 * sigma);
}

TEST_CASE("current-value greedy is exact on additive tables") {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const auto add = additive_table(9, 4, rng);
    const auto s = greedy_rollout(add.table, Estimator::current_value(), rng);
    CHECK(value_of(s, add.table) == add.optimum);
  }
}

TEST_CASE("committed child attains the max among siblings at every step") {
  const auto v = generate_npd({7, 3, 10}, {1.0, 0.1});
  // Replicate the rollout's order by drawing from an identical stream.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed), mirror(seed);
    const auto s = greedy_rollout(v, Estimator::current_value(), rng);
    std::vector<int> order(7);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), mirror);
    PartialAssignment partial(7, 3);
    for (int element : order) {
      double best = -1e300;
      for (const auto& child : expand_children(partial, element)) {
        best = std::max(best, value_of(child, v));
      }
      partial.assign(element, s.label(element));
      CHECK(value_of(partial, v) == best);
    }
  }
}

TEST_CASE("all estimators produce feasible assignments") {
  const auto v = generate_trap({10, 4, 2}, {0.1, 0.1, 5.0, 0.1});
  const auto model = MlpModel::for_problem(10, 4, 9);
  Rng rng(5);
  for (const auto& est : {Estimator::current_value(), Estimator::random(), Estimator::neural(model)}) {
    for (int k = 0; k < 20; ++k) check_feasible(greedy_rollout(v, est, rng));
  }
  const auto wrong = MlpModel::for_problem(9, 4, 9);
  CHECK_THROWS_AS(greedy_rollout(v, Estimator::neural(wrong), rng), UsageError);
}

TEST_CASE("best_of_n") {
  const auto v = generate_npd({8, 3, 21}, {1.0, 0.1});
  SUBCASE("one evaluation") {
    Rng rng(1);
    const int cps[] = {1};
    const auto r = best_of_n(v, Estimator::current_value(), 1, cps, rng);
    CHECK(r.checkpoints.size() == 1);
    CHECK(r.best_value == r.checkpoints[0].second);
    CHECK(r.best_value == value_of(r.best_assignment, v));
  }
  SUBCASE("running max is monotone and bounded by the optimum") {
    Rng rng(2);
    const std::vector<int> cps(std::begin(kPaperCheckpoints), std::end(kPaperCheckpoints));
    const auto r = best_of_n(v, Estimator::random(), 2000, cps, rng);
    const double optimum = solve_exact(v).value;
    REQUIRE(r.checkpoints.size() == cps.size());
    for (std::size_t k = 0; k < cps.size(); ++k) {
      CHECK(r.checkpoints[k].first == cps[k]);
      CHECK(r.checkpoints[k].second <= optimum);
      if (k) CHECK(r.checkpoints[k].second >= r.checkpoints[k - 1].second);
    }
    CHECK(r.best_value == value_of(r.best_assignment, v));
  }
  SUBCASE("checkpoint validation") {
    Rng rng(3);
    const int unsorted[] = {5, 2};
    const int too_far[] = {11};
    CHECK_THROWS_AS(best_of_n(v, Estimator::random(), 10, unsorted, rng), UsageError);
    CHECK_THROWS_AS(best_of_n(v, Estimator::random(), 10, too_far, rng), UsageError);
  }
  SUBCASE("independent of the thread count") {
    const int cps[] = {10, 100};
    Rng a(4), b(4);
    setenv("UCA_THREADS", "1", 1);
    const auto serial = best_of_n(v, Estimator::random(), 100, cps, a);
    setenv("UCA_THREADS", "3", 1);
    const auto threaded = best_of_n(v, Estimator::random(), 100, cps, b);
    setenv("UCA_THREADS", "0", 1);
    CHECK(serial.checkpoints == threaded.checkpoints);
    CHECK(serial.best_assignment == threaded.best_assignment);
  }
}
