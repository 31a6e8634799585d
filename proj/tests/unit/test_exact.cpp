#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "uca/dataset.hpp"
#include "uca/exact.hpp"
#include "uca/search.hpp"
#include "uca/valuegen.hpp"

using namespace uca;

namespace {

ElementOrder random_order(int n, Rng& rng) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return ElementOrder(perm);
}

ValueTable random_table(Rng& rng, int n, int m) {
  const ProblemSpec spec{n, m, rng()};
  if (rng() % 2) return generate_npd(spec, {1.0, 0.1});
  return generate_trap(spec, {0.1, 0.1, n / 2.0, 0.1});
}

}  // namespace

TEST_CASE("search tree node counts") {
  CHECK(search_tree_nodes(3, 0) == 1);
  CHECK(search_tree_nodes(3, 2) == 1 + 3 + 9);
  CHECK(search_tree_nodes(1, 5) == 6);
  CHECK(search_tree_nodes(10, 25) == std::numeric_limits<std::uint64_t>::max());
}

TEST_CASE("exact_value_to_go base cases") {
  SUBCASE("complete assignment returns its value") {
    const auto v = generate_npd({5, 3, 4}, {});
    const auto s = PartialAssignment::from_labels(3, {0, 2, 1, 1, 0});
    CHECK(exact_value_to_go(s, v) == value_of(s, v));
    CHECK(exact_value_to_go(s, v, ElementOrder::identity(5)) == value_of(s, v));
  }
  SUBCASE("one element, two alternatives") {
    const auto v = generate_npd({1, 2, 8}, {0.0, 1.0});
    const double expected = std::max(v(1, 0) + v(0, 1), v(0, 0) + v(1, 1));
    CHECK(exact_value_to_go(PartialAssignment(1, 2), v) == expected);
  }
  SUBCASE("n=8, m=3 matches flat enumeration of 3^8 assignments") {
    const auto v = generate_npd({8, 3, 1234}, {1.0, 0.1});
    CHECK(exact_value_to_go(PartialAssignment(8, 3), v, ElementOrder::identity(8)) ==
          oracle::brute_force_optimum(v));
  }
}

TEST_CASE("exact_value_to_go contract errors") {
  const auto v = generate_npd({6, 3, 2}, {});
  SUBCASE("budget exceeded, no partial answer") {
    CHECK_THROWS_AS(exact_value_to_go(PartialAssignment(6, 3), v, 100), BudgetError);
    CHECK_NOTHROW(exact_value_to_go(PartialAssignment(6, 3), v, search_tree_nodes(3, 6)));
    CHECK_THROWS_AS(solve_exact(v, search_tree_nodes(3, 6) - 1), BudgetError);
  }
  SUBCASE("assigned set must be a prefix of the order") {
    PartialAssignment s(6, 3);
    s.assign(4, 1);
    CHECK_THROWS_AS(exact_value_to_go(s, v, ElementOrder::identity(6)), UsageError);
    CHECK_NOTHROW(exact_value_to_go(s, v, ElementOrder({4, 0, 1, 2, 3, 5})));
  }
}

TEST_CASE("solve_exact") {
  SUBCASE("one alternative takes everything") {
    const auto v = generate_npd({5, 1, 3}, {});
    const auto sol = solve_exact(v);
    CHECK(sol.value == v(0b11111, 0));
    CHECK(sol.assignment.is_complete());
  }
  SUBCASE("noiseless TRAP: the grand bundle wins") {
    const TrapParams p{0.0, 0.1, 4.0, 0.1};
    const auto v = generate_trap({8, 3, 0}, p);
    const auto sol = solve_exact(v);
    CHECK(sol.value == doctest::Approx(trap_mean(8, p) + 0.0 + 0.0).epsilon(1e-14));
    CHECK(sol.value == oracle::brute_force_optimum(v));
    const auto bundles = sol.assignment.bundles();
    CHECK(std::count(bundles.begin(), bundles.end(), Mask{0}) == 2);
  }
  SUBCASE("value of returned assignment equals the optimum and dominates greedy") {
    Rng rng(99);
    for (int trial = 0; trial < 5; ++trial) {
      const auto v = generate_npd({8, 3, rng()}, {1.0, 0.1});
      const auto sol = solve_exact(v);
      CHECK(value_of(sol.assignment, v) == sol.value);
      CHECK(sol.value == exact_value_to_go(PartialAssignment(8, 3), v));
      for (int r = 0; r < 20; ++r) {
        CHECK(sol.value >= value_of(greedy_rollout(v, Estimator::current_value(), rng), v));
      }
    }
  }
}

TEST_CASE("argmax_over_children") {
  const auto v = generate_npd({3, 3, 0}, {});
  const PartialAssignment s(3, 3);
  CHECK(argmax_over_children(s, 0, v, [](const PartialAssignment&) { return 7.0; }) == 0);
  const double scores[] = {1.0, 3.0, 2.0};
  CHECK(argmax_over_children(s, 1, v, [&](const PartialAssignment& c) {
          return scores[c.label(1)];
        }) == 1);
  const double tied[] = {1.0, 3.0, 3.0};
  CHECK(argmax_over_children(s, 1, v, [&](const PartialAssignment& c) {
          return tied[c.label(1)];
        }) == 1);
}

TEST_CASE("greedy with the exact value-to-go follows an optimal path") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const auto v = random_table(rng, 7, 3);
    const double optimum = oracle::brute_force_optimum(v);
    PartialAssignment s(7, 3);
    const auto order = random_order(7, rng);
    for (int pos = 0; pos < 7; ++pos) {
      const int pick = argmax_over_children(s, order[pos], v, [&](const PartialAssignment& c) {
        return exact_value_to_go(c, v);
      });
      s.assign(order[pos], pick);
      CHECK(oracle::max_completion(oracle::to_fixed(s), v) == optimum);
    }
    CHECK(value_of(s, v) == optimum);
  }
}

TEST_CASE("Bellman consistency and monotone dominance on random instances") {
  Rng rng(2718);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 5), m = 2 + static_cast<int>(rng() % 2);
    const auto v = random_table(rng, n, m);
    const auto order = random_order(n, rng);
    PartialAssignment s(n, m);
    for (int pos = 0; pos < n; ++pos) {
      const double here = exact_value_to_go(s, v, order);
      double best_child = -std::numeric_limits<double>::infinity();
      for (const auto& child : expand_children(s, order[pos])) {
        const double vc = exact_value_to_go(child, v, order);
        CHECK(here >= vc);
        best_child = std::max(best_child, vc);
      }
      CHECK(here == best_child);
      s.assign(order[pos], static_cast<int>(rng() % m));
    }
  }
}

TEST_CASE("root value equals brute force and is order independent") {
  Rng rng(31);
  for (int n = 1; n <= 8; ++n) {
    for (int m = 1; m <= 3; ++m) {
      const auto v = random_table(rng, n, m);
      const double expected = oracle::brute_force_optimum(v);
      const PartialAssignment empty(n, m);
      CHECK(exact_value_to_go(empty, v) == expected);
      for (int k = 0; k < 3; ++k) {
        CHECK(exact_value_to_go(empty, v, random_order(n, rng)) == expected);
      }
    }
  }
}

TEST_CASE("value-to-go of arbitrary subsets matches completion enumeration") {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const auto v = random_table(rng, 8, 3);
    const auto s = sample_partial_assignment({8, 3, 0}, static_cast<int>(rng() % 9), rng);
    CHECK(exact_value_to_go(s, v) == oracle::max_completion(oracle::to_fixed(s), v));
  }
}
