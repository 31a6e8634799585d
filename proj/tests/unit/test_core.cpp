#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "oracles.hpp"
#include "uca/core.hpp"
#include "uca/dataset.hpp"
#include "uca/neural.hpp"
#include "uca/rng.hpp"
#include "uca/valuegen.hpp"

using namespace uca;

namespace {

ValueTable table_from(int n, int m, std::vector<double> values) {
  return ValueTable(n, m, 0, std::move(values));
}

}  // namespace

TEST_CASE("problem spec bounds") {
  CHECK_NOTHROW(ProblemSpec{1, 1, 0}.validate());
  CHECK_NOTHROW(ProblemSpec{30, 2, 0}.validate());
  CHECK_THROWS_AS((ProblemSpec{0, 1, 0}.validate()), UsageError);
  CHECK_THROWS_AS((ProblemSpec{31, 1, 0}.validate()), UsageError);
  CHECK_THROWS_AS((ProblemSpec{3, 0, 0}.validate()), UsageError);
}

TEST_CASE("value table rejects wrong size and non-finite entries") {
  CHECK_THROWS_AS(table_from(2, 2, std::vector<double>(7, 0.0)), UsageError);
  auto values = std::vector<double>(8, 0.0);
  values[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(table_from(2, 2, values), UsageError);
}

TEST_CASE("value_of") {
  SUBCASE("fully unassigned sums the empty-bundle entries") {
    const auto v = generate_npd({4, 3, 11}, {1.0, 0.5});
    const PartialAssignment s(4, 3);
    CHECK(value_of(s, v) == v(0, 0) + v(0, 1) + v(0, 2));
  }
  SUBCASE("single nonzero term") {
    // n=2, m=2; entry (mask 0b11, t=0) = 5, everything else 0.
    std::vector<double> values(8, 0.0);
    values[3 * 2 + 0] = 5.0;
    const auto v = table_from(2, 2, values);
    CHECK(value_of(PartialAssignment::from_labels(2, {0, 0}), v) == 5.0);
  }
  SUBCASE("matches per-element re-aggregation") {
    const auto v = generate_npd({3, 2, 99}, {1.0, 0.1});
    const auto s = PartialAssignment::from_labels(2, {0, 1, 0});
    CHECK(value_of(s, v) == v(0b101, 0) + v(0b010, 1));
    CHECK(value_of(s, v) == oracle::value_from_labels({0, 1, 0}, v));
  }
  SUBCASE("dimension mismatch") {
    const auto v = generate_npd({3, 2, 1}, {});
    CHECK_THROWS_AS(value_of(PartialAssignment(3, 3), v), UsageError);
    CHECK_THROWS_AS(value_of(PartialAssignment(4, 2), v), UsageError);
  }
}

TEST_CASE("expand_children") {
  SUBCASE("one alternative gives one child") {
    CHECK(expand_children(PartialAssignment(5, 1), 3).size() == 1);
  }
  SUBCASE("children follow alternative order") {
    const auto kids = expand_children(PartialAssignment(2, 3), 0);
    REQUIRE(kids.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(kids[i].label(0) == i);
      CHECK(kids[i].label(1) == kUnassigned);
    }
  }
  SUBCASE("already assigned element") {
    auto s = PartialAssignment(3, 2);
    s.assign(1, 0);
    CHECK_THROWS_AS(expand_children(s, 1), UsageError);
  }
  SUBCASE("random states: children extend the parent and are distinct") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 12);
      const int m = 1 + static_cast<int>(rng() % 5);
      const int assigned = static_cast<int>(rng() % n);
      const auto s = sample_partial_assignment({n, m, 0}, assigned, rng);
      int free_element = 0;
      while (s.is_assigned(free_element)) ++free_element;
      const auto kids = expand_children(s, free_element);
      REQUIRE(static_cast<int>(kids.size()) == m);
      std::set<std::vector<Alternative>> distinct;
      for (const auto& child : kids) {
        CHECK(assigned_count(child) == assigned_count(s) + 1);
        for (int j = 0; j < n; ++j) {
          if (s.is_assigned(j)) CHECK(child.label(j) == s.label(j));
        }
        // Definition 1 on the assigned set: bundles disjoint, union = assigned.
        Mask seen = 0;
        for (Mask b : child.bundles()) {
          CHECK((seen & b) == 0);
          seen |= b;
        }
        CHECK(seen == child.assigned_mask());
        distinct.insert(child.labels());
      }
      CHECK(static_cast<int>(distinct.size()) == m);
    }
  }
}

TEST_CASE("assigned_count") {
  CHECK(assigned_count(PartialAssignment(7, 2)) == 0);
  PartialAssignment full(20, 3);
  for (int j = 0; j < 20; ++j) full.assign(j, j % 3);
  CHECK(assigned_count(full) == 20);
  CHECK(full.is_complete());

  Rng rng(17);
  PartialAssignment s(10, 4);
  for (int k = 1; k <= 10; ++k) {
    int e;
    do e = static_cast<int>(rng() % 10); while (s.is_assigned(e));
    s = expand_children(s, e)[rng() % 4];
    CHECK(assigned_count(s) == k);
  }
}

TEST_CASE("value_of is covariant under swapping alternatives and table columns") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 6), m = 2 + static_cast<int>(rng() % 3);
    const auto v = generate_npd({n, m, rng()}, {0.0, 1.0});
    const int a = static_cast<int>(rng() % m), b = static_cast<int>(rng() % m);
    std::vector<double> swapped(v.values().begin(), v.values().end());
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      std::swap(swapped[mask * m + a], swapped[mask * m + b]);
    }
    const auto w = table_from(n, m, swapped);
    auto s = sample_partial_assignment({n, m, 0}, static_cast<int>(rng() % (n + 1)), rng);
    auto labels = s.labels();
    for (auto& l : labels) {
      if (l == a) l = static_cast<Alternative>(b);
      else if (l == b) l = static_cast<Alternative>(a);
    }
    // Same bundles, so the same multiset of entries; the sum order may differ.
    CHECK(value_of(PartialAssignment::from_labels(m, labels), w) ==
          doctest::Approx(value_of(s, v)).epsilon(1e-12));
  }
}

TEST_CASE("assignment matrix encoding decodes to the same labels") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 10), m = 1 + static_cast<int>(rng() % 6);
    const auto s = sample_partial_assignment({n, m, 0}, static_cast<int>(rng() % (n + 1)), rng);
    const auto x = encode_input(s, 0.0, Normalization{});
    std::vector<Alternative> decoded(n, kUnassigned);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        if (x[static_cast<std::size_t>(i) * n + j] == 1.0) decoded[j] = static_cast<Alternative>(i);
      }
    }
    CHECK(PartialAssignment::from_labels(m, decoded) == s);
  }
}

TEST_CASE("element order must be a permutation") {
  CHECK_NOTHROW(ElementOrder({2, 0, 1}));
  CHECK_THROWS_AS(ElementOrder({0, 0, 1}), UsageError);
  CHECK_THROWS_AS(ElementOrder({0, 3, 1}), UsageError);
}

TEST_CASE("value table file round trip and validation") {
  const auto dir = std::filesystem::temp_directory_path() / "uca_test_core";
  std::filesystem::create_directories(dir);
  const auto v = generate_trap({6, 3, 42}, {});
  v.save(dir / "t.ucav");
  const auto w = ValueTable::load(dir / "t.ucav");
  CHECK(w.n() == 6);
  CHECK(w.m() == 3);
  CHECK(w.seed() == 42);
  CHECK(std::equal(v.values().begin(), v.values().end(), w.values().begin()));
  CHECK(std::filesystem::file_size(dir / "t.ucav") == 4 + 1 + 4 + 4 + 8 + 64 * 3 * 8);

  {
    std::ofstream bad(dir / "bad.ucav", std::ios::binary);
    bad << "UCAX";
  }
  CHECK_THROWS_AS(ValueTable::load(dir / "bad.ucav"), FormatError);
  std::filesystem::resize_file(dir / "t.ucav", 100);
  CHECK_THROWS_AS(ValueTable::load(dir / "t.ucav"), FormatError);
}
