#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>

#include "oracles.hpp"
#include "uca/dataset.hpp"
#include "uca/experiment.hpp"
#include "uca/valuegen.hpp"

using namespace uca;

namespace {

bool same_pairs(const std::vector<LabeledPair>& a, const std::vector<LabeledPair>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!(a[k].assignment == b[k].assignment) || a[k].current_value != b[k].current_value ||
        a[k].target != b[k].target) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("sample_partial_assignment extremes") {
  Rng rng(1);
  const ProblemSpec spec{7, 3, 0};
  CHECK(assigned_count(sample_partial_assignment(spec, 0, rng)) == 0);
  const auto full = sample_partial_assignment(spec, 7, rng);
  CHECK(full.is_complete());
  for (int j = 0; j < 7; ++j) CHECK(full.label(j) < 3);
  CHECK_THROWS_AS(sample_partial_assignment(spec, 8, rng), UsageError);
}

TEST_CASE("sample_partial_assignment is uniform over subsets and labelings") {
  // n=6, m=2, i=3: 20 subsets, 8 labelings per subset.
  Rng rng(2024);
  const int draws = 100'000;
  std::map<Mask, int> subsets;
  std::map<int, int> labelings;  // labelings of the subset {0, 1, 2}
  int fixed_subset_draws = 0;
  for (int k = 0; k < draws; ++k) {
    const auto s = sample_partial_assignment({6, 2, 0}, 3, rng);
    subsets[s.assigned_mask()] += 1;
    if (s.assigned_mask() == 0b000111) {
      ++fixed_subset_draws;
      labelings[s.label(0) * 4 + s.label(1) * 2 + s.label(2)] += 1;
    }
  }
  CHECK(subsets.size() == 20);
  const double p = 1.0 / 20.0;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (const auto& [mask, count] : subsets) {
    CHECK(std::popcount(mask) == 3);
    CHECK(std::abs(count - draws * p) <= 3 * sigma);
  }
  CHECK(labelings.size() == 8);
  const double q = 1.0 / 8.0;
  const double sigma_l = std::sqrt(fixed_subset_draws * q * (1 - q));
  for (const auto& [code, count] : labelings) {
    CHECK(std::abs(count - fixed_subset_draws * q) <= 3 * sigma_l);
  }
}

TEST_CASE("build_dataset") {
  const auto v = generate_npd({10, 3, 5}, {1.0, 0.1});
  SUBCASE("kappa=1: target is the best single placement") {
    DatasetConfig cfg{1, 50, 0.1, 9};
    for (const auto& pair : build_dataset(v, cfg)) {
      CHECK(assigned_count(pair.assignment) == 9);
      int free_element = 0;
      while (pair.assignment.is_assigned(free_element)) ++free_element;
      double best = -1e300;
      for (const auto& child : expand_children(pair.assignment, free_element)) {
        best = std::max(best, value_of(child, v));
      }
      CHECK(pair.target == best);
      CHECK(pair.current_value == value_of(pair.assignment, v));
    }
  }
  SUBCASE("counting contract and level order") {
    const auto pairs = build_dataset(v, DatasetConfig{2, 5, 0.1, 1});
    REQUIRE(pairs.size() == 10);
    for (int k = 0; k < 5; ++k) CHECK(assigned_count(pairs[k].assignment) == 9);
    for (int k = 5; k < 10; ++k) CHECK(assigned_count(pairs[k].assignment) == 8);
  }
  SUBCASE("kappa=4 labels match completion enumeration") {
    const auto pairs = build_dataset(v, DatasetConfig{4, 60, 0.1, 3});
    std::map<int, int> histogram;
    for (const auto& pair : pairs) {
      histogram[10 - assigned_count(pair.assignment)] += 1;
      CHECK(pair.target == oracle::max_completion(oracle::to_fixed(pair.assignment), v));
    }
    CHECK(histogram == std::map<int, int>{{1, 60}, {2, 60}, {3, 60}, {4, 60}});
  }
  SUBCASE("budget error names the level") {
    DatasetConfig cfg{4, 1000, 0.1, 0};
    cfg.level_node_budget = 1000 * search_tree_nodes(3, 3);
    try {
      build_dataset(v, cfg);
      FAIL("expected a budget error");
    } catch (const BudgetError& e) {
      CHECK(std::string(e.what()).find("level 4") != std::string::npos);
    }
  }
  SUBCASE("invalid kappa") {
    CHECK_THROWS_AS(build_dataset(v, DatasetConfig{0, 5, 0.1, 0}), UsageError);
    CHECK_THROWS_AS(build_dataset(v, DatasetConfig{11, 5, 0.1, 0}), UsageError);
  }
}

TEST_CASE("build_dataset does not depend on the thread count") {
  const auto v = generate_trap({9, 3, 8}, {0.1, 0.1, 4.5, 0.1});
  const DatasetConfig cfg{3, 40, 0.1, 77};
  setenv("UCA_THREADS", "1", 1);
  const auto serial = build_dataset(v, cfg);
  setenv("UCA_THREADS", "4", 1);
  const auto threaded = build_dataset(v, cfg);
  setenv("UCA_THREADS", "0", 1);
  CHECK(same_pairs(serial, threaded));
}

TEST_CASE("split_dataset") {
  const auto v = generate_npd({6, 2, 1}, {});
  Rng rng(4);
  SUBCASE("90/10 of ten") {
    auto split = split_dataset(build_dataset(v, DatasetConfig{1, 10, 0.1, 0}), 0.1, rng);
    CHECK(split.train.size() == 9);
    CHECK(split.test.size() == 1);
  }
  SUBCASE("empty input") {
    auto split = split_dataset({}, 0.1, rng);
    CHECK(split.train.empty());
    CHECK(split.test.empty());
  }
  SUBCASE("outputs partition the input") {
    for (int trial = 0; trial < 20; ++trial) {
      const int per_level = static_cast<int>(rng() % 30);
      const auto pairs = build_dataset(v, DatasetConfig{2, per_level, 0.1, rng()});
      const double f = 0.05 + 0.9 * static_cast<double>(rng() % 100) / 100.0;
      auto split = split_dataset(pairs, f, rng);
      CHECK(split.train.size() == static_cast<std::size_t>(std::ceil((1 - f) * pairs.size() - 1e-9)));
      std::multiset<std::tuple<std::vector<Alternative>, double, double>> in, out;
      for (const auto& p : pairs) in.emplace(p.assignment.labels(), p.current_value, p.target);
      for (const auto* part : {&split.train, &split.test}) {
        for (const auto& p : *part) out.emplace(p.assignment.labels(), p.current_value, p.target);
      }
      CHECK(in == out);
    }
  }
}

TEST_CASE("dataset file round trip and determinism") {
  const auto dir = std::filesystem::temp_directory_path() / "uca_test_dataset";
  std::filesystem::create_directories(dir);
  const auto v = generate_npd({8, 3, 2}, {});
  const DatasetConfig cfg{3, 25, 0.1, 12};
  Dataset{8, 3, 3, build_dataset(v, cfg)}.save(dir / "a.ucad");
  Dataset{8, 3, 3, build_dataset(v, cfg)}.save(dir / "b.ucad");
  CHECK(file_hash(dir / "a.ucad") == file_hash(dir / "b.ucad"));
  // Header 4+1+4+4+4+8, then per record 4 + n + 16 bytes.
  CHECK(std::filesystem::file_size(dir / "a.ucad") == 25 + 75 * (4 + 8 + 16));

  const auto loaded = Dataset::load(dir / "a.ucad");
  CHECK(loaded.n == 8);
  CHECK(loaded.m == 3);
  CHECK(loaded.kappa == 3);
  CHECK(same_pairs(loaded.pairs, build_dataset(v, cfg)));

  std::filesystem::resize_file(dir / "a.ucad", 60);
  CHECK_THROWS_AS(Dataset::load(dir / "a.ucad"), FormatError);
}
