#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "uca/core.hpp"
#include "uca/rng.hpp"

namespace uca {

struct DatasetConfig {
  int kappa = 1;                  // deepest unassigned level
  int pairs_per_level = 10'000;
  double split_fraction = 0.10;   // test share
  std::uint64_t seed = 0;
  // Upper bound on search nodes spent labeling one level.
  std::uint64_t level_node_budget = 10'000'000'000ULL;

  void validate(int n) const;
};

struct LabeledPair {
  PartialAssignment assignment;
  double current_value = 0.0;  // V(S)
  double target = 0.0;         // V*(S)
};

// Uniform draw from the partial assignments with exactly `assigned` elements:
// a uniform subset of that size, each member labeled uniformly.
PartialAssignment sample_partial_assignment(const ProblemSpec& spec, int assigned, Rng& rng);

// cfg.pairs_per_level pairs for each unassigned count 1..kappa, ordered by
// level then pair index. Pair p draws from substream p of cfg.seed, so the
// output does not depend on the thread count.
std::vector<LabeledPair> build_dataset(const ValueTable& v, const DatasetConfig& cfg);

struct DatasetSplit {
  std::vector<LabeledPair> train;
  std::vector<LabeledPair> test;
};

// Shuffles, then keeps ceil((1 - f) N) pairs for training and the rest for test.
DatasetSplit split_dataset(std::vector<LabeledPair> pairs, double split_fraction, Rng& rng);

struct Dataset {
  int n = 0;
  int m = 0;
  int kappa = 0;
  std::vector<LabeledPair> pairs;

  void save(const std::filesystem::path& path) const;
  static Dataset load(const std::filesystem::path& path);
};

}  // namespace uca
