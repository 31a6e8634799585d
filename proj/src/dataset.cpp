#include "uca/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "binary_io.hpp"
#include "uca/exact.hpp"
#include "uca/parallel.hpp"

namespace uca {

namespace {
constexpr std::string_view kDatasetMagic = "UCAD";
constexpr std::uint8_t kDatasetVersion = 1;
}  // namespace

void DatasetConfig::validate(int n) const {
  if (kappa < 1 || kappa > n) {
    throw UsageError("kappa must be in [1, n], got " + std::to_string(kappa));
  }
  if (pairs_per_level < 0) throw UsageError("pairs per level must be non-negative");
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw UsageError("split fraction must be in (0, 1)");
  }
}

PartialAssignment sample_partial_assignment(const ProblemSpec& spec, int assigned, Rng& rng) {
  spec.validate();
  if (assigned < 0 || assigned > spec.n) {
    throw UsageError("assigned count must be in [0, n]");
  }
  std::vector<int> elements(spec.n);
  std::iota(elements.begin(), elements.end(), 0);
  // Partial Fisher-Yates: the first `assigned` slots are a uniform subset.
  for (int k = 0; k < assigned; ++k) {
    std::uniform_int_distribution<int> pick(k, spec.n - 1);
    std::swap(elements[k], elements[pick(rng)]);
  }
  std::uniform_int_distribution<int> label(0, spec.m - 1);
  PartialAssignment s(spec.n, spec.m);
  for (int k = 0; k < assigned; ++k) s.assign(elements[k], label(rng));
  return s;
}

std::vector<LabeledPair> build_dataset(const ValueTable& v, const DatasetConfig& cfg) {
  cfg.validate(v.n());
  const ProblemSpec spec{v.n(), v.m(), cfg.seed};
  const auto per_level = static_cast<std::size_t>(cfg.pairs_per_level);

  for (int level = 1; level <= cfg.kappa; ++level) {
    const auto nodes = search_tree_nodes(v.m(), level);
    const bool over = nodes > cfg.level_node_budget ||
                      (per_level > 0 && nodes > cfg.level_node_budget / per_level);
    if (over) {
      throw BudgetError("labeling level " + std::to_string(level) + " (assigned count " +
                        std::to_string(v.n() - level) + ") needs " +
                        std::to_string(per_level) + " x " + std::to_string(nodes) +
                        " search nodes, over the budget of " +
                        std::to_string(cfg.level_node_budget));
    }
  }

  std::vector<LabeledPair> pairs(per_level * cfg.kappa);
  parallel_for(pairs.size(), [&](std::size_t index) {
    const int level = 1 + static_cast<int>(index / per_level);
    Rng rng = make_substream(cfg.seed, index);
    auto s = sample_partial_assignment(spec, v.n() - level, rng);
    const double current = value_of(s, v);
    const double target = exact_value_to_go(s, v, std::numeric_limits<std::uint64_t>::max());
    pairs[index] = LabeledPair{std::move(s), current, target};
  });
  return pairs;
}

DatasetSplit split_dataset(std::vector<LabeledPair> pairs, double split_fraction, Rng& rng) {
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw UsageError("split fraction must be in (0, 1)");
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);
  const double exact = (1.0 - split_fraction) * static_cast<double>(pairs.size());
  auto train_size = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  train_size = std::min(train_size, pairs.size());

  DatasetSplit out;
  out.test.assign(std::make_move_iterator(pairs.begin() + train_size),
                  std::make_move_iterator(pairs.end()));
  pairs.resize(train_size);
  out.train = std::move(pairs);
  return out;
}

void Dataset::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  io::put_magic(out, kDatasetMagic, kDatasetVersion);
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(n));
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(m));
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(kappa));
  io::put<std::uint64_t>(out, pairs.size());
  for (const auto& pair : pairs) {
    if (pair.assignment.n() != n || pair.assignment.m() != m) {
      throw UsageError("dataset record dimensions do not match the dataset header");
    }
    io::put<std::uint32_t>(out, pair.assignment.assigned_mask());
    out.write(reinterpret_cast<const char*>(pair.assignment.labels().data()), n);
    io::put<double>(out, pair.current_value);
    io::put<double>(out, pair.target);
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Dataset Dataset::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  io::expect_magic(in, kDatasetMagic, kDatasetVersion);
  Dataset d;
  d.n = static_cast<int>(io::get<std::uint32_t>(in, "n"));
  d.m = static_cast<int>(io::get<std::uint32_t>(in, "m"));
  d.kappa = static_cast<int>(io::get<std::uint32_t>(in, "kappa"));
  if (d.n < 1 || d.n > kMaxElements || d.m < 1 || d.m > kMaxAlternatives) {
    throw FormatError("dataset dimensions out of range");
  }
  const auto count = io::get<std::uint64_t>(in, "count");
  d.pairs.reserve(std::min<std::uint64_t>(count, 1 << 20));
  std::vector<Alternative> labels(d.n);
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto mask = io::get<std::uint32_t>(in, "assigned mask");
    if (!in.read(reinterpret_cast<char*>(labels.data()), d.n)) {
      throw FormatError("truncated dataset record");
    }
    for (auto label : labels) {
      if (label != kUnassigned && label >= d.m) throw FormatError("label out of range");
    }
    auto s = PartialAssignment::from_labels(d.m, labels);
    if (s.assigned_mask() != mask) {
      throw FormatError("record " + std::to_string(r) + ": assigned mask disagrees with labels");
    }
    const double current = io::get<double>(in, "current value");
    const double target = io::get<double>(in, "target");
    d.pairs.push_back(LabeledPair{std::move(s), current, target});
  }
  io::expect_eof(in, "dataset file");
  return d;
}

}  // namespace uca
