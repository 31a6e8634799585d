#include "uca/core.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>

#include "binary_io.hpp"

namespace uca {

namespace {
constexpr std::string_view kTableMagic = "UCAV";
constexpr std::uint8_t kTableVersion = 1;
}  // namespace

void ProblemSpec::validate() const {
  if (n < 1 || n > kMaxElements) {
    throw UsageError("n must be in [1, 30], got " + std::to_string(n));
  }
  if (m < 1 || m > kMaxAlternatives) {
    throw UsageError("m must be in [1, 254], got " + std::to_string(m));
  }
}

int Bundle::size() const { return std::popcount(mask); }

ValueTable::ValueTable(int n, int m, std::uint64_t seed, std::vector<double> values)
    : n_(n), m_(m), seed_(seed), values_(std::move(values)) {
  ProblemSpec{n, m, seed}.validate();
  const std::size_t expected = (std::size_t{1} << n) * static_cast<std::size_t>(m);
  if (values_.size() != expected) {
    throw UsageError("value table needs 2^n * m = " + std::to_string(expected) +
                     " entries, got " + std::to_string(values_.size()));
  }
  for (double x : values_) {
    if (!std::isfinite(x)) throw UsageError("value table entries must be finite");
  }
}

void ValueTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  io::put_magic(out, kTableMagic, kTableVersion);
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(n_));
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(m_));
  io::put<std::uint64_t>(out, seed_);
  out.write(reinterpret_cast<const char*>(values_.data()),
            static_cast<std::streamsize>(values_.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ValueTable ValueTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  io::expect_magic(in, kTableMagic, kTableVersion);
  const auto n = io::get<std::uint32_t>(in, "n");
  const auto m = io::get<std::uint32_t>(in, "m");
  const auto seed = io::get<std::uint64_t>(in, "seed");
  if (n < 1 || n > kMaxElements || m < 1 || m > kMaxAlternatives) {
    throw FormatError("table dimensions out of range");
  }
  std::vector<double> values((std::size_t{1} << n) * m);
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(double)))) {
    throw FormatError("table file too short for 2^n * m values");
  }
  io::expect_eof(in, "table file");
  return ValueTable(static_cast<int>(n), static_cast<int>(m), seed, std::move(values));
}

ElementOrder::ElementOrder(std::vector<int> perm) : perm_(std::move(perm)) {
  std::vector<bool> seen(perm_.size(), false);
  for (int e : perm_) {
    if (e < 0 || e >= static_cast<int>(perm_.size()) || seen[e]) {
      throw UsageError("element order is not a permutation");
    }
    seen[e] = true;
  }
}

ElementOrder ElementOrder::identity(int n) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  return ElementOrder(std::move(perm));
}

PartialAssignment::PartialAssignment(int n, int m) : m_(m), labels_(n, kUnassigned) {
  ProblemSpec{n, m, 0}.validate();
}

PartialAssignment PartialAssignment::from_labels(int m, std::vector<Alternative> labels) {
  PartialAssignment s(static_cast<int>(labels.size()), m);
  for (int j = 0; j < s.n(); ++j) {
    if (labels[j] == kUnassigned) continue;
    s.assign(j, labels[j]);
  }
  return s;
}

bool PartialAssignment::is_complete() const {
  return assigned_ == (Mask{1} << n()) - 1;
}

Bundle PartialAssignment::bundle(int alternative) const {
  Mask mask = 0;
  for (int j = 0; j < n(); ++j) {
    if (labels_[j] == alternative) mask |= Mask{1} << j;
  }
  return Bundle{mask};
}

std::vector<Mask> PartialAssignment::bundles() const {
  std::vector<Mask> out(m_, 0);
  for (int j = 0; j < n(); ++j) {
    if (labels_[j] != kUnassigned) out[labels_[j]] |= Mask{1} << j;
  }
  return out;
}

void PartialAssignment::assign(int element, int alternative) {
  if (element < 0 || element >= n()) throw UsageError("element index out of range");
  if (alternative < 0 || alternative >= m_) throw UsageError("alternative index out of range");
  if (is_assigned(element)) {
    throw UsageError("element " + std::to_string(element) + " is already assigned");
  }
  labels_[element] = static_cast<Alternative>(alternative);
  assigned_ |= Mask{1} << element;
}

void PartialAssignment::unassign(int element) {
  if (element < 0 || element >= n()) throw UsageError("element index out of range");
  labels_[element] = kUnassigned;
  assigned_ &= ~(Mask{1} << element);
}

double value_of_bundles(std::span<const Mask> bundles, const ValueTable& v) {
  double total = 0.0;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    total += v(bundles[i], static_cast<int>(i));
  }
  return total;
}

double value_of(const PartialAssignment& s, const ValueTable& v) {
  if (s.n() != v.n() || s.m() != v.m()) {
    throw UsageError("assignment dimensions (" + std::to_string(s.n()) + "x" +
                     std::to_string(s.m()) + ") do not match value table (" +
                     std::to_string(v.n()) + "x" + std::to_string(v.m()) + ")");
  }
  const auto bundles = s.bundles();
  return value_of_bundles(bundles, v);
}

std::vector<PartialAssignment> expand_children(const PartialAssignment& s, int element) {
  if (element < 0 || element >= s.n()) throw UsageError("element index out of range");
  if (s.is_assigned(element)) {
    throw UsageError("cannot expand on element " + std::to_string(element) +
                     ": already assigned");
  }
  std::vector<PartialAssignment> children;
  children.reserve(s.m());
  for (int i = 0; i < s.m(); ++i) {
    children.push_back(s);
    children.back().assign(element, i);
  }
  return children;
}

int assigned_count(const PartialAssignment& s) { return std::popcount(s.assigned_mask()); }

}  // namespace uca
