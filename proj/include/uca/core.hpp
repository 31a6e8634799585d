#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uca {

// Error categories. The CLI maps UsageError to exit status 2 and everything
// else to 1.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Mask = std::uint32_t;
using Alternative = std::uint8_t;

inline constexpr int kMaxElements = 30;
inline constexpr int kMaxAlternatives = 254;
inline constexpr Alternative kUnassigned = 255;

struct ProblemSpec {
  int n = 0;
  int m = 0;
  std::uint64_t seed = 0;

  // Throws UsageError unless 1 <= n <= 30 and 1 <= m <= 254.
  void validate() const;
};

// A bundle C of elements, bit j set iff element j belongs to C.
struct Bundle {
  Mask mask = 0;

  int size() const;
  bool contains(int element) const { return (mask >> element) & 1U; }
  friend bool operator==(Bundle, Bundle) = default;
};

// Dense value function v : 2^A x T -> R, stored mask-major.
class ValueTable {
 public:
  ValueTable(int n, int m, std::uint64_t seed, std::vector<double> values);

  int n() const { return n_; }
  int m() const { return m_; }
  std::uint64_t seed() const { return seed_; }

  double operator()(Mask bundle, int alternative) const {
    return values_[static_cast<std::size_t>(bundle) * m_ + alternative];
  }
  std::span<const double> values() const { return values_; }

  void save(const std::filesystem::path& path) const;
  static ValueTable load(const std::filesystem::path& path);

 private:
  int n_;
  int m_;
  std::uint64_t seed_;
  std::vector<double> values_;
};

// Element permutation <a'_1, ..., a'_n>.
class ElementOrder {
 public:
  explicit ElementOrder(std::vector<int> perm);
  static ElementOrder identity(int n);

  int size() const { return static_cast<int>(perm_.size()); }
  int operator[](int pos) const { return perm_[pos]; }
  const std::vector<int>& perm() const { return perm_; }

 private:
  std::vector<int> perm_;
};

// Per-element alternative labels with a cached assigned mask. A partial
// assignment whose every element is labeled is a combinatorial assignment.
class PartialAssignment {
 public:
  PartialAssignment() = default;
  PartialAssignment(int n, int m);
  static PartialAssignment from_labels(int m, std::vector<Alternative> labels);

  int n() const { return static_cast<int>(labels_.size()); }
  int m() const { return m_; }
  Alternative label(int element) const { return labels_[element]; }
  const std::vector<Alternative>& labels() const { return labels_; }
  Mask assigned_mask() const { return assigned_; }
  bool is_assigned(int element) const { return (assigned_ >> element) & 1U; }
  bool is_complete() const;

  // Bundle C_{alternative+1}.
  Bundle bundle(int alternative) const;
  std::vector<Mask> bundles() const;

  void assign(int element, int alternative);
  void unassign(int element);

  friend bool operator==(const PartialAssignment&, const PartialAssignment&) = default;

 private:
  int m_ = 0;
  Mask assigned_ = 0;
  std::vector<Alternative> labels_;
};

// V(S) = sum_i v(C_i, t_i); empty bundles contribute v(0, t_i).
double value_of(const PartialAssignment& s, const ValueTable& v);

// Same sum, for precomputed bundle masks (one per alternative, in order).
double value_of_bundles(std::span<const Mask> bundles, const ValueTable& v);

// Delta(S, a): the m children placing `element` into each alternative in turn.
std::vector<PartialAssignment> expand_children(const PartialAssignment& s, int element);

// ||S||
int assigned_count(const PartialAssignment& s);

}  // namespace uca
