#include "uca/exact.hpp"

#include <limits>
#include <vector>

namespace uca {

namespace {

// Depth-first enumeration of the completions of a partial assignment. Bundle
// masks are updated in place; the leaf value is summed in alternative order,
// which is the same arithmetic as value_of.
class CompletionSearch {
 public:
  CompletionSearch(const ValueTable& v, std::vector<int> pending, std::vector<Mask> bundles)
      : v_(v), pending_(std::move(pending)), bundles_(std::move(bundles)),
        labels_(pending_.size(), 0), best_labels_(pending_.size(), 0) {}

  double run() {
    best_ = -std::numeric_limits<double>::infinity();
    descend(0);
    return best_;
  }

  // Alternative chosen for pending_[k] in the first optimal completion.
  const std::vector<int>& best_labels() const { return best_labels_; }

 private:
  void descend(std::size_t depth) {
    if (depth == pending_.size()) {
      const double value = value_of_bundles(bundles_, v_);
      if (value > best_) {
        best_ = value;
        best_labels_ = labels_;
      }
      return;
    }
    const Mask bit = Mask{1} << pending_[depth];
    for (int i = 0; i < v_.m(); ++i) {
      bundles_[i] |= bit;
      labels_[depth] = i;
      descend(depth + 1);
      bundles_[i] &= ~bit;
    }
  }

  const ValueTable& v_;
  std::vector<int> pending_;
  std::vector<Mask> bundles_;
  std::vector<int> labels_;
  std::vector<int> best_labels_;
  double best_ = 0.0;
};

void check_dims(const PartialAssignment& s, const ValueTable& v) {
  if (s.n() != v.n() || s.m() != v.m()) {
    throw UsageError("assignment dimensions do not match value table");
  }
}

void check_budget(int m, int depth, std::uint64_t node_budget) {
  const auto nodes = search_tree_nodes(m, depth);
  if (nodes > node_budget) {
    throw BudgetError("exact search needs " + std::to_string(nodes) +
                      " nodes (depth " + std::to_string(depth) + ", branching " +
                      std::to_string(m) + "), budget is " + std::to_string(node_budget));
  }
}

double search_pending(const PartialAssignment& s, const ValueTable& v,
                      std::vector<int> pending, std::uint64_t node_budget) {
  check_budget(v.m(), static_cast<int>(pending.size()), node_budget);
  CompletionSearch search(v, std::move(pending), s.bundles());
  return search.run();
}

}  // namespace

std::uint64_t search_tree_nodes(int m, int depth) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 1;
  std::uint64_t level = 1;
  for (int d = 1; d <= depth; ++d) {
    if (level > kMax / static_cast<std::uint64_t>(m)) return kMax;
    level *= static_cast<std::uint64_t>(m);
    if (total > kMax - level) return kMax;
    total += level;
  }
  return total;
}

double exact_value_to_go(const PartialAssignment& s, const ValueTable& v,
                         const ElementOrder& order, std::uint64_t node_budget) {
  check_dims(s, v);
  if (order.size() != s.n()) throw UsageError("element order has wrong length");
  const int assigned = assigned_count(s);
  for (int pos = 0; pos < assigned; ++pos) {
    if (!s.is_assigned(order[pos])) {
      throw UsageError("assigned elements are not a prefix of the element order");
    }
  }
  std::vector<int> pending(order.perm().begin() + assigned, order.perm().end());
  return search_pending(s, v, std::move(pending), node_budget);
}

double exact_value_to_go(const PartialAssignment& s, const ValueTable& v,
                         std::uint64_t node_budget) {
  check_dims(s, v);
  std::vector<int> pending;
  for (int j = 0; j < s.n(); ++j) {
    if (!s.is_assigned(j)) pending.push_back(j);
  }
  return search_pending(s, v, std::move(pending), node_budget);
}

ExactSolution solve_exact(const ValueTable& v, std::uint64_t node_budget) {
  check_budget(v.m(), v.n(), node_budget);
  std::vector<int> pending(v.n());
  for (int j = 0; j < v.n(); ++j) pending[j] = j;
  CompletionSearch search(v, pending, std::vector<Mask>(v.m(), 0));
  ExactSolution out{PartialAssignment(v.n(), v.m()), search.run()};
  for (int j = 0; j < v.n(); ++j) out.assignment.assign(j, search.best_labels()[j]);
  return out;
}

int argmax_over_children(const PartialAssignment& s, int element, const ValueTable& v,
                         const ChildScore& estimator) {
  check_dims(s, v);
  if (s.is_assigned(element)) {
    throw UsageError("argmax_over_children: element already assigned");
  }
  PartialAssignment child = s;
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.m(); ++i) {
    child.assign(element, i);
    const double score = estimator(child);
    if (i == 0 || score > best_score) {
      best = i;
      best_score = score;
    }
    child.unassign(element);
  }
  return best;
}

}  // namespace uca
