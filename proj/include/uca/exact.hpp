#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "uca/core.hpp"

namespace uca {

inline constexpr std::uint64_t kDefaultNodeBudget = 100'000'000;

// Number of search-tree nodes (root included) of a full m-ary tree of the
// given depth, saturating at UINT64_MAX.
std::uint64_t search_tree_nodes(int m, int depth);

// V*(S) by depth-first search over the unassigned elements in `order`. The
// assigned elements of S must be exactly order[0 .. ||S||-1]. Throws
// BudgetError, before searching, when the tree exceeds `node_budget`.
double exact_value_to_go(const PartialAssignment& s, const ValueTable& v,
                         const ElementOrder& order,
                         std::uint64_t node_budget = kDefaultNodeBudget);

// V*(S) for an arbitrary assigned set: the maximum over all completions,
// expanding unassigned elements in ascending index order.
double exact_value_to_go(const PartialAssignment& s, const ValueTable& v,
                         std::uint64_t node_budget = kDefaultNodeBudget);

struct ExactSolution {
  PartialAssignment assignment;
  double value = 0.0;
};

// An optimal combinatorial assignment and its value. Among equal-valued
// optima the first in lexicographic label order is returned.
ExactSolution solve_exact(const ValueTable& v,
                          std::uint64_t node_budget = kDefaultNodeBudget);

using ChildScore = std::function<double(const PartialAssignment& child)>;

// Index of the child of Delta(S, element) with the highest score; ties go to
// the lowest alternative index.
int argmax_over_children(const PartialAssignment& s, int element, const ValueTable& v,
                         const ChildScore& estimator);

}  // namespace uca
