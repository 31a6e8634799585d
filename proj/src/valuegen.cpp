#include "uca/valuegen.hpp"

#include <bit>
#include <cmath>

#include "uca/rng.hpp"

namespace uca {

namespace {

void check_sigma(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw UsageError("sigma must be a finite non-negative number");
  }
}

// Draws mean(mask) + sigma * z for every entry. With sigma == 0 no draws are
// consumed and entries equal the mean exactly.
template <typename MeanFn>
ValueTable fill_table(const ProblemSpec& spec, double sigma, MeanFn mean_of) {
  spec.validate();
  check_sigma(sigma);
  const std::size_t masks = std::size_t{1} << spec.n;
  std::vector<double> values(masks * spec.m);
  Rng rng = make_rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::size_t k = 0;
  for (std::size_t mask = 0; mask < masks; ++mask) {
    const double mean = mean_of(static_cast<Mask>(mask));
    for (int t = 0; t < spec.m; ++t) {
      values[k++] = sigma == 0.0 ? mean : mean + sigma * normal(rng);
    }
  }
  return ValueTable(spec.n, spec.m, spec.seed, std::move(values));
}

}  // namespace

double trap_mean(int bundle_size, const TrapParams& p) {
  const double s = bundle_size;
  double base = s - s * s;
  if (p.tau_threshold <= s) {
    base += bundle_size == 0 ? 0.0 : std::exp((2.0 + p.epsilon) * std::log(s));
  }
  return p.delta * base;
}

ValueTable generate_npd(const ProblemSpec& spec, const NpdParams& p) {
  return fill_table(spec, p.sigma, [&](Mask) { return p.mu; });
}

ValueTable generate_trap(const ProblemSpec& spec, const TrapParams& p) {
  std::vector<double> by_size(spec.n + 1);
  for (int s = 0; s <= spec.n; ++s) by_size[s] = trap_mean(s, p);
  return fill_table(spec, p.sigma, [&](Mask mask) { return by_size[std::popcount(mask)]; });
}

}  // namespace uca
