#pragma once

#include "uca/core.hpp"

namespace uca {

struct NpdParams {
  double mu = 1.0;
  double sigma = 0.1;
};

struct TrapParams {
  double sigma = 0.1;
  double delta = 0.1;
  double tau_threshold = 10.0;
  double epsilon = 0.1;
};

// Mean of a TRAP entry for a bundle of `bundle_size` elements:
//   delta * (s - s^2)                 if s <  tau
//   delta * (s - s^2 + s^(2+eps))     if s >= tau
double trap_mean(int bundle_size, const TrapParams& p);

// Every (mask, alternative) entry drawn i.i.d. from N(mu, sigma^2), in
// mask-major, alternative-minor order from one stream seeded by spec.seed.
ValueTable generate_npd(const ProblemSpec& spec, const NpdParams& p);

// Entry (mask, t) drawn from N(trap_mean(|mask|), sigma^2); same draw order.
ValueTable generate_trap(const ProblemSpec& spec, const TrapParams& p);

}  // namespace uca
