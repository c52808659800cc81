#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "fusionlm/params.hpp"

namespace fusionlm {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
};

// Central finite differences against a supplied analytic gradient.
// Relative error per coordinate is |a - n| / max(|a|, |n|, 1e-8).
//
// max_coords_per_tensor == 0 checks every coordinate; otherwise a seeded
// random subset per tensor (with the full tensor checked when it is small
// enough). epsilon must lie in [1e-7, 1e-3]. Throws NumericError if f
// returns a non-finite value.
GradCheckResult grad_check(const std::function<double(const ParamSet&)>& f, ParamSet& params,
                           const GradStore& analytic, double epsilon,
                           std::size_t max_coords_per_tensor = 0, std::uint64_t seed = 0);

}  // namespace fusionlm
