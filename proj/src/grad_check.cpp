#include "fusionlm/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "fusionlm/errors.hpp"
#include "fusionlm/rng.hpp"

namespace fusionlm {
namespace {

double eval_finite(const std::function<double(const ParamSet&)>& f, const ParamSet& p) {
  const double v = f(p);
  if (!std::isfinite(v)) throw NumericError("grad_check: function returned a non-finite value");
  return v;
}

}  // namespace

GradCheckResult grad_check(const std::function<double(const ParamSet&)>& f, ParamSet& params,
                           const GradStore& analytic, double epsilon,
                           std::size_t max_coords_per_tensor, std::uint64_t seed) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
    throw UsageError("grad_check epsilon must lie in [1e-7, 1e-3]");
  }
  GradCheckResult result;
  Rng rng(seed ^ 0x67ad5c1f3b2e9d04ULL);
  for (auto& item : params.items()) {
    const Tensor& g = analytic.at(item.name);
    Tensor& value = item.value;
    std::vector<std::size_t> coords;
    if (max_coords_per_tensor == 0 || value.size() <= max_coords_per_tensor) {
      coords.resize(value.size());
      for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    } else {
      coords.reserve(max_coords_per_tensor);
      for (std::size_t i = 0; i < max_coords_per_tensor; ++i) {
        coords.push_back(static_cast<std::size_t>(rng.uniform_int(value.size())));
      }
      std::sort(coords.begin(), coords.end());
      coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    }
    for (std::size_t c : coords) {
      const double saved = value[c];
      value[c] = saved + epsilon;
      const double fp = eval_finite(f, params);
      value[c] = saved - epsilon;
      const double fm = eval_finite(f, params);
      value[c] = saved;
      const double numeric = (fp - fm) / (2.0 * epsilon);
      const double analytic_g = g[c];
      const double rel = std::abs(analytic_g - numeric) /
                         std::max({std::abs(analytic_g), std::abs(numeric), 1e-8});
      ++result.coords_checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_tensor = item.name;
        result.worst_index = c;
        result.worst_analytic = analytic_g;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace fusionlm
