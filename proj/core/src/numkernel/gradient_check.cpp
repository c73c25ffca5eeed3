#include "trajsal/numkernel/gradient_check.hpp"

#include "trajsal/common/errors.hpp"
#include "trajsal/numkernel/params.hpp"

#include <algorithm>
#include <cmath>

namespace trajsal::nk {

namespace {

void track(GradCheckResult& r, std::size_t i, double a, double n, double abs_floor) {
  const double denom = std::max({std::abs(a), std::abs(n), abs_floor});
  const double rel = std::abs(a - n) / denom;
  if (++r.checked == 1 || rel > r.max_rel_err) {
    r.max_rel_err = rel;
    r.worst_index = i;
    r.analytic = a;
    r.numeric = n;
  }
}

}  // namespace

GradCheckResult gradient_check(const LossFn& loss, std::span<double> params, double eps,
                               std::span<const std::size_t> coords, double abs_floor) {
  if (!(eps > 0.0)) throw DataError("gradient_check: eps must be positive");
  ParamBuffer analytic(params.size(), 0.0);
  loss(params, analytic);

  std::vector<std::size_t> all;
  if (coords.empty()) {
    all.resize(params.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    coords = all;
  }

  GradCheckResult result;
  for (std::size_t i : coords) {
    if (i >= params.size()) throw ShapeError("gradient_check: coordinate out of range");
    const double saved = params[i];
    params[i] = saved + eps;
    const double up = loss(params, {});
    params[i] = saved - eps;
    const double down = loss(params, {});
    params[i] = saved;

    track(result, i, analytic[i], (up - down) / (2.0 * eps), abs_floor);
  }
  return result;
}

GradCheckResult directional_check(const LossFn& loss, std::span<double> params, double eps,
                                  std::span<const std::vector<double>> directions, double abs_floor) {
  if (!(eps > 0.0)) throw DataError("directional_check: eps must be positive");
  ParamBuffer analytic(params.size(), 0.0);
  loss(params, analytic);
  const ParamBuffer saved(params.begin(), params.end());

  GradCheckResult result;
  for (std::size_t d = 0; d < directions.size(); ++d) {
    const auto& v = directions[d];
    if (v.size() != params.size()) throw ShapeError("directional_check: direction size");
    double a = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) a += analytic[k] * v[k];
    for (std::size_t k = 0; k < v.size(); ++k) params[k] = saved[k] + eps * v[k];
    const double up = loss(params, {});
    for (std::size_t k = 0; k < v.size(); ++k) params[k] = saved[k] - eps * v[k];
    const double down = loss(params, {});
    std::copy(saved.begin(), saved.end(), params.begin());
    track(result, d, a, (up - down) / (2.0 * eps), abs_floor);
  }
  return result;
}

}  // namespace trajsal::nk
