#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace trajsal::sal {

/// weibull: (shape k, scale l). dagum_standard: (a, p), scale fixed to 1.
/// dagum_general: (a, p, s). Dagum type I:
///   f(x) = (a p / x) (x/s)^(a p) / ((x/s)^a + 1)^(p + 1),
///   F(x) = (1 + (x/s)^-a)^-p.
enum class Family { weibull, dagum_standard, dagum_general };

std::string to_string(Family f);
Family family_from_string(const std::string& s);  // throws DataError

struct DistFit {
  Family family = Family::weibull;
  std::vector<double> params;
  double log_likelihood = 0.0;
  double fitting_error = 0.0;
  bool converged = false;

  double pdf(double x) const;
  double cdf(double x) const;
};

/// Builds a fit from explicit parameters (all > 0); log-likelihood and error left at 0.
DistFit make_fit(Family family, std::vector<double> params);

/// Histogram bins for the fitting criterion: `count` equal-width bins on
/// [lo, hi]. The first bin is closed, the others are (left, right].
struct Bins {
  double lo = 0.0;
  double hi = 5.0;
  int count = 101;

  std::vector<double> edges() const;
};

inline constexpr std::size_t kMinFitSamples = 50;
inline constexpr int kFitStarts = 5;

/// Maximum-likelihood fit by Nelder-Mead simplex on log-parameters from
/// kFitStarts fixed starting points. Samples must be positive and at least
/// kMinFitSamples. `converged` is false when no start met the simplex size
/// tolerance. fitting_error is filled with the default bins.
DistFit fit_distribution(std::span<const double> samples, Family family);

/// F = sum over bins of |G(b) - H(b)|: G the model mass in the bin, H the
/// fraction of all samples falling in it. Lies in [0, 2].
double fitting_error(const std::function<double(double)>& cdf, std::span<const double> samples,
                     const Bins& bins = {});
double fitting_error(const DistFit& fit, std::span<const double> samples, const Bins& bins = {});

/// Threshold with CDF(lambda) = 1 - p, by bisection to 1e-8. p in (0, 1).
double lambda_from_pvalue(const DistFit& fit, double p);

std::string to_json(const DistFit& fit);
DistFit fit_from_json(const std::string& text);
void save_fit(const std::filesystem::path& path, const DistFit& fit);
DistFit load_fit(const std::filesystem::path& path);

}  // namespace trajsal::sal
