#include "trajsal/saliency/distribution.hpp"

#include "trajsal/common/errors.hpp"
#include "trajsal/trajdata/preprocess.hpp"

#include <boost/math/tools/roots.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

namespace trajsal::sal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSimplexTol = 1e-9;
constexpr std::size_t kMaxSimplexIters = 20000;

std::size_t arity(Family f) { return f == Family::dagum_general ? 3 : 2; }

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double log_pdf(Family f, const std::vector<double>& p, double x) {
  const double lx = std::log(x);
  if (f == Family::weibull) {
    const double k = p[0], l = p[1];
    const double z = lx - std::log(l);
    return std::log(k) - std::log(l) + (k - 1.0) * z - std::exp(k * z);
  }
  const double a = p[0], pp = p[1], s = f == Family::dagum_general ? p[2] : 1.0;
  const double z = lx - std::log(s);
  return std::log(a) + std::log(pp) - lx + a * pp * z - (pp + 1.0) * softplus(a * z);
}

double cdf_of(Family f, const std::vector<double>& p, double x) {
  if (x <= 0.0) return 0.0;
  if (f == Family::weibull) return -std::expm1(-std::pow(x / p[1], p[0]));
  const double a = p[0], pp = p[1], s = f == Family::dagum_general ? p[2] : 1.0;
  // (1 + (x/s)^-a)^-p = exp(-p * softplus(-a log(x/s)))
  return std::exp(-pp * softplus(-a * std::log(x / s)));
}

struct Objective {
  Family family;
  std::span<const double> samples;
};

double negative_ll(const gsl_vector* v, void* ctx) {
  const auto* o = static_cast<const Objective*>(ctx);
  std::vector<double> p(v->size);
  for (std::size_t i = 0; i < v->size; ++i) {
    const double lp = gsl_vector_get(v, i);
    if (std::abs(lp) > 50.0) return kInf;
    p[i] = std::exp(lp);
  }
  double ll = 0.0;
  for (double x : o->samples) ll += log_pdf(o->family, p, x);
  return std::isfinite(ll) ? -ll : kInf;
}

struct Minimum {
  std::vector<double> params;
  double ll = -kInf;
  bool converged = false;
};

Minimum simplex(const Objective& obj, const std::vector<double>& start) {
  const std::size_t n = start.size();
  using Vec = std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)>;
  Vec x(gsl_vector_alloc(n), gsl_vector_free), step(gsl_vector_alloc(n), gsl_vector_free);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x.get(), i, std::log(start[i]));
    gsl_vector_set(step.get(), i, 0.5);
  }
  gsl_multimin_function fn{&negative_ll, n, const_cast<Objective*>(&obj)};
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> m(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), gsl_multimin_fminimizer_free);
  Minimum out;
  if (gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), step.get()) != GSL_SUCCESS) return out;
  for (std::size_t it = 0; it < kMaxSimplexIters; ++it) {
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), kSimplexTol) == GSL_SUCCESS) {
      out.converged = true;
      break;
    }
  }
  const double f = gsl_multimin_fminimizer_minimum(m.get());
  if (!std::isfinite(f)) return out;
  for (std::size_t i = 0; i < n; ++i) out.params.push_back(std::exp(gsl_vector_get(m->x, i)));
  out.ll = -f;
  return out;
}

std::vector<std::vector<double>> starts(Family f, std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double cv = std::max(std::sqrt(var / n) / mean, 1e-3);
  const double med = median_of({x.begin(), x.end()});
  if (f == Family::weibull) {
    // Shape from the usual cv^-1.086 approximation.
    const double k = std::clamp(std::pow(cv, -1.086), 0.1, 50.0);
    return {{k, mean}, {0.5 * k, mean}, {2.0 * k, mean}, {k, med}, {1.0, mean}};
  }
  if (f == Family::dagum_standard) return {{2.0, 1.0}, {1.0, 1.0}, {4.0, 0.5}, {3.0, 2.0}, {1.5, 0.3}};
  return {{2.0, 1.0, med}, {1.0, 1.0, mean}, {4.0, 0.5, med}, {3.0, 2.0, med}, {1.5, 0.3, mean}};
}

Minimum best_of(Family f, std::span<const double> x, std::vector<std::vector<double>> from) {
  const Objective obj{f, x};
  Minimum best;
  for (const auto& s : from) {
    Minimum m = simplex(obj, s);
    if (!m.params.empty() && (best.params.empty() || m.ll > best.ll)) best = std::move(m);
  }
  return best;
}

void check_params(Family f, const std::vector<double>& p) {
  if (p.size() != arity(f)) throw DataError("wrong number of parameters for " + to_string(f));
  for (double v : p)
    if (!(v > 0.0) || !std::isfinite(v)) throw DataError("distribution parameters must be positive");
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::weibull:
      return "weibull";
    case Family::dagum_standard:
      return "dagum_standard";
    case Family::dagum_general:
      return "dagum_general";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "weibull") return Family::weibull;
  if (s == "dagum_standard") return Family::dagum_standard;
  if (s == "dagum_general") return Family::dagum_general;
  throw DataError("unknown distribution family '" + s + "'");
}

double DistFit::pdf(double x) const { return x > 0.0 ? std::exp(log_pdf(family, params, x)) : 0.0; }
double DistFit::cdf(double x) const { return cdf_of(family, params, x); }

DistFit make_fit(Family family, std::vector<double> params) {
  check_params(family, params);
  DistFit f;
  f.family = family;
  f.params = std::move(params);
  f.converged = true;
  return f;
}

std::vector<double> Bins::edges() const {
  if (count < 1 || !(hi > lo)) throw DataError("invalid bins");
  std::vector<double> e(static_cast<std::size_t>(count) + 1);
  for (int i = 0; i <= count; ++i) e[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / count;
  return e;
}

double fitting_error(const std::function<double(double)>& cdf, std::span<const double> samples, const Bins& bins) {
  if (samples.empty()) throw DataError("fitting_error: no samples");
  const auto e = bins.edges();
  std::vector<double> h(static_cast<std::size_t>(bins.count), 0.0);
  for (double x : samples) {
    if (x < e.front() || x > e.back()) continue;
    // First bin closed on the left, every bin closed on the right.
    auto it = std::lower_bound(e.begin() + 1, e.end(), x);
    h[static_cast<std::size_t>(it - e.begin() - 1)] += 1.0;
  }
  const double n = static_cast<double>(samples.size());
  double f = 0.0;
  double prev = cdf(e.front());
  for (std::size_t b = 0; b < h.size(); ++b) {
    const double next = cdf(e[b + 1]);
    f += std::abs((next - prev) - h[b] / n);
    prev = next;
  }
  return f;
}

double fitting_error(const DistFit& fit, std::span<const double> samples, const Bins& bins) {
  return fitting_error([&fit](double x) { return fit.cdf(x); }, samples, bins);
}

DistFit fit_distribution(std::span<const double> samples, Family family) {
  if (samples.size() < kMinFitSamples)
    throw DataError("fit needs at least " + std::to_string(kMinFitSamples) + " samples");
  for (double x : samples)
    if (!(x > 0.0) || !std::isfinite(x)) throw DataError("fit samples must be positive and finite");
  gsl_set_error_handler_off();

  auto from = starts(family, samples);
  if (family == Family::dagum_general) {
    // The standard form is the s = 1 slice; starting from its optimum keeps
    // the general likelihood at least as high.
    const Minimum std_best = best_of(Family::dagum_standard, samples, starts(Family::dagum_standard, samples));
    if (!std_best.params.empty()) from.back() = {std_best.params[0], std_best.params[1], 1.0};
  }
  const Minimum best = best_of(family, samples, from);
  if (best.params.empty()) throw NumericError("maximum-likelihood search failed for " + to_string(family));

  DistFit fit;
  fit.family = family;
  fit.params = best.params;
  fit.log_likelihood = best.ll;
  fit.converged = best.converged;
  fit.fitting_error = fitting_error(fit, samples);
  return fit;
}

double lambda_from_pvalue(const DistFit& fit, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DataError("p-value must lie in (0,1)");
  check_params(fit.family, fit.params);
  const double target = 1.0 - p;
  auto g = [&](double x) { return fit.cdf(x) - target; };
  double hi = 1.0;
  for (int i = 0; g(hi) < 0.0; ++i) {
    if (i > 200) throw NumericError("lambda_from_pvalue: quantile out of reach");
    hi *= 2.0;
  }
  std::uintmax_t iters = 200;
  const auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-8; };
  const auto r = boost::math::tools::bisect(g, 0.0, hi, tol, iters);
  if (iters >= 200) throw NumericError("lambda_from_pvalue: bisection did not converge");
  return 0.5 * (r.first + r.second);
}

std::string to_json(const DistFit& fit) {
  nlohmann::ordered_json j;
  j["family"] = to_string(fit.family);
  j["params"] = fit.params;
  j["log_likelihood"] = fit.log_likelihood;
  j["fitting_error"] = fit.fitting_error;
  j["converged"] = fit.converged;
  return j.dump(2);
}

DistFit fit_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    DistFit f = make_fit(family_from_string(j.at("family").get<std::string>()), j.at("params").get<std::vector<double>>());
    f.log_likelihood = j.value("log_likelihood", 0.0);
    f.fitting_error = j.value("fitting_error", 0.0);
    f.converged = j.value("converged", true);
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("fit file: ") + e.what());
  }
}

void save_fit(const std::filesystem::path& path, const DistFit& fit) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(fit) << '\n';
}

DistFit load_fit(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open fit file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return fit_from_json(ss.str());
}

}  // namespace trajsal::sal
