#include "qpcs/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/beta.hpp>

#include "qpcs/errors.hpp"
#include "qpcs/text.hpp"

namespace qpcs {

namespace {

// log E|g|^p for a standard normal g: 2^{p/2} Gamma((p+1)/2) / sqrt(pi).
double log_gaussian_abs_moment(double p) {
  return 0.5 * p * std::numbers::ln2 + std::lgamma(0.5 * (p + 1.0)) -
         0.5 * std::log(std::numbers::pi);
}

// log E|t_d|^p = log[ d^{p/2} Gamma((p+1)/2) Gamma((d-p)/2) / (sqrt(pi) Gamma(d/2)) ].
double log_student_abs_moment(int d, double p) {
  const double dd = d;
  return 0.5 * p * std::log(dd) + std::lgamma(0.5 * (p + 1.0)) + std::lgamma(0.5 * (dd - p)) -
         0.5 * std::log(std::numbers::pi) - std::lgamma(0.5 * dd);
}

double log_raw_abs_moment(const DistributionSpec& dist, double p) {
  switch (dist.family()) {
    case Family::Gaussian:
      return log_gaussian_abs_moment(p);
    case Family::Rademacher:
      return 0.0;
    case Family::StudentT:
      if (p >= dist.degrees_of_freedom()) {
        throw MomentDiverges("student_t(" + std::to_string(dist.degrees_of_freedom()) +
                             ") has no finite moment of order " + format_double(p));
      }
      return log_student_abs_moment(dist.degrees_of_freedom(), p);
    case Family::SymmetricWeibull:
      return std::lgamma(1.0 + p / dist.weibull_shape());
    case Family::ExpType:
      return log_gaussian_abs_moment(2.0 * dist.gamma() * p);
  }
  return 0.0;
}

}  // namespace

DistributionSpec DistributionSpec::gaussian() { return {Family::Gaussian, 0, 0.0, 0.0}; }

DistributionSpec DistributionSpec::rademacher() { return {Family::Rademacher, 0, 0.0, 0.0}; }

DistributionSpec DistributionSpec::student_t(int d) {
  if (d < 3) throw ParamError("student_t needs d >= 3 for finite variance, got " + std::to_string(d));
  return {Family::StudentT, d, 0.0, 0.0};
}

DistributionSpec DistributionSpec::weibull(double r) {
  if (!(r >= 1.0 && r <= 2.0)) {
    throw ParamError("weibull exponent must lie in [1,2], got " + format_double(r));
  }
  return {Family::SymmetricWeibull, 0, r, 0.0};
}

DistributionSpec DistributionSpec::exp_type(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ParamError("exp-type gamma must be positive, got " + format_double(gamma));
  }
  return {Family::ExpType, 0, 0.0, gamma};
}

DistributionSpec DistributionSpec::parse(std::string_view text) {
  const CallSyntax call = parse_call(text);
  auto want_args = [&](std::size_t n) {
    if (call.args.size() != n) {
      throw ConfigError("distribution '" + std::string(text) + "' expects " + std::to_string(n) +
                        " argument(s)");
    }
  };
  if (call.name == "gaussian") {
    want_args(0);
    return gaussian();
  }
  if (call.name == "rademacher") {
    want_args(0);
    return rademacher();
  }
  if (call.name == "student_t") {
    want_args(1);
    return student_t(static_cast<int>(parse_int(call.args[0])));
  }
  if (call.name == "weibull") {
    want_args(1);
    return weibull(parse_double(call.args[0]));
  }
  if (call.name == "psi") {
    want_args(1);
    const double alpha = parse_double(call.args[0]);
    if (!(alpha > 0.0)) throw ParamError("psi(alpha) needs alpha > 0");
    return psi(alpha);
  }
  throw ConfigError("unknown distribution '" + std::string(text) + "'");
}

DistributionSpec DistributionSpec::normalized() const {
  DistributionSpec out = *this;
  out.scale_ = 1.0 / std::sqrt(raw_variance());
  out.normalized_ = true;
  return out;
}

DistributionSpec DistributionSpec::with_scale(double scale) const {
  if (!(scale > 0.0)) throw ParamError("scale must be positive");
  DistributionSpec out = *this;
  out.scale_ = scale;
  out.normalized_ = false;
  return out;
}

std::string DistributionSpec::name() const {
  switch (family_) {
    case Family::Gaussian:
      return "gaussian";
    case Family::Rademacher:
      return "rademacher";
    case Family::StudentT:
      return "student_t(" + std::to_string(dof_) + ")";
    case Family::SymmetricWeibull:
      return "weibull(" + format_double(shape_) + ")";
    case Family::ExpType:
      return "psi(" + format_double(1.0 / gamma_) + ")";
  }
  return "unknown";
}

double DistributionSpec::raw_variance() const {
  switch (family_) {
    case Family::Gaussian:
    case Family::Rademacher:
      return 1.0;
    case Family::StudentT:
      return static_cast<double>(dof_) / static_cast<double>(dof_ - 2);
    case Family::SymmetricWeibull:
      return std::tgamma(1.0 + 2.0 / shape_);
    case Family::ExpType:
      return std::exp(log_gaussian_abs_moment(4.0 * gamma_));
  }
  return 1.0;
}

double DistributionSpec::raw_abs_moment(double p) const {
  return std::exp(log_raw_abs_moment(*this, p));
}

double sample(const DistributionSpec& dist, SplitMix64& rng) {
  switch (dist.family()) {
    case Family::Gaussian:
      return std::normal_distribution<double>{}(rng)*dist.scale();
    case Family::Rademacher:
      return rng.sign() * dist.scale();
    case Family::StudentT:
      return std::student_t_distribution<double>(dist.degrees_of_freedom())(rng) * dist.scale();
    case Family::SymmetricWeibull: {
      const double sign = rng.sign();
      return sign * std::weibull_distribution<double>(dist.weibull_shape(), 1.0)(rng) *
             dist.scale();
    }
    case Family::ExpType: {
      const double g = std::normal_distribution<double>{}(rng);
      return std::copysign(std::pow(std::abs(g), 2.0 * dist.gamma()), g) * dist.scale();
    }
  }
  return 0.0;
}

double lp_moment(const DistributionSpec& dist, double p) {
  if (!(p >= 1.0)) throw ParamError("lp_moment needs p >= 1");
  return dist.scale() * std::exp(log_raw_abs_moment(dist, p) / p);
}

double gaussian_survival(double t, double sd) {
  return std::erfc(t / (sd * std::numbers::sqrt2));
}

double survival(const DistributionSpec& dist, double t) {
  if (t < 0.0) return 1.0;
  const double x = t / dist.scale();
  switch (dist.family()) {
    case Family::Gaussian:
      return gaussian_survival(t, dist.scale());
    case Family::Rademacher:
      return x < 1.0 ? 1.0 : 0.0;
    case Family::StudentT: {
      // Pro(|t_d| > x) = I_{d/(d+x^2)}(d/2, 1/2)
      const double d = dist.degrees_of_freedom();
      return boost::math::ibeta(0.5 * d, 0.5, d / (d + x * x));
    }
    case Family::SymmetricWeibull:
      return std::exp(-std::pow(x, dist.weibull_shape()));
    case Family::ExpType:
      // |g|^{2 gamma} > x  <=>  |g| > x^{1/(2 gamma)}
      return gaussian_survival(std::pow(x, 1.0 / (2.0 * dist.gamma())));
  }
  return 0.0;
}

MomentReport check_weak_moment(const DistributionSpec& dist, double k, double kappa1,
                               double gamma) {
  if (!(k >= 4.0)) throw ParamError("weak moment order k must be >= 4");
  if (!(gamma >= 0.5)) throw ParamError("weak moment gamma must be >= 1/2");
  MomentReport report;
  report.kappa1 = kappa1;
  report.gamma = gamma;
  const int top = static_cast<int>(std::ceil(k));
  for (int p = 4; p <= top; ++p) report.p_values.push_back(p);
  if (report.p_values.back() != k) {
    // k is not an integer: ceil(k) > k, so k sorts just before the last entry.
    report.p_values.insert(report.p_values.end() - 1, k);
  }
  for (double p : report.p_values) {
    const double norm = lp_moment(dist, p);
    report.lp_norms.push_back(norm);
    report.max_ratio = std::max(report.max_ratio, norm / std::pow(p, gamma));
  }
  report.satisfied = report.max_ratio <= kappa1;
  return report;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > lo) || n < 1) throw ParamError("log_grid needs 0 < lo < hi and n >= 1");
  std::vector<double> grid(n);
  if (n == 1) {
    grid[0] = lo;
    return grid;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) grid[i] = std::exp(a + (b - a) * i / (n - 1));
  return grid;
}

std::vector<double> default_tail_grid() { return log_grid(1e-3, 1e2, 400); }

SuperGaussianReport check_super_gaussian(const DistributionSpec& dist, double sigma,
                                         const std::vector<double>& t_grid) {
  if (!(sigma > 0.0 && sigma <= 1.0)) throw ParamError("sigma must lie in (0,1]");
  if (t_grid.empty()) throw ParamError("empty tail grid");
  SuperGaussianReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    if (!(t > 0.0) || (i > 0 && t <= t_grid[i - 1])) {
      throw ParamError("tail grid must be positive and strictly increasing");
    }
    const double margin = survival(dist, t) - gaussian_survival(t, sigma);
    if (margin < report.worst_margin) {
      report.worst_margin = margin;
      report.worst_t = t;
    }
  }
  report.satisfied_on_grid = report.worst_margin >= 0.0;
  return report;
}

}  // namespace qpcs
