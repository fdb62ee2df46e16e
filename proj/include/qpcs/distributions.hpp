#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qpcs/rng.hpp"

namespace qpcs {

enum class Family { Gaussian, Rademacher, StudentT, SymmetricWeibull, ExpType };

/// A symmetric entrywise law together with a multiplicative scale.
///
/// The raw families are
///   Gaussian          g ~ N(0,1)
///   Rademacher        fair +-1
///   StudentT(d)       t_d, d >= 3 integer
///   SymmetricWeibull  eps * W with W ~ Weibull(shape r, scale 1), r in [1,2]
///   ExpType(gamma)    sign(g) |g|^(2 gamma), the psi_(1/gamma) law
///
/// `normalized()` returns a copy whose scale is the inverse square root of the
/// analytic raw variance, so the scaled law has unit variance exactly (up to
/// rounding in the Gamma function evaluations).
class DistributionSpec {
 public:
  static DistributionSpec gaussian();
  static DistributionSpec rademacher();
  static DistributionSpec student_t(int d);
  static DistributionSpec weibull(double r);
  static DistributionSpec exp_type(double gamma);
  // psi(alpha) is ExpType(gamma = 1/alpha).
  static DistributionSpec psi(double alpha) { return exp_type(1.0 / alpha); }

  /// Parses `gaussian`, `rademacher`, `student_t(d)`, `weibull(r)`, `psi(alpha)`.
  static DistributionSpec parse(std::string_view text);

  [[nodiscard]] DistributionSpec normalized() const;
  [[nodiscard]] DistributionSpec with_scale(double scale) const;

  Family family() const noexcept { return family_; }
  int degrees_of_freedom() const noexcept { return dof_; }
  double weibull_shape() const noexcept { return shape_; }
  double gamma() const noexcept { return gamma_; }
  double scale() const noexcept { return scale_; }
  bool is_normalized() const noexcept { return normalized_; }

  /// Canonical string, parseable by `parse`.
  std::string name() const;

  /// Exact variance of the unscaled family.
  double raw_variance() const;

  /// E|X_raw|^p for the unscaled family.
  double raw_abs_moment(double p) const;

  bool operator==(const DistributionSpec&) const = default;

 private:
  DistributionSpec(Family family, int dof, double shape, double gamma)
      : family_(family), dof_(dof), shape_(shape), gamma_(gamma) {}

  Family family_;
  int dof_ = 0;
  double shape_ = 0.0;
  double gamma_ = 0.0;
  double scale_ = 1.0;
  bool normalized_ = false;
};

/// One draw from the scaled law.
double sample(const DistributionSpec& dist, SplitMix64& rng);

/// ||X||_{L_p} of the scaled law, p >= 1. Throws MomentDiverges when p >= d for StudentT.
double lp_moment(const DistributionSpec& dist, double p);

/// Pro(|X| > t) of the scaled law.
double survival(const DistributionSpec& dist, double t);

/// Pro(|sd * g| > t) for a standard normal g.
double gaussian_survival(double t, double sd = 1.0);

struct MomentReport {
  std::vector<double> p_values;
  std::vector<double> lp_norms;
  double kappa1 = 0.0;
  double gamma = 0.0;
  bool satisfied = false;
  double max_ratio = 0.0;  // smallest kappa1 that passes on the grid
};

/// Weak moment assumption ||X||_{L_p} <= kappa1 p^gamma, evaluated on
/// p in {4, 5, ..., ceil(k)} together with p = k.
MomentReport check_weak_moment(const DistributionSpec& dist, double k, double kappa1,
                               double gamma);

struct SuperGaussianReport {
  bool satisfied_on_grid = false;
  double worst_margin = 0.0;  // min_t Pro(|X|>t) - Pro(|sigma g|>t)
  double worst_t = 0.0;
};

/// n log-spaced points in [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

/// Default tail grid: 400 log-spaced points in [1e-3, 1e2].
std::vector<double> default_tail_grid();

/// Pointwise tail domination Pro(|sigma g| > t) <= Pro(|X| > t) on `t_grid`.
/// The continuum condition is only certified on the grid.
SuperGaussianReport check_super_gaussian(const DistributionSpec& dist, double sigma,
                                         const std::vector<double>& t_grid);

}  // namespace qpcs
