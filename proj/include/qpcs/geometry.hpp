#pragma once

// Monte-Carlo diagnostics for the l1-quotient property, the inradius of the
// random polytope A B_1^N and the small-ball quantities behind them.
//
// Every infimum or supremum over a sphere is replaced by a finite probe family
// (uniform sphere samples, the standard basis, k-sparse spikes), so each
// estimate bounds the true extremum from one side only.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpcs/distributions.hpp"
#include "qpcs/ensembles.hpp"
#include "qpcs/solvers.hpp"

namespace qpcs {

/// Reference norm on R^m: l2, or the clipped norm max(||.||_2, alpha ||.||_inf).
struct NormKind {
  enum class Kind { L2, Clipped };
  Kind kind = Kind::L2;
  double alpha = 1.0;

  static NormKind l2() { return {}; }
  static NormKind clipped(double alpha);

  double norm(const Eigen::VectorXd& w) const;
  double dual(const Eigen::VectorXd& w) const;
  std::string name() const;
};

enum class ProbeKind { Sphere, Basis, Spike2, Spike4 };
std::string probe_kind_name(ProbeKind kind);

struct ProbeRatio {
  ProbeKind kind = ProbeKind::Sphere;
  int index = 0;             // position within its family
  bool solved = false;       // false: BP failed, excluded from the maxima
  double ratio = 0.0;        // ||u_w||_1 / (sqrt(s_*) ||w||)
  double certificate = 0.0;  // ||w||_* / (sqrt(s_*) ||A^T w||_inf)
  // ||w||_2^2 / ||A^T w||_inf <= ||u_w||_1 (weak duality with v = w), up to tolerance
  bool weak_duality_ok = true;
};

struct QuotientEstimate {
  double d_hat = 0.0;              // max ratio over solved probes; lower bound of the QP constant
  double certificate_lower = 0.0;  // max certificate over the same probes; also a lower bound
  NormKind norm_kind;
  int directions_probed = 0;
  int failed = 0;
  double s_star = 0.0;
  std::vector<ProbeRatio> per_direction;
};

/// Probes `n_directions` uniform sphere directions, the m basis vectors and
/// `n_directions` sparse spikes (alternating 2 and 4 large coordinates). For each
/// probe w solves basis pursuit u_w = argmin{||u||_1 : Au = w} and records
/// ||u_w||_1 / (sqrt(s_*) ||w||). Probe j of each family comes from its own
/// sub-stream, so d_hat is nondecreasing in n_directions for a fixed seed.
/// Expects the row-scaled matrix (1/sqrt(m)) A.
QuotientEstimate quotient_estimate(const MeasurementMatrix& a, const NormKind& norm_kind,
                                   int n_directions, std::uint64_t seed,
                                   const SolverOptions& options = {});

struct InradiusEstimate {
  double upper = 0.0;              // ||A^T w||_inf at the best unit w found
  Eigen::VectorXd best_direction;  // that w
  std::vector<double> per_start;
};

/// min_{||w||_2 = 1} ||A^T w||_inf, the inradius of A B_1^N. Multi-start projected
/// subgradient descent (step 1/sqrt(t)) followed by a facet polish: the m most
/// active columns define a candidate facet normal, which is kept when it improves
/// the value. Every reported value is attained by a unit vector, so it is an
/// upper bound of the inradius.
InradiusEstimate inradius_estimate(const Eigen::MatrixXd& a, int n_starts, int descent_iters,
                                   std::uint64_t seed);

/// Smallest ||A^T w||_inf over `samples` uniform unit vectors; audits an inradius estimate.
double inradius_audit(const Eigen::MatrixXd& a, int samples, std::uint64_t seed);

/// (N^{-1} sum_i |<a_i, w>|^q)^{1/q} over the columns a_i of the unscaled A, q >= 1.
double q_moment_functional(const Eigen::MatrixXd& a, const Eigen::VectorXd& w, double q);

struct MonteCarloMean {
  double mean = 0.0;
  double std_error = 0.0;
  int trials = 0;
};

/// Monte-Carlo mean of N^{-1/2} ||h||^{(alpha)} with h = N^{-1/2} sum_i eps_i b_i,
/// b_i in R^m with i.i.d. entries of the unit-variance version of `dist`.
MonteCarloMean empirical_R(const DistributionSpec& dist, int m, int n, double alpha, int trials,
                           std::uint64_t seed);

struct TailEstimate {
  double q_hat = 0.0;   // min over probes of the empirical Pro(|<b,w>| >= u)
  double std_error = 0.0;  // binomial standard error at the minimizing probe
  ProbeKind argmin_kind = ProbeKind::Sphere;
  int argmin_index = 0;
  int probes = 0;
  int samples = 0;
};

/// min over probes w with unit dual norm of Pro(|<b, w>| >= u), estimated from
/// `tail_samples` draws of b (shared by all probes). Probes: `w_probes` sphere
/// samples, the basis, and `w_probes` spikes. An upper bound of the true infimum.
TailEstimate empirical_Q(const DistributionSpec& dist, int m, double u, int w_probes,
                         int tail_samples, std::uint64_t seed,
                         const NormKind& norm_kind = NormKind::l2());

struct MontgomerySmithReport {
  bool upper_ok = false;
  double empirical = 0.0;  // fraction of draws with <eps, y> > threshold
  double bound = 0.0;      // exp(-alpha^2 / 2)
  double threshold = 0.0;  // alpha * ||y||_*^{(max(alpha, 1))}
  int trials = 0;
};

/// Rademacher upper tail against exp(-alpha^2/2). upper_ok allows
/// 3 sqrt(bound (1 - bound) / trials) + 1 / trials of sampling slack.
MontgomerySmithReport montgomery_smith_check(const Eigen::VectorXd& y, double alpha, int trials,
                                             std::uint64_t seed);

struct SmallBallPoint {
  double u = 0.0;
  double min_tail = 0.0;  // min over probes of the empirical tail
  double bound = 0.0;     // c1 exp(-c2 u^2 / (2 sigma^2))
  bool passed = false;
};

struct SmallBallReport {
  std::vector<SmallBallPoint> points;
  bool all_passed = false;
  int probes = 0;
  int samples = 0;
};

inline constexpr double kSmallBallC1 = 0.10060740109546117;  // 1 / (4 log 12)
inline constexpr double kSmallBallC2 = 5219.813299576001;   // 2000 log 12 + 250

/// Tail lower bound for unit l2 probes w (sphere samples and spikes) of a
/// super-Gaussian law. Throws ParamError when the law is not certified
/// super-Gaussian at sigma or when some u < sigma / 4.
SmallBallReport super_gaussian_small_ball_check(const DistributionSpec& dist, double sigma, int m,
                                                const std::vector<double>& u_grid, int probes,
                                                int samples, std::uint64_t seed);

// Constants of the quotient-property theorems, for reporting next to estimates.
// They are far from sharp and never asserted at desk scale.
double reference_D_moment(double gamma, double kappa1);          // 8/e sqrt(1 + (9+8g) log 4 + 8 log k1)
double reference_C_moment(double gamma, double kappa1);          // 4^{5+8g} k1^8 / (3^4 e)
double reference_D_super_gaussian(double sigma);                 // 8 sqrt(e) sqrt(1 + 2 log 64 + 2 log 10 + 5220/(16 s^2))
double reference_C_super_gaussian(double sigma);                 // 64^2 10^2 exp(5220/(16 s^2))
double monitored_small_ball_bound(Eigen::Index m, Eigen::Index n);  // 64 sqrt(m/N)

}  // namespace qpcs
