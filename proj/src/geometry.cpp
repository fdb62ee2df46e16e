#include "qpcs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "qpcs/errors.hpp"
#include "qpcs/norms.hpp"
#include "qpcs/rng.hpp"

namespace qpcs {

namespace {

// Sub-stream tags for the probe families.
constexpr std::uint64_t kSphereStream = 0x5350;
constexpr std::uint64_t kSpikeStream = 0x5350494b;
constexpr std::uint64_t kSampleStream = 0x53414d50;

Eigen::VectorXd sphere_direction(Eigen::Index m, std::uint64_t seed) {
  Eigen::VectorXd w = gaussian_vector(m, seed);
  const double nrm = w.norm();
  // A zero Gaussian vector has probability 0; fall back to e_1 to stay total.
  if (nrm == 0.0) return Eigen::VectorXd::Unit(m, 0);
  return w / nrm;
}

// k coordinates of magnitude in [0.5, 1.5) with random signs over a small
// Gaussian background; unit l2 norm.
Eigen::VectorXd spike_direction(Eigen::Index m, int k, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd w(m);
  for (Eigen::Index i = 0; i < m; ++i) w[i] = 0.02 * g(rng);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  const Eigen::Index kk = std::min<Eigen::Index>(k, m);
  for (Eigen::Index i = 0; i < kk; ++i) {
    const auto span = static_cast<std::uint64_t>(m - i);
    const Eigen::Index j = i + static_cast<Eigen::Index>(rng() % span);
    std::swap(idx[i], idx[j]);
    w[idx[i]] = rng.sign() * (0.5 + rng.uniform());
  }
  return w / w.norm();
}

ProbeKind spike_kind(int j) { return j % 2 == 0 ? ProbeKind::Spike2 : ProbeKind::Spike4; }

struct Probe {
  ProbeKind kind;
  int index;
  Eigen::VectorXd w;
};

// Sphere samples, the basis, then spikes; probe j of a family depends only on j.
std::vector<Probe> probe_family(Eigen::Index m, int n_random, std::uint64_t seed) {
  std::vector<Probe> out;
  out.reserve(static_cast<std::size_t>(2 * n_random + m));
  const std::uint64_t sphere_seed = derive_seed(seed, kSphereStream);
  const std::uint64_t spike_seed = derive_seed(seed, kSpikeStream);
  for (int j = 0; j < n_random; ++j) {
    out.push_back({ProbeKind::Sphere, j, sphere_direction(m, derive_seed(sphere_seed, j))});
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    out.push_back({ProbeKind::Basis, static_cast<int>(i), Eigen::VectorXd::Unit(m, i)});
  }
  for (int j = 0; j < n_random; ++j) {
    const ProbeKind kind = spike_kind(j);
    const int k = kind == ProbeKind::Spike2 ? 2 : 4;
    out.push_back({kind, j, spike_direction(m, k, derive_seed(spike_seed, j))});
  }
  return out;
}

double sup_abs_correlation(const Eigen::MatrixXd& a, const Eigen::VectorXd& w) {
  return (a.transpose() * w).cwiseAbs().maxCoeff();
}

MonteCarloMean mean_and_error(const std::vector<double>& xs) {
  MonteCarloMean r;
  r.trials = static_cast<int>(xs.size());
  if (xs.empty()) return r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  r.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    const double n = static_cast<double>(xs.size());
    r.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return r;
}

}  // namespace

NormKind NormKind::clipped(double alpha) {
  if (!(alpha >= 1.0)) throw ParamError("clipped norm parameter alpha must be >= 1");
  return {Kind::Clipped, alpha};
}

double NormKind::norm(const Eigen::VectorXd& w) const {
  return kind == Kind::L2 ? w.norm() : clipped_norm(w, alpha);
}

double NormKind::dual(const Eigen::VectorXd& w) const {
  return kind == Kind::L2 ? w.norm() : dual_clipped_norm(w, alpha);
}

std::string NormKind::name() const {
  return kind == Kind::L2 ? "l2" : "clipped(" + std::to_string(alpha) + ")";
}

std::string probe_kind_name(ProbeKind kind) {
  switch (kind) {
    case ProbeKind::Sphere: return "sphere";
    case ProbeKind::Basis: return "basis";
    case ProbeKind::Spike2: return "spike2";
    case ProbeKind::Spike4: return "spike4";
  }
  return "unknown";
}

QuotientEstimate quotient_estimate(const MeasurementMatrix& a, const NormKind& norm_kind,
                                   int n_directions, std::uint64_t seed,
                                   const SolverOptions& options) {
  if (n_directions < 1) throw ParamError("quotient_estimate needs n_directions >= 1");
  const Eigen::MatrixXd& mat = a.entries;
  QuotientEstimate est;
  est.norm_kind = norm_kind;
  est.s_star = s_star(a.m(), a.n());
  const double root_s = std::sqrt(est.s_star);

  for (const Probe& probe : probe_family(a.m(), n_directions, seed)) {
    ProbeRatio pr;
    pr.kind = probe.kind;
    pr.index = probe.index;
    const double corr = sup_abs_correlation(mat, probe.w);
    pr.certificate = norm_kind.dual(probe.w) / (root_s * corr);
    try {
      const DecodeResult r = solve_bp(mat, probe.w, options);
      pr.solved = r.converged;
      pr.ratio = r.objective / (root_s * norm_kind.norm(probe.w));
      const double slack = 1e-6 * (1.0 + r.objective);
      pr.weak_duality_ok = probe.w.squaredNorm() / corr <= r.objective + slack;
    } catch (const RankDeficient&) {
      throw;
    } catch (const Error&) {
      pr.solved = false;
    }
    ++est.directions_probed;
    if (pr.solved) {
      est.d_hat = std::max(est.d_hat, pr.ratio);
      est.certificate_lower = std::max(est.certificate_lower, pr.certificate);
    } else {
      ++est.failed;
    }
    est.per_direction.push_back(pr);
  }
  return est;
}

InradiusEstimate inradius_estimate(const Eigen::MatrixXd& a, int n_starts, int descent_iters,
                                   std::uint64_t seed) {
  if (n_starts < 1) throw ParamError("inradius_estimate needs n_starts >= 1");
  if (descent_iters < 0) throw ParamError("inradius_estimate needs descent_iters >= 0");
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  auto value = [&](const Eigen::VectorXd& w) { return sup_abs_correlation(a, w); };

  // Candidate facet normal through the m columns most active at w.
  auto polish = [&](Eigen::VectorXd& w, double& best) {
    if (n < m) return;
    for (int round = 0; round < 20; ++round) {
      const Eigen::VectorXd c = a.transpose() * w;
      std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::partial_sort(order.begin(), order.begin() + m, order.end(),
                        [&](Eigen::Index i, Eigen::Index j) {
                          return std::abs(c[i]) > std::abs(c[j]);
                        });
      Eigen::MatrixXd at(m, m);
      Eigen::VectorXd sg(m);
      for (Eigen::Index k = 0; k < m; ++k) {
        at.row(k) = a.col(order[k]).transpose();
        sg[k] = c[order[k]] >= 0.0 ? 1.0 : -1.0;
      }
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(at);
      if (!lu.isInvertible()) return;
      Eigen::VectorXd x = lu.solve(sg);
      const double nx = x.norm();
      if (!(nx > 0.0) || !std::isfinite(nx)) return;
      x /= nx;
      const double v = value(x);
      if (!(v < best)) return;
      best = v;
      w = x;
    }
  };

  InradiusEstimate est;
  est.upper = std::numeric_limits<double>::infinity();
  for (int start = 0; start < n_starts; ++start) {
    Eigen::VectorXd w = sphere_direction(m, derive_seed(seed, static_cast<std::uint64_t>(start)));
    Eigen::VectorXd best_w = w;
    double best = value(w);
    for (int t = 1; t <= descent_iters; ++t) {
      const Eigen::VectorXd c = a.transpose() * w;
      Eigen::Index idx = 0;
      c.cwiseAbs().maxCoeff(&idx);
      Eigen::VectorXd g = (c[idx] >= 0.0 ? 1.0 : -1.0) * a.col(idx);
      g -= g.dot(w) * w;  // tangent to the sphere
      const double gn = g.norm();
      if (!(gn > 0.0)) break;
      w -= g / (gn * std::sqrt(static_cast<double>(t)));
      w.normalize();
      const double v = value(w);
      if (v < best) {
        best = v;
        best_w = w;
      }
    }
    polish(best_w, best);
    est.per_start.push_back(best);
    if (best < est.upper) {
      est.upper = best;
      est.best_direction = best_w;
    }
  }
  return est;
}

double inradius_audit(const Eigen::MatrixXd& a, int samples, std::uint64_t seed) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    best = std::min(best, sup_abs_correlation(a, sphere_direction(a.rows(), derive_seed(seed, k))));
  }
  return best;
}

double q_moment_functional(const Eigen::MatrixXd& a, const Eigen::VectorXd& w, double q) {
  if (!(q >= 1.0)) throw ParamError("q_moment_functional needs q >= 1");
  if (w.size() != a.rows()) throw DimensionError("w length must equal the row count of A");
  if (a.cols() == 0) return 0.0;
  const Eigen::ArrayXd c = (a.transpose() * w).array().abs();
  const double peak = c.maxCoeff();
  if (peak == 0.0) return 0.0;
  // Factor out the peak so large q cannot overflow.
  const double mean = (c / peak).pow(q).mean();
  return peak * std::pow(mean, 1.0 / q);
}

MonteCarloMean empirical_R(const DistributionSpec& dist, int m, int n, double alpha, int trials,
                           std::uint64_t seed) {
  if (m < 1 || n < 1) throw DimensionError("empirical_R needs m, N >= 1");
  if (trials < 1) throw ParamError("empirical_R needs trials >= 1");
  const DistributionSpec d = dist.normalized();
  const double root_n = std::sqrt(static_cast<double>(n));
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    Eigen::VectorXd h = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < n; ++i) {
      const double eps = rng.sign();
      for (int j = 0; j < m; ++j) h[j] += eps * sample(d, rng);
    }
    h /= root_n;
    values.push_back(clipped_norm(h, alpha) / root_n);
  }
  return mean_and_error(values);
}

TailEstimate empirical_Q(const DistributionSpec& dist, int m, double u, int w_probes,
                         int tail_samples, std::uint64_t seed, const NormKind& norm_kind) {
  if (!(u > 0.0)) throw ParamError("empirical_Q needs u > 0");
  if (m < 1) throw DimensionError("empirical_Q needs m >= 1");
  if (w_probes < 0 || tail_samples < 1) throw ParamError("empirical_Q needs samples >= 1");
  const DistributionSpec d = dist.normalized();

  std::vector<Probe> probes = probe_family(m, w_probes, seed);
  Eigen::MatrixXd w(m, static_cast<Eigen::Index>(probes.size()));
  for (std::size_t k = 0; k < probes.size(); ++k) {
    w.col(static_cast<Eigen::Index>(k)) = probes[k].w / norm_kind.dual(probes[k].w);
  }

  std::vector<long> hits(probes.size(), 0);
  SplitMix64 rng(derive_seed(seed, kSampleStream));
  constexpr int kBlock = 2048;
  Eigen::MatrixXd b(kBlock, m);
  for (int done = 0; done < tail_samples; done += kBlock) {
    const int rows = std::min(kBlock, tail_samples - done);
    for (int r = 0; r < rows; ++r) {
      for (int j = 0; j < m; ++j) b(r, j) = sample(d, rng);
    }
    const Eigen::MatrixXd proj = b.topRows(rows) * w;
    for (Eigen::Index k = 0; k < proj.cols(); ++k) {
      hits[k] += (proj.col(k).array().abs() >= u).count();
    }
  }

  TailEstimate est;
  est.probes = static_cast<int>(probes.size());
  est.samples = tail_samples;
  est.q_hat = 1.0;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const double p = static_cast<double>(hits[k]) / tail_samples;
    if (p < est.q_hat || k == 0) {
      est.q_hat = p;
      est.argmin_kind = probes[k].kind;
      est.argmin_index = probes[k].index;
    }
  }
  est.std_error = std::sqrt(est.q_hat * (1.0 - est.q_hat) / tail_samples);
  return est;
}

MontgomerySmithReport montgomery_smith_check(const Eigen::VectorXd& y, double alpha, int trials,
                                             std::uint64_t seed) {
  if (y.size() == 0 || y.isZero(0.0)) throw ParamError("montgomery_smith_check needs y != 0");
  if (!(alpha > 0.0)) throw ParamError("montgomery_smith_check needs alpha > 0");
  if (trials < 1) throw ParamError("montgomery_smith_check needs trials >= 1");
  MontgomerySmithReport rep;
  rep.trials = trials;
  rep.threshold = alpha * dual_clipped_norm(y, std::max(alpha, 1.0));
  rep.bound = std::exp(-0.5 * alpha * alpha);
  SplitMix64 rng(seed);
  long hits = 0;
  for (int t = 0; t < trials; ++t) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) s += rng.sign() * y[i];
    if (s > rep.threshold) ++hits;
  }
  rep.empirical = static_cast<double>(hits) / trials;
  const double slack = 3.0 * std::sqrt(rep.bound * (1.0 - rep.bound) / trials) + 1.0 / trials;
  rep.upper_ok = rep.empirical <= rep.bound + slack;
  return rep;
}

SmallBallReport super_gaussian_small_ball_check(const DistributionSpec& dist, double sigma, int m,
                                                const std::vector<double>& u_grid, int probes,
                                                int samples, std::uint64_t seed) {
  if (!(sigma > 0.0 && sigma <= 1.0)) throw ParamError("sigma must lie in (0, 1]");
  if (m < 1 || probes < 1 || samples < 1) throw ParamError("m, probes and samples must be >= 1");
  for (double u : u_grid) {
    if (!(u >= sigma / 4.0)) throw ParamError("small-ball bound needs u >= sigma / 4");
  }
  if (!check_super_gaussian(dist, sigma, default_tail_grid()).satisfied_on_grid) {
    throw ParamError(dist.name() + " is not super-Gaussian at sigma = " + std::to_string(sigma));
  }

  // Sphere samples and spikes; the basis is left out (it is the spike with k = 1
  // and adds m probes without new information for i.i.d. entries).
  const std::uint64_t sphere_seed = derive_seed(seed, kSphereStream);
  const std::uint64_t spike_seed = derive_seed(seed, kSpikeStream);
  Eigen::MatrixXd w(m, 2 * probes);
  for (int j = 0; j < probes; ++j) {
    w.col(j) = sphere_direction(m, derive_seed(sphere_seed, j));
    w.col(probes + j) = spike_direction(m, spike_kind(j) == ProbeKind::Spike2 ? 2 : 4,
                                        derive_seed(spike_seed, j));
  }

  const std::size_t n_u = u_grid.size();
  std::vector<std::vector<long>> hits(n_u, std::vector<long>(static_cast<std::size_t>(w.cols()), 0));
  SplitMix64 rng(derive_seed(seed, kSampleStream));
  constexpr int kBlock = 2048;
  Eigen::MatrixXd b(kBlock, m);
  for (int done = 0; done < samples; done += kBlock) {
    const int rows = std::min(kBlock, samples - done);
    for (int r = 0; r < rows; ++r) {
      for (int j = 0; j < m; ++j) b(r, j) = sample(dist, rng);
    }
    const Eigen::ArrayXXd proj = (b.topRows(rows) * w).array().abs();
    for (std::size_t iu = 0; iu < n_u; ++iu) {
      for (Eigen::Index k = 0; k < proj.cols(); ++k) {
        hits[iu][k] += (proj.col(k) > u_grid[iu]).count();
      }
    }
  }

  SmallBallReport rep;
  rep.probes = static_cast<int>(w.cols());
  rep.samples = samples;
  rep.all_passed = true;
  for (std::size_t iu = 0; iu < n_u; ++iu) {
    SmallBallPoint pt;
    pt.u = u_grid[iu];
    const long fewest = *std::min_element(hits[iu].begin(), hits[iu].end());
    pt.min_tail = static_cast<double>(fewest) / samples;
    pt.bound = kSmallBallC1 * std::exp(-kSmallBallC2 * pt.u * pt.u / (2.0 * sigma * sigma));
    pt.passed = pt.min_tail > pt.bound;
    rep.all_passed = rep.all_passed && pt.passed;
    rep.points.push_back(pt);
  }
  return rep;
}

double reference_D_moment(double gamma, double kappa1) {
  return 8.0 / std::exp(1.0) *
         std::sqrt(1.0 + (9.0 + 8.0 * gamma) * std::log(4.0) + 8.0 * std::log(kappa1));
}

double reference_C_moment(double gamma, double kappa1) {
  return std::pow(4.0, 5.0 + 8.0 * gamma) * std::pow(kappa1, 8.0) / (81.0 * std::exp(1.0));
}

double reference_D_super_gaussian(double sigma) {
  return 8.0 * std::sqrt(std::exp(1.0)) *
         std::sqrt(1.0 + 2.0 * std::log(64.0) + 2.0 * std::log(10.0) +
                   5220.0 / (16.0 * sigma * sigma));
}

double reference_C_super_gaussian(double sigma) {
  return 64.0 * 64.0 * 100.0 * std::exp(5220.0 / (16.0 * sigma * sigma));
}

double monitored_small_ball_bound(Eigen::Index m, Eigen::Index n) {
  return 64.0 * std::sqrt(static_cast<double>(m) / static_cast<double>(n));
}

}  // namespace qpcs
