#include "qpcs/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qpcs/errors.hpp"

namespace qpcs {

namespace {

constexpr double kRankTolerance = 1e-10;

void check_shapes(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
  if (y.size() != a.rows()) {
    throw DimensionError("y has length " + std::to_string(y.size()) + " but A has " +
                         std::to_string(a.rows()) + " rows");
  }
  if (a.rows() > a.cols()) throw DimensionError("decoders need m <= N");
}

// Minimum-norm solves against a fixed A, with the rank checked once.
class RowSpaceSolver {
 public:
  explicit RowSpaceSolver(const Eigen::MatrixXd& a) : cod_(a.rows(), a.cols()) {
    cod_.setThreshold(kRankTolerance);
    cod_.compute(a);
    if (cod_.rank() < a.rows()) {
      throw RankDeficient("A has row rank " + std::to_string(cod_.rank()) + " < m = " +
                          std::to_string(a.rows()));
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& w) const { return cod_.solve(w); }

 private:
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod_;
};

// Largest step in (0, 1] keeping v + step * dv >= 0.
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double step = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) step = std::min(step, -v[i] / dv[i]);
  }
  return step;
}

bool gap_ok(double gap, double objective, const SolverOptions& o) {
  return gap <= o.tol_abs + o.tol_rel * objective;
}

}  // namespace

double feasibility_tolerance(const Eigen::VectorXd& y, const SolverOptions& options) {
  return options.tol_abs * (1.0 + y.norm());
}

Eigen::VectorXd linear_least_norm(const Eigen::MatrixXd& a, const Eigen::VectorXd& w) {
  check_shapes(a, w);
  return RowSpaceSolver(a).solve(w);
}

DecodeResult solve_bp(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                      const SolverOptions& options) {
  check_shapes(a, y);
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  const RowSpaceSolver rows(a);
  const double tol_feas = feasibility_tolerance(y, options);

  DecodeResult result;
  if (y.squaredNorm() == 0.0) {
    result.z = Eigen::VectorXd::Zero(n);
    result.dual = Eigen::VectorXd::Zero(m);
    result.converged = true;
    return result;
  }

  // LP in standard form: z = p - q with p, q >= 0,
  //   min 1'p + 1'q  s.t.  A p - A q = y,
  // dual: max y'lam  s.t.  A'lam + sp = 1, -A'lam + sq = 1, sp, sq >= 0.
  Eigen::VectorXd p, q, sp, sq, lam = Eigen::VectorXd::Zero(m);
  {
    // Mehrotra's starting point. For this LP the least-squares dual estimate is
    // lam = 0 (so s = 1) and the primal estimate is (u/2, -u/2) with u = A^+ y.
    const Eigen::VectorXd u = rows.solve(y);
    p = 0.5 * u;
    q = -0.5 * u;
    sp = Eigen::VectorXd::Ones(n);
    sq = Eigen::VectorXd::Ones(n);
    const double shift = std::max(-1.5 * std::min(p.minCoeff(), q.minCoeff()), 0.0);
    p.array() += shift;
    q.array() += shift;
    const double xs = p.dot(sp) + q.dot(sq);
    const double dx = 0.5 * xs / (sp.sum() + sq.sum());
    const double ds = 0.5 * xs / (p.sum() + q.sum());
    p.array() += dx;
    q.array() += dx;
    sp.array() += ds;
    sq.array() += ds;
  }

  const double two_n = 2.0 * static_cast<double>(n);
  Eigen::VectorXd best_z;
  double best_gap = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < options.max_iters; ++iter) {
    result.iters = iter;

    // Certificate for the current iterate: project z onto {Az = y} along the
    // row space, shrink lam into the dual feasible set.
    Eigen::VectorXd z = p - q;
    z += rows.solve(y - a * z);
    const Eigen::VectorXd atl = a.transpose() * lam;
    const double scale = std::max(1.0, atl.cwiseAbs().maxCoeff());
    const Eigen::VectorXd v = lam / scale;
    const double objective = z.lpNorm<1>();
    const double dual_obj = v.dot(y);
    const double gap = objective - dual_obj;
    const double residual = (a * z - y).norm();
    if (gap < best_gap && residual <= tol_feas) {
      best_gap = gap;
      best_z = z;
      result.dual = v;
      result.dual_objective = dual_obj;
    }
    if (residual <= tol_feas && gap_ok(gap, objective, options)) {
      result.converged = true;
      break;
    }

    const Eigen::VectorXd rb = a * (p - q) - y;
    const Eigen::VectorXd rcp = atl + sp - Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd rcq = -atl + sq - Eigen::VectorXd::Ones(n);
    const double mu = (p.dot(sp) + q.dot(sq)) / two_n;

    const Eigen::VectorXd dp = p.cwiseQuotient(sp);
    const Eigen::VectorXd dq = q.cwiseQuotient(sq);
    // A D A' through a symmetric rank-N update of the lower triangle.
    const Eigen::MatrixXd scaled = a * (dp + dq).cwiseSqrt().asDiagonal();
    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(m, m);
    normal.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
    normal.triangularView<Eigen::StrictlyUpper>() = normal.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(normal);
    std::optional<Eigen::LDLT<Eigen::MatrixXd>> ldlt;
    if (llt.info() != Eigen::Success) ldlt.emplace(normal);
    auto solve_normal = [&](const Eigen::VectorXd& rhs) -> Eigen::VectorXd {
      return ldlt ? Eigen::VectorXd(ldlt->solve(rhs)) : Eigen::VectorXd(llt.solve(rhs));
    };

    // Newton direction for complementarity target rxs = (rxs_p, rxs_q):
    //   M dlam = -rb - A (S^{-1} rxs + D rc)_p + A (S^{-1} rxs + D rc)_q
    //   ds = -rc - Abar' dlam,  dx = S^{-1} rxs - D ds
    struct Step {
      Eigen::VectorXd dp, dq, dsp, dsq, dlam;
    };
    auto direction = [&](const Eigen::VectorXd& rxs_p, const Eigen::VectorXd& rxs_q) {
      Step st;
      const Eigen::VectorXd tp = rxs_p.cwiseQuotient(sp) + dp.cwiseProduct(rcp);
      const Eigen::VectorXd tq = rxs_q.cwiseQuotient(sq) + dq.cwiseProduct(rcq);
      st.dlam = solve_normal(-rb - a * (tp - tq));
      const Eigen::VectorXd atdl = a.transpose() * st.dlam;
      st.dsp = -rcp - atdl;
      st.dsq = -rcq + atdl;
      st.dp = rxs_p.cwiseQuotient(sp) - dp.cwiseProduct(st.dsp);
      st.dq = rxs_q.cwiseQuotient(sq) - dq.cwiseProduct(st.dsq);
      return st;
    };

    const Step aff = direction(-p.cwiseProduct(sp), -q.cwiseProduct(sq));
    const double ap_aff = std::min(max_step(p, aff.dp), max_step(q, aff.dq));
    const double ad_aff = std::min(max_step(sp, aff.dsp), max_step(sq, aff.dsq));
    const double mu_aff = ((p + ap_aff * aff.dp).dot(sp + ad_aff * aff.dsp) +
                           (q + ap_aff * aff.dq).dot(sq + ad_aff * aff.dsq)) /
                          two_n;
    const double sigma = std::pow(mu_aff / mu, 3);

    const Eigen::VectorXd target = Eigen::VectorXd::Constant(n, sigma * mu);
    const Step st = direction(-p.cwiseProduct(sp) - aff.dp.cwiseProduct(aff.dsp) + target,
                              -q.cwiseProduct(sq) - aff.dq.cwiseProduct(aff.dsq) + target);
    const double ap = std::min(1.0, 0.995 * std::min(max_step(p, st.dp), max_step(q, st.dq)));
    const double ad = std::min(1.0, 0.995 * std::min(max_step(sp, st.dsp), max_step(sq, st.dsq)));
    p += ap * st.dp;
    q += ap * st.dq;
    sp += ad * st.dsp;
    sq += ad * st.dsq;
    lam += ad * st.dlam;

    if (!(mu > 0.0) || !std::isfinite(mu) || (ap < 1e-12 && ad < 1e-12)) break;
  }

  if (best_z.size() == 0) {
    // Never reached a feasible iterate; report the last projected point.
    best_z = p - q;
    best_z += rows.solve(y - a * best_z);
    result.dual = Eigen::VectorXd::Zero(m);
    result.dual_objective = 0.0;
  }
  result.z = std::move(best_z);
  result.objective = result.z.lpNorm<1>();
  result.residual_norm = (a * result.z - y).norm();
  result.certificate_gap = result.objective - result.dual_objective;
  result.converged = result.residual_norm <= tol_feas &&
                     gap_ok(result.certificate_gap, result.objective, options);
  return result;
}

namespace {

// Cholesky factor of the Gram matrix of the active columns, grown one column
// at a time and rebuilt from scratch after a removal.
class ActiveGram {
 public:
  ActiveGram(const Eigen::MatrixXd& a) : a_(a), chol_(a.rows(), a.rows()) {}

  Eigen::Index size() const { return static_cast<Eigen::Index>(active_.size()); }
  const std::vector<Eigen::Index>& active() const { return active_; }

  // Returns false (and leaves the set unchanged) if the column is numerically
  // dependent on the active ones.
  bool add(Eigen::Index j) {
    const Eigen::Index k = size();
    if (k >= a_.rows()) return false;
    const Eigen::VectorXd col = a_.col(j);
    const double diag = col.squaredNorm();
    if (k == 0) {
      if (!(diag > 0.0)) return false;
      chol_(0, 0) = std::sqrt(diag);
      active_.push_back(j);
      return true;
    }
    Eigen::VectorXd g(k);
    for (Eigen::Index i = 0; i < k; ++i) g[i] = a_.col(active_[i]).dot(col);
    const Eigen::VectorXd l =
        chol_.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(g);
    const double d = diag - l.squaredNorm();
    if (!(d > 1e-12 * diag)) return false;
    chol_.block(k, 0, 1, k) = l.transpose();
    chol_(k, k) = std::sqrt(d);
    active_.push_back(j);
    return true;
  }

  void remove_at(Eigen::Index pos) {
    active_.erase(active_.begin() + pos);
    rebuild();
  }

  // G^{-1} rhs
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    const Eigen::Index k = size();
    const auto l = chol_.topLeftCorner(k, k).triangularView<Eigen::Lower>();
    return l.transpose().solve(l.solve(rhs));
  }

  Eigen::MatrixXd active_columns() const {
    Eigen::MatrixXd cols(a_.rows(), size());
    for (Eigen::Index i = 0; i < size(); ++i) cols.col(i) = a_.col(active_[i]);
    return cols;
  }

 private:
  void rebuild() {
    const Eigen::Index k = size();
    if (k == 0) return;
    const Eigen::MatrixXd cols = active_columns();
    Eigen::LLT<Eigen::MatrixXd> llt(cols.transpose() * cols);
    chol_.topLeftCorner(k, k) = llt.matrixL();
  }

  const Eigen::MatrixXd& a_;
  Eigen::MatrixXd chol_;
  std::vector<Eigen::Index> active_;
};

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

DecodeResult solve_bpdn(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double eta,
                        const SolverOptions& options) {
  check_shapes(a, y);
  if (!(eta > 0.0)) throw ParamError("solve_bpdn needs eta > 0; use solve_bp for eta = 0");
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();

  DecodeResult result;
  result.z = Eigen::VectorXd::Zero(n);
  result.dual = Eigen::VectorXd::Zero(m);

  const double y_norm = y.norm();
  if (y_norm <= eta) {
    result.residual_norm = y_norm;
    result.converged = true;
    return result;
  }

  // Lasso path  min 1/2 ||y - Az||^2 + lam ||z||_1  from lam = ||A'y||_inf down
  // to the lam at which ||y - Az||_2 = eta. On the active set S with signs sg,
  //   z_S(lam - t) = z_S(lam) + t G^{-1} sg,   G = A_S' A_S.
  ActiveGram gram(a);
  Eigen::VectorXd signs(m);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd corr = a.transpose() * y;
  Eigen::Index first = 0;
  double lam = corr.cwiseAbs().maxCoeff(&first);
  gram.add(first);
  signs[0] = sign_of(corr[first]);

  std::vector<char> in_active(static_cast<std::size_t>(n), 0);
  in_active[first] = 1;
  Eigen::Index blocked = -1;  // index just dropped; may not re-enter immediately
  bool reached = false;

  int iter = 0;
  for (; iter < options.max_iters; ++iter) {
    const Eigen::Index k = gram.size();
    const Eigen::VectorXd sg = signs.head(k);
    const Eigen::VectorXd dir = gram.solve(sg);
    const auto& act = gram.active();

    Eigen::VectorXd adir = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < k; ++i) adir += dir[i] * a.col(act[i]);
    const Eigen::VectorXd b = a.transpose() * adir;
    const Eigen::VectorXd r = y - a * z;
    corr = a.transpose() * r;

    double step = lam;  // lam reaches 0
    enum class Event { End, Enter, Exit, Residual } event = Event::End;
    Eigen::Index who = -1;

    // Residual ||r - t adir||^2 = eta^2.
    const double qa = adir.squaredNorm();
    const double qb = r.dot(adir);
    const double qc = r.squaredNorm() - eta * eta;
    if (qc <= 0.0) {
      step = 0.0;
      event = Event::Residual;
    } else if (qa > 0.0) {
      const double disc = qb * qb - qa * qc;
      if (disc >= 0.0) {
        // qc > 0 and qb > 0 on the path, so this is the smaller positive root.
        const double t = qc / (qb + std::sqrt(disc));
        if (t >= 0.0 && t < step) {
          step = t;
          event = Event::Residual;
        }
      }
    }

    for (Eigen::Index j = 0; j < n; ++j) {
      if (in_active[j] || j == blocked) continue;
      const double cands[2] = {(lam - corr[j]) / (1.0 - b[j]), (lam + corr[j]) / (1.0 + b[j])};
      for (double t : cands) {
        if (t > 0.0 && t < step) {
          step = t;
          event = Event::Enter;
          who = j;
        }
      }
    }
    for (Eigen::Index i = 0; i < k; ++i) {
      if (dir[i] == 0.0) continue;
      const double t = -z[act[i]] / dir[i];
      if (t > 0.0 && t < step) {
        step = t;
        event = Event::Exit;
        who = i;
      }
    }

    for (Eigen::Index i = 0; i < k; ++i) z[act[i]] += step * dir[i];
    lam -= step;

    if (event == Event::Residual || event == Event::End) {
      reached = event == Event::Residual;
      break;
    }
    blocked = -1;
    if (event == Event::Enter) {
      const double c = a.col(who).dot(y - a * z);
      if (gram.add(who)) {
        signs[k] = sign_of(c);
        in_active[who] = 1;
      } else {
        blocked = who;
      }
    } else {
      const Eigen::Index j = act[who];
      z[j] = 0.0;
      in_active[j] = 0;
      for (Eigen::Index i = who; i + 1 < k; ++i) signs[i] = signs[i + 1];
      gram.remove_at(who);
      blocked = j;
    }
    if (gram.size() == 0) break;
  }
  result.iters = iter;

  // Recompute the endpoint of the final segment from scratch:
  //   z_S(l) = P - l Q,  P = G^{-1} A_S'y,  Q = G^{-1} sg,
  //   ||y - A_S z_S(l)||^2 = ||r0||^2 + l^2 ||A_S Q||^2   (r0 orthogonal to A_S),
  // so the residual equals eta at l = sqrt((eta^2 - ||r0||^2)) / ||A_S Q||.
  if (reached && gram.size() > 0) {
    const Eigen::Index k = gram.size();
    const Eigen::MatrixXd cols = gram.active_columns();
    const Eigen::VectorXd big_p = gram.solve(cols.transpose() * y);
    const Eigen::VectorXd big_q = gram.solve(signs.head(k));
    const Eigen::VectorXd r0 = y - cols * big_p;
    const double aq = (cols * big_q).squaredNorm();
    const double room = eta * eta - r0.squaredNorm();
    if (aq > 0.0 && room > 0.0) {
      const double l = std::sqrt(room / aq);
      const Eigen::VectorXd zs = big_p - l * big_q;
      bool consistent = std::abs(l - lam) <= 1e-6 * std::max(1.0, lam);
      for (Eigen::Index i = 0; i < k && consistent; ++i) {
        consistent = sign_of(zs[i]) == signs[i] || zs[i] == 0.0;
      }
      if (consistent) {
        z.setZero();
        for (Eigen::Index i = 0; i < k; ++i) z[gram.active()[i]] = zs[i];
        lam = l;
      }
    }
  }

  result.z = z;
  result.objective = z.lpNorm<1>();
  const Eigen::VectorXd r = y - a * z;
  result.residual_norm = r.norm();
  if (lam > 0.0) {
    Eigen::VectorXd v = r / lam;
    const double scale = std::max(1.0, (a.transpose() * v).cwiseAbs().maxCoeff());
    v /= scale;
    result.dual = v;
    result.dual_objective = v.dot(y) - eta * v.norm();
  }
  result.certificate_gap = result.objective - result.dual_objective;
  result.converged = reached &&
                     result.residual_norm <= eta * (1.0 + options.tol_rel) + options.tol_abs &&
                     gap_ok(result.certificate_gap, result.objective, options);
  return result;
}

DecodeResult decode(const DecodeProblem& problem) {
  if (problem.eta < 0.0) throw ParamError("eta must be >= 0");
  if (problem.eta == 0.0) return solve_bp(problem.a, problem.y, problem.options);
  return solve_bpdn(problem.a, problem.y, problem.eta, problem.options);
}

}  // namespace qpcs
