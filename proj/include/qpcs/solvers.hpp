#pragma once

#include <Eigen/Dense>

namespace qpcs {

struct SolverOptions {
  double tol_abs = 1e-8;
  double tol_rel = 1e-8;
  int max_iters = 50000;
};

/// min ||z||_1 subject to Az = y (eta == 0) or ||Az - y||_2 <= eta (eta > 0).
struct DecodeProblem {
  const Eigen::MatrixXd& a;
  const Eigen::VectorXd& y;
  double eta = 0.0;
  SolverOptions options{};
};

struct DecodeResult {
  Eigen::VectorXd z;
  double objective = 0.0;      // ||z||_1
  double residual_norm = 0.0;  // ||Az - y||_2
  int iters = 0;
  bool converged = false;
  // objective minus the dual objective at `dual`; an upper bound on the
  // suboptimality of z.
  double certificate_gap = 0.0;
  // Dual point v with ||A^T v||_inf <= 1. Its dual objective is <v,y> for BP
  // and <v,y> - eta ||v||_2 for BPDN.
  Eigen::VectorXd dual;
  double dual_objective = 0.0;
};

/// Feasibility slack tol_abs * (1 + ||y||_2) used by the equality-constrained decoder.
double feasibility_tolerance(const Eigen::VectorXd& y, const SolverOptions& options);

/// Equality-constrained l1 minimization (basis pursuit), solved as a linear
/// program with a Mehrotra predictor-corrector interior-point method.
/// Throws RankDeficient when rank(A) < m at relative tolerance 1e-10.
DecodeResult solve_bp(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                      const SolverOptions& options = {});

/// Quadratically constrained l1 minimization, solved by following the
/// lasso homotopy path until the residual norm reaches eta.
DecodeResult solve_bpdn(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double eta,
                        const SolverOptions& options = {});

/// Dispatches on eta: 0 selects solve_bp, positive selects solve_bpdn.
DecodeResult decode(const DecodeProblem& problem);

/// Minimum l2-norm solution of Au = w for full-row-rank A.
Eigen::VectorXd linear_least_norm(const Eigen::MatrixXd& a, const Eigen::VectorXd& w);

}  // namespace qpcs
