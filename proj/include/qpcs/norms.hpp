#pragma once

#include <Eigen/Dense>

namespace qpcs {

using VecRef = Eigen::Ref<const Eigen::VectorXd>;

/// l_p norm for p in [1, inf]; pass infinity for the max norm.
double lp_norm(const VecRef& x, double p);

/// Clipped l2 norm max(||y||_2, alpha ||y||_inf), alpha >= 1.
double clipped_norm(const VecRef& y, double alpha);

/// Dual of the clipped norm, sup { <y,z> : max(||z||_2, alpha ||z||_inf) <= 1 }.
/// Equivalently inf { ||a||_2 + ||b||_1 / alpha : a + b = y }. Exact, O(m log m).
double dual_clipped_norm(const VecRef& y, double alpha);

/// Two-block value ||y_T||_2 + ||y_{T^c}||_1 / alpha with
/// T = { i : alpha |y_i| <= ||y||_2 } taken from the full vector (boundary
/// entries in T). It is the cost of one particular split y = y_T + y_{T^c}, so
/// it bounds dual_clipped_norm from above; it is not the dual norm itself.
double dual_clipped_norm_split(const VecRef& y, double alpha);

/// max over assignments of the coordinates to k blocks (empty blocks allowed)
/// of sum_l ||y_{B_l}||_2. Exhaustive; length(y) <= 14 and k <= 4.
double dagger_norm_exact(const VecRef& y, int k);

/// Greedy balanced partition value; a lower bound of dagger_norm_exact.
double dagger_norm_lower(const VecRef& y, int k);

/// l_p norm of x after zeroing its s largest-magnitude entries.
double best_s_term_error(const VecRef& x, Eigen::Index s, double p);

/// s_* = m / log(e N / m).
double s_star(Eigen::Index m, Eigen::Index n);

inline constexpr int kDaggerMaxLength = 14;
inline constexpr int kDaggerMaxBlocks = 4;

}  // namespace qpcs
