#include "qpcs/norms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "qpcs/errors.hpp"

namespace qpcs {

namespace {

void require_alpha(double alpha) {
  if (!(alpha >= 1.0)) throw ParamError("clipped norm parameter alpha must be >= 1");
}

}  // namespace

double lp_norm(const VecRef& x, double p) {
  if (!(p >= 1.0)) throw ParamError("lp_norm needs p >= 1");
  if (x.size() == 0) return 0.0;
  if (std::isinf(p)) return x.cwiseAbs().maxCoeff();
  if (p == 1.0) return x.cwiseAbs().sum();
  if (p == 2.0) return x.norm();
  const double peak = x.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x[i]) / peak, p);
  return peak * std::pow(acc, 1.0 / p);
}

double clipped_norm(const VecRef& y, double alpha) {
  require_alpha(alpha);
  if (y.size() == 0) return 0.0;
  return std::max(y.norm(), alpha * y.cwiseAbs().maxCoeff());
}

double dual_clipped_norm(const VecRef& y, double alpha) {
  require_alpha(alpha);
  // Support function of {z : ||z||_2 <= 1, ||z||_inf <= 1/alpha}. The maximizer
  // is z_i = sign(y_i) min(|y_i| / mu, 1/alpha); with the k largest entries
  // capped, ||z||_2 = 1 forces mu = ||tail_k||_2 / sqrt(1 - k / alpha^2) and the
  // value is ||tail_k||_2 sqrt(1 - k / alpha^2) + (a_1 + ... + a_k) / alpha.
  std::vector<double> mags;
  mags.reserve(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0) mags.push_back(std::abs(y[i]));
  }
  if (mags.empty()) return 0.0;
  std::sort(mags.begin(), mags.end(), std::greater<>());
  const std::size_t nz = mags.size();
  const double alpha_sq = alpha * alpha;

  // tail_sq[k] = sum_{i >= k} a_i^2, accumulated from the small end.
  std::vector<double> tail_sq(nz + 1, 0.0);
  for (std::size_t i = nz; i-- > 0;) tail_sq[i] = tail_sq[i + 1] + mags[i] * mags[i];

  double head_l1 = 0.0;
  for (std::size_t k = 0; k < nz && static_cast<double>(k) < alpha_sq; ++k) {
    const double c = std::sqrt(1.0 - static_cast<double>(k) / alpha_sq);
    const double tail = std::sqrt(tail_sq[k]);
    const double mu = tail / c;
    const bool head_capped = k == 0 || alpha * mags[k - 1] > mu;
    const bool next_free = alpha * mags[k] <= mu;
    if (head_capped && next_free) {
      // No capped entry: the l2 case. Reuse the same evaluation as ||y||_2.
      if (k == 0) return y.norm();
      return tail * c + head_l1 / alpha;
    }
    head_l1 += mags[k];
  }
  // Every nonzero entry sits at the cap (possible only when nz <= alpha^2).
  double total = 0.0;
  for (double a : mags) total += a;
  return total / alpha;
}

double dual_clipped_norm_split(const VecRef& y, double alpha) {
  require_alpha(alpha);
  const double l2 = y.norm();
  double head_sq = 0.0;  // ||y_T||_2^2
  double tail_l1 = 0.0;  // ||y_{T^c}||_1
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double a = std::abs(y[i]);
    if (alpha * a <= l2) {
      head_sq += a * a;
    } else {
      tail_l1 += a;
    }
  }
  return std::sqrt(head_sq) + tail_l1 / alpha;
}

namespace {

struct DaggerSearch {
  std::vector<double> squares;
  int k = 1;
  double best = 0.0;

  // Restricted-growth enumeration: element i may join any of the `used` open
  // blocks or open the next one, so relabelings of a partition are visited once.
  void visit(std::size_t i, int used, std::array<double, kDaggerMaxBlocks> sums) {
    if (i == squares.size()) {
      double value = 0.0;
      for (int b = 0; b < used; ++b) value += std::sqrt(sums[b]);
      best = std::max(best, value);
      return;
    }
    const int limit = std::min(used + 1, k);
    for (int b = 0; b < limit; ++b) {
      auto next = sums;
      next[b] += squares[i];
      visit(i + 1, std::max(used, b + 1), next);
    }
  }
};

}  // namespace

double dagger_norm_exact(const VecRef& y, int k) {
  if (k < 1) throw ParamError("dagger norm needs k >= 1");
  if (y.size() > kDaggerMaxLength || k > kDaggerMaxBlocks) {
    throw SizeError("dagger_norm_exact is exponential; limited to length <= 14 and k <= 4");
  }
  DaggerSearch search;
  search.k = k;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0) search.squares.push_back(y[i] * y[i]);
  }
  if (k == 1 || search.squares.size() <= 1) return y.norm();
  search.visit(0, 0, {});
  return search.best;
}

double dagger_norm_lower(const VecRef& y, int k) {
  if (k < 1) throw ParamError("dagger norm needs k >= 1");
  if (k == 1) return y.norm();
  std::vector<double> squares(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) squares[i] = y[i] * y[i];
  std::sort(squares.begin(), squares.end(), std::greater<>());
  std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
  for (double sq : squares) *std::min_element(sums.begin(), sums.end()) += sq;
  double value = 0.0;
  for (double s : sums) value += std::sqrt(s);
  return value;
}

double best_s_term_error(const VecRef& x, Eigen::Index s, double p) {
  if (s < 0 || s > x.size()) throw DimensionError("best_s_term_error needs 0 <= s <= N");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(x[a]) > std::abs(x[b]); });
  Eigen::VectorXd rest = x;
  for (Eigen::Index k = 0; k < s; ++k) rest[order[k]] = 0.0;
  return lp_norm(rest, p);
}

double s_star(Eigen::Index m, Eigen::Index n) {
  if (m < 1 || m > n) throw DimensionError("s_star needs 1 <= m <= N");
  const double md = static_cast<double>(m);
  return md / (1.0 + std::log(static_cast<double>(n) / md));
}

}  // namespace qpcs
