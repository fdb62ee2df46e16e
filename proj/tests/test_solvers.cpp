#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "qpcs/ensembles.hpp"
#include "qpcs/errors.hpp"
#include "qpcs/solvers.hpp"

using namespace qpcs;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Instance {
  MatrixXd a;
  VectorXd x0;
  VectorXd y;
};

Instance gaussian_instance(Eigen::Index m, Eigen::Index n, Eigen::Index s, std::uint64_t seed) {
  Instance in;
  in.a = sample_matrix(DistributionSpec::gaussian(), m, n, true, derive_seed(seed, 1)).entries;
  in.x0 = sample_sparse_vector(n, s, derive_seed(seed, 2)).x0;
  in.y = in.a * in.x0;
  return in;
}

void check_certificate(const MatrixXd& a, const DecodeResult& r, double eta) {
  REQUIRE(r.dual.size() == a.rows());
  CHECK((a.transpose() * r.dual).cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
  // weak duality: the dual objective never exceeds the primal value
  CHECK(r.dual_objective <= r.objective + 1e-10);
  CHECK(r.certificate_gap == doctest::Approx(r.objective - r.dual_objective).epsilon(1e-12));
  if (eta > 0.0) CHECK(r.residual_norm <= eta * (1.0 + 1e-8) + 1e-8);
}

}  // namespace

TEST_CASE("basis pursuit small examples") {
  SUBCASE("identity") {
    const MatrixXd a = MatrixXd::Identity(2, 2);
    const VectorXd y = (VectorXd(2) << 1, 2).finished();
    const auto r = solve_bp(a, y);
    CHECK(r.converged);
    CHECK(r.objective == doctest::Approx(3.0).epsilon(1e-8));
    CHECK((r.z - y).norm() <= 1e-8);
    check_certificate(a, r, 0.0);
  }
  SUBCASE("single row prefers the larger column") {
    const MatrixXd a = (MatrixXd(1, 2) << 1, 2).finished();
    const VectorXd y = VectorXd::Constant(1, 2.0);
    const auto r = solve_bp(a, y);
    CHECK(r.converged);
    CHECK(std::abs(r.z[0]) <= 1e-8);
    CHECK(std::abs(r.z[1] - 1.0) <= 1e-8);
    CHECK(std::abs(r.objective - 1.0) <= 1e-8);
    CHECK(std::abs(r.dual_objective - 1.0) <= 1e-8);
    check_certificate(a, r, 0.0);
  }
  SUBCASE("zero measurements") {
    const auto r = solve_bp(MatrixXd::Identity(3, 5), VectorXd::Zero(3));
    CHECK(r.converged);
    CHECK(r.z.isZero());
  }
}

TEST_CASE("basis pursuit rejects bad input") {
  CHECK_THROWS_AS(solve_bp(MatrixXd::Ones(2, 4), VectorXd::Ones(2)), RankDeficient);
  CHECK_THROWS_AS(solve_bp(MatrixXd::Identity(2, 3), VectorXd::Ones(3)), DimensionError);
  CHECK_THROWS_AS(solve_bp(MatrixXd::Identity(3, 2), VectorXd::Ones(3)), DimensionError);
  CHECK_THROWS_AS(linear_least_norm(MatrixXd::Ones(2, 4), VectorXd::Ones(2)), RankDeficient);
}

TEST_CASE("basis pursuit recovers sparse vectors from gaussian measurements") {
  int recovered = 0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const auto in = gaussian_instance(80, 200, 5, 1000 + t);
    const auto r = solve_bp(in.a, in.y);
    CHECK(r.converged);
    check_certificate(in.a, r, 0.0);
    CHECK(r.residual_norm <= feasibility_tolerance(in.y, {}));
    if ((r.z - in.x0).norm() <= 1e-6) ++recovered;
  }
  CHECK(recovered >= 48);
}

TEST_CASE("basis pursuit optimum beats feasible alternatives") {
  const auto in = gaussian_instance(20, 60, 12, 77);
  const auto r = solve_bp(in.a, in.y);
  REQUIRE(r.converged);
  CHECK(r.certificate_gap <= 1e-8 + 1e-8 * r.objective);
  // any other feasible point: z + null-space direction
  std::mt19937_64 gen(3);
  std::normal_distribution<double> g;
  for (int k = 0; k < 50; ++k) {
    VectorXd d(60);
    for (auto& v : d) v = g(gen);
    d -= linear_least_norm(in.a, in.a * d);
    const VectorXd alt = r.z + 0.1 * d;
    CHECK(alt.lpNorm<1>() >= r.objective - 1e-7);
  }
  CHECK(in.x0.lpNorm<1>() >= r.objective - 1e-7);
}

TEST_CASE("basis pursuit equivariance") {
  const auto in = gaussian_instance(30, 90, 6, 5);
  const auto base = solve_bp(in.a, in.y);
  REQUIRE(base.converged);

  SUBCASE("column permutation permutes the solution") {
    std::vector<Eigen::Index> perm(90);
    for (Eigen::Index i = 0; i < 90; ++i) perm[i] = (7 * i + 3) % 90;
    MatrixXd ap(30, 90);
    for (Eigen::Index i = 0; i < 90; ++i) ap.col(i) = in.a.col(perm[i]);
    const auto r = solve_bp(ap, in.y);
    REQUIRE(r.converged);
    for (Eigen::Index i = 0; i < 90; ++i) CHECK(std::abs(r.z[i] - base.z[perm[i]]) <= 1e-6);
  }
  SUBCASE("scaling y scales z") {
    const auto r = solve_bp(in.a, 3.0 * in.y);
    REQUIRE(r.converged);
    CHECK((r.z - 3.0 * base.z).norm() <= 1e-6);
  }
}

TEST_CASE("basis pursuit denoising small examples") {
  const MatrixXd a = MatrixXd::Identity(2, 2);
  SUBCASE("soft threshold") {
    const VectorXd y = (VectorXd(2) << 3, 0).finished();
    const auto r = solve_bpdn(a, y, 1.0);
    CHECK(r.converged);
    CHECK(std::abs(r.z[0] - 2.0) <= 1e-10);
    CHECK(r.z[1] == 0.0);
    CHECK(r.residual_norm == doctest::Approx(1.0).epsilon(1e-12));
    check_certificate(a, r, 1.0);
  }
  SUBCASE("measurements inside the noise ball decode to zero") {
    const VectorXd y = (VectorXd(2) << 0.6, 0.8).finished();
    const auto r = solve_bpdn(a, y, 1.0);
    CHECK(r.converged);
    CHECK(r.z.isZero());
    CHECK(r.objective == 0.0);
  }
  SUBCASE("two active coordinates") {
    // min |z1|+|z2| s.t. ||z - (3,2)|| <= 1: z = (3,2) - (1,1)/sqrt2
    const VectorXd y = (VectorXd(2) << 3, 2).finished();
    const auto r = solve_bpdn(a, y, 1.0);
    CHECK(r.converged);
    CHECK(std::abs(r.z[0] - (3.0 - std::sqrt(0.5))) <= 1e-10);
    CHECK(std::abs(r.z[1] - (2.0 - std::sqrt(0.5))) <= 1e-10);
  }
  CHECK_THROWS_AS(solve_bpdn(a, VectorXd::Ones(2), 0.0), ParamError);
  CHECK_THROWS_AS(solve_bpdn(a, VectorXd::Ones(3), 0.5), DimensionError);
}

TEST_CASE("basis pursuit denoising on random instances") {
  for (int t = 0; t < 30; ++t) {
    const auto in = gaussian_instance(40, 120, 4, 500 + t);
    std::mt19937_64 gen(t);
    std::normal_distribution<double> g;
    VectorXd w(40);
    for (auto& v : w) v = g(gen);
    const double eta = 0.05;
    const VectorXd y = in.y + eta * w / w.norm();
    const auto r = solve_bpdn(in.a, y, eta);
    CHECK(r.converged);
    check_certificate(in.a, r, eta);
    CHECK(r.residual_norm == doctest::Approx(eta).epsilon(1e-8));
    // x0 is feasible, so it cannot beat the optimum
    CHECK(in.x0.lpNorm<1>() >= r.objective - 1e-8);
    CHECK((r.z - in.x0).norm() <= 10.0 * eta);
  }
}

TEST_CASE("denoising with tiny eta approaches basis pursuit") {
  const auto in = gaussian_instance(30, 80, 5, 42);
  const auto bp = solve_bp(in.a, in.y);
  const auto dn = solve_bpdn(in.a, in.y, 1e-6);
  REQUIRE(bp.converged);
  REQUIRE(dn.converged);
  CHECK((bp.z - dn.z).norm() <= 1e-4);
  CHECK(std::abs(bp.objective - dn.objective) <= 1e-4);
}

TEST_CASE("decode dispatches on eta") {
  const MatrixXd a = MatrixXd::Identity(2, 2);
  const VectorXd y = (VectorXd(2) << 3, 0).finished();
  CHECK(decode({a, y, 0.0}).objective == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(decode({a, y, 1.0}).objective == doctest::Approx(2.0).epsilon(1e-10));
  CHECK_THROWS_AS(decode({a, y, -1.0}), ParamError);
}

TEST_CASE("linear_least_norm") {
  const MatrixXd a = (MatrixXd(1, 2) << 1, 2).finished();
  const VectorXd u = linear_least_norm(a, VectorXd::Constant(1, 2.0));
  CHECK(u[0] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(u[1] == doctest::Approx(0.8).epsilon(1e-14));

  const auto in = gaussian_instance(25, 70, 3, 9);
  const VectorXd w = VectorXd::LinSpaced(25, -1.0, 2.0);
  const VectorXd v = linear_least_norm(in.a, w);
  CHECK((in.a * v - w).norm() <= 1e-10 * (1.0 + w.norm()));
  // minimum norm: v lies in the row space of A
  const VectorXd coeffs = (in.a * in.a.transpose()).ldlt().solve(in.a * v);
  CHECK((in.a.transpose() * coeffs - v).norm() <= 1e-10);
}
