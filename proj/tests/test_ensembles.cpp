#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "qpcs/ensembles.hpp"
#include "qpcs/errors.hpp"

using namespace qpcs;

TEST_CASE("sample_matrix is reproducible from its provenance") {
  const auto g = DistributionSpec::gaussian();
  const auto a = sample_matrix(g, 2, 3, false, 7);
  const auto b = sample_matrix(g, 2, 3, false, 7);
  CHECK(a.entries == b.entries);
  CHECK(a.seed == 7);
  const auto c = sample_matrix(g, 2, 3, false, 8);
  CHECK(a.entries != c.entries);
}

TEST_CASE("sample_matrix entries use per-entry counters") {
  // The top-left block of a wider matrix differs (counter j*N+i depends on N),
  // but any single entry can be regenerated from its counter alone.
  const auto d = DistributionSpec::student_t(5).normalized();
  const auto a = sample_matrix(d, 4, 9, false, 31);
  SplitMix64 rng(derive_seed(31, 2 * 9 + 5));
  CHECK(a.entries(2, 5) == sample(d, rng));
}

TEST_CASE("row-scaled rademacher entries are +-1/sqrt(m)") {
  const auto a = sample_matrix(DistributionSpec::rademacher(), 4, 10, true, 1);
  CHECK(a.row_scaled);
  for (Eigen::Index i = 0; i < a.entries.size(); ++i) {
    CHECK(std::abs(a.entries.data()[i]) == 0.5);
  }
}

TEST_CASE("sample_matrix shape checks") {
  CHECK_THROWS_AS(sample_matrix(DistributionSpec::gaussian(), 5, 4, false, 0), DimensionError);
  CHECK_THROWS_AS(sample_matrix(DistributionSpec::gaussian(), 0, 4, false, 0), DimensionError);
}

TEST_CASE("gaussian ensemble moments") {
  const auto a = sample_matrix(DistributionSpec::gaussian(), 100, 400, false, 2024);
  const double mean = a.entries.mean();
  const double var = (a.entries.array() - mean).square().mean();
  CHECK(var >= 0.97);
  CHECK(var <= 1.03);

  const auto scaled = sample_matrix(DistributionSpec::gaussian(), 100, 400, true, 2024);
  const double col_sq = scaled.entries.colwise().squaredNorm().mean();
  CHECK(col_sq >= 0.9);
  CHECK(col_sq <= 1.1);
}

TEST_CASE("sample_sparse_vector") {
  SUBCASE("full support") {
    const auto x = sample_sparse_vector(10, 10, 3);
    CHECK(x.support.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(x.support[i] == i);
    CHECK(std::abs(x.x0.norm() - 1.0) <= 1e-12);
  }
  SUBCASE("paper scale") {
    const auto x = sample_sparse_vector(5000, 10, 4);
    CHECK(x.s == 10);
    int nnz = 0;
    for (Eigen::Index i = 0; i < x.x0.size(); ++i) nnz += x.x0[i] != 0.0;
    CHECK(nnz == 10);
    for (auto idx : x.support) CHECK(x.x0[idx] != 0.0);
    CHECK(std::abs(x.x0.norm() - 1.0) <= 1e-12);
  }
  SUBCASE("s = 1 gives a signed basis vector") {
    const auto x = sample_sparse_vector(20, 1, 5);
    CHECK(std::abs(x.x0[x.support[0]]) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(x.x0.cwiseAbs().sum() == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("support is roughly uniform") {
    std::vector<int> hits(10, 0);
    for (int t = 0; t < 5000; ++t) {
      for (auto idx : sample_sparse_vector(10, 3, t).support) ++hits[idx];
    }
    // expected 1500 per coordinate, binomial sd about 32
    for (int h : hits) CHECK(std::abs(h - 1500) < 200);
  }
  CHECK_THROWS_AS(sample_sparse_vector(5, 6, 0), DimensionError);
  CHECK_THROWS_AS(sample_sparse_vector(5, 0, 0), DimensionError);
}

TEST_CASE("spherical noise") {
  const auto w = sample_spherical_noise(3, 0.01, 9);
  CHECK(std::abs(w.norm() - 0.01) <= 1e-14);
  const auto w1 = sample_spherical_noise(1, 0.01, 9);
  CHECK(std::abs(std::abs(w1[0]) - 0.01) <= 1e-17);
  const auto a = sample_spherical_noise(5, 0.01, 1);
  const auto b = sample_spherical_noise(5, 0.01, 2);
  CHECK(std::abs(a.dot(b)) / 1e-4 < 0.999);
  CHECK_THROWS_AS(sample_spherical_noise(3, 0.0, 1), ParamError);
}

TEST_CASE("heavy-tailed psi noise concentrates on few coordinates") {
  int spiky = 0;
  int flat = 0;
  for (int t = 0; t < 200; ++t) {
    const auto w = sample_heavy_noise(500, 0.01, 0.2, 100 + t);
    CHECK(std::abs(w.norm() - 0.01) <= 1e-14);
    if (w.cwiseAbs().maxCoeff() / w.norm() > 0.5) ++spiky;
    const auto g = sample_heavy_noise(500, 0.01, 2.0, 100 + t);
    if (g.cwiseAbs().maxCoeff() / g.norm() < 0.5) ++flat;
  }
  CHECK(spiky >= 180);
  CHECK(flat >= 180);
  const auto w1 = sample_heavy_noise(1, 0.01, 0.2, 3);
  CHECK(std::abs(std::abs(w1[0]) - 0.01) <= 1e-17);
}

TEST_CASE("matrix file round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "qpcs_test_io";
  std::filesystem::create_directories(dir);
  const auto a = sample_matrix(DistributionSpec::gaussian(), 3, 5, true, 77).entries;
  write_matrix(dir / "a.bin", a);
  CHECK(std::filesystem::file_size(dir / "a.bin") == 16 + 8 * 15);
  CHECK(read_matrix(dir / "a.bin") == a);

  const Eigen::VectorXd v = a.row(1).transpose();
  write_vector(dir / "v.txt", v);
  CHECK(read_vector(dir / "v.txt") == v);

  // header advertises more data than the file holds
  {
    std::ofstream bad(dir / "bad.bin", std::ios::binary);
    const std::uint64_t h[2] = {4, 4};
    bad.write(reinterpret_cast<const char*>(h), sizeof(h));
  }
  CHECK_THROWS_AS(read_matrix(dir / "bad.bin"), Error);
  CHECK_THROWS_AS(read_matrix(dir / "missing.bin"), Error);
  std::filesystem::remove_all(dir);
}
