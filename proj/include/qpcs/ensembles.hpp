#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "qpcs/distributions.hpp"

namespace qpcs {

/// An m x N matrix with i.i.d. entries and the provenance needed to
/// regenerate it: (dist, seed, row_scaled) reproduces `entries` bit for bit.
struct MeasurementMatrix {
  Eigen::MatrixXd entries;
  DistributionSpec dist = DistributionSpec::gaussian();
  bool row_scaled = false;  // entries carry the 1/sqrt(m) factor
  std::uint64_t seed = 0;

  Eigen::Index m() const { return entries.rows(); }
  Eigen::Index n() const { return entries.cols(); }
};

struct PlantedSignal {
  Eigen::VectorXd x0;
  std::vector<Eigen::Index> support;  // sorted ascending
  int s = 0;
};

/// Entry (j, i) is drawn from the sub-stream j*N + i of `seed`, so any block of
/// the matrix can be regenerated independently of traversal order.
MeasurementMatrix sample_matrix(const DistributionSpec& dist, Eigen::Index m, Eigen::Index n,
                                bool row_scaled, std::uint64_t seed);

/// Uniformly random support of size s (partial Fisher-Yates), values uniform on
/// the unit sphere of the support coordinates.
PlantedSignal sample_sparse_vector(Eigen::Index n, int s, std::uint64_t seed);

/// Uniform on the sphere of the given radius in R^m.
Eigen::VectorXd sample_spherical_noise(Eigen::Index m, double radius, std::uint64_t seed);

/// radius * w / ||w||_2 with i.i.d. psi_alpha entries w_i (unnormalized law).
Eigen::VectorXd sample_heavy_noise(Eigen::Index m, double radius, double alpha,
                                   std::uint64_t seed);

/// Standard normal vector of length n drawn from sub-streams of `seed`.
Eigen::VectorXd gaussian_vector(Eigen::Index n, std::uint64_t seed);

// Binary layout: little-endian uint64 m, uint64 N, then m*N float64 row-major.
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& a);
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

// One value per line.
void write_vector(const std::filesystem::path& path, const Eigen::VectorXd& v);
Eigen::VectorXd read_vector(const std::filesystem::path& path);

}  // namespace qpcs
