#include "qpcs/ensembles.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "qpcs/errors.hpp"
#include "qpcs/text.hpp"

namespace qpcs {

MeasurementMatrix sample_matrix(const DistributionSpec& dist, Eigen::Index m, Eigen::Index n,
                                bool row_scaled, std::uint64_t seed) {
  if (m < 1 || n < 1 || m > n) {
    throw DimensionError("sample_matrix needs 1 <= m <= N, got m=" + std::to_string(m) +
                         " N=" + std::to_string(n));
  }
  MeasurementMatrix out;
  out.dist = dist;
  out.row_scaled = row_scaled;
  out.seed = seed;
  out.entries.resize(m, n);
  const double factor = row_scaled ? 1.0 / std::sqrt(static_cast<double>(m)) : 1.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(j * n + i)));
      out.entries(j, i) = sample(dist, rng) * factor;
    }
  }
  return out;
}

Eigen::VectorXd gaussian_vector(Eigen::Index n, std::uint64_t seed) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    v[i] = std::normal_distribution<double>{}(rng);
  }
  return v;
}

PlantedSignal sample_sparse_vector(Eigen::Index n, int s, std::uint64_t seed) {
  if (s < 1 || s > n) {
    throw DimensionError("sample_sparse_vector needs 1 <= s <= N, got s=" + std::to_string(s));
  }
  SplitMix64 rng(derive_seed(seed, 0));
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  for (int k = 0; k < s; ++k) {
    std::uniform_int_distribution<Eigen::Index> pick(k, n - 1);
    std::swap(perm[k], perm[pick(rng)]);
  }
  PlantedSignal out;
  out.s = s;
  out.support.assign(perm.begin(), perm.begin() + s);
  std::sort(out.support.begin(), out.support.end());

  const Eigen::VectorXd values = gaussian_vector(s, derive_seed(seed, 1));
  out.x0 = Eigen::VectorXd::Zero(n);
  const double norm = values.norm();
  for (int k = 0; k < s; ++k) out.x0[out.support[k]] = values[k] / norm;
  return out;
}

Eigen::VectorXd sample_spherical_noise(Eigen::Index m, double radius, std::uint64_t seed) {
  if (!(radius > 0.0)) throw ParamError("noise radius must be positive");
  Eigen::VectorXd w = gaussian_vector(m, seed);
  return w * (radius / w.norm());
}

Eigen::VectorXd sample_heavy_noise(Eigen::Index m, double radius, double alpha,
                                   std::uint64_t seed) {
  if (!(radius > 0.0)) throw ParamError("noise radius must be positive");
  if (!(alpha > 0.0)) throw ParamError("psi noise needs alpha > 0");
  const DistributionSpec law = DistributionSpec::psi(alpha);
  Eigen::VectorXd w(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    w[i] = sample(law, rng);
  }
  // Rescale by the largest entry first so |g|^{2/alpha} cannot overflow the norm.
  const double peak = w.cwiseAbs().maxCoeff();
  if (peak > 0.0) w /= peak;
  const double norm = w.norm();
  if (!(norm > 0.0)) {
    w.setZero();
    w[0] = radius;
    return w;
  }
  return w * (radius / norm);
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "matrix files are little-endian; add byte swapping for this platform");

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& a) {
  auto out = open_out(path, std::ios::binary | std::ios::trunc);
  const std::uint64_t header[2] = {static_cast<std::uint64_t>(a.rows()),
                                   static_cast<std::uint64_t>(a.cols())};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = a;
  out.write(reinterpret_cast<const char*>(rows.data()),
            static_cast<std::streamsize>(sizeof(double) * rows.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::uint64_t header[2] = {0, 0};
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw Error("'" + path.string() + "': truncated matrix header");
  const auto m = static_cast<Eigen::Index>(header[0]);
  const auto n = static_cast<Eigen::Index>(header[1]);
  const auto expected = std::filesystem::file_size(path);
  if (expected != sizeof(header) + sizeof(double) * header[0] * header[1]) {
    throw Error("'" + path.string() + "': size does not match " + std::to_string(m) + "x" +
                std::to_string(n) + " header");
  }
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(m, n);
  in.read(reinterpret_cast<char*>(rows.data()),
          static_cast<std::streamsize>(sizeof(double) * rows.size()));
  if (!in) throw Error("'" + path.string() + "': truncated matrix data");
  return rows;
}

void write_vector(const std::filesystem::path& path, const Eigen::VectorXd& v) {
  auto out = open_out(path, std::ios::trunc);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

Eigen::VectorXd read_vector(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in);
  std::vector<double> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    try {
      values.push_back(parse_double(text));
    } catch (const ConfigError& e) {
      throw Error("'" + path.string() + "' line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace qpcs
