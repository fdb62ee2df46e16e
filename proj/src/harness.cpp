#include "qpcs/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "qpcs/ensembles.hpp"
#include "qpcs/errors.hpp"
#include "qpcs/rng.hpp"
#include "qpcs/text.hpp"

namespace qpcs {

namespace {

std::string call_name(const std::string& name, const std::vector<double>& args) {
  std::string out = name + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += format_double(args[i]);
  }
  return out + ")";
}

double parse_arg(const CallSyntax& call, std::size_t i, std::string_view what) {
  if (i >= call.args.size()) throw ConfigError(std::string(what) + ": missing argument");
  return parse_double(call.args[i]);
}

bool parse_bool(std::string_view text) {
  const std::string_view t = trim(text);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ConfigError("expected a boolean, got '" + std::string(t) + "'");
}

int to_int(long long v, std::string_view key) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(std::string(key) + " is out of range");
  }
  return static_cast<int>(v);
}

}  // namespace

NoiseModel NoiseModel::spherical(double radius) {
  if (!(radius >= 0.0)) throw ConfigError("noise radius must be >= 0");
  return {Kind::Spherical, radius, 0.0};
}

NoiseModel NoiseModel::psi(double alpha, double radius) {
  if (!(alpha > 0.0)) throw ConfigError("psi noise needs alpha > 0");
  if (!(radius >= 0.0)) throw ConfigError("noise radius must be >= 0");
  return {Kind::Psi, radius, alpha};
}

NoiseModel NoiseModel::parse(std::string_view text) {
  const CallSyntax call = parse_call(text);
  if (call.name == "spherical" && call.args.size() == 1) {
    return spherical(parse_arg(call, 0, "spherical"));
  }
  if (call.name == "psi" && call.args.size() == 2) {
    return psi(parse_arg(call, 0, "psi"), parse_arg(call, 1, "psi"));
  }
  throw ConfigError("unknown noise model '" + std::string(text) +
                    "'; expected spherical(radius) or psi(alpha, radius)");
}

std::string NoiseModel::name() const {
  return kind == Kind::Spherical ? call_name("spherical", {radius})
                                 : call_name("psi", {alpha, radius});
}

DecoderSpec DecoderSpec::bpdn(double eta_factor) {
  if (!(eta_factor >= 0.0)) throw ConfigError("eta_factor must be >= 0");
  return {Kind::BPDN, eta_factor};
}

DecoderSpec DecoderSpec::parse(std::string_view text) {
  const CallSyntax call = parse_call(text);
  if (call.name == "bp" && call.args.empty()) return bp();
  if (call.name == "bpdn" && call.args.size() == 1) return bpdn(parse_arg(call, 0, "bpdn"));
  throw ConfigError("unknown decoder '" + std::string(text) + "'; expected bp or bpdn(factor)");
}

std::string DecoderSpec::name() const {
  return kind == Kind::BP ? "bp" : call_name("bpdn", {eta_factor});
}

std::string DecoderSpec::kind_name() const { return kind == Kind::BP ? "bp" : "bpdn"; }

ExperimentConfig ExperimentConfig::desk() {
  ExperimentConfig c;
  c.N = 500;
  c.s = 5;
  for (int m = 25; m <= 350; m += 25) c.m_list.push_back(m);
  const int dof = static_cast<int>(std::ceil(std::log(static_cast<double>(c.N))));
  c.distributions = {DistributionSpec::gaussian(), DistributionSpec::rademacher(),
                     DistributionSpec::student_t(dof)};
  c.noise = NoiseModel::spherical(1e-2);
  c.decoders = {DecoderSpec::bp(), DecoderSpec::bpdn(1.0), DecoderSpec::bpdn(2.0),
                DecoderSpec::bpdn(0.5)};
  c.trials = 100;
  return c;
}

ExperimentConfig ExperimentConfig::paper() {
  ExperimentConfig c = desk();
  c.N = 5000;
  c.s = 10;
  c.m_list.clear();
  for (int k = 1; k <= 14; ++k) c.m_list.push_back((k * c.N + 19) / 20);
  const int dof = static_cast<int>(std::ceil(std::log(static_cast<double>(c.N))));
  c.distributions = {DistributionSpec::gaussian(), DistributionSpec::rademacher(),
                     DistributionSpec::student_t(dof)};
  c.trials = 500;
  return c;
}

ExperimentConfig ExperimentConfig::preset(std::string_view name) {
  if (name == "desk") return desk();
  if (name == "paper") return paper();
  throw ConfigError("unknown preset '" + std::string(name) + "'; expected desk or paper");
}

void ExperimentConfig::validate() const {
  if (N < 1) throw ConfigError("N must be >= 1");
  if (s < 1 || s > N) throw ConfigError("s must satisfy 1 <= s <= N");
  if (m_list.empty()) throw ConfigError("m_list is empty");
  for (int m : m_list) {
    if (!(s < m && m <= N)) {
      throw ConfigError("m = " + std::to_string(m) + " violates s < m <= N");
    }
  }
  if (distributions.empty()) throw ConfigError("distributions is empty");
  for (const auto& d : distributions) {
    if (d.name().find(',') != std::string::npos) {
      throw ConfigError("distribution name '" + d.name() + "' cannot be written to CSV");
    }
  }
  if (decoders.empty()) throw ConfigError("decoders is empty");
  for (const auto& d : decoders) {
    if (!(d.eta_factor >= 0.0)) throw ConfigError("eta_factor must be >= 0");
  }
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (!(solver.tol_abs > 0.0) || !(solver.tol_rel >= 0.0) || solver.max_iters < 1) {
    throw ConfigError("solver tolerances must be positive");
  }
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  ExperimentConfig c = std::move(base);
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    try {
      if (key == "N") {
        c.N = to_int(parse_int(value), key);
      } else if (key == "s") {
        c.s = to_int(parse_int(value), key);
      } else if (key == "m_list") {
        c.m_list.clear();
        for (const auto& item : split_top_level(value, ',')) {
          c.m_list.push_back(to_int(parse_int(item), key));
        }
      } else if (key == "distributions") {
        c.distributions.clear();
        for (const auto& item : split_top_level(value, ',')) {
          c.distributions.push_back(DistributionSpec::parse(item));
        }
      } else if (key == "noise") {
        c.noise = NoiseModel::parse(value);
      } else if (key == "decoders") {
        c.decoders.clear();
        for (const auto& item : split_top_level(value, ',')) {
          c.decoders.push_back(DecoderSpec::parse(item));
        }
      } else if (key == "trials") {
        c.trials = to_int(parse_int(value), key);
      } else if (key == "master_seed") {
        const long long v = parse_int(value);
        if (v < 0) throw ConfigError("master_seed must be >= 0");
        c.master_seed = static_cast<std::uint64_t>(v);
      } else if (key == "tol_abs") {
        c.solver.tol_abs = parse_double(value);
      } else if (key == "tol_rel") {
        c.solver.tol_rel = parse_double(value);
      } else if (key == "max_iters") {
        c.solver.max_iters = to_int(parse_int(value), key);
      } else if (key == "record_wall_time") {
        c.record_wall_time = parse_bool(value);
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const Error& e) {
      throw ConfigError("line " + std::to_string(line_no) + " (" + key + "): " + e.what());
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str(), std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string config_to_text(const ExperimentConfig& c) {
  auto join = [](const auto& items, auto&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ",";
      out += fmt(items[i]);
    }
    return out;
  };
  std::ostringstream out;
  out << "N = " << c.N << "\n";
  out << "s = " << c.s << "\n";
  out << "m_list = " << join(c.m_list, [](int m) { return std::to_string(m); }) << "\n";
  out << "distributions = "
      << join(c.distributions, [](const DistributionSpec& d) { return d.name(); }) << "\n";
  out << "noise = " << c.noise.name() << "\n";
  out << "decoders = " << join(c.decoders, [](const DecoderSpec& d) { return d.name(); }) << "\n";
  out << "trials = " << c.trials << "\n";
  out << "master_seed = " << c.master_seed << "\n";
  out << "tol_abs = " << format_double(c.solver.tol_abs) << "\n";
  out << "tol_rel = " << format_double(c.solver.tol_rel) << "\n";
  out << "max_iters = " << c.solver.max_iters << "\n";
  out << "record_wall_time = " << (c.record_wall_time ? "true" : "false") << "\n";
  return out.str();
}

std::uint64_t cell_seed(std::uint64_t master_seed, const std::string& distribution, int m,
                        int trial) {
  std::uint64_t h = derive_seed(master_seed, hash_string(distribution));
  h = derive_seed(h, static_cast<std::uint64_t>(m));
  return derive_seed(h, static_cast<std::uint64_t>(trial));
}

namespace {

struct Cell {
  std::size_t dist = 0;
  int m = 0;
  int trial = 0;
};

Eigen::VectorXd draw_noise(const NoiseModel& noise, Eigen::Index m, std::uint64_t seed) {
  if (noise.radius == 0.0) return Eigen::VectorXd::Zero(m);
  if (noise.kind == NoiseModel::Kind::Spherical) return sample_spherical_noise(m, noise.radius, seed);
  return sample_heavy_noise(m, noise.radius, noise.alpha, seed);
}

std::vector<TrialRecord> run_cell(const ExperimentConfig& config, const Cell& cell) {
  const DistributionSpec& dist = config.distributions[cell.dist];
  const std::string dist_name = dist.name();
  const std::uint64_t seed = cell_seed(config.master_seed, dist_name, cell.m, cell.trial);

  const MeasurementMatrix a =
      sample_matrix(dist.normalized(), cell.m, config.N, true, derive_seed(seed, 1));
  const PlantedSignal x = sample_sparse_vector(config.N, config.s, derive_seed(seed, 2));
  const Eigen::VectorXd w = draw_noise(config.noise, cell.m, derive_seed(seed, 3));
  const Eigen::VectorXd y = a.entries * x.x0 + w;
  const double w_norm = w.norm();

  std::vector<TrialRecord> out;
  for (const DecoderSpec& dec : config.decoders) {
    TrialRecord rec;
    rec.distribution = dist_name;
    rec.m = cell.m;
    rec.decoder = dec.kind_name();
    rec.eta_factor = dec.kind == DecoderSpec::Kind::BP ? 0.0 : dec.eta_factor;
    rec.trial = cell.trial;
    rec.seed = seed;
    const auto start = std::chrono::steady_clock::now();
    try {
      const double eta = dec.kind == DecoderSpec::Kind::BP ? 0.0 : dec.eta_factor * w_norm;
      const DecodeResult r = decode({a.entries, y, eta, config.solver});
      rec.l2_error = (r.z - x.x0).norm();
      rec.l1_error = (r.z - x.x0).lpNorm<1>();
      rec.residual = r.residual_norm;
      rec.converged = r.converged;
    } catch (const Error&) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      rec.l2_error = rec.l1_error = rec.residual = nan;
      rec.converged = false;
    }
    if (config.record_wall_time) {
      rec.wall_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

std::vector<TrialRecord> run_experiment(const ExperimentConfig& config, int threads) {
  config.validate();
  std::vector<Cell> cells;
  for (std::size_t d = 0; d < config.distributions.size(); ++d) {
    for (int m : config.m_list) {
      for (int t = 0; t < config.trials; ++t) cells.push_back({d, m, t});
    }
  }

  std::vector<std::vector<TrialRecord>> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        results[i] = run_cell(config, cells[i]);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cells.size();
      }
    }
  };
  const int n_threads = std::max(1, threads);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::size_t failed_cells = 0;
  std::vector<TrialRecord> records;
  records.reserve(cells.size() * config.decoders.size());
  for (auto& cell : results) {
    bool ok = true;
    for (auto& rec : cell) {
      ok = ok && rec.converged;
      records.push_back(std::move(rec));
    }
    failed_cells += !ok;
  }
  if (20 * failed_cells > cells.size()) {
    throw ExperimentAborted(std::to_string(failed_cells) + " of " + std::to_string(cells.size()) +
                            " cells had a solve that did not converge (limit 5%)");
  }
  return records;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  using Key = std::tuple<std::string, int, std::string, double>;
  std::map<Key, std::size_t> index;
  std::vector<SummaryRow> rows;
  std::vector<std::vector<double>> samples;
  for (const auto& rec : records) {
    const Key key{rec.distribution, rec.m, rec.decoder, rec.eta_factor};
    auto [it, inserted] = index.try_emplace(key, rows.size());
    if (inserted) {
      SummaryRow row;
      row.distribution = rec.distribution;
      row.m = rec.m;
      row.decoder = rec.decoder;
      row.eta_factor = rec.eta_factor;
      rows.push_back(row);
      samples.emplace_back();
    }
    SummaryRow& row = rows[it->second];
    ++row.total;
    if (rec.converged) {
      ++row.converged;
      samples[it->second].push_back(rec.l2_error);
    }
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& xs = samples[k];
    if (xs.empty()) {
      throw EmptyCell("no converged trials for " + rows[k].distribution + ", m = " +
                      std::to_string(rows[k].m) + ", decoder " + rows[k].decoder);
    }
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double n = static_cast<double>(xs.size());
    rows[k].mean_l2 = sum / n;
    if (xs.size() > 1) {
      double ss = 0.0;
      for (double x : xs) ss += (x - rows[k].mean_l2) * (x - rows[k].mean_l2);
      rows[k].stderr_l2 = std::sqrt(ss / (n - 1.0) / n);
    }
  }
  return rows;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << kTrialsHeader << "\n";
  for (const auto& r : records) {
    out << r.distribution << ',' << r.m << ',' << r.decoder << ',' << format_double(r.eta_factor)
        << ',' << r.trial << ',' << r.seed << ',' << format_double(r.l2_error) << ','
        << format_double(r.l1_error) << ',' << format_double(r.residual) << ','
        << (r.converged ? 1 : 0) << ',' << format_double(r.wall_time) << "\n";
  }
}

std::vector<TrialRecord> parse_trials_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kTrialsHeader) {
    throw ConfigError("trials.csv: unexpected header");
  }
  std::vector<TrialRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 11) {
      throw ConfigError("trials.csv line " + std::to_string(line_no) + ": expected 11 fields");
    }
    try {
      TrialRecord r;
      r.distribution = f[0];
      r.m = to_int(parse_int(f[1]), "m");
      r.decoder = f[2];
      r.eta_factor = parse_double(f[3]);
      r.trial = to_int(parse_int(f[4]), "trial");
      r.seed = std::stoull(f[5]);
      r.l2_error = parse_double(f[6]);
      r.l1_error = parse_double(f[7]);
      r.residual = parse_double(f[8]);
      r.converged = parse_bool(f[9]);
      r.wall_time = parse_double(f[10]);
      records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ConfigError("trials.csv line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << kSummaryHeader << "\n";
  for (const auto& r : rows) {
    out << r.distribution << ',' << r.m << ',' << r.decoder << ',' << format_double(r.eta_factor)
        << ',' << format_double(r.mean_l2) << ',' << format_double(r.stderr_l2) << ','
        << r.converged << ',' << r.total << "\n";
  }
}

void write_plot_script(std::ostream& out, const std::vector<SummaryRow>& rows) {
  // One inline data block per (distribution, decoder) series, so the script
  // does not depend on the working directory.
  std::vector<std::string> titles;
  std::map<std::string, std::vector<const SummaryRow*>> series;
  for (const auto& r : rows) {
    std::string title = r.distribution + " " + r.decoder;
    if (r.decoder != "bp") title += "(" + format_double(r.eta_factor) + ")";
    auto [it, inserted] = series.try_emplace(title);
    if (inserted) titles.push_back(title);
    it->second.push_back(&r);
  }
  out << "# reconstruction error vs number of measurements\n";
  out << "set terminal pngcairo size 900,600\n";
  out << "set output 'errors.png'\n";
  out << "set xlabel 'm'\n";
  out << "set ylabel 'mean ||x_hat - x_0||_2'\n";
  out << "set logscale y\n";
  out << "set key outside right\n";
  for (std::size_t k = 0; k < titles.size(); ++k) {
    out << "$s" << k << " << EOD\n";
    for (const SummaryRow* r : series[titles[k]]) {
      out << r->m << ' ' << format_double(r->mean_l2) << ' ' << format_double(r->stderr_l2)
          << "\n";
    }
    out << "EOD\n";
  }
  if (titles.empty()) return;
  out << "plot \\\n";
  for (std::size_t k = 0; k < titles.size(); ++k) {
    out << "  $s" << k << " using 1:2:3 with yerrorlines title '" << titles[k] << "'"
        << (k + 1 < titles.size() ? ", \\\n" : "\n");
  }
}

void emit_outputs(const std::vector<TrialRecord>& records, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto rows = summarize(records);
  auto write = [&](const char* name, auto&& body) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    body(out);
    out.flush();
    if (!out) throw Error("write failed for " + path.string());
  };
  write("trials.csv", [&](std::ostream& o) { write_trials_csv(o, records); });
  write("summary.csv", [&](std::ostream& o) { write_summary_csv(o, rows); });
  write("plot.gnuplot", [&](std::ostream& o) { write_plot_script(o, rows); });
}

}  // namespace qpcs
