#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qpcs/distributions.hpp"
#include "qpcs/ensembles.hpp"
#include "qpcs/errors.hpp"
#include "qpcs/geometry.hpp"
#include "qpcs/harness.hpp"
#include "qpcs/norms.hpp"
#include "qpcs/rng.hpp"
#include "qpcs/solvers.hpp"
#include "qpcs/text.hpp"

using namespace qpcs;

namespace {

struct SampleArgs {
  std::string dist = "gaussian";
  int m = 0;
  int n = 0;
  std::uint64_t seed = 0;
  bool row_scaled = false;
  bool raw = false;
  std::string out;
};

struct DecodeArgs {
  std::string matrix;
  std::string y;
  double eta = 0.0;
  SolverOptions solver;
};

struct EstimateArgs {
  std::string dist = "gaussian";
  int m = 0;
  int n = 0;
  int directions = 100;
  std::string norm = "l2";
  std::optional<double> alpha;
  std::uint64_t seed = 0;
};

struct ExperimentArgs {
  std::string config;
  std::string out;
  std::string preset;
  int threads = 1;
  std::optional<std::uint64_t> seed;
};

int run_sample(const SampleArgs& args) {
  auto dist = DistributionSpec::parse(args.dist);
  if (!args.raw) dist = dist.normalized();
  const auto a = sample_matrix(dist, args.m, args.n, args.row_scaled, args.seed);
  write_matrix(args.out, a.entries);
  std::cerr << "wrote " << a.m() << "x" << a.n() << " " << dist.name() << " matrix to " << args.out
            << "\n";
  return 0;
}

int run_decode(const DecodeArgs& args) {
  const Eigen::MatrixXd a = read_matrix(args.matrix);
  const Eigen::VectorXd y = read_vector(args.y);
  const auto r = decode({a, y, args.eta, args.solver});
  for (Eigen::Index i = 0; i < r.z.size(); ++i) std::cout << format_double(r.z[i]) << "\n";
  std::cerr << "objective=" << format_double(r.objective)
            << " residual=" << format_double(r.residual_norm) << " iters=" << r.iters
            << " gap=" << format_double(r.certificate_gap)
            << " converged=" << (r.converged ? "true" : "false") << "\n";
  return r.converged ? 0 : 3;
}

int run_estimate(const EstimateArgs& args) {
  const auto dist = DistributionSpec::parse(args.dist).normalized();
  if (args.m <= 0 || args.n <= 0 || args.m > args.n) throw DimensionError("need 0 < m <= N");
  NormKind kind;
  if (args.norm == "clipped") {
    // default alpha: the clipping level sqrt(log(eN/m)) of the quotient theorem
    kind = NormKind::clipped(
        args.alpha.value_or(std::sqrt(std::log(std::exp(1.0) * args.n / args.m))));
  } else if (args.norm != "l2") {
    throw ParamError("--norm must be l2 or clipped");
  }
  const auto a = sample_matrix(dist, args.m, args.n, true, derive_seed(args.seed, 1));
  const auto est = quotient_estimate(a, kind, args.directions, derive_seed(args.seed, 2));

  std::cout << "kind,index,solved,ratio,certificate\n";
  for (const auto& p : est.per_direction) {
    std::cout << probe_kind_name(p.kind) << "," << p.index << "," << (p.solved ? 1 : 0) << ","
              << format_double(p.ratio) << "," << format_double(p.certificate) << "\n";
  }
  std::cout << "# dist=" << dist.name() << " m=" << args.m << " N=" << args.n
            << " norm=" << kind.name() << " s_star=" << format_double(est.s_star)
            << " directions_probed=" << est.directions_probed << " failed=" << est.failed
            << " d_hat=" << format_double(est.d_hat)
            << " certificate_lower=" << format_double(est.certificate_lower)
            << " (lower bounds of the quotient constant)\n";
  return 0;
}

int run_experiment_cmd(const ExperimentArgs& args) {
  ExperimentConfig cfg = args.preset.empty() ? ExperimentConfig{} : ExperimentConfig::preset(args.preset);
  if (!args.config.empty()) {
    cfg = load_config(args.config, cfg);
  } else if (args.preset.empty()) {
    throw ConfigError("experiment needs --config or --preset");
  }
  if (args.seed) cfg.master_seed = *args.seed;
  cfg.validate();
  const auto records = run_experiment(cfg, args.threads);
  emit_outputs(records, args.out);
  std::cerr << "wrote " << records.size() << " trial records to " << args.out << "\n";
  return 0;
}

void add_solver_flags(CLI::App* cmd, SolverOptions& solver) {
  cmd->add_option("--tol-abs", solver.tol_abs, "absolute duality-gap tolerance");
  cmd->add_option("--tol-rel", solver.tol_rel, "relative duality-gap tolerance");
  cmd->add_option("--max-iters", solver.max_iters, "iteration cap");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qpcs: l1-quotient property and noise-blind compressive sensing"};
  app.require_subcommand(1);

  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample-matrix", "draw a random measurement matrix");
  sample->add_option("--dist", sample_args.dist, "distribution, e.g. student_t(7)");
  sample->add_option("--m", sample_args.m, "rows")->required();
  sample->add_option("--N", sample_args.n, "columns")->required();
  sample->add_option("--seed", sample_args.seed, "master seed");
  sample->add_flag("--row-scaled", sample_args.row_scaled, "divide entries by sqrt(m)");
  sample->add_flag("--raw", sample_args.raw, "keep the unnormalized law");
  sample->add_option("--out", sample_args.out, "binary matrix file")->required();

  DecodeArgs decode_args;
  auto* dec = app.add_subcommand("decode", "l1 decoding: BP for eta = 0, BPDN otherwise");
  dec->add_option("--matrix", decode_args.matrix, "binary matrix file")->required();
  dec->add_option("--y", decode_args.y, "measurements, one value per line")->required();
  dec->add_option("--eta", decode_args.eta, "noise level")->required();
  add_solver_flags(dec, decode_args.solver);

  EstimateArgs est_args;
  auto* est = app.add_subcommand("qp-estimate", "probe-based lower bounds of the quotient constant");
  est->add_option("--dist", est_args.dist, "distribution")->required();
  est->add_option("--m", est_args.m, "rows")->required();
  est->add_option("--N", est_args.n, "columns")->required();
  est->add_option("--directions", est_args.directions, "sphere and spike probes per family");
  est->add_option("--norm", est_args.norm, "l2 or clipped")->check(CLI::IsMember({"l2", "clipped"}));
  est->add_option("--alpha", est_args.alpha, "clipping level (default sqrt(log(eN/m)))");
  est->add_option("--seed", est_args.seed, "master seed");

  ExperimentArgs exp_args;
  auto* exp = app.add_subcommand("experiment", "robustness sweep with CSV and gnuplot output");
  exp->add_option("--config", exp_args.config, "key = value config file");
  exp->add_option("--out", exp_args.out, "output directory")->required();
  exp->add_option("--preset", exp_args.preset, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  exp->add_option("--threads", exp_args.threads, "worker threads")->check(CLI::PositiveNumber);
  exp->add_option("--seed", exp_args.seed, "override master_seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) return run_sample(sample_args);
    if (*dec) return run_decode(decode_args);
    if (*est) return run_estimate(est_args);
    if (*exp) return run_experiment_cmd(exp_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
