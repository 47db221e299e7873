// ompcs: command-line front end.
//
//   ompcs matrix    --family zc|random2bit|file ...   build and save a sensing matrix
//   ompcs measure   --matrix A.txt --k 2 ...          draw a sparse signal and y = A x + v
//   ompcs guarantee --matrix A.txt --k 2 ...          evaluate every recovery guarantee
//   ompcs recover   --matrix A.txt --measurements y.csv --k 2
//   ompcs simulate  nmse|support --config run.cfg
//
// Exit status: 0 success, 2 usage or invalid input, 3 I/O failure,
// 4 numerical failure (rank-deficient least squares).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ompcs/cs_matrix.hpp"
#include "ompcs/guarantees.hpp"
#include "ompcs/kernels.hpp"
#include "ompcs/montecarlo.hpp"
#include "ompcs/omp.hpp"
#include "ompcs/rng.hpp"
#include "ompcs/sparse_model.hpp"
#include "ompcs/text_format.hpp"

namespace {

using namespace ompcs;

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

// Fixed default so runs without --seed stay reproducible.
constexpr std::uint64_t kDefaultSeed = 1;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot write '" + path + "'");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open '" + path + "'");
  return in;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) fail(Errc::io, "failed writing '" + path + "'");
}

std::string stats_line(const CsMatrix& a, double mu) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "mu=%.6f d_min=%.6f d_max=%.6f ratio=%.3f", mu, a.d_min(), a.d_max(),
                a.norm_ratio());
  return buf;
}

// ---------------------------------------------------------------- matrix

struct MatrixArgs {
  std::string family = "zc";
  Index n = 32;
  Index m = 20;
  std::uint64_t seed = kDefaultSeed;
  std::optional<double> target_ratio;
  unsigned bits = 2;
  Index attempts = 10000;
  std::string code_path;
  std::string out = "matrix.txt";
  std::string code_out;
};

int run_matrix(const MatrixArgs& args) {
  require(args.m < args.n, "matrix: M < N required (got M=" + std::to_string(args.m) +
                               ", N=" + std::to_string(args.n) + ")");
  const std::uint64_t shift_seed = derive_seed(args.seed, 1);
  std::optional<UnitModulusCode> code;
  std::optional<double> searched;
  bool refined = false;
  if (args.family == "zc") {
    require(!args.target_ratio, "matrix: --target-ratio only applies to --family random2bit");
    code = zadoff_chu(args.n);
  } else if (args.family == "random2bit") {
    if (args.target_ratio) {
      CodeSearchRequest req;
      req.target_ratio = *args.target_ratio;
      req.bits = args.bits;
      req.rows = args.m;
      req.cols = args.n;
      req.attempts = args.attempts;
      req.seed = derive_seed(args.seed, 2);
      auto found = search_code_by_norm_ratio(req);
      searched = found.ratio;
      refined = found.refined;
      code = std::move(found.code);
    } else {
      code = random_low_res_code(args.n, args.bits, derive_seed(args.seed, 2));
    }
  } else if (args.family == "file") {
    require(!args.code_path.empty(), "matrix: --family file needs --code <path>");
    code = load_code_file(args.code_path);
    require(code->size() == args.n, "matrix: code length does not match --N");
  } else {
    fail(Errc::invalid_argument, "matrix: unknown family '" + args.family + "'");
  }

  const CsMatrix a = build_cs_matrix(*code, args.m, shift_seed);
  const double mu = mutual_coherence(a);

  std::vector<std::string> meta = {
      "family=" + args.family,
      "N=" + std::to_string(args.n),
      "M=" + std::to_string(args.m),
      "seed=" + std::to_string(args.seed),
      "bits=" + std::to_string(args.bits),
      "attempts=" + std::to_string(args.attempts),
      "target_ratio=" + (args.target_ratio ? text::format_double(*args.target_ratio) : std::string("none")),
      "code_search=" + std::string(!searched ? "none" : refined ? "descent" : "draw"),
      "code=" + (args.code_path.empty() ? std::string("none") : args.code_path),
      "shift_convention=row m is the code rotated right by s_m",
      "stats " + stats_line(a, mu),
  };
  save_matrix_file(args.out, a.entries(), meta);
  if (!args.code_out.empty()) {
    auto out = open_out(args.code_out);
    write_code_text(out, *code, meta);
    finish(out, args.code_out);
  }
  std::cout << stats_line(a, mu);
  if (searched) std::cout << " searched_ratio=" << text::format_double(*searched) << (refined ? " (descent)" : " (draw)");
  std::cout << " -> " << args.out << '\n';
  return 0;
}

// ---------------------------------------------------------------- measure

struct MeasureArgs {
  std::string matrix;
  Index k = 2;
  double sigma = 0.0;
  std::optional<double> x_min;
  std::uint64_t seed = kDefaultSeed;
  std::string signal_out = "signal.csv";
  std::string out = "measurements.csv";
};

int run_measure(const MeasureArgs& args) {
  const CsMatrix a = normalize_frobenius(load_matrix_file(args.matrix));
  const SparseSignal x = args.x_min
                             ? sample_sparse_signal_with_floor(a.cols(), args.k, *args.x_min, derive_seed(args.seed, 1))
                             : sample_sparse_signal(a.cols(), args.k, derive_seed(args.seed, 1));
  const MeasurementSet y = measure(a, x, args.sigma, derive_seed(args.seed, 2));
  const std::vector<std::string> meta = {
      "matrix=" + args.matrix,
      "k=" + std::to_string(args.k),
      "x_min=" + (args.x_min ? text::format_double(*args.x_min) : std::string("none")),
      "master_seed=" + std::to_string(args.seed),
  };
  auto xs = open_out(args.signal_out);
  write_signal_csv(xs, x, meta);
  finish(xs, args.signal_out);
  auto ys = open_out(args.out);
  write_measurement_csv(ys, y, meta);
  finish(ys, args.out);
  std::cout << "k=" << x.sparsity() << " x_min=" << text::format_double(x.x_min())
            << " sigma=" << text::format_double(args.sigma) << " -> " << args.signal_out << ", " << args.out
            << '\n';
  return 0;
}

// ---------------------------------------------------------------- guarantee

struct GuaranteeArgs {
  std::string matrix;
  Index k = 1;
  double sigma = 0.0;
  std::optional<double> alpha;
  std::optional<double> rho_over_sigma;
  std::optional<double> x_min;
  std::optional<double> x_max;
  std::string out = "report.txt";
  std::string format = "kv";
};

int run_guarantee(const GuaranteeArgs& args) {
  require(!(args.alpha && args.rho_over_sigma), "guarantee: give --alpha or --rho-over-sigma, not both");
  const CsMatrix a = normalize_frobenius(load_matrix_file(args.matrix));
  GuaranteeInputs in;
  in.k = args.k;
  in.sigma = args.sigma;
  in.alpha = args.alpha.value_or(0.0);
  in.rho_over_sigma = args.rho_over_sigma;
  in.x_min = args.x_min;
  in.x_max = args.x_max;
  const GuaranteeReport r = full_report(a, in);

  auto out = open_out(args.out);
  if (args.format == "csv") {
    out << "# matrix=" << args.matrix << '\n' << report_to_csv(r);
  } else {
    out << "# matrix=" << args.matrix << '\n' << report_to_key_value(r);
  }
  finish(out, args.out);
  std::cout << "rho=" << text::format_double(r.rho) << " k_max=" << text::format_double(r.noiseless_k_max)
            << " support_condition="
            << (r.support_condition_holds ? (*r.support_condition_holds ? "holds" : "fails") : "n/a")
            << " mse_bound=" << (r.mse_bound ? text::format_double(*r.mse_bound) : "vacuous") << " -> "
            << args.out << '\n';
  return 0;
}

// ---------------------------------------------------------------- recover

struct RecoverArgs {
  std::string matrix;
  std::string measurements;
  Index k = 1;
  std::optional<double> residual_tol;
  std::string trace_out = "trace.csv";
  std::string estimate_out = "estimate.csv";
};

int run_recover(const RecoverArgs& args) {
  const CsMatrix a = normalize_frobenius(load_matrix_file(args.matrix));
  auto in = open_in(args.measurements);
  const MeasurementSet y = read_measurement_csv(in);
  OmpOptions opts;
  opts.residual_tolerance = args.residual_tol;
  const OmpTrace trace = omp_recover(a, y.observations, args.k, opts);
  const std::vector<std::string> meta = {
      "matrix=" + args.matrix,
      "measurements=" + args.measurements,
      "k=" + std::to_string(args.k),
      "residual_tol=" + (args.residual_tol ? text::format_double(*args.residual_tol) : std::string("none")),
  };
  auto ts = open_out(args.trace_out);
  write_trace_csv(ts, trace, meta);
  finish(ts, args.trace_out);
  auto es = open_out(args.estimate_out);
  write_estimate_csv(es, trace.estimate, trace.selected_indices, meta);
  finish(es, args.estimate_out);
  std::cout << "support=";
  for (std::size_t i = 0; i < trace.selected_indices.size(); ++i)
    std::cout << (i ? "," : "") << trace.selected_indices[i];
  std::cout << " residual=" << text::format_double(trace.residual_norms.back()) << " -> " << args.trace_out << ", "
            << args.estimate_out << '\n';
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string experiment;
  std::string config;
  std::optional<Index> trials;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out = "results.csv";
  std::string metadata_out;
};

int run_simulate(const SimulateArgs& args) {
  auto in = open_in(args.config);
  SimulationPlan plan = parse_simulation_plan(text::parse_key_values(in));
  ExperimentConfig cfg = plan.config;
  if (args.trials) cfg.trials = *args.trials;
  if (args.seed) cfg.master_seed = *args.seed;
  if (args.threads) cfg.threads = *args.threads;
  const ExperimentKind kind = args.experiment == "nmse" ? ExperimentKind::nmse : ExperimentKind::support;

  std::vector<ExperimentResult> results;
  for (const auto& family : plan.families) {
    cfg.family = family;
    results.push_back(kind == ExperimentKind::nmse ? run_nmse_experiment(cfg) : run_support_experiment(cfg));
  }
  cfg.family = plan.families.front();

  auto out = open_out(args.out);
  write_results_csv(out, cfg, results);
  finish(out, args.out);
  if (!args.metadata_out.empty()) {
    auto meta = open_out(args.metadata_out);
    for (const auto& r : results) {
      ExperimentConfig fam_cfg = cfg;
      fam_cfg.family = MatrixFamily::parse(r.family_label);
      write_result_metadata(meta, fam_cfg, r);
    }
    finish(meta, args.metadata_out);
  }

  std::cout << to_string(kind) << ": " << results.size() << " famil" << (results.size() == 1 ? "y" : "ies") << ", "
            << cfg.sweep.size() << " points x " << cfg.trials << " trials";
  for (const auto& r : results) {
    std::cout << " | " << r.family_label << " ratio=" << text::format_double(r.matrix_stats.ratio);
    if (kind == ExperimentKind::support) {
      const auto x98 = crossing_point(r, 0.98);
      std::cout << " x98=" << (x98 ? text::format_double(*x98) : std::string("none"));
    }
  }
  std::cout << " -> " << args.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orthogonal matching pursuit for sensing matrices with unequal column norms"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ompcs 1.0");

  MatrixArgs matrix_args;
  auto* matrix = app.add_subcommand("matrix", "Build a sensing matrix A = F U_N from a code family");
  matrix->add_option("--family", matrix_args.family, "zc | random2bit | file")
      ->check(CLI::IsMember({"zc", "random2bit", "file"}));
  matrix->add_option("--N", matrix_args.n, "Columns (array size)")->check(CLI::PositiveNumber);
  matrix->add_option("--M", matrix_args.m, "Rows (measurements)")->check(CLI::PositiveNumber);
  matrix->add_option("--seed", matrix_args.seed, "Master seed");
  matrix->add_option("--target-ratio", matrix_args.target_ratio, "Search a code with this d_max/d_min");
  matrix->add_option("--bits", matrix_args.bits, "Phase resolution of random codes")->check(CLI::Range(1, 30));
  matrix->add_option("--attempts", matrix_args.attempts, "Random draws for the ratio search")
      ->check(CLI::PositiveNumber);
  matrix->add_option("--code", matrix_args.code_path, "Code file for --family file");
  matrix->add_option("--out", matrix_args.out, "Matrix file (.txt plain, .csv CSV)");
  matrix->add_option("--code-out", matrix_args.code_out, "Also write the code");

  MeasureArgs measure_args;
  auto* meas = app.add_subcommand("measure", "Draw a sparse signal and noisy measurements");
  meas->add_option("--matrix", measure_args.matrix, "Matrix file")->required();
  meas->add_option("--k", measure_args.k, "Sparsity")->check(CLI::PositiveNumber);
  meas->add_option("--sigma", measure_args.sigma, "Noise level (total complex variance sigma^2)")
      ->check(CLI::NonNegativeNumber);
  meas->add_option("--x-min", measure_args.x_min, "Use the floor generator with this minimum modulus")
      ->check(CLI::PositiveNumber);
  meas->add_option("--seed", measure_args.seed, "Master seed");
  meas->add_option("--signal-out", measure_args.signal_out, "Signal CSV");
  meas->add_option("--out", measure_args.out, "Measurement CSV");

  GuaranteeArgs guarantee_args;
  auto* guar = app.add_subcommand("guarantee", "Evaluate recovery guarantees for a matrix");
  guar->add_option("--matrix", guarantee_args.matrix, "Matrix file")->required();
  guar->add_option("--k", guarantee_args.k, "Sparsity")->check(CLI::PositiveNumber);
  guar->add_option("--sigma", guarantee_args.sigma, "Noise level")->check(CLI::NonNegativeNumber);
  guar->add_option("--alpha", guarantee_args.alpha, "Event slack alpha >= 0")->check(CLI::NonNegativeNumber);
  guar->add_option("--rho-over-sigma", guarantee_args.rho_over_sigma, "Fix rho = ratio * sigma")
      ->check(CLI::PositiveNumber);
  guar->add_option("--x-min", guarantee_args.x_min, "Weakest coefficient modulus")->check(CLI::PositiveNumber);
  guar->add_option("--x-max", guarantee_args.x_max, "Strongest coefficient modulus")->check(CLI::PositiveNumber);
  guar->add_option("--out", guarantee_args.out, "Report file");
  guar->add_option("--format", guarantee_args.format, "kv | csv")->check(CLI::IsMember({"kv", "csv"}));

  RecoverArgs recover_args;
  auto* rec = app.add_subcommand("recover", "Run OMP on a measurement file");
  rec->add_option("--matrix", recover_args.matrix, "Matrix file")->required();
  rec->add_option("--measurements", recover_args.measurements, "Measurement CSV")->required();
  rec->add_option("--k", recover_args.k, "Sparsity (iterations)")->check(CLI::PositiveNumber);
  rec->add_option("--residual-tol", recover_args.residual_tol, "Optional early-exit residual norm");
  rec->add_option("--trace-out", recover_args.trace_out, "Trace CSV");
  rec->add_option("--estimate-out", recover_args.estimate_out, "Estimate CSV");

  SimulateArgs simulate_args;
  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo experiment");
  sim->add_option("experiment", simulate_args.experiment, "nmse | support")
      ->required()
      ->check(CLI::IsMember({"nmse", "support"}));
  sim->add_option("--config", simulate_args.config, "key=value config file")->required();
  sim->add_option("--trials", simulate_args.trials, "Override trials per point")->check(CLI::PositiveNumber);
  sim->add_option("--seed", simulate_args.seed, "Override master seed");
  sim->add_option("--threads", simulate_args.threads, "Worker threads (0 = all cores)");
  sim->add_option("--out", simulate_args.out, "Result CSV");
  sim->add_option("--metadata-out", simulate_args.metadata_out, "Companion metadata file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*matrix) return run_matrix(matrix_args);
    if (*meas) return run_measure(measure_args);
    if (*guar) return run_guarantee(guarantee_args);
    if (*rec) return run_recover(recover_args);
    if (*sim) return run_simulate(simulate_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case Errc::io: return kExitIo;
      case Errc::rank_deficient: return kExitNumerical;
      default: return kExitUsage;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
