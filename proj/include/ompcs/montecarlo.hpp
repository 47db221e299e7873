#pragma once

// Monte Carlo harness for two experiments on a fixed sensing matrix:
//   * NMSE of the OMP estimate versus noise level sigma;
//   * exact support-recovery rate versus x_min / sigma.
//
// Noise reference. The phased-array measurement is y = F U_N x + v with
// unit-modulus F, whose Frobenius norm is sqrt(M N). The library works with
// the normalized A = F U_N / sqrt(M), so under NoiseReference::array an
// operating point sigma is applied as noise sigma / sqrt(M) on the normalized
// system (the two systems then select identical supports and produce
// identical estimates). NoiseReference::normalized applies sigma directly.
//
// Determinism. Trial t at sweep point p uses seeds derived from
// (master_seed, p, t) only, so every family sees the same signals and noise
// draws, and aggregation is done in trial order regardless of thread count.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ompcs/cs_matrix.hpp"
#include "ompcs/types.hpp"

namespace ompcs {

struct MatrixFamily {
  enum class Kind { zadoff_chu, fixed_code, searched_ratio };
  Kind kind = Kind::zadoff_chu;
  std::string code_file;     ///< fixed_code
  double target_ratio = 1.0; ///< searched_ratio

  /// "zc" | "ratio:<target>" | "code:<path>"
  static MatrixFamily parse(const std::string& token);
  std::string label() const;
};

enum class NoiseReference { array, normalized };
enum class ExperimentKind { nmse, support };

struct ExperimentConfig {
  Index n = 32;
  Index m = 20;
  Index k = 2;
  MatrixFamily family;
  std::vector<double> sweep;
  Index trials = 10000;
  std::uint64_t master_seed = 1;
  unsigned code_bits = 2;        ///< alphabet for searched_ratio codes
  Index search_attempts = 40000000;  ///< random draws per searched_ratio code
  NoiseReference noise_reference = NoiseReference::array;
  double rho_over_sigma = 2.63;  ///< rho used for bound overlays
  double sigma = 1.0;            ///< noise level of the support experiment
  unsigned threads = 0;          ///< 0: hardware concurrency

  void validate(ExperimentKind kind) const;
  /// One `key=value` per line, fixed key order, all defaults filled in.
  std::string canonical(ExperimentKind kind) const;
  std::uint64_t hash(ExperimentKind kind) const;
  /// sigma scale applied to the normalized system.
  double noise_scale() const;
};

/// Config file keys (flat key=value): N M k family sweep trials seed
/// code_bits search_attempts noise_reference rho_over_sigma sigma threads.
/// `family` may list several comma-separated families; they are returned
/// alongside the base config, whose `family` is set to the first one.
struct SimulationPlan {
  ExperimentConfig config;
  std::vector<MatrixFamily> families;
};
SimulationPlan parse_simulation_plan(const std::map<std::string, std::string>& kv);

struct FamilyMatrix {
  UnitModulusCode code;
  std::vector<Index> shifts;
  CsMatrix matrix;
  double mu;
  std::uint64_t matrix_seed;
  bool code_refined = false;  ///< searched code came from the descent fallback
};

/// Builds the family's matrix. The shift set depends only on the master seed,
/// so all families of one experiment share it.
FamilyMatrix realize_family(const ExperimentConfig& config);

struct PointResult {
  double operating_point = 0.0;
  double value = 0.0;            ///< NMSE, or support-recovery rate
  double ci_half_width = 0.0;    ///< 95%: normal for NMSE, Wilson for rates
  Index trials = 0;              ///< trials that completed
  Index rank_deficient = 0;      ///< trials skipped
  double support_rate = 0.0;     ///< NMSE experiment: exact support fraction
  std::optional<double> bound;   ///< NMSE bound, or threshold on the x_min/sigma axis
  Index conditioned_trials = 0;  ///< support condition and noise event both held
  double conditioned_max_error = 0.0;
  Index bound_violations = 0;
  std::vector<double> trial_values;  ///< squared error or 0/1 success, trial order
};

struct MatrixStats {
  double mu = 0.0;
  double d_min = 0.0;
  double d_max = 0.0;
  double ratio = 0.0;
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::nmse;
  std::string family_label;
  MatrixStats matrix_stats;
  std::vector<PointResult> points;
  std::uint64_t config_hash = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t matrix_seed = 0;
  bool code_refined = false;
  std::vector<cplx> code;
};

ExperimentResult run_nmse_experiment(const ExperimentConfig& config);
ExperimentResult run_support_experiment(const ExperimentConfig& config);

/// 10 log10(nmse); rejects nmse <= 0.
double nmse_db(double nmse);

/// First x where the (linearly interpolated) curve reaches `level`.
std::optional<double> crossing_point(const ExperimentResult& result, double level);

/// Wilson score interval half-width at z = 1.96.
double wilson_half_width(double successes, double trials);

/// Columns: operating_point,metric,value,ci_half_width,trials,matrix_ratio,mu,bound_value.
/// Preceded by `#` lines echoing the resolved config and provenance.
void write_result_csv(std::ostream& out, const ExperimentConfig& config, const ExperimentResult& result);

/// Several families of one experiment in a single file: one `# result ...`
/// line per family, then the rows of every family (told apart by
/// matrix_ratio and by order).
void write_results_csv(std::ostream& out, const ExperimentConfig& config,
                       std::span<const ExperimentResult> results);

/// Companion metadata: config echo, seeds, matrix statistics, code, and
/// per-point conditioned-trial counts.
void write_result_metadata(std::ostream& out, const ExperimentConfig& config, const ExperimentResult& result);

std::string to_string(ExperimentKind kind);
std::string to_string(NoiseReference ref);

}  // namespace ompcs
