#pragma once

// Closed-form recovery guarantees for OMP on matrices with unequal column
// norms d_j (d_min <= d_j <= d_max) and mutual coherence mu.
//
// Bounds whose denominator changes sign are returned as std::nullopt
// ("vacuous") rather than as negative or infinite numbers.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "ompcs/cs_matrix.hpp"
#include "ompcs/types.hpp"

namespace ompcs {

/// Noise threshold rho = sigma * sqrt(2 (1 + alpha) ln N).
double rho(double sigma, Index n, double alpha);

/// The alpha for which rho(sigma, N, alpha) = ratio * sigma. Can be slightly
/// negative: ratio 2.63 at N = 32 gives alpha = -0.0021.
double alpha_for_rho_ratio(double rho_over_sigma, Index n);

/// Lower bound on Pr{max_j |a_j^H v| / d_j < rho}:
///   (1 - sqrt(2/pi) sqrt(sigma/rho) exp(-rho^2 / (2 sigma^2)))^(2N),
/// with the inner term clamped at 0. sigma = 0 returns 1.
double event_probability_lower_bound(double sigma, double rho, Index n);

/// max_j |a_j^H v| / d_j.
double max_noise_correlation(const CsMatrix& a, const CVector& v);

/// True iff max_j |a_j^H v| / d_j < rho.
bool empirical_event_check(const CsMatrix& a, const CVector& v, double rho);

struct SupportCondition {
  bool holds;
  double margin;  ///< d_min x_min - (2k-1) mu d_max x_min - 2 rho
};

SupportCondition support_recovery_condition(double mu, double d_min, double d_max, Index k,
                                            double x_min, double rho);

/// (2 rho / d_min) / (1 - mu (2k-1) d_max/d_min), vacuous when the
/// denominator is <= 0.
std::optional<double> min_coefficient_threshold(double mu, double d_min, double d_max, Index k,
                                                double rho);

/// (1 + d_min / (mu d_max)) / 2; +infinity when mu = 0.
double noiseless_max_sparsity(double mu, double d_min, double d_max);

/// 1 / (d_min (d_min - (k-1) mu d_max)), vacuous when d_min <= (k-1) mu d_max.
std::optional<double> gram_inverse_eigen_bound(double mu, double d_min, double d_max, Index k);

/// (d_max/d_min)^2 k rho^2 / (d_min - (k-1) mu d_max)^2, same vacuity rule.
std::optional<double> mse_upper_bound(double mu, double d_min, double d_max, Index k, double rho);

struct GuaranteeInputs {
  double mu = 0.0;
  double d_min = 1.0;
  double d_max = 1.0;
  Index k = 1;
  double sigma = 0.0;
  double alpha = 0.0;
  Index n = 2;
  std::optional<double> x_min;
  std::optional<double> x_max;
  /// When set, rho = sigma * rho_over_sigma and alpha is derived from it.
  std::optional<double> rho_over_sigma;

  static GuaranteeInputs from_matrix(const CsMatrix& a, double mu);

  void validate() const;
  double effective_rho() const;
  double effective_alpha() const;
};

struct GuaranteeReport {
  // echo of the evaluated inputs
  Index n = 0;
  Index k = 0;
  double mu = 0.0;
  double d_min = 0.0;
  double d_max = 0.0;
  double sigma = 0.0;
  double alpha = 0.0;
  std::optional<double> x_min;
  std::optional<double> x_max;

  double rho = 0.0;
  double event_prob_lower_bound = 0.0;
  std::optional<bool> support_condition_holds;  ///< needs x_min
  std::optional<double> support_margin;
  std::optional<double> x_min_threshold;
  double noiseless_k_max = 0.0;
  std::optional<double> eigen_bound;
  std::optional<double> mse_bound;

  bool operator==(const GuaranteeReport&) const = default;
};

GuaranteeReport evaluate_guarantees(const GuaranteeInputs& inputs);

/// Reads mu, d_min, d_max and N from the matrix; the other fields of
/// `inputs` are used as given.
GuaranteeReport full_report(const CsMatrix& a, GuaranteeInputs inputs);

// Flat `key=value` text, one field per line. Field names are stable:
//   n k mu d_min d_max sigma alpha x_min x_max rho event_prob_lower_bound
//   support_condition_holds support_margin x_min_threshold noiseless_k_max
//   eigen_bound mse_bound
// Vacuous bounds are written as `vacuous`, absent optional inputs as `none`.
std::string report_to_key_value(const GuaranteeReport& report);
GuaranteeReport report_from_key_value(std::istream& in);

/// CSV with header `field,value`, one row per field, same names and tokens.
std::string report_to_csv(const GuaranteeReport& report);

}  // namespace ompcs
