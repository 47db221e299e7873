#include "ompcs/guarantees.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "ompcs/kernels.hpp"
#include "ompcs/text_format.hpp"

namespace ompcs {

namespace {

std::optional<double> positive_or_vacuous(double numerator, double denominator) {
  if (!(denominator > 0.0)) return std::nullopt;
  return numerator / denominator;
}

void check_norms(double mu, double d_min, double d_max) {
  require(mu >= 0.0 && mu <= 1.0 + 1e-12, "guarantees: mu must lie in [0, 1]");
  require(d_min > 0.0 && d_min <= d_max, "guarantees: need 0 < d_min <= d_max");
}

}  // namespace

double rho(double sigma, Index n, double alpha) {
  require(n >= 2, "rho: N must be at least 2");
  require(alpha >= 0.0, "rho: alpha must be non-negative");
  require(sigma >= 0.0, "rho: sigma must be non-negative");
  return sigma * std::sqrt(2.0 * (1.0 + alpha) * std::log(static_cast<double>(n)));
}

double alpha_for_rho_ratio(double rho_over_sigma, Index n) {
  require(n >= 2, "alpha_for_rho_ratio: N must be at least 2");
  require(rho_over_sigma > 0.0, "alpha_for_rho_ratio: ratio must be positive");
  return rho_over_sigma * rho_over_sigma / (2.0 * std::log(static_cast<double>(n))) - 1.0;
}

double event_probability_lower_bound(double sigma, double rho_value, Index n) {
  require(n >= 1, "event_probability_lower_bound: N must be at least 1");
  require(sigma >= 0.0, "event_probability_lower_bound: sigma must be non-negative");
  if (sigma == 0.0) return 1.0;
  require(rho_value > 0.0, "event_probability_lower_bound: rho must be positive when sigma > 0");
  const double tail = std::sqrt(2.0 / std::numbers::pi) * std::sqrt(sigma / rho_value) *
                      std::exp(-rho_value * rho_value / (2.0 * sigma * sigma));
  const double inner = std::max(0.0, 1.0 - tail);
  return std::clamp(std::pow(inner, 2.0 * static_cast<double>(n)), 0.0, 1.0);
}

double max_noise_correlation(const CsMatrix& a, const CVector& v) {
  if (static_cast<Index>(v.size()) != a.rows())
    fail(Errc::dimension_mismatch, "noise vector length does not match M");
  std::vector<cplx> corr(a.cols());
  kernels::active().correlate(a.entries().data(), a.rows(), a.cols(), v.data(), corr.data());
  double worst = 0.0;
  for (Index j = 0; j < a.cols(); ++j) worst = std::max(worst, std::abs(corr[j]) / a.column_norms()[j]);
  return worst;
}

bool empirical_event_check(const CsMatrix& a, const CVector& v, double rho_value) {
  return max_noise_correlation(a, v) < rho_value;
}

SupportCondition support_recovery_condition(double mu, double d_min, double d_max, Index k,
                                            double x_min, double rho_value) {
  check_norms(mu, d_min, d_max);
  require(k >= 1, "support_recovery_condition: k must be at least 1");
  require(x_min > 0.0, "support_recovery_condition: x_min must be positive");
  const double kk = static_cast<double>(2 * k - 1);
  const double margin = d_min * x_min - kk * mu * d_max * x_min - 2.0 * rho_value;
  return {margin >= 0.0, margin};
}

std::optional<double> min_coefficient_threshold(double mu, double d_min, double d_max, Index k,
                                                double rho_value) {
  check_norms(mu, d_min, d_max);
  require(k >= 1, "min_coefficient_threshold: k must be at least 1");
  const double denom = 1.0 - mu * static_cast<double>(2 * k - 1) * (d_max / d_min);
  return positive_or_vacuous(2.0 * rho_value / d_min, denom);
}

double noiseless_max_sparsity(double mu, double d_min, double d_max) {
  check_norms(mu, d_min, d_max);
  if (mu == 0.0) return std::numeric_limits<double>::infinity();
  return 0.5 * (1.0 + d_min / (mu * d_max));
}

std::optional<double> gram_inverse_eigen_bound(double mu, double d_min, double d_max, Index k) {
  check_norms(mu, d_min, d_max);
  require(k >= 1, "gram_inverse_eigen_bound: k must be at least 1");
  const double gap = d_min - static_cast<double>(k - 1) * mu * d_max;
  if (!(gap > 0.0)) return std::nullopt;
  return 1.0 / (d_min * gap);
}

std::optional<double> mse_upper_bound(double mu, double d_min, double d_max, Index k, double rho_value) {
  check_norms(mu, d_min, d_max);
  require(k >= 1, "mse_upper_bound: k must be at least 1");
  require(rho_value >= 0.0, "mse_upper_bound: rho must be non-negative");
  const double gap = d_min - static_cast<double>(k - 1) * mu * d_max;
  if (!(gap > 0.0)) return std::nullopt;
  const double ratio = d_max / d_min;
  return ratio * ratio * static_cast<double>(k) * rho_value * rho_value / (gap * gap);
}

GuaranteeInputs GuaranteeInputs::from_matrix(const CsMatrix& a, double mu) {
  GuaranteeInputs in;
  in.mu = mu;
  in.d_min = a.d_min();
  in.d_max = a.d_max();
  in.n = a.cols();
  return in;
}

void GuaranteeInputs::validate() const {
  check_norms(mu, d_min, d_max);
  require(k >= 1, "guarantee inputs: k must be at least 1");
  require(n >= 2, "guarantee inputs: N must be at least 2");
  require(sigma >= 0.0 && std::isfinite(sigma), "guarantee inputs: sigma must be non-negative");
  if (rho_over_sigma)
    require(*rho_over_sigma > 0.0, "guarantee inputs: rho/sigma must be positive");
  else
    require(alpha >= 0.0, "guarantee inputs: alpha must be non-negative");
  if (x_min) require(*x_min > 0.0, "guarantee inputs: x_min must be positive");
  if (x_max) require(*x_max > 0.0 && (!x_min || *x_min <= *x_max), "guarantee inputs: need 0 < x_min <= x_max");
}

double GuaranteeInputs::effective_rho() const {
  return rho_over_sigma ? sigma * *rho_over_sigma : rho(sigma, n, alpha);
}

double GuaranteeInputs::effective_alpha() const {
  return rho_over_sigma ? alpha_for_rho_ratio(*rho_over_sigma, n) : alpha;
}

GuaranteeReport evaluate_guarantees(const GuaranteeInputs& in) {
  in.validate();
  GuaranteeReport r;
  r.n = in.n;
  r.k = in.k;
  r.mu = in.mu;
  r.d_min = in.d_min;
  r.d_max = in.d_max;
  r.sigma = in.sigma;
  r.alpha = in.effective_alpha();
  r.x_min = in.x_min;
  r.x_max = in.x_max;

  r.rho = in.effective_rho();
  r.event_prob_lower_bound =
      (in.sigma == 0.0) ? 1.0 : event_probability_lower_bound(in.sigma, r.rho, in.n);
  if (in.x_min) {
    const auto cond = support_recovery_condition(in.mu, in.d_min, in.d_max, in.k, *in.x_min, r.rho);
    r.support_condition_holds = cond.holds;
    r.support_margin = cond.margin;
  }
  r.x_min_threshold = min_coefficient_threshold(in.mu, in.d_min, in.d_max, in.k, r.rho);
  r.noiseless_k_max = noiseless_max_sparsity(in.mu, in.d_min, in.d_max);
  r.eigen_bound = gram_inverse_eigen_bound(in.mu, in.d_min, in.d_max, in.k);
  r.mse_bound = mse_upper_bound(in.mu, in.d_min, in.d_max, in.k, r.rho);
  return r;
}

GuaranteeReport full_report(const CsMatrix& a, GuaranteeInputs inputs) {
  inputs.mu = mutual_coherence(a);
  inputs.d_min = a.d_min();
  inputs.d_max = a.d_max();
  inputs.n = a.cols();
  return evaluate_guarantees(inputs);
}

namespace {

using Fields = std::vector<std::pair<std::string, std::string>>;

std::string opt_token(const std::optional<double>& v, const char* empty) {
  return v ? text::format_double(*v) : std::string(empty);
}

Fields report_fields(const GuaranteeReport& r) {
  return {
      {"n", std::to_string(r.n)},
      {"k", std::to_string(r.k)},
      {"mu", text::format_double(r.mu)},
      {"d_min", text::format_double(r.d_min)},
      {"d_max", text::format_double(r.d_max)},
      {"sigma", text::format_double(r.sigma)},
      {"alpha", text::format_double(r.alpha)},
      {"x_min", opt_token(r.x_min, "none")},
      {"x_max", opt_token(r.x_max, "none")},
      {"rho", text::format_double(r.rho)},
      {"event_prob_lower_bound", text::format_double(r.event_prob_lower_bound)},
      {"support_condition_holds",
       r.support_condition_holds ? (*r.support_condition_holds ? "true" : "false") : "none"},
      {"support_margin", opt_token(r.support_margin, "none")},
      {"x_min_threshold", opt_token(r.x_min_threshold, "vacuous")},
      {"noiseless_k_max", text::format_double(r.noiseless_k_max)},
      {"eigen_bound", opt_token(r.eigen_bound, "vacuous")},
      {"mse_bound", opt_token(r.mse_bound, "vacuous")},
  };
}

std::optional<double> parse_opt(const std::string& token) {
  if (token == "none" || token == "vacuous") return std::nullopt;
  return text::parse_double(token);
}

}  // namespace

std::string report_to_key_value(const GuaranteeReport& report) {
  std::ostringstream out;
  for (const auto& [key, value] : report_fields(report)) out << key << '=' << value << '\n';
  return out.str();
}

std::string report_to_csv(const GuaranteeReport& report) {
  std::ostringstream out;
  out << "field,value\n";
  for (const auto& [key, value] : report_fields(report)) out << key << ',' << value << '\n';
  return out.str();
}

GuaranteeReport report_from_key_value(std::istream& in) {
  const auto kv = text::parse_key_values(in);
  const auto get = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) fail(Errc::parse, std::string("guarantee report: missing field '") + key + "'");
    return it->second;
  };
  GuaranteeReport r;
  r.n = text::parse_u64(get("n"));
  r.k = text::parse_u64(get("k"));
  r.mu = text::parse_double(get("mu"));
  r.d_min = text::parse_double(get("d_min"));
  r.d_max = text::parse_double(get("d_max"));
  r.sigma = text::parse_double(get("sigma"));
  r.alpha = text::parse_double(get("alpha"));
  r.x_min = parse_opt(get("x_min"));
  r.x_max = parse_opt(get("x_max"));
  r.rho = text::parse_double(get("rho"));
  r.event_prob_lower_bound = text::parse_double(get("event_prob_lower_bound"));
  const auto& holds = get("support_condition_holds");
  if (holds == "true")
    r.support_condition_holds = true;
  else if (holds == "false")
    r.support_condition_holds = false;
  else if (holds != "none")
    fail(Errc::parse, "guarantee report: bad support_condition_holds '" + holds + "'");
  r.support_margin = parse_opt(get("support_margin"));
  r.x_min_threshold = parse_opt(get("x_min_threshold"));
  r.noiseless_k_max = text::parse_double(get("noiseless_k_max"));
  r.eigen_bound = parse_opt(get("eigen_bound"));
  r.mse_bound = parse_opt(get("mse_bound"));
  return r;
}

}  // namespace ompcs
