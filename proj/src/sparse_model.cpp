#include "ompcs/sparse_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>

#include "ompcs/rng.hpp"
#include "ompcs/text_format.hpp"

namespace ompcs {

namespace {

std::vector<Index> sample_support(Index n, Index k, Rng& rng) {
  require(k >= 1, "sparse signal: k must be at least 1");
  require(k <= n, "sparse signal: k=" + std::to_string(k) + " exceeds N=" + std::to_string(n));
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  std::vector<Index> pool(n);
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.below(n - i)]);
  pool.resize(k);
  return pool;
}

// Parses "# key=value" metadata lines while skipping to the CSV header.
std::string read_header(std::istream& in, std::vector<std::pair<std::string, std::string>>& meta) {
  std::string line;
  while (std::getline(in, line)) {
    const auto t = text::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto body = text::trim(t.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string_view::npos)
        meta.emplace_back(std::string(text::trim(body.substr(0, eq))),
                          std::string(text::trim(body.substr(eq + 1))));
      continue;
    }
    return std::string(t);
  }
  return {};
}

const std::string* find_meta(const std::vector<std::pair<std::string, std::string>>& meta,
                             std::string_view key) {
  for (const auto& [k, v] : meta)
    if (k == key) return &v;
  return nullptr;
}

}  // namespace

SparseSignal::SparseSignal(Index length, std::vector<Index> support, std::vector<cplx> coefficients)
    : length_(length) {
  require(length >= 1, "SparseSignal: length must be positive");
  require(!support.empty(), "SparseSignal: empty support");
  require(support.size() == coefficients.size(), "SparseSignal: support/coefficient size mismatch");
  std::vector<Index> order(support.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return support[a] < support[b]; });
  for (Index i : order) {
    require(support[i] < length, "SparseSignal: support index out of range");
    require(support_.empty() || support_.back() != support[i], "SparseSignal: duplicate support index");
    require(std::abs(coefficients[i]) > 0.0, "SparseSignal: zero coefficient on the support");
    support_.push_back(support[i]);
    coefficients_.push_back(coefficients[i]);
  }
}

double SparseSignal::x_min() const {
  double lo = std::abs(coefficients_.front());
  for (const cplx& c : coefficients_) lo = std::min(lo, std::abs(c));
  return lo;
}

double SparseSignal::x_max() const {
  double hi = 0.0;
  for (const cplx& c : coefficients_) hi = std::max(hi, std::abs(c));
  return hi;
}

double SparseSignal::norm() const {
  double acc = 0.0;
  for (const cplx& c : coefficients_) acc += std::norm(c);
  return std::sqrt(acc);
}

CVector SparseSignal::dense() const {
  CVector x = CVector::Zero(static_cast<Eigen::Index>(length_));
  for (Index i = 0; i < support_.size(); ++i) x(static_cast<Eigen::Index>(support_[i])) = coefficients_[i];
  return x;
}

SparseSignal sample_sparse_signal(Index n, Index k, std::uint64_t seed) {
  Rng rng(seed);
  auto support = sample_support(n, k, rng);
  std::vector<cplx> coeffs(k);
  double energy = 0.0;
  do {
    energy = 0.0;
    for (auto& c : coeffs) {
      c = rng.complex_normal(1.0);
      energy += std::norm(c);
    }
  } while (energy == 0.0);
  const double scale = 1.0 / std::sqrt(energy);
  for (auto& c : coeffs) c *= scale;
  return SparseSignal(n, std::move(support), std::move(coeffs));
}

SparseSignal sample_sparse_signal_with_floor(Index n, Index k, double x_min_target, std::uint64_t seed) {
  require(x_min_target > 0.0 && std::isfinite(x_min_target),
          "sample_sparse_signal_with_floor: x_min_target must be positive");
  Rng rng(seed);
  auto support = sample_support(n, k, rng);
  std::vector<cplx> coeffs(k);
  for (auto& c : coeffs) {
    const double modulus = x_min_target * (1.0 + rng.uniform());
    c = std::polar(modulus, 2.0 * std::numbers::pi * rng.uniform());
  }
  return SparseSignal(n, std::move(support), std::move(coeffs));
}

SparseSignal with_min_modulus(const SparseSignal& x, double x_min) {
  require(x_min > 0.0, "with_min_modulus: target must be positive");
  const double scale = x_min / x.x_min();
  auto coeffs = x.coefficients();
  for (auto& c : coeffs) c *= scale;
  return SparseSignal(x.length(), x.support(), std::move(coeffs));
}

CVector draw_noise(Index m, double sigma, std::uint64_t seed) {
  require(sigma >= 0.0 && std::isfinite(sigma), "draw_noise: sigma must be non-negative");
  CVector v = CVector::Zero(static_cast<Eigen::Index>(m));
  if (sigma == 0.0) return v;
  Rng rng(seed);
  const double variance = sigma * sigma;
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.complex_normal(variance);
  return v;
}

MeasurementSet measure(const CsMatrix& a, const SparseSignal& x, double sigma, std::uint64_t seed) {
  if (x.length() != a.cols())
    fail(Errc::dimension_mismatch, "measure: signal length " + std::to_string(x.length()) +
                                       " does not match N=" + std::to_string(a.cols()));
  CVector y = CVector::Zero(static_cast<Eigen::Index>(a.rows()));
  for (Index i = 0; i < x.sparsity(); ++i)
    y += a.entries().col(static_cast<Eigen::Index>(x.support()[i])) * x.coefficients()[i];
  y += draw_noise(a.rows(), sigma, seed);
  return {std::move(y), sigma, seed};
}

bool same_support(std::span<const Index> lhs, std::span<const Index> rhs) {
  if (lhs.size() != rhs.size()) return false;
  std::vector<Index> a(lhs.begin(), lhs.end()), b(rhs.begin(), rhs.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

void write_signal_csv(std::ostream& out, const SparseSignal& x, std::span<const std::string> metadata) {
  for (const auto& line : metadata) out << "# " << line << '\n';
  out << "# length=" << x.length() << '\n';
  out << "index,re,im\n";
  for (Index i = 0; i < x.sparsity(); ++i)
    out << x.support()[i] << ',' << text::format_double(x.coefficients()[i].real()) << ','
        << text::format_double(x.coefficients()[i].imag()) << '\n';
}

void write_estimate_csv(std::ostream& out, const CVector& estimate, std::span<const Index> support,
                        std::span<const std::string> metadata) {
  for (const auto& line : metadata) out << "# " << line << '\n';
  out << "# length=" << estimate.size() << '\n';
  out << "index,re,im\n";
  std::vector<Index> sorted(support.begin(), support.end());
  std::sort(sorted.begin(), sorted.end());
  for (Index j : sorted) {
    const cplx v = estimate(static_cast<Eigen::Index>(j));
    out << j << ',' << text::format_double(v.real()) << ',' << text::format_double(v.imag()) << '\n';
  }
}

SparseSignal read_signal_csv(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> meta;
  if (read_header(in, meta) != "index,re,im") fail(Errc::parse, "signal CSV: expected header 'index,re,im'");
  const std::string* length = find_meta(meta, "length");
  if (length == nullptr) fail(Errc::parse, "signal CSV: missing '# length=N' line");
  std::vector<Index> support;
  std::vector<cplx> coeffs;
  std::string line;
  while (text::next_data_line(in, line)) {
    const auto parts = text::split(line, ',');
    if (parts.size() != 3) fail(Errc::parse, "signal CSV: expected 3 fields in '" + line + "'");
    support.push_back(text::parse_u64(parts[0]));
    coeffs.emplace_back(text::parse_double(parts[1]), text::parse_double(parts[2]));
  }
  return SparseSignal(text::parse_u64(*length), std::move(support), std::move(coeffs));
}

void write_measurement_csv(std::ostream& out, const MeasurementSet& y, std::span<const std::string> metadata) {
  for (const auto& line : metadata) out << "# " << line << '\n';
  out << "# sigma=" << text::format_double(y.noise_sigma) << '\n';
  out << "# seed=" << y.seed << '\n';
  out << "row,re,im\n";
  for (Eigen::Index r = 0; r < y.observations.size(); ++r)
    out << r << ',' << text::format_double(y.observations(r).real()) << ','
        << text::format_double(y.observations(r).imag()) << '\n';
}

MeasurementSet read_measurement_csv(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> meta;
  if (read_header(in, meta) != "row,re,im") fail(Errc::parse, "measurement CSV: expected header 'row,re,im'");
  MeasurementSet out;
  if (const auto* s = find_meta(meta, "sigma")) out.noise_sigma = text::parse_double(*s);
  if (const auto* s = find_meta(meta, "seed")) out.seed = text::parse_u64(*s);
  std::vector<cplx> values;
  std::string line;
  while (text::next_data_line(in, line)) {
    const auto parts = text::split(line, ',');
    if (parts.size() != 3) fail(Errc::parse, "measurement CSV: expected 3 fields in '" + line + "'");
    if (text::parse_u64(parts[0]) != values.size()) fail(Errc::parse, "measurement CSV: rows out of order");
    values.emplace_back(text::parse_double(parts[1]), text::parse_double(parts[2]));
  }
  if (values.empty()) fail(Errc::parse, "measurement CSV: no rows");
  out.observations = Eigen::Map<const CVector>(values.data(), static_cast<Eigen::Index>(values.size()));
  return out;
}

}  // namespace ompcs
