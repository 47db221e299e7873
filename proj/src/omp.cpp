#include "ompcs/omp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ompcs/kernels.hpp"
#include "ompcs/text_format.hpp"

namespace ompcs {

namespace {

constexpr double kRankTolerance = 1e-10;

CMatrix gather_columns(const CsMatrix& a, std::span<const Index> support) {
  CMatrix sub(static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(support.size()));
  for (Index i = 0; i < support.size(); ++i) {
    require(support[i] < a.cols(), "support index out of range");
    sub.col(static_cast<Eigen::Index>(i)) = a.entries().col(static_cast<Eigen::Index>(support[i]));
  }
  return sub;
}

}  // namespace

CVector least_squares_on_support(const CsMatrix& a, std::span<const Index> support, const CVector& y) {
  require(!support.empty(), "least_squares_on_support: empty support");
  if (support.size() > a.rows())
    fail(Errc::rank_deficient, "least_squares_on_support: support larger than M");
  if (static_cast<Index>(y.size()) != a.rows())
    fail(Errc::dimension_mismatch, "least_squares_on_support: y has " + std::to_string(y.size()) +
                                       " entries, expected M=" + std::to_string(a.rows()));

  const CMatrix sub = gather_columns(a, support);
  const Eigen::HouseholderQR<CMatrix> qr(sub);
  const auto diag = qr.matrixQR().diagonal().cwiseAbs();
  if (diag.minCoeff() <= kRankTolerance * diag.maxCoeff())
    fail(Errc::rank_deficient, "least_squares_on_support: selected columns are rank deficient");
  return qr.solve(y);
}

OmpTrace omp_recover(const CsMatrix& a, const CVector& y, Index k, const OmpOptions& options) {
  const Index m = a.rows();
  const Index n = a.cols();
  if (static_cast<Index>(y.size()) != m)
    fail(Errc::dimension_mismatch, "omp_recover: y has " + std::to_string(y.size()) +
                                       " entries, expected M=" + std::to_string(m));
  require(k >= 1 && k <= m, "omp_recover: need 1 <= k <= M");

  const auto& kern = kernels::active();
  const auto& d = a.column_norms();

  OmpTrace trace;
  trace.estimate = CVector::Zero(static_cast<Eigen::Index>(n));
  CVector residual = y;
  std::vector<cplx> corr(n);

  for (Index iter = 0; iter < k; ++iter) {
    kern.correlate(a.entries().data(), m, n, residual.data(), corr.data());
    Index best = 0;
    double best_score = -1.0;
    for (Index j = 0; j < n; ++j) {
      const double score = std::abs(corr[j]) / d[j];
      if (score > best_score) {  // strict: lowest index wins ties
        best_score = score;
        best = j;
      }
    }
    trace.selected_indices.push_back(best);

    const CVector z = least_squares_on_support(a, trace.selected_indices, y);
    trace.estimate.setZero();
    for (Index i = 0; i < trace.selected_indices.size(); ++i)
      trace.estimate(static_cast<Eigen::Index>(trace.selected_indices[i])) = z(static_cast<Eigen::Index>(i));
    residual = y - a.entries() * trace.estimate;
    trace.residual_norms.push_back(residual.norm());

    if (options.residual_tolerance && trace.residual_norms.back() <= *options.residual_tolerance) break;
  }
  return trace;
}

void write_trace_csv(std::ostream& out, const OmpTrace& trace, std::span<const std::string> metadata) {
  for (const auto& line : metadata) out << "# " << line << '\n';
  out << "iteration,selected_index,residual_norm\n";
  for (Index i = 0; i < trace.selected_indices.size(); ++i)
    out << (i + 1) << ',' << trace.selected_indices[i] << ','
        << text::format_double(trace.residual_norms[i]) << '\n';
}

}  // namespace ompcs
