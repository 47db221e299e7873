#pragma once

// Orthogonal matching pursuit for sensing matrices whose columns have
// unequal norms. Column selection uses the norm-weighted correlation
// |a_j^H r| / d_j; the estimate on the selected support is refit by least
// squares after every selection.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ompcs/cs_matrix.hpp"
#include "ompcs/types.hpp"

namespace ompcs {

struct OmpOptions {
  /// Stop early once ||r||_2 <= tolerance. Off by default: exactly k
  /// iterations are run.
  std::optional<double> residual_tolerance;
};

struct OmpTrace {
  std::vector<Index> selected_indices;  ///< in selection order
  std::vector<double> residual_norms;   ///< ||r^i||_2 after iteration i
  CVector estimate;                     ///< length N, zero off the support
};

/// Runs k iterations. Ties in the selection step go to the lowest index.
/// Throws Errc::rank_deficient when the selected columns lose full rank and
/// Errc::dimension_mismatch when y does not have M entries.
OmpTrace omp_recover(const CsMatrix& a, const CVector& y, Index k, const OmpOptions& options = {});

/// argmin_z ||A_S z - y||_2 via Householder QR. A factor diagonal below
/// 1e-10 times its largest entry is reported as rank deficiency.
CVector least_squares_on_support(const CsMatrix& a, std::span<const Index> support, const CVector& y);

/// Trace CSV: header `iteration,selected_index,residual_norm`, iterations 1-based.
void write_trace_csv(std::ostream& out, const OmpTrace& trace, std::span<const std::string> metadata = {});

}  // namespace ompcs
