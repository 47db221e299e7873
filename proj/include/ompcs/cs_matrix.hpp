#pragma once

// Sensing matrices: construction, Frobenius normalization, column-norm
// statistics and mutual coherence, including the phased-array family
// A = F * U_N built from circular shifts of a unit-modulus code.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ompcs/types.hpp"

namespace ompcs {

/// Phase weights applied by a phased array: every entry has unit modulus.
/// With a finite `alphabet_bits` b, every entry is a 2^b-th root of unity.
class UnitModulusCode {
 public:
  UnitModulusCode(std::vector<cplx> values, std::optional<unsigned> alphabet_bits);

  const std::vector<cplx>& values() const noexcept { return values_; }
  Index size() const noexcept { return values_.size(); }
  std::optional<unsigned> alphabet_bits() const noexcept { return bits_; }

 private:
  std::vector<cplx> values_;
  std::optional<unsigned> bits_;
};

/// An M x N complex sensing matrix normalized to ||A||_F = sqrt(N).
/// Immutable; only `normalize_frobenius` (and helpers built on it) create one.
class CsMatrix {
 public:
  const CMatrix& entries() const noexcept { return entries_; }
  Index rows() const noexcept { return static_cast<Index>(entries_.rows()); }
  Index cols() const noexcept { return static_cast<Index>(entries_.cols()); }
  std::span<const cplx> column(Index j) const {
    return {entries_.col(static_cast<Eigen::Index>(j)).data(), rows()};
  }

  const std::vector<double>& column_norms() const noexcept { return norms_; }
  double d_min() const noexcept { return d_min_; }
  double d_max() const noexcept { return d_max_; }
  double norm_ratio() const noexcept { return d_max_ / d_min_; }
  /// Factor the raw input was multiplied by during normalization.
  double applied_scale() const noexcept { return scale_; }

  friend CsMatrix normalize_frobenius(const CMatrix& raw);

 private:
  CsMatrix(CMatrix entries, std::vector<double> norms, double scale);

  CMatrix entries_;
  std::vector<double> norms_;
  double d_min_;
  double d_max_;
  double scale_;
};

/// f_i = exp(-j*pi*(i-1)^2/N) for 1-based i; stored 0-based.
UnitModulusCode zadoff_chu(Index n);

/// Entries i.i.d. uniform over the 2^bits roots of unity.
UnitModulusCode random_low_res_code(Index n, unsigned bits, std::uint64_t seed);

/// Entries with i.i.d. uniform phase on [0, 2*pi) (unrestricted resolution).
UnitModulusCode random_unit_code(Index n, std::uint64_t seed);

/// M distinct shifts drawn uniformly without replacement from {0..N-1},
/// in draw order.
std::vector<Index> draw_distinct_shifts(Index n, Index m, std::uint64_t seed);

/// Row m is the code rotated right by shifts[m]: F(m, i) = f[(i - s_m) mod N].
CMatrix circulant_rows(const UnitModulusCode& code, std::span<const Index> shifts);

CMatrix circulant_measurement_matrix(const UnitModulusCode& code, Index m, std::uint64_t shift_seed);

/// Unitary DFT: U(p, q) = exp(-j*2*pi*p*q/N) / sqrt(N), 0-based p, q.
CMatrix dft_matrix(Index n);

/// A = F * U_N, Frobenius-normalized.
CsMatrix build_cs_matrix(const UnitModulusCode& code, Index m, std::uint64_t shift_seed);
CsMatrix build_cs_matrix(const UnitModulusCode& code, std::span<const Index> shifts);

/// Scales raw by sqrt(N)/||raw||_F. Rejects M >= N, the zero matrix and any
/// column whose normalized norm falls below 1e-12 * sqrt(N/M).
CsMatrix normalize_frobenius(const CMatrix& raw);

enum class CoherenceMethod { automatic, dense_gram, streaming };

/// Largest normalized inner product |a_j^H a_l| / (d_j d_l) over j != l.
/// `automatic` materializes the Gram matrix up to N = 4096 columns.
double mutual_coherence(const CsMatrix& a, CoherenceMethod method = CoherenceMethod::automatic);

/// d_max / d_min of build_cs_matrix(code, m, shifts) for any M and shift set.
/// Column q of F*U_N equals (shift phases) * DFT(f)_q / sqrt(N), so the ratio
/// is max|DFT(f)| / min|DFT(f)|. Infinity when the DFT has a null.
double code_norm_ratio(const UnitModulusCode& code);

struct CodeSearchRequest {
  double target_ratio = 1.0;
  std::optional<unsigned> bits = 2;  ///< nullopt: unrestricted phase
  Index rows = 20;
  Index cols = 32;
  Index attempts = 10000;
  std::uint64_t seed = 0;
  /// Fallback when no random draw lands within accept_band of the target:
  /// greedy single-entry descent on |ratio - target| from the closest draws.
  /// Only applies to finite alphabets. Descended codes have flatter spectra
  /// than random codes of the same ratio, so they are a last resort.
  bool refine = true;
  double accept_band = 0.05;
  /// Offer the Zadoff-Chu sequence as an extra candidate (unrestricted only).
  bool include_zadoff_chu = true;
};

struct CodeSearchResult {
  UnitModulusCode code;
  double ratio;
  bool refined = false;  ///< true when the code came from the descent fallback
};

CodeSearchResult search_code_by_norm_ratio(const CodeSearchRequest& request);

// Plain-text matrix file: `M N` header, then M lines of N `re+imj` entries.
// Leading `#` lines are metadata and ignored by the reader.
void write_matrix_text(std::ostream& out, const CMatrix& a,
                       std::span<const std::string> metadata = {});
CMatrix read_matrix_text(std::istream& in);

// CSV matrix file: header `row,col,re,im`, one line per entry, row-major.
void write_matrix_csv(std::ostream& out, const CMatrix& a,
                      std::span<const std::string> metadata = {});
CMatrix read_matrix_csv(std::istream& in);

// Code file: optional `# bits=<b>` line, then whitespace-separated `re+imj`
// entries (any line breaking). Without a bits line the code is unrestricted.
void write_code_text(std::ostream& out, const UnitModulusCode& code,
                     std::span<const std::string> metadata = {});
UnitModulusCode read_code_text(std::istream& in);
UnitModulusCode load_code_file(const std::string& path);

/// Dispatches on extension (.csv -> CSV, otherwise plain text).
CMatrix load_matrix_file(const std::string& path);
void save_matrix_file(const std::string& path, const CMatrix& a,
                      std::span<const std::string> metadata = {});

}  // namespace ompcs
