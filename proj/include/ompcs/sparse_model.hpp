#pragma once

// Ground-truth k-sparse signals and noisy measurements y = A x + v.
//
// Noise convention: every entry of v is circularly-symmetric complex Gaussian
// with total variance sigma^2, i.e. real and imaginary parts each N(0, sigma^2/2).
// All guarantee formulas downstream assume exactly this convention.
//
// Indices are 0-based throughout (support entries lie in [0, N)).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ompcs/cs_matrix.hpp"
#include "ompcs/types.hpp"

namespace ompcs {

class SparseSignal {
 public:
  /// Support and coefficients are reordered jointly by ascending index.
  SparseSignal(Index length, std::vector<Index> support, std::vector<cplx> coefficients);

  Index length() const noexcept { return length_; }
  Index sparsity() const noexcept { return support_.size(); }
  const std::vector<Index>& support() const noexcept { return support_; }
  const std::vector<cplx>& coefficients() const noexcept { return coefficients_; }

  double x_min() const;
  double x_max() const;
  double norm() const;
  CVector dense() const;

 private:
  Index length_;
  std::vector<Index> support_;
  std::vector<cplx> coefficients_;
};

struct MeasurementSet {
  CVector observations;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Uniform k-subset support, i.i.d. CN(0,1) coefficients, then ||x||_2 = 1.
SparseSignal sample_sparse_signal(Index n, Index k, std::uint64_t seed);

/// Uniform k-subset support; coefficient moduli x_min_target * (1 + u) with
/// u ~ U[0,1) and uniform phase, so every modulus is >= x_min_target.
SparseSignal sample_sparse_signal_with_floor(Index n, Index k, double x_min_target, std::uint64_t seed);

/// Same signal rescaled so that its weakest coefficient modulus equals `x_min`.
SparseSignal with_min_modulus(const SparseSignal& x, double x_min);

/// M i.i.d. CN(0, sigma^2) draws. sigma = 0 gives the zero vector.
CVector draw_noise(Index m, double sigma, std::uint64_t seed);

/// y = A x + draw_noise(M, sigma, seed).
MeasurementSet measure(const CsMatrix& a, const SparseSignal& x, double sigma, std::uint64_t seed);

/// Exact set equality of two supports (order-insensitive).
bool same_support(std::span<const Index> lhs, std::span<const Index> rhs);

// Signal CSV: `# length=N`, header `index,re,im`.
void write_signal_csv(std::ostream& out, const SparseSignal& x,
                      std::span<const std::string> metadata = {});
SparseSignal read_signal_csv(std::istream& in);

/// Dense estimate written in the signal format, keeping only the given support.
void write_estimate_csv(std::ostream& out, const CVector& estimate, std::span<const Index> support,
                        std::span<const std::string> metadata = {});

// Measurement CSV: `# sigma=..`, `# seed=..`, header `row,re,im`.
void write_measurement_csv(std::ostream& out, const MeasurementSet& y,
                           std::span<const std::string> metadata = {});
MeasurementSet read_measurement_csv(std::istream& in);

}  // namespace ompcs
