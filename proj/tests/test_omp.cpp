#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ompcs/cs_matrix.hpp"
#include "ompcs/guarantees.hpp"
#include "ompcs/omp.hpp"
#include "ompcs/rng.hpp"
#include "ompcs/sparse_model.hpp"

using namespace ompcs;

namespace {

CsMatrix random_cs(Index m, Index n, std::uint64_t seed) {
  Rng rng(seed);
  CMatrix a(m, n);
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = rng.complex_normal();
  return normalize_frobenius(a);
}

// Least squares through explicitly formed normal equations, a different
// solver from the QR path under test.
CVector normal_equations(const CsMatrix& a, const std::vector<Index>& s, const CVector& y) {
  CMatrix as(a.rows(), s.size());
  for (std::size_t c = 0; c < s.size(); ++c) as.col(c) = a.entries().col(s[c]);
  const CMatrix g = as.adjoint() * as;
  return g.ldlt().solve(as.adjoint() * y);
}

double residual_on(const CsMatrix& a, const std::vector<Index>& s, const CVector& y) {
  return (y - [&] {
           CMatrix as(a.rows(), s.size());
           for (std::size_t c = 0; c < s.size(); ++c) as.col(c) = a.entries().col(s[c]);
           return CVector(as * normal_equations(a, s, y));
         }())
      .norm();
}

// Exhaustive search over all k-subsets for the least-squares-optimal support.
std::vector<Index> best_support_oracle(const CsMatrix& a, const CVector& y, Index k) {
  const Index n = a.cols();
  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(k), true);
  std::vector<Index> best;
  double best_res = INFINITY;
  do {
    std::vector<Index> s;
    for (Index i = 0; i < n; ++i)
      if (mask[i]) s.push_back(i);
    const double r = residual_on(a, s, y);
    if (r < best_res) {
      best_res = r;
      best = s;
    }
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

}  // namespace

TEST_CASE("single noiseless column") {
  const CsMatrix a = build_cs_matrix(zadoff_chu(16), 8, 2);
  for (Index j : {0u, 5u, 15u}) {
    const CVector y = a.entries().col(j);
    const auto t = omp_recover(a, y, 1);
    REQUIRE(t.selected_indices.size() == 1);
    CHECK(t.selected_indices[0] == j);
    CHECK(std::abs(t.estimate(j) - cplx(1, 0)) < 1e-12);
    CHECK(t.residual_norms.back() < 1e-12);
    CHECK(t.estimate.size() == 16);
  }
}

TEST_CASE("selection is norm-weighted") {
  // Column 0 has a large norm and a moderate normalized correlation with y;
  // column 1 is exactly aligned with y. Unweighted correlation would pick 0.
  CMatrix raw(2, 3);
  raw << 3.0, 1.0, 0.0,
         3.0, 0.0, 1.0;
  const CsMatrix a = normalize_frobenius(raw);
  const CVector y = a.entries().col(1);
  // |a_0^H y| = 3 s^2 > |a_1^H y| = s^2, but divided by d_j: 3s^2/(3 sqrt2 s) < s.
  const auto t = omp_recover(a, y, 1);
  CHECK(t.selected_indices[0] == 1);
}

TEST_CASE("ties go to the lowest index") {
  CMatrix raw(2, 3);
  raw << 1.0, 1.0, 0.0,
         0.0, 0.0, 1.0;
  const CsMatrix a = normalize_frobenius(raw);
  const CVector y = a.entries().col(1);
  CHECK(omp_recover(a, y, 1).selected_indices[0] == 0);
}

TEST_CASE("preconditions") {
  const CsMatrix a = random_cs(6, 12, 1);
  CHECK_THROWS_AS(omp_recover(a, CVector::Zero(6), 0), Error);
  CHECK_THROWS_AS(omp_recover(a, CVector::Zero(6), 7), Error);
  try {
    omp_recover(a, CVector::Zero(5), 1);
    FAIL("expected dimension mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::dimension_mismatch);
  }
}

TEST_CASE("rank deficiency is reported") {
  CMatrix raw(3, 4);
  raw << 1, 1, 0, 0,
         0, 0, 1, 0,
         0, 0, 0, 1;
  const CsMatrix a = normalize_frobenius(raw);
  const std::vector<Index> dup{0, 1};
  try {
    least_squares_on_support(a, dup, CVector::Ones(3));
    FAIL("expected rank deficiency");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::rank_deficient);
  }
}

TEST_CASE("least squares on support") {
  const CsMatrix a = random_cs(10, 20, 3);
  const std::vector<Index> one{4};
  const CVector y = cplx(0.3, -2.0) * a.entries().col(4);
  CHECK(std::abs(least_squares_on_support(a, one, y)(0) - cplx(0.3, -2.0)) < 1e-12);

  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const CsMatrix m = random_cs(10, 20, seed);
    Rng r(seed + 1000);
    CVector obs(10);
    for (auto& v : obs) v = r.complex_normal();
    const std::vector<Index> s{1, 7, 13};
    const CVector z = least_squares_on_support(m, s, obs);
    const CVector w = normal_equations(m, s, obs);
    CHECK((z - w).norm() <= 1e-8 * w.norm());
    CVector res = obs;
    for (std::size_t c = 0; c < s.size(); ++c) res -= z(c) * m.entries().col(s[c]);
    for (Index j : s) CHECK(std::abs(m.entries().col(j).dot(res)) < 1e-8 * obs.norm());
  }
}

TEST_CASE("orthogonal columns give decoupled projections") {
  CMatrix raw = CMatrix::Zero(3, 4);
  raw(0, 0) = 2.0;
  raw(1, 1) = cplx(0, 1);
  raw(2, 2) = 0.5;
  raw(2, 3) = 1.0;
  const CsMatrix a = normalize_frobenius(raw);
  CVector y(3);
  y << cplx(1, 2), cplx(-1, 0.5), cplx(0, 0);
  const std::vector<Index> s{0, 1};
  const CVector z = least_squares_on_support(a, s, y);
  for (std::size_t c = 0; c < 2; ++c) {
    const auto col = a.entries().col(s[c]);
    CHECK(std::abs(z(c) - col.dot(y) / col.squaredNorm()) < 1e-12);
  }
}

TEST_CASE("trace invariants on noisy data") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const CsMatrix a = random_cs(12, 24, seed);
    const auto x = sample_sparse_signal(24, 4, seed);
    const auto y = measure(a, x, 0.3, seed + 7);
    const auto t = omp_recover(a, y.observations, 4);
    CHECK(t.selected_indices.size() == 4);
    auto sorted = t.selected_indices;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    for (std::size_t i = 1; i < t.residual_norms.size(); ++i)
      CHECK(t.residual_norms[i] <= t.residual_norms[i - 1] * (1 + 1e-12));
    for (Eigen::Index j = 0; j < t.estimate.size(); ++j) {
      const bool on = std::find(sorted.begin(), sorted.end(), Index(j)) != sorted.end();
      if (!on) CHECK(t.estimate(j) == cplx(0, 0));
    }
    const CVector r = y.observations - a.entries() * t.estimate;
    CHECK(r.norm() == doctest::Approx(t.residual_norms.back()).epsilon(1e-10));
    for (Index j : sorted) CHECK(std::abs(a.entries().col(j).dot(r)) < 1e-8 * y.observations.norm());
  }
}

TEST_CASE("scale equivariance") {
  const CsMatrix a = random_cs(10, 20, 9);
  const auto x = sample_sparse_signal(20, 3, 4);
  const auto y = measure(a, x, 0.2, 1);
  const auto t1 = omp_recover(a, y.observations, 3);
  const cplx c(-0.7, 2.1);
  const auto t2 = omp_recover(a, CVector(c * y.observations), 3);
  CHECK(t1.selected_indices == t2.selected_indices);
  CHECK((t2.estimate - c * t1.estimate).norm() < 1e-10 * t2.estimate.norm());
}

TEST_CASE("early exit on residual tolerance") {
  const CsMatrix a = build_cs_matrix(zadoff_chu(16), 10, 1);
  const SparseSignal x(16, {3}, {1.0});
  OmpOptions opts;
  opts.residual_tolerance = 1e-9;
  const auto t = omp_recover(a, a.entries() * x.dense(), 5, opts);
  CHECK(t.selected_indices.size() == 1);
  CHECK(t.residual_norms.size() == 1);
}

TEST_CASE("noiseless recovery within the sparsity limit matches exhaustive search") {
  // At 8x16 the Welch bound keeps mu above 0.258, so the limit never admits
  // k = 3; k is capped by floor(k_max) instead. Partial-DFT matrices from
  // random 2-bit codes reach k_max >= 1 often enough to exercise the check.
  int checked = 0;
  for (std::uint64_t seed = 1; checked < 30 && seed < 20000; ++seed) {
    const auto code = random_low_res_code(16, 2, seed);
    if (!std::isfinite(code_norm_ratio(code))) continue;  // DFT null: zero column
    const CsMatrix a = build_cs_matrix(code, 8, seed);
    const double mu = mutual_coherence(a);
    const double kmax = noiseless_max_sparsity(mu, a.d_min(), a.d_max());
    const Index k = std::min<Index>(3, static_cast<Index>(std::floor(kmax)));
    if (k < 1) continue;
    const auto x = sample_sparse_signal(16, k, seed);
    const CVector y = a.entries() * x.dense();
    const auto t = omp_recover(a, y, k);
    CHECK(same_support(t.selected_indices, x.support()));
    CHECK(same_support(t.selected_indices, best_support_oracle(a, y, k)));
    ++checked;
  }
  CHECK(checked == 30);
}

TEST_CASE("exhaustive oracle agreement for k=3 on well-separated instances") {
  // 8x16 with k=3 and dominant coefficients: OMP and the exhaustive
  // least-squares search should agree whenever OMP finds the true support.
  int agree = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const CsMatrix a = random_cs(8, 16, seed);
    const auto x = sample_sparse_signal(16, 3, seed + 50);
    const CVector y = a.entries() * x.dense();
    const auto t = omp_recover(a, y, 3);
    if (!same_support(t.selected_indices, x.support())) continue;
    ++total;
    agree += same_support(best_support_oracle(a, y, 3), t.selected_indices);
  }
  CHECK(total > 0);
  CHECK(agree == total);
}

TEST_CASE("trace CSV") {
  OmpTrace t;
  t.selected_indices = {4, 1};
  t.residual_norms = {0.5, 0.25};
  std::ostringstream out;
  write_trace_csv(out, t, std::vector<std::string>{"k=2"});
  CHECK(out.str() == "# k=2\niteration,selected_index,residual_norm\n1,4,0.5\n2,1,0.25\n");
}
