#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "ompcs/cs_matrix.hpp"
#include "ompcs/rng.hpp"
#include "ompcs/sparse_model.hpp"

using namespace ompcs;

TEST_CASE("SparseSignal validates and sorts") {
  const SparseSignal x(8, {5, 1}, {cplx(2, 0), cplx(0, -3)});
  CHECK(x.support() == std::vector<Index>{1, 5});
  CHECK(x.coefficients()[0] == cplx(0, -3));
  CHECK(x.x_min() == 2.0);
  CHECK(x.x_max() == 3.0);
  CHECK(x.norm() == doctest::Approx(std::sqrt(13.0)));
  const CVector d = x.dense();
  CHECK(d.size() == 8);
  CHECK(d(5) == cplx(2, 0));
  CHECK(d(0) == cplx(0, 0));

  CHECK_THROWS_AS(SparseSignal(4, {4}, {1.0}), Error);
  CHECK_THROWS_AS(SparseSignal(4, {1, 1}, {1.0, 1.0}), Error);
  CHECK_THROWS_AS(SparseSignal(4, {1}, {0.0}), Error);
  CHECK_THROWS_AS(SparseSignal(4, {1, 2}, {1.0}), Error);
}

TEST_CASE("sample_sparse_signal") {
  CHECK_THROWS_AS(sample_sparse_signal(4, 0, 1), Error);
  CHECK_THROWS_AS(sample_sparse_signal(4, 5, 1), Error);
  const auto one = sample_sparse_signal(1, 1, 3);
  CHECK(std::abs(one.coefficients()[0]) == doctest::Approx(1.0).epsilon(1e-15));

  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto x = sample_sparse_signal(32, 3, s);
    CHECK(std::abs(x.norm() - 1.0) < 1e-12);
    CHECK(x.sparsity() == 3);
  }
  const auto a = sample_sparse_signal(32, 2, 9);
  const auto b = sample_sparse_signal(32, 2, 9);
  CHECK(a.support() == b.support());
  CHECK(a.coefficients() == b.coefficients());
}

TEST_CASE("support sampling is uniform over indices") {
  const int draws = 100000;
  std::vector<int> counts(32);
  for (int s = 0; s < draws; ++s) {
    const auto x = sample_sparse_signal(32, 2, derive_seed(5, 0, s));
    for (Index i : x.support()) ++counts[i];
  }
  for (int c : counts) CHECK(std::abs(c / double(draws) - 2.0 / 32.0) < 0.005);
}

TEST_CASE("floor generator") {
  CHECK_THROWS_AS(sample_sparse_signal_with_floor(8, 1, 0.0, 1), Error);
  CHECK_THROWS_AS(sample_sparse_signal_with_floor(8, 1, -1.0, 1), Error);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto x = sample_sparse_signal_with_floor(16, 1, 0.5, s);
    const double m = std::abs(x.coefficients()[0]);
    CHECK(m >= 0.5);
    CHECK(m <= 1.0);
    const auto y = sample_sparse_signal_with_floor(16, 3, 0.2, s);
    CHECK(y.x_min() >= 0.2);
  }
  const auto x = sample_sparse_signal_with_floor(16, 3, 0.7, 4);
  const auto r = with_min_modulus(x, 0.3);
  CHECK(r.x_min() == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(r.support() == x.support());
  CHECK(r.x_max() / r.x_min() == doctest::Approx(x.x_max() / x.x_min()));
}

TEST_CASE("measure") {
  const CsMatrix a = build_cs_matrix(zadoff_chu(16), 10, 3);
  const auto x = sample_sparse_signal(16, 2, 1);
  const auto clean = measure(a, x, 0.0, 5);
  CHECK((clean.observations - a.entries() * x.dense()).cwiseAbs().maxCoeff() == 0.0);

  const SparseSignal e(16, {6}, {1.0});
  const auto y = measure(a, e, 0.3, 8);
  const CVector v = draw_noise(10, 0.3, 8);
  CHECK(((y.observations - v) - a.entries().col(6)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(y.noise_sigma == 0.3);
  CHECK(y.seed == 8);

  CHECK_THROWS_AS(measure(a, sample_sparse_signal(17, 2, 1), 0.0, 1), Error);
}

TEST_CASE("noise has total variance sigma^2 split evenly") {
  const int draws = 100000;
  double rr = 0, ii = 0, ri = 0;
  for (int s = 0; s < draws; ++s) {
    const cplx v = draw_noise(1, 1.0, derive_seed(3, 0, s))(0);
    rr += v.real() * v.real();
    ii += v.imag() * v.imag();
    ri += v.real() * v.imag();
  }
  CHECK(std::abs(rr / draws - 0.5) < 0.01);
  CHECK(std::abs(ii / draws - 0.5) < 0.01);
  CHECK(std::abs(ri / draws) < 0.01);
}

TEST_CASE("same_support ignores order") {
  const std::vector<Index> a{3, 1}, b{1, 3}, c{1, 4};
  CHECK(same_support(a, b));
  CHECK_FALSE(same_support(a, c));
  CHECK_FALSE(same_support(a, std::vector<Index>{1}));
}

TEST_CASE("signal and measurement CSV round-trip") {
  const auto x = sample_sparse_signal(20, 3, 2);
  std::stringstream s;
  write_signal_csv(s, x, std::vector<std::string>{"k=3"});
  const auto back = read_signal_csv(s);
  CHECK(back.length() == 20);
  CHECK(back.support() == x.support());
  CHECK(back.coefficients() == x.coefficients());

  const CsMatrix a = build_cs_matrix(zadoff_chu(20), 12, 1);
  const auto y = measure(a, x, 0.25, 77);
  std::stringstream m;
  write_measurement_csv(m, y);
  CHECK(m.str().find("# sigma=0.25\n") != std::string::npos);
  CHECK(m.str().find("# seed=77\n") != std::string::npos);
  const auto yb = read_measurement_csv(m);
  CHECK(yb.observations == y.observations);
  CHECK(yb.noise_sigma == 0.25);
  CHECK(yb.seed == 77);

  std::istringstream gap("row,re,im\n0,1,0\n2,1,0\n");
  CHECK_THROWS_AS(read_measurement_csv(gap), Error);
  std::istringstream header("idx,re,im\n0,1,0\n");
  CHECK_THROWS_AS(read_signal_csv(header), Error);
}
