#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "ompcs/rng.hpp"
#include "ompcs/text_format.hpp"

using namespace ompcs;

TEST_CASE("rng is reproducible and seeds are separated") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    (void)c;
  }
  Rng d(42), e(43);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += d.next_u64() == e.next_u64();
  CHECK(same == 0);
}

TEST_CASE("mt19937_64 reference output is preserved") {
  // The standard fixes the 10000th output of a default-seeded mt19937_64.
  Rng rng(5489u);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next_u64();
  CHECK(v == 9981545732273789042ull);
}

TEST_CASE("uniform and below stay in range") {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.below(7) < 7);
  }
  CHECK(rng.below(1) == 0);
  CHECK_THROWS_AS(rng.below(0), Error);
}

TEST_CASE("below is close to uniform") {
  Rng rng(3);
  const int n = 60000;
  std::vector<int> counts(6);
  for (int i = 0; i < n; ++i) ++counts[rng.below(6)];
  double chi2 = 0;
  for (int c : counts) chi2 += (c - n / 6.0) * (c - n / 6.0) / (n / 6.0);
  // 5 degrees of freedom, 99.9% quantile 20.5
  CHECK(chi2 < 20.5);
}

TEST_CASE("complex_normal splits variance evenly between parts") {
  Rng rng(11);
  const int n = 200000;
  double sr = 0, si = 0, srr = 0, sii = 0, sri = 0;
  for (int i = 0; i < n; ++i) {
    const cplx z = rng.complex_normal(2.0);
    sr += z.real();
    si += z.imag();
    srr += z.real() * z.real();
    sii += z.imag() * z.imag();
    sri += z.real() * z.imag();
  }
  CHECK(std::abs(sr / n) < 0.01);
  CHECK(std::abs(si / n) < 0.01);
  CHECK(srr / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sii / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(sri / n) < 0.01);
}

TEST_CASE("derive_seed separates streams and indices") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
  // splitmix64 reference: first output of the generator seeded with 0.
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFull);
}

TEST_CASE("doubles round-trip through text") {
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double x = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.below(40)) - 20);
    CHECK(text::parse_double(text::format_double(x)) == x);
  }
  CHECK(text::format_double(0.5) == "0.5");
  CHECK(text::format_double(1.0) == "1");
  CHECK(std::isinf(text::parse_double("inf")));
  CHECK(std::isnan(text::parse_double("nan")));
  CHECK(text::parse_double("+2.5") == 2.5);
  CHECK_THROWS_AS(text::parse_double("2.5x"), Error);
  CHECK_THROWS_AS(text::parse_double(""), Error);
}

TEST_CASE("complex numbers round-trip through text") {
  CHECK(text::format_complex({0.5, -0.25}) == "0.5-0.25j");
  CHECK(text::format_complex({-1, 2}) == "-1+2j");
  CHECK(text::parse_complex("0.5-0.25j") == cplx(0.5, -0.25));
  CHECK(text::parse_complex("-1e-3+2E+2j") == cplx(-1e-3, 200));
  CHECK(text::parse_complex("1.5e-7-3e-9j") == cplx(1.5e-7, -3e-9));
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const cplx z = rng.complex_normal() * std::pow(10.0, static_cast<int>(rng.below(20)) - 10);
    CHECK(text::parse_complex(text::format_complex(z)) == z);
  }
  CHECK_THROWS_AS(text::parse_complex("1+2"), Error);
  CHECK_THROWS_AS(text::parse_complex("abc"), Error);
}

TEST_CASE("key-value parsing skips comments and keeps the last duplicate") {
  std::istringstream in("# comment\n\nN = 32\nM=20\nN=64\n");
  const auto kv = text::parse_key_values(in);
  CHECK(kv.at("N") == "64");
  CHECK(kv.at("M") == "20");
  CHECK(kv.size() == 2);
  std::istringstream bad("justakey\n");
  CHECK_THROWS_AS(text::parse_key_values(bad), Error);
}

TEST_CASE("split and trim") {
  const auto parts = text::split(" a, b ,c", ',');
  REQUIRE(parts.size() == 3);
  CHECK(text::trim(parts[0]) == "a");
  CHECK(text::trim(parts[1]) == "b");
  CHECK(parts[2] == "c");
  CHECK(text::parse_u64("18446744073709551615") == std::numeric_limits<std::uint64_t>::max());
  CHECK_THROWS_AS(text::parse_u64("-1"), Error);
}
