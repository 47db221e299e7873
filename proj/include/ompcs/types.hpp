#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ompcs {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = std::size_t;

enum class Errc {
  invalid_argument,
  dimension_mismatch,
  rank_deficient,
  parse,
  io,
};

// Every failure raised by the library carries one of the codes above so the
// command-line front end can map it onto a distinct exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(Errc::invalid_argument, what);
}

}  // namespace ompcs
