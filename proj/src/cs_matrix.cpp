#include "ompcs/cs_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ompcs/kernels.hpp"
#include "ompcs/rng.hpp"
#include "ompcs/text_format.hpp"

namespace ompcs {

namespace {

constexpr double kUnitModulusTol = 1e-12;
constexpr Index kDenseGramLimit = 4096;

cplx unit_phasor(double angle) { return {std::cos(angle), std::sin(angle)}; }

bool is_root_of_unity(cplx z, unsigned bits) {
  const double order = std::ldexp(1.0, static_cast<int>(bits));
  const double turns = std::arg(z) / (2.0 * std::numbers::pi) * order;
  return std::abs(turns - std::round(turns)) < 1e-9;
}

// Exact 2^bits-th roots of unity; quarter turns are written without cos/sin
// so the 2-bit alphabet is exactly {1, j, -1, -j}.
std::vector<cplx> root_alphabet(unsigned bits) {
  const Index order = Index{1} << bits;
  std::vector<cplx> alphabet(order);
  for (Index s = 0; s < order; ++s) {
    if ((4 * s) % order == 0) {
      static constexpr cplx quarter[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
      alphabet[s] = quarter[(4 * s) / order];
    } else {
      alphabet[s] = unit_phasor(2.0 * std::numbers::pi * static_cast<double>(s) /
                                static_cast<double>(order));
    }
  }
  return alphabet;
}

// Symbol indices in [0, 2^bits): `bits` bits at a time from the splitmix64
// sequence started at `seed`. Exactly uniform since the alphabet size is a
// power of two.
void draw_symbols(unsigned bits, std::uint64_t seed, std::span<std::uint32_t> out) {
  const unsigned per_word = 64 / bits;
  const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
  std::uint64_t word = 0;
  unsigned left = 0;
  std::uint64_t k = 0;
  for (auto& s : out) {
    if (left == 0) {
      word = splitmix64(seed + 0x9E3779B97F4A7C15ULL * k++);
      left = per_word;
    }
    s = static_cast<std::uint32_t>(word & mask);
    word >>= bits;
    --left;
  }
}

// Twiddle table for the length-N DFT, exp(-j 2 pi t / N).
std::vector<cplx> twiddles(Index n) {
  std::vector<cplx> w(n);
  for (Index t = 0; t < n; ++t)
    w[t] = unit_phasor(-2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n));
  return w;
}

double ratio_from_values(std::span<const cplx> f, const std::vector<cplx>& w) {
  const Index n = f.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (Index q = 0; q < n; ++q) {
    cplx acc{0.0, 0.0};
    for (Index i = 0; i < n; ++i) acc += f[i] * w[(i * q) % n];
    const double mag = std::abs(acc);
    lo = std::min(lo, mag);
    hi = std::max(hi, mag);
  }
  // Same zero-column rule as normalize_frobenius, expressed on |DFT(f)|.
  if (lo < 1e-12 * std::sqrt(static_cast<double>(n))) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

UnitModulusCode::UnitModulusCode(std::vector<cplx> values, std::optional<unsigned> alphabet_bits)
    : values_(std::move(values)), bits_(alphabet_bits) {
  require(!values_.empty(), "UnitModulusCode: empty code");
  require(!bits_ || (*bits_ >= 1 && *bits_ <= 30), "UnitModulusCode: alphabet bits out of range");
  for (const cplx& v : values_) {
    require(std::abs(std::abs(v) - 1.0) <= kUnitModulusTol,
            "UnitModulusCode: entry " + text::format_complex(v) + " is not unit modulus");
    if (bits_)
      require(is_root_of_unity(v, *bits_), "UnitModulusCode: entry " + text::format_complex(v) +
                                               " is outside the " + std::to_string(*bits_) +
                                               "-bit alphabet");
  }
}

CsMatrix::CsMatrix(CMatrix entries, std::vector<double> norms, double scale)
    : entries_(std::move(entries)), norms_(std::move(norms)), scale_(scale) {
  const auto [lo, hi] = std::minmax_element(norms_.begin(), norms_.end());
  d_min_ = *lo;
  d_max_ = *hi;
}

UnitModulusCode zadoff_chu(Index n) {
  require(n >= 1, "zadoff_chu: N must be at least 1");
  std::vector<cplx> f(n);
  for (Index i = 0; i < n; ++i) {
    // (i*i) mod 2N keeps the phase argument small for large N.
    const double num = static_cast<double>((i * i) % (2 * n));
    f[i] = unit_phasor(-std::numbers::pi * num / static_cast<double>(n));
  }
  return UnitModulusCode(std::move(f), std::nullopt);
}

UnitModulusCode random_low_res_code(Index n, unsigned bits, std::uint64_t seed) {
  require(n >= 1, "random_low_res_code: N must be at least 1");
  require(bits >= 1 && bits <= 30, "random_low_res_code: bits must be in [1, 30]");
  const auto alphabet = root_alphabet(bits);
  std::vector<std::uint32_t> symbols(n);
  draw_symbols(bits, seed, symbols);
  std::vector<cplx> f(n);
  for (Index i = 0; i < n; ++i) f[i] = alphabet[symbols[i]];
  return UnitModulusCode(std::move(f), bits);
}

UnitModulusCode random_unit_code(Index n, std::uint64_t seed) {
  require(n >= 1, "random_unit_code: N must be at least 1");
  Rng rng(seed);
  std::vector<cplx> f(n);
  for (auto& v : f) v = unit_phasor(2.0 * std::numbers::pi * rng.uniform());
  return UnitModulusCode(std::move(f), std::nullopt);
}

std::vector<Index> draw_distinct_shifts(Index n, Index m, std::uint64_t seed) {
  require(m >= 1, "draw_distinct_shifts: M must be at least 1");
  require(m <= n, "draw_distinct_shifts: cannot draw " + std::to_string(m) +
                      " distinct shifts from " + std::to_string(n));
  std::vector<Index> pool(n);
  std::iota(pool.begin(), pool.end(), Index{0});
  Rng rng(seed);
  for (Index i = 0; i < m; ++i) {
    const Index pick = i + static_cast<Index>(rng.below(n - i));
    std::swap(pool[i], pool[pick]);
  }
  pool.resize(m);
  return pool;
}

CMatrix circulant_rows(const UnitModulusCode& code, std::span<const Index> shifts) {
  const Index n = code.size();
  const auto& f = code.values();
  require(!shifts.empty() && shifts.size() <= n, "circulant_rows: need 1 <= M <= N shifts");
  CMatrix out(static_cast<Eigen::Index>(shifts.size()), static_cast<Eigen::Index>(n));
  for (Index m = 0; m < shifts.size(); ++m) {
    require(shifts[m] < n, "circulant_rows: shift out of range");
    for (Index i = 0; i < n; ++i)
      out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i)) = f[(i + n - shifts[m]) % n];
  }
  return out;
}

CMatrix circulant_measurement_matrix(const UnitModulusCode& code, Index m, std::uint64_t shift_seed) {
  const auto shifts = draw_distinct_shifts(code.size(), m, shift_seed);
  return circulant_rows(code, shifts);
}

CMatrix dft_matrix(Index n) {
  require(n >= 1, "dft_matrix: N must be at least 1");
  const auto w = twiddles(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  CMatrix u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Index p = 0; p < n; ++p)
    for (Index q = 0; q < n; ++q)
      u(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = scale * w[(p * q) % n];
  return u;
}

CsMatrix build_cs_matrix(const UnitModulusCode& code, std::span<const Index> shifts) {
  const CMatrix f = circulant_rows(code, shifts);
  return normalize_frobenius(f * dft_matrix(code.size()));
}

CsMatrix build_cs_matrix(const UnitModulusCode& code, Index m, std::uint64_t shift_seed) {
  const auto shifts = draw_distinct_shifts(code.size(), m, shift_seed);
  return build_cs_matrix(code, shifts);
}

CsMatrix normalize_frobenius(const CMatrix& raw) {
  const Index m = static_cast<Index>(raw.rows());
  const Index n = static_cast<Index>(raw.cols());
  require(m >= 1 && m < n, "CsMatrix: need 1 <= M < N, got M=" + std::to_string(m) +
                               " N=" + std::to_string(n));
  const auto& k = kernels::active();
  std::vector<double> sq(n);
  double total = 0.0;
  for (Index j = 0; j < n; ++j) {
    sq[j] = k.squared_norm(raw.col(static_cast<Eigen::Index>(j)).data(), m);
    total += sq[j];
  }
  require(total > 0.0 && std::isfinite(total), "normalize_frobenius: zero or non-finite matrix");

  const double scale = std::sqrt(static_cast<double>(n) / total);
  CMatrix scaled = raw * scale;
  std::vector<double> norms(n);
  const double zero_tol = 1e-12 * std::sqrt(static_cast<double>(n) / static_cast<double>(m));
  for (Index j = 0; j < n; ++j) {
    norms[j] = std::sqrt(k.squared_norm(scaled.col(static_cast<Eigen::Index>(j)).data(), m));
    require(norms[j] >= zero_tol, "normalize_frobenius: column " + std::to_string(j) + " is zero");
  }
  return CsMatrix(std::move(scaled), std::move(norms), scale);
}

double mutual_coherence(const CsMatrix& a, CoherenceMethod method) {
  const Index n = a.cols();
  const Index m = a.rows();
  require(n >= 2, "mutual_coherence: need at least two columns");
  if (method == CoherenceMethod::automatic)
    method = n <= kDenseGramLimit ? CoherenceMethod::dense_gram : CoherenceMethod::streaming;

  const auto& k = kernels::active();
  const cplx* data = a.entries().data();
  const auto& d = a.column_norms();
  double mu = 0.0;

  if (method == CoherenceMethod::dense_gram) {
    // Normalized Gram, upper triangle only; |G(j,l)| = |G(l,j)|.
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                 static_cast<Eigen::Index>(n));
    for (Index j = 0; j < n; ++j)
      for (Index l = j + 1; l < n; ++l)
        gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) =
            std::abs(k.dot_conj(data + j * m, data + l * m, m)) / (d[j] * d[l]);
    mu = gram.maxCoeff();
  } else {
    for (Index j = 0; j < n; ++j)
      for (Index l = j + 1; l < n; ++l)
        mu = std::max(mu, std::abs(k.dot_conj(data + j * m, data + l * m, m)) / (d[j] * d[l]));
  }
  return std::min(mu, 1.0);
}

double code_norm_ratio(const UnitModulusCode& code) {
  return ratio_from_values(code.values(), twiddles(code.size()));
}

namespace {

// |DFT(f)_q|^2 for codes over a 2^bits alphabet, as sums of entries of one
// table of L-th roots of unity, L = lcm(2^bits, N). Only built when L and N
// are small enough for the (q, i) index table.
class AlphabetSpectrum {
 public:
  AlphabetSpectrum(Index n, unsigned bits) : n_(n) {
    const Index order = Index{1} << bits;
    l_ = std::lcm(order, n);
    if (l_ > (Index{1} << 16) || n > 1024) return;
    roots_.resize(l_);
    for (Index m = 0; m < l_; ++m)
      roots_[m] = unit_phasor(2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(l_));
    symbol_step_ = l_ / order;
    index_.resize(n * n);
    for (Index q = 0; q < n; ++q)
      for (Index i = 0; i < n; ++i) index_[q * n + i] = static_cast<std::uint32_t>((l_ - (i * q % n) * (l_ / n)) % l_);
  }

  bool usable() const { return !roots_.empty(); }

  // d_max/d_min, or infinity as soon as it provably exceeds `limit` or a
  // bin is null.
  double ratio_bounded(std::span<const std::uint32_t> symbols, double limit) const {
    const double limit2 = limit * limit;
    const double null2 = 1e-24 * static_cast<double>(n_);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (Index q = 0; q < n_; ++q) {
      const std::uint32_t* row = &index_[q * n_];
      cplx acc{0.0, 0.0};
      for (Index i = 0; i < n_; ++i) {
        Index m = symbols[i] * symbol_step_ + row[i];
        if (m >= l_) m -= l_;
        acc += roots_[m];
      }
      const double mag2 = std::norm(acc);
      lo = std::min(lo, mag2);
      hi = std::max(hi, mag2);
      if (lo < null2 || hi > limit2 * lo) return std::numeric_limits<double>::infinity();
    }
    return std::sqrt(hi / lo);
  }

 private:
  Index n_;
  Index l_ = 0;
  Index symbol_step_ = 0;
  std::vector<cplx> roots_;
  std::vector<std::uint32_t> index_;
};

}  // namespace

CodeSearchResult search_code_by_norm_ratio(const CodeSearchRequest& req) {
  require(req.attempts >= 1, "search_code_by_norm_ratio: attempts must be at least 1");
  require(req.target_ratio >= 1.0, "search_code_by_norm_ratio: target ratio must be >= 1");
  require(req.rows >= 1 && req.rows < req.cols, "search_code_by_norm_ratio: need 1 <= M < N");

  const Index n = req.cols;
  const auto w = twiddles(n);
  const auto distance = [&](double ratio) { return std::abs(ratio - req.target_ratio); };
  const auto draw_seed = [&](Index t) { return derive_seed(req.seed, 0xC0DE, t); };
  const auto draw = [&](Index t) {
    return req.bits ? random_low_res_code(n, *req.bits, draw_seed(t)).values()
                    : random_unit_code(n, draw_seed(t)).values();
  };

  // Candidates in a fixed order (Zadoff-Chu first when offered, then draws);
  // a later candidate replaces the incumbent only on strict improvement, so
  // attempts = 1 returns the first draw unconditionally.
  std::vector<cplx> best;
  double best_ratio = std::numeric_limits<double>::infinity();
  bool have_best = false, refined = false;
  const auto consider = [&](std::vector<cplx> values, double r) {
    if (have_best && !(distance(r) < distance(best_ratio))) return false;
    best = std::move(values);
    best_ratio = r;
    have_best = true;
    return true;
  };
  if (!req.bits && req.include_zadoff_chu) {
    auto zc = zadoff_chu(n).values();
    const double r = ratio_from_values(zc, w);
    consider(std::move(zc), r);
  }

  // The closest kStarts draws, kept as a max-heap on (distance, index); they
  // seed the descent fallback. A draw that cannot enter the heap is rejected
  // as soon as its running ratio passes the heap's worst entry.
  constexpr Index kStarts = 32;
  std::vector<std::pair<double, Index>> heap;
  const auto offer = [&](double r, Index t) {
    const std::pair<double, Index> e{distance(r), t};
    if (heap.size() < kStarts) {
      heap.push_back(e);
      std::push_heap(heap.begin(), heap.end());
    } else if (e < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = e;
      std::push_heap(heap.begin(), heap.end());
    }
  };

  const AlphabetSpectrum spectrum(n, req.bits.value_or(1));
  const bool fast = req.bits && spectrum.usable();
  std::vector<std::uint32_t> symbols(n);
  for (Index t = 0; t < req.attempts; ++t) {
    if (fast && t > 0) {
      draw_symbols(*req.bits, draw_seed(t), symbols);
      double limit = std::numeric_limits<double>::infinity();
      if (heap.size() == kStarts) limit = (req.target_ratio + heap.front().first) * (1.0 + 1e-9);
      if (std::isinf(spectrum.ratio_bounded(symbols, limit))) continue;
    }
    auto values = draw(t);
    const double r = ratio_from_values(values, w);
    offer(r, t);
    consider(std::move(values), r);
  }

  if (req.refine && req.bits && !(distance(best_ratio) <= req.accept_band)) {
    // Steepest single-entry descent from each of the closest draws; one start
    // alone often stalls in a local minimum well away from the target.
    std::sort_heap(heap.begin(), heap.end());
    const auto alphabet = root_alphabet(*req.bits);
    for (const auto& [d, t] : heap) {
      std::vector<cplx> current = draw(t);
      double current_ratio = ratio_from_values(current, w);
      while (true) {
        Index best_pos = n;
        cplx best_symbol{};
        double best_candidate = current_ratio;
        for (Index i = 0; i < n; ++i) {
          const cplx original = current[i];
          for (const cplx& symbol : alphabet) {
            if (symbol == original) continue;
            current[i] = symbol;
            const double r = ratio_from_values(current, w);
            if (distance(r) < distance(best_candidate)) {
              best_candidate = r;
              best_pos = i;
              best_symbol = symbol;
            }
          }
          current[i] = original;
        }
        if (best_pos == n) break;
        current[best_pos] = best_symbol;
        current_ratio = best_candidate;
      }
      if (consider(std::move(current), current_ratio)) refined = true;
    }
  }

  return {UnitModulusCode(std::move(best), req.bits), best_ratio, refined};
}

void write_matrix_text(std::ostream& out, const CMatrix& a, std::span<const std::string> metadata) {
  for (const auto& line : metadata) out << "# " << line << '\n';
  out << a.rows() << ' ' << a.cols() << '\n';
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      if (c > 0) out << ' ';
      out << text::format_complex(a(r, c));
    }
    out << '\n';
  }
}

CMatrix read_matrix_text(std::istream& in) {
  std::string line;
  if (!text::next_data_line(in, line)) fail(Errc::parse, "matrix file: missing 'M N' header");
  std::istringstream header(line);
  long long rows = -1, cols = -1;
  if (!(header >> rows >> cols) || rows < 1 || cols < 1)
    fail(Errc::parse, "matrix file: bad header '" + line + "'");
  CMatrix a(rows, cols);
  for (long long r = 0; r < rows; ++r) {
    if (!text::next_data_line(in, line))
      fail(Errc::parse, "matrix file: expected " + std::to_string(rows) + " rows");
    std::istringstream row(line);
    std::string token;
    long long c = 0;
    while (row >> token) {
      if (c >= cols) fail(Errc::parse, "matrix file: too many entries in row " + std::to_string(r));
      a(r, c++) = text::parse_complex(token);
    }
    if (c != cols) fail(Errc::parse, "matrix file: too few entries in row " + std::to_string(r));
  }
  if (text::next_data_line(in, line)) fail(Errc::parse, "matrix file: trailing data");
  return a;
}

void write_matrix_csv(std::ostream& out, const CMatrix& a, std::span<const std::string> metadata) {
  for (const auto& line : metadata) out << "# " << line << '\n';
  out << "row,col,re,im\n";
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      out << r << ',' << c << ',' << text::format_double(a(r, c).real()) << ','
          << text::format_double(a(r, c).imag()) << '\n';
}

CMatrix read_matrix_csv(std::istream& in) {
  std::string line;
  if (!text::next_data_line(in, line) || text::trim(line) != "row,col,re,im")
    fail(Errc::parse, "matrix CSV: expected header 'row,col,re,im'");
  struct Entry {
    Index r, c;
    cplx v;
  };
  std::vector<Entry> entries;
  Index rows = 0, cols = 0;
  while (text::next_data_line(in, line)) {
    const auto parts = text::split(line, ',');
    if (parts.size() != 4) fail(Errc::parse, "matrix CSV: expected 4 fields in '" + line + "'");
    Entry e{text::parse_u64(parts[0]), text::parse_u64(parts[1]),
            {text::parse_double(parts[2]), text::parse_double(parts[3])}};
    rows = std::max(rows, e.r + 1);
    cols = std::max(cols, e.c + 1);
    entries.push_back(e);
  }
  if (entries.size() != rows * cols || entries.empty())
    fail(Errc::parse, "matrix CSV: entries do not cover a full matrix");
  CMatrix a = CMatrix::Constant(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols),
                                cplx(NAN, NAN));
  for (const auto& e : entries) {
    auto& slot = a(static_cast<Eigen::Index>(e.r), static_cast<Eigen::Index>(e.c));
    if (!std::isnan(slot.real())) fail(Errc::parse, "matrix CSV: duplicate entry");
    slot = e.v;
  }
  return a;
}

void write_code_text(std::ostream& out, const UnitModulusCode& code, std::span<const std::string> metadata) {
  for (const auto& line : metadata) out << "# " << line << '\n';
  if (code.alphabet_bits()) out << "# bits=" << *code.alphabet_bits() << '\n';
  for (Index i = 0; i < code.size(); ++i) out << text::format_complex(code.values()[i]) << '\n';
}

UnitModulusCode read_code_text(std::istream& in) {
  std::optional<unsigned> bits;
  std::vector<cplx> values;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = text::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto body = text::trim(t.substr(1));
      if (body.starts_with("bits=")) bits = static_cast<unsigned>(text::parse_u64(body.substr(5)));
      continue;
    }
    std::istringstream tokens{std::string(t)};
    std::string token;
    while (tokens >> token) values.push_back(text::parse_complex(token));
  }
  if (values.empty()) fail(Errc::parse, "code file: no entries");
  // Snap entries of a finite alphabet back onto exact roots of unity so that
  // rounding in the file cannot trip the unit-modulus check.
  if (bits) {
    const auto alphabet = root_alphabet(*bits);
    for (auto& v : values) {
      const auto nearest = std::min_element(alphabet.begin(), alphabet.end(), [&](cplx a, cplx b) {
        return std::abs(a - v) < std::abs(b - v);
      });
      if (std::abs(*nearest - v) > 1e-9) fail(Errc::parse, "code file: entry outside the declared alphabet");
      v = *nearest;
    }
  }
  return UnitModulusCode(std::move(values), bits);
}

UnitModulusCode load_code_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open code file '" + path + "'");
  return read_code_text(in);
}

CMatrix load_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open matrix file '" + path + "'");
  const bool csv = path.size() >= 4 && path.ends_with(".csv");
  return csv ? read_matrix_csv(in) : read_matrix_text(in);
}

void save_matrix_file(const std::string& path, const CMatrix& a, std::span<const std::string> metadata) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot write matrix file '" + path + "'");
  if (path.ends_with(".csv"))
    write_matrix_csv(out, a, metadata);
  else
    write_matrix_text(out, a, metadata);
  if (!out) fail(Errc::io, "failed writing matrix file '" + path + "'");
}

}  // namespace ompcs
