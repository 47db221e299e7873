#include "ompcs/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <thread>

#include "ompcs/guarantees.hpp"
#include "ompcs/omp.hpp"
#include "ompcs/rng.hpp"
#include "ompcs/sparse_model.hpp"
#include "ompcs/text_format.hpp"

namespace ompcs {

namespace {

// Seed streams under the master seed.
constexpr std::uint64_t kShiftStream = 0x5348494654ULL;   // "SHIFT"
constexpr std::uint64_t kSearchStream = 0x534541524348ULL; // "SEARCH"
constexpr std::uint64_t kPointStream = 0x504F494E54ULL;    // "POINT"

constexpr double kZ95 = 1.959963984540054;

struct TrialOutcome {
  bool ok = false;  // false: rank deficient, skipped
  double value = 0.0;
  double signal_energy = 0.0;
  bool support_ok = false;
  bool conditioned = false;
};

template <typename Fn>
std::vector<TrialOutcome> run_trials(Index trials, unsigned threads, Fn&& trial) {
  std::vector<TrialOutcome> out(trials);
  unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<Index>(workers, trials));
  const auto body = [&](Index begin, Index end) {
    for (Index t = begin; t < end; ++t) {
      try {
        out[t] = trial(t);
      } catch (const Error& e) {
        if (e.code() != Errc::rank_deficient) throw;
        out[t] = TrialOutcome{};
      }
    }
  };
  if (workers <= 1) {
    body(0, trials);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const Index chunk = (trials + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const Index begin = std::min<Index>(trials, w * chunk);
    const Index end = std::min<Index>(trials, begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::uint64_t trial_seed(const ExperimentConfig& cfg, Index point, Index trial) {
  return derive_seed(cfg.master_seed, kPointStream + point, trial);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += text::format_double(v[i]);
  }
  return out;
}

ExperimentResult make_result(ExperimentKind kind, const ExperimentConfig& cfg, const FamilyMatrix& fm) {
  ExperimentResult r;
  r.kind = kind;
  r.family_label = cfg.family.label();
  r.matrix_stats = {fm.mu, fm.matrix.d_min(), fm.matrix.d_max(), fm.matrix.norm_ratio()};
  r.config_hash = cfg.hash(kind);
  r.master_seed = cfg.master_seed;
  r.matrix_seed = fm.matrix_seed;
  r.code_refined = fm.code_refined;
  r.code = fm.code.values();
  return r;
}

}  // namespace

MatrixFamily MatrixFamily::parse(const std::string& token) {
  const auto t = std::string(text::trim(token));
  MatrixFamily f;
  if (t == "zc" || t == "zadoff_chu") {
    f.kind = Kind::zadoff_chu;
  } else if (t.starts_with("ratio:")) {
    f.kind = Kind::searched_ratio;
    f.target_ratio = text::parse_double(t.substr(6));
    require(f.target_ratio >= 1.0, "matrix family: target ratio must be >= 1");
  } else if (t.starts_with("code:")) {
    f.kind = Kind::fixed_code;
    f.code_file = t.substr(5);
    require(!f.code_file.empty(), "matrix family: empty code path");
  } else {
    fail(Errc::parse, "unknown matrix family '" + t + "' (expected zc, ratio:<r> or code:<path>)");
  }
  return f;
}

std::string MatrixFamily::label() const {
  switch (kind) {
    case Kind::zadoff_chu: return "zc";
    case Kind::searched_ratio: return "ratio:" + text::format_double(target_ratio);
    case Kind::fixed_code: return "code:" + code_file;
  }
  return {};
}

std::string to_string(ExperimentKind kind) { return kind == ExperimentKind::nmse ? "nmse" : "support"; }
std::string to_string(NoiseReference ref) { return ref == NoiseReference::array ? "array" : "normalized"; }

void ExperimentConfig::validate(ExperimentKind kind) const {
  require(m >= 1 && m < n, "experiment config: need 1 <= M < N");
  require(k >= 1 && k <= m, "experiment config: need 1 <= k <= M");
  require(trials >= 1, "experiment config: trials must be at least 1");
  require(!sweep.empty(), "experiment config: sweep is empty");
  // sigma = 0 is a valid NMSE operating point; x_min/sigma must be positive.
  for (double p : sweep)
    require(std::isfinite(p) && (p > 0.0 || (p == 0.0 && kind == ExperimentKind::nmse)),
            "experiment config: sweep points must be positive");
  require(code_bits >= 1 && code_bits <= 30, "experiment config: code_bits out of range");
  require(search_attempts >= 1, "experiment config: search_attempts must be at least 1");
  require(rho_over_sigma > 0.0, "experiment config: rho_over_sigma must be positive");
  require(sigma > 0.0 && std::isfinite(sigma), "experiment config: sigma must be positive");
}

double ExperimentConfig::noise_scale() const {
  return noise_reference == NoiseReference::array ? 1.0 / std::sqrt(static_cast<double>(m)) : 1.0;
}

std::string ExperimentConfig::canonical(ExperimentKind kind) const {
  std::ostringstream out;
  out << "experiment=" << to_string(kind) << '\n'
      << "N=" << n << '\n'
      << "M=" << m << '\n'
      << "k=" << k << '\n'
      << "family=" << family.label() << '\n'
      << "sweep=" << join_doubles(sweep) << '\n'
      << "trials=" << trials << '\n'
      << "seed=" << master_seed << '\n'
      << "code_bits=" << code_bits << '\n'
      << "search_attempts=" << search_attempts << '\n'
      << "noise_reference=" << to_string(noise_reference) << '\n'
      << "rho_over_sigma=" << text::format_double(rho_over_sigma) << '\n';
  if (kind == ExperimentKind::support) out << "sigma=" << text::format_double(sigma) << '\n';
  return out.str();
}

std::uint64_t ExperimentConfig::hash(ExperimentKind kind) const { return fnv1a(canonical(kind)); }

SimulationPlan parse_simulation_plan(const std::map<std::string, std::string>& kv) {
  static const char* known[] = {"N", "M", "k", "family", "families", "sweep", "trials", "seed", "code_bits",
                                "search_attempts", "noise_reference", "rho_over_sigma", "sigma", "threads",
                                "experiment"};
  for (const auto& [key, value] : kv) {
    (void)value;
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
        std::end(known))
      fail(Errc::parse, "config: unknown key '" + key + "'");
  }
  SimulationPlan plan;
  auto& c = plan.config;
  const auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto v = get("N")) c.n = text::parse_u64(*v);
  if (auto v = get("M")) c.m = text::parse_u64(*v);
  if (auto v = get("k")) c.k = text::parse_u64(*v);
  if (auto v = get("trials")) c.trials = text::parse_u64(*v);
  if (auto v = get("seed")) c.master_seed = text::parse_u64(*v);
  if (auto v = get("code_bits")) c.code_bits = static_cast<unsigned>(text::parse_u64(*v));
  if (auto v = get("search_attempts")) c.search_attempts = text::parse_u64(*v);
  if (auto v = get("rho_over_sigma")) c.rho_over_sigma = text::parse_double(*v);
  if (auto v = get("sigma")) c.sigma = text::parse_double(*v);
  if (auto v = get("threads")) c.threads = static_cast<unsigned>(text::parse_u64(*v));
  if (auto v = get("noise_reference")) {
    if (*v == "array")
      c.noise_reference = NoiseReference::array;
    else if (*v == "normalized")
      c.noise_reference = NoiseReference::normalized;
    else
      fail(Errc::parse, "config: noise_reference must be 'array' or 'normalized'");
  }
  if (auto v = get("sweep")) {
    for (auto part : text::split(*v, ','))
      if (!part.empty()) c.sweep.push_back(text::parse_double(part));
  }
  const std::string* fam = get("families");
  if (fam == nullptr) fam = get("family");
  if (fam != nullptr) {
    for (auto part : text::split(*fam, ','))
      if (!part.empty()) plan.families.push_back(MatrixFamily::parse(std::string(part)));
  }
  if (plan.families.empty()) plan.families.push_back(MatrixFamily{});
  c.family = plan.families.front();
  return plan;
}

FamilyMatrix realize_family(const ExperimentConfig& cfg) {
  const std::uint64_t matrix_seed = derive_seed(cfg.master_seed, kShiftStream);
  auto shifts = draw_distinct_shifts(cfg.n, cfg.m, matrix_seed);

  std::optional<UnitModulusCode> code;
  bool refined = false;
  switch (cfg.family.kind) {
    case MatrixFamily::Kind::zadoff_chu:
      code = zadoff_chu(cfg.n);
      break;
    case MatrixFamily::Kind::fixed_code:
      code = load_code_file(cfg.family.code_file);
      if (code->size() != cfg.n)
        fail(Errc::dimension_mismatch, "code file length does not match N=" + std::to_string(cfg.n));
      break;
    case MatrixFamily::Kind::searched_ratio: {
      CodeSearchRequest req;
      req.target_ratio = cfg.family.target_ratio;
      req.bits = cfg.code_bits;
      req.rows = cfg.m;
      req.cols = cfg.n;
      req.attempts = cfg.search_attempts;
      req.seed = derive_seed(cfg.master_seed, kSearchStream,
                             static_cast<std::uint64_t>(std::llround(cfg.family.target_ratio * 1e6)));
      auto found = search_code_by_norm_ratio(req);
      refined = found.refined;
      code = std::move(found.code);
      break;
    }
  }
  CsMatrix matrix = build_cs_matrix(*code, shifts);
  const double mu = mutual_coherence(matrix);
  return {std::move(*code), std::move(shifts), std::move(matrix), mu, matrix_seed, refined};
}

ExperimentResult run_nmse_experiment(const ExperimentConfig& cfg) {
  cfg.validate(ExperimentKind::nmse);
  const FamilyMatrix fm = realize_family(cfg);
  const CsMatrix& a = fm.matrix;
  ExperimentResult result = make_result(ExperimentKind::nmse, cfg, fm);

  for (Index p = 0; p < cfg.sweep.size(); ++p) {
    const double sigma = cfg.sweep[p] * cfg.noise_scale();
    const double rho_value = cfg.rho_over_sigma * sigma;
    const auto bound = mse_upper_bound(fm.mu, a.d_min(), a.d_max(), cfg.k, rho_value);

    const auto outcomes = run_trials(cfg.trials, cfg.threads, [&](Index t) {
      const std::uint64_t seed = trial_seed(cfg, p, t);
      const SparseSignal x = sample_sparse_signal(cfg.n, cfg.k, derive_seed(seed, 1));
      const CVector v = draw_noise(cfg.m, sigma, derive_seed(seed, 2));
      const CVector truth = x.dense();
      const CVector y = a.entries() * truth + v;
      const OmpTrace trace = omp_recover(a, y, cfg.k);
      TrialOutcome o;
      o.ok = true;
      o.value = (trace.estimate - truth).squaredNorm();
      o.signal_energy = truth.squaredNorm();
      o.support_ok = same_support(trace.selected_indices, x.support());
      o.conditioned = support_recovery_condition(fm.mu, a.d_min(), a.d_max(), cfg.k, x.x_min(), rho_value).holds &&
                      empirical_event_check(a, v, rho_value);
      return o;
    });

    PointResult pr;
    pr.operating_point = cfg.sweep[p];
    pr.bound = bound;
    double err_sum = 0.0, energy_sum = 0.0;
    Index support_hits = 0;
    for (const auto& o : outcomes) {
      if (!o.ok) {
        ++pr.rank_deficient;
        continue;
      }
      ++pr.trials;
      err_sum += o.value;
      energy_sum += o.signal_energy;
      support_hits += o.support_ok ? 1 : 0;
      pr.trial_values.push_back(o.value);
      if (o.conditioned) {
        ++pr.conditioned_trials;
        pr.conditioned_max_error = std::max(pr.conditioned_max_error, o.value);
        if (bound && o.value > *bound) ++pr.bound_violations;
      }
    }
    if (pr.trials > 0) {
      pr.value = err_sum / energy_sum;
      const double mean = err_sum / static_cast<double>(pr.trials);
      double ss = 0.0;
      for (double e : pr.trial_values) ss += (e - mean) * (e - mean);
      const double var = pr.trials > 1 ? ss / static_cast<double>(pr.trials - 1) : 0.0;
      const double mean_energy = energy_sum / static_cast<double>(pr.trials);
      pr.ci_half_width = kZ95 * std::sqrt(var / static_cast<double>(pr.trials)) / mean_energy;
      pr.support_rate = static_cast<double>(support_hits) / static_cast<double>(pr.trials);
    }
    result.points.push_back(std::move(pr));
  }
  return result;
}

ExperimentResult run_support_experiment(const ExperimentConfig& cfg) {
  cfg.validate(ExperimentKind::support);
  const FamilyMatrix fm = realize_family(cfg);
  const CsMatrix& a = fm.matrix;
  ExperimentResult result = make_result(ExperimentKind::support, cfg, fm);

  const double sigma = cfg.sigma * cfg.noise_scale();
  const double rho_value = cfg.rho_over_sigma * sigma;
  const auto threshold = min_coefficient_threshold(fm.mu, a.d_min(), a.d_max(), cfg.k, rho_value);

  for (Index p = 0; p < cfg.sweep.size(); ++p) {
    const double x_min = cfg.sweep[p] * cfg.sigma;
    const auto outcomes = run_trials(cfg.trials, cfg.threads, [&](Index t) {
      const std::uint64_t seed = trial_seed(cfg, p, t);
      const SparseSignal x =
          with_min_modulus(sample_sparse_signal_with_floor(cfg.n, cfg.k, x_min, derive_seed(seed, 1)), x_min);
      const CVector v = draw_noise(cfg.m, sigma, derive_seed(seed, 2));
      const CVector y = a.entries() * x.dense() + v;
      const OmpTrace trace = omp_recover(a, y, cfg.k);
      TrialOutcome o;
      o.ok = true;
      o.support_ok = same_support(trace.selected_indices, x.support());
      o.value = o.support_ok ? 1.0 : 0.0;
      o.conditioned = support_recovery_condition(fm.mu, a.d_min(), a.d_max(), cfg.k, x.x_min(), rho_value).holds &&
                      empirical_event_check(a, v, rho_value);
      return o;
    });

    PointResult pr;
    pr.operating_point = cfg.sweep[p];
    if (threshold) pr.bound = *threshold / cfg.sigma;
    Index hits = 0;
    for (const auto& o : outcomes) {
      if (!o.ok) {
        ++pr.rank_deficient;
        continue;
      }
      ++pr.trials;
      hits += o.support_ok ? 1 : 0;
      pr.trial_values.push_back(o.value);
      if (o.conditioned) {
        ++pr.conditioned_trials;
        if (!o.support_ok) ++pr.bound_violations;
      }
    }
    if (pr.trials > 0) {
      pr.value = static_cast<double>(hits) / static_cast<double>(pr.trials);
      pr.support_rate = pr.value;
      pr.ci_half_width = wilson_half_width(static_cast<double>(hits), static_cast<double>(pr.trials));
    }
    result.points.push_back(std::move(pr));
  }
  return result;
}

double nmse_db(double nmse) {
  require(nmse > 0.0 && std::isfinite(nmse), "nmse_db: NMSE must be positive");
  return 10.0 * std::log10(nmse);
}

std::optional<double> crossing_point(const ExperimentResult& result, double level) {
  const auto& pts = result.points;
  for (Index i = 0; i < pts.size(); ++i) {
    if (pts[i].value < level) continue;
    if (i == 0) return pts[0].operating_point;
    const auto& lo = pts[i - 1];
    const auto& hi = pts[i];
    const double frac = (level - lo.value) / (hi.value - lo.value);
    return lo.operating_point + frac * (hi.operating_point - lo.operating_point);
  }
  return std::nullopt;
}

double wilson_half_width(double successes, double trials) {
  require(trials > 0.0, "wilson_half_width: no trials");
  const double p = successes / trials;
  const double z2 = kZ95 * kZ95;
  return kZ95 * std::sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / (1.0 + z2 / trials);
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_config_lines(std::ostream& out, const ExperimentConfig& cfg, ExperimentKind kind) {
  std::istringstream echo(cfg.canonical(kind));
  std::string line;
  while (std::getline(echo, line)) out << "# " << line << '\n';
  out << "# trial_seed_rule=derive_seed(seed, " << kPointStream << " + point_index, trial_index)\n"
      << "# note=trial counts and sweep ranges are harness defaults, not published values\n";
}

void write_family_line(std::ostream& out, const ExperimentResult& r) {
  out << "# result family=" << r.family_label << " config_hash=" << hex64(r.config_hash)
      << " matrix_seed=" << r.matrix_seed << " mu=" << text::format_double(r.matrix_stats.mu)
      << " d_min=" << text::format_double(r.matrix_stats.d_min)
      << " d_max=" << text::format_double(r.matrix_stats.d_max)
      << " ratio=" << text::format_double(r.matrix_stats.ratio)
      << " code_search=" << (r.code_refined ? "descent" : "draw") << '\n';
}

std::string bound_token(const std::optional<double>& b, bool db = false) {
  if (!b) return "vacuous";
  if (db) return *b > 0.0 ? text::format_double(nmse_db(*b)) : "-inf";
  return text::format_double(*b);
}

void write_rows(std::ostream& out, const ExperimentResult& r) {
  const std::string ratio = text::format_double(r.matrix_stats.ratio);
  const std::string mu = text::format_double(r.matrix_stats.mu);
  const auto row = [&](const PointResult& p, const char* metric, double value, double ci, const std::string& bound) {
    out << text::format_double(p.operating_point) << ',' << metric << ',' << text::format_double(value) << ','
        << text::format_double(ci) << ',' << p.trials << ',' << ratio << ',' << mu << ',' << bound << '\n';
  };
  for (const auto& p : r.points) {
    if (r.kind == ExperimentKind::nmse) {
      row(p, "nmse", p.value, p.ci_half_width, bound_token(p.bound));
      if (p.value > 0.0) {
        // dB half-width from the upper end of the linear interval.
        const double ci_db = nmse_db(p.value + p.ci_half_width) - nmse_db(p.value);
        row(p, "nmse_db", nmse_db(p.value), ci_db, bound_token(p.bound, true));
      }
      const double hits = p.support_rate * static_cast<double>(p.trials);
      row(p, "support_rate", p.support_rate,
          p.trials ? wilson_half_width(hits, static_cast<double>(p.trials)) : 0.0, "none");
    } else {
      row(p, "support_rate", p.value, p.ci_half_width, bound_token(p.bound));
    }
  }
}

}  // namespace

void write_results_csv(std::ostream& out, const ExperimentConfig& cfg, std::span<const ExperimentResult> results) {
  require(!results.empty(), "write_results_csv: no results");
  write_config_lines(out, cfg, results.front().kind);
  for (const auto& r : results) write_family_line(out, r);
  out << "operating_point,metric,value,ci_half_width,trials,matrix_ratio,mu,bound_value\n";
  for (const auto& r : results) write_rows(out, r);
}

void write_result_csv(std::ostream& out, const ExperimentConfig& cfg, const ExperimentResult& r) {
  write_results_csv(out, cfg, std::span<const ExperimentResult>(&r, 1));
}

void write_result_metadata(std::ostream& out, const ExperimentConfig& cfg, const ExperimentResult& r) {
  write_config_lines(out, cfg, r.kind);
  write_family_line(out, r);
  out << "# code=";
  for (std::size_t i = 0; i < r.code.size(); ++i) out << (i ? " " : "") << text::format_complex(r.code[i]);
  out << '\n';
  out << "operating_point,completed_trials,rank_deficient,conditioned_trials,conditioned_max_error,bound_violations\n";
  for (const auto& p : r.points)
    out << text::format_double(p.operating_point) << ',' << p.trials << ',' << p.rank_deficient << ','
        << p.conditioned_trials << ',' << text::format_double(p.conditioned_max_error) << ','
        << p.bound_violations << '\n';
}

}  // namespace ompcs
