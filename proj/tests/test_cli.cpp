#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ompcs/cs_matrix.hpp"
#include "ompcs/guarantees.hpp"
#include "ompcs/sparse_model.hpp"
#include "ompcs/text_format.hpp"

namespace fs = std::filesystem;
using namespace ompcs;

namespace {

struct Workdir {
  fs::path path;
  Workdir() {
    path = fs::temp_directory_path() / ("ompcs_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~Workdir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(OMPCS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string capture(const std::string& args) {
  const std::string cmd = std::string(OMPCS_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = ::popen(cmd.c_str(), "r");
  std::string out;
  char buf[512];
  while (std::fgets(buf, sizeof buf, p) != nullptr) out += buf;
  ::pclose(p);
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("matrix subcommand") {
  Workdir w;
  const std::string out = capture("matrix --family zc --N 32 --M 20 --out " + (w / "zc.txt"));
  CHECK(out.find("ratio=1.000") != std::string::npos);
  CHECK(out.find("mu=") != std::string::npos);
  const std::string file = slurp(w / "zc.txt");
  CHECK(file.find("# family=zc") != std::string::npos);
  CHECK(file.find("# seed=1") != std::string::npos);

  CHECK(run("matrix --family random2bit --N 32 --M 20 --seed 7 --out " + (w / "a.txt")) == 0);
  CHECK(run("matrix --family random2bit --N 32 --M 20 --seed 7 --out " + (w / "b.txt")) == 0);
  CHECK(slurp(w / "a.txt") == slurp(w / "b.txt"));
  CHECK(run("matrix --family random2bit --N 32 --M 20 --seed 7 --out " + (w / "c.csv")) == 0);
  std::ifstream a(w / "a.txt"), c(w / "c.csv");
  CHECK(read_matrix_text(a) == read_matrix_csv(c));

  CHECK(run("matrix --family zc --N 32 --M 40") == 2);
  CHECK(run("matrix --family nope") == 2);
  CHECK(run("matrix --family file --N 32 --M 20") == 2);
  CHECK(run("matrix --family file --code " + (w / "missing.code") + " --N 32 --M 20") == 3);
  CHECK(run("matrix --family zc --out /nonexistent_dir/x.txt") == 3);

  CHECK(run("matrix --family random2bit --target-ratio 2.43 --attempts 500 --out " + (w / "r.txt") +
            " --code-out " + (w / "r.code")) == 0);
  CHECK(run("matrix --family file --code " + (w / "r.code") + " --out " + (w / "r2.txt")) == 0);
  std::ifstream r1(w / "r.txt"), r2(w / "r2.txt");
  CHECK(read_matrix_text(r1) == read_matrix_text(r2));
}

TEST_CASE("guarantee subcommand") {
  Workdir w;
  REQUIRE(run("matrix --family zc --out " + (w / "zc.txt")) == 0);

  CHECK(run("guarantee --matrix " + (w / "zc.txt") + " --k 2 --sigma 0 --out " + (w / "r0.txt")) == 0);
  {
    std::ifstream in(w / "r0.txt");
    const auto r = report_from_key_value(in);
    CHECK(r.rho == 0.0);
    CHECK(r.noiseless_k_max > 2.0);
    CHECK_FALSE(r.support_condition_holds.has_value());
  }

  CHECK(run("guarantee --matrix " + (w / "zc.txt") +
            " --k 2 --sigma 0.05 --rho-over-sigma 2.63 --x-min 1 --out " + (w / "r1.txt")) == 0);
  {
    std::ifstream in(w / "r1.txt");
    const auto r = report_from_key_value(in);
    CHECK(r.rho == doctest::Approx(0.1315));
    CHECK(*r.support_condition_holds);
    std::ifstream m(w / "zc.txt");
    const CsMatrix a = normalize_frobenius(read_matrix_text(m));
    GuaranteeInputs gi;
    gi.k = 2;
    gi.sigma = 0.05;
    gi.rho_over_sigma = 2.63;
    gi.x_min = 1.0;
    CHECK(r == full_report(a, gi));
  }

  CHECK(run("guarantee --matrix " + (w / "zc.txt") + " --k 6 --sigma 0.1 --alpha 0.5 --format csv --out " +
            (w / "r2.csv")) == 0);
  CHECK(slurp(w / "r2.csv").find("mse_bound,vacuous") != std::string::npos);

  CHECK(run("guarantee --matrix " + (w / "zc.txt") + " --k 2 --sigma 1 --alpha 0.1 --rho-over-sigma 3") == 2);
  CHECK(run("guarantee --matrix " + (w / "zc.txt") + " --k 2 --sigma -1") == 2);
  CHECK(run("guarantee --matrix " + (w / "none.txt") + " --k 2") == 3);
  CHECK(run("guarantee --k 2") == 2);
}

TEST_CASE("measure and recover subcommands") {
  Workdir w;
  REQUIRE(run("matrix --family zc --out " + (w / "zc.txt")) == 0);

  // noiseless, k within the sparsity limit: exact support
  REQUIRE(run("measure --matrix " + (w / "zc.txt") + " --k 2 --sigma 0 --seed 5 --signal-out " + (w / "x.csv") +
              " --out " + (w / "y.csv")) == 0);
  REQUIRE(run("recover --matrix " + (w / "zc.txt") + " --measurements " + (w / "y.csv") + " --k 2 --trace-out " +
              (w / "t.csv") + " --estimate-out " + (w / "e.csv")) == 0);
  std::ifstream xs(w / "x.csv"), es(w / "e.csv");
  const auto x = read_signal_csv(xs);
  const auto e = read_signal_csv(es);
  CHECK(e.support() == x.support());
  for (std::size_t i = 0; i < x.coefficients().size(); ++i)
    CHECK(std::abs(e.coefficients()[i] - x.coefficients()[i]) < 1e-10);
  const std::string trace = slurp(w / "t.csv");
  CHECK(trace.find("iteration,selected_index,residual_norm\n1,") != std::string::npos);
  CHECK(trace.find("# k=2") != std::string::npos);

  // single column
  {
    std::ifstream m(w / "zc.txt");
    const CsMatrix a = normalize_frobenius(read_matrix_text(m));
    MeasurementSet y;
    y.observations = a.entries().col(9);
    std::ofstream out(w / "col.csv");
    write_measurement_csv(out, y);
  }
  CHECK(run("recover --matrix " + (w / "zc.txt") + " --measurements " + (w / "col.csv") + " --k 1 --trace-out " +
            (w / "t1.csv") + " --estimate-out " + (w / "e1.csv")) == 0);
  CHECK(slurp(w / "t1.csv").find("\n1,9,") != std::string::npos);

  // dimension mismatch: measurements from a 10-row matrix
  REQUIRE(run("matrix --family zc --N 16 --M 10 --out " + (w / "small.txt")) == 0);
  REQUIRE(run("measure --matrix " + (w / "small.txt") + " --k 1 --out " + (w / "ys.csv") + " --signal-out " +
              (w / "xs.csv")) == 0);
  CHECK(run("recover --matrix " + (w / "zc.txt") + " --measurements " + (w / "ys.csv") + " --k 1 --trace-out " +
            (w / "t2.csv") + " --estimate-out " + (w / "e2.csv")) == 2);

  // Column 2 duplicates column 0. After the first pick the residual is zero,
  // every score ties at 0, index 0 is picked again and the refit is singular.
  {
    CMatrix raw(2, 3);
    raw << 1, 0, 1, 0, 1, 0;
    std::ofstream out(w / "dup.txt");
    write_matrix_text(out, raw);
    MeasurementSet y;
    y.observations = CVector::Zero(2);
    y.observations(0) = 1.0;
    std::ofstream ys(w / "dupy.csv");
    write_measurement_csv(ys, y);
  }
  CHECK(run("recover --matrix " + (w / "dup.txt") + " --measurements " + (w / "dupy.csv") + " --k 2 --trace-out " +
            (w / "t3.csv") + " --estimate-out " + (w / "e3.csv")) == 4);
}

TEST_CASE("simulate subcommand") {
  Workdir w;
  {
    std::ofstream cfg(w / "run.cfg");
    cfg << "# small run\nN=32\nM=20\nk=2\nfamily=zc,ratio:2.43\nsweep=0.5,1\ntrials=200\nsearch_attempts=300\n";
  }
  CHECK(run("simulate nmse --config " + (w / "run.cfg") + " --out " + (w / "n1.csv") + " --metadata-out " +
            (w / "n1.meta")) == 0);
  CHECK(run("simulate nmse --config " + (w / "run.cfg") + " --out " + (w / "n2.csv")) == 0);
  CHECK(slurp(w / "n1.csv") == slurp(w / "n2.csv"));
  const std::string csv = slurp(w / "n1.csv");
  CHECK(csv.find("# result family=zc") != std::string::npos);
  CHECK(csv.find("# result family=ratio:2.43") != std::string::npos);
  CHECK(csv.find("# trials=200") != std::string::npos);
  CHECK(slurp(w / "n1.meta").find("# code=") != std::string::npos);

  CHECK(run("simulate support --config " + (w / "run.cfg") + " --trials 50 --seed 3 --out " + (w / "s.csv")) == 0);
  const std::string s = slurp(w / "s.csv");
  CHECK(s.find("# trials=50") != std::string::npos);
  CHECK(s.find("# seed=3") != std::string::npos);
  CHECK(s.find(",support_rate,") != std::string::npos);

  {
    std::ofstream cfg(w / "empty.cfg");
    cfg << "N=32\nM=20\nsweep=\n";
  }
  CHECK(run("simulate nmse --config " + (w / "empty.cfg") + " --out " + (w / "x.csv")) == 2);
  {
    std::ofstream cfg(w / "bad.cfg");
    cfg << "N=32\nwhat\n";
  }
  CHECK(run("simulate nmse --config " + (w / "bad.cfg") + " --out " + (w / "x.csv")) == 2);
  CHECK(run("simulate nmse --config " + (w / "nope.cfg")) == 3);
  CHECK(run("simulate other --config " + (w / "run.cfg")) == 2);
  CHECK(run("") == 2);
}
