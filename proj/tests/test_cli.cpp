#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mvhvi/gallery.hpp"
#include "mvhvi/instance_io.hpp"

// Drives the installed binary end to end and checks the exit-code taxonomy
// and report determinism.

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MVHVI_CLI_PATH) + " " + args +
                          " > cli_stdout.txt 2> cli_stderr.txt";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::path("cli_tmp") / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("solve on a gallery instance exits 0 and writes reports") {
  TempDir dir("solve");
  const int rc = run_cli("solve --instance kink-multiplier --out " +
                         dir.path.string());
  CHECK(rc == 0);
  const std::string trace = slurp((dir.path / "trace.csv").string());
  CHECK(trace.rfind("iter,r,s,u_update_norm,compl_residual\n", 0) == 0);
  const std::string report = slurp((dir.path / "report.csv").string());
  CHECK(report.rfind("formulation,violation\n", 0) == 0);
  CHECK(report.find("\r") == std::string::npos); // LF endings only
}

TEST_CASE("identical run configuration yields byte-identical reports") {
  TempDir a("det_a"), b("det_b");
  REQUIRE(run_cli("solve --instance contact-rod-4 --seed 99 --out " +
                  a.path.string()) == 0);
  REQUIRE(run_cli("solve --instance contact-rod-4 --seed 99 --out " +
                  b.path.string()) == 0);
  CHECK(slurp((a.path / "trace.csv").string()) ==
        slurp((b.path / "trace.csv").string()));
  CHECK(slurp((a.path / "report.csv").string()) ==
        slurp((b.path / "report.csv").string()));
}

TEST_CASE("audit exits 2 when the LBB condition fails") {
  TempDir dir("audit");
  mvhvi::ProblemInstance inst = mvhvi::make_gallery_instance("kink-multiplier");
  inst.b.B.setZero();
  const std::string path = (dir.path / "b_zero.json").string();
  mvhvi::save_instance(inst, path);
  CHECK(run_cli("audit --instance " + path + " --out " + dir.path.string()) ==
        2);
  CHECK(slurp("cli_stdout.txt").find("H(b)-LBB: Violated") !=
        std::string::npos);
}

TEST_CASE("audit passes on gallery instances") {
  TempDir dir("audit_ok");
  CHECK(run_cli("audit --instance contact-rod-10 --out " +
                dir.path.string()) == 0);
}

TEST_CASE("verify exit codes distinguish certified pairs from rejects") {
  TempDir dir("verify");
  CHECK(run_cli("verify --instance kink-multiplier --u 0 --lambda 3 --out " +
                dir.path.string()) == 0);
  CHECK(run_cli("verify --instance kink-multiplier --u 1 --lambda 0 --out " +
                dir.path.string()) == 4);
}

TEST_CASE("oracle subcommand writes the hit list") {
  TempDir dir("oracle");
  const int rc =
      run_cli("oracle --instance kink-multiplier --r 2 --s 5 --delta 0.05 "
              "--tol 0.05 --out " +
              dir.path.string());
  CHECK(rc == 0);
  const std::string hits = slurp((dir.path / "oracle_hits.csv").string());
  CHECK(hits.rfind("violation,u,lambda\n", 0) == 0);
  CHECK(hits.size() > 30);
}

TEST_CASE("usage and io errors exit 1") {
  CHECK(run_cli("solve --instance no-such-file.json") == 1);
  CHECK(run_cli("bogus-subcommand") != 0);
}

TEST_CASE("solver failure exits 3") {
  TempDir dir("fail");
  mvhvi::ProblemInstance inst = mvhvi::make_gallery_instance("scalar-lcp");
  inst.A.P.setZero();
  inst.A.declared_m_A = 0.0;
  inst.h = mvhvi::HFunctionSpec::zero();
  inst.f[0] = 1.0;
  const std::string path = (dir.path / "flat.json").string();
  mvhvi::save_instance(inst, path);
  CHECK(run_cli("solve --force --instance " + path + " --out " +
                dir.path.string()) == 3);
}

TEST_CASE("stability subcommand runs a sweep") {
  CHECK(run_cli("stability --instance kink-multiplier --pairs 5 --seed 3") ==
        0);
}
