// End-to-end checks of the installed command surface.  The binary path
// arrives in the AFQM_CLI environment variable (set by CTest).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "afqm/analysis.hpp"
#include "afqm/policy.hpp"
#include "afqm/trialsim.hpp"

namespace fs = std::filesystem;
using namespace afqm;

namespace {

std::string cli() {
  const char* path = std::getenv("AFQM_CLI");
  REQUIRE(path != nullptr);
  return path;
}

struct RunResult {
  int exit_code;
  std::string stdout_text;
};

RunResult run(const std::string& args) {
  const fs::path out = fs::temp_directory_path() / "afqm_cli_stdout.txt";
  const std::string cmd = cli() + " " + args + " > " + out.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  std::ifstream in(out);
  std::ostringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(raw), ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path workdir() {
  const auto dir = fs::temp_directory_path() / "afqm_cli_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("train writes a policy that beats the zero-feedback baseline") {
  const auto dir = workdir();
  const auto out = dir / "p4.json";
  const auto res = run("train --state sine --n 4 --iters 40 --agents 20 "
                       "--trials 160 --seed 1 --out " + out.string());
  CAPTURE(res.stdout_text);
  REQUIRE(res.exit_code == 0);

  const auto rec = load_policy_file(out.string());
  CHECK(rec.policy.state_kind == StateKind::Sine);
  CHECK(rec.policy.n_trained == 4);
  CHECK(rec.policy.ns() == 4);

  InverseScalingPolicy zero;
  zero.wp = 1.0;
  zero.coeffs = {0.0, 0.0, 0.0, 0.0};
  const auto baseline = estimate_cost(StateKind::Sine, 4, zero, {},
                                      rec.cost_trials, rec.cost_seed);
  CHECK(rec.cost < baseline.holevo_variance);

  CHECK(fs::exists(dir / "p4.trace.csv"));
  CHECK(fs::exists(dir / "p4.json.manifest.json"));
  const auto trace = slurp(dir / "p4.trace.csv");
  CHECK(trace.rfind("iteration,iteration_best,best_so_far\n", 0) == 0);
}

TEST_CASE("train refuses an sss register of one qubit") {
  const auto res = run("train --state sss --n 1 --out /tmp/x.json");
  CHECK(res.exit_code == 2);
}

TEST_CASE("unknown flags and missing subcommands are usage errors") {
  CHECK(run("").exit_code == 2);
  CHECK(run("train --state sine --n 4").exit_code == 2);      // missing --out
  CHECK(run("frobnicate").exit_code == 2);
  CHECK(run("--version").exit_code == 0);
}

TEST_CASE("eval reproduces the recorded held-out cost bit for bit") {
  const auto dir = workdir();
  const auto policy = dir / "p4.json";
  if (!fs::exists(policy)) {
    REQUIRE(run("train --state sine --n 4 --iters 40 --agents 20 --trials 160 "
                "--seed 1 --out " + policy.string()).exit_code == 0);
  }
  const auto rec = load_policy_file(policy.string());
  const auto out = dir / "eval.csv";
  const auto res = run("eval --policy " + policy.string() +
                       " --n 4 --trials " + std::to_string(rec.cost_trials) +
                       " --seed " + std::to_string(rec.cost_seed) +
                       " --out " + out.string());
  REQUIRE(res.exit_code == 0);
  std::ifstream in(out);
  const auto rows = parse_scaling_csv(in);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].cost.holevo_variance == rec.cost);  // exact reproduction
  CHECK(rows[0].n_qubits == 4);
}

TEST_CASE("eval output is byte-identical across reruns and thread caps") {
  const auto dir = workdir();
  const auto policy = dir / "p4.json";
  if (!fs::exists(policy)) {
    REQUIRE(run("train --state sine --n 4 --iters 40 --agents 20 --trials 160 "
                "--seed 1 --out " + policy.string()).exit_code == 0);
  }
  const auto a = dir / "det_a.csv";
  const auto b = dir / "det_b.csv";
  const auto c = dir / "det_c.csv";
  const std::string common = "eval --policy " + policy.string() +
                             " --n 6 --trials 2000 --seed 42 --loss-eta 0.1 --out ";
  REQUIRE(run(common + a.string() + " --threads 1").exit_code == 0);
  REQUIRE(run(common + b.string() + " --threads 2").exit_code == 0);
  REQUIRE(run(common + c.string()).exit_code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) == slurp(c));
}

TEST_CASE("eval with a missing policy file exits 3") {
  const auto res = run("eval --policy /nonexistent/p.json --n 4 --out /tmp/x.csv");
  CHECK(res.exit_code == 3);
}

TEST_CASE("sweep honors the log-spaced grid and feeds fit") {
  const auto dir = workdir();
  const auto policy = dir / "p4.json";
  if (!fs::exists(policy)) {
    REQUIRE(run("train --state sine --n 4 --iters 40 --agents 20 --trials 160 "
                "--seed 1 --out " + policy.string()).exit_code == 0);
  }
  const auto out = dir / "sweep.csv";
  const auto res = run("sweep --policy " + policy.string() +
                       " --n-grid 8:256:log8 --trials 100 --seed 2 --out " +
                       out.string());
  REQUIRE(res.exit_code == 0);
  std::ifstream in(out);
  const auto rows = parse_scaling_csv(in);
  REQUIRE(rows.size() == 8);
  const int want[] = {8, 13, 22, 35, 58, 95, 156, 256};
  for (int i = 0; i < 8; ++i) CHECK(rows[i].n_qubits == want[i]);
  CHECK(fs::exists(dir / "sweep.ref.csv"));
  const auto ref = slurp(dir / "sweep.ref.csv");
  CHECK(ref.rfind("n,sql,hl\n", 0) == 0);

  const auto fit = run("fit --in " + out.string() + " --out " +
                       (dir / "fit.json").string());
  CHECK(fit.exit_code == 0);
  CHECK(fit.stdout_text.find("alpha") != std::string::npos);

  // a sweep with too few rows cannot be fit
  const auto small = dir / "small.csv";
  REQUIRE(run("sweep --policy " + policy.string() +
              " --n-grid 4,6 --trials 100 --seed 2 --out " + small.string())
              .exit_code == 0);
  CHECK(run("fit --in " + small.string()).exit_code == 3);
  CHECK(run("fit --in /nonexistent.csv").exit_code == 3);
}

TEST_CASE("sweep requires a policy source") {
  CHECK(run("sweep --n-grid 4,8 --out /tmp/x.csv").exit_code == 2);
}

TEST_CASE("oracle-check passes by default and refuses oversized registers") {
  const auto res = run("oracle-check --n 5 --cases 12 --seed 3");
  CAPTURE(res.stdout_text);
  CHECK(res.exit_code == 0);
  CHECK(res.stdout_text.find("PASS") != std::string::npos);
  CHECK(res.stdout_text.find("max total-variation") != std::string::npos);
  CHECK(res.stdout_text.find("case 0") != std::string::npos);

  CHECK(run("oracle-check --n 13").exit_code == 2);
}

TEST_CASE("train outputs are byte-identical across reruns") {
  const auto dir = workdir();
  const auto a = dir / "rep_a.json";
  const auto b = dir / "rep_b.json";
  const std::string common = "train --state css --n 3 --iters 15 --agents 12 "
                             "--trials 90 --seed 7 --out ";
  REQUIRE(run(common + a.string() + " --threads 2").exit_code == 0);
  REQUIRE(run(common + b.string() + " --threads 1").exit_code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(dir / "rep_a.trace.csv") == slurp(dir / "rep_b.trace.csv"));
}
