// Command-line front end: train / eval / sweep / fit / oracle-check.
//
// Exit codes: 0 success, 2 usage error, 3 input-file error, 4 a numerical
// sentinel (sharpness collapsed to 0) was encountered in the results.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "afqm/analysis.hpp"
#include "afqm/errors.hpp"
#include "afqm/optimizer.hpp"
#include "afqm/oracle.hpp"
#include "afqm/policy.hpp"
#include "afqm/rng.hpp"
#include "afqm/trialsim.hpp"
#include "afqm/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInputFile = 3;
constexpr int kExitSentinel = 4;

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string sibling_path(const std::string& out, const std::string& suffix) {
  fs::path p(out);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

// Every command that writes results also writes <out>.manifest.json;
// timestamps live only here so the primary outputs stay byte-reproducible.
void write_manifest(const std::string& command, const std::string& out_path,
                    std::uint64_t seed, const json& config,
                    const std::vector<std::string>& outputs) {
  json m;
  m["format"] = afqm::kManifestFormat;
  m["command"] = command;
  m["version"] = afqm::kVersion;
  m["csv_schema"] = afqm::kCsvSchema;
  m["seed"] = seed;
  m["config"] = config;
  m["outputs"] = outputs;
  m["created_utc"] = utc_now();
  write_file(out_path + ".manifest.json", m.dump(2) + "\n");
}

// n-grid forms: "8,16,32", "8:64:log4" (4 log-spaced points incl. ends),
// "8:64:lin4" (linearly spaced).
std::vector<int> parse_n_grid(const std::string& spec) {
  std::vector<int> values;
  if (spec.find(':') == std::string::npos) {
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) values.push_back(std::stoi(tok));
  } else {
    std::stringstream ss(spec);
    std::string a, b, c;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') ||
        !std::getline(ss, c, ':'))
      throw std::invalid_argument("bad n grid '" + spec + "'");
    const int lo = std::stoi(a);
    const int hi = std::stoi(b);
    bool log_spaced;
    int count;
    if (c.rfind("log", 0) == 0) {
      log_spaced = true;
      count = std::stoi(c.substr(3));
    } else if (c.rfind("lin", 0) == 0) {
      log_spaced = false;
      count = std::stoi(c.substr(3));
    } else {
      throw std::invalid_argument("grid step must be logK or linK");
    }
    if (lo < 1 || hi < lo || count < 1)
      throw std::invalid_argument("bad n grid '" + spec + "'");
    for (int i = 0; i < count; ++i) {
      const double t = count == 1 ? 0.0 : double(i) / (count - 1);
      const double v = log_spaced
                           ? std::exp(std::log(double(lo)) +
                                      t * (std::log(double(hi)) - std::log(double(lo))))
                           : lo + t * double(hi - lo);
      values.push_back(int(std::lround(v)));
    }
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.empty() || values.front() < 1)
    throw std::invalid_argument("n grid must contain positive sizes");
  return values;
}

json optimizer_config_json(const afqm::OptimizerConfig& cfg) {
  json j;
  j["algo"] = afqm::to_string(cfg.algo);
  j["agents"] = cfg.agents;
  j["iterations"] = cfg.iterations;
  j["ns"] = cfg.ns;
  j["trials_per_eval"] = cfg.trials_per_eval;
  j["seed"] = cfg.seed;
  j["common_random_numbers"] = cfg.common_random_numbers;
  j["box_low"] = cfg.box.low;
  j["box_high"] = cfg.box.high;
  j["pso"] = {{"inertia", cfg.pso.inertia},
              {"cognitive", cfg.pso.cognitive},
              {"social", cfg.pso.social},
              {"velocity_clamp", cfg.pso.velocity_clamp}};
  j["de"] = {{"weight", cfg.de.weight}, {"crossover", cfg.de.crossover}};
  return j;
}

struct TrainArgs {
  std::string state;
  int n = 0;
  int ns = 4;
  std::string algo = "pso";
  int iters = 300;
  int agents = 0;
  long trials = 0;
  std::uint64_t seed = 0;
  std::string out;
  bool no_crn = false;
  afqm::PsoParams pso;
  afqm::DeParams de;
};

int run_train(const TrainArgs& a) {
  afqm::OptimizerConfig cfg;
  cfg.algo = afqm::algo_from_string(a.algo);
  cfg.agents = a.agents;
  cfg.iterations = a.iters;
  cfg.seed = a.seed;
  cfg.trials_per_eval = a.trials;
  cfg.ns = a.ns;
  cfg.common_random_numbers = !a.no_crn;
  cfg.pso = a.pso;
  cfg.de = a.de;
  const auto kind = afqm::state_kind_from_string(a.state);

  const auto run = afqm::train(kind, a.n, cfg);

  afqm::PolicyRecord rec = run.best;
  afqm::save_policy_file(rec, a.out);
  const std::string trace_path = sibling_path(a.out, ".trace.csv");
  write_file(trace_path, afqm::trace_csv(run));

  json config = optimizer_config_json(run.config);
  config["state"] = a.state;
  config["n"] = a.n;
  config["wall_seconds"] = run.wall_seconds;
  config["internal_best_cost"] = run.internal_best_cost;
  write_manifest("train", a.out, a.seed, config, {a.out, trace_path});

  std::cout << "trained " << a.state << " policy for n=" << a.n << " via "
            << a.algo << ": held-out V=" << rec.cost << " (S-based dphi="
            << std::sqrt(rec.cost) << "), id=" << afqm::policy_id(rec) << "\n"
            << "wrote " << a.out << " and " << trace_path << "\n";
  return 0;
}

struct EvalArgs {
  std::string policy_path;
  int n = 0;
  long trials = 0;
  double loss_eta = 0.0;
  double phase_sigma = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_eval(const EvalArgs& a) {
  const afqm::PolicyRecord rec = afqm::load_policy_file(a.policy_path);
  const long trials = a.trials > 0 ? a.trials : afqm::default_trial_count(a.n);
  const afqm::NoiseConfig noise{a.loss_eta, a.phase_sigma};
  noise.validate();
  const auto detail = afqm::estimate_cost_detail(
      rec.policy.state_kind, a.n, rec.policy, noise, trials, a.seed);

  afqm::ScalingPoint pt;
  pt.n_qubits = a.n;
  pt.state = rec.policy.state_kind;
  pt.policy_id = afqm::policy_id(rec);
  pt.noise = noise;
  pt.cost = detail.estimate;
  pt.dphi_stderr = afqm::bootstrap_dphi_stderr(detail);
  pt.seed = a.seed;
  pt.trained_here = a.n == rec.policy.n_trained;
  const std::string csv = afqm::to_csv(std::span(&pt, 1));

  if (!a.out.empty()) {
    write_file(a.out, csv);
    json config;
    config["policy"] = a.policy_path;
    config["n"] = a.n;
    config["trials"] = trials;
    config["loss_eta"] = a.loss_eta;
    config["phase_sigma"] = a.phase_sigma;
    write_manifest("eval", a.out, a.seed, config, {a.out});
  }
  std::cout << csv;
  return detail.estimate.sentinel ? kExitSentinel : 0;
}

struct SweepArgs {
  std::string policy_path;  // fixed-policy mode
  bool retrain = false;     // retrain-per-n mode
  std::string state = "sine";
  int ns = 4;
  std::string algo = "pso";
  int iters = 300;
  int agents = 0;
  std::string n_grid;
  long trials = 0;
  double loss_eta = 0.0;
  double phase_sigma = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_sweep(const SweepArgs& a) {
  afqm::SweepConfig sweep;
  sweep.n_values = parse_n_grid(a.n_grid);
  sweep.noise = afqm::NoiseConfig{a.loss_eta, a.phase_sigma};
  sweep.noise.validate();
  sweep.trials = a.trials;
  sweep.seed = a.seed;

  std::vector<afqm::ScalingPoint> points;
  json config;
  if (a.retrain) {
    afqm::OptimizerConfig base;
    base.algo = afqm::algo_from_string(a.algo);
    base.iterations = a.iters;
    base.agents = a.agents;
    base.ns = a.ns;
    points = afqm::sweep_retrain(afqm::state_kind_from_string(a.state), base,
                                 sweep);
    config["mode"] = "retrain";
    config["state"] = a.state;
    config["optimizer"] = optimizer_config_json(base);
  } else {
    const auto rec = afqm::load_policy_file(a.policy_path);
    points = afqm::sweep_policy(rec, sweep);
    config["mode"] = "fixed";
    config["policy"] = a.policy_path;
    config["policy_id"] = afqm::policy_id(rec);
  }
  config["n_grid"] = sweep.n_values;
  config["trials"] = a.trials;
  config["loss_eta"] = a.loss_eta;
  config["phase_sigma"] = a.phase_sigma;

  const std::string csv = afqm::to_csv(points);
  const std::string ref_path = sibling_path(a.out, ".ref.csv");
  write_file(a.out, csv);
  write_file(ref_path, afqm::reference_csv(sweep.n_values));
  write_manifest("sweep", a.out, a.seed, config, {a.out, ref_path});
  std::cout << csv;

  for (const auto& p : points)
    if (p.cost.sentinel) return kExitSentinel;
  return 0;
}

struct FitArgs {
  std::string in;
  std::string out;
};

int run_fit(const FitArgs& a) {
  std::ifstream in(a.in);
  if (!in) throw afqm::ParseError(a.in, "cannot open CSV input");
  const auto points = afqm::parse_scaling_csv(in);
  afqm::PowerLawFit fit;
  try {
    fit = afqm::fit_power_law(points);
  } catch (const std::invalid_argument& e) {
    throw afqm::ParseError(a.in, e.what());
  }
  json j;
  j["alpha"] = fit.alpha;
  j["prefactor"] = fit.prefactor;
  j["residual_rms"] = fit.residual_rms;
  j["points"] = fit.points;
  const std::string text = j.dump(2) + "\n";
  if (!a.out.empty()) {
    write_file(a.out, text);
    json config;
    config["in"] = a.in;
    write_manifest("fit", a.out, 0, config, {a.out});
  }
  std::cout << text;
  return 0;
}

struct OracleArgs {
  int n = 6;
  int cases = 50;
  std::uint64_t seed = 0;
};

int run_oracle_check(const OracleArgs& a) {
  using namespace afqm;
  Rng meta(stream_seed(a.seed, 0x0C7E));
  double max_tv = 0.0;
  double max_estimate_dev = 0.0;
  bool lockstep_ok = true;
  for (int c = 0; c < a.cases; ++c) {
    // rotate through the input kinds, plus fully random symmetric states
    SymmetricState input({std::complex<double>(1.0)});
    StateKind kind = StateKind::Sine;
    InverseScalingPolicy policy;
    switch (c % 4) {
      case 0:
        kind = StateKind::Sine;
        policy = decode_policy({0.2 + 4.0 * meta.uniform(),
                                -5.0 + 10.0 * meta.uniform(),
                                -5.0 + 10.0 * meta.uniform(),
                                -5.0 + 10.0 * meta.uniform(),
                                -5.0 + 10.0 * meta.uniform()},
                               kind, 4, a.n);
        input = build_sine(a.n);
        break;
      case 1:
        kind = StateKind::CSS;
        policy = decode_policy({0.2 + 4.0 * meta.uniform(),
                                -5.0 + 10.0 * meta.uniform(),
                                -5.0 + 10.0 * meta.uniform(),
                                -5.0 + 10.0 * meta.uniform(),
                                -5.0 + 10.0 * meta.uniform()},
                               kind, 4, a.n);
        input = build_css(a.n);
        break;
      case 2: {
        kind = StateKind::SSS;
        policy = decode_policy({0.2 + 4.0 * meta.uniform(),
                                -5.0 + 10.0 * meta.uniform(),
                                -5.0 + 10.0 * meta.uniform(),
                                -5.0 + 10.0 * meta.uniform(),
                                -5.0 + 10.0 * meta.uniform(), meta.uniform()},
                               kind, 4, a.n);
        input = make_input_state(kind, a.n, policy);
        break;
      }
      default: {
        kind = StateKind::Sine;
        policy = decode_policy({0.2 + 4.0 * meta.uniform(),
                                -5.0 + 10.0 * meta.uniform(),
                                -5.0 + 10.0 * meta.uniform(),
                                -5.0 + 10.0 * meta.uniform(),
                                -5.0 + 10.0 * meta.uniform()},
                               kind, 4, a.n);
        std::vector<std::complex<double>> amps(a.n + 1);
        for (auto& amp : amps) amp = {meta.normal(), meta.normal()};
        input = SymmetricState(std::move(amps));
        break;
      }
    }
    const NoiseConfig noise =
        c % 2 ? NoiseConfig{0.3 * meta.uniform(), 0.5 * meta.uniform()}
              : NoiseConfig{};

    // lockstep: same seed into both engines
    const auto seed = meta.raw();
    Rng r1(seed), r2(seed);
    const auto t1 = run_trial(input, policy, noise, r1);
    const auto t2 = oracle::run_trial_full(input, policy, noise, r2);
    if (t1.outcomes != t2.outcomes || t1.lost_count != t2.lost_count)
      lockstep_ok = false;
    max_estimate_dev =
        std::max(max_estimate_dev, std::abs(t1.estimate - t2.estimate));

    // enumerated distribution conditioned on one noise realization
    std::vector<double> eps(a.n);
    std::vector<std::uint8_t> lost(a.n);
    for (int q = 0; q < a.n; ++q) {
      eps[q] = noise.phase_sigma * meta.normal();
      lost[q] = meta.uniform() < noise.loss_eta ? 1 : 0;
    }
    const double phi = meta.uniform_angle();
    const double phi0 = meta.uniform_angle();
    const auto pa = oracle::enumerate_paths_dicke(input, policy, phi, phi0, eps, lost);
    const auto pb = oracle::enumerate_paths_full(input, policy, phi, phi0, eps, lost);
    const double tv = oracle::total_variation(pa, pb);
    max_tv = std::max(max_tv, tv);
    std::cout << "case " << c << ": kind=" << to_string(kind)
              << " eta=" << noise.loss_eta << " sigma=" << noise.phase_sigma
              << " tv=" << tv << " est_dev="
              << std::abs(t1.estimate - t2.estimate) << "\n";
  }
  const bool pass = lockstep_ok && max_tv < 1e-9 && max_estimate_dev < 1e-9;
  std::cout << (pass ? "PASS" : "FAIL") << ": max total-variation " << max_tv
            << ", max estimate deviation " << max_estimate_dev << ", lockstep "
            << (lockstep_ok ? "ok" : "BROKEN") << "\n";
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive-feedback quantum phase estimation: train, evaluate, analyze"};
  app.set_version_flag("--version", afqm::kVersion);
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow subcommand flags
  int threads = 0;
  app.add_option("--threads", threads,
                 "cap worker threads (0 = machine parallelism); results do not depend on it");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train a feedback policy");
  t->add_option("--state", train.state, "input state")
      ->required()
      ->check(CLI::IsMember({"sine", "sss", "css"}));
  t->add_option("--n", train.n, "qubit count")->required()->check(CLI::PositiveNumber);
  t->add_option("--ns", train.ns, "expansion terms")->check(CLI::PositiveNumber);
  t->add_option("--algo", train.algo)->check(CLI::IsMember({"pso", "de"}));
  t->add_option("--iters", train.iters)->check(CLI::PositiveNumber);
  t->add_option("--agents", train.agents, "0 = 20 * dimension");
  t->add_option("--trials", train.trials, "0 = 10 n^2");
  t->add_option("--seed", train.seed);
  t->add_option("--out", train.out, "policy file path")->required();
  t->add_flag("--no-crn", train.no_crn, "fresh trial seeds per evaluation");
  t->add_option("--pso-inertia", train.pso.inertia);
  t->add_option("--pso-cognitive", train.pso.cognitive);
  t->add_option("--pso-social", train.pso.social);
  t->add_option("--pso-vclamp", train.pso.velocity_clamp);
  t->add_option("--de-weight", train.de.weight);
  t->add_option("--de-crossover", train.de.crossover);

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "evaluate a policy file");
  e->add_option("--policy", eval.policy_path)->required();
  e->add_option("--n", eval.n)->required()->check(CLI::PositiveNumber);
  e->add_option("--trials", eval.trials, "0 = 10 n^2");
  e->add_option("--loss-eta", eval.loss_eta);
  e->add_option("--phase-sigma", eval.phase_sigma);
  e->add_option("--seed", eval.seed);
  e->add_option("--out", eval.out, "CSV output path");

  SweepArgs sweep;
  auto* s = app.add_subcommand("sweep", "evaluate across ensemble sizes");
  auto* sp = s->add_option("--policy", sweep.policy_path, "fixed policy file");
  auto* sr = s->add_flag("--retrain", sweep.retrain, "train anew at each n");
  sp->excludes(sr);
  s->add_option("--state", sweep.state)->check(CLI::IsMember({"sine", "sss", "css"}));
  s->add_option("--ns", sweep.ns)->check(CLI::PositiveNumber);
  s->add_option("--algo", sweep.algo)->check(CLI::IsMember({"pso", "de"}));
  s->add_option("--iters", sweep.iters)->check(CLI::PositiveNumber);
  s->add_option("--agents", sweep.agents);
  s->add_option("--n-grid", sweep.n_grid, "e.g. 8,16,32 or 8:256:log8")->required();
  s->add_option("--trials", sweep.trials, "0 = 10 n^2 per point");
  s->add_option("--loss-eta", sweep.loss_eta);
  s->add_option("--phase-sigma", sweep.phase_sigma);
  s->add_option("--seed", sweep.seed);
  s->add_option("--out", sweep.out, "CSV output path")->required();

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "power-law fit of a sweep CSV");
  f->add_option("--in", fit.in)->required();
  f->add_option("--out", fit.out, "fit record path (JSON)");

  OracleArgs oracle;
  auto* o = app.add_subcommand("oracle-check",
                               "validate the Dicke engine against the 2^n oracle");
  o->add_option("--n", oracle.n, "qubit count (capped at 8)")
      ->check(CLI::Range(1, 8));
  o->add_option("--cases", oracle.cases)->check(CLI::PositiveNumber);
  o->add_option("--seed", oracle.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitUsage;
  }

  afqm::set_max_threads(threads);
  try {
    if (t->parsed()) return run_train(train);
    if (e->parsed()) return run_eval(eval);
    if (s->parsed()) {
      if (!sweep.retrain && sweep.policy_path.empty()) {
        std::cerr << "sweep needs --policy or --retrain\n";
        return kExitUsage;
      }
      return run_sweep(sweep);
    }
    if (f->parsed()) return run_fit(fit);
    if (o->parsed()) return run_oracle_check(oracle);
  } catch (const afqm::ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInputFile;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
