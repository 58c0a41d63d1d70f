#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "afqm/policy.hpp"
#include "afqm/rng.hpp"
#include "afqm/trialsim.hpp"

namespace afqm {

enum class Algo { Pso, De };

const char* to_string(Algo algo);
Algo algo_from_string(const std::string& name);

struct PsoParams {
  double inertia = 0.7298;
  double cognitive = 1.49618;
  double social = 1.49618;
  double velocity_clamp = 0.5;  // fraction of the box width per dimension
};

struct DeParams {
  double weight = 0.7;     // differential weight F
  double crossover = 0.9;  // crossover rate CR
};

struct OptimizerConfig {
  Algo algo = Algo::Pso;
  int agents = 0;        // 0 -> 20 * dimension
  int iterations = 300;  // N_I
  SearchBox box;         // empty -> SearchBox::policy_box(kind, ns, n)
  PsoParams pso;
  DeParams de;
  std::uint64_t seed = 0;
  long trials_per_eval = 0;  // 0 -> 10 n^2
  int ns = 4;                // expansion terms of the policy ansatz
  // Give every candidate in an iteration the same trial seeds, so the
  // argmin compares policies on identical randomness.  Off: each
  // evaluation draws a fresh stream.
  bool common_random_numbers = true;
};

// Objective over a batch of candidate vectors; costs[i] receives the cost
// of xs[i] evaluated under seed base seeds[i].
using BatchObjective =
    std::function<void(const std::vector<std::vector<double>>& xs,
                       std::span<const std::uint64_t> seeds,
                       std::span<double> costs)>;

BatchObjective wrap_scalar_objective(
    std::function<double(std::span<const double>)> fn);

struct MinimizeResult {
  std::vector<double> best_x;
  double best_cost = 0.0;             // best evaluation seen (optimistic)
  std::vector<double> trace;          // best-so-far after each iteration
  std::vector<double> iteration_best; // best within each iteration
  long evaluations = 0;
};

// Runs the configured algorithm for config.iterations over the box.
MinimizeResult minimize(const BatchObjective& objective, const SearchBox& box,
                        const OptimizerConfig& config);

// Swarm/population states exposed so the update rules are testable on
// their own.
struct Swarm {
  std::vector<std::vector<double>> x, v, pbest;
  std::vector<double> pbest_cost;
  std::vector<double> gbest;
  double gbest_cost = 0.0;
};

// Canonical velocity/position update with per-dimension random factors;
// positions are clamped to the box and the violated velocity component is
// sign-flipped.  Pure kinematics: no evaluation, no best bookkeeping.
void pso_step(Swarm& swarm, const SearchBox& box, const PsoParams& params,
              Rng& rng);

struct Population {
  std::vector<std::vector<double>> x;
  std::vector<double> cost;
};

// One DE/rand/1/bin generation: mutate (out-of-box components resampled
// uniformly inside), binomial crossover with one forced dimension,
// evaluate the trial vectors under eval_seeds (one per member), greedy
// selection (ties keep the incumbent).
void de_step(Population& population, const SearchBox& box,
             const DeParams& params, Rng& rng, const BatchObjective& objective,
             std::span<const std::uint64_t> eval_seeds);

struct TrainingRun {
  PolicyRecord best;                  // cost fields carry the held-out verdict
  double internal_best_cost = 0;      // noisy training-time argmin value
  std::vector<double> trace;          // best-so-far cost per iteration
  std::vector<double> iteration_best; // best cost within each iteration
  double wall_seconds = 0.0;
  OptimizerConfig config;             // echo, with defaults resolved
  StateKind kind = StateKind::Sine;
  int n_qubits = 0;
};

// Trains a feedback policy for the given input state: minimizes the
// Holevo-variance cost over the policy box, then re-evaluates the winner
// on a held-out seed with 4x trials to de-bias the noisy argmin.
TrainingRun train(StateKind kind, int n_qubits, OptimizerConfig config);

// Per-iteration trace as CSV (iteration, iteration_best, best_so_far).
std::string trace_csv(const TrainingRun& run);

}  // namespace afqm
