#include "afqm/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "afqm/errors.hpp"

namespace afqm {

namespace {

constexpr std::uint64_t kOptStream = 0x4F505469;      // optimizer update rng
constexpr std::uint64_t kEvalStreamBase = 0x10000000; // per-iteration batches
constexpr std::uint64_t kHeldOutStream = 0x48454C44;  // final re-evaluation

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::vector<double>> uniform_positions(int count,
                                                   const SearchBox& box,
                                                   Rng& rng) {
  const std::size_t dim = box.dim();
  std::vector<std::vector<double>> xs(count, std::vector<double>(dim));
  for (auto& x : xs)
    for (std::size_t d = 0; d < dim; ++d)
      x[d] = box.low[d] + rng.uniform() * (box.high[d] - box.low[d]);
  return xs;
}

struct SeedPlan {
  std::uint64_t base;
  bool crn;
  std::uint64_t counter = 0;

  std::vector<std::uint64_t> batch(std::size_t count, std::uint64_t batch_index) {
    std::vector<std::uint64_t> seeds(count);
    if (crn) {
      const auto s = stream_seed(base, kEvalStreamBase + batch_index);
      std::fill(seeds.begin(), seeds.end(), s);
    } else {
      for (auto& s : seeds) s = stream_seed(base, kEvalStreamBase + counter++);
    }
    return seeds;
  }
};

int resolve_agents(const OptimizerConfig& cfg, std::size_t dim) {
  const int agents = cfg.agents > 0 ? cfg.agents : 20 * static_cast<int>(dim);
  if (agents < 4)
    throw std::invalid_argument("need at least 4 agents");
  return agents;
}

}  // namespace

const char* to_string(Algo algo) { return algo == Algo::Pso ? "pso" : "de"; }

Algo algo_from_string(const std::string& name) {
  if (name == "pso") return Algo::Pso;
  if (name == "de") return Algo::De;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

BatchObjective wrap_scalar_objective(
    std::function<double(std::span<const double>)> fn) {
  return [fn = std::move(fn)](const std::vector<std::vector<double>>& xs,
                              std::span<const std::uint64_t> /*seeds*/,
                              std::span<double> costs) {
    for (std::size_t i = 0; i < xs.size(); ++i) costs[i] = fn(xs[i]);
  };
}

void pso_step(Swarm& swarm, const SearchBox& box, const PsoParams& params,
              Rng& rng) {
  const std::size_t dim = box.dim();
  for (std::size_t i = 0; i < swarm.x.size(); ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double r1 = rng.uniform();
      const double r2 = rng.uniform();
      double v = params.inertia * swarm.v[i][d] +
                 params.cognitive * r1 * (swarm.pbest[i][d] - swarm.x[i][d]) +
                 params.social * r2 * (swarm.gbest[d] - swarm.x[i][d]);
      const double vmax = params.velocity_clamp * (box.high[d] - box.low[d]);
      v = std::clamp(v, -vmax, vmax);
      double x = swarm.x[i][d] + v;
      if (x < box.low[d]) {
        x = box.low[d];
        v = -v;
      } else if (x > box.high[d]) {
        x = box.high[d];
        v = -v;
      }
      swarm.x[i][d] = x;
      swarm.v[i][d] = v;
    }
  }
}

void de_step(Population& population, const SearchBox& box,
             const DeParams& params, Rng& rng, const BatchObjective& objective,
             std::span<const std::uint64_t> eval_seeds) {
  const std::size_t na = population.x.size();
  if (na < 4) throw std::invalid_argument("DE needs a population of >= 4");
  if (eval_seeds.size() != na)
    throw std::invalid_argument("one eval seed per member required");
  const std::size_t dim = box.dim();

  std::vector<std::vector<double>> trials(na, std::vector<double>(dim));
  for (std::size_t i = 0; i < na; ++i) {
    std::size_t a, b, c;
    do a = rng.below(na); while (a == i);
    do b = rng.below(na); while (b == i || b == a);
    do c = rng.below(na); while (c == i || c == a || c == b);
    const std::size_t jrand = rng.below(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      double mutant = population.x[a][d] +
                      params.weight * (population.x[b][d] - population.x[c][d]);
      if (mutant < box.low[d] || mutant > box.high[d])
        mutant = box.low[d] + rng.uniform() * (box.high[d] - box.low[d]);
      const bool take = rng.uniform() < params.crossover || d == jrand;
      trials[i][d] = take ? mutant : population.x[i][d];
    }
  }

  std::vector<double> trial_cost(na);
  objective(trials, eval_seeds, trial_cost);
  for (std::size_t i = 0; i < na; ++i) {
    if (trial_cost[i] < population.cost[i]) {
      population.x[i] = std::move(trials[i]);
      population.cost[i] = trial_cost[i];
    }
  }
}

MinimizeResult minimize(const BatchObjective& objective, const SearchBox& box,
                        const OptimizerConfig& config) {
  box.validate();
  if (config.iterations < 1)
    throw std::invalid_argument("iterations must be >= 1");
  const int na = resolve_agents(config, box.dim());
  Rng rng(stream_seed(config.seed, kOptStream));
  SeedPlan seeds{config.seed, config.common_random_numbers};

  MinimizeResult res;
  res.best_cost = kInf;
  auto note = [&res](const std::vector<double>& x, double cost) {
    if (cost < res.best_cost) {
      res.best_cost = cost;
      res.best_x = x;
    }
  };

  std::vector<double> costs(na, kInf);
  if (config.algo == Algo::Pso) {
    Swarm sw;
    sw.x = uniform_positions(na, box, rng);
    sw.v.assign(na, std::vector<double>(box.dim(), 0.0));
    sw.pbest = sw.x;
    sw.pbest_cost.assign(na, kInf);
    sw.gbest = sw.x[0];
    sw.gbest_cost = kInf;
    for (int iter = 0; iter < config.iterations; ++iter) {
      objective(sw.x, seeds.batch(na, iter), costs);
      res.evaluations += na;
      double iter_best = kInf;
      for (int i = 0; i < na; ++i) {
        iter_best = std::min(iter_best, costs[i]);
        if (costs[i] < sw.pbest_cost[i]) {
          sw.pbest_cost[i] = costs[i];
          sw.pbest[i] = sw.x[i];
        }
        if (costs[i] < sw.gbest_cost) {
          sw.gbest_cost = costs[i];
          sw.gbest = sw.x[i];
        }
        note(sw.x[i], costs[i]);
      }
      res.iteration_best.push_back(iter_best);
      res.trace.push_back(res.best_cost);
      pso_step(sw, box, config.pso, rng);
    }
  } else {
    Population pop;
    pop.x = uniform_positions(na, box, rng);
    pop.cost.assign(na, kInf);
    objective(pop.x, seeds.batch(na, 0), pop.cost);
    res.evaluations += na;
    for (int i = 0; i < na; ++i) note(pop.x[i], pop.cost[i]);
    for (int iter = 1; iter <= config.iterations; ++iter) {
      de_step(pop, box, config.de, rng, objective, seeds.batch(na, iter));
      res.evaluations += na;
      double iter_best = kInf;
      for (int i = 0; i < na; ++i) {
        iter_best = std::min(iter_best, pop.cost[i]);
        note(pop.x[i], pop.cost[i]);
      }
      res.iteration_best.push_back(iter_best);
      res.trace.push_back(res.best_cost);
    }
  }
  return res;
}

TrainingRun train(StateKind kind, int n_qubits, OptimizerConfig config) {
  if (n_qubits < 1) throw std::invalid_argument("n_qubits must be >= 1");
  if (kind == StateKind::SSS && n_qubits < 2)
    throw std::invalid_argument("sss input needs n >= 2");
  if (config.ns < 1) throw std::invalid_argument("ns must be >= 1");
  if (config.box.empty())
    config.box = SearchBox::policy_box(kind, config.ns, n_qubits);
  config.box.validate();
  const std::size_t want =
      std::size_t(config.ns) + 1 + (kind == StateKind::SSS ? 1 : 0);
  if (config.box.dim() != want)
    throw std::invalid_argument("search box dimension does not match ns/kind");
  if (config.trials_per_eval <= 0)
    config.trials_per_eval = default_trial_count(n_qubits);
  config.agents = resolve_agents(config, config.box.dim());

  const NoiseConfig noiseless{};
  const TrialOptions options{};
  const BatchObjective objective =
      [&](const std::vector<std::vector<double>>& xs,
          std::span<const std::uint64_t> seeds, std::span<double> costs) {
        std::vector<InverseScalingPolicy> policies;
        policies.reserve(xs.size());
        for (const auto& x : xs)
          policies.push_back(decode_policy(x, kind, config.ns, n_qubits));
        const auto details =
            estimate_cost_batch(kind, n_qubits, policies, noiseless,
                                config.trials_per_eval, seeds, options);
        for (std::size_t i = 0; i < details.size(); ++i)
          costs[i] = details[i].estimate.sentinel
                         ? kInf
                         : details[i].estimate.holevo_variance;
      };

  const auto t0 = std::chrono::steady_clock::now();
  MinimizeResult res = minimize(objective, config.box, config);
  const auto policy = decode_policy(res.best_x, kind, config.ns, n_qubits);

  // De-bias the noisy argmin: fresh seed, 4x the training budget.
  const std::uint64_t heldout_seed = stream_seed(config.seed, kHeldOutStream);
  const long heldout_trials = 4 * config.trials_per_eval;
  const CostEstimate held = estimate_cost(kind, n_qubits, policy, noiseless,
                                          heldout_trials, heldout_seed);
  const auto t1 = std::chrono::steady_clock::now();

  TrainingRun run;
  run.best.policy = policy;
  run.best.training_seed = config.seed;
  run.best.cost = held.sentinel ? kInf : held.holevo_variance;
  run.best.cost_seed = heldout_seed;
  run.best.cost_trials = heldout_trials;
  run.internal_best_cost = res.best_cost;
  run.trace = std::move(res.trace);
  run.iteration_best = std::move(res.iteration_best);
  run.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  run.config = config;
  run.kind = kind;
  run.n_qubits = n_qubits;
  return run;
}

std::string trace_csv(const TrainingRun& run) {
  std::ostringstream out;
  out << "iteration,iteration_best,best_so_far\n";
  char buf[64];
  for (std::size_t i = 0; i < run.trace.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g", i + 1,
                  run.iteration_best[i], run.trace[i]);
    out << buf << '\n';
  }
  return out.str();
}

}  // namespace afqm
