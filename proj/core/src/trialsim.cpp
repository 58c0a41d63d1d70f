#include "afqm/trialsim.hpp"

#include <omp.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "afqm/errors.hpp"

namespace afqm {

namespace {

using cd = std::complex<double>;

std::atomic<int> g_max_threads{0};

int worker_count() {
  const int cap = g_max_threads.load(std::memory_order_relaxed);
  const int hw = omp_get_max_threads();
  return cap > 0 ? std::min(cap, hw) : hw;
}

struct TrialScratch {
  std::vector<cd> amps;
};

struct NullRecorder {
  void detected(double /*spin*/, double /*compensation*/) {}
  void lost() {}
};

struct RecordingRecorder {
  TrialRecord* rec;
  void detected(double spin, double compensation) {
    rec->outcomes.push_back(spin);
    rec->compensations.push_back(compensation);
  }
  void lost() { ++rec->lost_count; }
};

// The compensation-measure-adjust loop of one trial.  Consumes, per qubit,
// exactly one normal draw (two uniforms), one loss draw and one
// measurement draw, in that order, regardless of the noise settings; a
// common-mode noise draw happens once up front instead when configured.
// Returns the final compensation.
template <typename Recorder>
double run_trial_core(const SymmetricState& input,
                      std::span<const double> deltas, const NoiseConfig& noise,
                      const TrialOptions& opts, double true_phase,
                      double initial_guess, Rng& rng, TrialScratch& scratch,
                      Recorder&& recorder) {
  const int n = input.qubits();
  scratch.amps.assign(input.amps().begin(), input.amps().end());
  double phi_cur = initial_guess;
  int detected = 0;
  double common_eps = 0.0;
  if (opts.common_phase_noise) common_eps = noise.phase_sigma * rng.normal();
  for (int q = 0; q < n; ++q) {
    const int m = n - q;
    const double eps = opts.common_phase_noise
                           ? common_eps
                           : noise.phase_sigma * rng.normal();
    const bool lost = rng.uniform() < noise.loss_eta;
    const double theta = true_phase + eps - phi_cur;
    const double draw = rng.uniform();
    bool up = false;
    detail::split_measure_kernel(scratch.amps.data(), m, theta, draw,
                                 scratch.amps.data(), &up);
    if (lost) {
      recorder.lost();
      continue;
    }
    const double spin = up ? 0.5 : -0.5;
    const int index = opts.loss_advances_feedback ? q + 1 : detected + 1;
    phi_cur = update_compensation(phi_cur, spin, deltas[index - 1]);
    ++detected;
    recorder.detected(spin, phi_cur);
  }
  return phi_cur;
}

std::vector<double> precompute_deltas(const InverseScalingPolicy& policy, int n) {
  std::vector<double> d(n);
  for (int i = 1; i <= n; ++i) d[i - 1] = delta(policy, i);
  return d;
}

CostDetail reduce_blocks(std::vector<cd> block_sums, long trials) {
  cd total = 0.0;
  for (const cd& b : block_sums) total += b;  // fixed block order
  CostDetail detail;
  detail.estimate = sharpness_cost(total, trials);
  detail.block_sums = std::move(block_sums);
  detail.block_trials = kBlockTrials;
  return detail;
}

}  // namespace

void NoiseConfig::validate() const {
  if (!(loss_eta >= 0.0 && loss_eta <= 1.0))
    throw std::invalid_argument("loss_eta must lie in [0, 1]");
  if (!(phase_sigma >= 0.0) || !std::isfinite(phase_sigma))
    throw std::invalid_argument("phase_sigma must be finite and >= 0");
}

void set_max_threads(int n) {
  g_max_threads.store(n > 0 ? n : 0, std::memory_order_relaxed);
}

TrialRecord run_trial_with(const SymmetricState& input,
                           const InverseScalingPolicy& policy,
                           const NoiseConfig& noise, double true_phase,
                           double initial_guess, Rng& rng,
                           const TrialOptions& options) {
  policy.validate();
  noise.validate();
  const int n = input.qubits();
  if (n < 1) throw std::invalid_argument("input register must hold >= 1 qubit");
  TrialRecord rec;
  rec.true_phase = true_phase;
  rec.initial_guess = initial_guess;
  const auto deltas = precompute_deltas(policy, n);
  TrialScratch scratch;
  rec.estimate = run_trial_core(input, deltas, noise, options, true_phase,
                                initial_guess, rng, scratch,
                                RecordingRecorder{&rec});
  return rec;
}

TrialRecord run_trial(const SymmetricState& input,
                      const InverseScalingPolicy& policy,
                      const NoiseConfig& noise, Rng& rng,
                      const TrialOptions& options) {
  const double phi = rng.uniform_angle();
  const double phi0 = rng.uniform_angle();
  return run_trial_with(input, policy, noise, phi, phi0, rng, options);
}

long default_trial_count(int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("n_qubits must be >= 1");
  return 10L * n_qubits * n_qubits;
}

CostEstimate sharpness_cost(cd phasor_total, long trials) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  CostEstimate est;
  est.trials = trials;
  double s = std::abs(phasor_total) / double(trials);
  if (s > 1.0) s = 1.0;
  est.sharpness = s;
  const double v = 1.0 / (s * s) - 1.0;
  if (s == 0.0 || !std::isfinite(v)) {
    est.sentinel = true;
    est.holevo_variance = std::numeric_limits<double>::infinity();
    est.imprecision = std::numeric_limits<double>::infinity();
  } else {
    est.holevo_variance = v;
    est.imprecision = std::sqrt(v);
  }
  return est;
}

SymmetricState make_input_state(StateKind kind, int n_qubits,
                                const InverseScalingPolicy& policy) {
  switch (kind) {
    case StateKind::CSS: return build_css(n_qubits);
    case StateKind::Sine: return build_sine(n_qubits);
    case StateKind::SSS: return build_sss(n_qubits, squeeze_time(policy, n_qubits));
  }
  throw std::invalid_argument("unknown state kind");
}

std::vector<CostDetail> estimate_cost_batch(
    StateKind kind, int n_qubits,
    std::span<const InverseScalingPolicy> policies, const NoiseConfig& noise,
    long trials, std::span<const std::uint64_t> seeds,
    const TrialOptions& options) {
  noise.validate();
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (policies.size() != seeds.size())
    throw std::invalid_argument("one seed base per policy required");
  const long np = static_cast<long>(policies.size());
  if (np == 0) return {};

  // Inputs and adjustment schedules are policy-dependent but cheap; build
  // them up front so the parallel loop is pure trial work.
  std::vector<SymmetricState> inputs;
  std::vector<std::vector<double>> deltas;
  inputs.reserve(np);
  deltas.reserve(np);
  for (const auto& p : policies) {
    p.validate();
    if (p.state_kind != kind)
      throw std::invalid_argument("policy state kind does not match the input kind");
    inputs.push_back(make_input_state(kind, n_qubits, p));
    deltas.push_back(precompute_deltas(p, n_qubits));
  }

  const long nblocks = (trials + kBlockTrials - 1) / kBlockTrials;
  std::vector<std::vector<cd>> block_sums(np, std::vector<cd>(nblocks));
  const long tasks = np * nblocks;

#pragma omp parallel num_threads(worker_count())
  {
    TrialScratch scratch;
    Rng rng(0);
#pragma omp for schedule(dynamic, 1)
    for (long t = 0; t < tasks; ++t) {
      const long p = t / nblocks;
      const long b = t % nblocks;
      const long k_begin = b * kBlockTrials;
      const long k_end = std::min(trials, k_begin + kBlockTrials);
      cd sum = 0.0;
      for (long k = k_begin; k < k_end; ++k) {
        rng.reseed(stream_seed(seeds[p], static_cast<std::uint64_t>(k)));
        const double phi = rng.uniform_angle();
        const double phi0 = rng.uniform_angle();
        const double phif =
            run_trial_core(inputs[p], deltas[p], noise, options, phi, phi0,
                           rng, scratch, NullRecorder{});
        sum += std::polar(1.0, phi - phif);
      }
      block_sums[p][b] = sum;
    }
  }

  std::vector<CostDetail> out;
  out.reserve(np);
  for (long p = 0; p < np; ++p)
    out.push_back(reduce_blocks(std::move(block_sums[p]), trials));
  return out;
}

CostDetail estimate_cost_detail(StateKind kind, int n_qubits,
                                const InverseScalingPolicy& policy,
                                const NoiseConfig& noise, long trials,
                                std::uint64_t seed_base,
                                const TrialOptions& options) {
  auto details = estimate_cost_batch(kind, n_qubits, std::span(&policy, 1),
                                     noise, trials, std::span(&seed_base, 1),
                                     options);
  return std::move(details.front());
}

CostEstimate estimate_cost(StateKind kind, int n_qubits,
                           const InverseScalingPolicy& policy,
                           const NoiseConfig& noise, long trials,
                           std::uint64_t seed_base,
                           const TrialOptions& options) {
  return estimate_cost_detail(kind, n_qubits, policy, noise, trials, seed_base,
                              options)
      .estimate;
}

CostDetail estimate_cost_over(
    long trials, std::uint64_t seed_base,
    const std::function<std::pair<double, double>(long, std::uint64_t)>&
        trial_fn) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const long nblocks = (trials + kBlockTrials - 1) / kBlockTrials;
  std::vector<cd> block_sums(nblocks);
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count())
  for (long b = 0; b < nblocks; ++b) {
    const long k_begin = b * kBlockTrials;
    const long k_end = std::min(trials, k_begin + kBlockTrials);
    cd sum = 0.0;
    for (long k = k_begin; k < k_end; ++k) {
      const auto [phi, phif] =
          trial_fn(k, stream_seed(seed_base, static_cast<std::uint64_t>(k)));
      sum += std::polar(1.0, phi - phif);
    }
    block_sums[b] = sum;
  }
  return reduce_blocks(std::move(block_sums), trials);
}

}  // namespace afqm
