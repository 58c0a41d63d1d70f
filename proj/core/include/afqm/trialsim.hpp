#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "afqm/dicke.hpp"
#include "afqm/policy.hpp"
#include "afqm/rng.hpp"

namespace afqm {

// Noise channel parameters.  (0, 0) is the noiseless channel.
struct NoiseConfig {
  double loss_eta = 0.0;     // per-qubit absorption probability, in [0, 1]
  double phase_sigma = 0.0;  // std-dev of the Gaussian phase fluctuation

  void validate() const;
};

// Simulation variants exposed for sensitivity analysis; the defaults are
// the ones results are reported with.
struct TrialOptions {
  // Draw one phase-fluctuation sample per trial instead of per qubit.
  bool common_phase_noise = false;
  // Advance the feedback index per physical qubit rather than per
  // detection, so a lost qubit skips its adjustment instead of deferring it.
  bool loss_advances_feedback = false;
};

// Everything a single adaptive-feedback run produced.
struct TrialRecord {
  double true_phase = 0.0;
  double initial_guess = 0.0;
  std::vector<double> outcomes;       // +0.5 / -0.5, detected qubits only
  std::vector<double> compensations;  // phi_1 .. phi_m after each detection
  int lost_count = 0;
  double estimate = 0.0;  // final compensation phi_{N - lost}
};

// Monte-Carlo sharpness cost over K trials.
struct CostEstimate {
  double sharpness = 0.0;        // S in [0, 1]
  double holevo_variance = 0.0;  // V = 1/S^2 - 1
  double imprecision = 0.0;      // sqrt(V)
  long trials = 0;
  bool sentinel = false;  // S underflowed to 0; V reported as +inf
};

// CostEstimate plus the fixed-shape partial sums it was reduced from.
// Block b holds sum_{k in block b} e^{i(phi_k - estimate_k)} in trial
// order; blocks are kBlockTrials wide regardless of thread count, which is
// what makes results bit-identical under any parallel schedule.  The block
// sums also feed the bootstrap error bars in the analysis module.
struct CostDetail {
  CostEstimate estimate;
  std::vector<std::complex<double>> block_sums;
  long block_trials = 0;
};

inline constexpr long kBlockTrials = 128;

// One adaptive-feedback interferometer run (draws the true phase and the
// initial guess from `rng`, then one noise/loss/measurement draw triple
// per qubit, in that fixed order).
TrialRecord run_trial(const SymmetricState& input,
                      const InverseScalingPolicy& policy,
                      const NoiseConfig& noise, Rng& rng,
                      const TrialOptions& options = {});

// Same run with the true phase and initial guess supplied by the caller;
// used by harnesses that condition on them.
TrialRecord run_trial_with(const SymmetricState& input,
                           const InverseScalingPolicy& policy,
                           const NoiseConfig& noise, double true_phase,
                           double initial_guess, Rng& rng,
                           const TrialOptions& options = {});

// K = 10 n^2, the default per-evaluation trial budget.
long default_trial_count(int n_qubits);

// The sharpness reduction: S = |phasor_total| / trials, V = 1/S^2 - 1.
// S = 0 (or an overflowing V) is reported as the flagged +inf sentinel,
// never silently clipped.
CostEstimate sharpness_cost(std::complex<double> phasor_total, long trials);

// Input state for a policy evaluation; SSS squeeze time comes from the
// policy via squeeze_time(policy, n).
SymmetricState make_input_state(StateKind kind, int n_qubits,
                                const InverseScalingPolicy& policy);

// Sharpness cost of one policy: K trials with per-trial streams derived
// from seed_base, reduced in fixed block shape (deterministic for any
// thread count).
CostDetail estimate_cost_detail(StateKind kind, int n_qubits,
                                const InverseScalingPolicy& policy,
                                const NoiseConfig& noise, long trials,
                                std::uint64_t seed_base,
                                const TrialOptions& options = {});
CostEstimate estimate_cost(StateKind kind, int n_qubits,
                           const InverseScalingPolicy& policy,
                           const NoiseConfig& noise, long trials,
                           std::uint64_t seed_base,
                           const TrialOptions& options = {});

// Batch flavor used by the optimizers: evaluates several candidate
// policies, parallelized over (candidate x trial-block) tasks.  seeds[i]
// is candidate i's trial-stream base (all equal under common random
// numbers).
std::vector<CostDetail> estimate_cost_batch(
    StateKind kind, int n_qubits,
    std::span<const InverseScalingPolicy> policies, const NoiseConfig& noise,
    long trials, std::span<const std::uint64_t> seeds,
    const TrialOptions& options = {});

// Estimator plumbing with an injected trial: trial_fn(k, trial_seed) must
// return (true_phase, estimate) for trial k.  Exposed so harnesses can
// drive the sharpness reduction with synthetic estimators.
CostDetail estimate_cost_over(
    long trials, std::uint64_t seed_base,
    const std::function<std::pair<double, double>(long, std::uint64_t)>& trial_fn);

// Global worker cap for the block-parallel loops; 0 restores the hardware
// default.  Results do not depend on this setting.
void set_max_threads(int n);

}  // namespace afqm
