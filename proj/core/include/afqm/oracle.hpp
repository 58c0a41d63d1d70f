#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "afqm/dicke.hpp"
#include "afqm/policy.hpp"
#include "afqm/rng.hpp"
#include "afqm/trialsim.hpp"

// Brute-force full-Hilbert-space reference simulator.  Dimension 2^n with
// n capped at 12; exists to validate the symmetric-subspace engine and to
// regenerate reference values, not to be fast.
namespace afqm::oracle {

inline constexpr int kMaxOracleQubits = 12;

// Computational z-basis register.  Bit q of an index gives qubit q's state
// with 0 = up, 1 = down, matching the k = #down Dicke convention.
struct FullState {
  int n = 0;
  std::vector<std::complex<double>> amps;  // length 2^n, unit norm

  double norm() const;
};

// Dicke amplitude amps[k] spread evenly over all C(n,k) strings with k
// down-spins; an isometry.
FullState symmetrize(const SymmetricState& state);

FullState full_rotate_qubit(const FullState& state, int qubit, Axis axis,
                            double angle);
FullState full_rotate_collective(const FullState& state, Axis axis,
                                 double angle);

struct FullMeasureResult {
  bool up = false;
  double prob_up = 0.0;
  FullState state;  // remaining n-1 qubits, measured bit removed
  double spin() const { return up ? 0.5 : -0.5; }
};

// Textbook projective s_z measurement of one qubit.
FullMeasureResult full_measure_qubit(const FullState& state, int qubit,
                                     double rng_draw);

// Re-implementation of the adaptive-feedback trial on the full register,
// consuming rng draws in exactly the same order as afqm::run_trial; feed
// both the same seed and they must agree step for step.
TrialRecord run_trial_full(const SymmetricState& input,
                           const InverseScalingPolicy& policy,
                           const NoiseConfig& noise, Rng& rng,
                           const TrialOptions& options = {});
TrialRecord run_trial_full_with(const SymmetricState& input,
                                const InverseScalingPolicy& policy,
                                const NoiseConfig& noise, double true_phase,
                                double initial_guess, Rng& rng,
                                const TrialOptions& options = {});

// Exhaustive trial distribution conditioned on a fixed noise realization:
// per-qubit phase offsets eps[q] and loss flags lost[q].  Entry index is
// the detected-outcome bitstring (bit d set = d-th detection came out up);
// prob sums hidden loss branches, phi_final is the shared final
// compensation of that detected string.
struct PathEntry {
  double prob = 0.0;
  double phi_final = 0.0;
};
std::vector<PathEntry> enumerate_paths_dicke(const SymmetricState& input,
                                             const InverseScalingPolicy& policy,
                                             double true_phase,
                                             double initial_guess,
                                             std::span<const double> eps,
                                             std::span<const std::uint8_t> lost,
                                             const TrialOptions& options = {});
std::vector<PathEntry> enumerate_paths_full(const SymmetricState& input,
                                            const InverseScalingPolicy& policy,
                                            double true_phase,
                                            double initial_guess,
                                            std::span<const double> eps,
                                            std::span<const std::uint8_t> lost,
                                            const TrialOptions& options = {});

// Half the L1 distance between two path distributions.
double total_variation(const std::vector<PathEntry>& a,
                       const std::vector<PathEntry>& b);

}  // namespace afqm::oracle
