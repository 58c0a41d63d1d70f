#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "afqm/optimizer.hpp"
#include "afqm/policy.hpp"
#include "afqm/trialsim.hpp"

namespace afqm {

// One evaluated point of a scaling sweep.
struct ScalingPoint {
  int n_qubits = 0;
  StateKind state = StateKind::Sine;
  std::string policy_id;
  NoiseConfig noise;
  CostEstimate cost;
  double dphi_stderr = 0.0;
  std::uint64_t seed = 0;
  bool trained_here = false;  // trained at this n vs transferred
};

// Least-squares fit of log dphi against log n: dphi ~ prefactor * n^-alpha.
struct PowerLawFit {
  double alpha = 0.0;
  double prefactor = 0.0;
  double residual_rms = 0.0;  // in log space
  int points = 0;
};

// Requires >= 3 points with positive finite dphi.
PowerLawFit fit_power_law(std::span<const std::array<double, 2>> n_dphi);
PowerLawFit fit_power_law(std::span<const ScalingPoint> points);

struct SweepConfig {
  std::vector<int> n_values;  // ascending
  NoiseConfig noise{};
  long trials = 0;  // 0 -> 10 n^2 at each point
  std::uint64_t seed = 0;
  TrialOptions options{};
};

// Evaluates one fixed policy across ensemble sizes.  For SSS the squeeze
// coefficient is what transfers: T_s is re-derived per n.
std::vector<ScalingPoint> sweep_policy(const PolicyRecord& record,
                                       const SweepConfig& config);

// Trains a fresh policy at every n (training seed derived per point), then
// evaluates it there.
std::vector<ScalingPoint> sweep_retrain(StateKind kind,
                                        const OptimizerConfig& base,
                                        const SweepConfig& config,
                                        std::vector<TrainingRun>* runs = nullptr);

enum class NoiseAxis { LossEta, PhaseSigma };

struct NoisePoint {
  double grid_value = 0.0;
  NoiseConfig noise;
  CostEstimate cost;
  double dphi_stderr = 0.0;
};

// V_phi versus one noise parameter at fixed policy and n, with bootstrap
// error bars; all points share the same trial seeds so the zero-noise
// point reproduces the noiseless estimate exactly.
std::vector<NoisePoint> noise_resilience_curve(const PolicyRecord& record,
                                               int n_qubits, NoiseAxis axis,
                                               std::span<const double> grid,
                                               long trials, std::uint64_t seed,
                                               const TrialOptions& options = {});

// Standard error of dphi by block bootstrap over the fixed-shape trial
// blocks an estimate was reduced from.
double bootstrap_dphi_stderr(const CostDetail& detail, int resamples = 200,
                             std::uint64_t seed = 0xB00757 /* arbitrary */);

// -------- CSV (schema v1) --------
// Fixed header; doubles printed with %.17g so re-runs are byte-identical.
extern const char* const kScalingCsvHeader;

std::string to_csv(std::span<const ScalingPoint> points);
// 1/sqrt(n) and 1/n guide curves for the same n values.
std::string reference_csv(std::span<const int> n_values);
// Parses a schema-v1 CSV (as produced by to_csv); throws ParseError.
std::vector<ScalingPoint> parse_scaling_csv(std::istream& in);

}  // namespace afqm
