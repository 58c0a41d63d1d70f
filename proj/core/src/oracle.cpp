#include "afqm/oracle.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "afqm/errors.hpp"

namespace afqm::oracle {

namespace {

using cd = std::complex<double>;

void check_size(int n) {
  if (n > kMaxOracleQubits)
    throw std::invalid_argument("oracle register capped at 12 qubits");
}

// 2x2 single-qubit rotation e^{-i angle s_axis}.
struct Kernel {
  cd uu, ud, du, dd;
};

Kernel qubit_kernel(Axis axis, double angle) {
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  switch (axis) {
    case Axis::Y: return {cd(c), cd(-s), cd(s), cd(c)};
    case Axis::X: return {cd(c), cd(0, -s), cd(0, -s), cd(c)};
    case Axis::Z: return {std::polar(1.0, -0.5 * angle), cd(0), cd(0),
                          std::polar(1.0, 0.5 * angle)};
  }
  throw std::invalid_argument("unknown axis");
}

std::uint64_t insert_bit(std::uint64_t idx, int pos, std::uint64_t bit) {
  const std::uint64_t low = idx & ((1ull << pos) - 1);
  return ((idx >> pos) << (pos + 1)) | (bit << pos) | low;
}

}  // namespace

double FullState::norm() const {
  double n2 = 0.0;
  for (const cd& a : amps) n2 += std::norm(a);
  return std::sqrt(n2);
}

FullState symmetrize(const SymmetricState& state) {
  const int n = state.qubits();
  check_size(n);
  std::vector<double> inv_sqrt_binom(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double lg = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                      std::lgamma(n - k + 1.0);
    inv_sqrt_binom[k] = std::exp(-0.5 * lg);
  }
  FullState full;
  full.n = n;
  full.amps.resize(1ull << n);
  const auto dicke = state.amps();
  for (std::uint64_t idx = 0; idx < full.amps.size(); ++idx) {
    const int k = std::popcount(idx);
    full.amps[idx] = dicke[k] * inv_sqrt_binom[k];
  }
  return full;
}

FullState full_rotate_qubit(const FullState& state, int qubit, Axis axis,
                            double angle) {
  if (!std::isfinite(angle)) throw std::invalid_argument("angle must be finite");
  if (qubit < 0 || qubit >= state.n) throw std::invalid_argument("bad qubit index");
  const Kernel k = qubit_kernel(axis, angle);
  FullState out = state;
  const std::uint64_t bit = 1ull << qubit;
  for (std::uint64_t idx = 0; idx < out.amps.size(); ++idx) {
    if (idx & bit) continue;
    const cd up = state.amps[idx];        // bit clear = spin up
    const cd down = state.amps[idx | bit];
    out.amps[idx] = k.uu * up + k.ud * down;
    out.amps[idx | bit] = k.du * up + k.dd * down;
  }
  return out;
}

FullState full_rotate_collective(const FullState& state, Axis axis,
                                 double angle) {
  // J_axis is a sum of commuting single-qubit terms, so the collective
  // rotation factorizes qubit by qubit.
  FullState out = state;
  for (int q = 0; q < state.n; ++q) out = full_rotate_qubit(out, q, axis, angle);
  return out;
}

FullMeasureResult full_measure_qubit(const FullState& state, int qubit,
                                     double rng_draw) {
  if (state.n < 1) throw StateExhaustedError();
  if (qubit < 0 || qubit >= state.n) throw std::invalid_argument("bad qubit index");
  const std::uint64_t bit = 1ull << qubit;
  double pu = 0.0, pd = 0.0;
  for (std::uint64_t idx = 0; idx < state.amps.size(); ++idx) {
    if (idx & bit)
      pd += std::norm(state.amps[idx]);
    else
      pu += std::norm(state.amps[idx]);
  }
  const double prob_up = pu / (pu + pd);
  const bool up = rng_draw < prob_up;
  FullMeasureResult res;
  res.up = up;
  res.prob_up = prob_up;
  res.state.n = state.n - 1;
  res.state.amps.resize(1ull << res.state.n);
  const double scale = 1.0 / std::sqrt(up ? pu : pd);
  for (std::uint64_t sub = 0; sub < res.state.amps.size(); ++sub) {
    const std::uint64_t idx = insert_bit(sub, qubit, up ? 0u : 1u);
    res.state.amps[sub] = state.amps[idx] * scale;
  }
  return res;
}

TrialRecord run_trial_full_with(const SymmetricState& input,
                                const InverseScalingPolicy& policy,
                                const NoiseConfig& noise, double true_phase,
                                double initial_guess, Rng& rng,
                                const TrialOptions& options) {
  policy.validate();
  noise.validate();
  const int n = input.qubits();
  if (n < 1) throw std::invalid_argument("input register must hold >= 1 qubit");
  check_size(n);
  TrialRecord rec;
  rec.true_phase = true_phase;
  rec.initial_guess = initial_guess;
  FullState state = symmetrize(input);
  double phi_cur = initial_guess;
  int detected = 0;
  double common_eps = 0.0;
  if (options.common_phase_noise) common_eps = noise.phase_sigma * rng.normal();
  for (int q = 0; q < n; ++q) {
    const double eps = options.common_phase_noise
                           ? common_eps
                           : noise.phase_sigma * rng.normal();
    const bool lost = rng.uniform() < noise.loss_eta;
    const double theta = true_phase + eps - phi_cur;
    const double draw = rng.uniform();
    state = full_rotate_qubit(state, 0, Axis::Y, theta);
    const FullMeasureResult m = full_measure_qubit(state, 0, draw);
    state = m.state;
    if (lost) {
      ++rec.lost_count;
      continue;
    }
    const int index = options.loss_advances_feedback ? q + 1 : detected + 1;
    phi_cur = update_compensation(phi_cur, m.spin(), delta(policy, index));
    ++detected;
    rec.outcomes.push_back(m.spin());
    rec.compensations.push_back(phi_cur);
  }
  rec.estimate = phi_cur;
  return rec;
}

TrialRecord run_trial_full(const SymmetricState& input,
                           const InverseScalingPolicy& policy,
                           const NoiseConfig& noise, Rng& rng,
                           const TrialOptions& options) {
  const double phi = rng.uniform_angle();
  const double phi0 = rng.uniform_angle();
  return run_trial_full_with(input, policy, noise, phi, phi0, rng, options);
}

namespace {

// Engine adapters for the path enumeration below: split(state, theta)
// returns {prob, collapsed} for the up (b=0) and down (b=1) outcome.
struct DickeSplit {
  struct Branch {
    double prob;
    SymmetricState state;
  };
  std::array<Branch, 2> operator()(const SymmetricState& s, double theta) const {
    const auto up = split_measure(s, theta, -1.0);   // draw < p forces up
    const auto down = split_measure(s, theta, 2.0);  // draw >= p forces down
    return {Branch{up.prob_up, up.state}, Branch{1.0 - up.prob_up, down.state}};
  }
};

struct FullSplit {
  struct Branch {
    double prob;
    FullState state;
  };
  std::array<Branch, 2> operator()(const FullState& s, double theta) const {
    const FullState rotated = full_rotate_qubit(s, 0, Axis::Y, theta);
    const auto up = full_measure_qubit(rotated, 0, -1.0);
    const auto down = full_measure_qubit(rotated, 0, 2.0);
    return {Branch{up.prob_up, up.state}, Branch{1.0 - up.prob_up, down.state}};
  }
};

template <typename State, typename Split>
void enumerate_rec(const State& state, const Split& split,
                   const InverseScalingPolicy& policy, double phi,
                   std::span<const double> eps,
                   std::span<const std::uint8_t> lost,
                   const TrialOptions& opts, int q, int n, double phi_cur,
                   int detected, std::uint64_t outcome_bits, double prob,
                   std::vector<PathEntry>& out) {
  if (q == n) {
    PathEntry& e = out[outcome_bits];
    if (e.prob == 0.0) e.phi_final = phi_cur;
    e.prob += prob;
    return;
  }
  const double theta = phi + eps[q] - phi_cur;
  const auto branches = split(state, theta);
  for (int b = 0; b < 2; ++b) {
    const double p = branches[b].prob;
    if (p <= 0.0) continue;
    if (lost[q]) {
      enumerate_rec(branches[b].state, split, policy, phi, eps, lost, opts,
                    q + 1, n, phi_cur, detected, outcome_bits, prob * p, out);
    } else {
      const double spin = b == 0 ? 0.5 : -0.5;
      const int index = opts.loss_advances_feedback ? q + 1 : detected + 1;
      const double next = update_compensation(phi_cur, spin, delta(policy, index));
      const std::uint64_t bits =
          outcome_bits | (b == 0 ? (1ull << detected) : 0ull);
      enumerate_rec(branches[b].state, split, policy, phi, eps, lost, opts,
                    q + 1, n, next, detected + 1, bits, prob * p, out);
    }
  }
}

template <typename State, typename Split>
std::vector<PathEntry> enumerate_paths(const State& state, const Split& split,
                                       const SymmetricState& input,
                                       const InverseScalingPolicy& policy,
                                       double phi, double phi0,
                                       std::span<const double> eps,
                                       std::span<const std::uint8_t> lost,
                                       const TrialOptions& opts) {
  policy.validate();
  const int n = input.qubits();
  check_size(n);
  if (eps.size() != std::size_t(n) || lost.size() != std::size_t(n))
    throw std::invalid_argument("eps/lost must have one entry per qubit");
  int detections = 0;
  for (auto f : lost) detections += f ? 0 : 1;
  std::vector<PathEntry> out(1ull << detections);
  enumerate_rec(state, split, policy, phi, eps, lost, opts, 0, n, phi0, 0, 0ull,
                1.0, out);
  return out;
}

}  // namespace

std::vector<PathEntry> enumerate_paths_dicke(const SymmetricState& input,
                                             const InverseScalingPolicy& policy,
                                             double true_phase,
                                             double initial_guess,
                                             std::span<const double> eps,
                                             std::span<const std::uint8_t> lost,
                                             const TrialOptions& options) {
  return enumerate_paths(input, DickeSplit{}, input, policy, true_phase,
                         initial_guess, eps, lost, options);
}

std::vector<PathEntry> enumerate_paths_full(const SymmetricState& input,
                                            const InverseScalingPolicy& policy,
                                            double true_phase,
                                            double initial_guess,
                                            std::span<const double> eps,
                                            std::span<const std::uint8_t> lost,
                                            const TrialOptions& options) {
  return enumerate_paths(symmetrize(input), FullSplit{}, input, policy,
                         true_phase, initial_guess, eps, lost, options);
}

double total_variation(const std::vector<PathEntry>& a,
                       const std::vector<PathEntry>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("path distributions differ in size");
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    tv += std::abs(a[i].prob - b[i].prob);
  return 0.5 * tv;
}

}  // namespace afqm::oracle
