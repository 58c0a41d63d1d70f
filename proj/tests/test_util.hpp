#pragma once

#include <complex>
#include <vector>

#include "afqm/dicke.hpp"
#include "afqm/policy.hpp"
#include "afqm/rng.hpp"

namespace afqm::testing {

inline SymmetricState random_state(int m, Rng& rng) {
  std::vector<std::complex<double>> amps(m + 1);
  for (auto& a : amps) a = {rng.normal(), rng.normal()};
  return SymmetricState(std::move(amps));
}

inline InverseScalingPolicy random_policy(StateKind kind, int ns, Rng& rng,
                                          int n_trained = 0) {
  InverseScalingPolicy p;
  p.state_kind = kind;
  p.n_trained = n_trained;
  p.wp = 5.0 * rng.uniform();
  p.coeffs.resize(ns);
  for (auto& c : p.coeffs) c = -5.0 + 10.0 * rng.uniform();
  if (kind == StateKind::SSS) p.squeeze_coeff = rng.uniform();
  return p;
}

inline std::complex<double> overlap(const SymmetricState& a,
                                    const SymmetricState& b) {
  std::complex<double> s = 0.0;
  for (int k = 0; k <= a.qubits(); ++k)
    s += std::conj(a.amps()[k]) * b.amps()[k];
  return s;
}

// Distance on the circle, insensitive to 2*pi wraps.
inline double circular_distance(double a, double b) {
  return std::abs(wrap_to_pi(a - b));
}

}  // namespace afqm::testing
