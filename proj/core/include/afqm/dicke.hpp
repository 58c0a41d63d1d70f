#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace afqm {

enum class Axis { X, Y, Z };

// Permutation-symmetric register of m qubits stored in the Dicke z-basis.
//
// Index convention (used everywhere in this library): amps[k] is the
// amplitude of the Dicke state with k spin-down qubits, so amps[0] is the
// all-up state and slot k carries the Jz eigenvalue mu_k = m/2 - k.
//
// A state is a plain value; all operations below are pure functions of
// (state, args) and return normalized states, so states can move freely
// between threads.
class SymmetricState {
 public:
  // Takes z-basis Dicke amplitudes (length m+1 for m qubits, m >= 0) and
  // normalizes them.  Empty or zero-norm input is rejected.
  explicit SymmetricState(std::vector<std::complex<double>> amps);

  int qubits() const { return static_cast<int>(amps_.size()) - 1; }
  std::span<const std::complex<double>> amps() const { return amps_; }
  double norm() const;

 private:
  std::vector<std::complex<double>> amps_;
};

// Coherent spin state |j j>_x: every qubit polarized along +x.
// z-basis amplitudes are sqrt(C(n,k)) / 2^(n/2), all real positive.
SymmetricState build_css(int n_qubits);

// Entangled input state with sin-profile amplitudes in the Jy eigenbasis.
// The y eigenbasis is fixed by the rigid rotation |j mu>_y = e^{+i(pi/2)Jx}
// |j mu>_z, which pins the relative phases the profile is applied in.
SymmetricState build_sine(int n_qubits);

// One-axis-twisted spin-squeezed state: build_css, then the twist phase
// e^{-i mu_k^2 T_s} per slot, then the alignment rotation e^{+i delta J_x}
// with delta = sss_alignment_angle(n, T_s).  Requires n >= 2, T_s >= 0.
SymmetricState build_sss(int n_qubits, double squeeze_time);

// Alignment angle 0.5 * atan2(B, A) with A = 1 - (cos 2T)^(n-2) and
// B = 4 sin T (cos T)^(n-2); the atan2 branch makes T = 0 give 0.
double sss_alignment_angle(int n_qubits, double squeeze_time);

// e^{-i angle J_axis} on the symmetric subspace.  Z is a diagonal phase
// multiply; X uses a cached eigendecomposition of the tridiagonal
// generator; Y is conjugated through Z quarter-turns.
SymmetricState rotate(const SymmetricState& state, Axis axis, double angle);

struct MeasureResult {
  bool up = false;       // sampled z outcome of the extracted qubit
  double prob_up = 0.0;  // Born probability of `up`
  SymmetricState state;  // renormalized remaining m-1 qubits
  double spin() const { return up ? 0.5 : -0.5; }
};

// Splits one qubit off the register via
//   |m,k> = sqrt((m-k)/m) |up>|m-1,k> + sqrt(k/m) |down>|m-1,k-1>,
// rotates it by e^{-i theta s_y}, measures s_z, and collapses.  The
// outcome is `up` iff rng_draw < prob_up.  O(m) time.
MeasureResult split_measure(const SymmetricState& state, double qubit_rotation,
                            double rng_draw);

// Same physical step with the outcome discarded: the Monte-Carlo
// unravelling of losing one qubit.  Sampling a z measurement and
// forgetting the result reproduces the partial trace in expectation.
SymmetricState trace_out_one(const SymmetricState& state, double qubit_rotation,
                             double rng_draw);

// Tridiagonal matrix of the collective angular-momentum operator J_axis in
// the Dicke z-basis: diag[k] = <k|J|k>, off[k] = <k+1|J|k> for k < m.
struct CollectiveGenerator {
  Axis axis;
  int m = 0;
  std::vector<double> diag;
  std::vector<std::complex<double>> off;
};
CollectiveGenerator collective_generator(Axis axis, int m);

namespace detail {

// Hard cap on the register size the split kernel supports (sqrt tables).
inline constexpr int kMaxQubits = 4096;

// sqrt(i) for i <= kMaxQubits, built once.
inline const double* sqrt_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kMaxQubits + 1);
    for (int i = 0; i <= kMaxQubits; ++i) t[i] = std::sqrt(double(i));
    return t;
  }();
  return table.data();
}

// Reused branch buffers for the split kernel.
struct SplitScratch {
  std::vector<double> ur, ui, dr, di;
  void ensure(std::size_t m) {
    if (ur.size() < m) {
      ur.resize(m);
      ui.resize(m);
      dr.resize(m);
      di.resize(m);
    }
  }
};

// Hot inner kernel shared with the trial simulator, on split real/imag
// arrays of length m+1.  Writes the collapsed, renormalized branch (m
// entries) to out_r/out_i, which may alias ar/ai.  Returns prob_up and
// sets *up = (draw < prob_up).
//
// Branch amplitudes carry a common sqrt(m) scale that cancels in the
// probability ratio and the final renormalization, so no 1/m divisions
// appear in the loop.
inline double split_measure_soa(const double* ar, const double* ai, int m,
                                double theta, double draw, double* out_r,
                                double* out_i, bool* up,
                                SplitScratch& scratch) {
  const double* st = sqrt_table();
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  scratch.ensure(m);
  double* __restrict__ ur = scratch.ur.data();
  double* __restrict__ ui = scratch.ui.data();
  double* __restrict__ dr = scratch.dr.data();
  double* __restrict__ di = scratch.di.data();
  double pu = 0.0, pd = 0.0;
  for (int k = 0; k < m; ++k) {
    const double f1 = st[m - k];
    const double f2 = st[k + 1];
    const double t1r = f1 * ar[k], t1i = f1 * ai[k];
    const double t2r = f2 * ar[k + 1], t2i = f2 * ai[k + 1];
    const double xur = c * t1r - s * t2r, xui = c * t1i - s * t2i;
    const double xdr = s * t1r + c * t2r, xdi = s * t1i + c * t2i;
    ur[k] = xur;
    ui[k] = xui;
    dr[k] = xdr;
    di[k] = xdi;
    pu += xur * xur + xui * xui;
    pd += xdr * xdr + xdi * xdi;
  }
  const double prob_up = pu / (pu + pd);
  const bool took_up = draw < prob_up;
  *up = took_up;
  const double scale = 1.0 / std::sqrt(took_up ? pu : pd);
  const double* __restrict__ br = took_up ? ur : dr;
  const double* __restrict__ bi = took_up ? ui : di;
  for (int k = 0; k < m; ++k) {
    out_r[k] = br[k] * scale;
    out_i[k] = bi[k] * scale;
  }
  return prob_up;
}

}  // namespace detail

}  // namespace afqm
