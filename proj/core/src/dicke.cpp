#include "afqm/dicke.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "afqm/errors.hpp"
#include "afqm/rng.hpp"

namespace afqm {

namespace {

using cd = std::complex<double>;
using detail::sqrt_table;

void require_finite_angle(double angle) {
  if (!std::isfinite(angle)) throw std::invalid_argument("angle must be finite");
}

// Eigendecomposition of the real symmetric tridiagonal Jx generator for a
// fixed m, cached so repeated rotations cost two matvecs.
struct XRotationPlan {
  Eigen::MatrixXd vectors;  // columns are eigenvectors
  Eigen::VectorXd values;
};

std::shared_ptr<const XRotationPlan> x_plan(int m) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const XRotationPlan>> cache;
  {
    std::scoped_lock lock(mu);
    if (auto it = cache.find(m); it != cache.end()) return it->second;
  }
  Eigen::MatrixXd jx = Eigen::MatrixXd::Zero(m + 1, m + 1);
  const double* st = sqrt_table();
  for (int k = 0; k < m; ++k) {
    const double c = 0.5 * st[k + 1] * st[m - k];
    jx(k, k + 1) = c;
    jx(k + 1, k) = c;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jx);
  auto plan = std::make_shared<XRotationPlan>(
      XRotationPlan{solver.eigenvectors(), solver.eigenvalues()});
  std::scoped_lock lock(mu);
  auto [it, inserted] = cache.emplace(m, std::move(plan));
  (void)inserted;
  return it->second;
}

void rotate_z_inplace(std::vector<cd>& amps, double angle) {
  const int m = static_cast<int>(amps.size()) - 1;
  const double j = 0.5 * m;
  for (int k = 0; k <= m; ++k) {
    const double mu = j - k;
    amps[k] *= std::polar(1.0, -angle * mu);
  }
}

void rotate_x_inplace(std::vector<cd>& amps, double angle) {
  const int m = static_cast<int>(amps.size()) - 1;
  if (m == 0) return;
  auto plan = x_plan(m);
  const auto& v = plan->vectors;
  Eigen::VectorXd re(m + 1), im(m + 1);
  for (int k = 0; k <= m; ++k) {
    re[k] = amps[k].real();
    im[k] = amps[k].imag();
  }
  Eigen::VectorXd yre = v.transpose() * re;
  Eigen::VectorXd yim = v.transpose() * im;
  for (int k = 0; k <= m; ++k) {
    const cd z = cd(yre[k], yim[k]) * std::polar(1.0, -angle * plan->values[k]);
    yre[k] = z.real();
    yim[k] = z.imag();
  }
  re = v * yre;
  im = v * yim;
  for (int k = 0; k <= m; ++k) amps[k] = cd(re[k], im[k]);
}

}  // namespace

SymmetricState::SymmetricState(std::vector<cd> amps) : amps_(std::move(amps)) {
  if (amps_.empty()) throw std::invalid_argument("amplitude vector is empty");
  if (amps_.size() > std::size_t(detail::kMaxQubits) + 1)
    throw std::invalid_argument("register exceeds supported qubit count");
  double n2 = 0.0;
  for (const cd& a : amps_) n2 += std::norm(a);
  if (!(n2 > 0.0) || !std::isfinite(n2))
    throw std::invalid_argument("amplitude vector has zero or non-finite norm");
  const double inv = 1.0 / std::sqrt(n2);
  for (cd& a : amps_) a *= inv;
}

double SymmetricState::norm() const {
  double n2 = 0.0;
  for (const cd& a : amps_) n2 += std::norm(a);
  return std::sqrt(n2);
}

SymmetricState build_css(int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("build_css needs n >= 1");
  std::vector<cd> amps(n_qubits + 1);
  const double ln2 = std::log(2.0);
  for (int k = 0; k <= n_qubits; ++k) {
    // sqrt(C(n,k))/2^(n/2), evaluated in logs so large n stays finite
    const double lg = std::lgamma(n_qubits + 1.0) - std::lgamma(k + 1.0) -
                      std::lgamma(n_qubits - k + 1.0);
    amps[k] = std::exp(0.5 * lg - 0.5 * n_qubits * ln2);
  }
  return SymmetricState(std::move(amps));
}

SymmetricState build_sine(int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("build_sine needs n >= 1");
  const double j = 0.5 * n_qubits;
  std::vector<cd> amps(n_qubits + 1);
  for (int k = 0; k <= n_qubits; ++k) {
    // slot k holds mu = j - k, so the profile index mu + j + 1 is n+1-k
    amps[k] = std::sin((n_qubits + 1 - k) * kPi / (2.0 * (j + 1.0)));
  }
  SymmetricState in_y_labels(std::move(amps));
  // map the y-label vector to the z basis: |j mu>_y = e^{+i(pi/2)Jx}|j mu>_z
  return rotate(in_y_labels, Axis::X, -0.5 * kPi);
}

double sss_alignment_angle(int n_qubits, double squeeze_time) {
  if (n_qubits < 2) throw std::invalid_argument("sss needs n >= 2");
  if (!(squeeze_time >= 0.0)) throw std::invalid_argument("squeeze time must be >= 0");
  const double a = 1.0 - std::pow(std::cos(2.0 * squeeze_time), double(n_qubits - 2));
  const double b = 4.0 * std::sin(squeeze_time) *
                   std::pow(std::cos(squeeze_time), double(n_qubits - 2));
  return 0.5 * std::atan2(b, a);  // atan2(0,0) = 0 covers T_s = 0
}

SymmetricState build_sss(int n_qubits, double squeeze_time) {
  const double delta = sss_alignment_angle(n_qubits, squeeze_time);
  SymmetricState state = build_css(n_qubits);
  std::vector<cd> amps(state.amps().begin(), state.amps().end());
  const double j = 0.5 * n_qubits;
  for (int k = 0; k <= n_qubits; ++k) {
    const double mu = j - k;
    amps[k] *= std::polar(1.0, -mu * mu * squeeze_time);
  }
  SymmetricState twisted(std::move(amps));
  return rotate(twisted, Axis::X, -delta);  // e^{+i delta Jx}
}

SymmetricState rotate(const SymmetricState& state, Axis axis, double angle) {
  require_finite_angle(angle);
  std::vector<cd> amps(state.amps().begin(), state.amps().end());
  switch (axis) {
    case Axis::Z:
      rotate_z_inplace(amps, angle);
      break;
    case Axis::X:
      rotate_x_inplace(amps, angle);
      break;
    case Axis::Y:
      // e^{-i t Jy} = e^{-i(pi/2)Jz} e^{-i t Jx} e^{+i(pi/2)Jz}
      rotate_z_inplace(amps, -0.5 * kPi);
      rotate_x_inplace(amps, angle);
      rotate_z_inplace(amps, 0.5 * kPi);
      break;
  }
  return SymmetricState(std::move(amps));
}

namespace detail {

double split_measure_kernel(const cd* amps, int m, double theta, double draw,
                            cd* out, bool* up) {
  const double* st = sqrt_table();
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  // Pass 1: branch norms.  Branch amplitudes carry a common sqrt(m) scale
  // that cancels in the probability ratio and the final renormalization.
  double pu = 0.0, pd = 0.0;
  for (int k = 0; k < m; ++k) {
    const cd t1 = st[m - k] * amps[k];
    const cd t2 = st[k + 1] * amps[k + 1];
    pu += std::norm(c * t1 - s * t2);
    pd += std::norm(s * t1 + c * t2);
  }
  const double prob_up = pu / (pu + pd);
  const bool took_up = draw < prob_up;
  *up = took_up;
  // Pass 2: materialize only the sampled branch, renormalized.  Forward
  // in-place is safe: position k+1 is read before it is overwritten.
  const double scale = 1.0 / std::sqrt(took_up ? pu : pd);
  cd cur = amps[0];
  if (took_up) {
    for (int k = 0; k < m; ++k) {
      const cd next = amps[k + 1];
      out[k] = (c * st[m - k] * cur - s * st[k + 1] * next) * scale;
      cur = next;
    }
  } else {
    for (int k = 0; k < m; ++k) {
      const cd next = amps[k + 1];
      out[k] = (s * st[m - k] * cur + c * st[k + 1] * next) * scale;
      cur = next;
    }
  }
  return prob_up;
}

}  // namespace detail

MeasureResult split_measure(const SymmetricState& state, double qubit_rotation,
                            double rng_draw) {
  require_finite_angle(qubit_rotation);
  const int m = state.qubits();
  if (m < 1) throw StateExhaustedError();
  std::vector<cd> collapsed(m);
  bool up = false;
  const double prob_up = detail::split_measure_kernel(
      state.amps().data(), m, qubit_rotation, rng_draw, collapsed.data(), &up);
  return MeasureResult{up, prob_up, SymmetricState(std::move(collapsed))};
}

SymmetricState trace_out_one(const SymmetricState& state, double qubit_rotation,
                             double rng_draw) {
  return split_measure(state, qubit_rotation, rng_draw).state;
}

CollectiveGenerator collective_generator(Axis axis, int m) {
  if (m < 0) throw std::invalid_argument("m must be >= 0");
  CollectiveGenerator g;
  g.axis = axis;
  g.m = m;
  g.diag.assign(m + 1, 0.0);
  g.off.assign(std::max(m, 0), cd(0.0, 0.0));
  const double* st = sqrt_table();
  const double j = 0.5 * m;
  for (int k = 0; k <= m; ++k)
    if (axis == Axis::Z) g.diag[k] = j - k;
  for (int k = 0; k < m; ++k) {
    const double ladder = 0.5 * st[k + 1] * st[m - k];
    if (axis == Axis::X) g.off[k] = ladder;
    if (axis == Axis::Y) g.off[k] = cd(0.0, ladder);  // <k+1|Jy|k> = +i/2 sqrt((k+1)(m-k))
  }
  return g;
}

}  // namespace afqm
