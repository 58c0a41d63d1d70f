#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace afqm {

enum class StateKind { Sine, SSS, CSS };

const char* to_string(StateKind kind);
StateKind state_kind_from_string(const std::string& name);

// The trainable feedback strategy: the n-th compensation adjustment is
//   delta(n) = sum_l coeffs[l] * pi / (n+1)^(wp + l),
// defined for every n >= 1, which is what lets a policy trained at one
// ensemble size run unchanged on larger ones.  For spin-squeezed input the
// trained quantity is squeeze_coeff c_s with T_s = c_s / n^(2/3).
struct InverseScalingPolicy {
  double wp = 0.0;
  std::vector<double> coeffs;           // c_0 .. c_{Ns-1}
  std::optional<double> squeeze_coeff;  // present iff state_kind == SSS
  StateKind state_kind = StateKind::Sine;
  int n_trained = 0;

  int ns() const { return static_cast<int>(coeffs.size()); }
  // Enforces Ns >= 1 and the squeeze_coeff <-> SSS pairing.
  void validate() const;
};

// Feedback adjustment Delta_n, n >= 1.
double delta(const InverseScalingPolicy& policy, int n);

// phi_n = phi_{n-1} - 2 s Delta_n, wrapped into [-pi, pi).
double update_compensation(double prev, double spin, double adjustment);

// Wrap into [-pi, pi).
double wrap_to_pi(double angle);

// T_s = c_s / n^(2/3), clamped into [0, 2/sqrt(n)].  SSS policies only.
double squeeze_time(const InverseScalingPolicy& policy, int n_qubits);

// Per-parameter box the optimizers search over.  Parameter layout:
// x[0] = wp, x[1..Ns] = c_0..c_{Ns-1}, and for SSS x[Ns+1] = c_s.
struct SearchBox {
  std::vector<double> low, high;

  std::size_t dim() const { return low.size(); }
  bool empty() const { return low.empty(); }
  void validate() const;  // sizes match, low < high everywhere

  // Default box: wp in [0,5], c_l in [-5,5]; for SSS, c_s in
  // [0, 2 n^(1/6)] (the T_s <= 2/sqrt(n) cap expressed on c_s).
  static SearchBox policy_box(StateKind kind, int ns, int n_qubits);
};

// Box-dimension convention above, shared by the optimizers and the CLI.
std::vector<double> encode_policy(const InverseScalingPolicy& policy);
InverseScalingPolicy decode_policy(const std::vector<double>& x, StateKind kind,
                                   int ns, int n_trained);

// A policy plus its training provenance; what policy files store.
struct PolicyRecord {
  InverseScalingPolicy policy;
  std::uint64_t training_seed = 0;
  double cost = 0.0;                // held-out Holevo variance
  std::uint64_t cost_seed = 0;      // seed base of the held-out evaluation
  long cost_trials = 0;             // trial count of the held-out evaluation
};

// Canonical single-record text serialization (JSON).  Round-trips are
// bit-exact; unknown or missing fields raise ParseError with the field path.
std::string serialize(const PolicyRecord& record);
PolicyRecord deserialize(const std::string& text);

PolicyRecord load_policy_file(const std::string& path);
void save_policy_file(const PolicyRecord& record, const std::string& path);

// Short content hash of the serialized record, used to tag result rows.
std::string policy_id(const PolicyRecord& record);

}  // namespace afqm
