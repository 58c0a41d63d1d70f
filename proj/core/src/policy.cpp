#include "afqm/policy.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "afqm/errors.hpp"
#include "afqm/rng.hpp"
#include "afqm/version.hpp"

namespace afqm {

using nlohmann::json;

const char* to_string(StateKind kind) {
  switch (kind) {
    case StateKind::Sine: return "sine";
    case StateKind::SSS: return "sss";
    case StateKind::CSS: return "css";
  }
  return "?";
}

StateKind state_kind_from_string(const std::string& name) {
  if (name == "sine") return StateKind::Sine;
  if (name == "sss") return StateKind::SSS;
  if (name == "css") return StateKind::CSS;
  throw ParseError("state", "unknown state kind '" + name + "'");
}

void InverseScalingPolicy::validate() const {
  if (coeffs.empty())
    throw std::invalid_argument("policy needs at least one coefficient");
  const bool has_cs = squeeze_coeff.has_value();
  if (has_cs != (state_kind == StateKind::SSS))
    throw std::invalid_argument(
        "squeeze_coeff must be present exactly for sss policies");
}

double delta(const InverseScalingPolicy& policy, int n) {
  if (n < 1) throw std::invalid_argument("delta is defined for n >= 1");
  const double base = double(n) + 1.0;
  const double inv = 1.0 / base;
  // Horner over the inverse powers, then the common (n+1)^-wp factor.
  double acc = 0.0;
  for (auto it = policy.coeffs.rbegin(); it != policy.coeffs.rend(); ++it)
    acc = acc * inv + *it;
  return kPi * acc * std::pow(base, -policy.wp);
}

double wrap_to_pi(double angle) {
  double y = std::remainder(angle, 2.0 * kPi);
  if (y >= kPi) y -= 2.0 * kPi;
  if (y < -kPi) y += 2.0 * kPi;
  return y;
}

double update_compensation(double prev, double spin, double adjustment) {
  return wrap_to_pi(prev - 2.0 * spin * adjustment);
}

double squeeze_time(const InverseScalingPolicy& policy, int n_qubits) {
  if (policy.state_kind != StateKind::SSS || !policy.squeeze_coeff)
    throw InvalidStateError("squeeze_time requires an sss policy");
  if (n_qubits < 1) throw std::invalid_argument("n_qubits must be >= 1");
  const double ts = *policy.squeeze_coeff * std::pow(double(n_qubits), -2.0 / 3.0);
  const double cap = 2.0 / std::sqrt(double(n_qubits));
  return std::min(std::max(ts, 0.0), cap);
}

void SearchBox::validate() const {
  if (low.size() != high.size())
    throw std::invalid_argument("search box bound vectors differ in length");
  if (low.empty()) throw std::invalid_argument("search box is empty");
  for (std::size_t d = 0; d < low.size(); ++d)
    if (!(low[d] < high[d]))
      throw std::invalid_argument("search box is degenerate in dimension " +
                                  std::to_string(d));
}

SearchBox SearchBox::policy_box(StateKind kind, int ns, int n_qubits) {
  if (ns < 1) throw std::invalid_argument("ns must be >= 1");
  if (n_qubits < 1) throw std::invalid_argument("n_qubits must be >= 1");
  SearchBox box;
  box.low.push_back(0.0);
  box.high.push_back(5.0);
  for (int l = 0; l < ns; ++l) {
    box.low.push_back(-5.0);
    box.high.push_back(5.0);
  }
  if (kind == StateKind::SSS) {
    box.low.push_back(0.0);
    box.high.push_back(2.0 * std::pow(double(n_qubits), 1.0 / 6.0));
  }
  return box;
}

std::vector<double> encode_policy(const InverseScalingPolicy& policy) {
  std::vector<double> x;
  x.reserve(policy.coeffs.size() + 2);
  x.push_back(policy.wp);
  x.insert(x.end(), policy.coeffs.begin(), policy.coeffs.end());
  if (policy.squeeze_coeff) x.push_back(*policy.squeeze_coeff);
  return x;
}

InverseScalingPolicy decode_policy(const std::vector<double>& x, StateKind kind,
                                   int ns, int n_trained) {
  const std::size_t want = std::size_t(ns) + 1 + (kind == StateKind::SSS ? 1 : 0);
  if (ns < 1 || x.size() != want)
    throw std::invalid_argument("parameter vector length does not match ns/kind");
  InverseScalingPolicy p;
  p.wp = x[0];
  p.coeffs.assign(x.begin() + 1, x.begin() + 1 + ns);
  if (kind == StateKind::SSS) p.squeeze_coeff = x[ns + 1];
  p.state_kind = kind;
  p.n_trained = n_trained;
  p.validate();
  return p;
}

namespace {

const json& require_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(key, "missing required field");
  return *it;
}

template <typename T>
T field_as(const json& j, const char* key) {
  try {
    return require_field(j, key).get<T>();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(key, e.what());
  }
}

}  // namespace

std::string serialize(const PolicyRecord& record) {
  record.policy.validate();
  json j;
  j["format"] = kPolicyFormat;
  j["state"] = to_string(record.policy.state_kind);
  j["wp"] = record.policy.wp;
  j["ns"] = record.policy.ns();
  j["coeffs"] = record.policy.coeffs;
  if (record.policy.squeeze_coeff) j["squeeze_coeff"] = *record.policy.squeeze_coeff;
  j["n_trained"] = record.policy.n_trained;
  j["training_seed"] = record.training_seed;
  j["cost"] = record.cost;
  j["cost_seed"] = record.cost_seed;
  j["cost_trials"] = record.cost_trials;
  return j.dump(2) + "\n";
}

PolicyRecord deserialize(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError("", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("", "policy record must be an object");

  static const char* known[] = {"format",    "state",         "wp",
                                "ns",        "coeffs",        "squeeze_coeff",
                                "n_trained", "training_seed", "cost",
                                "cost_seed", "cost_trials"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ParseError(it.key(), "unknown field");
  }

  if (field_as<std::string>(j, "format") != kPolicyFormat)
    throw ParseError("format", "unsupported policy format");

  PolicyRecord rec;
  rec.policy.state_kind = state_kind_from_string(field_as<std::string>(j, "state"));
  rec.policy.wp = field_as<double>(j, "wp");
  rec.policy.coeffs = field_as<std::vector<double>>(j, "coeffs");
  const int ns = field_as<int>(j, "ns");
  if (ns != rec.policy.ns())
    throw ParseError("ns", "does not match coeffs length");
  if (auto it = j.find("squeeze_coeff"); it != j.end())
    rec.policy.squeeze_coeff = field_as<double>(j, "squeeze_coeff");
  rec.policy.n_trained = field_as<int>(j, "n_trained");
  rec.training_seed = field_as<std::uint64_t>(j, "training_seed");
  rec.cost = field_as<double>(j, "cost");
  rec.cost_seed = field_as<std::uint64_t>(j, "cost_seed");
  rec.cost_trials = field_as<long>(j, "cost_trials");
  try {
    rec.policy.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError("squeeze_coeff", e.what());
  }
  return rec;
}

PolicyRecord load_policy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open policy file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

void save_policy_file(const PolicyRecord& record, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write policy file: " + path);
  out << serialize(record);
}

std::string policy_id(const PolicyRecord& record) {
  const std::string text = serialize(record);
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 12);
}

}  // namespace afqm
