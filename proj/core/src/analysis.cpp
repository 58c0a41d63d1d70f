#include "afqm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "afqm/errors.hpp"
#include "afqm/rng.hpp"

namespace afqm {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ScalingPoint evaluate_point(const PolicyRecord& record, int n, long trials,
                            const NoiseConfig& noise, std::uint64_t seed,
                            const TrialOptions& options, bool trained_here) {
  const long k = trials > 0 ? trials : default_trial_count(n);
  const CostDetail detail = estimate_cost_detail(
      record.policy.state_kind, n, record.policy, noise, k, seed, options);
  ScalingPoint pt;
  pt.n_qubits = n;
  pt.state = record.policy.state_kind;
  pt.policy_id = policy_id(record);
  pt.noise = noise;
  pt.cost = detail.estimate;
  pt.dphi_stderr = bootstrap_dphi_stderr(detail);
  pt.seed = seed;
  pt.trained_here = trained_here;
  return pt;
}

}  // namespace

PowerLawFit fit_power_law(std::span<const std::array<double, 2>> n_dphi) {
  if (n_dphi.size() < 3)
    throw std::invalid_argument("power-law fit needs at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<std::array<double, 2>> logs;
  logs.reserve(n_dphi.size());
  for (const auto& [n, dphi] : n_dphi) {
    if (!(n > 0.0) || !(dphi > 0.0) || !std::isfinite(dphi))
      throw std::invalid_argument("power-law fit needs positive finite dphi");
    logs.push_back({std::log(n), std::log(dphi)});
  }
  for (const auto& [x, y] : logs) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double count = double(logs.size());
  const double denom = count * sxx - sx * sx;
  if (!(denom > 1e-12 * std::max(1.0, count * sxx)))
    throw std::invalid_argument("power-law fit needs distinct n values");
  const double slope = (count * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / count;
  double ss = 0.0;
  for (const auto& [x, y] : logs) {
    const double r = y - (slope * x + intercept);
    ss += r * r;
  }
  PowerLawFit fit;
  fit.alpha = -slope;
  fit.prefactor = std::exp(intercept);
  fit.residual_rms = std::sqrt(ss / count);
  fit.points = static_cast<int>(logs.size());
  return fit;
}

PowerLawFit fit_power_law(std::span<const ScalingPoint> points) {
  std::vector<std::array<double, 2>> pairs;
  pairs.reserve(points.size());
  for (const auto& p : points)
    pairs.push_back({double(p.n_qubits), p.cost.imprecision});
  return fit_power_law(pairs);
}

std::vector<ScalingPoint> sweep_policy(const PolicyRecord& record,
                                       const SweepConfig& config) {
  if (config.n_values.empty())
    throw std::invalid_argument("sweep needs at least one n");
  if (!std::is_sorted(config.n_values.begin(), config.n_values.end()))
    throw std::invalid_argument("sweep n values must be ascending");
  std::vector<ScalingPoint> points;
  points.reserve(config.n_values.size());
  for (std::size_t i = 0; i < config.n_values.size(); ++i) {
    const int n = config.n_values[i];
    const auto seed = stream_seed(config.seed, i);
    points.push_back(evaluate_point(record, n, config.trials, config.noise,
                                    seed, config.options,
                                    n == record.policy.n_trained));
  }
  return points;
}

std::vector<ScalingPoint> sweep_retrain(StateKind kind,
                                        const OptimizerConfig& base,
                                        const SweepConfig& config,
                                        std::vector<TrainingRun>* runs) {
  if (config.n_values.empty())
    throw std::invalid_argument("sweep needs at least one n");
  if (!std::is_sorted(config.n_values.begin(), config.n_values.end()))
    throw std::invalid_argument("sweep n values must be ascending");
  std::vector<ScalingPoint> points;
  points.reserve(config.n_values.size());
  for (std::size_t i = 0; i < config.n_values.size(); ++i) {
    const int n = config.n_values[i];
    OptimizerConfig cfg = base;
    cfg.seed = stream_seed(config.seed, 0x7000 + i);
    cfg.trials_per_eval = config.trials > 0 ? config.trials : 0;
    cfg.box.low.clear();
    cfg.box.high.clear();
    TrainingRun run = train(kind, n, cfg);
    const auto seed = stream_seed(config.seed, i);
    points.push_back(evaluate_point(run.best, n, config.trials, config.noise,
                                    seed, config.options, true));
    if (runs) runs->push_back(std::move(run));
  }
  return points;
}

std::vector<NoisePoint> noise_resilience_curve(const PolicyRecord& record,
                                               int n_qubits, NoiseAxis axis,
                                               std::span<const double> grid,
                                               long trials, std::uint64_t seed,
                                               const TrialOptions& options) {
  if (grid.empty()) throw std::invalid_argument("noise grid is empty");
  const long k = trials > 0 ? trials : default_trial_count(n_qubits);
  std::vector<NoisePoint> points;
  points.reserve(grid.size());
  for (const double value : grid) {
    NoiseConfig noise;
    (axis == NoiseAxis::LossEta ? noise.loss_eta : noise.phase_sigma) = value;
    noise.validate();
    const CostDetail detail = estimate_cost_detail(
        record.policy.state_kind, n_qubits, record.policy, noise, k, seed,
        options);
    NoisePoint pt;
    pt.grid_value = value;
    pt.noise = noise;
    pt.cost = detail.estimate;
    pt.dphi_stderr = bootstrap_dphi_stderr(detail);
    points.push_back(pt);
  }
  return points;
}

double bootstrap_dphi_stderr(const CostDetail& detail, int resamples,
                             std::uint64_t seed) {
  const auto& blocks = detail.block_sums;
  const std::size_t nb = blocks.size();
  if (nb < 2 || resamples < 2)
    return std::numeric_limits<double>::infinity();
  Rng rng(stream_seed(seed, detail.estimate.trials));
  std::vector<double> values;
  values.reserve(resamples);
  for (int r = 0; r < resamples; ++r) {
    std::complex<double> total = 0.0;
    for (std::size_t i = 0; i < nb; ++i) total += blocks[rng.below(nb)];
    double s = std::abs(total) / double(detail.estimate.trials);
    if (s > 1.0) s = 1.0;
    const double v = 1.0 / (s * s) - 1.0;
    if (s > 0.0 && std::isfinite(v)) values.push_back(std::sqrt(v));
  }
  if (values.size() < 2) return std::numeric_limits<double>::infinity();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= double(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / double(values.size() - 1));
}

const char* const kScalingCsvHeader =
    "n,state,policy_id,eta,phase_sigma,K,S,V,dphi,dphi_stderr,seed";

std::string to_csv(std::span<const ScalingPoint> points) {
  std::ostringstream out;
  out << kScalingCsvHeader << '\n';
  for (const auto& p : points) {
    out << p.n_qubits << ',' << to_string(p.state) << ',' << p.policy_id << ','
        << fmt(p.noise.loss_eta) << ',' << fmt(p.noise.phase_sigma) << ','
        << p.cost.trials << ',' << fmt(p.cost.sharpness) << ','
        << fmt(p.cost.holevo_variance) << ',' << fmt(p.cost.imprecision) << ','
        << fmt(p.dphi_stderr) << ',' << p.seed << '\n';
  }
  return out.str();
}

std::string reference_csv(std::span<const int> n_values) {
  std::ostringstream out;
  out << "n,sql,hl\n";
  for (const int n : n_values)
    out << n << ',' << fmt(1.0 / std::sqrt(double(n))) << ','
        << fmt(1.0 / double(n)) << '\n';
  return out.str();
}

std::vector<ScalingPoint> parse_scaling_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("header", "empty CSV input");
  if (line == std::string(kScalingCsvHeader) + "\r") line.pop_back();
  if (line != kScalingCsvHeader)
    throw ParseError("header", "unexpected CSV header: " + line);
  std::vector<ScalingPoint> points;
  int row = 1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() != 11)
      throw ParseError("row " + std::to_string(row),
                       "expected 11 columns, got " + std::to_string(cols.size()));
    ScalingPoint p;
    try {
      p.n_qubits = std::stoi(cols[0]);
      p.state = state_kind_from_string(cols[1]);
      p.policy_id = cols[2];
      p.noise.loss_eta = std::stod(cols[3]);
      p.noise.phase_sigma = std::stod(cols[4]);
      p.cost.trials = std::stol(cols[5]);
      p.cost.sharpness = std::stod(cols[6]);
      p.cost.holevo_variance = std::stod(cols[7]);
      p.cost.imprecision = std::stod(cols[8]);
      p.dphi_stderr = std::stod(cols[9]);
      p.seed = std::stoull(cols[10]);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError("row " + std::to_string(row), e.what());
    }
    points.push_back(std::move(p));
    ++row;
  }
  return points;
}

}  // namespace afqm
