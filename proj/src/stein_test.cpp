#include "finiten/stein_test.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

#include "finiten/error.hpp"
#include "finiten/specfun.hpp"

namespace finiten {

const char* to_string(Cutoff::Source source) {
  return source == Cutoff::Source::kTheoretical ? "theoretical" : "calibrated";
}

std::vector<int> SteinTestConfig::even_modes(int m) {
  std::vector<int> modes;
  for (int k = 4; k <= m; k += 2) modes.push_back(k);
  return modes;
}

SteinTestConfig SteinTestConfig::defaults(double N, int m) {
  SteinTestConfig config;
  config.N = N;
  config.m = m;
  config.modes = even_modes(m);
  return config;
}

void SteinTestConfig::validate() const {
  if (!std::isfinite(N) || !(N > 3.0)) throw ConfigError("N must be finite and > 3");
  if (m < 4) throw ConfigError("truncation m must be >= 4");
  if (modes.empty()) throw ConfigError("mode set is empty");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i] < 1 || modes[i] > m) throw ConfigError("modes must lie in [1, m]");
    if (i > 0 && modes[i] <= modes[i - 1]) {
      throw ConfigError("modes must be distinct and increasing");
    }
  }
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0, 1)");
  if (cutoff.source == Cutoff::Source::kCalibrated &&
      (!std::isfinite(cutoff.value) || !(cutoff.value > 0.0))) {
    throw ConfigError("calibrated cutoff must be finite and positive");
  }
}

Sample standardize(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 2) throw DomainError("standardize: need at least two observations");
  const auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
  if (!std::isfinite(*lo) || !std::isfinite(*hi)) {
    throw DomainError("standardize: sample contains non-finite values");
  }
  if (*lo == *hi) throw DegenerateSampleError("standardize: sample is constant");

  const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
  Sample out(sample.begin(), sample.end());
  double sum_sq = 0.0;
  for (double& x : out) {
    x -= mean;
    sum_sq += x * x;
  }
  // Remove the residual rounding offset of the first pass.
  const double shift = std::accumulate(out.begin(), out.end(), 0.0) / n;
  const double mean_sq = sum_sq / n - shift * shift;
  if (!(mean_sq > 0.0)) throw DegenerateSampleError("standardize: zero variance");
  const double scale = 1.0 / std::sqrt(mean_sq);
  for (double& x : out) x = (x - shift) * scale;
  return out;
}

Sample prepare_sample(std::span<const double> raw_sample, const SteinTestConfig& config) {
  if (config.standardize) return standardize(raw_sample);
  if (raw_sample.empty()) throw DomainError("empty sample");
  for (double x : raw_sample) {
    if (!std::isfinite(x)) throw DomainError("sample contains non-finite values");
  }
  return Sample(raw_sample.begin(), raw_sample.end());
}

namespace {

void check_basis(const SteinTestConfig& config, const JacobiBasis& basis) {
  const double alpha = 0.5 * (config.N - 3.0);
  if (std::abs(basis.alpha() - alpha) > 1e-12 * std::max(1.0, alpha)) {
    throw ConfigError("basis alpha does not match (N - 3)/2");
  }
  if (config.modes.empty() || config.modes.back() > basis.max_order()) {
    throw ConfigError("basis order is below the highest requested mode");
  }
}

}  // namespace

std::vector<double> mode_coefficients(std::span<const double> standardized,
                                      const SteinTestConfig& config, const JacobiBasis& basis) {
  check_basis(config, basis);
  if (standardized.empty()) throw DomainError("coefficients: empty sample");
  const int top = config.modes.back();
  std::vector<double> psi(top);
  std::vector<double> scratch(top + 1);
  std::vector<double> sums(top, 0.0);
  const double inv_bound = 1.0 / std::sqrt(config.N);
  for (double x : standardized) {
    basis.psi_into(x * inv_bound, psi, scratch);
    for (int k = 0; k < top; ++k) sums[k] += psi[k];
  }
  const double norm = 1.0 / std::sqrt(static_cast<double>(standardized.size()));
  std::vector<double> mu;
  mu.reserve(config.modes.size());
  for (int k : config.modes) mu.push_back(sums[k - 1] * norm);
  return mu;
}

std::map<int, double> coefficients(std::span<const double> standardized,
                                   const SteinTestConfig& config, const JacobiBasis& basis) {
  const auto mu = mode_coefficients(standardized, config, basis);
  std::map<int, double> out;
  for (std::size_t i = 0; i < mu.size(); ++i) out.emplace(config.modes[i], mu[i]);
  return out;
}

double statistic(std::span<const double> standardized, const SteinTestConfig& config,
                 const JacobiBasis& basis) {
  double t = 0.0;
  for (double mu : mode_coefficients(standardized, config, basis)) t += mu * mu;
  return t;
}

double resolve_cutoff(const SteinTestConfig& config) {
  if (config.cutoff.source == Cutoff::Source::kCalibrated) return config.cutoff.value;
  return specfun::chi2_quantile(config.dof(), 1.0 - config.level);
}

TestReport run_test(std::span<const double> raw_sample, const SteinTestConfig& config,
                    const JacobiBasis& basis) {
  config.validate();
  const Sample z = prepare_sample(raw_sample, config);
  const auto mu = mode_coefficients(z, config, basis);

  TestReport report;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    report.coefficients.emplace(config.modes[i], mu[i]);
    report.statistic += mu[i] * mu[i];
  }
  report.dof = config.dof();
  report.cutoff = resolve_cutoff(config);
  report.p_value = specfun::chi2_sf(report.dof, report.statistic);
  report.reject = report.statistic > report.cutoff;
  return report;
}

namespace {

SteinTestConfig validated(SteinTestConfig config) {
  config.validate();
  return config;
}

}  // namespace

SteinTest::SteinTest(SteinTestConfig config)
    : config_(validated(std::move(config))),
      basis_(0.5 * (config_.N - 3.0), config_.m) {}

double SteinTest::evaluate(std::span<const double> raw_sample) const {
  return statistic(prepare_sample(raw_sample, config_), config_, basis_);
}

std::string to_json(const TestReport& report) {
  nlohmann::ordered_json coeffs = nlohmann::ordered_json::object();
  for (const auto& [k, mu] : report.coefficients) coeffs[std::to_string(k)] = mu;
  nlohmann::ordered_json j;
  j["statistic"] = report.statistic;
  j["dof"] = report.dof;
  j["cutoff"] = report.cutoff;
  j["p_value"] = report.p_value;
  j["reject"] = report.reject;
  j["coefficients"] = coeffs;
  return j.dump();
}

}  // namespace finiten
