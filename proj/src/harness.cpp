#include "finiten/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "finiten/edf_tests.hpp"
#include "finiten/error.hpp"
#include "finiten/specfun.hpp"

namespace finiten::harness {
namespace {

constexpr std::size_t kChunk = 32;

unsigned resolve_workers(const RunOptions& options) {
  if (options.workers > 0) return options.workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(begin, end) over fixed-size chunks of [0, count). Chunk boundaries
// do not depend on the worker count.
template <typename Fn>
void parallel_chunks(std::size_t count, const RunOptions& options, Fn&& fn) {
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_workers(options), chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c * kChunk, std::min(count, (c + 1) * kChunk));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    try {
      for (std::size_t c = next++; c < chunks; c = next++) {
        fn(c * kChunk, std::min(count, (c + 1) * kChunk));
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = chunks;
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  }
  if (failure) std::rethrow_exception(failure);
}

void require_sample_size(int n) {
  if (n < 2) throw ConfigError("sample size n must be >= 2");
}

void require_reps(int reps) {
  if (reps < 1) throw ConfigError("replication count must be >= 1");
}

Purpose eval_purpose(Hypothesis hypothesis) {
  return hypothesis == Hypothesis::kNull ? Purpose::kEvalNull : Purpose::kEvalGaussian;
}

int count_above(const std::vector<double>& stats, double cutoff) {
  return static_cast<int>(
      std::count_if(stats.begin(), stats.end(), [cutoff](double t) { return t > cutoff; }));
}

}  // namespace

const char* to_string(Hypothesis hypothesis) {
  return hypothesis == Hypothesis::kNull ? "H0" : "H1";
}

std::uint64_t cell_stream(double N, int n, std::span<const int> modes, Purpose purpose) {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(purpose));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(N));
  h = mix64(h ^ static_cast<std::uint64_t>(n));
  h = mix64(h ^ modes.size());
  for (int k : modes) h = mix64(h ^ static_cast<std::uint64_t>(k));
  return h;
}

void draw_replication(const FiniteNLaw& law, Hypothesis hypothesis, std::uint64_t seed,
                      std::uint64_t stream, std::uint32_t rep, std::span<double> out) {
  Philox4x32 rng(seed, stream, rep);
  if (hypothesis == Hypothesis::kNull) {
    FiniteNSampler(law).fill(out, rng);
  } else {
    NormalVariate normal;
    for (double& x : out) x = normal(rng);
  }
}

std::vector<double> simulate_statistics(const SteinTestConfig& config, int n,
                                        Hypothesis hypothesis, Purpose purpose, int reps,
                                        std::uint64_t seed, const RunOptions& options) {
  config.validate();
  require_sample_size(n);
  require_reps(reps);
  const FiniteNLaw law(config.N);
  const JacobiBasis basis(law.alpha(), config.m);
  const std::uint64_t stream = cell_stream(config.N, n, config.modes, purpose);

  std::vector<double> stats(reps);
  parallel_chunks(stats.size(), options, [&](std::size_t begin, std::size_t end) {
    std::vector<double> raw(n);
    for (std::size_t r = begin; r < end; ++r) {
      draw_replication(law, hypothesis, seed, stream, static_cast<std::uint32_t>(r), raw);
      stats[r] = statistic(prepare_sample(raw, config), config, basis);
    }
  });
  return stats;
}

double empirical_upper_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw ConfigError("empirical_upper_quantile: no values");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0, 1)");
  const double count = static_cast<double>(values.size());
  // The guard keeps an exact-integer product from rounding up a rank.
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - level) * (count + 1.0) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

double calibrate(const SteinTestConfig& config, int n, int reps, std::uint64_t seed,
                 const RunOptions& options) {
  if (reps < kMinCalibrationReps) {
    throw ConfigError("calibration needs at least " + std::to_string(kMinCalibrationReps) +
                      " replications");
  }
  auto stats = simulate_statistics(config, n, Hypothesis::kNull, Purpose::kCalibration, reps,
                                   seed, options);
  return empirical_upper_quantile(std::move(stats), config.level);
}

PowerRow estimate_rejection(const SteinTestConfig& config, int n, Hypothesis hypothesis,
                            int reps, std::uint64_t seed, const RunOptions& options) {
  const auto stats =
      simulate_statistics(config, n, hypothesis, eval_purpose(hypothesis), reps, seed, options);
  PowerRow row;
  row.N = config.N;
  row.n = n;
  row.m = config.m;
  row.modes = config.modes;
  row.cutoff_source = config.cutoff.source;
  row.hypothesis = hypothesis;
  row.cutoff = resolve_cutoff(config);
  row.rejections = count_above(stats, row.cutoff);
  row.reps = reps;
  row.rejection_rate = static_cast<double>(row.rejections) / reps;
  row.seed = seed;
  return row;
}

GridSpec GridSpec::paper_grid(std::uint64_t seed) {
  GridSpec spec;
  for (int N = 5; N <= 20; ++N) spec.N_values.push_back(N);
  for (int n = 10; n <= 200; n += 10) spec.n_values.push_back(n);
  for (int n = 250; n <= 500; n += 50) spec.n_values.push_back(n);
  spec.m_values = {4, 6, 8, 10};
  spec.master_seed = seed;
  return spec;
}

GridSpec GridSpec::paper_scale(std::uint64_t seed) {
  GridSpec spec = paper_grid(seed);
  spec.calib_reps = 50000;
  spec.eval_reps = 20000;
  return spec;
}

void GridSpec::validate() const {
  if (N_values.empty() || n_values.empty() || m_values.empty()) {
    throw ConfigError("grid axes must be nonempty");
  }
  for (double N : N_values) {
    if (!std::isfinite(N) || !(N > 3.0)) throw ConfigError("grid N values must be > 3");
  }
  for (int n : n_values) require_sample_size(n);
  for (int m : m_values) {
    if (m < 4) throw ConfigError("grid m values must be >= 4");
  }
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0, 1)");
  if (calib_reps < kMinCalibrationReps) throw ConfigError("calib_reps below minimum");
  require_reps(eval_reps);
}

GridResult run_grid(const GridSpec& spec, const GridOptions& options) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  GridResult result;
  for (double N : spec.N_values) {
    for (int n : spec.n_values) {
      for (int m : spec.m_values) {
        if (options.max_seconds) {
          const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
          if (elapsed.count() > *options.max_seconds) return result;
        }
        SteinTestConfig config = SteinTestConfig::defaults(N, m);
        config.level = spec.level;
        config.standardize = spec.standardize;

        CalibrationEntry entry{N,           n, m, config.modes, spec.level, 0.0, spec.calib_reps,
                               spec.master_seed};
        entry.cutoff = calibrate(config, n, spec.calib_reps, spec.master_seed, options.run);
        if (options.on_calibration) options.on_calibration(entry);
        result.calibration.push_back(entry);

        const double theoretical = specfun::chi2_quantile(config.dof(), 1.0 - spec.level);
        for (Hypothesis h : {Hypothesis::kNull, Hypothesis::kGaussian}) {
          const auto stats = simulate_statistics(config, n, h, eval_purpose(h), spec.eval_reps,
                                                 spec.master_seed, options.run);
          for (auto source : {Cutoff::Source::kCalibrated, Cutoff::Source::kTheoretical}) {
            PowerRow row;
            row.N = N;
            row.n = n;
            row.m = m;
            row.modes = config.modes;
            row.cutoff_source = source;
            row.hypothesis = h;
            row.cutoff = source == Cutoff::Source::kCalibrated ? entry.cutoff : theoretical;
            row.rejections = count_above(stats, row.cutoff);
            row.reps = spec.eval_reps;
            row.rejection_rate = static_cast<double>(row.rejections) / row.reps;
            row.seed = spec.master_seed;
            if (options.on_row) options.on_row(row);
            result.rows.push_back(std::move(row));
          }
        }
      }
    }
  }
  result.complete = true;
  return result;
}

SanovTable sanov_table(std::span<const double> N_values, std::span<const int> n_values) {
  SanovTable table;
  table.N_values.assign(N_values.begin(), N_values.end());
  table.n_values.assign(n_values.begin(), n_values.end());
  for (double N : N_values) {
    const FiniteNLaw law(N);
    const double kl = kl_to_gaussian(law);
    table.kl.push_back(kl);
    auto& row = table.power.emplace_back();
    for (int n : n_values) {
      if (n < 0) throw DomainError("sanov_table: n must be >= 0");
      row.push_back(sanov_power_proxy(law, static_cast<std::uint64_t>(n)));
    }
  }
  return table;
}

std::vector<BoundaryPoint> power_boundary(std::span<const double> N_values, double target_power) {
  if (!(target_power > 0.0 && target_power < 1.0)) {
    throw DomainError("power_boundary: target power must lie in (0, 1)");
  }
  std::vector<BoundaryPoint> out;
  for (double N : N_values) {
    const FiniteNLaw law(N);
    const double kl = kl_to_gaussian(law);
    auto n_star = static_cast<long long>(std::ceil(-std::log1p(-target_power) / kl));
    n_star = std::max(1LL, n_star);
    // Settle rounding at the threshold against the proxy itself.
    while (n_star > 1 && sanov_power_proxy(law, n_star - 1) >= target_power) --n_star;
    while (sanov_power_proxy(law, n_star) < target_power) ++n_star;
    out.push_back({N, kl, n_star});
  }
  return out;
}

std::vector<std::array<double, 4>> simulate_compare_statistics(double N, int n, int m,
                                                               Hypothesis hypothesis,
                                                               Purpose purpose, int reps,
                                                               std::uint64_t seed,
                                                               const RunOptions& options) {
  const SteinTestConfig config = SteinTestConfig::defaults(N, m);
  config.validate();
  require_sample_size(n);
  require_reps(reps);
  const FiniteNLaw law(N);
  const JacobiBasis basis(law.alpha(), m);
  const std::uint64_t stream = cell_stream(N, n, config.modes, purpose);

  std::vector<std::array<double, 4>> stats(reps);
  parallel_chunks(stats.size(), options, [&](std::size_t begin, std::size_t end) {
    std::vector<double> raw(n);
    for (std::size_t r = begin; r < end; ++r) {
      draw_replication(law, hypothesis, seed, stream, static_cast<std::uint32_t>(r), raw);
      const Sample z = standardize(raw);
      const EdfStatistics edf = edf_statistics(z, law);
      stats[r] = {statistic(z, config, basis), edf.ks, edf.cvm, edf.ad};
    }
  });
  return stats;
}

std::vector<CompareRow> compare_edf(double N, std::span<const int> n_values, int m,
                                    int calib_reps, int reps, std::uint64_t seed,
                                    const RunOptions& options) {
  if (calib_reps < kMinCalibrationReps) throw ConfigError("calib_reps below minimum");
  const double level = 0.05;
  std::vector<CompareRow> rows;
  for (int n : n_values) {
    const auto null_stats = simulate_compare_statistics(
        N, n, m, Hypothesis::kNull, Purpose::kCompareCalibration, calib_reps, seed, options);
    const auto alt_stats = simulate_compare_statistics(N, n, m, Hypothesis::kGaussian,
                                                       Purpose::kCompareEval, reps, seed, options);
    for (std::size_t t = 0; t < kCompareTests.size(); ++t) {
      std::vector<double> column(null_stats.size());
      for (std::size_t r = 0; r < null_stats.size(); ++r) column[r] = null_stats[r][t];
      const double cutoff = empirical_upper_quantile(std::move(column), level);
      const auto hits = std::count_if(alt_stats.begin(), alt_stats.end(),
                                      [&](const auto& s) { return s[t] > cutoff; });
      rows.push_back({N, n, kCompareTests[t], cutoff, static_cast<double>(hits) / reps,
                      calib_reps, reps, seed});
    }
  }
  return rows;
}

}  // namespace finiten::harness
