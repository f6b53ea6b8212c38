#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "finiten/stein_test.hpp"

namespace finiten::harness {

enum class Hypothesis { kNull, kGaussian };

// "H0" / "H1".
const char* to_string(Hypothesis hypothesis);

// Role of a block of replications; part of the stream address.
enum class Purpose : std::uint8_t {
  kCalibration = 1,
  kEvalNull = 2,
  kEvalGaussian = 3,
  kCompareCalibration = 4,
  kCompareEval = 5,
};

// Stream id for a cell. Replication r of the cell draws from
// Philox4x32(master_seed, cell_stream(...), r).
std::uint64_t cell_stream(double N, int n, std::span<const int> modes, Purpose purpose);

struct RunOptions {
  unsigned workers = 0;  // 0: hardware concurrency
};

// Fills a fresh sample of size n for replication `rep` of a stream.
void draw_replication(const FiniteNLaw& law, Hypothesis hypothesis, std::uint64_t seed,
                      std::uint64_t stream, std::uint32_t rep, std::span<double> out);

// Stein statistics T of `reps` independent replications, indexed by
// replication. Identical for any worker count.
std::vector<double> simulate_statistics(const SteinTestConfig& config, int n,
                                        Hypothesis hypothesis, Purpose purpose, int reps,
                                        std::uint64_t seed, const RunOptions& options = {});

// Order statistic at rank ceil((1 - level)(R + 1)), clamped to [1, R].
double empirical_upper_quantile(std::vector<double> values, double level);

inline constexpr int kMinCalibrationReps = 1000;

// Monte Carlo (1 - level) cutoff of T under H0 for samples of size n.
double calibrate(const SteinTestConfig& config, int n, int reps, std::uint64_t seed,
                 const RunOptions& options = {});

struct CalibrationEntry {
  double N = 0.0;
  int n = 0;
  int m = 0;
  std::vector<int> modes;
  double level = 0.05;
  double cutoff = 0.0;
  int reps = 0;
  std::uint64_t seed = 0;
};

struct PowerRow {
  double N = 0.0;
  int n = 0;
  int m = 0;
  std::vector<int> modes;
  Cutoff::Source cutoff_source = Cutoff::Source::kTheoretical;
  Hypothesis hypothesis = Hypothesis::kNull;
  double cutoff = 0.0;
  int rejections = 0;
  int reps = 0;
  double rejection_rate = 0.0;  // rejections / reps
  std::uint64_t seed = 0;
};

// Fraction of replications with T > cutoff, where the cutoff is resolved
// from config (chi-squared quantile or the supplied calibrated value).
PowerRow estimate_rejection(const SteinTestConfig& config, int n, Hypothesis hypothesis,
                            int reps, std::uint64_t seed, const RunOptions& options = {});

struct GridSpec {
  std::vector<double> N_values;
  std::vector<int> n_values;
  std::vector<int> m_values;
  double level = 0.05;
  int calib_reps = 5000;
  int eval_reps = 2000;
  std::uint64_t master_seed = 0;
  // Both simulated laws have zero mean and unit variance, so the published
  // tables are reproduced without re-standardizing each replication.
  bool standardize = false;

  // N in 5..20, n in 10..200 step 10 and 250..500 step 50, m in {4,6,8,10}.
  static GridSpec paper_grid(std::uint64_t seed);
  // Paper grid at 50,000 calibration and 20,000 evaluation replications.
  static GridSpec paper_scale(std::uint64_t seed);

  void validate() const;
};

struct GridOptions {
  RunOptions run;
  std::optional<double> max_seconds;  // stop between cells once exceeded
  std::function<void(const CalibrationEntry&)> on_calibration;
  std::function<void(const PowerRow&)> on_row;
};

struct GridResult {
  std::vector<CalibrationEntry> calibration;
  std::vector<PowerRow> rows;
  bool complete = false;
};

// One calibration per (N, n, m) and four rows: {H0, H1} x {calibrated,
// theoretical}. Rows are emitted through on_row as each cell finishes.
GridResult run_grid(const GridSpec& spec, const GridOptions& options = {});

struct SanovTable {
  std::vector<double> N_values;
  std::vector<int> n_values;
  std::vector<double> kl;                   // per N
  std::vector<std::vector<double>> power;  // [N][n]
};

SanovTable sanov_table(std::span<const double> N_values, std::span<const int> n_values);

struct BoundaryPoint {
  double N = 0.0;
  double kl = 0.0;
  long long n_star = 0;
};

// Smallest n with 1 - exp(-n D_KL) >= target_power, per N.
std::vector<BoundaryPoint> power_boundary(std::span<const double> N_values, double target_power);

inline constexpr std::array<const char*, 4> kCompareTests{"stein", "ks", "cvm", "ad"};

// Stein T (even modes up to m), KS, CvM and AD statistics for each
// replication, all computed on the same standardized sample.
std::vector<std::array<double, 4>> simulate_compare_statistics(double N, int n, int m,
                                                               Hypothesis hypothesis,
                                                               Purpose purpose, int reps,
                                                               std::uint64_t seed,
                                                               const RunOptions& options = {});

struct CompareRow {
  double N = 0.0;
  int n = 0;
  std::string test;
  double cutoff = 0.0;
  double calibrated_power = 0.0;
  int calib_reps = 0;
  int reps = 0;
  std::uint64_t seed = 0;
};

// Calibrated power of Stein(m), KS, CvM and AD against the Gaussian
// alternative, every test calibrated under H0 with the shared pipeline.
std::vector<CompareRow> compare_edf(double N, std::span<const int> n_values, int m,
                                    int calib_reps, int reps, std::uint64_t seed,
                                    const RunOptions& options = {});

}  // namespace finiten::harness
