#include "finiten/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "finiten/error.hpp"
#include "finiten/finiten_dist.hpp"
#include "finiten/harness.hpp"
#include "finiten/jacobi_stein.hpp"
#include "finiten/report_io.hpp"
#include "finiten/specfun.hpp"
#include "finiten/stein_test.hpp"
#include "json.hpp"

namespace finiten::cli {
namespace {

// Input/usage problem detected after argument parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string output = "-";
  std::string format = "csv";
  unsigned workers = 0;
  std::optional<std::uint64_t> seed;

  // sample / density / quantile / test / sigma-table / compare
  double N = 5.0;
  int n = 0;
  int m = 4;
  std::string hypothesis = "h0";
  std::vector<double> xs;
  std::vector<double> ps;
  std::string modes = "even";
  double level = 0.05;
  std::string cutoff = "theoretical";
  int reps = 5000;
  int calib_reps = 5000;
  std::string input = "-";
  bool fail_on_reject = false;
  bool known_scale = false;

  // calibrate / grid / sanov / boundary / compare
  std::vector<double> N_list;
  std::vector<int> n_list;
  std::vector<int> m_list;
  int eval_reps = 2000;
  bool paper_scale = false;
  bool grid_standardize = false;
  std::optional<double> max_seconds;
  double target_power = 0.8;

  // Subcommands whose defaults differ from the shared ones.
  int sigma_m = 10;
  double compare_N = 20.0;
  int compare_reps = 2000;
};

std::uint64_t resolve_seed(const Options& opt, std::ostream& err) {
  if (opt.seed) return *opt.seed;
  std::random_device device;
  const std::uint64_t seed = (static_cast<std::uint64_t>(device()) << 32) | device();
  err << "seed=" << seed << '\n';
  return seed;
}

bool json_format(const Options& opt) { return opt.format == "json"; }

std::vector<int> parse_modes(const std::string& text, int m) {
  if (text == "even") return SteinTestConfig::even_modes(m);
  std::vector<int> modes;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    int k = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), k);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw UsageError("invalid mode '" + token + "'");
    }
    modes.push_back(k);
  }
  return modes;
}

// Whitespace/newline separated decimals; any malformed token fails the whole read.
Sample read_sample(std::istream& in) {
  Sample values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::string token;
    while (tokens >> token) {
      double x = 0.0;
      const char* first = token.data();
      if (*first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), x);
      if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(x)) {
        throw UsageError("line " + std::to_string(line_no) + ": malformed number '" + token + "'");
      }
      values.push_back(x);
    }
  }
  return values;
}

void emit_sample(const Sample& values, std::ostream& os) {
  char buf[40];
  for (double x : values) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf << '\n';
  }
}

void cmd_sample(const Options& opt, std::ostream& os, std::ostream& err) {
  if (opt.n < 1) throw UsageError("--n must be >= 1");
  const std::uint64_t seed = resolve_seed(opt, err);
  if (opt.hypothesis == "h0") {
    emit_sample(sample(FiniteNLaw(opt.N), static_cast<std::size_t>(opt.n), seed), os);
  } else {
    FiniteNLaw law(opt.N);  // validates N for both hypotheses
    (void)law;
    emit_sample(sample_gaussian_alternative(static_cast<std::size_t>(opt.n), seed), os);
  }
}

void cmd_density(const Options& opt, std::ostream& os) {
  const FiniteNLaw law(opt.N);
  if (json_format(opt)) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (double x : opt.xs) {
      const double ld = log_density(law, x);
      rows.push_back({{"x", x},
                      {"log_density", std::isinf(ld) ? nlohmann::ordered_json(nullptr)
                                                     : nlohmann::ordered_json(ld)},
                      {"density", std::exp(ld)},
                      {"cdf", cdf(law, x)}});
    }
    os << rows.dump() << '\n';
    return;
  }
  os << "x,log_density,density,cdf\n";
  for (double x : opt.xs) {
    const double ld = log_density(law, x);
    os << io::format_g6(x) << ',' << (std::isinf(ld) ? std::string("-inf") : io::format_g6(ld))
       << ',' << io::format_g6(std::exp(ld)) << ',' << io::format_g6(cdf(law, x)) << '\n';
  }
}

void cmd_quantile(const Options& opt, std::ostream& os) {
  const FiniteNLaw law(opt.N);
  if (json_format(opt)) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (double p : opt.ps) rows.push_back({{"p", p}, {"quantile", quantile(law, p)}});
    os << rows.dump() << '\n';
    return;
  }
  os << "p,quantile\n";
  for (double p : opt.ps) os << io::format_g6(p) << ',' << io::format_g6(quantile(law, p)) << '\n';
}

bool cmd_test(const Options& opt, std::istream& in, std::ostream& os, std::ostream& err) {
  Sample data;
  if (opt.input == "-") {
    data = read_sample(in);
  } else {
    std::ifstream file(opt.input);
    if (!file) throw UsageError("cannot open input '" + opt.input + "'");
    data = read_sample(file);
  }
  if (data.size() < 2) throw UsageError("input must contain at least two values");

  SteinTestConfig config;
  config.N = opt.N;
  config.m = opt.m;
  config.modes = parse_modes(opt.modes, opt.m);
  config.level = opt.level;
  config.standardize = !opt.known_scale;
  if (opt.cutoff == "theoretical") {
    config.cutoff = Cutoff::theoretical();
  } else if (opt.cutoff == "calibrated") {
    config.validate();
    const std::uint64_t seed = resolve_seed(opt, err);
    config.cutoff = Cutoff::calibrated(harness::calibrate(
        config, static_cast<int>(data.size()), opt.reps, seed, {opt.workers}));
  } else {
    double value = 0.0;
    const auto [ptr, ec] =
        std::from_chars(opt.cutoff.data(), opt.cutoff.data() + opt.cutoff.size(), value);
    if (ec != std::errc() || ptr != opt.cutoff.data() + opt.cutoff.size()) {
      throw UsageError("--cutoff must be theoretical, calibrated or a number");
    }
    config.cutoff = Cutoff::calibrated(value);
  }

  const SteinTest test(config);
  const TestReport report = test.run(data);
  if (json_format(opt)) {
    os << to_json(report) << '\n';
  } else {
    os << io::report_csv_header() << '\n' << io::report_csv_line(report) << '\n';
  }
  return report.reject;
}

void cmd_sigma_table(const Options& opt, std::ostream& os) {
  const FiniteNLaw law(opt.N);
  const JacobiBasis basis = JacobiBasis::for_law(law, opt.sigma_m);
  if (json_format(opt)) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int k = 1; k <= opt.sigma_m; ++k) rows.push_back({{"k", k}, {"sigma", basis.sigma(k)}});
    os << rows.dump() << '\n';
    return;
  }
  os << "k,sigma\n";
  char buf[40];
  for (int k = 1; k <= opt.sigma_m; ++k) {
    std::snprintf(buf, sizeof buf, "%.10f", basis.sigma(k));
    os << k << ',' << buf << '\n';
  }
}

void cmd_calibrate(const Options& opt, std::ostream& os, std::ostream& err) {
  if (opt.N_list.empty() || opt.n_list.empty()) throw UsageError("--N and --n are required");
  const std::uint64_t seed = resolve_seed(opt, err);
  const std::vector<int> ms = opt.m_list.empty() ? std::vector<int>{4} : opt.m_list;
  std::vector<harness::CalibrationEntry> entries;
  for (double N : opt.N_list) {
    for (int n : opt.n_list) {
      for (int m : ms) {
        SteinTestConfig config = SteinTestConfig::defaults(N, m);
        config.level = opt.level;
        config.standardize = !opt.known_scale;
        const double cutoff = harness::calibrate(config, n, opt.reps, seed, {opt.workers});
        entries.push_back({N, n, m, config.modes, opt.level, cutoff, opt.reps, seed});
      }
    }
  }
  if (json_format(opt)) {
    os << io::calibration_json(entries) << '\n';
  } else {
    io::write_calibration_csv(os, entries);
  }
}

void cmd_grid(const Options& opt, std::ostream& os, std::ostream& err) {
  const std::uint64_t seed = resolve_seed(opt, err);
  harness::GridSpec spec = opt.paper_scale ? harness::GridSpec::paper_scale(seed)
                                           : harness::GridSpec::paper_grid(seed);
  if (!opt.paper_scale) {
    spec.calib_reps = opt.calib_reps;
    spec.eval_reps = opt.eval_reps;
  }
  if (!opt.N_list.empty()) spec.N_values = opt.N_list;
  if (!opt.n_list.empty()) spec.n_values = opt.n_list;
  if (!opt.m_list.empty()) spec.m_values = opt.m_list;
  spec.level = opt.level;
  spec.standardize = opt.grid_standardize;

  harness::GridOptions options;
  options.run.workers = opt.workers;
  options.max_seconds = opt.max_seconds;
  const bool csv = !json_format(opt);
  if (csv) {
    // Rows go out as each cell completes.
    os << io::kPowerHeader << '\n';
    options.on_row = [&os](const harness::PowerRow& row) {
      os << io::power_csv_line(row) << '\n' << std::flush;
    };
  }
  options.on_calibration = [&err](const harness::CalibrationEntry& e) {
    err << "calibrated N=" << io::format_g6(e.N) << " n=" << e.n << " m=" << e.m
        << " cutoff=" << io::format_g6(e.cutoff) << '\n';
  };
  const harness::GridResult result = harness::run_grid(spec, options);
  if (csv) {
    os << io::completeness_line(result.complete) << '\n';
  } else {
    os << io::power_json(result.rows, result.calibration, result.complete) << '\n';
  }
}

void cmd_sanov(const Options& opt, std::ostream& os) {
  const std::vector<double> Ns =
      opt.N_list.empty() ? std::vector<double>{4, 5, 6, 8, 10, 15, 20} : opt.N_list;
  const std::vector<int> ns = opt.n_list.empty()
                                  ? std::vector<int>{10, 50, 100, 200, 400, 600, 800, 1000, 2000}
                                  : opt.n_list;
  const auto table = harness::sanov_table(Ns, ns);
  if (json_format(opt)) {
    os << io::sanov_json(table) << '\n';
  } else {
    io::write_sanov_csv(os, table);
  }
}

void cmd_boundary(const Options& opt, std::ostream& os) {
  std::vector<double> Ns = opt.N_list;
  if (Ns.empty()) {
    for (int N = 5; N <= 20; ++N) Ns.push_back(N);
  }
  const auto points = harness::power_boundary(Ns, opt.target_power);
  if (json_format(opt)) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& p : points) rows.push_back({{"N", p.N}, {"kl", p.kl}, {"n_star", p.n_star}});
    os << rows.dump() << '\n';
    return;
  }
  os << "N,kl,n_star\n";
  for (const auto& p : points) {
    os << io::format_g6(p.N) << ',' << io::format_g6(p.kl) << ',' << p.n_star << '\n';
  }
}

void cmd_compare(const Options& opt, std::ostream& os, std::ostream& err) {
  const std::uint64_t seed = resolve_seed(opt, err);
  const std::vector<int> ns =
      opt.n_list.empty() ? std::vector<int>{100, 200, 500, 1000, 2000} : opt.n_list;
  const auto rows = harness::compare_edf(opt.compare_N, ns, opt.m, opt.calib_reps,
                                         opt.compare_reps, seed, {opt.workers});
  if (json_format(opt)) {
    os << io::compare_json(rows) << '\n';
  } else {
    io::write_compare_csv(os, rows);
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-N velocity law: sampling, Stein/Jacobi goodness-of-fit test, Monte Carlo "
               "harness",
               "finiten"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--output,-o", opt.output, "Output path ('-' for stdout)");
    sub->add_option("--format", opt.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
  };
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", opt.seed, "Master seed (drawn from entropy when omitted)");
    sub->add_option("--workers", opt.workers, "Worker threads (0 = all cores)");
  };

  auto* sample_cmd = app.add_subcommand("sample", "Draw one value per line");
  sample_cmd->add_option("--N", opt.N, "Particle number (> 3)")->required();
  sample_cmd->add_option("--n", opt.n, "Sample size")->required();
  sample_cmd->add_option("--hypothesis", opt.hypothesis, "h0 (finite-N law) or h1 (Gaussian)")
      ->check(CLI::IsMember({"h0", "h1"}));
  sample_cmd->add_option("--output,-o", opt.output, "Output path ('-' for stdout)");
  add_seed(sample_cmd);

  auto* density_cmd = app.add_subcommand("density", "Log-density, density and CDF at points");
  density_cmd->add_option("--N", opt.N)->required();
  density_cmd->add_option("--x", opt.xs, "Comma-separated points")->delimiter(',')->required();
  add_common(density_cmd);

  auto* quantile_cmd = app.add_subcommand("quantile", "Quantiles of the finite-N law");
  quantile_cmd->add_option("--N", opt.N)->required();
  quantile_cmd->add_option("--p", opt.ps, "Comma-separated probabilities")
      ->delimiter(',')
      ->required();
  add_common(quantile_cmd);

  auto* test_cmd = app.add_subcommand("test", "Stein/Jacobi goodness-of-fit test of one sample");
  test_cmd->add_option("--input,-i", opt.input, "Input path ('-' for stdin)");
  test_cmd->add_option("--N", opt.N)->required();
  test_cmd->add_option("--m", opt.m, "Truncation order");
  test_cmd->add_option("--modes", opt.modes, "'even' or comma-separated mode list");
  test_cmd->add_option("--level", opt.level, "Significance level");
  test_cmd->add_option("--cutoff", opt.cutoff, "theoretical, calibrated, or a numeric value");
  test_cmd->add_option("--reps", opt.reps, "Calibration replications");
  test_cmd->add_flag("--fail-on-reject", opt.fail_on_reject, "Exit 1 when H0 is rejected");
  test_cmd->add_flag("--known-scale", opt.known_scale,
                     "Skip standardization (data already zero mean, unit variance)");
  add_common(test_cmd);
  add_seed(test_cmd);

  auto* sigma_cmd = app.add_subcommand("sigma-table", "Normalizers sigma_k of the Stein basis");
  sigma_cmd->add_option("--N", opt.N)->required();
  sigma_cmd->add_option("--m", opt.sigma_m, "Highest order");
  add_common(sigma_cmd);

  auto* calibrate_cmd = app.add_subcommand("calibrate", "Monte Carlo critical values under H0");
  calibrate_cmd->add_option("--N", opt.N_list)->delimiter(',')->required();
  calibrate_cmd->add_option("--n", opt.n_list)->delimiter(',')->required();
  calibrate_cmd->add_option("--m", opt.m_list)->delimiter(',');
  calibrate_cmd->add_option("--level", opt.level);
  calibrate_cmd->add_option("--reps", opt.reps, "H0 replications");
  calibrate_cmd->add_flag("--known-scale", opt.known_scale, "Calibrate without standardization");
  add_common(calibrate_cmd);
  add_seed(calibrate_cmd);

  auto* grid_cmd = app.add_subcommand("grid", "Size and power over an (N, n, m) grid");
  grid_cmd->add_option("--N", opt.N_list)->delimiter(',');
  grid_cmd->add_option("--n", opt.n_list)->delimiter(',');
  grid_cmd->add_option("--m", opt.m_list)->delimiter(',');
  grid_cmd->add_option("--level", opt.level);
  grid_cmd->add_option("--calib-reps", opt.calib_reps);
  grid_cmd->add_option("--eval-reps", opt.eval_reps);
  grid_cmd->add_flag("--paper-scale", opt.paper_scale, "50,000 / 20,000 replications");
  grid_cmd->add_flag("--standardize", opt.grid_standardize,
                     "Standardize every replication (default: known scale)");
  grid_cmd->add_option("--max-seconds", opt.max_seconds, "Wall-clock budget; stops between cells");
  add_common(grid_cmd);
  add_seed(grid_cmd);

  auto* sanov_cmd = app.add_subcommand("sanov", "Exponent-only power proxy 1 - exp(-n KL)");
  sanov_cmd->add_option("--N", opt.N_list)->delimiter(',');
  sanov_cmd->add_option("--n", opt.n_list)->delimiter(',');
  add_common(sanov_cmd);

  auto* boundary_cmd = app.add_subcommand("boundary", "Smallest n reaching a target proxy power");
  boundary_cmd->add_option("--N", opt.N_list)->delimiter(',');
  boundary_cmd->add_option("--power", opt.target_power, "Target power in (0, 1)");
  add_common(boundary_cmd);

  auto* compare_cmd = app.add_subcommand("compare", "Calibrated power of Stein vs KS/CvM/AD");
  compare_cmd->add_option("--N", opt.compare_N);
  compare_cmd->add_option("--n", opt.n_list)->delimiter(',');
  compare_cmd->add_option("--m", opt.m);
  compare_cmd->add_option("--calib-reps", opt.calib_reps);
  compare_cmd->add_option("--reps", opt.compare_reps);
  add_common(compare_cmd);
  add_seed(compare_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::ostringstream buffer;
  bool rejected = false;
  try {
    if (*sample_cmd) {
      cmd_sample(opt, buffer, err);
    } else if (*density_cmd) {
      cmd_density(opt, buffer);
    } else if (*quantile_cmd) {
      cmd_quantile(opt, buffer);
    } else if (*test_cmd) {
      rejected = cmd_test(opt, in, buffer, err);
    } else if (*sigma_cmd) {
      cmd_sigma_table(opt, buffer);
    } else if (*calibrate_cmd) {
      cmd_calibrate(opt, buffer, err);
    } else if (*sanov_cmd) {
      cmd_sanov(opt, buffer);
    } else if (*boundary_cmd) {
      cmd_boundary(opt, buffer);
    } else if (*compare_cmd) {
      cmd_compare(opt, buffer, err);
    } else if (*grid_cmd) {
      // Streams rows directly so long runs show partial progress.
      if (opt.output == "-") {
        cmd_grid(opt, out, err);
      } else {
        std::ofstream file(opt.output);
        if (!file) throw UsageError("cannot open output '" + opt.output + "'");
        cmd_grid(opt, file, err);
      }
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (opt.output == "-") {
    out << buffer.str();
  } else {
    std::ofstream file(opt.output);
    if (!file) {
      err << "error: cannot open output '" << opt.output << "'\n";
      return kExitUsage;
    }
    file << buffer.str();
  }
  return rejected && opt.fail_on_reject ? kExitRejected : kExitOk;
}

}  // namespace finiten::cli
