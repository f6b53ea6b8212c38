#include "finiten/report_io.hpp"

#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace finiten::io {

using nlohmann::ordered_json;

std::string format_g6(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string format_modes(std::span<const int> modes) {
  std::string out;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (i > 0) out += ';';
    out += std::to_string(modes[i]);
  }
  return out;
}

std::string power_csv_line(const harness::PowerRow& row) {
  std::ostringstream os;
  os << format_g6(row.N) << ',' << row.n << ',' << row.m << ',' << format_modes(row.modes) << ','
     << to_string(row.cutoff_source) << ',' << harness::to_string(row.hypothesis) << ','
     << format_g6(row.rejection_rate) << ',' << row.reps << ',' << row.seed;
  return os.str();
}

std::string calibration_csv_line(const harness::CalibrationEntry& entry) {
  std::ostringstream os;
  os << format_g6(entry.N) << ',' << entry.n << ',' << entry.m << ',' << format_g6(entry.level)
     << ',' << format_g6(entry.cutoff) << ',' << entry.reps << ',' << entry.seed;
  return os.str();
}

std::string completeness_line(bool complete) {
  return std::string("# complete=") + (complete ? "true" : "false");
}

void write_power_csv(std::ostream& os, std::span<const harness::PowerRow> rows, bool complete) {
  os << kPowerHeader << '\n';
  for (const auto& row : rows) os << power_csv_line(row) << '\n';
  os << completeness_line(complete) << '\n';
}

void write_calibration_csv(std::ostream& os, std::span<const harness::CalibrationEntry> entries) {
  os << kCalibrationHeader << '\n';
  for (const auto& entry : entries) os << calibration_csv_line(entry) << '\n';
}

namespace {

ordered_json row_json(const harness::PowerRow& row) {
  ordered_json j;
  j["N"] = row.N;
  j["n"] = row.n;
  j["m"] = row.m;
  j["modes"] = row.modes;
  j["cutoff_source"] = to_string(row.cutoff_source);
  j["hypothesis"] = harness::to_string(row.hypothesis);
  j["rejection_rate"] = row.rejection_rate;
  j["reps"] = row.reps;
  j["seed"] = row.seed;
  return j;
}

ordered_json entry_json(const harness::CalibrationEntry& entry) {
  ordered_json j;
  j["N"] = entry.N;
  j["n"] = entry.n;
  j["m"] = entry.m;
  j["level"] = entry.level;
  j["cutoff"] = entry.cutoff;
  j["reps"] = entry.reps;
  j["seed"] = entry.seed;
  return j;
}

}  // namespace

std::string power_json(std::span<const harness::PowerRow> rows,
                       std::span<const harness::CalibrationEntry> calibration, bool complete) {
  ordered_json j;
  j["complete"] = complete;
  j["calibration"] = ordered_json::array();
  for (const auto& entry : calibration) j["calibration"].push_back(entry_json(entry));
  j["rows"] = ordered_json::array();
  for (const auto& row : rows) j["rows"].push_back(row_json(row));
  return j.dump();
}

std::string calibration_json(std::span<const harness::CalibrationEntry> entries) {
  ordered_json j = ordered_json::array();
  for (const auto& entry : entries) j.push_back(entry_json(entry));
  return j.dump();
}

void write_sanov_csv(std::ostream& os, const harness::SanovTable& table) {
  os << "N,n,kl,power\n";
  for (std::size_t i = 0; i < table.N_values.size(); ++i) {
    for (std::size_t j = 0; j < table.n_values.size(); ++j) {
      os << format_g6(table.N_values[i]) << ',' << table.n_values[j] << ','
         << format_g6(table.kl[i]) << ',' << format_g6(table.power[i][j]) << '\n';
    }
  }
}

std::string sanov_json(const harness::SanovTable& table) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < table.N_values.size(); ++i) {
    for (std::size_t j = 0; j < table.n_values.size(); ++j) {
      rows.push_back({{"N", table.N_values[i]},
                      {"n", table.n_values[j]},
                      {"kl", table.kl[i]},
                      {"power", table.power[i][j]}});
    }
  }
  return rows.dump();
}

void write_compare_csv(std::ostream& os, std::span<const harness::CompareRow> rows) {
  os << "N,n,test,cutoff,calibrated_power,calib_reps,reps,seed\n";
  for (const auto& row : rows) {
    os << format_g6(row.N) << ',' << row.n << ',' << row.test << ',' << format_g6(row.cutoff)
       << ',' << format_g6(row.calibrated_power) << ',' << row.calib_reps << ',' << row.reps
       << ',' << row.seed << '\n';
  }
}

std::string compare_json(std::span<const harness::CompareRow> rows) {
  ordered_json out = ordered_json::array();
  for (const auto& row : rows) {
    out.push_back({{"N", row.N},
                   {"n", row.n},
                   {"test", row.test},
                   {"cutoff", row.cutoff},
                   {"calibrated_power", row.calibrated_power},
                   {"calib_reps", row.calib_reps},
                   {"reps", row.reps},
                   {"seed", row.seed}});
  }
  return out.dump();
}

std::string report_csv_header() { return "statistic,dof,cutoff,p_value,reject,coefficients"; }

std::string report_csv_line(const TestReport& report) {
  std::ostringstream os;
  os << format_g6(report.statistic) << ',' << report.dof << ',' << format_g6(report.cutoff) << ','
     << format_g6(report.p_value) << ',' << (report.reject ? "true" : "false") << ',';
  bool first = true;
  for (const auto& [k, mu] : report.coefficients) {
    if (!first) os << ';';
    first = false;
    os << k << ':' << format_g6(mu);
  }
  return os.str();
}

}  // namespace finiten::io
