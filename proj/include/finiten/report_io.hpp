#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "finiten/harness.hpp"

namespace finiten::io {

// Six significant digits, shortest form ("%.6g").
std::string format_g6(double value);

// "4;6;8": semicolon-joined so the list stays inside one CSV field.
std::string format_modes(std::span<const int> modes);

inline constexpr const char* kPowerHeader =
    "N,n,m,modes,cutoff_source,hypothesis,rejection_rate,reps,seed";
inline constexpr const char* kCalibrationHeader = "N,n,m,level,cutoff,reps,seed";

std::string power_csv_line(const harness::PowerRow& row);
std::string calibration_csv_line(const harness::CalibrationEntry& entry);

// Trailer line marking whether a grid run finished every cell.
std::string completeness_line(bool complete);

void write_power_csv(std::ostream& os, std::span<const harness::PowerRow> rows, bool complete);
void write_calibration_csv(std::ostream& os, std::span<const harness::CalibrationEntry> entries);

std::string power_json(std::span<const harness::PowerRow> rows,
                       std::span<const harness::CalibrationEntry> calibration, bool complete);
std::string calibration_json(std::span<const harness::CalibrationEntry> entries);

void write_sanov_csv(std::ostream& os, const harness::SanovTable& table);
std::string sanov_json(const harness::SanovTable& table);

void write_compare_csv(std::ostream& os, std::span<const harness::CompareRow> rows);
std::string compare_json(std::span<const harness::CompareRow> rows);

std::string report_csv_header();
std::string report_csv_line(const TestReport& report);

}  // namespace finiten::io
