#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gridloc/sweeps.hpp"

namespace gridloc {

/// Cell table columns, one row per AccuracyCell in report order.
inline constexpr const char* kCellHeader =
    "sweep,variant,fault_type,observability,train_fraction,snr_db,seed,accuracy,samples,status";

/// Shortest round-tripping text for a double; "inf" for +infinity.
std::string format_number(double value);
double parse_number(const std::string& text);

void write_cells_csv(std::ostream& out, const EvalReport& report);
EvalReport read_cells_csv(std::istream& in);
EvalReport load_cells_csv(const std::filesystem::path& path);

/// Value of the swept axis for `cell` under `kind`.
double axis_value(SweepKind kind, const AccuracyCell& cell);
/// Distinct axis values in first-seen order.
std::vector<double> axis_values(const EvalReport& report);

/// Seed-averaged accuracy, two decimals. Rows are (fault_type, variant),
/// columns the swept axis values; failed-only cells print "failed".
void write_pivot_csv(std::ostream& out, const EvalReport& report);

/// Machine-readable summary: per-variant means along the axis, epsilon
/// choices, significance test, degradation.
std::string summary_json(const EvalReport& report);

/// Writes <dir>/cells.csv, <dir>/table.csv and <dir>/summary.json.
void save_report(const std::filesystem::path& dir, const EvalReport& report);

}  // namespace gridloc
