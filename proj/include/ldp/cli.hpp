#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ldp/kernel.hpp"

namespace ldp {

// Kernel file: {"family": ..., "dimension": N, "params": {...}, "rho0": r}.
// Parameters are numbers or arrays of numbers; unknown keys are rejected.
KernelSpec parse_kernel_spec(const std::string& json_text);
KernelSpec load_kernel_spec(const std::string& path);

// Inclusive "a:b:step", a comma list, or a single number.
std::vector<double> parse_values(const std::string& text);

// 10 significant digits, with ".0" appended to integral values.
std::string format_number(double v);

enum class PlotKind {
  RateComparison,  // sweep table: empirical against predicted exponents
  ProfileOverlay   // profile table: one curve per R
};

// gnuplot script for the CSV at `table`, which it references by file name.
// Throws MissingColumns when required columns are absent and
// InsufficientData when the table has no rows.
std::string emit_plot_script(const std::string& table, PlotKind kind);

// Entry point of the `ldp` tool. Exit codes: 0 success, 2 validation error,
// 3 numerical failure; errors go to `err` as one JSON object.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ldp
