/// @file io.hpp
/// @brief Locale-independent text formats: diagnostics CSV and field snapshots.
///
/// Snapshot format: a header line "dim nx [ny] lx [ly]" followed by the
/// row-major cell values, one per line.  All reals are written in shortest
/// round-trip decimal form.

#pragma once

#include "chemo/diagnostics.hpp"
#include "chemo/grid.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chemo {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);
std::string format_optional(const std::optional<double>& x);
double parse_double(const std::string& text);

inline constexpr const char* kDiagnosticsHeader =
    "t,mass,u_sup,v_sup,grad_v_l2sq,y_p,lyapunov_F,entropy_E,u_dist_l2,v_lp,cum_dissipation";

std::string diagnostics_row(const DiagnosticsRecord& r);
void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& records);
void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records);

void write_snapshot(std::ostream& os, const Field& f);
void write_snapshot(const std::filesystem::path& path, const Field& f);
Field read_snapshot(std::istream& is);
Field read_snapshot(const std::filesystem::path& path);

} // namespace chemo
