#pragma once

#include "mgdwr/adaptivity.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mgdwr {

/// Column names: level, dofs, <name>_value, <name>_rel_error per functional,
/// J_E_error, eta_h, eta_primal, eta_adjoint, I_eff, I_effp, I_effa,
/// newton_steps, wall_ms.
[[nodiscard]] std::vector<std::string> csv_header(const std::vector<std::string>& functional_names);
void write_csv(std::ostream& out, const RunResult& result);
void write_csv(const std::string& path, const RunResult& result);

/// Whitespace table with a '#' header line, one row per level.
void write_gnuplot(std::ostream& out, const RunResult& result);
void write_gnuplot(const std::string& path, const RunResult& result);

/// Legacy VTK unstructured grid: u_h and z_h components as point data
/// (corners duplicated per cell), eta_K and the refinement level as cell
/// data.
void write_vtk(const std::string& path, const DiscreteFunction& u_h, const DiscreteFunction& z_h,
               const Vector& cellwise);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] int column(const std::string& name) const;  // -1 if absent
    [[nodiscard]] std::vector<double> values(const std::string& name) const;
};

/// Throws MalformedCsv.
[[nodiscard]] CsvTable parse_csv(const std::string& text);
[[nodiscard]] CsvTable read_csv(const std::string& path);

/// Least-squares slope of log(error) against log(dofs) over the last
/// `last` points (all if fewer). Non-positive or non-finite errors are
/// dropped. Empty when fewer than 2 usable points remain.
[[nodiscard]] std::optional<double> fit_slope(const std::vector<double>& dofs, const std::vector<double>& errors,
                                              std::size_t last = 4);

/// Per-functional convergence rates and a side-by-side table of the runs.
void write_report(std::ostream& out, const std::vector<std::string>& labels, const std::vector<CsvTable>& tables);

}  // namespace mgdwr
