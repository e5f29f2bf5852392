#include "mgdwr/io.hpp"

#include "mgdwr/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mgdwr {

namespace {

std::string num(double v)
{
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15e", v);
    return buf;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream f(path);
    if (!f) throw Error("cannot write '" + path + "'");
    return f;
}

std::vector<std::string> row_fields(const ConvergenceRecord& r)
{
    std::vector<std::string> f{std::to_string(r.level), std::to_string(r.dofs)};
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        f.push_back(num(r.values[i]));
        f.push_back(num(r.rel_errors[i]));
    }
    for (double v : {r.j_e_error, r.eta_h, r.eta_primal, r.eta_adjoint, r.i_eff, r.i_effp, r.i_effa})
        f.push_back(num(v));
    f.push_back(std::to_string(r.newton_steps));
    f.push_back(num(r.wall_ms));
    return f;
}

}  // namespace

std::vector<std::string> csv_header(const std::vector<std::string>& names)
{
    std::vector<std::string> h{"level", "dofs"};
    for (const auto& n : names) {
        h.push_back(n + "_value");
        h.push_back(n + "_rel_error");
    }
    for (const char* c : {"J_E_error", "eta_h", "eta_primal", "eta_adjoint", "I_eff", "I_effp", "I_effa",
                          "newton_steps", "wall_ms"})
        h.emplace_back(c);
    return h;
}

void write_csv(std::ostream& out, const RunResult& result)
{
    const auto h = csv_header(result.functional_names);
    for (std::size_t i = 0; i < h.size(); ++i) out << (i ? "," : "") << h[i];
    out << "\n";
    for (const auto& r : result.records) {
        const auto f = row_fields(r);
        for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << f[i];
        out << "\n";
    }
}

void write_csv(const std::string& path, const RunResult& result)
{
    auto f = open_out(path);
    write_csv(f, result);
}

void write_gnuplot(std::ostream& out, const RunResult& result)
{
    const auto h = csv_header(result.functional_names);
    out << "#";
    for (const auto& c : h) out << " " << c;
    out << "\n";
    for (const auto& r : result.records) {
        const auto f = row_fields(r);
        for (std::size_t i = 0; i < f.size(); ++i) out << (i ? " " : "") << f[i];
        out << "\n";
    }
}

void write_gnuplot(const std::string& path, const RunResult& result)
{
    auto f = open_out(path);
    write_gnuplot(f, result);
}

void write_vtk(const std::string& path, const DiscreteFunction& u_h, const DiscreteFunction& z_h,
               const Vector& cellwise)
{
    const Mesh& m = u_h.space().mesh();
    const auto cells = m.active_cells();
    const std::size_t nc = cells.size();
    const std::array<Point, 4> corners{Point{0, 0}, Point{1, 0}, Point{1, 1}, Point{0, 1}};
    auto f = open_out(path);
    f << std::setprecision(12);
    f << "# vtk DataFile Version 3.0\nmgdwr level output\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    f << "POINTS " << 4 * nc << " double\n";
    for (CellId c : cells)
        for (const Point& r : corners) {
            const Point x = m.map(c, r);
            f << x.x << " " << x.y << " 0\n";
        }
    f << "CELLS " << nc << " " << 5 * nc << "\n";
    for (std::size_t i = 0; i < nc; ++i)
        f << "4 " << 4 * i << " " << 4 * i + 1 << " " << 4 * i + 2 << " " << 4 * i + 3 << "\n";
    f << "CELL_TYPES " << nc << "\n";
    for (std::size_t i = 0; i < nc; ++i) f << "9\n";
    f << "CELL_DATA " << nc << "\nSCALARS eta_K double 1\nLOOKUP_TABLE default\n";
    for (CellId c : cells) f << cellwise[m.active_index(c)] << "\n";
    f << "SCALARS level int 1\nLOOKUP_TABLE default\n";
    for (CellId c : cells) f << m.cell(c).level << "\n";
    f << "POINT_DATA " << 4 * nc << "\n";
    for (const auto* fn : {&u_h, &z_h}) {
        for (int comp = 0; comp < fn->space().n_components(); ++comp) {
            f << "SCALARS " << (fn == &u_h ? "u" : "z") << comp + 1 << " double 1\nLOOKUP_TABLE default\n";
            for (CellId c : cells)
                for (const Point& r : corners) f << fn->value(c, r, comp) << "\n";
        }
    }
}

int CsvTable::column(const std::string& name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<double> CsvTable::values(const std::string& name) const
{
    const int c = column(name);
    if (c < 0) throw MalformedCsv("missing column '" + name + "'");
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(c)]);
    return out;
}

CsvTable parse_csv(const std::string& text)
{
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> out;
        std::stringstream ss(l);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(item);
        if (!l.empty() && l.back() == ',') out.emplace_back();
        return out;
    };
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line);
        if (t.header.empty()) {
            t.header = std::move(fields);
            if (t.column("level") < 0 || t.column("dofs") < 0)
                throw MalformedCsv("header lacks the level and dofs columns");
            continue;
        }
        if (fields.size() != t.header.size())
            throw MalformedCsv("line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                               " fields, found " + std::to_string(fields.size()));
        std::vector<double> row;
        for (const auto& f : fields) {
            if (f == "nan") {
                row.push_back(std::nan(""));
                continue;
            }
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(f, &pos));
                if (pos != f.size()) throw std::invalid_argument(f);
            } catch (const std::exception&) {
                throw MalformedCsv("line " + std::to_string(lineno) + ": '" + f + "' is not a number");
            }
        }
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw MalformedCsv("empty file");
    return t;
}

CsvTable read_csv(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw MalformedCsv("cannot read '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_csv(ss.str());
}

std::optional<double> fit_slope(const std::vector<double>& dofs, const std::vector<double>& errors, std::size_t last)
{
    std::vector<double> x, y;
    for (std::size_t i = 0; i < dofs.size() && i < errors.size(); ++i)
        if (dofs[i] > 0.0 && errors[i] > 0.0 && std::isfinite(errors[i])) {
            x.push_back(std::log(dofs[i]));
            y.push_back(std::log(errors[i]));
        }
    if (x.size() > last) {
        x.erase(x.begin(), x.end() - static_cast<std::ptrdiff_t>(last));
        y.erase(y.begin(), y.end() - static_cast<std::ptrdiff_t>(last));
    }
    if (x.size() < 2) return std::nullopt;
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (den <= 0.0) return std::nullopt;
    return (n * sxy - sx * sy) / den;
}

void write_report(std::ostream& out, const std::vector<std::string>& labels, const std::vector<CsvTable>& tables)
{
    const std::string suffix = "_rel_error";
    out << "Convergence rates (slope of log error vs log DOFs, last 4 levels)\n";
    for (std::size_t t = 0; t < tables.size(); ++t) {
        const CsvTable& tab = tables[t];
        out << "  " << labels[t] << ":\n";
        const auto dofs = tab.values("dofs");
        std::vector<std::string> cols;
        for (const auto& h : tab.header)
            if (h.size() > suffix.size() && h.compare(h.size() - suffix.size(), suffix.size(), suffix) == 0)
                cols.push_back(h);
        cols.emplace_back("J_E_error");
        cols.emplace_back("eta_h");
        for (const auto& c : cols) {
            if (tab.column(c) < 0) continue;
            const bool enough = tab.rows.size() >= 4;
            const auto s = enough ? fit_slope(dofs, tab.values(c)) : std::nullopt;
            out << "    " << std::left << std::setw(20) << c << " ";
            if (s)
                out << std::fixed << std::setprecision(3) << *s << std::defaultfloat << "\n";
            else
                out << "N/A\n";
        }
    }
    out << "\nLevels\n";
    std::size_t rows = 0;
    for (const auto& t : tables) rows = std::max(rows, t.rows.size());
    auto cell = [](const CsvTable& t, std::size_t r, const std::string& name) {
        const int c = t.column(name);
        return c < 0 ? std::nan("") : t.rows[r][static_cast<std::size_t>(c)];
    };
    out << std::setw(6) << "level";
    for (const auto& l : labels) out << " | " << std::setw(24) << (l + " dofs") << " " << std::setw(12) << "J_E_error";
    out << "\n";
    for (std::size_t r = 0; r < rows; ++r) {
        out << std::setw(6) << r + 1;
        for (const auto& t : tables) {
            if (r < t.rows.size())
                out << " | " << std::setw(24) << static_cast<long>(cell(t, r, "dofs")) << " " << std::setw(12)
                    << std::scientific << std::setprecision(4) << cell(t, r, "J_E_error") << std::defaultfloat;
            else
                out << " | " << std::setw(24) << "" << " " << std::setw(12) << "";
        }
        out << "\n";
    }
}

}  // namespace mgdwr
