#include "mgdwr/config.hpp"

#include "mgdwr/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace mgdwr {

namespace {

struct CheeseData {
    double integral, box, corner_point, point, centre;
    double u_integral, u_box, u_corner, u_point, u_centre;
};

/// Goal values (J1..J4 of example1c) from the published fine-grid data.
void cheese_references(RunConfig& r, const CheeseData& d)
{
    const double j1 = (1.0 + d.corner_point) * (1.0 + d.corner_point);
    const double x = d.integral - 21.0 * d.centre;
    r.reference = ReferenceKind::Given;
    r.reference_values = {j1, x * x, d.box, d.point};
    r.reference_uncertainties = {2.0 * (1.0 + d.corner_point) * d.u_corner,
                                 2.0 * std::abs(x) * (d.u_integral + 21.0 * d.u_centre), d.u_box, d.u_point};
}

ExperimentConfig make(const std::string& name)
{
    ExperimentConfig c;
    RunConfig& r = c.run;
    r.name = name;
    c.out_dir = "out/" + name;
    if (name == "example1a_case1" || name == "example1a_case1_q4") {
        r.experiment = "example1a";
        r.p = 2.0;
        r.mesh = {MeshKind::UnitSquare, 4};
        r.degree = 3;
        r.enriched_degree = name == "example1a_case1" ? 6 : 4;
        r.max_levels = 6;
        r.reference = ReferenceKind::Given;
        r.reference_values = {0.03514425375};
        r.reference_uncertainties = {1e-10};
    } else if (name == "example1a_case2") {
        r.experiment = "example1a";
        r.p = 4.0;
        r.mesh = {MeshKind::UnitSquare, 2};
        r.max_levels = 9;
        r.reference = ReferenceKind::Uniform;
        r.reference_refinements = 7;
    } else if (name == "example1b_case1" || name == "example1b_case2") {
        r.experiment = "example1b";
        r.p = name == "example1b_case1" ? 5.0 : 1.5;
        if (r.p > 2) r.initial_guess = InitialGuess::PContinuation;
        r.epsilon = 0.5;
        r.rhs = RhsKind::Sine;
        r.mesh = {MeshKind::UnitSquare, 16, 0, 0.2, 1};
        r.max_levels = 14;
        r.max_dofs = 200000;
        r.reference = ReferenceKind::Given;
        r.reference_values = {std::sin(7.2)};
        r.reference_uncertainties = {0.0};
        c.compare_uniform = true;
    } else if (name == "example1c_case1") {
        r.experiment = "example1c";
        r.p = 4.0;
        r.epsilon = 1e-10;
        r.mesh = {MeshKind::Cheese, 1, 1};
        r.max_levels = 8;
        cheese_references(r, {4.1285036414, 0.31999986649, 0.16071095234, 0.35554352679, 0.49244705234, 4e-5, 1e-5,
                              1e-5, 2e-6, 4e-6});
    } else if (name == "example1c_case2") {
        r.experiment = "example1c";
        r.p = 1.33;
        r.epsilon = 1e-10;
        r.mesh = {MeshKind::Cheese, 1, 1};
        r.max_levels = 8;
        cheese_references(r, {0.48510099008, 0.038058285978, 0.034930138311, 0.024478640536, 0.039616834482, 4e-5,
                              4e-6, 4e-6, 2e-6, 4e-6});
    } else if (name == "example2") {
        r.experiment = "example2";
        r.problem = ProblemKind::Quasilinear;
        r.mesh = {MeshKind::Slit, 1, 2};
        r.max_levels = 30;
        r.max_dofs = 60000;
        r.reference = ReferenceKind::Exact;
        c.compare_uniform = true;
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return c;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string list(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
    return out;
}

double to_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (trim(v.substr(pos)).empty()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
}

long to_long(const std::string& key, const std::string& v)
{
    const double d = to_double(key, v);
    if (d != std::floor(d)) throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
    return static_cast<long>(d);
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(key, item));
    }
    return out;
}

template <typename E>
E to_enum(const std::string& key, const std::string& v, const std::map<std::string, E>& names)
{
    const auto it = names.find(v);
    if (it != names.end()) return it->second;
    std::string opts;
    for (const auto& [n, e] : names) opts += (opts.empty() ? "" : ", ") + n;
    throw ConfigError("'" + key + "' expects one of " + opts + ", got '" + v + "'");
}

template <typename E>
std::string enum_name(E e, const std::map<std::string, E>& names)
{
    for (const auto& [n, v] : names)
        if (v == e) return n;
    return "?";
}

const std::map<std::string, ProblemKind> kProblems{{"plaplace", ProblemKind::PLaplace},
                                                   {"quasilinear", ProblemKind::Quasilinear}};
const std::map<std::string, RhsKind> kRhs{{"one", RhsKind::One}, {"sine", RhsKind::Sine}};
const std::map<std::string, MeshKind> kMeshes{
    {"unit_square", MeshKind::UnitSquare}, {"cheese", MeshKind::Cheese}, {"slit", MeshKind::Slit}};
const std::map<std::string, ReferenceKind> kReferences{{"none", ReferenceKind::None},
                                                       {"given", ReferenceKind::Given},
                                                       {"exact", ReferenceKind::Exact},
                                                       {"uniform", ReferenceKind::Uniform}};
const std::map<std::string, EstimatorPart> kParts{
    {"full", EstimatorPart::Full}, {"primal", EstimatorPart::Primal}, {"adjoint", EstimatorPart::Adjoint}};
const std::map<std::string, InitialGuess> kGuesses{{"unit", InitialGuess::Unit},
                                                   {"p_continuation", InitialGuess::PContinuation}};
const std::map<std::string, NewtonStop> kStops{{"balanced", NewtonStop::Balanced},
                                               {"fixed", NewtonStop::FixedResidual}};

}  // namespace

std::vector<std::string> preset_names()
{
    return {"example1a_case1", "example1a_case1_q4", "example1a_case2", "example1b_case1", "example1b_case2",
            "example1c_case1", "example1c_case2",    "example2"};
}

ExperimentConfig preset(const std::string& name)
{
    return make(name);
}

ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig c;
    bool seeded = false;
    RunConfig& r = c.run;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string v = trim(line.substr(eq + 1));

        if (key == "run.preset") {
            if (seeded) throw ConfigError("run.preset must come first");
            c = preset(v);
        } else if (key == "run.name") {
            r.name = v;
        } else if (key == "run.experiment") {
            r.experiment = v;
        } else if (key == "run.uniform") {
            r.uniform = to_bool(key, v);
        } else if (key == "problem.kind") {
            r.problem = to_enum(key, v, kProblems);
        } else if (key == "problem.p") {
            r.p = to_double(key, v);
        } else if (key == "problem.epsilon") {
            r.epsilon = to_double(key, v);
        } else if (key == "problem.rhs") {
            r.rhs = to_enum(key, v, kRhs);
        } else if (key == "mesh.kind") {
            r.mesh.kind = to_enum(key, v, kMeshes);
        } else if (key == "mesh.n") {
            r.mesh.n = static_cast<int>(to_long(key, v));
        } else if (key == "mesh.refinements") {
            r.mesh.global_refinements = static_cast<int>(to_long(key, v));
        } else if (key == "mesh.distortion") {
            r.mesh.distortion = to_double(key, v);
        } else if (key == "mesh.seed") {
            r.mesh.seed = static_cast<std::uint64_t>(to_long(key, v));
        } else if (key == "discretization.degree") {
            r.degree = static_cast<int>(to_long(key, v));
        } else if (key == "discretization.enriched_degree") {
            r.enriched_degree = static_cast<int>(to_long(key, v));
        } else if (key == "discretization.n_quad") {
            r.n_quad = static_cast<int>(to_long(key, v));
        } else if (key == "adaptivity.tol_dis") {
            r.tol_dis = to_double(key, v);
        } else if (key == "adaptivity.max_levels") {
            r.max_levels = static_cast<int>(to_long(key, v));
        } else if (key == "adaptivity.max_dofs") {
            r.max_dofs = to_long(key, v);
        } else if (key == "adaptivity.omegas") {
            r.omegas = to_list(key, v);
        } else if (key == "adaptivity.marking") {
            r.marking = to_enum(key, v, kParts);
        } else if (key == "adaptivity.newton") {
            r.newton_stop = to_enum(key, v, kStops);
        } else if (key == "adaptivity.smooth_siblings") {
            r.smoothing.sibling_groups = to_bool(key, v);
        } else if (key == "adaptivity.smooth_islands") {
            r.smoothing.unrefined_islands = to_bool(key, v);
        } else if (key == "adaptivity.initial_guess") {
            r.initial_guess = to_enum(key, v, kGuesses);
        } else if (key == "adaptivity.compare_cold_start") {
            r.compare_cold_start = to_bool(key, v);
        } else if (key == "reference.kind") {
            r.reference = to_enum(key, v, kReferences);
        } else if (key == "reference.values") {
            r.reference_values = to_list(key, v);
        } else if (key == "reference.uncertainties") {
            r.reference_uncertainties = to_list(key, v);
        } else if (key == "reference.refinements") {
            r.reference_refinements = static_cast<int>(to_long(key, v));
        } else if (key == "output.dir") {
            c.out_dir = v;
        } else if (key == "output.vtk") {
            c.vtk = to_bool(key, v);
        } else if (key == "output.compare_uniform") {
            c.compare_uniform = to_bool(key, v);
        } else {
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        seeded = true;
    }
    r.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c)
{
    const RunConfig& r = c.run;
    auto b = [](bool v) { return std::string(v ? "true" : "false"); };
    std::ostringstream o;
    o << "[run]\n"
      << "name = " << r.name << "\n"
      << "experiment = " << r.experiment << "\n"
      << "uniform = " << b(r.uniform) << "\n\n"
      << "[problem]\n"
      << "kind = " << enum_name(r.problem, kProblems) << "\n"
      << "p = " << fmt(r.p) << "\n"
      << "epsilon = " << fmt(r.epsilon) << "\n"
      << "rhs = " << enum_name(r.rhs, kRhs) << "\n\n"
      << "[mesh]\n"
      << "kind = " << enum_name(r.mesh.kind, kMeshes) << "\n"
      << "n = " << r.mesh.n << "\n"
      << "refinements = " << r.mesh.global_refinements << "\n"
      << "distortion = " << fmt(r.mesh.distortion) << "\n"
      << "seed = " << r.mesh.seed << "\n\n"
      << "[discretization]\n"
      << "degree = " << r.degree << "\n"
      << "enriched_degree = " << r.enriched_degree << "\n"
      << "n_quad = " << r.n_quad << "\n\n"
      << "[adaptivity]\n"
      << "tol_dis = " << fmt(r.tol_dis) << "\n"
      << "max_levels = " << r.max_levels << "\n"
      << "max_dofs = " << r.max_dofs << "\n"
      << "omegas = " << list(r.omegas) << "\n"
      << "marking = " << enum_name(r.marking, kParts) << "\n"
      << "newton = " << enum_name(r.newton_stop, kStops) << "\n"
      << "smooth_siblings = " << b(r.smoothing.sibling_groups) << "\n"
      << "smooth_islands = " << b(r.smoothing.unrefined_islands) << "\n"
      << "initial_guess = " << enum_name(r.initial_guess, kGuesses) << "\n"
      << "compare_cold_start = " << b(r.compare_cold_start) << "\n\n"
      << "[reference]\n"
      << "kind = " << enum_name(r.reference, kReferences) << "\n"
      << "values = " << list(r.reference_values) << "\n"
      << "uncertainties = " << list(r.reference_uncertainties) << "\n"
      << "refinements = " << r.reference_refinements << "\n\n"
      << "[output]\n"
      << "dir = " << c.out_dir << "\n"
      << "vtk = " << b(c.vtk) << "\n"
      << "compare_uniform = " << b(c.compare_uniform) << "\n";
    return o.str();
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b)
{
    return serialize_config(a) == serialize_config(b);
}

}  // namespace mgdwr
