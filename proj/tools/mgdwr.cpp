#include "mgdwr/config.hpp"
#include "mgdwr/errors.hpp"
#include "mgdwr/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace mgdwr;

namespace {

constexpr int kOk = 0;
constexpr int kSolverFailure = 2;
constexpr int kConfigError = 3;

struct Source {
    std::string positional;
    std::string preset;
    std::string config;
};

ExperimentConfig resolve(const Source& s)
{
    const int given = !s.positional.empty() + !s.preset.empty() + !s.config.empty();
    if (given != 1) throw ConfigError("give exactly one of <preset>, --preset, --config");
    if (!s.config.empty()) return load_config(s.config);
    return preset(s.preset.empty() ? s.positional : s.preset);
}

struct RunOptions {
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_levels;
    std::optional<long> max_dofs;
    bool uniform{false};
    bool vtk{false};
};

void write_outputs(const fs::path& dir, const std::string& stem, const RunResult& r)
{
    write_csv((dir / (stem + ".csv")).string(), r);
    write_gnuplot((dir / (stem + ".dat")).string(), r);
    std::cout << "wrote " << (dir / (stem + ".csv")).string() << " (" << r.records.size() << " levels, "
              << r.stop_reason << ")\n";
}

int cmd_run(const Source& src, const RunOptions& opt)
{
    ExperimentConfig c = resolve(src);
    if (const char* env = std::getenv("MGDWR_OUT_DIR"); env && *env) c.out_dir = env;
    if (!opt.out_dir.empty()) c.out_dir = opt.out_dir;
    if (opt.seed) c.run.mesh.seed = *opt.seed;
    if (opt.max_levels) c.run.max_levels = *opt.max_levels;
    if (opt.max_dofs) c.run.max_dofs = *opt.max_dofs;
    if (opt.uniform) c.compare_uniform = true;
    if (opt.vtk) c.vtk = true;
    c.run.validate();

    const fs::path dir(c.out_dir);
    fs::create_directories(dir);
    {
        std::ofstream f(dir / (c.run.name + ".ini"));
        f << serialize_config(c);
    }

    RunHooks hooks;
    hooks.log = [](const std::string& s) { std::cerr << s << "\n"; };
    auto with_vtk = [&](const std::string& stem) {
        RunHooks h = hooks;
        if (c.vtk)
            h.on_level = [dir, stem](const LevelSnapshot& s) {
                write_vtk((dir / (stem + "_level" + std::to_string(s.record.level) + ".vtk")).string(), s.u_h,
                          s.z_h, s.estimate.cellwise);
            };
        return h;
    };

    const bool uniform_only = c.run.uniform;
    const std::string main_stem = c.run.name + (uniform_only ? "_uniform" : "_adaptive");
    const RunResult main =
        uniform_only ? run_uniform(c.run, with_vtk(main_stem)) : run_adaptive(c.run, with_vtk(main_stem));
    write_outputs(dir, main_stem, main);
    if (c.compare_uniform && !uniform_only) {
        const std::string stem = c.run.name + "_uniform";
        write_outputs(dir, stem, run_uniform(c.run, with_vtk(stem)));
    }
    return kOk;
}

int cmd_report(const std::vector<std::string>& paths)
{
    std::vector<std::string> labels;
    std::vector<CsvTable> tables;
    for (const auto& p : paths) {
        labels.push_back(fs::path(p).stem().string());
        tables.push_back(read_csv(p));
    }
    write_report(std::cout, labels, tables);
    return kOk;
}

int cmd_mesh_dump(const Source& src, const std::string& output)
{
    const ExperimentConfig c = resolve(src);
    const Mesh m = build_initial_mesh(c.run.mesh);
    std::ofstream file;
    if (!output.empty()) {
        file.open(output);
        if (!file) throw ConfigError("cannot write '" + output + "'");
    }
    std::ostream& out = output.empty() ? std::cout : file;
    out.precision(17);
    out << "# " << m.n_vertices() << " vertices, " << m.n_active() << " cells\n";
    for (int v = 0; v < m.n_vertices(); ++v) out << "v " << m.vertex(v).x << " " << m.vertex(v).y << "\n";
    for (CellId cid : m.active_cells()) {
        out << "c";
        for (VertexId v : m.cell(cid).vertices) out << " " << v;
        out << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adaptive multigoal DWR solver for p-Laplace and quasilinear problems"};
    app.require_subcommand(1);

    Source run_src;
    RunOptions opt;
    auto* run = app.add_subcommand("run", "Run an experiment and write CSV, gnuplot and VTK output");
    run->add_option("name", run_src.positional, "Preset name");
    run->add_option("--preset", run_src.preset, "Preset name");
    run->add_option("--config", run_src.config, "Config file");
    run->add_option("--out-dir", opt.out_dir, "Output directory (default: from config, or $MGDWR_OUT_DIR)");
    run->add_option("--seed", opt.seed, "Mesh distortion seed");
    run->add_option("--max-levels", opt.max_levels, "Level cap");
    run->add_option("--max-dofs", opt.max_dofs, "DOF cap");
    run->add_flag("--uniform", opt.uniform, "Also run uniform refinement for comparison");
    run->add_flag("--vtk", opt.vtk, "Write VTK per level");

    std::vector<std::string> csvs;
    auto* report = app.add_subcommand("report", "Convergence rates and side-by-side tables from CSV files");
    report->add_option("csv", csvs, "CSV files written by run")->required();

    Source dump_src;
    std::string dump_out;
    auto* dump = app.add_subcommand("mesh-dump", "Print the initial mesh of a preset or config");
    dump->add_option("name", dump_src.positional, "Preset name");
    dump->add_option("--preset", dump_src.preset, "Preset name");
    dump->add_option("--config", dump_src.config, "Config file");
    dump->add_option("-o,--output", dump_out, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*run) return cmd_run(run_src, opt);
        if (*report) return cmd_report(csvs);
        if (*dump) return cmd_mesh_dump(dump_src, dump_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const MalformedCsv& e) {
        std::cerr << "malformed csv: " << e.what() << "\n";
        return kConfigError;
    } catch (const RunFailure& e) {
        std::cerr << "solver failure at " << e.what() << "\n";
        return kSolverFailure;
    } catch (const Error& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kSolverFailure;
    }
    return kOk;
}
