#include "mgdwr/adaptivity.hpp"

#include "mgdwr/errors.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mgdwr {

void RunConfig::validate() const
{
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (degree < 1) fail("degree must be at least 1");
    if (enriched() <= degree) fail("the enriched degree must exceed the degree");
    if (!(tol_dis > 0.0)) fail("tol_dis must be positive");
    if (max_levels < 1) fail("max_levels must be at least 1");
    if (max_dofs < 1) fail("max_dofs must be positive");
    if (problem == ProblemKind::PLaplace) {
        if (!(p > 1.0)) fail("p must exceed 1");
        if (!(epsilon > 0.0)) fail("epsilon must be positive");
    }
    if (mesh.kind == MeshKind::UnitSquare && mesh.n < 1) fail("mesh.n must be positive");
    if (mesh.global_refinements < 0) fail("mesh.refinements must be nonnegative");
    if (!(mesh.distortion >= 0.0 && mesh.distortion < 0.5)) fail("mesh.distortion must lie in [0, 0.5)");
    if ((problem == ProblemKind::Quasilinear) != (mesh.kind == MeshKind::Slit))
        fail("the quasilinear system is posed on the slit domain only");
    for (double w : omegas)
        if (!(w > 0.0)) fail("omegas must be positive");
    if (reference == ReferenceKind::Given && reference_values.empty()) fail("reference values missing");
    if (reference == ReferenceKind::Exact && experiment != "example2")
        fail("closed-form references exist for example2 only");
    if (reference == ReferenceKind::Uniform && reference_refinements < 1) fail("reference.refinements must be positive");
    if (initial_guess == InitialGuess::PContinuation && problem != ProblemKind::PLaplace)
        fail("p continuation applies to the p-Laplace problem only");
}

CellMarks mark_average(const Vector& cellwise, const Mesh& mesh)
{
    CellMarks marks;
    if (cellwise.empty()) return marks;
    const double mean = std::accumulate(cellwise.begin(), cellwise.end(), 0.0) / static_cast<double>(cellwise.size());
    const double threshold = mean * (1.0 - 1e-10);
    for (CellId c : mesh.active_cells())
        if (cellwise[mesh.active_index(c)] >= threshold) marks.push_back(c);
    return marks;
}

Mesh build_initial_mesh(const MeshSpec& spec)
{
    Mesh m;
    switch (spec.kind) {
    case MeshKind::UnitSquare: m = Mesh::unit_square(spec.n); break;
    case MeshKind::Cheese: m = Mesh::cheese(); break;
    case MeshKind::Slit: m = Mesh::slit(); break;
    }
    if (spec.global_refinements > 0) m = m.refined_globally(spec.global_refinements);
    if (spec.distortion > 0.0) m = m.distorted(spec.distortion, spec.seed);
    return m;
}

std::shared_ptr<const ProblemDefinition> build_problem(const RunConfig& cfg)
{
    return build_problem(cfg, cfg.p);
}

std::shared_ptr<const ProblemDefinition> build_problem(const RunConfig& cfg, double p)
{
    if (cfg.problem == ProblemKind::Quasilinear) return build_quasilinear();
    PLaplaceParams params{p, cfg.epsilon};
    if (cfg.rhs == RhsKind::Sine) {
        const SmoothFunction u = sine_solution();
        params.rhs = manufactured_rhs(u, cfg.p, cfg.epsilon);
        params.g = [v = u.value](const Point& x, Side) { return v(x); };
    }
    return build_plaplace(std::move(params));
}

DiscreteFunction unit_guess(const AssemblyPlan& plan)
{
    DiscreteFunction u(plan.space_ptr(),
                       std::vector<double>(static_cast<std::size_t>(plan.space().n_dofs()), 1.0));
    plan.constraints().distribute(u.coefficients());
    return u;
}

std::vector<double> slit_exact_values()
{
    // Graded toward the tip, where the solution is singular.
    Mesh g = Mesh::slit().refined_globally(2);
    for (int k = 0; k < 20; ++k) {
        CellMarks marks;
        for (const auto& hit : g.locate_all({0.0, 0.0})) marks.push_back(hit.cell);
        g = g.refined(marks);
    }
    const FieldFunction exact = [](const Point& p, Side side, int c) { return quasilinear_exact(p, side)[c]; };
    std::vector<double> out;
    for (const auto& j : catalog("example2")) out.push_back(eval_field(j.functional, exact, g, 8));
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Level {
    std::shared_ptr<const Mesh> mesh;
    std::shared_ptr<const FeSpace> coarse, enriched, pu;
    std::unique_ptr<AssemblyPlan> plan, plan2;

    Level(std::shared_ptr<const Mesh> m, const RunConfig& cfg, const ProblemDefinition& problem) : mesh(std::move(m))
    {
        const int nc = problem.n_components();
        const int nq = cfg.quadrature();
        coarse = std::make_shared<const FeSpace>(mesh, cfg.degree, nc, nq);
        enriched = std::make_shared<const FeSpace>(mesh, cfg.enriched(), nc, nq);
        pu = std::make_shared<const FeSpace>(mesh, 1, 1, nq);
        plan = std::make_unique<AssemblyPlan>(coarse, build_constraints(*coarse, problem.dirichlet()));
        plan2 = std::make_unique<AssemblyPlan>(enriched, build_constraints(*enriched, problem.dirichlet()));
    }
};

double relative_defect(double a, double b)
{
    const double scale = std::abs(b);
    return scale > 0.0 ? std::abs(a - b) / scale : std::abs(a - b);
}

void say(const RunHooks& hooks, const std::string& msg)
{
    if (hooks.log) hooks.log(msg);
}

NewtonConfig newton_config(const RunConfig& cfg, const RunHooks& hooks, const std::string& tag)
{
    NewtonConfig n;
    n.exec = cfg.exec;
    if (hooks.log)
        n.log = [&hooks, tag](const NewtonIteration& it) {
            std::ostringstream s;
            s << "  " << tag << " k=" << it.k << " |A|=" << it.residual_norm << " alpha=" << it.alpha
              << " rebuilt=" << (it.rebuilt ? 1 : 0);
            if (it.eta_m >= 0.0) s << " eta_m=" << it.eta_m;
            hooks.log(s.str());
        };
    return n;
}

RunResult run(const RunConfig& cfg, bool uniform, const RunHooks& hooks)
{
    cfg.validate();
    const auto problem = build_problem(cfg);
    const auto goals = catalog(cfg.experiment);
    std::vector<double> omegas = cfg.omegas.empty() ? std::vector<double>(goals.size(), 1.0) : cfg.omegas;
    if (omegas.size() != goals.size()) throw ConfigError("omegas must match the number of functionals");

    RunResult result;
    for (const auto& g : goals) result.functional_names.push_back(g.name);
    result.references = compute_references(cfg, hooks);
    std::vector<double> exact;
    bool have_all = !result.references.empty();
    for (const auto& r : result.references) {
        have_all = have_all && r.has_value();
        exact.push_back(r ? r->value : ConvergenceRecord::kNaN);
    }

    auto mesh = std::make_shared<const Mesh>(build_initial_mesh(cfg.mesh));
    double eta_prev = 1e-8;
    DiscreteFunction u_prev, u2_prev;

    AdaptiveNewtonConfig acfg;
    acfg.stop = cfg.newton_stop;
    acfg.newton.exec = cfg.exec;
    acfg.newton.log = newton_config(cfg, hooks, "coarse").log;
    const NewtonConfig ncfg = newton_config(cfg, hooks, "enriched");

    for (int level = 1;; ++level) {
        const auto t0 = Clock::now();
        const Level lv(mesh, cfg, *problem);
        ConvergenceRecord rec;
        rec.level = level;
        rec.dofs = lv.coarse->n_dofs();
        rec.enriched_dofs = lv.enriched->n_dofs();
        rec.cells = mesh->n_active();
        {
            std::ostringstream s;
            s << "level " << level << ": " << rec.cells << " cells, " << rec.dofs << " dofs, enriched "
              << rec.enriched_dofs;
            say(hooks, s.str());
        }
        try {
            // Enriched primal by Newton, nested iteration from the previous level.
            const DiscreteFunction guess2 =
                level == 1 ? initial_guess(cfg, *lv.plan2, hooks) : transfer_to_refined(u2_prev, lv.enriched);
            const auto enriched_solve = newton_solve(
                *problem, *lv.plan2, guess2, [level](double n) { return nested_tolerance(level, n); }, ncfg);
            const DiscreteFunction& u2 = enriched_solve.u;
            rec.enriched_newton_steps = enriched_solve.stats.iterations;
            if (cfg.compare_cold_start && level > 1) {
                NewtonConfig quiet = ncfg;
                quiet.log = {};
                rec.cold_start_steps =
                    newton_solve(*problem, *lv.plan2, unit_guess(*lv.plan2),
                                 [level](double n) { return nested_tolerance(level, n); }, quiet)
                        .stats.iterations;
            }

            // Coarse primal and adjoint balanced against the previous estimate.
            const DiscreteFunction guess =
                level == 1 ? initial_guess(cfg, *lv.plan, hooks) : transfer_to_refined(u_prev, lv.coarse);
            const auto an = adaptive_newton_multigoal(*problem, *lv.plan, goals, omegas, guess, eta_prev, u2, acfg);
            rec.newton_steps = an.stats.iterations;
            rec.eta_m = an.stats.final_eta_m();
            rec.eta_m_threshold = an.stats.threshold;
            const CombinedFunctional& combined = an.combined;

            const DiscreteFunction z2 = solve_enriched_adjoint(
                *problem, *lv.plan2, u2, combined_derivative_rhs(combined, *lv.enriched, u2), cfg.exec);
            const EstimatorBreakdown est =
                estimate(*problem, combined.linearize(an.u), *lv.plan, an.u, an.z, u2, z2, *lv.pu, cfg.exec);

            rec.values = combined.values_h;
            rec.values_h2 = combined.values_h2;
            rec.j_e_error = combined_error_value(combined);
            rec.eta_h = est.eta_h;
            rec.eta_signed = est.eta_signed;
            rec.eta_primal = est.eta_primal_signed;
            rec.eta_adjoint = est.eta_adjoint_signed;
            rec.pu_sum_defect = relative_defect(std::accumulate(est.nodal.begin(), est.nodal.end(), 0.0), est.eta_signed);
            double abs_sum = 0.0;
            for (double v : est.nodal) abs_sum += std::abs(v);
            rec.cell_sum_defect =
                relative_defect(std::accumulate(est.cellwise.begin(), est.cellwise.end(), 0.0), abs_sum);
            for (std::size_t i = 0; i < goals.size(); ++i) {
                const double e = std::abs(exact[i] - rec.values[i]);
                rec.abs_errors.push_back(e);
                rec.rel_errors.push_back(e / std::abs(exact[i]));
            }
            if (have_all) {
                try {
                    const Effectivity eff = effectivity(exact, rec.values, omegas, est);
                    rec.true_error = eff.true_error;
                    rec.i_eff = eff.i_eff;
                    rec.i_effp = eff.i_effp;
                    rec.i_effa = eff.i_effa;
                } catch (const ZeroTrueError&) {
                }
            }

            CellMarks marks;
            if (uniform) {
                marks.assign(mesh->active_cells().begin(), mesh->active_cells().end());
            } else {
                const Vector& indicator = cfg.marking == EstimatorPart::Full ? est.cellwise
                                          : distribute_to_cells(cfg.marking == EstimatorPart::Primal
                                                                    ? est.nodal_primal
                                                                    : est.nodal_adjoint,
                                                                *lv.pu);
                marks = mark_average(indicator, *mesh);
            }
            rec.marked = static_cast<int>(marks.size());
            rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
            {
                std::ostringstream s;
                s.precision(6);
                s << "  eta_h=" << rec.eta_h << " J_E=" << rec.j_e_error << " I_eff=" << rec.i_eff
                  << " newton=" << rec.newton_steps << "+" << rec.enriched_newton_steps << " marked=" << rec.marked
                  << " " << rec.wall_ms << " ms";
                say(hooks, s.str());
            }
            result.records.push_back(rec);
            if (hooks.on_level) hooks.on_level({result.records.back(), an.u, an.z, est});

            if (est.eta_h < cfg.tol_dis) {
                result.stop_reason = "eta_h below tol_dis";
                break;
            }
            if (level >= cfg.max_levels) {
                result.stop_reason = "max_levels reached";
                break;
            }
            auto next = std::make_shared<const Mesh>(mesh->refined(marks, cfg.smoothing));
            const FeSpace probe(next, cfg.degree, problem->n_components(), 1);
            if (probe.n_dofs() > cfg.max_dofs) {
                result.stop_reason = "max_dofs reached";
                break;
            }
            eta_prev = est.eta_h;
            u_prev = an.u;
            u2_prev = u2;
            mesh = std::move(next);
        } catch (const RunFailure&) {
            throw;
        } catch (const Error& e) {
            throw RunFailure(level, e.what(), result.records);
        }
    }
    result.final_mesh = mesh;
    return result;
}

}  // namespace

DiscreteFunction initial_guess(const RunConfig& cfg, const AssemblyPlan& plan, const RunHooks& hooks)
{
    DiscreteFunction u = unit_guess(plan);
    if (cfg.initial_guess == InitialGuess::Unit) return u;
    const NewtonConfig ncfg = newton_config(cfg, {}, "");
    for (double p = 2.0; p < cfg.p; p += 1.0) {
        const auto stage = build_problem(cfg, p);
        auto res = newton_solve(*stage, plan, u, [](double n) { return 1e-8 * n; }, ncfg);
        u = std::move(res.u);
        std::ostringstream s;
        s << "  continuation p=" << p << ": " << res.stats.iterations << " Newton steps";
        say(hooks, s.str());
    }
    return u;
}

RunResult run_adaptive(const RunConfig& cfg, const RunHooks& hooks)
{
    return run(cfg, cfg.uniform, hooks);
}

RunResult run_uniform(const RunConfig& cfg, const RunHooks& hooks)
{
    return run(cfg, true, hooks);
}

ReferenceValues compute_references(const RunConfig& cfg, const RunHooks& hooks)
{
    const auto goals = catalog(cfg.experiment);
    ReferenceValues out(goals.size());
    switch (cfg.reference) {
    case ReferenceKind::None: break;
    case ReferenceKind::Given:
        for (std::size_t i = 0; i < goals.size() && i < cfg.reference_values.size(); ++i) {
            const double unc = i < cfg.reference_uncertainties.size() ? cfg.reference_uncertainties[i] : 0.0;
            out[i] = ReferenceValue{cfg.reference_values[i], unc, "configured"};
        }
        break;
    case ReferenceKind::Exact: {
        const auto v = slit_exact_values();
        for (std::size_t i = 0; i < goals.size(); ++i) out[i] = ReferenceValue{v[i], 1e-9, "closed-form solution"};
        break;
    }
    case ReferenceKind::Uniform: {
        const auto problem = build_problem(cfg);
        auto mesh = std::make_shared<const Mesh>(build_initial_mesh(cfg.mesh));
        const int r = cfg.enriched();
        const int nc = problem->n_components();
        DiscreteFunction u;
        NewtonConfig ncfg;
        ncfg.exec = cfg.exec;
        for (int k = 0; k <= cfg.reference_refinements; ++k) {
            if (k > 0) mesh = std::make_shared<const Mesh>(mesh->refined_globally());
            const auto space = std::make_shared<const FeSpace>(mesh, r, nc, r + 2);
            const AssemblyPlan plan(space, build_constraints(*space, problem->dirichlet()));
            const DiscreteFunction guess = k == 0 ? unit_guess(plan) : transfer_to_refined(u, space);
            auto res = newton_solve(*problem, plan, guess, [](double n) { return std::max(1e-11 * n, 1e-14); }, ncfg);
            u = std::move(res.u);
            std::ostringstream s;
            s << "reference level " << k << ": " << space->n_dofs() << " dofs, " << res.stats.iterations
              << " Newton steps";
            say(hooks, s.str());
        }
        for (std::size_t i = 0; i < goals.size(); ++i)
            out[i] = ReferenceValue{eval(goals[i].functional, u), 0.0,
                                    "uniform refinement x" + std::to_string(cfg.reference_refinements)};
        break;
    }
    }
    return out;
}

}  // namespace mgdwr
