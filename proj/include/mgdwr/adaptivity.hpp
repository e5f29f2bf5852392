#pragma once

#include "mgdwr/errors.hpp"
#include "mgdwr/estimator.hpp"
#include "mgdwr/goals.hpp"
#include "mgdwr/mesh.hpp"
#include "mgdwr/problems.hpp"
#include "mgdwr/solver.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace mgdwr {

enum class ProblemKind { PLaplace, Quasilinear };
enum class MeshKind { UnitSquare, Cheese, Slit };
/// One: f = 1, g = 0. Sine: manufactured from u = sin(6x + 6y).
enum class RhsKind { One, Sine };
/// Given: values in the config. Exact: closed-form solution of the slit
/// system. Uniform: the first functional on a uniformly refined mesh.
enum class ReferenceKind { None, Given, Exact, Uniform };
/// Level-1 Newton start. Unit: 1 at free nodes, Dirichlet data elsewhere.
/// PContinuation: p-Laplace solutions for p = 2, 3, ... below the target p
/// with the target data, each started from the previous one.
enum class InitialGuess { Unit, PContinuation };
/// Indicator used for marking.
enum class EstimatorPart { Full, Primal, Adjoint };

struct MeshSpec {
    MeshKind kind{MeshKind::UnitSquare};
    int n{4};  // cells per direction of the unit square
    int global_refinements{0};
    double distortion{0.0};
    std::uint64_t seed{1};
};

struct RunConfig {
    std::string name{"custom"};
    std::string experiment{"example1a"};  // goal catalog
    ProblemKind problem{ProblemKind::PLaplace};
    double p{2.0};
    double epsilon{1.0};
    RhsKind rhs{RhsKind::One};
    MeshSpec mesh{};
    int degree{1};
    int enriched_degree{0};  // 0: degree + 1
    int n_quad{0};           // 0: enriched degree + 2
    double tol_dis{1e-12};
    int max_levels{8};
    long max_dofs{200000};
    std::vector<double> omegas;  // empty: all ones
    ReferenceKind reference{ReferenceKind::None};
    std::vector<double> reference_values;
    std::vector<double> reference_uncertainties;
    int reference_refinements{7};
    bool uniform{false};
    NewtonStop newton_stop{NewtonStop::Balanced};
    EstimatorPart marking{EstimatorPart::Full};
    RefinementSmoothing smoothing{true, true};
    bool compare_cold_start{false};
    InitialGuess initial_guess{InitialGuess::Unit};
    Execution exec{Execution::Parallel};

    [[nodiscard]] int enriched() const { return enriched_degree > 0 ? enriched_degree : degree + 1; }
    [[nodiscard]] int quadrature() const { return n_quad > 0 ? n_quad : enriched() + 2; }
    /// Throws ConfigError.
    void validate() const;
};

struct ConvergenceRecord {
    static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

    int level{0};
    long dofs{0};
    long enriched_dofs{0};
    int cells{0};
    std::vector<double> values;      // J_i(u_h)
    std::vector<double> values_h2;   // J_i(u_h2)
    std::vector<double> rel_errors;  // |J_i(u) - J_i(u_h)| / |J_i(u)|, NaN without reference
    std::vector<double> abs_errors;
    double j_e_error{0.0};  // sum_i omega_i |J_i(u_h2) - J_i(u_h)| / |J_i(u_h)|
    double true_error{kNaN};
    double eta_h{0.0};
    double eta_signed{0.0};
    double eta_primal{0.0};   // unhalved, signed
    double eta_adjoint{0.0};  // unhalved, signed
    double i_eff{kNaN};
    double i_effp{kNaN};
    double i_effa{kNaN};
    int newton_steps{0};           // coarse primal (adaptive Newton)
    int enriched_newton_steps{0};  // enriched primal (Newton)
    int cold_start_steps{-1};      // enriched primal from the level-1 guess, when requested
    double eta_m{0.0};
    double eta_m_threshold{0.0};
    double pu_sum_defect{0.0};    // |sum eta_i - eta_signed| / |eta_signed|
    double cell_sum_defect{0.0};  // |sum eta_K - sum |eta_i|| / sum |eta_i|
    int marked{0};
    double wall_ms{0.0};
};

struct RunResult {
    std::vector<std::string> functional_names;
    std::vector<ConvergenceRecord> records;
    ReferenceValues references;
    std::string stop_reason;
    std::shared_ptr<const Mesh> final_mesh;
};

/// Per-level data handed to an observer (e.g. for VTK output).
struct LevelSnapshot {
    const ConvergenceRecord& record;
    const DiscreteFunction& u_h;
    const DiscreteFunction& z_h;
    const EstimatorBreakdown& estimate;
};

struct RunHooks {
    std::function<void(const std::string&)> log;
    std::function<void(const LevelSnapshot&)> on_level;
};

/// A solver error annotated with the level it occurred on. The records of
/// the finished levels are kept.
class RunFailure : public Error {
public:
    RunFailure(int level, const std::string& what, std::vector<ConvergenceRecord> done)
        : Error("level " + std::to_string(level) + ": " + what), level_(level), records_(std::move(done))
    {
    }
    [[nodiscard]] int level() const { return level_; }
    [[nodiscard]] const std::vector<ConvergenceRecord>& records() const { return records_; }

private:
    int level_;
    std::vector<ConvergenceRecord> records_;
};

/// Cells with eta_K >= mean, ties (within 1e-10 relative) included.
[[nodiscard]] CellMarks mark_average(const Vector& cellwise, const Mesh& mesh);

[[nodiscard]] Mesh build_initial_mesh(const MeshSpec& spec);
[[nodiscard]] std::shared_ptr<const ProblemDefinition> build_problem(const RunConfig& cfg);
/// The configured p-Laplace data with the operator's exponent replaced by `p`.
[[nodiscard]] std::shared_ptr<const ProblemDefinition> build_problem(const RunConfig& cfg, double p);

/// Function equal to 1 at every node that is not fixed by the constraints.
[[nodiscard]] DiscreteFunction unit_guess(const AssemblyPlan& plan);
/// Level-1 initial guess as configured. Throws MaxIterations or
/// LineSearchExhausted from a failing continuation stage.
[[nodiscard]] DiscreteFunction initial_guess(const RunConfig& cfg, const AssemblyPlan& plan,
                                             const RunHooks& hooks = {});

/// Algorithm 3: adaptive multigoal loop. Throws RunFailure.
[[nodiscard]] RunResult run_adaptive(const RunConfig& cfg, const RunHooks& hooks = {});
/// Same pipeline with every cell marked.
[[nodiscard]] RunResult run_uniform(const RunConfig& cfg, const RunHooks& hooks = {});

/// Reference values as configured; Uniform solves on the initial mesh
/// refined `reference_refinements` times with the enriched degree.
[[nodiscard]] ReferenceValues compute_references(const RunConfig& cfg, const RunHooks& hooks = {});

/// Example 2 functionals at the closed-form solution.
[[nodiscard]] std::vector<double> slit_exact_values();

}  // namespace mgdwr
