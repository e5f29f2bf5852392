#include "mgdwr/assembly.hpp"

#include "mgdwr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mgdwr {

CellValues::CellValues(const FeSpace& space, QuadratureRule rule)
    : space_(&space), rule_(std::move(rule)), n_shape_(space.nodes_per_cell())
{
    const int nq = rule_.size();
    const int n1 = space.degree() + 1;
    ref_values_.resize(static_cast<std::size_t>(nq * n_shape_));
    ref_grads_.resize(static_cast<std::size_t>(nq * n_shape_));
    grads_.resize(ref_grads_.size());
    jxw_.resize(static_cast<std::size_t>(nq));
    points_.resize(static_cast<std::size_t>(nq));
    std::vector<double> vx(static_cast<std::size_t>(n1)), dx(vx.size()), vy(vx.size()), dy(vx.size());
    for (int q = 0; q < nq; ++q) {
        space.basis().evaluate(rule_.points[q].x, vx.data(), dx.data());
        space.basis().evaluate(rule_.points[q].y, vy.data(), dy.data());
        for (int j = 0; j < n1; ++j)
            for (int i = 0; i < n1; ++i) {
                const auto idx = static_cast<std::size_t>(q * n_shape_ + i + n1 * j);
                ref_values_[idx] = vx[i] * vy[j];
                ref_grads_[idx] = {dx[i] * vy[j], vx[i] * dy[j]};
            }
    }
}

void CellValues::reinit(CellId c)
{
    cell_ = c;
    const Mesh& m = space_->mesh();
    for (int q = 0; q < n_q(); ++q) {
        const Mat2 jac = m.jacobian(c, rule_.points[q]);
        const Mat2 jit = jac.inverse().transpose();
        jxw_[q] = jac.det() * rule_.weights[q];
        points_[q] = m.map(c, rule_.points[q]);
        for (int k = 0; k < n_shape_; ++k) {
            const auto idx = static_cast<std::size_t>(q * n_shape_ + k);
            grads_[idx] = jit * ref_grads_[idx];
        }
    }
    space_->cell_dofs(c, dofs_);
}

void CellValues::function_state(const std::vector<double>& coeffs, std::vector<PointState>& out) const
{
    const int nc = space_->n_components();
    out.resize(static_cast<std::size_t>(n_q()));
    for (int q = 0; q < n_q(); ++q) {
        PointState& s = out[q];
        s.x = points_[q];
        s.u.fill(0.0);
        s.grad.fill(Vec2{});
        for (int k = 0; k < n_shape_; ++k) {
            const double phi = shape(k, q);
            const Vec2& g = grad(k, q);
            for (int c = 0; c < nc; ++c) {
                const double a = coeffs[dofs_[static_cast<std::size_t>(k * nc + c)]];
                s.u[c] += a * phi;
                s.grad[c] += a * g;
            }
        }
    }
}

std::vector<std::vector<CellId>> color_cells(std::span<const CellId> cells, int n_targets,
                                             const std::function<void(CellId, std::vector<int>&)>& targets)
{
    std::vector<std::vector<CellId>> colors;
    std::vector<std::vector<char>> used;
    std::vector<int> t;
    for (CellId c : cells) {
        targets(c, t);
        std::size_t k = 0;
        for (; k < colors.size(); ++k) {
            const auto& u = used[k];
            if (std::none_of(t.begin(), t.end(), [&](int i) { return u[i] != 0; })) break;
        }
        if (k == colors.size()) {
            colors.emplace_back();
            used.emplace_back(static_cast<std::size_t>(n_targets), 0);
        }
        colors[k].push_back(c);
        for (int i : t) used[k][i] = 1;
    }
    return colors;
}

namespace {

void cell_targets(const FeSpace& space, const ConstraintSet& cs, CellId c, std::vector<int>& out,
                  std::vector<int>& scratch)
{
    space.cell_dofs(c, scratch);
    out.clear();
    for (int d : scratch) cs.for_each_target(d, [&](int t, double) { out.push_back(t); });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

// Runs kernel(scratch, cell) over all cells: in id order for Serial, colour
// by colour with an OpenMP loop inside each colour for Parallel.
template <typename MakeScratch, typename Kernel>
void run_cells(std::span<const CellId> all, const std::vector<std::vector<CellId>>& colors, Execution exec,
               MakeScratch&& make_scratch, Kernel&& kernel)
{
    if (exec == Execution::Serial) {
        auto scratch = make_scratch();
        for (CellId c : all) kernel(scratch, c);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    for (const auto& color : colors) {
        const auto n = static_cast<long>(color.size());
#pragma omp parallel
        {
            auto scratch = make_scratch();
#pragma omp for schedule(static)
            for (long i = 0; i < n; ++i) {
                try {
                    kernel(scratch, color[static_cast<std::size_t>(i)]);
                }
                catch (...) {
                    const std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        }
        if (error) std::rethrow_exception(error);
    }
}

struct SingleSpaceScratch {
    CellValues cv;
    std::vector<PointState> state;
    std::vector<double> local;
    std::vector<int> dofs;
};

void check_finite(const std::vector<double>& v)
{
    for (double x : v)
        if (!std::isfinite(x)) throw QuadratureFailure("non-finite integrand in cell assembly");
}

}  // namespace

AssemblyPlan::AssemblyPlan(std::shared_ptr<const FeSpace> space, ConstraintSet constraints)
    : space_(std::move(space)), constraints_(std::move(constraints))
{
    const FeSpace& s = *space_;
    const int n = s.n_dofs();
    if (constraints_.n_dofs() != n) throw std::invalid_argument("constraint set does not match the space");
    if (!constraints_.is_closed()) constraints_.close();

    std::vector<std::vector<int>> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rows[i].push_back(i);
    std::vector<int> t;
    std::vector<int> scratch;
    for (CellId c : s.mesh().active_cells()) {
        cell_targets(s, constraints_, c, t, scratch);
        for (int a : t) {
            auto& row = rows[a];
            row.insert(row.end(), t.begin(), t.end());
        }
        for (int a : t) {
            auto& row = rows[a];
            if (row.size() > 4 * t.size()) {
                std::sort(row.begin(), row.end());
                row.erase(std::unique(row.begin(), row.end()), row.end());
            }
        }
    }
    std::vector<int> rp{0};
    std::vector<int> cols;
    for (auto& row : rows) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        cols.insert(cols.end(), row.begin(), row.end());
        rp.push_back(static_cast<int>(cols.size()));
        std::vector<int>().swap(row);
    }
    pattern_ = SparseMatrix(n, std::move(rp), std::move(cols));

    colors_ = color_cells(s.mesh().active_cells(), n, [&](CellId c, std::vector<int>& out) {
        std::vector<int> sc;
        cell_targets(s, constraints_, c, out, sc);
    });
}

Vector assemble_residual(const ProblemDefinition& problem, const AssemblyPlan& plan, const DiscreteFunction& u,
                         Execution exec)
{
    const FeSpace& s = plan.space();
    if (&u.space() != &s && u.space().n_dofs() != s.n_dofs())
        throw std::invalid_argument("residual state lives in a different space");
    const int nc = s.n_components();
    const ConstraintSet& cs = plan.constraints();
    Vector r(static_cast<std::size_t>(s.n_dofs()), 0.0);
    const auto& coeffs = u.coefficients();

    run_cells(
        s.mesh().active_cells(), plan.colors(), exec,
        [&] { return SingleSpaceScratch{CellValues(s, QuadratureRule(s.n_quad())), {}, {}, {}}; },
        [&](SingleSpaceScratch& sc, CellId c) {
            sc.cv.reinit(c);
            sc.cv.function_state(coeffs, sc.state);
            const int ns = sc.cv.n_shape();
            sc.local.assign(static_cast<std::size_t>(ns * nc), 0.0);
            ResidualDensity rd;
            for (int q = 0; q < sc.cv.n_q(); ++q) {
                problem.residual(sc.state[q], rd);
                const double w = sc.cv.JxW(q);
                for (int k = 0; k < ns; ++k) {
                    const double phi = sc.cv.shape(k, q);
                    const Vec2& g = sc.cv.grad(k, q);
                    for (int cc = 0; cc < nc; ++cc)
                        sc.local[static_cast<std::size_t>(k * nc + cc)] +=
                            w * (rd.source[cc] * phi + dot(rd.flux[cc], g));
                }
            }
            check_finite(sc.local);
            s.cell_dofs(c, sc.dofs);
            for (std::size_t i = 0; i < sc.dofs.size(); ++i)
                cs.for_each_target(sc.dofs[i], [&](int t, double wt) { r[t] += wt * sc.local[i]; });
        });
    return r;
}

SparseMatrix assemble_jacobian(const ProblemDefinition& problem, const AssemblyPlan& plan, const DiscreteFunction& u,
                               Execution exec)
{
    const FeSpace& s = plan.space();
    const int nc = s.n_components();
    const ConstraintSet& cs = plan.constraints();
    SparseMatrix a = plan.pattern();
    a.set_zero();
    const auto& coeffs = u.coefficients();

    run_cells(
        s.mesh().active_cells(), plan.colors(), exec,
        [&] { return SingleSpaceScratch{CellValues(s, QuadratureRule(s.n_quad())), {}, {}, {}}; },
        [&](SingleSpaceScratch& sc, CellId c) {
            sc.cv.reinit(c);
            sc.cv.function_state(coeffs, sc.state);
            const int ns = sc.cv.n_shape();
            const int nd = ns * nc;
            sc.local.assign(static_cast<std::size_t>(nd * nd), 0.0);
            JacobianDensity jd;
            for (int q = 0; q < sc.cv.n_q(); ++q) {
                problem.jacobian(sc.state[q], jd);
                const double w = sc.cv.JxW(q);
                for (int ci = 0; ci < nc; ++ci)
                    for (int di = 0; di < nc; ++di) {
                        const double su = jd.source_u[ci][di];
                        const Vec2 sg = jd.source_grad[ci][di];
                        const Vec2 fu = jd.flux_u[ci][di];
                        const Mat2 fgt = jd.flux_grad[ci][di].transpose();
                        if (su == 0.0 && sg == Vec2{} && fu == Vec2{} && fgt.a11 == 0.0 && fgt.a12 == 0.0 &&
                            fgt.a21 == 0.0 && fgt.a22 == 0.0)
                            continue;
                        for (int k = 0; k < ns; ++k) {
                            const double phik = sc.cv.shape(k, q);
                            const Vec2& gk = sc.cv.grad(k, q);
                            const double alpha = w * (su * phik + dot(fu, gk));
                            const Vec2 beta = w * (phik * sg + fgt * gk);
                            double* row = &sc.local[static_cast<std::size_t>((k * nc + ci) * nd + di)];
                            for (int l = 0; l < ns; ++l)
                                row[l * nc] += alpha * sc.cv.shape(l, q) + dot(beta, sc.cv.grad(l, q));
                        }
                    }
            }
            check_finite(sc.local);
            s.cell_dofs(c, sc.dofs);
            for (int i = 0; i < nd; ++i)
                cs.for_each_target(sc.dofs[i], [&](int ti, double wi) {
                    for (int j = 0; j < nd; ++j) {
                        const double v = wi * sc.local[static_cast<std::size_t>(i * nd + j)];
                        if (v == 0.0) continue;
                        cs.for_each_target(sc.dofs[j], [&](int tj, double wj) { a.add(ti, tj, v * wj); });
                    }
                });
        });

    for (int d : cs.constrained_dofs()) a.values()[a.find(d, d)] = 1.0;
    return a;
}

SparseMatrix assemble_mass(const AssemblyPlan& plan)
{
    const FeSpace& s = plan.space();
    const int nc = s.n_components();
    const ConstraintSet& cs = plan.constraints();
    SparseMatrix a = plan.pattern();
    a.set_zero();
    CellValues cv(s, QuadratureRule(s.n_quad()));
    std::vector<int> dofs;
    for (CellId c : s.mesh().active_cells()) {
        cv.reinit(c);
        s.cell_dofs(c, dofs);
        const int ns = cv.n_shape();
        for (int q = 0; q < cv.n_q(); ++q)
            for (int k = 0; k < ns; ++k)
                for (int l = 0; l < ns; ++l) {
                    const double v = cv.JxW(q) * cv.shape(k, q) * cv.shape(l, q);
                    for (int cc = 0; cc < nc; ++cc)
                        cs.for_each_target(dofs[k * nc + cc], [&](int ti, double wi) {
                            cs.for_each_target(dofs[l * nc + cc], [&](int tj, double wj) { a.add(ti, tj, wi * wj * v); });
                        });
                }
    }
    for (int d : cs.constrained_dofs()) a.values()[a.find(d, d)] = 1.0;
    return a;
}

Vector condense_vector(const std::vector<double>& raw, const ConstraintSet& constraints)
{
    Vector out(raw.size(), 0.0);
    for (std::size_t i = 0; i < raw.size(); ++i)
        constraints.for_each_target(static_cast<int>(i), [&](int t, double w) { out[t] += w * raw[i]; });
    return out;
}

namespace {

void check_same_mesh(const DiscreteFunction& a, const DiscreteFunction& b)
{
    if (a.space().mesh_ptr() != b.space().mesh_ptr()) throw MeshMismatch("functions live on different meshes");
    if (a.space().n_components() != b.space().n_components())
        throw MeshMismatch("functions have different component counts");
}

int shared_quadrature(std::initializer_list<const FeSpace*> spaces)
{
    int n = 1;
    for (const FeSpace* s : spaces) n = std::max(n, s->n_quad());
    return n;
}

// Scratch for pairings of several functions on one cell.
struct PairingScratch {
    CellValues cu;
    CellValues cw;
    CellValues cz;
    CellValues cp;
    std::vector<PointState> su;
    std::vector<PointState> sw;
    std::vector<PointState> sz;
};

double primal_density(const ProblemDefinition& problem, const PointState& u, const PointState& w, int nc, double psi,
                      const Vec2& gpsi)
{
    ResidualDensity rd;
    problem.residual(u, rd);
    double v = 0.0;
    for (int c = 0; c < nc; ++c) v += rd.source[c] * w.u[c] * psi + dot(rd.flux[c], psi * w.grad[c] + w.u[c] * gpsi);
    return -v;
}

// A'(u)(w psi, z) density.
double linearized_density(const JacobianDensity& jd, const PointState& w, const PointState& z, int nc, double psi,
                          const Vec2& gpsi)
{
    double v = 0.0;
    for (int c = 0; c < nc; ++c) {
        double src = 0.0;
        Vec2 flx{};
        for (int d = 0; d < nc; ++d) {
            const double wd = w.u[d] * psi;
            const Vec2 gwd = psi * w.grad[d] + w.u[d] * gpsi;
            src += jd.source_u[c][d] * wd + dot(jd.source_grad[c][d], gwd);
            flx += wd * jd.flux_u[c][d] + jd.flux_grad[c][d] * gwd;
        }
        v += src * z.u[c] + dot(flx, z.grad[c]);
    }
    return v;
}

}  // namespace

double weighted_primal_residual(const ProblemDefinition& problem, const DiscreteFunction& u, const DiscreteFunction& w)
{
    check_same_mesh(u, w);
    const int nq = shared_quadrature({&u.space(), &w.space()});
    CellValues cu(u.space(), QuadratureRule(nq));
    CellValues cw(w.space(), QuadratureRule(nq));
    std::vector<PointState> su, sw;
    const int nc = u.space().n_components();
    double total = 0.0;
    for (CellId c : u.space().mesh().active_cells()) {
        cu.reinit(c);
        cw.reinit(c);
        cu.function_state(u.coefficients(), su);
        cw.function_state(w.coefficients(), sw);
        for (int q = 0; q < cu.n_q(); ++q) total += cu.JxW(q) * primal_density(problem, su[q], sw[q], nc, 1.0, Vec2{});
    }
    return total;
}

double linearized_pairing(const ProblemDefinition& problem, const DiscreteFunction& u, const DiscreteFunction& w,
                          const DiscreteFunction& z)
{
    check_same_mesh(u, w);
    check_same_mesh(u, z);
    const int nq = shared_quadrature({&u.space(), &w.space(), &z.space()});
    CellValues cu(u.space(), QuadratureRule(nq));
    CellValues cw(w.space(), QuadratureRule(nq));
    CellValues cz(z.space(), QuadratureRule(nq));
    std::vector<PointState> su, sw, sz;
    const int nc = u.space().n_components();
    JacobianDensity jd;
    double total = 0.0;
    for (CellId c : u.space().mesh().active_cells()) {
        cu.reinit(c);
        cw.reinit(c);
        cz.reinit(c);
        cu.function_state(u.coefficients(), su);
        cw.function_state(w.coefficients(), sw);
        cz.function_state(z.coefficients(), sz);
        for (int q = 0; q < cu.n_q(); ++q) {
            problem.jacobian(su[q], jd);
            total += cu.JxW(q) * linearized_density(jd, sw[q], sz[q], nc, 1.0, Vec2{});
        }
    }
    return total;
}

void fold_hanging(const FeSpace& pu, Vector& nodal)
{
    const ConstraintSet& hc = pu.hanging_constraints();
    for (int d : hc.constrained_dofs()) {
        const double v = nodal[d];
        for (const auto& [m, w] : hc.line(d).entries) nodal[m] += w * v;
        nodal[d] = 0.0;
    }
}

namespace {

template <typename Density>
Vector pu_loop(const DiscreteFunction& u, const DiscreteFunction& w, const DiscreteFunction* z, const FeSpace& pu,
               Execution exec, Density&& density)
{
    if (pu.degree() != 1 || pu.n_components() != 1) throw std::invalid_argument("partition of unity must be scalar Q1");
    if (pu.mesh_ptr() != u.space().mesh_ptr()) throw MeshMismatch("partition of unity on a different mesh");
    const DiscreteFunction& zz = z ? *z : u;
    const int nq = shared_quadrature({&u.space(), &w.space(), &zz.space()});
    const Mesh& mesh = u.space().mesh();
    Vector nodal(static_cast<std::size_t>(pu.n_nodes()), 0.0);

    std::vector<std::vector<CellId>> colors;
    if (exec == Execution::Parallel) {
        colors = color_cells(mesh.active_cells(), pu.n_nodes(), [&](CellId c, std::vector<int>& out) {
            const auto nodes = pu.cell_nodes(c);
            out.assign(nodes.begin(), nodes.end());
        });
    }
    run_cells(
        mesh.active_cells(), colors, exec,
        [&] {
            const QuadratureRule rule(nq);
            return PairingScratch{CellValues(u.space(), rule), CellValues(w.space(), rule), CellValues(zz.space(), rule),
                                  CellValues(pu, rule), {}, {}, {}};
        },
        [&](PairingScratch& sc, CellId c) {
            sc.cu.reinit(c);
            sc.cw.reinit(c);
            sc.cp.reinit(c);
            sc.cu.function_state(u.coefficients(), sc.su);
            sc.cw.function_state(w.coefficients(), sc.sw);
            if (z) {
                sc.cz.reinit(c);
                sc.cz.function_state(z->coefficients(), sc.sz);
            }
            const auto nodes = pu.cell_nodes(c);
            std::array<double, 4> acc{};
            std::array<double, 4> val{};
            for (int q = 0; q < sc.cu.n_q(); ++q) {
                density(sc, q, val);
                const double jxw = sc.cu.JxW(q);
                for (int a = 0; a < 4; ++a) acc[a] += jxw * val[a];
            }
            for (int a = 0; a < 4; ++a) nodal[nodes[a]] += acc[a];
        });
    fold_hanging(pu, nodal);
    return nodal;
}

}  // namespace

Vector weighted_primal_residual_pu(const ProblemDefinition& problem, const DiscreteFunction& u,
                                   const DiscreteFunction& w, const FeSpace& pu, Execution exec)
{
    check_same_mesh(u, w);
    const int nc = u.space().n_components();
    return pu_loop(u, w, nullptr, pu, exec, [&](PairingScratch& sc, int q, std::array<double, 4>& out) {
        ResidualDensity rd;
        problem.residual(sc.su[q], rd);
        const PointState& ws = sc.sw[q];
        for (int a = 0; a < 4; ++a) {
            const double psi = sc.cp.shape(a, q);
            const Vec2& gpsi = sc.cp.grad(a, q);
            double v = 0.0;
            for (int c = 0; c < nc; ++c)
                v += rd.source[c] * ws.u[c] * psi + dot(rd.flux[c], psi * ws.grad[c] + ws.u[c] * gpsi);
            out[a] = -v;
        }
    });
}

Vector linearized_pairing_pu(const ProblemDefinition& problem, const DiscreteFunction& u, const DiscreteFunction& w,
                             const DiscreteFunction& z, const FeSpace& pu, Execution exec)
{
    check_same_mesh(u, w);
    check_same_mesh(u, z);
    const int nc = u.space().n_components();
    return pu_loop(u, w, &z, pu, exec, [&](PairingScratch& sc, int q, std::array<double, 4>& out) {
        JacobianDensity jd;
        problem.jacobian(sc.su[q], jd);
        for (int a = 0; a < 4; ++a)
            out[a] = linearized_density(jd, sc.sw[q], sc.sz[q], nc, sc.cp.shape(a, q), sc.cp.grad(a, q));
    });
}

}  // namespace mgdwr
