#ifndef SGLAB_SOLVER_HPP
#define SGLAB_SOLVER_HPP

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "coefficients.hpp"
#include "field.hpp"
#include "grid.hpp"
#include "operators.hpp"

namespace sglab {

/// The normalized two-parameter Dirichlet problem on the disk:
///   Delta u + rho1 H1 e^u / int(H1 e^u) - rho2 H2 e^{-u} / int(H2 e^{-u}) = 0,
///   u = 0 on the boundary circle.
struct MeanFieldProblem {
    std::shared_ptr<const DiskGrid> grid;
    Sampler H1;
    Sampler H2;
    double rho1 = 0.0;
    double rho2 = 0.0;
    double bc = 0.0;   ///< Dirichlet boundary value (0 throughout)
};

struct SolveReport {
    double rho1 = 0.0, rho2 = 0.0;
    bool converged = false;
    int newton_iters = 0;
    double final_residual_norm = 0.0;   ///< sup norm of the discrete residual
    double sup_norm = 0.0;              ///< max |u|
    double center_value = 0.0;
    bool blowup_flag = false;           ///< sup_norm exceeded the diagnostic threshold
    std::vector<std::array<double, 3>> masses_at_radii;   ///< rows (r, sigma1, sigma2)
};

struct SolverOptions {
    double tol = 1e-10;                 ///< sup-norm residual tolerance
    int max_iters = 40;
    int max_line_search = 20;
    double blowup_threshold = 12.0;     ///< diagnostic label only, not a claim
    std::vector<double> mass_radii = {0.1, 0.25, 0.5, 0.75, 1.0};
};

namespace detail {

struct MeanFieldWork {
    const DiskGrid* g = nullptr;
    int nr = 0, nt = 0, N = 0;
    std::vector<double> H1n, H2n;        // coefficients at unknown nodes (center first)
    std::vector<double> H1b, H2b;        // at the boundary ring
    std::vector<double> wq;              // quadrature weights at unknown nodes
    std::vector<double> wqb;             // at boundary ring nodes
    double rho1 = 0.0, rho2 = 0.0, bc = 0.0;

    int idx(int i, int j) const { return 1 + i * nt + j; }

    void init(const MeanFieldProblem& p)
    {
        g = p.grid.get();
        nr = g->n_r;
        nt = g->n_theta;
        N = 1 + (nr - 1) * nt;
        rho1 = p.rho1;
        rho2 = p.rho2;
        bc = p.bc;
        H1n.resize(N);
        H2n.resize(N);
        wq.resize(N);
        H1n[0] = p.H1({0.0, 0.0});
        H2n[0] = p.H2({0.0, 0.0});
        wq[0] = g->center_quad_weight;
        for (int i = 0; i + 1 < nr; ++i)
            for (int j = 0; j < nt; ++j) {
                const Vec2 x = g->node(i, j);
                H1n[idx(i, j)] = p.H1(x);
                H2n[idx(i, j)] = p.H2(x);
                wq[idx(i, j)] = g->quad_weights[i];
            }
        H1b.resize(nt);
        H2b.resize(nt);
        wqb.assign(nt, g->quad_weights[nr - 1]);
        for (int j = 0; j < nt; ++j) {
            const Vec2 x = g->node(nr - 1, j);
            H1b[j] = p.H1(x);
            H2b[j] = p.H2(x);
        }
    }

    // normalization integrals over the whole disk (boundary ring at u = bc)
    std::pair<double, double> integrals(const Eigen::VectorXd& u) const
    {
        double I1 = 0.0, I2 = 0.0;
        for (int k = 0; k < N; ++k) {
            I1 += wq[k] * H1n[k] * std::exp(u[k]);
            I2 += wq[k] * H2n[k] * std::exp(-u[k]);
        }
        for (int j = 0; j < nt; ++j) {
            I1 += wqb[j] * H1b[j] * std::exp(bc);
            I2 += wqb[j] * H2b[j] * std::exp(-bc);
        }
        return {I1, I2};
    }

    // residual F(u); also returns the two normalization integrals
    Eigen::VectorXd residual(const Eigen::VectorXd& u, double& I1, double& I2) const
    {
        auto [a, b] = integrals(u);
        I1 = a;
        I2 = b;
        Eigen::VectorXd F(N);
        const double r0 = g->radial_nodes[0];
        double diff0 = 0.0;
        for (int j = 0; j < nt; ++j) diff0 += u[idx(0, j)] - u[0];
        diff0 /= nt;
        F[0] = 4.0 * diff0 / (r0 * r0) + nonlin(0, u[0], I1, I2);
        for (int i = 0; i + 1 < nr; ++i) {
            const double ii = g->fv_interfaces[i];
            const double io = g->fv_interfaces[i + 1];
            const double area = 0.5 * (io * io - ii * ii);
            const double hm = (i == 0) ? r0 : g->radial_nodes[i] - g->radial_nodes[i - 1];
            const double hp = g->radial_nodes[i + 1] - g->radial_nodes[i];
            const double angf = (io - ii) / (g->radial_nodes[i] * g->dtheta * g->dtheta);
            for (int j = 0; j < nt; ++j) {
                const double uc = u[idx(i, j)];
                const double um = (i == 0) ? u[0] : u[idx(i - 1, j)];
                const double up = (i + 2 < nr) ? u[idx(i + 1, j)] : bc;
                const double jp = u[idx(i, (j + 1) % nt)];
                const double jm = u[idx(i, (j + nt - 1) % nt)];
                const double lap = (io * (up - uc) / hp - ii * (uc - um) / hm +
                                    angf * (jp - 2.0 * uc + jm)) / area;
                F[idx(i, j)] = lap + nonlin(idx(i, j), uc, I1, I2);
            }
        }
        return F;
    }

    double nonlin(int k, double uval, double I1, double I2) const
    {
        double f = 0.0;
        if (rho1 > 0.0) f += rho1 * H1n[k] * std::exp(uval) / I1;
        if (rho2 > 0.0) f -= rho2 * H2n[k] * std::exp(-uval) / I2;
        return f;
    }

    // sparse part of the Jacobian (Laplacian + diagonal of the local terms)
    Eigen::SparseMatrix<double> sparse_jacobian(const Eigen::VectorXd& u, double I1, double I2) const
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(N) * 6);
        const double r0 = g->radial_nodes[0];
        auto diag_nl = [&](int k, double uval) {
            double d = 0.0;
            if (rho1 > 0.0) d += rho1 * H1n[k] * std::exp(uval) / I1;
            if (rho2 > 0.0) d += rho2 * H2n[k] * std::exp(-uval) / I2;
            return d;
        };
        trip.emplace_back(0, 0, -4.0 / (r0 * r0) + diag_nl(0, u[0]));
        for (int j = 0; j < nt; ++j)
            trip.emplace_back(0, idx(0, j), 4.0 / (r0 * r0) / nt);
        for (int i = 0; i + 1 < nr; ++i) {
            const double ii = g->fv_interfaces[i];
            const double io = g->fv_interfaces[i + 1];
            const double area = 0.5 * (io * io - ii * ii);
            const double hm = (i == 0) ? r0 : g->radial_nodes[i] - g->radial_nodes[i - 1];
            const double hp = g->radial_nodes[i + 1] - g->radial_nodes[i];
            const double angf = (io - ii) / (g->radial_nodes[i] * g->dtheta * g->dtheta) / area;
            const double cm = ii / hm / area, cp = io / hp / area;
            for (int j = 0; j < nt; ++j) {
                const int row = idx(i, j);
                trip.emplace_back(row, row, -cm - cp - 2.0 * angf + diag_nl(row, u[row]));
                trip.emplace_back(row, (i == 0) ? 0 : idx(i - 1, j), cm);
                if (i + 2 < nr) trip.emplace_back(row, idx(i + 1, j), cp);
                trip.emplace_back(row, idx(i, (j + 1) % nt), angf);
                trip.emplace_back(row, idx(i, (j + nt - 1) % nt), angf);
            }
        }
        Eigen::SparseMatrix<double> A(N, N);
        A.setFromTriplets(trip.begin(), trip.end());
        return A;
    }
};

} // namespace detail

/// Newton solve of the mean-field problem.  The linearization carries the two
/// rank-one terms from the normalization denominators (a plain frozen-denominator
/// iteration stalls near blow-up); they are applied by the Woodbury correction on
/// top of a sparse LU of the local part.  Backtracking line search on the
/// residual 2-norm, factor 0.5.
inline std::pair<Field, SolveReport> solve_mean_field(const MeanFieldProblem& problem,
                                                      const Field& initial_guess,
                                                      const SolverOptions& opt = {})
{
    if (!(opt.tol > 0.0))
        throw std::invalid_argument("solve_mean_field: tol must be positive");
    if (problem.rho1 < 0.0 || problem.rho2 < 0.0)
        throw std::invalid_argument("solve_mean_field: rho parameters must be non-negative");
    if (initial_guess.grid_ptr().get() != problem.grid.get())
        throw std::invalid_argument("solve_mean_field: initial guess not on the problem grid");

    detail::MeanFieldWork w;
    w.init(problem);
    const int N = w.N;

    Eigen::VectorXd u(N);
    u[0] = initial_guess.center_value();
    for (int i = 0; i + 1 < w.nr; ++i)
        for (int j = 0; j < w.nt; ++j)
            u[w.idx(i, j)] = initial_guess.at(i, j);

    SolveReport rep;
    rep.rho1 = problem.rho1;
    rep.rho2 = problem.rho2;

    double I1 = 0.0, I2 = 0.0;
    Eigen::VectorXd F = w.residual(u, I1, I2);
    double fnorm2 = F.norm();
    int it = 0;
    for (; it < opt.max_iters; ++it) {
        if (F.lpNorm<Eigen::Infinity>() <= opt.tol) break;

        Eigen::SparseMatrix<double> A = w.sparse_jacobian(u, I1, I2);
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(A);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("solve_mean_field: sparse factorization failed");

        // J = A - c1 r1 s1^T - c2 r2 s2^T (Woodbury with k = 2)
        Eigen::MatrixXd U(N, 2), V(N, 2);
        for (int k = 0; k < N; ++k) {
            const double e1 = w.H1n[k] * std::exp(u[k]);
            const double e2 = w.H2n[k] * std::exp(-u[k]);
            U(k, 0) = (w.rho1 > 0.0) ? w.rho1 / (I1 * I1) * e1 : 0.0;
            V(k, 0) = w.wq[k] * e1;
            U(k, 1) = (w.rho2 > 0.0) ? w.rho2 / (I2 * I2) * e2 : 0.0;
            V(k, 1) = w.wq[k] * e2;
        }
        Eigen::VectorXd x0 = lu.solve(-F);
        Eigen::MatrixXd Y = lu.solve(U);
        Eigen::Matrix2d S = Eigen::Matrix2d::Identity() - V.transpose() * Y;
        Eigen::Vector2d rhs = V.transpose() * x0;
        Eigen::Vector2d z = S.fullPivLu().solve(rhs);
        Eigen::VectorXd step = x0 + Y * z;
        if (!step.allFinite())
            throw std::runtime_error("solve_mean_field: linear solve produced non-finite step");

        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < opt.max_line_search; ++ls) {
            Eigen::VectorXd ut = u + t * step;
            if (ut.lpNorm<Eigen::Infinity>() < 200.0) {
                double J1 = 0.0, J2 = 0.0;
                Eigen::VectorXd Ft = w.residual(ut, J1, J2);
                if (Ft.allFinite() && Ft.norm() < fnorm2) {
                    u = std::move(ut);
                    F = std::move(Ft);
                    I1 = J1;
                    I2 = J2;
                    fnorm2 = F.norm();
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if (!accepted) {
            ++it;
            break;   // stalled; report as non-converged unless already at tol
        }
    }

    rep.newton_iters = it;
    rep.final_residual_norm = F.lpNorm<Eigen::Infinity>();
    rep.converged = rep.final_residual_norm <= opt.tol;
    rep.sup_norm = u.lpNorm<Eigen::Infinity>();
    rep.center_value = u[0];
    rep.blowup_flag = rep.sup_norm > opt.blowup_threshold;

    std::vector<double> vals(problem.grid->node_count(), problem.bc);
    for (int i = 0; i + 1 < w.nr; ++i)
        for (int j = 0; j < w.nt; ++j)
            vals[problem.grid->index(i, j)] = u[w.idx(i, j)];
    Field sol(problem.grid, std::move(vals), u[0],
              "mean_field(rho1=" + std::to_string(problem.rho1) +
                  ",rho2=" + std::to_string(problem.rho2) + ")");

    // masses of the normalized nonlinearities, conservative-cell cumulative
    auto f1 = [&](int i, int j) {
        const int k = (i < 0) ? 0 : w.idx(i, j);
        if (i + 1 >= w.nr && i >= 0)
            return (w.rho1 > 0.0) ? w.rho1 * w.H1b[j] * std::exp(problem.bc) / I1 : 0.0;
        return (w.rho1 > 0.0) ? w.rho1 * w.H1n[k] * std::exp(u[k]) / I1 : 0.0;
    };
    auto f2 = [&](int i, int j) {
        const int k = (i < 0) ? 0 : w.idx(i, j);
        if (i + 1 >= w.nr && i >= 0)
            return (w.rho2 > 0.0) ? w.rho2 * w.H2b[j] * std::exp(-problem.bc) / I2 : 0.0;
        return (w.rho2 > 0.0) ? w.rho2 * w.H2n[k] * std::exp(-u[k]) / I2 : 0.0;
    };
    const auto cum = fv_cumulative_masses(*problem.grid, f1, f2);
    for (double r : opt.mass_radii) {
        int best = problem.grid->n_r - 1;
        double bestd = std::abs(problem.grid->fv_interfaces[problem.grid->n_r] - r);
        for (int i = 0; i + 1 < problem.grid->n_r; ++i) {
            const double d = std::abs(problem.grid->fv_interfaces[i + 1] - r);
            if (d < bestd) { bestd = d; best = i; }
        }
        rep.masses_at_radii.push_back({problem.grid->fv_interfaces[best + 1] == problem.grid->radius
                                           ? problem.grid->radius
                                           : problem.grid->fv_interfaces[best + 1],
                                       cum.cum1[best], cum.cum2[best]});
    }
    return {std::move(sol), rep};
}

/// Discrete derivative identity d/dr u_bar = (sigma2 - sigma1)/r for a solver
/// output, evaluated at the flux interface nearest each requested radius with
/// the normalized nonlinearities as densities.  Exact up to the solve residual.
inline std::vector<FluxIdentitySample> derivative_identity(const MeanFieldProblem& problem,
                                                           const Field& solution,
                                                           const std::vector<double>& radii)
{
    detail::MeanFieldWork w;
    w.init(problem);
    Eigen::VectorXd u(w.N);
    u[0] = solution.center_value();
    for (int i = 0; i + 1 < w.nr; ++i)
        for (int j = 0; j < w.nt; ++j)
            u[w.idx(i, j)] = solution.at(i, j);
    double I1 = 0.0, I2 = 0.0;
    w.residual(u, I1, I2);
    auto f1 = [&](int i, int j) {
        if (w.rho1 <= 0.0) return 0.0;
        if (i < 0) return w.rho1 * w.H1n[0] * std::exp(u[0]) / I1;
        if (i + 1 >= w.nr) return w.rho1 * w.H1b[j] * std::exp(problem.bc) / I1;
        return w.rho1 * w.H1n[w.idx(i, j)] * std::exp(u[w.idx(i, j)]) / I1;
    };
    auto f2 = [&](int i, int j) {
        if (w.rho2 <= 0.0) return 0.0;
        if (i < 0) return w.rho2 * w.H2n[0] * std::exp(-u[0]) / I2;
        if (i + 1 >= w.nr) return w.rho2 * w.H2b[j] * std::exp(-problem.bc) / I2;
        return w.rho2 * w.H2n[w.idx(i, j)] * std::exp(-u[w.idx(i, j)]) / I2;
    };
    std::vector<FluxIdentitySample> out;
    out.reserve(radii.size());
    for (double r : radii)
        out.push_back(flux_identity_at(solution, r, f1, f2));
    return out;
}

struct ContinuationOptions {
    SolverOptions solver;
    int max_bisections = 8;
    bool log_cold_start = false;   ///< also run cold starts and record their iteration counts
};

struct ContinuationStep {
    SolveReport report;
    std::shared_ptr<const Field> field;   ///< null when the step failed
    int cold_start_iters = -1;            ///< only when log_cold_start
    bool failed = false;
};

/// Solves along a path of (rho1, rho2), warm-starting each step from the
/// previous solution.  A failing step is retried by bisecting the parameter
/// step up to max_bisections times; if still failing, the sweep stops and the
/// partial results carry a failure marker at the stalled step.
inline std::vector<ContinuationStep> continuation(MeanFieldProblem problem,
                                                  const std::vector<std::pair<double, double>>& path,
                                                  const ContinuationOptions& opt = {})
{
    std::vector<ContinuationStep> out;
    if (path.empty()) return out;

    auto zero = std::make_shared<Field>(
        Field::sample(problem.grid, [](Vec2) { return 0.0; }, "zero"));
    std::shared_ptr<const Field> warm = zero;
    double prev1 = 0.0, prev2 = 0.0;

    for (const auto& [t1, t2] : path) {
        // advance from (prev1, prev2) to (t1, t2), bisecting on failure
        std::shared_ptr<const Field> cur = warm;
        double c1 = prev1, c2 = prev2;
        bool stalled = false;
        SolveReport last;
        int guard = 0;
        while (true) {
            if (++guard > (1 << (opt.max_bisections + 1)))
                { stalled = true; break; }
            problem.rho1 = t1;
            problem.rho2 = t2;
            // try a direct hop first, then shrink toward (c1, c2)
            double f = 1.0;
            bool ok = false;
            for (int b = 0; b <= opt.max_bisections; ++b) {
                problem.rho1 = (f == 1.0) ? t1 : c1 + f * (t1 - c1);
                problem.rho2 = (f == 1.0) ? t2 : c2 + f * (t2 - c2);
                auto [sol, rep] = solve_mean_field(problem, *cur, opt.solver);
                if (rep.converged) {
                    cur = std::make_shared<Field>(std::move(sol));
                    c1 = problem.rho1;
                    c2 = problem.rho2;
                    last = rep;
                    ok = true;
                    break;
                }
                last = rep;
                f *= 0.5;
            }
            if (!ok) { stalled = true; break; }
            if (c1 == t1 && c2 == t2) break;
        }

        ContinuationStep step;
        step.report = last;
        step.failed = stalled;
        if (!stalled) {
            step.field = cur;
            if (opt.log_cold_start) {
                problem.rho1 = t1;
                problem.rho2 = t2;
                auto [sol, rep] = solve_mean_field(problem, *zero, opt.solver);
                step.cold_start_iters = rep.converged ? rep.newton_iters : -1;
            }
            warm = cur;
            prev1 = t1;
            prev2 = t2;
        }
        out.push_back(std::move(step));
        if (stalled) break;
    }
    return out;
}

} // namespace sglab

#endif
