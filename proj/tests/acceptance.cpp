// Acceptance suite: one line per criterion, pinned tolerances, nonzero exit on
// any failure.  Each criterion exercises the public pipeline end to end.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <sglab/sglab.hpp>

#include "oracles.hpp"

using namespace sglab;

namespace {

struct Checker {
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& what)
    {
        if (!cond) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<void(Checker&)>& body)
{
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d: %s (%.1f s)%s%s\n", c.ok ? "PASS" : "FAIL", id, name.c_str(),
                secs, c.detail.empty() ? "" : " -- ", c.detail.c_str());
    std::fflush(stdout);
    if (!c.ok) ++failures;
}

std::string num(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

} // namespace

int main()
{
    // 1. Quantization classifier exactness over the whole desk-scale set.
    criterion(1, "quantization classifier exactness (m <= 50, both orientations)", [](Checker& c) {
        for (int m = 0; m <= 50; ++m)
            for (char o : {'A', 'B'}) {
                const auto [t1, t2] = quantization_target(m, o);
                const auto match = classify_quantization(t1, t2, 50);
                c.expect(match.distance == 0.0,
                         "distance nonzero at m=" + std::to_string(m) + std::string(1, o));
                c.expect(pohozaev_consistency(t1, t2) <= 1e-9,
                         "consistency above 1e-9 at m=" + std::to_string(m));
            }
    });

    // 2. Single-bubble mass quantization on the pinned 256 x 256 grid.
    criterion(2, "single-bubble mass quantization (lambda = 200, 256x256)", [](Checker& c) {
        auto g = build_grid(256, 256, 1.0, 1.05);
        const double lambda = 200.0;
        auto u = synth_family({{{{0.0, 0.0}, lambda, +1, 1.0}}, 0.0}, g);
        const auto pair = one_signed_pair([](Vec2) { return 1.0; });
        const auto sel = select_bubbles(u, pair, 3.0, 8);
        c.expect(sel.disks.size() == 1,
                 "expected 1 disk, found " + std::to_string(sel.disks.size()));
        if (sel.disks.size() != 1) return;
        const auto& d = sel.disks[0];
        const auto rep = pohozaev_report(u, pair, d.center, d.l);
        c.expect(std::abs(rep.sigma1 - 4.0) <= 0.05,
                 "sigma1 = " + num(rep.sigma1) + " not within 0.05 of 4");
        c.expect(std::abs(rep.sigma2) <= 0.05, "sigma2 = " + num(rep.sigma2));
        c.expect(rep.residual_identity <= 0.1,
                 "identity residual " + num(rep.residual_identity) + " > 0.1");
        c.expect(rep.valid, "validity flag false");
        const auto match = classify_quantization(rep.sigma1, rep.sigma2, 50);
        c.expect(match.m == 1 && match.orientation == 'A', "match not m=1/A");
        c.expect(match.distance <= 0.05, "match distance " + num(match.distance) + " > 0.05");
    });

    // 3. Derivative identity for the radial solver output on 256 x 256.
    criterion(3, "derivative identity at r = 0.25, 0.5, 0.75 (256x256)", [](Checker& c) {
        auto g = build_grid(256, 256, 1.0, 1.0);
        MeanFieldProblem prob{g, [](Vec2) { return 1.0; }, [](Vec2) { return 1.0; }, 1.0, 0.0, 0.0};
        auto guess = Field::sample(g, [](Vec2) { return 0.0; });
        auto [sol, rep] = solve_mean_field(prob, guess);
        c.expect(rep.converged, "solver did not converge");
        const auto samples = derivative_identity(prob, sol, {0.25, 0.5, 0.75});
        for (const auto& s : samples) {
            const double rel = s.residual / std::abs(s.dudr);
            c.expect(rel <= 1e-5, "relative residual " + num(rel) + " at r=" + num(s.r));
        }
    });

    // 4. Radial oracle equivalence at (1, 0) and (3, 0).
    criterion(4, "radial shooting oracle equivalence (rho1 = 1 and 3)", [](Checker& c) {
        auto g = build_grid(256, 16, 1.0, 1.0);
        for (double rho1 : {1.0, 3.0}) {
            MeanFieldProblem prob{g, [](Vec2) { return 1.0; }, [](Vec2) { return 1.0; },
                                  rho1, 0.0, 0.0};
            auto guess = Field::sample(g, [](Vec2) { return 0.0; });
            auto [sol, rep] = solve_mean_field(prob, guess);
            c.expect(rep.converged, "no convergence at rho1=" + num(rho1));
            const auto shot = oracles::shoot_radial(rho1);
            const double e0 = std::abs(rep.center_value - shot.u0) / std::abs(shot.u0);
            const double es = std::abs(rep.sup_norm - shot.sup_norm) / std::abs(shot.sup_norm);
            c.expect(e0 <= 1e-5, "u(0) relative error " + num(e0) + " at rho1=" + num(rho1));
            c.expect(es <= 1e-5, "sup relative error " + num(es) + " at rho1=" + num(rho1));
        }
    });

    // 5. Selection-process recovery and grouping.  Equilateral (+, -, +) at
    // separation 0.5; the background recenters the superposition's bulk and the
    // threshold clears the cross-tail lift at the middle bubble (log 2 + tail).
    criterion(5, "selection recovery (3 bubbles) and group partition", [](Checker& c) {
        auto g = build_grid(1280, 2048, 1.0, 1.0);
        const double lam = 200.0, side = 0.5;
        const double tail = std::abs(oracles::bubble_profile(lam, 1.0, side));
        SyntheticFamily fam;
        fam.bubbles = {{{-0.25, -0.1443}, lam, +1, 1.0},
                       {{0.25, -0.1443}, lam, -1, 1.0},
                       {{0.00, 0.2887}, lam, +1, 1.0}};
        fam.background = tail;
        auto u = synth_family(fam, g);
        const auto sel = select_bubbles(u, constant_pair(1.0, 1.0), tail + 2.0, 8);
        c.expect(sel.disks.size() == 3,
                 "expected 3 disks, found " + std::to_string(sel.disks.size()));
        if (sel.disks.size() == 3) {
            for (const auto& b : fam.bubbles) {
                int nearest = 0;
                for (int k = 1; k < 3; ++k)
                    if (dist(sel.disks[k].center, b.center) <
                        dist(sel.disks[nearest].center, b.center))
                        nearest = k;
                const auto& d = sel.disks[nearest];
                c.expect(dist(d.center, b.center) <= 2.0 * g->cell_size(b.center),
                         "center off by " + num(dist(d.center, b.center)));
                c.expect(d.sign == b.sign, "sign mismatch");
                c.expect(d.fit_quality <= 0.05, "fit_quality " + num(d.fit_quality) + " > 0.05");
            }
            for (int a = 0; a < 3; ++a)
                for (int b = a + 1; b < 3; ++b)
                    c.expect(sel.disks[a].l + sel.disks[b].l <=
                                 dist(sel.disks[a].center, sel.disks[b].center),
                             "disks overlap");
        }
        // grouping: the three recovered disks shrunk to a tight cluster plus a
        // fourth far disk at distance ratio >= 50
        std::vector<BubbleDisk> cluster;
        for (int k = 0; k < static_cast<int>(sel.disks.size()); ++k) {
            BubbleDisk d = sel.disks[k];
            d.center = {0.01 * d.center.x, 0.01 * d.center.y};
            cluster.push_back(d);
        }
        BubbleDisk far;
        far.center = {0.6, 0.0};
        far.l = 1e-3;
        far.eps = 1e-4;
        far.peak = 18.0;
        cluster.push_back(far);
        const auto groups = group_bubbles(cluster, 3.0, 10.0);
        c.expect(groups.size() == 2,
                 "expected 2 groups, got " + std::to_string(groups.size()));
        if (groups.size() == 2) {
            std::size_t a = groups[0].member_indices.size(), b = groups[1].member_indices.size();
            c.expect((a == 3 && b == 1) || (a == 1 && b == 3), "partition is not 3+1");
        }
    });

    // 6. Swap symmetry of the solver.
    criterion(6, "swap symmetry of solutions (2,1,P,Q) vs (1,2,Q,P)", [](Checker& c) {
        auto g = build_grid(96, 64, 1.0, 1.0);
        const Sampler P = parse_preset("gauss:0.5,0.3,0.0,0.4");
        const Sampler Q = parse_preset("linear:1,0.3");
        SolverOptions opt;
        opt.tol = 1e-10;
        MeanFieldProblem fwd{g, P, Q, 2.0, 1.0, 0.0};
        auto guess = Field::sample(g, [](Vec2) { return 0.0; });
        auto [uf, rf] = solve_mean_field(fwd, guess, opt);
        MeanFieldProblem swp{g, Q, P, 1.0, 2.0, 0.0};
        auto [ub, rb] = solve_mean_field(swp, uf.negated(), opt);
        c.expect(rf.converged && rb.converged, "solver did not converge");
        double worst = std::abs(ub.center_value() + uf.center_value());
        for (std::size_t k = 0; k < uf.values().size(); ++k)
            worst = std::max(worst, std::abs(ub.values()[k] + uf.values()[k]));
        c.expect(worst <= 1e-9, "node-wise mismatch " + num(worst) + " > 1e-9");
    });

    // 7. Compactness probe: bounded sweep, then concentration toward 8 pi.
    criterion(7, "compactness probe (rho1 -> 7 bounded; concentration toward 24)", [](Checker& c) {
        auto g = build_grid(128, 16, 1.0, 1.0);
        MeanFieldProblem prob{g, [](Vec2) { return 1.0; }, [](Vec2) { return 1.0; }, 0.0, 0.0, 0.0};
        std::vector<std::pair<double, double>> path;
        for (int k = 1; k <= 14; ++k) path.emplace_back(0.5 * k, 0.0);
        const auto steps = continuation(prob, path);
        c.expect(steps.size() == path.size(), "sweep stalled");
        double prev = 0.0;
        for (const auto& st : steps) {
            c.expect(st.report.converged, "step failed at rho1=" + num(st.report.rho1));
            c.expect(st.report.sup_norm <= 5.0, "sup_norm " + num(st.report.sup_norm) + " > 5");
            c.expect(st.report.sup_norm > prev, "sup_norm not strictly increasing");
            prev = st.report.sup_norm;
        }

        ContinuationOptions copt;
        copt.solver.mass_radii = {0.1, 1.0};
        std::vector<std::pair<double, double>> path2;
        for (int k = 1; k <= 24; ++k) path2.emplace_back(1.0 * k, 0.0);
        const auto steps2 = continuation(prob, path2, copt);
        c.expect(steps2.size() == path2.size(), "long sweep stalled");
        if (steps2.size() == path2.size()) {
            std::vector<double> ratio;
            for (const auto& st : steps2) {
                c.expect(st.report.converged, "step failed at rho1=" + num(st.report.rho1));
                const auto& rows = st.report.masses_at_radii;
                ratio.push_back(rows.front()[1] / rows.back()[1]);
            }
            for (std::size_t k = ratio.size() - 5; k < ratio.size(); ++k)
                c.expect(ratio[k] > ratio[k - 1],
                         "concentration ratio not increasing at step " + std::to_string(k));
        }
    });

    // 8. Quadrature / Green / residual-order suite.
    criterion(8, "quadrature, Green's function and residual order", [](Checker& c) {
        auto g = build_grid(128, 64, 1.0);
        const double area = area_integral(*g, [](Vec2) { return 1.0; });
        c.expect(std::abs(area - M_PI) <= 1e-10, "area error " + num(std::abs(area - M_PI)));

        std::mt19937 rng(11);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int k = 0; k < 100; ++k) {
            const double re = 0.95 * std::sqrt(uni(rng)), te = 2.0 * M_PI * uni(rng);
            const double tb = 2.0 * M_PI * uni(rng);
            const Vec2 eta{re * std::cos(te), re * std::sin(te)};
            const Vec2 xb{std::cos(tb), std::sin(tb)};
            c.expect(std::abs(green_function(xb, eta, 1.0)) <= 1e-12, "boundary value nonzero");
            const double r2 = 0.95 * std::sqrt(uni(rng)), t2 = 2.0 * M_PI * uni(rng);
            const Vec2 x2{r2 * std::cos(t2), r2 * std::sin(t2)};
            if (dist(x2, eta) > 1e-8)
                c.expect(std::abs(green_function(x2, eta, 1.0) - green_function(eta, x2, 1.0)) <=
                             1e-12,
                         "symmetry violated");
        }

        const auto pair = one_signed_pair([](Vec2) { return 1.0; });
        std::vector<double> errs;
        for (int n : {64, 128, 256}) {
            auto gg = build_grid(n, n, 1.0, 1.05);
            auto u = bubble_field({{0.0, 0.0}, 10.0, +1, 1.0}, gg);
            const auto res = pde_residual(u, pair);
            double m = std::abs(res.center_value());
            for (int i = 0; i + 1 < gg->n_r; ++i)
                for (int j = 0; j < gg->n_theta; ++j)
                    m = std::max(m, std::abs(res.values()[gg->index(i, j)]));
            errs.push_back(m);
        }
        const double order1 = std::log2(errs[0] / errs[1]);
        const double order2 = std::log2(errs[1] / errs[2]);
        c.expect(order1 >= 1.8, "order(64->128) = " + num(order1) + " < 1.8");
        c.expect(order2 >= 1.8, "order(128->256) = " + num(order2) + " < 1.8");
    });

    std::printf("%d of 8 criteria passed\n", 8 - failures);
    return failures == 0 ? 0 : 1;
}
