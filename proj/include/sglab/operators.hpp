#ifndef SGLAB_OPERATORS_HPP
#define SGLAB_OPERATORS_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "coefficients.hpp"
#include "field.hpp"
#include "grid.hpp"

namespace sglab {

/// Natural-log ceiling for e^{|u|}; beyond this double precision overflows.
inline constexpr double kExpOverflowGuard = 700.0;

inline void check_exp_range(const Field& u)
{
    const DiskGrid& g = u.grid();
    if (std::abs(u.center_value()) > kExpOverflowGuard)
        throw std::overflow_error("pde_residual: |u| > 700 at the origin sample");
    for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j)
            if (std::abs(u.at(i, j)) > kExpOverflowGuard)
                throw std::overflow_error("pde_residual: |u| > 700 at node (ring " +
                                          std::to_string(i) + ", angle " + std::to_string(j) + ")");
}

/// Discrete Laplacian values: per-node vector plus the origin value.
struct DiscreteLaplacian {
    std::vector<double> values;
    double center = 0.0;
};

/// Conservative (flux-form) polar Laplacian.  Each cell's value is the net flux
/// through its edges divided by the cell area, which makes ring sums telescope
/// exactly (the discrete divergence theorem).  Second-order on uniform and
/// smoothly graded grids.  The outer ring uses the Dirichlet value when supplied,
/// otherwise a one-sided quadratic in r.
inline DiscreteLaplacian discrete_laplacian(const Field& u, std::optional<double> dirichlet_bc = {})
{
    const DiskGrid& g = u.grid();
    const int nr = g.n_r, nt = g.n_theta;
    DiscreteLaplacian out;
    out.values.assign(g.node_count(), 0.0);

    // origin closure: flux through the first interface circle over the center cell
    double ring0_diff = 0.0;
    for (int j = 0; j < nt; ++j) ring0_diff += u.at(0, j) - u.center_value();
    ring0_diff /= nt;
    const double r0 = g.radial_nodes[0];
    out.center = 4.0 * ring0_diff / (r0 * r0);

    for (int i = 0; i < nr; ++i) {
        const double ri = g.radial_nodes[i];
        const double ii = g.fv_interfaces[i];
        const double io = g.fv_interfaces[i + 1];
        const double area = 0.5 * (io * io - ii * ii);   // per radian
        // angular flux factor: exact for the r-linear angular modes that
        // dominate near the origin (u_theta vanishes like r there)
        const double angf = (io - ii) / (g.radial_nodes[i] * g.dtheta * g.dtheta);
        const double hm = (i == 0) ? r0 : ri - g.radial_nodes[i - 1];
        if (i < nr - 1) {
            const double hp = g.radial_nodes[i + 1] - ri;
            for (int j = 0; j < nt; ++j) {
                const double um = (i == 0) ? u.center_value() : u.at(i - 1, j);
                const double rad = io * (u.at(i + 1, j) - u.at(i, j)) / hp -
                                   ii * (u.at(i, j) - um) / hm;
                const double jp = u.at(i, (j + 1) % nt), jm = u.at(i, (j + nt - 1) % nt);
                const double ang = (jp - 2.0 * u.at(i, j) + jm) * angf;
                out.values[g.index(i, j)] = (rad + ang) / area;
            }
        } else if (dirichlet_bc) {
            // ghost value at radius R + hm, equal to the boundary value (the node
            // itself sits at R where u = bc; residual there measures bc mismatch)
            for (int j = 0; j < nt; ++j) {
                const double um = u.at(i - 1, j);
                const double rad = io * (*dirichlet_bc - u.at(i, j)) / hm -
                                   ii * (u.at(i, j) - um) / hm;
                const double jp = u.at(i, (j + 1) % nt), jm = u.at(i, (j + nt - 1) % nt);
                const double ang = (jp - 2.0 * u.at(i, j) + jm) * angf;
                out.values[g.index(i, j)] = (rad + ang) / area;
            }
        } else {
            // one-sided: quadratic through the last three rings in Newton form,
            // so constants and linears are annihilated exactly
            const double r1 = g.radial_nodes[nr - 3], r2 = g.radial_nodes[nr - 2], r3 = ri;
            const double d21 = r2 - r1, d32 = r3 - r2, d31 = r3 - r1;
            for (int j = 0; j < nt; ++j) {
                const double u1 = u.at(nr - 3, j), u2 = u.at(nr - 2, j), u3 = u.at(i, j);
                const double dd1 = (u2 - u1) / d21, dd2 = (u3 - u2) / d32;
                const double dd12 = (dd2 - dd1) / d31;
                const double urr = 2.0 * dd12;
                const double ur = dd2 + dd12 * d32;
                const double jp = u.at(i, (j + 1) % nt), jm = u.at(i, (j + nt - 1) % nt);
                const double utt = (jp - 2.0 * u3 + jm) / (g.dtheta * g.dtheta);
                out.values[g.index(i, j)] = urr + ur / ri + utt / (ri * ri);
            }
        }
    }
    return out;
}

/// Residual of the equation: Delta u + h1 e^u - h2 e^{-u} (active terms only),
/// evaluated node-wise with the discrete polar Laplacian.
inline Field pde_residual(const Field& u, const CoefficientPair& pair,
                          std::optional<double> dirichlet_bc = {})
{
    check_exp_range(u);
    const DiskGrid& g = u.grid();
    const DiscreteLaplacian lap = discrete_laplacian(u, dirichlet_bc);
    std::vector<double> res(g.node_count());
    auto nonlin = [&pair](Vec2 p, double uval) {
        double f = 0.0;
        if (pair.first_active()) f += pair.h1(p) * std::exp(uval);
        if (pair.second_active()) f -= pair.h2(p) * std::exp(-uval);
        return f;
    };
    for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j)
            res[g.index(i, j)] = lap.values[g.index(i, j)] + nonlin(g.node(i, j), u.at(i, j));
    const double resc = lap.center + nonlin({0.0, 0.0}, u.center_value());
    return Field(u.grid_ptr(), std::move(res), resc, "residual(" + u.label() + ")");
}

/// The sign symmetry of the equation: negating u and swapping (h1, h2) preserves
/// it, with the residual exactly negated node-by-node.
inline std::pair<Field, CoefficientPair> swap_symmetry(const Field& u, const CoefficientPair& pair)
{
    CoefficientPair swapped;
    swapped.h1 = pair.h2;
    swapped.h2 = pair.h1;
    swapped.bound_C = pair.bound_C;
    swapped.name1 = pair.name2;
    swapped.name2 = pair.name1;
    switch (pair.mode) {
        case PairMode::two_signed: swapped.mode = PairMode::two_signed; break;
        case PairMode::first_only: swapped.mode = PairMode::second_only; break;
        case PairMode::second_only: swapped.mode = PairMode::first_only; break;
    }
    return {u.negated(), swapped};
}

// ---------------------------------------------------------------------------
// Exact discrete flux identities.  Summing cell_area * Delta_h u over all cells
// inside the i-th flux interface telescopes to the radial flux through it:
//     sum = 2*pi*iota_i * (mean(u_i) - mean(u_{i-1})) / (r_i - r_{i-1}).
// Dividing by 2*pi*iota this is the discrete d/dr of the ring average, and with
// Delta_h u = -(f1 - f2) at a solution it becomes the mass-derivative identity
//     d/dr u_bar (iota) = (sigma2 - sigma1)(iota) / iota
// with sigma_i measured by the conservative cell areas (units of 2*pi).
// ---------------------------------------------------------------------------

struct FluxIdentitySample {
    double r = 0.0;          ///< interface radius the sample snapped to
    double dudr = 0.0;       ///< discrete d/dr of the ring average at r
    double sigma1 = 0.0;     ///< cumulative first-component mass inside r (2*pi units)
    double sigma2 = 0.0;     ///< cumulative second-component mass inside r
    double residual = 0.0;   ///< |dudr - (sigma2 - sigma1)/r|
};

/// Cumulative conservative-cell masses of nodewise densities f1, f2 (centered at
/// the grid origin).  cum[i] is the mass inside fv_interfaces[i+1].
struct FvCumulativeMasses {
    std::vector<double> cum1;
    std::vector<double> cum2;
};

template <class F1, class F2>
FvCumulativeMasses fv_cumulative_masses(const DiskGrid& g, const F1& f1_node, const F2& f2_node)
{
    FvCumulativeMasses out;
    out.cum1.resize(g.n_r);
    out.cum2.resize(g.n_r);
    double s1 = g.fv_center_area() * f1_node(-1, 0) / (2.0 * M_PI);
    double s2 = g.fv_center_area() * f2_node(-1, 0) / (2.0 * M_PI);
    for (int i = 0; i < g.n_r; ++i) {
        const double a = g.fv_cell_area(i) / (2.0 * M_PI);
        for (int j = 0; j < g.n_theta; ++j) {
            s1 += a * f1_node(i, j);
            s2 += a * f2_node(i, j);
        }
        out.cum1[i] = s1;
        out.cum2[i] = s2;
    }
    return out;
}

/// Evaluates the discrete derivative identity at the flux interface nearest to
/// the requested radius, for a field with nodewise densities f1, f2 (indexed by
/// ring i, angle j; i = -1 denotes the origin sample).
template <class F1, class F2>
FluxIdentitySample flux_identity_at(const Field& u, double r_request, const F1& f1_node,
                                    const F2& f2_node)
{
    const DiskGrid& g = u.grid();
    // interface between rings i and i+1 sits at fv_interfaces[i+1]; usable i: 0..n_r-2
    int best = 0;
    double bestd = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < g.n_r; ++i) {
        const double d = std::abs(g.fv_interfaces[i + 1] - r_request);
        if (d < bestd) { bestd = d; best = i; }
    }
    const double iota = g.fv_interfaces[best + 1];
    double mean_lo = 0.0, mean_hi = 0.0;
    for (int j = 0; j < g.n_theta; ++j) {
        mean_lo += u.at(best, j);
        mean_hi += u.at(best + 1, j);
    }
    mean_lo /= g.n_theta;
    mean_hi /= g.n_theta;
    const double h = g.radial_nodes[best + 1] - g.radial_nodes[best];

    const auto cum = fv_cumulative_masses(g, f1_node, f2_node);
    FluxIdentitySample s;
    s.r = iota;
    s.dudr = (mean_hi - mean_lo) / h;
    s.sigma1 = cum.cum1[best];
    s.sigma2 = cum.cum2[best];
    s.residual = std::abs(s.dudr - (s.sigma2 - s.sigma1) / iota);
    return s;
}

} // namespace sglab

#endif
