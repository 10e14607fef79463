#ifndef SGLAB_POHOZAEV_HPP
#define SGLAB_POHOZAEV_HPP

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "coefficients.hpp"
#include "field.hpp"
#include "quadrature.hpp"

namespace sglab {

// ---------------------------------------------------------------------------
// Quantization set: (2m(m+1), 2m(m-1)) and its swap, m = 0, 1, 2, ...
// Masses are carried in units of 2*pi, so the ladder values are 0, 4, 12, 24, 40...
// ---------------------------------------------------------------------------

struct QuantizationMatch {
    int m = 0;
    char orientation = 'A';   ///< 'A': (2m(m+1), 2m(m-1)); 'B': swapped
    double target1 = 0.0;
    double target2 = 0.0;
    double distance = 0.0;    ///< Euclidean distance of the input to the target
};

inline std::pair<double, double> quantization_target(int m, char orientation)
{
    const double a = 2.0 * m * (m + 1);
    const double b = 2.0 * m * (m - 1);
    return orientation == 'A' ? std::make_pair(a, b) : std::make_pair(b, a);
}

/// Nearest point of the quantization set; ties break toward smaller m, then
/// orientation A.
inline QuantizationMatch classify_quantization(double sigma1, double sigma2, int m_max = 50)
{
    if (sigma1 < 0.0 || sigma2 < 0.0)
        throw std::invalid_argument("classify_quantization: masses must be non-negative");
    if (m_max < 0)
        throw std::invalid_argument("classify_quantization: m_max must be non-negative");
    QuantizationMatch best;
    best.distance = std::numeric_limits<double>::infinity();
    for (int m = 0; m <= m_max; ++m) {
        for (char o : {'A', 'B'}) {
            const auto [t1, t2] = quantization_target(m, o);
            const double d = std::hypot(sigma1 - t1, sigma2 - t2);
            if (d < best.distance) {
                best = {m, o, t1, t2, d};
            }
        }
    }
    return best;
}

/// |4(sigma1 + sigma2) - (sigma1 - sigma2)^2|; vanishes exactly on the
/// quantization set (the set is the intersection of this parabola with the
/// multiple-of-4 mass lattice).
inline double pohozaev_consistency(double sigma1, double sigma2)
{
    if (sigma1 < 0.0 || sigma2 < 0.0)
        throw std::invalid_argument("pohozaev_consistency: masses must be non-negative");
    const double s = sigma1 + sigma2, d = sigma1 - sigma2;
    return std::abs(4.0 * s - d * d);
}

// ---------------------------------------------------------------------------
// Green's function of the disk B_R with Dirichlet boundary condition
// ---------------------------------------------------------------------------

/// Regular part H(x, eta) = (1/2pi) log( (|x|/R) |R^2 x / |x|^2 - eta| ),
/// evaluated through the symmetric stable form
/// (1/4pi) log( R^2 - 2 x.eta + |x|^2 |eta|^2 / R^2 ).
inline double green_regular_part(Vec2 x, Vec2 eta, double R = 1.0)
{
    const double q = R * R - 2.0 * dot(x, eta) + dot(x, x) * dot(eta, eta) / (R * R);
    return std::log(q) / (4.0 * M_PI);
}

/// G(x, eta) = -(1/2pi) log|x - eta| + H(x, eta); vanishes for |x| = R.
inline double green_function(Vec2 x, Vec2 eta, double R = 1.0)
{
    const double d = dist(x, eta);
    if (d == 0.0)
        throw std::invalid_argument("green_function: coincident points");
    return -std::log(d) / (2.0 * M_PI) + green_regular_part(x, eta, R);
}

// ---------------------------------------------------------------------------
// Pohozaev identity evaluation
// ---------------------------------------------------------------------------

/// Terms of the boundary-form Pohozaev identity on B_r(center),
///   sum_i int (x-c).grad(h_i) e^{v_i} + 2 sum_i int h_i e^{v_i}
///     = r oint sum_i h_i e^{v_i} + r oint ( (d_nu u)^2 - |grad u|^2 / 2 ),
/// together with the interior mass relation 4(sigma1+sigma2) = (sigma1-sigma2)^2.
/// The mass relation is meaningful only when each active component decays fast
/// on the circle; the report carries the classification and a validity flag.
struct PohozaevReport {
    Vec2 center;
    double r = 0.0;
    double sigma1 = 0.0, sigma2 = 0.0;   ///< masses in B_r, units of 2*pi
    double lhs_interior = 0.0;           ///< 4 (sigma1 + sigma2)
    double rhs_interior = 0.0;           ///< (sigma1 - sigma2)^2
    double boundary_nonlinear = 0.0;     ///< r oint sum h_i e^{v_i}
    double boundary_gradient = 0.0;      ///< r oint ((d_nu u)^2 - |grad u|^2/2)
    double grad_h_term = 0.0;            ///< sum int ((x-c).grad h_i) e^{v_i}
    double residual_identity = 0.0;      ///< |4 Sigma - Delta^2|
    double residual_boundary_form = 0.0; ///< imbalance of the boundary form
    DecayClass u_class = DecayClass::slow;
    DecayClass minus_class = DecayClass::slow;
    bool valid = false;
};

struct PohozaevOptions {
    PatchOptions patch;
    int circle_samples = 1024;
    double threshold_N = 5.0;
    double grad_fd_eps = 1e-6;
};

namespace detail {

/// Node-wise gradient of a field by centered differences on the polar grid,
/// returned as two Cartesian-component fields.
inline std::pair<Field, Field> gradient_fields(const Field& u)
{
    const DiskGrid& g = u.grid();
    const int nr = g.n_r, nt = g.n_theta;
    std::vector<double> gx(g.node_count()), gy(g.node_count());
    for (int i = 0; i < nr; ++i) {
        const double ri = g.radial_nodes[i];
        for (int j = 0; j < nt; ++j) {
            double ur;
            if (i == 0) {
                const double hm = ri, hp = g.radial_nodes[1] - ri;
                const double um = u.center_value(), up = u.at(1, j), uc = u.at(0, j);
                ur = (-hp / (hm * (hm + hp))) * um + ((hp - hm) / (hm * hp)) * uc +
                     (hm / (hp * (hm + hp))) * up;
            } else if (i + 1 < nr) {
                const double hm = ri - g.radial_nodes[i - 1], hp = g.radial_nodes[i + 1] - ri;
                ur = (-hp / (hm * (hm + hp))) * u.at(i - 1, j) +
                     ((hp - hm) / (hm * hp)) * u.at(i, j) +
                     (hm / (hp * (hm + hp))) * u.at(i + 1, j);
            } else {
                const double r1 = g.radial_nodes[nr - 3], r2 = g.radial_nodes[nr - 2];
                const double d21 = r2 - r1, d32 = ri - r2, d31 = ri - r1;
                ur = u.at(nr - 3, j) * d32 / (d21 * d31) - u.at(nr - 2, j) * d31 / (d21 * d32) +
                     u.at(i, j) * (d31 + d32) / (d32 * d31);
            }
            const double ut = (u.at(i, (j + 1) % nt) - u.at(i, (j + nt - 1) % nt)) / (2.0 * g.dtheta);
            const double t = g.theta(j);
            const double ct = std::cos(t), st = std::sin(t);
            gx[g.index(i, j)] = ur * ct - (ut / ri) * st;
            gy[g.index(i, j)] = ur * st + (ut / ri) * ct;
        }
    }
    // origin: least-squares gradient from the first ring
    double cx = 0.0, cy = 0.0;
    const double r0 = g.radial_nodes[0];
    for (int j = 0; j < nt; ++j) {
        const double t = g.theta(j);
        cx += (u.at(0, j) - u.center_value()) * std::cos(t);
        cy += (u.at(0, j) - u.center_value()) * std::sin(t);
    }
    cx *= 2.0 / (nt * r0);
    cy *= 2.0 / (nt * r0);
    return {Field(u.grid_ptr(), std::move(gx), cx, "dx(" + u.label() + ")"),
            Field(u.grid_ptr(), std::move(gy), cy, "dy(" + u.label() + ")")};
}

} // namespace detail

inline PohozaevReport pohozaev_report(const Field& field, const CoefficientPair& pair, Vec2 center,
                                      double r, const PohozaevOptions& opt = {})
{
    const DiskGrid& g = field.grid();
    if (!(r > 0.0) || norm(center) + r > g.radius * (1.0 + 1e-12))
        throw std::invalid_argument("pohozaev_report: circle or disk outside the domain");
    if (field.max_abs() > kExpOverflowGuard)
        throw std::overflow_error("pohozaev_report: |u| > 700 somewhere on the grid");

    PohozaevReport rep;
    rep.center = center;
    rep.r = r;

    auto dens1 = [&](Vec2 x) { return pair.h1(x) * std::exp(field(x)); };
    auto dens2 = [&](Vec2 x) { return pair.h2(x) * std::exp(-field(x)); };
    if (pair.first_active())
        rep.sigma1 = detail::disk_patch_integral(dens1, center, r, opt.patch) / (2.0 * M_PI);
    if (pair.second_active())
        rep.sigma2 = detail::disk_patch_integral(dens2, center, r, opt.patch) / (2.0 * M_PI);

    rep.lhs_interior = 4.0 * (rep.sigma1 + rep.sigma2);
    rep.rhs_interior = (rep.sigma1 - rep.sigma2) * (rep.sigma1 - rep.sigma2);
    rep.residual_identity = std::abs(rep.lhs_interior - rep.rhs_interior);

    CircleProbe probe{center, r, opt.circle_samples};
    rep.boundary_nonlinear = r * circle_line_integral(
                                     [&](Vec2 x) {
                                         double s = 0.0;
                                         if (pair.first_active()) s += dens1(x);
                                         if (pair.second_active()) s += dens2(x);
                                         return s;
                                     },
                                     probe);

    const auto [gx, gy] = detail::gradient_fields(field);
    rep.boundary_gradient = r * circle_line_integral(
                                    [&](Vec2 x) {
                                        const Vec2 grad{gx(x), gy(x)};
                                        const Vec2 d = x - center;
                                        const double nu = dot(grad, d) / norm(d);
                                        return nu * nu - 0.5 * dot(grad, grad);
                                    },
                                    probe);

    const double fe = opt.grad_fd_eps;
    auto grad_dot = [&](const Sampler& h, Vec2 x) {
        const double hx = (h({x.x + fe, x.y}) - h({x.x - fe, x.y})) / (2.0 * fe);
        const double hy = (h({x.x, x.y + fe}) - h({x.x, x.y - fe})) / (2.0 * fe);
        return (x.x - center.x) * hx + (x.y - center.y) * hy;
    };
    double gh = 0.0;
    if (pair.first_active())
        gh += detail::disk_patch_integral(
            [&](Vec2 x) { return grad_dot(pair.h1, x) * std::exp(field(x)); }, center, r, opt.patch);
    if (pair.second_active())
        gh += detail::disk_patch_integral(
            [&](Vec2 x) { return grad_dot(pair.h2, x) * std::exp(-field(x)); }, center, r, opt.patch);
    rep.grad_h_term = gh;

    const double lhs_form = rep.grad_h_term + 4.0 * M_PI * (rep.sigma1 + rep.sigma2);
    const double rhs_form = rep.boundary_nonlinear + rep.boundary_gradient;
    rep.residual_boundary_form = std::abs(lhs_form - rhs_form);

    const DecayPair dc = decay_class(field, center, r, opt.threshold_N, opt.circle_samples);
    rep.u_class = dc.u_class;
    rep.minus_class = dc.minus_class;
    rep.valid = (!pair.first_active() || dc.u_class == DecayClass::fast) &&
                (!pair.second_active() || dc.minus_class == DecayClass::fast);
    return rep;
}

// ---------------------------------------------------------------------------
// Green's representation diagnostic
// ---------------------------------------------------------------------------

struct GreenRepresentationReport {
    std::vector<Vec2> probes;
    std::vector<double> residuals;
    double max_residual = 0.0;
};

/// Reconstructs u at random interior probes from the Green's representation
///   u(y) = int G(y, eta) (h1 e^u - h2 e^{-u}) d eta + harmonic boundary part,
/// the boundary part being the Poisson integral of the outer-ring values, and
/// reports the worst reconstruction error.  Meaningful for fields whose
/// discrete residual is small (solver outputs).
inline GreenRepresentationReport green_representation_check(const Field& field,
                                                            const CoefficientPair& pair,
                                                            int n_probes = 20, unsigned seed = 777)
{
    const DiskGrid& g = field.grid();
    const double R = g.radius;
    GreenRepresentationReport rep;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    auto f_at = [&](Vec2 x, double uval) {
        double f = 0.0;
        if (pair.first_active()) f += pair.h1(x) * std::exp(uval);
        if (pair.second_active()) f -= pair.h2(x) * std::exp(-uval);
        return f;
    };

    for (int p = 0; p < n_probes; ++p) {
        const double rr = 0.7 * R * std::sqrt(uni(rng));
        const double th = 2.0 * M_PI * uni(rng);
        const Vec2 y{rr * std::cos(th), rr * std::sin(th)};

        double vol = g.center_quad_weight * green_function(y, {0.0, 0.0}, R) *
                     f_at({0.0, 0.0}, field.center_value());
        for (int i = 0; i < g.n_r; ++i)
            for (int j = 0; j < g.n_theta; ++j) {
                const Vec2 eta = g.node(i, j);
                if (dist(y, eta) < 1e-14) continue;
                vol += g.quad_weights[i] * green_function(y, eta, R) * f_at(eta, field.at(i, j));
            }
        double harm = 0.0;
        for (int j = 0; j < g.n_theta; ++j) {
            const Vec2 b = g.node(g.n_r - 1, j);
            const Vec2 d = y - b;
            harm += (R * R - dot(y, y)) / dot(d, d) * field.at(g.n_r - 1, j);
        }
        harm *= g.dtheta / (2.0 * M_PI);

        rep.probes.push_back(y);
        rep.residuals.push_back(std::abs(field(y) - (vol + harm)));
        rep.max_residual = std::max(rep.max_residual, rep.residuals.back());
    }
    return rep;
}

} // namespace sglab

#endif
