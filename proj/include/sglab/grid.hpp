#ifndef SGLAB_GRID_HPP
#define SGLAB_GRID_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace sglab {

namespace detail {

/// Radial node layout: r(s) = R * (e^{a s} - 1) / (e^a - 1) with s uniform in (0, 1].
/// The exponent a = n_ref * log(stretch) is tied to a fixed reference resolution so
/// that refining n_r scales every spacing uniformly (clean second-order refinement);
/// at n_r = n_ref adjacent spacings differ by exactly the stretch factor.
constexpr int kStretchRefNodes = 64;

inline double graded_radius(double s, double radius, double alpha)
{
    if (std::abs(alpha) < 1e-14)
        return radius * s;
    return radius * std::expm1(alpha * s) / std::expm1(alpha);
}

/// Composite high-order weights for integrals  int_0^R f(r) r dr  given samples of f
/// at 0 = pts[0] < pts[1] < ... < pts[n].  Each interval is integrated with the
/// degree-(npts-1) Lagrange interpolant through a sliding stencil, multiplied by the
/// measure r dr analytically.  Reproduces polynomials up to degree npts-1 exactly, so
/// the total weight equals R^2/2 to rounding.  All arithmetic is done in a coordinate
/// local to the interval to avoid cancellation.
inline std::vector<double> measure_weights(const std::vector<double>& pts, int npts = 6)
{
    const int n = static_cast<int>(pts.size()) - 1;
    if (n < 1)
        throw std::invalid_argument("measure_weights: need at least 2 points");
    npts = std::min(npts, n + 1);
    std::vector<double> w(pts.size(), 0.0);
    std::vector<double> roots(npts - 1), coef(npts), poly(npts + 1), prim(npts + 2);
    for (int i = 0; i < n; ++i) {
        const double lo = pts[i], hi = pts[i + 1];
        const double c = 0.5 * (lo + hi);
        int j0 = std::clamp(i - (npts / 2 - 1), 0, n + 1 - npts);
        for (int k = 0; k < npts; ++k) {
            // Lagrange basis for point j0+k, expanded around c
            double denom = 1.0;
            int m = 0;
            for (int j = 0; j < npts; ++j) {
                if (j == k) continue;
                roots[m++] = pts[j0 + j] - c;
                denom *= (pts[j0 + k] - pts[j0 + j]);
            }
            // numerator poly: prod (t - roots[m]), coefficients coef[0..npts-1], coef[deg]=leading
            std::fill(coef.begin(), coef.end(), 0.0);
            coef[0] = 1.0;
            int deg = 0;
            for (int j = 0; j < npts - 1; ++j) {
                ++deg;
                coef[deg] = coef[deg - 1];
                for (int q = deg - 1; q >= 1; --q)
                    coef[q] = coef[q - 1] - roots[j] * coef[q];
                coef[0] = -roots[j] * coef[0];
            }
            // multiply by (t + c): measure factor r = t + c in local coordinates
            std::fill(poly.begin(), poly.end(), 0.0);
            for (int q = 0; q <= deg; ++q) {
                poly[q + 1] += coef[q];
                poly[q] += c * coef[q];
            }
            // integrate over [lo-c, hi-c]
            std::fill(prim.begin(), prim.end(), 0.0);
            for (int q = 0; q <= deg + 1; ++q)
                prim[q + 1] = poly[q] / (q + 1);
            const double a = lo - c, b = hi - c;
            double va = 0.0, vb = 0.0;
            for (int q = deg + 2; q >= 0; --q) {
                va = va * a + prim[q];
                vb = vb * b + prim[q];
            }
            w[j0 + k] += (vb - va) / denom;
        }
    }
    return w;
}

} // namespace detail

/// Polar discretization of the disk B_radius(0): n_r rings at strictly increasing
/// radii in (0, radius], n_theta equispaced angles, plus a single sample at the
/// origin stored separately (no node at r = 0).  Node values are indexed
/// ring-major: idx = i * n_theta + j.
///
/// Two sets of weights coexist:
///  - quad_weights / center_quad_weight: high-order area-quadrature weights
///    (ring weights already include the angular factor 2*pi/n_theta);
///  - fv_* interface data: the conservative cells backing the discrete Laplacian
///    and the exact discrete flux identities.
struct DiskGrid {
    int n_r = 0;
    int n_theta = 0;
    double radius = 1.0;
    double stretch = 1.05;                ///< adjacent-spacing ratio at the reference resolution
    std::vector<double> radial_nodes;     ///< size n_r, strictly increasing, last = radius
    std::vector<double> quad_weights;     ///< per-node area weights, size n_r (angular factor folded in)
    double center_quad_weight = 0.0;      ///< area weight of the origin sample
    std::vector<double> fv_interfaces;    ///< size n_r+1: r0/2, midpoints, radius
    double dtheta = 0.0;

    int index(int i, int j) const { return i * n_theta + j; }
    std::size_t node_count() const { return static_cast<std::size_t>(n_r) * n_theta; }

    double theta(int j) const { return dtheta * j; }
    Vec2 node(int i, int j) const
    {
        const double r = radial_nodes[i], t = theta(j);
        return {r * std::cos(t), r * std::sin(t)};
    }

    /// Area of the conservative cell of ring node i (per node, angular factor included).
    double fv_cell_area(int i) const
    {
        const double lo = fv_interfaces[i], hi = fv_interfaces[i + 1];
        return 0.5 * (hi * hi - lo * lo) * dtheta;
    }
    double fv_center_area() const
    {
        const double r0 = fv_interfaces[0];
        return M_PI * r0 * r0;
    }

    /// Local resolution near a point: max of radial spacing and angular arc length.
    double cell_size(Vec2 p) const
    {
        const double r = norm(p);
        int i = static_cast<int>(std::lower_bound(radial_nodes.begin(), radial_nodes.end(), r) -
                                 radial_nodes.begin());
        i = std::min(i, n_r - 1);
        const double lo = (i == 0) ? 0.0 : radial_nodes[i - 1];
        const double hi = radial_nodes[i];
        return std::max(hi - lo, r * dtheta);
    }
};

/// Builds a polar grid of the disk of the given radius.  Radial spacing is graded
/// geometrically toward the origin (finer near r = 0) to resolve concentrated
/// bubbles; stretch = 1 gives a uniform grid.
inline std::shared_ptr<const DiskGrid> build_grid(int n_r, int n_theta, double radius = 1.0,
                                                  double stretch = 1.05)
{
    if (n_r < 8)
        throw std::invalid_argument("build_grid: n_r must be >= 8, got " + std::to_string(n_r));
    if (n_theta < 8)
        throw std::invalid_argument("build_grid: n_theta must be >= 8, got " + std::to_string(n_theta));
    if (n_theta % 2 != 0)
        throw std::invalid_argument("build_grid: n_theta must be even, got " + std::to_string(n_theta));
    if (!(radius > 0.0))
        throw std::invalid_argument("build_grid: radius must be positive");
    if (!(stretch >= 1.0) || stretch > 1.5)
        throw std::invalid_argument("build_grid: stretch must be in [1, 1.5]");

    auto g = std::make_shared<DiskGrid>();
    g->n_r = n_r;
    g->n_theta = n_theta;
    g->radius = radius;
    g->stretch = stretch;
    g->dtheta = 2.0 * M_PI / n_theta;

    const double alpha = detail::kStretchRefNodes * std::log(stretch);
    g->radial_nodes.resize(n_r);
    for (int i = 0; i < n_r; ++i)
        g->radial_nodes[i] = detail::graded_radius(double(i + 1) / n_r, radius, alpha);
    g->radial_nodes.back() = radius;

    std::vector<double> pts(n_r + 1);
    pts[0] = 0.0;
    std::copy(g->radial_nodes.begin(), g->radial_nodes.end(), pts.begin() + 1);
    const auto wr = detail::measure_weights(pts);
    g->center_quad_weight = wr[0] * 2.0 * M_PI;
    g->quad_weights.resize(n_r);
    for (int i = 0; i < n_r; ++i)
        g->quad_weights[i] = wr[i + 1] * g->dtheta;

    g->fv_interfaces.resize(n_r + 1);
    g->fv_interfaces[0] = 0.5 * g->radial_nodes[0];
    for (int i = 1; i < n_r; ++i)
        g->fv_interfaces[i] = 0.5 * (g->radial_nodes[i - 1] + g->radial_nodes[i]);
    g->fv_interfaces[n_r] = radius;
    return g;
}

} // namespace sglab

#endif
