#ifndef SGLAB_COEFFICIENTS_HPP
#define SGLAB_COEFFICIENTS_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "field.hpp"
#include "grid.hpp"

namespace sglab {

using Sampler = std::function<double(Vec2)>;

/// Which nonlinear components are active.  The pure Liouville case (the e^{-u}
/// term absent) is expressed as a mode flag rather than a zero sampler, so the
/// positivity bounds stay strict for every active coefficient.
enum class PairMode { two_signed, first_only, second_only };

/// The positive coefficient pair of the equation's two exponential terms,
/// bounded as 1/C <= h_i <= C.
struct CoefficientPair {
    Sampler h1;
    Sampler h2;
    double bound_C = 2.0;
    PairMode mode = PairMode::two_signed;
    std::string name1 = "h1";
    std::string name2 = "h2";

    bool first_active() const { return mode != PairMode::second_only; }
    bool second_active() const { return mode != PairMode::first_only; }
};

inline CoefficientPair constant_pair(double c1 = 1.0, double c2 = 1.0,
                                     PairMode mode = PairMode::two_signed, double bound = 2.0)
{
    return {[c1](Vec2) { return c1; }, [c2](Vec2) { return c2; }, bound, mode,
            "const:" + std::to_string(c1), "const:" + std::to_string(c2)};
}

inline CoefficientPair one_signed_pair(Sampler h, double bound = 2.0, std::string name = "h1")
{
    return {std::move(h), [](Vec2) { return 1.0; }, bound, PairMode::first_only,
            std::move(name), "(off)"};
}

struct CoefficientValidation {
    bool ok = false;
    double min1 = 0.0, max1 = 0.0, min2 = 0.0, max2 = 0.0;
    double c1_seminorm_1 = 0.0;   ///< finite-difference sup |grad h_1| over nodes
    double c1_seminorm_2 = 0.0;
    std::string message;
};

namespace detail {

inline double fd_grad_norm(const Sampler& h, Vec2 p, double eps)
{
    const double gx = (h({p.x + eps, p.y}) - h({p.x - eps, p.y})) / (2.0 * eps);
    const double gy = (h({p.x, p.y + eps}) - h({p.x, p.y - eps})) / (2.0 * eps);
    return std::hypot(gx, gy);
}

} // namespace detail

/// Samples the active coefficients on all grid nodes, reports ranges and a
/// finite-difference C^1 proxy, and fails hard when the positivity bounds
/// 1/C <= h <= C are violated anywhere.  (C^3 smoothness is not machine-checkable
/// from samples; only C^0/C^1 proxies are reported.)
inline CoefficientValidation validate_coefficients(const CoefficientPair& pair,
                                                   const DiskGrid& grid)
{
    CoefficientValidation rep;
    rep.ok = true;
    const double eps = 1e-5 * grid.radius;
    auto scan = [&](const Sampler& h, double& mn, double& mx, double& c1, const std::string& name) {
        mn = std::numeric_limits<double>::infinity();
        mx = -mn;
        c1 = 0.0;
        auto visit = [&](Vec2 p, bool interior) {
            const double v = h(p);
            if (!std::isfinite(v) || v <= 0.0) {
                rep.ok = false;
                if (rep.message.empty())
                    rep.message = name + " non-positive at (" + std::to_string(p.x) + ", " +
                                  std::to_string(p.y) + "): " + std::to_string(v);
            }
            mn = std::min(mn, v);
            mx = std::max(mx, v);
            if (interior)
                c1 = std::max(c1, detail::fd_grad_norm(h, p, eps));
        };
        visit({0.0, 0.0}, true);
        for (int i = 0; i < grid.n_r; ++i)
            for (int j = 0; j < grid.n_theta; ++j)
                visit(grid.node(i, j), i < grid.n_r - 1);
        if (rep.ok && (mn < 1.0 / pair.bound_C - 1e-12 || mx > pair.bound_C + 1e-12)) {
            rep.ok = false;
            rep.message = name + " range [" + std::to_string(mn) + ", " + std::to_string(mx) +
                          "] violates bound C = " + std::to_string(pair.bound_C);
        }
    };
    if (pair.first_active())
        scan(pair.h1, rep.min1, rep.max1, rep.c1_seminorm_1, pair.name1);
    if (pair.second_active())
        scan(pair.h2, rep.min2, rep.max2, rep.c1_seminorm_2, pair.name2);
    if (rep.ok)
        rep.message = "ok";
    return rep;
}

/// Hard-failing variant used at pipeline entry.
inline void require_valid_coefficients(const CoefficientPair& pair, const DiskGrid& grid)
{
    const auto rep = validate_coefficients(pair, grid);
    if (!rep.ok)
        throw std::invalid_argument("coefficient validation failed: " + rep.message);
}

} // namespace sglab

#endif
