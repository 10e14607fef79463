#ifndef SGLAB_LIOUVILLE_HPP
#define SGLAB_LIOUVILLE_HPP

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"
#include "grid.hpp"

namespace sglab {

/// One exact bubble: the entire solution of Delta v + h e^v = 0 with total mass
/// 8*pi,
///   v(x) = log( 8 lambda^2 / (h (1 + lambda^2 |x - p|^2)^2) ),
/// concentrating at p as lambda grows (peak 2 log lambda + const, tail
/// -4 log|x - p| + const).  The coefficient is frozen at its value at p, so the
/// profile is an exact solution for constant h and O(|x-p|)-accurate otherwise.
struct BubbleSpec {
    Vec2 center;
    double lambda = 10.0;
    int sign = +1;          ///< +1: bubble of e^u; -1: bubble of e^{-u}
    double h_value = 1.0;
};

inline void validate_bubble(const BubbleSpec& b, double domain_radius = 1.0)
{
    if (!(b.lambda > 0.0))
        throw std::invalid_argument("BubbleSpec: lambda must be positive");
    if (!(b.h_value > 0.0))
        throw std::invalid_argument("BubbleSpec: h_value must be positive");
    if (b.sign != 1 && b.sign != -1)
        throw std::invalid_argument("BubbleSpec: sign must be +1 or -1");
    if (!(norm(b.center) < domain_radius))
        throw std::invalid_argument("BubbleSpec: center must lie strictly inside the disk");
}

/// The radial profile v(d) at distance d from the bubble center.
inline double bubble_profile(double lambda, double h, double d)
{
    return std::log(8.0 * lambda * lambda / h) - 2.0 * std::log1p(lambda * lambda * d * d);
}

inline double bubble_value(const BubbleSpec& b, Vec2 x)
{
    return b.sign * bubble_profile(b.lambda, b.h_value, dist(x, b.center));
}

/// Samples sign * v on the grid.
inline Field bubble_field(const BubbleSpec& spec, std::shared_ptr<const DiskGrid> grid)
{
    validate_bubble(spec, grid->radius);
    return Field::sample(std::move(grid), [&spec](Vec2 x) { return bubble_value(spec, x); },
                         "bubble(lambda=" + std::to_string(spec.lambda) + ")");
}

/// A superposition of bubbles plus a constant offset.  An approximate blow-up
/// configuration (cross terms neglected): detector input, not a solver output.
struct SyntheticFamily {
    std::vector<BubbleSpec> bubbles;
    double background = 0.0;
};

/// Pairwise separation below this multiple of the largest bubble width gets an
/// overlap warning attached to the produced field's label.
inline constexpr double kSeparationFactor = 10.0;

inline Field synth_family(const SyntheticFamily& family, std::shared_ptr<const DiskGrid> grid)
{
    for (const auto& b : family.bubbles)
        validate_bubble(b, grid->radius);
    bool overlap = false;
    double max_width = 0.0;
    for (const auto& b : family.bubbles)
        max_width = std::max(max_width, 1.0 / b.lambda);
    for (std::size_t a = 0; a < family.bubbles.size(); ++a)
        for (std::size_t b = a + 1; b < family.bubbles.size(); ++b)
            if (dist(family.bubbles[a].center, family.bubbles[b].center) <
                kSeparationFactor * max_width)
                overlap = true;
    std::string label = "family(" + std::to_string(family.bubbles.size()) + " bubbles)";
    if (overlap)
        label += " [warning: bubble profiles overlap beyond tolerance]";
    const auto& bubbles = family.bubbles;
    const double bg = family.background;
    return Field::sample(std::move(grid),
                         [&bubbles, bg](Vec2 x) {
                             double v = bg;
                             for (const auto& b : bubbles) v += bubble_value(b, x);
                             return v;
                         },
                         label);
}

/// The dilation v(y) = u(eps y + center) + 2 log eps, sampled on a fresh grid of
/// the given window radius.  The companion second component is the dilation of -u.
inline Field dilate(const Field& u, Vec2 center, double eps, double window_radius = 1.0,
                    int n_r = 64, int n_theta = 64)
{
    if (!(eps > 0.0))
        throw std::invalid_argument("dilate: eps must be positive");
    const double reach = norm(center) + eps * window_radius;
    if (reach > u.grid().radius * (1.0 + 1e-12))
        throw std::invalid_argument("dilate: window escapes the grid support (reach " +
                                    std::to_string(reach) + ")");
    auto win = build_grid(n_r, n_theta, window_radius, u.grid().stretch);
    const double shift = 2.0 * std::log(eps);
    return Field::sample(std::move(win),
                         [&u, center, eps, shift](Vec2 y) {
                             return u(Vec2{center.x + eps * y.x, center.y + eps * y.y}) + shift;
                         },
                         "dilated(" + u.label() + ")");
}

} // namespace sglab

#endif
