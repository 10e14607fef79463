#ifndef SGLAB_REPORT_JSON_HPP
#define SGLAB_REPORT_JSON_HPP

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "analysis.hpp"
#include "pohozaev.hpp"
#include "solver.hpp"

namespace sglab {

using json = nlohmann::ordered_json;

/// JSON has no infinity; clamp diagnostics that can legitimately be unbounded.
inline double json_safe(double x)
{
    if (std::isinf(x)) return x > 0 ? 1e300 : -1e300;
    return x;
}

inline json to_json(Vec2 p) { return json::array({p.x, p.y}); }

inline json to_json(const QuantizationMatch& m)
{
    return {{"m", m.m},
            {"orientation", std::string(1, m.orientation)},
            {"target", {m.target1, m.target2}},
            {"distance", m.distance}};
}

inline json to_json(const BubbleDisk& d)
{
    return {{"center", to_json(d.center)}, {"l", d.l},     {"sign", d.sign},
            {"peak", d.peak},              {"eps", d.eps}, {"fit_quality", d.fit_quality}};
}

inline json to_json(const Group& g)
{
    return {{"members", g.member_indices},
            {"hull_center", to_json(g.hull_center)},
            {"hull_radius", g.hull_radius},
            {"separation_ratio", json_safe(g.separation_ratio)},
            {"comparability_ratio", json_safe(g.comparability_ratio)}};
}

inline json to_json(const PohozaevReport& r)
{
    return {{"center", to_json(r.center)},
            {"r", r.r},
            {"sigma1", r.sigma1},
            {"sigma2", r.sigma2},
            {"lhs_interior", r.lhs_interior},
            {"rhs_interior", r.rhs_interior},
            {"boundary_nonlinear", r.boundary_nonlinear},
            {"boundary_gradient", r.boundary_gradient},
            {"grad_h_term", r.grad_h_term},
            {"residual_identity", r.residual_identity},
            {"residual_boundary_form", r.residual_boundary_form},
            {"u_decay", to_string(r.u_class)},
            {"minus_u_decay", to_string(r.minus_class)},
            {"valid", r.valid}};
}

inline json to_json(const LadderReport& r)
{
    json points = json::array();
    for (const auto& p : r.points)
        points.push_back({{"r", p.r},
                          {"u_decay", to_string(p.u_class)},
                          {"minus_u_decay", to_string(p.minus_class)},
                          {"sigma1", p.sigma1},
                          {"sigma2", p.sigma2}});
    json plateaus = json::array();
    for (const auto& p : r.plateaus)
        plateaus.push_back(
            {{"r_lo", p.r_lo}, {"r_hi", p.r_hi}, {"sigma1", p.sigma1}, {"sigma2", p.sigma2}});
    return {{"points", points}, {"plateaus", plateaus}};
}

inline json to_json(const OscillationReport& r)
{
    json probes = json::array();
    for (const auto& p : r.probes)
        probes.push_back(
            {{"x", to_json(p.x)}, {"ball_radius", p.ball_radius}, {"oscillation", p.oscillation}});
    return {{"probes", probes}, {"max_oscillation", r.max_oscillation}, {"anomaly", r.anomaly}};
}

inline json to_json(const SolveReport& r)
{
    json masses = json::array();
    for (const auto& row : r.masses_at_radii)
        masses.push_back({{"r", row[0]}, {"sigma1", row[1]}, {"sigma2", row[2]}});
    return {{"rho1", r.rho1},
            {"rho2", r.rho2},
            {"converged", r.converged},
            {"newton_iters", r.newton_iters},
            {"final_residual_norm", r.final_residual_norm},
            {"sup_norm", r.sup_norm},
            {"center_value", r.center_value},
            {"blowup_flag", r.blowup_flag},
            {"masses_at_radii", masses}};
}

/// Fixed-format float for CSV rows (17 significant digits, locale-independent).
inline std::string csv_num(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace sglab

#endif
