#ifndef SGLAB_ANALYSIS_HPP
#define SGLAB_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "field.hpp"
#include "grid.hpp"
#include "liouville.hpp"
#include "operators.hpp"
#include "quadrature.hpp"

namespace sglab {

// ---------------------------------------------------------------------------
// Local masses sigma_i(r)
// ---------------------------------------------------------------------------

/// sigma_1(r) = (1/2pi) int_{B_r} h1 e^u and its companion for e^{-u}, on an
/// increasing radius ladder.  Non-decreasing in r by construction.
struct MassProfile {
    std::vector<double> radii;
    std::vector<double> sigma1;
    std::vector<double> sigma2;
    Vec2 center;
};

/// Masses accumulate over disjoint annuli (first entry: the full inner disk), so
/// monotonicity is structural; tiny negative increments from quadrature rounding
/// are clamped at zero.
inline MassProfile mass_profile(const Field& field, const CoefficientPair& pair, Vec2 center,
                                const std::vector<double>& radii, const PatchOptions& opt = {})
{
    if (radii.empty())
        throw std::invalid_argument("mass_profile: empty radius list");
    for (std::size_t k = 0; k + 1 < radii.size(); ++k)
        if (!(radii[k] < radii[k + 1]))
            throw std::invalid_argument("mass_profile: radii must be strictly increasing");
    if (!(radii.front() > 0.0))
        throw std::invalid_argument("mass_profile: radii must be positive");
    if (norm(center) + radii.back() > field.grid().radius * (1.0 + 1e-12))
        throw std::invalid_argument("mass_profile: disk escapes the domain");
    if (field.max_abs() > kExpOverflowGuard)
        throw std::overflow_error("mass_profile: |u| > 700 somewhere on the grid");

    auto dens1 = [&](Vec2 x) { return pair.h1(x) * std::exp(field(x)); };
    auto dens2 = [&](Vec2 x) { return pair.h2(x) * std::exp(-field(x)); };

    MassProfile out;
    out.center = center;
    out.radii = radii;
    out.sigma1.resize(radii.size());
    out.sigma2.resize(radii.size());
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        double d1 = 0.0, d2 = 0.0;
        if (k == 0) {
            if (pair.first_active()) d1 = detail::disk_patch_integral(dens1, center, radii[0], opt);
            if (pair.second_active()) d2 = detail::disk_patch_integral(dens2, center, radii[0], opt);
        } else {
            if (pair.first_active())
                d1 = detail::annulus_patch_integral(dens1, center, radii[k - 1], radii[k], opt);
            if (pair.second_active())
                d2 = detail::annulus_patch_integral(dens2, center, radii[k - 1], radii[k], opt);
        }
        s1 += std::max(d1, 0.0) / (2.0 * M_PI);
        s2 += std::max(d2, 0.0) / (2.0 * M_PI);
        out.sigma1[k] = s1;
        out.sigma2[k] = s2;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fast/slow decay classification
// ---------------------------------------------------------------------------

enum class DecayClass { fast, slow };

inline const char* to_string(DecayClass c) { return c == DecayClass::fast ? "fast" : "slow"; }

/// Decay indicators on one circle: value_i = max over the circle of
/// (+/- u)(x) + 2 log r.  A component is fast when its value is <= -N.  Both can
/// be fast; both slow signals the probe radius cuts through a bubble.
struct DecayPair {
    DecayClass u_class = DecayClass::slow;
    DecayClass minus_class = DecayClass::slow;
    double u_value = 0.0;
    double minus_value = 0.0;
};

inline DecayPair decay_class(const Field& field, Vec2 center, double r, double threshold_N,
                             int n_samples = 512)
{
    CircleProbe probe{center, r, n_samples};
    validate_probe(probe, field.grid());
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    const double dth = 2.0 * M_PI / n_samples;
    for (int k = 0; k < n_samples; ++k) {
        const double t = dth * k;
        const double v = field(Vec2{center.x + r * std::cos(t), center.y + r * std::sin(t)});
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    DecayPair out;
    out.u_value = hi + 2.0 * std::log(r);
    out.minus_value = -lo + 2.0 * std::log(r);
    out.u_class = out.u_value <= -threshold_N ? DecayClass::fast : DecayClass::slow;
    out.minus_class = out.minus_value <= -threshold_N ? DecayClass::fast : DecayClass::slow;
    return out;
}

// ---------------------------------------------------------------------------
// The discrete selection process
// ---------------------------------------------------------------------------

/// A detected bubbling disk.
struct BubbleDisk {
    Vec2 center;
    double l = 0.0;            ///< disk radius from the threshold search
    int sign = +1;             ///< which of u, -u blew up locally
    double peak = 0.0;         ///< max |u| on the disk
    double eps = 0.0;          ///< concentration scale e^{-peak/2}
    double fit_quality = 0.0;  ///< RMS misfit of the rescaled profile
};

struct SelectionOptions {
    int circle_samples = 512;
    int radius_scan_steps = 40;       ///< geometric scan resolution for the l_j search
    double radius_cap_fraction = 0.45;///< cap l_j at this fraction of the closest center distance
    double boundary_fraction = 0.9;   ///< cap l_j at this fraction of the distance to the boundary
    double min_scale_ratio = 10.0;    ///< required l/eps; disks below are discarded
    double fit_window = 5.0;          ///< rescaled fitting window |y| <= fit_window
    int fit_n_r = 40;
    int fit_n_theta = 48;
    int fit_max_iters = 40;
};

struct SelectionResult {
    std::vector<BubbleDisk> disks;
    bool overflow = false;            ///< stopped early at max_bubbles
    double final_sup = 0.0;           ///< sup of |u| + 2 log dist(., centers+boundary) at exit
};

namespace detail {

/// Least-squares fit of the dilated field against the entire-bubble profile
///   b + log(8 L^2 / (h (1 + L^2 |y - s|^2)^2)),
/// over (log L, b, s) by Levenberg-damped Gauss-Newton; returns the RMS
/// residual.  The level b absorbs the constant by which neighboring bubbles'
/// log-tails shift the local field in a superposition (a shifted bubble is
/// exactly a bubble with renormalized coefficient), so the score measures
/// shape convergence to the profile.
inline double fit_rescaled_profile(const Field& dilated, double h_value, int max_iters)
{
    const DiskGrid& g = dilated.grid();
    std::vector<Vec2> ys;
    std::vector<double> vs;
    ys.reserve(g.node_count() + 1);
    ys.push_back({0.0, 0.0});
    vs.push_back(dilated.center_value());
    for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            ys.push_back(g.node(i, j));
            vs.push_back(dilated.at(i, j));
        }
    const int n = static_cast<int>(ys.size());

    double q = 0.5 * std::log(h_value / 8.0);   // exact for a pure bubble
    double lvl = 0.0, sx = 0.0, sy = 0.0;
    auto cost = [&](double qq, double bb, double ax, double ay) {
        const double L2 = std::exp(2.0 * qq);
        double c = 0.0;
        for (int k = 0; k < n; ++k) {
            const double dx = ys[k].x - ax, dy = ys[k].y - ay;
            const double m = bb + std::log(8.0 / h_value) + 2.0 * qq -
                             2.0 * std::log1p(L2 * (dx * dx + dy * dy));
            const double r = vs[k] - m;
            c += r * r;
        }
        return c;
    };
    double mu = 1e-8;
    double c0 = cost(q, lvl, sx, sy);
    for (int it = 0; it < max_iters; ++it) {
        const double L2 = std::exp(2.0 * q);
        double A[4][4] = {};
        double b[4] = {};
        for (int k = 0; k < n; ++k) {
            const double dx = ys[k].x - sx, dy = ys[k].y - sy;
            const double t = L2 * (dx * dx + dy * dy);
            const double m = lvl + std::log(8.0 / h_value) + 2.0 * q - 2.0 * std::log1p(t);
            const double r = vs[k] - m;
            const double J[4] = {2.0 - 4.0 * t / (1.0 + t), 1.0, 4.0 * L2 * dx / (1.0 + t),
                                 4.0 * L2 * dy / (1.0 + t)};
            for (int a = 0; a < 4; ++a) {
                b[a] += J[a] * r;
                for (int c = 0; c < 4; ++c) A[a][c] += J[a] * J[c];
            }
        }
        double M[4][5];
        for (int a = 0; a < 4; ++a) {
            for (int c = 0; c < 4; ++c) M[a][c] = A[a][c] + (a == c ? mu * (1.0 + A[a][a]) : 0.0);
            M[a][4] = b[a];
        }
        bool singular = false;
        for (int col = 0; col < 4 && !singular; ++col) {
            int piv = col;
            for (int rr = col + 1; rr < 4; ++rr)
                if (std::abs(M[rr][col]) > std::abs(M[piv][col])) piv = rr;
            for (int c = 0; c < 5; ++c) std::swap(M[col][c], M[piv][c]);
            if (std::abs(M[col][col]) < 1e-300) { singular = true; break; }
            for (int rr = 0; rr < 4; ++rr) {
                if (rr == col) continue;
                const double f = M[rr][col] / M[col][col];
                for (int c = col; c < 5; ++c) M[rr][c] -= f * M[col][c];
            }
        }
        if (singular) break;
        const double dq = M[0][4] / M[0][0];
        const double db = M[1][4] / M[1][1];
        const double dx = M[2][4] / M[2][2];
        const double dy = M[3][4] / M[3][3];
        const double c1 = cost(q + dq, lvl + db, sx + dx, sy + dy);
        if (c1 < c0) {
            q += dq;
            lvl += db;
            sx += dx;
            sy += dy;
            mu = std::max(mu * 0.3, 1e-12);
            if (c0 - c1 < 1e-14 * (1.0 + c0)) { c0 = c1; break; }
            c0 = c1;
        } else {
            mu *= 10.0;
            if (mu > 1e8) break;
        }
    }
    return std::sqrt(c0 / n);
}

} // namespace detail

/// The discrete selection process: repeatedly take the global maximizer of
/// |u|(x) + 2 log dist(x, found centers and the boundary); while the value
/// exceeds the threshold, record a bubbling disk at the nearby local maximizer
/// of |u|.  Disk radii come from the largest circle on which
/// |u| + 2 log|x - x_j| <= c1 still holds, capped so the returned disks are
/// pairwise disjoint and inside the domain.  Each disk is then dilated by its
/// scale and scored against the entire-bubble profile.
inline SelectionResult select_bubbles(const Field& field, const CoefficientPair& pair,
                                      double c1_threshold = 3.0, int max_bubbles = 16,
                                      const SelectionOptions& opt = {})
{
    if (max_bubbles < 1)
        throw std::invalid_argument("select_bubbles: max_bubbles must be >= 1");
    const DiskGrid& g = field.grid();
    const double R = g.radius;

    std::vector<Vec2> centers;
    SelectionResult result;

    auto dist_to_set = [&](Vec2 x) {
        double d = R - norm(x);
        for (const auto& c : centers) d = std::min(d, dist(x, c));
        return d;
    };

    auto abs_at = [&](int i, int j) {
        return (i < 0) ? std::abs(field.center_value()) : std::abs(field.at(i, j));
    };

    // (a)/(b): global maximizer of |u| + 2 log dist, stop at the threshold
    while (true) {
        double best = -std::numeric_limits<double>::infinity();
        int bi = -2, bj = 0;
        auto consider = [&](int i, int j, Vec2 x) {
            const double d = dist_to_set(x);
            if (d <= 0.0) return;
            const double v = abs_at(i, j) + 2.0 * std::log(d);
            if (v > best) { best = v; bi = i; bj = j; }
        };
        consider(-1, 0, {0.0, 0.0});
        for (int i = 0; i < g.n_r; ++i)
            for (int j = 0; j < g.n_theta; ++j)
                consider(i, j, g.node(i, j));
        result.final_sup = best;
        if (bi == -2 || best <= c1_threshold) break;
        if (static_cast<int>(centers.size()) >= max_bubbles) {
            result.overflow = true;
            break;
        }

        // (c): hill-climb to the nearby local maximizer of |u|
        int ci = bi, cj = bj;
        for (int hop = 0; hop < g.n_r + g.n_theta; ++hop) {
            double cur = abs_at(ci, cj);
            int ni = ci, nj = cj;
            auto try_node = [&](int i, int j) {
                if (i >= g.n_r - 1) return;   // centers stay strictly interior
                const double v = abs_at(i, j);
                if (v > cur) { cur = v; ni = i; nj = j; }
            };
            if (ci < 0) {
                for (int j = 0; j < g.n_theta; ++j) try_node(0, j);
            } else {
                try_node(ci, (cj + 1) % g.n_theta);
                try_node(ci, (cj + g.n_theta - 1) % g.n_theta);
                try_node(ci + 1, cj);
                if (ci == 0) try_node(-1, 0);
                else try_node(ci - 1, cj);
            }
            if (ni == ci && nj == cj) break;
            ci = ni;
            cj = nj;
        }
        centers.push_back(ci < 0 ? Vec2{0.0, 0.0} : g.node(ci, cj));

        BubbleDisk disk;
        disk.center = centers.back();
        disk.peak = abs_at(ci, cj);
        disk.sign = (ci < 0 ? field.center_value() : field.at(ci, cj)) >= 0.0 ? +1 : -1;
        disk.eps = std::exp(-0.5 * disk.peak);
        result.disks.push_back(disk);
    }

    // radius search and disjointness caps against the full center set
    for (std::size_t k = 0; k < result.disks.size(); ++k) {
        BubbleDisk& disk = result.disks[k];
        double cap = opt.boundary_fraction * (R - norm(disk.center));
        for (std::size_t m = 0; m < centers.size(); ++m)
            if (m != k) cap = std::min(cap, opt.radius_cap_fraction * dist(disk.center, centers[m]));
        if (!(cap > 1e-8 * R)) {
            disk.l = 0.0;   // unresolvable disk (duplicate or rim detection)
            continue;
        }
        const double rmin =
            std::clamp(std::max(2.0 * disk.eps, g.cell_size(disk.center)), 1e-8 * R, 0.5 * cap);

        auto feasible = [&](double rho) {
            CircleProbe probe{disk.center, rho, opt.circle_samples};
            double hi = -std::numeric_limits<double>::infinity();
            const double dth = 2.0 * M_PI / probe.n_samples;
            for (int s = 0; s < probe.n_samples; ++s) {
                const double t = dth * s;
                hi = std::max(hi, std::abs(field(Vec2{disk.center.x + rho * std::cos(t),
                                                      disk.center.y + rho * std::sin(t)})));
            }
            return hi + 2.0 * std::log(rho) <= c1_threshold;
        };

        double l = 0.0;
        double lo_infeasible = 0.0;
        const int n = opt.radius_scan_steps;
        for (int s = n; s >= 0; --s) {
            const double rho = rmin * std::pow(cap / rmin, double(s) / n);
            if (feasible(rho)) { l = rho; break; }
            lo_infeasible = rho;
        }
        if (l > 0.0 && lo_infeasible > l) {
            double a = l, b = lo_infeasible;   // largest feasible in [a, b)
            for (int s = 0; s < 20; ++s) {
                const double mid = 0.5 * (a + b);
                if (feasible(mid)) a = mid;
                else b = mid;
            }
            l = a;
        }
        if (l <= 0.0) l = rmin;   // no feasible circle found; minimal disk
        disk.l = l;
    }

    // drop disks violating the concentration-scale invariant l/eps >= ratio
    std::vector<BubbleDisk> kept;
    for (auto& d : result.disks)
        if (d.l >= opt.min_scale_ratio * d.eps) kept.push_back(d);
    result.disks = std::move(kept);

    // (post-pass) profile fit on the rescaled window
    for (auto& disk : result.disks) {
        const double h = disk.sign > 0 ? pair.h1(disk.center) : pair.h2(disk.center);
        double window = opt.fit_window;
        const double room = (R - norm(disk.center)) / disk.eps;
        window = std::min(window, 0.95 * room);
        const Field base = disk.sign > 0 ? field : field.negated();
        const Field dil = dilate(base, disk.center, disk.eps, window, opt.fit_n_r, opt.fit_n_theta);
        disk.fit_quality = detail::fit_rescaled_profile(dil, h, opt.fit_max_iters);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Groups (distance-comparability clustering)
// ---------------------------------------------------------------------------

/// A cluster of bubbling disks with mutually comparable separations, far from
/// all other disks.
struct Group {
    std::vector<int> member_indices;   ///< indices into the input disk list
    Vec2 hull_center;
    double hull_radius = 0.0;
    double separation_ratio = std::numeric_limits<double>::infinity();
    double comparability_ratio = 1.0;  ///< max/min pairwise member distance
};

/// Single-linkage merging at increasing scales: at each scale, disks (or earlier
/// clusters) within ratio_tau of the current minimum separation merge; a merged
/// cluster is emitted as a Group once its distance to everything else exceeds
/// gap_factor times its diameter, otherwise it keeps merging at the next scale.
/// Deterministic and independent of input order (ties broken by lexicographic
/// center coordinates).
inline std::vector<Group> group_bubbles(const std::vector<BubbleDisk>& disks, double ratio_tau = 3.0,
                                        double gap_factor = 10.0)
{
    if (!(ratio_tau > 1.0) || !(gap_factor > 1.0))
        throw std::invalid_argument("group_bubbles: ratio_tau and gap_factor must exceed 1");
    const int n = static_cast<int>(disks.size());
    std::vector<Group> out;
    if (n == 0) return out;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (disks[a].center.x != disks[b].center.x) return disks[a].center.x < disks[b].center.x;
        if (disks[a].center.y != disks[b].center.y) return disks[a].center.y < disks[b].center.y;
        return a < b;
    });

    std::vector<std::vector<int>> active;   // clusters of original indices
    for (int k : order) active.push_back({k});

    auto cdist = [&](const std::vector<int>& A, const std::vector<int>& B) {
        double d = std::numeric_limits<double>::infinity();
        for (int a : A)
            for (int b : B) d = std::min(d, dist(disks[a].center, disks[b].center));
        return d;
    };
    auto emit = [&](const std::vector<int>& members) {
        Group grp;
        grp.member_indices = members;
        std::sort(grp.member_indices.begin(), grp.member_indices.end());
        Vec2 c{0.0, 0.0};
        for (int k : members) c = c + disks[k].center;
        grp.hull_center = (1.0 / members.size()) * c;
        for (int k : members)
            grp.hull_radius = std::max(grp.hull_radius, dist(disks[k].center, grp.hull_center));
        double max_intra = 0.0, min_intra = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                const double d = dist(disks[members[a]].center, disks[members[b]].center);
                max_intra = std::max(max_intra, d);
                min_intra = std::min(min_intra, d);
            }
        if (members.size() >= 2) grp.comparability_ratio = max_intra / min_intra;
        double min_out = std::numeric_limits<double>::infinity();
        for (int k = 0; k < n; ++k) {
            if (std::find(members.begin(), members.end(), k) != members.end()) continue;
            for (int m : members) min_out = std::min(min_out, dist(disks[k].center, disks[m].center));
        }
        grp.separation_ratio = (max_intra > 0.0) ? min_out / max_intra
                                                 : std::numeric_limits<double>::infinity();
        out.push_back(std::move(grp));
    };

    while (!active.empty()) {
        if (active.size() == 1) {
            emit(active[0]);
            break;
        }
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < active.size(); ++a)
            for (std::size_t b = a + 1; b < active.size(); ++b)
                dmin = std::min(dmin, cdist(active[a], active[b]));

        // components of the graph "distance <= tau * dmin"
        const int m = static_cast<int>(active.size());
        std::vector<int> comp(m, -1);
        int ncomp = 0;
        for (int s = 0; s < m; ++s) {
            if (comp[s] >= 0) continue;
            std::vector<int> stack{s};
            comp[s] = ncomp;
            while (!stack.empty()) {
                const int a = stack.back();
                stack.pop_back();
                for (int b = 0; b < m; ++b)
                    if (comp[b] < 0 && cdist(active[a], active[b]) <= ratio_tau * dmin) {
                        comp[b] = ncomp;
                        stack.push_back(b);
                    }
            }
            ++ncomp;
        }

        std::vector<std::vector<int>> next;
        for (int c = 0; c < ncomp; ++c) {
            std::vector<int> merged;
            int parts = 0;
            for (int s = 0; s < m; ++s)
                if (comp[s] == c) {
                    merged.insert(merged.end(), active[s].begin(), active[s].end());
                    ++parts;
                }
            if (parts == 1) {
                next.push_back(std::move(merged));
                continue;
            }
            double max_intra = 0.0;
            for (std::size_t a = 0; a < merged.size(); ++a)
                for (std::size_t b = a + 1; b < merged.size(); ++b)
                    max_intra = std::max(max_intra,
                                         dist(disks[merged[a]].center, disks[merged[b]].center));
            double min_out = std::numeric_limits<double>::infinity();
            for (int k = 0; k < n; ++k) {
                if (std::find(merged.begin(), merged.end(), k) != merged.end()) continue;
                for (int q : merged) min_out = std::min(min_out, dist(disks[k].center, disks[q].center));
            }
            if (min_out >= gap_factor * max_intra)
                emit(merged);
            else
                next.push_back(std::move(merged));
        }
        if (next.size() == active.size())   // nothing merged or emitted: emit everything
            {
                for (auto& c : next) emit(c);
                break;
            }
        active = std::move(next);
    }

    std::sort(out.begin(), out.end(), [](const Group& a, const Group& b) {
        if (a.hull_center.x != b.hull_center.x) return a.hull_center.x < b.hull_center.x;
        return a.hull_center.y < b.hull_center.y;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Decay-ladder scan
// ---------------------------------------------------------------------------

struct LadderPoint {
    double r = 0.0;
    DecayClass u_class = DecayClass::slow;
    DecayClass minus_class = DecayClass::slow;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
};

struct LadderPlateau {
    double r_lo = 0.0, r_hi = 0.0;
    double sigma1 = 0.0, sigma2 = 0.0;   ///< masses at the plateau's outer radius
};

struct LadderReport {
    std::vector<LadderPoint> points;
    std::vector<LadderPlateau> plateaus;
};

struct LadderOptions {
    int n_radii = 40;
    double threshold_N = 5.0;
    int circle_samples = 512;
    PatchOptions patch;
};

/// Sweeps radii geometrically, recording decay classes and local masses; maximal
/// runs where every active component decays fast are emitted as plateaus (masses
/// frozen there), separated by transition layers where a slow component's mass
/// grows.  An inactive component counts as vacuously fast.
inline LadderReport decay_ladder_scan(const Field& field, const CoefficientPair& pair, Vec2 center,
                                      double r_min, double r_max, const LadderOptions& opt = {})
{
    if (!(r_min > 0.0) || !(r_min < r_max))
        throw std::invalid_argument("decay_ladder_scan: need 0 < r_min < r_max");
    std::vector<double> radii(opt.n_radii);
    for (int k = 0; k < opt.n_radii; ++k)
        radii[k] = r_min * std::pow(r_max / r_min, double(k) / (opt.n_radii - 1));
    const MassProfile mp = mass_profile(field, pair, center, radii, opt.patch);

    LadderReport rep;
    rep.points.resize(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const DecayPair dc = decay_class(field, center, radii[k], opt.threshold_N, opt.circle_samples);
        LadderPoint& pt = rep.points[k];
        pt.r = radii[k];
        pt.u_class = pair.first_active() ? dc.u_class : DecayClass::fast;
        pt.minus_class = pair.second_active() ? dc.minus_class : DecayClass::fast;
        pt.sigma1 = mp.sigma1[k];
        pt.sigma2 = mp.sigma2[k];
    }
    // segment into both-fast plateaus
    std::size_t k = 0;
    while (k < rep.points.size()) {
        if (rep.points[k].u_class == DecayClass::fast &&
            rep.points[k].minus_class == DecayClass::fast) {
            std::size_t e = k;
            while (e + 1 < rep.points.size() &&
                   rep.points[e + 1].u_class == DecayClass::fast &&
                   rep.points[e + 1].minus_class == DecayClass::fast)
                ++e;
            rep.plateaus.push_back({rep.points[k].r, rep.points[e].r, rep.points[e].sigma1,
                                    rep.points[e].sigma2});
            k = e + 1;
        } else {
            ++k;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Bounded-oscillation diagnostic
// ---------------------------------------------------------------------------

struct OscillationProbe {
    Vec2 x;
    double ball_radius = 0.0;
    double oscillation = 0.0;
};

struct OscillationReport {
    std::vector<OscillationProbe> probes;
    double max_oscillation = 0.0;
    bool anomaly = false;   ///< some oscillation exceeded the diagnostic bound
};

/// Samples random points away from the detected disks and measures the
/// oscillation of u over B(x, d(x, centers)/2) by dense structured sampling.
/// Bounded oscillation is expected; values above the threshold are flagged.
inline OscillationReport oscillation_check(const Field& field, const std::vector<BubbleDisk>& disks,
                                           int probes = 20, unsigned seed = 12345,
                                           double anomaly_threshold = 10.0)
{
    const DiskGrid& g = field.grid();
    const double R = g.radius;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    OscillationReport rep;
    rep.probes.resize(std::max(probes, 0));
    for (auto& pr : rep.probes) {
        const double rr = 0.9 * R * std::sqrt(uni(rng));
        const double th = 2.0 * M_PI * uni(rng);
        pr.x = {rr * std::cos(th), rr * std::sin(th)};
        double d = R - norm(pr.x);
        for (const auto& dsk : disks) d = std::min(d, dist(pr.x, dsk.center));
        pr.ball_radius = 0.5 * d;
    }
    detail::parallel_for(static_cast<int>(rep.probes.size()), [&](int k) {
        OscillationProbe& pr = rep.probes[k];
        double lo = field(pr.x), hi = lo;
        const int nrad = 16, nang = 32;
        for (int i = 1; i <= nrad; ++i) {
            const double rho = pr.ball_radius * i / nrad;
            for (int j = 0; j < nang; ++j) {
                const double t = 2.0 * M_PI * j / nang;
                const double v =
                    field(Vec2{pr.x.x + rho * std::cos(t), pr.x.y + rho * std::sin(t)});
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        pr.oscillation = hi - lo;
    });
    for (const auto& pr : rep.probes)
        rep.max_oscillation = std::max(rep.max_oscillation, pr.oscillation);
    rep.anomaly = rep.max_oscillation > anomaly_threshold;
    return rep;
}

} // namespace sglab

#endif
