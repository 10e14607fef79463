#ifndef SGLAB_FIELD_HPP
#define SGLAB_FIELD_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "detail/parallel.hpp"
#include "grid.hpp"

namespace sglab {

/// A scalar function sampled on a DiskGrid (ring values plus one origin value).
/// Immutable value object; construction rejects non-finite samples.
class Field {
public:
    Field(std::shared_ptr<const DiskGrid> grid, std::vector<double> values, double center_value,
          std::string label = {})
        : grid_(std::move(grid)), values_(std::move(values)), center_(center_value),
          label_(std::move(label))
    {
        if (!grid_)
            throw std::invalid_argument("Field: null grid");
        if (values_.size() != grid_->node_count())
            throw std::invalid_argument("Field: value count does not match grid");
        if (!std::isfinite(center_))
            throw std::invalid_argument("Field '" + label_ + "': non-finite center value");
        for (std::size_t k = 0; k < values_.size(); ++k)
            if (!std::isfinite(values_[k]))
                throw std::invalid_argument("Field '" + label_ + "': non-finite value at node " +
                                            std::to_string(k));
    }

    /// Builds a field by sampling fn at every node (and the origin).
    static Field sample(std::shared_ptr<const DiskGrid> grid,
                        const std::function<double(Vec2)>& fn, std::string label = {});

    const DiskGrid& grid() const { return *grid_; }
    std::shared_ptr<const DiskGrid> grid_ptr() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double center_value() const { return center_; }
    const std::string& label() const { return label_; }

    double at(int i, int j) const { return values_[grid_->index(i, j)]; }

    /// Bilinear interpolation in (r, theta) with periodic wrap in theta; points
    /// inside the innermost ring blend toward the origin value.  Monotone, no
    /// overshoot near sharp peaks.
    double operator()(Vec2 p) const
    {
        const DiskGrid& g = *grid_;
        const double r = norm(p);
        if (!(r <= g.radius * (1.0 + 1e-12)))
            throw std::domain_error("Field: interpolation point outside the disk (r = " +
                                    std::to_string(r) + ")");
        double th = std::atan2(p.y, p.x);
        if (th < 0.0) th += 2.0 * M_PI;
        double jt = th / g.dtheta;
        int j = static_cast<int>(jt);
        j = std::clamp(j, 0, g.n_theta - 1);
        const double tj = std::clamp(jt - j, 0.0, 1.0);
        const int j1 = (j + 1) % g.n_theta;

        auto on_ring = [&](int i) {
            return values_[g.index(i, j)] * (1.0 - tj) + values_[g.index(i, j1)] * tj;
        };

        int hi = static_cast<int>(std::lower_bound(g.radial_nodes.begin(), g.radial_nodes.end(), r) -
                                  g.radial_nodes.begin());
        if (hi >= g.n_r) hi = g.n_r - 1;
        const double rhi = g.radial_nodes[hi];
        double lo_val, rlo;
        if (hi == 0) {
            lo_val = center_;
            rlo = 0.0;
        } else {
            lo_val = on_ring(hi - 1);
            rlo = g.radial_nodes[hi - 1];
        }
        const double t = std::clamp((r - rlo) / (rhi - rlo), 0.0, 1.0);
        return lo_val * (1.0 - t) + on_ring(hi) * t;
    }

    std::function<double(Vec2)> sampler() const
    {
        return [*this](Vec2 p) { return (*this)(p); };
    }

    Field negated() const
    {
        std::vector<double> v(values_.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = -values_[k];
        return Field(grid_, std::move(v), -center_, label_.empty() ? "" : "-(" + label_ + ")");
    }

    Field with_label(std::string label) const
    {
        Field f = *this;
        f.label_ = std::move(label);
        return f;
    }

    double max_abs() const
    {
        double m = std::abs(center_);
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::shared_ptr<const DiskGrid> grid_;
    std::vector<double> values_;
    double center_;
    std::string label_;
};

inline Field Field::sample(std::shared_ptr<const DiskGrid> grid,
                           const std::function<double(Vec2)>& fn, std::string label)
{
    std::vector<double> v(grid->node_count());
    const DiskGrid& g = *grid;
    detail::parallel_for(g.n_r, [&](int i) {
        for (int j = 0; j < g.n_theta; ++j)
            v[g.index(i, j)] = fn(g.node(i, j));
    });
    const double c = fn({0.0, 0.0});
    return Field(std::move(grid), std::move(v), c, std::move(label));
}

// ---------------------------------------------------------------------------
// Snapshot format "SGFLD1": magic, n_r and n_theta as u32 LE, radius and the
// center value as f64 LE, then ring values (radial index outer, angular inner)
// as f64 LE.  Byte-exact across platforms.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v)
{
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}
inline void put_f64(std::string& out, double x)
{
    std::uint64_t v;
    std::memcpy(&v, &x, 8);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}
inline std::uint32_t get_u32(const unsigned char* p)
{
    std::uint32_t v = 0;
    for (int b = 3; b >= 0; --b) v = (v << 8) | p[b];
    return v;
}
inline double get_f64(const unsigned char* p)
{
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
    double x;
    std::memcpy(&x, &v, 8);
    return x;
}

} // namespace detail

inline constexpr char kSnapshotMagic[6] = {'S', 'G', 'F', 'L', 'D', '1'};

inline std::string encode_snapshot(const Field& f)
{
    const DiskGrid& g = f.grid();
    std::string out;
    out.reserve(6 + 8 + 16 + 8 * f.values().size());
    out.append(kSnapshotMagic, 6);
    detail::put_u32(out, static_cast<std::uint32_t>(g.n_r));
    detail::put_u32(out, static_cast<std::uint32_t>(g.n_theta));
    detail::put_f64(out, g.radius);
    detail::put_f64(out, f.center_value());
    for (double v : f.values()) detail::put_f64(out, v);
    return out;
}

inline void write_snapshot(const Field& f, const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open snapshot file for writing: " + path);
    const std::string bytes = encode_snapshot(f);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os)
        throw std::runtime_error("short write on snapshot file: " + path);
}

/// Reads a snapshot; the grid is rebuilt from the stored shape with the given
/// radial stretch (the byte format stores shape and values only).
inline Field read_snapshot(const std::string& path, double stretch = 1.05)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open snapshot file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (bytes.size() < 6 || std::memcmp(bytes.data(), kSnapshotMagic, 6) != 0)
        throw std::runtime_error("snapshot '" + path + "': bad magic (not an SGFLD1 file)");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 6 + 8 + 16)
        throw std::runtime_error("snapshot '" + path + "': truncated header");
    const std::uint32_t n_r = detail::get_u32(p + 6);
    const std::uint32_t n_theta = detail::get_u32(p + 10);
    const double radius = detail::get_f64(p + 14);
    const double center = detail::get_f64(p + 22);
    if (n_r < 8 || n_theta < 8 || n_r > (1u << 20) || n_theta > (1u << 20))
        throw std::runtime_error("snapshot '" + path + "': implausible grid shape " +
                                 std::to_string(n_r) + "x" + std::to_string(n_theta));
    const std::size_t expect = 6 + 8 + 16 + 8ull * n_r * n_theta;
    if (bytes.size() != expect)
        throw std::runtime_error("snapshot '" + path + "': expected " + std::to_string(expect) +
                                 " bytes, got " + std::to_string(bytes.size()));
    auto grid = build_grid(static_cast<int>(n_r), static_cast<int>(n_theta), radius, stretch);
    std::vector<double> vals(grid->node_count());
    for (std::size_t k = 0; k < vals.size(); ++k)
        vals[k] = detail::get_f64(p + 30 + 8 * k);
    return Field(std::move(grid), std::move(vals), center, path);
}

} // namespace sglab

#endif
