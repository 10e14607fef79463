#ifndef SGLAB_EXPERIMENT_HPP
#define SGLAB_EXPERIMENT_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "config.hpp"
#include "field.hpp"
#include "pohozaev.hpp"
#include "report_json.hpp"
#include "solver.hpp"
#include "version.hpp"

namespace sglab {

namespace detail {

inline std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fnv1a64_hex(const std::string& bytes)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

} // namespace detail

/// Writes artifacts into one output directory and records them (with content
/// hashes) for the manifest.  All writes are deterministic for a fixed config.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::string dir, bool quiet) : dir_(std::move(dir)), quiet_(quiet)
    {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        const auto probe = std::filesystem::path(dir_) / ".write_probe";
        std::ofstream os(probe, std::ios::binary);
        if (!os)
            throw std::runtime_error("output directory is not writable: " + dir_);
        os.close();
        std::filesystem::remove(probe, ec);
    }

    void write_bytes(const std::string& name, const std::string& bytes)
    {
        const auto path = std::filesystem::path(dir_) / name;
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot write artifact: " + path.string());
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        os.close();
        entries_.push_back({name, detail::fnv1a64_hex(bytes)});
        if (!quiet_)
            std::cout << "wrote " << path.string() << " (" << bytes.size() << " bytes)\n";
    }

    void write_json(const std::string& name, const json& j) { write_bytes(name, j.dump(2) + "\n"); }

    void write_manifest(const json& config_echo, const std::string& mode)
    {
        json artifacts = json::array();
        for (const auto& [name, hash] : entries_)
            artifacts.push_back({{"file", name}, {"hash", "fnv1a64:" + hash}});
        json manifest = {{"generator", std::string("sglab ") + kVersion},
                         {"mode", mode},
                         {"config", config_echo},
                         {"artifacts", artifacts}};
        const auto path = std::filesystem::path(dir_) / "manifest.json";
        std::ofstream os(path, std::ios::binary);
        os << manifest.dump(2) << "\n";
        if (!quiet_)
            std::cout << "wrote " << path.string() << "\n";
    }

    /// Wall-clock stage timings live outside the manifest so reports stay
    /// byte-identical between runs.
    void write_timings(const std::vector<std::pair<std::string, double>>& timings)
    {
        const auto path = std::filesystem::path(dir_) / "timings.log";
        std::ofstream os(path);
        for (const auto& [stage, ms] : timings)
            os << stage << "\t" << ms << " ms\n";
    }

    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    bool quiet_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

namespace detail {

inline json config_echo(const cfg::Table& raw)
{
    json j = json::object();
    for (const auto& [k, v] : raw) {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, std::vector<std::vector<double>>>) {
                    json rows = json::array();
                    for (const auto& row : x) rows.push_back(row);
                    j[k] = rows;
                } else {
                    j[k] = x;
                }
            },
            v.v);
    }
    return j;
}

struct StageTimer {
    std::vector<std::pair<std::string, double>> timings;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    void mark(const std::string& stage)
    {
        const auto t1 = std::chrono::steady_clock::now();
        timings.emplace_back(stage, std::chrono::duration<double, std::milli>(t1 - t0).count());
        t0 = t1;
    }
};

inline std::string mass_profile_csv(const MassProfile& mp)
{
    std::string csv = "r,sigma1,sigma2\n";
    for (std::size_t k = 0; k < mp.radii.size(); ++k)
        csv += csv_num(mp.radii[k]) + "," + csv_num(mp.sigma1[k]) + "," + csv_num(mp.sigma2[k]) + "\n";
    return csv;
}

/// The detect -> group -> masses -> Pohozaev -> quantization pipeline shared by
/// the synthetic and analyze-snapshot modes.
inline int analyze_field(const Field& field, const ExperimentConfig& c, ArtifactWriter& out,
                         StageTimer& timer)
{
    const CoefficientPair pair = c.make_pair();
    const auto validation = validate_coefficients(pair, field.grid());
    if (!validation.ok)
        throw ConfigError("coefficient validation failed: " + validation.message);

    PatchOptions patch{c.patch_n_r, c.patch_n_theta, c.stretch};
    SelectionOptions sel;
    const auto selection = select_bubbles(field, pair, c.c1_threshold, c.max_bubbles, sel);
    timer.mark("select_bubbles");

    const auto groups = group_bubbles(selection.disks, c.ratio_tau, c.gap_factor);
    timer.mark("group_bubbles");

    const double R = field.grid().radius;
    json disks_json = json::array();
    json sweep_csv_rows;
    std::string sweep_csv = "sigma1,sigma2,residual,m,orientation,distance\n";
    for (std::size_t k = 0; k < selection.disks.size(); ++k) {
        const BubbleDisk& d = selection.disks[k];
        PohozaevOptions popt;
        popt.patch = patch;
        popt.threshold_N = c.threshold_N;
        const auto poho = pohozaev_report(field, pair, d.center, d.l, popt);
        const auto match = classify_quantization(poho.sigma1, poho.sigma2, c.m_max);

        json dj = to_json(d);
        dj["pohozaev"] = to_json(poho);
        dj["quantization"] = to_json(match);
        disks_json.push_back(dj);

        sweep_csv += csv_num(poho.sigma1) + "," + csv_num(poho.sigma2) + "," +
                     csv_num(pohozaev_consistency(poho.sigma1, poho.sigma2)) + "," +
                     std::to_string(match.m) + "," + std::string(1, match.orientation) + "," +
                     csv_num(match.distance) + "\n";

        const double r_lo = std::max({2.0 * d.eps, field.grid().cell_size(d.center), 1e-4 * R});
        const double r_hi = std::max(d.l, 1.01 * r_lo);
        std::vector<double> radii(16);
        for (int q = 0; q < 16; ++q)
            radii[q] = r_lo * std::pow(r_hi / r_lo, double(q) / 15);
        const auto mp = mass_profile(field, pair, d.center, radii, patch);
        out.write_bytes("mass_profile_disk" + std::to_string(k) + ".csv", mass_profile_csv(mp));
    }
    out.write_json("disks.json", disks_json);
    out.write_bytes("quantization_sweep.csv", sweep_csv);
    timer.mark("per_disk_reports");

    json groups_json = json::array();
    json ladders_json = json::array();
    for (std::size_t gidx = 0; gidx < groups.size(); ++gidx) {
        const Group& grp = groups[gidx];
        json gj = to_json(grp);
        double eps_max = 0.0, l_max = 0.0;
        for (int m : grp.member_indices) {
            eps_max = std::max(eps_max, selection.disks[m].eps);
            l_max = std::max(l_max, selection.disks[m].l);
        }
        double r_lo = c.ladder_r_min > 0.0 ? c.ladder_r_min
                                           : std::max(2.0 * (grp.hull_radius + eps_max),
                                                      field.grid().cell_size(grp.hull_center) * 4.0);
        double r_hi = c.ladder_r_max > 0.0 ? c.ladder_r_max : 0.9 * (R - norm(grp.hull_center));
        if (r_lo < r_hi) {
            LadderOptions lopt;
            lopt.n_radii = c.ladder_count;
            lopt.threshold_N = c.threshold_N;
            lopt.patch = patch;
            const auto ladder =
                decay_ladder_scan(field, pair, grp.hull_center, r_lo, r_hi, lopt);
            json lj = to_json(ladder);
            lj["group"] = static_cast<int>(gidx);
            if (!ladder.plateaus.empty()) {
                const auto& last = ladder.plateaus.back();
                lj["outermost_plateau_match"] =
                    to_json(classify_quantization(last.sigma1, last.sigma2, c.m_max));
            }
            ladders_json.push_back(lj);
        }
        groups_json.push_back(gj);
    }
    out.write_json("groups.json", groups_json);
    out.write_json("ladders.json", ladders_json);
    timer.mark("ladders");

    const auto osc = oscillation_check(field, selection.disks, c.oscillation_probes, c.seed);
    out.write_json("oscillation.json", to_json(osc));

    json summary = {{"disk_count", static_cast<int>(selection.disks.size())},
                    {"selection_overflow", selection.overflow},
                    {"selection_final_sup", json_safe(selection.final_sup)},
                    {"group_count", static_cast<int>(groups.size())},
                    {"coefficients", {{"h1", c.h1_spec}, {"h2", c.h2_spec}}},
                    {"validation",
                     {{"min1", validation.min1},
                      {"max1", validation.max1},
                      {"min2", validation.min2},
                      {"max2", validation.max2},
                      {"c1_seminorm_1", validation.c1_seminorm_1},
                      {"c1_seminorm_2", validation.c1_seminorm_2}}}};
    out.write_json("summary.json", summary);
    timer.mark("summary");
    return 0;
}

} // namespace detail

/// Runs a full experiment from a validated config.  Returns the process exit
/// status: 0 success, 2 validation failure, 3 solver non-convergence (partial
/// artifacts are still written).
inline int run_experiment(const ExperimentConfig& config, bool quiet = true,
                          const std::string& snapshot_path = {})
{
    ArtifactWriter out(config.output_dir, quiet);
    detail::StageTimer timer;
    int status = 0;

    switch (config.mode) {
        case ExperimentMode::synthetic: {
            auto grid = build_grid(config.n_r, config.n_theta, config.radius, config.stretch);
            const Field field = synth_family(config.family, grid);
            timer.mark("synthesize");
            out.write_bytes("field.sgfld", encode_snapshot(field));
            status = detail::analyze_field(field, config, out, timer);
            break;
        }
        case ExperimentMode::analyze_snapshot: {
            if (snapshot_path.empty())
                throw ConfigError("analyze-snapshot mode needs a snapshot path");
            const Field field = read_snapshot(snapshot_path, config.stretch);
            timer.mark("load_snapshot");
            status = detail::analyze_field(field, config, out, timer);
            break;
        }
        case ExperimentMode::continuation: {
            auto grid = build_grid(config.n_r, config.n_theta, config.radius, config.stretch);
            const CoefficientPair pair = config.make_pair();
            const auto validation = validate_coefficients(pair, *grid);
            if (!validation.ok)
                throw ConfigError("coefficient validation failed: " + validation.message);
            MeanFieldProblem prob{grid, pair.h1, pair.h2, 0.0, 0.0, 0.0};
            ContinuationOptions copt;
            copt.solver.tol = config.solver_tol;
            copt.solver.max_iters = config.solver_max_iters;
            const auto steps = continuation(prob, config.path, copt);
            timer.mark("continuation");

            json steps_json = json::array();
            std::string csv = "rho1,rho2,converged,newton_iters,sup_norm,center_value\n";
            for (std::size_t k = 0; k < steps.size(); ++k) {
                const auto& st = steps[k];
                json sj = to_json(st.report);
                sj["failed"] = st.failed;
                if (st.cold_start_iters >= 0) sj["cold_start_iters"] = st.cold_start_iters;
                steps_json.push_back(sj);
                csv += csv_num(st.report.rho1) + "," + csv_num(st.report.rho2) + "," +
                       (st.report.converged ? "1" : "0") + "," +
                       std::to_string(st.report.newton_iters) + "," + csv_num(st.report.sup_norm) +
                       "," + csv_num(st.report.center_value) + "\n";
                if (st.field)
                    out.write_bytes("field_step" + std::to_string(k) + ".sgfld",
                                    encode_snapshot(*st.field));
                if (st.failed) status = 3;
            }
            if (steps.size() < config.path.size()) status = 3;
            out.write_json("steps.json", steps_json);
            out.write_bytes("sup_norm.csv", csv);
            timer.mark("reports");
            break;
        }
    }

    const char* mode_name = config.mode == ExperimentMode::synthetic ? "synthetic"
                            : config.mode == ExperimentMode::continuation ? "continuation"
                                                                          : "analyze-snapshot";
    out.write_manifest(detail::config_echo(config.raw), mode_name);
    out.write_timings(timer.timings);
    return status;
}

} // namespace sglab

#endif
