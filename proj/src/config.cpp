#include "bhlab/config.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bhlab/experiments.hpp"
#include "bhlab/serialize.hpp"

namespace bhlab::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kReportSchemaVersion = 1;

void require_keys(const json& obj, const std::vector<std::string>& known, const std::string& path) {
    if (!obj.is_object()) throw ConfigInvalid(path, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigInvalid(path + "." + key, "unknown key");
    }
}

double get_num(const json& obj, const std::string& key, double fallback, const std::string& path) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigInvalid(path + "." + key, "expected a number");
    return obj[key].get<double>();
}

bool get_bool(const json& obj, const std::string& key, bool fallback, const std::string& path) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) throw ConfigInvalid(path + "." + key, "expected a boolean");
    return obj[key].get<bool>();
}

geom::Point get_point(const json& obj, const std::string& key, geom::Point fallback, const std::string& path) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj[key];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigInvalid(path + "." + key, "expected [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<double> get_num_list(const json& obj, const std::string& key, std::vector<double> fallback,
                                 const std::string& path) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj[key];
    if (!v.is_array()) throw ConfigInvalid(path + "." + key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigInvalid(path + "." + key, "expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

/// Exclusive lock file; one experiment process per output directory.
class LockFile {
  public:
    explicit LockFile(const fs::path& dir) : path_(dir / ".lock") {
        const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0)
            throw IoError("output directory is locked by another run (remove " + path_.string() +
                          " if that run is gone)");
        ::close(fd);
    }
    ~LockFile() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    LockFile(const LockFile&) = delete;
    LockFile& operator=(const LockFile&) = delete;

  private:
    fs::path path_;
};

}  // namespace

// -------------------------------------------------------- domain serialization

json domain_to_json(const geom::Domain& d) {
    using namespace geom;
    return d.visit([](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, HalfPlane>) {
            return json{{"type", "half_plane"}};
        } else if constexpr (std::is_same_v<T, Strip>) {
            return json{{"type", "strip"}, {"halfwidth", v.halfwidth}};
        } else if constexpr (std::is_same_v<T, Wedge>) {
            return json{{"type", "wedge"},
                        {"half_angle", v.half_angle},
                        {"apex", {v.apex.x, v.apex.y}},
                        {"axis_angle", v.axis_angle}};
        } else if constexpr (std::is_same_v<T, Disk>) {
            return json{{"type", "disk"}, {"center", {v.center.x, v.center.y}}, {"radius", v.radius}};
        } else if constexpr (std::is_same_v<T, DiskComplement>) {
            return json{{"type", "disk_complement"}, {"radius", v.radius}};
        } else if constexpr (std::is_same_v<T, DashedHalfPlane>) {
            return json{{"type", "dashed_half_plane"}, {"period", v.period}, {"seg_half_len", v.seg_half_len}};
        } else if constexpr (std::is_same_v<T, DashedWedge>) {
            return json{{"type", "dashed_wedge"},
                        {"half_angle", v.half_angle},
                        {"gap_len", v.gap_len},
                        {"gap_period", v.gap_period}};
        } else if constexpr (std::is_same_v<T, DiskLattice>) {
            return json{{"type", "disk_lattice"},
                        {"gen_a", {v.gen_a.x, v.gen_a.y}},
                        {"gen_b", {v.gen_b.x, v.gen_b.y}},
                        {"hole_radius", v.hole_radius}};
        } else if constexpr (std::is_same_v<T, GraphComplement>) {
            const char* mask = v.mask == LatticeMask::All ? "all"
                               : v.mask == LatticeMask::RightHalfPlane ? "right_half_plane"
                                                                       : "wedge_complement";
            return json{{"type", "graph_complement"},
                        {"hole_radius", v.hole_radius},
                        {"mask", mask},
                        {"mask_alpha", v.mask_alpha}};
        } else if constexpr (std::is_same_v<T, StaircaseWedge>) {
            json angles = json::array(), radii = json::array();
            std::size_t n = v.stages.size() - (v.quarter_plane_tail ? 1 : 0);
            for (std::size_t i = 0; i < n; ++i) {
                angles.push_back(v.stages[i].alpha);
                radii.push_back(v.stages[i].radius);
            }
            json out{{"type", "staircase_wedge"}, {"angles", angles}, {"radii", radii}};
            if (v.quarter_plane_tail) {
                out["quarter_plane_tail"] = true;
                out["tail_radius"] = v.stages.back().radius;
            }
            return out;
        } else if constexpr (std::is_same_v<T, DomainUnion> || std::is_same_v<T, DomainIntersection>) {
            json parts = json::array();
            for (const auto& p : v.parts) parts.push_back(domain_to_json(p));
            return json{{"type", std::is_same_v<T, DomainUnion> ? "union" : "intersection"}, {"parts", parts}};
        }
    });
}

geom::Domain domain_from_json(const json& j, const std::string& path) {
    using namespace geom;
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw ConfigInvalid(path, "expected an object with a 'type' string");
    const std::string type = j["type"].get<std::string>();
    try {
        if (type == "half_plane") {
            require_keys(j, {"type"}, path);
            return make_half_plane();
        }
        if (type == "strip") {
            require_keys(j, {"type", "halfwidth"}, path);
            return make_strip(get_num(j, "halfwidth", 1.0, path));
        }
        if (type == "wedge") {
            require_keys(j, {"type", "half_angle", "apex", "axis_angle"}, path);
            return make_wedge(get_num(j, "half_angle", 0.785398163397448309616, path),
                              get_point(j, "apex", {0, 0}, path), get_num(j, "axis_angle", 0.0, path));
        }
        if (type == "disk") {
            require_keys(j, {"type", "center", "radius"}, path);
            return make_disk(get_point(j, "center", {0, 0}, path), get_num(j, "radius", 1.0, path));
        }
        if (type == "disk_complement") {
            require_keys(j, {"type", "radius"}, path);
            return make_disk_complement(get_num(j, "radius", 1.0, path));
        }
        if (type == "dashed_half_plane") {
            require_keys(j, {"type", "period", "seg_half_len"}, path);
            return make_dashed_half_plane(get_num(j, "period", 2.0, path), get_num(j, "seg_half_len", 0.5, path));
        }
        if (type == "dashed_wedge") {
            require_keys(j, {"type", "half_angle", "gap_len", "gap_period"}, path);
            return make_dashed_wedge(get_num(j, "half_angle", 0.785398163397448309616, path),
                                     get_num(j, "gap_len", 0.5, path), get_num(j, "gap_period", 1.0, path));
        }
        if (type == "disk_lattice") {
            require_keys(j, {"type", "gen_a", "gen_b", "hole_radius"}, path);
            return make_disk_lattice(get_point(j, "gen_a", {1, 0}, path), get_point(j, "gen_b", {0, 1}, path),
                                     get_num(j, "hole_radius", 0.25, path));
        }
        if (type == "graph_complement") {
            require_keys(j, {"type", "hole_radius", "mask", "mask_alpha"}, path);
            const std::string mask = j.contains("mask") ? j["mask"].get<std::string>() : "all";
            LatticeMask m = LatticeMask::All;
            if (mask == "right_half_plane") m = LatticeMask::RightHalfPlane;
            else if (mask == "wedge_complement") m = LatticeMask::WedgeComplement;
            else if (mask != "all") throw ConfigInvalid(path + ".mask", "unknown mask '" + mask + "'");
            return make_graph_complement(get_num(j, "hole_radius", 0.25, path), m,
                                         get_num(j, "mask_alpha", 0.0, path));
        }
        if (type == "staircase_wedge") {
            require_keys(j, {"type", "angles", "radii", "quarter_plane_tail", "tail_radius"}, path);
            return make_staircase_wedge(get_num_list(j, "angles", {}, path), get_num_list(j, "radii", {}, path),
                                        get_bool(j, "quarter_plane_tail", false, path),
                                        get_num(j, "tail_radius", 0.0, path));
        }
        if (type == "union" || type == "intersection") {
            require_keys(j, {"type", "parts"}, path);
            if (!j.contains("parts") || !j["parts"].is_array())
                throw ConfigInvalid(path + ".parts", "expected an array of domains");
            std::vector<Domain> parts;
            int i = 0;
            for (const auto& pj : j["parts"])
                parts.push_back(domain_from_json(pj, path + ".parts[" + std::to_string(i++) + "]"));
            return type == "union" ? make_union(std::move(parts)) : make_intersection(std::move(parts));
        }
    } catch (const geom::InvalidDomain& e) {
        throw ConfigInvalid(path, e.what());
    }
    throw ConfigInvalid(path + ".type", "unknown domain type '" + type + "'");
}

std::uint64_t domain_hash(const geom::Domain& d) { return fnv1a64(domain_to_json(d).dump()); }

// ------------------------------------------------------ sampler serialization

json sampler_config_to_json(const mc::SamplerConfig& cfg) {
    json j{{"dt_max", cfg.dt_max},         {"step_factor", cfg.step_factor},
           {"shell_eps", cfg.shell_eps},   {"t_max", cfg.t_max},
           {"scheme", cfg.scheme == mc::Scheme::WalkOnSpheres ? "walk_on_spheres" : "bridge_euler"},
           {"max_steps", cfg.max_steps},   {"dt_min", cfg.dt_min},
           {"origin_excl", cfg.origin_excl}};
    j["r_max"] = cfg.r_max ? json(*cfg.r_max) : json(nullptr);
    return j;
}

mc::SamplerConfig sampler_config_from_json(const json& j, const std::string& path) {
    require_keys(j, {"dt_max", "step_factor", "shell_eps", "t_max", "r_max", "scheme", "max_steps", "dt_min",
                     "origin_excl"},
                 path);
    mc::SamplerConfig cfg;
    cfg.dt_max = get_num(j, "dt_max", cfg.dt_max, path);
    cfg.step_factor = get_num(j, "step_factor", cfg.step_factor, path);
    cfg.shell_eps = get_num(j, "shell_eps", cfg.shell_eps, path);
    cfg.t_max = get_num(j, "t_max", cfg.t_max, path);
    if (j.contains("r_max") && !j["r_max"].is_null()) cfg.r_max = get_num(j, "r_max", 0.0, path);
    if (j.contains("scheme")) {
        const std::string s = j["scheme"].get<std::string>();
        if (s == "bridge_euler") cfg.scheme = mc::Scheme::BridgeEuler;
        else if (s == "walk_on_spheres") cfg.scheme = mc::Scheme::WalkOnSpheres;
        else throw ConfigInvalid(path + ".scheme", "unknown scheme '" + s + "'");
    }
    if (j.contains("max_steps")) cfg.max_steps = j["max_steps"].get<std::uint64_t>();
    cfg.dt_min = get_num(j, "dt_min", cfg.dt_min, path);
    cfg.origin_excl = get_num(j, "origin_excl", cfg.origin_excl, path);
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigInvalid(path, e.what());
    }
    return cfg;
}

// ------------------------------------------------------------------- reports

json report_to_json(const expt::Report& r) {
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back(json{{"name", c.name},
                              {"pass", c.pass},
                              {"value", c.value},
                              {"lo", c.lo},
                              {"hi", c.hi},
                              {"note", c.note}});
    json j{{"schema_version", kReportSchemaVersion},
           {"experiment", r.experiment},
           {"config_hash", hex64(r.config_hash)},
           {"domain_hash", hex64(r.domain_hash)},
           {"seed", r.seed},
           {"pass", r.all_pass()},
           {"metrics", r.metrics},
           {"info", r.info},
           {"checks", checks}};
    json curves = json::array();
    for (const auto& c : r.curves) curves.push_back(c.name + ".csv");
    j["artifacts"] = curves;
    return j;
}

void write_report(const expt::Report& report, const std::string& out_dir) {
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir);
    {
        std::ofstream f(dir / "report.json");
        if (!f) throw IoError("cannot write report.json under " + out_dir);
        f << report_to_json(report).dump(2) << "\n";
    }
    for (const auto& c : report.curves) {
        std::ofstream f(dir / (c.name + ".csv"));
        if (!f) throw IoError("cannot write curve file " + c.name);
        for (std::size_t i = 0; i < c.columns.size(); ++i) f << (i ? "," : "") << c.columns[i];
        f << "\n";
        char buf[32];
        for (const auto& row : c.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.17g", row[i]);
                f << (i ? "," : "") << buf;
            }
            f << "\n";
        }
        f << "# config_hash=" << hex64(report.config_hash) << "\n";
    }
}

// ------------------------------------------------------------------- catalog

const std::vector<ExperimentInfo>& list_experiments() {
    static const std::vector<ExperimentInfo> catalog = {
        {"calibration", "exact-mean calibration on the disk, the strip and the pi/8 wedge"},
        {"halfplane-tail", "half-plane tail index 1/2 and moment stabilization across horizons"},
        {"dashed-half-plane", "tail index of the half-plane with a dashed boundary, gap-independent"},
        {"lattice", "superpolynomial exit tails of the disk lattice and its masked variants"},
        {"dashed-wedge", "two complementary wedges with a dashed common boundary: bh = min rule"},
        {"staircase-budget", "constructive radius search keeping staircase-wedge means within budgets"},
        {"growth-ratio", "scaled mean growth along the staircase stages beats the quadratic bound"},
        {"critical-moment", "finite first moment at the critical tail exponent of the deepest stage"},
        {"winding", "winding-time tails pi/(4 alpha) beyond the domain-exit range"},
        {"hardy", "integral means, Hardy numbers and the exit-moment equivalence"},
    };
    return catalog;
}

// ------------------------------------------------------------- config parsing

namespace {

expt::Engine engine_from_config(const json& cfg) {
    expt::Engine eng;
    if (cfg.contains("sampler")) eng.sampler = sampler_config_from_json(cfg["sampler"], "sampler");
    eng.sampler.seed = cfg["seed"].get<std::uint64_t>();
    eng.samples = cfg["samples"].get<std::size_t>();
    eng.threads = cfg["threads"].get<unsigned>();
    return eng;
}

expt::StaircaseParams staircase_params_from_json(const json& p, const std::string& path) {
    require_keys(p, {"stages", "angles", "radius_cap", "bisect_iters", "certify_level_z", "retry_factor"}, path);
    expt::StaircaseParams sp;
    sp.stages = static_cast<int>(get_num(p, "stages", sp.stages, path));
    sp.angles = get_num_list(p, "angles", {}, path);
    sp.radius_cap = get_num(p, "radius_cap", sp.radius_cap, path);
    sp.bisect_iters = static_cast<int>(get_num(p, "bisect_iters", sp.bisect_iters, path));
    sp.certify_level_z = get_num(p, "certify_level_z", sp.certify_level_z, path);
    sp.retry_factor = static_cast<int>(get_num(p, "retry_factor", sp.retry_factor, path));
    if (sp.stages < 1 || sp.stages > 16) throw ConfigInvalid(path + ".stages", "stages must lie in 1..16");
    return sp;
}

expt::Report dispatch_experiment(const std::string& name, const json& p, const expt::Engine& eng) {
    const std::string path = "params";
    if (name == "calibration") {
        require_keys(p, {"tolerance_disk", "tolerance_strip", "tolerance_wedge"}, path);
        expt::CalibrationParams cp;
        cp.tolerance_disk = get_num(p, "tolerance_disk", cp.tolerance_disk, path);
        cp.tolerance_strip = get_num(p, "tolerance_strip", cp.tolerance_strip, path);
        cp.tolerance_wedge = get_num(p, "tolerance_wedge", cp.tolerance_wedge, path);
        return expt::run_calibration(cp, eng);
    }
    if (name == "halfplane-tail") {
        require_keys(p, {"start", "p_stable", "p_divergent", "stabilization_tol"}, path);
        expt::HalfPlaneTailParams hp;
        hp.start = get_point(p, "start", hp.start, path);
        hp.p_stable = get_num(p, "p_stable", hp.p_stable, path);
        hp.p_divergent = get_num(p, "p_divergent", hp.p_divergent, path);
        hp.stabilization_tol = get_num(p, "stabilization_tol", hp.stabilization_tol, path);
        return expt::run_half_plane_tail(hp, eng);
    }
    if (name == "dashed-half-plane") {
        require_keys(p, {"grid", "start", "max_layers", "layer_samples", "layer_min_count", "wos_samples", "wos_tolerance"}, path);
        expt::DashedHalfPlaneParams dp;
        if (p.contains("grid")) {
            dp.grid.clear();
            for (const auto& e : p["grid"]) {
                if (!e.is_array() || e.size() != 2)
                    throw ConfigInvalid(path + ".grid", "expected [[period, seg_half_len], ...]");
                const double period = e[0].get<double>(), seg = e[1].get<double>();
                if (!(2.0 * seg < period))
                    throw ConfigInvalid(path + ".grid", "segments must stay disjoint (2r < x)");
                dp.grid.emplace_back(period, seg);
            }
        }
        dp.start = get_point(p, "start", dp.start, path);
        dp.max_layers = static_cast<int>(get_num(p, "max_layers", dp.max_layers, path));
        dp.layer_samples = static_cast<std::size_t>(get_num(p, "layer_samples", dp.layer_samples, path));
        dp.layer_min_count = static_cast<std::size_t>(get_num(p, "layer_min_count", dp.layer_min_count, path));
        dp.wos_samples = static_cast<std::size_t>(get_num(p, "wos_samples", dp.wos_samples, path));
        dp.wos_tolerance = get_num(p, "wos_tolerance", dp.wos_tolerance, path);
        return expt::run_dashed_half_plane_study(dp, eng);
    }
    if (name == "lattice") {
        require_keys(p,
                     {"hole_radius", "start", "moment_orders", "stabilization_tol", "decade_slope_increase",
                      "decade_t1", "run_wedge_complement", "wedge_complement_alpha", "wedge_complement_start",
                      "run_edge_removed", "edge_removed_start"},
                     path);
        expt::LatticeParams lp;
        lp.hole_radius = get_num(p, "hole_radius", lp.hole_radius, path);
        lp.start = get_point(p, "start", lp.start, path);
        lp.moment_orders = get_num_list(p, "moment_orders", lp.moment_orders, path);
        lp.stabilization_tol = get_num(p, "stabilization_tol", lp.stabilization_tol, path);
        lp.decade_slope_increase = get_num(p, "decade_slope_increase", lp.decade_slope_increase, path);
        lp.decade_t1 = get_num(p, "decade_t1", lp.decade_t1, path);
        lp.run_wedge_complement = get_bool(p, "run_wedge_complement", lp.run_wedge_complement, path);
        lp.wedge_complement_alpha = get_num(p, "wedge_complement_alpha", lp.wedge_complement_alpha, path);
        lp.wedge_complement_start = get_point(p, "wedge_complement_start", lp.wedge_complement_start, path);
        lp.run_edge_removed = get_bool(p, "run_edge_removed", lp.run_edge_removed, path);
        lp.edge_removed_start = get_point(p, "edge_removed_start", lp.edge_removed_start, path);
        return expt::run_lattice_study(lp, eng);
    }
    if (name == "dashed-wedge") {
        require_keys(p, {"alpha", "gap_len", "gap_period", "start", "condition_grid", "condition_samples",
                         "condition_p"},
                     path);
        expt::DashedWedgeParams dw;
        dw.alpha = get_num(p, "alpha", dw.alpha, path);
        dw.gap_len = get_num(p, "gap_len", dw.gap_len, path);
        dw.gap_period = get_num(p, "gap_period", dw.gap_period, path);
        dw.start = get_point(p, "start", dw.start, path);
        dw.condition_grid = get_num_list(p, "condition_grid", dw.condition_grid, path);
        dw.condition_samples = static_cast<std::size_t>(get_num(p, "condition_samples", dw.condition_samples, path));
        dw.condition_p = get_num(p, "condition_p", dw.condition_p, path);
        return expt::run_dashed_wedge_study(dw, eng);
    }
    if (name == "staircase-budget") {
        return expt::run_staircase_budget(staircase_params_from_json(p, path), eng);
    }
    if (name == "growth-ratio") {
        require_keys(p, {"staircase", "scaled_horizons", "deep_samples_scale", "ci_slack_z", "wedge_sanity_tau",
                         "wedge_sanity_radii"},
                     path);
        expt::GrowthRatioParams gp;
        if (p.contains("staircase")) gp.staircase = staircase_params_from_json(p["staircase"], path + ".staircase");
        gp.scaled_horizons = get_num_list(p, "scaled_horizons", gp.scaled_horizons, path);
        gp.deep_samples_scale =
            static_cast<std::size_t>(get_num(p, "deep_samples_scale", gp.deep_samples_scale, path));
        gp.ci_slack_z = get_num(p, "ci_slack_z", gp.ci_slack_z, path);
        gp.wedge_sanity_tau = get_num(p, "wedge_sanity_tau", gp.wedge_sanity_tau, path);
        gp.wedge_sanity_radii = get_num_list(p, "wedge_sanity_radii", gp.wedge_sanity_radii, path);
        return expt::run_growth_ratio_study(gp, eng);
    }
    if (name == "critical-moment") {
        require_keys(p, {"staircase", "tail_slack"}, path);
        expt::CriticalMomentParams cm;
        if (p.contains("staircase")) cm.staircase = staircase_params_from_json(p["staircase"], path + ".staircase");
        cm.tail_slack = get_num(p, "tail_slack", cm.tail_slack, path);
        return expt::run_critical_moment_study(cm, eng);
    }
    if (name == "winding") {
        require_keys(p, {"alphas", "t_max_scale", "start", "tolerance"}, path);
        expt::WindingParams wp;
        wp.alphas = get_num_list(p, "alphas", wp.alphas, path);
        wp.t_max_scale = get_num_list(p, "t_max_scale", wp.t_max_scale, path);
        wp.start = get_point(p, "start", wp.start, path);
        wp.tolerance = get_num(p, "tolerance", wp.tolerance, path);
        return expt::run_winding_study(wp, eng);
    }
    if (name == "hardy") {
        require_keys(p, {"wedge_alpha", "mc_cross_check", "mc_samples"}, path);
        expt::HardyParams hp;
        hp.wedge_alpha = get_num(p, "wedge_alpha", hp.wedge_alpha, path);
        hp.mc_cross_check = get_bool(p, "mc_cross_check", hp.mc_cross_check, path);
        hp.mc_samples = static_cast<std::size_t>(get_num(p, "mc_samples", hp.mc_samples, path));
        return expt::run_hardy_study(hp, eng);
    }
    std::string names;
    for (const auto& e : list_experiments()) names += (names.empty() ? "" : ", ") + e.name;
    throw ExperimentUnknown("unknown experiment '" + name + "'; available: " + names);
}

}  // namespace

json validate_config(const json& config) {
    require_keys(config, {"experiment", "seed", "samples", "threads", "out_dir", "sampler", "params"}, "config");
    if (!config.contains("experiment") || !config["experiment"].is_string())
        throw ConfigInvalid("config.experiment", "required string");
    const std::string name = config["experiment"].get<std::string>();
    bool known = false;
    for (const auto& e : list_experiments()) known = known || e.name == name;
    if (!known) {
        std::string names;
        for (const auto& e : list_experiments()) names += (names.empty() ? "" : ", ") + e.name;
        throw ExperimentUnknown("unknown experiment '" + name + "'; available: " + names);
    }

    json effective = config;
    if (!effective.contains("seed")) effective["seed"] = 1;
    if (!effective.contains("samples")) effective["samples"] = 100000;
    if (!effective.contains("threads")) effective["threads"] = 0;
    if (!effective.contains("out_dir")) effective["out_dir"] = "results/" + name;
    if (!effective.contains("params")) effective["params"] = json::object();
    if (!effective.contains("sampler")) effective["sampler"] = json::object();
    effective["sampler"] = sampler_config_to_json(sampler_config_from_json(effective["sampler"], "sampler"));

    // dry-run the params validation so bad configs fail before any sampling
    expt::Engine probe = engine_from_config(effective);
    probe.samples = 0;
    (void)probe;
    return effective;
}

expt::Report run_experiment_json(const json& config) {
    const json effective = validate_config(config);
    const std::string name = effective["experiment"].get<std::string>();
    const expt::Engine eng = engine_from_config(effective);
    expt::Report rep = dispatch_experiment(name, effective["params"], eng);
    rep.config_hash = fnv1a64(effective.dump());
    return rep;
}

RunResult run_experiment(const std::string& config_path, const RunOverrides& overrides) {
    std::ifstream f(config_path);
    if (!f) throw IoError("cannot open config file " + config_path);
    json config;
    try {
        config = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigInvalid("config", std::string("not valid JSON: ") + e.what());
    }
    if (overrides.seed) config["seed"] = *overrides.seed;
    if (overrides.samples) config["samples"] = *overrides.samples;
    if (overrides.threads) config["threads"] = *overrides.threads;
    if (overrides.out_dir) config["out_dir"] = *overrides.out_dir;
    if (overrides.t_max) {
        if (!config.contains("sampler")) config["sampler"] = json::object();
        config["sampler"]["t_max"] = *overrides.t_max;
    }
    const json effective = validate_config(config);

    fs::path out_dir = effective["out_dir"].get<std::string>();
    if (const char* root = std::getenv("BHLAB_OUTPUT_ROOT"); root && out_dir.is_relative())
        out_dir = fs::path(root) / out_dir;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string());
    LockFile lock(out_dir);

    RunResult result;
    result.report = run_experiment_json(effective);
    write_report(result.report, out_dir.string());
    result.report_path = (out_dir / "report.json").string();
    result.status = result.report.all_pass() ? 0 : 1;
    return result;
}

// ------------------------------------------------------------- sample export

void export_samples(const mc::SampleBatch& batch, const geom::Domain& domain, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << "time,x,y,feature_id,truncated,steps\n";
    char buf[32];
    for (const auto& s : batch.samples) {
        std::snprintf(buf, sizeof buf, "%.17g", s.time);
        f << buf << ",";
        std::snprintf(buf, sizeof buf, "%.17g", s.position.x);
        f << buf << ",";
        std::snprintf(buf, sizeof buf, "%.17g", s.position.y);
        f << buf << "," << s.feature_id << "," << (s.truncated ? 1 : 0) << "," << s.steps << "\n";
    }
    json meta{{"sampler", sampler_config_to_json(batch.cfg)},
              {"start", {batch.start.x, batch.start.y}},
              {"domain", domain_to_json(domain)}};
    f << "# config_hash=" << hex64(fnv1a64(meta.dump())) << "\n";
    if (batch.samples.empty()) std::fprintf(stderr, "warning: exported an empty batch to %s\n", path.c_str());
}

mc::SampleBatch import_samples(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(f, line) || line != "time,x,y,feature_id,truncated,steps")
        throw IoError("unrecognized sample file header in " + path);
    mc::SampleBatch batch;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        mc::ExitSample s;
        long long feature;
        int truncated;
        unsigned long steps;
        if (std::sscanf(line.c_str(), "%lg,%lg,%lg,%lld,%d,%lu", &s.time, &s.position.x, &s.position.y, &feature,
                        &truncated, &steps) != 6)
            throw IoError("malformed sample row in " + path);
        s.feature_id = feature;
        s.truncated = truncated != 0;
        s.steps = static_cast<std::uint32_t>(steps);
        batch.samples.push_back(s);
    }
    return batch;
}

std::pair<mc::SampleBatch, geom::Domain> sample_from_export_config(const json& config) {
    require_keys(config, {"domain", "start", "sampler", "samples", "seed", "threads"}, "config");
    if (!config.contains("domain")) throw ConfigInvalid("config.domain", "required");
    const geom::Domain domain = domain_from_json(config["domain"]);
    mc::SamplerConfig cfg;
    if (config.contains("sampler")) cfg = sampler_config_from_json(config["sampler"], "sampler");
    cfg.seed = config.contains("seed") ? config["seed"].get<std::uint64_t>() : 1;
    const geom::Point start = get_point(config, "start", {0.0, 1.0}, "config");
    const auto n = config.contains("samples") ? config["samples"].get<std::size_t>() : 1000;
    const auto threads = config.contains("threads") ? config["threads"].get<unsigned>() : 0;
    return {mc::sample_batch(domain, start, cfg, n, threads), domain};
}

}  // namespace bhlab::io
