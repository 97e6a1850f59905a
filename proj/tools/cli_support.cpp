#include "cli_support.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "mltrl/eigenmetrics.hpp"
#include "mltrl/line_count.hpp"
#include "mltrl/mc_sensitivity.hpp"
#include "mltrl/medium.hpp"
#include "mltrl/optimizer.hpp"
#include "mltrl/rulers.hpp"
#include "mltrl/trl_classic.hpp"
#include "mltrl/version.hpp"

namespace mltrl::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---- strict schema helpers -------------------------------------------------

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

void reject_unknown(const json& obj, const std::string& path,
                    const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) fail(path + "." + key, "unknown key");
    }
}

const json& require(const json& obj, const std::string& path, const char* key) {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing required key");
    return *it;
}

double require_number(const json& obj, const std::string& path, const char* key) {
    const json& v = require(obj, path, key);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

double optional_number(const json& obj, const std::string& path, const char* key,
                       double fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

int optional_int(const json& obj, const std::string& path, const char* key,
                 int fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
    return v.get<int>();
}

std::string optional_string(const json& obj, const std::string& path,
                            const char* key, const std::string& fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

// lengths always carry an explicit unit
double parse_length(const json& v, const std::string& path) {
    if (!v.is_object()) fail(path, "expected {\"value\":, \"unit\":}");
    reject_unknown(v, path, {"value", "unit"});
    const double value = require_number(v, path, "value");
    const std::string unit = require(v, path, "unit").get<std::string>();
    double scale = 0.0;
    if (unit == "m") scale = 1.0;
    else if (unit == "cm") scale = 1e-2;
    else if (unit == "mm") scale = 1e-3;
    else if (unit == "um") scale = 1e-6;
    else fail(path + ".unit", "unknown unit '" + unit + "' (m, cm, mm, um)");
    return value * scale;
}

json length_json(double meters) {
    return json{{"value", meters}, {"unit", "m"}};
}

DispersionModel parse_medium(const json& v, const std::string& path) {
    if (!v.is_object()) fail(path, "expected an object");
    const std::string type = require(v, path, "type").get<std::string>();
    if (type == "constant") {
        reject_unknown(v, path, {"type", "eps_real", "eps_imag"});
        return DispersionModel::constant(require_number(v, path, "eps_real"),
                                         optional_number(v, path, "eps_imag", 0.0));
    }
    if (type == "tabulated") {
        reject_unknown(v, path, {"type", "points"});
        const json& pts = require(v, path, "points");
        if (!pts.is_array()) fail(path + ".points", "expected an array");
        std::vector<double> fs;
        std::vector<Permittivity> eps;
        int idx = 0;
        for (const auto& p : pts) {
            const std::string ppath = path + ".points[" + std::to_string(idx++) + "]";
            reject_unknown(p, ppath, {"frequency_hz", "eps_real", "eps_imag"});
            fs.push_back(require_number(p, ppath, "frequency_hz"));
            eps.push_back({require_number(p, ppath, "eps_real"),
                           optional_number(p, ppath, "eps_imag", 0.0)});
        }
        return DispersionModel::tabulated(std::move(fs), std::move(eps));
    }
    if (type == "waveguide") {
        reject_unknown(v, path, {"type", "width", "filling_eps"});
        return DispersionModel::waveguide(
            parse_length(require(v, path, "width"), path + ".width"),
            optional_number(v, path, "filling_eps", 1.0));
    }
    fail(path + ".type", "unknown medium type '" + type + "'");
}

FrequencyGrid parse_range(const json& v, const std::string& path,
                          int default_points = 501) {
    reject_unknown(v, path, {"f_min_hz", "f_max_hz", "points"});
    const double lo = require_number(v, path, "f_min_hz");
    const double hi = require_number(v, path, "f_max_hz");
    const int pts = optional_int(v, path, "points", default_points);
    try {
        return FrequencyGrid::linspace(lo, hi, pts);
    } catch (const Error& e) {
        fail(path, e.what());
    }
}

LineSet parse_lengths(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of lengths");
    std::vector<double> out;
    int idx = 0;
    for (const auto& item : v)
        out.push_back(parse_length(item, path + "[" + std::to_string(idx++) + "]"));
    try {
        return LineSet(std::move(out));
    } catch (const Error& e) {
        fail(path, e.what());
    }
}

ScalingSpec parse_scaling(const json& obj, const std::string& path) {
    if (!obj.is_object() || !obj.contains("scaling")) return ScalingSpec::none();
    const json& v = obj.at("scaling");
    const std::string spath = path + ".scaling";
    reject_unknown(v, spath, {"kind", "m"});
    const std::string kind = require(v, spath, "kind").get<std::string>();
    if (kind == "none") return ScalingSpec::none();
    if (kind == "occurrence") return ScalingSpec::occurrence();
    if (kind == "norm_order") {
        const double m = optional_number(v, spath, "m", 2.0);
        if (m != 1.0 && m != 2.0)
            fail(spath + ".m", "norm order is limited to 1 or 2 here");
        return ScalingSpec::norm_order(m);
    }
    fail(spath + ".kind", "unknown scaling kind '" + kind + "'");
}

json load_config(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("config: cannot open '" + file + "'");
    json v;
    try {
        in >> v;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!v.is_object()) throw ConfigError("config: top level must be an object");
    return v;
}

// ---- output helpers ---------------------------------------------------------

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string phase_curve_csv(const PhaseCurve& curve) {
    std::ostringstream os;
    os << "frequency_hz,lambda,kappa,phi_deg,degenerate_flag\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        os << fmt_double(curve.frequency_hz[i]) << ',' << fmt_double(curve.lambda[i])
           << ',' << fmt_double(curve.kappa[i]) << ',' << fmt_double(curve.phi_deg[i])
           << ',' << (curve.degenerate[i] ? 1 : 0) << '\n';
    }
    return os.str();
}

json curve_summary(const PhaseCurve& curve) {
    double min_phi = 90.0, sum = 0.0;
    for (double p : curve.phi_deg) {
        min_phi = std::min(min_phi, p);
        sum += p;
    }
    return json{{"min_phi_deg", min_phi},
                {"mean_phi_deg", curve.size() ? sum / curve.size() : 0.0}};
}

// contiguous grid runs where the phase clears the margin
json margin_bands(const PhaseCurve& curve, double margin_deg) {
    json bands = json::array();
    std::size_t start = 0;
    bool open = false;
    for (std::size_t i = 0; i <= curve.size(); ++i) {
        const bool above = i < curve.size() && curve.phi_deg[i] >= margin_deg;
        if (above && !open) {
            open = true;
            start = i;
        } else if (!above && open) {
            open = false;
            bands.push_back(json{{"f_start_hz", curve.frequency_hz[start]},
                                 {"f_stop_hz", curve.frequency_hz[i - 1]}});
        }
    }
    return bands;
}

json lengths_json(const LineSet& lines) {
    json arr = json::array();
    for (double l : lines.lengths_m) arr.push_back(length_json(l));
    return arr;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    }
};

void log_elapsed(const char* cmd, const Timer& timer) {
    std::cerr << cmd << ": done in " << timer.ms() << " ms\n";
}

json base_summary(const json& resolved) {
    return json{{"version", kVersion}, {"resolved_config", resolved}};
}

int guarded(const char* cmd, const CommonOptions& opts,
            const std::function<void(const json&, const fs::path&)>& body) {
    Timer timer;
    try {
        const json config = load_config(opts.config_path);
        const fs::path out_dir(opts.out_dir);
        fs::create_directories(out_dir);
        body(config, out_dir);
        log_elapsed(cmd, timer);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << cmd << ": config error: " << e.what() << '\n';
        return 2;
    } catch (const InfeasibleError& e) {
        std::cerr << cmd << ": infeasible: " << e.what() << '\n';
        return 3;
    } catch (const UnsupportedOrderError& e) {
        std::cerr << cmd << ": infeasible: " << e.what() << '\n';
        return 3;
    } catch (const DegenerateError& e) {
        std::cerr << cmd << ": degenerate: " << e.what() << '\n';
        return 4;
    } catch (const BelowCutoffError& e) {
        std::cerr << cmd << ": config error: " << e.what() << '\n';
        return 2;
    } catch (const RangeError& e) {
        std::cerr << cmd << ": config error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidInput& e) {
        std::cerr << cmd << ": config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << cmd << ": error: " << e.what() << '\n';
        return 1;
    }
}

opt::OptimizerConfig parse_optimizer(const json& obj, const std::string& path,
                                     const CommonOptions& opts) {
    opt::OptimizerConfig cfg;
    if (obj.is_object() && obj.contains("optimizer")) {
        const json& v = obj.at("optimizer");
        const std::string opath = path + ".optimizer";
        reject_unknown(v, opath,
                       {"population_factor", "max_generations", "mutation_f",
                        "crossover_cr", "seed", "grid_points", "convergence_tol"});
        cfg.population_factor =
            optional_int(v, opath, "population_factor", cfg.population_factor);
        cfg.max_generations =
            optional_int(v, opath, "max_generations", cfg.max_generations);
        cfg.mutation_f = optional_number(v, opath, "mutation_f", cfg.mutation_f);
        cfg.crossover_cr = optional_number(v, opath, "crossover_cr", cfg.crossover_cr);
        cfg.seed = static_cast<std::uint64_t>(
            optional_number(v, opath, "seed", static_cast<double>(cfg.seed)));
        cfg.grid_points = optional_int(v, opath, "grid_points", cfg.grid_points);
        cfg.convergence_tol =
            optional_number(v, opath, "convergence_tol", cfg.convergence_tol);
    }
    if (opts.seed) cfg.seed = *opts.seed;
    cfg.threads = opts.threads;
    return cfg;
}

json optimizer_json(const opt::OptimizerConfig& cfg) {
    return json{{"population_factor", cfg.population_factor},
                {"max_generations", cfg.max_generations},
                {"mutation_f", cfg.mutation_f},
                {"crossover_cr", cfg.crossover_cr},
                {"seed", cfg.seed},
                {"grid_points", cfg.grid_points},
                {"convergence_tol", cfg.convergence_tol}};
}

} // namespace

int run_analyze(const CommonOptions& opts) {
    return guarded("analyze", opts, [&](const json& config, const fs::path& out) {
        reject_unknown(config, "config",
                       {"medium", "frequency_range", "lengths", "scaling",
                        "margin_deg"});
        const auto model = parse_medium(require(config, "config", "medium"),
                                        "config.medium");
        const auto grid = parse_range(require(config, "config", "frequency_range"),
                                      "config.frequency_range");
        const auto lines = parse_lengths(require(config, "config", "lengths"),
                                         "config.lengths");
        const auto scaling = parse_scaling(config, "config");
        const double margin = optional_number(config, "config", "margin_deg", 0.0);

        const PhaseCurve curve = effective_phase(lines, model, {grid}, scaling);
        write_file(out / "analyze_phase.csv", phase_curve_csv(curve));

        json resolved = config;
        if (!resolved.contains("scaling")) resolved["scaling"] = {{"kind", "none"}};
        if (!resolved.contains("margin_deg")) resolved["margin_deg"] = 0.0;
        json summary = base_summary(resolved);
        summary["phase"] = curve_summary(curve);
        if (margin > 0.0) summary["bands"] = margin_bands(curve, margin);
        write_file(out / "analyze_summary.json", summary.dump(2) + "\n");
    });
}

int run_trl_band(const CommonOptions& opts) {
    return guarded("trl-band", opts, [&](const json& config, const fs::path& out) {
        reject_unknown(config, "config",
                       {"f_min_hz", "f_max_hz", "eps_real", "margin_deg", "anchor"});
        const double f_min = require_number(config, "config", "f_min_hz");
        const double f_max = require_number(config, "config", "f_max_hz");
        const double eps = require_number(config, "config", "eps_real");
        const double margin = require_number(config, "config", "margin_deg");
        const std::string anchor_s =
            optional_string(config, "config", "anchor", "low");
        if (anchor_s != "low" && anchor_s != "high")
            fail("config.anchor", "expected 'low' or 'high'");
        const auto anchor =
            anchor_s == "low" ? trl::Anchor::Low : trl::Anchor::High;

        const auto d = trl::design_band(f_min, f_max, eps, margin, anchor);
        const auto [lo, hi] =
            trl::band_edges(d.length_diff_m, eps, d.achieved_margin_deg, d.band_index);

        json resolved = config;
        resolved["anchor"] = anchor_s;
        json summary = base_summary(resolved);
        summary["design"] = {{"length_diff", length_json(d.length_diff_m)},
                             {"achieved_margin_deg", d.achieved_margin_deg},
                             {"band_index", d.band_index},
                             {"band_f_min_hz", lo},
                             {"band_f_max_hz", hi},
                             {"margin_shortfall_deg",
                              std::max(0.0, margin - d.achieved_margin_deg)}};
        write_file(out / "trl_band.json", summary.dump(2) + "\n");
    });
}

int run_linecount(const CommonOptions& opts) {
    return guarded("linecount", opts, [&](const json& config, const fs::path& out) {
        reject_unknown(config, "config",
                       {"l_max", "f_min_hz", "f_max_hz", "eps_real", "margin_deg"});
        const double l_max =
            parse_length(require(config, "config", "l_max"), "config.l_max");
        const double f_max = require_number(config, "config", "f_max_hz");
        const double f_min = optional_number(config, "config", "f_min_hz", 0.0);
        const double eps = require_number(config, "config", "eps_real");
        const double margin = require_number(config, "config", "margin_deg");

        const auto r = line_count::recommend(l_max, f_min, f_max, eps, margin);
        json resolved = config;
        resolved["f_min_hz"] = f_min;
        json summary = base_summary(resolved);
        summary["result"] = {{"m_max", r.m_max},
                             {"m_min", r.m_min},
                             {"m", r.m},
                             {"n_lines", r.n_lines},
                             {"n_lines_band", json::array({std::max(2, r.n_lines - 1),
                                                           r.n_lines, r.n_lines + 1})},
                             {"harmonic_fallback", r.harmonic_fallback}};
        write_file(out / "linecount.json", summary.dump(2) + "\n");
    });
}

int run_design_ruler(const CommonOptions& opts) {
    return guarded("design-ruler", opts, [&](const json& config, const fs::path& out) {
        reject_unknown(config, "config",
                       {"medium", "f_min_hz", "f_max_hz", "margin_deg", "family",
                        "band_index", "n_lines", "phase_points"});
        const auto model =
            parse_medium(require(config, "config", "medium"), "config.medium");
        const double f_min = require_number(config, "config", "f_min_hz");
        const double f_max = require_number(config, "config", "f_max_hz");
        const double margin = require_number(config, "config", "margin_deg");
        const std::string family_s =
            optional_string(config, "config", "family", "golomb");
        rulers::Family family = rulers::Family::Golomb;
        if (family_s == "golomb") family = rulers::Family::Golomb;
        else if (family_s == "perfect") family = rulers::Family::Perfect;
        else if (family_s == "wichmann") family = rulers::Family::Wichmann;
        else fail("config.family", "expected golomb, perfect or wichmann");
        const int band_n = optional_int(config, "config", "band_index", 0);
        const int n_lines = optional_int(config, "config", "n_lines", 0);
        const int points = optional_int(config, "config", "phase_points", 501);

        const auto d =
            rulers::design_by_ruler(f_min, f_max, margin, model, band_n, n_lines, family);

        // phase over the kit's anchored band: quarter-wave of the longest line
        const double eps_hi = permittivity_at(model, f_max).eps_real;
        const double f_qw = 0.5 * kC0 /
                            (2.0 * d.lengths.lengths_m.back() * std::sqrt(eps_hi));
        const auto grid = FrequencyGrid::linspace(std::min(f_qw, f_max * 0.5),
                                                  f_max, points);
        const auto curve = effective_phase(d.lengths, model, grid);
        write_file(out / "ruler_phase.csv", phase_curve_csv(curve));

        json resolved = config;
        resolved["family"] = family_s;
        resolved["band_index"] = band_n;
        resolved["n_lines"] = d.lengths.size();
        resolved["phase_points"] = points;
        json summary = base_summary(resolved);
        json bands = json::array();
        for (const auto& b : d.covered_bands)
            bands.push_back(json{{"band_index", b.band_index},
                                 {"f_min_hz", b.f_min_hz},
                                 {"f_max_hz", b.f_max_hz},
                                 {"phase_margin_deg", b.phase_margin_deg}});
        json marks = json::array();
        for (int m : d.ruler.marks) marks.push_back(m);
        summary["design"] = {{"l0", length_json(d.l0_m)},
                             {"marks", marks},
                             {"lengths", lengths_json(d.lengths)},
                             {"covered_bands", bands}};
        summary["phase"] = curve_summary(curve);
        write_file(out / "ruler_design.json", summary.dump(2) + "\n");
    });
}

int run_design_optimize(const CommonOptions& opts) {
    return guarded("design-optimize", opts, [&](const json& config, const fs::path& out) {
        reject_unknown(config, "config",
                       {"medium", "f_min_hz", "f_max_hz", "margin_deg", "n_lines",
                        "l_max", "l_min_gap", "quantization_step", "equalities",
                        "loss", "optimizer", "phase_points"});
        opt::PipelineRequest req;
        req.model = parse_medium(require(config, "config", "medium"), "config.medium");
        req.f_min_hz = require_number(config, "config", "f_min_hz");
        req.f_max_hz = require_number(config, "config", "f_max_hz");
        req.margin_deg = require_number(config, "config", "margin_deg");
        req.n_lines = optional_int(config, "config", "n_lines", 0);
        if (config.contains("l_max"))
            req.l_max_m = parse_length(config.at("l_max"), "config.l_max");
        if (config.contains("l_min_gap"))
            req.l_min_gap_m = parse_length(config.at("l_min_gap"), "config.l_min_gap");
        if (config.contains("quantization_step"))
            req.quantization_step_m =
                parse_length(config.at("quantization_step"), "config.quantization_step");
        if (config.contains("equalities")) {
            const json& eqs = config.at("equalities");
            if (!eqs.is_array()) fail("config.equalities", "expected an array");
            int idx = 0;
            for (const auto& e : eqs) {
                const std::string epath =
                    "config.equalities[" + std::to_string(idx++) + "]";
                reject_unknown(e, epath, {"coefficients", "rhs"});
                const json& coefs = require(e, epath, "coefficients");
                if (!coefs.is_array()) fail(epath + ".coefficients", "expected an array");
                Eigen::RowVectorXd row(coefs.size());
                for (std::size_t i = 0; i < coefs.size(); ++i) {
                    if (!coefs[i].is_number())
                        fail(epath + ".coefficients", "expected numbers");
                    row(static_cast<Eigen::Index>(i)) = coefs[i].get<double>();
                }
                req.equalities.emplace_back(
                    row, parse_length(require(e, epath, "rhs"), epath + ".rhs"));
            }
        }
        if (config.contains("loss")) {
            const json& l = config.at("loss");
            reject_unknown(l, "config.loss",
                           {"kind", "length_sigma", "equality_penalty_weight"});
            const std::string kind = optional_string(l, "config.loss", "kind",
                                                     "minmax_mean");
            if (kind == "minmax_mean") req.loss.kind = opt::LossKind::MinmaxMean;
            else if (kind == "regularized") req.loss.kind = opt::LossKind::Regularized;
            else fail("config.loss.kind", "expected minmax_mean or regularized");
            if (l.contains("length_sigma"))
                req.loss.length_sigma_m =
                    parse_length(l.at("length_sigma"), "config.loss.length_sigma");
            req.loss.equality_penalty_weight =
                optional_number(l, "config.loss", "equality_penalty_weight",
                                req.loss.equality_penalty_weight);
        }
        req.optimizer = parse_optimizer(config, "config", opts);
        req.optimizer.progress = [](int gen, double best) {
            if (gen % 50 == 0) std::cerr << "generation " << gen << " best " << best << '\n';
        };
        req.margin_grid_points = optional_int(config, "config", "phase_points", 501);

        const auto r = opt::design_pipeline(req);
        write_file(out / "design_phase.csv", phase_curve_csv(r.design.phase));

        json resolved = config;
        resolved["n_lines"] = r.n_lines;
        resolved["l_max"] = length_json(r.l_max_m);
        resolved["optimizer"] = optimizer_json(req.optimizer);
        json summary = base_summary(resolved);
        summary["result"] = {
            {"lengths", lengths_json(r.design.lengths)},
            {"loss", r.design.loss},
            {"f_min_anchor_hz", r.design.f_min_anchor_hz},
            {"f_max_anchor_hz", r.design.f_max_anchor_hz},
            {"feasible", r.design.feasible},
            {"converged", r.design.converged},
            {"generations_run", r.design.generations_run},
            {"eps_real_used", r.eps_real_used},
            {"margin_check", {{"f_lo_hz", r.margin_check_lo_hz},
                              {"f_hi_hz", r.margin_check_hi_hz},
                              {"min_phi_deg", r.min_phi_deg},
                              {"satisfied", r.margin_satisfied}}}};
        const std::string text = summary.dump(2) + "\n";
        write_file(out / "design_result.json", text);
        std::cout << text;
    });
}

int run_mc_sens(const CommonOptions& opts) {
    return guarded("mc-sens", opts, [&](const json& config, const fs::path& out) {
        reject_unknown(config, "config",
                       {"medium", "frequency_range", "lengths", "mc"});
        const auto model =
            parse_medium(require(config, "config", "medium"), "config.medium");
        const auto grid = parse_range(require(config, "config", "frequency_range"),
                                      "config.frequency_range", 101);
        const auto lines =
            parse_lengths(require(config, "config", "lengths"), "config.lengths");

        mc::McConfig cfg;
        if (config.contains("mc")) {
            const json& m = config.at("mc");
            reject_unknown(m, "config.mc",
                           {"trials", "noise_sigma", "length_sigma",
                            "eps_sigma_real", "eps_sigma_imag", "seed"});
            cfg.trials = optional_int(m, "config.mc", "trials", cfg.trials);
            cfg.noise_sigma =
                optional_number(m, "config.mc", "noise_sigma", cfg.noise_sigma);
            if (m.contains("length_sigma"))
                cfg.length_sigma_m =
                    parse_length(m.at("length_sigma"), "config.mc.length_sigma");
            cfg.eps_sigma_real =
                optional_number(m, "config.mc", "eps_sigma_real", 0.0);
            cfg.eps_sigma_imag =
                optional_number(m, "config.mc", "eps_sigma_imag", 0.0);
            cfg.seed = static_cast<std::uint64_t>(
                optional_number(m, "config.mc", "seed", static_cast<double>(cfg.seed)));
        }
        if (opts.seed) cfg.seed = *opts.seed;
        cfg.threads = opts.threads;

        const auto res = mc::run_mc(lines, model, {grid}, cfg);

        std::ostringstream mae;
        mae << "frequency_hz,term_name,mae,excluded_trials\n";
        for (std::size_t k = 0; k < res.frequency_hz.size(); ++k)
            for (int j = 0; j < 4; ++j)
                mae << fmt_double(res.frequency_hz[k]) << ','
                    << mc::kErrorTermNames[static_cast<std::size_t>(j)] << ','
                    << fmt_double(res.mae[k][static_cast<std::size_t>(j)]) << ','
                    << res.excluded[k] << '\n';
        write_file(out / "mc_mae.csv", mae.str());

        std::ostringstream inv;
        inv << "frequency_hz,inv_lambda\n";
        for (std::size_t k = 0; k < res.frequency_hz.size(); ++k) {
            const double lam = res.lambda_nominal[k];
            inv << fmt_double(res.frequency_hz[k]) << ','
                << fmt_double(lam > 0.0 ? 1.0 / lam : 0.0) << '\n';
        }
        write_file(out / "mc_inverse_lambda.csv", inv.str());

        json resolved = config;
        resolved["mc"] = {{"trials", cfg.trials},
                          {"noise_sigma", cfg.noise_sigma},
                          {"length_sigma", length_json(cfg.length_sigma_m)},
                          {"eps_sigma_real", cfg.eps_sigma_real},
                          {"eps_sigma_imag", cfg.eps_sigma_imag},
                          {"seed", cfg.seed}};
        json summary = base_summary(resolved);
        int excluded_total = 0;
        for (int e : res.excluded) excluded_total += e;
        summary["result"] = {{"frequencies", res.frequency_hz.size()},
                             {"trials", cfg.trials},
                             {"excluded_total", excluded_total}};
        write_file(out / "mc_summary.json", summary.dump(2) + "\n");
    });
}

} // namespace mltrl::cli
