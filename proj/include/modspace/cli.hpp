#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "modspace/config.hpp"
#include "modspace/counterexample.hpp"
#include "modspace/experiments.hpp"
#include "modspace/indices.hpp"
#include "modspace/partitions.hpp"
#include "modspace/quantize.hpp"
#include "modspace/symbols.hpp"

namespace modspace {

inline constexpr int kSummaryVersion = 1;
inline constexpr const char* kLibraryVersion = "0.1.0";

/// One experiment's tables and verdicts, ready to be written out.
struct ExperimentOutput {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> point_columns;
    std::vector<std::vector<std::string>> points;
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    nlohmann::ordered_json verdicts = nlohmann::ordered_json::object();

    void verdict(const std::string& key, bool ok) { verdicts[key] = ok; }
    [[nodiscard]] bool pass() const {
        for (const auto& [k, v] : verdicts.items()) {
            if (!v.get<bool>()) return false;
        }
        return true;
    }
};

namespace cli {

inline std::string cell(double v) { return detail::format_real(v); }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(std::size_t v) { return std::to_string(v); }
inline std::string cell(const std::string& s) { return s; }
inline std::string cell(const char* s) { return s; }

template <class... Ts>
std::vector<std::string> row(const Ts&... v) {
    return {cell(v)...};
}

/// JSON cannot hold infinities; they are written as null.
inline nlohmann::ordered_json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

inline nlohmann::ordered_json fit_json(const FitResult& f) {
    return {{"slope", number(f.slope)}, {"intercept", number(f.intercept)}, {"residual", number(f.residual)}};
}

inline Window make_window(const ExperimentConfig& c, const Grid& g) {
    if (c.window == "bump") return bump_window(g, 2.5 * c.window_width);
    return gaussian_window(g, c.window_width);
}

inline std::vector<ExponentPair> exponent_pairs(const ExperimentConfig& c) {
    std::vector<ExponentPair> out;
    for (double p : c.p) {
        for (double q : c.q) out.emplace_back(p, q);
    }
    if (out.empty()) throw ConfigError("config: empty exponent lists");
    return out;
}

inline Grid config_grid(const ExperimentConfig& c) { return Grid(c.dim, c.grid, c.half_length); }

inline void require_one_dim(const ExperimentConfig& c) {
    if (c.dim != 1) throw ConfigError("config: experiment " + c.experiment + " runs in dimension 1 only");
}

}  // namespace cli

// ---------------------------------------------------------------- defaults

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"indices", "dilation", "bessel",    "pieces",
                                                "czo",     "moments",  "unbounded", "norm-equiv"};
    return names;
}

inline ExperimentConfig default_config(const std::string& name) {
    ExperimentConfig c;
    c.experiment = name;
    if (name == "indices") {
        c.grid = 9;
    } else if (name == "dilation") {
        c.a_values = {0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
    } else if (name == "bessel") {
        c.grid = 1024;
        c.half_length = 8.0 * kPi;
        c.m = {1.0};
        c.k_values = {4.0, 8.0, 16.0, 32.0};
    } else if (name == "pieces") {
        c.delta = 0.0;
        c.m = {1.0};
        c.j_max = {1, 2, 3, 4};
        c.k_values = {0.0, 1.0, 2.0, 4.0, 8.0};
        c.samples = 6;
    } else if (name == "czo" || name == "moments") {
        c.grid = 2048;
        c.half_length = std::ldexp(1.0, -8);
        c.m = {0.0};
        c.j_max = {19};
    } else if (name == "unbounded") {
        c.grid = 1 << 18;
        c.half_length = 8.0;
        c.p = {2.0};
        c.q = {6.0};
        c.m = {-0.1, -0.3};
        c.control = 1;
        c.positions = 128;
    } else if (name == "norm-equiv") {
        c.p = {1.0, 2.0, 4.0};
        c.q = {1.0, 2.0, 4.0};
    }
    return c;
}

// ---------------------------------------------------------------- runners

/// mu1, mu2, regions and critical orders over the (1/p, 1/q) lattice with
/// `grid` points per axis.
inline ExperimentOutput run_indices(const ExperimentConfig& c) {
    if (c.grid < 2) throw ConfigError("indices: grid must be at least 2");
    ExperimentOutput out;
    out.columns = {"inv_p", "inv_q", "p", "q", "mu1", "mu2", "gap", "regions", "critical_order"};
    bool ordered = true, gap_identity = true;
    const std::int64_t d = c.grid - 1;
    for (std::int64_t i = 0; i <= d; ++i) {
        for (std::int64_t k = 0; k <= d; ++k) {
            const Rational a(i, d), b(k, d);
            const auto e = ExponentPair::from_inverses(a, b);
            const Rational m1 = mu1(a, b), m2 = mu2(a, b), gap = m1 - m2;
            ordered = ordered && !(gap < Rational(0));
            if (a == Rational(1, 2)) gap_identity = gap_identity && gap == abs(b - Rational(1, 2));
            out.rows.push_back(cli::row(a.to_double(), b.to_double(), e.p(), e.q(), m1.to_double(), m2.to_double(),
                                        gap.to_double(), region(a, b).to_string(),
                                        critical_order(e, c.delta, c.dim).value));
        }
    }
    out.summary["cells"] = out.rows.size();
    out.verdict("mu1_ge_mu2", ordered);
    out.verdict("gap_at_p2_equals_abs_inv_q_minus_half", gap_identity);
    return out;
}

/// Both dilation branches for every (p, q): a >= 1 on a Gaussian of width
/// `window_width`, a <= 1 on one of width window_width / 4.
inline ExperimentOutput run_dilation(const ExperimentConfig& c) {
    cli::require_one_dim(c);
    const Grid g = cli::config_grid(c);
    const auto w = cli::make_window(c, g);
    std::vector<double> up, down;
    for (double a : c.a_values) {
        if (a >= 1.0) up.push_back(a);
        if (a <= 1.0) down.push_back(a);
    }
    const auto pairs = cli::exponent_pairs(c);
    struct Cell {
        ExponentPair e;
        bool expanding;
    };
    std::vector<Cell> cells;
    for (const auto& e : pairs) {
        if (up.size() > 0) cells.push_back({e, true});
        if (down.size() > 0) cells.push_back({e, false});
    }
    const auto f_up = gaussian_window(g, c.window_width, false).signal;
    const auto f_down = gaussian_window(g, c.window_width / 4.0, false).signal;
    std::vector<DilationScaling> res(cells.size());
    parallel_for(cells.size(), c.parallel, [&](std::size_t i) {
        res[i] = dilation_scaling(cells[i].expanding ? f_up : f_down, w, cells[i].e, cells[i].expanding ? up : down);
    });

    ExperimentOutput out;
    out.columns = {"p", "q", "branch", "a", "ratio"};
    out.point_columns = {"p", "q", "branch", "log_a", "log_ratio"};
    auto fits = nlohmann::ordered_json::array();
    bool all = true, l2 = true;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& r = res[i];
        const char* branch = cells[i].expanding ? "expanding" : "contracting";
        for (std::size_t t = 0; t < r.a_values.size(); ++t) {
            out.rows.push_back(cli::row(cells[i].e.p(), cells[i].e.q(), branch, r.a_values[t], r.ratios[t]));
            out.points.push_back(cli::row(cells[i].e.p(), cells[i].e.q(), branch, r.fit.xs[t], r.fit.ys[t]));
        }
        auto j = cli::fit_json(r.fit);
        j["p"] = cells[i].e.p();
        j["q"] = cells[i].e.q();
        j["branch"] = branch;
        j["bound"] = r.bound;
        j["consistent"] = r.consistent;
        fits.push_back(j);
        all = all && r.consistent;
        if (cells[i].expanding && cells[i].e.p() == 2.0 && cells[i].e.q() == 2.0) {
            l2 = l2 && std::abs(r.fit.slope + 0.5) < 0.05;
        }
    }
    out.summary["fits"] = fits;
    out.verdict("consistent", all);
    out.verdict("l2_scaling", l2);
    return out;
}

inline ExperimentOutput run_bessel(const ExperimentConfig& c) {
    cli::require_one_dim(c);
    const Grid g = cli::config_grid(c);
    std::mt19937_64 rng(c.seed);
    const auto f = random_bandlimited(g, 0.5, rng);
    ExperimentOutput out;
    out.columns = {"m", "k", "ratio"};
    out.point_columns = {"m", "log_k", "log_ratio"};
    auto fits = nlohmann::ordered_json::array();
    bool all = true;
    for (double m : c.m) {
        const auto r = bessel_growth(m, c.k_values, f);
        for (std::size_t t = 0; t < r.k_values.size(); ++t) {
            out.rows.push_back(cli::row(m, r.k_values[t], r.ratios[t]));
            out.points.push_back(cli::row(m, r.fit.xs[t], r.fit.ys[t]));
        }
        const bool ok = m == 0.0 ? std::abs(r.fit.slope) < 0.02 : std::abs(r.fit.slope - m) <= 0.05 * std::abs(m);
        auto j = cli::fit_json(r.fit);
        j["m"] = m;
        j["pass"] = ok;
        fits.push_back(j);
        all = all && ok;
    }
    if (!fits.empty()) out.summary["slope"] = fits.front()["slope"];
    out.summary["fits"] = fits;
    out.verdict("slope_matches_order", all);
    return out;
}

/// Operator-norm decay of Bessel symbol pieces in the tile index k and the level j.
inline ExperimentOutput run_pieces(const ExperimentConfig& c) {
    cli::require_one_dim(c);
    const Grid g = cli::config_grid(c);
    const auto P = build_partitions(0.5, g);
    ExperimentOutput out;
    out.columns = {"m", "j", "k", "l", "empty", "ratio_p2", "ratio_p4"};
    auto reports = nlohmann::ordered_json::array();
    bool all = true;
    for (double m : c.m) {
        const auto s = bessel_symbol(m, g);
        std::vector<PieceIndex> sample;
        for (int j : c.j_max) {
            const int l = static_cast<int>(std::lround(1.5 * std::exp2(j)));
            for (double k : c.k_values) sample.push_back({j, static_cast<int>(std::lround(k)), l});
        }
        const auto rep = piece_kernel_decay(s, P, sample, c.delta, c.seed, c.samples, c.parallel);
        for (const auto& r : rep.rows) {
            out.rows.push_back(cli::row(m, r.index.j, r.index.k, r.index.l, r.empty ? 1 : 0, r.ratio_p2, r.ratio_p4));
        }
        const bool k_ok = rep.k_exponent <= -(c.dim + 1) + 0.3;
        const bool j_ok = rep.j_exponent <= m + 0.2;
        reports.push_back({{"m", m},
                           {"k_exponent", cli::number(rep.k_exponent)},
                           {"k_degenerate", rep.k_degenerate},
                           {"j_exponent", cli::number(rep.j_exponent)},
                           {"j_degenerate", rep.j_degenerate},
                           {"notes", rep.notes},
                           {"pass", k_ok && j_ok}});
        all = all && k_ok && j_ok;
    }
    out.summary["reports"] = reports;
    out.verdict("decay", all);
    return out;
}

namespace cli {

inline CounterexampleParams counterexample_params(const ExperimentConfig& c, double m) {
    if (c.j_max.size() != 1) throw ConfigError("config: j_max must hold exactly one level for this experiment");
    return CounterexampleParams{m, c.delta, c.dim, c.j0, c.j_max.front()}.resolved();
}

}  // namespace cli

/// Calderon-Zygmund checks of the truncated counterexample kernel and its transpose.
inline ExperimentOutput run_czo(const ExperimentConfig& c) {
    cli::require_one_dim(c);
    const Grid g = cli::config_grid(c);
    ExperimentOutput out;
    out.columns = {"m", "operator", "ell", "bound", "octave_distance", "octave_constant"};
    auto reports = nlohmann::ordered_json::array();
    bool all = true;
    for (double m : c.m) {
        const auto cp = cli::counterexample_params(c, m);
        const auto A = quantize(CounterexampleSymbol(cp).on_grid(g, c.parallel).to_dense(), c.parallel);
        CzoOptions opt;
        opt.seed = c.seed;
        opt.fit_min_distance = 16.0 * std::exp2(-cp.j_max);
        opt.fit_max_distance = std::exp2(-cp.j0);
        const std::vector<std::pair<std::string, OperatorMatrix>> ops{{"A", A}, {"At", transpose(A)}};
        for (const auto& [label, M] : ops) {
            const auto K = kernel(M);
            for (int ell : {0, 1}) {
                const auto r = czo_check(K, ell, 0.5, opt);
                for (const auto& b : r.bounds) {
                    for (std::size_t o = 0; o < b.octave_distance.size(); ++o) {
                        out.rows.push_back(cli::row(m, label, ell, b.name, b.octave_distance[o], b.octave_constant[o]));
                    }
                }
                reports.push_back({{"m", m},
                                   {"operator", label},
                                   {"ell", ell},
                                   {"status", r.status},
                                   {"size_exponent", cli::number(r.size_exponent)},
                                   {"worst_violation_ratio", cli::number(r.worst_violation_ratio)},
                                   {"report", r.to_text()}});
                all = all && r.pass();
            }
        }
    }
    out.summary["reports"] = reports;
    out.verdict("czo", all);
    return out;
}

inline constexpr double kMomentTolerance = 1e-12;

inline ExperimentOutput run_moments(const ExperimentConfig& c) {
    cli::require_one_dim(c);
    const Grid g = cli::config_grid(c);
    ExperimentOutput out;
    out.columns = {"m", "beta", "value"};
    double worst = 0.0;
    for (double m : c.m) {
        const auto cp = cli::counterexample_params(c, m);
        const auto s = CounterexampleSymbol(cp).on_grid(g, c.parallel).to_dense();
        for (const auto& mv : vanishing_moments(s, 3, g.half_length())) {
            out.rows.push_back(cli::row(m, mv.beta, mv.value));
            worst = std::max(worst, mv.value);
        }
    }
    out.summary["max_moment"] = worst;
    out.summary["tolerance"] = kMomentTolerance;
    out.verdict("moments_vanish", worst < kMomentTolerance);
    return out;
}

/// Lower-bound growth of the truncated counterexample operator. Orders above
/// the critical line must grow monotonically; orders at or below it (allowed
/// with control=1) must plateau.
inline ExperimentOutput run_unbounded(const ExperimentConfig& c) {
    cli::require_one_dim(c);
    const Grid g = cli::config_grid(c);
    const int j0 = c.j0 > 0 ? c.j0 : minimal_j0(c.delta, c.dim);
    std::vector<int> levels = c.j_max;
    if (levels.empty()) levels = {j0 + 1, j0 + 2, j0 + 3};
    struct Cell {
        ExponentPair e;
        double m;
    };
    std::vector<Cell> cells;
    for (const auto& e : cli::exponent_pairs(c)) {
        for (double m : c.m) cells.push_back({e, m});
    }
    SweepOptions opt;
    opt.grid = g;
    opt.window_width = c.window_width;
    opt.family_size = c.family_size;
    opt.refine_steps = c.refine_steps;
    opt.seed = c.seed;
    opt.positions = c.positions;
    opt.control = c.control != 0;
    opt.j0 = j0;
    // refuse before any work is spent
    for (const auto& cl : cells) {
        if (cl.e.q() == 2.0 || (!opt.control && cl.m <= critical_order(cl.e, c.delta, c.dim).value)) {
            (void)unboundedness_sweep(cl.e, c.delta, cl.m, levels, opt);
        }
    }
    std::vector<SweepResult> res(cells.size());
    parallel_for(cells.size(), c.parallel, [&](std::size_t i) {
        res[i] = unboundedness_sweep(cells[i].e, c.delta, cells[i].m, levels, opt);
    });

    ExperimentOutput out;
    out.columns = {"p", "q", "m", "regime", "j_max", "lower_bound", "evaluations"};
    auto sweeps = nlohmann::ordered_json::array();
    bool all = true;
    for (const auto& r : res) {
        const bool above = r.m > r.critical;
        const char* regime = above ? "above_critical" : "below_critical";
        for (const auto& row : r.rows) {
            out.rows.push_back(cli::row(r.e.p(), r.e.q(), r.m, regime, row.j_max, row.lower_bound, row.evaluations));
        }
        const bool ok = above ? r.monotone : r.growth < 1.5;
        sweeps.push_back({{"p", r.e.p()},
                          {"q", r.e.q()},
                          {"m", r.m},
                          {"critical_order", r.critical},
                          {"j0", r.j0},
                          {"regime", regime},
                          {"adjoint_probe", r.adjoint_probe},
                          {"growth", r.growth},
                          {"monotone", r.monotone},
                          {"pass", ok}});
        all = all && ok;
    }
    out.summary["sweeps"] = sweeps;
    out.summary["note"] = "finite-truncation growth evidence, not a proof";
    out.verdict("growth_signature", all);
    return out;
}

inline ExperimentOutput run_norm_equiv(const ExperimentConfig& c) {
    const Grid g = cli::config_grid(c);
    const auto pairs = cli::exponent_pairs(c);
    const auto r = norm_equivalence(g, pairs, static_cast<std::size_t>(c.samples), c.seed, 8.0, c.parallel);
    ExperimentOutput out;
    out.columns = {"p", "q", "sample", "band_norm", "modulation_norm", "ratio"};
    for (const auto& row : r.rows) {
        out.rows.push_back(cli::row(row.e.p(), row.e.q(), row.sample, row.band, row.modulation, row.band / row.modulation));
    }
    auto spreads = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        spreads.push_back({{"p", cli::number(pairs[i].p())}, {"q", cli::number(pairs[i].q())}, {"spread", r.spread[i]}});
    }
    out.summary["spreads"] = spreads;
    out.summary["worst_spread"] = r.worst_spread;
    out.verdict("equivalent", r.worst_spread < 10.0);
    return out;
}

inline ExperimentOutput run_experiment(const ExperimentConfig& c) {
    using Runner = ExperimentOutput (*)(const ExperimentConfig&);
    static const std::map<std::string, Runner> runners{
        {"indices", run_indices}, {"dilation", run_dilation}, {"bessel", run_bessel},
        {"pieces", run_pieces},   {"czo", run_czo},           {"moments", run_moments},
        {"unbounded", run_unbounded}, {"norm-equiv", run_norm_equiv}};
    const auto it = runners.find(c.experiment);
    if (it == runners.end()) throw ConfigError("unknown experiment '" + c.experiment + "'");
    if (c.parallel < 1) throw ConfigError("config: parallel must be at least 1");
    auto out = it->second(c);
    out.name = c.experiment;
    return out;
}

// ---------------------------------------------------------------- output

namespace cli {

inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + path.string() + "'");
    auto line = [&](const std::vector<std::string>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
        os << '\n';
    };
    line(columns);
    for (const auto& r : rows) line(r);
}

}  // namespace cli

/// Writes `<name>.csv`, `<name>.summary.json` and, when present, `<name>.points.csv`.
inline void write_outputs(const ExperimentOutput& out, const ExperimentConfig& c, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    cli::write_csv(dir / (out.name + ".csv"), out.columns, out.rows);
    if (!out.points.empty()) cli::write_csv(dir / (out.name + ".points.csv"), out.point_columns, out.points);
    nlohmann::ordered_json j;
    j["version"] = kSummaryVersion;
    j["library_version"] = kLibraryVersion;
    j["experiment"] = out.name;
    j["seed"] = c.seed;
    j["config"] = to_text(c);
    for (const auto& [k, v] : out.summary.items()) j[k] = v;
    j["verdicts"] = out.verdicts;
    j["pass"] = out.pass();
    std::ofstream os(dir / (out.name + ".summary.json"), std::ios::binary);
    if (!os) throw ConfigError("cannot write summary in '" + dir.string() + "'");
    os << j.dump(2) << '\n';
}

/// Entry point of the `modspace` tool. Exit status: 0 all verdicts pass,
/// 2 some verdict fails, 1 usage or configuration error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Modulation-space experiments", "modspace"};
    app.require_subcommand(1);
    std::string config_path;
    std::map<std::string, std::string> overrides;
    for (const auto& name : experiment_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "key=value configuration file");
        for (const auto& key : config_keys()) {
            if (key == "experiment") continue;
            std::string flag = "--" + key;
            std::replace(flag.begin(), flag.end(), '_', '-');
            sub->add_option(flag, overrides[key]);
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "modspace: " << e.what() << '\n';
        return 1;
    }

    const CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    try {
        ExperimentConfig c = default_config(name);
        if (!config_path.empty()) {
            c = load_config(config_path, c);
            if (c.experiment != name) {
                throw ConfigError("config '" + config_path + "' is for experiment '" + c.experiment + "'");
            }
        }
        for (const auto& key : config_keys()) {
            if (key == "experiment") continue;
            std::string flag = "--" + key;
            std::replace(flag.begin(), flag.end(), '_', '-');
            if (sub->count(flag) > 0) set_config_value(c, key, overrides[key]);
        }
        std::filesystem::path dir = c.out;
        if (dir.empty()) {
            const char* env = std::getenv("MODSPACE_OUT");
            dir = env && *env ? env : ".";
        }
        const auto result = run_experiment(c);
        write_outputs(result, c, dir);
        out << name << ": " << (result.pass() ? "pass" : "fail") << " (" << result.rows.size() << " rows, "
            << (dir / (name + ".csv")).string() << ")\n";
        return result.pass() ? 0 : 2;
    } catch (const ConfigError& e) {
        err << "modspace: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "modspace: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace modspace
