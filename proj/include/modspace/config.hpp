#pragma once

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace modspace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat key=value experiment configuration. Lists are comma separated; reals
/// are written with 17 significant digits, so to_text/parse_config round-trip
/// exactly.
struct ExperimentConfig {
    std::string experiment;
    int dim = 1;
    int grid = 512;  ///< points per axis; lattice size per axis for `indices`
    double half_length = 16.0;
    std::vector<double> p{2.0, 3.0, 4.0};
    std::vector<double> q{2.0, 3.0, 4.0};
    double delta = 0.5;
    std::vector<double> m{1.0};
    int j0 = 0;  ///< 0 picks the minimal admissible level
    std::vector<int> j_max;
    std::string window = "gaussian";
    double window_width = 1.0;
    std::vector<double> a_values;
    std::vector<double> k_values;
    int family_size = 64;
    int refine_steps = 50;
    int positions = 0;
    int samples = 20;
    int control = 0;
    std::uint64_t seed = 1;
    std::string out;
    int parallel = 1;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || *end != '\0' || errno == ERANGE) throw ConfigError("config: bad real for " + key + ": '" + text + "'");
    return v;
}

inline long long parse_integer(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (t.empty() || *end != '\0' || errno == ERANGE) throw ConfigError("config: bad integer for " + key + ": '" + text + "'");
    return v;
}

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    if (trim(text).empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

template <class T, class Fmt>
std::string join(const std::vector<T>& v, Fmt fmt) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
}

}  // namespace detail

/// Keys accepted in config files and as `--key` overrides (with '-' for '_').
inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "experiment", "dim",     "grid",         "half_length", "p",       "q",       "delta",  "m",
        "j0",         "j_max",   "window",       "window_width", "a_values", "k_values", "family_size",
        "refine_steps", "positions", "samples",  "control",     "seed",    "out",     "parallel"};
    return keys;
}

inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
    using namespace detail;
    auto reals = [&] {
        std::vector<double> v;
        for (const auto& s : split_list(value)) v.push_back(parse_real(key, s));
        return v;
    };
    auto integer = [&] { return static_cast<int>(parse_integer(key, value)); };
    if (key == "experiment") c.experiment = trim(value);
    else if (key == "dim") c.dim = integer();
    else if (key == "grid") c.grid = integer();
    else if (key == "half_length") c.half_length = parse_real(key, value);
    else if (key == "p") c.p = reals();
    else if (key == "q") c.q = reals();
    else if (key == "delta") c.delta = parse_real(key, value);
    else if (key == "m") c.m = reals();
    else if (key == "j0") c.j0 = integer();
    else if (key == "j_max") {
        c.j_max.clear();
        for (const auto& s : split_list(value)) c.j_max.push_back(static_cast<int>(parse_integer(key, s)));
    } else if (key == "window") {
        c.window = trim(value);
        if (c.window != "gaussian" && c.window != "bump") throw ConfigError("config: window must be gaussian or bump");
    } else if (key == "window_width") c.window_width = parse_real(key, value);
    else if (key == "a_values") c.a_values = reals();
    else if (key == "k_values") c.k_values = reals();
    else if (key == "family_size") c.family_size = integer();
    else if (key == "refine_steps") c.refine_steps = integer();
    else if (key == "positions") c.positions = integer();
    else if (key == "samples") c.samples = integer();
    else if (key == "control") c.control = integer();
    else if (key == "seed") {
        const std::string t = trim(value);
        char* end = nullptr;
        errno = 0;
        const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
        if (t.empty() || t[0] == '-' || *end != '\0' || errno == ERANGE) throw ConfigError("config: bad seed '" + value + "'");
        c.seed = v;
    } else if (key == "out") c.out = trim(value);
    else if (key == "parallel") c.parallel = integer();
    else throw ConfigError("config: unknown key '" + key + "'");
}

inline std::string to_text(const ExperimentConfig& c) {
    using namespace detail;
    auto r = [](double v) { return format_real(v); };
    auto i = [](int v) { return std::to_string(v); };
    std::ostringstream os;
    os << "experiment=" << c.experiment << '\n'
       << "dim=" << c.dim << '\n'
       << "grid=" << c.grid << '\n'
       << "half_length=" << r(c.half_length) << '\n'
       << "p=" << join(c.p, r) << '\n'
       << "q=" << join(c.q, r) << '\n'
       << "delta=" << r(c.delta) << '\n'
       << "m=" << join(c.m, r) << '\n'
       << "j0=" << c.j0 << '\n'
       << "j_max=" << join(c.j_max, i) << '\n'
       << "window=" << c.window << '\n'
       << "window_width=" << r(c.window_width) << '\n'
       << "a_values=" << join(c.a_values, r) << '\n'
       << "k_values=" << join(c.k_values, r) << '\n'
       << "family_size=" << c.family_size << '\n'
       << "refine_steps=" << c.refine_steps << '\n'
       << "positions=" << c.positions << '\n'
       << "samples=" << c.samples << '\n'
       << "control=" << c.control << '\n'
       << "seed=" << c.seed << '\n'
       << "out=" << c.out << '\n'
       << "parallel=" << c.parallel << '\n';
    return os.str();
}

/// Applies the lines of `text` on top of `base`. Blank lines and '#' comments are skipped.
inline ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {}) {
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: line " + std::to_string(lineno) + " is not key=value");
        }
        set_config_value(base, detail::trim(t.substr(0, eq)), t.substr(eq + 1));
    }
    return base;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

}  // namespace modspace
