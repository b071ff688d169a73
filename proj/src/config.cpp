#include "sdwave/config.hpp"

#include "sdwave/error.hpp"
#include "sdwave/format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <string_view>

namespace sdwave {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double parse_plain(const std::string& token) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    if (!token.empty() && *begin == '+') ++begin;
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end || token.empty())
        throw Error(ErrorKind::parse, "not a number: '" + token + "'");
    return value;
}

long long parse_integer(const std::string& key, const std::string& value) {
    long long out = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size() || value.empty())
        throw Error(ErrorKind::parse, key + ": not an integer: '" + value + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw Error(ErrorKind::parse, key + ": expected true or false, got '" + value + "'");
}

bool is_dyadic(double x) {
    // x = 2^-m for some integer m >= 0
    if (!(x > 0.0 && x <= 1.0)) return false;
    int exp = 0;
    const double mant = std::frexp(x, &exp);
    return mant == 0.5;
}

void require(bool ok, const std::string& constraint) {
    if (!ok) throw Error(ErrorKind::validation, constraint);
}

bool integral_ratio(double final_time, double k) {
    const double ratio = final_time / k;
    return ratio >= 1.0 - 1e-12 && std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio;
}

std::vector<double> dyadic_range(int from, int to) {
    std::vector<double> out;
    for (int e = from; e <= to; ++e) out.push_back(std::ldexp(1.0, -e));
    return out;
}

std::string join(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += format_shortest(xs[i]);
    }
    return out;
}

} // namespace

const char* to_string(Command c) {
    switch (c) {
    case Command::spatial: return "spatial";
    case Command::temporal: return "temporal";
    case Command::deterministic: return "deterministic";
    case Command::energy: return "energy";
    case Command::regularity: return "regularity";
    case Command::hs_check: return "hs-check";
    }
    return "?";
}

double parse_number(const std::string& raw) {
    const std::string token = trim(raw);
    if (const auto slash = token.find('/'); slash != std::string::npos) {
        const double num = parse_plain(trim(token.substr(0, slash)));
        const double den = parse_plain(trim(token.substr(slash + 1)));
        if (den == 0.0) throw Error(ErrorKind::parse, "zero denominator in '" + token + "'");
        return num / den;
    }
    if (const auto caret = token.find('^'); caret != std::string::npos) {
        const double base = parse_plain(trim(token.substr(0, caret)));
        const double exponent = parse_plain(trim(token.substr(caret + 1)));
        return std::pow(base, exponent);
    }
    return parse_plain(token);
}

std::vector<double> parse_ladder(const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw Error(ErrorKind::parse, "empty entry in list '" + value + "'");
        if (const auto dots = item.find(".."); dots != std::string::npos) {
            const double a = parse_number(item.substr(0, dots));
            const double b = parse_number(item.substr(dots + 2));
            if (!is_dyadic(a) || !is_dyadic(b))
                throw Error(ErrorKind::parse, "range endpoints must be powers of two: '" + item + "'");
            int ea = 0;
            int eb = 0;
            std::frexp(a, &ea);
            std::frexp(b, &eb);
            const int step = ea >= eb ? -1 : 1;
            for (int e = ea; ; e += step) {
                out.push_back(std::ldexp(0.5, e));
                if (e == eb) break;
            }
        } else {
            out.push_back(parse_number(item));
        }
    }
    if (out.empty()) throw Error(ErrorKind::parse, "empty list");
    return out;
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw Error(ErrorKind::parse, "duplicate key '" + key + "'");
        if (value.empty()) throw Error(ErrorKind::parse, "key '" + key + "' has no value");

        if (key == "command") {
            if (value == "spatial") cfg.command = Command::spatial;
            else if (value == "temporal") cfg.command = Command::temporal;
            else if (value == "deterministic") cfg.command = Command::deterministic;
            else if (value == "energy") cfg.command = Command::energy;
            else if (value == "regularity") cfg.command = Command::regularity;
            else if (value == "hs-check") cfg.command = Command::hs_check;
            else throw Error(ErrorKind::parse, "command: unknown command '" + value + "'");
        } else if (key == "alpha") {
            cfg.alpha = parse_number(value);
        } else if (key == "T") {
            cfg.final_time = parse_number(value);
        } else if (key == "noise") {
            std::istringstream parts(value);
            std::string kind;
            std::string r;
            std::string extra;
            parts >> kind >> r >> extra;
            if (!extra.empty()) throw Error(ErrorKind::parse, "noise: trailing text '" + extra + "'");
            if (kind == "white") {
                if (!r.empty()) throw Error(ErrorKind::parse, "noise: white noise takes no exponent");
                cfg.noise = NoiseKind::white;
                cfg.noise_r = 0.0;
            } else if (kind == "fractional") {
                if (r.empty()) throw Error(ErrorKind::parse, "noise: fractional noise needs an exponent r");
                cfg.noise = NoiseKind::fractional;
                cfg.noise_r = parse_number(r);
            } else {
                throw Error(ErrorKind::parse, "noise: expected 'white' or 'fractional <r>', got '" + value + "'");
            }
        } else if (key == "gamma_label") {
            cfg.gamma_label = parse_number(value);
        } else if (key == "n_modes") {
            cfg.n_modes = static_cast<int>(parse_integer(key, value));
        } else if (key == "mc_samples") {
            cfg.mc_samples = static_cast<int>(parse_integer(key, value));
        } else if (key == "seed") {
            std::uint64_t s = 0;
            const auto res = std::from_chars(value.data(), value.data() + value.size(), s);
            if (res.ec != std::errc() || res.ptr != value.data() + value.size())
                throw Error(ErrorKind::parse, "seed: not an unsigned 64-bit integer: '" + value + "'");
            cfg.seed = s;
        } else if (key == "h_levels") {
            cfg.h_levels = parse_ladder(value);
        } else if (key == "k_levels") {
            cfg.k_levels = parse_ladder(value);
        } else if (key == "h_ref") {
            cfg.h_ref = parse_number(value);
        } else if (key == "k_ref") {
            cfg.k_ref = parse_number(value);
        } else if (key == "nonlinearity") {
            if (value == "zero") cfg.nonlinearity = Nonlinearity::zero;
            else if (value == "sine") cfg.nonlinearity = Nonlinearity::sine;
            else throw Error(ErrorKind::parse, "nonlinearity: expected 'zero' or 'sine', got '" + value + "'");
        } else if (key == "sweep") {
            if (value == "space") cfg.sweep = SweepAxis::space;
            else if (value == "time") cfg.sweep = SweepAxis::time;
            else throw Error(ErrorKind::parse, "sweep: expected 'space' or 'time', got '" + value + "'");
        } else if (key == "spatial_comparison") {
            if (value == "fine") cfg.comparison = SpatialComparison::fine;
            else if (value == "coarse_nodes") cfg.comparison = SpatialComparison::coarse_nodes;
            else throw Error(ErrorKind::parse, "spatial_comparison: expected 'fine' or 'coarse_nodes', got '" + value + "'");
        } else if (key == "initial_mode") {
            cfg.initial_mode = static_cast<int>(parse_integer(key, value));
        } else if (key == "holder_min_lag_steps") {
            cfg.holder_min_lag_steps = static_cast<int>(parse_integer(key, value));
        } else if (key == "holder_max_lag") {
            cfg.holder_max_lag = parse_number(value);
        } else if (key == "dump_increments") {
            cfg.dump_increments = parse_bool(key, value);
        } else if (key == "trajectory_csv") {
            cfg.trajectory_csv = parse_bool(key, value);
        } else if (key == "output_path") {
            cfg.output_path = value;
        } else {
            throw Error(ErrorKind::parse, "unknown key '" + key + "'");
        }
    }
    if (!seen.count("command")) throw Error(ErrorKind::parse, "missing required key 'command'");

    // Command-dependent defaults mirror the reference experiment ladders.
    if (!seen.count("h_levels")) cfg.h_levels = dyadic_range(1, 5);
    if (!seen.count("k_levels")) cfg.k_levels = dyadic_range(3, 7);
    if (!seen.count("h_ref")) cfg.h_ref = std::ldexp(1.0, cfg.command == Command::spatial ? -8 : -7);
    if (!seen.count("k_ref")) {
        const bool fine = cfg.command == Command::temporal ||
                          (cfg.command == Command::deterministic && cfg.sweep == SweepAxis::space);
        cfg.k_ref = std::ldexp(1.0, cfg.command == Command::spatial ? -14 : fine ? -12 : -10);
    }
    if (!seen.count("initial_mode")) cfg.initial_mode = cfg.command == Command::deterministic ? 1 : 0;
    if (!seen.count("nonlinearity") &&
        (cfg.command == Command::deterministic || cfg.command == Command::energy || cfg.command == Command::regularity))
        cfg.nonlinearity = Nonlinearity::zero;

    validate_config(cfg);
    return cfg;
}

void validate_config(const RunConfig& cfg) {
    require(cfg.alpha > 0.0 && std::isfinite(cfg.alpha), "alpha must be positive");
    require(cfg.final_time > 0.0 && std::isfinite(cfg.final_time), "T must be positive");
    require(cfg.mc_samples >= 1, "mc_samples must be >= 1");
    require(cfg.n_modes >= 1, "n_modes must be >= 1");
    require(cfg.noise == NoiseKind::white || (cfg.noise_r >= 0.0 && std::isfinite(cfg.noise_r)),
            "fractional noise exponent r must be >= 0");
    require(cfg.gamma_label >= -1.0 && cfg.gamma_label <= 1.0, "gamma_label must lie in [-1, 1]");
    require(cfg.initial_mode >= 0, "initial_mode must be >= 0");
    require(cfg.holder_min_lag_steps >= 1, "holder_min_lag_steps must be >= 1");
    require(cfg.holder_max_lag > 0.0 && cfg.holder_max_lag <= 1.0, "holder_max_lag must lie in (0, 1]");

    for (double h : cfg.h_levels) require(is_dyadic(h) && h <= 0.5, "h_levels must be dyadic (2^-m, m >= 1)");
    for (double k : cfg.k_levels) require(is_dyadic(k), "k_levels must be dyadic (2^-m)");
    for (std::size_t i = 1; i < cfg.h_levels.size(); ++i)
        require(cfg.h_levels[i] < cfg.h_levels[i - 1], "h_levels must be strictly decreasing");
    for (std::size_t i = 1; i < cfg.k_levels.size(); ++i)
        require(cfg.k_levels[i] < cfg.k_levels[i - 1], "k_levels must be strictly decreasing");
    require(is_dyadic(cfg.h_ref) && cfg.h_ref <= 0.5, "h_ref must be dyadic (2^-m, m >= 1)");
    require(is_dyadic(cfg.k_ref), "k_ref must be dyadic (2^-m)");
    require(integral_ratio(cfg.final_time, cfg.k_ref), "T / k_ref must be an integer");

    switch (cfg.command) {
    case Command::spatial:
        require(cfg.h_levels.size() >= 2, "spatial sweep needs at least two h_levels");
        require(cfg.h_ref < cfg.h_levels.back(), "h_ref must be strictly finer than every h level");
        break;
    case Command::temporal:
        require(cfg.k_levels.size() >= 2, "temporal sweep needs at least two k_levels");
        require(cfg.k_ref < cfg.k_levels.back(), "k_ref must be strictly finer than every k level");
        for (double k : cfg.k_levels) require(integral_ratio(cfg.final_time, k), "T / k must be an integer");
        break;
    case Command::deterministic:
        require(cfg.nonlinearity == Nonlinearity::zero, "deterministic runs need nonlinearity = zero");
        require(cfg.initial_mode >= 1, "deterministic runs need initial_mode >= 1");
        if (cfg.sweep == SweepAxis::space) {
            require(cfg.h_levels.size() >= 2, "spatial sweep needs at least two h_levels");
        } else {
            require(cfg.k_levels.size() >= 2, "temporal sweep needs at least two k_levels");
            for (double k : cfg.k_levels) require(integral_ratio(cfg.final_time, k), "T / k must be an integer");
        }
        break;
    case Command::energy:
        require(cfg.nonlinearity == Nonlinearity::zero, "energy audit needs nonlinearity = zero");
        break;
    case Command::regularity:
        require(cfg.final_time / cfg.k_ref >= 64.0, "regularity needs at least 64 time steps");
        break;
    case Command::hs_check:
        break;
    }
}

std::string config_echo(const RunConfig& cfg) {
    std::ostringstream os;
    os << "command = " << to_string(cfg.command) << '\n';
    os << "alpha = " << format_shortest(cfg.alpha) << '\n';
    os << "T = " << format_shortest(cfg.final_time) << '\n';
    if (cfg.noise == NoiseKind::white) os << "noise = white\n";
    else os << "noise = fractional " << format_shortest(cfg.noise_r) << '\n';
    os << "gamma_label = " << format_shortest(cfg.gamma_label) << '\n';
    os << "n_modes = " << cfg.n_modes << '\n';
    os << "mc_samples = " << cfg.mc_samples << '\n';
    os << "seed = " << cfg.seed << '\n';
    os << "h_levels = " << join(cfg.h_levels) << '\n';
    os << "k_levels = " << join(cfg.k_levels) << '\n';
    os << "h_ref = " << format_shortest(cfg.h_ref) << '\n';
    os << "k_ref = " << format_shortest(cfg.k_ref) << '\n';
    os << "nonlinearity = " << (cfg.nonlinearity == Nonlinearity::sine ? "sine" : "zero") << '\n';
    os << "spatial_comparison = " << (cfg.comparison == SpatialComparison::fine ? "fine" : "coarse_nodes") << '\n';
    os << "sweep = " << (cfg.sweep == SweepAxis::space ? "space" : "time") << '\n';
    os << "initial_mode = " << cfg.initial_mode << '\n';
    os << "holder_min_lag_steps = " << cfg.holder_min_lag_steps << '\n';
    os << "holder_max_lag = " << format_shortest(cfg.holder_max_lag) << '\n';
    os << "dump_increments = " << (cfg.dump_increments ? "true" : "false") << '\n';
    os << "trajectory_csv = " << (cfg.trajectory_csv ? "true" : "false") << '\n';
    os << "output_path = " << cfg.output_path << '\n';
    return os.str();
}

} // namespace sdwave
