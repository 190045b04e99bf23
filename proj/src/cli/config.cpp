#include "chaoscomm/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace chaoscomm::cli {

namespace {

constexpr double kLn2 = 0.69314718055994530941723212145818;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    if (v == "ln2") // common enough in run files to deserve a shorthand
        return kLn2;
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
    }
}

long to_long(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long d = std::stol(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for " + key + ": '" + v + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        out.push_back(trim(item));
    return out;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "experiment", "seed", "out_dir",
        "oscillator.beta_base", "oscillator.base_freq", "oscillator.steps_per_period",
        "oscillator.warmup_periods", "oscillator.truncation",
        "users.count", "users.freq_multipliers",
        "coding.zeta1",
        "channel.snr_db", "channel.snr_grid", "channel.taps",
        "channel.dispersion_delay_fraction", "channel.interference_amplitude",
        "channel.interference_freq", "channel.interference_phase",
        "run.periods", "run.message_periods", "run.filter_warmup_periods",
        "run.trace_stride", "run.baseline_csv"};
    return keys;
}

} // namespace

RawConfig RawConfig::parse_text(const std::string& text) {
    RawConfig cfg;
    std::stringstream ss(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("empty key at line " + std::to_string(lineno));
        const std::string full = section.empty() ? key : section + "." + key;
        if (!known_keys().count(full))
            throw ConfigError("unknown configuration key: " + full);
        cfg.values[full] = value;
    }
    return cfg;
}

RawConfig RawConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

std::vector<double> parse_grid(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 3)
        throw ConfigError("grid must be lo:hi:step, got '" + text + "'");
    const double lo = to_double("grid", parts[0]);
    const double hi = to_double("grid", parts[1]);
    const double step = to_double("grid", parts[2]);
    if (!(step > 0.0) || hi < lo)
        throw ConfigError("grid must satisfy lo <= hi with positive step");
    std::vector<double> out;
    for (double v = lo; v <= hi + 1e-9 * step; v += step)
        out.push_back(v);
    return out;
}

RunConfig::RunConfig() : beta_base(kLn2) {
    snr_grid = parse_grid("0:50:2");
}

RunConfig RunConfig::from_raw(const RawConfig& raw) {
    RunConfig cfg;
    bool seed_seen = false;
    for (const auto& [key, value] : raw.values) {
        if (key == "experiment") {
            cfg.experiment = value;
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(to_long(key, value));
            seed_seen = true;
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else if (key == "oscillator.beta_base") {
            cfg.beta_base = to_double(key, value);
        } else if (key == "oscillator.base_freq") {
            cfg.base_freq = to_double(key, value);
        } else if (key == "oscillator.steps_per_period") {
            cfg.steps_per_period = static_cast<int>(to_long(key, value));
        } else if (key == "oscillator.warmup_periods") {
            cfg.warmup_periods = static_cast<int>(to_long(key, value));
        } else if (key == "oscillator.truncation") {
            cfg.truncation = static_cast<int>(to_long(key, value));
        } else if (key == "users.count") {
            cfg.n_users = static_cast<int>(to_long(key, value));
        } else if (key == "users.freq_multipliers") {
            cfg.freq_multipliers.clear();
            for (const auto& p : split(value, ','))
                cfg.freq_multipliers.push_back(static_cast<int>(to_long(key, p)));
        } else if (key == "coding.zeta1") {
            cfg.zeta1 = to_double(key, value);
        } else if (key == "channel.snr_db") {
            cfg.snr_db = to_double(key, value);
        } else if (key == "channel.snr_grid") {
            cfg.snr_grid = parse_grid(value);
        } else if (key == "channel.taps") {
            cfg.taps.clear();
            for (const auto& p : split(value, ',')) {
                const auto at = p.find('@');
                if (at == std::string::npos)
                    throw ConfigError("taps must be alpha@tau pairs, got '" + p + "'");
                cfg.taps.emplace_back(to_double(key, trim(p.substr(0, at))),
                                      to_double(key, trim(p.substr(at + 1))));
            }
        } else if (key == "channel.dispersion_delay_fraction") {
            cfg.dispersion_delay_fraction = to_double(key, value);
        } else if (key == "channel.interference_amplitude") {
            cfg.interference_amplitude = to_double(key, value);
        } else if (key == "channel.interference_freq") {
            cfg.interference_freq = to_double(key, value);
        } else if (key == "channel.interference_phase") {
            cfg.interference_phase = to_double(key, value);
        } else if (key == "run.periods") {
            cfg.periods = to_long(key, value);
        } else if (key == "run.message_periods") {
            cfg.message_periods = static_cast<int>(to_long(key, value));
        } else if (key == "run.filter_warmup_periods") {
            cfg.filter_warmup_periods = static_cast<int>(to_long(key, value));
        } else if (key == "run.trace_stride") {
            cfg.trace_stride = static_cast<int>(to_long(key, value));
        } else if (key == "run.baseline_csv") {
            cfg.baseline_csv = value;
        }
    }
    if (!seed_seen)
        throw ConfigError("the seed key is mandatory");
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    RunConfig cfg = from_raw(RawConfig::parse_file(path));
    return cfg;
}

void RunConfig::validate() const {
    if (!(beta_base > 0.0) || beta_base > kLn2 * (1.0 + 1e-12))
        throw ConfigError("oscillator.beta_base must lie in (0, ln 2]");
    if (!(base_freq > 0.0))
        throw ConfigError("oscillator.base_freq must be positive");
    if (steps_per_period < 200)
        throw ConfigError("oscillator.steps_per_period must be at least 200");
    if (n_users < 1 || static_cast<int>(freq_multipliers.size()) != n_users)
        throw ConfigError("users.count must match users.freq_multipliers");
    if (!(zeta1 > 0.0))
        throw ConfigError("coding.zeta1 must be positive");
    if (periods < 2)
        throw ConfigError("run.periods must be at least 2");
    if (message_periods < 0)
        throw ConfigError("run.message_periods must be nonnegative");
    if (trace_stride < 1)
        throw ConfigError("run.trace_stride must be positive");
    if (dispersion_delay_fraction < 0.0 || dispersion_delay_fraction >= 1.0)
        throw ConfigError("channel.dispersion_delay_fraction must lie in [0, 1)");
    if (interference_amplitude < 0.0)
        throw ConfigError("channel.interference_amplitude must be nonnegative");
}

} // namespace chaoscomm::cli
