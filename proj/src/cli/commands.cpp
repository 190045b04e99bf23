#include "chaoscomm/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "chaoscomm/channel.hpp"
#include "chaoscomm/coding.hpp"
#include "chaoscomm/decoder.hpp"
#include "chaoscomm/io.hpp"
#include "chaoscomm/lyapunov.hpp"
#include "chaoscomm/maps.hpp"
#include "chaoscomm/metrics.hpp"
#include "chaoscomm/oscillator.hpp"

namespace chaoscomm::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kNoiseSeedSalt = 0x9e3779b97f4a7c15ULL;

OscParams base_params(const RunConfig& cfg) { return OscParams::make(cfg.beta_base, cfg.base_freq); }

TapSet config_taps(const RunConfig& cfg) {
    TapSet taps;
    for (const auto& [alpha, tau] : cfg.taps)
        taps.taps.push_back({alpha, tau});
    return taps;
}

ChannelSpec channel_spec(const RunConfig& cfg) {
    ChannelSpec spec;
    spec.taps_per_user.assign(static_cast<std::size_t>(cfg.n_users), config_taps(cfg));
    spec.snr_db = cfg.snr_db;
    spec.dispersion_extra_delay.assign(static_cast<std::size_t>(cfg.n_users),
                                       cfg.dispersion_delay_fraction / cfg.base_freq);
    if (cfg.interference_amplitude > 0.0)
        spec.interference = Interference{cfg.interference_amplitude, cfg.interference_freq,
                                         cfg.interference_phase};
    return spec;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

json config_echo(const RunConfig& cfg) {
    json j;
    j["experiment"] = cfg.experiment;
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    j["oscillator"] = {{"beta_base", cfg.beta_base},
                       {"base_freq", cfg.base_freq},
                       {"steps_per_period", cfg.steps_per_period},
                       {"warmup_periods", cfg.warmup_periods},
                       {"truncation", cfg.truncation}};
    j["users"] = {{"count", cfg.n_users}, {"freq_multipliers", cfg.freq_multipliers}};
    j["coding"] = {{"zeta1", cfg.zeta1}};
    json taps = json::array();
    for (const auto& [alpha, tau] : cfg.taps)
        taps.push_back({{"alpha", alpha}, {"tau", tau}});
    j["channel"] = {{"snr_db", cfg.snr_db},
                    {"snr_grid", cfg.snr_grid},
                    {"taps", taps},
                    {"dispersion_delay_fraction", cfg.dispersion_delay_fraction},
                    {"interference_amplitude", cfg.interference_amplitude},
                    {"interference_freq", cfg.interference_freq},
                    {"interference_phase", cfg.interference_phase}};
    j["run"] = {{"periods", cfg.periods},
                {"message_periods", cfg.message_periods},
                {"filter_warmup_periods", cfg.filter_warmup_periods},
                {"trace_stride", cfg.trace_stride},
                {"baseline_csv", cfg.baseline_csv}};
    return j;
}

class ManifestTimer {
public:
    ManifestTimer(const RunConfig& cfg, std::string experiment)
        : cfg_(cfg), start_(std::chrono::steady_clock::now()) {
        manifest_.experiment = std::move(experiment);
        results_ = json::object();
    }

    void add_output(const std::string& path) { manifest_.outputs.push_back(path); }
    json& results() { return results_; }

    RunManifest finish() {
        manifest_.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        json j;
        j["tool_version"] = kToolVersion;
        j["experiment"] = manifest_.experiment;
        j["config"] = config_echo(cfg_);
        j["results"] = results_;
        j["outputs"] = manifest_.outputs;
        j["wall_time_s"] = manifest_.wall_time_s;
        manifest_.manifest_path = out_path(cfg_, manifest_.experiment + "_manifest.json");
        std::ofstream out(manifest_.manifest_path);
        out << j.dump(2) << '\n';
        return manifest_;
    }

private:
    const RunConfig& cfg_;
    std::chrono::steady_clock::time_point start_;
    RunManifest manifest_;
    json results_;
};

// ---------------------------------------------------------------------------
// Exact shift-map orbits driven by message bits.
//
// Iterating u' = 2u - b in floating point shifts information out of the
// mantissa and the orbit collapses after ~53 periods.  The controlled state
// is the window sum over the next mantissa-width symbols, so each u_n is
// rebuilt from the bit stream directly; this is exact and never collapses.

double window_u1(const std::vector<std::uint8_t>& bits, std::size_t n) {
    if (n + 53 > bits.size())
        throw DomainError("bit stream too short for the mantissa window");
    double acc = 0.0;
    for (std::size_t j = n + 53; j-- > n;)
        acc = (static_cast<double>(bits[j]) + acc) * 0.5;
    return acc;
}

double window_u2(const std::vector<int>& symbols, std::size_t n) {
    if (n + 27 > symbols.size())
        throw DomainError("symbol stream too short for the mantissa window");
    double acc = 0.0;
    for (std::size_t j = n + 27; j-- > n;)
        acc = (static_cast<double>(symbols[j]) + acc) * 0.25;
    return acc;
}

struct TwoUserMapSim {
    std::vector<std::uint8_t> bits1; ///< user 1, one bit per base period
    std::vector<std::uint8_t> bits2; ///< user 2, two bits per base period
    std::vector<int> b1;             ///< per-period symbols, length n+1
    std::vector<int> b2;
    std::vector<double> u1; ///< length n+1
    std::vector<double> u2;
    std::vector<double> O; ///< composed clean signal, length n+1
};

TwoUserMapSim simulate_two_user(long periods, const GainPlan& plan, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(periods);
    CounterRng rng(seed);
    TwoUserMapSim sim;
    sim.bits1.resize(n + 1 + 53);
    for (auto& b : sim.bits1)
        b = static_cast<std::uint8_t>(rng.next_bit());
    sim.bits2.resize(2 * (n + 1 + 27));
    for (auto& b : sim.bits2)
        b = static_cast<std::uint8_t>(rng.next_bit());

    const std::vector<int> packed = bits_to_symbols(sim.bits2, 2);
    sim.b1.assign(sim.bits1.begin(), sim.bits1.begin() + static_cast<long>(n + 1));
    sim.b2.assign(packed.begin(), packed.begin() + static_cast<long>(n + 1));

    sim.u1.resize(n + 1);
    sim.u2.resize(n + 1);
    sim.O.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        sim.u1[i] = window_u1(sim.bits1, i);
        sim.u2[i] = window_u2(packed, i);
        sim.O[i] = plan.gains[0] * sim.u1[i] + plan.gains[1] * sim.u2[i];
    }
    return sim;
}

RateReport sweep_point(const RunConfig& cfg, const GainPlan& plan, double snr_db,
                       std::size_t point_index) {
    // Per-point derived seed: seed XOR point index, split into message and
    // noise sub-streams.  Points are independent, so parallel execution and
    // grid-order merging produce identical bytes.
    const std::uint64_t derived = cfg.seed ^ static_cast<std::uint64_t>(point_index);
    const TwoUserMapSim sim = simulate_two_user(cfg.periods, plan, derived);

    const double power = mean_power(sim.O);
    const double sigma = snr_to_sigma(snr_db, power);
    const std::vector<double> noise = awgn(NoiseStream{derived ^ kNoiseSeedSalt, sigma}, sim.O.size());
    std::vector<double> received(sim.O.size());
    for (std::size_t i = 0; i < sim.O.size(); ++i)
        received[i] = sim.O[i] + noise[i];

    const PartitionSpec spec = PartitionSpec::from_plan(plan);
    const DecodeResult dec = decode_stream(received, spec, sim.b1, sim.b2);

    ConfusionTable t1(2);
    ConfusionTable t2(4);
    std::vector<std::uint8_t> bit_errors2;
    bit_errors2.reserve(2 * dec.b2.size());
    for (std::size_t i = 0; i < dec.b1.size(); ++i) {
        t1.add(sim.b1[i], dec.b1[i]);
        t2.add(sim.b2[i], dec.b2[i]);
        const int diff = sim.b2[i] ^ dec.b2[i];
        bit_errors2.push_back((diff >> 1) & 1);
        bit_errors2.push_back(diff & 1);
    }

    RateReport row;
    row.snr_db = snr_db;
    row.info_user1 = mutual_information(t1);
    row.info_user2 = mutual_information(t2);
    row.sum_info = row.info_user1 + row.info_user2;
    row.capacity = shannon_capacity(snr_db);
    row.encoding_cap = encoding_capacity_bits_per_period(
        {{1, cfg.beta_base}, {2, cfg.beta_base}});
    row.ber1 = ber(dec.err1);
    row.ber2 = ber(bit_errors2);
    return row;
}

} // namespace

std::vector<RateReport> sweep_snr_rows(const RunConfig& cfg) {
    const GainPlan plan = plan_gains(2, {1, 2}, cfg.zeta1);
    std::vector<std::future<RateReport>> futures;
    futures.reserve(cfg.snr_grid.size());
    for (std::size_t i = 0; i < cfg.snr_grid.size(); ++i)
        futures.push_back(std::async(std::launch::async, sweep_point, std::cref(cfg),
                                     std::cref(plan), cfg.snr_grid[i], i));
    std::vector<RateReport> rows;
    rows.reserve(futures.size());
    for (auto& f : futures)
        rows.push_back(f.get());
    return rows;
}

RunManifest cmd_sweep_snr(const RunConfig& cfg) {
    if (cfg.n_users != 2)
        throw ConfigError("the SNR sweep models the two-user configuration");
    ManifestTimer mt(cfg, "sweep-snr");
    const std::vector<RateReport> rows = sweep_snr_rows(cfg);

    const std::string path = out_path(cfg, "sweep_snr.csv");
    CsvWriter csv(path);
    csv.header({"snr_db", "I1", "I2", "sum_I", "C", "C_e", "ber1", "ber2"});
    for (const RateReport& r : rows) {
        csv.field(r.snr_db);
        csv.field(r.info_user1);
        csv.field(r.info_user2);
        csv.field(r.sum_info);
        csv.field(r.capacity);
        csv.field(r.encoding_cap);
        csv.field(r.ber1);
        csv.field(r.ber2);
        csv.end_row();
    }
    mt.add_output(path);
    mt.results()["points"] = rows.size();
    mt.results()["sum_info_at_max_snr"] = rows.back().sum_info;
    const GainPlan plan = plan_gains(2, {1, 2}, cfg.zeta1);
    mt.results()["gain_plan"] = {{"zeta", plan.zeta}, {"gains", plan.gains}};
    return mt.finish();
}

RunManifest cmd_return_maps(const RunConfig& cfg) {
    if (cfg.message_periods < 2)
        throw ConfigError("return-maps needs a message of at least two periods");
    ManifestTimer mt(cfg, "return-maps");
    const auto n = static_cast<std::size_t>(cfg.message_periods);

    double max_dev1 = 0.0;
    double max_dev2 = 0.0;

    // User 1: flow in message mode against the one-step shift-map prediction.
    {
        const OscParams p1 = base_params(cfg);
        CounterRng rng(cfg.seed);
        const SymbolStream msg = SymbolStream::random(n + 2 + static_cast<std::size_t>(cfg.truncation), rng);
        const Trajectory traj = integrate_hybrid(
            p1, &msg, message_initial_state(p1, msg, cfg.truncation),
            static_cast<double>(n + 1) * p1.period, p1.period / cfg.steps_per_period,
            {true, cfg.truncation});
        const std::vector<PeriodSample> flow = sample_at_periods(traj, p1);

        const std::string path = out_path(cfg, "return_map_user1.csv");
        CsvWriter csv(path);
        csv.header({"n", "u_flow", "u_flow_next", "u_map", "u_map_next", "b"});
        for (std::size_t i = 0; i + 1 < flow.size(); ++i) {
            const double uf = to_unit_interval(flow[i].x);
            const double uf_next = to_unit_interval(flow[i + 1].x);
            const int b = (flow[i].s + 1) / 2;
            const double um = window_u1(msg.bits(), i);
            const double um_next = window_u1(msg.bits(), i + 1);
            max_dev1 = std::max(max_dev1, std::abs(uf_next - (2.0 * uf - b)));
            csv.field(flow[i].n);
            csv.field(uf);
            csv.field(uf_next);
            csv.field(um);
            csv.field(um_next);
            csv.field(b);
            csv.end_row();
        }
        mt.add_output(path);
    }

    // User 2 at twice the base frequency, sampled every second own-period.
    {
        const OscParams p2 = OscParams::make(cfg.beta_base, 2.0 * cfg.base_freq);
        CounterRng rng(cfg.seed ^ 1);
        const SymbolStream msg = SymbolStream::random(
            2 * (n + 29) + static_cast<std::size_t>(cfg.truncation), rng);
        const Trajectory traj = integrate_hybrid(
            p2, &msg, message_initial_state(p2, msg, cfg.truncation),
            static_cast<double>(2 * (n + 1)) * p2.period, p2.period / cfg.steps_per_period,
            {true, cfg.truncation});
        const std::vector<PeriodSample> own = sample_at_periods(traj, p2);

        // The map orbit needs the full 27-symbol window past the last row.
        const std::vector<int> packed = bits_to_symbols(
            std::vector<std::uint8_t>(msg.bits().begin(),
                                      msg.bits().begin() + static_cast<long>(2 * (n + 29))),
            2);

        const std::string path = out_path(cfg, "return_map_user2.csv");
        CsvWriter csv(path);
        csv.header({"n", "u_flow", "u_flow_next", "u_map", "u_map_next", "b"});
        for (std::size_t i = 0; 2 * (i + 1) < own.size(); ++i) {
            const double uf = to_unit_interval(own[2 * i].x);
            const double uf_next = to_unit_interval(own[2 * (i + 1)].x);
            const int b = 2 * ((own[2 * i].s + 1) / 2) + ((own[2 * i + 1].s + 1) / 2);
            const double um = window_u2(packed, i);
            const double um_next = window_u2(packed, i + 1);
            max_dev2 = std::max(max_dev2, std::abs(uf_next - (4.0 * uf - b)));
            csv.field(static_cast<long>(i));
            csv.field(uf);
            csv.field(uf_next);
            csv.field(um);
            csv.field(um_next);
            csv.field(b);
            csv.end_row();
        }
        mt.add_output(path);
    }

    mt.results()["max_deviation_user1"] = max_dev1;
    mt.results()["max_deviation_user2"] = max_dev2;
    return mt.finish();
}

RunManifest cmd_received_map(const RunConfig& cfg) {
    ManifestTimer mt(cfg, "received-map");
    channel_spec(cfg).validate();
    const GainPlan plan = plan_gains(2, {1, 2}, cfg.zeta1);
    const PartitionSpec spec = PartitionSpec::from_plan(plan);
    const TwoUserMapSim sim = simulate_two_user(cfg.periods, plan, cfg.seed);

    const double power = mean_power(sim.O);
    const double sigma = snr_to_sigma(cfg.snr_db, power);
    const std::vector<double> noise =
        awgn(NoiseStream{cfg.seed ^ kNoiseSeedSalt, sigma}, sim.O.size());

    const std::string orbit_path = out_path(cfg, "received_map.csv");
    CsvWriter csv(orbit_path);
    csv.header({"n", "O_n", "O_next", "residual", "branch", "b1", "b2"});
    const std::string decoded_path = out_path(cfg, "decoded_stream.csv");
    CsvWriter dcsv(decoded_path);
    dcsv.header({"n", "b1", "b1_est", "b2", "b2_est", "j"});
    std::array<long, 8> occupancy{};
    long symbol_errors = 0;
    for (std::size_t i = 0; i + 1 < sim.O.size(); ++i) {
        const double on = sim.O[i] + noise[i];
        const double on1 = sim.O[i + 1] + noise[i + 1];
        const ThresholdDecision d = threshold_decode(on, on1, spec);
        ++occupancy[static_cast<std::size_t>(d.branch)];
        symbol_errors += (d.b1 != sim.b1[i]) + (d.b2 != sim.b2[i]);
        csv.field(static_cast<long>(i));
        csv.field(on);
        csv.field(on1);
        csv.field(spec.slope * on - on1);
        csv.field(d.branch);
        csv.field(sim.b1[i]);
        csv.field(sim.b2[i]);
        csv.end_row();
        dcsv.field(static_cast<long>(i));
        dcsv.field(sim.b1[i]);
        dcsv.field(d.b1);
        dcsv.field(sim.b2[i]);
        dcsv.field(d.b2);
        dcsv.field(d.branch);
        dcsv.end_row();
    }
    mt.add_output(orbit_path);
    mt.add_output(decoded_path);

    const std::string part_path = out_path(cfg, "partition.csv");
    CsvWriter pcsv(part_path);
    pcsv.header({"j", "threshold", "band_lo", "band_hi", "band_b1", "band_b2"});
    const std::vector<OffsetBand> bands = offset_bands(plan.gains[0], plan.gains[1]);
    for (int j = 0; j < 8; ++j) {
        pcsv.field(static_cast<long>(j));
        pcsv.field(j == 0 ? std::nan("") : spec.thresholds[static_cast<std::size_t>(j - 1)]);
        pcsv.field(bands[static_cast<std::size_t>(j)].lo);
        pcsv.field(bands[static_cast<std::size_t>(j)].hi);
        pcsv.field(bands[static_cast<std::size_t>(j)].b1);
        pcsv.field(bands[static_cast<std::size_t>(j)].b2);
        pcsv.end_row();
    }
    mt.add_output(part_path);

    json occ = json::array();
    for (long c : occupancy)
        occ.push_back(c);
    mt.results()["branch_occupancy"] = occ;
    mt.results()["symbol_errors"] = symbol_errors;
    mt.results()["snr_db"] = cfg.snr_db;
    const GainPlan echo = plan_gains(2, {1, 2}, cfg.zeta1);
    mt.results()["gain_plan"] = {{"zeta", echo.zeta}, {"gains", echo.gains}};
    return mt.finish();
}

RunManifest cmd_matched_filter(const RunConfig& cfg) {
    if (cfg.message_periods < cfg.filter_warmup_periods + 12)
        throw ConfigError("matched-filter needs message_periods > warm-up + 12");
    ManifestTimer mt(cfg, "matched-filter");
    const OscParams params = base_params(cfg);
    const double dt = params.period / cfg.steps_per_period;
    const auto n = static_cast<std::size_t>(cfg.message_periods);

    CounterRng rng(cfg.seed);
    std::vector<std::uint8_t> bits(n + 1 + static_cast<std::size_t>(cfg.truncation));
    for (auto& b : bits)
        b = static_cast<std::uint8_t>(rng.next_bit());
    bits[0] = 1; // agreed preamble symbol anchoring the filter integral
    const SymbolStream msg{std::move(bits)};

    const Trajectory traj =
        integrate_hybrid(params, &msg, message_initial_state(params, msg, cfg.truncation),
                         static_cast<double>(n) * params.period, dt, {true, cfg.truncation});
    std::vector<double> clean(traj.samples.size());
    for (std::size_t i = 0; i < clean.size(); ++i)
        clean[i] = traj.samples[i].x;

    const FilterRun clean_run =
        matched_filter_run(clean, params, dt, cfg.filter_warmup_periods, 1);
    const double clean_rate = filter_match_rate(clean_run, msg);

    const double sigma = snr_to_sigma(cfg.snr_db, mean_power(clean));
    const std::vector<double> w = awgn(NoiseStream{cfg.seed ^ kNoiseSeedSalt, sigma}, clean.size());
    std::vector<double> noisy(clean.size());
    for (std::size_t i = 0; i < clean.size(); ++i)
        noisy[i] = clean[i] + w[i];
    const FilterRun noisy_run =
        matched_filter_run(noisy, params, dt, cfg.filter_warmup_periods, 1);
    const double noisy_rate = filter_match_rate(noisy_run, msg);

    // Mean |eta - s| over the post-warm-up decision samples: eta carries the
    // symbol of the period ending at each boundary (it ramps in between).
    double eta_err = 0.0;
    long eta_count = 0;
    const long per = cfg.steps_per_period;
    for (long m = cfg.filter_warmup_periods + 1;; ++m) {
        const long i = (m + 1) * per - per; // filter grid index of t = (m+1)T
        if (i >= static_cast<long>(clean_run.eta.size()) || !msg.covers(m))
            break;
        eta_err += std::abs(clean_run.eta[static_cast<std::size_t>(i)] - msg.sign(m));
        ++eta_count;
    }
    eta_err /= static_cast<double>(eta_count);

    const std::string trace_path = out_path(cfg, "filter_traces.csv");
    CsvWriter csv(trace_path);
    csv.header({"t", "x", "s", "eta", "y", "S"});
    for (std::size_t i = 0; i < clean_run.t.size(); i += static_cast<std::size_t>(cfg.trace_stride)) {
        const std::size_t abs_index = i + static_cast<std::size_t>(per);
        csv.field(clean_run.t[i]);
        csv.field(traj.samples[abs_index].x);
        csv.field(traj.samples[abs_index].s);
        csv.field(clean_run.eta[i]);
        csv.field(clean_run.y[i]);
        csv.field(clean_run.S[i]);
        csv.end_row();
    }
    mt.add_output(trace_path);

    const std::string match_path = out_path(cfg, "filter_match.csv");
    CsvWriter mcsv(match_path);
    mcsv.header({"period", "sent_sign", "S_next_period", "match"});
    for (const FilterPeriodSymbol& ps : clean_run.symbols) {
        const long sent_period = ps.n - 1;
        if (!msg.covers(sent_period))
            continue;
        mcsv.field(sent_period);
        mcsv.field(msg.sign(sent_period));
        mcsv.field(ps.S);
        mcsv.field(static_cast<long>(ps.S == msg.sign(sent_period)));
        mcsv.end_row();
    }
    mt.add_output(match_path);

    mt.results()["clean_match_rate"] = clean_rate;
    mt.results()["noisy_match_rate"] = noisy_rate;
    mt.results()["noisy_snr_db"] = cfg.snr_db;
    mt.results()["mean_abs_eta_minus_s"] = eta_err;
    return mt.finish();
}

RunManifest cmd_lyapunov(const RunConfig& cfg) {
    ManifestTimer mt(cfg, "lyapunov");
    const OscParams params = base_params(cfg);
    const GainPlan plan = plan_gains(2, {1, 2}, cfg.zeta1);

    auto spectrum_json = [](const LESpectrum& s) {
        json j;
        j["exponents"] = s.exponents;
        j["unit"] = to_string(s.unit);
        j["n_steps"] = s.n_steps;
        if (s.skipped > 0)
            j["skipped_boundary_points"] = s.skipped;
        j["system"] = s.system;
        return j;
    };

    json spectra = json::object();

    // 1-D map estimates.
    {
        const OscParams p = params;
        auto direct = [&p](double r) {
            if (r == 0.0)
                return MapStep{direct_path_map(r, 1, p), std::nan("")};
            const int s = r >= 0.0 ? 1 : -1;
            return MapStep{direct_path_map(r, s, p), p.growth()};
        };
        spectra["direct_path_map"] =
            spectrum_json(le_map_1d(direct, 0.37, 100000, "direct_path_map"));

        auto shift2 = [](double u) {
            const double scaled = 4.0 * u;
            if (scaled == std::floor(scaled))
                return MapStep{shift_map(u, 2).u_next, std::nan("")};
            return MapStep{shift_map(u, 2).u_next, 4.0};
        };
        spectra["shift_map_k2"] = spectrum_json(le_map_1d(shift2, 0.37, 100000, "shift_map_k2"));

        const double c = cfg.interference_amplitude * std::sin(cfg.interference_phase);
        auto interfering = [&p, c](double r) {
            const double underlying = r - c;
            if (underlying == 0.0)
                return MapStep{interference_map(r, 1, c, 1.0, p), std::nan("")};
            const int s = underlying >= 0.0 ? 1 : -1;
            return MapStep{interference_map(r, s, c, 1.0, p), p.growth()};
        };
        spectra["interference_map"] =
            spectrum_json(le_map_1d(interfering, 0.37 + c, 100000, "interference_map"));
    }

    // Composed-map QR spectrum.
    {
        Eigen::MatrixXd j(2, 2);
        j << 4.0, -2.0 * plan.gains[0], 0.0, 2.0;
        spectra["composed_received_map"] = spectrum_json(
            le_qr(std::vector<Eigen::MatrixXd>(10000, j), "composed_received_map"));
    }

    // Continuous hybrid pair, forward and time-reversed.
    spectra["hybrid_flow"] = spectrum_json(le_continuous_hybrid(params, 500.0 * params.period));
    spectra["hybrid_flow_reversed"] =
        spectrum_json(le_continuous_hybrid(params, 500.0 * params.period, true));

    // Roessler blocks with the frequency ratio Q = 2.
    {
        const auto [user1, user2] = le_rossler_pair(0.2, 0.2, 5.7, 2.0, 1000000, 0.01);
        spectra["roessler_user1"] = spectrum_json(user1.spectrum);
        spectra["roessler_user1"]["mean_jacobian_trace"] = user1.mean_trace;
        spectra["roessler_user2"] = spectrum_json(user2.spectrum);
        spectra["roessler_user2"]["mean_jacobian_trace"] = user2.mean_trace;
    }

    const std::string path = out_path(cfg, "lyapunov_spectra.json");
    std::ofstream out(path);
    out << spectra.dump(2) << '\n';
    mt.add_output(path);
    mt.results()["systems"] = spectra.size();
    return mt.finish();
}

RunManifest cmd_dispersion(const RunConfig& cfg) {
    ManifestTimer mt(cfg, "dispersion");
    const OscParams params = base_params(cfg);
    channel_spec(cfg).validate();
    const double delay = cfg.dispersion_delay_fraction * params.period;
    const TapSet taps = apply_dispersion(config_taps(cfg), delay, params);
    if (taps.count() != 1 || taps.taps.front().alpha != 1.0)
        throw ConfigError("dispersion bootstrap models the unit-gain direct path only");
    const double k0 = k_factor(taps.taps.front().tau, params);

    const long periods = std::min<long>(cfg.periods, 1000);
    const auto n = static_cast<std::size_t>(periods);
    CounterRng rng(cfg.seed);
    const SymbolStream msg =
        SymbolStream::random(n + 3 + static_cast<std::size_t>(cfg.truncation), rng);

    const double dt = params.period / cfg.steps_per_period;
    const Trajectory traj =
        integrate_hybrid(params, &msg, message_initial_state(params, msg, cfg.truncation),
                         static_cast<double>(n + 2) * params.period, dt, {true, cfg.truncation});

    // Received samples r_n = x(nT - delay), n = 1 .. n+1.
    std::vector<double> t_grid;
    for (std::size_t i = 1; i <= n + 1; ++i)
        t_grid.push_back(static_cast<double>(i) * params.period);
    const std::vector<UserSignal> users{{&traj, &params, UserPlan{1, 1, 1.0, 1.0}, taps}};
    const std::vector<double> received = uplink_compose(users, nullptr, t_grid);

    // Map-versus-flow validation of the dispersive return map.
    double max_dev = 0.0;
    for (std::size_t i = 0; i + 1 < received.size(); ++i) {
        const long map_index = static_cast<long>(i) + 1;
        const double predicted = multipath_map(
            received[i], taps, multipath_symbols(msg, map_index, taps, params), params);
        max_dev = std::max(max_dev, std::abs(predicted - received[i + 1]));
    }

    // Bootstrap decoding: residual of (r_1, r_2) consumes s_0 as the dummy.
    const BootstrapResult clean_dec = dispersion_bootstrap_decode(received, k0, msg.sign(0), params);
    long clean_errors = 0;
    for (std::size_t i = 1; i < clean_dec.symbols.size(); ++i)
        if (clean_dec.symbols[i] != msg.sign(static_cast<long>(i)))
            ++clean_errors;

    const double sigma = snr_to_sigma(cfg.snr_db, mean_power(received));
    const std::vector<double> w = awgn(NoiseStream{cfg.seed ^ kNoiseSeedSalt, sigma}, received.size());
    std::vector<double> noisy(received.size());
    for (std::size_t i = 0; i < received.size(); ++i)
        noisy[i] = received[i] + w[i];
    const BootstrapResult noisy_dec = dispersion_bootstrap_decode(noisy, k0, msg.sign(0), params);
    long noisy_errors = 0;
    long noisy_flags = 0;
    for (std::size_t i = 1; i < noisy_dec.symbols.size(); ++i) {
        if (noisy_dec.symbols[i] != msg.sign(static_cast<long>(i)))
            ++noisy_errors;
        noisy_flags += noisy_dec.ambiguous[i];
    }

    const std::string path = out_path(cfg, "dispersion_decode.csv");
    CsvWriter csv(path);
    csv.header({"n", "r_n", "sent_sign", "decoded_clean", "decoded_noisy", "ambiguous_noisy"});
    for (std::size_t i = 0; i < clean_dec.symbols.size() && i < received.size(); ++i) {
        csv.field(static_cast<long>(i));
        csv.field(received[i]);
        csv.field(msg.sign(static_cast<long>(i)));
        csv.field(clean_dec.symbols[i]);
        csv.field(noisy_dec.symbols[i]);
        csv.field(static_cast<long>(noisy_dec.ambiguous[i]));
        csv.end_row();
    }
    mt.add_output(path);

    mt.results()["k0"] = k0;
    mt.results()["delay"] = delay;
    mt.results()["max_map_flow_deviation"] = max_dev;
    mt.results()["clean_symbol_errors"] = clean_errors;
    mt.results()["noisy_symbol_error_rate"] =
        static_cast<double>(noisy_errors) / static_cast<double>(noisy_dec.symbols.size() - 1);
    mt.results()["noisy_ambiguous_flags"] = noisy_flags;
    mt.results()["snr_db"] = cfg.snr_db;
    return mt.finish();
}

RunManifest cmd_interference(const RunConfig& cfg) {
    ManifestTimer mt(cfg, "interference");
    const OscParams params = base_params(cfg);
    if (std::abs(cfg.interference_freq - cfg.base_freq) > 1e-12)
        throw ConfigError("only the matched-frequency interferer (f_p = f) is modelled");
    const double c = cfg.interference_amplitude * std::sin(cfg.interference_phase);
    const double g = params.growth();

    const long periods = std::min<long>(cfg.periods, 20000);
    const auto n = static_cast<std::size_t>(periods);
    CounterRng rng(cfg.seed);
    std::vector<std::uint8_t> bits(n + 1 + 53);
    for (auto& b : bits)
        b = static_cast<std::uint8_t>(rng.next_bit());

    // Clean direct-path orbit from the window sums; the interfered series is
    // its physical superposition r + c.
    std::vector<double> r0(n + 1);
    std::vector<int> s(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        r0[i] = to_signed_interval(window_u1(bits, i));
        s[i] = 2 * bits[i] - 1;
    }

    double max_intercept_dev = 0.0;
    const std::string path = out_path(cfg, "interference_map.csv");
    CsvWriter csv(path);
    csv.header({"n", "r_clean", "r_clean_next", "r_interfered", "r_interfered_next", "s"});
    for (std::size_t i = 0; i + 1 <= n; ++i) {
        const double rc = r0[i] + c;
        const double rc_next = r0[i + 1] + c;
        if (i >= 60) {
            // Branch intercept relative to the clean map: should sit at
            // -(e^{beta/f} - 1) c on every branch.
            const double intercept = rc_next - g * rc + (g - 1.0) * s[i];
            max_intercept_dev = std::max(max_intercept_dev,
                                         std::abs(intercept - (-(g - 1.0) * c)));
        }
        csv.field(static_cast<long>(i));
        csv.field(r0[i]);
        csv.field(r0[i + 1]);
        csv.field(rc);
        csv.field(rc_next);
        csv.field(static_cast<long>(s[i]));
        csv.end_row();
    }
    mt.add_output(path);

    auto interfering = [&params, c](double r) {
        const double underlying = r - c;
        if (underlying == 0.0)
            return MapStep{interference_map(r, 1, c, 1.0, params), std::nan("")};
        const int sym = underlying >= 0.0 ? 1 : -1;
        return MapStep{interference_map(r, sym, c, 1.0, params), params.growth()};
    };
    const LESpectrum le = le_map_1d(interfering, 0.37 + c, 100000, "interference_map");

    mt.results()["interference_constant"] = c;
    mt.results()["map_le_nepits_per_period"] = le.exponents.front();
    mt.results()["max_branch_intercept_deviation"] = max_intercept_dev;
    return mt.finish();
}

RunManifest cmd_overlay_external(const RunConfig& cfg) {
    if (cfg.baseline_csv.empty())
        throw ConfigError("overlay-external needs run.baseline_csv");
    ManifestTimer mt(cfg, "overlay-external");

    std::ifstream in(cfg.baseline_csv);
    if (!in)
        throw ConfigError("cannot open baseline file " + cfg.baseline_csv);
    std::string header;
    if (!std::getline(in, header))
        throw ConfigError("baseline file is empty (expected a snr_db,rate header)");
    while (!header.empty() && (header.back() == '\r' || header.back() == '\n'))
        header.pop_back();
    if (header != "snr_db,rate")
        throw ConfigError("baseline columns must be snr_db,rate (units mismatch?), got '" +
                          header + "'");

    std::vector<std::pair<double, double>> baseline;
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
            line.pop_back();
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError("malformed baseline row at line " + std::to_string(lineno));
        try {
            baseline.emplace_back(std::stod(line.substr(0, comma)),
                                  std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ConfigError("malformed baseline row at line " + std::to_string(lineno));
        }
    }

    const std::vector<RateReport> rows = sweep_snr_rows(cfg);

    // Union of the two SNR grids, in ascending order.
    std::vector<double> grid;
    for (const RateReport& r : rows)
        grid.push_back(r.snr_db);
    for (const auto& [snr, rate] : baseline)
        grid.push_back(snr);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-9; }),
               grid.end());

    const std::string path = out_path(cfg, "overlay.csv");
    CsvWriter csv(path);
    csv.header({"snr_db", "sum_I", "external_rate"});
    for (double snr : grid) {
        csv.field(snr);
        const auto row = std::find_if(rows.begin(), rows.end(), [&](const RateReport& r) {
            return std::abs(r.snr_db - snr) < 1e-9;
        });
        csv.field(row != rows.end() ? format_double(row->sum_info) : std::string());
        const auto ext = std::find_if(baseline.begin(), baseline.end(), [&](const auto& p) {
            return std::abs(p.first - snr) < 1e-9;
        });
        csv.field(ext != baseline.end() ? format_double(ext->second) : std::string());
        csv.end_row();
    }
    mt.add_output(path);
    mt.results()["merged_rows"] = grid.size();
    mt.results()["baseline_rows"] = baseline.size();
    return mt.finish();
}

RunManifest run_command(const std::string& name, const RunConfig& cfg) {
    RunConfig local = cfg;
    local.experiment = name;
    local.validate();
    if (name == "return-maps")
        return cmd_return_maps(local);
    if (name == "received-map")
        return cmd_received_map(local);
    if (name == "sweep-snr")
        return cmd_sweep_snr(local);
    if (name == "matched-filter")
        return cmd_matched_filter(local);
    if (name == "lyapunov")
        return cmd_lyapunov(local);
    if (name == "dispersion")
        return cmd_dispersion(local);
    if (name == "interference")
        return cmd_interference(local);
    if (name == "overlay-external")
        return cmd_overlay_external(local);
    throw ConfigError("unknown experiment: " + name);
}

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"deterministic multi-user chaotic-waveform experiment harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"return-maps", "map-iterate and flow-sampled return-map pairs for both users"},
        {"received-map", "two-user composed return map with the decoding partition"},
        {"sweep-snr", "mutual information and capacity across an SNR grid"},
        {"matched-filter", "matched-filter decoding traces and per-period match rate"},
        {"lyapunov", "Lyapunov spectra of every modelled system"},
        {"dispersion", "dispersive-channel map validation and bootstrap decoding"},
        {"interference", "periodic-interference map displacement and LE invariance"},
        {"overlay-external", "merge an external rate baseline with the SNR sweep"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, desc] : commands) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "run configuration file");
        sub->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
            seed_given = true;
        });
        sub->add_option("--out", out_dir, "output directory override");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty())
            cfg = RunConfig::load(config_path);
        else if (!seed_given)
            throw ConfigError("a config file or --seed is required (the seed is mandatory)");
        if (seed_given)
            cfg.seed = seed;
        if (!out_dir.empty())
            cfg.out_dir = out_dir;

        const std::string name = app.get_subcommands().front()->get_name();
        const RunManifest manifest = run_command(name, cfg);
        std::printf("%s: wrote %zu output(s) under %s (%.2f s)\n", name.c_str(),
                    manifest.outputs.size(), cfg.out_dir.c_str(), manifest.wall_time_s);
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
}

} // namespace chaoscomm::cli
