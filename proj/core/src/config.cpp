#include "qcns/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qcns {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw std::runtime_error("config: " + where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

EnvironmentSpec RunConfig::make_environment_spec() const {
    EnvironmentSpec spec;
    spec.charge = charge_noise;
    spec.parity = parity_noise;
    spec.flux = flux_noise;
    spec.jumps.flux_per_cm2_s = jump_flux_per_cm2_s;
    spec.jumps.sensing_area_cm2 = jump_sensing_area_cm2;
    if (spec.jumps.event_rate() > 0) {
        const GeometryGrid grid = geometry.make_grid();
        const PotentialField field = solve_laplace(grid);
        Rng rng = substream(seed, "jump-sampler");
        spec.jumps.size_sampler =
            sample_jump_distribution(field, grid, jump_sampler_draws, rng).sampler();
    }
    return spec;
}

RunConfig RunConfig::preset_config(const std::string& name) {
    RunConfig cfg;
    cfg.preset = name;
    cfg.device = DeviceParams::preset(name);
    if (name == "qubitA") {
        cfg.charge_noise = {2.9e-4, 1.93, 1e-7, 1e5};
        cfg.jump_flux_per_cm2_s = 17.0;
        cfg.jump_sensing_area_cm2 = 1.0 / (250.0 * 17.0);
    } else if (name == "qubitB") {
        cfg.charge_noise = {1.6e-4, 1.87, 1e-7, 1e5};
        cfg.jump_flux_per_cm2_s = 15.0;
        cfg.jump_sensing_area_cm2 = 1.0 / (290.0 * 15.0);
    }
    cfg.parity_noise = {cfg.device.parity_rate_gamma};
    return cfg;
}

namespace {

void apply_device(const json& j, DeviceParams& d) {
    require_keys(j, "device",
                 {"ej_over_h_ghz", "ec_over_h_ghz", "omega_bar_over_2pi_hz",
                  "dispersion_over_2pi_hz", "visibility_nu", "decay_d", "parity_rate_over_2pi_hz",
                  "shot_rate_hz", "scan_period_s", "recal_period_s", "gate_duration_s",
                  "scan_points", "scan_shots_per_point"});
    maybe(j, "ej_over_h_ghz", d.ej_over_h_ghz);
    maybe(j, "ec_over_h_ghz", d.ec_over_h_ghz);
    if (j.contains("omega_bar_over_2pi_hz")) d.omega_bar = kTwoPi * j.at("omega_bar_over_2pi_hz").get<double>();
    if (j.contains("dispersion_over_2pi_hz"))
        d.dispersion = kTwoPi * j.at("dispersion_over_2pi_hz").get<double>();
    maybe(j, "visibility_nu", d.visibility_nu);
    maybe(j, "decay_d", d.decay_d);
    if (j.contains("parity_rate_over_2pi_hz"))
        d.parity_rate_gamma = kTwoPi * j.at("parity_rate_over_2pi_hz").get<double>();
    maybe(j, "shot_rate_hz", d.shot_rate_hz);
    maybe(j, "scan_period_s", d.scan_period_s);
    maybe(j, "recal_period_s", d.recal_period_s);
    maybe(j, "gate_duration_s", d.gate_duration_s);
    maybe(j, "scan_points", d.scan_points);
    maybe(j, "scan_shots_per_point", d.scan_shots_per_point);
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config: invalid JSON: ") + e.what());
    }
    require_keys(j, "top level",
                 {"preset", "device", "noise", "geometry", "flux_readout", "protocol", "env_dt_s",
                  "seed", "out_dir"});

    RunConfig cfg;
    if (j.contains("preset")) cfg = RunConfig::preset_config(j.at("preset").get<std::string>());

    if (j.contains("device")) apply_device(j.at("device"), cfg.device);
    cfg.device.validate();

    if (j.contains("noise")) {
        const json& n = j.at("noise");
        require_keys(n, "noise", {"power_law", "telegraph", "jumps", "flux"});
        if (n.contains("power_law")) {
            const json& p = n.at("power_law");
            require_keys(p, "noise.power_law", {"amplitude_at_1hz", "exponent", "f_min", "f_max"});
            maybe(p, "amplitude_at_1hz", cfg.charge_noise.amplitude_at_1hz);
            maybe(p, "exponent", cfg.charge_noise.exponent);
            maybe(p, "f_min", cfg.charge_noise.f_min);
            maybe(p, "f_max", cfg.charge_noise.f_max);
            cfg.charge_noise.validate();
        }
        if (n.contains("telegraph")) {
            const json& p = n.at("telegraph");
            require_keys(p, "noise.telegraph", {"gamma_over_2pi_hz"});
            if (p.contains("gamma_over_2pi_hz"))
                cfg.parity_noise.gamma = kTwoPi * p.at("gamma_over_2pi_hz").get<double>();
        }
        if (n.contains("jumps")) {
            const json& p = n.at("jumps");
            require_keys(p, "noise.jumps",
                         {"flux_per_cm2_s", "sensing_area_cm2", "sampler_draws"});
            maybe(p, "flux_per_cm2_s", cfg.jump_flux_per_cm2_s);
            maybe(p, "sensing_area_cm2", cfg.jump_sensing_area_cm2);
            maybe(p, "sampler_draws", cfg.jump_sampler_draws);
        }
        if (n.contains("flux")) {
            const json& p = n.at("flux");
            require_keys(p, "noise.flux", {"amplitude_at_1hz", "exponent", "correlation_c"});
            maybe(p, "amplitude_at_1hz", cfg.flux_noise.amplitude_at_1hz);
            maybe(p, "exponent", cfg.flux_noise.exponent);
            maybe(p, "correlation_c", cfg.flux_noise.correlation_c);
            cfg.flux_noise.validate();
        }
    }

    if (j.contains("geometry")) {
        const json& g = j.at("geometry");
        require_keys(g, "geometry",
                     {"island_w_um", "island_h_um", "gap_um", "border_um", "pitch_um"});
        maybe(g, "island_w_um", cfg.geometry.island_w_um);
        maybe(g, "island_h_um", cfg.geometry.island_h_um);
        maybe(g, "gap_um", cfg.geometry.gap_um);
        maybe(g, "border_um", cfg.geometry.border_um);
        maybe(g, "pitch_um", cfg.geometry.pitch_um);
    }

    if (j.contains("flux_readout")) {
        const json& f = j.at("flux_readout");
        require_keys(f, "flux_readout",
                     {"transfer_slope_over_2pi_hz_per_phi0", "highband_dispersion_over_2pi_hz",
                      "charge_curvature_rad_s"});
        if (f.contains("transfer_slope_over_2pi_hz_per_phi0"))
            cfg.flux_readout.transfer_slope =
                kTwoPi * f.at("transfer_slope_over_2pi_hz_per_phi0").get<double>();
        if (f.contains("highband_dispersion_over_2pi_hz"))
            cfg.flux_readout.highband_dispersion =
                kTwoPi * f.at("highband_dispersion_over_2pi_hz").get<double>();
        maybe(f, "charge_curvature_rad_s", cfg.flux_readout.charge_curvature);
    }

    if (j.contains("protocol")) {
        const json& p = j.at("protocol");
        require_keys(p, "protocol", {"kind", "duration_s"});
        if (p.contains("kind")) {
            const std::string k = p.at("kind").get<std::string>();
            if (k == "none")
                cfg.protocol.kind = ProtocolKind::None;
            else if (k == "fast")
                cfg.protocol.kind = ProtocolKind::Fast;
            else if (k == "scan-series")
                cfg.protocol.kind = ProtocolKind::ScanSeries;
            else
                throw std::runtime_error("config: unknown protocol kind '" + k + "'");
        }
        maybe(p, "duration_s", cfg.protocol.duration_s);
        if (cfg.protocol.duration_s < 0)
            throw std::runtime_error("config: protocol duration must be >= 0");
    }

    maybe(j, "env_dt_s", cfg.env_dt_s);
    if (cfg.env_dt_s <= 0) throw std::runtime_error("config: env_dt_s must be > 0");
    maybe(j, "seed", cfg.seed);
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string resolved_config_json(const RunConfig& cfg) {
    json j;
    j["preset"] = cfg.preset;
    j["device"] = {{"ej_over_h_ghz", cfg.device.ej_over_h_ghz},
                   {"ec_over_h_ghz", cfg.device.ec_over_h_ghz},
                   {"omega_bar_over_2pi_hz", cfg.device.omega_bar / kTwoPi},
                   {"dispersion_over_2pi_hz", cfg.device.dispersion / kTwoPi},
                   {"visibility_nu", cfg.device.visibility_nu},
                   {"decay_d", cfg.device.decay_d},
                   {"parity_rate_over_2pi_hz", cfg.device.parity_rate_gamma / kTwoPi},
                   {"shot_rate_hz", cfg.device.shot_rate_hz},
                   {"scan_period_s", cfg.device.scan_period_s},
                   {"recal_period_s", cfg.device.recal_period_s},
                   {"gate_duration_s", cfg.device.gate_duration_s},
                   {"scan_points", cfg.device.scan_points},
                   {"scan_shots_per_point", cfg.device.scan_shots_per_point}};
    j["noise"] = {{"power_law",
                   {{"amplitude_at_1hz", cfg.charge_noise.amplitude_at_1hz},
                    {"exponent", cfg.charge_noise.exponent},
                    {"f_min", cfg.charge_noise.f_min},
                    {"f_max", cfg.charge_noise.f_max}}},
                  {"telegraph", {{"gamma_over_2pi_hz", cfg.parity_noise.gamma / kTwoPi}}},
                  {"jumps",
                   {{"flux_per_cm2_s", cfg.jump_flux_per_cm2_s},
                    {"sensing_area_cm2", cfg.jump_sensing_area_cm2},
                    {"sampler_draws", cfg.jump_sampler_draws}}},
                  {"flux",
                   {{"amplitude_at_1hz", cfg.flux_noise.amplitude_at_1hz},
                    {"exponent", cfg.flux_noise.exponent},
                    {"correlation_c", cfg.flux_noise.correlation_c}}}};
    j["geometry"] = {{"island_w_um", cfg.geometry.island_w_um},
                     {"island_h_um", cfg.geometry.island_h_um},
                     {"gap_um", cfg.geometry.gap_um},
                     {"border_um", cfg.geometry.border_um},
                     {"pitch_um", cfg.geometry.pitch_um}};
    j["flux_readout"] = {
        {"transfer_slope_over_2pi_hz_per_phi0", cfg.flux_readout.transfer_slope / kTwoPi},
        {"highband_dispersion_over_2pi_hz", cfg.flux_readout.highband_dispersion / kTwoPi},
        {"charge_curvature_rad_s", cfg.flux_readout.charge_curvature}};
    const char* kind = cfg.protocol.kind == ProtocolKind::None
                           ? "none"
                           : cfg.protocol.kind == ProtocolKind::Fast ? "fast" : "scan-series";
    j["protocol"] = {{"kind", kind}, {"duration_s", cfg.protocol.duration_s}};
    j["env_dt_s"] = cfg.env_dt_s;
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir.string();
    return j.dump(2) + "\n";
}

void write_resolved_config(const RunConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << resolved_config_json(cfg);
}

uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(resolved_config_json(cfg)); }

void write_manifest(const RunConfig& cfg, const std::vector<std::string>& outputs,
                    const std::filesystem::path& path) {
    json j;
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    j["config_hash"] = std::string(hex);
    j["seed"] = cfg.seed;
    j["outputs"] = outputs;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace qcns
