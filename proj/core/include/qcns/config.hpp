#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "qcns/cpsd.hpp"
#include "qcns/device.hpp"
#include "qcns/electrostatics.hpp"
#include "qcns/noise.hpp"

namespace qcns {

struct GeometryConfig {
    double island_w_um = 40.0;
    double island_h_um = 180.0;
    double gap_um = 20.0;
    double border_um = 4.0;
    double pitch_um = 1.0;

    GeometryGrid make_grid() const {
        return GeometryGrid::qubit_cavity(island_w_um, island_h_um, gap_um, border_um, pitch_um);
    }
};

enum class ProtocolKind { None, Fast, ScanSeries };

struct ProtocolConfig {
    ProtocolKind kind = ProtocolKind::Fast;
    double duration_s = 60.0;
};

// Fully resolved run description. Parsed from a JSON file whose schema is
// documented in the README; unknown keys are rejected.
struct RunConfig {
    std::string preset = "qubitA";  // qubitA | qubitB | custom
    DeviceParams device = DeviceParams::qubit_a();

    // noise model (jump size sampler is built from the geometry at run time)
    PowerLawSpec charge_noise{2.9e-4, 1.93, 1e-7, 1e5};
    TelegraphSpec parity_noise{kTwoPi * 255.0};
    double jump_flux_per_cm2_s = 17.0;
    double jump_sensing_area_cm2 = 1.0 / (250.0 * 17.0);
    FluxNoiseSpec flux_noise{4e-12, 1.0, 0.0};
    size_t jump_sampler_draws = 200000;

    GeometryConfig geometry;
    FluxReadoutConfig flux_readout;
    ProtocolConfig protocol;

    double env_dt_s = 1e-4;
    uint64_t seed = 1;
    std::filesystem::path out_dir = "out";

    // Builds the composite environment spec; solves the geometry once to
    // obtain the jump-size sampler.
    EnvironmentSpec make_environment_spec() const;

    static RunConfig preset_config(const std::string& name);
};

RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& json_text);

std::string resolved_config_json(const RunConfig& cfg);
void write_resolved_config(const RunConfig& cfg, const std::filesystem::path& path);

// FNV-1a hash of the canonical resolved-config serialization.
uint64_t config_hash(const RunConfig& cfg);

// manifest.json: seed, config hash, and the list of files the run produced.
void write_manifest(const RunConfig& cfg, const std::vector<std::string>& outputs,
                    const std::filesystem::path& path);

}  // namespace qcns
