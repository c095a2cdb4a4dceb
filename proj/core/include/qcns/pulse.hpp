#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qcns/device.hpp"
#include "qcns/noise.hpp"
#include "qcns/rng.hpp"

namespace qcns {

enum class GateKind : uint8_t { HalfX, HalfY, Idle, Measure };

struct Gate {
    GateKind kind;
    double idle_s = 0.0;  // used by Idle only
};

struct PulseSequence {
    std::vector<Gate> gates;
    double gate_duration_s = 40e-9;
    double bias_ng_ext = 0.0;  // 2e units

    void validate() const;  // exactly one Measure, last; idle durations >= 0
    size_t idle_count() const;
    double duration_s() const;

    static PulseSequence ramsey_scan(const DeviceParams& p, double bias_ng_ext);   // X/2 idle X/2
    static PulseSequence parity_probe(const DeviceParams& p, double bias_ng_ext);  // X/2 idle Y/2
    static PulseSequence charge_probe(const DeviceParams& p, double bias_ng_ext);  // X/2 idle Y/2
};

// Walks the gate list on the Bloch sphere from the ground state: half-pi
// rotations about x or y, z-rotations by the supplied per-idle phases, then
// the projective readout folded through (d, nu): P1 = (d - nu * z) / 2.
// idle_phases must have one entry per Idle gate.
double evolve_bloch(const DeviceParams& params, const PulseSequence& seq,
                    std::span<const double> idle_phases);

// Idle phase accumulated on one parity band: s * disp * t * cos(2 pi ng).
double band_phase(const DeviceParams& params, double idle_s, double ng_total_2e, int parity_sign);

// Single-point probability of the scan sequence, evaluated through
// evolve_bloch. Equals ramsey_population for either parity sign.
double scan_population(const DeviceParams& params, double ng_ext_2e, double delta_ng_2e,
                       int parity_sign);

enum class ShotKind : uint8_t { Parity = 0, Charge = 1, Flux = 2, ScanPoint = 3 };

struct ShotRecord {
    double t_s = 0.0;
    uint8_t outcome = 0;
    ShotKind kind = ShotKind::Charge;
    double bias_ng_ext = 0.0;  // 2e units
    int8_t parity_truth = 0;   // simulation ground truth, retained for validation
};

const char* shot_kind_name(ShotKind k);
void write_shots_csv(const std::filesystem::path& path, std::span<const ShotRecord> records);
std::vector<ShotRecord> read_shots_csv(const std::filesystem::path& path);

struct ScanResult {
    std::vector<double> ng_ext_2e;  // bias grid
    std::vector<double> p1;         // outcome means
    std::vector<int> shots;
    double t_start_s = 0.0;
    double span_s = 0.0;
};

// Ramsey charge tomography: sweeps n_points bias values over one 1e period,
// sampling shots_per_point single shots against the live environment.
ScanResult run_charge_scan(const EnvironmentTrace& env, const DeviceParams& params, double t_start,
                           int n_points, int shots_per_point, Rng& rng, double span_s = 0.0);
ScanResult run_charge_scan(const EnvironmentTrace& env, const DeviceParams& params, double t_start,
                           int n_points, int shots_per_point, uint64_t seed, double span_s = 0.0);

struct RecalEpoch {
    double t_s = 0.0;
    double delta_estimate_e = 0.0;  // offset-charge estimate used to re-center the bias
    bool fit_ok = true;
};

struct FastProtocolResult {
    std::vector<ShotRecord> records;
    std::vector<RecalEpoch> epochs;
    double cycle_period_s = 0.0;
    size_t n_cycles = 0;
};

// Two-step single-shot protocol at the device duty cycle: a parity shot
// (parity mapped to the poles) followed after the cavity dead time by a
// charge shot at the maximal-sensitivity bias. Every recal_period a short
// Ramsey scan re-centers the bias against accumulated jumps; those shots are
// recorded as ScanPoint records and the affected cycles carry no
// parity/charge shots.
FastProtocolResult run_fast_protocol(const EnvironmentTrace& env, const DeviceParams& params,
                                     double duration_s, uint64_t seed);

struct ConditionedSeries {
    std::vector<double> t_s;
    std::vector<double> value;  // parity-signed centered outcomes in {-1, +1}
    size_t dropped = 0;         // charge shots without a preceding parity shot
};

// Multiplies each centered charge outcome (2o - 1) by the parity sign
// inferred from the immediately preceding parity shot; expectation is odd
// and linear in delta n_g for small offsets.
ConditionedSeries condition_charge_on_parity(std::span<const ShotRecord> records);

// Small-signal transfer d<conditioned>/d(delta n_g in e) of the fast charge
// readout, nu^2 pi^2 at the default idle (one nu from the parity inference
// channel, one from the charge shot).
double charge_transfer_gain(const DeviceParams& params);

struct FastChargeSeries {
    double dt = 0.0;            // cycle period
    std::vector<double> value_e;  // recal offset + conditioned/g on the full cycle grid
    size_t filled = 0;            // recal-gap cycles carried forward
};

// Calibrated offset-charge series on the uniform cycle grid, in e. Recal
// gaps are carried forward sample-and-hold so spectral estimators see a
// uniform series.
FastChargeSeries assemble_fast_charge_series(const FastProtocolResult& run,
                                             const DeviceParams& params);

// Parity readout series (+1/-1 per cycle) on the same grid, gaps carried
// forward.
FastChargeSeries assemble_parity_series(const FastProtocolResult& run);

}  // namespace qcns
