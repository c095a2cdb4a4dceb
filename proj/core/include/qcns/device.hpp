#pragma once

#include <cmath>
#include <string>

namespace qcns {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Offset charge on the qubit island. Stored in units of 2e, the
// normalization in which the qubit spectrum is
// omega_bar + disp * cos(2*pi*ng). User-facing values (traces, histograms,
// spectra) are in units of e: value_e = 2 * ng.
struct OffsetCharge {
    double ng = 0.0;  // 2e units

    static OffsetCharge from_2e(double v) { return {v}; }
    static OffsetCharge from_e(double v) { return {0.5 * v}; }
    double value_2e() const { return ng; }
    double value_e() const { return 2.0 * ng; }
};

// Quasiparticle parity of the island. A flip swaps the spectral band,
// equivalent to shifting the offset charge by 0.5e.
struct ParityState {
    int sign = +1;  // +1 or -1

    ParityState flipped() const { return {-sign}; }
};

// Static device constants. Angular quantities are in rad/s.
struct DeviceParams {
    double ej_over_h_ghz = 0.0;
    double ec_over_h_ghz = 0.0;
    double omega_bar = 0.0;           // charge-averaged qubit frequency
    double dispersion = 0.0;          // full cosine amplitude of the charge band
    double visibility_nu = 1.0;       // nu in (0, 1]
    double decay_d = 1.0;             // d in (0, 2), accounts for decay during readout
    double parity_rate_gamma = 0.0;   // Gamma, autocorrelation exp(-Gamma |tau|)
    double shot_rate_hz = 1e4;        // fast-protocol duty cycle
    double scan_period_s = 20.0;      // slow-scan cadence
    double recal_period_s = 15.0;     // fast-protocol recalibration interval
    double gate_duration_s = 40e-9;
    int scan_points = 25;             // bias points per charge scan
    int scan_shots_per_point = 320;

    double ratio_ej_ec() const { return ej_over_h_ghz / ec_over_h_ghz; }

    // Idle that accumulates a full +-pi of band phase, the scan operating
    // point.
    double idle_time_s() const { return M_PI / dispersion; }

    void validate() const;

    static DeviceParams qubit_a();
    static DeviceParams qubit_b();
    static DeviceParams preset(const std::string& name);  // throws on unknown name
};

// Qubit transition frequency (rad/s): omega_bar + s * disp * cos(2*pi*ng).
// The parity sign on the dispersion term implements the band flip; it is
// algebraically identical to shifting ng by 0.25 (2e units).
inline double transition_frequency(const DeviceParams& p, OffsetCharge ng, ParityState parity) {
    return p.omega_bar + parity.sign * p.dispersion * std::cos(kTwoPi * ng.ng);
}

// Excited-state probability of the charge-scan Ramsey sequence,
// P1 = (d + nu * cos(pi * cos(2*pi*ng))) / 2, identical for both parity
// states because the idle phase enters through an even function.
inline double ramsey_population(const DeviceParams& p, OffsetCharge ng_total) {
    return 0.5 * (p.decay_d + p.visibility_nu * std::cos(M_PI * std::cos(kTwoPi * ng_total.ng)));
}

// Wrap a charge difference (in e) into [-0.5, 0.5); the half-integer
// boundary maps to -0.5.
inline double alias_charge_delta(double delta_e) {
    return delta_e - std::floor(delta_e + 0.5);
}

}  // namespace qcns
