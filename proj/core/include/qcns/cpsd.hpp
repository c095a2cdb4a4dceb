#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "qcns/device.hpp"
#include "qcns/noise.hpp"

namespace qcns {

// Flux readout operating point. The qubit is biased away from the flux
// sweet spot, so the charge dispersion there is larger and the flux idle
// correspondingly shorter. The flux shot couples linearly to flux through
// transfer_slope and quadratically to residual offset charge through
// charge_curvature (second-order sensitivity at the charge-insensitive
// point); the physical curvature of the cosine band is 2 pi^2 * dispersion.
struct FluxReadoutConfig {
    double transfer_slope = kTwoPi * 1e9;        // d(omega)/d(Phi), rad/s per Phi0
    double highband_dispersion = kTwoPi * 2e6;   // rad/s at the flux-sensitive point
    double charge_curvature = 0.0;               // rad/s per (2e unit)^2; 0 = physical default

    double idle_s() const { return M_PI / highband_dispersion; }
    double curvature() const {
        return charge_curvature > 0 ? charge_curvature
                                    : 2.0 * M_PI * M_PI * highband_dispersion;
    }
};

struct CpsdBandReport {
    std::vector<double> f_hz;
    std::vector<double> s_q;          // e^2/Hz
    std::vector<double> s_phi;        // Phi0^2/Hz
    std::vector<double> s_qphi_mag;   // |averaged CPSD|
    std::vector<double> normalized;   // |S_qphi| / sqrt(S_q S_phi)
    double floor_estimate = 0.0;      // 1/sqrt(n_averages)
    int n_averages = 0;

    double normalized_at(double f_hz) const;  // nearest bin in log-f
    double mean_normalized() const;
};

// Interleaved slow charge scans and fixed-idle / swept-phase Ramsey flux
// estimates. Each segment of points_per_spectrum estimates yields one
// cross-spectrum; n_spectra of them are averaged (default 250 spectra at a
// 5e-3 Hz spectrum rate). The flux estimate inverts the fitted Ramsey phase
// through the transfer slope.
CpsdBandReport run_low_bandwidth_cpsd(const EnvironmentTrace& env, const DeviceParams& params,
                                      const FluxReadoutConfig& flux, int n_spectra,
                                      double spectrum_rate_hz, uint64_t seed,
                                      int points_per_spectrum = 8);

// Three-shot cycle (flux, parity, charge) at the fast duty cycle with the
// usual 15 s recalibration. The flux shot sits at a charge-insensitive,
// flux-sensitive bias with the idle fixed so both parity bands map to the
// same state; residual offset charge enters through the quadratic channel
// and sets the uncorrelated floor. Covers roughly 0.2-100 Hz.
CpsdBandReport run_high_bandwidth_cpsd(const EnvironmentTrace& env, const DeviceParams& params,
                                       const FluxReadoutConfig& flux, double duration_s,
                                       uint64_t seed);

struct CpsdReport {
    CpsdBandReport low;
    CpsdBandReport high;

    void write_csv(const std::filesystem::path& path) const;  // f_hz,s_q,s_phi,s_qphi_mag,floor
};

// Upper bound on the charge-flux correlation at f: the measured normalized
// magnitude there, floored by the statistical 1/sqrt(N) level.
double correlation_bound(const CpsdReport& report, double f_hz);

}  // namespace qcns
