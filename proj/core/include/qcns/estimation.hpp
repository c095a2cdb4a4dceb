#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "qcns/device.hpp"
#include "qcns/pulse.hpp"
#include "qcns/spectral.hpp"

namespace qcns {

struct ChargeFit {
    double delta_ng_e = 0.0;  // aliased to [-0.5, 0.5) e
    double sigma_e = 0.0;     // standard error from curvature x residual variance
    double d_hat = 0.0;
    double nu_hat = 0.0;
    double residual_norm = 0.0;
    bool converged = false;
};

// Nonlinear least squares of the scan response in (delta, d, nu), nu >= 0,
// multi-started over 8 phase offsets. The returned delta takes the branch
// nearest the prior before aliasing. Degenerate fits (nu -> 0) are flagged.
ChargeFit fit_charge_scan(const ScanResult& scan, std::optional<double> prior_delta_e = {});

struct ChargeTrace {
    std::vector<double> t_s;
    std::vector<double> value_e;  // aliased increments, accumulated
    std::vector<double> sigma_e;
    size_t gaps = 0;  // failed fits skipped during assembly

    void write_csv(const std::filesystem::path& path) const;  // t_s,dng_e,sigma_e
};

// Accumulates aliased scan-to-scan increments; failed fits leave gaps.
ChargeTrace build_trace(std::span<const ChargeFit> fits, double t0_s, double period_s);

struct JumpCatalog {
    std::vector<double> t_s;
    std::vector<double> size_e;  // aliased
    double threshold_e = 0.1;

    double mean_interval_s() const;  // mean spacing between consecutive jumps
    void write_csv(const std::filesystem::path& path) const;  // t_s,size_e
};

// Consecutive trace increments with |delta| >= threshold become jump events.
// The default threshold 0.1e is five times the 0.02e fit width.
JumpCatalog detect_jumps(const ChargeTrace& trace, double threshold_e = 0.1);

// Difference frequency delta_f = (disp/2pi) |cos(2 pi n_g)| per sample (Hz).
std::vector<double> to_frequency_noise(std::span<const double> value_e, const DeviceParams& params);

// Inverts delta_f on the principal arccos branch, confining every sample to
// [0, 0.5] e; this reproduces the per-sample aliasing of single-bias-point
// frequency tracking.
std::vector<double> realias_to_half_e(std::span<const double> freq_hz, const DeviceParams& params);

enum class DispersionScaling { Quadratic, Linear };

// Rescales an externally measured frequency-noise spectrum to a different
// charge dispersion. Power scales quadratically with dispersion, which
// reproduces the published comparison factors; the linear convention is
// provided as an alternative.
Spectrum normalize_external_spectrum(const Spectrum& spec, double source_dispersion_hz,
                                     double target_dispersion_hz,
                                     DispersionScaling scaling = DispersionScaling::Quadratic);

}  // namespace qcns
