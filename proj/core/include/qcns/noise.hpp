#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "qcns/rng.hpp"

namespace qcns {

// 1/f^alpha charge noise, one-sided PSD S(f) = A / f^alpha (e^2/Hz at the
// reference 1 Hz). [f_min, f_max] is the band of validity: below f_min the
// synthesis holds the PSD flat at S(f_min).
struct PowerLawSpec {
    double amplitude_at_1hz = 0.0;  // A, units^2/Hz
    double exponent = 1.0;          // alpha in (0, 3)
    double f_min = 1e-7;
    double f_max = 1e5;

    void validate() const;
};

// Symmetric random telegraph process on {+1, -1} with autocorrelation
// exp(-gamma |tau|); the PSD knee (half-power point) is at f_c = gamma/2pi.
// Per-direction switching rate is gamma/2.
struct TelegraphSpec {
    double gamma = 0.0;  // rad/s

    void validate() const;
};

// Poisson impingement of discrete charges; each event draws a signed,
// aliased induced-charge value (in e) from size_sampler.
struct JumpProcessSpec {
    double flux_per_cm2_s = 0.0;
    double sensing_area_cm2 = 0.0;
    std::function<double(Rng&)> size_sampler;  // required when rate > 0

    double event_rate() const { return flux_per_cm2_s * sensing_area_cm2; }
    void validate() const;
};

// 1/f flux noise plus a correlation knob: a fraction c of the charge series
// is injected coherently (amplitude-matched at 1 Hz) to validate the CPSD
// estimator. flux = sqrt(1-c^2) * own + c * scaled(charge), so c = 1 makes
// the flux series a scaled copy of the charge series.
struct FluxNoiseSpec {
    double amplitude_at_1hz = 0.0;  // Phi0^2/Hz
    double exponent = 1.0;
    double correlation_c = 0.0;  // in [-1, 1]

    void validate() const;
};

struct JumpEvent {
    double t_s = 0.0;
    double size_e = 0.0;  // aliased to [-0.5, 0.5)
};

// Composite stochastic environment sampled on a uniform grid. Series share
// length and dt; regeneration with the same seed is bit-identical.
struct EnvironmentTrace {
    double dt = 0.0;
    std::vector<double> charge_e;   // power-law + jump staircase
    std::vector<int8_t> parity;     // +1 / -1
    std::vector<double> flux_phi0;
    uint64_t seed = 0;
    std::vector<JumpEvent> jump_events;

    size_t size() const { return charge_e.size(); }
    double duration() const { return dt * static_cast<double>(size()); }

    // Sample-and-hold lookup, clamped to the trace extent.
    size_t index_at(double t_s) const;
    double charge_at(double t_s) const { return charge_e[index_at(t_s)]; }
    int parity_at(double t_s) const { return parity[index_at(t_s)]; }
    double flux_at(double t_s) const { return flux_phi0[index_at(t_s)]; }

    void write_csv(const std::filesystem::path& path) const;  // time_s,charge_e,parity,flux_phi0
};

struct EnvironmentSpec {
    PowerLawSpec charge;
    TelegraphSpec parity;
    JumpProcessSpec jumps;
    FluxNoiseSpec flux;
};

// Gaussian series whose ensemble-mean one-sided periodogram is S(f) on
// (1/(n dt), 1/(2 dt)). Frequency-domain synthesis: independent complex
// Gaussian bins scaled to the target PSD, Hermitian-symmetrized, inverse
// transformed; the DC bin is zero so the output is zero-mean.
std::vector<double> synth_power_law(const PowerLawSpec& spec, size_t n, double dt, Rng& rng);

// Markov-chain telegraph sample; the per-step flip probability
// (1 - exp(-gamma dt))/2 reproduces the exponential autocorrelation exactly
// at the sample times. Warns on stderr once if dt undersamples the process.
std::vector<int8_t> synth_telegraph(const TelegraphSpec& spec, size_t n, double dt, Rng& rng);

struct JumpSeries {
    std::vector<double> cumulative_e;  // staircase at the sample grid
    std::vector<JumpEvent> events;
};

JumpSeries synth_jumps(const JumpProcessSpec& spec, size_t n, double dt, Rng& rng);

EnvironmentTrace compose_environment(const EnvironmentSpec& spec, double duration_s, double dt,
                                     uint64_t seed);

// Closed-form one-sided target PSDs for validation.
double analytic_psd(const PowerLawSpec& spec, double f_hz);
// Telegraph: 2 * (4*gamma_sw) / ((2*gamma_sw)^2 + (2*pi*f)^2) with
// gamma_sw = gamma/2, normalized so the one-sided integral equals the
// process variance (= 1). Verified against a brute-force periodogram.
double analytic_psd(const TelegraphSpec& spec, double f_hz);

}  // namespace qcns
