#include "qcns/noise.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>

#include "qcns/csv.hpp"
#include "qcns/device.hpp"
#include "qcns/fft.hpp"

namespace qcns {

void PowerLawSpec::validate() const {
    if (amplitude_at_1hz <= 0) throw std::invalid_argument("PowerLawSpec: amplitude must be > 0");
    if (!(exponent > 0 && exponent < 3))
        throw std::invalid_argument("PowerLawSpec: exponent must be in (0, 3)");
    if (!(f_min < f_max)) throw std::invalid_argument("PowerLawSpec: need f_min < f_max");
}

void TelegraphSpec::validate() const {
    if (gamma < 0) throw std::invalid_argument("TelegraphSpec: gamma must be >= 0");
}

void JumpProcessSpec::validate() const {
    if (flux_per_cm2_s < 0) throw std::invalid_argument("JumpProcessSpec: flux must be >= 0");
    if (sensing_area_cm2 < 0) throw std::invalid_argument("JumpProcessSpec: area must be >= 0");
    if (event_rate() > 0 && !size_sampler)
        throw std::invalid_argument("JumpProcessSpec: size_sampler required");
}

void FluxNoiseSpec::validate() const {
    if (amplitude_at_1hz < 0) throw std::invalid_argument("FluxNoiseSpec: amplitude must be >= 0");
    if (std::abs(correlation_c) > 1)
        throw std::invalid_argument("FluxNoiseSpec: |correlation| must be <= 1");
}

size_t EnvironmentTrace::index_at(double t_s) const {
    if (charge_e.empty()) throw std::out_of_range("EnvironmentTrace: empty trace");
    double idx = std::floor(t_s / dt);
    if (idx < 0) idx = 0;
    const double last = static_cast<double>(size() - 1);
    if (idx > last) idx = last;
    return static_cast<size_t>(idx);
}

void EnvironmentTrace::write_csv(const std::filesystem::path& path) const {
    CsvWriter w(path);
    w.header({"time_s", "charge_e", "parity", "flux_phi0"});
    for (size_t i = 0; i < size(); ++i) {
        w.field(dt * static_cast<double>(i))
            .field(charge_e[i])
            .field(static_cast<long long>(parity[i]))
            .field(flux_phi0[i]);
        w.end_row();
    }
}

std::vector<double> synth_power_law(const PowerLawSpec& spec, size_t n, double dt, Rng& rng) {
    spec.validate();
    if (n < 2) throw std::invalid_argument("synth_power_law: n must be >= 2");
    if (dt <= 0) throw std::invalid_argument("synth_power_law: dt must be > 0");

    const size_t nbins = n / 2 + 1;
    std::vector<std::complex<double>> spectrum(nbins, {0.0, 0.0});
    const double df = 1.0 / (static_cast<double>(n) * dt);
    // E|X_k|^2 = n * S(f_k) / (2 dt) gives a periodogram that matches the
    // one-sided target.
    for (size_t k = 1; k < nbins; ++k) {
        double f = df * static_cast<double>(k);
        f = std::clamp(f, spec.f_min, spec.f_max);
        const double target = spec.amplitude_at_1hz * std::pow(f, -spec.exponent);
        const double mag = std::sqrt(static_cast<double>(n) * target / (2.0 * dt));
        const bool nyquist = (n % 2 == 0) && (k == n / 2);
        if (nyquist) {
            spectrum[k] = {mag * rng.gaussian(), 0.0};
        } else {
            spectrum[k] = {mag * rng.gaussian() * M_SQRT1_2, mag * rng.gaussian() * M_SQRT1_2};
        }
    }
    return irfft(spectrum, n);
}

std::vector<int8_t> synth_telegraph(const TelegraphSpec& spec, size_t n, double dt, Rng& rng) {
    spec.validate();
    if (dt * spec.gamma / kTwoPi >= 0.5) {
        static bool warned = false;
        if (!warned) {
            std::fprintf(stderr,
                         "qcns: warning: telegraph knee %.3g Hz at or above Nyquist for dt=%.3g s\n",
                         spec.gamma / kTwoPi, dt);
            warned = true;
        }
    }
    std::vector<int8_t> s(n);
    int8_t state = rng.bernoulli(0.5) ? 1 : -1;  // stationary start, 1/2 each
    const double p_flip = 0.5 * (1.0 - std::exp(-spec.gamma * dt));
    for (size_t i = 0; i < n; ++i) {
        s[i] = state;
        if (rng.bernoulli(p_flip)) state = -state;
    }
    return s;
}

JumpSeries synth_jumps(const JumpProcessSpec& spec, size_t n, double dt, Rng& rng) {
    spec.validate();
    JumpSeries out;
    out.cumulative_e.assign(n, 0.0);
    const double rate = spec.event_rate();
    if (rate <= 0 || n == 0) return out;

    const double duration = static_cast<double>(n) * dt;
    double t = rng.exponential(rate);
    std::vector<double> step(n, 0.0);
    while (t < duration) {
        double size = spec.size_sampler(rng);
        // polarity is symmetric regardless of the sampler's convention
        if (rng.bernoulli(0.5)) size = -size;
        size = alias_charge_delta(size);
        out.events.push_back({t, size});
        step[static_cast<size_t>(t / dt)] += size;
        t += rng.exponential(rate);
    }
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        acc += step[i];
        out.cumulative_e[i] = acc;
    }
    return out;
}

EnvironmentTrace compose_environment(const EnvironmentSpec& spec, double duration_s, double dt,
                                     uint64_t seed) {
    if (dt <= 0) throw std::invalid_argument("compose_environment: dt must be > 0");
    const double n_real = std::ceil(duration_s / dt);
    if (n_real > 1e9) throw std::invalid_argument("compose_environment: duration/dt too large");
    const size_t n = std::max<size_t>(2, static_cast<size_t>(n_real));

    EnvironmentTrace env;
    env.dt = dt;
    env.seed = seed;

    // Independent fixed-assignment substreams; adding a generator never
    // perturbs the others.
    Rng rng_pl = substream(seed, "powerlaw");
    Rng rng_tel = substream(seed, "telegraph");
    Rng rng_jump = substream(seed, "jumps");
    Rng rng_flux = substream(seed, "flux");

    if (spec.charge.amplitude_at_1hz > 0) {
        env.charge_e = synth_power_law(spec.charge, n, dt, rng_pl);
    } else {
        env.charge_e.assign(n, 0.0);
    }

    if (spec.jumps.event_rate() > 0) {
        JumpSeries jumps = synth_jumps(spec.jumps, n, dt, rng_jump);
        for (size_t i = 0; i < n; ++i) env.charge_e[i] += jumps.cumulative_e[i];
        env.jump_events = std::move(jumps.events);
    }

    if (spec.parity.gamma > 0) {
        env.parity = synth_telegraph(spec.parity, n, dt, rng_tel);
    } else {
        env.parity.assign(n, rng_tel.bernoulli(0.5) ? 1 : -1);
    }

    spec.flux.validate();
    if (spec.flux.amplitude_at_1hz > 0) {
        PowerLawSpec own{spec.flux.amplitude_at_1hz, spec.flux.exponent, 1e-7, 1e5};
        env.flux_phi0 = synth_power_law(own, n, dt, rng_flux);
    } else {
        env.flux_phi0.assign(n, 0.0);
    }
    const double c = spec.flux.correlation_c;
    if (c != 0.0) {
        if (spec.charge.amplitude_at_1hz <= 0)
            throw std::invalid_argument("compose_environment: correlation needs charge noise");
        // Coherent mixing that preserves the flux PSD at 1 Hz: c = 1 makes
        // the flux series an exactly scaled copy of the charge series.
        const double ratio =
            std::sqrt(spec.flux.amplitude_at_1hz / spec.charge.amplitude_at_1hz);
        const double own_frac = std::sqrt(1.0 - c * c);
        for (size_t i = 0; i < n; ++i)
            env.flux_phi0[i] = own_frac * env.flux_phi0[i] + c * ratio * env.charge_e[i];
    }
    return env;
}

double analytic_psd(const PowerLawSpec& spec, double f_hz) {
    return spec.amplitude_at_1hz * std::pow(f_hz, -spec.exponent);
}

double analytic_psd(const TelegraphSpec& spec, double f_hz) {
    const double gamma_sw = 0.5 * spec.gamma;
    const double w = kTwoPi * f_hz;
    // One-sided, integral over f in (0, inf) equals the variance (= 1).
    return 2.0 * 4.0 * gamma_sw / (4.0 * gamma_sw * gamma_sw + w * w);
}

}  // namespace qcns
