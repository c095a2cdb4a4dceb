#include "qcns/cpsd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qcns/csv.hpp"
#include "qcns/estimation.hpp"
#include "qcns/pulse.hpp"
#include "qcns/spectral.hpp"

namespace qcns {

double CpsdBandReport::normalized_at(double f) const {
    if (f_hz.empty()) throw std::runtime_error("CpsdBandReport: empty");
    size_t best = 0;
    double bestd = std::abs(std::log(f_hz[0] / f));
    for (size_t i = 1; i < f_hz.size(); ++i) {
        const double d = std::abs(std::log(f_hz[i] / f));
        if (d < bestd) {
            bestd = d;
            best = i;
        }
    }
    return normalized[best];
}

double CpsdBandReport::mean_normalized() const {
    if (normalized.empty()) return 0.0;
    double s = 0.0;
    for (double v : normalized) s += v;
    return s / static_cast<double>(normalized.size());
}

namespace {

constexpr int kFluxPhases = 16;
constexpr int kFluxShotsPerPhase = 125;

// Fixed-idle Ramsey with swept final-gate phase; the fitted phase divided by
// (slope * idle) estimates the flux deviation. The quadratic charge channel
// self-cancels here: the fit tracks the full fringe, so a common phase
// offset of either sign leaves the extracted flux untouched to first order.
double flux_ramsey_estimate(const EnvironmentTrace& env, const DeviceParams& params,
                            const FluxReadoutConfig& flux, double t_start, double block_s,
                            Rng& rng) {
    const double idle = flux.idle_s();
    double sc = 0.0, ss = 0.0;
    const double shot_slot = block_s / (kFluxPhases * kFluxShotsPerPhase);
    int shot_i = 0;
    for (int j = 0; j < kFluxPhases; ++j) {
        const double theta = kTwoPi * j / kFluxPhases;
        int ones = 0;
        for (int k = 0; k < kFluxShotsPerPhase; ++k, ++shot_i) {
            const double t = t_start + shot_slot * (shot_i + 0.5);
            const double phase = flux.transfer_slope * env.flux_at(t) * idle;
            const double p =
                0.5 * (params.decay_d + params.visibility_nu * std::cos(theta - phase));
            ones += rng.bernoulli(p) ? 1 : 0;
        }
        const double centered = 2.0 * ones / kFluxShotsPerPhase - params.decay_d;
        sc += centered * std::cos(theta);
        ss += centered * std::sin(theta);
    }
    const double phase_hat = std::atan2(ss, sc);
    return phase_hat / (flux.transfer_slope * idle);
}

CpsdBandReport report_from_cross(const CrossSpectra& cs) {
    CpsdBandReport rep;
    rep.f_hz = cs.ab.frequency_hz;
    rep.s_q = cs.a.value;
    rep.s_phi = cs.b.value;
    rep.normalized = cs.normalized_magnitude;
    rep.s_qphi_mag.resize(cs.ab.size());
    for (size_t i = 0; i < cs.ab.size(); ++i)
        rep.s_qphi_mag[i] = std::hypot(cs.ab.value[i], cs.ab.value_imag[i]);
    rep.n_averages = cs.ab.n_averages;
    rep.floor_estimate = 1.0 / std::sqrt(static_cast<double>(std::max(cs.ab.n_averages, 1)));
    return rep;
}

}  // namespace

CpsdBandReport run_low_bandwidth_cpsd(const EnvironmentTrace& env, const DeviceParams& params,
                                      const FluxReadoutConfig& flux, int n_spectra,
                                      double spectrum_rate_hz, uint64_t seed,
                                      int points_per_spectrum) {
    if (n_spectra < 2) throw std::invalid_argument("run_low_bandwidth_cpsd: need >= 2 spectra");
    if (spectrum_rate_hz <= 0)
        throw std::invalid_argument("run_low_bandwidth_cpsd: rate must be > 0");

    const double segment_s = 1.0 / spectrum_rate_hz;
    const double cadence = segment_s / points_per_spectrum;
    if (cadence < params.scan_period_s + 1.0)
        throw std::invalid_argument("run_low_bandwidth_cpsd: cadence too fast for the charge scan");
    const double flux_block = cadence - params.scan_period_s;

    const size_t n_points = static_cast<size_t>(n_spectra) * points_per_spectrum;
    if (cadence * static_cast<double>(n_points) > env.duration() + 0.5 * env.dt)
        throw std::invalid_argument("run_low_bandwidth_cpsd: environment too short");

    Rng rng_scan = substream(seed, "lb-scan");
    Rng rng_flux = substream(seed, "lb-flux");

    std::vector<double> q(n_points), phi(n_points);
    double prior = 0.0;
    for (size_t k = 0; k < n_points; ++k) {
        const double t0 = cadence * static_cast<double>(k);
        const ScanResult scan = run_charge_scan(env, params, t0, params.scan_points,
                                                params.scan_shots_per_point, rng_scan,
                                                params.scan_period_s);
        const ChargeFit fit = fit_charge_scan(scan, prior);
        if (fit.converged) prior = prior + alias_charge_delta(fit.delta_ng_e - prior);
        q[k] = prior;
        phi[k] = flux_ramsey_estimate(env, params, flux, t0 + params.scan_period_s, flux_block,
                                      rng_flux);
    }

    const CrossSpectra cs = cross_psd(q, phi, cadence, static_cast<size_t>(points_per_spectrum),
                                      Window::Rect, Detrend::Linear);
    return report_from_cross(cs);
}

CpsdBandReport run_high_bandwidth_cpsd(const EnvironmentTrace& env, const DeviceParams& params,
                                       const FluxReadoutConfig& flux, double duration_s,
                                       uint64_t seed) {
    params.validate();
    const double cycle = 1.0 / params.shot_rate_hz;
    if (duration_s > env.duration() + 0.5 * env.dt)
        throw std::invalid_argument("run_high_bandwidth_cpsd: environment too short");

    const size_t n_cycles = static_cast<size_t>(duration_s / cycle);
    Rng rng = substream(seed, "hb-shots");
    Rng rng_recal = substream(seed, "hb-recal");

    const double t_parity_idle = 0.5 * params.idle_time_s();
    const double t_charge_idle = params.idle_time_s();
    const double t_flux_idle = flux.idle_s();
    const double kappa2 = flux.curvature();
    const double g = charge_transfer_gain(params);
    const double flux_gain = params.visibility_nu * flux.transfer_slope * t_flux_idle;

    std::vector<double> q_series(n_cycles, 0.0), phi_series(n_cycles, 0.0);

    // recal bookkeeping mirrors run_fast_protocol
    constexpr int kRecalPoints = 25, kRecalShots = 40;
    const size_t recal_cycles = kRecalPoints * kRecalShots;
    double next_recal = 0.0, estimate = 0.0;
    double q_hold = 0.0, phi_hold = 0.0;
    size_t c = 0;
    while (c < n_cycles) {
        const double t0 = static_cast<double>(c) * cycle;
        if (t0 >= next_recal && c + recal_cycles <= n_cycles) {
            // quick scan, same budget as the fast protocol recal
            ScanResult scan;
            scan.ng_ext_2e.resize(kRecalPoints);
            scan.p1.resize(kRecalPoints);
            scan.shots.assign(kRecalPoints, kRecalShots);
            size_t ci = c;
            for (int i = 0; i < kRecalPoints; ++i) {
                scan.ng_ext_2e[i] = -0.25 + 0.5 * (i + 0.5) / kRecalPoints;
                int ones = 0;
                for (int j = 0; j < kRecalShots; ++j, ++ci) {
                    const double t = static_cast<double>(ci) * cycle;
                    const double p = ramsey_population(
                        params,
                        OffsetCharge::from_2e(scan.ng_ext_2e[i] + 0.5 * env.charge_at(t)));
                    ones += rng_recal.bernoulli(p) ? 1 : 0;
                }
                scan.p1[i] = static_cast<double>(ones) / kRecalShots;
            }
            const ChargeFit fit = fit_charge_scan(scan, estimate);
            if (fit.converged) estimate = estimate + alias_charge_delta(fit.delta_ng_e - estimate);
            for (size_t k = c; k < c + recal_cycles; ++k) {
                q_series[k] = q_hold;
                phi_series[k] = phi_hold;
            }
            c += recal_cycles;
            next_recal = t0 + params.recal_period_s;
            continue;
        }

        // flux shot at the charge-insensitive point (n_g ~ 0)
        {
            const double t = t0;
            const double res_2e = 0.5 * (env.charge_at(t) - estimate);
            const double eps = (flux.transfer_slope * env.flux_at(t) + kappa2 * res_2e * res_2e) *
                               t_flux_idle;
            // both parity bands land on the same state; deviation enters as -sin(eps)
            const double p = 0.5 * (params.decay_d - params.visibility_nu * std::sin(eps));
            const bool one = rng.bernoulli(p);
            phi_hold = -(2.0 * one - 1.0) / flux_gain;
        }
        // parity shot
        int shat;
        {
            const double t = t0 + cycle / 3.0;
            const int s = env.parity_at(t);
            const double ng = -0.5 * estimate + 0.5 * env.charge_at(t);
            const double phi_p = band_phase(params, t_parity_idle, ng, s);
            const double p = 0.5 * (params.decay_d + params.visibility_nu * std::sin(phi_p));
            shat = rng.bernoulli(p) ? 1 : -1;
        }
        // charge shot, conditioned on the parity outcome
        {
            const double t = t0 + 2.0 * cycle / 3.0;
            const int s = env.parity_at(t);
            const double ng = -0.25 - 0.5 * estimate + 0.5 * env.charge_at(t);
            const double phi_c = band_phase(params, t_charge_idle, ng, s);
            const double p = 0.5 * (params.decay_d + params.visibility_nu * std::sin(phi_c));
            const bool one = rng.bernoulli(p);
            q_hold = estimate + shat * (2.0 * one - 1.0) / g;
        }
        q_series[c] = q_hold;
        phi_series[c] = phi_hold;
        ++c;
    }

    const size_t seg = std::min<size_t>(1 << 16, n_cycles / 4);
    const CrossSpectra cs = cross_psd(q_series, phi_series, cycle, seg, Window::Hann,
                                      Detrend::Mean);
    CpsdBandReport rep = report_from_cross(cs);
    // restrict to the protocol band
    size_t lo = 0;
    while (lo < rep.f_hz.size() && rep.f_hz[lo] < 0.15) ++lo;
    size_t hi = rep.f_hz.size();
    while (hi > lo && rep.f_hz[hi - 1] > 100.0) --hi;
    auto crop = [&](std::vector<double>& v) {
        v = std::vector<double>(v.begin() + static_cast<long>(lo), v.begin() + static_cast<long>(hi));
    };
    crop(rep.f_hz);
    crop(rep.s_q);
    crop(rep.s_phi);
    crop(rep.s_qphi_mag);
    crop(rep.normalized);
    return rep;
}

void CpsdReport::write_csv(const std::filesystem::path& path) const {
    CsvWriter w(path);
    w.header({"f_hz", "s_q", "s_phi", "s_qphi_mag", "floor"});
    auto dump = [&](const CpsdBandReport& b) {
        for (size_t i = 0; i < b.f_hz.size(); ++i) {
            w.field(b.f_hz[i])
                .field(b.s_q[i])
                .field(b.s_phi[i])
                .field(b.s_qphi_mag[i])
                .field(b.floor_estimate);
            w.end_row();
        }
    };
    dump(low);
    dump(high);
}

double correlation_bound(const CpsdReport& report, double f_hz) {
    const CpsdBandReport* band = nullptr;
    if (!report.high.f_hz.empty() && f_hz >= report.high.f_hz.front())
        band = &report.high;
    else if (!report.low.f_hz.empty())
        band = &report.low;
    if (!band || band->f_hz.empty()) throw std::runtime_error("correlation_bound: empty report");
    return std::max(band->normalized_at(f_hz), band->floor_estimate);
}

}  // namespace qcns
