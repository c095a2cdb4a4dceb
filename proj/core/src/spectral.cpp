#include "qcns/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "levmar.hpp"
#include "qcns/csv.hpp"
#include "qcns/device.hpp"
#include "qcns/fft.hpp"

namespace qcns {
namespace {

std::vector<double> make_window(Window w, size_t n) {
    std::vector<double> out(n, 1.0);
    if (w == Window::Hann) {
        for (size_t i = 0; i < n; ++i)
            out[i] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(i) /
                                           static_cast<double>(n - 1)));
    }
    return out;
}

void detrend_segment(std::span<double> seg, Detrend mode) {
    const size_t n = seg.size();
    double mean = 0.0;
    for (double v : seg) mean += v;
    mean /= static_cast<double>(n);
    if (mode == Detrend::Mean) {
        for (double& v : seg) v -= mean;
        return;
    }
    // least-squares line through the segment
    const double tc = 0.5 * static_cast<double>(n - 1);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dt = static_cast<double>(i) - tc;
        num += dt * (seg[i] - mean);
        den += dt * dt;
    }
    const double slope = den > 0 ? num / den : 0.0;
    for (size_t i = 0; i < n; ++i) seg[i] -= mean + slope * (static_cast<double>(i) - tc);
}

size_t auto_segment_len(size_t n, double overlap) {
    // largest power of two that still yields >= 8 averaged segments
    const double denom = 1.0 + 7.0 * (1.0 - overlap);
    size_t seg = 1;
    while (seg * 2 <= static_cast<size_t>(static_cast<double>(n) / denom)) seg *= 2;
    return std::max<size_t>(seg, 2);
}

const char* window_name(Window w) { return w == Window::Hann ? "hann" : "rect"; }

}  // namespace

double Spectrum::value_at(double f_hz) const {
    if (frequency_hz.empty()) throw std::runtime_error("Spectrum: empty");
    if (f_hz <= frequency_hz.front()) return value.front();
    if (f_hz >= frequency_hz.back()) return value.back();
    auto it = std::lower_bound(frequency_hz.begin(), frequency_hz.end(), f_hz);
    const size_t i1 = static_cast<size_t>(it - frequency_hz.begin());
    const size_t i0 = i1 - 1;
    const double lf = std::log(f_hz), l0 = std::log(frequency_hz[i0]),
                 l1 = std::log(frequency_hz[i1]);
    const double w = (lf - l0) / (l1 - l0);
    return value[i0] * (1.0 - w) + value[i1] * w;
}

Spectrum welch_psd(std::span<const double> series, double dt, WelchOptions opts) {
    if (dt <= 0) throw std::invalid_argument("welch_psd: dt must be > 0");
    size_t seg = opts.segment_len ? opts.segment_len : auto_segment_len(series.size(), opts.overlap);
    if (seg > series.size()) throw std::invalid_argument("welch_psd: segment longer than series");
    if (seg < 2) throw std::invalid_argument("welch_psd: segment too short");

    const size_t step = std::max<size_t>(1, static_cast<size_t>(
                                                static_cast<double>(seg) * (1.0 - opts.overlap)));
    const auto win = make_window(opts.window, seg);
    double wpow = 0.0;
    for (double w : win) wpow += w * w;
    wpow /= static_cast<double>(seg);

    const size_t nbins = seg / 2;
    std::vector<double> acc(nbins, 0.0);
    std::vector<double> buf(seg);
    int nseg = 0;
    for (size_t start = 0; start + seg <= series.size(); start += step) {
        std::copy_n(series.begin() + static_cast<long>(start), seg, buf.begin());
        detrend_segment(buf, opts.detrend);
        for (size_t i = 0; i < seg; ++i) buf[i] *= win[i];
        auto X = rfft(buf);
        for (size_t k = 1; k <= nbins; ++k) acc[k - 1] += std::norm(X[k]);
        ++nseg;
    }
    if (nseg == 0) throw std::invalid_argument("welch_psd: no full segment fits");

    Spectrum out;
    out.n_averages = nseg;
    out.sample_dt_s = dt;
    out.window = window_name(opts.window);
    out.frequency_hz.resize(nbins);
    out.value.resize(nbins);
    const double norm = 2.0 * dt / (static_cast<double>(seg) * wpow * static_cast<double>(nseg));
    for (size_t k = 1; k <= nbins; ++k) {
        out.frequency_hz[k - 1] = static_cast<double>(k) / (static_cast<double>(seg) * dt);
        out.value[k - 1] = acc[k - 1] * norm;
    }
    return out;
}

namespace {

// Shared worker for the two cross-spectrum estimators.
struct CrossAccum {
    std::vector<double> sa, sb;
    std::vector<std::complex<double>> sab;
    int nseg = 0;
    size_t seg;
    double wpow;
    std::vector<double> win;

    CrossAccum(size_t seg_len, Window w) : seg(seg_len), win(make_window(w, seg_len)) {
        sa.assign(seg / 2, 0.0);
        sb.assign(seg / 2, 0.0);
        sab.assign(seg / 2, {0.0, 0.0});
        wpow = 0.0;
        for (double v : win) wpow += v * v;
        wpow /= static_cast<double>(seg);
    }

    void add(std::span<const double> a, std::span<const double> b, Detrend detrend) {
        std::vector<double> ba(a.begin(), a.end()), bb(b.begin(), b.end());
        detrend_segment(ba, detrend);
        detrend_segment(bb, detrend);
        for (size_t i = 0; i < seg; ++i) {
            ba[i] *= win[i];
            bb[i] *= win[i];
        }
        auto Xa = rfft(ba);
        auto Xb = rfft(bb);
        for (size_t k = 1; k <= seg / 2; ++k) {
            sa[k - 1] += std::norm(Xa[k]);
            sb[k - 1] += std::norm(Xb[k]);
            sab[k - 1] += std::conj(Xa[k]) * Xb[k];
        }
        ++nseg;
    }
};

}  // namespace

Spectrum interleaved_cross_psd(std::span<const double> shots, double dt, WelchOptions opts) {
    if (shots.size() < 4) throw std::invalid_argument("interleaved_cross_psd: need >= 4 samples");
    const size_t m = shots.size() / 2;
    std::vector<double> even(m), odd(m);
    for (size_t i = 0; i < m; ++i) {
        even[i] = shots[2 * i];
        odd[i] = shots[2 * i + 1];
    }
    const double dt2 = 2.0 * dt;
    size_t seg = opts.segment_len ? opts.segment_len : auto_segment_len(m, opts.overlap);
    if (seg > m) throw std::invalid_argument("interleaved_cross_psd: segment longer than sub-series");
    const size_t step = std::max<size_t>(1, static_cast<size_t>(
                                                static_cast<double>(seg) * (1.0 - opts.overlap)));

    CrossAccum acc(seg, opts.window);
    for (size_t start = 0; start + seg <= m; start += step)
        acc.add(std::span(even).subspan(start, seg), std::span(odd).subspan(start, seg),
                opts.detrend);

    Spectrum out;
    out.n_averages = acc.nseg;
    out.sample_dt_s = dt2;
    out.stagger_dt_s = dt;
    out.window = window_name(opts.window);
    const size_t nbins = seg / 2;
    out.frequency_hz.resize(nbins);
    out.value.resize(nbins);
    out.value_imag.resize(nbins);
    const double norm =
        2.0 * dt2 / (static_cast<double>(seg) * acc.wpow * static_cast<double>(acc.nseg));
    for (size_t k = 1; k <= nbins; ++k) {
        const double f = static_cast<double>(k) / (static_cast<double>(seg) * dt2);
        // compensate the odd stream's half-sample delay before taking Re
        const std::complex<double> rot(std::cos(kTwoPi * f * dt), std::sin(kTwoPi * f * dt));
        const std::complex<double> v = acc.sab[k - 1] * rot * norm;
        out.frequency_hz[k - 1] = f;
        out.value[k - 1] = v.real();
        out.value_imag[k - 1] = v.imag();
    }
    return out;
}

CrossSpectra cross_psd(std::span<const double> a, std::span<const double> b, double dt,
                       size_t segment_len, Window window, Detrend detrend) {
    if (a.size() != b.size()) throw std::invalid_argument("cross_psd: length mismatch");
    if (segment_len < 4) throw std::invalid_argument("cross_psd: segment too short");
    if (segment_len > a.size()) throw std::invalid_argument("cross_psd: segment longer than series");

    CrossAccum acc(segment_len, window);
    for (size_t start = 0; start + segment_len <= a.size(); start += segment_len)
        acc.add(a.subspan(start, segment_len), b.subspan(start, segment_len), detrend);

    const size_t nbins = segment_len / 2;
    const double norm = 2.0 * dt /
                        (static_cast<double>(segment_len) * acc.wpow * static_cast<double>(acc.nseg));
    CrossSpectra out;
    auto init = [&](Spectrum& s, bool complex_valued) {
        s.n_averages = acc.nseg;
        s.sample_dt_s = dt;
        s.window = window_name(window);
        s.frequency_hz.resize(nbins);
        s.value.resize(nbins);
        if (complex_valued) s.value_imag.resize(nbins);
    };
    init(out.a, false);
    init(out.b, false);
    init(out.ab, true);
    out.normalized_magnitude.resize(nbins);
    for (size_t k = 1; k <= nbins; ++k) {
        const double f = static_cast<double>(k) / (static_cast<double>(segment_len) * dt);
        out.a.frequency_hz[k - 1] = out.b.frequency_hz[k - 1] = out.ab.frequency_hz[k - 1] = f;
        const double pa = acc.sa[k - 1] * norm;
        const double pb = acc.sb[k - 1] * norm;
        const std::complex<double> pab = acc.sab[k - 1] * norm;
        out.a.value[k - 1] = pa;
        out.b.value[k - 1] = pb;
        out.ab.value[k - 1] = pab.real();
        out.ab.value_imag[k - 1] = pab.imag();
        out.normalized_magnitude[k - 1] = std::abs(pab) / std::sqrt(std::max(pa * pb, 1e-300));
    }
    return out;
}

Spectrum log_bin(const Spectrum& spec, int bins_per_decade) {
    if (bins_per_decade < 1) throw std::invalid_argument("log_bin: bins_per_decade must be >= 1");
    Spectrum out;
    out.n_averages = spec.n_averages;
    out.sample_dt_s = spec.sample_dt_s;
    out.stagger_dt_s = spec.stagger_dt_s;
    out.window = spec.window;

    std::vector<std::pair<double, double>> pts;
    for (size_t i = 0; i < spec.size(); ++i)
        if (spec.value[i] > 0) pts.emplace_back(spec.frequency_hz[i], spec.value[i]);
    if (pts.empty()) return out;

    const double step = 1.0 / static_cast<double>(bins_per_decade);
    double edge = std::log10(pts.front().first);
    size_t i = 0;
    while (i < pts.size()) {
        const double hi = edge + step;
        double sum_logf = 0.0, sum_v = 0.0;
        int cnt = 0;
        while (i < pts.size() && std::log10(pts[i].first) < hi) {
            sum_logf += std::log(pts[i].first);
            sum_v += pts[i].second;
            ++cnt;
            ++i;
        }
        if (cnt > 0) {
            out.frequency_hz.push_back(std::exp(sum_logf / cnt));
            out.value.push_back(sum_v / cnt);
        }
        edge = hi;
    }
    return out;
}

double SpectrumFit::power_law_at(double f_hz) const {
    return amplitude_at_1hz * std::pow(f_hz, -alpha);
}

double SpectrumFit::lorentzian_at(double f_hz) const {
    const double x = f_hz / knee_hz;
    return lorentzian_level / (1.0 + x * x);
}

namespace {

struct BandView {
    std::vector<double> f, logp;
};

BandView band_view(const Spectrum& spec, double f_lo, double f_hi) {
    BandView v;
    for (size_t i = 0; i < spec.size(); ++i) {
        const double f = spec.frequency_hz[i];
        if (f < f_lo || f > f_hi) continue;
        if (spec.value[i] <= 0) continue;
        v.f.push_back(f);
        v.logp.push_back(std::log(spec.value[i]));
    }
    return v;
}

}  // namespace

SpectrumFit fit_power_law_plus_lorentzian(const Spectrum& spec, double f_lo, double f_hi) {
    BandView v = band_view(spec, f_lo, f_hi);
    SpectrumFit out;
    if (v.f.size() < 6) return out;

    const Eigen::Map<const Eigen::VectorXd> logp(v.logp.data(), static_cast<long>(v.logp.size()));
    auto resid = [&](const Eigen::VectorXd& th) {
        Eigen::VectorXd r(static_cast<long>(v.f.size()));
        const double a = std::exp(th[0]), alpha = th[1], l0 = std::exp(th[2]),
                     fc = std::exp(th[3]);
        for (size_t i = 0; i < v.f.size(); ++i) {
            const double x = v.f[i] / fc;
            const double model = a * std::pow(v.f[i], -alpha) + l0 / (1.0 + x * x);
            r[static_cast<long>(i)] = std::log(std::max(model, 1e-300)) - v.logp[i];
        }
        return r;
    };

    // anchor starting values to the data: power law at the low end,
    // Lorentzian level at the high end
    const double f_ref = v.f.front() * 3.0 < v.f.back() ? v.f.front() * 3.0 : v.f.front();
    double p_ref = std::exp(v.logp.front());
    for (size_t i = 0; i < v.f.size(); ++i)
        if (v.f[i] <= f_ref) p_ref = std::exp(v.logp[i]);
    const double tail = std::exp(v.logp.back());

    Eigen::VectorXd lo(4), hi(4);
    lo << -200.0, 0.0, -200.0, std::log(v.f.front() * 0.3);
    hi << 200.0, 3.0, 200.0, std::log(v.f.back() * 3.0);

    LevMarResult best;
    for (double alpha0 : {1.0, 1.5, 2.0, 2.5}) {
        Eigen::VectorXd x0(4);
        x0 << std::log(p_ref * std::pow(f_ref, alpha0)), alpha0, std::log(std::max(tail, 1e-250)),
            std::log(std::min(255.0, v.f.back()));
        auto r = levmar(resid, x0, lo, hi, 400);
        if (r.cost < best.cost) best = r;
    }
    if (!std::isfinite(best.cost)) return out;

    out.amplitude_at_1hz = std::exp(best.x[0]);
    out.alpha = best.x[1];
    out.lorentzian_level = std::exp(best.x[2]);
    out.knee_hz = std::exp(best.x[3]);
    out.converged = best.converged;
    const Eigen::MatrixXd cov = best.covariance();
    out.log_amplitude_stderr = std::sqrt(std::max(cov(0, 0), 0.0));
    out.alpha_stderr = std::sqrt(std::max(cov(1, 1), 0.0));
    return out;
}

SpectrumFit fit_power_law(const Spectrum& spec, double f_lo, double f_hi) {
    BandView v = band_view(spec, f_lo, f_hi);
    SpectrumFit out;
    if (v.f.size() < 3) return out;
    // weighted linear regression in log-log space
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(v.f.size());
    for (size_t i = 0; i < v.f.size(); ++i) {
        const double x = std::log(v.f[i]);
        sx += x;
        sy += v.logp[i];
        sxx += x * x;
        sxy += x * v.logp[i];
    }
    const double den = n * sxx - sx * sx;
    if (den <= 0) return out;
    const double slope = (n * sxy - sx * sy) / den;
    const double icpt = (sy - slope * sx) / n;
    out.alpha = -slope;
    out.amplitude_at_1hz = std::exp(icpt);
    double ssr = 0.0;
    for (size_t i = 0; i < v.f.size(); ++i) {
        const double e = v.logp[i] - (icpt + slope * std::log(v.f[i]));
        ssr += e * e;
    }
    const double s2 = ssr / std::max(n - 2.0, 1.0);
    out.alpha_stderr = std::sqrt(s2 * n / den);
    out.log_amplitude_stderr = std::sqrt(s2 * sxx / den);
    out.converged = true;
    return out;
}

LorentzianFit fit_lorentzian(const Spectrum& spec, double f_lo, double f_hi) {
    LorentzianFit out;
    if (spec.sample_dt_s <= 0)
        throw std::invalid_argument("fit_lorentzian: spectrum lacks sample_dt_s metadata");
    const double nyq = 0.5 / spec.sample_dt_s;
    const bool staggered = spec.stagger_dt_s > 0;
    if (f_lo <= 0) f_lo = spec.frequency_hz.front();
    if (f_hi <= 0) f_hi = staggered ? 0.24 * nyq : spec.frequency_hz.back();

    BandView v = band_view(spec, f_lo, f_hi);
    if (v.f.size() < 4) return out;

    const double dt = spec.sample_dt_s;
    auto resid = [&](const Eigen::VectorXd& th) {
        Eigen::VectorXd r(static_cast<long>(v.f.size()));
        const double lp = th[0], gamma = std::exp(th[1]);
        for (size_t i = 0; i < v.f.size(); ++i) {
            double shape;
            if (staggered) {
                const double x = kTwoPi * v.f[i] / gamma;
                shape = 1.0 / (1.0 + x * x);
            } else {
                // discrete spectrum of an exponentially correlated sampled
                // process, normalized to 1 at f = 0
                const double rr = std::exp(-gamma * dt);
                const double th_ = kTwoPi * v.f[i] * dt;
                shape = (1.0 - rr) * (1.0 - rr) / (1.0 - 2.0 * rr * std::cos(th_) + rr * rr);
            }
            r[static_cast<long>(i)] = lp + std::log(std::max(shape, 1e-300)) - v.logp[i];
        }
        return r;
    };

    Eigen::VectorXd lo(2), hi(2);
    lo << -200.0, std::log(kTwoPi * v.f.front() * 0.05);
    hi << 200.0, std::log(kTwoPi / dt * 4.0);
    LevMarResult best;
    for (double fc0 : {v.f.front() * 3.0, std::sqrt(v.f.front() * v.f.back()), v.f.back() / 3.0}) {
        Eigen::VectorXd x0(2);
        x0 << v.logp.front(), std::log(kTwoPi * fc0);
        auto r = levmar(resid, x0, lo, hi, 300);
        if (r.cost < best.cost) best = r;
    }
    if (!std::isfinite(best.cost)) return out;

    const double gamma = std::exp(best.x[1]);
    out.level = std::exp(best.x[0]);
    out.knee_hz = gamma / kTwoPi;

    // flat-spectrum rejection: the knee must sit inside the usable band and
    // the Lorentzian must beat a constant-level fit decisively
    double mean_logp = 0.0;
    for (double lp : v.logp) mean_logp += lp;
    mean_logp /= static_cast<double>(v.logp.size());
    double flat_cost = 0.0;
    for (double lp : v.logp) flat_cost += (lp - mean_logp) * (lp - mean_logp);
    const double knee_cap = staggered ? f_hi : 0.63 * nyq;  // gamma*dt < 2 for the sampled form
    out.knee_identifiable =
        best.converged && out.knee_hz < knee_cap && out.knee_hz > v.f.front() && best.cost < 0.8 * flat_cost;
    return out;
}

StitchResult stitch_spectra(const Spectrum& low, const Spectrum& high) {
    if (low.size() == 0 || high.size() == 0)
        throw std::invalid_argument("stitch_spectra: empty band");
    StitchResult out;
    const double crossover = low.frequency_hz.back();

    // consistency over the shared region [crossover/3, crossover]
    double worst = 1.0;
    for (size_t i = 0; i < high.size(); ++i) {
        const double f = high.frequency_hz[i];
        if (f < crossover / 3.0 || f > crossover) continue;
        if (high.value[i] <= 0) continue;
        const double lo_v = low.value_at(f);
        if (lo_v <= 0) continue;
        const double ratio = high.value[i] / lo_v;
        const double dev = ratio > 1.0 ? ratio : 1.0 / ratio;
        if (dev > worst) worst = dev;
    }
    out.worst_overlap_ratio = worst;
    out.bands_consistent = worst <= 3.0;

    Spectrum s;
    s.n_averages = std::min(low.n_averages, high.n_averages);
    s.sample_dt_s = high.sample_dt_s;
    s.stagger_dt_s = high.stagger_dt_s;
    s.window = low.window;
    s.frequency_hz = low.frequency_hz;
    s.value = low.value;
    for (size_t i = 0; i < high.size(); ++i) {
        if (high.frequency_hz[i] <= crossover) continue;
        s.frequency_hz.push_back(high.frequency_hz[i]);
        s.value.push_back(high.value[i]);
    }
    out.spectrum = std::move(s);
    return out;
}

void write_spectrum_csv(const Spectrum& spec, const std::filesystem::path& path) {
    CsvWriter w(path);
    if (spec.is_complex()) {
        w.header({"f_hz", "value", "value_imag", "n_avg"});
        for (size_t i = 0; i < spec.size(); ++i) {
            w.field(spec.frequency_hz[i])
                .field(spec.value[i])
                .field(spec.value_imag[i])
                .field(static_cast<long long>(spec.n_averages));
            w.end_row();
        }
    } else {
        w.header({"f_hz", "value", "n_avg"});
        for (size_t i = 0; i < spec.size(); ++i) {
            w.field(spec.frequency_hz[i])
                .field(spec.value[i])
                .field(static_cast<long long>(spec.n_averages));
            w.end_row();
        }
    }
}

}  // namespace qcns
