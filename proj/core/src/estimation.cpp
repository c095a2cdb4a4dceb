#include "qcns/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "levmar.hpp"
#include "qcns/csv.hpp"

namespace qcns {

namespace {

double scan_model(double ng_ext_2e, double delta_2e, double d, double nu) {
    return 0.5 * (d + nu * std::cos(M_PI * std::cos(kTwoPi * (ng_ext_2e + delta_2e))));
}

}  // namespace

ChargeFit fit_charge_scan(const ScanResult& scan, std::optional<double> prior_delta_e) {
    const size_t m = scan.ng_ext_2e.size();
    if (m < 8) throw std::invalid_argument("fit_charge_scan: need at least 8 grid points");
    const double span = *std::max_element(scan.ng_ext_2e.begin(), scan.ng_ext_2e.end()) -
                        *std::min_element(scan.ng_ext_2e.begin(), scan.ng_ext_2e.end());
    if (span < 0.45)  // one full 1e period is 0.5 in 2e units
        throw std::invalid_argument("fit_charge_scan: grid must span a full 1e period");

    auto resid = [&](const Eigen::VectorXd& th) {
        Eigen::VectorXd r(static_cast<long>(m));
        for (size_t i = 0; i < m; ++i)
            r[static_cast<long>(i)] = scan_model(scan.ng_ext_2e[i], th[0], th[1], th[2]) - scan.p1[i];
        return r;
    };

    const auto [pmin, pmax] = std::minmax_element(scan.p1.begin(), scan.p1.end());
    const double d0 = std::clamp(*pmin + *pmax, 0.05, 1.95);
    const double nu0 = std::clamp(*pmax - *pmin, 0.02, 1.0);

    Eigen::VectorXd lo(3), hi(3);
    lo << -1.0, 0.01, 0.0;
    hi << 1.0, 1.99, 1.0;

    LevMarResult best;
    constexpr double kPeriod2e = 0.5;  // the model is periodic in delta with 0.5 (= 1e)
    for (int k = 0; k < 8; ++k) {
        Eigen::VectorXd x0(3);
        x0 << -kPeriod2e / 2 + kPeriod2e * k / 8.0, d0, nu0;
        auto r = levmar(resid, x0, lo, hi, 250);
        if (r.cost < best.cost) best = r;
    }

    ChargeFit fit;
    if (!std::isfinite(best.cost)) return fit;
    fit.d_hat = best.x[1];
    fit.nu_hat = best.x[2];
    fit.residual_norm = std::sqrt(best.cost);
    const Eigen::MatrixXd cov = best.covariance();
    fit.sigma_e = 2.0 * std::sqrt(std::max(cov(0, 0), 0.0));  // 2e -> e
    fit.converged = best.converged && fit.nu_hat > 0.02 && fit.sigma_e > 0;

    double delta_e = 2.0 * best.x[0];
    if (prior_delta_e) {
        delta_e = *prior_delta_e + alias_charge_delta(delta_e - *prior_delta_e);
    }
    fit.delta_ng_e = alias_charge_delta(delta_e);
    return fit;
}

void ChargeTrace::write_csv(const std::filesystem::path& path) const {
    CsvWriter w(path);
    w.header({"t_s", "dng_e", "sigma_e"});
    for (size_t i = 0; i < t_s.size(); ++i) {
        w.field(t_s[i]).field(value_e[i]).field(sigma_e[i]);
        w.end_row();
    }
}

ChargeTrace build_trace(std::span<const ChargeFit> fits, double t0_s, double period_s) {
    ChargeTrace trace;
    bool have_first = false;
    double acc = 0.0, prev = 0.0;
    for (size_t i = 0; i < fits.size(); ++i) {
        const auto& f = fits[i];
        if (!f.converged) {
            ++trace.gaps;
            continue;
        }
        if (!have_first) {
            acc = f.delta_ng_e;  // the anchor is arbitrary, only changes are physical
            have_first = true;
        } else {
            acc += alias_charge_delta(f.delta_ng_e - prev);
        }
        prev = f.delta_ng_e;
        trace.t_s.push_back(t0_s + period_s * (static_cast<double>(i) + 0.5));
        trace.value_e.push_back(acc);
        trace.sigma_e.push_back(f.sigma_e);
    }
    return trace;
}

double JumpCatalog::mean_interval_s() const {
    if (t_s.size() < 2) return 0.0;
    return (t_s.back() - t_s.front()) / static_cast<double>(t_s.size() - 1);
}

void JumpCatalog::write_csv(const std::filesystem::path& path) const {
    CsvWriter w(path);
    w.header({"t_s", "size_e"});
    for (size_t i = 0; i < t_s.size(); ++i) {
        w.field(t_s[i]).field(size_e[i]);
        w.end_row();
    }
}

JumpCatalog detect_jumps(const ChargeTrace& trace, double threshold_e) {
    JumpCatalog cat;
    cat.threshold_e = threshold_e;
    for (size_t i = 1; i < trace.value_e.size(); ++i) {
        const double inc = alias_charge_delta(trace.value_e[i] - trace.value_e[i - 1]);
        if (std::abs(inc) >= threshold_e) {
            cat.t_s.push_back(trace.t_s[i]);
            cat.size_e.push_back(inc);
        }
    }
    return cat;
}

std::vector<double> to_frequency_noise(std::span<const double> value_e,
                                       const DeviceParams& params) {
    const double disp_hz = params.dispersion / kTwoPi;
    std::vector<double> out(value_e.size());
    for (size_t i = 0; i < value_e.size(); ++i)
        out[i] = disp_hz * std::abs(std::cos(M_PI * value_e[i]));
    return out;
}

std::vector<double> realias_to_half_e(std::span<const double> freq_hz,
                                      const DeviceParams& params) {
    const double disp_hz = params.dispersion / kTwoPi;
    std::vector<double> out(freq_hz.size());
    for (size_t i = 0; i < freq_hz.size(); ++i) {
        const double u = std::clamp(freq_hz[i] / disp_hz, 0.0, 1.0);
        out[i] = std::acos(u) / M_PI;  // principal branch, [0, 0.5] e
    }
    return out;
}

Spectrum normalize_external_spectrum(const Spectrum& spec, double source_dispersion_hz,
                                     double target_dispersion_hz, DispersionScaling scaling) {
    if (source_dispersion_hz <= 0 || target_dispersion_hz <= 0)
        throw std::invalid_argument("normalize_external_spectrum: dispersion must be > 0");
    const double r = target_dispersion_hz / source_dispersion_hz;
    const double factor = scaling == DispersionScaling::Quadratic ? r * r : r;
    Spectrum out = spec;
    for (auto& v : out.value) v *= factor;
    for (auto& v : out.value_imag) v *= factor;
    return out;
}

}  // namespace qcns
