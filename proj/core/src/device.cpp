#include "qcns/device.hpp"

#include <stdexcept>

namespace qcns {

void DeviceParams::validate() const {
    if (dispersion <= 0) throw std::invalid_argument("DeviceParams: dispersion must be > 0");
    if (!(visibility_nu > 0 && visibility_nu <= 1))
        throw std::invalid_argument("DeviceParams: visibility nu must be in (0, 1]");
    if (!(decay_d > 0 && decay_d < 2))
        throw std::invalid_argument("DeviceParams: decay d must be in (0, 2)");
    // P1 = (d +- nu)/2 must stay inside [0, 1] for every bias.
    if (visibility_nu > decay_d || visibility_nu > 2 - decay_d)
        throw std::invalid_argument("DeviceParams: nu must not exceed min(d, 2-d)");
    if (parity_rate_gamma < 0) throw std::invalid_argument("DeviceParams: negative parity rate");
    if (shot_rate_hz <= 0 || scan_period_s <= 0 || recal_period_s <= 0)
        throw std::invalid_argument("DeviceParams: rates and periods must be positive");
    if (scan_points < 8)
        throw std::invalid_argument("DeviceParams: need at least 8 scan points");
    if (scan_shots_per_point < 1)
        throw std::invalid_argument("DeviceParams: need at least 1 shot per point");
}

DeviceParams DeviceParams::qubit_a() {
    DeviceParams p;
    p.ej_over_h_ghz = 10.8;
    p.ec_over_h_ghz = 0.39;                 // EJ/EC = 27.7
    p.omega_bar = kTwoPi * 5.38e9;
    p.dispersion = kTwoPi * 600e3;
    p.visibility_nu = 0.30;
    p.decay_d = 0.80;
    p.parity_rate_gamma = kTwoPi * 255.0;
    p.shot_rate_hz = 10e3;
    p.scan_period_s = 20.0;
    p.recal_period_s = 15.0;
    p.scan_points = 25;
    p.scan_shots_per_point = 320;
    return p;
}

DeviceParams DeviceParams::qubit_b() {
    // Nominally identical device with EJ reduced to 9.9 GHz; the smaller
    // EJ/EC roughly doubles the charge dispersion and the shorter idle
    // improves visibility. 30 s measurement cycle, 0.01e fit width.
    DeviceParams p = qubit_a();
    p.ej_over_h_ghz = 9.9;
    p.omega_bar = kTwoPi * 5.17e9;
    p.dispersion = kTwoPi * 1.02e6;
    p.visibility_nu = 0.50;
    p.decay_d = 0.85;
    p.scan_period_s = 30.0;
    p.scan_points = 40;
    p.scan_shots_per_point = 300;
    return p;
}

DeviceParams DeviceParams::preset(const std::string& name) {
    if (name == "qubitA") return qubit_a();
    if (name == "qubitB") return qubit_b();
    throw std::invalid_argument("unknown device preset: " + name);
}

}  // namespace qcns
