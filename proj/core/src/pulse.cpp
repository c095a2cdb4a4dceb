#include "qcns/pulse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qcns/csv.hpp"
#include "qcns/estimation.hpp"

namespace qcns {

void PulseSequence::validate() const {
    if (gates.empty() || gates.back().kind != GateKind::Measure)
        throw std::invalid_argument("PulseSequence: must end with a measure");
    for (size_t i = 0; i + 1 < gates.size(); ++i)
        if (gates[i].kind == GateKind::Measure)
            throw std::invalid_argument("PulseSequence: measure must be the last gate");
    for (const auto& g : gates)
        if (g.kind == GateKind::Idle && g.idle_s < 0)
            throw std::invalid_argument("PulseSequence: negative idle");
}

size_t PulseSequence::idle_count() const {
    size_t n = 0;
    for (const auto& g : gates)
        if (g.kind == GateKind::Idle) ++n;
    return n;
}

double PulseSequence::duration_s() const {
    double t = 0.0;
    for (const auto& g : gates) {
        if (g.kind == GateKind::Idle)
            t += g.idle_s;
        else if (g.kind != GateKind::Measure)
            t += gate_duration_s;
    }
    return t;
}

PulseSequence PulseSequence::ramsey_scan(const DeviceParams& p, double bias_ng_ext) {
    PulseSequence s;
    s.gate_duration_s = p.gate_duration_s;
    s.bias_ng_ext = bias_ng_ext;
    s.gates = {{GateKind::HalfX, 0}, {GateKind::Idle, p.idle_time_s()}, {GateKind::HalfX, 0},
               {GateKind::Measure, 0}};
    return s;
}

PulseSequence PulseSequence::parity_probe(const DeviceParams& p, double bias_ng_ext) {
    PulseSequence s;
    s.gate_duration_s = p.gate_duration_s;
    s.bias_ng_ext = bias_ng_ext;
    // idle of pi/(2 disp) puts the two parity phases at +-pi/2: poles after Y/2
    s.gates = {{GateKind::HalfX, 0}, {GateKind::Idle, 0.5 * p.idle_time_s()}, {GateKind::HalfY, 0},
               {GateKind::Measure, 0}};
    return s;
}

PulseSequence PulseSequence::charge_probe(const DeviceParams& p, double bias_ng_ext) {
    PulseSequence s;
    s.gate_duration_s = p.gate_duration_s;
    s.bias_ng_ext = bias_ng_ext;
    s.gates = {{GateKind::HalfX, 0}, {GateKind::Idle, p.idle_time_s()}, {GateKind::HalfY, 0},
               {GateKind::Measure, 0}};
    return s;
}

double evolve_bloch(const DeviceParams& params, const PulseSequence& seq,
                    std::span<const double> idle_phases) {
    seq.validate();
    if (idle_phases.size() != seq.idle_count())
        throw std::invalid_argument("evolve_bloch: one phase per idle required");

    // Bloch vector, ground state at the north pole.
    std::array<double, 3> v{0.0, 0.0, 1.0};
    size_t idle_i = 0;
    for (const auto& g : seq.gates) {
        switch (g.kind) {
            case GateKind::HalfX: {  // +pi/2 about x
                const double y = v[1], z = v[2];
                v[1] = -z;
                v[2] = y;
                break;
            }
            case GateKind::HalfY: {  // +pi/2 about y
                const double x = v[0], z = v[2];
                v[0] = z;
                v[2] = -x;
                break;
            }
            case GateKind::Idle: {  // z-rotation by the accumulated phase
                const double phi = idle_phases[idle_i++];
                const double c = std::cos(phi), s = std::sin(phi);
                const double x = v[0], y = v[1];
                v[0] = x * c - y * s;
                v[1] = x * s + y * c;
                break;
            }
            case GateKind::Measure:
                return 0.5 * (params.decay_d - params.visibility_nu * v[2]);
        }
    }
    throw std::logic_error("evolve_bloch: unreachable");
}

double band_phase(const DeviceParams& params, double idle_s, double ng_total_2e, int parity_sign) {
    return parity_sign * params.dispersion * idle_s * std::cos(kTwoPi * ng_total_2e);
}

double scan_population(const DeviceParams& params, double ng_ext_2e, double delta_ng_2e,
                       int parity_sign) {
    const PulseSequence seq = PulseSequence::ramsey_scan(params, ng_ext_2e);
    const double phi =
        band_phase(params, params.idle_time_s(), ng_ext_2e + delta_ng_2e, parity_sign);
    return evolve_bloch(params, seq, std::array{phi});
}

const char* shot_kind_name(ShotKind k) {
    switch (k) {
        case ShotKind::Parity: return "parity";
        case ShotKind::Charge: return "charge";
        case ShotKind::Flux: return "flux";
        case ShotKind::ScanPoint: return "scan-point";
    }
    return "?";
}

void write_shots_csv(const std::filesystem::path& path, std::span<const ShotRecord> records) {
    CsvWriter w(path);
    w.header({"t_s", "kind", "outcome", "bias_ng_ext"});
    for (const auto& r : records) {
        w.field(r.t_s)
            .field(std::string(shot_kind_name(r.kind)))
            .field(static_cast<long long>(r.outcome))
            .field(r.bias_ng_ext);
        w.end_row();
    }
}

std::vector<ShotRecord> read_shots_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("shots csv: empty file");
    if (line != "t_s,kind,outcome,bias_ng_ext" && line != "t_s,kind,outcome,bias_ng_ext\r")
        throw std::runtime_error("shots csv: unexpected header '" + line + "'");
    std::vector<ShotRecord> out;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string t, kind, outcome, bias;
        if (!std::getline(ss, t, ',') || !std::getline(ss, kind, ',') ||
            !std::getline(ss, outcome, ',') || !std::getline(ss, bias))
            throw std::runtime_error("shots csv: malformed row " + std::to_string(lineno));
        ShotRecord r;
        try {
            r.t_s = std::stod(t);
            r.outcome = static_cast<uint8_t>(std::stoi(outcome));
            r.bias_ng_ext = std::stod(bias);
        } catch (const std::exception&) {
            throw std::runtime_error("shots csv: bad numeric field in row " +
                                     std::to_string(lineno));
        }
        if (kind == "parity")
            r.kind = ShotKind::Parity;
        else if (kind == "charge")
            r.kind = ShotKind::Charge;
        else if (kind == "flux")
            r.kind = ShotKind::Flux;
        else if (kind == "scan-point")
            r.kind = ShotKind::ScanPoint;
        else
            throw std::runtime_error("shots csv: unknown kind '" + kind + "' in row " +
                                     std::to_string(lineno));
        out.push_back(r);
    }
    return out;
}

ScanResult run_charge_scan(const EnvironmentTrace& env, const DeviceParams& params, double t_start,
                           int n_points, int shots_per_point, Rng& rng, double span_s) {
    if (n_points < 1 || shots_per_point < 1)
        throw std::invalid_argument("run_charge_scan: empty budget");
    const double span = span_s > 0 ? span_s : params.scan_period_s;
    if (t_start < 0 || t_start + span > env.duration() + 0.5 * env.dt)
        throw std::invalid_argument("run_charge_scan: environment too short");

    ScanResult out;
    out.t_start_s = t_start;
    out.span_s = span;
    out.ng_ext_2e.resize(n_points);
    out.p1.resize(n_points);
    out.shots.assign(n_points, shots_per_point);

    const double slot = span / n_points;
    for (int i = 0; i < n_points; ++i) {
        // one 1e period: 0.5 span in 2e units
        out.ng_ext_2e[i] = -0.25 + 0.5 * (i + 0.5) / n_points;
        int ones = 0;
        for (int j = 0; j < shots_per_point; ++j) {
            const double t = t_start + slot * i + slot * (j + 0.5) / shots_per_point;
            const double delta_2e = 0.5 * env.charge_at(t);
            const double p = ramsey_population(
                params, OffsetCharge::from_2e(out.ng_ext_2e[i] + delta_2e));
            ones += rng.bernoulli(p) ? 1 : 0;
        }
        out.p1[i] = static_cast<double>(ones) / shots_per_point;
    }
    return out;
}

ScanResult run_charge_scan(const EnvironmentTrace& env, const DeviceParams& params, double t_start,
                           int n_points, int shots_per_point, uint64_t seed, double span_s) {
    Rng rng = substream(seed, "scan");
    return run_charge_scan(env, params, t_start, n_points, shots_per_point, rng, span_s);
}

namespace {

constexpr double kCavityDeadTime = 1e-6;
constexpr int kRecalPoints = 25;
constexpr int kRecalShotsPerPoint = 40;

// Mini Ramsey scan on the fast cycle grid used for bias recalibration.
// Returns the updated estimate (falls back to the prior on a failed fit).
RecalEpoch run_recal_scan(const EnvironmentTrace& env, const DeviceParams& params, double t0,
                          double cycle, double prior_e, Rng& rng,
                          std::vector<ShotRecord>* records) {
    const int total = kRecalPoints * kRecalShotsPerPoint;
    ScanResult scan;
    scan.t_start_s = t0;
    scan.span_s = total * cycle;
    scan.ng_ext_2e.resize(kRecalPoints);
    scan.p1.resize(kRecalPoints);
    scan.shots.assign(kRecalPoints, kRecalShotsPerPoint);
    int cycle_i = 0;
    for (int i = 0; i < kRecalPoints; ++i) {
        scan.ng_ext_2e[i] = -0.25 + 0.5 * (i + 0.5) / kRecalPoints;
        int ones = 0;
        for (int j = 0; j < kRecalShotsPerPoint; ++j, ++cycle_i) {
            const double t = t0 + cycle_i * cycle;
            const double delta_2e = 0.5 * env.charge_at(t);
            const double p =
                ramsey_population(params, OffsetCharge::from_2e(scan.ng_ext_2e[i] + delta_2e));
            const bool one = rng.bernoulli(p);
            ones += one ? 1 : 0;
            if (records)
                records->push_back({t, static_cast<uint8_t>(one), ShotKind::ScanPoint,
                                    scan.ng_ext_2e[i],
                                    static_cast<int8_t>(env.parity_at(t))});
        }
        scan.p1[i] = static_cast<double>(ones) / kRecalShotsPerPoint;
    }
    const ChargeFit fit = fit_charge_scan(scan, prior_e);
    RecalEpoch ep;
    ep.t_s = t0;
    ep.fit_ok = fit.converged;
    // branch continuity: stay within 0.5e of the prior estimate
    ep.delta_estimate_e = fit.converged ? prior_e + alias_charge_delta(fit.delta_ng_e - prior_e)
                                        : prior_e;
    return ep;
}

}  // namespace

FastProtocolResult run_fast_protocol(const EnvironmentTrace& env, const DeviceParams& params,
                                     double duration_s, uint64_t seed) {
    params.validate();
    const double cycle = 1.0 / params.shot_rate_hz;
    if (env.dt > cycle + 1e-15)
        throw std::invalid_argument("run_fast_protocol: environment dt coarser than the duty cycle");
    if (duration_s > env.duration() + 0.5 * env.dt)
        throw std::invalid_argument("run_fast_protocol: environment too short");

    FastProtocolResult out;
    out.cycle_period_s = cycle;
    out.n_cycles = static_cast<size_t>(duration_s / cycle);
    out.records.reserve(2 * out.n_cycles);

    Rng rng = substream(seed, "shots");
    Rng rng_recal = substream(seed, "recal");

    const double t_parity_idle = 0.5 * params.idle_time_s();
    const double t_charge_idle = params.idle_time_s();
    // charge shot starts after the parity sequence and the cavity dead time
    const double charge_offset = 2 * params.gate_duration_s + t_parity_idle + kCavityDeadTime;

    const size_t recal_cycles = kRecalPoints * kRecalShotsPerPoint;
    size_t cycle_i = 0;
    double next_recal = 0.0;
    double estimate_e = 0.0;

    while (cycle_i < out.n_cycles) {
        const double t0 = cycle_i * cycle;
        if (t0 >= next_recal) {
            if (cycle_i + recal_cycles > out.n_cycles) break;
            RecalEpoch ep = run_recal_scan(env, params, t0, cycle, estimate_e, rng_recal,
                                           &out.records);
            estimate_e = ep.delta_estimate_e;
            out.epochs.push_back(ep);
            cycle_i += recal_cycles;
            next_recal = t0 + params.recal_period_s;
            continue;
        }

        const double bias_parity = -0.5 * estimate_e;           // n_g ~ 0, parity-sensitive
        const double bias_charge = -0.25 - 0.5 * estimate_e;    // n_g ~ -0.25, max charge slope

        // parity shot
        {
            const int s = env.parity_at(t0);
            const double ng = bias_parity + 0.5 * env.charge_at(t0);
            const double phi = band_phase(params, t_parity_idle, ng, s);
            const double p = 0.5 * (params.decay_d + params.visibility_nu * std::sin(phi));
            const bool one = rng.bernoulli(p);
            out.records.push_back({t0, static_cast<uint8_t>(one), ShotKind::Parity, bias_parity,
                                   static_cast<int8_t>(s)});
        }
        // charge shot
        {
            const double tc = t0 + charge_offset;
            const int s = env.parity_at(tc);
            const double ng = bias_charge + 0.5 * env.charge_at(tc);
            const double phi = band_phase(params, t_charge_idle, ng, s);
            const double p = 0.5 * (params.decay_d + params.visibility_nu * std::sin(phi));
            const bool one = rng.bernoulli(p);
            out.records.push_back({tc, static_cast<uint8_t>(one), ShotKind::Charge, bias_charge,
                                   static_cast<int8_t>(s)});
        }
        ++cycle_i;
    }
    return out;
}

ConditionedSeries condition_charge_on_parity(std::span<const ShotRecord> records) {
    ConditionedSeries out;
    bool have_parity = false;
    int parity_sign = 0;
    for (const auto& r : records) {
        if (r.kind == ShotKind::Parity) {
            parity_sign = r.outcome ? 1 : -1;
            have_parity = true;
        } else if (r.kind == ShotKind::Charge) {
            if (!have_parity) {
                ++out.dropped;
                continue;
            }
            out.t_s.push_back(r.t_s);
            out.value.push_back(parity_sign * (2.0 * r.outcome - 1.0));
            have_parity = false;  // each parity shot conditions one charge shot
        }
    }
    return out;
}

double charge_transfer_gain(const DeviceParams& params) {
    // parity-inference channel contributes nu, the charge shot nu * pi *
    // (disp * idle) per e; at idle = pi/disp this is nu^2 pi^2
    return params.visibility_nu * params.visibility_nu * M_PI *
           params.dispersion * params.idle_time_s();
}

namespace {

FastChargeSeries assemble_on_grid(const FastProtocolResult& run,
                                  std::span<const double> t, std::span<const double> v,
                                  double fill_start) {
    FastChargeSeries out;
    out.dt = run.cycle_period_s;
    out.value_e.assign(run.n_cycles, fill_start);
    size_t k = 0;
    double last = fill_start;
    for (size_t c = 0; c < run.n_cycles; ++c) {
        const double t0 = c * run.cycle_period_s;
        while (k < t.size() && t[k] < t0 + run.cycle_period_s) {
            last = v[k];
            ++k;
        }
        out.value_e[c] = last;
    }
    return out;
}

}  // namespace

FastChargeSeries assemble_fast_charge_series(const FastProtocolResult& run,
                                             const DeviceParams& params) {
    const ConditionedSeries cond = condition_charge_on_parity(run.records);
    const double g = charge_transfer_gain(params);

    // calibrated value = epoch offset + conditioned/g
    std::vector<double> v(cond.value.size());
    size_t ep = 0;
    for (size_t i = 0; i < cond.value.size(); ++i) {
        while (ep + 1 < run.epochs.size() && run.epochs[ep + 1].t_s <= cond.t_s[i]) ++ep;
        const double offset = run.epochs.empty() ? 0.0 : run.epochs[ep].delta_estimate_e;
        v[i] = offset + cond.value[i] / g;
    }
    FastChargeSeries out = assemble_on_grid(run, cond.t_s, v,
                                            run.epochs.empty() ? 0.0
                                                               : run.epochs[0].delta_estimate_e);
    out.filled = run.n_cycles - cond.value.size();
    return out;
}

FastChargeSeries assemble_parity_series(const FastProtocolResult& run) {
    std::vector<double> t, v;
    t.reserve(run.records.size());
    for (const auto& r : run.records) {
        if (r.kind != ShotKind::Parity) continue;
        t.push_back(r.t_s);
        v.push_back(r.outcome ? 1.0 : -1.0);
    }
    FastChargeSeries out = assemble_on_grid(run, t, v, v.empty() ? 1.0 : v.front());
    out.filled = run.n_cycles - t.size();
    return out;
}

}  // namespace qcns
