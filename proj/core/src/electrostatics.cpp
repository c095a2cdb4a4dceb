#include "qcns/electrostatics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qcns/csv.hpp"
#include "qcns/device.hpp"

namespace qcns {

size_t GeometryGrid::count(CellKind k) const {
    return static_cast<size_t>(std::count(mask.begin(), mask.end(), k));
}

void GeometryGrid::validate_cavity() const {
    if (count(CellKind::Island) == 0) throw std::invalid_argument("geometry: no island cells");
    if (count(CellKind::Ground) == 0) throw std::invalid_argument("geometry: no ground cells");
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const bool rim = (i == 0 || j == 0 || i == nx - 1 || j == ny - 1);
            if (rim && at(i, j) != CellKind::Ground)
                throw std::invalid_argument("geometry: domain boundary must be ground");
            if (at(i, j) != CellKind::Island) continue;
            for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
                const int ni = i + di, nj = j + dj;
                if (ni < 0 || nj < 0 || ni >= nx || nj >= ny) continue;
                if (at(ni, nj) == CellKind::Ground)
                    throw std::invalid_argument("geometry: island adjacent to ground (no gap)");
            }
        }
    }
}

GeometryGrid GeometryGrid::qubit_cavity(double island_w_um, double island_h_um, double gap_um,
                                        double border_um, double pitch_um) {
    if (pitch_um <= 0 || island_w_um <= 0 || island_h_um <= 0 || gap_um < pitch_um ||
        border_um < pitch_um)
        throw std::invalid_argument("qubit_cavity: invalid dimensions");
    GeometryGrid g;
    g.h_um = pitch_um;
    const int iw = std::max(1, static_cast<int>(std::lround(island_w_um / pitch_um)));
    const int ih = std::max(1, static_cast<int>(std::lround(island_h_um / pitch_um)));
    const int gp = std::max(1, static_cast<int>(std::lround(gap_um / pitch_um)));
    const int bd = std::max(1, static_cast<int>(std::lround(border_um / pitch_um)));
    g.nx = iw + 2 * (gp + bd);
    g.ny = ih + 2 * (gp + bd);
    g.mask.assign(g.cell_count(), CellKind::Ground);
    for (int j = bd; j < g.ny - bd; ++j)
        for (int i = bd; i < g.nx - bd; ++i) g.at(i, j) = CellKind::Gap;
    for (int j = bd + gp; j < bd + gp + ih; ++j)
        for (int i = bd + gp; i < bd + gp + iw; ++i) g.at(i, j) = CellKind::Island;
    g.validate_cavity();
    return g;
}

GeometryGrid GeometryGrid::parallel_strips(double strip_w_um, double gap_um, double height_um,
                                           double pitch_um) {
    if (pitch_um <= 0) throw std::invalid_argument("parallel_strips: invalid pitch");
    GeometryGrid g;
    g.h_um = pitch_um;
    const int sw = std::max(1, static_cast<int>(std::lround(strip_w_um / pitch_um)));
    const int gp = std::max(2, static_cast<int>(std::lround(gap_um / pitch_um)));
    g.nx = 2 * sw + gp;
    g.ny = std::max(1, static_cast<int>(std::lround(height_um / pitch_um)));
    g.mask.assign(g.cell_count(), CellKind::Gap);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < sw; ++i) g.at(i, j) = CellKind::Island;
        for (int i = sw + gp; i < g.nx; ++i) g.at(i, j) = CellKind::Ground;
    }
    return g;
}

double PotentialField::interpolate(double x_um, double y_um) const {
    // cell centers at (i+0.5)h; clamp to the center lattice
    const double fx = std::clamp(x_um / h_um - 0.5, 0.0, static_cast<double>(nx - 1));
    const double fy = std::clamp(y_um / h_um - 0.5, 0.0, static_cast<double>(ny - 1));
    const int i0 = std::min(static_cast<int>(fx), nx - 2);
    const int j0 = std::min(static_cast<int>(fy), ny - 2);
    const double tx = fx - i0, ty = fy - j0;
    return at(i0, j0) * (1 - tx) * (1 - ty) + at(i0 + 1, j0) * tx * (1 - ty) +
           at(i0, j0 + 1) * (1 - tx) * ty + at(i0 + 1, j0 + 1) * tx * ty;
}

PotentialField solve_laplace(const GeometryGrid& grid, double tol, int max_iter) {
    if (tol <= 0) throw std::invalid_argument("solve_laplace: tol must be > 0");
    if (grid.count(CellKind::Island) == 0 || grid.count(CellKind::Ground) == 0)
        throw std::invalid_argument("solve_laplace: mask needs island and ground cells");

    PotentialField f;
    f.nx = grid.nx;
    f.ny = grid.ny;
    f.h_um = grid.h_um;
    f.phi.assign(grid.cell_count(), 0.0);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
            if (grid.at(i, j) == CellKind::Island) f.phi[static_cast<size_t>(j) * grid.nx + i] = 1.0;

    const int nx = grid.nx, ny = grid.ny;
    auto idx = [nx](int i, int j) { return static_cast<size_t>(j) * nx + i; };
    // mirror closure at the rim keeps strip geometries exactly 1D
    auto neighbor = [&](int i, int j, int di, int dj) {
        int ni = i + di, nj = j + dj;
        if (ni < 0) ni = 0;
        if (nj < 0) nj = 0;
        if (ni >= nx) ni = nx - 1;
        if (nj >= ny) nj = ny - 1;
        return f.phi[idx(ni, nj)];
    };

    const double omega = 2.0 / (1.0 + std::sin(M_PI / std::max(nx, ny)));
    for (int iter = 0; iter < max_iter; ++iter) {
        for (int color = 0; color < 2; ++color) {
            for (int j = 0; j < ny; ++j) {
                for (int i = (j + color) % 2; i < nx; i += 2) {
                    if (grid.at(i, j) != CellKind::Gap) continue;
                    const double avg = 0.25 * (neighbor(i, j, 1, 0) + neighbor(i, j, -1, 0) +
                                               neighbor(i, j, 0, 1) + neighbor(i, j, 0, -1));
                    f.phi[idx(i, j)] += omega * (avg - f.phi[idx(i, j)]);
                }
            }
        }
        if (iter % 16 == 15 || iter == max_iter - 1) {
            double res = 0.0;
            for (int j = 0; j < ny; ++j) {
                for (int i = 0; i < nx; ++i) {
                    if (grid.at(i, j) != CellKind::Gap) continue;
                    const double avg = 0.25 * (neighbor(i, j, 1, 0) + neighbor(i, j, -1, 0) +
                                               neighbor(i, j, 0, 1) + neighbor(i, j, 0, -1));
                    res = std::max(res, std::abs(avg - f.phi[idx(i, j)]));
                }
            }
            if (res <= tol) return f;
        }
    }
    double res = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (grid.at(i, j) != CellKind::Gap) continue;
            const double avg = 0.25 * (neighbor(i, j, 1, 0) + neighbor(i, j, -1, 0) +
                                       neighbor(i, j, 0, 1) + neighbor(i, j, 0, -1));
            res = std::max(res, std::abs(avg - f.phi[idx(i, j)]));
        }
    throw std::runtime_error("solve_laplace: no convergence after " + std::to_string(max_iter) +
                             " iterations, residual " + format_double(res));
}

InducedCharge induced_charge(const PotentialField& field, const GeometryGrid& grid, double x_um,
                             double y_um) {
    const int i = std::clamp(static_cast<int>(x_um / grid.h_um), 0, grid.nx - 1);
    const int j = std::clamp(static_cast<int>(y_um / grid.h_um), 0, grid.ny - 1);
    switch (grid.at(i, j)) {
        case CellKind::Island:
            return {-1.0, Region::Island};
        case CellKind::Ground:
            return {0.0, Region::Ground};
        case CellKind::Gap:
            break;
    }
    return {-field.interpolate(x_um, y_um), Region::Gap};
}

double JumpSizeDistribution::fraction_above(double abs_threshold_e) const {
    if (samples_e.empty()) return 0.0;
    size_t n = 0;
    for (double v : samples_e)
        if (std::abs(v) > abs_threshold_e) ++n;
    return static_cast<double>(n) / static_cast<double>(samples_e.size());
}

std::function<double(Rng&)> JumpSizeDistribution::sampler() const {
    if (samples_e.empty()) throw std::runtime_error("JumpSizeDistribution: empty");
    auto samples = samples_e;  // owned copy keeps the closure self-contained
    return [samples = std::move(samples)](Rng& rng) {
        return samples[rng.index(samples.size())];
    };
}

void JumpSizeDistribution::write_csv(const std::filesystem::path& path) const {
    CsvWriter w(path);
    w.header({"value_e"});
    for (double v : samples_e) {
        w.field(v);
        w.end_row();
    }
}

JumpSizeDistribution sample_jump_distribution(const PotentialField& field,
                                              const GeometryGrid& grid, size_t n_samples,
                                              Rng& rng) {
    std::vector<uint32_t> gap_cells;
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
            if (grid.at(i, j) == CellKind::Gap)
                gap_cells.push_back(static_cast<uint32_t>(j) * grid.nx + i);
    if (gap_cells.empty()) throw std::invalid_argument("sample_jump_distribution: no gap cells");

    JumpSizeDistribution dist;
    dist.grid_nx = grid.nx;
    dist.grid_ny = grid.ny;
    dist.pitch_um = grid.h_um;
    dist.samples_e.reserve(n_samples);
    for (size_t k = 0; k < n_samples; ++k) {
        const uint32_t cell = gap_cells[rng.index(gap_cells.size())];
        const int i = static_cast<int>(cell % grid.nx);
        const int j = static_cast<int>(cell / grid.nx);
        const double x = (i + rng.uniform()) * grid.h_um;
        const double y = (j + rng.uniform()) * grid.h_um;
        double q = -field.interpolate(x, y);  // +1e impinging charge
        if (rng.bernoulli(0.5)) q = -q;        // both polarities
        dist.samples_e.push_back(alias_charge_delta(q));
    }
    return dist;
}

double rate_to_flux(double rate_per_s, double area_cm2) {
    if (area_cm2 <= 0) throw std::invalid_argument("rate_to_flux: area must be > 0");
    return rate_per_s / area_cm2;
}

double flux_to_rate(double flux_per_cm2_s, double area_cm2) {
    return flux_per_cm2_s * area_cm2;
}

void HistogramCurve::write_csv(const std::filesystem::path& path) const {
    CsvWriter w(path);
    w.header({"bin_center_e", "density"});
    for (size_t i = 0; i < bin_center_e.size(); ++i) {
        w.field(bin_center_e[i]).field(density[i]);
        w.end_row();
    }
}

HistogramCurve histogram_model(const JumpSizeDistribution& dist, double gaussian_width_e,
                               double jump_weight, int n_bins) {
    if (gaussian_width_e <= 0) throw std::invalid_argument("histogram_model: width must be > 0");
    if (jump_weight < 0 || jump_weight > 1)
        throw std::invalid_argument("histogram_model: weight must be in [0, 1]");
    HistogramCurve h;
    const double bin_w = 1.0 / n_bins;
    h.bin_center_e.resize(n_bins);
    h.density.assign(n_bins, 0.0);
    for (int b = 0; b < n_bins; ++b) h.bin_center_e[b] = -0.5 + (b + 0.5) * bin_w;

    if (jump_weight > 0 && !dist.samples_e.empty()) {
        const double w = jump_weight / (static_cast<double>(dist.samples_e.size()) * bin_w);
        for (double v : dist.samples_e) {
            int b = static_cast<int>((v + 0.5) / bin_w);
            b = std::clamp(b, 0, n_bins - 1);
            h.density[b] += w;
        }
    }
    const double norm = (1.0 - jump_weight) / (std::sqrt(kTwoPi) * gaussian_width_e);
    for (int b = 0; b < n_bins; ++b) {
        const double x = h.bin_center_e[b] / gaussian_width_e;
        h.density[b] += norm * std::exp(-0.5 * x * x);
    }
    return h;
}

}  // namespace qcns
