#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "qcns/rng.hpp"

namespace qcns {

enum class CellKind : uint8_t { Gap = 0, Island = 1, Ground = 2 };

// Discretized 2D plan view of the island / groundplane layout. Cell-centered
// mask on an nx-by-ny grid with spacing h (um); cell (i, j) center sits at
// ((i+0.5)h, (j+0.5)h).
struct GeometryGrid {
    int nx = 0, ny = 0;
    double h_um = 1.0;
    std::vector<CellKind> mask;

    CellKind at(int i, int j) const { return mask[static_cast<size_t>(j) * nx + i]; }
    CellKind& at(int i, int j) { return mask[static_cast<size_t>(j) * nx + i]; }
    size_t cell_count() const { return mask.size(); }
    double width_um() const { return nx * h_um; }
    double height_um() const { return ny * h_um; }

    size_t count(CellKind k) const;
    // Throws unless the mask has island and ground cells, the two are
    // nowhere adjacent (gap >= 1 cell), and the outer boundary is ground.
    void validate_cavity() const;

    // Island centered in a dielectric gap, enclosed by a groundplane ring.
    static GeometryGrid qubit_cavity(double island_w_um = 40.0, double island_h_um = 180.0,
                                     double gap_um = 20.0, double border_um = 4.0,
                                     double pitch_um = 1.0);
    // Full-height island and ground strips separated by a gap; the solution
    // is y-invariant and exactly linear across the gap.
    static GeometryGrid parallel_strips(double strip_w_um, double gap_um, double height_um,
                                        double pitch_um);
};

// Dirichlet solution phi with island = 1, ground = 0; harmonic in the gap.
struct PotentialField {
    int nx = 0, ny = 0;
    double h_um = 1.0;
    std::vector<double> phi;  // cell-centered, electrode cells hold boundary values

    double at(int i, int j) const { return phi[static_cast<size_t>(j) * nx + i]; }
    // Bilinear interpolation between cell centers (clamped at the rim).
    double interpolate(double x_um, double y_um) const;
};

// Red-black SOR with mirror (no-flux) closure at the domain rim. Residual is
// max |mean(neighbors) - phi| over gap cells. Throws on non-convergence,
// reporting the final residual, and on masks without both electrodes.
PotentialField solve_laplace(const GeometryGrid& grid, double tol = 1e-8, int max_iter = 200000);

enum class Region : uint8_t { Gap, Island, Ground };

struct InducedCharge {
    double value_e = 0.0;
    Region region = Region::Gap;  // electrode positions are flagged, not rejected
};

// Induced island charge for a +1e charge at (x, y), via Green's reciprocity:
// q_ind = -phi(x, y) when the island is at unit potential. On an electrode
// the boundary value (-1e island, 0 ground) is returned with the region flag.
InducedCharge induced_charge(const PotentialField& field, const GeometryGrid& grid, double x_um,
                             double y_um);

// Aliased induced-charge values from uniform sampling of the gap cells with
// both polarities. Reusable as the jump-size sampler for noise synthesis.
struct JumpSizeDistribution {
    std::vector<double> samples_e;  // in [-0.5, 0.5)
    uint64_t seed = 0;
    int grid_nx = 0, grid_ny = 0;
    double pitch_um = 0.0;

    double fraction_above(double abs_threshold_e) const;
    // Uniform draw from the stored samples.
    std::function<double(Rng&)> sampler() const;
    void write_csv(const std::filesystem::path& path) const;  // value_e
};

JumpSizeDistribution sample_jump_distribution(const PotentialField& field,
                                              const GeometryGrid& grid, size_t n_samples,
                                              Rng& rng);

// flux (particles / cm^2 s) <-> event rate (1/s) for a given sensing area.
double rate_to_flux(double rate_per_s, double area_cm2);
double flux_to_rate(double flux_per_cm2_s, double area_cm2);

struct HistogramCurve {
    std::vector<double> bin_center_e;
    std::vector<double> density;  // probability density over [-0.5, 0.5)

    void write_csv(const std::filesystem::path& path) const;  // bin_center_e,density
};

// Mixture model for the observed jump histogram: a central Gaussian of the
// stated fit width (weight 1 - jump_weight) plus the aliased induced-charge
// tail (weight jump_weight = expected jumps per scan interval).
HistogramCurve histogram_model(const JumpSizeDistribution& dist, double gaussian_width_e,
                               double jump_weight, int n_bins = 101);

}  // namespace qcns
