#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace qcns {

// One-sided spectrum, DC excluded. `value` holds the PSD (units^2/Hz) or
// the real part of a CPSD; `value_imag` is empty for real spectra.
// sample_dt_s / stagger_dt_s carry the sampling metadata the model-based
// fits need (a sampled telegraph spectrum differs from the continuum
// Lorentzian near Nyquist).
struct Spectrum {
    std::vector<double> frequency_hz;
    std::vector<double> value;
    std::vector<double> value_imag;
    int n_averages = 1;
    double sample_dt_s = 0.0;
    double stagger_dt_s = 0.0;  // interleaved even/odd offset, 0 for direct
    std::string window = "hann";

    bool is_complex() const { return !value_imag.empty(); }
    size_t size() const { return frequency_hz.size(); }

    // Linear interpolation of `value` at f (log-x interpolation).
    double value_at(double f_hz) const;
};

enum class Window { Hann, Rect };
enum class Detrend { Mean, Linear };

struct WelchOptions {
    size_t segment_len = 0;  // 0: largest power of two giving >= 8 segments
    double overlap = 0.5;
    Window window = Window::Hann;
    Detrend detrend = Detrend::Mean;
};

// Mean of windowed, detrended segment periodograms. One-sided normalization:
// white noise of variance sigma^2 gives a flat PSD of 2*sigma^2*dt.
Spectrum welch_psd(std::span<const double> series, double dt, WelchOptions opts = {});

// Cross-spectrum of the even/odd interleaved sub-series (each at 2*dt),
// averaged as a complex mean so independent projection noise shrinks as
// 1/sqrt(n_averages). The half-sample stagger phase exp(i*2*pi*f*dt) is
// compensated before averaging; `value` holds the real part.
Spectrum interleaved_cross_psd(std::span<const double> shots, double dt, WelchOptions opts = {});

struct CrossSpectra {
    Spectrum a;     // direct PSD of the first series
    Spectrum b;     // direct PSD of the second series
    Spectrum ab;    // complex cross spectrum (averaged)
    std::vector<double> normalized_magnitude;  // |S_ab| / sqrt(S_a S_b)
};

// Segment-averaged CPSD of two synchronized series (non-overlapping
// segments). For short segments use Window::Rect with Detrend::Linear.
CrossSpectra cross_psd(std::span<const double> a, std::span<const double> b, double dt,
                       size_t segment_len, Window window = Window::Rect,
                       Detrend detrend = Detrend::Linear);

// Geometric-mean frequency bins, arithmetic-mean PSD per bin; non-positive
// values (possible in averaged cross spectra) are dropped first.
Spectrum log_bin(const Spectrum& spec, int bins_per_decade);

struct SpectrumFit {
    double amplitude_at_1hz = 0.0;  // power-law component evaluated at 1 Hz
    double alpha = 0.0;
    double alpha_stderr = 0.0;
    double log_amplitude_stderr = 0.0;
    double lorentzian_level = 0.0;  // plateau S(0) of the Lorentzian component
    double knee_hz = 0.0;
    bool converged = false;

    double power_law_at(double f_hz) const;
    double lorentzian_at(double f_hz) const;
};

// Least squares in log-PSD of A/f^alpha + L0/(1+(f/fc)^2) over [f_lo, f_hi],
// multi-started on alpha in {1, 1.5, 2, 2.5}.
SpectrumFit fit_power_law_plus_lorentzian(const Spectrum& spec, double f_lo, double f_hi);

// Power-law-only variant on the same band.
SpectrumFit fit_power_law(const Spectrum& spec, double f_lo, double f_hi);

struct LorentzianFit {
    double level = 0.0;    // plateau S(0)
    double knee_hz = 0.0;  // gamma / 2pi
    bool knee_identifiable = false;
};

// Lorentzian knee fit. Direct spectra (stagger_dt_s == 0) are fit with the
// sampled-process form (1-r^2)/(1-2r cos(2 pi f dt)+r^2), r = exp(-gamma dt),
// which is exact for an exponentially correlated process at any dt.
// Interleaved spectra are fit with the continuum form on a band capped at
// 0.24x the sub-series Nyquist, below which the stagger distortion is small.
// A flat spectrum is flagged knee_identifiable = false.
LorentzianFit fit_lorentzian(const Spectrum& spec, double f_lo = 0.0, double f_hi = 0.0);

struct StitchResult {
    Spectrum spectrum;
    bool bands_consistent = true;   // overlap bins agree within a factor 3
    double worst_overlap_ratio = 1.0;
};

// Concatenates a low band and a high band with the crossover at the low
// band's top frequency. Emits a consistency flag instead of merging.
StitchResult stitch_spectra(const Spectrum& low, const Spectrum& high);

// f_hz,value[,value_imag],n_avg
void write_spectrum_csv(const Spectrum& spec, const std::filesystem::path& path);

}  // namespace qcns
