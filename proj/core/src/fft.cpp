#include "qcns/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace qcns {
namespace {

// FFTW plans are cached per length. Plans are created with FFTW_ESTIMATE so
// the transform result does not depend on planner timing.
struct PlanCache {
    std::mutex mtx;
    std::map<size_t, fftw_plan> fwd;
    std::map<size_t, fftw_plan> bwd;

    ~PlanCache() {
        for (auto& [n, p] : fwd) fftw_destroy_plan(p);
        for (auto& [n, p] : bwd) fftw_destroy_plan(p);
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

}  // namespace

std::vector<std::complex<double>> rfft(std::span<const double> x) {
    const size_t n = x.size();
    if (n < 2) throw std::invalid_argument("rfft: need at least 2 samples");
    std::vector<double> in(x.begin(), x.end());
    std::vector<std::complex<double>> out(n / 2 + 1);

    auto& c = cache();
    std::scoped_lock lock(c.mtx);
    auto it = c.fwd.find(n);
    if (it == c.fwd.end()) {
        // Plan once per length on scratch buffers; FFTW_UNALIGNED lets the
        // plan run on any subsequent array of the same length.
        fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                           reinterpret_cast<fftw_complex*>(out.data()),
                                           FFTW_ESTIMATE | FFTW_UNALIGNED);
        it = c.fwd.emplace(n, p).first;
    }
    fftw_execute_dft_r2c(it->second, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

std::vector<double> irfft(std::span<const std::complex<double>> spectrum, size_t n) {
    if (spectrum.size() != n / 2 + 1) throw std::invalid_argument("irfft: spectrum/length mismatch");
    // c2r destroys its input, so work on a copy.
    std::vector<std::complex<double>> in(spectrum.begin(), spectrum.end());
    std::vector<double> out(n);

    auto& c = cache();
    std::scoped_lock lock(c.mtx);
    auto it = c.bwd.find(n);
    if (it == c.bwd.end()) {
        fftw_plan p = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                           reinterpret_cast<fftw_complex*>(in.data()), out.data(),
                                           FFTW_ESTIMATE | FFTW_UNALIGNED);
        it = c.bwd.emplace(n, p).first;
    }
    fftw_execute_dft_c2r(it->second, reinterpret_cast<fftw_complex*>(in.data()), out.data());
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : out) v *= scale;
    return out;
}

}  // namespace qcns
