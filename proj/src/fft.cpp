#include "ddspec/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace ddspec::fft {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct Buffer {
    explicit Buffer(std::size_t bytes) : p(fftw_malloc(bytes)) {
        if (!p) throw std::bad_alloc();
    }
    ~Buffer() { fftw_free(p); }
    Buffer(const Buffer&) = delete;
    Buffer& operator=(const Buffer&) = delete;
    void* p;
};

} // namespace

void forward_real(const std::vector<double>& in, std::vector<cplx>& out) {
    const std::size_t n = in.size();
    if (n == 0) throw std::invalid_argument("fft of empty input");
    Buffer bi(sizeof(double) * n);
    Buffer bo(sizeof(fftw_complex) * (n / 2 + 1));
    auto* pi = static_cast<double*>(bi.p);
    auto* po = static_cast<fftw_complex*>(bo.p);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), pi, po, FFTW_ESTIMATE);
    }
    std::memcpy(pi, in.data(), sizeof(double) * n);
    fftw_execute(plan);
    out.resize(n / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = cplx(po[k][0], po[k][1]);
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
}

void transform(const std::vector<cplx>& in, std::vector<cplx>& out, int sign) {
    const std::size_t n = in.size();
    if (n == 0) throw std::invalid_argument("fft of empty input");
    Buffer bi(sizeof(fftw_complex) * n);
    Buffer bo(sizeof(fftw_complex) * n);
    auto* pi = static_cast<fftw_complex*>(bi.p);
    auto* po = static_cast<fftw_complex*>(bo.p);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(n), pi, po, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                FFTW_ESTIMATE);
    }
    std::memcpy(pi, in.data(), sizeof(fftw_complex) * n);
    fftw_execute(plan);
    out.resize(n);
    std::memcpy(static_cast<void*>(out.data()), po, sizeof(fftw_complex) * n);
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace ddspec::fft
