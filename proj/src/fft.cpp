// SPDX-License-Identifier: Apache-2.0
#include "eepn/fft.hpp"

#include "eepn/errors.hpp"

#include <algorithm>
#include <fftw3.h>

namespace eepn {

struct Fft::Impl {
    fftw_complex* data = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;

    explicit Impl(std::size_t n)
    {
        data = fftw_alloc_complex(n);
        const int len = static_cast<int>(n);
        fwd = fftw_plan_dft_1d(len, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
        inv = fftw_plan_dft_1d(len, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Impl()
    {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
        fftw_free(data);
    }
    Impl(const Impl&) = delete;
    Impl& operator=(const Impl&) = delete;
};

Fft::Fft(std::size_t n) : n_(n)
{
    detail::require(n > 0, "FFT length must be positive");
    impl_ = std::make_unique<Impl>(n);
}

Fft::~Fft() = default;
Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

std::span<cplx> Fft::buffer() noexcept
{
    // std::complex<double> is layout-compatible with fftw_complex
    return {reinterpret_cast<cplx*>(impl_->data), n_};
}

void Fft::forward() { fftw_execute(impl_->fwd); }
void Fft::inverse() { fftw_execute(impl_->inv); }

CVec fft(std::span<const cplx> x)
{
    Fft plan(x.size());
    auto buf = plan.buffer();
    std::copy(x.begin(), x.end(), buf.begin());
    plan.forward();
    return {buf.begin(), buf.end()};
}

CVec ifft(std::span<const cplx> x)
{
    Fft plan(x.size());
    auto buf = plan.buffer();
    std::copy(x.begin(), x.end(), buf.begin());
    plan.inverse();
    const double scale = 1.0 / static_cast<double>(x.size());
    CVec out(buf.begin(), buf.end());
    for (auto& v : out) {
        v *= scale;
    }
    return out;
}

} // namespace eepn
