// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eepn/signal.hpp"

#include <cstddef>
#include <memory>
#include <span>

namespace eepn {

/// In-place complex FFT of fixed length backed by an FFTW plan.
/// The inverse transform is unnormalized, like FFTW itself.
class Fft {
public:
    explicit Fft(std::size_t n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    Fft(Fft&&) noexcept;
    Fft& operator=(Fft&&) noexcept;

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    /// Working buffer the plans operate on.
    [[nodiscard]] std::span<cplx> buffer() noexcept;

    void forward();
    void inverse();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::size_t n_ = 0;
};

/// Forward DFT of x.
[[nodiscard]] CVec fft(std::span<const cplx> x);
/// Inverse DFT of x, scaled by 1/N.
[[nodiscard]] CVec ifft(std::span<const cplx> x);

} // namespace eepn
