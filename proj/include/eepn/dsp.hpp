// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eepn/signal.hpp"

#include <cstddef>
#include <functional>
#include <span>

namespace eepn {

/// Root-raised-cosine taps with unit energy, span_symbols*sps+1 taps, origin at the middle tap.
[[nodiscard]] FirFilter rrc_taps(double rolloff, int span_symbols, int samples_per_symbol);

/// Per-bin frequency response, evaluated at a frequency in Hz.
using ResponseFn = std::function<cplx(double)>;

/// A response together with the two-sided length (samples) of its impulse response.
struct FrequencyResponse {
    ResponseFn at;
    std::size_t memory_samples = 0;
};

/// Block sizes for overlap-save filtering. `overlap` samples of every FFT block are discarded,
/// half at each end, so the kernel may extend overlap/2 samples to either side of its origin.
struct OverlapSave {
    std::size_t fft_size = 0;
    std::size_t overlap = 0;
};

/// Overlap-save sizing for a kernel of the given memory: overlap = memory rounded up to even,
/// FFT length the next power of two >= 4*overlap (at least 1024).
[[nodiscard]] OverlapSave overlap_save_for(std::size_t memory_samples);

/// Circular filtering with one transform over the whole signal (transform length = signal length).
[[nodiscard]] ComplexSignal apply_frequency_response(const ComplexSignal& signal, const ResponseFn& response);

/// Linear filtering by overlap-save. Samples outside the signal are zero; output length equals input length.
/// Throws ConfigurationError if the overlap is shorter than the declared memory.
[[nodiscard]] ComplexSignal apply_frequency_response(const ComplexSignal& signal,
                                                     const FrequencyResponse& response,
                                                     const OverlapSave& blocks);

/// y[n] = sum_m taps[m] x[n + delay - m], zero outside x; output length equals input length.
/// Long filters run through FFT overlap-save, short ones directly.
[[nodiscard]] CVec filter_same(std::span<const cplx> x, const FirFilter& filter);

/// Zero insertion by factor_up, then keep every factor_down-th sample starting at offset.
[[nodiscard]] ComplexSignal resample(const ComplexSignal& signal, int factor_up, int factor_down,
                                     std::size_t offset = 0);

} // namespace eepn
