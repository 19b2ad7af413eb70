#pragma once

#include "upsq/spectrum_trace.hpp"

namespace upsq {

/// Per-sample linear subtraction of detector dark noise. Samples where the
/// dark power reaches the signal are flagged invalid, never clipped. Both
/// traces must be in linear power units on the same frequency grid.
SpectrumTrace subtract_dark(const SpectrumTrace& signal, const SpectrumTrace& dark);

/// Per-sample ratio signal / shot, returned in shot-noise-relative linear
/// units. Invalid samples in either input stay invalid in the output.
SpectrumTrace normalize_to_shot(const SpectrumTrace& signal, const SpectrumTrace& shot);

}  // namespace upsq
