#pragma once

#include <cstddef>

namespace gptpinn::detail {

// Elementwise transcendental functions over contiguous arrays. Every element
// goes through the same vector kernel (the tail is padded), so a value's
// result does not depend on where it sits in the array.
void vec_cos(const double* in, double* out, std::ptrdiff_t n);
void vec_sin(const double* in, double* out, std::ptrdiff_t n);
void vec_tanh(const double* in, double* out, std::ptrdiff_t n);

}  // namespace gptpinn::detail
