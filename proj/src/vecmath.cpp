#include "vecmath.hpp"

#include <algorithm>
#include <cmath>

#if defined(__x86_64__)
#include <immintrin.h>
#endif

namespace gptpinn::detail {

namespace {

#if defined(__AVX512F__)
extern "C" __m512d _ZGVeN8v_cos(__m512d);
extern "C" __m512d _ZGVeN8v_sin(__m512d);
extern "C" __m512d _ZGVeN8v_tanh(__m512d);
constexpr std::ptrdiff_t kLanes = 8;
using Reg = __m512d;
inline Reg load(const double* p) { return _mm512_loadu_pd(p); }
inline void store(double* p, Reg v) { _mm512_storeu_pd(p, v); }
inline Reg k_cos(Reg v) { return _ZGVeN8v_cos(v); }
inline Reg k_sin(Reg v) { return _ZGVeN8v_sin(v); }
inline Reg k_tanh(Reg v) { return _ZGVeN8v_tanh(v); }
#elif defined(__AVX2__)
extern "C" __m256d _ZGVdN4v_cos(__m256d);
extern "C" __m256d _ZGVdN4v_sin(__m256d);
extern "C" __m256d _ZGVdN4v_tanh(__m256d);
constexpr std::ptrdiff_t kLanes = 4;
using Reg = __m256d;
inline Reg load(const double* p) { return _mm256_loadu_pd(p); }
inline void store(double* p, Reg v) { _mm256_storeu_pd(p, v); }
inline Reg k_cos(Reg v) { return _ZGVdN4v_cos(v); }
inline Reg k_sin(Reg v) { return _ZGVdN4v_sin(v); }
inline Reg k_tanh(Reg v) { return _ZGVdN4v_tanh(v); }
#elif defined(__x86_64__)
extern "C" __m128d _ZGVbN2v_cos(__m128d);
extern "C" __m128d _ZGVbN2v_sin(__m128d);
extern "C" __m128d _ZGVbN2v_tanh(__m128d);
constexpr std::ptrdiff_t kLanes = 2;
using Reg = __m128d;
inline Reg load(const double* p) { return _mm_loadu_pd(p); }
inline void store(double* p, Reg v) { _mm_storeu_pd(p, v); }
inline Reg k_cos(Reg v) { return _ZGVbN2v_cos(v); }
inline Reg k_sin(Reg v) { return _ZGVbN2v_sin(v); }
inline Reg k_tanh(Reg v) { return _ZGVbN2v_tanh(v); }
#else
#define GPTPINN_SCALAR_MATH 1
#endif

#ifndef GPTPINN_SCALAR_MATH
template <Reg (*K)(Reg)>
void apply(const double* in, double* out, std::ptrdiff_t n) {
  std::ptrdiff_t i = 0;
  for (; i + kLanes <= n; i += kLanes) store(out + i, K(load(in + i)));
  if (i < n) {
    double buf[kLanes] = {};
    std::copy(in + i, in + n, buf);
    store(buf, K(load(buf)));
    std::copy(buf, buf + (n - i), out + i);
  }
}
#endif

}  // namespace

#ifndef GPTPINN_SCALAR_MATH
void vec_cos(const double* in, double* out, std::ptrdiff_t n) {
  apply<k_cos>(in, out, n);
}
void vec_sin(const double* in, double* out, std::ptrdiff_t n) {
  apply<k_sin>(in, out, n);
}
void vec_tanh(const double* in, double* out, std::ptrdiff_t n) {
  apply<k_tanh>(in, out, n);
}
#else
void vec_cos(const double* in, double* out, std::ptrdiff_t n) {
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = std::cos(in[i]);
}
void vec_sin(const double* in, double* out, std::ptrdiff_t n) {
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = std::sin(in[i]);
}
void vec_tanh(const double* in, double* out, std::ptrdiff_t n) {
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = std::tanh(in[i]);
}
#endif

}  // namespace gptpinn::detail
