// AVX2 kernel variants. This translation unit is compiled with -mavx2 -mfma;
// callers must go through the runtime dispatch in kernels.cpp.

#include "aoi/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace aoi::kern {

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double sum = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

MinMax diff_minmax_avx2(const double* a, const double* b, std::size_t n) {
    if (n < 4) return diff_minmax_scalar(a, b, n);
    __m256d vlo = _mm256_sub_pd(_mm256_loadu_pd(a), _mm256_loadu_pd(b));
    __m256d vhi = vlo;
    std::size_t i = 4;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        vlo = _mm256_min_pd(vlo, d);
        vhi = _mm256_max_pd(vhi, d);
    }
    alignas(32) double lo4[4], hi4[4];
    _mm256_store_pd(lo4, vlo);
    _mm256_store_pd(hi4, vhi);
    MinMax r{lo4[0], hi4[0]};
    for (int k = 1; k < 4; ++k) {
        if (lo4[k] < r.min) r.min = lo4[k];
        if (hi4[k] > r.max) r.max = hi4[k];
    }
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        if (d < r.min) r.min = d;
        if (d > r.max) r.max = d;
    }
    return r;
}

void sub_scalar_avx2(double* a, double c, std::size_t n) {
    __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(a + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), vc));
    }
    for (; i < n; ++i) a[i] -= c;
}

}  // namespace aoi::kern

#endif
