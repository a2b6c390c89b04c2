#pragma once

#include <cstddef>

// Small arithmetic kernels used in the value-iteration and belief hot loops.
// Each kernel has a scalar reference implementation and an AVX2 variant;
// the dispatch is resolved once at startup from CPU capabilities.

namespace aoi::kern {

struct MinMax {
    double min;
    double max;
};

// Scalar reference implementations. These stay available unconditionally and
// serve as the oracle for the SIMD equivalence tests.
double dot_scalar(const double* a, const double* b, std::size_t n);
MinMax diff_minmax_scalar(const double* a, const double* b, std::size_t n);
void sub_scalar_scalar(double* a, double c, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double* a, const double* b, std::size_t n);
MinMax diff_minmax_avx2(const double* a, const double* b, std::size_t n);
void sub_scalar_avx2(double* a, double c, std::size_t n);
#endif

// Dispatched entry points.
double dot(const double* a, const double* b, std::size_t n);
// Min and max of a[i] - b[i].
MinMax diff_minmax(const double* a, const double* b, std::size_t n);
// a[i] -= c in place.
void sub_scalar(double* a, double c, std::size_t n);

// Name of the active kernel backend ("avx2" or "scalar").
const char* backend();

}  // namespace aoi::kern
