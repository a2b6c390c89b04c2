#include "aoi/kernels.hpp"

namespace aoi::kern {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

MinMax diff_minmax_scalar(const double* a, const double* b, std::size_t n) {
    double lo = a[0] - b[0];
    double hi = lo;
    for (std::size_t i = 1; i < n; ++i) {
        double d = a[i] - b[i];
        if (d < lo) lo = d;
        if (d > hi) hi = d;
    }
    return {lo, hi};
}

void sub_scalar_scalar(double* a, double c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) a[i] -= c;
}

}  // namespace aoi::kern
