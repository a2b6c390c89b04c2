#include "aoi/kernels.hpp"

namespace aoi::kern {

namespace {

using DotFn = double (*)(const double*, const double*, std::size_t);
using MinMaxFn = MinMax (*)(const double*, const double*, std::size_t);
using SubFn = void (*)(double*, double, std::size_t);

struct Dispatch {
    DotFn dot = dot_scalar;
    MinMaxFn diff_minmax = diff_minmax_scalar;
    SubFn sub_scalar = sub_scalar_scalar;
    const char* name = "scalar";
};

Dispatch select() {
    Dispatch d;
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        d.dot = dot_avx2;
        d.diff_minmax = diff_minmax_avx2;
        d.sub_scalar = sub_scalar_avx2;
        d.name = "avx2";
    }
#endif
    return d;
}

const Dispatch& dispatch() {
    static const Dispatch d = select();
    return d;
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
    return dispatch().dot(a, b, n);
}

MinMax diff_minmax(const double* a, const double* b, std::size_t n) {
    return dispatch().diff_minmax(a, b, n);
}

void sub_scalar(double* a, double c, std::size_t n) {
    dispatch().sub_scalar(a, c, n);
}

const char* backend() { return dispatch().name; }

}  // namespace aoi::kern
