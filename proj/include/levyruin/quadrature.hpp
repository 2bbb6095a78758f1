#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature for real or complex integrands.

#include <array>
#include <cmath>
#include <complex>
#include <algorithm>
#include <limits>
#include <vector>

namespace levyruin::quad {

struct Tolerance {
    double rel = 1e-12;
    double abs = 1e-300;
    int max_subdivisions = 2000;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the 7-point rule live on the odd Kronrod nodes.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
double magnitude(const T& v) {
    return std::abs(v);
}

template <class T, class F>
void gk15(F& f, double a, double b, T& kronrod, T& gauss) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const T fc = f(c);
    kronrod = fc * kKronrodWeights[7];
    gauss = fc * kGaussWeights[3];
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kKronrodNodes[i];
        const T sum = f(c - dx) + f(c + dx);
        kronrod += sum * kKronrodWeights[i];
        if (i % 2 == 1) gauss += sum * kGaussWeights[i / 2];
    }
    kronrod *= h;
    gauss *= h;
}

template <class T>
struct Segment {
    double a, b;
    T value;
    double error;
};

}  // namespace detail

// Global adaptive integration: the segment with the largest error estimate
// is bisected until the summed estimate meets max(abs, rel * |I|) or the
// subdivision budget runs out.
template <class F>
auto integrate(F f, double a, double b, const Tolerance& tol = {}) {
    using T = decltype(f(a));
    using Seg = detail::Segment<T>;
    std::vector<Seg> segs;
    T k, g;
    detail::gk15(f, a, b, k, g);
    segs.push_back({a, b, k, detail::magnitude(T(k - g))});
    T total = k;
    double error = segs.front().error;
    auto worse = [](const Seg& x, const Seg& y) { return x.error < y.error; };
    const int budget = std::max(1, tol.max_subdivisions);
    for (int it = 0; it < budget; ++it) {
        if (error <= std::max(tol.abs, tol.rel * detail::magnitude(total))) break;
        std::pop_heap(segs.begin(), segs.end(), worse);
        const Seg s = segs.back();
        segs.pop_back();
        const double m = 0.5 * (s.a + s.b);
        if (!(m > s.a && m < s.b)) {
            // Interval exhausted at machine resolution; keep its estimate.
            segs.push_back({s.a, s.b, s.value, 0.0});
            std::push_heap(segs.begin(), segs.end(), worse);
            error -= s.error;
            continue;
        }
        T kl, gl, kr, gr;
        detail::gk15(f, s.a, m, kl, gl);
        detail::gk15(f, m, s.b, kr, gr);
        const double el = detail::magnitude(T(kl - gl));
        const double er = detail::magnitude(T(kr - gr));
        segs.push_back({s.a, m, kl, el});
        std::push_heap(segs.begin(), segs.end(), worse);
        segs.push_back({m, s.b, kr, er});
        std::push_heap(segs.begin(), segs.end(), worse);
        total += kl + kr - s.value;
        error += el + er - s.error;
        if (it % 64 == 63) {
            // Refresh the running sums to limit cancellation drift.
            total = T{};
            error = 0.0;
            for (const auto& x : segs) {
                total += x.value;
                error += x.error;
            }
        }
    }
    T sum{};
    for (const auto& x : segs) sum += x.value;
    return sum;
}


// Integral over [a, b] split at interior breakpoints; breakpoints outside
// (a, b) are ignored. Splitting keeps the relative tolerance meaningful
// when the integrand varies over several scales.
template <class F>
auto integrate_pieces(F f, double a, double b, std::initializer_list<double> breaks, const Tolerance& tol = {}) {
    using T = decltype(f(a));
    T total{};
    double lo = a;
    for (double x : breaks) {
        if (x <= lo || x >= b) continue;
        total += integrate(f, lo, x, tol);
        lo = x;
    }
    total += integrate(f, lo, b, tol);
    return total;
}

// Integral over [a, inf) by the substitution x = a + s/(1-s). Gauss nodes
// never touch s = 1, so integrable endpoint behaviour is harmless.
template <class F>
auto integrate_to_infinity(F f, double a, const Tolerance& tol = {}) {
    auto g = [&](double s) {
        const double one_minus = 1.0 - s;
        const double x = a + s / one_minus;
        return f(x) * (1.0 / (one_minus * one_minus));
    };
    return integrate(g, 0.0, 1.0, tol);
}

// [0, inf) integral with a finite body [0, body] handled directly.
template <class F>
auto integrate_half_line(F f, double body, const Tolerance& tol = {}) {
    return integrate(f, 0.0, body, tol) + integrate_to_infinity(f, body, tol);
}

}  // namespace levyruin::quad
