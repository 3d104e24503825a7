#pragma once

#include <cmath>

namespace gvar::detail {

// Argmax of a unimodal (e.g. concave) function on [lo, hi] by golden-section
// search, to bracket width `tol`.
template <typename Fn>
double golden_section_max(Fn&& f, double lo, double hi, double tol, int max_iter = 200) {
    constexpr double inv_phi = 0.6180339887498948482;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return (a + b) / 2.0;
}

} // namespace gvar::detail
