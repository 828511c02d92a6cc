// numeric.hpp — adaptive Simpson quadrature and small numeric helpers
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ndweak/errors.hpp"

namespace ndweak {

namespace detail {

template <typename F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) throw ConsistencyError("adaptive_simpson: max recursion depth reached, residual "
                                           + std::to_string(std::fabs(delta) / 15.0));
    if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
         + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

// Adaptive Simpson on [a, b]; absolute tolerance. Integrand must be finite.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-10, int max_depth = 48) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm))
        throw PhysicsError("adaptive_simpson: non-finite integrand");
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Piecewise variant: split at interior break points (kinks of piecewise-smooth
// profiles), integrating each piece adaptively.
template <typename F>
double adaptive_simpson_pieces(F&& f, double a, double b,
                               const std::vector<double>& breaks, double tol = 1e-10) {
    std::vector<double> cuts;
    cuts.push_back(a);
    for (double c : breaks)
        if (c > a && c < b) cuts.push_back(c);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        acc += adaptive_simpson(f, cuts[i], cuts[i + 1], tol / static_cast<double>(cuts.size()));
    return acc;
}

inline bool nearly_equal(double x, double y, double tol) { return std::fabs(x - y) <= tol; }

} // namespace ndweak
