// SPDX-License-Identifier: Apache-2.0

#include "nfbt/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace nfbt {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Classic recursive adaptive Simpson with Richardson correction. The
// integrands are entire, so the error estimate is reliable; depth is capped
// defensively anyway.
template <typename F>
double simpson(const F& f, double a, double fa, double b, double fb, double& fm) {
    double m = 0.5 * (a + b);
    fm = f(m);
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adapt(const F& f, double a, double fa, double m, double fm, double b,
             double fb, double whole, double tol, int depth) {
    double flm, frm;
    double left = simpson(f, a, fa, m, fm, flm);
    double right = simpson(f, m, fm, b, fb, frm);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adapt(f, a, fa, 0.5 * (a + m), flm, m, fm, left, 0.5 * tol, depth - 1) +
           adapt(f, m, fm, 0.5 * (m + b), frm, b, fb, right, 0.5 * tol, depth - 1);
}

// Integrates f over [0, x] with absolute tolerance tol. The domain is
// pre-split into unit panels so the first Simpson estimate never averages
// over many oscillation cycles.
template <typename F>
double integrate_from_zero(const F& f, double x, double tol) {
    if (x == 0.0)
        return 0.0;
    double sign = x < 0.0 ? -1.0 : 1.0;
    double upper = std::abs(x);
    int panels = static_cast<int>(std::ceil(upper));
    double h = upper / panels;
    double panel_tol = tol / panels;
    double total = 0.0;
    for (int k = 0; k < panels; ++k) {
        double a = k * h;
        double b = (k + 1 == panels) ? upper : (k + 1) * h;
        double fa = f(a);
        double fb = f(b);
        double fm;
        double whole = simpson(f, a, fa, b, fb, fm);
        total += adapt(f, a, fa, 0.5 * (a + b), fm, b, fb, whole, panel_tol, 48);
    }
    return sign * total;
}

constexpr double kQuadTol = 1e-11;

void check_finite(double x) {
    if (!std::isfinite(x))
        throw std::domain_error("fresnel integral: argument must be finite");
}

} // namespace

double fresnel_c(double x) {
    check_finite(x);
    // even integrand => C is odd; integrate over |x| once
    return integrate_from_zero([](double t) { return std::cos(0.5 * kPi * t * t); }, x,
                               kQuadTol);
}

double fresnel_s(double x) {
    check_finite(x);
    return integrate_from_zero([](double t) { return std::sin(0.5 * kPi * t * t); }, x,
                               kQuadTol);
}

BetaParams beta_params(double r0, double theta0, double delta, int q_count,
                       int interval, double d0) {
    if (!(r0 > 0.0))
        throw std::domain_error("beta_params: user range r0 must be positive");
    if (std::abs(theta0) >= 1.0)
        throw std::domain_error(
            "beta_params: |theta0| must be < 1 (endfire direction is singular)");
    if (q_count < 1 || interval < 1)
        throw std::domain_error("beta_params: Q and U must be >= 1");
    if (!(d0 > 0.0))
        throw std::domain_error("beta_params: antenna spacing must be positive");

    double one_minus = 1.0 - theta0 * theta0;
    BetaParams p;
    p.beta1 = delta * std::sqrt(r0 / (d0 * one_minus));
    p.beta2 = 0.5 * q_count * interval * std::sqrt(d0 * one_minus / r0);
    return p;
}

double closed_form_pattern(const BetaParams& params) {
    if (!(params.beta2 > 0.0))
        throw std::domain_error("closed_form_pattern: beta2 must be positive");
    // far-field limit: the integration window shrinks to a point where the
    // integrand has unit magnitude
    if (params.beta2 < 1e-6)
        return 1.0;
    double hi = params.beta1 + params.beta2;
    double lo = params.beta1 - params.beta2;
    double c_hat = fresnel_c(hi) - fresnel_c(lo);
    double s_hat = fresnel_s(hi) - fresnel_s(lo);
    return std::hypot(c_hat, s_hat) / (2.0 * params.beta2);
}

} // namespace nfbt
