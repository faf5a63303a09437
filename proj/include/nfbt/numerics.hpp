// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace nfbt {

/// Fresnel cosine integral C(x) = int_0^x cos(pi t^2 / 2) dt.
/// Evaluated by adaptive Simpson quadrature (absolute tolerance ~1e-11);
/// odd in x, |C(x)| <= 0.9 for all real x. Throws std::domain_error on
/// non-finite input.
double fresnel_c(double x);

/// Fresnel sine integral S(x) = int_0^x sin(pi t^2 / 2) dt. Same contract
/// as fresnel_c.
double fresnel_s(double x);

/// Arguments of the closed-form received-beam-pattern model:
///   beta1 = delta * sqrt(r0 / (d0 (1 - theta0^2)))
///   beta2 = (Q U / 2) * sqrt(d0 (1 - theta0^2) / r0)
/// The product beta1 * beta2 equals Q U delta / 2 identically.
struct BetaParams {
    double beta1 = 0.0;
    double beta2 = 0.0;
};

/// Maps a user location and a steering offset onto (beta1, beta2).
///
/// r0       user range in meters (> 0)
/// theta0   user spatial angle, |theta0| < 1 (endfire excluded)
/// delta    spatial-angle offset of the probing beam from theta0
/// q_count  number of active sparse-array elements Q
/// interval antenna activation interval U
/// d0       antenna spacing in meters
BetaParams beta_params(double r0, double theta0, double delta, int q_count,
                       int interval, double d0);

/// Closed-form magnitude of the received beam pattern,
///   |G(b1, b2)| with G = [C(b1+b2) - C(b1-b2) + j(S(b1+b2) - S(b1-b2))] / (2 b2).
/// Even in beta1; tends to 1 as beta2 -> 0 (returned analytically below 1e-6).
/// Throws std::domain_error for beta2 <= 0.
double closed_form_pattern(const BetaParams& params);

} // namespace nfbt
