// expansion.hpp — controlled weak-coupling expansion: postselection
// probability, characteristic functions for k and x, the interpolating
// probability formula, first-order averages, and the coherent-oscillation
// prescription.
//
// All second-order forms retain the full quadratic structure in the normal
// weak values (alpha11 together with alpha02/alpha20); numerators and the
// normalization N are kept as quadratic polynomials in lambda and divided
// only at the end, never expanded as reciprocals, so every expression stays
// finite and normalized through the NOPPS regime. The expansion works with
// the W = 1 convention (W cancels in every conditional quantity).
#pragma once

#include <complex>
#include <functional>
#include <optional>

#include "ndweak/core.hpp"
#include "ndweak/dynamics.hpp"
#include "ndweak/exact_stats.hpp"
#include "ndweak/grid.hpp"
#include "ndweak/probe.hpp"

namespace ndweak::expansion {

using Complex = std::complex<double>;

// Precomputed phase-space machinery for one measurement configuration.
// m0 = P0(k), m1 = Int x Pi dx, m2 = Int x^2 Pi dx are conditional-moment
// products (never ratios), tabulated on 'grid' and available pointwise.
struct ExpansionContext {
    double lambda = 0.0;
    core::WeakValueSet wv;
    double a_scale = 1.0;
    double tau = 0.0, tau0 = 0.0, tau1 = 0.0, t_v = 0.0;
    probe::DispersionRelation dispersion;
    double delta_k = 1.0, kappa_k = 1.0;

    Grid grid;
    std::vector<double> m0, m1, m2; // tables on grid
    std::vector<double> w1, w2;     // omega', omega'' on grid

    std::function<double(double)> p0, p0_d1, p0_d2;
    std::function<double(double)> f_m1, f_m1_d1, f_m2;
    std::function<Complex(double, double)> phi0, phi1, phi2; // (k, chi): Int x^j e^{i chi x} Pi dx

    double avg_x = 0.0, avg_x2 = 0.0, avg_k = 0.0;
    double avg_w1 = 0.0, avg_w1_sq = 0.0, avg_x_w1 = 0.0, avg_w2 = 0.0;
    double avg_x_tau0 = 0.0, avg_x2_tau0 = 0.0;
    double cov_xt0_k = 0.0; // C(x_{tau0}, k)

    core::SystemSpec sys;
    core::DensityMatrix rho_i;
    core::DensityMatrix rho_f;
};

ExpansionContext make_context(const core::SystemSpec& sys, const core::DensityMatrix& rho_i,
                              const core::PostselectionScheme& scheme,
                              const probe::GaussianProbe& probe,
                              const dynamics::CouplingProfile& profile,
                              const probe::DispersionRelation& dispersion,
                              std::optional<Grid> grid = std::nullopt);
ExpansionContext make_context(const core::SystemSpec& sys, const core::DensityMatrix& rho_i,
                              const core::PostselectionScheme& scheme,
                              const probe::GridProbe& probe,
                              const dynamics::CouplingProfile& profile,
                              const probe::DispersionRelation& dispersion);

// Quadratic expansion of the postselection probability (W = 1):
//   alpha00 - 2 lambda avg(x_tau0) Im(alpha01)
//   + lambda^2 [(alpha11 - Re alpha02) avg(x^2_tau0) - Im(alpha02) tau1 avg(omega'')].
double p_post_expanded(const ExpansionContext& ctx);

// N = p_post_expanded / alpha00 (requires alpha00 > 0).
double normalization(const ExpansionContext& ctx);

// Z(theta) from phase-space averages of e^{i theta k} weighted by x_tau0
// moments; Z(0) = 1 identically by construction.
Complex characteristic_function_k(const ExpansionContext& ctx, double theta);

// Numerator N*Q(k) of the interpolating probability (the caller divides by
// p_post_expanded); may dip slightly negative in the far tails.
double interpolating_probability(const ExpansionContext& ctx, double k);

// Normalized interpolating distribution on the given grid.
exact_stats::ReadoutDistribution interpolating_distribution(const ExpansionContext& ctx,
                                                            std::optional<Grid> grid = std::nullopt);

// First-order conditioned averages; valid only away from NOPPS
// (alpha00 >= 0.01 sqrt(alpha11)/max|a|), otherwise they throw and the
// ratio forms (interpolating_distribution moments) must be used instead.
double mean_k_first_order(const ExpansionContext& ctx);
double mean_x_first_order(const ExpansionContext& ctx);

// Characteristic function of the write-in variable x after the interaction,
// normalized so that Z_x(0) = 1.
Complex characteristic_function_x(const ExpansionContext& ctx, double chi);

// Coherent-oscillation prescription: k-dependent weak values computed with
// the postselection state conjugated by the readout-phase unitary
// U_k = exp{i lambda omega'(k) tau0 A - i (lambda^2/2) omega''(k)(tau0-tau1) A^2}
// so that the off-diagonal phase e^{-i[Gamma_a - Gamma_a']} is absorbed
// exactly (rho_f -> U_k^dag rho_f U_k).
struct OscillationWeakValues {
    core::WeakValueSet wv;
    bool intermediate_regime = false; // k_H^2/Delta_k << lambda << kappa_k
};
OscillationWeakValues oscillation_weak_values(const ExpansionContext& ctx, double k);

// Oscillation-regime approximation to Q(k): the interpolating form with
// x_t -> x and the k-dependent weak values, normalized on the grid.
exact_stats::ReadoutDistribution oscillation_distribution(const ExpansionContext& ctx,
                                                          std::optional<Grid> grid = std::nullopt);

} // namespace ndweak::expansion
