// expansion.cpp
#include "ndweak/expansion.hpp"

#include <cmath>
#include <memory>

#include "ndweak/errors.hpp"
#include "ndweak/numeric.hpp"

namespace ndweak::expansion {

namespace {

Complex trapz_c(const Grid& g, const std::vector<Complex>& v) { return trapezoid(g, v); }

// Scalar averages and covariances shared by both probe backends.
void finish_context(ExpansionContext& ctx) {
    const Grid& g = ctx.grid;
    const std::size_t n = g.n;
    ctx.w1.resize(n);
    ctx.w2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ctx.w1[i] = ctx.dispersion.omega_d1(g[i]);
        ctx.w2[i] = ctx.dispersion.omega_d2(g[i]);
    }
    auto integral = [&](auto&& weight) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = weight(i);
        return trapezoid(g, v);
    };
    ctx.avg_x = integral([&](std::size_t i) { return ctx.m1[i]; });
    ctx.avg_x2 = integral([&](std::size_t i) { return ctx.m2[i]; });
    ctx.avg_k = integral([&](std::size_t i) { return g[i] * ctx.m0[i]; });
    ctx.avg_w1 = integral([&](std::size_t i) { return ctx.w1[i] * ctx.m0[i]; });
    ctx.avg_w1_sq = integral([&](std::size_t i) { return ctx.w1[i] * ctx.w1[i] * ctx.m0[i]; });
    ctx.avg_x_w1 = integral([&](std::size_t i) { return ctx.w1[i] * ctx.m1[i]; });
    ctx.avg_w2 = integral([&](std::size_t i) { return ctx.w2[i] * ctx.m0[i]; });
    ctx.avg_x_tau0 = ctx.avg_x + ctx.tau0 * ctx.avg_w1;
    ctx.avg_x2_tau0 = ctx.avg_x2 + 2.0 * ctx.tau0 * ctx.avg_x_w1
                    + ctx.tau0 * ctx.tau0 * ctx.avg_w1_sq;
    const double avg_k_xt0 = integral(
        [&](std::size_t i) { return g[i] * (ctx.m1[i] + ctx.tau0 * ctx.w1[i] * ctx.m0[i]); });
    ctx.cov_xt0_k = avg_k_xt0 - ctx.avg_x_tau0 * ctx.avg_k;
}

} // namespace

ExpansionContext make_context(const core::SystemSpec& sys, const core::DensityMatrix& rho_i,
                              const core::PostselectionScheme& scheme,
                              const probe::GaussianProbe& probe,
                              const dynamics::CouplingProfile& profile,
                              const probe::DispersionRelation& dispersion,
                              std::optional<Grid> grid) {
    const core::DensityMatrix rho_f = core::postselected_state(scheme);
    ExpansionContext ctx{.lambda = profile.lambda(),
                         .wv = core::weak_values(rho_i, rho_f, sys),
                         .a_scale = sys.eigenvalue_scale(),
                         .tau = profile.tau(),
                         .tau0 = profile.tau_n(0),
                         .tau1 = profile.tau_n(1),
                         .t_v = profile.t_v(),
                         .dispersion = dispersion,
                         .delta_k = probe.delta_k(),
                         .kappa_k = probe.kappa_k(),
                         .grid = grid ? *grid : probe.default_grid(),
                         .sys = sys,
                         .rho_i = rho_i,
                         .rho_f = rho_f};
    const std::size_t n = ctx.grid.n;
    ctx.m0.resize(n);
    ctx.m1.resize(n);
    ctx.m2.resize(n);
    const double xb = probe.xbar();
    const double x2 = xb * xb + probe.delta_x() * probe.delta_x();
    for (std::size_t i = 0; i < n; ++i) {
        const double p = probe.p0(ctx.grid[i]);
        ctx.m0[i] = p;
        ctx.m1[i] = p * xb;
        ctx.m2[i] = p * x2;
    }
    ctx.p0 = [probe](double k) { return probe.p0(k); };
    ctx.p0_d1 = [probe](double k) { return probe.p0_d1(k); };
    ctx.p0_d2 = [probe](double k) { return probe.p0_d2(k); };
    ctx.f_m1 = [probe, xb](double k) { return probe.p0(k) * xb; };
    ctx.f_m1_d1 = [probe, xb](double k) { return probe.p0_d1(k) * xb; };
    ctx.f_m2 = [probe, x2](double k) { return probe.p0(k) * x2; };
    const double dx2 = probe.delta_x() * probe.delta_x();
    ctx.phi0 = [probe, xb, dx2](double k, double chi) {
        return probe.p0(k) * std::exp(Complex(-0.5 * chi * chi * dx2, chi * xb));
    };
    ctx.phi1 = [probe, xb, dx2](double k, double chi) {
        const Complex mu(xb, chi * dx2);
        return probe.p0(k) * mu * std::exp(Complex(-0.5 * chi * chi * dx2, chi * xb));
    };
    ctx.phi2 = [probe, xb, dx2](double k, double chi) {
        const Complex mu(xb, chi * dx2);
        return probe.p0(k) * (mu * mu + dx2) * std::exp(Complex(-0.5 * chi * chi * dx2, chi * xb));
    };
    finish_context(ctx);
    return ctx;
}

ExpansionContext make_context(const core::SystemSpec& sys, const core::DensityMatrix& rho_i,
                              const core::PostselectionScheme& scheme,
                              const probe::GridProbe& probe,
                              const dynamics::CouplingProfile& profile,
                              const probe::DispersionRelation& dispersion) {
    const core::DensityMatrix rho_f = core::postselected_state(scheme);
    ExpansionContext ctx{.lambda = profile.lambda(),
                         .wv = core::weak_values(rho_i, rho_f, sys),
                         .a_scale = sys.eigenvalue_scale(),
                         .tau = profile.tau(),
                         .tau0 = profile.tau_n(0),
                         .tau1 = profile.tau_n(1),
                         .t_v = profile.t_v(),
                         .dispersion = dispersion,
                         .grid = probe.grid(),
                         .sys = sys,
                         .rho_i = rho_i,
                         .rho_f = rho_f};
    const std::size_t n = ctx.grid.n;
    ctx.m0.resize(n);
    for (std::size_t i = 0; i < n; ++i) ctx.m0[i] = probe.p0_at(i);
    ctx.m1 = probe.conditional_m1();
    ctx.m2 = probe.conditional_m2();

    // derivative table of m1 (4th-order central differences)
    auto m1_table = std::make_shared<std::vector<double>>(ctx.m1);
    auto m1d_table = std::make_shared<std::vector<double>>(n, 0.0);
    const double h = ctx.grid.dk;
    for (std::size_t i = 2; i + 2 < n; ++i)
        (*m1d_table)[i] = (-(*m1_table)[i + 2] + 8.0 * (*m1_table)[i + 1]
                           - 8.0 * (*m1_table)[i - 1] + (*m1_table)[i - 2]) / (12.0 * h);
    auto m2_table = std::make_shared<std::vector<double>>(ctx.m2);
    const Grid g = ctx.grid;
    auto interp = [g](const std::shared_ptr<std::vector<double>>& tab, double k) {
        if (!g.contains(k)) throw PhysicsError("ExpansionContext: k outside probe grid");
        double t = std::clamp((k - g.k0) / g.dk, 0.0, static_cast<double>(g.n - 1));
        const auto i = std::min(static_cast<std::size_t>(t), g.n - 2);
        const double u = t - static_cast<double>(i);
        return (1.0 - u) * (*tab)[i] + u * (*tab)[i + 1];
    };
    ctx.p0 = [probe](double k) { return probe.p0(k); };
    ctx.p0_d1 = [probe](double k) { return probe.p0_d1(k); };
    ctx.p0_d2 = [probe](double k) { return probe.p0_d2(k); };
    ctx.f_m1 = [interp, m1_table](double k) { return interp(m1_table, k); };
    ctx.f_m1_d1 = [interp, m1d_table](double k) { return interp(m1d_table, k); };
    ctx.f_m2 = [interp, m2_table](double k) { return interp(m2_table, k); };
    ctx.phi0 = [probe](double k, double chi) { return probe.rho0(k - 0.5 * chi, k + 0.5 * chi); };
    const double hc = ctx.grid.dk;
    ctx.phi1 = [probe, hc](double k, double chi) {
        const Complex hi = probe.rho0(k - 0.5 * (chi + hc), k + 0.5 * (chi + hc));
        const Complex lo = probe.rho0(k - 0.5 * (chi - hc), k + 0.5 * (chi - hc));
        return Complex(0.0, -1.0) * (hi - lo) / (2.0 * hc);
    };
    ctx.phi2 = [probe, hc](double k, double chi) {
        const Complex hi = probe.rho0(k - 0.5 * (chi + hc), k + 0.5 * (chi + hc));
        const Complex mid = probe.rho0(k - 0.5 * chi, k + 0.5 * chi);
        const Complex lo = probe.rho0(k - 0.5 * (chi - hc), k + 0.5 * (chi - hc));
        return -(hi - 2.0 * mid + lo) / (hc * hc);
    };

    // probe scales from the tables
    std::vector<double> kv(n), k2v(n);
    for (std::size_t i = 0; i < n; ++i) {
        kv[i] = g[i] * ctx.m0[i];
        k2v[i] = g[i] * g[i] * ctx.m0[i];
    }
    const double mk = trapezoid(g, kv), mk2 = trapezoid(g, k2v);
    ctx.delta_k = std::sqrt(std::max(mk2 - mk * mk, 1e-300));
    finish_context(ctx);
    const double dx2 = std::max(ctx.avg_x2 - ctx.avg_x * ctx.avg_x, 1e-300);
    ctx.kappa_k = 1.0 / std::sqrt(dx2);
    return ctx;
}

double p_post_expanded(const ExpansionContext& ctx) {
    const auto& a = ctx.wv;
    const double l = ctx.lambda;
    return a.alpha00 - 2.0 * l * ctx.avg_x_tau0 * a.alpha01.imag()
         + l * l * ((a.alpha11 - a.alpha02.real()) * ctx.avg_x2_tau0
                    - a.alpha02.imag() * ctx.tau1 * ctx.avg_w2);
}

double normalization(const ExpansionContext& ctx) {
    if (ctx.wv.nopps)
        throw PhysicsError("normalization: alpha00 vanishes (NOPPS); use the raw quadratic forms");
    return p_post_expanded(ctx) / ctx.wv.alpha00;
}

Complex characteristic_function_k(const ExpansionContext& ctx, double theta) {
    const Grid& g = ctx.grid;
    const std::size_t n = g.n;
    std::vector<Complex> e0(n), e1(n), e2(n), ew(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Complex ph = std::exp(Complex(0.0, theta * g[i]));
        const double xt = ctx.m1[i] + ctx.tau0 * ctx.w1[i] * ctx.m0[i];
        const double x2t = ctx.m2[i] + 2.0 * ctx.tau0 * ctx.w1[i] * ctx.m1[i]
                         + ctx.tau0 * ctx.tau0 * ctx.w1[i] * ctx.w1[i] * ctx.m0[i];
        e0[i] = ph * ctx.m0[i];
        e1[i] = ph * xt;
        e2[i] = ph * x2t;
        ew[i] = ph * ctx.w2[i] * ctx.m0[i];
    }
    const Complex E0 = trapz_c(g, e0), E1 = trapz_c(g, e1), E2 = trapz_c(g, e2),
                  Ew = trapz_c(g, ew);
    const auto& a = ctx.wv;
    const double l = ctx.lambda;
    const Complex i1(0.0, 1.0);
    const Complex num = a.alpha00 * E0
        + l * (i1 * theta * a.alpha01.real() * E0 - 2.0 * a.alpha01.imag() * E1)
        + l * l * ((a.alpha11 - a.alpha02.real()) * E2
                   - 0.25 * theta * theta * (a.alpha11 + a.alpha02.real()) * E0
                   - a.alpha02.imag() * (i1 * theta * E1 + ctx.tau1 * Ew));
    const double den = p_post_expanded(ctx);
    return num / den;
}

double interpolating_probability(const ExpansionContext& ctx, double k) {
    const auto& a = ctx.wv;
    const double l = ctx.lambda;
    const double p = ctx.p0(k), p1 = ctx.p0_d1(k), p2 = ctx.p0_d2(k);
    const double w1 = ctx.dispersion.omega_d1(k), w2 = ctx.dispersion.omega_d2(k);
    const double mm1 = ctx.f_m1(k), mm2 = ctx.f_m2(k);
    const double xt = mm1 + ctx.tau0 * w1 * p;                       // P0 * xbar_{tau0|k}
    const double x2t = mm2 + 2.0 * ctx.tau0 * w1 * mm1
                     + ctx.tau0 * ctx.tau0 * w1 * w1 * p;            // P0 * avg(x^2_tau0)|k
    const double d_xt = ctx.f_m1_d1(k) + ctx.tau0 * (w2 * p + w1 * p1);
    return p * a.alpha00 - 2.0 * l * xt * a.alpha01.imag() - l * p1 * a.alpha01.real()
         + l * l * ((a.alpha11 - a.alpha02.real()) * x2t
                    + 0.25 * p2 * (a.alpha11 + a.alpha02.real())
                    + a.alpha02.imag() * (d_xt - ctx.tau1 * w2 * p));
}

exact_stats::ReadoutDistribution interpolating_distribution(const ExpansionContext& ctx,
                                                            std::optional<Grid> grid) {
    const Grid g = grid ? *grid : ctx.grid;
    const double den = p_post_expanded(ctx);
    if (!(den > 1e-300))
        throw PhysicsError("interpolating_distribution: expanded postselection probability "
                           "is not positive");
    std::vector<double> q(g.n);
    for (std::size_t i = 0; i < g.n; ++i) q[i] = interpolating_probability(ctx, g[i]) / den;
    return exact_stats::ReadoutDistribution(g, std::move(q), den, /*enforce_nonnegative=*/false);
}

namespace {
void require_away_from_nopps(const ExpansionContext& ctx, const char* who) {
    if (!core::away_from_nopps(ctx.wv, ctx.a_scale))
        throw PhysicsError(std::string(who) + ": configuration is in the NOPPS regime; "
                           "first-order means are invalid there, use the interpolating "
                           "distribution moments instead");
}
} // namespace

double mean_k_first_order(const ExpansionContext& ctx) {
    require_away_from_nopps(ctx, "mean_k_first_order");
    return ctx.avg_k + ctx.lambda * ctx.wv.A_w.real()
         - 2.0 * ctx.lambda * ctx.cov_xt0_k * ctx.wv.A_w.imag();
}

double mean_x_first_order(const ExpansionContext& ctx) {
    require_away_from_nopps(ctx, "mean_x_first_order");
    const double avg_xt = ctx.avg_x + ctx.tau * ctx.avg_w1;
    const double avg_xt0 = ctx.avg_x_tau0;
    const double cross = ctx.avg_x2 + (ctx.tau + ctx.tau0) * ctx.avg_x_w1
                       + ctx.tau * ctx.tau0 * ctx.avg_w1_sq;
    const double cov = cross - avg_xt * avg_xt0;
    return avg_xt - 2.0 * ctx.lambda * (cov * ctx.wv.A_w.imag()
                                        - ctx.avg_w2 * ctx.t_v * ctx.wv.A_w.real());
}

Complex characteristic_function_x(const ExpansionContext& ctx, double chi) {
    const Grid& g = ctx.grid;
    const std::size_t n = g.n;
    const auto& d = ctx.dispersion;
    Complex T0{}, T1x{}, T1y{}, T2{}, T2k{};
    std::vector<Complex> v0(n), v1x(n), v1y(n), v2(n), v2k(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double k = g[i];
        const double wp = d.omega_d1(k + 0.5 * chi), wm = d.omega_d1(k - 0.5 * chi);
        const double wbar = 0.5 * (wp + wm), dw1 = wp - wm;
        const double dw2 = d.omega_d2(k + 0.5 * chi) - d.omega_d2(k - 0.5 * chi);
        const double domega = d.omega(k + 0.5 * chi) - d.omega(k - 0.5 * chi);
        const Complex ph = std::exp(Complex(0.0, domega * ctx.tau));
        const Complex f0 = ctx.phi0(k, chi), f1 = ctx.phi1(k, chi), f2 = ctx.phi2(k, chi);
        v0[i] = ph * f0;
        v1x[i] = ph * (f1 + ctx.tau0 * wbar * f0);
        v1y[i] = ph * (ctx.t_v * dw1 * f0);
        v2[i] = ph * (f2 + 2.0 * ctx.tau0 * wbar * f1
                      + (ctx.tau0 * ctx.tau0 * wbar * wbar - ctx.t_v * ctx.t_v * dw1 * dw1) * f0);
        v2k[i] = ph * (ctx.tau0 * dw2 * f0);
    }
    T0 = trapz_c(g, v0);
    T1x = trapz_c(g, v1x);
    T1y = trapz_c(g, v1y);
    T2 = trapz_c(g, v2);
    T2k = trapz_c(g, v2k);
    const auto& a = ctx.wv;
    const double l = ctx.lambda;
    const Complex i1(0.0, 1.0);
    const Complex num = a.alpha00 * T0
        - 2.0 * l * (T1x * a.alpha01.imag() - i1 * T1y * a.alpha01.real())
        + l * l * (T2 - 0.5 * i1 * T2k) * a.alpha11;
    // chi = 0 value of the same expression: T0 -> alpha00, T1x -> avg(x_tau0), rest vanish
    const double den = a.alpha00 - 2.0 * l * ctx.avg_x_tau0 * a.alpha01.imag()
                     + l * l * ctx.avg_x2_tau0 * a.alpha11;
    if (!(std::fabs(den) > 1e-300))
        throw PhysicsError("characteristic_function_x: vanishing normalization");
    return num / den;
}

namespace {

// Raw alpha_{m,n} with the postselection state conjugated by the readout
// phase: matrix element (b,c) of U_k^dag rho_f U_k is e^{i[v(c)-v(b)]} rho_f(b,c).
struct TiltedAlphas {
    double a00, a11;
    Complex a01, a02;
};

TiltedAlphas tilted_alphas(const ExpansionContext& ctx, double k) {
    const auto& eig = ctx.sys.eigenvalues;
    const std::size_t D = eig.size();
    const double w1 = ctx.dispersion.omega_d1(k), w2 = ctx.dispersion.omega_d2(k);
    const double l = ctx.lambda;
    std::vector<Complex> u(D);
    for (std::size_t b = 0; b < D; ++b) {
        const double v = l * w1 * ctx.tau0 * eig[b]
                       - 0.5 * l * l * w2 * (ctx.tau0 - ctx.tau1) * eig[b] * eig[b];
        u[b] = std::exp(Complex(0.0, v));
    }
    Complex a00{}, a01{}, a11{}, a02{};
    for (std::size_t b = 0; b < D; ++b) {
        for (std::size_t c = 0; c < D; ++c) {
            const Complex t = (std::conj(u[b]) * u[c]) * ctx.rho_f(b, c) * ctx.rho_i(c, b);
            a00 += t;
            a01 += eig[c] * t;
            a11 += eig[b] * eig[c] * t;
            a02 += eig[c] * eig[c] * t;
        }
    }
    if (std::fabs(a00.imag()) > 1e-10 || std::fabs(a11.imag()) > 1e-10)
        throw ConsistencyError("oscillation weak values: non-real alpha00/alpha11");
    return TiltedAlphas{a00.real(), a11.real(), a01, a02};
}

bool intermediate_regime_flag(const ExpansionContext& ctx) {
    double kH2;
    if (ctx.dispersion.is_quadratic())
        kH2 = *ctx.dispersion.quadratic_mass / ctx.tau0;
    else if (std::fabs(ctx.avg_w2) > 1e-300)
        kH2 = 1.0 / (std::fabs(ctx.avg_w2) * ctx.tau0);
    else
        return false;
    return kH2 < ctx.lambda * ctx.delta_k && ctx.lambda < ctx.kappa_k;
}

} // namespace

OscillationWeakValues oscillation_weak_values(const ExpansionContext& ctx, double k) {
    const TiltedAlphas t = tilted_alphas(ctx, k);
    core::WeakValueSet wv;
    wv.alpha00 = t.a00;
    wv.alpha01 = t.a01;
    wv.alpha11 = t.a11;
    wv.alpha02 = t.a02;
    const double scale = std::max({1.0, wv.alpha11, std::abs(wv.alpha02)});
    wv.nopps = !(wv.alpha00 > 1e-12 * scale);
    if (wv.nopps) {
        wv.A_w = Complex(std::nan(""), std::nan(""));
        wv.B_w = std::nan("");
    } else {
        wv.A_w = wv.alpha01 / wv.alpha00;
        wv.B_w = wv.alpha11 / wv.alpha00;
    }
    return OscillationWeakValues{wv, intermediate_regime_flag(ctx)};
}

exact_stats::ReadoutDistribution oscillation_distribution(const ExpansionContext& ctx,
                                                          std::optional<Grid> grid) {
    const Grid g = grid ? *grid : ctx.grid;
    const double l = ctx.lambda;
    std::vector<double> raw(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double k = g[i];
        const TiltedAlphas a = tilted_alphas(ctx, k);
        const double p = ctx.p0(k), p1 = ctx.p0_d1(k), p2 = ctx.p0_d2(k);
        const double mm1 = ctx.f_m1(k), mm2 = ctx.f_m2(k);
        raw[i] = p * a.a00 - 2.0 * l * mm1 * a.a01.imag() - l * p1 * a.a01.real()
               + l * l * ((a.a11 - a.a02.real()) * mm2 + 0.25 * p2 * (a.a11 + a.a02.real())
                          + a.a02.imag() * ctx.f_m1_d1(k));
    }
    const double norm = trapezoid(g, raw);
    if (!(norm > 1e-300))
        throw PhysicsError("oscillation_distribution: non-positive normalization");
    std::vector<double> q(g.n);
    for (std::size_t i = 0; i < g.n; ++i) q[i] = raw[i] / norm;
    return exact_stats::ReadoutDistribution(g, std::move(q), norm, /*enforce_nonnegative=*/false);
}

} // namespace ndweak::expansion
