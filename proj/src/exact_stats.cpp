// exact_stats.cpp
#include "ndweak/exact_stats.hpp"

#include <cmath>
#include <limits>

#include "ndweak/errors.hpp"
#include "ndweak/numeric.hpp"

namespace ndweak::exact_stats {

DecoherenceModel DecoherenceModel::from_microscopic(double gamma, double kB_T, double eps,
                                                    double mass) {
    if (gamma < 0.0 || kB_T <= 0.0 || eps <= 0.0 || mass <= 0.0)
        throw PhysicsError("DecoherenceModel: parameters must be positive (gamma may be 0)");
    return DecoherenceModel{gamma, kB_T, eps, mass};
}

DecoherenceModel DecoherenceModel::from_scale(double K_D, double eps, double tau) {
    if (!(eps > 0.0) || !(tau > 0.0))
        throw PhysicsError("DecoherenceModel::from_scale: eps and tau must be > 0");
    DecoherenceModel d;
    d.epsilon = eps;
    d.kB_T = 1.0;
    d.mass = 1.0;
    if (std::isinf(K_D)) {
        d.gamma = 0.0;
    } else {
        if (!(K_D > 0.0)) throw PhysicsError("DecoherenceModel::from_scale: K_D must be > 0");
        d.gamma = 2.0 / (K_D * K_D * tau * tau * tau);
    }
    return d;
}

double DecoherenceModel::K_D(double tau) const {
    const double c = gamma * kB_T * tau * tau * tau / (2.0 * mass);
    if (c <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / std::sqrt(c);
}

double DecoherenceModel::off_diagonal_factor(double lambda, double a_diff, double tau) const {
    const double e = lambda * lambda * a_diff * a_diff * gamma * kB_T * epsilon
                   * tau * tau * tau / mass;
    return std::exp(-e);
}

ReadoutDistribution::ReadoutDistribution(Grid grid, std::vector<double> values, double p_post,
                                         bool enforce_nonnegative)
    : grid_(grid), values_(std::move(values)), p_post_(p_post) {
    if (values_.size() != grid_.n)
        throw PhysicsError("ReadoutDistribution: value count does not match grid");
    if (enforce_nonnegative) {
        for (double v : values_)
            if (v < -1e-12)
                throw ConsistencyError("ReadoutDistribution: negative value "
                                       + std::to_string(v) + " in an exact distribution");
    }
    const double norm = trapezoid(grid_, values_);
    if (std::fabs(norm - 1.0) > 1e-8)
        throw ConsistencyError("ReadoutDistribution: normalization drift "
                               + std::to_string(norm - 1.0));
}

double ReadoutDistribution::moment(unsigned n) const {
    if (n > 4) throw PhysicsError("ReadoutDistribution::moment: n must be <= 4");
    std::vector<double> integrand(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i)
        integrand[i] = std::pow(grid_[i], static_cast<int>(n)) * values_[i];
    return trapezoid(grid_, integrand);
}

Complex ReadoutDistribution::characteristic(double theta) const {
    std::vector<Complex> integrand(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i)
        integrand[i] = std::exp(Complex(0.0, theta * grid_[i])) * values_[i];
    return trapezoid(grid_, integrand);
}

namespace {

// Precomputed per-(a, a') term of eq-level sums. For quadratic dispersion the
// phase difference is linear in k; otherwise it is integrated per point.
struct Term {
    Complex coeff;       // W * <a'|rho_f|a> <a|rho_i|a'> * decoherence factor * exp(i xbar lambda delta)
    double a, ap;        // eigenvalues
    double sbar, delta;  // (a+a')/2, a-a'
    double phase_lin = 0.0, phase_const = 0.0; // DeltaGamma(k) = lin*k + const (quadratic)
};

struct Engine {
    std::vector<Term> terms;
    const probe::GaussianProbe* probe;
    const dynamics::CouplingProfile* profile;
    const probe::DispersionRelation* dispersion;
    bool closed_phase = false;
    double lambda = 0.0;

    double delta_gamma(const Term& t, double k) const {
        if (closed_phase) return t.phase_lin * k + t.phase_const;
        const double la = lambda * t.a, lap = lambda * t.ap;
        return adaptive_simpson_pieces(
            [&](double s) {
                const double u = 1.0 - profile->h(s);
                return dispersion->omega(k - la * u) - dispersion->omega(k - lap * u);
            },
            0.0, profile->tau(), profile->breaks(), 1e-12);
    }

    // Complex sum before the reality check.
    Complex eval(double k) const {
        Complex acc{};
        for (const Term& t : terms) {
            if (t.coeff == Complex{}) continue;
            const double dg = t.delta == 0.0 ? 0.0 : delta_gamma(t, k);
            acc += t.coeff * std::exp(Complex(0.0, -dg))
                 * probe->rho0(k - lambda * t.a, k - lambda * t.ap);
        }
        return acc;
    }
};

Engine build_engine(const core::SystemSpec& sys, const core::DensityMatrix& rho_i,
                    const core::PostselectionScheme& scheme, const probe::GaussianProbe& probe,
                    const dynamics::CouplingProfile& profile,
                    const probe::DispersionRelation& dispersion,
                    const std::optional<DecoherenceModel>& deco, Parts parts) {
    const std::size_t D = sys.dimension();
    if (rho_i.dimension() != D || scheme.dimension() != D)
        throw PhysicsError("exact_stats: input dimensions do not conform to the system");
    const core::DensityMatrix rho_f = core::postselected_state(scheme);
    const double W = scheme.total_weight();
    Engine e;
    e.probe = &probe;
    e.profile = &profile;
    e.dispersion = &dispersion;
    e.lambda = profile.lambda();
    e.closed_phase = dispersion.is_quadratic();
    const double tau0 = profile.tau_n(0), tau1 = profile.tau_n(1);
    for (std::size_t i = 0; i < D; ++i) {
        for (std::size_t j = 0; j < D; ++j) {
            if (parts == Parts::Diagonal && i != j) continue;
            if (parts == Parts::OffDiagonal && i == j) continue;
            Term t;
            t.a = sys.eigenvalues[i];
            t.ap = sys.eigenvalues[j];
            t.sbar = 0.5 * (t.a + t.ap);
            t.delta = t.a - t.ap;
            Complex c = W * rho_f(j, i) * rho_i(i, j);
            if (deco) c *= deco->off_diagonal_factor(e.lambda, t.delta, profile.tau());
            t.coeff = c;
            if (e.closed_phase) {
                const double M = *dispersion.quadratic_mass;
                t.phase_lin = -e.lambda * t.delta * tau0 / M;
                t.phase_const = 0.5 * e.lambda * e.lambda * (t.a * t.a - t.ap * t.ap)
                              * (tau0 - tau1) / M;
            }
            e.terms.push_back(t);
        }
    }
    return e;
}

double real_checked(Complex v) {
    if (std::fabs(v.imag()) > 1e-8)
        throw ConsistencyError("exact_stats: imaginary residue " + std::to_string(v.imag())
                               + " above 1e-8; Hermiticity of the summand is broken");
    return v.real();
}

Grid internal_quadrature_grid(const core::SystemSpec& sys, const probe::GaussianProbe& probe,
                              double lambda) {
    const double half = (10.0 + std::fabs(lambda) * sys.eigenvalue_span()) * probe.delta_k();
    return Grid::spanning(probe.kbar() - half, probe.kbar() + half, 8192);
}

} // namespace

double joint_probability(double k, const core::SystemSpec& sys, const core::DensityMatrix& rho_i,
                         const core::PostselectionScheme& scheme,
                         const probe::GaussianProbe& probe,
                         const dynamics::CouplingProfile& profile,
                         const probe::DispersionRelation& dispersion,
                         const std::optional<DecoherenceModel>& deco, Parts parts) {
    const Engine e = build_engine(sys, rho_i, scheme, probe, profile, dispersion, deco, parts);
    return real_checked(e.eval(k));
}

double postselection_probability(const core::SystemSpec& sys, const core::DensityMatrix& rho_i,
                                 const core::PostselectionScheme& scheme,
                                 const probe::GaussianProbe& probe,
                                 const dynamics::CouplingProfile& profile,
                                 const probe::DispersionRelation& dispersion,
                                 const std::optional<DecoherenceModel>& deco, Parts parts) {
    const Engine e = build_engine(sys, rho_i, scheme, probe, profile, dispersion, deco, parts);
    const Grid g = internal_quadrature_grid(sys, probe, profile.lambda());
    std::vector<Complex> vals(g.n);
    for (std::size_t i = 0; i < g.n; ++i) vals[i] = e.eval(g[i]);
    return real_checked(trapezoid(g, vals));
}

ReadoutDistribution conditional_distribution(const core::SystemSpec& sys,
                                             const core::DensityMatrix& rho_i,
                                             const core::PostselectionScheme& scheme,
                                             const probe::GaussianProbe& probe,
                                             const dynamics::CouplingProfile& profile,
                                             const probe::DispersionRelation& dispersion,
                                             const std::optional<DecoherenceModel>& deco,
                                             std::optional<Grid> grid, Parts parts) {
    const double p_post = postselection_probability(sys, rho_i, scheme, probe, profile,
                                                    dispersion, deco, parts);
    if (!(p_post > 1e-14))
        throw PhysicsError("conditional_distribution: postselection probability below 1e-14, "
                           "postselection impossible");
    const Engine e = build_engine(sys, rho_i, scheme, probe, profile, dispersion, deco, parts);
    const Grid g = grid ? *grid : probe.default_grid();
    std::vector<double> q(g.n);
    for (std::size_t i = 0; i < g.n; ++i) q[i] = real_checked(e.eval(g[i])) / p_post;
    return ReadoutDistribution(g, std::move(q), p_post);
}

std::vector<double> distribution_moments(const ReadoutDistribution& dist, unsigned n_max) {
    if (n_max > 4) throw PhysicsError("distribution_moments: n_max must be <= 4");
    std::vector<double> m(n_max + 1);
    for (unsigned n = 0; n <= n_max; ++n) m[n] = dist.moment(n);
    return m;
}

Complex exact_characteristic_function(const ReadoutDistribution& dist, double theta) {
    return dist.characteristic(theta);
}

} // namespace ndweak::exact_stats
