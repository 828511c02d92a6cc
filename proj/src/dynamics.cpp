// dynamics.cpp
#include "ndweak/dynamics.hpp"

#include <cmath>
#include <memory>

#include "ndweak/errors.hpp"
#include "ndweak/numeric.hpp"

namespace ndweak::dynamics {

namespace {

// Dense cumulative integral table with exact endpoint slopes (cubic Hermite
// interpolation between nodes; composite Simpson per interval).
std::function<double(double)> cumulative_of(std::function<double(double)> g, double tau,
                                            std::size_t n_intervals = 16384) {
    auto nodes = std::make_shared<std::vector<double>>(n_intervals + 1, 0.0);
    const double h = tau / static_cast<double>(n_intervals);
    double acc = 0.0;
    for (std::size_t i = 0; i < n_intervals; ++i) {
        const double a = static_cast<double>(i) * h;
        acc += h / 6.0 * (g(a) + 4.0 * g(a + 0.5 * h) + g(a + h));
        (*nodes)[i + 1] = acc;
    }
    return [nodes, g = std::move(g), h, tau, n_intervals](double s) {
        if (s <= 0.0) return 0.0;
        if (s >= tau) return nodes->back();
        const double t = s / h;
        std::size_t i = std::min(static_cast<std::size_t>(t), n_intervals - 1);
        const double u = t - static_cast<double>(i);
        const double s0 = static_cast<double>(i) * h;
        const double f0 = (*nodes)[i], f1 = (*nodes)[i + 1];
        const double d0 = g(s0) * h, d1 = g(s0 + h) * h;
        const double u2 = u * u, u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * f0 + (u3 - 2 * u2 + u) * d0
             + (-2 * u3 + 3 * u2) * f1 + (u3 - u2) * d1;
    };
}

} // namespace

CouplingProfile::CouplingProfile(double tau, double lambda, std::function<double(double)> g,
                                 std::function<double(double)> h, std::vector<double> breaks,
                                 std::string name)
    : tau_(tau), lambda_(lambda), g_(std::move(g)), h_(std::move(h)),
      breaks_(std::move(breaks)), name_(std::move(name)) {
    if (!(tau_ > 0.0)) throw PhysicsError("CouplingProfile: tau must be > 0");
    const double total = adaptive_simpson_pieces(g_, 0.0, tau_, breaks_, 1e-12);
    if (std::fabs(total - 1.0) > 1e-10)
        throw PhysicsError("CouplingProfile: profile must integrate to 1 (got "
                           + std::to_string(total) + ")");
    for (unsigned n = 0; n < 4; ++n) {
        moments_[n] = adaptive_simpson_pieces(
            [this, n](double s) {
                const double hs = h_(s);
                return std::pow(hs, static_cast<int>(n)) * (1.0 - hs);
            },
            0.0, tau_, breaks_, 1e-12);
    }
}

double CouplingProfile::tau_n(unsigned n) const {
    if (n >= moments_.size()) throw PhysicsError("CouplingProfile::tau_n: n must be <= 3");
    return moments_[n];
}

CouplingProfile CouplingProfile::constant(double tau, double lambda) {
    return CouplingProfile(tau, lambda,
                           [tau](double) { return 1.0 / tau; },
                           [tau](double s) { return std::clamp(s / tau, 0.0, 1.0); },
                           {}, "constant");
}

CouplingProfile CouplingProfile::triangular(double tau, double lambda) {
    auto g = [tau](double t) {
        if (t < 0.0 || t > tau) return 0.0;
        return t <= 0.5 * tau ? 4.0 * t / (tau * tau) : 4.0 * (tau - t) / (tau * tau);
    };
    auto h = [tau](double s) {
        s = std::clamp(s, 0.0, tau);
        if (s <= 0.5 * tau) return 2.0 * s * s / (tau * tau);
        const double r = tau - s;
        return 1.0 - 2.0 * r * r / (tau * tau);
    };
    return CouplingProfile(tau, lambda, g, h, {0.5 * tau}, "triangular");
}

CouplingProfile CouplingProfile::raised_cosine(double tau, double lambda) {
    const double w = 2.0 * M_PI / tau;
    auto g = [tau, w](double t) {
        if (t < 0.0 || t > tau) return 0.0;
        return (1.0 - std::cos(w * t)) / tau;
    };
    auto h = [tau, w](double s) {
        s = std::clamp(s, 0.0, tau);
        return s / tau - std::sin(w * s) / (2.0 * M_PI);
    };
    return CouplingProfile(tau, lambda, g, h, {}, "raised-cosine");
}

CouplingProfile CouplingProfile::custom(double tau, double lambda,
                                        std::function<double(double)> g,
                                        std::function<double(double)> h,
                                        std::vector<double> breaks, std::string name) {
    if (!h) h = cumulative_of(g, tau);
    return CouplingProfile(tau, lambda, std::move(g), std::move(h), std::move(breaks),
                           std::move(name));
}

double hamiltonian_phase(double a, double k, const CouplingProfile& profile,
                         const probe::DispersionRelation& dispersion, double tol) {
    const double la = profile.lambda() * a;
    return adaptive_simpson_pieces(
        [&](double s) { return dispersion.omega(k - la * (1.0 - profile.h(s))); },
        0.0, profile.tau(), profile.breaks(), tol);
}

double hamiltonian_phase_closed(double a, double k, const CouplingProfile& profile, double mass) {
    const double la = profile.lambda() * a;
    return (k * k * profile.tau() - 2.0 * k * la * profile.tau_n(0)
            + la * la * (profile.tau_n(0) - profile.tau_n(1))) / (2.0 * mass);
}

PropagatorValue analytic_propagator(double k, double /*k0*/, double a,
                                    const CouplingProfile& profile,
                                    const probe::DispersionRelation& dispersion) {
    PropagatorValue v;
    v.shift = profile.lambda() * a;
    v.phase = dispersion.is_quadratic()
                  ? hamiltonian_phase_closed(a, k, profile, *dispersion.quadratic_mass)
                  : hamiltonian_phase(a, k, profile, dispersion);
    return v;
}

PropagationResult numeric_propagate_oracle(const Grid& grid, const std::vector<Complex>& psi0,
                                           const std::function<double(double)>& omega,
                                           const std::function<double(double)>& f,
                                           double t_final, std::size_t steps) {
    if (steps < 1) throw PhysicsError("numeric_propagate_oracle: steps must be >= 1");
    if (psi0.size() != grid.n) throw PhysicsError("numeric_propagate_oracle: state size mismatch");
    PropagationResult res;
    res.psi = psi0;
    const double eps = t_final / static_cast<double>(steps);
    double sigma = 0.0;
    for (std::size_t j = 0; j < steps; ++j) {
        sigma += eps * f(eps * static_cast<double>(j));
        for (std::size_t i = 0; i < grid.n; ++i) {
            const double ph = eps * omega(grid[i] + sigma);
            res.psi[i] *= Complex(std::cos(ph), -std::sin(ph));
        }
    }
    res.total_shift = sigma;
    res.grid = Grid(grid.k0 + sigma, grid.dk, grid.n);
    return res;
}

std::vector<Complex> resample(const PropagationResult& result, const Grid& target) {
    const Grid& g = result.grid;
    std::vector<Complex> out(target.n);
    for (std::size_t i = 0; i < target.n; ++i) {
        const double k = target[i];
        if (k < g.front() || k > g.back())
            throw PhysicsError("resample: shifted support does not cover target point");
        const double t = (k - g.k0) / g.dk;
        const auto j = std::min(static_cast<std::size_t>(t), g.n - 2);
        const double u = t - static_cast<double>(j);
        // Catmull-Rom, clamped at the edges
        const auto at = [&](std::ptrdiff_t idx) {
            idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(g.n) - 1);
            return result.psi[static_cast<std::size_t>(idx)];
        };
        const Complex p0 = at(static_cast<std::ptrdiff_t>(j) - 1), p1 = at(j),
                      p2 = at(j + 1), p3 = at(j + 2);
        out[i] = 0.5 * ((2.0 * p1) + (-p0 + p2) * u + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * (u * u)
                        + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * (u * u * u));
    }
    return out;
}

std::vector<Complex> analytic_evolution(const Grid& grid,
                                        const std::function<Complex(double)>& psi0,
                                        const std::function<double(double)>& omega,
                                        const std::function<double(double)>& F_cumulative,
                                        double t_final, double tol) {
    const double F_total = F_cumulative(t_final);
    std::vector<Complex> out(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double k = grid[i];
        const double phase = adaptive_simpson(
            [&](double s) { return omega(k - (F_total - F_cumulative(s))); }, 0.0, t_final, tol);
        out[i] = std::exp(Complex(0.0, -phase)) * psi0(k - F_total);
    }
    return out;
}

double l2_norm(const Grid& grid, const std::vector<Complex>& psi) {
    std::vector<double> sq(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) sq[i] = std::norm(psi[i]);
    return std::sqrt(trapezoid(grid, sq));
}

double l2_distance(const Grid& grid, const std::vector<Complex>& a, const std::vector<Complex>& b) {
    if (a.size() != b.size()) throw PhysicsError("l2_distance: size mismatch");
    std::vector<double> sq(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) sq[i] = std::norm(a[i] - b[i]);
    return std::sqrt(trapezoid(grid, sq));
}

} // namespace ndweak::dynamics
