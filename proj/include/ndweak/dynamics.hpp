// dynamics.hpp — coupling profile machinery, the Hamiltonian phase Gamma_a(k),
// the analytic momentum-shift propagator, and an independent numeric
// propagation oracle for validating it.
#pragma once

#include <array>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "ndweak/grid.hpp"
#include "ndweak/probe.hpp"

namespace ndweak::dynamics {

using Complex = std::complex<double>;

// Normalized coupling profile g(t) on [0, tau] with Int g dt = 1, its
// cumulative h(s) = Int_0^s g, the moments tau_n = Int h^n (1-h) ds and the
// coupling strength lambda. For constant g, tau_n = tau / ((n+1)(n+2)).
class CouplingProfile {
public:
    static CouplingProfile constant(double tau, double lambda);
    static CouplingProfile triangular(double tau, double lambda);
    static CouplingProfile raised_cosine(double tau, double lambda);
    // Custom profile; h is built by dense cumulative quadrature when absent.
    // breaks lists interior kink points of piecewise-smooth profiles.
    static CouplingProfile custom(double tau, double lambda,
                                  std::function<double(double)> g,
                                  std::function<double(double)> h = nullptr,
                                  std::vector<double> breaks = {},
                                  std::string name = "custom");

    double tau() const { return tau_; }
    double lambda() const { return lambda_; }
    double g(double t) const { return g_(t); }
    double h(double s) const { return h_(s); }
    double tau_n(unsigned n) const;
    double t_v() const { return 0.5 * (tau_ - tau_n(0)); }
    const std::vector<double>& breaks() const { return breaks_; }
    const std::string& name() const { return name_; }

private:
    CouplingProfile(double tau, double lambda, std::function<double(double)> g,
                    std::function<double(double)> h, std::vector<double> breaks,
                    std::string name);

    double tau_ = 0.0;
    double lambda_ = 0.0;
    std::function<double(double)> g_, h_;
    std::vector<double> breaks_;
    std::array<double, 4> moments_{};
    std::string name_;
};

// Gamma_a(k) = Int_0^tau omega_P(k - lambda a (1 - h(s))) ds by adaptive
// Simpson quadrature (absolute tolerance 1e-10).
double hamiltonian_phase(double a, double k, const CouplingProfile& profile,
                         const probe::DispersionRelation& dispersion, double tol = 1e-10);

// Closed form for quadratic dispersion (any profile, via tau_0 and tau_1):
// Gamma_a(k) = [k^2 tau - 2 k lambda a tau_0 + lambda^2 a^2 (tau_0 - tau_1)] / 2M.
double hamiltonian_phase_closed(double a, double k, const CouplingProfile& profile, double mass);

// The propagator is diagonal in a and supported on k = k0 + lambda*a with
// phase factor exp{-i Gamma_a(k)}; the delta function is never discretized.
struct PropagatorValue {
    double shift;  // lambda * a
    double phase;  // Gamma_a(k)
};
PropagatorValue analytic_propagator(double k, double k0, double a,
                                    const CouplingProfile& profile,
                                    const probe::DispersionRelation& dispersion);

// First-order product-formula propagation for H = omega(k) - f(t) x,
// alternating the phase factor exp{-i eps omega} with the exact shift by
// eps f(t_j) (shift applied first, phase evaluated after it). Shifts are
// realized by moving the evaluation points (a co-moving grid), which is
// exact for non-commensurate steps; the returned grid is the input grid
// displaced by the total shift Int_0^t f.
struct PropagationResult {
    Grid grid;                  // co-moving: input grid + total_shift
    std::vector<Complex> psi;
    double total_shift = 0.0;
};

PropagationResult numeric_propagate_oracle(const Grid& grid, const std::vector<Complex>& psi0,
                                           const std::function<double(double)>& omega,
                                           const std::function<double(double)>& f,
                                           double t_final, std::size_t steps);

// Resample a propagation result onto a target grid (cubic interpolation).
// Raises when the shifted support no longer covers a target point.
std::vector<Complex> resample(const PropagationResult& result, const Grid& target);

// Closed-form evolution psi(k,t) = exp{-i Int_0^t omega(k - [F(t)-F(s)]) ds} psi0(k - F(t)),
// F = Int_0^t f, for cross-checking the oracle. F_cumulative(s) must equal Int_0^s f.
std::vector<Complex> analytic_evolution(const Grid& grid,
                                        const std::function<Complex(double)>& psi0,
                                        const std::function<double(double)>& omega,
                                        const std::function<double(double)>& F_cumulative,
                                        double t_final, double tol = 1e-12);

// L2 norm sqrt(Int |psi|^2 dk) on a grid.
double l2_norm(const Grid& grid, const std::vector<Complex>& psi);
double l2_distance(const Grid& grid, const std::vector<Complex>& a, const std::vector<Complex>& b);

} // namespace ndweak::dynamics
