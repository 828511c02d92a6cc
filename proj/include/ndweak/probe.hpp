// probe.hpp — probe state representations (Gaussian closed-form and general
// grid), Wigner function, phase-space and conditional averages, covariances.
//
// Conventions (fixed across the library): [x, k] = i, hbar = 1.
//   rho0(k, k') carries the mean-position phase exp{i xbar (k' - k)},
//   Wigner transform  Pi(x, k) = (1/2pi) Int dv e^{i v x} rho0(k + v/2, k - v/2),
// under which the k-marginal of Pi is P0(k) = rho0(k, k) and the x-marginal
// has mean xbar.
#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ndweak/grid.hpp"

namespace ndweak::probe {

using Complex = std::complex<double>;

// Gaussian probe rho0(k,k') ~ exp{-(k+k'-2kbar)^2/8Dk^2 - (k-k')^2/2kk^2},
// normalized so that Int rho0(k,k) dk = 1. kappa_k is the coherence scale,
// Delta_x = 1/kappa_k; the uncertainty relation requires kappa_k <= 2 Delta_k.
class GaussianProbe {
public:
    GaussianProbe(double delta_k, double kappa_k, double kbar = 0.0, double xbar = 0.0);

    double delta_k() const { return delta_k_; }
    double kappa_k() const { return kappa_k_; }
    double kbar() const { return kbar_; }
    double xbar() const { return xbar_; }
    double delta_x() const { return 1.0 / kappa_k_; }

    double p0(double k) const;         // diagonal rho0(k,k)
    double p0_d1(double k) const;      // dP0/dk
    double p0_d2(double k) const;      // d2P0/dk2
    Complex rho0(double k1, double k2) const;

    // Closed-form Gaussian Wigner function (separable product of Gaussians).
    double wigner(double x, double k) const;

    // Raw phase-space moments avg(x^i k^j), exact (separable Gaussian).
    double moment(unsigned i, unsigned j) const;

    Grid default_grid(std::size_t n = 2048) const;   // [kbar - 8 Dk, kbar + 8 Dk]
    Grid default_x_grid(std::size_t n = 1025) const; // [xbar - 8 Dx, xbar + 8 Dx]

private:
    double delta_k_, kappa_k_, kbar_, xbar_;
};

// General probe tabulated as rho0(k_i, k_j) on a uniform k-grid.
// Hermitian, unit trace (dk * sum of diagonal) and positive semidefinite,
// all to 1e-8. Negative Wigner values are allowed and never clipped.
class GridProbe {
public:
    GridProbe(Grid kgrid, Eigen::MatrixXcd rho);

    const Grid& grid() const { return kgrid_; }
    const Eigen::MatrixXcd& matrix() const { return rho_; }

    double p0_at(std::size_t i) const;
    double p0(double k) const;         // cubic interpolation of the diagonal
    double p0_d1(double k) const;      // 4th-order central differences, h = dk
    double p0_d2(double k) const;
    Complex rho0(double k1, double k2) const; // bilinear interpolation

    // Conditional x-moment tables (no division by P0):
    //   m1[i] = Int x Pi(x, k_i) dx,  m2[i] = Int x^2 Pi(x, k_i) dx,
    // from antidiagonal derivatives of rho0.
    std::vector<double> conditional_m1() const;
    std::vector<double> conditional_m2() const;

    static GridProbe sample(const GaussianProbe& g, const Grid& kgrid);
    // Gaussian probe conjugated by exp(i mu k^2 / 2) (chirp); induces the
    // x-k correlation C(x, k) = -mu Delta_k^2.
    static GridProbe chirped_gaussian(const GaussianProbe& g, double mu, const Grid& kgrid);

private:
    Grid kgrid_;
    Eigen::MatrixXcd rho_;
};

// Discrete Wigner function on the conjugate (x, k) grid pair.
struct WignerGrid {
    Grid xgrid;
    Grid kgrid;
    Eigen::MatrixXd values; // values(ix, ik)
};

WignerGrid wigner(const GaussianProbe& probe, std::size_t n = 513);
WignerGrid wigner(const GridProbe& probe);

// Phase-space average Int f(x,k) Pi(x,k) dx dk against the Wigner function.
// Gaussian probes integrate on [kbar +- 8 Dk] x [xbar +- 8 Dx] (trapezoid);
// grid probes on their discrete Wigner grid. Non-finite f values raise.
double phase_space_average(const GaussianProbe& probe,
                           const std::function<double(double, double)>& f,
                           std::size_t n = 1025);
double phase_space_average(const GridProbe& probe,
                           const std::function<double(double, double)>& f);
double phase_space_average(const WignerGrid& wg,
                           const std::function<double(double, double)>& f);

// Conditional average [Int f(x,k) Pi(x,k) dx] / P0(k); requires P0(k) > 1e-12.
double conditional_average(const GaussianProbe& probe,
                           const std::function<double(double, double)>& f, double k,
                           std::size_t n = 2049);
double conditional_average(const GridProbe& probe,
                           const std::function<double(double, double)>& f, double k);

// Covariance C(f,g) = avg(fg) - avg(f) avg(g).
template <typename Probe>
double covariance(const Probe& probe, const std::function<double(double, double)>& f,
                  const std::function<double(double, double)>& g) {
    const double fg = phase_space_average(probe, [&](double x, double k) { return f(x, k) * g(x, k); });
    return fg - phase_space_average(probe, f) * phase_space_average(probe, g);
}

// Probe dispersion omega_P(k) with analytic first and second derivatives.
struct DispersionRelation {
    std::function<double(double)> omega;
    std::function<double(double)> omega_d1;
    std::function<double(double)> omega_d2;
    std::optional<double> quadratic_mass; // set for omega = k^2 / 2M

    bool is_quadratic() const { return quadratic_mass.has_value(); }

    static DispersionRelation quadratic(double mass);
    // Quadratic dispersion whose Hamiltonian scale is k_H: k_H^2 = M / tau0.
    static DispersionRelation from_hamiltonian_scale(double k_H, double tau0);
};

} // namespace ndweak::probe
