// probe.cpp
#include "ndweak/probe.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "ndweak/errors.hpp"
#include "ndweak/numeric.hpp"

namespace ndweak::probe {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kSqrt2Pi = 2.5066282746310005024157652848110;

double gaussian_central_moment(double sigma, unsigned p) {
    if (p % 2 == 1) return 0.0;
    double m = 1.0; // (p-1)!! sigma^p
    for (unsigned q = 1; q < p; q += 2) m *= static_cast<double>(q);
    return m * std::pow(sigma, static_cast<int>(p));
}

// Raw moment of a 1-D Gaussian via binomial expansion around the mean.
double gaussian_raw_moment(double mean, double sigma, unsigned p) {
    double acc = 0.0, binom = 1.0;
    for (unsigned j = 0; j <= p; ++j) {
        acc += binom * std::pow(mean, static_cast<int>(p - j)) * gaussian_central_moment(sigma, j);
        binom = binom * static_cast<double>(p - j) / static_cast<double>(j + 1);
    }
    return acc;
}
} // namespace

GaussianProbe::GaussianProbe(double delta_k, double kappa_k, double kbar, double xbar)
    : delta_k_(delta_k), kappa_k_(kappa_k), kbar_(kbar), xbar_(xbar) {
    if (!(delta_k_ > 0.0)) throw PhysicsError("GaussianProbe: Delta_k must be > 0");
    if (!(kappa_k_ > 0.0)) throw PhysicsError("GaussianProbe: kappa_k must be > 0");
    if (kappa_k_ > 2.0 * delta_k_ * (1.0 + 1e-12))
        throw PhysicsError("GaussianProbe: uncertainty relation requires kappa_k <= 2 Delta_k");
}

double GaussianProbe::p0(double k) const {
    const double u = (k - kbar_) / delta_k_;
    return std::exp(-0.5 * u * u) / (kSqrt2Pi * delta_k_);
}

double GaussianProbe::p0_d1(double k) const {
    return -(k - kbar_) / (delta_k_ * delta_k_) * p0(k);
}

double GaussianProbe::p0_d2(double k) const {
    const double u = (k - kbar_) / delta_k_;
    return (u * u - 1.0) / (delta_k_ * delta_k_) * p0(k);
}

Complex GaussianProbe::rho0(double k1, double k2) const {
    const double s = k1 + k2 - 2.0 * kbar_;
    const double d = k1 - k2;
    const double mag = std::exp(-s * s / (8.0 * delta_k_ * delta_k_)
                                - d * d / (2.0 * kappa_k_ * kappa_k_)) / (kSqrt2Pi * delta_k_);
    return mag * std::exp(Complex(0.0, xbar_ * (k2 - k1)));
}

double GaussianProbe::wigner(double x, double k) const {
    const double u = (k - kbar_) / delta_k_;
    const double v = (x - xbar_) * kappa_k_;
    return kappa_k_ / (kTwoPi * delta_k_) * std::exp(-0.5 * u * u - 0.5 * v * v);
}

double GaussianProbe::moment(unsigned i, unsigned j) const {
    return gaussian_raw_moment(xbar_, delta_x(), i) * gaussian_raw_moment(kbar_, delta_k_, j);
}

Grid GaussianProbe::default_grid(std::size_t n) const {
    return Grid::spanning(kbar_ - 8.0 * delta_k_, kbar_ + 8.0 * delta_k_, n);
}

Grid GaussianProbe::default_x_grid(std::size_t n) const {
    return Grid::spanning(xbar_ - 8.0 * delta_x(), xbar_ + 8.0 * delta_x(), n);
}

GridProbe::GridProbe(Grid kgrid, Eigen::MatrixXcd rho)
    : kgrid_(kgrid), rho_(std::move(rho)) {
    const auto n = static_cast<Eigen::Index>(kgrid_.n);
    if (rho_.rows() != n || rho_.cols() != n)
        throw PhysicsError("GridProbe: matrix size does not match grid");
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
        throw PhysicsError("GridProbe: not Hermitian within 1e-8");
    double tr = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) tr += rho_(i, i).real();
    if (std::fabs(tr * kgrid_.dk - 1.0) > 1e-8)
        throw PhysicsError("GridProbe: dk * trace must be 1 within 1e-8");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ConsistencyError("GridProbe: eigensolve failed");
    if (es.eigenvalues().minCoeff() * kgrid_.dk < -1e-8)
        throw PhysicsError("GridProbe: not positive semidefinite within 1e-8");
}

double GridProbe::p0_at(std::size_t i) const {
    return rho_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
}

namespace {
// Fractional index of k on g, clamped to the interior.
double frac_index(const Grid& g, double k) {
    if (!g.contains(k)) throw PhysicsError("GridProbe: k outside grid");
    double t = (k - g.k0) / g.dk;
    return std::min(std::max(t, 0.0), static_cast<double>(g.n - 1));
}
} // namespace

double GridProbe::p0(double k) const {
    const double t = frac_index(kgrid_, k);
    const auto i = static_cast<std::size_t>(t);
    if (i + 1 >= kgrid_.n) return p0_at(kgrid_.n - 1);
    const double w = t - static_cast<double>(i);
    return (1.0 - w) * p0_at(i) + w * p0_at(i + 1);
}

double GridProbe::p0_d1(double k) const {
    const auto i = static_cast<std::size_t>(std::llround(frac_index(kgrid_, k)));
    if (i < 2 || i + 2 >= kgrid_.n) return 0.0; // tail rows
    const double h = kgrid_.dk;
    return (-p0_at(i + 2) + 8.0 * p0_at(i + 1) - 8.0 * p0_at(i - 1) + p0_at(i - 2)) / (12.0 * h);
}

double GridProbe::p0_d2(double k) const {
    const auto i = static_cast<std::size_t>(std::llround(frac_index(kgrid_, k)));
    if (i < 2 || i + 2 >= kgrid_.n) return 0.0;
    const double h = kgrid_.dk;
    return (-p0_at(i + 2) + 16.0 * p0_at(i + 1) - 30.0 * p0_at(i)
            + 16.0 * p0_at(i - 1) - p0_at(i - 2)) / (12.0 * h * h);
}

Complex GridProbe::rho0(double k1, double k2) const {
    const double t1 = frac_index(kgrid_, k1);
    const double t2 = frac_index(kgrid_, k2);
    const auto i = std::min(static_cast<std::size_t>(t1), kgrid_.n - 2);
    const auto j = std::min(static_cast<std::size_t>(t2), kgrid_.n - 2);
    const double u = t1 - static_cast<double>(i), v = t2 - static_cast<double>(j);
    const auto e = [&](std::size_t r, std::size_t c) {
        return rho_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    };
    return (1 - u) * (1 - v) * e(i, j) + u * (1 - v) * e(i + 1, j)
         + (1 - u) * v * e(i, j + 1) + u * v * e(i + 1, j + 1);
}

std::vector<double> GridProbe::conditional_m1() const {
    // m1(k) = -i d/dv rho0(k + v/2, k - v/2) at v = 0; antidiagonal step 2 dk.
    const std::size_t n = kgrid_.n;
    const double h = 2.0 * kgrid_.dk;
    std::vector<double> m1(n, 0.0);
    const auto e = [&](std::size_t r, std::size_t c) {
        return rho_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= 2 && i + 2 < n) {
            m1[i] = (8.0 * e(i + 1, i - 1).imag() - e(i + 2, i - 2).imag()) / (6.0 * h);
        } else if (i >= 1 && i + 1 < n) {
            m1[i] = e(i + 1, i - 1).imag() / h;
        }
    }
    return m1;
}

std::vector<double> GridProbe::conditional_m2() const {
    // m2(k) = -d2/dv2 rho0(k + v/2, k - v/2) at v = 0.
    const std::size_t n = kgrid_.n;
    const double h = 2.0 * kgrid_.dk;
    std::vector<double> m2(n, 0.0);
    const auto e = [&](std::size_t r, std::size_t c) {
        return rho_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= 2 && i + 2 < n) {
            m2[i] = (15.0 * e(i, i).real() - 16.0 * e(i + 1, i - 1).real()
                     + e(i + 2, i - 2).real()) / (6.0 * h * h);
        } else if (i >= 1 && i + 1 < n) {
            m2[i] = 2.0 * (e(i, i).real() - e(i + 1, i - 1).real()) / (h * h);
        }
    }
    return m2;
}

GridProbe GridProbe::sample(const GaussianProbe& g, const Grid& kgrid) {
    const auto n = static_cast<Eigen::Index>(kgrid.n);
    Eigen::MatrixXcd rho(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            rho(i, j) = g.rho0(kgrid[static_cast<std::size_t>(i)], kgrid[static_cast<std::size_t>(j)]);
    // renormalize the sampled trace so that dk * tr = 1 exactly
    double tr = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) tr += rho(i, i).real();
    rho /= tr * kgrid.dk;
    return GridProbe(kgrid, std::move(rho));
}

GridProbe GridProbe::chirped_gaussian(const GaussianProbe& g, double mu, const Grid& kgrid) {
    const auto n = static_cast<Eigen::Index>(kgrid.n);
    Eigen::MatrixXcd rho(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double k1 = kgrid[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; ++j) {
            const double k2 = kgrid[static_cast<std::size_t>(j)];
            rho(i, j) = g.rho0(k1, k2) * std::exp(Complex(0.0, 0.5 * mu * (k1 * k1 - k2 * k2)));
        }
    }
    double tr = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) tr += rho(i, i).real();
    rho /= tr * kgrid.dk;
    return GridProbe(kgrid, std::move(rho));
}

WignerGrid wigner(const GaussianProbe& probe, std::size_t n) {
    WignerGrid wg;
    wg.kgrid = probe.default_grid(n);
    wg.xgrid = probe.default_x_grid(n);
    wg.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t ix = 0; ix < n; ++ix)
        for (std::size_t ik = 0; ik < n; ++ik)
            wg.values(static_cast<Eigen::Index>(ix), static_cast<Eigen::Index>(ik)) =
                probe.wigner(wg.xgrid[ix], wg.kgrid[ik]);
    return wg;
}

WignerGrid wigner(const GridProbe& probe) {
    const Grid& kg = probe.grid();
    const std::size_t n = kg.n;
    const double dk = kg.dk;
    // Conjugate x-grid of the antidiagonal coordinate v (step 2 dk):
    // x_j spans [-pi/(2 dk), pi/(2 dk)) with dx = pi / (n dk), so that the
    // x-sum of e^{i 2 m dk x} vanishes for every m != 0 and the k-marginal
    // reproduces the diagonal exactly.
    const double dx = M_PI / (static_cast<double>(n) * dk);
    WignerGrid wg;
    wg.kgrid = kg;
    wg.xgrid = Grid(-M_PI / (2.0 * dk), dx, n);
    wg.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const auto& rho = probe.matrix();
    // TODO: replace the per-row direct transform (O(n^2) per k) with an FFT
    // if grids beyond ~1k points become common.
    for (std::size_t ik = 0; ik < n; ++ik) {
        const std::size_t mmax = std::min(ik, n - 1 - ik);
        for (std::size_t jx = 0; jx < n; ++jx) {
            const double x = wg.xgrid[jx];
            double acc = rho(static_cast<Eigen::Index>(ik), static_cast<Eigen::Index>(ik)).real();
            for (std::size_t m = 1; m <= mmax; ++m) {
                const Complex r = rho(static_cast<Eigen::Index>(ik + m), static_cast<Eigen::Index>(ik - m));
                const double phi = 2.0 * static_cast<double>(m) * dk * x;
                acc += 2.0 * (std::cos(phi) * r.real() - std::sin(phi) * r.imag());
            }
            wg.values(static_cast<Eigen::Index>(jx), static_cast<Eigen::Index>(ik)) =
                acc * (2.0 * dk) / kTwoPi;
        }
    }
    return wg;
}

namespace {
double checked(double v) {
    if (!std::isfinite(v)) throw PhysicsError("phase_space_average: non-finite integrand");
    return v;
}
} // namespace

double phase_space_average(const WignerGrid& wg, const std::function<double(double, double)>& f) {
    // 2-D trapezoid over the tabulated Wigner function.
    double acc = 0.0;
    for (std::size_t jx = 0; jx < wg.xgrid.n; ++jx) {
        const double wx = (jx == 0 || jx + 1 == wg.xgrid.n) ? 0.5 : 1.0;
        const double x = wg.xgrid[jx];
        double row = 0.0;
        for (std::size_t ik = 0; ik < wg.kgrid.n; ++ik) {
            const double wk = (ik == 0 || ik + 1 == wg.kgrid.n) ? 0.5 : 1.0;
            row += wk * checked(f(x, wg.kgrid[ik]))
                 * wg.values(static_cast<Eigen::Index>(jx), static_cast<Eigen::Index>(ik));
        }
        acc += wx * row;
    }
    return acc * wg.xgrid.dk * wg.kgrid.dk;
}

double phase_space_average(const GaussianProbe& probe,
                           const std::function<double(double, double)>& f, std::size_t n) {
    const Grid kg = probe.default_grid(n);
    const Grid xg = probe.default_x_grid(n);
    double acc = 0.0;
    for (std::size_t jx = 0; jx < xg.n; ++jx) {
        const double wx = (jx == 0 || jx + 1 == xg.n) ? 0.5 : 1.0;
        const double x = xg[jx];
        double row = 0.0;
        for (std::size_t ik = 0; ik < kg.n; ++ik) {
            const double wk = (ik == 0 || ik + 1 == kg.n) ? 0.5 : 1.0;
            row += wk * checked(f(x, kg[ik])) * probe.wigner(x, kg[ik]);
        }
        acc += wx * row;
    }
    return acc * xg.dk * kg.dk;
}

double phase_space_average(const GridProbe& probe,
                           const std::function<double(double, double)>& f) {
    return phase_space_average(wigner(probe), f);
}

double conditional_average(const GaussianProbe& probe,
                           const std::function<double(double, double)>& f, double k,
                           std::size_t n) {
    if (probe.p0(k) <= 1e-12)
        throw PhysicsError("conditional_average: P0(k) below tolerance, conditioning on a null point");
    // Conditional density of x given k is the normalized Gaussian slice.
    const Grid xg = probe.default_x_grid(n);
    const double dx2 = probe.delta_x() * probe.delta_x();
    double acc = 0.0;
    for (std::size_t j = 0; j < xg.n; ++j) {
        const double w = (j == 0 || j + 1 == xg.n) ? 0.5 : 1.0;
        const double x = xg[j];
        const double u = x - probe.xbar();
        acc += w * checked(f(x, k)) * std::exp(-0.5 * u * u / dx2);
    }
    return acc * xg.dk / (kSqrt2Pi * probe.delta_x());
}

double conditional_average(const GridProbe& probe,
                           const std::function<double(double, double)>& f, double k) {
    const WignerGrid wg = wigner(probe);
    const auto i = static_cast<std::size_t>(std::llround((k - wg.kgrid.k0) / wg.kgrid.dk));
    if (i >= wg.kgrid.n) throw PhysicsError("conditional_average: k outside grid");
    const double p0 = probe.p0_at(i);
    if (p0 <= 1e-12)
        throw PhysicsError("conditional_average: P0(k) below tolerance, conditioning on a null point");
    const double kk = wg.kgrid[i];
    double acc = 0.0;
    for (std::size_t j = 0; j < wg.xgrid.n; ++j) {
        const double w = (j == 0 || j + 1 == wg.xgrid.n) ? 0.5 : 1.0;
        acc += w * checked(f(wg.xgrid[j], kk))
             * wg.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
    }
    return acc * wg.xgrid.dk / p0;
}

DispersionRelation DispersionRelation::quadratic(double mass) {
    if (!(mass > 0.0)) throw PhysicsError("DispersionRelation::quadratic: mass must be > 0");
    DispersionRelation d;
    d.omega = [mass](double k) { return 0.5 * k * k / mass; };
    d.omega_d1 = [mass](double k) { return k / mass; };
    d.omega_d2 = [mass](double) { return 1.0 / mass; };
    d.quadratic_mass = mass;
    return d;
}

DispersionRelation DispersionRelation::from_hamiltonian_scale(double k_H, double tau0) {
    if (!(k_H > 0.0) || !(tau0 > 0.0))
        throw PhysicsError("DispersionRelation::from_hamiltonian_scale: k_H and tau0 must be > 0");
    return quadratic(k_H * k_H * tau0);
}

} // namespace ndweak::probe
