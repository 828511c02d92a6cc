// spinhalf.cpp
#include "ndweak/spinhalf.hpp"

#include <cmath>

#include "ndweak/errors.hpp"

namespace ndweak::spinhalf {

namespace {
constexpr double kSqrt2Pi = 2.5066282746310005024157652848110;

double p0(double k) { return std::exp(-0.5 * k * k) / kSqrt2Pi; }

struct Geometry {
    double p, q;   // m.a, n.a
    double C;      // m.n - (m.a)(n.a)
    double S;      // (m x n).a
};

Geometry geometry(const BlochConfig& c) {
    Geometry g;
    g.p = c.m.dot(c.a);
    g.q = c.n.dot(c.a);
    g.C = c.m.dot(c.n) - g.p * g.q;
    g.S = c.m.cross(c.n).dot(c.a);
    return g;
}
} // namespace

BlochConfig::BlochConfig(Vec3 m_, Vec3 n_, Vec3 a_, double lambda_, double kappa_, double kH_,
                         double KD_, double eps_)
    : m(std::move(m_)), n(std::move(n_)), a(std::move(a_)), lambda(lambda_),
      kappa_k(kappa_), k_H(kH_), K_D(KD_), epsilon(eps_) {
    if (std::fabs(a.norm() - 1.0) > 1e-12)
        throw PhysicsError("BlochConfig: measurement axis must be a unit vector");
    if (m.norm() > 1.0 + 1e-12 || n.norm() > 1.0 + 1e-12)
        throw PhysicsError("BlochConfig: |m| and |n| must be <= 1");
    if (!(kappa_k > 0.0) || kappa_k > 2.0 + 1e-12)
        throw PhysicsError("BlochConfig: kappa_k must lie in (0, 2] Delta_k units");
    if (!(k_H > 0.0)) throw PhysicsError("BlochConfig: k_H must be > 0");
    if (!(K_D > 0.0)) throw PhysicsError("BlochConfig: K_D must be > 0");
    if (!(epsilon > 0.0)) throw PhysicsError("BlochConfig: epsilon must be > 0");
}

BlochConfig BlochConfig::planar(double theta_m, double angle_between, double lambda,
                                double kappa, double kH, double KD) {
    const double theta_n = theta_m + angle_between;
    return BlochConfig(Vec3(std::sin(theta_m), 0.0, std::cos(theta_m)),
                       Vec3(std::sin(theta_n), 0.0, std::cos(theta_n)),
                       Vec3::UnitZ(), lambda, kappa, kH, KD);
}

double BlochConfig::coherent_decoherence_factor() const {
    if (std::isinf(K_D)) return 1.0;
    return std::exp(-8.0 * epsilon * lambda * lambda / (K_D * K_D));
}

double spin_p_post(const BlochConfig& c) {
    const Geometry g = geometry(c);
    const double E = std::exp(-2.0 * c.lambda * c.lambda / (c.kappa_k * c.kappa_k)
                              - 2.0 * c.lambda * c.lambda / (c.k_H * c.k_H * c.k_H * c.k_H));
    return 0.5 * (1.0 + g.p * g.q + E * c.coherent_decoherence_factor() * g.C);
}

double spin_joint_probability(const BlochConfig& c, double k) {
    const Geometry g = geometry(c);
    const double lam = c.lambda;
    const double beta = 2.0 * lam / (c.k_H * c.k_H);
    const double Ek = std::exp(-2.0 * lam * lam / (c.kappa_k * c.kappa_k));
    return 0.25 * ((1.0 + g.p) * (1.0 + g.q) * p0(k - lam)
                   + (1.0 - g.p) * (1.0 - g.q) * p0(k + lam))
         + 0.5 * Ek * c.coherent_decoherence_factor()
               * (g.C * std::cos(beta * k) - g.S * std::sin(beta * k)) * p0(k);
}

Complex spin_characteristic_function(const BlochConfig& c, double theta) {
    const Geometry g = geometry(c);
    const double lam = c.lambda;
    const double kH2 = c.k_H * c.k_H;
    const double b = 2.0 * lam * theta / kH2;
    const double E = std::exp(-2.0 * lam * lam * (1.0 / (c.kappa_k * c.kappa_k) + 1.0 / (kH2 * kH2)));
    const double Z0 = std::exp(-0.5 * theta * theta);
    const Complex braces = (1.0 + g.p * g.q) * std::cos(lam * theta)
                         + Complex(0.0, 1.0) * (g.p + g.q) * std::sin(lam * theta)
                         + E * c.coherent_decoherence_factor()
                               * (g.C * std::cosh(b) - Complex(0.0, 1.0) * g.S * std::sinh(b));
    return Z0 * braces / (2.0 * spin_p_post(c));
}

OscillationScan oscillation_scan(const BlochConfig& c, const Grid& grid) {
    const double p_post = spin_p_post(c);
    if (!(p_post > 1e-14))
        throw PhysicsError("oscillation_scan: postselection probability below 1e-14");
    std::vector<double> q(grid.n), residual(grid.n);
    const Geometry g = geometry(c);
    const double lam = c.lambda;
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double k = grid[i];
        q[i] = spin_joint_probability(c, k) / p_post;
        const double envelope = 0.25 * ((1.0 + g.p) * (1.0 + g.q) * p0(k - lam)
                                        + (1.0 - g.p) * (1.0 - g.q) * p0(k + lam)) / p_post;
        residual[i] = q[i] - envelope;
    }
    OscillationScan scan{exact_stats::ReadoutDistribution(grid, q, p_post), /*period*/ 0.0,
                         /*k_osc*/ 0.0, /*oscillatory*/ false};
    scan.k_osc_predicted = M_PI * c.k_H * c.k_H / std::max(lam, 1e-300);
    scan.oscillatory = scan.k_osc_predicted <= 1.0; // Delta_k = 1 in these units
    scan.period = std::numeric_limits<double>::quiet_NaN();
    if (!scan.oscillatory) return scan;

    // Local-maxima spacing of the residual where its amplitude is significant.
    double rmax = 0.0;
    for (double r : residual) rmax = std::max(rmax, std::fabs(r));
    std::vector<double> maxima;
    for (std::size_t i = 1; i + 1 < grid.n; ++i) {
        if (residual[i] >= residual[i - 1] && residual[i] > residual[i + 1]
            && residual[i] > 1e-3 * rmax)
            maxima.push_back(grid[i]);
    }
    if (maxima.size() >= 3) {
        std::vector<double> spacing(maxima.size() - 1);
        for (std::size_t i = 0; i + 1 < maxima.size(); ++i)
            spacing[i] = maxima[i + 1] - maxima[i];
        std::nth_element(spacing.begin(), spacing.begin() + spacing.size() / 2, spacing.end());
        scan.period = spacing[spacing.size() / 2];
    }
    return scan;
}

GenericEquivalent to_generic(const BlochConfig& c) {
    const double tau = 1.0;
    core::SystemSpec sys({+1.0, -1.0});
    core::DensityMatrix rho_i = core::DensityMatrix::from_bloch(c.m, c.a);

    // rho_f = (1 + n.sigma)/2 as a weighted projective scheme: eigenbasis of
    // n.sigma expressed in the a-eigenbasis, weights (1 +- |n|)/2.
    const double nn = c.n.norm();
    Eigen::MatrixXcd basis(2, 2);
    std::vector<double> weights(2);
    if (nn < 1e-14) {
        basis = Eigen::MatrixXcd::Identity(2, 2);
        weights = {0.5, 0.5};
    } else {
        const core::DensityMatrix rho_f_target = core::DensityMatrix::from_bloch(c.n / nn, c.a);
        // |+n> is the top eigenvector of the pure-state matrix; build the
        // orthogonal |-n> from it.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_f_target.matrix());
        basis.col(0) = es.eigenvectors().col(1); // eigenvalue 1
        basis.col(1) = es.eigenvectors().col(0); // eigenvalue 0
        weights = {0.5 * (1.0 + nn), 0.5 * (1.0 - nn)};
    }
    core::PostselectionScheme scheme(weights, basis);

    probe::GaussianProbe probe(1.0, c.kappa_k, 0.0, 0.0);
    dynamics::CouplingProfile profile = dynamics::CouplingProfile::constant(tau, c.lambda);
    probe::DispersionRelation disp =
        probe::DispersionRelation::from_hamiltonian_scale(c.k_H, profile.tau_n(0));
    std::optional<exact_stats::DecoherenceModel> deco;
    if (!std::isinf(c.K_D))
        deco = exact_stats::DecoherenceModel::from_scale(c.K_D, c.epsilon, tau);
    return GenericEquivalent{std::move(sys), std::move(rho_i), std::move(scheme),
                             probe, std::move(profile), std::move(disp), deco};
}

} // namespace ndweak::spinhalf
