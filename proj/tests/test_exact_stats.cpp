#include <doctest.h>

#include <cmath>
#include <random>

#include "ndweak/exact_stats.hpp"
#include "ndweak/spinhalf.hpp"

using namespace ndweak;
using exact_stats::DecoherenceModel;
using exact_stats::Parts;

namespace {

spinhalf::GenericEquivalent near_orthogonal_setup(double lambda) {
    return spinhalf::to_generic(
        spinhalf::BlochConfig::planar(M_PI / 3.0, M_PI - 0.1, lambda, 2.0, 10.0));
}

} // namespace

TEST_CASE("lambda = 0: joint probability reduces to W Tr(rho_f rho_i) P0") {
    core::SystemSpec sys({1.0, -1.0, 0.0});
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    Eigen::MatrixXcd G(3, 3);
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) G(i, j) = std::complex<double>(nd(rng), nd(rng));
    Eigen::MatrixXcd m = G * G.adjoint();
    m /= m.trace().real();
    core::DensityMatrix rho_i(0.5 * (m + m.adjoint()));
    core::PostselectionScheme scheme({0.9, 0.2, 0.5});
    probe::GaussianProbe probe(1.0, 1.4, 0.3, -0.2);
    auto profile = dynamics::CouplingProfile::constant(1.0, 0.0);
    auto disp = probe::DispersionRelation::quadratic(2.0);

    const auto rho_f = core::postselected_state(scheme);
    double tr = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) tr += (rho_f(i, j) * rho_i(j, i)).real();
    const double W = scheme.total_weight();
    for (double k : {-2.0, 0.0, 1.3}) {
        CHECK(exact_stats::joint_probability(k, sys, rho_i, scheme, probe, profile, disp)
              == doctest::Approx(W * tr * probe.p0(k)).epsilon(1e-12));
    }
}

TEST_CASE("maximally mixed postselection keeps only diagonal terms") {
    core::SystemSpec sys({1.0, -1.0});
    Eigen::VectorXcd plus(2);
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    core::DensityMatrix rho_i = core::DensityMatrix::pure(plus);
    core::PostselectionScheme flat({0.5, 0.5});
    probe::GaussianProbe probe(1.0, 2.0);
    auto profile = dynamics::CouplingProfile::constant(1.0, 0.7);
    auto disp = probe::DispersionRelation::from_hamiltonian_scale(5.0, profile.tau_n(0));
    const double W = flat.total_weight();
    for (double k : {-1.0, 0.2, 2.5}) {
        const double full = exact_stats::joint_probability(k, sys, rho_i, flat, probe, profile, disp);
        const double expect = W / 2.0 * (0.5 * probe.p0(k - 0.7) + 0.5 * probe.p0(k + 0.7));
        CHECK(full == doctest::Approx(expect).epsilon(1e-12));
        CHECK(exact_stats::joint_probability(k, sys, rho_i, flat, probe, profile, disp,
                                             std::nullopt, Parts::OffDiagonal)
              == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("generic engine reproduces the spin-1/2 closed form at every grid point") {
    auto gen = near_orthogonal_setup(0.5);
    spinhalf::BlochConfig cfg = spinhalf::BlochConfig::planar(M_PI / 3.0, M_PI - 0.1, 0.5, 2.0, 10.0);
    const Grid g = gen.probe.default_grid();
    double worst = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        const double pj = exact_stats::joint_probability(g[i], gen.sys, gen.rho_i, gen.scheme,
                                                         gen.probe, gen.profile, gen.dispersion);
        worst = std::max(worst, std::fabs(pj - spinhalf::spin_joint_probability(cfg, g[i])));
    }
    CHECK(worst < 1e-10);
    CHECK(exact_stats::postselection_probability(gen.sys, gen.rho_i, gen.scheme, gen.probe,
                                                 gen.profile, gen.dispersion)
          == doctest::Approx(spinhalf::spin_p_post(cfg)).epsilon(1e-10));
}

TEST_CASE("postselection probability: diagonal part is dispersion independent") {
    auto gen = near_orthogonal_setup(0.6);
    auto disp_slow = probe::DispersionRelation::from_hamiltonian_scale(0.3, gen.profile.tau_n(0));
    const double p1 = exact_stats::postselection_probability(
        gen.sys, gen.rho_i, gen.scheme, gen.probe, gen.profile, gen.dispersion, std::nullopt,
        Parts::Diagonal);
    const double p2 = exact_stats::postselection_probability(
        gen.sys, gen.rho_i, gen.scheme, gen.probe, gen.profile, disp_slow, std::nullopt,
        Parts::Diagonal);
    CHECK(p1 == doctest::Approx(p2).epsilon(1e-12));
    // the full P_post carries the k_H-dependent coherent suppression
    const double full_fast = exact_stats::postselection_probability(
        gen.sys, gen.rho_i, gen.scheme, gen.probe, gen.profile, gen.dispersion);
    const double full_slow = exact_stats::postselection_probability(
        gen.sys, gen.rho_i, gen.scheme, gen.probe, gen.profile, disp_slow);
    CHECK(std::fabs(full_fast - full_slow) > 1e-6);
}

TEST_CASE("conditional distribution: normalization, moments, characteristic function") {
    auto gen = near_orthogonal_setup(0.5);
    const auto dist = exact_stats::conditional_distribution(gen.sys, gen.rho_i, gen.scheme,
                                                            gen.probe, gen.profile, gen.dispersion);
    const double norm = trapezoid(dist.grid(), dist.values());
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-8));
    const auto mom = exact_stats::distribution_moments(dist, 2);
    CHECK(mom[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(mom[2] >= mom[1] * mom[1]); // <k^2> >= <k>^2
    CHECK(std::abs(exact_stats::exact_characteristic_function(dist, 0.0) - 1.0) < 1e-10);
    CHECK(std::abs(exact_stats::exact_characteristic_function(dist, 0.8)) <= 1.0 + 1e-10);
    // lambda = 0 Gaussian probe: Z = exp(i theta kbar - theta^2 Dk^2/2)
    auto gen0 = near_orthogonal_setup(0.0);
    const auto dist0 = exact_stats::conditional_distribution(gen0.sys, gen0.rho_i, gen0.scheme,
                                                             gen0.probe, gen0.profile,
                                                             gen0.dispersion);
    for (double th : {0.4, 1.2}) {
        const auto z = exact_stats::exact_characteristic_function(dist0, th);
        CHECK(std::abs(z - std::exp(-0.5 * th * th)) < 1e-9);
    }
}

TEST_CASE("Q is independent of the weight normalization W") {
    core::SystemSpec sys({1.0, -1.0});
    Eigen::VectorXcd plus(2);
    plus << 1.0 / std::sqrt(2.0), std::complex<double>(0.3, 0.4) / std::sqrt(0.5);
    plus.normalize();
    core::DensityMatrix rho_i = core::DensityMatrix::pure(plus);
    probe::GaussianProbe probe(1.0, 1.8);
    auto profile = dynamics::CouplingProfile::constant(1.0, 0.4);
    auto disp = probe::DispersionRelation::from_hamiltonian_scale(4.0, profile.tau_n(0));
    core::PostselectionScheme w1({1.0, 0.25});
    core::PostselectionScheme w2({0.2, 0.05});
    const auto d1 = exact_stats::conditional_distribution(sys, rho_i, w1, probe, profile, disp);
    const auto d2 = exact_stats::conditional_distribution(sys, rho_i, w2, probe, profile, disp);
    for (std::size_t i = 0; i < d1.grid().n; i += 64)
        CHECK(d1.values()[i] == doctest::Approx(d2.values()[i]).epsilon(1e-12));
    // while P and P_post scale with W
    CHECK(d1.p_post() == doctest::Approx(5.0 * d2.p_post()).epsilon(1e-10));
}

TEST_CASE("decoherence model scales and limits") {
    auto d = DecoherenceModel::from_scale(2.0, 1.0 / 12.0, 1.0);
    CHECK(d.K_D(1.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(d.off_diagonal_factor(0.5, 0.0, 1.0) == doctest::Approx(1.0));
    // exponent = 2 eps lambda^2 delta^2 / K_D^2
    const double expect = std::exp(-2.0 * (1.0 / 12.0) * 0.25 * 4.0 / 4.0);
    CHECK(d.off_diagonal_factor(0.5, 2.0, 1.0) == doctest::Approx(expect).epsilon(1e-12));

    auto off = DecoherenceModel::from_microscopic(0.0, 1.0, 1.0 / 12.0, 1.0);
    CHECK(std::isinf(off.K_D(1.0)));
    CHECK(off.off_diagonal_factor(0.9, 2.0, 1.0) == doctest::Approx(1.0));

    // gamma = 0 and K_D = infinity paths produce identical statistics
    auto gen = near_orthogonal_setup(0.5);
    const auto base = exact_stats::conditional_distribution(gen.sys, gen.rho_i, gen.scheme,
                                                            gen.probe, gen.profile, gen.dispersion);
    const auto with_off = exact_stats::conditional_distribution(
        gen.sys, gen.rho_i, gen.scheme, gen.probe, gen.profile, gen.dispersion, off);
    for (std::size_t i = 0; i < base.grid().n; i += 128)
        CHECK(base.values()[i] == doctest::Approx(with_off.values()[i]).epsilon(1e-14));
}

TEST_CASE("decoherence strong and weak limits") {
    const double lam = 0.5;
    auto cfg = spinhalf::BlochConfig::planar(M_PI / 3.0, M_PI / 2.0, lam, 2.0, 10.0, lam / 10.0);
    auto gen = spinhalf::to_generic(cfg);
    const auto full = exact_stats::conditional_distribution(gen.sys, gen.rho_i, gen.scheme,
                                                            gen.probe, gen.profile, gen.dispersion,
                                                            gen.deco);
    const auto diag = exact_stats::conditional_distribution(gen.sys, gen.rho_i, gen.scheme,
                                                            gen.probe, gen.profile, gen.dispersion,
                                                            gen.deco, std::nullopt, Parts::Diagonal);
    double worst = 0.0;
    for (std::size_t i = 0; i < full.grid().n; ++i)
        worst = std::max(worst, std::fabs(full.values()[i] - diag.values()[i]));
    CHECK(worst < 1e-3);

    auto cfg2 = spinhalf::BlochConfig::planar(M_PI / 3.0, M_PI / 2.0, lam, 2.0, 10.0, lam / 0.01);
    auto gen2 = spinhalf::to_generic(cfg2);
    const auto with = exact_stats::conditional_distribution(gen2.sys, gen2.rho_i, gen2.scheme,
                                                            gen2.probe, gen2.profile,
                                                            gen2.dispersion, gen2.deco);
    const auto without = exact_stats::conditional_distribution(gen2.sys, gen2.rho_i, gen2.scheme,
                                                               gen2.probe, gen2.profile,
                                                               gen2.dispersion);
    worst = 0.0;
    for (std::size_t i = 0; i < with.grid().n; ++i)
        worst = std::max(worst, std::fabs(with.values()[i] - without.values()[i]));
    CHECK(worst < 1e-4);
}

TEST_CASE("postselection-impossible raises") {
    core::SystemSpec sys({1.0, -1.0});
    Eigen::VectorXcd up(2), down(2);
    up << 1.0, 0.0;
    down << 0.0, 1.0;
    core::DensityMatrix rho_i = core::DensityMatrix::pure(up);
    core::PostselectionScheme ortho({0.0, 1.0}); // postselect |down> only
    probe::GaussianProbe probe(1.0, 2.0);
    auto profile = dynamics::CouplingProfile::constant(1.0, 0.0); // lambda = 0: P_post = 0
    auto disp = probe::DispersionRelation::quadratic(1.0);
    CHECK_THROWS_AS(exact_stats::conditional_distribution(sys, rho_i, ortho, probe, profile, disp),
                    PhysicsError);
}

TEST_CASE("general-dispersion quadrature path agrees with the closed-phase path") {
    auto gen = near_orthogonal_setup(0.6);
    const double M = *gen.dispersion.quadratic_mass;
    probe::DispersionRelation quad_as_callable;
    quad_as_callable.omega = [M](double k) { return 0.5 * k * k / M; };
    quad_as_callable.omega_d1 = [M](double k) { return k / M; };
    quad_as_callable.omega_d2 = [M](double) { return 1.0 / M; };
    // quadratic_mass left unset: forces per-point quadrature of the phases
    for (double k : {-1.5, 0.0, 0.7, 2.2}) {
        const double fast = exact_stats::joint_probability(k, gen.sys, gen.rho_i, gen.scheme,
                                                           gen.probe, gen.profile, gen.dispersion);
        const double slow = exact_stats::joint_probability(k, gen.sys, gen.rho_i, gen.scheme,
                                                           gen.probe, gen.profile, quad_as_callable);
        CHECK(fast == doctest::Approx(slow).epsilon(1e-10));
    }
}

TEST_CASE("von Neumann limit: omega = 0 removes all phases") {
    core::SystemSpec sys({1.0, -1.0});
    Eigen::VectorXcd plus(2);
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    core::DensityMatrix rho_i = core::DensityMatrix::pure(plus);
    core::PostselectionScheme scheme({1.0, 0.4});
    probe::GaussianProbe probe(1.0, 1.8);
    auto profile = dynamics::CouplingProfile::constant(1.0, 0.45);
    probe::DispersionRelation none;
    none.omega = [](double) { return 0.0; };
    none.omega_d1 = [](double) { return 0.0; };
    none.omega_d2 = [](double) { return 0.0; };
    const auto rho_f = core::postselected_state(scheme);
    const double W = scheme.total_weight();
    for (double k : {-1.0, 0.3, 1.4}) {
        std::complex<double> expect{};
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                const double a = sys.eigenvalues[i], ap = sys.eigenvalues[j];
                expect += W * rho_f(j, i) * rho_i(i, j) * probe.rho0(k - 0.45 * a, k - 0.45 * ap);
            }
        CHECK(exact_stats::joint_probability(k, sys, rho_i, scheme, probe, profile, none)
              == doctest::Approx(expect.real()).epsilon(1e-12));
    }
}

TEST_CASE("three-level system with degenerate eigenvalues runs and normalizes") {
    core::SystemSpec sys({1.0, 1.0, -1.0}); // repeated eigenvalue allowed
    core::DensityMatrix rho_i = core::DensityMatrix::maximally_mixed(3);
    core::PostselectionScheme scheme({1.0, 0.2, 0.7});
    probe::GaussianProbe probe(1.0, 1.0);
    auto profile = dynamics::CouplingProfile::triangular(0.8, 0.45);
    auto disp = probe::DispersionRelation::from_hamiltonian_scale(1.7, profile.tau_n(0));
    const auto dist = exact_stats::conditional_distribution(sys, rho_i, scheme, probe, profile, disp);
    CHECK(trapezoid(dist.grid(), dist.values()) == doctest::Approx(1.0).epsilon(1e-8));
    for (double v : dist.values()) CHECK(v >= -1e-12);
}
