#include <doctest.h>

#include <cmath>

#include "ndweak/probe.hpp"

using namespace ndweak;
using probe::GaussianProbe;
using probe::GridProbe;

TEST_CASE("Gaussian probe construction and scales") {
    GaussianProbe g(1.0, 2.0);
    CHECK(g.delta_x() == doctest::Approx(0.5)); // minimum-uncertainty: kappa = 2 Delta
    CHECK_THROWS_AS(GaussianProbe(1.0, 2.5), PhysicsError);
    CHECK_THROWS_AS(GaussianProbe(-1.0, 1.0), PhysicsError);
    CHECK_THROWS_AS(GaussianProbe(1.0, 0.0), PhysicsError);

    // diagonal normalization
    const Grid grid = g.default_grid();
    double tr = trapezoid_fn(grid, [&](double k) { return g.p0(k); });
    CHECK(tr == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Wigner function is normalized and has the right marginals") {
    GaussianProbe g(1.0, 1.3, 0.4, -0.7);
    const Grid kg = g.default_grid(513);
    const Grid xg = g.default_x_grid(513);
    // normalization
    double total = 0.0;
    for (std::size_t j = 0; j < xg.n; ++j) {
        const double wx = (j == 0 || j + 1 == xg.n) ? 0.5 : 1.0;
        for (std::size_t i = 0; i < kg.n; ++i) {
            const double wk = (i == 0 || i + 1 == kg.n) ? 0.5 : 1.0;
            total += wx * wk * g.wigner(xg[j], kg[i]);
        }
    }
    total *= xg.dk * kg.dk;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    // x-marginal at a few k equals P0(k)
    for (double k : {-1.0, 0.0, 0.4, 2.0}) {
        double marg = trapezoid_fn(xg, [&](double x) { return g.wigner(x, k); });
        CHECK(marg == doctest::Approx(g.p0(k)).epsilon(1e-6));
    }
}

TEST_CASE("grid probe sampled from the Gaussian matches the closed form") {
    GaussianProbe g(1.0, 1.5, 0.0, 0.3);
    const Grid kg = Grid::spanning(-8.0, 8.0, 513);
    const GridProbe gp = GridProbe::sample(g, kg);
    const probe::WignerGrid wg = wigner(gp);
    double worst = 0.0;
    for (std::size_t j = 0; j < wg.xgrid.n; ++j) {
        const double x = wg.xgrid[j];
        if (std::fabs(x - g.xbar()) > 6.0 * g.delta_x()) continue;
        for (std::size_t i = 0; i < wg.kgrid.n; ++i) {
            const double k = wg.kgrid[i];
            if (std::fabs(k) > 6.0) continue;
            worst = std::max(worst, std::fabs(wg.values(static_cast<Eigen::Index>(j),
                                                        static_cast<Eigen::Index>(i))
                                              - g.wigner(x, k)));
        }
    }
    CHECK(worst < 1e-6);

    // k-marginal of the discrete Wigner equals the diagonal pointwise
    for (std::size_t i : {std::size_t{100}, std::size_t{256}, std::size_t{400}}) {
        double marg = 0.0;
        for (std::size_t j = 0; j < wg.xgrid.n; ++j) {
            const double w = (j == 0 || j + 1 == wg.xgrid.n) ? 0.5 : 1.0;
            marg += w * wg.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
        }
        marg *= wg.xgrid.dk;
        CHECK(marg == doctest::Approx(gp.p0_at(i)).epsilon(1e-6));
    }
}

TEST_CASE("phase-space averages: trivial and Gaussian-moment cases") {
    GaussianProbe g(1.0, 2.0); // Delta_x = 0.5
    CHECK(phase_space_average(g, [](double, double) { return 1.0; })
          == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(phase_space_average(g, [](double x, double) { return x * x; })
          == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(g.moment(2, 0) == doctest::Approx(0.25));
    CHECK(g.moment(0, 2) == doctest::Approx(1.0));
    CHECK(g.moment(0, 4) == doctest::Approx(3.0)); // Gaussian kurtosis
    CHECK_THROWS_AS(phase_space_average(
                        g, [](double, double) { return std::numeric_limits<double>::quiet_NaN(); }),
                    PhysicsError);
}

TEST_CASE("x-k correlated grid probe reproduces the chirp covariance") {
    GaussianProbe base(1.0, 1.6);
    const double mu = 0.35;
    const Grid kg = Grid::spanning(-8.0, 8.0, 385);
    const GridProbe gp = GridProbe::chirped_gaussian(base, mu, kg);
    // C(x, k) = -mu Delta_k^2 for the chirped Gaussian
    auto fx = [](double x, double) { return x; };
    auto fk = [](double, double k) { return k; };
    const double cov = probe::covariance(gp, fx, fk);
    CHECK(cov == doctest::Approx(-mu).epsilon(2e-3));
    // f = x k against a double-resolution quadrature oracle
    const GridProbe fine = GridProbe::chirped_gaussian(base, mu, Grid::spanning(-8.0, 8.0, 769));
    const double xk_coarse = phase_space_average(gp, [](double x, double k) { return x * k; });
    const double xk_fine = phase_space_average(fine, [](double x, double k) { return x * k; });
    CHECK(std::fabs(xk_coarse - xk_fine) < 1e-5);
}

TEST_CASE("conditional averages") {
    GaussianProbe g(1.0, 2.0);
    // odd integrand vanishes; x^2 gives Delta_x^2 independent of k
    CHECK(std::fabs(conditional_average(g, [](double x, double) { return x; }, 0.8)) < 1e-12);
    CHECK(conditional_average(g, [](double x, double) { return x * x; }, -1.1)
          == doctest::Approx(0.25).epsilon(1e-9));
    CHECK_THROWS_AS(conditional_average(g, [](double x, double) { return x; }, 60.0),
                    PhysicsError);

    // conditional mean of x tracks -mu*k for the chirped probe
    const double mu = 0.4;
    const Grid kg = Grid::spanning(-8.0, 8.0, 385);
    const GridProbe gp = GridProbe::chirped_gaussian(GaussianProbe(1.0, 1.6), mu, kg);
    for (double k : {-1.0, 0.5, 1.5}) {
        const double got = conditional_average(gp, [](double x, double) { return x; }, k);
        CHECK(got == doctest::Approx(-mu * k).epsilon(0.02));
    }

    // integrating conditional_average * P0 over k reproduces the full average
    // (inside the window where P0 stays above the conditioning tolerance)
    auto f = [](double x, double k) { return x * x + 0.3 * k; };
    const double full = phase_space_average(g, f);
    const Grid grid = Grid::spanning(-6.5, 6.5, 261);
    const double reassembled = trapezoid_fn(grid, [&](double k) {
        return conditional_average(g, f, k) * g.p0(k);
    });
    CHECK(std::fabs(full - reassembled) < 1e-6);
}

TEST_CASE("covariance basics") {
    GaussianProbe g(1.0, 2.0);
    auto fx = [](double x, double) { return x; };
    auto fk = [](double, double k) { return k; };
    CHECK(probe::covariance(g, fx, fx) == doctest::Approx(0.25).epsilon(1e-9)); // Delta_x^2
    CHECK(std::fabs(probe::covariance(g, fx, fk)) < 1e-12); // separable Wigner function

    // C(x_tau0, k) for quadratic dispersion: (tau0 / M) Delta_k^2
    const double tau0 = 0.5, kH = 3.0;
    const double M = kH * kH * tau0;
    auto disp = probe::DispersionRelation::quadratic(M);
    auto fxt = [&](double x, double k) { return x + disp.omega_d1(k) * tau0; };
    CHECK(probe::covariance(g, fxt, fk) == doctest::Approx(tau0 / M).epsilon(1e-8));
}

TEST_CASE("dispersion relation presets") {
    auto d = probe::DispersionRelation::quadratic(2.0);
    CHECK(d.is_quadratic());
    CHECK(d.omega(3.0) == doctest::Approx(2.25));
    CHECK(d.omega_d1(3.0) == doctest::Approx(1.5));
    CHECK(d.omega_d2(-7.0) == doctest::Approx(0.5)); // constant for quadratic

    auto h = probe::DispersionRelation::from_hamiltonian_scale(10.0, 0.5);
    CHECK(*h.quadratic_mass == doctest::Approx(50.0)); // M = k_H^2 tau0
}

TEST_CASE("grid probe validation") {
    const Grid kg = Grid::spanning(-4.0, 4.0, 65);
    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(65, 65);
    bad(0, 1) = 0.5; // not Hermitian
    CHECK_THROWS_AS(GridProbe(kg, bad), PhysicsError);
}
