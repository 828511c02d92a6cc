// spinhalf.hpp — closed-form exact expressions for a spin-1/2 system
// measured along a, preselected with Bloch vector m and postselected with n.
// All quantities are in units of Delta_k (Delta_k = 1, kbar = xbar = 0).
#pragma once

#include <complex>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "ndweak/exact_stats.hpp"
#include "ndweak/grid.hpp"

namespace ndweak::spinhalf {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;

struct BlochConfig {
    Vec3 m = Vec3::Zero();   // preselection, |m| <= 1
    Vec3 n = Vec3::Zero();   // postselection, |n| <= 1
    Vec3 a = Vec3::UnitZ();  // measurement axis, |a| = 1
    double lambda = 0.0;
    double kappa_k = 2.0;    // <= 2 in Delta_k units
    double k_H = 10.0;
    double K_D = std::numeric_limits<double>::infinity();
    double epsilon = 1.0 / 12.0;

    BlochConfig() = default;
    BlochConfig(Vec3 m_, Vec3 n_, Vec3 a_, double lambda_, double kappa_, double kH_,
                double KD_ = std::numeric_limits<double>::infinity(),
                double eps_ = 1.0 / 12.0);

    // Preselection at polar angle theta_m from a and postselection at angle
    // theta_m + angle_between, both unit vectors in the m-a plane.
    static BlochConfig planar(double theta_m, double angle_between, double lambda,
                              double kappa, double kH,
                              double KD = std::numeric_limits<double>::infinity());

    // Decoherence suppression of the coherent (a != a') terms,
    // exp{-2 eps lambda^2 (a-a')^2 / K_D^2} at (a-a')^2 = 4.
    double coherent_decoherence_factor() const;
};

double spin_p_post(const BlochConfig& cfg);
double spin_joint_probability(const BlochConfig& cfg, double k);
Complex spin_characteristic_function(const BlochConfig& cfg, double theta);

// Exact Q(k) plus the dominant oscillation period measured from the spacing
// of local maxima of the coherent residual Q - Q_diag. The regime flag is set
// when k_osc = pi k_H^2 / lambda does not exceed Delta_k; outside that regime
// the oscillations are not discernible and no period is reported.
struct OscillationScan {
    exact_stats::ReadoutDistribution dist;
    double period = std::numeric_limits<double>::quiet_NaN();
    double k_osc_predicted = 0.0;
    bool oscillatory = false;
};
OscillationScan oscillation_scan(const BlochConfig& cfg, const Grid& grid);

// The same measurement expressed through the generic engine (constant
// profile with tau = 1, quadratic dispersion with M = k_H^2 tau_0); the
// central cross-validation of the repository.
struct GenericEquivalent {
    core::SystemSpec sys;
    core::DensityMatrix rho_i;
    core::PostselectionScheme scheme;
    probe::GaussianProbe probe;
    dynamics::CouplingProfile profile;
    probe::DispersionRelation dispersion;
    std::optional<exact_stats::DecoherenceModel> deco;
};
GenericEquivalent to_generic(const BlochConfig& cfg);

} // namespace ndweak::spinhalf
