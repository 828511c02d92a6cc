// exact_stats.hpp — exact joint and conditional readout statistics for
// arbitrary finite-dimensional systems, with optional decoherence.
#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "ndweak/core.hpp"
#include "ndweak/dynamics.hpp"
#include "ndweak/grid.hpp"
#include "ndweak/probe.hpp"

namespace ndweak::exact_stats {

using Complex = std::complex<double>;

// Effective probe decoherence from a delta-correlated random force:
// every (a, a') term acquires exp{-lambda^2 (a-a')^2 gamma kB_T eps tau^3 / M}.
// The scale K_D = [gamma kB_T tau^3 / 2M]^{-1/2} does not include eps.
struct DecoherenceModel {
    double gamma = 0.0;       // decoherence rate; 0 switches decoherence off
    double kB_T = 1.0;        // temperature factor
    double epsilon = 1.0 / 12.0; // profile shape factor (convention, user-supplied)
    double mass = 1.0;

    static DecoherenceModel from_microscopic(double gamma, double kB_T, double eps, double mass);
    // Fix gamma*kB_T/mass so that K_D(tau) equals the given scale.
    static DecoherenceModel from_scale(double K_D, double eps, double tau);

    double K_D(double tau) const;  // infinity when gamma * kB_T == 0
    double off_diagonal_factor(double lambda, double a_diff, double tau) const;
};

// Tabulated distribution on a uniform k-grid with its postselection
// probability. Construction checks normalization (1e-8) and, for exact
// distributions, nonnegativity (-1e-12); interpolated distributions may dip
// slightly negative in the tails and skip that check.
class ReadoutDistribution {
public:
    ReadoutDistribution(Grid grid, std::vector<double> values, double p_post,
                        bool enforce_nonnegative = true);

    const Grid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double p_post() const { return p_post_; }

    double moment(unsigned n) const;                 // <k^n>, n <= 4
    Complex characteristic(double theta) const;      // Int e^{i theta k} Q dk

private:
    Grid grid_;
    std::vector<double> values_;
    double p_post_;
};

enum class Parts { All, Diagonal, OffDiagonal };

// P(k, rho_f) = W sum_{a,a'} <a'|rho_f|a><a|rho_i|a'> e^{-i[Gamma_a - Gamma_a']}
//               rho0(k - lambda a, k - lambda a') [x decoherence factor].
// The W prefactor multiplies the decohered form as well; it cancels in Q.
double joint_probability(double k, const core::SystemSpec& sys,
                         const core::DensityMatrix& rho_i,
                         const core::PostselectionScheme& scheme,
                         const probe::GaussianProbe& probe,
                         const dynamics::CouplingProfile& profile,
                         const probe::DispersionRelation& dispersion,
                         const std::optional<DecoherenceModel>& deco = std::nullopt,
                         Parts parts = Parts::All);

// Int P(k, rho_f) dk by grid quadrature on an internal wide grid
// ([kbar - (10 + lambda a_M) Dk, ...], 8192 points) so that division by small
// postselection probabilities stays accurate.
double postselection_probability(const core::SystemSpec& sys,
                                 const core::DensityMatrix& rho_i,
                                 const core::PostselectionScheme& scheme,
                                 const probe::GaussianProbe& probe,
                                 const dynamics::CouplingProfile& profile,
                                 const probe::DispersionRelation& dispersion,
                                 const std::optional<DecoherenceModel>& deco = std::nullopt,
                                 Parts parts = Parts::All);

// Q(k) = P(k, rho_f) / P_post on the given grid (probe default grid when
// omitted). Requires P_post > 1e-14.
ReadoutDistribution conditional_distribution(const core::SystemSpec& sys,
                                             const core::DensityMatrix& rho_i,
                                             const core::PostselectionScheme& scheme,
                                             const probe::GaussianProbe& probe,
                                             const dynamics::CouplingProfile& profile,
                                             const probe::DispersionRelation& dispersion,
                                             const std::optional<DecoherenceModel>& deco = std::nullopt,
                                             std::optional<Grid> grid = std::nullopt,
                                             Parts parts = Parts::All);

// Moments <k^0..n_max> of a tabulated distribution, n_max <= 4.
std::vector<double> distribution_moments(const ReadoutDistribution& dist, unsigned n_max);

// Exact characteristic function by quadrature over the tabulated Q.
Complex exact_characteristic_function(const ReadoutDistribution& dist, double theta);

} // namespace ndweak::exact_stats
