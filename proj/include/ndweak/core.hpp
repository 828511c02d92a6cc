// core.hpp — finite-dimensional state algebra, postselection bookkeeping,
// normal weak values
#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ndweak/errors.hpp"

namespace ndweak::core {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// System described in the joint eigenbasis of the measured observable A and
// the system Hamiltonian ([A, H_S] = 0). Inputs in other bases must be
// pre-rotated by the caller. Repeated eigenvalues are allowed; all sums run
// over basis indices, not distinct eigenvalues.
struct SystemSpec {
    std::vector<double> eigenvalues;   // a, one per basis state
    std::vector<double> frequencies;   // omega_S(a), rad/time, one per basis state

    SystemSpec(std::vector<double> a, std::vector<double> omega);
    explicit SystemSpec(std::vector<double> a);

    std::size_t dimension() const { return eigenvalues.size(); }
    // a_M: maximum distance between eigenvalues of A.
    double eigenvalue_span() const;
    // max |a|, the natural scale of the observable.
    double eigenvalue_scale() const;
};

// Density matrix in the SystemSpec basis. Construction enforces hermiticity
// (1e-12), unit trace (1e-12) and positive semidefiniteness (eigenvalues
// >= -1e-10, tolerance absorbing construction noise).
class DensityMatrix {
public:
    explicit DensityMatrix(Matrix rho);

    const Matrix& matrix() const { return rho_; }
    std::size_t dimension() const { return static_cast<std::size_t>(rho_.rows()); }
    Complex operator()(std::size_t i, std::size_t j) const {
        return rho_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    static DensityMatrix pure(const Vector& ket);
    static DensityMatrix maximally_mixed(std::size_t dim);
    // Spin-1/2 state (1 + v.sigma)/2 expressed in the eigenbasis of the
    // measurement axis 'axis' (|+> first). |v| <= 1, |axis| = 1.
    static DensityMatrix from_bloch(const Eigen::Vector3d& v, const Eigen::Vector3d& axis);

private:
    Matrix rho_;
};

// Projective postselection basis {|S>} with acceptance probabilities w(S).
// The basis is given by the columns of 'basis' (unitary); by default the
// SystemSpec basis itself.
struct PostselectionScheme {
    std::vector<double> weights;        // w(S) in [0, 1]
    std::optional<Matrix> basis;        // columns |S>; identity when absent

    PostselectionScheme(std::vector<double> w, std::optional<Matrix> b = std::nullopt);

    std::size_t dimension() const { return weights.size(); }
    double total_weight() const;        // W = sum w(S), in [0, D]
};

// Normalized postselected mixed state rho_f = sum w(S)|S><S| / W.
DensityMatrix postselected_state(const PostselectionScheme& scheme);

// Normal weak values alpha_{m,n} = Tr{A^m rho_f A^n rho_i} and the derived
// ratios. When alpha_{0,0} vanishes (orthogonal pre/postselection, NOPPS)
// the ratios are meaningless; 'nopps' is set and A_w, B_w are NaN while the
// raw alphas stay usable.
struct WeakValueSet {
    double alpha00 = 0.0;      // real and >= 0
    Complex alpha01{};         // alpha10 = conj(alpha01)
    double alpha11 = 0.0;      // real and >= 0
    Complex alpha02{};         // alpha20 = conj(alpha02)
    Complex A_w{};             // alpha01 / alpha00
    double B_w = 0.0;          // alpha11 / alpha00, >= |A_w|^2
    bool nopps = false;
};

// alpha_{m,n} with A diagonal: sum_{b,c} a_b^m a_c^n <b|rho_f|c><c|rho_i|b>.
Complex alpha(unsigned m, unsigned n, const DensityMatrix& rho_i,
              const DensityMatrix& rho_f, const SystemSpec& sys);

WeakValueSet weak_values(const DensityMatrix& rho_i, const DensityMatrix& rho_f,
                         const SystemSpec& sys);

// First-order mean formulas hold only away from NOPPS; threshold
// alpha00 >= 0.01 * sqrt(alpha11) / max|a|.
bool away_from_nopps(const WeakValueSet& wv, double eigenvalue_scale);

} // namespace ndweak::core
