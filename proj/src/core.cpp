// core.cpp
#include "ndweak/core.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace ndweak::core {

namespace {
constexpr double kHermTol = 1e-12;
constexpr double kTraceTol = 1e-12;
constexpr double kPsdTol = 1e-10;
} // namespace

SystemSpec::SystemSpec(std::vector<double> a, std::vector<double> omega)
    : eigenvalues(std::move(a)), frequencies(std::move(omega)) {
    if (eigenvalues.empty()) throw PhysicsError("SystemSpec: dimension must be positive");
    if (frequencies.size() != eigenvalues.size())
        throw PhysicsError("SystemSpec: eigenvalue and frequency arrays must have equal length");
}

SystemSpec::SystemSpec(std::vector<double> a)
    : eigenvalues(std::move(a)), frequencies(eigenvalues.size(), 0.0) {
    if (eigenvalues.empty()) throw PhysicsError("SystemSpec: dimension must be positive");
}

double SystemSpec::eigenvalue_span() const {
    double lo = eigenvalues.front(), hi = eigenvalues.front();
    for (double a : eigenvalues) {
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    return hi - lo;
}

double SystemSpec::eigenvalue_scale() const {
    double s = 0.0;
    for (double a : eigenvalues) s = std::max(s, std::fabs(a));
    return s;
}

DensityMatrix::DensityMatrix(Matrix rho) : rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols() || rho_.rows() == 0)
        throw PhysicsError("DensityMatrix: matrix must be square and non-empty");
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > kHermTol)
        throw PhysicsError("DensityMatrix: not Hermitian within 1e-12");
    if (std::fabs(rho_.trace().real() - 1.0) > kTraceTol || std::fabs(rho_.trace().imag()) > kTraceTol)
        throw PhysicsError("DensityMatrix: trace must be 1 within 1e-12");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw ConsistencyError("DensityMatrix: eigensolve failed");
    if (es.eigenvalues().minCoeff() < -kPsdTol)
        throw PhysicsError("DensityMatrix: not positive semidefinite (min eigenvalue "
                           + std::to_string(es.eigenvalues().minCoeff()) + ")");
}

DensityMatrix DensityMatrix::pure(const Vector& ket) {
    const double norm = ket.norm();
    if (!(norm > 0.0)) throw PhysicsError("DensityMatrix::pure: null ket");
    Vector psi = ket / norm;
    return DensityMatrix(psi * psi.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
    if (dim == 0) throw PhysicsError("DensityMatrix::maximally_mixed: dim must be > 0");
    Matrix m = Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    return DensityMatrix(m / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::from_bloch(const Eigen::Vector3d& v, const Eigen::Vector3d& axis) {
    if (v.norm() > 1.0 + 1e-12)
        throw PhysicsError("DensityMatrix::from_bloch: |v| must be <= 1");
    if (std::fabs(axis.norm() - 1.0) > 1e-12)
        throw PhysicsError("DensityMatrix::from_bloch: measurement axis must be a unit vector");
    // Orthonormal frame (e1, e2, axis); components of v in that frame give the
    // matrix elements in the axis eigenbasis directly.
    Eigen::Vector3d e1 = std::fabs(axis.z()) < 0.9
        ? axis.cross(Eigen::Vector3d::UnitZ()).normalized()
        : axis.cross(Eigen::Vector3d::UnitX()).normalized();
    Eigen::Vector3d e2 = axis.cross(e1); // right-handed: e1 x e2 = axis
    const double v1 = v.dot(e1), v2 = v.dot(e2), v3 = v.dot(axis);
    Matrix rho(2, 2);
    rho(0, 0) = 0.5 * (1.0 + v3);
    rho(1, 1) = 0.5 * (1.0 - v3);
    rho(0, 1) = 0.5 * Complex(v1, -v2);
    rho(1, 0) = 0.5 * Complex(v1, v2);
    return DensityMatrix(rho);
}

PostselectionScheme::PostselectionScheme(std::vector<double> w, std::optional<Matrix> b)
    : weights(std::move(w)), basis(std::move(b)) {
    if (weights.empty()) throw PhysicsError("PostselectionScheme: empty weight list");
    for (double wi : weights)
        if (wi < 0.0 || wi > 1.0)
            throw PhysicsError("PostselectionScheme: weights must lie in [0, 1]");
    if (basis) {
        const auto d = static_cast<Eigen::Index>(weights.size());
        if (basis->rows() != d || basis->cols() != d)
            throw PhysicsError("PostselectionScheme: basis dimension mismatch");
        if ((basis->adjoint() * (*basis) - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10)
            throw PhysicsError("PostselectionScheme: basis columns must be orthonormal");
    }
}

double PostselectionScheme::total_weight() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

DensityMatrix postselected_state(const PostselectionScheme& scheme) {
    const double W = scheme.total_weight();
    if (!(W > 0.0)) throw PhysicsError("postselected_state: all weights zero, empty postselection");
    const auto d = static_cast<Eigen::Index>(scheme.dimension());
    Matrix rho = Matrix::Zero(d, d);
    if (scheme.basis) {
        for (Eigen::Index s = 0; s < d; ++s) {
            const Vector col = scheme.basis->col(s);
            rho += (scheme.weights[static_cast<std::size_t>(s)] / W) * (col * col.adjoint());
        }
    } else {
        for (Eigen::Index s = 0; s < d; ++s)
            rho(s, s) = scheme.weights[static_cast<std::size_t>(s)] / W;
    }
    return DensityMatrix(std::move(rho));
}

Complex alpha(unsigned m, unsigned n, const DensityMatrix& rho_i,
              const DensityMatrix& rho_f, const SystemSpec& sys) {
    if (m > 4 || n > 4) throw PhysicsError("alpha: powers above 4 not supported");
    const std::size_t D = sys.dimension();
    if (rho_i.dimension() != D || rho_f.dimension() != D)
        throw PhysicsError("alpha: density matrix dimension does not conform to system");
    Complex acc{};
    for (std::size_t b = 0; b < D; ++b) {
        const double bm = std::pow(sys.eigenvalues[b], static_cast<int>(m));
        for (std::size_t c = 0; c < D; ++c) {
            const double cn = std::pow(sys.eigenvalues[c], static_cast<int>(n));
            acc += bm * cn * rho_f(b, c) * rho_i(c, b);
        }
    }
    return acc;
}

WeakValueSet weak_values(const DensityMatrix& rho_i, const DensityMatrix& rho_f,
                         const SystemSpec& sys) {
    WeakValueSet wv;
    const Complex a00 = alpha(0, 0, rho_i, rho_f, sys);
    wv.alpha00 = a00.real();                    // Tr{rho_f rho_i} is real >= 0
    wv.alpha01 = alpha(0, 1, rho_i, rho_f, sys);
    wv.alpha11 = alpha(1, 1, rho_i, rho_f, sys).real();
    wv.alpha02 = alpha(0, 2, rho_i, rho_f, sys);
    const double scale = std::max({1.0, wv.alpha11, std::abs(wv.alpha02)});
    wv.nopps = !(wv.alpha00 > 1e-12 * scale);
    if (wv.nopps) {
        wv.A_w = Complex(std::nan(""), std::nan(""));
        wv.B_w = std::nan("");
    } else {
        wv.A_w = wv.alpha01 / wv.alpha00;
        wv.B_w = wv.alpha11 / wv.alpha00;
    }
    return wv;
}

bool away_from_nopps(const WeakValueSet& wv, double eigenvalue_scale) {
    if (wv.nopps) return false;
    const double scale = eigenvalue_scale > 0.0 ? eigenvalue_scale : 1.0;
    return wv.alpha00 >= 0.01 * std::sqrt(std::max(wv.alpha11, 0.0)) / scale;
}

} // namespace ndweak::core
