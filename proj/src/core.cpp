#include "qwit/core.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "qwit/errors.hpp"

namespace qwit {

namespace {

void require_square(const ComplexMatrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() < 1) {
        throw DimensionError(std::string(what) + ": expected a non-empty square matrix, got " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    if (!m.allFinite()) {
        throw ValidationError(std::string(what) + ": non-finite entry");
    }
}

void require_same_dim(int a, int b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
    }
}

}  // namespace

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("max_abs_diff: shape mismatch");
    }
    return (a - b).cwiseAbs().maxCoeff();
}

bool is_unitary(const ComplexMatrix& m, double tolerance) {
    if (m.rows() != m.cols()) return false;
    ComplexMatrix prod = m.adjoint() * m;
    return max_abs_diff(prod, ComplexMatrix::Identity(m.rows(), m.cols())) <= tolerance;
}

bool is_hermitian(const ComplexMatrix& m, double tolerance) {
    if (m.rows() != m.cols()) return false;
    return max_abs_diff(m, m.adjoint()) <= tolerance;
}

// ---- PureState ------------------------------------------------------------

PureState PureState::from_amplitudes(ComplexVector amplitudes) {
    if (amplitudes.size() < 1) throw DimensionError("PureState: empty amplitude vector");
    if (!amplitudes.allFinite()) throw ValidationError("PureState: non-finite amplitude");
    const double norm2 = amplitudes.squaredNorm();
    if (std::abs(norm2 - 1.0) > tol::kInvariant) {
        throw ValidationError("PureState: squared norm " + std::to_string(norm2) + " is not 1");
    }
    return PureState(std::move(amplitudes));
}

PureState PureState::normalized(ComplexVector amplitudes) {
    if (amplitudes.size() < 1) throw DimensionError("PureState: empty amplitude vector");
    if (!amplitudes.allFinite()) throw ValidationError("PureState: non-finite amplitude");
    const double norm2 = amplitudes.squaredNorm();
    if (std::abs(norm2 - 1.0) > tol::kInputNorm) {
        throw ValidationError("PureState: squared norm " + std::to_string(norm2) +
                              " outside the 1e-9 normalization band");
    }
    amplitudes /= std::sqrt(norm2);
    return PureState(std::move(amplitudes));
}

PureState PureState::basis_state(int dim, int index) {
    if (dim < 1) throw DimensionError("PureState: dimension must be >= 1");
    if (index < 0 || index >= dim) throw DimensionError("PureState: basis index out of range");
    ComplexVector v = ComplexVector::Zero(dim);
    v(index) = 1.0;
    return PureState(std::move(v));
}

QuantumState PureState::density() const { return QuantumState::from_matrix(outer()); }

// ---- QuantumState ---------------------------------------------------------

QuantumState QuantumState::from_matrix(ComplexMatrix rho) {
    require_square(rho, "QuantumState");
    if (!is_hermitian(rho)) throw ValidationError("QuantumState: matrix is not Hermitian");
    const Complex tr = rho.trace();
    if (std::abs(tr - Complex(1.0, 0.0)) > tol::kInvariant) {
        throw ValidationError("QuantumState: trace " + std::to_string(tr.real()) + " is not 1");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(Eigen::MatrixXcd(rho), Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < tol::kPsdFloor) {
        throw ValidationError("QuantumState: matrix is not positive semidefinite");
    }
    return QuantumState(std::move(rho));
}

QuantumState QuantumState::maximally_mixed(int dim) {
    if (dim < 1) throw DimensionError("QuantumState: dimension must be >= 1");
    return QuantumState(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

std::vector<double> QuantumState::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(Eigen::MatrixXcd(rho_), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

// ---- UnitaryChannel -------------------------------------------------------

UnitaryChannel UnitaryChannel::from_matrix(ComplexMatrix u) {
    require_square(u, "UnitaryChannel");
    if (!is_unitary(u)) throw ValidationError("UnitaryChannel: matrix is not unitary within 1e-12");
    return UnitaryChannel(std::move(u));
}

UnitaryChannel UnitaryChannel::identity(int dim) {
    if (dim < 1) throw DimensionError("UnitaryChannel: dimension must be >= 1");
    return UnitaryChannel(ComplexMatrix::Identity(dim, dim));
}

UnitaryChannel UnitaryChannel::diagonal(std::span<const Complex> phases) {
    if (phases.empty()) throw DimensionError("UnitaryChannel: empty phase list");
    const auto n = static_cast<Eigen::Index>(phases.size());
    ComplexMatrix u = ComplexMatrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) u(k, k) = phases[static_cast<std::size_t>(k)];
    return from_matrix(std::move(u));
}

UnitaryChannel UnitaryChannel::operator*(const UnitaryChannel& rhs) const {
    require_same_dim(dim(), rhs.dim(), "UnitaryChannel product");
    return UnitaryChannel(u_ * rhs.u_);
}

// ---- Projector ------------------------------------------------------------

Projector Projector::from_matrix(ComplexMatrix p) {
    require_square(p, "Projector");
    if (!is_hermitian(p)) throw ValidationError("Projector: matrix is not Hermitian");
    if (max_abs_diff(p * p, p) > tol::kInvariant) {
        throw ValidationError("Projector: matrix is not idempotent");
    }
    return Projector(std::move(p));
}

Projector Projector::rank_one(const PureState& state) { return from_matrix(state.outer()); }

// ---- OrthonormalBasis -----------------------------------------------------

OrthonormalBasis OrthonormalBasis::computational(int dim) {
    if (dim < 1) throw DimensionError("OrthonormalBasis: dimension must be >= 1");
    std::vector<PureState> v;
    v.reserve(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) v.push_back(PureState::basis_state(dim, i));
    return OrthonormalBasis(std::move(v));
}

OrthonormalBasis OrthonormalBasis::from_vectors(std::vector<ComplexVector> vectors) {
    const auto n = static_cast<Eigen::Index>(vectors.size());
    if (n < 1) throw DimensionError("OrthonormalBasis: no vectors");
    for (const auto& v : vectors) {
        if (v.size() != n) throw DimensionError("OrthonormalBasis: need N vectors of length N");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const Complex expected = (i == j) ? 1.0 : 0.0;
            const auto ui = static_cast<std::size_t>(i);
            const auto uj = static_cast<std::size_t>(j);
            if (std::abs(vectors[ui].dot(vectors[uj]) - expected) > tol::kInvariant) {
                throw ValidationError("OrthonormalBasis: vectors are not orthonormal");
            }
        }
    }
    std::vector<PureState> states;
    states.reserve(vectors.size());
    for (auto& v : vectors) states.push_back(PureState::from_amplitudes(std::move(v)));
    return OrthonormalBasis(std::move(states));
}

OrthonormalBasis OrthonormalBasis::from_columns(const UnitaryChannel& u) {
    std::vector<ComplexVector> cols;
    for (int k = 0; k < u.dim(); ++k) cols.emplace_back(u.matrix().col(k));
    return from_vectors(std::move(cols));
}

ComplexMatrix OrthonormalBasis::columns() const {
    const int n = dim();
    ComplexMatrix m(n, n);
    for (int k = 0; k < n; ++k) m.col(k) = vectors_[static_cast<std::size_t>(k)].amplitudes();
    return m;
}

// ---- operations -----------------------------------------------------------

PureState make_superposition(const OrthonormalBasis& basis, std::span<const Complex> coefficients) {
    require_same_dim(basis.dim(), static_cast<int>(coefficients.size()), "make_superposition");
    ComplexVector coeffs(basis.dim());
    for (int i = 0; i < basis.dim(); ++i) coeffs(i) = coefficients[static_cast<std::size_t>(i)];
    const double norm2 = coeffs.squaredNorm();
    if (std::abs(norm2 - 1.0) > tol::kInputNorm) {
        throw ValidationError("make_superposition: coefficient norm^2 " + std::to_string(norm2) +
                              " outside the 1e-9 band");
    }
    return PureState::normalized(basis.columns() * coeffs);
}

QuantumState apply_unitary(const QuantumState& state, const UnitaryChannel& u) {
    require_same_dim(state.dim(), u.dim(), "apply_unitary");
    ComplexMatrix out = u.matrix() * state.rho() * u.matrix().adjoint();
    // Restore exact hermiticity lost to round-off before revalidating.
    out = 0.5 * (out + out.adjoint()).eval();
    return QuantumState::from_matrix(std::move(out));
}

QuantumState apply_dephasing(const QuantumState& state, const OrthonormalBasis& basis) {
    require_same_dim(state.dim(), basis.dim(), "apply_dephasing");
    std::vector<int> singletons(static_cast<std::size_t>(basis.dim()));
    for (int i = 0; i < basis.dim(); ++i) singletons[static_cast<std::size_t>(i)] = i;
    return apply_block_dephasing(state, basis, singletons);
}

QuantumState apply_block_dephasing(const QuantumState& state, const OrthonormalBasis& basis,
                                   std::span<const int> groups) {
    require_same_dim(state.dim(), basis.dim(), "apply_block_dephasing");
    require_same_dim(basis.dim(), static_cast<int>(groups.size()), "apply_block_dephasing groups");
    const ComplexMatrix b = basis.columns();
    // Work in the basis frame, zero inter-block coherences, rotate back.
    ComplexMatrix in_basis = b.adjoint() * state.rho() * b;
    const int n = basis.dim();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (groups[static_cast<std::size_t>(i)] != groups[static_cast<std::size_t>(j)]) {
                in_basis(i, j) = 0.0;
            }
        }
    }
    ComplexMatrix out = b * in_basis * b.adjoint();
    out = 0.5 * (out + out.adjoint()).eval();
    return QuantumState::from_matrix(std::move(out));
}

double born_probability(const QuantumState& state, const Projector& projector) {
    require_same_dim(state.dim(), projector.dim(), "born_probability");
    const double p = (projector.matrix() * state.rho()).trace().real();
    if (p < -tol::kInvariant || p > 1.0 + tol::kInvariant) {
        throw ValidationError("born_probability: value " + std::to_string(p) + " outside [0,1]");
    }
    return std::clamp(p, 0.0, 1.0);
}

UnitaryChannel random_unitary(int dim, std::uint64_t seed) {
    if (dim < 1) throw DimensionError("random_unitary: dimension must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd z(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            z(i, j) = Complex(re, im);
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd& r = qr.matrixQR();
    for (int k = 0; k < dim; ++k) {
        const Complex d = r(k, k);
        const double mag = std::abs(d);
        q.col(k) *= (mag > 0.0) ? d / mag : Complex(1.0, 0.0);
    }
    return UnitaryChannel::from_matrix(ComplexMatrix(q));
}

PureState random_pure_state(int dim, std::uint64_t seed) {
    const UnitaryChannel u = random_unitary(dim, seed);
    return PureState::normalized(u.matrix().col(0));
}

}  // namespace qwit
