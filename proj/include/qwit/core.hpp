#pragma once

// Dense qudit linear algebra: validated states, channels, projectors and
// bases over an N-dimensional Hilbert space, plus the handful of maps the
// witness engine composes (unitary evolution, basis dephasing, Born rule).

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qwit {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::VectorXcd;

namespace tol {
/// Constructor invariants (unitarity, hermiticity, trace, idempotence).
inline constexpr double kInvariant = 1e-12;
/// Checks on quantities derived through several products.
inline constexpr double kDerived = 1e-10;
/// Band within which user-supplied amplitudes are silently renormalized.
inline constexpr double kInputNorm = 1e-9;
/// Smallest eigenvalue accepted for a density matrix.
inline constexpr double kPsdFloor = -1e-10;
}  // namespace tol

/// Largest entrywise modulus of a - b. Shapes must agree.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
bool is_unitary(const ComplexMatrix& m, double tolerance = tol::kInvariant);
bool is_hermitian(const ComplexMatrix& m, double tolerance = tol::kInvariant);

class QuantumState;

/// Normalized state vector |psi>.
class PureState {
public:
    /// Requires sum |a_i|^2 = 1 within 1e-12.
    static PureState from_amplitudes(ComplexVector amplitudes);
    /// Renormalizes when the norm is within the 1e-9 input band, rejects otherwise.
    static PureState normalized(ComplexVector amplitudes);
    static PureState basis_state(int dim, int index);

    int dim() const { return static_cast<int>(amplitudes_.size()); }
    const ComplexVector& amplitudes() const { return amplitudes_; }
    Complex operator[](int i) const { return amplitudes_(i); }

    Complex inner(const PureState& other) const { return amplitudes_.dot(other.amplitudes_); }
    ComplexMatrix outer() const { return amplitudes_ * amplitudes_.adjoint(); }
    QuantumState density() const;

private:
    explicit PureState(ComplexVector a) : amplitudes_(std::move(a)) {}
    ComplexVector amplitudes_;
};

/// Density operator rho: Hermitian, unit trace, positive semidefinite.
class QuantumState {
public:
    static QuantumState from_matrix(ComplexMatrix rho);
    static QuantumState maximally_mixed(int dim);

    int dim() const { return static_cast<int>(rho_.rows()); }
    const ComplexMatrix& rho() const { return rho_; }
    Complex trace() const { return rho_.trace(); }
    /// Ascending eigenvalues.
    std::vector<double> eigenvalues() const;

private:
    explicit QuantumState(ComplexMatrix rho) : rho_(std::move(rho)) {}
    ComplexMatrix rho_;
};

class UnitaryChannel {
public:
    /// Requires U^dagger U = I within 1e-12 entrywise.
    static UnitaryChannel from_matrix(ComplexMatrix u);
    static UnitaryChannel identity(int dim);
    /// diag(phases); each entry must have unit modulus.
    static UnitaryChannel diagonal(std::span<const Complex> phases);

    int dim() const { return static_cast<int>(u_.rows()); }
    const ComplexMatrix& matrix() const { return u_; }
    UnitaryChannel adjoint() const { return UnitaryChannel(u_.adjoint()); }
    UnitaryChannel operator*(const UnitaryChannel& rhs) const;

private:
    explicit UnitaryChannel(ComplexMatrix u) : u_(std::move(u)) {}
    ComplexMatrix u_;
};

class Projector {
public:
    /// Requires hermiticity and idempotence within 1e-12.
    static Projector from_matrix(ComplexMatrix p);
    static Projector rank_one(const PureState& state);
    static Projector basis(int dim, int index) { return rank_one(PureState::basis_state(dim, index)); }

    int dim() const { return static_cast<int>(p_.rows()); }
    const ComplexMatrix& matrix() const { return p_; }

private:
    explicit Projector(ComplexMatrix p) : p_(std::move(p)) {}
    ComplexMatrix p_;
};

/// The preferred (fixed-point) basis {|psi_i>}.
class OrthonormalBasis {
public:
    static OrthonormalBasis computational(int dim);
    /// Requires <v_i|v_j> = delta_ij within 1e-12.
    static OrthonormalBasis from_vectors(std::vector<ComplexVector> vectors);
    /// Columns of a unitary taken as the basis vectors.
    static OrthonormalBasis from_columns(const UnitaryChannel& u);

    int dim() const { return static_cast<int>(vectors_.size()); }
    const std::vector<PureState>& states() const { return vectors_; }
    const PureState& operator[](int i) const { return vectors_.at(static_cast<std::size_t>(i)); }
    /// Matrix whose columns are the basis vectors.
    ComplexMatrix columns() const;

private:
    explicit OrthonormalBasis(std::vector<PureState> v) : vectors_(std::move(v)) {}
    std::vector<PureState> vectors_;
};

/// sum_i alpha_i |psi_i>, normalized.
PureState make_superposition(const OrthonormalBasis& basis, std::span<const Complex> coefficients);

/// U rho U^dagger.
QuantumState apply_unitary(const QuantumState& state, const UnitaryChannel& u);

/// Completely dephasing channel in `basis`: sum_m <m|rho|m> |m><m|.
QuantumState apply_dephasing(const QuantumState& state, const OrthonormalBasis& basis);

/// Coarse-grained dephasing: basis index k belongs to block groups[k]; coherences
/// between different blocks are removed, coherences inside a block survive.
QuantumState apply_block_dephasing(const QuantumState& state, const OrthonormalBasis& basis,
                                   std::span<const int> groups);

/// Tr(Pi rho), clamped to [0, 1] after a 1e-12 range check.
double born_probability(const QuantumState& state, const Projector& projector);

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the R-diagonal
/// phases folded back into Q. Deterministic in `seed`.
UnitaryChannel random_unitary(int dim, std::uint64_t seed);

/// Haar-random pure state (first column of a Haar unitary).
PureState random_pure_state(int dim, std::uint64_t seed);

}  // namespace qwit
