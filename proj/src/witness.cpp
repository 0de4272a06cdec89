#include "qwit/witness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "qwit/errors.hpp"

namespace qwit {

namespace {

void require_dim(int expected, int actual, const char* what) {
    if (expected != actual) {
        throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                             ", got " + std::to_string(actual));
    }
}

void validate_groups(const BlindMeasurement& m) {
    const int n = m.basis.dim();
    require_dim(n, static_cast<int>(m.groups.size()), "BlindMeasurement groups");
    std::set<int> labels(m.groups.begin(), m.groups.end());
    const int outcomes = static_cast<int>(labels.size());
    if (*labels.begin() != 0 || *labels.rbegin() != outcomes - 1) {
        throw ValidationError("BlindMeasurement: outcome labels must be exactly 0..M-1");
    }
}

double outcome_probability(const WitnessConfig& config, const QuantumState& state) {
    return born_probability(apply_unitary(state, config.evolution()), config.outcome_projector());
}

WitnessValue evaluate(const WitnessConfig& config, const PureState& preparation) {
    require_dim(config.dim(), preparation.dim(), "witness preparation");
    const QuantumState rho = preparation.density();
    WitnessValue out;
    out.p_b = outcome_probability(config, rho);
    out.p_after = outcome_probability(config, apply_intervention(rho, config.intervention()));
    out.value = out.p_b - out.p_after;
    return out;
}

Complex root_of_unity(int k, int n) {
    return std::polar(1.0, 2.0 * std::numbers::pi * k / n);
}

}  // namespace

// ---- BlindMeasurement -----------------------------------------------------

BlindMeasurement BlindMeasurement::complete(OrthonormalBasis basis) {
    std::vector<int> groups(static_cast<std::size_t>(basis.dim()));
    for (int k = 0; k < basis.dim(); ++k) groups[static_cast<std::size_t>(k)] = k;
    return {std::move(basis), std::move(groups)};
}

BlindMeasurement BlindMeasurement::contiguous(OrthonormalBasis basis, int outcomes) {
    const int n = basis.dim();
    if (outcomes < 1 || outcomes > n) {
        throw ValidationError("BlindMeasurement: need 1 <= M <= N outcomes");
    }
    std::vector<int> groups(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) groups[static_cast<std::size_t>(k)] = k * outcomes / n;
    return {std::move(basis), std::move(groups)};
}

int BlindMeasurement::outcomes() const {
    return static_cast<int>(std::set<int>(groups.begin(), groups.end()).size());
}

std::string to_string(WitnessKind kind) { return kind == WitnessKind::W ? "w" : "v"; }

// ---- WitnessConfig --------------------------------------------------------

WitnessConfig::WitnessConfig(OrthonormalBasis preferred_basis, std::vector<Complex> superposition_coeffs,
                             Intervention intervention, UnitaryChannel evolution, Projector outcome_projector)
    : preferred_basis_(std::move(preferred_basis)),
      coeffs_(std::move(superposition_coeffs)),
      intervention_(std::move(intervention)),
      evolution_(std::move(evolution)),
      projector_(std::move(outcome_projector)) {
    const int n = preferred_basis_.dim();
    require_dim(n, static_cast<int>(coeffs_.size()), "WitnessConfig superposition");
    require_dim(n, evolution_.dim(), "WitnessConfig evolution");
    require_dim(n, projector_.dim(), "WitnessConfig projector");
    if (const auto* blind = std::get_if<BlindMeasurement>(&intervention_)) {
        require_dim(n, blind->basis.dim(), "WitnessConfig blind measurement");
        validate_groups(*blind);
    } else {
        require_dim(n, std::get<PhaseChannel>(intervention_).u0.dim(), "WitnessConfig channel");
    }
    // Normalizes (or rejects) the coefficients up front.
    (void)superposition();
}

WitnessKind WitnessConfig::kind() const {
    return std::holds_alternative<BlindMeasurement>(intervention_) ? WitnessKind::W : WitnessKind::V;
}

PureState WitnessConfig::superposition() const { return make_superposition(preferred_basis_, coeffs_); }

WitnessConfig WitnessConfig::with_intervention(Intervention intervention) const {
    return {preferred_basis_, coeffs_, std::move(intervention), evolution_, projector_};
}

// ---- witnesses ------------------------------------------------------------

QuantumState apply_intervention(const QuantumState& state, const Intervention& intervention) {
    if (const auto* blind = std::get_if<BlindMeasurement>(&intervention)) {
        return apply_block_dephasing(state, blind->basis, blind->groups);
    }
    return apply_unitary(state, std::get<PhaseChannel>(intervention).u0);
}

WitnessValue compute_witness_w(const WitnessConfig& config, const PureState& preparation) {
    if (config.kind() != WitnessKind::W) {
        throw ValidationError("compute_witness_w: intervention is not a blind measurement");
    }
    return evaluate(config, preparation);
}

WitnessValue compute_witness_v(const WitnessConfig& config, const PureState& preparation) {
    if (config.kind() != WitnessKind::V) {
        throw ValidationError("compute_witness_v: intervention is not a unitary channel");
    }
    return evaluate(config, preparation);
}

WitnessValue compute_witness(const WitnessConfig& config, const PureState& preparation) {
    return evaluate(config, preparation);
}

double analytic_v(const PureState& preparation, const UnitaryChannel& u0) {
    require_dim(u0.dim(), preparation.dim(), "analytic_v");
    const Complex overlap = preparation.amplitudes().dot(u0.matrix() * preparation.amplitudes());
    return 1.0 - std::norm(overlap);
}

WitnessReport full_report(const WitnessConfig& config) {
    WitnessReport report;
    report.kind = config.kind();
    for (const PureState& fixed_point : config.preferred_basis().states()) {
        report.control_values.push_back(compute_witness(config, fixed_point).value);
    }
    const WitnessValue sup = compute_witness(config, config.superposition());
    report.superposition_value = sup.value;
    report.p_b = sup.p_b;
    report.p_after = sup.p_after;
    const auto [lo, hi] = std::minmax_element(report.control_values.begin(), report.control_values.end());
    report.violation_margin = sup.value - *hi;
    report.lower_margin = *lo - sup.value;
    report.violated = report.violation_margin > 0.0 || report.lower_margin > 0.0;
    return report;
}

double control_sum(const WitnessConfig& config) {
    double sum = 0.0;
    for (const PureState& fixed_point : config.preferred_basis().states()) {
        sum += compute_witness(config, fixed_point).value;
    }
    return sum;
}

double theoretical_wmax(int outcomes) {
    if (outcomes < 1) throw ValidationError("theoretical_wmax: need M >= 1");
    return 1.0 - 1.0 / outcomes;
}

// ---- optimal constructions ------------------------------------------------

UnitaryChannel unitary_mapping_to_last(const PureState& psi) {
    const int n = psi.dim();
    std::vector<ComplexVector> frame{psi.amplitudes()};
    for (int k = 0; k < n && static_cast<int>(frame.size()) < n; ++k) {
        ComplexVector v = ComplexVector::Unit(n, k);
        // Two Gram-Schmidt passes keep the completion orthonormal to ~1e-16.
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& f : frame) v -= f * f.dot(v);
        }
        const double norm = v.norm();
        if (norm > 1e-6) frame.push_back(v / norm);
    }
    ComplexMatrix u(n, n);
    for (int r = 0; r + 1 < n; ++r) u.row(r) = frame[static_cast<std::size_t>(r + 1)].adjoint();
    u.row(n - 1) = psi.amplitudes().adjoint();
    return UnitaryChannel::from_matrix(std::move(u));
}

OptimalConfigs optimal_config(int dim) {
    if (dim < 2) throw ValidationError("optimal_config: dimension must be >= 2");
    const auto basis = OrthonormalBasis::computational(dim);
    const std::vector<Complex> coeffs(static_cast<std::size_t>(dim), Complex(1.0 / std::sqrt(double(dim)), 0.0));
    const PureState sigma = make_superposition(basis, coeffs);
    const UnitaryChannel u1 = unitary_mapping_to_last(sigma);
    const Projector pi_b = Projector::basis(dim, dim - 1);

    std::vector<Complex> phases;
    for (int k = 0; k < dim; ++k) phases.push_back(root_of_unity(k, dim));

    WitnessConfig w(basis, coeffs, BlindMeasurement::complete(basis), u1, pi_b);
    WitnessConfig v(basis, coeffs, PhaseChannel{UnitaryChannel::diagonal(phases)}, u1, pi_b);
    return {std::move(w), std::move(v), OptimalConfigSpec{dim, theoretical_wmax(dim), 1.0}};
}

WitnessConfig reference_qubit(WitnessKind kind) {
    const auto basis = OrthonormalBasis::computational(2);
    const double r = 1.0 / std::numbers::sqrt2;
    ComplexMatrix h(2, 2);
    h << r, r, r, -r;
    const std::vector<Complex> coeffs{r, -r};
    const std::vector<Complex> phases{1.0, -1.0};
    Intervention intervention = kind == WitnessKind::W
                                    ? Intervention{BlindMeasurement::complete(basis)}
                                    : Intervention{PhaseChannel{UnitaryChannel::diagonal(phases)}};
    return {basis, coeffs, std::move(intervention), UnitaryChannel::from_matrix(h), Projector::basis(2, 1)};
}

WitnessConfig reference_qutrit(WitnessKind kind) {
    const auto basis = OrthonormalBasis::computational(3);
    const double s6 = std::sqrt(6.0) / 6.0;
    const double s2 = std::numbers::sqrt2 / 2.0;
    const double s3 = std::sqrt(1.0 / 3.0);
    ComplexMatrix u1(3, 3);
    u1 << std::sqrt(2.0 / 3.0), s6, -s6,
          0.0, s2, s2,
          s3, -s3, s3;
    const std::vector<Complex> coeffs{s3, -s3, s3};
    const std::vector<Complex> phases{1.0, root_of_unity(1, 3), root_of_unity(2, 3)};
    Intervention intervention = kind == WitnessKind::W
                                    ? Intervention{BlindMeasurement::complete(basis)}
                                    : Intervention{PhaseChannel{UnitaryChannel::diagonal(phases)}};
    return {basis, coeffs, std::move(intervention), UnitaryChannel::from_matrix(u1), Projector::basis(3, 2)};
}

}  // namespace qwit
