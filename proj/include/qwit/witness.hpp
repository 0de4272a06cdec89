#pragma once

// Quantum witnesses W (blind measurement) and V (generic unitary channel),
// the error-tolerant compound conditions built from fixed-point controls,
// and the closed-form optimal configurations for any dimension.

#include <string>
#include <variant>
#include <vector>

#include "qwit/core.hpp"

namespace qwit {

/// Unread projective measurement in `basis`, coarse-grained into M outcomes.
/// groups[k] is the outcome label (0..M-1) of basis vector k.
struct BlindMeasurement {
    OrthonormalBasis basis;
    std::vector<int> groups;

    /// Fine-grained measurement, one outcome per basis vector (M = N).
    static BlindMeasurement complete(OrthonormalBasis basis);
    /// Basis indices split into M contiguous, near-equal blocks.
    static BlindMeasurement contiguous(OrthonormalBasis basis, int outcomes);

    int outcomes() const;
};

/// Unitary intervention U0 applied at t = 0.
struct PhaseChannel {
    UnitaryChannel u0;
};

using Intervention = std::variant<BlindMeasurement, PhaseChannel>;

enum class WitnessKind { W, V };

std::string to_string(WitnessKind kind);

class WitnessConfig {
public:
    WitnessConfig(OrthonormalBasis preferred_basis, std::vector<Complex> superposition_coeffs,
                  Intervention intervention, UnitaryChannel evolution, Projector outcome_projector);

    int dim() const { return preferred_basis_.dim(); }
    const OrthonormalBasis& preferred_basis() const { return preferred_basis_; }
    const std::vector<Complex>& superposition_coeffs() const { return coeffs_; }
    const Intervention& intervention() const { return intervention_; }
    const UnitaryChannel& evolution() const { return evolution_; }
    const Projector& outcome_projector() const { return projector_; }

    WitnessKind kind() const;
    PureState superposition() const;

    /// Same experiment with a different intervention.
    WitnessConfig with_intervention(Intervention intervention) const;

private:
    OrthonormalBasis preferred_basis_;
    std::vector<Complex> coeffs_;
    Intervention intervention_;
    UnitaryChannel evolution_;
    Projector projector_;
};

/// p_b: outcome probability without intervention; p_after: with it (P'(b) or P''(b)).
struct WitnessValue {
    double p_b = 0.0;
    double p_after = 0.0;
    double value = 0.0;
};

struct WitnessReport {
    WitnessKind kind = WitnessKind::V;
    std::vector<double> control_values;
    double superposition_value = 0.0;
    double p_b = 0.0;
    double p_after = 0.0;
    double violation_margin = 0.0;
    double lower_margin = 0.0;
    bool violated = false;
};

/// Theory predictions for the optimal construction in dimension N.
struct OptimalConfigSpec {
    int dim = 0;
    double predicted_w = 0.0;
    double predicted_v = 0.0;
};

struct OptimalConfigs {
    WitnessConfig w_config;
    WitnessConfig v_config;
    OptimalConfigSpec spec;
};

/// State reached after the optional intervention: Gamma(rho) or U0 rho U0^dagger.
QuantumState apply_intervention(const QuantumState& state, const Intervention& intervention);

WitnessValue compute_witness_w(const WitnessConfig& config, const PureState& preparation);
WitnessValue compute_witness_v(const WitnessConfig& config, const PureState& preparation);
/// Dispatches on the configured intervention.
WitnessValue compute_witness(const WitnessConfig& config, const PureState& preparation);

/// 1 - |<psi|U0|psi>|^2, the value V attains when Pi^b = U1|psi><psi|U1^dagger.
double analytic_v(const PureState& preparation, const UnitaryChannel& u0);

WitnessReport full_report(const WitnessConfig& config);

/// Sum of the fixed-point control witnesses; zero for any trace-preserving intervention.
double control_sum(const WitnessConfig& config);

/// 1 - 1/M.
double theoretical_wmax(int outcomes);

/// Unitary whose last row is <psi|, completed by Gram-Schmidt over the
/// computational basis, so that U|psi> = |N-1>.
UnitaryChannel unitary_mapping_to_last(const PureState& psi);

OptimalConfigs optimal_config(int dim);

/// Reference photonic qubit experiment: U0 = diag(1,-1), U1 = Hadamard,
/// Pi^b = |1><1|, superposition (|0> - |1>)/sqrt2.
WitnessConfig reference_qubit(WitnessKind kind);
/// Reference qutrit experiment: U0 = diag(1, w, w^2), Pi^b = |2><2|,
/// superposition (|0> - |1> + |2>)/sqrt3.
WitnessConfig reference_qutrit(WitnessKind kind);

}  // namespace qwit
