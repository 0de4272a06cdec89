#pragma once

// Triangular-mesh compiler: factorizes an N x N unitary into two-level U(2)
// rotations, U = (E_{N,N-1} E_{N,N-2} ... E_{2,1} S)^-1, and lays the
// rotations out on polarization/path-encoded optics (wave-plate sets, 45 degree
// half-wave plates and beam displacers). Also sizes the quartz crystals that
// realize a blind measurement by destroying coherence between modes.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qwit/core.hpp"

namespace qwit {

using Matrix2c = Eigen::Matrix2cd;

/// Identity on N modes except a U(2) block on modes low < high (1-based).
/// block is ordered (low, high): block(0,1) is the E[low][high] entry.
struct TwoLevelRotation {
    int high = 2;
    int low = 1;
    Matrix2c block = Matrix2c::Identity();

    ComplexMatrix embed(int dim) const;
};

struct DecompositionPlan {
    int dim = 0;
    /// Product order: rotations[0] is E_{N,N-1}, the last entry is E_{2,1}.
    std::vector<TwoLevelRotation> rotations;
    /// Diagonal of S, unit modulus.
    std::vector<Complex> phase_diag;
};

/// Throws ValidationError on a malformed plan.
void validate_plan(const DecompositionPlan& plan);

DecompositionPlan decompose(const UnitaryChannel& u);
UnitaryChannel reconstruct(const DecompositionPlan& plan);

// ---- optical layout ----------------------------------------------------------

enum class Polarization { H, V };
enum class Encoding { Even, Odd };

/// (spatial mode, polarization) carrying one basis level. Modes are 1-based.
struct Slot {
    int mode = 1;
    Polarization pol = Polarization::H;
    bool operator==(const Slot&) const = default;
};

/// Arbitrary polarization transform (two HWPs + one QWP), recorded as the
/// 2x2 unitary it applies to the (H, V) amplitudes of `mode`.
struct WavePlateSet {
    int mode = 1;
    Matrix2c block = Matrix2c::Identity();
};

/// Transmits V unchanged and displaces H from mode m into mode m + 1.
struct BeamDisplacer {};

/// Swaps H and V in one spatial mode.
struct HalfWavePlate45 {
    int mode = 1;
};

/// Birefringent delay on one slot; destroys coherence with slots whose delay
/// differs by more than the coherence length.
struct QuartzCrystal {
    int mode = 1;
    Polarization pol = Polarization::V;
    double thickness_mm = 0.0;
};

using OpticalElement = std::variant<WavePlateSet, BeamDisplacer, HalfWavePlate45, QuartzCrystal>;

struct OpticalLayout {
    int dim = 0;
    Encoding encoding = Encoding::Even;
    /// input_slots[k] carries basis level k + 1 on entry.
    std::vector<Slot> input_slots;
    std::vector<OpticalElement> elements;
    int bd_count = 0;
    /// output_slots[k] carries basis level k + 1 on exit.
    std::vector<Slot> output_slots;
    /// True when the exit slots differ from the entry encoding (the mesh
    /// reverses the level order across spatial modes). No compensating
    /// optics are emitted; consumers relabel detectors instead.
    bool output_relabelled = false;
};

/// Even N: |2s-1>,|2s> on H_s,V_s. Odd N: |1> on H_1, then |2s-2>,|2s-1> on H_s,V_s.
std::vector<Slot> encode_levels(int dim);

/// 0 for N <= 2, 2N-4 for even N, 2N-3 for odd N >= 3.
int expected_bd_count(int dim);

OpticalLayout emit_layout(const DecompositionPlan& plan);

/// Propagates each basis level through the element list and reads it out at
/// the exit slots. Layouts containing quartz crystals are rejected (they are
/// not coherent maps).
UnitaryChannel realized_unitary(const OpticalLayout& layout);

// ---- blind measurement sizing ---------------------------------------------------

struct CoherenceSpec {
    double wavelength_nm = 801.6;
    double bandwidth_nm = 3.0;
    /// Quartz ordinary/extraordinary index difference.
    double birefringence = 0.00894;
};

void validate(const CoherenceSpec& spec);

/// L_c = lambda^2 / d_lambda, in millimetres.
double coherence_length_mm(const CoherenceSpec& spec);
/// L_c / birefringence, in millimetres.
double min_quartz_thickness(const CoherenceSpec& spec);
bool quartz_is_sufficient(double thickness_mm, const CoherenceSpec& spec);

/// Quartz crystals with thicknesses t, 2t, ..., (n-1)t on levels 2..n, so every
/// pair of levels is separated by at least t. t defaults to the minimum.
OpticalLayout blind_measurement_layout(int dim, const CoherenceSpec& spec,
                                       std::optional<double> unit_thickness_mm = std::nullopt);

std::string to_string(Polarization pol);
std::string to_string(Encoding encoding);

/// One record per line: `kind key=value ...`.
std::string layout_to_text(const OpticalLayout& layout);

}  // namespace qwit
