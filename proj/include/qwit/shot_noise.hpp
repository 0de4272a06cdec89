#pragma once

// Photon-counting model of a witness experiment: Poissonian detector counts,
// relative-efficiency correction, Monte Carlo estimates of witness values and
// the significance of a violation.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qwit/witness.hpp"

namespace qwit {

/// Coincidence count scale of a 6 s acquisition in the reference setup.
inline constexpr double kDefaultExpectedCounts = 13000.0;

/// Relative detector efficiencies D_i in (0, 1], at least one equal to 1.
class DetectorProfile {
public:
    explicit DetectorProfile(std::vector<double> efficiencies);
    static DetectorProfile ideal(int detectors);

    int n_detectors() const { return static_cast<int>(efficiencies_.size()); }
    const std::vector<double>& efficiencies() const { return efficiencies_; }

private:
    std::vector<double> efficiencies_;
};

struct CountRecord {
    std::vector<std::uint64_t> raw_counts;
    /// raw_counts[i] / D_i
    std::vector<double> corrected_counts;
    double total_corrected = 0.0;

    /// P_i = corrected_i / total_corrected.
    std::vector<double> probabilities() const;
};

struct NoiseStudyResult {
    WitnessKind kind = WitnessKind::V;
    double expected_total = 0.0;
    double witness_mean = 0.0;
    double witness_std = 0.0;
    std::vector<double> control_means;
    std::vector<double> control_stds;
    /// Empty when both variances vanish and the margin is nonzero.
    std::optional<double> sd_of_violation;
    int trials = 0;
    std::uint64_t seed = 0;
    /// Trial arms that recorded no counts at all; their estimate is taken as 0.
    std::uint64_t empty_arms = 0;
};

/// Stream-splitting seed derivation (SplitMix64 finalizer over the inputs).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0);

/// Independent Poisson counts with means p_i * expected_total.
std::vector<std::uint64_t> sample_counts(std::span<const double> probabilities, double expected_total,
                                         std::uint64_t seed);

CountRecord efficiency_correct(std::span<const std::uint64_t> raw, const DetectorProfile& profile);

/// Detector set implied by the outcome projector: the computational basis when
/// Pi^b is a computational basis projector, otherwise {Pi^b, 1 - Pi^b}.
struct DetectorSet {
    std::vector<Projector> projectors;
    int outcome = 0;
};
DetectorSet detector_set(const WitnessConfig& config);

/// Monte Carlo estimate of the witness for one preparation. Each trial samples
/// the plain and the intervened arm with seeds derived from (seed, trial).
/// `threads` = 0 uses the hardware concurrency; results do not depend on it.
NoiseStudyResult estimate_witness(const WitnessConfig& config, const PureState& preparation,
                                  double expected_total, const DetectorProfile& profile, int trials,
                                  std::uint64_t seed, unsigned threads = 0);

/// (sup - max control) / sqrt(Var(sup) + Var(argmax control)). Ties in the
/// maximum take the largest variance. Returns exactly 0 when sup equals the
/// maximum; throws UndefinedSignificance when the margin is nonzero and the
/// combined variance is zero.
double sd_of_violation(double sup_value, double sup_var, std::span<const double> control_values,
                       std::span<const double> control_vars);

/// Controls, superposition and significance for each expected count total.
std::vector<NoiseStudyResult> noise_sweep(const WitnessConfig& config, std::span<const double> totals,
                                          const DetectorProfile& profile, int trials, std::uint64_t seed,
                                          unsigned threads = 0);

}  // namespace qwit
