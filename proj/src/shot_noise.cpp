#include "qwit/shot_noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <thread>

#include "qwit/errors.hpp"

namespace qwit {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<std::uint64_t> sample_rates(std::span<const double> rates, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint64_t> counts;
    counts.reserve(rates.size());
    for (double rate : rates) {
        if (rate <= 0.0) {
            counts.push_back(0);
            continue;
        }
        std::poisson_distribution<std::uint64_t> poisson(rate);
        counts.push_back(poisson(rng));
    }
    return counts;
}

void validate_probabilities(std::span<const double> p) {
    if (p.empty()) throw ValidationError("probability vector is empty");
    double sum = 0.0;
    for (double x : p) {
        if (!std::isfinite(x) || x < 0.0 || x > 1.0) throw ValidationError("probability outside [0,1]");
        sum += x;
    }
    if (std::abs(sum - 1.0) > tol::kInputNorm) {
        throw ValidationError("probabilities sum to " + std::to_string(sum) + ", not 1");
    }
}

struct Moments {
    double mean = 0.0;
    double std = 0.0;
};

// Reduction in index order keeps the result independent of scheduling.
Moments moments(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
}

std::vector<double> arm_probabilities(const QuantumState& final_state, const DetectorSet& detectors) {
    std::vector<double> p;
    for (const Projector& d : detectors.projectors) p.push_back(born_probability(final_state, d));
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    if (std::abs(sum - 1.0) > tol::kDerived) throw ValidationError("detector projectors are not complete");
    for (double& x : p) x /= sum;
    return p;
}

}  // namespace

DetectorProfile::DetectorProfile(std::vector<double> efficiencies) : efficiencies_(std::move(efficiencies)) {
    if (efficiencies_.empty()) throw ValidationError("DetectorProfile: no detectors");
    bool has_unit = false;
    for (double d : efficiencies_) {
        if (!std::isfinite(d) || d <= 0.0 || d > 1.0) {
            throw ValidationError("DetectorProfile: efficiencies must lie in (0, 1]");
        }
        if (std::abs(d - 1.0) <= tol::kInvariant) has_unit = true;
    }
    if (!has_unit) throw ValidationError("DetectorProfile: relative efficiencies need one detector at 1");
}

DetectorProfile DetectorProfile::ideal(int detectors) {
    if (detectors < 1) throw ValidationError("DetectorProfile: no detectors");
    return DetectorProfile(std::vector<double>(static_cast<std::size_t>(detectors), 1.0));
}

std::vector<double> CountRecord::probabilities() const {
    std::vector<double> p;
    p.reserve(corrected_counts.size());
    for (double c : corrected_counts) p.push_back(c / total_corrected);
    return p;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

std::vector<std::uint64_t> sample_counts(std::span<const double> probabilities, double expected_total,
                                         std::uint64_t seed) {
    validate_probabilities(probabilities);
    if (!(expected_total > 0.0) || !std::isfinite(expected_total)) {
        throw ValidationError("sample_counts: expected_total must be positive");
    }
    std::vector<double> rates;
    for (double p : probabilities) rates.push_back(p * expected_total);
    return sample_rates(rates, seed);
}

CountRecord efficiency_correct(std::span<const std::uint64_t> raw, const DetectorProfile& profile) {
    if (static_cast<int>(raw.size()) != profile.n_detectors()) {
        throw DimensionError("efficiency_correct: " + std::to_string(raw.size()) + " counts for " +
                             std::to_string(profile.n_detectors()) + " detectors");
    }
    CountRecord record;
    record.raw_counts.assign(raw.begin(), raw.end());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        record.corrected_counts.push_back(static_cast<double>(raw[i]) / profile.efficiencies()[i]);
    }
    record.total_corrected = std::accumulate(record.corrected_counts.begin(), record.corrected_counts.end(), 0.0);
    if (record.total_corrected <= 0.0) throw ValidationError("efficiency_correct: no counts recorded");
    return record;
}

DetectorSet detector_set(const WitnessConfig& config) {
    const int n = config.dim();
    const ComplexMatrix& pi = config.outcome_projector().matrix();
    for (int b = 0; b < n; ++b) {
        if (max_abs_diff(pi, Projector::basis(n, b).matrix()) <= tol::kInvariant) {
            DetectorSet set;
            for (int k = 0; k < n; ++k) set.projectors.push_back(Projector::basis(n, k));
            set.outcome = b;
            return set;
        }
    }
    DetectorSet set;
    set.projectors.push_back(config.outcome_projector());
    set.projectors.push_back(Projector::from_matrix(ComplexMatrix::Identity(n, n) - pi));
    set.outcome = 0;
    return set;
}

NoiseStudyResult estimate_witness(const WitnessConfig& config, const PureState& preparation,
                                  double expected_total, const DetectorProfile& profile, int trials,
                                  std::uint64_t seed, unsigned threads) {
    if (trials < 2) throw ValidationError("estimate_witness: need at least 2 trials");
    if (!(expected_total > 0.0) || !std::isfinite(expected_total)) {
        throw ValidationError("estimate_witness: expected_total must be positive");
    }
    if (preparation.dim() != config.dim()) throw DimensionError("estimate_witness: preparation dimension");
    const DetectorSet detectors = detector_set(config);
    if (profile.n_detectors() != static_cast<int>(detectors.projectors.size())) {
        throw DimensionError("estimate_witness: profile has " + std::to_string(profile.n_detectors()) +
                             " detectors, measurement needs " + std::to_string(detectors.projectors.size()));
    }

    const QuantumState rho = preparation.density();
    const QuantumState plain = apply_unitary(rho, config.evolution());
    const QuantumState intervened = apply_unitary(apply_intervention(rho, config.intervention()), config.evolution());

    // Detected rate at detector i is p_i * total * D_i; correction divides D_i back out.
    auto rates_for = [&](const QuantumState& s) {
        std::vector<double> rates = arm_probabilities(s, detectors);
        for (std::size_t i = 0; i < rates.size(); ++i) rates[i] *= expected_total * profile.efficiencies()[i];
        return rates;
    };
    const std::vector<double> plain_rates = rates_for(plain);
    const std::vector<double> after_rates = rates_for(intervened);

    const auto n_trials = static_cast<std::size_t>(trials);
    std::vector<double> witness(n_trials);
    std::vector<std::uint8_t> empty(n_trials);

    auto run_trial = [&](std::size_t t) {
        double estimates[2];
        std::uint8_t empties = 0;
        for (int arm = 0; arm < 2; ++arm) {
            const auto& rates = arm == 0 ? plain_rates : after_rates;
            const auto raw = sample_rates(rates, derive_seed(seed, t, static_cast<std::uint64_t>(arm)));
            if (std::all_of(raw.begin(), raw.end(), [](std::uint64_t c) { return c == 0; })) {
                estimates[arm] = 0.0;
                ++empties;
                continue;
            }
            const CountRecord record = efficiency_correct(raw, profile);
            estimates[arm] = record.corrected_counts[static_cast<std::size_t>(detectors.outcome)] /
                             record.total_corrected;
        }
        witness[t] = estimates[0] - estimates[1];
        empty[t] = empties;
    };

    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_trials));
    if (workers <= 1) {
        for (std::size_t t = 0; t < n_trials; ++t) run_trial(t);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t t = w; t < n_trials; t += workers) run_trial(t);
            });
        }
    }

    const Moments m = moments(witness);
    NoiseStudyResult result;
    result.kind = config.kind();
    result.expected_total = expected_total;
    result.witness_mean = m.mean;
    result.witness_std = m.std;
    result.trials = trials;
    result.seed = seed;
    for (std::uint8_t e : empty) result.empty_arms += e;
    return result;
}

double sd_of_violation(double sup_value, double sup_var, std::span<const double> control_values,
                       std::span<const double> control_vars) {
    if (control_values.empty()) throw ValidationError("sd_of_violation: need at least one control");
    if (control_values.size() != control_vars.size()) {
        throw DimensionError("sd_of_violation: control values and variances differ in length");
    }
    if (sup_var < 0.0) throw ValidationError("sd_of_violation: negative variance");
    std::size_t arg = 0;
    for (std::size_t i = 0; i < control_values.size(); ++i) {
        if (control_vars[i] < 0.0) throw ValidationError("sd_of_violation: negative variance");
        if (control_values[i] > control_values[arg] ||
            (control_values[i] == control_values[arg] && control_vars[i] > control_vars[arg])) {
            arg = i;
        }
    }
    const double margin = sup_value - control_values[arg];
    if (margin == 0.0) return 0.0;
    const double var = sup_var + control_vars[arg];
    if (var <= 0.0) throw UndefinedSignificance("sd_of_violation: zero variance with a nonzero margin");
    return margin / std::sqrt(var);
}

std::vector<NoiseStudyResult> noise_sweep(const WitnessConfig& config, std::span<const double> totals,
                                          const DetectorProfile& profile, int trials, std::uint64_t seed,
                                          unsigned threads) {
    if (totals.empty()) throw ValidationError("noise_sweep: no totals given");
    const int n = config.dim();
    std::vector<NoiseStudyResult> table;
    for (std::size_t t = 0; t < totals.size(); ++t) {
        if (!(totals[t] > 0.0)) throw ValidationError("noise_sweep: totals must be positive");
        // One seed family per total; preparation k gets stream k, the superposition stream N.
        const std::uint64_t family = derive_seed(seed, 0x746f74616cULL, t);
        NoiseStudyResult row = estimate_witness(config, config.superposition(), totals[t], profile, trials,
                                                derive_seed(family, static_cast<std::uint64_t>(n)), threads);
        std::vector<double> control_vars;
        for (int k = 0; k < n; ++k) {
            const NoiseStudyResult c = estimate_witness(config, config.preferred_basis()[k], totals[t], profile,
                                                        trials, derive_seed(family, static_cast<std::uint64_t>(k)),
                                                        threads);
            row.control_means.push_back(c.witness_mean);
            row.control_stds.push_back(c.witness_std);
            control_vars.push_back(c.witness_std * c.witness_std);
            row.empty_arms += c.empty_arms;
        }
        try {
            row.sd_of_violation = sd_of_violation(row.witness_mean, row.witness_std * row.witness_std,
                                                  row.control_means, control_vars);
        } catch (const UndefinedSignificance&) {
            row.sd_of_violation.reset();
        }
        row.seed = seed;
        table.push_back(std::move(row));
    }
    return table;
}

}  // namespace qwit
