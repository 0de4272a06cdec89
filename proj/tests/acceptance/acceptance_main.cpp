// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qwit/reck.hpp"
#include "qwit/shot_noise.hpp"
#include "qwit/witness.hpp"

using namespace qwit;

namespace {

// Pinned thresholds.
constexpr double kIdealTol = 1e-12;
constexpr double kSweepTol = 1e-10;
constexpr double kSumRuleTol = 1e-9;
constexpr double kBoundSlack = 1e-9;
constexpr double kRoundTripTol = 1e-10;
constexpr double kQuartzTarget = 23.97;
constexpr double kQuartzRelTol = 0.01;
constexpr double kNoiseTotal = 13000.0;
constexpr int kNoiseTrials = 10000;
constexpr double kW2dBenchmarkStd = 0.0060;
constexpr double kV3dBenchmarkStd = 0.0020;
constexpr double kStdFactor = 2.0;
constexpr double kSdTarget = 35.36;
constexpr double kSdTol = 0.01;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x, int prec = 6) {
    std::ostringstream o;
    o.precision(prec);
    o << x;
    return o.str();
}

std::vector<Complex> coeffs_of(const PureState& s) {
    std::vector<Complex> out;
    for (int i = 0; i < s.dim(); ++i) out.push_back(s[i]);
    return out;
}

double max_dev_from_zero(const std::vector<double>& v) {
    double d = 0.0;
    for (double x : v) d = std::max(d, std::abs(x));
    return d;
}

Outcome ideal_pair(WitnessConfig (*make)(WitnessKind), double expect_w) {
    const auto w = full_report(make(WitnessKind::W));
    const auto v = full_report(make(WitnessKind::V));
    const double dw = std::abs(w.superposition_value - expect_w);
    const double dv = std::abs(v.superposition_value - 1.0);
    const double dc = std::max(max_dev_from_zero(w.control_values), max_dev_from_zero(v.control_values));
    return {dw <= kIdealTol && dv <= kIdealTol && dc <= kIdealTol,
            "W=" + fmt(w.superposition_value, 17) + " V=" + fmt(v.superposition_value, 17) +
                " max|control|=" + fmt(dc)};
}

Outcome criterion1() { return ideal_pair(reference_qubit, 0.5); }
Outcome criterion2() { return ideal_pair(reference_qutrit, 2.0 / 3.0); }

Outcome criterion3() {
    double worst_w = 0.0, worst_v = 0.0;
    for (int n = 2; n <= 8; ++n) {
        const auto opt = optimal_config(n);
        worst_w = std::max(worst_w, std::abs(full_report(opt.w_config).superposition_value - (1.0 - 1.0 / n)));
        worst_v = std::max(worst_v, std::abs(full_report(opt.v_config).superposition_value - 1.0));
    }
    return {worst_w <= kSweepTol && worst_v <= kSweepTol,
            "N=2..8 max|W-(1-1/N)|=" + fmt(worst_w) + " max|V-1|=" + fmt(worst_v)};
}

// Shared random ensemble for criteria 4 and 5.
std::vector<WitnessReport> random_ensemble() {
    std::vector<WitnessReport> out;
    for (int t = 0; t < 1000; ++t) {
        const int n = 2 + t % 5;
        const std::uint64_t s = 0xacce97ULL + 4 * static_cast<std::uint64_t>(t);
        const WitnessConfig cfg(OrthonormalBasis::computational(n), coeffs_of(random_pure_state(n, s)),
                                PhaseChannel{random_unitary(n, s + 1)}, random_unitary(n, s + 2),
                                Projector::rank_one(random_pure_state(n, s + 3)));
        out.push_back(full_report(cfg));
    }
    return out;
}

Outcome criterion4(const std::vector<WitnessReport>& ensemble) {
    double worst = 0.0;
    for (const auto& r : ensemble) {
        double sum = 0.0;
        for (double c : r.control_values) sum += c;
        worst = std::max(worst, std::abs(sum));
    }
    return {worst < kSumRuleTol, std::to_string(ensemble.size()) + " configs, max|sum V_i|=" + fmt(worst)};
}

Outcome criterion5(const std::vector<WitnessReport>& ensemble) {
    // Upper bound on sup - max, lower bound on sup - min. The lower side is not
    // a bound on sup - max: sup = -1 with max V_i > 0 is reachable.
    double upper = -10.0, lower = 10.0, sup_minus_max_low = 10.0;
    for (const auto& r : ensemble) {
        const auto [mn, mx] = std::minmax_element(r.control_values.begin(), r.control_values.end());
        upper = std::max(upper, r.superposition_value - *mx);
        lower = std::min(lower, r.superposition_value - *mn);
        sup_minus_max_low = std::min(sup_minus_max_low, r.superposition_value - *mx);
    }
    return {upper <= 1.0 + kBoundSlack && lower >= -1.0 - kBoundSlack,
            "max(V_sigma - max V_i)=" + fmt(upper) + " min(V_sigma - min V_i)=" + fmt(lower) +
                "; min(V_sigma - max V_i)=" + fmt(sup_minus_max_low) + " (unbounded below by -1)"};
}

Outcome criterion6() {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    bool counts_ok = true;
    for (int n = 2; n <= 10; ++n) {
        for (int s = 0; s < 500; ++s) {
            const auto u = random_unitary(n, 0x7ecc000ULL + 1000 * n + s);
            const auto plan = decompose(u);
            worst = std::max(worst, max_abs_diff(reconstruct(plan).matrix(), u.matrix()));
            if (s == 0) {
                const int expect = n == 2 ? 0 : (n % 2 == 0 ? 2 * n - 4 : 2 * n - 3);
                counts_ok = counts_ok && emit_layout(plan).bd_count == expect;
            }
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst < kRoundTripTol && counts_ok && secs < 30.0,
            "max entry error=" + fmt(worst) + " bd counts " + (counts_ok ? "exact" : "WRONG") + " in " +
                fmt(secs, 3) + " s"};
}

Outcome criterion7() {
    const double t = min_quartz_thickness(CoherenceSpec{});
    return {std::abs(t - kQuartzTarget) <= kQuartzRelTol * kQuartzTarget, "min thickness=" + fmt(t) + " mm"};
}

bool within_factor(double value, double benchmark, double factor) {
    return value >= benchmark / factor && value <= benchmark * factor;
}

Outcome criterion8() {
    const auto w2 = reference_qubit(WitnessKind::W);
    const auto rw = estimate_witness(w2, w2.superposition(), kNoiseTotal, DetectorProfile::ideal(2), kNoiseTrials,
                                     0x5eed0001ULL);
    const auto v3 = reference_qutrit(WitnessKind::V);
    const auto rv = estimate_witness(v3, v3.superposition(), kNoiseTotal, DetectorProfile::ideal(3), kNoiseTrials,
                                     0x5eed0002ULL);
    const double se = rw.witness_std / std::sqrt(static_cast<double>(kNoiseTrials));
    const bool mean_ok = std::abs(rw.witness_mean - 0.5) <= 3.0 * se;
    const bool w_std_ok = within_factor(rw.witness_std, kW2dBenchmarkStd, kStdFactor);
    const bool v_std_ok = within_factor(rv.witness_std, kV3dBenchmarkStd, kStdFactor);
    return {mean_ok && w_std_ok && v_std_ok,
            "W2D mean=" + fmt(rw.witness_mean) + " (3se=" + fmt(3 * se) + ") std=" + fmt(rw.witness_std) +
                (w_std_ok ? " ok" : " out of range") + "; V3D mean=" + fmt(rv.witness_mean) +
                " std=" + fmt(rv.witness_std) + (v_std_ok ? " ok" : " out of range") +
                " (benchmarks " + fmt(kW2dBenchmarkStd) + ", " + fmt(kV3dBenchmarkStd) + ", factor " +
                fmt(kStdFactor) + ")"};
}

Outcome criterion9() {
    const std::vector<double> controls{0.0, 0.0};
    const std::vector<double> vars{1e-4, 1e-4};
    const double sd = sd_of_violation(0.5, 1e-4, controls, vars);
    const std::vector<double> tied{0.2, 0.4};
    const double zero = sd_of_violation(0.4, 3e-4, tied, vars);
    return {std::abs(sd - kSdTarget) <= kSdTol && zero == 0.0,
            "sd=" + fmt(sd) + " tie-with-max=" + fmt(zero)};
}

std::string capture(const std::string& cmd, int& status) {
    std::string out;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) {
        status = -1;
        return out;
    }
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    status = ::pclose(pipe);
    return out;
}

Outcome criterion10() {
    const std::string base = std::string("\"") + QWIT_CLI_PATH +
                             "\" noise --builtin paper-qutrit --which w --totals 1000,13000 --trials 2000"
                             " --seed 424242 --format json";
    int s1 = 0, s2 = 0, s3 = 0;
    const std::string a = capture(base + " --threads 1", s1);
    const std::string b = capture(base + " --threads 1", s2);
    const std::string c = capture(base + " --threads 5", s3);
    const bool ok = s1 == 0 && s2 == 0 && s3 == 0 && !a.empty() && a == b && a == c;
    return {ok, std::to_string(a.size()) + " bytes; repeat " + (a == b ? "identical" : "differs") +
                    "; 1 vs 5 threads " + (a == c ? "identical" : "differs")};
}

}  // namespace

int main() {
    const auto ensemble = random_ensemble();
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"ideal qubit witnesses", criterion1},
        {"ideal qutrit witnesses", criterion2},
        {"optimal dimension sweep", criterion3},
        {"control sum rule", [&] { return criterion4(ensemble); }},
        {"violation bound", [&] { return criterion5(ensemble); }},
        {"decomposition round trip and displacer count", criterion6},
        {"quartz sizing", criterion7},
        {"shot-noise statistics", criterion8},
        {"significance arithmetic", criterion9},
        {"noise output determinism", criterion10},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << "criterion " << (i + 1) << ": " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first
                  << "  [" << o.detail << "]\n";
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed\n";
    return failures == 0 ? 0 : 1;
}
