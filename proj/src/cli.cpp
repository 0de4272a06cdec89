#include "qwit/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "qwit/errors.hpp"
#include "qwit/io.hpp"

namespace qwit::cli {

namespace {

/// Numerical failure detected by the command itself (e.g. reconstruction error).
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string format = "table";
    std::string output_path;
    std::uint64_t seed = 1;
};

struct Source {
    std::string builtin;
    std::string config_path;
    int dim = 0;
    std::string u0_path;
    std::string u1_path;
    std::string coeffs;
    int outcomes = 0;
    int projector_index = -1;
    std::string which = "v";
};

std::uint64_t default_seed() {
    if (const char* env = std::getenv(kSeedEnv)) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw ParseError(std::string(kSeedEnv) + " is not an unsigned integer");
        }
    }
    return 1;
}

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--format", c.format, "table, json or csv")->check(CLI::IsMember({"table", "json", "csv"}));
    cmd->add_option("--output", c.output_path, "write the document here instead of stdout");
}

void add_source(CLI::App* cmd, Source& s) {
    cmd->add_option("--builtin", s.builtin, "paper-qubit or paper-qutrit")
        ->check(CLI::IsMember({"paper-qubit", "paper-qutrit"}));
    cmd->add_option("--config", s.config_path, "JSON experiment description");
    cmd->add_option("--dim", s.dim, "dimension for a config assembled from flags");
    cmd->add_option("--u0", s.u0_path, "matrix file for the channel U0 (V witness)");
    cmd->add_option("--u1", s.u1_path, "matrix file for the evolution U1 (default identity)");
    cmd->add_option("--coeffs", s.coeffs, "comma separated superposition coefficients (default uniform)");
    cmd->add_option("--outcomes", s.outcomes, "blind-measurement outcomes M (W witness, default N)");
    cmd->add_option("--projector-index", s.projector_index, "computational outcome b (default N-1)");
    cmd->add_option("--which", s.which, "w or v")->check(CLI::IsMember({"w", "v"}));
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_number_list(const std::string& text, const char* what) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ParseError(std::string(what) + ": '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw ParseError(std::string(what) + ": empty list");
    return out;
}

WitnessConfig resolve(const Source& s) {
    const WitnessKind kind = s.which == "w" ? WitnessKind::W : WitnessKind::V;
    const int chosen = int(!s.builtin.empty()) + int(!s.config_path.empty()) + int(s.dim != 0);
    if (chosen != 1) throw ParseError("give exactly one of --builtin, --config or --dim");
    if (s.builtin == "paper-qubit") return reference_qubit(kind);
    if (s.builtin == "paper-qutrit") return reference_qutrit(kind);
    if (!s.config_path.empty()) return read_config_file(s.config_path);

    const int n = s.dim;
    if (n < 2) throw ParseError("--dim must be >= 2");
    const auto basis = OrthonormalBasis::computational(n);
    std::vector<Complex> coeffs;
    if (s.coeffs.empty()) {
        coeffs.assign(static_cast<std::size_t>(n), Complex(1.0 / std::sqrt(double(n)), 0.0));
    } else {
        for (const auto& tok : split_list(s.coeffs)) coeffs.push_back(parse_complex(tok));
    }
    const UnitaryChannel u1 = s.u1_path.empty() ? UnitaryChannel::identity(n)
                                                : UnitaryChannel::from_matrix(read_matrix_file(s.u1_path));
    const int b = s.projector_index < 0 ? n - 1 : s.projector_index;
    if (b >= n) throw ParseError("--projector-index out of range");

    Intervention intervention = PhaseChannel{UnitaryChannel::identity(n)};
    if (!s.u0_path.empty()) {
        intervention = PhaseChannel{UnitaryChannel::from_matrix(read_matrix_file(s.u0_path))};
    } else if (kind == WitnessKind::W) {
        intervention = BlindMeasurement::contiguous(basis, s.outcomes == 0 ? n : s.outcomes);
    } else {
        throw ParseError("--dim needs --u0 for the V witness or --which w for a blind measurement");
    }
    return {basis, std::move(coeffs), std::move(intervention), u1, Projector::basis(n, b)};
}

std::string fixed4(double x) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(4) << x;
    return o.str();
}

void emit(const Common& c, const std::string& document, std::ostream& out) {
    if (c.output_path.empty()) {
        out << document;
        return;
    }
    std::ofstream file(c.output_path);
    if (!file) throw ParseError("cannot write " + c.output_path);
    file << document;
}

std::string json_doc(const Json& j) { return j.dump(2) + "\n"; }

// ---- commands ---------------------------------------------------------------

std::string report_table(const WitnessReport& r) {
    std::ostringstream o;
    o << "witness            " << to_string(r.kind) << '\n';
    for (std::size_t i = 0; i < r.control_values.size(); ++i) {
        o << "control[" << i << "]         " << fixed4(r.control_values[i]) << '\n';
    }
    o << "superposition      " << fixed4(r.superposition_value) << '\n'
      << "p_b                " << fixed4(r.p_b) << '\n'
      << "p_after            " << fixed4(r.p_after) << '\n'
      << "violation_margin   " << fixed4(r.violation_margin) << '\n'
      << "lower_margin       " << fixed4(r.lower_margin) << '\n'
      << "violated           " << (r.violated ? "true" : "false") << '\n';
    return o.str();
}

std::string report_csv(const WitnessReport& r) {
    std::ostringstream o;
    o << "witness";
    for (std::size_t i = 0; i < r.control_values.size(); ++i) o << ",control_" << i;
    o << ",superposition_value,p_b,p_after,violation_margin,lower_margin,violated\n" << to_string(r.kind);
    for (double v : r.control_values) o << ',' << format_double(v);
    o << ',' << format_double(r.superposition_value) << ',' << format_double(r.p_b) << ','
      << format_double(r.p_after) << ',' << format_double(r.violation_margin) << ','
      << format_double(r.lower_margin) << ',' << (r.violated ? "true" : "false") << '\n';
    return o.str();
}

void cmd_witness(const Common& c, const Source& s, std::ostream& out) {
    const WitnessReport report = full_report(resolve(s));
    if (c.format == "json") {
        emit(c, json_doc(report_to_json(report)), out);
    } else if (c.format == "csv") {
        emit(c, report_csv(report), out);
    } else {
        emit(c, report_table(report), out);
    }
}

void cmd_optimal(const Common& c, int dim, std::ostream& out) {
    if (dim < 2) throw ParseError("optimal: --dim must be >= 2");
    const OptimalConfigs cfg = optimal_config(dim);
    const WitnessReport w = full_report(cfg.w_config);
    const WitnessReport v = full_report(cfg.v_config);
    if (c.format == "json") {
        Json j;
        j["dim"] = dim;
        j["predicted_w"] = cfg.spec.predicted_w;
        j["predicted_v"] = cfg.spec.predicted_v;
        j["simulated_w"] = w.superposition_value;
        j["simulated_v"] = v.superposition_value;
        j["w_report"] = report_to_json(w);
        j["v_report"] = report_to_json(v);
        emit(c, json_doc(j), out);
    } else if (c.format == "csv") {
        emit(c,
             "dim,predicted_w,simulated_w,predicted_v,simulated_v\n" + std::to_string(dim) + ',' +
                 format_double(cfg.spec.predicted_w) + ',' + format_double(w.superposition_value) + ',' +
                 format_double(cfg.spec.predicted_v) + ',' + format_double(v.superposition_value) + '\n',
             out);
    } else {
        std::ostringstream o;
        o << "dim          " << dim << '\n'
          << "W predicted  " << fixed4(cfg.spec.predicted_w) << "  simulated " << fixed4(w.superposition_value)
          << '\n'
          << "V predicted  " << fixed4(cfg.spec.predicted_v) << "  simulated " << fixed4(v.superposition_value)
          << '\n';
        emit(c, o.str(), out);
    }
}

struct CompileArgs {
    std::string matrix_path;
    int random_dim = 0;
    std::string layout_path;
};

void cmd_compile(const Common& c, const CompileArgs& a, std::ostream& out) {
    if ((a.matrix_path.empty()) == (a.random_dim == 0)) throw ParseError("compile: give exactly one of --matrix or --random");
    if (a.random_dim < 0) throw ParseError("compile: --random must be positive");
    const UnitaryChannel u = a.matrix_path.empty() ? random_unitary(a.random_dim, c.seed)
                                                   : UnitaryChannel::from_matrix(read_matrix_file(a.matrix_path));
    const DecompositionPlan plan = decompose(u);
    const double error = max_abs_diff(reconstruct(plan).matrix(), u.matrix());
    const OpticalLayout layout = emit_layout(plan);
    const double layout_error = max_abs_diff(realized_unitary(layout).matrix(), u.matrix());
    if (!a.layout_path.empty()) {
        std::ofstream f(a.layout_path);
        if (!f) throw ParseError("cannot write " + a.layout_path);
        f << layout_to_text(layout);
    }

    if (c.format == "json") {
        Json j;
        j["dim"] = u.dim();
        j["reconstruction_error"] = error;
        j["layout_error"] = layout_error;
        j["bd_count"] = layout.bd_count;
        j["plan"] = plan_to_json(plan);
        j["layout"] = layout_to_json(layout);
        emit(c, json_doc(j), out);
    } else if (c.format == "csv") {
        std::ostringstream o;
        o << "high,low,b00,b01,b10,b11\n";
        for (const auto& r : plan.rotations) {
            o << r.high << ',' << r.low << ',' << format_complex(r.block(0, 0)) << ','
              << format_complex(r.block(0, 1)) << ',' << format_complex(r.block(1, 0)) << ','
              << format_complex(r.block(1, 1)) << '\n';
        }
        emit(c, o.str(), out);
    } else {
        std::ostringstream o;
        o << "dim                   " << u.dim() << '\n'
          << "rotations             " << plan.rotations.size() << '\n';
        for (const auto& r : plan.rotations) {
            o << "  E(" << r.high << ',' << r.low << ")  [" << format_complex(r.block(0, 0)) << ' '
              << format_complex(r.block(0, 1)) << "; " << format_complex(r.block(1, 0)) << ' '
              << format_complex(r.block(1, 1)) << "]\n";
        }
        o << "bd_count              " << layout.bd_count << '\n'
          << "reconstruction_error  " << std::scientific << std::setprecision(3) << error << '\n'
          << "layout_error          " << layout_error << '\n';
        emit(c, o.str(), out);
    }
    if (error > 1e-8 || layout_error > 1e-8) {
        throw NumericalFailure("compile: reconstruction error " + format_double(std::max(error, layout_error)) +
                               " exceeds 1e-8");
    }
}

struct NoiseArgs {
    std::string totals = "13000";
    int trials = 10000;
    unsigned threads = 0;
    std::string efficiencies;
};

void cmd_noise(const Common& c, const Source& s, const NoiseArgs& a, std::ostream& out) {
    const WitnessConfig config = resolve(s);
    const std::vector<double> totals = parse_number_list(a.totals, "--totals");
    if (a.trials < 2) throw ParseError("noise: --trials must be >= 2");
    const int detectors = static_cast<int>(detector_set(config).projectors.size());
    const DetectorProfile profile = a.efficiencies.empty()
                                        ? DetectorProfile::ideal(detectors)
                                        : DetectorProfile(parse_number_list(a.efficiencies, "--efficiencies"));
    const auto table = noise_sweep(config, totals, profile, a.trials, c.seed, a.threads);
    if (c.format == "json") {
        emit(c, json_doc(noise_table_to_json(table)), out);
    } else if (c.format == "csv") {
        emit(c, noise_table_to_csv(table), out);
    } else {
        std::ostringstream o;
        o << "total        mean     std      max_control  sd_of_violation\n";
        for (const auto& r : table) {
            double max_control = r.control_means.front();
            for (double m : r.control_means) max_control = std::max(max_control, m);
            o << std::left << std::setw(12) << format_double(r.expected_total) << ' ' << fixed4(r.witness_mean)
              << "   " << fixed4(r.witness_std) << "   " << std::setw(11) << fixed4(max_control) << "  "
              << (r.sd_of_violation ? fixed4(*r.sd_of_violation) : std::string("undefined")) << '\n';
        }
        emit(c, o.str(), out);
    }
}

struct QuartzArgs {
    CoherenceSpec spec;
    std::optional<double> installed;
    int dim = 2;
};

void cmd_quartz(const Common& c, const QuartzArgs& a, std::ostream& out) {
    try {
        validate(a.spec);
    } catch (const ValidationError& e) {
        throw ParseError(e.what());
    }
    if (a.dim < 2) throw ParseError("quartz: --dim must be >= 2");
    if (a.installed && !(*a.installed > 0.0)) throw ParseError("quartz: --installed must be positive");
    const double lc = coherence_length_mm(a.spec);
    const double tmin = min_quartz_thickness(a.spec);
    // A crystal that is too thin is a finding, not an error; the layout then
    // falls back to the minimum thickness.
    const bool sufficient = !a.installed || quartz_is_sufficient(*a.installed, a.spec);
    const OpticalLayout layout =
        blind_measurement_layout(a.dim, a.spec, sufficient ? a.installed : std::nullopt);
    if (c.format == "json") {
        Json j;
        j["wavelength_nm"] = a.spec.wavelength_nm;
        j["bandwidth_nm"] = a.spec.bandwidth_nm;
        j["birefringence"] = a.spec.birefringence;
        j["coherence_length_mm"] = lc;
        j["min_thickness_mm"] = tmin;
        if (a.installed) {
            j["installed_mm"] = *a.installed;
            j["installed_sufficient"] = sufficient;
        }
        j["layout"] = layout_to_json(layout);
        emit(c, json_doc(j), out);
    } else if (c.format == "csv") {
        emit(c,
             "wavelength_nm,bandwidth_nm,birefringence,coherence_length_mm,min_thickness_mm\n" +
                 format_double(a.spec.wavelength_nm) + ',' + format_double(a.spec.bandwidth_nm) + ',' +
                 format_double(a.spec.birefringence) + ',' + format_double(lc) + ',' + format_double(tmin) + '\n',
             out);
    } else {
        std::ostringstream o;
        o << "coherence_length_mm  " << fixed4(lc) << '\n' << "min_thickness_mm     " << fixed4(tmin) << '\n';
        if (a.installed) o << "installed_mm         " << fixed4(*a.installed)
                                << (sufficient ? "  (sufficient)\n" : "  (too thin)\n");
        emit(c, o.str(), out);
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Macrorealism witness simulator: witnesses, optimal settings, optics compiler, shot noise", "qwit"};
    app.require_subcommand(1);

    Common common;
    Source source;
    int optimal_dim = 0;
    CompileArgs compile_args;
    NoiseArgs noise_args;
    QuartzArgs quartz_args;
    double installed = 0.0;

    auto* witness = app.add_subcommand("witness", "ideal witness report with compound-condition margins");
    add_common(witness, common);
    add_source(witness, source);

    auto* optimal = app.add_subcommand("optimal", "optimal W/V construction for dimension N");
    add_common(optimal, common);
    optimal->add_option("--dim", optimal_dim, "dimension N >= 2")->required();

    auto* compile = app.add_subcommand("compile", "two-level decomposition and optical layout of a unitary");
    add_common(compile, common);
    compile->add_option("--matrix", compile_args.matrix_path, "matrix file");
    compile->add_option("--random", compile_args.random_dim, "compile a seeded Haar unitary of this dimension");
    compile->add_option("--seed", common.seed, "seed for --random");
    compile->add_option("--layout-out", compile_args.layout_path, "write the element list as text");

    auto* noise = app.add_subcommand("noise", "Monte Carlo shot-noise study");
    add_common(noise, common);
    add_source(noise, source);
    noise->add_option("--totals", noise_args.totals, "comma separated expected counts (default 13000)");
    noise->add_option("--trials", noise_args.trials, "Monte Carlo trials (default 10000)");
    noise->add_option("--seed", common.seed, "master seed (default $" + std::string(kSeedEnv) + " or 1)");
    noise->add_option("--threads", noise_args.threads, "worker threads, 0 = hardware");
    noise->add_option("--efficiencies", noise_args.efficiencies, "comma separated relative efficiencies");

    auto* quartz = app.add_subcommand("quartz", "minimum quartz thickness for a blind measurement");
    add_common(quartz, common);
    quartz->add_option("--wavelength", quartz_args.spec.wavelength_nm, "centre wavelength, nm");
    quartz->add_option("--bandwidth", quartz_args.spec.bandwidth_nm, "spectral width, nm");
    quartz->add_option("--birefringence", quartz_args.spec.birefringence, "quartz index difference");
    auto* installed_opt = quartz->add_option("--installed", installed, "installed crystal thickness, mm");
    quartz->add_option("--dim", quartz_args.dim, "levels to decohere (default 2)");

    try {
        common.seed = default_seed();
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfigError;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }

    try {
        if (witness->parsed()) cmd_witness(common, source, out);
        if (optimal->parsed()) cmd_optimal(common, optimal_dim, out);
        if (compile->parsed()) cmd_compile(common, compile_args, out);
        if (noise->parsed()) cmd_noise(common, source, noise_args, out);
        if (quartz->parsed()) {
            if (installed_opt->count() > 0) quartz_args.installed = installed;
            cmd_quartz(common, quartz_args, out);
        }
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const DimensionError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumericalError;
    }
    return kExitOk;
}

}  // namespace qwit::cli
