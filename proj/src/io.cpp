#include "qwit/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qwit/errors.hpp"

namespace qwit {

namespace {

double parse_double(std::string_view s, std::string_view token) {
    double value = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && s.front() == '+') ++first;  // from_chars rejects a leading '+'
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || first == last) {
        throw ParseError("malformed number in complex token '" + std::string(token) + "'");
    }
    if (!std::isfinite(value)) throw ParseError("non-finite value in '" + std::string(token) + "'");
    return value;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Json vector_to_json(const ComplexVector& v) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(format_complex(v(i)));
    return arr;
}

std::vector<Complex> complex_list(const Json& j, const char* what) {
    if (!j.is_array()) throw ParseError(std::string(what) + ": expected an array of complex strings");
    std::vector<Complex> out;
    for (const auto& e : j) {
        if (!e.is_string()) throw ParseError(std::string(what) + ": entries must be \"a+bi\" strings");
        out.push_back(parse_complex(e.get<std::string>()));
    }
    return out;
}

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("config: missing field '") + key + "'");
    return j.at(key);
}

Json optional_number(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

Json matrix2_to_json(const Matrix2c& b) {
    ComplexMatrix m = b;
    return matrix_to_json(m);
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string format_complex(Complex z) {
    // Signed zeros carry no information here; print them as 0.
    const double re = z.real() == 0.0 ? 0.0 : z.real();
    std::string out = format_double(re);
    const double im = z.imag() == 0.0 ? 0.0 : z.imag();
    if (im < 0.0) {
        out += '-';
        out += format_double(-im);
    } else {
        out += '+';
        out += format_double(im);
    }
    out += 'i';
    return out;
}

Complex parse_complex(std::string_view token) {
    if (token.size() < 4 || token.back() != 'i') {
        throw ParseError("complex token '" + std::string(token) + "' must look like a+bi");
    }
    const std::string_view body = token.substr(0, token.size() - 1);
    // The separating sign is the last '+'/'-' not at the start and not part of an exponent.
    std::size_t split = std::string_view::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    if (split == std::string_view::npos) {
        throw ParseError("complex token '" + std::string(token) + "' has no imaginary part");
    }
    const double re = parse_double(body.substr(0, split), token);
    const double im = parse_double(body.substr(split), token);
    return {re, im};
}

ComplexMatrix parse_matrix_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw ParseError("matrix file: empty input");
    long n = 0;
    {
        std::istringstream header(line);
        std::string extra;
        if (!(header >> n) || (header >> extra) || n < 1) {
            throw ParseError("matrix file: first line must be a positive integer dimension");
        }
    }
    ComplexMatrix m(n, n);
    long row = 0;
    while (row < n && std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        long col = 0;
        while (ls >> tok) {
            if (col >= n) throw ParseError("matrix file: row " + std::to_string(row + 1) + " has too many entries");
            m(row, col++) = parse_complex(tok);
        }
        if (col == 0) continue;  // blank line
        if (col != n) throw ParseError("matrix file: row " + std::to_string(row + 1) + " has too few entries");
        ++row;
    }
    if (row != n) throw ParseError("matrix file: expected " + std::to_string(n) + " rows");
    std::string rest;
    if (in >> rest) throw ParseError("matrix file: trailing content after " + std::to_string(n) + " rows");
    return m;
}

std::string format_matrix_text(const ComplexMatrix& m) {
    std::string out = std::to_string(m.rows()) + "\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out += ' ';
            out += format_complex(m(r, c));
        }
        out += '\n';
    }
    return out;
}

ComplexMatrix read_matrix_file(const std::filesystem::path& path) { return parse_matrix_text(read_text(path)); }

void write_matrix_file(const std::filesystem::path& path, const ComplexMatrix& m) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path.string());
    out << format_matrix_text(m);
}

Json matrix_to_json(const ComplexMatrix& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(format_complex(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

ComplexMatrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw ParseError("matrix: expected a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(j.size());
    ComplexMatrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto row = complex_list(j[static_cast<std::size_t>(r)], "matrix row");
        if (static_cast<Eigen::Index>(row.size()) != n) throw ParseError("matrix: rows must have N entries");
        for (Eigen::Index c = 0; c < n; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
}

Json config_to_json(const WitnessConfig& config) {
    Json j;
    j["dim"] = config.dim();
    Json basis = Json::array();
    for (const PureState& s : config.preferred_basis().states()) basis.push_back(vector_to_json(s.amplitudes()));
    j["preferred_basis"] = std::move(basis);
    Json coeffs = Json::array();
    for (const Complex& c : config.superposition_coeffs()) coeffs.push_back(format_complex(c));
    j["superposition"] = std::move(coeffs);
    Json intervention;
    if (const auto* blind = std::get_if<BlindMeasurement>(&config.intervention())) {
        intervention["kind"] = "blind_measurement";
        Json vectors = Json::array();
        for (const PureState& s : blind->basis.states()) vectors.push_back(vector_to_json(s.amplitudes()));
        intervention["basis"] = std::move(vectors);
        intervention["groups"] = blind->groups;
    } else {
        intervention["kind"] = "channel";
        intervention["u0"] = matrix_to_json(std::get<PhaseChannel>(config.intervention()).u0.matrix());
    }
    j["intervention"] = std::move(intervention);
    j["evolution"] = matrix_to_json(config.evolution().matrix());
    j["projector"] = matrix_to_json(config.outcome_projector().matrix());
    return j;
}

WitnessConfig config_from_json(const Json& j) {
    try {
        const int n = field(j, "dim").get<int>();
        if (n < 1) throw ParseError("config: dim must be positive");

        auto read_basis = [&](const Json& arr) {
            if (!arr.is_array()) throw ParseError("config: basis must be an array of vectors");
            std::vector<ComplexVector> vectors;
            for (const auto& v : arr) {
                const auto entries = complex_list(v, "basis vector");
                vectors.emplace_back(Eigen::Map<const ComplexVector>(entries.data(),
                                                                      static_cast<Eigen::Index>(entries.size())));
            }
            return OrthonormalBasis::from_vectors(std::move(vectors));
        };

        OrthonormalBasis basis = j.contains("preferred_basis") ? read_basis(j.at("preferred_basis"))
                                                               : OrthonormalBasis::computational(n);
        std::vector<Complex> coeffs = complex_list(field(j, "superposition"), "superposition");

        const Json& iv = field(j, "intervention");
        const std::string kind = field(iv, "kind").get<std::string>();
        Intervention intervention = PhaseChannel{UnitaryChannel::identity(n)};
        if (kind == "blind_measurement") {
            OrthonormalBasis mbasis = iv.contains("basis") ? read_basis(iv.at("basis")) : basis;
            if (iv.contains("groups")) {
                intervention = BlindMeasurement{std::move(mbasis), iv.at("groups").get<std::vector<int>>()};
            } else {
                intervention = BlindMeasurement::complete(std::move(mbasis));
            }
        } else if (kind == "channel") {
            intervention = PhaseChannel{UnitaryChannel::from_matrix(matrix_from_json(field(iv, "u0")))};
        } else {
            throw ParseError("config: intervention kind must be 'blind_measurement' or 'channel'");
        }

        UnitaryChannel evolution = UnitaryChannel::from_matrix(matrix_from_json(field(j, "evolution")));
        Projector projector = j.contains("projector_index")
                                  ? Projector::basis(n, j.at("projector_index").get<int>())
                                  : Projector::from_matrix(matrix_from_json(field(j, "projector")));
        WitnessConfig config(std::move(basis), std::move(coeffs), std::move(intervention), std::move(evolution),
                             std::move(projector));
        if (config.dim() != n) throw DimensionError("config: dim field disagrees with the matrices");
        return config;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
}

WitnessConfig read_config_file(const std::filesystem::path& path) {
    Json j;
    try {
        j = Json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

Json report_to_json(const WitnessReport& report) {
    Json j;
    j["witness"] = to_string(report.kind);
    j["control_values"] = report.control_values;
    j["superposition_value"] = report.superposition_value;
    j["p_b"] = report.p_b;
    j["p_after"] = report.p_after;
    j["violation_margin"] = report.violation_margin;
    j["lower_margin"] = report.lower_margin;
    j["violated"] = report.violated;
    return j;
}

Json noise_result_to_json(const NoiseStudyResult& r) {
    Json j;
    j["witness"] = to_string(r.kind);
    j["expected_total"] = r.expected_total;
    j["witness_mean"] = r.witness_mean;
    j["witness_std"] = r.witness_std;
    j["control_means"] = r.control_means;
    j["control_stds"] = r.control_stds;
    j["sd_of_violation"] = optional_number(r.sd_of_violation);
    j["trials"] = r.trials;
    j["seed"] = r.seed;
    j["empty_arms"] = r.empty_arms;
    return j;
}

Json noise_table_to_json(const std::vector<NoiseStudyResult>& table) {
    Json rows = Json::array();
    for (const auto& r : table) rows.push_back(noise_result_to_json(r));
    return rows;
}

std::string noise_table_to_csv(const std::vector<NoiseStudyResult>& table) {
    std::ostringstream out;
    const std::size_t n = table.empty() ? 0 : table.front().control_means.size();
    out << "witness,expected_total,trials,seed,witness_mean,witness_std";
    for (std::size_t k = 0; k < n; ++k) out << ",control_mean_" << k;
    for (std::size_t k = 0; k < n; ++k) out << ",control_std_" << k;
    out << ",sd_of_violation,empty_arms\n";
    for (const auto& r : table) {
        out << to_string(r.kind) << ',' << format_double(r.expected_total) << ',' << r.trials << ',' << r.seed << ','
            << format_double(r.witness_mean) << ',' << format_double(r.witness_std);
        for (double m : r.control_means) out << ',' << format_double(m);
        for (double s : r.control_stds) out << ',' << format_double(s);
        out << ',' << (r.sd_of_violation ? format_double(*r.sd_of_violation) : std::string("nan")) << ','
            << r.empty_arms << '\n';
    }
    return out.str();
}

Json plan_to_json(const DecompositionPlan& plan) {
    Json j;
    j["dim"] = plan.dim;
    Json rotations = Json::array();
    for (const auto& r : plan.rotations) {
        Json e;
        e["high"] = r.high;
        e["low"] = r.low;
        e["block"] = matrix2_to_json(r.block);
        rotations.push_back(std::move(e));
    }
    j["rotations"] = std::move(rotations);
    Json phases = Json::array();
    for (const Complex& s : plan.phase_diag) phases.push_back(format_complex(s));
    j["phase_diag"] = std::move(phases);
    return j;
}

Json layout_to_json(const OpticalLayout& layout) {
    auto slot_json = [](const Slot& s) {
        Json j;
        j["mode"] = s.mode;
        j["pol"] = to_string(s.pol);
        return j;
    };
    Json j;
    j["dim"] = layout.dim;
    j["encoding"] = to_string(layout.encoding);
    j["bd_count"] = layout.bd_count;
    j["output_relabelled"] = layout.output_relabelled;
    Json in = Json::array();
    for (const Slot& s : layout.input_slots) in.push_back(slot_json(s));
    j["input_slots"] = std::move(in);
    Json elements = Json::array();
    for (const auto& e : layout.elements) {
        Json el;
        if (const auto* w = std::get_if<WavePlateSet>(&e)) {
            el["kind"] = "WavePlateSet";
            el["mode"] = w->mode;
            el["block"] = matrix2_to_json(w->block);
        } else if (const auto* h = std::get_if<HalfWavePlate45>(&e)) {
            el["kind"] = "HalfWavePlate45";
            el["mode"] = h->mode;
        } else if (const auto* q = std::get_if<QuartzCrystal>(&e)) {
            el["kind"] = "QuartzCrystal";
            el["mode"] = q->mode;
            el["pol"] = to_string(q->pol);
            el["thickness_mm"] = q->thickness_mm;
        } else {
            el["kind"] = "BeamDisplacer";
        }
        elements.push_back(std::move(el));
    }
    j["elements"] = std::move(elements);
    Json out = Json::array();
    for (const Slot& s : layout.output_slots) out.push_back(slot_json(s));
    j["output_slots"] = std::move(out);
    return j;
}

}  // namespace qwit
