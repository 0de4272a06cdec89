#pragma once

// Text formats: "a+bi" complex tokens, the N-line matrix file, JSON documents
// for configs/reports/noise studies/layouts, and CSV noise tables.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qwit/core.hpp"
#include "qwit/reck.hpp"
#include "qwit/shot_noise.hpp"
#include "qwit/witness.hpp"

namespace qwit {

using Json = nlohmann::ordered_json;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);
/// "a+bi" / "a-bi", both parts round-trip exact.
std::string format_complex(Complex z);
/// Strict "a+bi" / "a-bi" grammar; both parts required.
Complex parse_complex(std::string_view token);

/// First line N, then N lines of N complex tokens.
ComplexMatrix parse_matrix_text(std::string_view text);
std::string format_matrix_text(const ComplexMatrix& m);
ComplexMatrix read_matrix_file(const std::filesystem::path& path);
void write_matrix_file(const std::filesystem::path& path, const ComplexMatrix& m);

Json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const Json& j);

Json config_to_json(const WitnessConfig& config);
WitnessConfig config_from_json(const Json& j);
WitnessConfig read_config_file(const std::filesystem::path& path);

Json report_to_json(const WitnessReport& report);
Json noise_result_to_json(const NoiseStudyResult& result);
Json noise_table_to_json(const std::vector<NoiseStudyResult>& table);
/// Header row plus one row per total; column count fixed by the dimension.
std::string noise_table_to_csv(const std::vector<NoiseStudyResult>& table);

Json plan_to_json(const DecompositionPlan& plan);
Json layout_to_json(const OpticalLayout& layout);

}  // namespace qwit
