#pragma once

#include "basinlab/datasets.hpp"
#include "basinlab/montecarlo.hpp"
#include "basinlab/paths.hpp"
#include "basinlab/types.hpp"

#include <string>

namespace basinlab {

struct ParseError : std::runtime_error {
  ParseError(std::string what, long line) : std::runtime_error(std::move(what)), line(line) {}
  long line;
};

/// Dataset CSV: header row `d,m,k,loss`, then one `x_1,...,x_d,y...` row per
/// instance. Doubles are written with 17 significant digits so round trips
/// are value-exact.
std::string dataset_to_csv(const Dataset& data);
Dataset dataset_from_csv(const std::string& text);
void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

/// Parameters as a flat JSON document with explicit shape fields.
std::string params_to_json(const TwoLayerParams& params);
std::string params_to_json(const DeepParams& params);
std::string params_to_json(const NetParams& params);
NetParams params_from_json(const std::string& text);
void write_params_json(const NetParams& params, const std::string& path);
NetParams read_params_json(const std::string& path);

std::string report_to_json(const MCReport& report);
std::string trials_to_csv(const std::vector<TrialRecord>& trials);

std::string path_result_to_csv(const MonotonePathResult& result);
std::string path_verdict_to_json(const MonotonePathResult& result);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace basinlab
