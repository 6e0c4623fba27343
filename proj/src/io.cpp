#include "basinlab/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace basinlab {

using json = nlohmann::ordered_json;

namespace {

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

double parse_double(const std::string& token, long line) {
  try {
    size_t consumed = 0;
    const double value = std::stod(token, &consumed);
    if (consumed != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line) + ": bad number '" + token + "'", line);
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream stream(line);
  while (std::getline(stream, field, ',')) out.push_back(field);
  return out;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

Matrix matrix_from_json(const json& values, Index rows, Index cols, const char* what) {
  if (!values.is_array() || static_cast<Index>(values.size()) != rows * cols)
    throw std::invalid_argument(std::string(what) + ": expected " +
                                std::to_string(rows * cols) + " entries");
  Matrix m(rows, cols);
  Index idx = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<size_t>(idx++)].get<double>();
  return m;
}

}  // namespace

std::string dataset_to_csv(const Dataset& data) {
  data.validate();
  std::ostringstream out;
  out << data.d() << "," << data.m() << "," << data.k() << "," << loss_name(data.loss)
      << "\n";
  for (Index t = 0; t < data.m(); ++t) {
    for (Index j = 0; j < data.d(); ++j) {
      if (j) out << ",";
      out << format_double(data.X(t, j));
    }
    for (Index c = 0; c < data.targets.cols(); ++c)
      out << "," << format_double(data.targets(t, c));
    out << "\n";
  }
  return out.str();
}

Dataset dataset_from_csv(const std::string& text) {
  std::istringstream stream(text);
  std::string line;
  long line_no = 0;
  if (!std::getline(stream, line)) throw ParseError("empty dataset file", 1);
  ++line_no;
  const auto header = split_csv(line);
  if (header.size() != 4)
    throw ParseError("line 1: header must be 'd,m,k,loss'", 1);
  Dataset data;
  const Index d = static_cast<Index>(parse_double(header[0], 1));
  const Index m = static_cast<Index>(parse_double(header[1], 1));
  const Index k = static_cast<Index>(parse_double(header[2], 1));
  data.loss = loss_from_name(header[3]);
  data.prediction_dim = k;
  if (d < 1 || m < 1 || k < 1) throw ParseError("line 1: d, m, k must be positive", 1);
  const Index target_cols = data.loss == LossKind::SquaredLoss ? k : 1;
  data.X.resize(m, d);
  data.targets.resize(m, target_cols);
  for (Index t = 0; t < m; ++t) {
    if (!std::getline(stream, line))
      throw ParseError("line " + std::to_string(line_no + 1) + ": expected " +
                           std::to_string(m) + " instance rows",
                       line_no + 1);
    ++line_no;
    const auto fields = split_csv(line);
    if (static_cast<Index>(fields.size()) != d + target_cols)
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(d + target_cols) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    for (Index j = 0; j < d; ++j) data.X(t, j) = parse_double(fields[static_cast<size_t>(j)], line_no);
    for (Index c = 0; c < target_cols; ++c)
      data.targets(t, c) = parse_double(fields[static_cast<size_t>(d + c)], line_no);
  }
  data.validate();
  return data;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  write_text_file(path, dataset_to_csv(data));
}

Dataset read_dataset_csv(const std::string& path) {
  return dataset_from_csv(read_text_file(path));
}

std::string params_to_json(const TwoLayerParams& params) {
  params.validate();
  json doc;
  doc["type"] = "two_layer";
  doc["n"] = params.n();
  doc["d"] = params.d();
  doc["W"] = matrix_to_json(params.W);
  doc["v"] = matrix_to_json(params.v);
  return doc.dump(2) + "\n";
}

std::string params_to_json(const DeepParams& params) {
  params.validate();
  json doc;
  doc["type"] = "deep";
  doc["input_dim"] = params.input_dim();
  doc["output_dim"] = params.output_dim();
  json layers = json::array();
  for (const auto& layer : params.hidden) {
    json l;
    l["rows"] = layer.W.rows();
    l["cols"] = layer.W.cols();
    l["W"] = matrix_to_json(layer.W);
    l["b"] = matrix_to_json(layer.b);
    layers.push_back(std::move(l));
  }
  doc["hidden"] = std::move(layers);
  doc["output_W"] = matrix_to_json(params.output_W);
  return doc.dump(2) + "\n";
}

std::string params_to_json(const NetParams& params) {
  return std::visit([](const auto& p) { return params_to_json(p); }, params);
}

NetParams params_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ParseError(std::string("params JSON: ") + err.what(),
                     static_cast<long>(err.byte));
  }
  const std::string type = doc.at("type").get<std::string>();
  if (type == "two_layer") {
    TwoLayerParams params;
    const Index n = doc.at("n").get<Index>();
    const Index d = doc.at("d").get<Index>();
    params.W = matrix_from_json(doc.at("W"), n, d, "W");
    params.v = matrix_from_json(doc.at("v"), n, 1, "v");
    params.validate();
    return params;
  }
  if (type == "deep") {
    DeepParams params;
    const Index k = doc.at("output_dim").get<Index>();
    Index prev = doc.at("input_dim").get<Index>();
    for (const json& l : doc.at("hidden")) {
      DeepParams::Layer layer;
      const Index rows = l.at("rows").get<Index>();
      const Index cols = l.at("cols").get<Index>();
      layer.W = matrix_from_json(l.at("W"), rows, cols, "hidden W");
      layer.b = matrix_from_json(l.at("b"), rows, 1, "hidden b");
      params.hidden.push_back(std::move(layer));
      prev = rows;
    }
    params.output_W = matrix_from_json(doc.at("output_W"), k, prev, "output_W");
    params.validate();
    return params;
  }
  throw std::invalid_argument("unknown params type: " + type);
}

void write_params_json(const NetParams& params, const std::string& path) {
  write_text_file(path, params_to_json(params));
}

NetParams read_params_json(const std::string& path) {
  return params_from_json(read_text_file(path));
}

std::string report_to_json(const MCReport& report) {
  json doc;
  doc["bound"] = report.bound_name;
  doc["trials"] = report.trials;
  doc["successes"] = report.successes;
  doc["errored"] = report.errored;
  doc["point_estimate"] = report.point_estimate;
  doc["ci_lower"] = report.ci_lower;
  doc["ci_upper"] = report.ci_upper;
  doc["confidence"] = report.confidence;
  doc["theoretical_bound"] = report.theoretical_bound;
  doc["bound_side"] = report.side == BoundSide::LowerBound ? "lower" : "upper";
  doc["verdict"] = verdict_name(report.verdict);
  doc["seed"] = report.seed;
  doc["diagnostics_sample"] = report.diagnostics_sample;
  return doc.dump(2) + "\n";
}

std::string trials_to_csv(const std::vector<TrialRecord>& trials) {
  std::ostringstream out;
  out << "trial,success,errored,value,certificate,pattern_hash,note\n";
  for (const TrialRecord& r : trials) {
    std::string note = r.note;
    for (char& c : note)
      if (c == ',' || c == '\n') c = ';';
    out << r.index << "," << (r.success ? 1 : 0) << "," << (r.errored ? 1 : 0) << ","
        << format_double(r.value) << "," << format_double(r.certificate) << "," << r.pattern
        << "," << note << "\n";
  }
  return out.str();
}

std::string path_result_to_csv(const MonotonePathResult& result) {
  std::ostringstream out;
  out << "lambda,c,objective,segment\n";
  for (const PathSample& s : result.samples)
    out << format_double(s.lambda) << "," << format_double(s.c) << ","
        << format_double(s.objective) << ",path\n";
  for (const PathSample& s : result.final_segment)
    out << format_double(s.lambda) << "," << format_double(s.c) << ","
        << format_double(s.objective) << ",final\n";
  return out.str();
}

std::string path_verdict_to_json(const MonotonePathResult& result) {
  json doc;
  doc["monotone"] = result.monotone;
  doc["max_violation"] = result.max_violation;
  doc["samples"] = result.samples.size();
  doc["final_segment_samples"] = result.final_segment.size();
  doc["start_objective"] = result.samples.empty() ? 0.0 : result.samples.front().objective;
  doc["end_objective"] =
      result.final_segment.empty() ? 0.0 : result.final_segment.back().objective;
  return doc.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << contents;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace basinlab
