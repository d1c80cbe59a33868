#pragma once

// JSON file format for finite mm-spaces:
//   { "labels": [string], "weights": [number], "dist": [[number]] }
// Numbers are written with 17 significant digits so files round-trip.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmspace/errors.hpp"
#include "mmspace/space.hpp"

namespace mmspace {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline FiniteMMSpace parse_space(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("mm-space file must hold a JSON object");
  if (!j.contains("weights") || !j["weights"].is_array()) throw ParseError("missing \"weights\" array");
  if (!j.contains("dist") || !j["dist"].is_array()) throw ParseError("missing \"dist\" array");

  std::vector<double> weights;
  for (const auto& w : j["weights"]) {
    if (!w.is_number()) throw ParseError("weights must be numbers");
    weights.push_back(w.get<double>());
  }
  const std::size_t n = weights.size();
  const auto& rows = j["dist"];
  if (rows.size() != n)
    throw ParseError("dist has " + std::to_string(rows.size()) + " rows, expected " + std::to_string(n));
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i].is_array() || rows[i].size() != n) throw ParseError("dist row " + std::to_string(i) + " must have " +
                                                                     std::to_string(n) + " entries");
    for (std::size_t k = 0; k < n; ++k) {
      if (!rows[i][k].is_number()) throw ParseError("dist entries must be numbers");
      d(i, k) = rows[i][k].get<double>();
    }
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    if (!j["labels"].is_array()) throw ParseError("\"labels\" must be an array");
    for (const auto& l : j["labels"]) {
      if (!l.is_string()) throw ParseError("labels must be strings");
      labels.push_back(l.get<std::string>());
    }
  } else {
    labels = default_labels(n);
  }
  FiniteMMSpace space(std::move(labels), std::move(weights), std::move(d));
  require_valid(space);
  return space;
}

inline FiniteMMSpace read_space(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_space(buf.str());
}

inline std::string format_space(const FiniteMMSpace& space) {
  std::ostringstream out;
  out << "{\n  \"labels\": [";
  for (std::size_t i = 0; i < space.size(); ++i) out << (i ? ", " : "") << nlohmann::json(space.labels()[i]).dump();
  out << "],\n  \"weights\": [";
  for (std::size_t i = 0; i < space.size(); ++i) out << (i ? ", " : "") << format_double(space.weight(i));
  out << "],\n  \"dist\": [";
  for (std::size_t i = 0; i < space.size(); ++i) {
    out << (i ? ",\n    [" : "\n    [");
    for (std::size_t k = 0; k < space.size(); ++k) out << (k ? ", " : "") << format_double(space.d(i, k));
    out << ']';
  }
  out << "\n  ]\n}\n";
  return out.str();
}

inline void write_space(const FiniteMMSpace& space, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << format_space(space);
}

}  // namespace mmspace
