#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dnl/solver.hpp"

namespace dnl {

using Json = nlohmann::json;

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void dump_json(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {  // keys already sorted
        out += pad_in + Json(it.key()).dump() + ": ";
        dump_json(it.value(), out, indent + 1);
        if (i + 1 < j.size()) out += ",";
        out += "\n";
      }
      out += pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        out += pad_in;
        dump_json(j[i], out, indent + 1);
        if (i + 1 < j.size()) out += ",";
        out += "\n";
      }
      out += pad + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

}  // namespace detail

/// Deterministic serialization: sorted keys, floats at 17 significant digits.
inline std::string json_text(const Json& j) {
  std::string out;
  detail::dump_json(j, out, 0);
  out += "\n";
  return out;
}

/// Deterministic CSV: header row plus one row per record, 17 significant digits.
inline std::string csv_text(const std::vector<std::string>& header,
                            const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    out += header[i];
    out += (i + 1 < header.size()) ? "," : "\n";
  }
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out += detail::format_double(row[i]);
      out += (i + 1 < row.size()) ? "," : "\n";
    }
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_file: cannot open " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write_file: write failed for " + path.string());
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Solution export: one row per (step, node).
inline std::string solution_csv(const DiscreteSolution& sol) {
  std::vector<std::vector<double>> rows;
  rows.reserve((sol.grid.step_count + 1) * sol.mesh.node_count());
  for (std::size_t k = 0; k <= sol.grid.step_count; ++k)
    for (std::size_t i = 0; i < sol.mesh.node_count(); ++i)
      rows.push_back({static_cast<double>(k), sol.grid.time_of(k), static_cast<double>(i),
                      sol.mesh.nodes[i], sol.states[k][i]});
  return csv_text({"step", "time", "node", "x", "value"}, rows);
}

/// Per-run summary: grid, per-step iteration counts and residuals.
inline Json solution_summary(const DiscreteSolution& sol) {
  Json j;
  j["time_steps"] = sol.grid.step_count;
  j["elements"] = sol.mesh.element_count();
  j["final_time"] = sol.grid.final_time;
  j["lumped_time"] = sol.lumped_time;
  j["max_abs"] = sol.max_abs();
  Json iters = Json::array(), residuals = Json::array();
  for (const auto& s : sol.steps) {
    iters.push_back(s.iterations);
    residuals.push_back(s.gradient_norm);
  }
  j["step_iterations"] = iters;
  j["step_residuals"] = residuals;
  return j;
}

}  // namespace dnl
