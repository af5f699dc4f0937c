#pragma once

// JSON forms of the library's value types. Reports are written with
// 17 significant digits so that every double round-trips exactly.

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "cyma/error.hpp"
#include "cyma/frames.hpp"
#include "cyma/macoeffs.hpp"
#include "cyma/reconstruct.hpp"
#include "cyma/solver.hpp"

namespace cyma {

using Json = nlohmann::json;

namespace detail {

inline void write_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
  // keep floats recognizable as floats
  if (std::string_view(buf).find_first_of(".eEn") == std::string_view::npos) out += ".0";
}

inline void write_json(std::string& out, const Json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        write_json(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out += ',';
        newline(depth + 1);
        write_json(out, j[k], indent, depth + 1);
      }
      newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float:
      write_number(out, j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(Errc::ParseError, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace detail

/// Deterministic text form: sorted keys, %.17g floats, non-finite as null.
inline std::string dump(const Json& j, int indent = 2) {
  std::string out;
  detail::write_json(out, j, indent, 0);
  return out;
}

inline Json parse_json_text(const std::string& text, const std::string& origin = "input") {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(Errc::ParseError, origin + ": " + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json read_json_file(const std::string& path) { return parse_json_text(read_text_file(path), path); }

// frames

inline Json to_json(const Mat4& m) {
  Json rows = Json::array();
  for (const auto& r : m) rows.push_back(Json(r));
  return rows;
}

inline Json to_json(const FrameSpec& s) { return {{"case", to_string(s.group_case())}, {"G", to_json(s.G())}}; }

inline FrameSpec frame_from_json(const Json& j) {
  try {
    const GroupCase c = group_case_from_string(j.at("case").get<std::string>());
    const Json& g = j.at("G");
    if (!g.is_array() || g.size() != 4) throw Error(Errc::ParseError, "G must be a 4x4 array");
    Mat4 m{};
    for (int i = 0; i < 4; ++i) {
      if (!g[i].is_array() || g[i].size() != 4) throw Error(Errc::ParseError, "G must be a 4x4 array");
      for (int k = 0; k < 4; ++k) m[i][k] = g[i][k].get<double>();
    }
    return FrameSpec(c, m);
  } catch (const Json::exception& e) {
    throw Error(Errc::ParseError, std::string("frame: ") + e.what());
  }
}

inline Json to_json(const ValidationReport& r) {
  Json v = Json::array();
  for (const auto& x : r.violations)
    v.push_back({{"constraint", x.constraint}, {"value", x.value}, {"tolerance", x.tolerance}});
  return {{"valid", r.valid}, {"violations", v}, {"warnings", r.warnings}};
}

// coefficients

inline Json to_json(const MACoefficients& c) {
  return {{"case", to_string(c.group_case)},
          {"B11", c.B11}, {"B12", c.B12}, {"B22", c.B22},
          {"C11", c.C11}, {"C12", c.C12}, {"C22", c.C22},
          {"D", c.D}, {"E1", c.E1}, {"E2", c.E2}};
}

inline MACoefficients coefficients_from_json(const Json& j) {
  try {
    MACoefficients c;
    c.group_case = j.contains("case") ? group_case_from_string(j.at("case").get<std::string>()) : GroupCase::NilYT;
    c.B11 = j.at("B11").get<double>();
    c.B12 = j.at("B12").get<double>();
    c.B22 = j.at("B22").get<double>();
    c.C11 = j.at("C11").get<double>();
    c.C12 = j.at("C12").get<double>();
    c.C22 = j.at("C22").get<double>();
    c.D = j.at("D").get<double>();
    c.E1 = j.at("E1").get<double>();
    c.E2 = j.at("E2").get<double>();
    return c;
  } catch (const Json::exception& e) {
    throw Error(Errc::ParseError, std::string("coefficients: ") + e.what());
  }
}

// solver

inline Json to_json(const SolverConfig& c) {
  return {{"n1", c.grid.n1},
          {"n2", c.grid.n2},
          {"backend", to_string(c.backend)},
          {"newton_tol", c.newton_tol},
          {"max_newton", c.max_newton},
          {"tau_steps", c.tau_steps},
          {"line_search", {{"shrink", c.line_search.shrink}, {"min_step", c.line_search.min_step}}},
          {"linear_solver",
           {{"method", "gmres"},
            {"tol", c.linear_solver.tol},
            {"max_iter", c.linear_solver.max_iter},
            {"restart", c.linear_solver.restart}}},
          {"jacobian_mode", to_string(c.jacobian_mode)}};
}

/// Missing keys keep their defaults.
inline SolverConfig solver_config_from_json(const Json& j) {
  using detail::get_or;
  if (!j.is_object()) throw Error(Errc::ParseError, "solver config must be a JSON object");
  SolverConfig c;
  c.grid = TorusGrid(get_or(j, "n1", c.grid.n1), get_or(j, "n2", c.grid.n2));
  if (j.contains("backend")) c.backend = backend_from_string(j.at("backend").get<std::string>());
  c.newton_tol = get_or(j, "newton_tol", c.newton_tol);
  c.max_newton = get_or(j, "max_newton", c.max_newton);
  c.tau_steps = get_or(j, "tau_steps", c.tau_steps);
  if (j.contains("line_search")) {
    const Json& l = j.at("line_search");
    c.line_search.shrink = get_or(l, "shrink", c.line_search.shrink);
    c.line_search.min_step = get_or(l, "min_step", c.line_search.min_step);
  }
  if (j.contains("linear_solver")) {
    const Json& l = j.at("linear_solver");
    const auto method = get_or<std::string>(l, "method", "gmres");
    if (method != "gmres") throw Error(Errc::ParseError, "unsupported linear solver '" + method + "'");
    c.linear_solver.tol = get_or(l, "tol", c.linear_solver.tol);
    c.linear_solver.max_iter = get_or(l, "max_iter", c.linear_solver.max_iter);
    c.linear_solver.restart = get_or(l, "restart", c.linear_solver.restart);
  }
  if (j.contains("jacobian_mode")) c.jacobian_mode = jacobian_mode_from_string(j.at("jacobian_mode").get<std::string>());
  c.check();
  return c;
}

inline Json to_json(const NormReport& n) { return {{"c0", n.c0}, {"c1", n.c1}, {"c2", n.c2}}; }

inline Json to_json(const SolveReport& r) {
  Json stages = Json::array();
  for (const auto& s : r.stages)
    stages.push_back({{"tau", s.tau},
                      {"newton_iterations", s.newton_iterations},
                      {"residual_sup", s.residual_sup},
                      {"min_A11", s.min_a11},
                      {"min_A22", s.min_a22},
                      {"line_search_activations", s.line_search_activations},
                      {"linear_iterations", s.linear_iterations}});
  return {{"grid", {r.grid.n1, r.grid.n2}},
          {"backend", to_string(r.backend)},
          {"jacobian_mode", to_string(r.jacobian_mode)},
          {"stages", stages},
          {"failed_stage_attempts", r.failed_stage_attempts},
          {"total_newton_iterations", r.total_newton_iterations()},
          {"final_residual_sup", r.final_residual_sup},
          {"final_residual_mean", r.final_residual_mean},
          {"u_mean", r.u_mean},
          {"min_A11", r.min_a11},
          {"min_A22", r.min_a22},
          {"min_Du_minus_C11", r.min_Du_minus_C11},
          {"min_C11_plus_Du", r.min_C11_plus_Du},
          {"norms", to_json(r.norms)},
          {"apriori_bound", r.apriori_bound},
          {"c2_within_bound", r.c2_within_bound},
          {"wall_time_s", r.wall_time_s}};
}

// reconstruction

inline Json to_json(const SystemResidualReport& r) {
  return {{"r1_sup", r.r1_sup},
          {"r2_sup", r.r2_sup},
          {"r3_sup", r.r3_sup},
          {"volume_ratio_error", r.volume_ratio_error}};
}

inline Json to_json(const ExplicitReport& r) {
  return {{"product_defect", r.product_defect},
          {"product_identity", r.product_identity},
          {"exactness_defect", r.exactness_defect},
          {"exact", r.exact},
          {"certified", r.certified()},
          {"alternative_form_defect", r.alternative_form_defect},
          {"form", "e^F f14 + f23"},
          {"note", "the form (e^F - 1) f14 + f23 has volume ratio e^F - 1, not e^F"}};
}

}  // namespace cyma
