#pragma once

// Command-line front end. `run` is the whole program minus process
// plumbing, so tests can drive it with in-memory streams.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cyma/cyma.hpp"

namespace cyma::cli {

inline constexpr const char* kVersion = "0.1.0";

enum Exit : int { kOk = 0, kDomainFailure = 1, kUsageError = 2 };

inline int exit_code_for(Errc e) {
  switch (e) {
    case Errc::ParseError:
    case Errc::GridMismatch:
    case Errc::InvalidGrid:
    case Errc::InvalidArgument:
      return kUsageError;
    default:
      return kDomainFailure;
  }
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

struct Globals {
  std::string out_dir;
  std::string backend;
  std::string grid;
  std::uint64_t seed = 0;
  bool csv = false;
};

/// Mutable state of one invocation, turned into the run manifest at the end.
class Session {
 public:
  Session(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }
  Globals globals;
  std::string command;
  Json config = Json::object();

  void record_input(const std::string& label, const std::string& bytes, const std::string& path = "") {
    inputs_.push_back({{"name", label}, {"path", path}, {"fnv1a64", hex64(fnv1a64(bytes))}});
  }

  std::string read_input(const std::string& label, const std::string& path) {
    std::string text = read_text_file(path);
    record_input(label, text, path);
    return text;
  }

  void log(const std::string& msg) { err_ << msg << '\n'; }

  /// Destination path inside --out, or empty when no output directory was given.
  std::string out_path(const std::string& name) const {
    if (globals.out_dir.empty()) return {};
    return (std::filesystem::path(globals.out_dir) / name).string();
  }

  void write_report(const Json& report, const std::string& name) {
    const std::string text = dump(report);
    out_ << text << '\n';
    if (const std::string p = out_path(name); !p.empty()) {
      std::ofstream f(p);
      if (!f) throw Error(Errc::ParseError, "cannot write '" + p + "'");
      f << text << '\n';
    }
  }

  void write_field_output(const TorusField& f, const std::string& name) {
    const std::string p = out_path(name);
    if (p.empty()) return;
    write_field(f, p);
    if (globals.csv) write_csv(f, p + ".csv");
  }

  void emit_manifest(int status, double wall) {
    Json m = {{"command", command},
              {"inputs", inputs_},
              {"config", config},
              {"tool_version", kVersion},
              {"wall_time_s", wall},
              {"exit_status", status}};
    const std::string text = dump(m);
    if (const std::string p = out_path("manifest.json"); !p.empty()) {
      std::ofstream f(p);
      if (f) {
        f << text << '\n';
        return;
      }
    }
    err_ << text << '\n';
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
  Json inputs_ = Json::array();
};

inline TorusGrid parse_grid(const std::string& s) {
  const auto x = s.find_first_of("xX");
  if (x == std::string::npos) throw Error(Errc::ParseError, "grid must look like N1xN2, got '" + s + "'");
  try {
    std::size_t p1 = 0, p2 = 0;
    const int n1 = std::stoi(s.substr(0, x), &p1);
    const int n2 = std::stoi(s.substr(x + 1), &p2);
    if (p1 != x || p2 != s.size() - x - 1) throw std::invalid_argument("trailing characters");
    return TorusGrid(n1, n2);
  } catch (const std::logic_error&) {
    throw Error(Errc::ParseError, "grid must look like N1xN2, got '" + s + "'");
  }
}

inline FrameSpec load_frame(Session& s, const std::string& path) {
  return frame_from_json(parse_json_text(s.read_input("frame", path), path));
}

/// Config file (optional) with --grid / --backend overrides applied on top.
inline SolverConfig load_config(Session& s, const std::string& path) {
  Json j = Json::object();
  if (!path.empty()) j = parse_json_text(s.read_input("config", path), path);
  SolverConfig cfg = solver_config_from_json(j);
  if (!s.globals.grid.empty()) cfg.grid = parse_grid(s.globals.grid);
  if (!s.globals.backend.empty()) cfg.backend = backend_from_string(s.globals.backend);
  s.config = to_json(cfg);
  return cfg;
}

/// amp·cos(2π(k1·x1 + k2·x2) + phase) summed over the listed modes.
inline TorusField field_from_modes(const Json& modes, const TorusGrid& grid) {
  const Json& list = modes.is_object() ? modes.at("modes") : modes;
  if (!list.is_array()) throw Error(Errc::ParseError, "F modes must be a JSON list");
  TorusField f(grid);
  for (const Json& m : list) {
    int k1, k2;
    double amp, phase;
    try {
      k1 = m.value("k1", 0);
      k2 = m.value("k2", 0);
      amp = m.at("amp").get<double>();
      phase = m.value("phase", 0.0);
    } catch (const Json::exception& e) {
      throw Error(Errc::ParseError, std::string("F mode: ") + e.what());
    }
    f += TorusField::sample(grid, [&](double x1, double x2) {
      return amp * std::cos(detail::kTwoPi * (k1 * x1 + k2 * x2) + phase);
    });
  }
  return f;
}

/// F from an inline mode list, a mode-list file, a field file or a CSV.
inline TorusField load_raw_F(Session& s, const std::string& spec, const TorusGrid& grid) {
  const auto first = spec.find_first_not_of(" \t\n");
  if (first != std::string::npos && (spec[first] == '[' || spec[first] == '{')) {
    s.record_input("F", spec);
    return field_from_modes(parse_json_text(spec, "F"), grid);
  }
  const auto ends_with = [&](const std::string& suf) {
    return spec.size() >= suf.size() && spec.compare(spec.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (ends_with(".bin")) {
    s.read_input("F", spec);
    TorusField f = read_field(spec);
    if (!(f.grid() == grid))
      throw Error(Errc::GridMismatch, "F file grid " + std::to_string(f.grid().n1) + "x" +
                                          std::to_string(f.grid().n2) + " differs from solver grid " +
                                          std::to_string(grid.n1) + "x" + std::to_string(grid.n2));
    return f;
  }
  if (ends_with(".csv")) {
    s.read_input("F", spec);
    return read_csv(spec, grid);
  }
  return field_from_modes(parse_json_text(s.read_input("F", spec), spec), grid);
}

inline TorusField load_F(Session& s, const std::string& spec, const TorusGrid& grid, double& shift) {
  const TorusField raw = load_raw_F(s, spec, grid);
  const TorusField F = normalize_F(raw);
  shift = F.size() ? F[0] - raw[0] : 0.0;
  std::ostringstream os;
  os.precision(17);
  os << "F normalized: shift " << shift;
  s.log(os.str());
  return F;
}

// commands

inline int cmd_validate(Session& s, const std::string& frame_path) {
  const FrameSpec spec = load_frame(s, frame_path);
  const ValidationReport r = validate(spec);
  Json j = to_json(r);
  j["case"] = to_string(spec.group_case());
  s.write_report(j, "validate_report.json");
  return r.valid ? kOk : kDomainFailure;
}

inline Json coefficients_report(const MACoefficients& c) {
  Json j = to_json(c);
  j["identity_defects"] = {{"B11*B22-B12^2-D", c.b_identity_defect()}, {"C11*C22-C12^2-E1-E2", c.c_identity_defect()}};
  j["hypotheses"] = to_json(check_hypotheses(c));
  j["apriori_bound"] = apriori_bound(c);
  return j;
}

inline int cmd_coeffs(Session& s, const std::string& frame_path) {
  const FrameSpec spec = load_frame(s, frame_path);
  try {
    const MACoefficients c = coefficients(spec);
    s.write_report(coefficients_report(c), "coefficients.json");
    return kOk;
  } catch (const Error& e) {
    if (e.code() == Errc::ExplicitCaseG33Zero) {
      s.log(std::string(e.what()) + "\nthis frame has the closed-form solution: run 'explicit " + frame_path +
            " F_SPEC'");
      return kDomainFailure;
    }
    throw;
  }
}

inline Json solve_summary(const SolveResult& r, double shift) {
  Json j = to_json(r.report);
  j["F_shift"] = shift;
  return j;
}

inline int cmd_solve(Session& s, const std::string& coeffs_path, const std::string& f_spec,
                     const std::string& config_path) {
  const MACoefficients c = coefficients_from_json(parse_json_text(s.read_input("coefficients", coeffs_path), coeffs_path));
  const SolverConfig cfg = load_config(s, config_path);
  double shift = 0;
  const TorusField F = load_F(s, f_spec, cfg.grid, shift);
  const SolveResult r = continuity_solve(c, F, cfg);
  s.write_field_output(r.u, "u");
  s.write_report(solve_summary(r, shift), "solve_report.json");
  return kOk;
}

inline double roundtrip_tolerance(GroupCase c) { return c == GroupCase::NilYT ? 1e-6 : 1e-5; }

inline int cmd_roundtrip(Session& s, const std::string& frame_path, const std::string& f_spec,
                         const std::string& config_path) {
  const FrameSpec spec = load_frame(s, frame_path);
  const MACoefficients c = coefficients(spec);
  const SolverConfig cfg = load_config(s, config_path);
  double shift = 0;
  const TorusField F = load_F(s, f_spec, cfg.grid, shift);
  const SolveResult r = continuity_solve(c, F, cfg);
  const OneFormField a = one_form(r.u, spec, cfg.backend);
  const SystemResidualReport res = system_residuals(a, r.u, spec, F, cfg.backend);
  const double tol = roundtrip_tolerance(spec.group_case());
  const bool accepted = res.max() <= tol && a.periodic();

  s.write_field_output(r.u, "u");
  for (int k = 0; k < 4; ++k) s.write_field_output(a.a[k], "a" + std::to_string(k + 1));
  if (!s.globals.out_dir.empty()) {
    std::ofstream m(s.out_path("one_form.json"));
    m << dump(Json{{"case", to_string(spec.group_case())},
                   {"grid", {cfg.grid.n1, cfg.grid.n2}},
                   {"frame_file", frame_path},
                   {"components", {"a1.bin", "a2.bin", "a3.bin", "a4.bin"}}})
      << '\n';
  }

  Json j = {{"case", to_string(spec.group_case())},
            {"residuals", to_json(res)},
            {"tolerance", tol},
            {"accepted", accepted},
            {"periodicity",
             {{"wraparound", a.wraparound}, {"tolerance", a.wraparound_tolerance}, {"passed", a.periodic()}}},
            {"solve", solve_summary(r, shift)}};
  s.write_report(j, "roundtrip_report.json");
  return accepted ? kOk : kDomainFailure;
}

inline int cmd_explicit(Session& s, const std::string& frame_path, const std::string& f_spec) {
  const FrameSpec spec = load_frame(s, frame_path);
  if (spec.group_case() != GroupCase::NilYT)
    throw Error(Errc::InvalidArgument, "the closed-form branch exists only for nil_yt frames");
  const TorusGrid grid = s.globals.grid.empty() ? TorusGrid(64, 64) : parse_grid(s.globals.grid);
  s.config = {{"n1", grid.n1}, {"n2", grid.n2}};
  double shift = 0;
  const TorusField F = load_F(s, f_spec, grid, shift);
  const ExplicitSolution sol = nil_explicit_g33zero(spec, F);
  s.write_field_output(sol.p, "p");
  s.write_field_output(sol.q, "q");
  Json j = to_json(sol.report);
  j["mean_p"] = integral_mean(sol.p);
  j["min_p"] = min_value(sol.p);
  j["max_p"] = max_value(sol.p);
  j["q"] = 1.0;
  j["F_shift"] = shift;
  s.write_report(j, "explicit_report.json");
  return sol.report.certified() ? kOk : kDomainFailure;
}

inline int cmd_sample(Session& s, const std::string& case_name, int count, bool explicit_branch) {
  const GroupCase c = group_case_from_string(case_name);
  if (explicit_branch && c != GroupCase::NilYT)
    throw Error(Errc::InvalidArgument, "--explicit applies to nil_yt only");
  if (count < 1) throw Error(Errc::InvalidArgument, "--count must be >= 1");
  s.config = {{"case", case_name}, {"seed", s.globals.seed}, {"count", count}, {"explicit", explicit_branch}};
  Json frames = Json::array();
  for (int k = 0; k < count; ++k) {
    const std::uint64_t seed = s.globals.seed + static_cast<std::uint64_t>(k);
    const FrameSpec f = explicit_branch ? sample_explicit_nil(seed) : sample_admissible(c, seed);
    frames.push_back(to_json(f));
  }
  s.write_report(count == 1 ? frames[0] : frames, count == 1 ? "frame.json" : "frames.json");
  return kOk;
}

/// Full program. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  Session s(out, err);

  CLI::App app{"Calabi-Yau / Monge-Ampère pipeline on T²-bundles over the 2-torus", "cyma"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  app.add_option("--out", s.globals.out_dir, "Directory for reports, field files and the run manifest");
  app.add_option("--backend", s.globals.backend, "Derivative backend")->check(CLI::IsMember({"spectral", "fd2"}));
  app.add_option("--grid", s.globals.grid, "Grid size N1xN2 (overrides the config)");
  app.add_option("--seed", s.globals.seed, "Seed for the frame sampler");
  app.add_flag("--csv", s.globals.csv, "Also export field files as x1,x2,value CSV");

  std::string frame, coeffs, f_spec, config, case_name;
  int count = 1;
  bool explicit_branch = false;

  auto* validate_cmd = app.add_subcommand("validate", "Check an adapted frame against its constraints");
  validate_cmd->add_option("frame", frame, "Frame JSON")->required();
  auto* coeffs_cmd = app.add_subcommand("coeffs", "Monge-Ampère coefficients of a frame");
  coeffs_cmd->add_option("frame", frame, "Frame JSON")->required();
  auto* solve_cmd = app.add_subcommand("solve", "Solve the Monge-Ampère equation by continuation");
  solve_cmd->add_option("coefficients", coeffs, "Coefficient JSON")->required();
  solve_cmd->add_option("F", f_spec, "F: inline mode list, mode-list JSON, .bin field or .csv")->required();
  solve_cmd->add_option("config", config, "Solver config JSON");
  auto* roundtrip_cmd = app.add_subcommand("roundtrip", "Solve, reconstruct the 1-form and check the system");
  roundtrip_cmd->add_option("frame", frame, "Frame JSON")->required();
  roundtrip_cmd->add_option("F", f_spec, "F: inline mode list, mode-list JSON, .bin field or .csv")->required();
  roundtrip_cmd->add_option("config", config, "Solver config JSON");
  auto* explicit_cmd = app.add_subcommand("explicit", "Closed-form solution for nil_yt frames with G33 = 0");
  explicit_cmd->add_option("frame", frame, "Frame JSON")->required();
  explicit_cmd->add_option("F", f_spec, "F: inline mode list, mode-list JSON, .bin field or .csv")->required();
  auto* sample_cmd = app.add_subcommand("sample", "Generate admissible frames");
  sample_cmd->add_option("case", case_name, "nil_yt or sol_r")->required();
  sample_cmd->add_option("--count", count, "Number of frames (seeds S, S+1, ...)");
  sample_cmd->add_flag("--explicit", explicit_branch, "Nil frames with G33 = 0");

  int status = kOk;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    // --help / --version are successful exits
    status = code == 0 ? kOk : kUsageError;
    s.command = "usage";
    s.emit_manifest(status, 0.0);
    return status;
  }

  try {
    if (!s.globals.out_dir.empty()) std::filesystem::create_directories(s.globals.out_dir);
    if (*validate_cmd) {
      s.command = "validate";
      status = cmd_validate(s, frame);
    } else if (*coeffs_cmd) {
      s.command = "coeffs";
      status = cmd_coeffs(s, frame);
    } else if (*solve_cmd) {
      s.command = "solve";
      status = cmd_solve(s, coeffs, f_spec, config);
    } else if (*roundtrip_cmd) {
      s.command = "roundtrip";
      status = cmd_roundtrip(s, frame, f_spec, config);
    } else if (*explicit_cmd) {
      s.command = "explicit";
      status = cmd_explicit(s, frame, f_spec);
    } else if (*sample_cmd) {
      s.command = "sample";
      status = cmd_sample(s, case_name, count, explicit_branch);
    }
  } catch (const HomotopyFailure& e) {
    std::ostringstream os;
    os.precision(17);
    os << e.what() << " (last accepted tau " << e.last_tau() << ")";
    s.log(os.str());
    status = kDomainFailure;
  } catch (const Error& e) {
    s.log(e.what());
    status = exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    s.log(e.what());
    status = kUsageError;
  }

  s.emit_manifest(status, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return status;
}

}  // namespace cyma::cli
