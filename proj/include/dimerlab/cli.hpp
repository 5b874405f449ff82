#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dimerlab/curves.hpp"
#include "dimerlab/feshbach.hpp"
#include "dimerlab/model.hpp"

namespace dimerlab {

struct RunConfig {
  // model
  double Z1 = 1.0;
  double Z2 = 1.0;
  double softening = 0.5;
  DimensionMode dimension_mode = DimensionMode::soft_coulomb_1d;
  CouplingMode coupling_mode = CouplingMode::full;
  // grid
  double L = 20.0;
  std::size_t n = 401;
  // window
  double r_lo = 16.0;
  double r_hi = 36.0;
  double step = 1.0;
  std::string r0_policy = "grid";  // grid | offset
  double inner_frac = 1.0 / 3.0;
  double outer_frac = 7.0 / 18.0;
  double dilation = 6.0 / 7.0;
  double witness_s = 0.0;  // 0: r_lo
  // solver
  double eig_tol = 1e-9;
  double resolvent_tol = 1e-12;
  double fixed_point_tol = 1e-14;
  double gap_min = 1e-8;
  std::size_t dense_cap = 4096;
  unsigned seed = 20240611;
  std::string direct = "lanczos";  // none | lanczos | dense
  std::size_t nmax = 0;            // 0: smallest converged nmax
  bool hellmann_feynman = true;
  int ion_m = 1000;                // 1000: every split
  // newton
  std::string newton_profile = "hydrogenic";  // hydrogenic | point
  double newton_radius1 = 3.0;
  double newton_radius2 = 3.0;
  double newton_separation = 10.0;
  double newton_tol = 1e-10;
  // output
  std::string out_dir = "out";
  std::vector<std::string> formats{"csv", "json", "plot"};

  AtomSpec atom1() const;
  AtomSpec atom2() const;
  DimerSpec dimer(double r) const;
  Grid grid() const;
  std::vector<double> separations() const;
  FeshbachSettings feshbach_settings() const;
  bool wants(const std::string& format) const;

  /// Sorted key = value lines over every field.
  std::string canonical() const;
  /// FNV-1a over canonical().
  std::uint64_t hash() const;
};

/// section.key -> value; accepts INI sections or (flat or one-level nested) JSON.
std::map<std::string, std::string> parse_config_text(const std::string& text);
/// Applies key/value pairs; unknown keys and bad values throw ConfigError
/// naming the key.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
RunConfig load_config(const std::filesystem::path& file, const std::vector<std::string>& overrides);

std::string hash_hex(std::uint64_t h);
/// 17 significant digits; nan/inf spelled out.
std::string format_number(double x);

struct CommandContext {
  RunConfig config;
  std::filesystem::path out_dir;
  std::ostream* log = nullptr;
  std::size_t warnings = 0;
};

int cmd_atom(CommandContext& ctx);
int cmd_ions(CommandContext& ctx);
int cmd_scan(CommandContext& ctx);
int cmd_c6(CommandContext& ctx);
int cmd_feshbach(CommandContext& ctx);
int cmd_derivs(CommandContext& ctx);
int cmd_monotone(CommandContext& ctx);
int cmd_newton(CommandContext& ctx);

/// Dispatches by name; maps ConfigError, SolverError, ValidityError to
/// exit codes 1, 2, 3.
int run_command(const std::string& name, CommandContext& ctx, std::ostream& err);

const std::vector<std::string>& command_names();

}  // namespace dimerlab
