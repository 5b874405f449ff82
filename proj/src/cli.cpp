#include "dimerlab/cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "dimerlab/error.hpp"
#include "dimerlab/kernels.hpp"
#include "dimerlab/perturb.hpp"

namespace dimerlab {

using nlohmann::json;

namespace {

double parse_double(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v))
    throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e15)
    throw ConfigError("config key '" + key + "': expected an integer, got '" + text + "'");
  return static_cast<long long>(v);
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const long long v = parse_integer(key, text);
  if (v < 0) throw ConfigError("config key '" + key + "': must not be negative");
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + text + "'");
}

std::string choice(const std::string& key, const std::string& text, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (text == a) return text;
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : " | ") + a;
  throw ConfigError("config key '" + key + "': '" + text + "' is not one of " + list);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) return s.substr(1, s.size() - 2);
  return s;
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
std::string show(const T& v) {
  if constexpr (std::is_floating_point_v<T>)
    return format_number(v);
  else {
    std::ostringstream s;
    s << v;
    return s.str();
  }
}

#define DIMERLAB_NUMBER(name, member)                                                                        \
  Field {                                                                                                    \
    name, [](RunConfig& c, const std::string& k, const std::string& v) { c.member = parse_double(k, v); }, \
        [](const RunConfig& c) { return show(c.member); }                                                    \
  }
#define DIMERLAB_COUNT(name, member)                                                                        \
  Field {                                                                                                   \
    name, [](RunConfig& c, const std::string& k, const std::string& v) { c.member = parse_count(k, v); }, \
        [](const RunConfig& c) { return show(c.member); }                                                   \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      DIMERLAB_NUMBER("model.Z1", Z1),
      DIMERLAB_NUMBER("model.Z2", Z2),
      DIMERLAB_NUMBER("model.a", softening),
      {"model.dimension_mode",
       [](RunConfig& c, const std::string&, const std::string& v) { c.dimension_mode = parse_dimension_mode(v); },
       [](const RunConfig& c) { return to_string(c.dimension_mode); }},
      {"model.coupling_mode",
       [](RunConfig& c, const std::string&, const std::string& v) { c.coupling_mode = parse_coupling_mode(v); },
       [](const RunConfig& c) { return to_string(c.coupling_mode); }},
      DIMERLAB_NUMBER("grid.L", L),
      DIMERLAB_COUNT("grid.n", n),
      DIMERLAB_NUMBER("window.r_lo", r_lo),
      DIMERLAB_NUMBER("window.r_hi", r_hi),
      DIMERLAB_NUMBER("window.step", step),
      {"window.r0_policy",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.r0_policy = choice(k, v, {"grid", "offset"}); },
       [](const RunConfig& c) { return c.r0_policy; }},
      DIMERLAB_NUMBER("window.inner_frac", inner_frac),
      DIMERLAB_NUMBER("window.outer_frac", outer_frac),
      DIMERLAB_NUMBER("window.dilation", dilation),
      DIMERLAB_NUMBER("window.s", witness_s),
      DIMERLAB_NUMBER("solver.tol", eig_tol),
      DIMERLAB_NUMBER("solver.resolvent_tol", resolvent_tol),
      DIMERLAB_NUMBER("solver.fixed_point_tol", fixed_point_tol),
      DIMERLAB_NUMBER("solver.gap_min", gap_min),
      DIMERLAB_COUNT("solver.dense_cap", dense_cap),
      {"solver.seed",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.seed = static_cast<unsigned>(parse_count(k, v));
       },
       [](const RunConfig& c) { return show(c.seed); }},
      {"solver.direct",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.direct = choice(k, v, {"none", "lanczos", "dense"});
       },
       [](const RunConfig& c) { return c.direct; }},
      DIMERLAB_COUNT("solver.nmax", nmax),
      {"solver.hellmann_feynman",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.hellmann_feynman = parse_bool(k, v); },
       [](const RunConfig& c) { return std::string(c.hellmann_feynman ? "true" : "false"); }},
      {"ions.m",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.ion_m = v == "all" ? 1000 : static_cast<int>(parse_integer(k, v));
       },
       [](const RunConfig& c) { return c.ion_m == 1000 ? std::string("all") : show(c.ion_m); }},
      {"newton.profile",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.newton_profile = choice(k, v, {"hydrogenic", "point"});
       },
       [](const RunConfig& c) { return c.newton_profile; }},
      DIMERLAB_NUMBER("newton.radius1", newton_radius1),
      DIMERLAB_NUMBER("newton.radius2", newton_radius2),
      DIMERLAB_NUMBER("newton.separation", newton_separation),
      DIMERLAB_NUMBER("newton.tol", newton_tol),
      {"output.directory", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; },
       [](const RunConfig& c) { return c.out_dir; }},
      {"output.formats",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.formats.clear();
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) {
           item = trim(item);
           if (!item.empty()) c.formats.push_back(choice(k, item, {"csv", "json", "plot", "text"}));
         }
       },
       [](const RunConfig& c) {
         std::string s;
         for (const auto& f : c.formats) s += (s.empty() ? "" : ",") + f;
         return s;
       }},
  };
  return table;
}

#undef DIMERLAB_NUMBER
#undef DIMERLAB_COUNT

AtomSpec make_atom(double z, double a, DimensionMode mode, const char* key) {
  if (z != std::floor(z) || z < 1.0 || z > 4.0)
    throw ConfigError(std::string("config key '") + key + "': neutral atoms need an integer charge in 1..4");
  return {z, static_cast<int>(z), a, mode};
}

// ---------------------------------------------------------------- output

std::string header_line(const CommandContext& ctx, const std::string& command) {
  return "# dimerlab " DIMERLAB_VERSION " command=" + command + " config_hash=" + hash_hex(ctx.config.hash());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::ofstream open_out(const std::filesystem::path& path) {
  ensure_dir(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

using Row = std::vector<std::string>;

void write_csv(const CommandContext& ctx, const std::string& command, const std::string& name, const Row& header,
               const std::vector<Row>& rows) {
  if (!ctx.config.wants("csv")) return;
  auto out = open_out(ctx.out_dir / name);
  out << header_line(ctx, command) << "\n";
  auto line = [&](const Row& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void write_json(const CommandContext& ctx, const std::string& command, const std::string& name, json body) {
  if (!ctx.config.wants("json")) return;
  json doc;
  doc["version"] = DIMERLAB_VERSION;
  doc["command"] = command;
  doc["config_hash"] = hash_hex(ctx.config.hash());
  json cfg = json::object();
  for (const auto& f : fields()) cfg[f.key] = f.get(ctx.config);
  doc["config"] = cfg;
  doc["result"] = std::move(body);
  auto out = open_out(ctx.out_dir / name);
  out << doc.dump(2) << "\n";
}

void write_plot(const CommandContext& ctx, const std::string& command, const std::string& quantity,
                const std::vector<double>& x, const std::vector<double>& y) {
  if (!ctx.config.wants("plot")) return;
  auto out = open_out(ctx.out_dir / ("plot_" + quantity + ".dat"));
  out << header_line(ctx, command) << "\n# r " << quantity << "\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::isfinite(y[i])) out << format_number(x[i]) << " " << format_number(y[i]) << "\n";
}

std::ostream& log(CommandContext& ctx) {
  static std::ostringstream sink;
  return ctx.log ? *ctx.log : sink;
}

void warn(CommandContext& ctx, const std::string& message) {
  ++ctx.warnings;
  log(ctx) << "warning: " << message << "\n";
}

EigenOptions eigen_options(const RunConfig& c) {
  EigenOptions eo;
  eo.tol = c.eig_tol;
  eo.seed = c.seed;
  return eo;
}

std::pair<AtomEigendata, AtomEigendata> atoms_for(const RunConfig& c, std::size_t levels) {
  const Grid g = c.grid();
  return {atom_eigendata(c.atom1(), g, levels, eigen_options(c), c.dense_cap),
          atom_eigendata(c.atom2(), g, levels, eigen_options(c), c.dense_cap)};
}

void require_1d(const RunConfig& c, const std::string& command) {
  if (c.dimension_mode != DimensionMode::soft_coulomb_1d)
    throw ConfigError(command + " needs model.dimension_mode = soft_coulomb_1d");
}

}  // namespace

// ---------------------------------------------------------------- config

AtomSpec RunConfig::atom1() const { return make_atom(Z1, softening, dimension_mode, "model.Z1"); }
AtomSpec RunConfig::atom2() const { return make_atom(Z2, softening, dimension_mode, "model.Z2"); }

DimerSpec RunConfig::dimer(double r) const { return {atom1(), atom2(), coupling_mode, r}; }

Grid RunConfig::grid() const { return build_grid(L, n); }

std::vector<double> RunConfig::separations() const {
  if (!(step > 0.0)) throw ConfigError("config key 'window.step': must be positive");
  if (!(r_lo > 0.0) || !(r_hi >= r_lo)) throw ConfigError("config keys 'window.r_lo', 'window.r_hi': need 0 < r_lo <= r_hi");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((r_hi - r_lo) / step + 1e-9));
  for (std::size_t i = 0; i <= count; ++i) out.push_back(r_lo + static_cast<double>(i) * step);
  return out;
}

FeshbachSettings RunConfig::feshbach_settings() const {
  FeshbachSettings s;
  s.inner_frac = inner_frac;
  s.outer_frac = outer_frac;
  s.dilation = dilation;
  s.anchor_on_grid = r0_policy == "grid";
  s.fixed_point_tol = fixed_point_tol;
  s.resolvent_tol = resolvent_tol;
  s.gap_min = gap_min;
  s.seed = seed;
  s.direct_tol = eig_tol;
  s.dense_cap = dense_cap;
  s.direct = direct == "none"    ? FeshbachSettings::Direct::none
             : direct == "dense" ? FeshbachSettings::Direct::dense
                                 : FeshbachSettings::Direct::lanczos;
  if (coupling_mode == CouplingMode::full) s.cover_separation = r_hi;
  return s;
}

bool RunConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

std::string RunConfig::canonical() const {
  std::vector<std::string> lines;
  for (const auto& f : fields())
    if (f.key != "output.directory") lines.push_back(f.key + " = " + f.get(*this));
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char ch : canonical()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    json doc;
    try {
      doc = json::parse(body);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    auto scalar = [](const std::string& key, const json& v) -> std::string {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
      if (v.is_number_integer()) return std::to_string(v.get<long long>());
      if (v.is_number()) return format_number(v.get<double>());
      if (v.is_array()) {
        std::string s;
        for (const auto& item : v) s += (s.empty() ? "" : ",") + item.get<std::string>();
        return s;
      }
      throw ConfigError("config key '" + key + "': unsupported JSON value");
    };
    for (const auto& [k, v] : doc.items()) {
      if (v.is_object()) {
        for (const auto& [k2, v2] : v.items()) out[k + "." + k2] = scalar(k + "." + k2, v2);
      } else {
        out[k] = scalar(k, v);
      }
    }
    return out;
  }

  std::istringstream in(text);
  std::string line, section;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(number) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    const auto hash = value.find(" #");
    if (hash != std::string::npos) value = trim(value.substr(0, hash));
    if (!section.empty()) key = section + "." + key;
    out[key] = unquote(value);
  }
  return out;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& f : fields())
    if (f.key == key) {
      f.set(config, key, value);
      return;
    }
  throw ConfigError("unknown config key '" + key + "'");
}

RunConfig load_config(const std::filesystem::path& file, const std::vector<std::string>& overrides) {
  RunConfig config;
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config file '" + file.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    for (const auto& [k, v] : parse_config_text(buf.str())) apply_setting(config, k, v);
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
    apply_setting(config, trim(o.substr(0, eq)), unquote(trim(o.substr(eq + 1))));
  }
  return config;
}

// ---------------------------------------------------------------- commands

int cmd_atom(CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  const Grid g = c.grid();
  json atoms = json::array();
  std::vector<Row> rows;
  const double extent = c.L;
  for (int which = 1; which <= 2; ++which) {
    const AtomSpec spec = which == 1 ? c.atom1() : c.atom2();
    const auto data = atom_eigendata(spec, g, 2, eigen_options(c), c.dense_cap);
    double rate = std::numeric_limits<double>::quiet_NaN(), r2 = rate;
    try {
      const auto fit = decay_rate({data.space, data.spectrum.vectors.at(0)}, spec.mode, extent);
      rate = fit.rate;
      r2 = fit.r_squared;
      if (!fit.exponential) warn(ctx, "atom " + std::to_string(which) + " tail is not exponential on the fit window");
    } catch (const ValidityError& e) {
      warn(ctx, e.what());
    }
    const double e0 = data.spectrum.values.at(0);
    const double gap = data.spectrum.values.size() > 1 ? data.gap() : std::numeric_limits<double>::quiet_NaN();
    log(ctx) << "atom " << which << ": E = " << format_number(e0) << "  gap = " << format_number(gap)
             << "  decay rate = " << format_number(rate) << "\n";
    atoms.push_back({{"atom", which},
                     {"Z", spec.charge},
                     {"electrons", spec.electrons},
                     {"mode", to_string(spec.mode)},
                     {"E", number(e0)},
                     {"gap", number(gap)},
                     {"decay_rate", number(rate)},
                     {"decay_r_squared", number(r2)},
                     {"second_moment", number(spec.electrons > 0 ? second_moment(*data.space, data.spectrum.vectors[0])
                                                                : 0.0)}});
    rows.push_back({std::to_string(which), format_number(e0), format_number(gap), format_number(rate)});
  }
  write_csv(ctx, "atom", "atom.csv", {"atom", "E", "gap", "decay_rate"}, rows);
  write_json(ctx, "atom", "atom.json", {{"spacing", g.spacing()}, {"atoms", atoms}});
  if (c.wants("text")) {
    auto out = open_out(ctx.out_dir / "atom.txt");
    out << header_line(ctx, "atom") << "\n";
    for (const auto& a : atoms)
      out << "atom " << a["atom"] << " E " << a["E"] << " gap " << a["gap"] << " decay_rate " << a["decay_rate"] << "\n";
  }
  return 0;
}

int cmd_ions(CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  const Grid g = c.grid();
  const AtomSpec a1 = c.atom1(), a2 = c.atom2();
  DissociationTable table;
  if (c.ion_m != 1000) {
    if (c.ion_m < -a2.electrons || c.ion_m > a1.electrons)
      throw ConfigError("config key 'ions.m': " + std::to_string(c.ion_m) + " is outside [" +
                        std::to_string(-a2.electrons) + ", " + std::to_string(a1.electrons) + "]");
    DissociationRow row;
    row.m = c.ion_m;
    row.E1m = ion_ground_energy(a1, c.ion_m, g);
    row.E2negm = ion_ground_energy(a2, -c.ion_m, g);
    row.sum = row.E1m + row.E2negm;
    row.valid = true;
    table.rows.push_back(row);
  } else {
    table = dissociation_check(a1, a2, g);
  }
  std::vector<Row> rows;
  json jrows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({std::to_string(r.m), format_number(r.E1m), format_number(r.E2negm), format_number(r.sum)});
    jrows.push_back({{"m", r.m}, {"E1m", number(r.E1m)}, {"E2negm", number(r.E2negm)}, {"sum", number(r.sum)},
                     {"valid", r.valid}, {"error", r.error}});
    log(ctx) << "m = " << r.m << "  E1m + E2negm = " << format_number(r.sum) << (r.valid ? "" : "  (" + r.error + ")")
             << "\n";
  }
  write_csv(ctx, "ions", "ions.csv", {"m", "E1m", "E2negm", "sum"}, rows);
  json body{{"rows", jrows}};
  if (c.ion_m == 1000) {
    body["strict_minimum_at_zero"] = table.strict_minimum_at_zero;
    body["margin"] = number(table.margin);
  }
  write_json(ctx, "ions", "ions.json", body);
  if (c.ion_m == 1000 && !table.strict_minimum_at_zero) {
    std::ostringstream msg;
    msg << "the neutral split is not the strict minimum of the dissociation energies (margin "
        << format_number(table.margin) << ")";
    throw ValidityError(msg.str());
  }
  return 0;
}

int cmd_scan(CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  require_1d(c, "scan");
  const auto r_list = c.separations();
  const auto [a1, a2] = atoms_for(c, 2);
  ScanTable table = scan(c.dimer(r_list.front()), c.grid(), r_list, c.feshbach_settings(), a1, a2);
  table.config_hash = c.hash();

  std::vector<Row> rows;
  json jrows = json::array();
  std::size_t invalid = 0;
  for (const auto& r : table.rows) {
    if (!r.valid) {
      ++invalid;
      warn(ctx, "row r = " + format_number(r.r) + " invalid: " + r.error);
    }
    rows.push_back({format_number(r.r), format_number(r.E), format_number(r.W), format_number(r.W1),
                    format_number(r.W2), format_number(r.A), format_number(r.gap), r.valid ? "true" : "false"});
    jrows.push_back({{"r", r.r}, {"E", number(r.E)}, {"W", number(r.W)}, {"W1", number(r.W1)}, {"W2", number(r.W2)},
                     {"A", number(r.A)}, {"gap", number(r.gap)}, {"E_direct", number(r.E_direct)},
                     {"iterations", r.iterations}, {"valid", r.valid}, {"error", r.error}});
  }
  write_csv(ctx, "scan", "scan.csv", {"r", "E", "W", "W1", "W2", "A", "gap", "valid"}, rows);
  write_json(ctx, "scan", "scan.json",
             {{"e_inf", table.e_inf},
              {"coupling", to_string(table.coupling)},
              {"spacing", c.grid().spacing()},
              {"invalid_rows", invalid},
              {"checksum", table.checksum()},
              {"rows", jrows}});
  const auto r = table.separations();
  for (const char* q : {"E", "W", "W1", "W2", "A", "gap"}) write_plot(ctx, "scan", q, r, table.column(q));
  log(ctx) << "scan: " << table.rows.size() << " rows, " << invalid << " invalid, e_inf = " << format_number(table.e_inf)
           << "\n";
  return 0;
}

int cmd_c6(CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  require_1d(c, "c6");
  const std::size_t levels = std::max<std::size_t>(c.nmax, 80);
  const auto [a1, a2] = atoms_for(c, levels);
  const auto res = c6_resolvent(a1, a2, c.resolvent_tol);
  const std::size_t nmax = c.nmax ? c.nmax : converged_nmax(a1, a2);
  const auto sos = c6_sum_over_states(a1, a2, nmax);
  if (nmax <= 1) warn(ctx, "nmax = 1 leaves no excited states; the sum over states is zero");
  const double dev = std::abs(res.sigma - sos.sigma) / std::abs(res.sigma);
  log(ctx) << "sigma (resolvent) = " << format_number(res.sigma) << "\nsigma (sum over states, nmax = " << nmax
           << ") = " << format_number(sos.sigma) << "\nrelative deviation = " << format_number(dev) << "\n";
  write_csv(ctx, "c6", "c6.csv", {"method", "sigma", "diagnostic", "nmax", "iterations"},
            {{res.method, format_number(res.sigma), format_number(res.diagnostic), "0", std::to_string(res.iterations)},
             {sos.method, format_number(sos.sigma), format_number(sos.diagnostic), std::to_string(sos.nmax), "0"}});
  write_json(ctx, "c6", "c6.json",
             {{"sigma_resolvent", res.sigma},
              {"resolvent_residual", number(res.diagnostic)},
              {"resolvent_iterations", res.iterations},
              {"sigma_sum", sos.sigma},
              {"nmax", nmax},
              {"captured_weight", number(sos.diagnostic)},
              {"relative_deviation", number(dev)},
              {"second_moment_1", second_moment(*a1.space, a1.spectrum.vectors[0])},
              {"second_moment_2", second_moment(*a2.space, a2.spectrum.vectors[0])}});
  return 0;
}

int cmd_feshbach(CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  require_1d(c, "feshbach");
  const auto r_list = c.separations();
  const auto [a1, a2] = atoms_for(c, 2);
  const Grid g = c.grid();
  const FeshbachSettings st = c.feshbach_settings();
  std::vector<FeshbachReport> reports(r_list.size());
  std::vector<std::exception_ptr> errors(r_list.size());
  const auto n = static_cast<std::ptrdiff_t>(r_list.size());
#pragma omp parallel for schedule(dynamic) num_threads(kernels::thread_count())
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      const FeshbachProblem p(c.dimer(r_list[k]), g, a1, a2, st);
      reports[k] = p.solve();
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<Row> rows;
  json jrows = json::array();
  double worst_dev = 0.0, min_gap = std::numeric_limits<double>::infinity(), sup_a = 0.0;
  std::vector<double> rs, ar8;
  for (const auto& rep : reports) {
    const double dev = std::abs(rep.E - rep.E_direct) / std::abs(rep.E);
    const double a8 = rep.A * std::pow(rep.r, 8);
    if (std::isfinite(dev)) worst_dev = std::max(worst_dev, dev);
    min_gap = std::min(min_gap, rep.gap);
    sup_a = std::max(sup_a, std::abs(a8));
    rs.push_back(rep.r);
    ar8.push_back(a8);
    rows.push_back({format_number(rep.r), format_number(rep.r0), format_number(rep.E), format_number(rep.E_direct),
                    format_number(dev), format_number(rep.A), format_number(a8), format_number(rep.gap),
                    std::to_string(rep.iterations), format_number(rep.W1), format_number(rep.W2),
                    format_number(rep.psi_overlap), format_number(rep.mass_loss), format_number(rep.psi0_norm2)});
    jrows.push_back({{"r", rep.r}, {"r0", rep.r0}, {"E", rep.E}, {"E_direct", number(rep.E_direct)},
                     {"relative_deviation", number(dev)}, {"A", rep.A}, {"A_r8", a8}, {"gap", rep.gap},
                     {"iterations", rep.iterations}, {"W1", rep.W1}, {"W2", rep.W2},
                     {"trial_energy", rep.trial_energy}, {"psi_overlap", number(rep.psi_overlap)},
                     {"mass_loss", rep.mass_loss}, {"psi0_norm2", rep.psi0_norm2},
                     {"correction_norm", rep.correction_norm}});
  }
  write_csv(ctx, "feshbach", "feshbach.csv",
            {"r", "r0", "E", "E_direct", "rel_dev", "A", "A_r8", "gap", "iterations", "W1", "W2", "psi_overlap",
             "mass_loss", "psi0_norm2"},
            rows);
  write_json(ctx, "feshbach", "feshbach.json",
             {{"e_inf", a1.spectrum.values[0] + a2.spectrum.values[0]},
              {"max_relative_deviation", number(worst_dev)},
              {"min_gap", min_gap},
              {"sup_abs_A_r8", sup_a},
              {"rows", jrows}});
  write_plot(ctx, "feshbach", "A_r8", rs, ar8);
  log(ctx) << "feshbach: " << reports.size() << " rows, max |E - E_direct|/|E| = " << format_number(worst_dev)
           << ", min gap = " << format_number(min_gap) << ", sup |A| r^8 = " << format_number(sup_a) << "\n";
  return 0;
}

int cmd_derivs(CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  require_1d(c, "derivs");
  const auto r_list = c.separations();
  const Grid g = c.grid();
  const auto [a1, a2] = atoms_for(c, 2);
  FeshbachSettings st = c.feshbach_settings();
  st.direct = FeshbachSettings::Direct::none;
  const ScanTable table = scan(c.dimer(r_list.front()), g, r_list, st, a1, a2);
  for (const auto& row : table.rows)
    if (!row.valid) warn(ctx, "row r = " + format_number(row.r) + " invalid: " + row.error);
  const auto d = derivatives(table);
  const double sigma = c6_resolvent(a1, a2, c.resolvent_tol).sigma;

  std::vector<double> hf(d.size(), std::numeric_limits<double>::quiet_NaN());
  if (c.hellmann_feynman) {
    FeshbachSettings dst = c.feshbach_settings();
    dst.direct = FeshbachSettings::Direct::lanczos;
    const auto n = static_cast<std::ptrdiff_t>(d.size());
#pragma omp parallel for schedule(dynamic) num_threads(kernels::thread_count())
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (!d[k].available) continue;
      try {
        const DimerSystem sys(c.dimer(d[k].r), g, {dst.dim_cap, dst.cover_separation});
        const auto gs = direct_ground_state(sys, dst);
        hf[k] = hellmann_feynman(sys, gs.vectors.at(0));
      } catch (const std::exception&) {
      }
    }
  }

  const auto r = table.separations();
  const auto w = table.column("W");
  std::vector<double> d1(d.size()), d2(d.size());
  std::vector<Row> rows;
  double worst_hf = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < d.size(); ++i) {
    d1[i] = d[i].d1;
    d2[i] = d[i].d2;
    const double dev = hf[i] - d[i].d1;
    if (std::isfinite(dev)) {
      const double rel = std::abs(dev) / std::max(1e-300, std::abs(d[i].d1));
      worst_hf = std::isnan(worst_hf) ? rel : std::max(worst_hf, rel);
    }
    rows.push_back({format_number(r[i]), format_number(w[i]), format_number(d[i].d1), format_number(d[i].d1_error),
                    format_number(d[i].d2), format_number(d[i].d2_error), format_number(hf[i]), format_number(dev)});
  }
  write_csv(ctx, "derivs", "derivs.csv", {"r", "W", "dW", "dW_err", "d2W", "d2W_err", "HF", "HF_minus_FD"}, rows);

  // fit window drops the two outermost rows on each side
  const double lo = r.size() > 4 ? r[2] : r.front(), hi = r.size() > 4 ? r[r.size() - 3] : r.back();
  json fits = json::object();
  const struct {
    const char* name;
    const std::vector<double>* y;
    double scale;
  } targets[] = {{"W", &w, 1.0}, {"dW", &d1, 6.0}, {"d2W", &d2, 42.0}};
  for (const auto& t : targets) {
    try {
      const auto fit = fit_power_law(r, *t.y, lo, hi);
      fits[t.name] = {{"exponent", fit.exponent},
                      {"coefficient", fit.coefficient},
                      {"coefficient_over_sigma_multiple", fit.coefficient / (t.scale * sigma)},
                      {"rms_residual", fit.rms_residual},
                      {"points", fit.points},
                      {"r_lo", lo},
                      {"r_hi", hi}};
      log(ctx) << t.name << ": exponent " << format_number(fit.exponent) << ", coefficient / (" << t.scale
               << " sigma) = " << format_number(fit.coefficient / (t.scale * sigma)) << "\n";
    } catch (const std::exception& e) {
      warn(ctx, std::string("fit of ") + t.name + " failed: " + e.what());
      fits[t.name] = nullptr;
    }
  }
  write_json(ctx, "derivs", "derivs.json",
             {{"sigma", sigma}, {"fits", fits}, {"max_hf_relative_deviation", number(worst_hf)}});
  write_plot(ctx, "derivs", "dW", r, d1);
  write_plot(ctx, "derivs", "d2W", r, d2);
  write_plot(ctx, "derivs", "HF", r, hf);
  return 0;
}

int cmd_monotone(CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  require_1d(c, "monotone");
  const auto r_list = c.separations();
  const double s = c.witness_s > 0.0 ? c.witness_s : c.r_lo;
  const auto [a1, a2] = atoms_for(c, 2);
  const auto w = monotonicity_witness(c.dimer(s), c.grid(), a1, a2, s, r_list, c.feshbach_settings());
  std::vector<Row> rows;
  json jrows = json::array();
  bool increasing = true, above = true;
  double min_increment = std::numeric_limits<double>::infinity();
  std::vector<double> rs, ds;
  for (std::size_t i = 0; i < w.rows.size(); ++i) {
    const auto& row = w.rows[i];
    if (i > 0) {
      const double inc = row.D - w.rows[i - 1].D;
      min_increment = std::min(min_increment, inc);
      increasing = increasing && inc > 0.0;
    }
    above = above && row.D >= row.E - c.fixed_point_tol * std::abs(row.E);
    rs.push_back(row.r);
    ds.push_back(row.D);
    rows.push_back({format_number(row.r), format_number(row.D), format_number(row.E), format_number(row.D - row.E)});
    jrows.push_back({{"r", row.r}, {"D", row.D}, {"E", row.E}});
  }
  double ds_minus_es = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : w.rows)
    if (std::abs(row.r - s) < 1e-12) ds_minus_es = row.D - w.E_s;
  write_csv(ctx, "monotone", "monotone.csv", {"r", "D", "E", "D_minus_E"}, rows);
  write_json(ctx, "monotone", "monotone.json",
             {{"s", s},
              {"E_s", w.E_s},
              {"D_s_minus_E_s", number(ds_minus_es)},
              {"D_increasing", increasing},
              {"min_increment", number(min_increment)},
              {"D_at_least_E", above},
              {"rows", jrows}});
  write_plot(ctx, "monotone", "D", rs, ds);
  log(ctx) << "witness at s = " << format_number(s) << ": D increasing " << (increasing ? "yes" : "no")
           << ", D >= E " << (above ? "yes" : "no") << ", D(s) - E(s) = " << format_number(ds_minus_es) << "\n";
  return 0;
}

int cmd_newton(CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  const bool point = c.newton_profile == "point";
  const auto d1 = point ? point_charge() : hydrogenic_density(c.Z1, c.newton_radius1);
  const auto d2 = point ? point_charge() : hydrogenic_density(c.Z2, c.newton_radius2);
  const auto res = newton_check(d1, d2, c.newton_separation, c.newton_tol);
  log(ctx) << "newton: residual = " << format_number(res.residual) << "\n";
  write_csv(ctx, "newton", "newton.csv", {"r", "residual", "electron_nucleus1", "electron_nucleus2", "electron_electron"},
            {{format_number(c.newton_separation), format_number(res.residual), format_number(res.electron_nucleus1),
              format_number(res.electron_nucleus2), format_number(res.electron_electron)}});
  write_json(ctx, "newton", "newton.json",
             {{"r", c.newton_separation},
              {"residual", res.residual},
              {"electron_nucleus1", res.electron_nucleus1},
              {"electron_nucleus2", res.electron_nucleus2},
              {"electron_electron", res.electron_electron}});
  return 0;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"atom", "ions", "scan", "c6", "feshbach", "derivs", "monotone", "newton"};
  return names;
}

int run_command(const std::string& name, CommandContext& ctx, std::ostream& err) {
  static const std::map<std::string, int (*)(CommandContext&)> table{
      {"atom", cmd_atom},         {"ions", cmd_ions},     {"scan", cmd_scan},         {"c6", cmd_c6},
      {"feshbach", cmd_feshbach}, {"derivs", cmd_derivs}, {"monotone", cmd_monotone}, {"newton", cmd_newton}};
  try {
    const auto it = table.find(name);
    if (it == table.end()) throw ConfigError("unknown command '" + name + "'");
    const int code = it->second(ctx);
    if (ctx.warnings) err << ctx.warnings << " warning(s)\n";
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return 2;
  } catch (const ValidityError& e) {
    err << "validity error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace dimerlab
