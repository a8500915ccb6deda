#include "foldsim/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace foldsim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') throw InvalidInput("config: " + key + " expects a number, got '" + v + "'");
  return x;
}

long parse_int(const std::string& key, const std::string& v) {
  long x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    throw InvalidInput("config: " + key + " expects an integer, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw InvalidInput("config: " + key + " expects true or false, got '" + v + "'");
}

std::vector<int> parse_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<int>(parse_int(key, item)));
  }
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

int RunConfig::fold_geometry_order() const {
  if (geometry_order > 0) return geometry_order;
  return setting == CreaseSetting::S1 ? k : 1;
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "subcommand") subcommand = v;
  else if (key == "setting") setting = crease_setting_from_string(v);
  else if (key == "h") h = parse_double(key, v);
  else if (key == "k") k = static_cast<int>(parse_int(key, v));
  else if (key == "geometry_order") geometry_order = static_cast<int>(parse_int(key, v));
  else if (key == "crease_vertices") crease_vertices = static_cast<int>(parse_int(key, v));
  else if (key == "E") E = parse_double(key, v);
  else if (key == "alpha") alpha = parse_double(key, v);
  else if (key == "load") load = parse_double(key, v);
  else if (key == "compression") compression = parse_double(key, v);
  else if (key == "damping") damping = damping_from_string(v);
  else if (key == "eta") eta = parse_double(key, v);
  else if (key == "tol") tol = parse_double(key, v);
  else if (key == "max_iterations") max_iterations = static_cast<int>(parse_int(key, v));
  else if (key == "load_steps") load_steps = static_cast<int>(parse_int(key, v));
  else if (key == "beta_steps") beta_steps = static_cast<int>(parse_int(key, v));
  else if (key == "refinement_rounds") refinement_rounds = static_cast<int>(parse_int(key, v));
  else if (key == "refinement_factor") refinement_factor = parse_double(key, v);
  else if (key == "snapshots") snapshots = parse_ints(key, v);
  else if (key == "darboux_samples") darboux_samples = static_cast<int>(parse_int(key, v));
  else if (key == "linear_solver") linear_solver = v;
  else if (key == "support") support = support_mode_from_string(v);
  else if (key == "sides") sides = parse_ints(key, v);
  else if (key == "plate_order") plate_order = static_cast<int>(parse_int(key, v));
  else if (key == "plate_refinements") plate_refinements = static_cast<int>(parse_int(key, v));
  else if (key == "samples") samples = static_cast<int>(parse_int(key, v));
  else if (key == "seed") seed = static_cast<unsigned>(parse_int(key, v));
  else if (key == "tier") tier = v;
  else if (key == "output") output = v;
  else if (key == "deterministic") deterministic = parse_bool(key, v);
  else if (key == "threads") threads = static_cast<int>(parse_int(key, v));
  else throw InvalidInput("config: unknown key '" + key + "'");
}

void RunConfig::validate() const {
  const auto fail = [](const std::string& msg) { throw InvalidInput("config: " + msg); };
  if (subcommand != "fold" && subcommand != "linear" && subcommand != "geom" && subcommand != "verify")
    fail("subcommand must be fold, linear, geom or verify");
  if (!(h > 0.0 && h <= 1.0)) fail("h must be in (0, 1]");
  if (k < 1 || k > 3) fail("k must be 1, 2 or 3");
  if (geometry_order < 0 || geometry_order > 3) fail("geometry_order must be 0 (auto) or 1..3");
  if (fold_geometry_order() > k) fail("geometry_order must not exceed k");
  if (crease_vertices < 3 || crease_vertices > 64) fail("crease_vertices must be in [3, 64]");
  if (!(E > 0.0)) fail("E must be positive");
  if (!(alpha > 0.0)) fail("alpha must be positive");
  if (!(compression >= 0.0 && compression < 1.0)) fail("compression must be in [0, 1)");
  if (!(eta > 0.0 && eta <= 1.0)) fail("eta must be in (0, 1]");
  if (!(tol > 0.0)) fail("tol must be positive");
  if (max_iterations < 1) fail("max_iterations must be >= 1");
  if (load_steps < 1) fail("load_steps must be >= 1");
  if (beta_steps < 1) fail("beta_steps must be >= 1");
  if (refinement_rounds < 0 || refinement_rounds > 6) fail("refinement_rounds must be in [0, 6]");
  if (!(refinement_factor > 0.0 && refinement_factor < 1.0)) fail("refinement_factor must be in (0, 1)");
  for (int s : snapshots) {
    if (s < 1 || s > load_steps) fail("snapshots must be load steps in [1, load_steps]");
  }
  if (darboux_samples < 5) fail("darboux_samples must be >= 5");
  if (sides.empty()) fail("sides must not be empty");
  for (int m : sides) {
    if (m < 8) fail("sides must be >= 8");
  }
  if (plate_order < 1 || plate_order > 3) fail("plate_order must be 1, 2 or 3");
  if (plate_refinements < 0 || plate_refinements > 4) fail("plate_refinements must be in [0, 4]");
  if (samples < 5) fail("samples must be >= 5");
  if (tier != "fast" && tier != "full") fail("tier must be fast or full");
  if (threads < 1) fail("threads must be >= 1");
}

std::string RunConfig::snapshot() const {
  std::ostringstream o;
  o << "subcommand = " << subcommand << "\n"
    << "setting = " << to_string(setting) << "\n"
    << "h = " << num(h) << "\n"
    << "k = " << k << "\n"
    << "geometry_order = " << geometry_order << "\n"
    << "crease_vertices = " << crease_vertices << "\n"
    << "E = " << num(E) << "\n"
    << "alpha = " << num(alpha) << "\n"
    << "load = " << num(load) << "\n"
    << "compression = " << num(compression) << "\n"
    << "damping = " << to_string(damping) << "\n"
    << "eta = " << num(eta) << "\n"
    << "tol = " << num(tol) << "\n"
    << "max_iterations = " << max_iterations << "\n"
    << "load_steps = " << load_steps << "\n"
    << "beta_steps = " << beta_steps << "\n"
    << "refinement_rounds = " << refinement_rounds << "\n"
    << "refinement_factor = " << num(refinement_factor) << "\n"
    << "snapshots = " << join(snapshots) << "\n"
    << "darboux_samples = " << darboux_samples << "\n"
    << "linear_solver = " << linear_solver << "\n"
    << "support = " << to_string(support) << "\n"
    << "sides = " << join(sides) << "\n"
    << "plate_order = " << plate_order << "\n"
    << "plate_refinements = " << plate_refinements << "\n"
    << "samples = " << samples << "\n"
    << "seed = " << seed << "\n"
    << "tier = " << tier << "\n"
    << "deterministic = " << (deterministic ? "true" : "false") << "\n"
    << "threads = " << threads << "\n";
  return o.str();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t RunConfig::hash() const { return fnv1a(snapshot()); }

std::string RunConfig::stem() const {
  char buf[128];
  const unsigned long long hv = hash() & 0xffffffffull;
  if (subcommand == "fold")
    std::snprintf(buf, sizeof buf, "fold_%s_h%g_k%d_%08llx", to_string(setting).c_str(), h, k, hv);
  else
    std::snprintf(buf, sizeof buf, "%s_%08llx", subcommand.c_str(), hv);
  return buf;
}

void read_config(std::istream& in, RunConfig& cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
    cfg.set(trim(t.substr(0, eq)), t.substr(eq + 1));
  }
}

void read_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file '" + path + "'");
  read_config(in, cfg);
}

std::string output_root(const RunConfig& cfg) {
  if (!cfg.output.empty()) return cfg.output;
  if (const char* env = std::getenv("FOLDSIM_OUTPUT"); env && *env) return env;
  return "foldsim_out";
}

}  // namespace foldsim
