#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace shelab::cli {

namespace {

using K = KeyType;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_real(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc() && r.ptr == end;
}

bool parse_int(const std::string& s, long long& out) {
  const char* end = s.data() + s.size();
  auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc() && r.ptr == end;
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") {
    out = true;
    return true;
  }
  if (s == "false" || s == "no" || s == "off" || s == "0") {
    out = false;
    return true;
  }
  return false;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

const KeySpec* find_spec(const std::string& section, const std::string& key) {
  for (const auto& s : schema()) {
    if (s.section == section && s.key == key) return &s;
  }
  return nullptr;
}

bool known_section(const std::string& section) {
  return std::any_of(schema().begin(), schema().end(),
                     [&](const KeySpec& s) { return s.section == section; });
}

// Empty string when valid, otherwise the reason.
std::string check_value(const KeySpec& spec, const std::string& v) {
  switch (spec.type) {
    case K::Real: {
      double d;
      if (!parse_real(v, d)) return "expected a number";
      return "";
    }
    case K::Int: {
      long long i;
      if (!parse_int(v, i)) return "expected an integer";
      return "";
    }
    case K::Bool: {
      bool b;
      if (!parse_bool(v, b)) return "expected true or false";
      return "";
    }
    case K::Choice: {
      if (std::find(spec.choices.begin(), spec.choices.end(), v) != spec.choices.end()) return "";
      std::string all;
      for (const auto& c : spec.choices) all += (all.empty() ? "" : ", ") + c;
      return "expected one of: " + all;
    }
    case K::RealList: {
      if (v.empty()) return "";
      for (const auto& item : split(v, ',')) {
        double d;
        if (!parse_real(item, d)) return "expected a comma-separated list of numbers";
      }
      return "";
    }
    case K::Text:
    case K::Path:
      return "";
  }
  return "";
}

}  // namespace

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> s = {
      {"exponent", "family", K::Choice, "stable", "stable or tabulated", {"stable", "tabulated"}},
      {"exponent", "a", K::Real, "2", "stability index, 1 < a <= 2", {}},
      {"exponent", "theta", K::Real, "0", "skewness parameter", {}},
      {"exponent", "scale", K::Real, "0.5", "C in Phi = C|xi|^a; 0.5 with a = 2 is the 1/2 Laplacian", {}},
      {"exponent", "dim", K::Int, "1", "spatial dimension", {}},
      {"exponent", "table", K::Path, "", "CSV xi,re,im for the tabulated family", {}},

      {"covariance", "kind", K::Choice, "white", "spatial noise correlation",
       {"white", "riesz", "gaussian_bump"}},
      {"covariance", "alpha", K::Real, "0.5", "Riesz exponent, 0 < alpha < dim", {}},
      {"covariance", "width", K::Real, "1", "Gaussian bump width (length)", {}},

      {"measure", "kind", K::Choice, "lebesgue", "initial measure",
       {"lebesgue", "dirac", "atoms", "density"}},
      {"measure", "location", K::Real, "0", "Dirac location (length)", {}},
      {"measure", "atoms", K::Text, "", "location:weight pairs, comma-separated", {}},
      {"measure", "density_file", K::Path, "", "one density value per line", {}},
      {"measure", "density_extent", K::Real, "8", "half-extent of the density lattice (length)", {}},

      {"coefficients", "b", K::Choice, "zero", "drift", {"zero", "affine", "tabulated"}},
      {"coefficients", "b_c0", K::Real, "0", "affine drift b(u) = c0 + c1 u", {}},
      {"coefficients", "b_c1", K::Real, "0", "affine drift slope", {}},
      {"coefficients", "b_table", K::Path, "", "CSV u,value for a tabulated drift", {}},
      {"coefficients", "b_lipschitz", K::Real, "0", "declared Lipschitz constant of a tabulated drift", {}},
      {"coefficients", "sigma", K::Choice, "zero", "diffusion", {"zero", "affine", "tabulated"}},
      {"coefficients", "sigma_c0", K::Real, "0", "affine diffusion sigma(u) = c0 + c1 u", {}},
      {"coefficients", "sigma_c1", K::Real, "0", "affine diffusion slope", {}},
      {"coefficients", "sigma_table", K::Path, "", "CSV u,value for a tabulated diffusion", {}},
      {"coefficients", "sigma_lipschitz", K::Real, "0", "declared Lipschitz constant of a tabulated diffusion", {}},

      {"bounds", "p", K::Int, "2", "moment order (integer >= 2)", {}},
      {"bounds", "beta_grid", K::RealList, "0.5,1,2,4,8", "beta values (1/time) for tables", {}},
      {"bounds", "tol", K::Real, "1e-6", "relative width of the critical beta bracket", {}},
      {"bounds", "beta_cap", K::Real, "10000", "largest beta searched (1/time)", {}},
      {"bounds", "t_min", K::Real, "0.001", "smallest t of the Upsilon search (time)", {}},
      {"bounds", "t_max", K::Real, "1000", "largest t of the Upsilon search (time)", {}},
      {"bounds", "grid_points", K::Int, "40", "log-spaced t points of the Upsilon search", {}},
      {"bounds", "refine", K::Bool, "true", "golden-section refinement of the t maximum", {}},
      {"bounds", "rel_tol", K::Real, "1e-10", "quadrature relative tolerance", {}},

      {"simulation", "extent", K::Real, "8", "half-extent X of the periodic domain (length)", {}},
      {"simulation", "n", K::Int, "128", "lattice points", {}},
      {"simulation", "T", K::Real, "1", "horizon (time)", {}},
      {"simulation", "dt", K::Real, "0.001", "time step (time)", {}},
      {"simulation", "M", K::Int, "1000", "Monte Carlo paths", {}},
      {"simulation", "seed", K::Int, "1", "base seed", {}},
      {"simulation", "record_stride", K::Int, "0", "steps between recorded times, 0 = automatic", {}},
      {"simulation", "threads", K::Int, "0", "worker threads, 0 = available processors", {}},
      {"simulation", "verify_tol", K::Real, "0.01", "slack added to beta* + ci in the verdict", {}},

      {"kernel", "t", K::Real, "1", "time of the transition density", {}},
      {"kernel", "extent", K::Real, "0", "half-extent (length), 0 = automatic", {}},
      {"kernel", "n", K::Int, "0", "lattice points, 0 = automatic", {}},

      {"bridge", "matrix", K::Bool, "false", "run the 60-case standard matrix instead of one case", {}},
      {"bridge", "z1", K::Real, "0", "first start point (length)", {}},
      {"bridge", "z2", K::Real, "0", "second start point (length)", {}},
      {"bridge", "x", K::Real, "0", "end point (length)", {}},
      {"bridge", "t", K::Real, "1", "bridge duration (time)", {}},
      {"bridge", "s", K::Real, "0.5", "intermediate time (time)", {}},

      {"parseval", "tol", K::Real, "0.0001", "largest accepted relative error", {}},

      {"output", "dir", K::Text, "out", "artifact directory, relative to the working directory", {}},
  };
  return s;
}

Config Config::parse(const std::string& text, const std::string& origin,
                     const std::vector<std::string>& overrides) {
  Config c;
  for (const auto& s : schema()) c.values_[s.section + "." + s.key] = s.default_value;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hashpos = line.find_first_of("#;");
    line = trim(hashpos == std::string::npos ? line : line.substr(0, hashpos));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!known_section(section)) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    if (section.empty()) fail("key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const KeySpec* spec = find_spec(section, key);
    if (!spec) fail("unknown key '" + key + "' in [" + section + "]");
    if (auto why = check_value(*spec, value); !why.empty()) {
      fail(section + "." + key + " = '" + value + "': " + why);
    }
    c.values_[section + "." + key] = value;
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ConfigError("override '" + o + "': expected section.key=value");
    }
    const std::string sec = trim(o.substr(0, dot));
    const std::string key = trim(o.substr(dot + 1, eq - dot - 1));
    const std::string value = trim(o.substr(eq + 1));
    const KeySpec* spec = find_spec(sec, key);
    if (!spec) throw ConfigError("override '" + o + "': unknown key '" + key + "' in [" + sec + "]");
    if (auto why = check_value(*spec, value); !why.empty()) {
      throw ConfigError("override '" + o + "': " + why);
    }
    c.values_[sec + "." + key] = value;
  }
  return c;
}

Config Config::load(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path + ": cannot open configuration file");
  std::ostringstream ss;
  ss << f.rdbuf();
  Config c = parse(ss.str(), path, overrides);
  c.base_dir_ = std::filesystem::path(path).parent_path().string();
  return c;
}

double Config::real(const std::string& section, const std::string& key) const {
  double d = 0.0;
  parse_real(text(section, key), d);
  return d;
}

long long Config::integer(const std::string& section, const std::string& key) const {
  long long i = 0;
  parse_int(text(section, key), i);
  return i;
}

std::uint64_t Config::u64(const std::string& section, const std::string& key) const {
  const long long v = integer(section, key);
  if (v < 0) throw ConfigError(section + "." + key + " must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

bool Config::boolean(const std::string& section, const std::string& key) const {
  bool b = false;
  parse_bool(text(section, key), b);
  return b;
}

const std::string& Config::text(const std::string& section, const std::string& key) const {
  const auto it = values_.find(section + "." + key);
  if (it == values_.end()) throw ConfigError("internal: no key " + section + "." + key);
  return it->second;
}

std::vector<double> Config::reals(const std::string& section, const std::string& key) const {
  std::vector<double> out;
  const auto& v = text(section, key);
  if (v.empty()) return out;
  for (const auto& item : split(v, ',')) {
    double d = 0.0;
    parse_real(item, d);
    out.push_back(d);
  }
  return out;
}

std::string Config::path(const std::string& section, const std::string& key) const {
  const auto& v = text(section, key);
  if (v.empty()) return v;
  std::filesystem::path p(v);
  if (p.is_absolute() || base_dir_.empty()) return p.string();
  return (std::filesystem::path(base_dir_) / p).string();
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  const KeySpec* spec = find_spec(section, key);
  if (!spec) throw ConfigError("unknown key " + section + "." + key);
  if (auto why = check_value(*spec, value); !why.empty()) throw ConfigError(why);
  values_[section + "." + key] = value;
}

std::string Config::resolved(bool full) const {
  std::string out, current;
  for (const auto& s : schema()) {
    // The hashed form keeps only what determines results.
    if (!full && (s.section == "output" || (s.section == "simulation" && s.key == "threads"))) {
      continue;
    }
    if (s.section != current) {
      out += (current.empty() ? "[" : "\n[") + s.section + "]\n";
      current = s.section;
    }
    std::string v = text(s.section, s.key);
    // Absolute, so the resolved file re-runs from any directory.
    if (s.type == K::Path && !v.empty()) {
      v = std::filesystem::absolute(path(s.section, s.key)).lexically_normal().string();
    }
    out += s.key + " = " + v + "\n";
  }
  return out;
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string Config::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(resolved(false))));
  return buf;
}

}  // namespace shelab::cli
