// shelab command-line front end: one subcommand per object, artifacts in the
// configured output directory, every artifact stamped with config hash and seed.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "shelab/shelab.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using shelab::cli::Config;
using shelab::cli::ConfigError;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitFailed = 2;

struct ApiError : std::runtime_error {
  int status;
  ApiError(int s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(int rc) {
  if (rc != SHELAB_OK) throw ApiError(rc, shelab_last_error());
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Exponent = std::unique_ptr<shelab_exponent, Deleter<shelab_exponent, shelab_exponent_free>>;
using Covariance =
    std::unique_ptr<shelab_covariance, Deleter<shelab_covariance, shelab_covariance_free>>;
using Measure = std::unique_ptr<shelab_measure, Deleter<shelab_measure, shelab_measure_free>>;
using SimConfig = std::unique_ptr<shelab_config, Deleter<shelab_config, shelab_config_free>>;
using Rng = std::unique_ptr<shelab_rng, Deleter<shelab_rng, shelab_rng_free>>;
using Trajectory =
    std::unique_ptr<shelab_trajectory, Deleter<shelab_trajectory, shelab_trajectory_free>>;
using Curve = std::unique_ptr<shelab_curve, Deleter<shelab_curve, shelab_curve_free>>;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* quad_status(int s) {
  switch (s) {
    case SHELAB_FINITE: return "finite";
    case SHELAB_DIVERGES: return "diverges";
    default: return "undecided";
  }
}

// Numeric rows of a comma-separated file; blank lines, '#' comments and a
// non-numeric header line are skipped.
std::vector<std::vector<double>> read_table(const std::string& path, size_t columns) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path + ": cannot open table");
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric && rows.empty()) continue;
    if (!numeric || row.size() != columns) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(columns) + " numeric column(s)");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError(path + ": table has no rows");
  return rows;
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, size_t j) {
  std::vector<double> c;
  c.reserve(rows.size());
  for (const auto& r : rows) c.push_back(r[j]);
  return c;
}

class Run {
 public:
  Run(std::string command, Config cfg, std::vector<std::string> overrides)
      : command_(std::move(command)), cfg_(std::move(cfg)), overrides_(std::move(overrides)) {
    const char* env = std::getenv("SHELAB_OUTPUT_DIR");
    dir_ = (env && *env) ? fs::path(env) : fs::path(cfg_.text("output", "dir"));
    hash_ = cfg_.hash();
    seed_ = cfg_.u64("simulation", "seed");
  }

  int execute() {
    const auto start = std::chrono::steady_clock::now();
    fs::create_directories(dir_);
    write_text("resolved.cfg", "# config_hash=" + hash_ + "\n" + cfg_.resolved());
    int code = kExitOk;
    if (command_ == "kernel") code = kernel();
    else if (command_ == "bridge-check") code = bridge_check();
    else if (command_ == "parseval-check") code = parseval_check();
    else if (command_ == "dalang") code = dalang();
    else if (command_ == "bound") code = bound();
    else if (command_ == "solve") code = solve();
    else if (command_ == "moments") code = moments();
    else if (command_ == "verify") code = verify();
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(wall, code);
    return code;
  }

 private:
  // ---- object construction

  int dim() const { return static_cast<int>(cfg_.integer("exponent", "dim")); }

  Exponent exponent() const {
    shelab_exponent* e = nullptr;
    if (cfg_.text("exponent", "family") == "stable") {
      check(shelab_exponent_stable(cfg_.real("exponent", "a"), cfg_.real("exponent", "theta"),
                                   cfg_.real("exponent", "scale"), dim(), &e));
    } else {
      const auto file = cfg_.path("exponent", "table");
      if (file.empty()) throw ConfigError("exponent.table is required for the tabulated family");
      const auto rows = read_table(file, 3);
      const auto xi = column(rows, 0), re = column(rows, 1), im = column(rows, 2);
      check(shelab_exponent_tabulated(xi.data(), re.data(), im.data(), rows.size(), &e));
    }
    return Exponent(e);
  }

  Covariance covariance() const {
    const auto& kind = cfg_.text("covariance", "kind");
    const int k = kind == "white" ? SHELAB_COV_WHITE
                  : kind == "riesz" ? SHELAB_COV_RIESZ
                                    : SHELAB_COV_GAUSSIAN_BUMP;
    shelab_covariance* c = nullptr;
    check(shelab_covariance_create(k, cfg_.real("covariance", "alpha"),
                                   cfg_.real("covariance", "width"), dim(), &c));
    return Covariance(c);
  }

  Measure measure() const {
    const auto& kind = cfg_.text("measure", "kind");
    shelab_measure* m = nullptr;
    if (kind == "lebesgue") {
      check(shelab_measure_lebesgue(&m));
    } else if (kind == "dirac") {
      check(shelab_measure_dirac(cfg_.real("measure", "location"), &m));
    } else if (kind == "atoms") {
      std::vector<double> x, w;
      std::stringstream ss(cfg_.text("measure", "atoms"));
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
          throw ConfigError("measure.atoms: expected location:weight pairs, got '" + item + "'");
        }
        try {
          x.push_back(std::stod(item.substr(0, colon)));
          w.push_back(std::stod(item.substr(colon + 1)));
        } catch (const std::exception&) {
          throw ConfigError("measure.atoms: malformed pair '" + item + "'");
        }
      }
      check(shelab_measure_atoms(x.data(), w.data(), x.size(), &m));
    } else {
      const auto file = cfg_.path("measure", "density_file");
      if (file.empty()) throw ConfigError("measure.density_file is required for kind = density");
      const auto v = column(read_table(file, 1), 0);
      check(shelab_measure_density(cfg_.real("measure", "density_extent"), v.size(), v.data(), &m));
    }
    return Measure(m);
  }

  void set_coefficient(shelab_config* c, const std::string& name) const {
    const auto& kind = cfg_.text("coefficients", name);
    const double c0 = cfg_.real("coefficients", name + "_c0");
    const double c1 = cfg_.real("coefficients", name + "_c1");
    auto apply = [&](int k, const double* u, const double* v, size_t n, double L) {
      return name == "b" ? shelab_config_set_drift(c, k, c0, c1, u, v, n, L)
                         : shelab_config_set_sigma(c, k, c0, c1, u, v, n, L);
    };
    if (kind == "zero") {
      check(apply(SHELAB_COEF_ZERO, nullptr, nullptr, 0, 0.0));
    } else if (kind == "affine") {
      check(apply(SHELAB_COEF_AFFINE, nullptr, nullptr, 0, 0.0));
    } else {
      const auto file = cfg_.path("coefficients", name + "_table");
      if (file.empty()) throw ConfigError("coefficients." + name + "_table is required");
      const auto rows = read_table(file, 2);
      const auto u = column(rows, 0), v = column(rows, 1);
      check(apply(SHELAB_COEF_TABULATED, u.data(), v.data(), rows.size(),
                  cfg_.real("coefficients", name + "_lipschitz")));
    }
  }

  SimConfig sim_config() const {
    const auto e = exponent();
    const auto c = covariance();
    const auto m = measure();
    shelab_config* s = nullptr;
    check(shelab_config_create(e.get(), c.get(), m.get(), &s));
    SimConfig out(s);
    set_coefficient(s, "b");
    set_coefficient(s, "sigma");
    check(shelab_config_set_grid(s, cfg_.real("simulation", "extent"),
                                 cfg_.u64("simulation", "n")));
    check(shelab_config_set_time(s, cfg_.real("simulation", "T"), cfg_.real("simulation", "dt")));
    check(shelab_config_set_seed(s, seed_));
    check(shelab_config_set_threads(s, static_cast<unsigned>(cfg_.u64("simulation", "threads"))));
    check(shelab_config_set_record_stride(s, cfg_.u64("simulation", "record_stride")));
    check(shelab_config_validate(s));
    return out;
  }

  shelab_upsilon_options upsilon_options() const {
    shelab_upsilon_options o;
    shelab_upsilon_options_default(&o);
    o.t_min = cfg_.real("bounds", "t_min");
    o.t_max = cfg_.real("bounds", "t_max");
    o.grid_points = static_cast<int>(cfg_.integer("bounds", "grid_points"));
    o.refine = cfg_.boolean("bounds", "refine") ? 1 : 0;
    o.rel_tol = cfg_.real("bounds", "rel_tol");
    return o;
  }

  int moment_order() const {
    const long long p = cfg_.integer("bounds", "p");
    if (p < 2) throw ConfigError("bounds.p must be an integer >= 2");
    return static_cast<int>(p);
  }

  // ---- artifacts

  std::string stamp() const { return "# config_hash=" + hash_ + " seed=" + std::to_string(seed_) + "\n"; }

  void write_text(const std::string& name, const std::string& content) {
    const auto p = dir_ / name;
    std::ofstream f(p, std::ios::binary);
    f << content;
    if (!f) throw ApiError(SHELAB_IO, "cannot write " + p.string());
    artifacts_.push_back(name);
  }

  void write_json(const std::string& name, json j) {
    j["config_hash"] = hash_;
    j["seed"] = seed_;
    write_text(name, j.dump(2) + "\n");
  }

  // Prefixes a library-written CSV with the stamp line.
  void adopt_csv(const std::string& name) {
    const auto p = dir_ / name;
    std::ifstream in(p, std::ios::binary);
    std::stringstream body;
    body << in.rdbuf();
    in.close();
    write_text(name, stamp() + body.str());
  }

  std::string path_of(const std::string& name) const { return (dir_ / name).string(); }

  void write_manifest(double wall, int code) {
    json m;
    m["command"] = command_;
    m["config_hash"] = hash_;
    m["seed"] = seed_;
    m["exit_code"] = code;
    m["versions"] = {{"shelab", shelab_version()}, {"cli", shelab_version()}};
    m["overrides"] = overrides_;
    m["artifacts"] = artifacts_;
    m["wall_time_s"] = wall;
    const std::time_t now = std::time(nullptr);
    char ts[32];
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m["timestamp"] = ts;
    std::ofstream f(dir_ / "manifest.json", std::ios::binary);
    f << m.dump(2) << "\n";
  }

  // ---- subcommands

  int kernel() {
    const auto e = exponent();
    const double t = cfg_.real("kernel", "t");
    double X = cfg_.real("kernel", "extent");
    size_t n = cfg_.u64("kernel", "n");
    if (X <= 0.0 || n == 0) {
      double X0 = 0.0;
      size_t n0 = 0;
      check(shelab_default_grid(e.get(), t, 1e-8, &X0, &n0));
      if (X <= 0.0) X = X0;
      if (n == 0) n = n0;
    }
    std::vector<double> values(n);
    double mass = 0.0;
    check(shelab_transition_density(e.get(), t, X, n, values.data(), &mass));
    check(shelab_write_kernel_csv(e.get(), t, X, n, path_of("kernel.csv").c_str()));
    adopt_csv("kernel.csv");
    write_json("kernel.json", {{"t", t}, {"extent", X}, {"n", n}, {"mass", mass}});
    std::cout << "kernel: t=" << fmt(t) << " extent=" << fmt(X) << " n=" << n
              << " mass=" << fmt(mass) << "\n";
    return kExitOk;
  }

  int bridge_check() {
    if (cfg_.boolean("bridge", "matrix")) {
      size_t held = 0, total = 0;
      check(shelab_bridge_matrix(path_of("bridge_matrix.csv").c_str(), &held, &total));
      adopt_csv("bridge_matrix.csv");
      write_json("bridge.json", {{"matrix", true}, {"held", held}, {"total", total}});
      std::cout << "bridge-check: " << held << "/" << total << " cases hold\n";
      return held == total ? kExitOk : kExitFailed;
    }
    const auto e = exponent();
    const auto c = covariance();
    const double z1 = cfg_.real("bridge", "z1"), z2 = cfg_.real("bridge", "z2");
    const double x = cfg_.real("bridge", "x"), t = cfg_.real("bridge", "t");
    const double s = cfg_.real("bridge", "s");
    shelab_bridge_bound b;
    check(shelab_verify_bridge_bound(e.get(), c.get(), z1, z2, x, t, s, &b));
    double cf = 0.0;
    check(shelab_bridge_cf_error(e.get(), z1, x, t, s, &cf));
    write_json("bridge.json", {{"matrix", false},
                               {"z1", z1}, {"z2", z2}, {"x", x}, {"t", t}, {"s", s},
                               {"lhs", b.lhs}, {"rhs", b.rhs}, {"ratio", b.ratio},
                               {"holds", b.holds != 0}, {"h", b.h}, {"cf_error", cf}});
    std::cout << "bridge-check: lhs=" << fmt(b.lhs) << " rhs=" << fmt(b.rhs)
              << (b.holds ? " HOLDS" : " FAILED") << "\n";
    return b.holds ? kExitOk : kExitFailed;
  }

  int parseval_check() {
    const auto c = covariance();
    const auto m = measure();
    shelab_parseval r;
    check(shelab_parseval_check(c.get(), m.get(), &r));
    const double tol = cfg_.real("parseval", "tol");
    const bool ok = r.both_divergent || r.rel_err < tol;
    write_json("parseval.json", {{"lhs", r.lhs}, {"rhs", r.rhs}, {"rel_err", r.rel_err},
                                 {"both_divergent", r.both_divergent != 0}, {"tol", tol},
                                 {"holds", ok}});
    std::cout << "parseval-check: lhs=" << fmt(r.lhs) << " rhs=" << fmt(r.rhs)
              << " rel_err=" << fmt(r.rel_err) << (ok ? " HOLDS" : " FAILED") << "\n";
    return ok ? kExitOk : kExitFailed;
  }

  int dalang() {
    const auto e = exponent();
    const auto c = covariance();
    const auto opt = upsilon_options();
    std::string csv = stamp() + "beta,upsilon,upsilon_status,t_star,sup_not_localized,"
                                "upsilon_tilde,upsilon_tilde_status\n";
    for (double beta : cfg_.reals("bounds", "beta_grid")) {
      shelab_upsilon_result u;
      check(shelab_upsilon(e.get(), c.get(), beta, &opt, &u));
      double tilde = 0.0;
      int ts = 0;
      check(shelab_upsilon_tilde(e.get(), c.get(), beta, &tilde, &ts));
      csv += fmt(beta) + "," + fmt(u.value) + "," + quad_status(u.status) + "," + fmt(u.t_star) +
             "," + std::to_string(u.sup_not_localized) + "," + fmt(tilde) + "," +
             quad_status(ts) + "\n";
    }
    write_text("dalang.csv", csv);
    std::cout << csv.substr(csv.find('\n') + 1);
    return kExitOk;
  }

  int bound() {
    const auto e = exponent();
    const auto c = covariance();
    const auto sim = sim_config();
    const int p = moment_order();
    shelab_bound_params params;
    check(shelab_config_bound_params(sim.get(), p, &params));
    const auto opt = upsilon_options();
    double tau = 0.0;
    check(shelab_tau(&params, &tau));
    shelab_critical_beta cb;
    check(shelab_critical_beta_search(&params, e.get(), c.get(), cfg_.real("bounds", "tol"),
                                      cfg_.real("bounds", "beta_cap"), &opt, &cb));
    std::string csv = stamp() + "beta,B,upsilon,upsilon_tilde,z_p\n";
    for (double beta : cfg_.reals("bounds", "beta_grid")) {
      shelab_bound_value v;
      check(shelab_bound_constant(beta, &params, e.get(), c.get(), &opt, &v));
      csv += fmt(beta) + "," + fmt(v.B) + "," + fmt(v.upsilon) + "," + fmt(v.upsilon_tilde) + "," +
             fmt(v.z_p) + "\n";
    }
    write_text("bound_table.csv", csv);
    write_json("bound.json",
               {{"p", p},
                {"params", {{"L_b", params.L_b}, {"L_sigma", params.L_sigma}, {"b0", params.b0},
                            {"sigma0", params.sigma0}, {"d", params.d}}},
                {"tau", tau},
                {"beta_star", cb.beta},
                {"B_at_beta_star", cb.B_at},
                {"bracket", {cb.lower, cb.upper}},
                {"evaluations", cb.evaluations}});
    std::cout << "bound: beta*=" << fmt(cb.beta) << " B(beta*)=" << fmt(cb.B_at)
              << " bracket=[" << fmt(cb.lower) << ", " << fmt(cb.upper) << "]\n";
    return kExitOk;
  }

  int solve() {
    const auto sim = sim_config();
    shelab_rng* r = nullptr;
    check(shelab_rng_create(seed_, &r));
    Rng rng(r);
    shelab_trajectory* t = nullptr;
    check(shelab_solve_mild(sim.get(), rng.get(), &t));
    Trajectory tr(t);
    check(shelab_trajectory_write_csv(tr.get(), path_of("trajectory.csv").c_str()));
    adopt_csv("trajectory.csv");
    std::cout << "solve: " << shelab_trajectory_times(tr.get()) << " recorded times x "
              << shelab_trajectory_points(tr.get()) << " points\n";
    return kExitOk;
  }

  void write_curve(const shelab_curve* curve) {
    check(shelab_curve_write_csv(curve, path_of("moments.csv").c_str()));
    adopt_csv("moments.csv");
  }

  int moments() {
    const auto sim = sim_config();
    const int p = moment_order();
    const size_t M = cfg_.u64("simulation", "M");
    shelab_curve* c = nullptr;
    check(shelab_estimate_moments(sim.get(), p, M, &c));
    Curve curve(c);
    write_curve(curve.get());
    shelab_gamma g;
    check(shelab_estimate_gamma_bar(curve.get(), 1.0, -1.0, &g));
    write_json("gamma.json", {{"p", p}, {"M", M}, {"slope", g.slope}, {"intercept", g.intercept},
                              {"ci", g.ci}, {"points", g.points},
                              {"path_bootstrap", g.path_bootstrap != 0}});
    std::cout << "moments: gamma_hat=" << fmt(g.slope) << " ci=" << fmt(g.ci) << "\n";
    return kExitOk;
  }

  int verify() {
    const auto sim = sim_config();
    const int p = moment_order();
    const size_t M = cfg_.u64("simulation", "M");
    const auto opt = upsilon_options();
    shelab_verdict v;
    shelab_curve* c = nullptr;
    check(shelab_verify_moment_bound(sim.get(), p, M, cfg_.real("simulation", "verify_tol"), &opt,
                                     &v, &c));
    Curve curve(c);
    write_curve(curve.get());
    write_json("verdict.json", {{"p", p}, {"M", M},
                                {"gamma_hat", v.gamma_hat}, {"ci", v.ci},
                                {"beta_star", v.beta_star}, {"tol", v.tol},
                                {"holds", v.holds != 0},
                                {"B_at_beta_star", v.B_at},
                                {"bracket", {v.lower, v.upper}},
                                {"evaluations", v.evaluations}});
    std::cout << "verify: gamma_hat=" << fmt(v.gamma_hat) << " ci=" << fmt(v.ci)
              << " beta*=" << fmt(v.beta_star) << (v.holds ? " HOLDS" : " FAILED") << "\n";
    return v.holds ? kExitOk : kExitFailed;
  }

  std::string command_;
  Config cfg_;
  std::vector<std::string> overrides_;
  fs::path dir_;
  std::string hash_;
  std::uint64_t seed_ = 0;
  std::vector<std::string> artifacts_;
};

}  // namespace

int main(int argc, char** argv) {
  // --section.key=value flags are overrides; everything else goes to CLI11.
  std::vector<std::string> overrides;
  std::vector<std::string> rest;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    const auto eq = a.find('=');
    const auto dot = a.find('.');
    if (a.rfind("--", 0) == 0 && dot != std::string::npos && eq != std::string::npos && dot < eq) {
      overrides.push_back(a.substr(2));
    } else {
      rest.push_back(a);
    }
  }

  CLI::App app{"shelab: stochastic heat equation moment bounds"};
  app.require_subcommand(1);
  int log_level = 3;
  app.add_option("--log-level", log_level, "0 trace .. 6 off")->check(CLI::Range(0, 6));
  app.footer("Override any config key with --section.key=value. "
             "SHELAB_OUTPUT_DIR overrides [output] dir.");
  std::string config_path;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"kernel", "transition density on a lattice"},
      {"bridge-check", "bridge density bound (single case or standard matrix)"},
      {"parseval-check", "physical vs frequency-space energy of the initial measure"},
      {"dalang", "Upsilon and its tilde variant over the beta grid"},
      {"bound", "critical beta and the bound constant table"},
      {"solve", "one mild-solution trajectory"},
      {"moments", "Monte Carlo moment curve and growth-rate slope"},
      {"verify", "moment growth verdict against the critical beta"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "experiment configuration file")->required();
  }

  std::vector<std::string> reversed(rest.rbegin(), rest.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  shelab_set_log_level(log_level);

  try {
    Config cfg = Config::load(config_path, overrides);
    Run run(command, std::move(cfg), overrides);
    return run.execute();
  } catch (const ConfigError& e) {
    std::cerr << "shelab: " << command << ": config: " << e.what() << "\n";
  } catch (const ApiError& e) {
    std::cerr << "shelab: " << command << ": " << shelab_status_name(e.status) << ": " << e.what()
              << "\n";
  } catch (const std::exception& e) {
    std::cerr << "shelab: " << command << ": error: " << e.what() << "\n";
  }
  return kExitError;
}
