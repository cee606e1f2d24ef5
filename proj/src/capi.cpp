#include "shelab/shelab.h"

#include <spdlog/spdlog.h>

#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include "shelab/bounds.hpp"
#include "shelab/bridge.hpp"
#include "shelab/error.hpp"
#include "shelab/levy.hpp"
#include "shelab/simulator.hpp"
#include "shelab/spectral.hpp"

struct shelab_exponent {
  shelab::levy::LevyExponent v;
};
struct shelab_measure {
  shelab::levy::InitialMeasure v;
};
struct shelab_covariance {
  shelab::spectral::Covariance v;
};
struct shelab_rng {
  shelab::Rng v;
};
struct shelab_config {
  shelab::sim::SheConfig v;
};
struct shelab_trajectory {
  shelab::sim::Trajectory v;
};
struct shelab_curve {
  shelab::sim::MomentCurve v;
};

namespace {

using namespace shelab;

thread_local std::string g_last_error;

template <class F>
int guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SHELAB_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SHELAB_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return SHELAB_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  require(p != nullptr, ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

int status_code(quad::Status s) {
  switch (s) {
    case quad::Status::Finite:
      return SHELAB_FINITE;
    case quad::Status::Divergent:
      return SHELAB_DIVERGES;
    case quad::Status::Inconclusive:
      return SHELAB_UNDECIDED;
  }
  return SHELAB_UNDECIDED;
}

bounds::UpsilonOptions upsilon_options(const shelab_upsilon_options* o) {
  bounds::UpsilonOptions opt;
  if (!o) return opt;
  opt.t_min = o->t_min;
  opt.t_max = o->t_max;
  opt.grid_points = o->grid_points;
  opt.refine = o->refine != 0;
  opt.quad.rel_tol = o->rel_tol;
  require(opt.t_min > 0.0 && opt.t_max > opt.t_min && opt.grid_points >= 2 && opt.quad.rel_tol > 0.0,
          ErrorCode::InvalidArgument, "invalid Upsilon search options");
  return opt;
}

bounds::BoundParams bound_params(const shelab_bound_params* p) {
  need(p, "bound parameters");
  bounds::BoundParams bp;
  bp.L_b = p->L_b;
  bp.L_sigma = p->L_sigma;
  bp.b0 = p->b0;
  bp.sigma0 = p->sigma0;
  bp.p = p->p;
  bp.d = p->d;
  bp.validate();
  return bp;
}

GridSpec grid_1d(double half_extent, size_t n) {
  GridSpec g{half_extent, n, 1};
  g.validate();
  return g;
}

sim::Coefficient coefficient(int kind, double c0, double c1, const double* u, const double* v,
                             size_t n, double L) {
  switch (kind) {
    case SHELAB_COEF_ZERO:
      return sim::Coefficient::zero();
    case SHELAB_COEF_AFFINE:
      return sim::Coefficient::affine(c0, c1);
    case SHELAB_COEF_TABULATED:
      need(u, "coefficient grid");
      need(v, "coefficient values");
      return sim::Coefficient::tabulated(std::vector<double>(u, u + n),
                                         std::vector<double>(v, v + n), L);
    default:
      throw Error(ErrorCode::InvalidArgument, "unknown coefficient kind " + std::to_string(kind));
  }
}

void open_out(std::ofstream& f, const char* path) {
  need(path, "path");
  f.open(path, std::ios::binary);
  require(f.good(), ErrorCode::Io, std::string("cannot open ") + path + " for writing");
}

void close_out(std::ofstream& f, const char* path) {
  f.close();
  require(!f.fail(), ErrorCode::Io, std::string("failed writing ") + path);
}

}  // namespace

extern "C" {

const char* shelab_version(void) { return "0.1.0"; }

const char* shelab_last_error(void) { return g_last_error.c_str(); }

const char* shelab_status_name(int status) {
  if (status < 0 || status > SHELAB_INTERNAL) return "unknown";
  return to_string(static_cast<ErrorCode>(status));
}

void shelab_set_log_level(int level) {
  if (level < 0) level = 0;
  if (level > 6) level = 6;
  spdlog::set_level(static_cast<spdlog::level::level_enum>(level));
}

// ---- exponents

int shelab_exponent_stable(double a, double theta, double scale, int dim, shelab_exponent** out) {
  return guarded([&] {
    need(out, "out");
    *out = new shelab_exponent{levy::make_stable_exponent(a, theta, scale, dim)};
  });
}

int shelab_exponent_tabulated(const double* xi, const double* re, const double* im, size_t n,
                              shelab_exponent** out) {
  return guarded([&] {
    need(out, "out");
    need(xi, "xi");
    need(re, "re");
    std::vector<std::complex<double>> vals(n);
    for (size_t i = 0; i < n; ++i) vals[i] = {re[i], im ? im[i] : 0.0};
    *out = new shelab_exponent{
        levy::LevyExponent::tabulated(std::vector<double>(xi, xi + n), std::move(vals))};
  });
}

void shelab_exponent_free(shelab_exponent* e) { delete e; }

int shelab_exponent_eval(const shelab_exponent* e, double xi, double* re, double* im) {
  return guarded([&] {
    need(e, "exponent");
    const auto v = e->v.at(xi);
    if (re) *re = v.real();
    if (im) *im = v.imag();
  });
}

// ---- measures

int shelab_measure_dirac(double location, shelab_measure** out) {
  return guarded([&] {
    need(out, "out");
    *out = new shelab_measure{levy::InitialMeasure::dirac(location)};
  });
}

int shelab_measure_lebesgue(shelab_measure** out) {
  return guarded([&] {
    need(out, "out");
    *out = new shelab_measure{levy::InitialMeasure::lebesgue()};
  });
}

int shelab_measure_atoms(const double* locations, const double* weights, size_t n,
                         shelab_measure** out) {
  return guarded([&] {
    need(out, "out");
    need(locations, "locations");
    need(weights, "weights");
    std::vector<levy::Atom> atoms(n);
    for (size_t i = 0; i < n; ++i) atoms[i] = {locations[i], weights[i]};
    *out = new shelab_measure{levy::InitialMeasure::atoms(std::move(atoms))};
  });
}

int shelab_measure_density(double half_extent, size_t n, const double* values,
                           shelab_measure** out) {
  return guarded([&] {
    need(out, "out");
    need(values, "values");
    *out = new shelab_measure{
        levy::InitialMeasure::density(grid_1d(half_extent, n), std::vector<double>(values, values + n))};
  });
}

void shelab_measure_free(shelab_measure* m) { delete m; }

// ---- covariances

int shelab_covariance_create(int kind, double alpha, double width, int dim,
                             shelab_covariance** out) {
  return guarded([&] {
    need(out, "out");
    spectral::CovKind k;
    switch (kind) {
      case SHELAB_COV_WHITE:
        k = spectral::CovKind::White;
        break;
      case SHELAB_COV_RIESZ:
        k = spectral::CovKind::Riesz;
        break;
      case SHELAB_COV_GAUSSIAN_BUMP:
        k = spectral::CovKind::GaussianBump;
        break;
      default:
        throw Error(ErrorCode::InvalidArgument, "unknown covariance kind " + std::to_string(kind));
    }
    *out = new shelab_covariance{spectral::make_covariance(k, {alpha, width}, dim)};
  });
}

int shelab_covariance_tabulated(const double* xi, const double* fhat, size_t n,
                                shelab_covariance** out) {
  return guarded([&] {
    need(out, "out");
    need(xi, "xi");
    need(fhat, "fhat");
    *out = new shelab_covariance{spectral::Covariance::tabulated(
        std::vector<double>(xi, xi + n), std::vector<double>(fhat, fhat + n))};
  });
}

void shelab_covariance_free(shelab_covariance* c) { delete c; }

int shelab_covariance_fhat(const shelab_covariance* c, double rho, double* out) {
  return guarded([&] {
    need(c, "covariance");
    need(out, "out");
    *out = c->v.fhat(rho);
  });
}

// ---- kernels

int shelab_default_grid(const shelab_exponent* e, double t, double mass_budget,
                        double* half_extent, size_t* n) {
  return guarded([&] {
    need(e, "exponent");
    const auto g = levy::default_grid(e->v, t, mass_budget);
    if (half_extent) *half_extent = g.half_extent;
    if (n) *n = g.n;
  });
}

int shelab_transition_density(const shelab_exponent* e, double t, double half_extent, size_t n,
                              double* values, double* mass) {
  return guarded([&] {
    need(e, "exponent");
    const auto k = levy::transition_density(e->v, t, grid_1d(half_extent, n));
    if (values) std::copy(k.values.begin(), k.values.end(), values);
    if (mass) *mass = k.mass();
  });
}

int shelab_density_at(const shelab_exponent* e, double t, double x, double* out) {
  return guarded([&] {
    need(e, "exponent");
    need(out, "out");
    *out = levy::density_at(e->v, t, x);
  });
}

int shelab_semigroup_defect(const shelab_exponent* e, double t, double s, double half_extent,
                            size_t n, double* out) {
  return guarded([&] {
    need(e, "exponent");
    need(out, "out");
    *out = levy::semigroup_defect(e->v, t, s, grid_1d(half_extent, n));
  });
}

int shelab_write_kernel_csv(const shelab_exponent* e, double t, double half_extent, size_t n,
                            const char* path) {
  return guarded([&] {
    need(e, "exponent");
    const auto k = levy::transition_density(e->v, t, grid_1d(half_extent, n));
    std::ofstream f;
    open_out(f, path);
    levy::write_kernel_csv(f, k, e->v);
    close_out(f, path);
  });
}

// ---- Parseval

int shelab_parseval_check(const shelab_covariance* c, const shelab_measure* nu,
                          shelab_parseval* out) {
  return guarded([&] {
    need(c, "covariance");
    need(nu, "measure");
    need(out, "out");
    const auto r = spectral::parseval_check(c->v, nu->v);
    *out = {r.lhs, r.rhs, r.rel_err, r.both_divergent ? 1 : 0};
  });
}

// ---- bridges

int shelab_verify_bridge_bound(const shelab_exponent* e, const shelab_covariance* c, double z1,
                               double z2, double x, double t, double s, shelab_bridge_bound* out) {
  return guarded([&] {
    need(e, "exponent");
    need(c, "covariance");
    need(out, "out");
    const auto b = bridge::verify_bridge_bound(e->v, c->v, z1, z2, x, t, s);
    *out = {b.lhs, b.rhs, b.ratio, b.holds ? 1 : 0, b.h};
  });
}

int shelab_bridge_cf_error(const shelab_exponent* e, double z, double x, double t, double s,
                           double* out) {
  return guarded([&] {
    need(e, "exponent");
    need(out, "out");
    bridge::BridgeSpec spec{e->v, z, x, t, s};
    const auto g = bridge::bridge_grid(e->v, t, s, {z, x});
    *out = bridge::check_cf_consistency(spec, g).max_error();
  });
}

int shelab_bridge_matrix(const char* path, size_t* held, size_t* total) {
  return guarded([&] {
    const auto rows = bridge::run_matrix(bridge::standard_matrix());
    size_t ok = 0;
    for (const auto& r : rows) ok += r.bound.holds ? 1 : 0;
    if (held) *held = ok;
    if (total) *total = rows.size();
    if (path) {
      std::ofstream f;
      open_out(f, path);
      bridge::write_bridge_csv(f, rows);
      close_out(f, path);
    }
  });
}

// ---- bounds

void shelab_upsilon_options_default(shelab_upsilon_options* opt) {
  if (!opt) return;
  const bounds::UpsilonOptions d;
  *opt = {d.t_min, d.t_max, d.grid_points, d.refine ? 1 : 0, d.quad.rel_tol};
}

int shelab_upsilon(const shelab_exponent* e, const shelab_covariance* c, double beta,
                   const shelab_upsilon_options* opt, shelab_upsilon_result* out) {
  return guarded([&] {
    need(e, "exponent");
    need(c, "covariance");
    need(out, "out");
    const auto r = bounds::upsilon(e->v, c->v, beta, upsilon_options(opt));
    *out = {r.value, status_code(r.status), r.t_star, r.limit, r.sup_not_localized ? 1 : 0};
  });
}

int shelab_upsilon_tilde(const shelab_exponent* e, const shelab_covariance* c, double beta,
                         double* value, int* status) {
  return guarded([&] {
    need(e, "exponent");
    need(c, "covariance");
    const auto r = bounds::upsilon_tilde(e->v, c->v, beta);
    if (value) *value = r.value;
    if (status) *status = status_code(r.status);
  });
}

int shelab_tau(const shelab_bound_params* params, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = bounds::tau_const(bound_params(params));
  });
}

int shelab_hermite_largest_zero(int p, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = bounds::hermite_largest_zero(p);
  });
}

int shelab_bound_constant(double beta, const shelab_bound_params* params, const shelab_exponent* e,
                          const shelab_covariance* c, const shelab_upsilon_options* opt,
                          shelab_bound_value* out) {
  return guarded([&] {
    need(e, "exponent");
    need(c, "covariance");
    need(out, "out");
    const auto v = bounds::bound_constant(beta, bound_params(params), e->v, c->v, upsilon_options(opt));
    *out = {v.B, v.upsilon, v.upsilon_tilde, v.z_p};
  });
}

int shelab_critical_beta_search(const shelab_bound_params* params, const shelab_exponent* e,
                                const shelab_covariance* c, double tol, double beta_cap,
                                const shelab_upsilon_options* opt, shelab_critical_beta* out) {
  return guarded([&] {
    need(e, "exponent");
    need(c, "covariance");
    need(out, "out");
    const auto r =
        bounds::critical_beta(bound_params(params), e->v, c->v, tol, beta_cap, upsilon_options(opt));
    *out = {r.beta, r.B_at, r.lower, r.upper, r.evaluations};
  });
}

// ---- simulation

int shelab_rng_create(uint64_t seed, shelab_rng** out) {
  return guarded([&] {
    need(out, "out");
    *out = new shelab_rng{Rng(seed)};
  });
}

void shelab_rng_free(shelab_rng* r) { delete r; }

int shelab_config_create(const shelab_exponent* e, const shelab_covariance* c,
                         const shelab_measure* mu, shelab_config** out) {
  return guarded([&] {
    need(e, "exponent");
    need(c, "covariance");
    need(mu, "measure");
    need(out, "out");
    *out = new shelab_config{sim::SheConfig(e->v, c->v, mu->v)};
  });
}

void shelab_config_free(shelab_config* cfg) { delete cfg; }

int shelab_config_set_drift(shelab_config* cfg, int kind, double c0, double c1, const double* u,
                            const double* v, size_t n, double L) {
  return guarded([&] {
    need(cfg, "config");
    cfg->v.b = coefficient(kind, c0, c1, u, v, n, L);
  });
}

int shelab_config_set_sigma(shelab_config* cfg, int kind, double c0, double c1, const double* u,
                            const double* v, size_t n, double L) {
  return guarded([&] {
    need(cfg, "config");
    cfg->v.sigma = coefficient(kind, c0, c1, u, v, n, L);
  });
}

int shelab_config_set_grid(shelab_config* cfg, double half_extent, size_t n) {
  return guarded([&] {
    need(cfg, "config");
    cfg->v.grid = grid_1d(half_extent, n);
  });
}

int shelab_config_set_time(shelab_config* cfg, double T, double dt) {
  return guarded([&] {
    need(cfg, "config");
    cfg->v.T = T;
    cfg->v.dt = dt;
  });
}

int shelab_config_set_seed(shelab_config* cfg, uint64_t seed) {
  return guarded([&] {
    need(cfg, "config");
    cfg->v.seed = seed;
  });
}

int shelab_config_set_threads(shelab_config* cfg, unsigned threads) {
  return guarded([&] {
    need(cfg, "config");
    cfg->v.threads = threads;
  });
}

int shelab_config_set_record_stride(shelab_config* cfg, size_t stride) {
  return guarded([&] {
    need(cfg, "config");
    cfg->v.record_stride = stride;
  });
}

int shelab_config_validate(const shelab_config* cfg) {
  return guarded([&] {
    need(cfg, "config");
    cfg->v.validate();
  });
}

int shelab_config_dt_ceiling(const shelab_config* cfg, double* out) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    *out = cfg->v.dt_ceiling();
  });
}

int shelab_config_bound_params(const shelab_config* cfg, int p, shelab_bound_params* out) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    const auto bp = sim::bound_params(cfg->v, p);
    *out = {bp.L_b, bp.L_sigma, bp.b0, bp.sigma0, bp.p, bp.d};
  });
}

int shelab_solve_mild(const shelab_config* cfg, shelab_rng* rng, shelab_trajectory** out) {
  return guarded([&] {
    need(cfg, "config");
    need(rng, "rng");
    need(out, "out");
    *out = new shelab_trajectory{sim::solve_mild(cfg->v, rng->v)};
  });
}

void shelab_trajectory_free(shelab_trajectory* tr) { delete tr; }

size_t shelab_trajectory_times(const shelab_trajectory* tr) { return tr ? tr->v.times.size() : 0; }

size_t shelab_trajectory_points(const shelab_trajectory* tr) { return tr ? tr->v.grid.n : 0; }

int shelab_trajectory_get(const shelab_trajectory* tr, size_t k, double* t, double* field,
                          double* reference) {
  return guarded([&] {
    need(tr, "trajectory");
    require(k < tr->v.times.size(), ErrorCode::InvalidArgument, "time index out of range");
    if (t) *t = tr->v.times[k];
    if (field) std::copy(tr->v.fields[k].begin(), tr->v.fields[k].end(), field);
    if (reference) std::copy(tr->v.reference[k].begin(), tr->v.reference[k].end(), reference);
  });
}

int shelab_trajectory_write_csv(const shelab_trajectory* tr, const char* path) {
  return guarded([&] {
    need(tr, "trajectory");
    std::ofstream f;
    open_out(f, path);
    sim::write_trajectory_csv(f, tr->v);
    close_out(f, path);
  });
}

int shelab_picard(const shelab_config* cfg, int n_max, double beta, int p, size_t paths,
                  double* gaps, double* ratios, double* tau) {
  return guarded([&] {
    need(cfg, "config");
    need(gaps, "gaps");
    const auto r = sim::picard_iterate(cfg->v, n_max, beta, p, paths);
    std::copy(r.gaps.begin(), r.gaps.end(), gaps);
    if (ratios) std::copy(r.ratios.begin(), r.ratios.end(), ratios);
    if (tau) *tau = r.tau;
  });
}

int shelab_estimate_moments(const shelab_config* cfg, int p, size_t M, shelab_curve** out) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    *out = new shelab_curve{sim::estimate_moments(cfg->v, p, M)};
  });
}

void shelab_curve_free(shelab_curve* c) { delete c; }

size_t shelab_curve_size(const shelab_curve* c) { return c ? c->v.times.size() : 0; }

int shelab_curve_get(const shelab_curve* c, size_t i, double* t, double* value, double* stderr_,
                     double* argmax_x) {
  return guarded([&] {
    need(c, "curve");
    require(i < c->v.times.size(), ErrorCode::InvalidArgument, "curve index out of range");
    if (t) *t = c->v.times[i];
    if (value) *value = c->v.values[i];
    if (stderr_) *stderr_ = c->v.stderr_[i];
    if (argmax_x) *argmax_x = c->v.argmax_x[i];
  });
}

int shelab_curve_write_csv(const shelab_curve* c, const char* path) {
  return guarded([&] {
    need(c, "curve");
    std::ofstream f;
    open_out(f, path);
    sim::write_moment_csv(f, c->v);
    close_out(f, path);
  });
}

int shelab_weighted_norm(const shelab_curve* c, double beta, double* out) {
  return guarded([&] {
    need(c, "curve");
    need(out, "out");
    *out = sim::weighted_norm(c->v, beta);
  });
}

int shelab_estimate_gamma_bar(const shelab_curve* c, double t_lo, double t_hi, shelab_gamma* out) {
  return guarded([&] {
    need(c, "curve");
    need(out, "out");
    const auto g = t_lo > t_hi ? sim::estimate_gamma_bar(c->v)
                               : sim::estimate_gamma_bar(c->v, t_lo, t_hi);
    *out = {g.slope, g.intercept, g.ci, g.points, g.path_bootstrap ? 1 : 0};
  });
}

int shelab_verify_moment_bound(const shelab_config* cfg, int p, size_t M, double tol,
                               const shelab_upsilon_options* opt, shelab_verdict* out,
                               shelab_curve** curve) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    auto v = sim::verify_moment_bound(cfg->v, p, M, tol, upsilon_options(opt));
    *out = {v.gamma_hat,    v.ci,          v.beta_star,        v.tol,
            v.holds ? 1 : 0, v.critical.B_at, v.critical.lower, v.critical.upper,
            v.critical.evaluations};
    if (curve) *curve = new shelab_curve{std::move(v.curve)};
  });
}

}  // extern "C"
