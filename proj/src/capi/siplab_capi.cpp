#include "siplab/siplab.h"

#include "examples.hpp"
#include "gaussian_algebra.hpp"
#include "solvers.hpp"
#include "verification.hpp"

#include <cstring>
#include <exception>
#include <new>
#include <string>

struct sip_density {
  siplab::Density value;
};

struct sip_map {
  siplab::ForwardMap value;
};

struct sip_solution {
  siplab::SipSolution value;
};

struct sip_example_result {
  siplab::ExampleResult value;
};

namespace {

thread_local std::string g_last_error;

sip_status record(sip_status status, const char* message) {
  g_last_error = message;
  return status;
}

template <class F>
sip_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return SIP_OK;
  } catch (const siplab::Error& e) {
    return record(static_cast<sip_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return record(SIP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(SIP_ERR_INTERNAL, e.what());
  }
}

void need(const void* ptr, const char* what) {
  siplab::require(ptr != nullptr, siplab::ErrorCode::kInvalidArgument,
                  std::string(what) + " is NULL");
}

siplab::Vector vec(const double* data, size_t n) {
  return Eigen::Map<const siplab::Vector>(data, static_cast<Eigen::Index>(n));
}

siplab::Matrix mat(const double* data, size_t rows, size_t cols) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void store(const siplab::Matrix& m, double* out) {
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      out, m.rows(), m.cols()) = m;
}

template <class Handle, class Value>
void emit(Handle** out, Value&& value) {
  need(out, "out");
  *out = new Handle{std::forward<Value>(value)};
}

siplab::SampleOutcome draw_solution(const siplab::SipSolution& s, size_t count, uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(count);
  if (s.sampler_available()) return s.sample(n, seed);
  siplab::require(s.bjw.has_value(), siplab::ErrorCode::kInvalidArgument,
                  "solution has no sampler");
  return siplab::bjw_rejection_sample(s, n, seed);
}

}  // namespace

extern "C" {

const char* sip_version(void) { return "0.1.0"; }

const char* sip_status_string(sip_status status) {
  switch (status) {
    case SIP_OK: return "ok";
    case SIP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SIP_ERR_DOMAIN: return "domain error";
    case SIP_ERR_DIMENSION: return "dimension mismatch";
    case SIP_ERR_NOT_POSITIVE_DEFINITE: return "not positive definite";
    case SIP_ERR_RANK_DEFICIENT: return "rank deficient";
    case SIP_ERR_NO_SOLUTION: return "no solution";
    case SIP_ERR_PREDICTABILITY: return "predictability violated";
    case SIP_ERR_CONVERGENCE: return "convergence failure";
    case SIP_ERR_UNKNOWN_EXAMPLE: return "unknown example";
    case SIP_ERR_IO: return "i/o error";
    case SIP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* sip_last_error(void) { return g_last_error.c_str(); }

// ---- densities ----

sip_status sip_density_gaussian(size_t dim, const double* mean, const double* cov,
                                sip_density** out) {
  return guarded([&] {
    need(mean, "mean");
    need(cov, "cov");
    emit(out, siplab::make_gaussian({vec(mean, dim), mat(cov, dim, dim)}));
  });
}

sip_status sip_density_truncated_gaussian(double mu, double sigma, double lo, double hi,
                                          sip_density** out) {
  return guarded([&] { emit(out, siplab::make_truncated_gaussian(mu, sigma, lo, hi)); });
}

sip_status sip_density_beta(double a, double b, sip_density** out) {
  return guarded([&] { emit(out, siplab::make_beta(a, b)); });
}

sip_status sip_density_uniform(size_t dim, const double* lower, const double* upper,
                               sip_density** out) {
  return guarded([&] {
    need(lower, "lower");
    need(upper, "upper");
    emit(out, siplab::make_uniform(vec(lower, dim), vec(upper, dim)));
  });
}

sip_status sip_density_mixture(size_t count, const sip_density* const* components,
                               const double* weights, sip_density** out) {
  return guarded([&] {
    need(components, "components");
    need(weights, "weights");
    std::vector<siplab::Density> parts;
    for (size_t i = 0; i < count; ++i) {
      need(components[i], "component");
      parts.push_back(components[i]->value);
    }
    emit(out, siplab::make_mixture(
                  parts, siplab::MixtureWeights(std::vector<double>(weights, weights + count))));
  });
}

sip_status sip_density_kde(size_t rows, size_t dim, const double* data, const double* bandwidth,
                           sip_density** out) {
  return guarded([&] {
    need(data, "data");
    siplab::SampleBatch batch;
    batch.data = mat(data, rows, dim);
    batch.labels = siplab::default_labels(static_cast<int>(dim));
    std::optional<siplab::Vector> h;
    if (bandwidth) h = vec(bandwidth, dim);
    emit(out, siplab::fit_kde(batch, h));
  });
}

size_t sip_density_dim(const sip_density* d) {
  return d ? static_cast<size_t>(d->value.dim()) : 0;
}

sip_status sip_density_pdf(const sip_density* d, const double* x, double* out) {
  return guarded([&] {
    need(d, "density");
    need(x, "x");
    need(out, "out");
    *out = d->value.pdf(vec(x, static_cast<size_t>(d->value.dim())));
  });
}

sip_status sip_density_log_pdf(const sip_density* d, const double* x, double* out) {
  return guarded([&] {
    need(d, "density");
    need(x, "x");
    need(out, "out");
    *out = d->value.log_pdf(vec(x, static_cast<size_t>(d->value.dim())));
  });
}

sip_status sip_density_sample(const sip_density* d, size_t count, uint64_t seed, double* out) {
  return guarded([&] {
    need(d, "density");
    need(out, "out");
    store(d->value.sample(static_cast<Eigen::Index>(count), seed).data, out);
  });
}

void sip_density_free(sip_density* d) { delete d; }

// ---- maps ----

sip_status sip_map_linear(size_t q, size_t p, const double* a, sip_map** out) {
  return guarded([&] {
    need(a, "a");
    emit(out, siplab::linear_map(mat(a, q, p)));
  });
}

sip_status sip_map_builtin(const char* name, sip_map** out) {
  return guarded([&] {
    need(name, "name");
    const std::string key(name);
    if (key == "polar") {
      emit(out, siplab::half_squared_radius_map());
    } else if (key == "sum") {
      emit(out, siplab::sum_map());
    } else if (key == "square") {
      emit(out, siplab::square_map(-1.0, 1.0));
    } else {
      siplab::fail(siplab::ErrorCode::kInvalidArgument,
                   "unknown built-in map '" + key + "'; known: polar, sum, square");
    }
  });
}

sip_status sip_map_identity(size_t dim, sip_map** out) {
  return guarded([&] { emit(out, siplab::identity_map(static_cast<int>(dim))); });
}

size_t sip_map_input_dim(const sip_map* m) {
  return m ? static_cast<size_t>(m->value.input_dim()) : 0;
}

size_t sip_map_output_dim(const sip_map* m) {
  return m ? static_cast<size_t>(m->value.output_dim()) : 0;
}

sip_status sip_map_eval(const sip_map* m, const double* theta, double* out) {
  return guarded([&] {
    need(m, "map");
    need(theta, "theta");
    need(out, "out");
    const siplab::Vector y =
        m->value.eval(vec(theta, static_cast<size_t>(m->value.input_dim())));
    std::memcpy(out, y.data(), sizeof(double) * static_cast<size_t>(y.size()));
  });
}

sip_status sip_map_jacobian(const sip_map* m, const double* theta, double* out, int* row_rank) {
  return guarded([&] {
    need(m, "map");
    need(theta, "theta");
    need(out, "out");
    const siplab::JacobianReport r =
        m->value.jacobian_at(vec(theta, static_cast<size_t>(m->value.input_dim())));
    store(r.jacobian, out);
    if (row_rank) *row_rank = r.row_rank;
  });
}

void sip_map_free(sip_map* m) { delete m; }

// ---- solvers ----

sip_status sip_solve_cov_exact(const sip_map* map, const sip_density* observed,
                               sip_solution** out) {
  return guarded([&] {
    need(map, "map");
    need(observed, "observed");
    emit(out, siplab::cov_exact(map->value, observed->value));
  });
}

sip_status sip_solve_two_to_one(double eps, double w, sip_solution** out) {
  return guarded([&] {
    const siplab::TwoToOneProblem problem = siplab::two_to_one_problem(eps);
    const siplab::Density fy =
        siplab::make_uniform(siplab::Vector::Zero(1), siplab::Vector::Ones(1));
    emit(out, siplab::cov_mixture_family(problem.map, fy, problem.partition,
                                         siplab::two_to_one_weights(eps, w)));
  });
}

sip_status sip_solve_intuitive(const sip_map* map, const sip_density* observed,
                               const sip_density* aux, size_t count, uint64_t seed,
                               sip_solution** out) {
  return guarded([&] {
    need(map, "map");
    need(observed, "observed");
    std::optional<siplab::Density> a;
    if (aux) a = aux->value;
    emit(out, siplab::intuitive_sample(map->value, observed->value, a,
                                       static_cast<Eigen::Index>(count), seed));
  });
}

sip_status sip_solve_bbe_linear(size_t q, size_t p, const double* a, const sip_density* observed,
                                const double* lower, const double* upper, sip_solution** out) {
  return guarded([&] {
    need(a, "a");
    need(observed, "observed");
    siplab::require(p >= q, siplab::ErrorCode::kDimension, "need p >= q");
    const size_t k = p - q;
    siplab::require(k == 0 || (lower && upper), siplab::ErrorCode::kInvalidArgument,
                    "contour bounds are NULL");
    emit(out, siplab::bbe_linear(mat(a, q, p), observed->value,
                                 k ? vec(lower, k) : siplab::Vector(0),
                                 k ? vec(upper, k) : siplab::Vector(0)));
  });
}

sip_status sip_solve_bbe_polar(const sip_density* observed, sip_solution** out) {
  return guarded([&] {
    need(observed, "observed");
    emit(out, siplab::bbe_polar(observed->value));
  });
}

sip_status sip_solve_bjw(const sip_density* initial, const sip_map* map,
                         const sip_density* observed, const sip_density* pushforward,
                         sip_solution** out) {
  return guarded([&] {
    need(initial, "initial");
    need(map, "map");
    need(observed, "observed");
    need(pushforward, "pushforward");
    emit(out, siplab::bjw_density(initial->value, map->value, observed->value,
                                  pushforward->value));
  });
}

sip_status sip_solve_bjw_kde(const sip_density* initial, const sip_map* map,
                             const sip_density* observed, size_t pilot_count, uint64_t seed,
                             sip_solution** out) {
  return guarded([&] {
    need(initial, "initial");
    need(map, "map");
    need(observed, "observed");
    emit(out, siplab::bjw_kde(initial->value, map->value, observed->value,
                              static_cast<Eigen::Index>(pilot_count), seed));
  });
}

const char* sip_solution_method(const sip_solution* s) {
  return s ? siplab::to_string(s->value.method) : "";
}

size_t sip_solution_dim(const sip_solution* s) {
  return s ? static_cast<size_t>(s->value.density.dim()) : 0;
}

int sip_solution_has_sampler(const sip_solution* s) {
  return s && s->value.sampler_available() ? 1 : 0;
}

sip_status sip_solution_pdf(const sip_solution* s, const double* theta, double* out) {
  return guarded([&] {
    need(s, "solution");
    need(theta, "theta");
    need(out, "out");
    *out = s->value.density.pdf(vec(theta, static_cast<size_t>(s->value.density.dim())));
  });
}

sip_status sip_solution_sample(const sip_solution* s, size_t count, uint64_t seed, double* out,
                               size_t* rows_out) {
  return guarded([&] {
    need(s, "solution");
    need(out, "out");
    const siplab::SampleOutcome drawn = draw_solution(s->value, count, seed);
    store(drawn.batch.data, out);
    if (rows_out) *rows_out = static_cast<size_t>(drawn.batch.rows());
  });
}

sip_status sip_solution_density(const sip_solution* s, sip_density** out) {
  return guarded([&] {
    need(s, "solution");
    emit(out, s->value.density);
  });
}

void sip_solution_free(sip_solution* s) { delete s; }

// ---- verification and closed forms ----

sip_status sip_check_pushforward(const sip_solution* s, const sip_map* map,
                                 const sip_density* observed, size_t count, double alpha,
                                 uint64_t seed, sip_check* out) {
  return guarded([&] {
    need(s, "solution");
    need(map, "map");
    need(observed, "observed");
    need(out, "out");
    const siplab::SampleOutcome drawn = draw_solution(s->value, count, seed);
    const siplab::CheckReport r =
        siplab::pushforward_check(drawn.batch, map->value, observed->value, alpha, seed);
    *out = sip_check{r.pass ? 1 : 0, r.statistic, r.threshold};
  });
}

sip_status sip_gaussian_bjw_linear(size_t q, size_t p, const double* a, const double* mu_y,
                                   const double* sigma_y, const double* mu_theta,
                                   const double* sigma_theta, double* mean_out,
                                   double* cov_out) {
  return guarded([&] {
    need(a, "a");
    need(mu_y, "mu_y");
    need(sigma_y, "sigma_y");
    need(mu_theta, "mu_theta");
    need(sigma_theta, "sigma_theta");
    need(mean_out, "mean_out");
    need(cov_out, "cov_out");
    const siplab::GaussianParams g = siplab::bjw_gaussian_linear(
        mat(a, q, p), vec(mu_y, q), mat(sigma_y, q, q), vec(mu_theta, p),
        mat(sigma_theta, p, p));
    std::memcpy(mean_out, g.mean.data(), sizeof(double) * p);
    store(g.cov, cov_out);
  });
}

// ---- examples ----

void sip_run_config_init(sip_run_config* config) {
  if (!config) return;
  const siplab::RunConfig d;
  config->example = "";
  config->samples = static_cast<size_t>(d.samples);
  config->seed = d.seed;
  config->out = ".";
  config->format = "csv";
  config->grid = d.grid;
  config->w = d.w;
  config->eps = d.eps;
  config->sigma = d.sigma;
  config->xstar = d.xstar;
  config->n = d.n;
  config->threads = 0;
}

size_t sip_example_count(void) { return siplab::registered_examples().size(); }

const char* sip_example_name(size_t index) {
  const auto& names = siplab::registered_examples();
  return index < names.size() ? names[index].c_str() : nullptr;
}

sip_status sip_example_run(const sip_run_config* config, sip_example_result** out) {
  return guarded([&] {
    need(config, "config");
    need(config->example, "config->example");
    siplab::RunConfig rc;
    rc.example = config->example;
    rc.samples = static_cast<Eigen::Index>(config->samples);
    rc.seed = config->seed;
    if (config->out) rc.out = config->out;
    if (config->format) rc.format = config->format;
    rc.grid = config->grid;
    rc.w = config->w;
    rc.eps = config->eps;
    rc.sigma = config->sigma;
    rc.xstar = config->xstar;
    rc.n = config->n;
    if (config->threads) siplab::set_worker_count(config->threads);
    emit(out, siplab::run_example(rc));
  });
}

int sip_example_result_exit_code(const sip_example_result* r) {
  return r ? r->value.exit_code : 1;
}

size_t sip_example_result_check_count(const sip_example_result* r) {
  return r ? r->value.checks.size() : 0;
}

sip_status sip_example_result_check(const sip_example_result* r, size_t index, const char** name,
                                    const char** details, sip_check* out) {
  return guarded([&] {
    need(r, "result");
    siplab::require(index < r->value.checks.size(), siplab::ErrorCode::kInvalidArgument,
                    "check index out of range");
    const siplab::CheckReport& c = r->value.checks[index];
    if (name) *name = c.name.c_str();
    if (details) *details = c.details.c_str();
    if (out) *out = sip_check{c.pass ? 1 : 0, c.statistic, c.threshold};
  });
}

size_t sip_example_result_file_count(const sip_example_result* r) {
  return r ? r->value.files.size() : 0;
}

const char* sip_example_result_file(const sip_example_result* r, size_t index) {
  return r && index < r->value.files.size() ? r->value.files[index].c_str() : nullptr;
}

size_t sip_example_result_warning_count(const sip_example_result* r) {
  return r ? r->value.warnings.size() : 0;
}

const char* sip_example_result_warning(const sip_example_result* r, size_t index) {
  return r && index < r->value.warnings.size() ? r->value.warnings[index].c_str() : nullptr;
}

void sip_example_result_free(sip_example_result* r) { delete r; }

}  // extern "C"
