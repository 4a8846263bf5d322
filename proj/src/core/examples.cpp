#include "examples.hpp"

#include "gaussian_algebra.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <variant>

namespace siplab {

namespace {

constexpr double kAlpha = 0.01;

using Json = nlohmann::ordered_json;
using Cell = std::variant<double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const Cell& cell) {
  if (const double* d = std::get_if<double>(&cell)) return format_double(*d);
  const std::string& s = std::get<std::string>(cell);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + '"';
}

Json json_cell(const Cell& cell) {
  if (const double* d = std::get_if<double>(&cell)) {
    if (std::isfinite(*d)) return *d;
    return format_double(*d);
  }
  return std::get<std::string>(cell);
}

class Run {
 public:
  explicit Run(const RunConfig& config) : config(config) {
    meta["example"] = config.example;
    meta["seed"] = config.seed;
    meta["samples"] = config.samples;
    meta["grid"] = config.grid;
    meta["format"] = config.format;
  }

  const RunConfig& config;
  ExampleResult result;
  Json meta;

  void param(const std::string& key, double value) { meta["params"][key] = value; }

  void check(CheckReport report, const std::string& name = {}) {
    if (!name.empty()) report.name = name;
    result.checks.push_back(std::move(report));
  }

  void diagnostics(const Diagnostics& d) {
    Json j;
    j["method_seed"] = d.seed;
    j["rows_requested"] = d.rows_requested;
    j["rows_returned"] = d.rows_returned;
    j["dropped_rows"] = d.dropped_rows;
    j["solver_failures"] = d.solver_failures;
    j["proposals"] = d.proposals;
    j["acceptance_rate"] = d.acceptance_rate;
    j["start_distribution"] = d.start_distribution;
    j["warnings"] = d.warnings;
    meta["diagnostics"] = j;
    for (const auto& w : d.warnings) result.warnings.push_back(w);
  }

  void write(const std::string& kind, const Table& table) {
    namespace fs = std::filesystem;
    const fs::path dir(config.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path path = dir / (config.example + "_" + kind + "." + config.format);
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), ErrorCode::kIo, "cannot open " + path.string());
    if (config.format == "csv") {
      for (std::size_t i = 0; i < table.columns.size(); ++i) {
        os << (i ? "," : "") << csv_field(table.columns[i]);
      }
      os << '\n';
      for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i]);
        os << '\n';
      }
    } else {
      Json doc;
      doc["meta"] = meta;
      doc["meta"]["table"] = kind;
      Json data = Json::object();
      for (std::size_t c = 0; c < table.columns.size(); ++c) {
        Json col = Json::array();
        for (const auto& row : table.rows) col.push_back(json_cell(row[c]));
        data[table.columns[c]] = std::move(col);
      }
      doc["data"] = std::move(data);
      os << doc.dump(1) << '\n';
    }
    require(static_cast<bool>(os), ErrorCode::kIo, "failed writing " + path.string());
    result.files.push_back(path.string());
  }

  void write_samples(const SampleBatch& batch) {
    Table t;
    t.columns = batch.labels;
    t.rows.reserve(static_cast<std::size_t>(batch.rows()));
    for (Eigen::Index i = 0; i < batch.rows(); ++i) {
      std::vector<Cell> row;
      for (Eigen::Index j = 0; j < batch.dim(); ++j) row.emplace_back(batch.data(i, j));
      t.rows.push_back(std::move(row));
    }
    write("samples", t);
  }

  void finish() {
    Table t;
    t.columns = {"check", "pass", "statistic", "threshold", "comparison", "details"};
    bool all = true;
    for (const auto& c : result.checks) {
      all = all && c.pass;
      t.rows.push_back({c.name, std::string(c.pass ? "true" : "false"), c.statistic,
                        c.threshold,
                        std::string(c.comparison == Comparison::kAtLeast ? ">=" : "<="),
                        c.details});
    }
    write("report", t);
    result.exit_code = all ? 0 : 1;
  }
};

struct NamedDensity {
  std::string name;
  Density density;
};

Vector linspace(double lo, double hi, int points) {
  return Vector::LinSpaced(points, lo, hi);
}

Table grid_1d(const std::string& axis, double lo, double hi, int points,
              const std::vector<NamedDensity>& densities) {
  Table t;
  t.columns.push_back(axis);
  for (const auto& d : densities) t.columns.push_back(d.name);
  const Vector xs = linspace(lo, hi, points);
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    std::vector<Cell> row{xs[i]};
    for (const auto& d : densities) row.emplace_back(d.density.pdf(Vector::Constant(1, xs[i])));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table grid_2d(const Vector& lo, const Vector& hi, int points,
              const std::vector<NamedDensity>& densities) {
  Table t;
  t.columns = {"theta1", "theta2"};
  for (const auto& d : densities) t.columns.push_back(d.name);
  const Vector xs = linspace(lo[0], hi[0], points);
  const Vector ys = linspace(lo[1], hi[1], points);
  Vector x(2);
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    for (Eigen::Index j = 0; j < ys.size(); ++j) {
      x << xs[i], ys[j];
      std::vector<Cell> row{xs[i], ys[j]};
      for (const auto& d : densities) row.emplace_back(d.density.pdf(x));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

GridSpec gaussian_box(const GaussianParams& g, double sds, int points) {
  const Vector sd = g.cov.diagonal().cwiseSqrt();
  return GridSpec{g.mean - sds * sd, g.mean + sds * sd, points};
}

Density gaussian(const Vector& mean, const Matrix& cov) {
  return make_gaussian(GaussianParams{mean, cov});
}

Density gaussian1(double mean, double var) {
  return gaussian(Vector::Constant(1, mean), Matrix::Constant(1, 1, var));
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

CheckReport within_se(const std::string& name, double estimate, double expected, double se) {
  std::ostringstream os;
  os << "estimate=" << estimate << " expected=" << expected << " se=" << se;
  return CheckReport::make(name, std::abs(estimate - expected) / se, 3.0, Comparison::kAtMost,
                           os.str());
}

// Shared Gaussian-linear BJW setup: A = [1 1], initial N(0, I), fY = N(1, 1/4).
struct GaussLinearCase {
  Matrix a = Matrix::Ones(1, 2);
  Vector mu_theta = Vector::Zero(2);
  Matrix sigma_theta = Matrix::Identity(2, 2);
  Vector mu_y = Vector::Constant(1, 1.0);
  Matrix sigma_y = Matrix::Constant(1, 1, 0.25);

  ForwardMap map() const { return linear_map(a, "A=[1 1]"); }
  Density initial() const { return gaussian(mu_theta, sigma_theta); }
  Density observed() const { return gaussian(mu_y, sigma_y); }
  Density pushforward() const {
    return gaussian(a * mu_theta, a * sigma_theta * a.transpose());
  }
  GaussianParams analytic() const {
    return bjw_gaussian_linear(a, mu_y, sigma_y, mu_theta, sigma_theta);
  }
};

// ---------------------------------------------------------------------------

void run_two_to_one(Run& run) {
  const RunConfig& c = run.config;
  run.param("w", c.w);
  run.param("eps", c.eps);
  const TwoToOneProblem problem = two_to_one_problem(c.eps);
  const Density fy = make_uniform(Vector::Zero(1), Vector::Ones(1));
  const SipSolution sol = cov_mixture_family(problem.map, fy, problem.partition,
                                             two_to_one_weights(c.eps, c.w));
  const SampleOutcome drawn = sol.sample(c.samples, c.seed);
  run.diagnostics(drawn.diagnostics);
  run.check(pushforward_check(drawn.batch, problem.map, fy, kAlpha, c.seed));
  run.check(normalization_check(sol.density));

  const double m = static_cast<double>(drawn.batch.rows());
  const double expected = c.w * c.eps * c.eps;
  const double frac = static_cast<double>((drawn.batch.data.col(0).array() < 0.0).count()) / m;
  const double tol = 3.0 * std::sqrt(expected * (1.0 - expected) / m);
  std::ostringstream os;
  os << "P(theta<0)=" << frac << " expected=" << expected << " tolerance=" << tol;
  run.check(CheckReport::make("negative-branch mass", std::abs(frac - expected), tol,
                              Comparison::kAtMost, os.str()));

  run.write_samples(drawn.batch);
  run.write("grid", grid_1d("theta", -c.eps, 1.0, c.grid, {{"pdf", sol.density}}));
}

void run_bbe_linear(Run& run) {
  const RunConfig& c = run.config;
  Matrix a(1, 2);
  a << -1.0 / 3.0, 4.0 / 3.0;
  const Density fy = make_truncated_gaussian(0.5, 0.25, 0.0, 1.0);
  const Vector lower = Vector::Zero(1);
  const Vector upper = Vector::Ones(1);
  const SipSolution sol = bbe_linear(a, fy, lower, upper);
  const SampleOutcome drawn = sol.sample(c.samples, c.seed);
  run.diagnostics(drawn.diagnostics);
  const ForwardMap map = linear_map(a, "A=[-1/3 4/3]");
  run.check(pushforward_check(drawn.batch, map, fy, kAlpha, c.seed));

  const Matrix perp = null_space_rows(a);
  const Vector contour = drawn.batch.data * perp.transpose();
  const KsResult ks = ks_test_1d(std::vector<double>(contour.data(), contour.data() + contour.size()),
                                 [](double x) { return std::clamp(x, 0.0, 1.0); });
  std::ostringstream os;
  os << "D=" << ks.statistic;
  run.check(CheckReport::make("contour coordinate uniform on [l,u]", ks.p_value, kAlpha,
                              Comparison::kAtLeast, os.str()));

  Matrix a_aug(2, 2);
  a_aug << a, perp;
  const Matrix inv = a_aug.inverse();
  Vector lo = Vector::Constant(2, 1e300);
  Vector hi = Vector::Constant(2, -1e300);
  for (double t : {0.0, 1.0}) {
    for (double s : {0.0, 1.0}) {
      const Vector corner = inv * (Vector(2) << t, s).finished();
      lo = lo.cwiseMin(corner);
      hi = hi.cwiseMax(corner);
    }
  }
  run.write_samples(drawn.batch);
  run.write("grid", grid_2d(lo, hi, c.grid, {{"pdf", sol.density}}));
}

void run_bbe_polar(Run& run) {
  const RunConfig& c = run.config;
  const Density fy = make_beta(8.0, 12.0);
  const SipSolution sol = bbe_polar(fy);
  const SampleOutcome drawn = sol.sample(c.samples, c.seed);
  run.diagnostics(drawn.diagnostics);
  run.check(pushforward_check(drawn.batch, half_squared_radius_map(), fy, kAlpha, c.seed));
  run.check(normalization_check(sol.density));
  run.write_samples(drawn.batch);
  run.write("grid", grid_2d(Vector::Zero(2), Vector::Ones(2), c.grid, {{"pdf", sol.density}}));
}

void run_bjw_gauss_linear(Run& run) {
  const RunConfig& c = run.config;
  const GaussLinearCase g;
  const GaussianParams analytic = g.analytic();
  const Density closed = make_gaussian(analytic);
  const SipSolution sol = bjw_density(g.initial(), g.map(), g.observed(), g.pushforward());

  const GridSpec box = gaussian_box(analytic, 4.0, c.grid);
  run.check(grid_compare(sol.density, closed, box, 1e-8), "ratio form vs closed form");

  const double identity_gap =
      std::max(max_abs(g.a * analytic.mean - g.mu_y),
               max_abs(g.a * analytic.cov * g.a.transpose() - g.sigma_y));
  run.check(CheckReport::make("A mu = mu_y and A Sigma A^T = Sigma_y", identity_gap, 1e-10,
                              Comparison::kAtMost));

  const SampleOutcome drawn = bjw_rejection_sample(sol, c.samples, c.seed);
  run.diagnostics(drawn.diagnostics);
  const double m = static_cast<double>(drawn.batch.rows());
  for (int j = 0; j < 2; ++j) {
    run.check(within_se("sample mean theta" + std::to_string(j + 1),
                        drawn.batch.data.col(j).mean(), analytic.mean[j],
                        std::sqrt(analytic.cov(j, j) / m)));
  }
  run.check(pushforward_check(drawn.batch, g.map(), g.observed(), kAlpha, c.seed));

  run.write_samples(drawn.batch);
  run.write("grid", grid_2d(box.lower, box.upper, c.grid,
                            {{"analytic", closed}, {"ratio", sol.density}}));
}

void run_bjw_kde(Run& run) {
  const RunConfig& c = run.config;
  const GaussLinearCase g;
  const GaussianParams analytic = g.analytic();
  const Density closed = make_gaussian(analytic);
  const SipSolution sol = bjw_kde(g.initial(), g.map(), g.observed(), c.samples, c.seed);

  const GridSpec box = gaussian_box(analytic, 4.0, c.grid);
  run.check(grid_compare(sol.density, closed, box, 0.05), "KDE ratio vs closed form");

  const SampleOutcome drawn = bjw_rejection_sample(sol, c.samples, c.seed);
  run.diagnostics(drawn.diagnostics);
  run.check(pushforward_check(drawn.batch, g.map(), g.observed(), kAlpha, c.seed));

  run.write_samples(drawn.batch);
  run.write("grid", grid_2d(box.lower, box.upper, c.grid,
                            {{"analytic", closed}, {"kde_ratio", sol.density}}));
}

void run_bjw_sequential(Run& run) {
  const RunConfig& c = run.config;
  const GaussLinearCase g;
  const Density fy1 = gaussian1(0.5, 0.5);
  const Density fy2 = g.observed();
  const GridSpec box = gaussian_box(g.analytic(), 4.0, c.grid);

  const SequentialUpdate forward =
      bjw_sequential_update(g.initial(), g.map(), g.pushforward(), fy1, fy2);
  run.check(grid_compare(forward.twice.density, forward.single.density, box, 1e-8),
            "double update vs single update");
  const SequentialUpdate swapped =
      bjw_sequential_update(g.initial(), g.map(), g.pushforward(), fy2, fy1);
  run.check(grid_compare(swapped.twice.density, swapped.single.density, box, 1e-8),
            "swapped order depends only on the last update");

  const SampleOutcome drawn = bjw_rejection_sample(forward.single, c.samples, c.seed);
  run.diagnostics(drawn.diagnostics);
  run.check(pushforward_check(drawn.batch, g.map(), fy2, kAlpha, c.seed));

  run.write_samples(drawn.batch);
  run.write("grid", grid_2d(box.lower, box.upper, c.grid,
                            {{"single", forward.single.density},
                             {"double", forward.twice.density}}));
}

StochasticMapSpec replicate_spec(int n) {
  StochasticMapSpec spec;
  spec.n = n;
  spec.mu_y = Vector(n);
  for (int i = 0; i < n; ++i) spec.mu_y[i] = 1.0 + 0.5 * ((i % 3) - 1);
  spec.sigma_y2 = 1.0;
  spec.mu0 = 0.0;
  spec.sigma02 = 1.0;
  spec.sigma_eps2 = 1.0;
  return spec;
}

GaussianParams replicate_generic(const StochasticMapSpec& spec) {
  Matrix sigma_theta = Matrix::Identity(spec.n + 1, spec.n + 1) * spec.sigma_eps2;
  sigma_theta(0, 0) = spec.sigma02;
  Vector mu_theta = Vector::Zero(spec.n + 1);
  mu_theta[0] = spec.mu0;
  return bjw_gaussian_linear(stochastic_map_design(spec.n), spec.mu_y,
                             spec.sigma_y2 * Matrix::Identity(spec.n, spec.n), mu_theta,
                             sigma_theta);
}

void run_stochastic_map_mean(Run& run) {
  const RunConfig& c = run.config;
  require(c.n >= 1, ErrorCode::kInvalidArgument, "--n must be >= 1");
  run.param("n", c.n);

  double gap = 0.0;
  std::vector<int> ns{1, 2, 3, 4, 5, 6, 7, 8};
  if (std::find(ns.begin(), ns.end(), c.n) == ns.end()) ns.push_back(c.n);
  for (int n : ns) {
    const StochasticMapSpec spec = replicate_spec(n);
    const GaussianParams literal = stochastic_map_mean_solution(spec);
    const GaussianParams generic = replicate_generic(spec);
    gap = std::max({gap, max_abs(literal.mean - generic.mean),
                    max_abs(literal.cov - generic.cov)});
  }
  run.check(CheckReport::make("c1..c7 form vs generic formula", gap, 1e-10,
                              Comparison::kAtMost));

  Table table;
  table.columns = {"n", "mean_M", "var_M", "n_var_M", "n_mean_gap"};
  double var_lo = 1e300, var_hi = 0.0, gap_lo = 1e300, gap_hi = 0.0;
  for (int n : {1, 2, 3, 4, 5, 6, 7, 8, 10, 100, 1000}) {
    const StochasticMapSpec spec = replicate_spec(n);
    const GaussianParams sol = stochastic_map_mean_solution(spec);
    const double nv = n * sol.cov(0, 0);
    const double ng = n * std::abs(sol.mean[0] - spec.mu_y.mean());
    table.rows.push_back({static_cast<double>(n), sol.mean[0], sol.cov(0, 0), nv, ng});
    if (n >= 10) {
      var_lo = std::min(var_lo, nv);
      var_hi = std::max(var_hi, nv);
      gap_lo = std::min(gap_lo, ng);
      gap_hi = std::max(gap_hi, ng);
    }
  }
  std::ostringstream vs, ms;
  vs << "n*var(M) in [" << var_lo << ", " << var_hi << "] over n in {10,100,1000}";
  ms << "n*|mean(M)-mean(mu_y)| in [" << gap_lo << ", " << gap_hi << "]";
  run.check(CheckReport::make("var(M) ~ 1/n", var_hi / var_lo - 1.0, 0.2,
                              Comparison::kAtMost, vs.str()));
  run.check(CheckReport::make("mean(M) - mean(mu_y) = O(1/n)", gap_hi / gap_lo - 1.0, 0.2,
                              Comparison::kAtMost, ms.str()));

  const StochasticMapSpec spec = replicate_spec(c.n);
  const GaussianParams sol = stochastic_map_mean_solution(spec);
  if (c.n >= 2) {
    run.check(CheckReport::make("Sigma dense", sol.cov.cwiseAbs().minCoeff(),
                                std::numeric_limits<double>::min(), Comparison::kAtLeast));
  }
  const SampleBatch batch =
      make_gaussian(sol).sample(c.samples, c.seed, default_labels(c.n + 1, "theta"));
  const Density fy = gaussian(spec.mu_y, spec.sigma_y2 * Matrix::Identity(c.n, c.n));
  run.check(pushforward_check(batch, linear_map(stochastic_map_design(c.n), "[1 | I]"), fy,
                              kAlpha, c.seed));

  run.write_samples(batch);
  run.write("grid", table);
}

void run_cov_linear_mvn(Run& run) {
  const RunConfig& c = run.config;
  Matrix a(1, 2);
  a << 2.0, 1.0;
  Matrix a_aug(2, 2);
  a_aug << 2.0, 1.0, 0.0, 1.0;
  const GaussianParams y_aug{(Vector(2) << 1.0, 0.0).finished(),
                             (Matrix(2, 2) << 0.5, 0.0, 0.0, 1.0).finished()};
  const GaussianParams analytic = cov_linear_gaussian(a_aug, y_aug);
  const Density closed = make_gaussian(analytic);

  const double round_trip = std::max(max_abs(a_aug * analytic.mean - y_aug.mean),
                                     max_abs(a_aug * analytic.cov * a_aug.transpose() - y_aug.cov));
  run.check(CheckReport::make("push forward then pull back", round_trip, 1e-12,
                              Comparison::kAtMost));

  const ForwardMap map = linear_map(a, "A=[2 1]");
  const Density fy = gaussian1(1.0, 0.5);
  const SipSolution sol = intuitive_sample(map, fy, gaussian1(0.0, 1.0), c.samples, c.seed);
  run.diagnostics(sol.diagnostics);
  const GridSpec box = gaussian_box(analytic, 4.0, c.grid);
  run.check(grid_compare(sol.density, closed, box, 1e-10), "intuitive density vs closed form");
  const SipSolution augmented = cov_exact(linear_map(a_aug, "A_aug"), make_gaussian(y_aug));
  run.check(grid_compare(augmented.density, closed, box, 1e-10),
            "augmented CoV density vs closed form");

  const SampleBatch& batch = *sol.samples;
  const double m = static_cast<double>(batch.rows());
  for (int j = 0; j < 2; ++j) {
    run.check(within_se("sample mean theta" + std::to_string(j + 1), batch.data.col(j).mean(),
                        analytic.mean[j], std::sqrt(analytic.cov(j, j) / m)));
  }
  run.check(pushforward_check(batch, map, fy, kAlpha, c.seed));

  run.write_samples(batch);
  run.write("grid", grid_2d(box.lower, box.upper, c.grid,
                            {{"analytic", closed}, {"intuitive", sol.density}}));
}

void run_regression_compare(Run& run) {
  const RunConfig& c = run.config;
  require(c.sigma > 0.0, ErrorCode::kDomain, "--sigma must be positive");
  run.param("sigma", c.sigma);
  run.param("xstar", c.xstar);
  const double s2 = c.sigma * c.sigma;
  const double tol = 1e-12 * std::max(1.0, s2 * (1.0 + c.xstar * c.xstar));

  Matrix x(2, 2);
  x << 1.0, -1.0, 1.0, 1.0;
  const Vector y = (Vector(2) << -1.0, 1.0).finished();
  const GaussianParams y_dist{y, s2 * Matrix::Identity(2, 2)};
  const GaussianParams cov = cov_linear_gaussian(x, y_dist);
  const GaussianParams post = flat_prior_regression_posterior(x, y, s2);

  const Vector expected_mean = (Vector(2) << 0.0, 1.0).finished();
  const Matrix expected_cov = 0.5 * s2 * Matrix::Identity(2, 2);
  run.check(CheckReport::make("CoV solution = N((0,1), sigma^2/2 I)",
                              std::max(max_abs(cov.mean - expected_mean),
                                       max_abs(cov.cov - expected_cov)),
                              tol, Comparison::kAtMost));
  run.check(CheckReport::make("flat-prior posterior = CoV solution",
                              std::max(max_abs(post.mean - cov.mean), max_abs(post.cov - cov.cov)),
                              tol, Comparison::kAtMost));

  double pred_gap = 0.0;
  for (double xs : {0.0, 1.0, 3.0, c.xstar}) {
    const GaussianParams pred = regression_predictive(cov, xs);
    pred_gap = std::max({pred_gap, std::abs(pred.mean[0] - xs),
                         std::abs(pred.cov(0, 0) - 0.5 * s2 * (1.0 + xs * xs))});
  }
  run.check(CheckReport::make("predictive = N(x*, sigma^2/2 (1 + x*^2))", pred_gap, tol,
                              Comparison::kAtMost));

  Matrix x4(4, 2);
  x4 << 1.0, -1.0, 1.0, 1.0, 1.0, -1.0, 1.0, 1.0;
  const Vector y4 = (Vector(4) << -1.0, 1.0, -1.0, 1.0).finished();
  const GaussianParams post4 = flat_prior_regression_posterior(x4, y4, s2);
  run.check(CheckReport::make("replicated design variance = sigma^2/4",
                              max_abs(post4.cov - 0.25 * s2 * Matrix::Identity(2, 2)), tol,
                              Comparison::kAtMost));

  const ForwardMap map = linear_map(x, "X");
  const Density fy = make_gaussian(y_dist);
  const SipSolution sol = cov_exact(map, fy);
  const SampleOutcome drawn = sol.sample(c.samples, c.seed);
  run.diagnostics(drawn.diagnostics);
  run.check(pushforward_check(drawn.batch, map, fy, kAlpha, c.seed));

  const GaussianParams pred = regression_predictive(cov, c.xstar);
  Table summary;
  summary.columns = {"quantity", "mean_1", "mean_2", "cov_11", "cov_12", "cov_22"};
  const auto add = [&](const std::string& name, const GaussianParams& g) {
    summary.rows.push_back({name, g.mean[0], g.mean[1], g.cov(0, 0), g.cov(0, 1), g.cov(1, 1)});
  };
  add("cov_solution", cov);
  add("flat_prior_posterior", post);
  add("replicated_posterior_n4", post4);
  summary.rows.push_back({std::string("predictive_at_xstar"), pred.mean[0], std::string(),
                          pred.cov(0, 0), std::string(), std::string()});
  run.write("summary", summary);

  Table grid;
  grid.columns = {"x_star", "predictive_mean", "predictive_var"};
  const Vector xs = linspace(-3.0, 3.0, c.grid);
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    const GaussianParams p = regression_predictive(cov, xs[i]);
    grid.rows.push_back({xs[i], p.mean[0], p.cov(0, 0)});
  }
  run.write_samples(drawn.batch);
  run.write("grid", grid);
}

void run_intuitive_demo(Run& run) {
  const RunConfig& c = run.config;
  const ForwardMap map = sum_map();
  const Density fy = gaussian1(0.0, 2.0);
  const Density aux = gaussian1(0.0, 1.0);
  const SipSolution sol = intuitive_sample(map, fy, aux, c.samples, c.seed);
  run.diagnostics(sol.diagnostics);
  const SampleBatch& batch = *sol.samples;
  const double m = static_cast<double>(batch.rows());
  const Vector t1 = batch.data.col(0);
  const Vector t2 = batch.data.col(1);

  run.check(within_se("var(theta1) = 3", sample_covariance(t1, t1), 3.0,
                      3.0 * std::sqrt(2.0 / (m - 1.0))));
  run.check(within_se("cov(theta1, theta2) = -1", sample_covariance(t1, t2), -1.0,
                      2.0 / std::sqrt(m)));
  run.check(pushforward_check(batch, map, fy, kAlpha, c.seed));
  const Vector g = t1 + t2;
  const double corr = sample_correlation(g, t2);
  std::ostringstream os;
  os << "corr=" << corr;
  run.check(CheckReport::make("|corr(g, theta2)| < 3/sqrt(M)", std::abs(corr),
                              3.0 / std::sqrt(m), Comparison::kAtMost, os.str()));

  // Negative control: doubling the observable variance must be detected.
  const SipSolution wrong = intuitive_sample(map, gaussian1(0.0, 4.0), aux, c.samples,
                                             mix_seed(c.seed, 1));
  CheckReport neg = pushforward_check(*wrong.samples, map, fy, kAlpha, c.seed);
  run.check(CheckReport::make("negative control rejected", neg.statistic, kAlpha,
                              Comparison::kAtMost, neg.details));

  const GridSpec box{Vector::Constant(2, -4.0 * std::sqrt(3.0)),
                     Vector::Constant(2, 4.0 * std::sqrt(3.0)), c.grid};
  run.write_samples(batch);
  run.write("grid", grid_2d(box.lower, box.upper, c.grid, {{"pdf", sol.density}}));
}

using ExampleFn = void (*)(Run&);

const std::vector<std::pair<std::string, ExampleFn>>& registry() {
  static const std::vector<std::pair<std::string, ExampleFn>> r{
      {"two-to-one", run_two_to_one},
      {"bbe-linear", run_bbe_linear},
      {"bbe-polar", run_bbe_polar},
      {"bjw-gauss-linear", run_bjw_gauss_linear},
      {"bjw-kde", run_bjw_kde},
      {"bjw-sequential", run_bjw_sequential},
      {"stochastic-map-mean", run_stochastic_map_mean},
      {"cov-linear-mvn", run_cov_linear_mvn},
      {"regression-compare", run_regression_compare},
      {"intuitive-demo", run_intuitive_demo},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& registered_examples() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

void RunConfig::validate() const {
  const auto& names = registered_examples();
  if (std::find(names.begin(), names.end(), example) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    fail(ErrorCode::kUnknownExample, "unknown example '" + example + "'; registered: " + list);
  }
  require(samples >= 1, ErrorCode::kInvalidArgument, "--samples must be >= 1");
  require(grid >= 2, ErrorCode::kInvalidArgument, "--grid must be >= 2");
  require(format == "csv" || format == "json", ErrorCode::kInvalidArgument,
          "--format must be csv or json");
}

ExampleResult run_example(const RunConfig& config) {
  config.validate();
  Run run(config);
  for (const auto& [name, fn] : registry()) {
    if (name == config.example) fn(run);
  }
  run.finish();
  return std::move(run.result);
}

}  // namespace siplab
