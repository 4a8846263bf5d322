#include "solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace siplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kPilotSeed = 0x5049503131ULL;

Vector draw_start(const Support& domain, int q, const Vector& tail, Rng& rng) {
  const int p = domain.dim();
  Vector theta(p);
  theta.tail(p - q) = tail;
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (int i = 0; i < q; ++i) {
      const double lo = domain.lower[i];
      const double hi = domain.upper[i];
      if (std::isfinite(lo) && std::isfinite(hi)) {
        theta[i] = lo + uniform01(rng) * (hi - lo);
      } else {
        theta[i] = standard_normal(rng);
      }
    }
    if (domain.contains(theta)) break;
  }
  return theta.head(q);
}

std::string start_description(const Support& domain, int q) {
  std::ostringstream os;
  os << "uniform on the domain box of theta_1:" << q
     << " (standard normal on unbounded coordinates)";
  (void)domain;
  return os.str();
}

// One Newton solve with up to `retries` fresh starts; y and tail stay fixed so
// that conditional on success the row keeps its intended distribution.
RowOutcome solve_row(const ForwardMap& map, const Vector& y, const Vector& tail,
                     int retries, const NewtonOptions& options, Rng& rng) {
  const int p = map.input_dim();
  const int q = map.output_dim();
  RowOutcome out;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    const Vector start = draw_start(map.domain(), q, tail, rng);
    const NewtonResult r = newton_solve(map, y, tail, start, options);
    if (r.converged) {
      Vector theta(p);
      theta.head(q) = r.head;
      theta.tail(p - q) = tail;
      out.theta = std::move(theta);
      return out;
    }
    ++out.failures;
  }
  return out;
}

void check_existence(const ForwardMap& map, const Density& observed,
                     const std::optional<Density>& aux, int pilot_draws, int retries,
                     const NewtonOptions& options) {
  const std::uint64_t root = mix_seed(kPilotSeed, stream::kPilot);
  for (int i = 0; i < pilot_draws; ++i) {
    Rng rng = make_stream(root, static_cast<std::uint64_t>(i));
    const Vector y = observed.draw(rng);
    const Vector tail = aux ? aux->draw(rng) : Vector(0);
    if (!solve_row(map, y, tail, retries, options, rng).theta) {
      fail(ErrorCode::kNoSolution,
           map.name() + ": no solution found for pilot draw y = " + format_vector(y) +
               "; the range of g may not contain the support of f_Y");
    }
  }
}

Density density_from_rows(int dim, Support support,
                          std::function<double(const Vector&)> log_pdf,
                          const RowSampler& sampler) {
  FunctionDensitySpec spec;
  spec.dim = dim;
  spec.support = std::move(support);
  spec.log_pdf = std::move(log_pdf);
  if (sampler) {
    spec.draw = [sampler](Rng& rng) -> Vector {
      RowOutcome r = sampler(rng);
      if (!r.theta) fail(ErrorCode::kConvergence, "solution sampler failed to converge");
      return *r.theta;
    };
  }
  return make_function_density(std::move(spec));
}

double log_abs_det(const Matrix& m) {
  const double det = m.determinant();
  return det == 0.0 ? -kInf : std::log(std::abs(det));
}

}  // namespace

const char* to_string(SolverMethod method) {
  switch (method) {
    case SolverMethod::kCoV: return "CoV";
    case SolverMethod::kCoVMixture: return "CoV-mixture";
    case SolverMethod::kIntuitive: return "Intuitive";
    case SolverMethod::kBBE: return "BBE";
    case SolverMethod::kBJWAnalytic: return "BJW-analytic";
    case SolverMethod::kBJWKde: return "BJW-KDE";
  }
  return "unknown";
}

SampleOutcome SipSolution::sample(Eigen::Index count, std::uint64_t seed) const {
  require(sampler_available(), ErrorCode::kInvalidArgument,
          std::string(to_string(method)) +
              " solution has no direct sampler; compare densities on a grid or "
              "use bjw_rejection_sample");
  require(count >= 0, ErrorCode::kInvalidArgument, "negative sample count");
  const auto n = static_cast<std::size_t>(count);
  std::vector<RowOutcome> rows(n);
  const std::uint64_t root = mix_seed(seed, stream::kRows);
  parallel_for(n, [&](std::size_t i) {
    Rng rng = make_stream(root, i);
    rows[i] = row_sampler(rng);
  });

  SampleOutcome out;
  out.diagnostics = diagnostics;
  out.diagnostics.seed = seed;
  out.diagnostics.rows_requested = n;
  out.diagnostics.solver_failures = 0;
  out.diagnostics.dropped_rows = 0;
  std::size_t kept = 0;
  for (const auto& r : rows) {
    out.diagnostics.solver_failures += r.failures;
    if (r.theta) ++kept;
  }
  out.batch.seed = seed;
  out.batch.labels = labels.empty() ? default_labels(density.dim(), "theta") : labels;
  out.batch.data.resize(static_cast<Eigen::Index>(kept), density.dim());
  Eigen::Index row = 0;
  for (const auto& r : rows) {
    if (r.theta) {
      out.batch.data.row(row++) = r.theta->transpose();
    } else {
      ++out.diagnostics.dropped_rows;
    }
  }
  out.diagnostics.rows_returned = kept;
  const std::size_t attempts = kept + out.diagnostics.solver_failures;
  if (attempts > 0 &&
      static_cast<double>(out.diagnostics.solver_failures) > 0.05 * static_cast<double>(attempts)) {
    std::ostringstream os;
    os << "solver failure rate "
       << static_cast<double>(out.diagnostics.solver_failures) / static_cast<double>(attempts)
       << " exceeds 5%";
    out.diagnostics.warnings.push_back(os.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Change of variables

SipSolution cov_exact(const ForwardMap& map, const Density& observed) {
  require(map.input_dim() == map.output_dim(), ErrorCode::kDimension,
          "cov_exact needs p = q; use intuitive_sample or bjw_density when p > q");
  require(observed.dim() == map.output_dim(), ErrorCode::kDimension,
          "observable density does not match the map output");
  require(observed.has_sampler(), ErrorCode::kInvalidArgument,
          "observable density needs a sampler");
  const IntuitiveOptions options;
  check_existence(map, observed, std::nullopt, options.pilot_draws, options.retries,
                  options.newton);

  SipSolution sol;
  sol.method = SolverMethod::kCoV;
  sol.labels = default_labels(map.input_dim(), "theta");
  sol.diagnostics.start_distribution = start_description(map.domain(), map.output_dim());
  sol.row_sampler = [map, observed, options](Rng& rng) {
    const Vector y = observed.draw(rng);
    return solve_row(map, y, Vector(0), options.retries, options.newton, rng);
  };
  sol.density = density_from_rows(
      map.input_dim(), map.domain(),
      [map, observed](const Vector& theta) {
        return observed.log_pdf(map.eval_unchecked(theta)) +
               log_abs_det(map.jacobian(theta));
      },
      sol.row_sampler);
  return sol;
}

SipSolution cov_mixture_family(const ForwardMap& map, const Density& observed,
                               const DomainPartition& partition,
                               const std::vector<double>& weights) {
  const auto& branches = partition.branches;
  require(map.input_dim() == map.output_dim(), ErrorCode::kDimension,
          "cov_mixture_family needs p = q");
  require(observed.dim() == map.output_dim(), ErrorCode::kDimension,
          "observable density does not match the map output");
  require(!branches.empty(), ErrorCode::kInvalidArgument, "partition has no branches");
  require(weights.size() == branches.size(), ErrorCode::kInvalidArgument,
          "partition has " + std::to_string(branches.size()) + " branches but " +
              std::to_string(weights.size()) + " weights were given");
  for (double w : weights) {
    require(w >= 0.0 && w <= 1.0, ErrorCode::kInvalidArgument,
            "branch weights must lie in [0, 1]");
  }
  require(observed.has_sampler(), ErrorCode::kInvalidArgument,
          "observable density needs a sampler");

  for (const Vector& probe : domain_probes(map.domain(), 256, 0x50415254ULL)) {
    const auto hits = std::count_if(branches.begin(), branches.end(),
                                    [&](const DomainBranch& b) { return b.contains(probe); });
    require(hits <= 1, ErrorCode::kInvalidArgument,
            "partition branches overlap at " + format_vector(probe));
  }

  const auto candidates = [branches](const Vector& y) {
    std::vector<std::pair<std::size_t, Vector>> out;
    for (std::size_t i = 0; i < branches.size(); ++i) {
      Vector theta = branches[i].inverse(y);
      if (branches[i].contains(theta)) out.emplace_back(i, std::move(theta));
    }
    return out;
  };

  // Every observable value must be reached with total weight 1.
  const std::uint64_t root = mix_seed(kPilotSeed, stream::kPilot);
  for (int i = 0; i < 256; ++i) {
    Rng rng = make_stream(root, static_cast<std::uint64_t>(i));
    const Vector y = observed.draw(rng);
    double total = 0.0;
    for (const auto& [idx, theta] : candidates(y)) total += weights[idx];
    if (std::abs(total - 1.0) > 1e-12) {
      std::ostringstream os;
      os << "branch weights reaching y = " << format_vector(y) << " sum to " << total
         << ", not 1";
      fail(ErrorCode::kInvalidArgument, os.str());
    }
  }

  SipSolution sol;
  sol.method = SolverMethod::kCoVMixture;
  sol.labels = default_labels(map.input_dim(), "theta");
  sol.diagnostics.start_distribution = "exact local inverses, branch chosen by weight";
  sol.row_sampler = [observed, candidates, weights](Rng& rng) {
    RowOutcome out;
    const Vector y = observed.draw(rng);
    const auto options = candidates(y);
    if (options.empty()) return out;
    const double u = uniform01(rng);
    double acc = 0.0;
    for (const auto& [idx, theta] : options) {
      acc += weights[idx];
      if (u < acc) {
        out.theta = theta;
        return out;
      }
    }
    // Rounding in the running sum: take the last branch with weight.
    for (auto it = options.rbegin(); it != options.rend(); ++it) {
      if (weights[it->first] > 0.0) {
        out.theta = it->second;
        break;
      }
    }
    return out;
  };
  sol.density = density_from_rows(
      map.input_dim(), map.domain(),
      [map, observed, branches, weights](const Vector& theta) {
        double w = 0.0;
        for (std::size_t i = 0; i < branches.size(); ++i) {
          if (branches[i].contains(theta)) {
            w = weights[i];
            break;
          }
        }
        if (w == 0.0) return -kInf;
        return std::log(w) + observed.log_pdf(map.eval_unchecked(theta)) +
               log_abs_det(map.jacobian(theta));
      },
      sol.row_sampler);
  return sol;
}

TwoToOneProblem two_to_one_problem(double eps) {
  require(eps > 0.0 && eps <= 1.0, ErrorCode::kDomain,
          "two-to-one domain needs 0 < eps <= 1");
  auto neg_root = [](const Vector& y) -> Vector {
    return Vector::Constant(1, -std::sqrt(std::max(0.0, y[0])));
  };
  auto pos_root = [](const Vector& y) -> Vector {
    return Vector::Constant(1, std::sqrt(std::max(0.0, y[0])));
  };
  DomainPartition partition;
  partition.branches.push_back(
      {"(-eps,0)", [eps](const Vector& t) { return t[0] > -eps && t[0] < 0.0; }, neg_root});
  const double pos_hi = eps < 1.0 ? eps : 1.0;
  partition.branches.push_back(
      {"(0,eps)", [pos_hi](const Vector& t) { return t[0] > 0.0 && t[0] < pos_hi; }, pos_root});
  if (eps < 1.0) {
    partition.branches.push_back(
        {"(eps,1)", [eps](const Vector& t) { return t[0] >= eps && t[0] < 1.0; }, pos_root});
  }
  return TwoToOneProblem{square_map(-eps, 1.0), std::move(partition)};
}

std::vector<double> two_to_one_weights(double eps, double w) {
  if (eps < 1.0) return {w, 1.0 - w, 1.0};
  return {w, 1.0 - w};
}

// ---------------------------------------------------------------------------
// Intuitive solutions

SipSolution intuitive_sample(const ForwardMap& map, const Density& observed,
                             const std::optional<Density>& aux, Eigen::Index count,
                             std::uint64_t seed, const IntuitiveOptions& options) {
  const int p = map.input_dim();
  const int q = map.output_dim();
  require(observed.dim() == q, ErrorCode::kDimension,
          "observable density does not match the map output");
  require(observed.has_sampler(), ErrorCode::kInvalidArgument,
          "observable density needs a sampler");
  if (p > q) {
    require(aux.has_value() && aux->dim() == p - q, ErrorCode::kDimension,
            "auxiliary density must have dimension p - q = " + std::to_string(p - q));
    require(aux->has_sampler(), ErrorCode::kInvalidArgument,
            "auxiliary density needs a sampler");
  } else {
    require(!aux.has_value(), ErrorCode::kDimension,
            "p = q leaves no auxiliary coordinates");
  }
  check_existence(map, observed, aux, options.pilot_draws, options.retries, options.newton);

  SipSolution sol;
  sol.method = SolverMethod::kIntuitive;
  sol.labels = default_labels(p, "theta");
  sol.diagnostics.start_distribution = start_description(map.domain(), q);
  sol.row_sampler = [map, observed, aux, options](Rng& rng) {
    const Vector y = observed.draw(rng);
    const Vector tail = aux ? aux->draw(rng) : Vector(0);
    return solve_row(map, y, tail, options.retries, options.newton, rng);
  };
  sol.density = density_from_rows(
      p, map.domain(),
      [map, observed, aux, p, q](const Vector& theta) {
        double lp = observed.log_pdf(map.eval_unchecked(theta)) +
                    log_abs_det(map.jacobian(theta).leftCols(q));
        if (aux) lp += aux->log_pdf(theta.tail(p - q));
        return lp;
      },
      sol.row_sampler);

  SampleOutcome drawn = sol.sample(count, seed);
  sol.diagnostics = drawn.diagnostics;
  sol.samples = std::move(drawn.batch);
  return sol;
}

// ---------------------------------------------------------------------------
// BBE

SipSolution bbe_linear(const Matrix& a, const Density& observed, const Vector& lower,
                       const Vector& upper) {
  const Eigen::Index k = a.cols() - a.rows();
  require(lower.size() == k && upper.size() == k, ErrorCode::kDimension,
          "contour bounds must have p - q entries");
  for (Eigen::Index i = 0; i < k; ++i) {
    require(std::isfinite(lower[i]) && std::isfinite(upper[i]) && lower[i] < upper[i],
            ErrorCode::kDomain, "contour bounds must be finite with lower < upper");
  }
  return bbe_linear(a, observed, [lower](const Vector&) { return lower; },
                    [upper](const Vector&) { return upper; });
}

SipSolution bbe_linear(const Matrix& a, const Density& observed, ContourBound lower,
                       ContourBound upper) {
  const int q = static_cast<int>(a.rows());
  const int p = static_cast<int>(a.cols());
  require(q >= 1 && p >= q, ErrorCode::kDimension, "A must be q x p with p >= q");
  require(observed.dim() == q, ErrorCode::kDimension,
          "observable density does not match A");
  require(numerical_row_rank(a) == q, ErrorCode::kRankDeficient,
          "A does not have full row rank");
  require(observed.has_sampler(), ErrorCode::kInvalidArgument,
          "observable density needs a sampler");

  const Matrix perp = null_space_rows(a);
  Matrix a_aug(p, p);
  a_aug.topRows(q) = a;
  if (p > q) a_aug.bottomRows(p - q) = perp;
  const Eigen::PartialPivLU<Matrix> lu(a_aug);
  const double log_det = std::log(std::abs(a_aug.determinant()));

  Support support = Support::whole(p);
  support.indicator = [a, perp, observed, lower, upper, p, q](const Vector& theta) {
    const Vector t = a * theta;
    if (!observed.support().contains(t)) return false;
    if (p == q) return true;
    const Vector c = perp * theta;
    const Vector lo = lower(t);
    const Vector hi = upper(t);
    return (c.array() >= lo.array()).all() && (c.array() <= hi.array()).all();
  };

  SipSolution sol;
  sol.method = SolverMethod::kBBE;
  sol.labels = default_labels(p, "theta");
  sol.diagnostics.start_distribution = "direct: y ~ f_Y, c ~ Unif(l, u)";
  sol.row_sampler = [observed, lu, lower, upper, p, q](Rng& rng) {
    RowOutcome out;
    Vector tc(p);
    tc.head(q) = observed.draw(rng);
    if (p > q) {
      const Vector lo = lower(tc.head(q));
      const Vector hi = upper(tc.head(q));
      for (int i = 0; i < p - q; ++i) tc[q + i] = lo[i] + uniform01(rng) * (hi[i] - lo[i]);
    }
    out.theta = lu.solve(tc);
    return out;
  };
  sol.density = density_from_rows(
      p, std::move(support),
      [a, observed, lower, upper, log_det, p, q](const Vector& theta) {
        const Vector t = a * theta;
        double lp = observed.log_pdf(t) + log_det;
        if (p > q) lp -= (upper(t) - lower(t)).array().log().sum();
        return lp;
      },
      sol.row_sampler);
  return sol;
}

std::pair<double, double> polar_contour_arc(double r) {
  if (r <= 1.0) return {0.0, M_PI / 2.0};
  const double s = std::sqrt(std::max(0.0, r * r - 1.0));
  return {std::atan2(s, 1.0), std::atan2(1.0, s)};
}

double polar_contour_density(double phi, double r) {
  if (!(r > 0.0) || r > std::sqrt(2.0)) return 0.0;
  const auto [lo, hi] = polar_contour_arc(r);
  const double width = hi - lo;
  // Closed interval: boundary angles have measure zero, and keeping them
  // makes grid quadrature on the unit square unbiased at the axes.
  if (!(width > 0.0) || phi < lo || phi > hi) return 0.0;
  return 1.0 / width;
}

SipSolution bbe_polar(const Density& observed) {
  require(observed.dim() == 1, ErrorCode::kDimension,
          "polar example needs a one-dimensional observable density");
  require(observed.support().lower[0] >= 0.0 && observed.support().upper[0] <= 1.0,
          ErrorCode::kDomain,
          "observable support must lie in (0, 1], the range of g on the unit square");
  require(observed.has_sampler(), ErrorCode::kInvalidArgument,
          "observable density needs a sampler");
  const ForwardMap map = half_squared_radius_map();

  auto pdf = [observed](const Vector& theta) {
    const double r = std::hypot(theta[0], theta[1]);
    const double cond = polar_contour_density(std::atan2(theta[1], theta[0]), r);
    if (cond == 0.0) return 0.0;
    return observed.pdf(Vector::Constant(1, 0.5 * r * r)) * cond;
  };

  SipSolution sol;
  sol.method = SolverMethod::kBBE;
  sol.labels = default_labels(2, "theta");
  sol.diagnostics.start_distribution = "direct: y ~ f_Y, r = sqrt(2y), phi uniform on arc";
  sol.row_sampler = [observed](Rng& rng) {
    RowOutcome out;
    const double y = observed.draw(rng)[0];
    const double r = std::sqrt(2.0 * y);
    const auto [lo, hi] = polar_contour_arc(r);
    const double phi = lo + uniform01(rng) * (hi - lo);
    Vector theta(2);
    theta << std::clamp(r * std::cos(phi), std::numeric_limits<double>::min(), 1.0),
        std::clamp(r * std::sin(phi), std::numeric_limits<double>::min(), 1.0);
    out.theta = std::move(theta);
    return out;
  };

  FunctionDensitySpec spec;
  spec.dim = 2;
  spec.support = map.domain();
  spec.pdf = pdf;
  spec.log_pdf = [pdf](const Vector& theta) { return std::log(pdf(theta)); };
  spec.draw = [sampler = sol.row_sampler](Rng& rng) { return *sampler(rng).theta; };
  sol.density = make_function_density(std::move(spec));
  return sol;
}

}  // namespace siplab
