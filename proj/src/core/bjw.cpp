#include "solvers.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>

namespace siplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log of fY(g(theta)) / pushforward(g(theta)); -inf when theta leaves the map
// domain or the numerator vanishes.
double log_ratio(const BjwParts& parts, const Vector& theta) {
  if (!parts.map.domain().contains(theta)) return -kInf;
  const Vector y = parts.map.eval_unchecked(theta);
  const double num = parts.observed.log_pdf(y);
  if (num == -kInf) return -kInf;
  const double den = parts.pushforward.log_pdf(y);
  if (den == -kInf) {
    fail(ErrorCode::kPredictability,
         "pushforward density vanishes at g(theta) = " + format_vector(y) +
             " where the observable density is positive");
  }
  return num - den;
}

}  // namespace

SipSolution bjw_density(const Density& initial, const ForwardMap& map,
                        const Density& observed, const Density& pushforward,
                        SolverMethod method) {
  require(initial.dim() == map.input_dim(), ErrorCode::kDimension,
          "initial density does not match the map input");
  require(observed.dim() == map.output_dim() && pushforward.dim() == map.output_dim(),
          ErrorCode::kDimension, "observable or pushforward density does not match the map output");

  BjwParts parts{initial, map, observed, pushforward};

  Support support = initial.support();
  support.indicator = [initial, map](const Vector& theta) {
    return initial.support().contains(theta) && map.domain().contains(theta);
  };

  FunctionDensitySpec spec;
  spec.dim = map.input_dim();
  spec.support = std::move(support);
  spec.log_pdf = [parts](const Vector& theta) {
    const double prior = parts.initial.log_pdf(theta);
    if (prior == -kInf) return -kInf;
    return prior + log_ratio(parts, theta);
  };

  SipSolution sol;
  sol.method = method;
  sol.labels = default_labels(map.input_dim(), "theta");
  sol.diagnostics.start_distribution = "ratio form; sample by rejection from the initial density";
  sol.density = make_function_density(std::move(spec));
  sol.bjw = std::move(parts);
  return sol;
}

SipSolution bjw_kde(const Density& initial, const ForwardMap& map, const Density& observed,
                    Eigen::Index pilot_count, std::uint64_t seed) {
  require(initial.has_sampler(), ErrorCode::kInvalidArgument,
          "initial density needs a sampler to estimate its pushforward");
  const SampleBatch pilot = initial.sample(pilot_count, mix_seed(seed, stream::kPilot));
  SampleBatch images;
  images.seed = pilot.seed;
  images.labels = default_labels(map.output_dim(), "y");
  images.data.resize(pilot.rows(), map.output_dim());
  for (Eigen::Index i = 0; i < pilot.rows(); ++i) {
    images.data.row(i) = map.eval(pilot.data.row(i).transpose()).transpose();
  }
  SipSolution sol =
      bjw_density(initial, map, observed, fit_kde(images), SolverMethod::kBJWKde);
  sol.diagnostics.seed = seed;
  return sol;
}

void check_predictability(const BjwParts& parts, std::uint64_t seed, int probes) {
  const std::uint64_t root = mix_seed(seed, stream::kPilot);
  for (int i = 0; i < probes; ++i) {
    Rng rng = make_stream(root, static_cast<std::uint64_t>(i));
    const Vector y = parts.observed.draw(rng);
    if (!(parts.pushforward.pdf(y) > 0.0)) {
      fail(ErrorCode::kPredictability,
           "predictability fails: the observable density puts mass at y = " + format_vector(y) +
               " where the pushforward of the initial density is zero");
    }
  }
}

SampleOutcome bjw_rejection_sample(const SipSolution& solution, Eigen::Index count,
                                   std::uint64_t seed, const RejectionOptions& options) {
  require(solution.bjw.has_value(), ErrorCode::kInvalidArgument,
          "rejection sampling needs a solution built by bjw_density");
  require(count >= 0, ErrorCode::kInvalidArgument, "negative sample count");
  const BjwParts& parts = *solution.bjw;
  require(parts.initial.has_sampler(), ErrorCode::kInvalidArgument,
          "initial density needs a sampler");
  require(parts.observed.has_sampler(), ErrorCode::kInvalidArgument,
          "observable density needs a sampler");
  check_predictability(parts, seed);

  double max_ratio = 0.0;
  {
    const std::uint64_t root = mix_seed(seed, stream::kReference);
    for (int i = 0; i < options.pilot_draws; ++i) {
      Rng rng = make_stream(root, static_cast<std::uint64_t>(i));
      max_ratio = std::max(max_ratio, std::exp(log_ratio(parts, parts.initial.draw(rng))));
    }
  }
  require(max_ratio > 0.0, ErrorCode::kPredictability,
          "ratio fY/pushforward vanished on every pilot draw");

  SampleOutcome out;
  out.diagnostics = solution.diagnostics;
  out.diagnostics.seed = seed;
  out.diagnostics.rows_requested = static_cast<std::size_t>(count);
  double bound = options.safety_factor * max_ratio;

  const auto n = static_cast<std::size_t>(count);
  std::vector<Vector> rows(n);
  std::vector<std::size_t> proposals(n);
  const std::uint64_t root = mix_seed(seed, stream::kRows);
  for (int doubling = 0;; ++doubling) {
    std::atomic<bool> exceeded{false};
    std::atomic<bool> exhausted{false};
    parallel_for(n, [&](std::size_t i) {
      Rng rng = make_stream(root, i);
      proposals[i] = 0;
      while (!exceeded.load(std::memory_order_relaxed)) {
        if (++proposals[i] > options.max_proposals_per_row) {
          exhausted = true;
          return;
        }
        Vector theta = parts.initial.draw(rng);
        const double r = std::exp(log_ratio(parts, theta));
        const double u = uniform01(rng);
        if (r > bound) {
          exceeded = true;
          return;
        }
        if (u * bound < r) {
          rows[i] = std::move(theta);
          return;
        }
      }
    });
    if (exhausted) {
      fail(ErrorCode::kConvergence, "rejection sampler exceeded the proposal limit per row");
    }
    if (!exceeded) break;
    require(doubling < options.max_bound_doublings, ErrorCode::kConvergence,
            "rejection bound kept being exceeded");
    std::ostringstream os;
    os << "ratio exceeded the rejection bound " << bound << "; bound doubled";
    out.diagnostics.warnings.push_back(os.str());
    bound *= 2.0;
  }

  std::size_t total = 0;
  for (std::size_t k : proposals) total += k;
  out.diagnostics.proposals = total;
  out.diagnostics.rows_returned = n;
  out.diagnostics.acceptance_rate =
      total > 0 ? static_cast<double>(n) / static_cast<double>(total) : 1.0;
  out.batch.seed = seed;
  out.batch.labels = solution.labels.empty() ? default_labels(parts.initial.dim(), "theta")
                                             : solution.labels;
  out.batch.data.resize(count, parts.initial.dim());
  for (std::size_t i = 0; i < n; ++i) {
    out.batch.data.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return out;
}

SequentialUpdate bjw_sequential_update(const Density& initial, const ForwardMap& map,
                                       const Density& pushforward, const Density& fy1,
                                       const Density& fy2) {
  const SipSolution first = bjw_density(initial, map, fy1, pushforward);
  SequentialUpdate out{bjw_density(initial, map, fy2, pushforward),
                       bjw_density(first.density, map, fy2, fy1)};
  return out;
}

}  // namespace siplab
