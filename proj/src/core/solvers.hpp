#pragma once

#include "common.hpp"
#include "densities.hpp"
#include "forward_maps.hpp"
#include "newton.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace siplab {

enum class SolverMethod { kCoV, kCoVMixture, kIntuitive, kBBE, kBJWAnalytic, kBJWKde };

const char* to_string(SolverMethod method);

struct Diagnostics {
  std::uint64_t seed = 0;
  std::size_t rows_requested = 0;
  std::size_t rows_returned = 0;
  std::size_t dropped_rows = 0;
  std::size_t solver_failures = 0;  // nonconverged Newton attempts
  std::size_t proposals = 0;        // rejection sampling only
  double acceptance_rate = 1.0;
  std::string start_distribution;
  std::vector<std::string> warnings;
};

// One Monte Carlo row: a draw, or nothing when every retry failed.
struct RowOutcome {
  std::optional<Vector> theta;
  std::size_t failures = 0;
};
using RowSampler = std::function<RowOutcome(Rng&)>;

struct SampleOutcome {
  SampleBatch batch;
  Diagnostics diagnostics;
};

// Pieces of a ratio-form solution initial * fY(g) / pushforward(g).
struct BjwParts {
  Density initial;
  ForwardMap map;
  Density observed;
  Density pushforward;
};

struct SipSolution {
  Density density;
  SolverMethod method = SolverMethod::kCoV;
  Diagnostics diagnostics;
  std::vector<std::string> labels;
  RowSampler row_sampler;              // empty for ratio-form densities
  std::optional<BjwParts> bjw;         // set by bjw_density
  std::optional<SampleBatch> samples;  // set by intuitive_sample

  bool sampler_available() const { return static_cast<bool>(row_sampler); }
  // Rows use independent streams derived from (seed, row index); dropped rows
  // are removed and counted.
  SampleOutcome sample(Eigen::Index count, std::uint64_t seed) const;
};

// Exact change of variables for p = q, single-branch maps.
SipSolution cov_exact(const ForwardMap& map, const Density& observed);

struct DomainBranch {
  std::string label;
  std::function<bool(const Vector&)> contains;
  std::function<Vector(const Vector&)> inverse;  // local inverse of g
};

struct DomainPartition {
  std::vector<DomainBranch> branches;
};

// Weighted CoV family. Branches whose images overlap share weights that sum
// to one over every point of the observable support; a branch whose image
// is covered once carries weight 1.
SipSolution cov_mixture_family(const ForwardMap& map, const Density& observed,
                               const DomainPartition& partition,
                               const std::vector<double>& weights);

// g(theta) = theta^2 on (-eps, 1), 0 < eps <= 1.
struct TwoToOneProblem {
  ForwardMap map;
  DomainPartition partition;
};
TwoToOneProblem two_to_one_problem(double eps);
// (w, 1-w) for eps = 1, (w, 1-w, 1) otherwise.
std::vector<double> two_to_one_weights(double eps, double w);

struct IntuitiveOptions {
  int retries = 10;
  int pilot_draws = 512;
  NewtonOptions newton;
};

// Algorithm: y ~ fY, tail ~ f_aux independently, then Newton-solve for the
// head. aux may be empty when p = q.
SipSolution intuitive_sample(const ForwardMap& map, const Density& observed,
                             const std::optional<Density>& aux, Eigen::Index count,
                             std::uint64_t seed, const IntuitiveOptions& options = {});

using ContourBound = std::function<Vector(const Vector& t)>;

// Linear-map BBE solution with contour bounds in (t, c) = (A theta, A_perp theta)
// coordinates.
SipSolution bbe_linear(const Matrix& a, const Density& observed, const Vector& lower,
                       const Vector& upper);
SipSolution bbe_linear(const Matrix& a, const Density& observed, ContourBound lower,
                       ContourBound upper);

// Angle interval of the contour of radius r inside the unit square.
std::pair<double, double> polar_contour_arc(double r);
// Uniform conditional density of the polar angle given the radius.
double polar_contour_density(double phi, double r);
SipSolution bbe_polar(const Density& observed);

SipSolution bjw_density(const Density& initial, const ForwardMap& map,
                        const Density& observed, const Density& pushforward,
                        SolverMethod method = SolverMethod::kBJWAnalytic);
// Pushforward estimated by a KDE of g(theta) over pilot draws from initial.
SipSolution bjw_kde(const Density& initial, const ForwardMap& map,
                    const Density& observed, Eigen::Index pilot_count,
                    std::uint64_t seed);

// Throws kPredictability when draws from the observable density land where
// the pushforward vanishes.
void check_predictability(const BjwParts& parts, std::uint64_t seed, int probes = 512);

struct RejectionOptions {
  int pilot_draws = 1000;
  double safety_factor = 1.2;
  int max_bound_doublings = 20;
  std::size_t max_proposals_per_row = 1000000;
};

SampleOutcome bjw_rejection_sample(const SipSolution& solution, Eigen::Index count,
                                   std::uint64_t seed,
                                   const RejectionOptions& options = {});

struct SequentialUpdate {
  SipSolution single;  // BJW(initial, fY2)
  SipSolution twice;   // BJW(BJW(initial, fY1), fY2)
};

// pushforward is the (analytic) image of initial under map. The first update
// solves its SIP, so its pushforward is fY1.
SequentialUpdate bjw_sequential_update(const Density& initial, const ForwardMap& map,
                                       const Density& pushforward, const Density& fy1,
                                       const Density& fy2);

}  // namespace siplab
