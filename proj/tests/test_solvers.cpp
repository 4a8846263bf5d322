#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gaussian_algebra.hpp"
#include "solvers.hpp"
#include "verification.hpp"

#include <cmath>

using namespace siplab;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }
Vector vec2(double a, double b) { return (Vector(2) << a, b).finished(); }
Density gauss1(double m, double v) { return make_gaussian({v1(m), Matrix::Constant(1, 1, v)}); }
Density unif01() { return make_uniform(v1(0.0), v1(1.0)); }

}  // namespace

TEST_CASE("cov on the identity reproduces fY") {
  const Density fy = make_gaussian({vec2(1, 2), Matrix::Identity(2, 2)});
  const SipSolution s = cov_exact(identity_map(2), fy);
  CHECK(s.method == SolverMethod::kCoV);
  for (const Vector& x : {vec2(0, 0), vec2(1, 2), vec2(-1, 3)}) CHECK(s.density.pdf(x) == doctest::Approx(fy.pdf(x)));
  CHECK(pushforward_check(s, identity_map(2), fy, 2000, 0.01, 3).pass);
}

TEST_CASE("cov for the regression design") {
  Matrix x(2, 2);
  x << 1, -1, 1, 1;
  const double s2 = 1.0;
  const Density fy = make_gaussian({vec2(-1, 1), s2 * Matrix::Identity(2, 2)});
  const SipSolution s = cov_exact(linear_map(x), fy);
  const Density expected = make_gaussian({vec2(0, 1), 0.5 * s2 * Matrix::Identity(2, 2)});
  for (const Vector& t : {vec2(0, 1), vec2(0.3, -0.2), vec2(1.5, 1.1)}) {
    CHECK(s.density.pdf(t) == doctest::Approx(expected.pdf(t)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(cov_exact(sum_map(), gauss1(0, 1)), Error);
}

TEST_CASE("cov for theta^2 on (0, 1) gives density 2 theta") {
  const SipSolution s = cov_exact(square_map(0.0, 1.0), unif01());
  for (double t : {0.1, 0.5, 0.9}) CHECK(s.density.pdf(v1(t)) == doctest::Approx(2.0 * t));
  // Histogram oracle on the pushforward.
  const SampleBatch b = s.sample(100000, 1).batch;
  const double below_half = static_cast<double>((b.data.col(0).array() < 0.5).count()) / 1e5;
  CHECK(std::abs(below_half - 0.25) < 3.0 * std::sqrt(0.25 * 0.75 / 1e5));
}

TEST_CASE("two-to-one weights") {
  TwoToOneProblem p = two_to_one_problem(1.0);
  const SipSolution half = cov_mixture_family(p.map, unif01(), p.partition, two_to_one_weights(1.0, 0.5));
  for (double t : {-0.7, -0.2, 0.3, 0.8}) CHECK(half.density.pdf(v1(t)) == doctest::Approx(std::abs(t)));

  const SipSolution all_left = cov_mixture_family(p.map, unif01(), p.partition, two_to_one_weights(1.0, 1.0));
  CHECK(all_left.density.pdf(v1(-0.4)) == doctest::Approx(0.8));
  CHECK(all_left.density.pdf(v1(0.4)) == 0.0);
  const SampleBatch b = all_left.sample(1000, 2).batch;
  CHECK((b.data.array() < 0.0).all());

  CHECK_THROWS_AS(cov_mixture_family(p.map, unif01(), p.partition, {0.5}), Error);
  CHECK_THROWS_AS(cov_mixture_family(p.map, unif01(), p.partition, {0.5, 0.6}), Error);
}

TEST_CASE("two-to-one on (-0.5, 1)") {
  for (double w : {0.0, 0.4, 1.0}) {
    TwoToOneProblem p = two_to_one_problem(0.5);
    const SipSolution s = cov_mixture_family(p.map, unif01(), p.partition, two_to_one_weights(0.5, w));
    CHECK(grid_integral(s.density, GridSpec{v1(-0.5 + 1e-12), v1(-1e-12), 4001}) ==
          doctest::Approx(0.25 * w).epsilon(1e-5));
    CHECK(normalization_check(s.density).pass);
  }
}

TEST_CASE("intuitive sampling") {
  SUBCASE("p = q identity returns fY draws") {
    const Density fy = gauss1(0.3, 2.0);
    const SipSolution s = intuitive_sample(identity_map(1), fy, std::nullopt, 10000, 5);
    CHECK(pushforward_check(*s.samples, identity_map(1), fy, 0.01, 5).pass);
    CHECK(s.diagnostics.dropped_rows == 0);
  }
  SUBCASE("sum map") {
    const SipSolution s = intuitive_sample(sum_map(), gauss1(0, 2), gauss1(0, 1), 100000, 8);
    const Vector t1 = s.samples->data.col(0);
    const Vector t2 = s.samples->data.col(1);
    const double m = 1e5;
    CHECK(std::abs(sample_covariance(t1, t1) - 3.0) < 3.0 * 3.0 * std::sqrt(2.0 / m));
    CHECK(std::abs(sample_covariance(t1, t2) + 1.0) < 3.0 * 2.0 / std::sqrt(m));
    CHECK(std::abs(sample_correlation(t1 + t2, t2)) < 3.0 / std::sqrt(m));
    // The density is fY(g) f_aux(tail): a Gaussian with cov [[3, -1], [-1, 1]].
    Matrix cov(2, 2);
    cov << 3, -1, -1, 1;
    const Density joint = make_gaussian({Vector::Zero(2), cov});
    for (const Vector& x : {vec2(0, 0), vec2(1, -0.5), vec2(-2, 1)})
      CHECK(s.density.pdf(x) == doctest::Approx(joint.pdf(x)).epsilon(1e-12));
  }
  SUBCASE("p = q regression design matches the cov solution") {
    Matrix x(2, 2);
    x << 1, -1, 1, 1;
    const Density fy = make_gaussian({vec2(-1, 1), Matrix::Identity(2, 2)});
    const SipSolution s = intuitive_sample(linear_map(x), fy, std::nullopt, 10000, 3);
    for (int j = 0; j < 2; ++j) {
      const auto col = s.samples->data.col(j);
      const double mean = j == 0 ? 0.0 : 1.0;
      const KsResult ks = ks_test_1d(std::vector<double>(col.data(), col.data() + col.size()),
                                     [&](double t) { return normal_cdf((t - mean) / std::sqrt(0.5)); });
      CHECK(ks.p_value > 0.01);
    }
  }
  SUBCASE("unreachable observable values abort") {
    try {
      intuitive_sample(square_map(-1.0, 1.0), make_uniform(v1(-1.0), v1(1.0)), std::nullopt, 10, 1);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNoSolution);
    }
  }
}

TEST_CASE("bbe linear") {
  Matrix a(1, 2);
  a << -1.0 / 3.0, 4.0 / 3.0;
  const Density fy = make_truncated_gaussian(0.5, 0.25, 0.0, 1.0);
  const SipSolution s = bbe_linear(a, fy, v1(0.0), v1(1.0));
  CHECK(pushforward_check(s, linear_map(a), fy, 10000, 0.01, 7).pass);

  const Density g2 = make_gaussian({vec2(0.2, -0.1), Matrix::Identity(2, 2)});
  const SipSolution square = bbe_linear(Matrix::Identity(2, 2), g2, Vector(0), Vector(0));
  const SipSolution cov = cov_exact(identity_map(2), g2);
  CHECK(square.density.pdf(vec2(0.4, 0.4)) == doctest::Approx(cov.density.pdf(vec2(0.4, 0.4))));

  const Matrix ones = Matrix::Ones(1, 2);
  const SipSolution slab = bbe_linear(ones, gauss1(0, 2), v1(-1.0), v1(1.0));
  const SampleBatch b = slab.sample(20000, 4).batch;
  const Vector c = b.data * null_space_rows(ones).transpose();
  const KsResult ks = ks_test_1d(std::vector<double>(c.data(), c.data() + c.size()),
                                 [](double x) { return std::clamp((x + 1.0) / 2.0, 0.0, 1.0); });
  CHECK(ks.p_value > 0.01);

  CHECK_THROWS_AS(bbe_linear(Matrix::Ones(2, 3), make_gaussian({vec2(0, 0), Matrix::Identity(2, 2)}),
                             v1(0.0), v1(1.0)),
                  Error);
}

TEST_CASE("bbe polar conditional") {
  for (double phi : {0.1, 0.8, 1.5}) CHECK(polar_contour_density(phi, 0.5) == doctest::Approx(2.0 / M_PI));
  const auto [a, b] = polar_contour_arc(std::sqrt(2.0));
  CHECK(a == doctest::Approx(M_PI / 4.0));
  CHECK(b == doctest::Approx(M_PI / 4.0));
  const auto [c, d] = polar_contour_arc(1.0);
  CHECK(c == 0.0);
  CHECK(d == doctest::Approx(M_PI / 2.0));
  // Piecewise constant, so width times height is exactly one.
  for (double r : {0.01, 0.5, 1.0, 1.01, 1.2, 1.4, 1.414}) {
    const auto [lo, hi] = polar_contour_arc(r);
    CHECK(std::abs((hi - lo) * polar_contour_density(0.5 * (lo + hi), r) - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(bbe_polar(make_uniform(v1(0.0), v1(2.0))), Error);
}

TEST_CASE("bbe polar with Beta(8, 12)") {
  const SipSolution s = bbe_polar(make_beta(8.0, 12.0));
  CHECK(pushforward_check(s, half_squared_radius_map(), make_beta(8.0, 12.0), 10000, 0.01, 7).pass);
  CHECK(normalization_check(s.density).pass);
}

namespace {

struct LinearCase {
  Matrix a = Matrix::Ones(1, 2);
  Density initial = make_gaussian({Vector::Zero(2), Matrix::Identity(2, 2)});
  Density fy = make_gaussian({v1(1.0), Matrix::Constant(1, 1, 0.25)});
  Density pushforward = make_gaussian({v1(0.0), Matrix::Constant(1, 1, 2.0)});
};

}  // namespace

TEST_CASE("bjw density") {
  const LinearCase c;
  SUBCASE("fY equal to the pushforward returns the initial density") {
    const SipSolution s = bjw_density(c.initial, linear_map(c.a), c.pushforward, c.pushforward);
    CHECK_FALSE(s.sampler_available());
    for (const Vector& x : {vec2(0, 0), vec2(1, -2)}) CHECK(s.density.pdf(x) == doctest::Approx(c.initial.pdf(x)));
    const SampleOutcome r = bjw_rejection_sample(s, 20000, 3);
    // Every ratio is 1, so each proposal is accepted with probability 1 / 1.2.
    const double rate = 1.0 / 1.2;
    CHECK(std::abs(r.diagnostics.acceptance_rate - rate) < 3.0 * std::sqrt(rate * (1 - rate) / 20000));
  }
  SUBCASE("matches the closed form") {
    const SipSolution s = bjw_density(c.initial, linear_map(c.a), c.fy, c.pushforward);
    const GaussianParams g = bjw_gaussian_linear(c.a, v1(1.0), Matrix::Constant(1, 1, 0.25),
                                                 Vector::Zero(2), Matrix::Identity(2, 2));
    const Density closed = make_gaussian(g);
    CHECK(grid_compare(s.density, closed, GridSpec{Vector::Constant(2, -4), Vector::Constant(2, 4), 81}, 1e-8).pass);

    const SampleOutcome r = bjw_rejection_sample(s, 10000, 9);
    const double m = 1e4;
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(r.batch.data.col(j).mean() - g.mean[j]) < 3.0 * std::sqrt(g.cov(j, j) / m));
    }
    CHECK(pushforward_check(r.batch, linear_map(c.a), c.fy, 0.01, 9).pass);
    CHECK_THROWS_AS(pushforward_check(s, linear_map(c.a), c.fy, 100, 0.01, 9), Error);
  }
  SUBCASE("predictability violation") {
    const Density narrow = make_uniform(v1(-1.0), v1(1.0));
    const SipSolution s =
        bjw_density(c.initial, linear_map(c.a), make_uniform(v1(2.0), v1(3.0)), narrow);
    CHECK_THROWS_AS(s.density.pdf(vec2(1.25, 1.25)), Error);
    try {
      bjw_rejection_sample(s, 10, 1);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kPredictability);
    }
  }
  SUBCASE("KDE denominator") {
    const SipSolution s = bjw_kde(c.initial, linear_map(c.a), c.fy, 10000, 7);
    CHECK(s.method == SolverMethod::kBJWKde);
    const GaussianParams g = bjw_gaussian_linear(c.a, v1(1.0), Matrix::Constant(1, 1, 0.25),
                                                 Vector::Zero(2), Matrix::Identity(2, 2));
    CHECK(grid_compare(s.density, make_gaussian(g), GridSpec{Vector::Constant(2, -3), Vector::Constant(2, 4), 41}, 0.05).pass);
  }
}

TEST_CASE("bjw with p = q ignores the initial density") {
  Matrix a(2, 2);
  a << 2, 1, -1, 1;
  const Density fy = make_gaussian({vec2(1, 0), Matrix::Identity(2, 2)});
  const auto solve = [&](const Vector& mu, const Matrix& cov) {
    const Density init = make_gaussian({mu, cov});
    const Density push = make_gaussian({a * mu, a * cov * a.transpose()});
    return bjw_density(init, linear_map(a), fy, push).density;
  };
  Matrix c2(2, 2);
  c2 << 2.0, 0.3, 0.3, 0.5;
  const Density d1 = solve(Vector::Zero(2), Matrix::Identity(2, 2));
  const Density d2 = solve(vec2(1, -1), c2);
  CHECK(grid_compare(d1, d2, GridSpec{Vector::Constant(2, -3), Vector::Constant(2, 3), 61}, 1e-8).pass);
}

TEST_CASE("sequential update forgets the first observable") {
  const LinearCase c;
  const Density fy1 = make_gaussian({v1(0.5), Matrix::Constant(1, 1, 0.5)});
  const GridSpec box{Vector::Constant(2, -3), Vector::Constant(2, 3), 61};
  const SequentialUpdate u = bjw_sequential_update(c.initial, linear_map(c.a), c.pushforward, fy1, c.fy);
  CHECK(grid_compare(u.twice.density, u.single.density, box, 1e-8).pass);
  const SequentialUpdate same = bjw_sequential_update(c.initial, linear_map(c.a), c.pushforward, c.fy, c.fy);
  CHECK(grid_compare(same.twice.density, same.single.density, box, 1e-8).pass);
  const SequentialUpdate swapped = bjw_sequential_update(c.initial, linear_map(c.a), c.pushforward, c.fy, fy1);
  CHECK(grid_compare(swapped.twice.density, swapped.single.density, box, 1e-8).pass);
  CHECK_FALSE(grid_compare(swapped.twice.density, u.twice.density, box, 1e-3).pass);
}

TEST_CASE("sampling does not depend on the worker count") {
  const SipSolution s = bbe_polar(make_beta(8.0, 12.0));
  set_worker_count(1);
  const Matrix one = s.sample(3000, 17).batch.data;
  set_worker_count(4);
  const Matrix four = s.sample(3000, 17).batch.data;
  set_worker_count(0);
  CHECK(one == four);
}
