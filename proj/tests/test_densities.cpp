#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "densities.hpp"
#include "verification.hpp"

#include <cmath>

using namespace siplab;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

double integrate_1d(const Density& d, double lo, double hi, int points = 20001) {
  return grid_integral(d, GridSpec{v1(lo), v1(hi), points});
}

double erf_normal_cdf(double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); }

}  // namespace

TEST_CASE("standard normal density at the mode") {
  const Density d = make_gaussian({v1(0.0), Matrix::Identity(1, 1)});
  CHECK(d.pdf(v1(0.0)) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-15));
}

TEST_CASE("bivariate normal with covariance I/2 at its mean") {
  Vector mean(2);
  mean << 0.0, 1.0;
  const Density d = make_gaussian({mean, 0.5 * Matrix::Identity(2, 2)});
  CHECK(d.pdf(mean) == doctest::Approx(1.0 / (2.0 * M_PI * 0.5)).epsilon(1e-14));
}

TEST_CASE("indefinite covariance names the eigenvalue") {
  Matrix cov(2, 2);
  cov << 1.0, 2.0, 2.0, 1.0;
  try {
    make_gaussian({Vector::Zero(2), cov});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotPositiveDefinite);
    CHECK(std::string(e.what()).find("-1") != std::string::npos);
  }
}

TEST_CASE("log_pdf and pdf agree and both are total") {
  const Density d = make_truncated_gaussian(0.5, 0.25, 0.0, 1.0);
  for (double x : {0.01, 0.3, 0.5, 0.97}) {
    CHECK(std::exp(d.log_pdf(v1(x))) == doctest::Approx(d.pdf(v1(x))).epsilon(1e-12));
  }
  CHECK(d.pdf(v1(1.5)) == 0.0);
  CHECK(d.log_pdf(v1(-0.1)) == -INFINITY);
}

TEST_CASE("truncated normal") {
  const Density d = make_truncated_gaussian(0.5, 0.25, 0.0, 1.0);
  CHECK(integrate_1d(d, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-8));
  const double phi0 = 1.0 / std::sqrt(2.0 * M_PI);
  CHECK(d.pdf(v1(0.5)) ==
        doctest::Approx(phi0 / (0.25 * (erf_normal_cdf(2.0) - erf_normal_cdf(-2.0))))
            .epsilon(1e-13));

  const Density whole = make_truncated_gaussian(0.0, 1.0, -INFINITY, INFINITY);
  CHECK(whole.pdf(v1(0.0)) == doctest::Approx(phi0).epsilon(1e-15));

  CHECK_THROWS_AS(make_truncated_gaussian(0.0, 1.0, 1.0, 1.0), Error);
  CHECK_THROWS_AS(make_truncated_gaussian(0.0, -1.0, 0.0, 1.0), Error);
}

TEST_CASE("beta family") {
  const Density flat = make_beta(1.0, 1.0);
  for (double x : {0.1, 0.5, 0.9}) CHECK(flat.pdf(v1(x)) == doctest::Approx(1.0));

  const Density b = make_beta(8.0, 12.0);
  CHECK(integrate_1d(b, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-8));
  // Golden-section search on the log-pdf as the mode oracle.
  double lo = 0.0, hi = 1.0;
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 200; ++i) {
    const double a = hi - r * (hi - lo);
    const double c = lo + r * (hi - lo);
    if (b.log_pdf(v1(a)) > b.log_pdf(v1(c))) hi = c; else lo = a;
  }
  CHECK(0.5 * (lo + hi) == doctest::Approx(7.0 / 18.0).epsilon(1e-8));
  CHECK_THROWS_AS(make_beta(0.0, 1.0), Error);
}

TEST_CASE("mixtures") {
  const Density u = make_uniform(v1(0.0), v1(1.0));
  const Density single = make_mixture({u}, MixtureWeights({1.0}));
  CHECK(single.pdf(v1(0.4)) == u.pdf(v1(0.4)));

  const Density left = make_uniform(v1(0.0), v1(1.0));
  const Density right = make_uniform(v1(2.0), v1(4.0));
  const Density mix = make_mixture({left, right}, MixtureWeights({0.3, 0.7}));
  for (double x : {0.5, 2.5, 3.9, 1.5}) {
    CHECK(std::abs(mix.pdf(v1(x)) - (0.3 * left.pdf(v1(x)) + 0.7 * right.pdf(v1(x)))) <= 1e-14);
  }
  const SampleBatch s = mix.sample(100000, 3);
  const double frac = static_cast<double>((s.data.col(0).array() < 1.5).count()) / 1e5;
  CHECK(std::abs(frac - 0.3) < 3.0 * std::sqrt(0.21 / 1e5));

  try {
    MixtureWeights({0.5, 0.6});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("1.1") != std::string::npos);
  }
  const Density two_d = make_uniform(Vector::Zero(2), Vector::Ones(2));
  CHECK_THROWS_AS(make_mixture({u, two_d}, MixtureWeights({0.5, 0.5})), Error);
  CHECK_THROWS_AS(make_mixture({u}, MixtureWeights({0.5, 0.5})), Error);
}

TEST_CASE("kde of standard normal draws") {
  const Density n01 = make_gaussian({v1(0.0), Matrix::Identity(1, 1)});
  const SampleBatch draws = n01.sample(10000, 11);
  const Density kde = fit_kde(draws);
  CHECK(std::abs(integrate_1d(kde, -5.0, 5.0) - 1.0) < 0.01);
  CHECK(std::abs(kde.pdf(v1(0.0)) - 0.3989) < 0.05);
  CHECK(kde.pdf(v1(40.0)) >= 0.0);

  const Vector h = scott_bandwidth(draws);
  const double sd = std::sqrt(sample_covariance(draws.data.col(0), draws.data.col(0)));
  CHECK(h[0] == doctest::Approx(sd * std::pow(10000.0, -0.2)).epsilon(1e-12));

  SampleBatch one;
  one.data = Matrix::Zero(1, 1);
  CHECK_THROWS_AS(fit_kde(one), Error);
  SampleBatch flat;
  flat.data = Matrix::Ones(10, 1);
  CHECK_THROWS_AS(fit_kde(flat), Error);
}

TEST_CASE("2-d kde integrates to one on a five-bandwidth box") {
  const Density g = make_gaussian({Vector::Zero(2), Matrix::Identity(2, 2)});
  const Density kde = fit_kde(g.sample(2000, 5));
  const GridSpec box{Vector::Constant(2, -6.0), Vector::Constant(2, 6.0), 241};
  CHECK(std::abs(grid_integral(kde, box) - 1.0) < 1e-2);
}

TEST_CASE("samplers pass KS against their own CDFs") {
  const std::vector<Density> all{
      make_gaussian({v1(1.0), Matrix::Constant(1, 1, 4.0)}),
      make_truncated_gaussian(0.5, 0.25, 0.0, 1.0),
      make_beta(8.0, 12.0),
      make_uniform(v1(-1.0), v1(3.0)),
      make_mixture({make_uniform(v1(0.0), v1(1.0)), make_gaussian({v1(3.0), Matrix::Identity(1, 1)})},
                   MixtureWeights({0.4, 0.6})),
  };
  for (const Density& d : all) {
    const SampleBatch s = d.sample(10000, 21);
    for (Eigen::Index i = 0; i < s.rows(); ++i) CHECK_FALSE(!d.support().contains(s.data.row(i).transpose()));
    const auto col = s.data.col(0);
    const KsResult ks = ks_test_1d(std::vector<double>(col.data(), col.data() + col.size()),
                                   [&](double x) { return d.marginal_cdf(0, x); });
    CHECK(ks.p_value > 0.01);
  }
}

TEST_CASE("sampling is a pure function of the seed") {
  const Density g = make_gaussian({Vector::Zero(3), Matrix::Identity(3, 3)});
  CHECK(g.sample(500, 9).data == g.sample(500, 9).data);
  CHECK(g.sample(500, 9).data != g.sample(500, 10).data);
}
