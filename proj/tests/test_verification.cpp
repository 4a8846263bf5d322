#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "verification.hpp"

#include <cmath>

using namespace siplab;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

std::vector<double> column(const SampleBatch& b, int j = 0) {
  const auto c = b.data.col(j);
  return {c.data(), c.data() + c.size()};
}

double unif_cdf(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

TEST_CASE("check reports derive pass from the statistic") {
  CHECK(CheckReport::make("a", 0.5, 0.01, Comparison::kAtLeast).pass);
  CHECK_FALSE(CheckReport::make("a", 0.001, 0.01, Comparison::kAtLeast).pass);
  CHECK(CheckReport::make("b", 1e-9, 1e-8, Comparison::kAtMost).pass);
  CHECK_FALSE(CheckReport::make("b", 1e-7, 1e-8, Comparison::kAtMost).pass);
}

TEST_CASE("kolmogorov distribution") {
  // Reference values of the limiting distribution.
  CHECK(kolmogorov_survival(1.36) == doctest::Approx(0.0505).epsilon(0.01));
  CHECK(kolmogorov_survival(1.63) == doctest::Approx(0.0098).epsilon(0.02));
  CHECK(kolmogorov_survival(0.5) == doctest::Approx(0.9639).epsilon(0.001));
  CHECK(kolmogorov_survival(0.0) == 1.0);
  // The two series agree where they meet.
  CHECK(kolmogorov_survival(1.1799999) == doctest::Approx(kolmogorov_survival(1.18)).epsilon(1e-6));
}

TEST_CASE("ks statistic and test") {
  CHECK(ks_statistic({0.5}, unif_cdf) == doctest::Approx(0.5));

  const Density u = make_uniform(v1(0.0), v1(1.0));
  CHECK(ks_test_1d(column(u.sample(10000, 1)), unif_cdf).p_value > 0.01);

  const Density n = make_gaussian({v1(0.0), Matrix::Identity(1, 1)});
  CHECK(ks_test_1d(column(n.sample(10000, 1)), unif_cdf).p_value < 1e-6);

  CHECK_THROWS_AS(ks_test_1d({0.1, 0.2, 0.3}, unif_cdf), Error);
  CHECK_THROWS_AS(ks_statistic({0.1, 0.5, 0.9}, [](double x) { return 1.0 - x; }), Error);

  const KsResult two = ks_two_sample(column(u.sample(5000, 2)), column(u.sample(5000, 3)));
  CHECK(two.p_value > 0.01);
  const KsResult differ = ks_two_sample(column(u.sample(5000, 2)), column(n.sample(5000, 3)));
  CHECK(differ.p_value < 1e-6);
}

TEST_CASE("energy permutation test") {
  const Density g = make_gaussian({Vector::Zero(2), Matrix::Identity(2, 2)});
  const Density shifted = make_gaussian({Vector::Constant(2, 0.5), Matrix::Identity(2, 2)});
  CHECK(energy_permutation_test(g.sample(1000, 1).data, g.sample(1000, 2).data, 200, 3) > 0.01);
  CHECK(energy_permutation_test(g.sample(1000, 1).data, shifted.sample(1000, 2).data, 200, 3) < 0.01);
}

TEST_CASE("pushforward check") {
  const Density fy = make_gaussian({Vector::Zero(2), Matrix::Identity(2, 2)});
  const SipSolution good = cov_exact(identity_map(2), fy);
  CHECK(pushforward_check(good, identity_map(2), fy, 10000, 0.01, 4).pass);

  const Density aux = make_gaussian({v1(0.0), Matrix::Identity(1, 1)});
  const Density wrong_y = make_gaussian({v1(0.0), Matrix::Constant(1, 1, 4.0)});
  const SipSolution wrong = intuitive_sample(sum_map(), wrong_y, aux, 10000, 5);
  const Density fy1 = make_gaussian({v1(0.0), Matrix::Constant(1, 1, 2.0)});
  CHECK_FALSE(pushforward_check(*wrong.samples, sum_map(), fy1, 0.01, 5).pass);

  SipSolution bare = good;
  bare.row_sampler = nullptr;
  try {
    pushforward_check(bare, identity_map(2), fy, 100, 0.01, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("grid_compare") != std::string::npos);
  }
}

TEST_CASE("grid comparison") {
  const Density a = make_gaussian({Vector::Zero(2), Matrix::Identity(2, 2)});
  const CheckReport same = grid_compare(a, a, GridSpec{Vector::Constant(2, -3), Vector::Constant(2, 3), 31}, 0.0);
  CHECK(same.statistic == 0.0);
  CHECK(same.pass);
  const Density b4 = make_gaussian({Vector::Zero(4), Matrix::Identity(4, 4)});
  CHECK_THROWS_AS(grid_compare(b4, b4, GridSpec{Vector::Zero(4), Vector::Ones(4), 3}, 1.0), Error);
}

TEST_CASE("normalization") {
  const CheckReport u = normalization_check(make_uniform(v1(0.0), v1(1.0)));
  CHECK(u.pass);
  CHECK(u.statistic <= 1e-10);
  CHECK_THROWS_AS(normalization_check(make_gaussian({v1(0.0), Matrix::Identity(1, 1)})), Error);
  CHECK(normalization_check(make_gaussian({v1(0.0), Matrix::Identity(1, 1)}),
                            GridSpec{v1(-9.0), v1(9.0), 512})
            .pass);
}

TEST_CASE("moment helpers") {
  const Vector x = (Vector(4) << 1, 2, 3, 4).finished();
  const Vector y = (Vector(4) << 2, 4, 6, 8).finished();
  CHECK(sample_mean(x) == 2.5);
  CHECK(sample_covariance(x, x) == doctest::Approx(5.0 / 3.0));
  CHECK(sample_correlation(x, y) == doctest::Approx(1.0));
}
