#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "siplab/siplab.h"

#include <cmath>
#include <string>
#include <vector>

TEST_CASE("density handles") {
  const double mean[1] = {0.0};
  const double cov[1] = {1.0};
  sip_density* d = nullptr;
  REQUIRE(sip_density_gaussian(1, mean, cov, &d) == SIP_OK);
  double p = 0.0;
  const double x[1] = {0.0};
  REQUIRE(sip_density_pdf(d, x, &p) == SIP_OK);
  CHECK(p == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)));
  std::vector<double> draws(100);
  CHECK(sip_density_sample(d, 100, 3, draws.data()) == SIP_OK);
  sip_density_free(d);

  const double bad[4] = {1, 2, 2, 1};
  const double m2[2] = {0, 0};
  sip_density* e = nullptr;
  CHECK(sip_density_gaussian(2, m2, bad, &e) == SIP_ERR_NOT_POSITIVE_DEFINITE);
  CHECK(e == nullptr);
  CHECK(std::string(sip_last_error()).find("eigenvalue") != std::string::npos);
  CHECK(sip_density_pdf(nullptr, x, &p) == SIP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("maps and solutions") {
  sip_map* polar = nullptr;
  REQUIRE(sip_map_builtin("polar", &polar) == SIP_OK);
  const double theta[2] = {1.0, 1.0};
  double y = 0.0;
  REQUIRE(sip_map_eval(polar, theta, &y) == SIP_OK);
  CHECK(y == 1.0);
  double jac[2];
  int rank = 0;
  REQUIRE(sip_map_jacobian(polar, theta, jac, &rank) == SIP_OK);
  CHECK(jac[0] == 1.0);
  CHECK(rank == 1);
  CHECK(sip_map_builtin("nope", &polar) == SIP_ERR_INVALID_ARGUMENT);

  sip_density* beta = nullptr;
  REQUIRE(sip_density_beta(8.0, 12.0, &beta) == SIP_OK);
  sip_solution* s = nullptr;
  REQUIRE(sip_solve_bbe_polar(beta, &s) == SIP_OK);
  CHECK(std::string(sip_solution_method(s)) == "BBE");
  CHECK(sip_solution_has_sampler(s) == 1);
  sip_check check{};
  REQUIRE(sip_check_pushforward(s, polar, beta, 10000, 0.01, 7, &check) == SIP_OK);
  CHECK(check.pass == 1);
  sip_solution_free(s);
  sip_density_free(beta);
  sip_map_free(polar);
}

TEST_CASE("bjw through the C API") {
  const double a[2] = {1.0, 1.0};
  sip_map* map = nullptr;
  REQUIRE(sip_map_linear(1, 2, a, &map) == SIP_OK);
  const double m2[2] = {0, 0}, i2[4] = {1, 0, 0, 1};
  const double my[1] = {1.0}, sy[1] = {0.25}, m0[1] = {0.0}, s0[1] = {2.0};
  sip_density *init = nullptr, *fy = nullptr, *push = nullptr;
  REQUIRE(sip_density_gaussian(2, m2, i2, &init) == SIP_OK);
  REQUIRE(sip_density_gaussian(1, my, sy, &fy) == SIP_OK);
  REQUIRE(sip_density_gaussian(1, m0, s0, &push) == SIP_OK);
  sip_solution* s = nullptr;
  REQUIRE(sip_solve_bjw(init, map, fy, push, &s) == SIP_OK);
  CHECK(sip_solution_has_sampler(s) == 0);

  double mean[2], cov[4];
  REQUIRE(sip_gaussian_bjw_linear(1, 2, a, my, sy, m2, i2, mean, cov) == SIP_OK);
  sip_density* closed = nullptr;
  REQUIRE(sip_density_gaussian(2, mean, cov, &closed) == SIP_OK);
  const double pt[2] = {0.3, 0.4};
  double p1 = 0, p2 = 0;
  sip_solution_pdf(s, pt, &p1);
  sip_density_pdf(closed, pt, &p2);
  CHECK(p1 == doctest::Approx(p2).epsilon(1e-10));

  std::vector<double> rows(2 * 500);
  size_t got = 0;
  REQUIRE(sip_solution_sample(s, 500, 2, rows.data(), &got) == SIP_OK);
  CHECK(got == 500);

  for (auto* d : {init, fy, push, closed}) sip_density_free(d);
  sip_solution_free(s);
  sip_map_free(map);
}

TEST_CASE("example registry") {
  CHECK(sip_example_count() == 10);
  CHECK(std::string(sip_example_name(0)) == "two-to-one");
  CHECK(sip_example_name(99) == nullptr);

  sip_run_config cfg;
  sip_run_config_init(&cfg);
  cfg.example = "not-an-example";
  sip_example_result* r = nullptr;
  CHECK(sip_example_run(&cfg, &r) == SIP_ERR_UNKNOWN_EXAMPLE);
  CHECK(std::string(sip_last_error()).find("two-to-one") != std::string::npos);

  cfg.example = "regression-compare";
  cfg.samples = 2000;
  cfg.out = "capi_out";
  REQUIRE(sip_example_run(&cfg, &r) == SIP_OK);
  CHECK(sip_example_result_exit_code(r) == 0);
  CHECK(sip_example_result_check_count(r) >= 5);
  CHECK(sip_example_result_file_count(r) == 4);
  sip_example_result_free(r);
}
