#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "forward_maps.hpp"
#include "newton.hpp"

#include <cmath>

using namespace siplab;

namespace {

Vector vec2(double a, double b) { return (Vector(2) << a, b).finished(); }

Matrix random_matrix(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = standard_normal(rng);
  return m;
}

}  // namespace

TEST_CASE("eval on the built-in maps") {
  Matrix a(1, 2);
  a << -1.0 / 3.0, 4.0 / 3.0;
  CHECK(linear_map(a).eval(vec2(1, 1))[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(half_squared_radius_map().eval(vec2(1, 1))[0] == 1.0);
  CHECK(identity_map(2).eval(vec2(0.3, 0.7)) == vec2(0.3, 0.7));
  CHECK_THROWS_AS(half_squared_radius_map().eval(vec2(1.5, 0.2)), Error);
}

TEST_CASE("jacobians") {
  Matrix a(1, 2);
  a << -1.0 / 3.0, 4.0 / 3.0;
  CHECK(linear_map(a).jacobian_at(vec2(5, -2)).jacobian == a);

  const ForwardMap polar = half_squared_radius_map();
  const JacobianReport r = polar.jacobian_at(vec2(1, 1));
  CHECK(r.jacobian(0, 0) == 1.0);
  CHECK(r.jacobian(0, 1) == 1.0);
  CHECK(r.row_rank == 1);
  CHECK(r.analytic);

  const Matrix fd = polar.with_finite_differences().jacobian(vec2(0.5, 0.2));
  CHECK(std::abs(fd(0, 0) - 0.5) <= 1e-6 * 0.5);
  CHECK(std::abs(fd(0, 1) - 0.2) <= 1e-6 * 0.2);
}

TEST_CASE("finite differences match analytic Jacobians at 100 points") {
  for (const ForwardMap& map : {half_squared_radius_map(), square_map(-1.0, 1.0), sum_map()}) {
    for (const Vector& x : domain_probes(map.domain(), 100, 4)) {
      const Matrix exact = map.jacobian(x);
      const Matrix fd = map.finite_difference_jacobian(x);
      CHECK((exact - fd).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, exact.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("identity augmentation") {
  const AugmentedMap same = augment_identity(square_map(-1.0, 1.0));
  CHECK(same.aux_count() == 0);
  CHECK(same.eval(Vector::Constant(1, 0.5))[0] == 0.25);

  const AugmentedMap sum = augment_identity(sum_map());
  CHECK(sum.eval(vec2(0.3, 0.4)).isApprox(vec2(0.7, 0.4)));
  CHECK(sum.determinant(vec2(0.3, 0.4)) == doctest::Approx(1.0));

  const ForwardMap second("theta2", 2, 1, [](const Vector& t) { return Vector::Constant(1, t[1]); },
                          [](const Vector&) { return (Matrix(1, 2) << 0.0, 1.0).finished(); },
                          Support::whole(2));
  try {
    augment_identity(second);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kRankDeficient);
    CHECK(std::string(e.what()).find("permut") != std::string::npos);
  }
}

TEST_CASE("augmented determinant equals the left block determinant") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const int p = 1 + static_cast<int>(uniform01(rng) * 6);
    const int q = 1 + static_cast<int>(uniform01(rng) * p);
    const Matrix a = random_matrix(rng, q, p);
    // A smooth nonlinear map with an analytic Jacobian: g = A tanh(theta).
    const ForwardMap g(
        "tanh", p, q, [a](const Vector& t) -> Vector { return a * t.array().tanh().matrix(); },
        [a](const Vector& t) -> Matrix {
          return a * (1.0 - t.array().tanh().square()).matrix().asDiagonal();
        },
        Support::whole(p));
    const Vector theta = random_matrix(rng, p, 1);
    const AugmentedMap aug = augment_identity(g, {theta});
    const double left = g.jacobian(theta).leftCols(q).determinant();
    CHECK(std::abs(aug.determinant(theta) - left) <= 1e-10 * std::max(1.0, std::abs(left)));
  }
}

TEST_CASE("null space rows") {
  Matrix a(1, 2);
  a << -1.0 / 3.0, 4.0 / 3.0;
  const Matrix perp = null_space_rows(a);
  REQUIRE(perp.rows() == 1);
  CHECK(std::abs((a * perp.transpose())(0, 0)) <= 1e-12);
  Vector expected = vec2(4.0 / 3.0, 1.0 / 3.0).normalized();
  CHECK(std::abs(std::abs(perp.row(0).dot(expected)) - 1.0) <= 1e-12);

  CHECK(null_space_rows(Matrix::Identity(2, 2)).rows() == 0);

  const Matrix ones = Matrix::Ones(1, 3);
  const Matrix plane = null_space_rows(ones);
  CHECK(plane.rows() == 2);
  CHECK((plane * plane.transpose() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((ones * plane.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(null_space_rows(Matrix::Ones(2, 3)), Error);
}

TEST_CASE("random full-row-rank matrices up to 8 x 12") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int p = 1 + static_cast<int>(uniform01(rng) * 12);
    const int q = 1 + static_cast<int>(uniform01(rng) * std::min(p, 8));
    const Matrix a = random_matrix(rng, q, p);
    const Matrix perp = null_space_rows(a);
    CHECK(perp.rows() == p - q);
    if (p > q) CHECK((a * perp.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, a.norm()));
    Matrix stacked(p, p);
    stacked << a, perp;
    const Eigen::JacobiSVD<Matrix> svd(stacked);
    const double cond = svd.singularValues()(0) / svd.singularValues()(p - 1);
    CHECK(std::isfinite(cond));
  }
}

TEST_CASE("newton solves") {
  Matrix a(2, 3);
  a << 1, 2, 0, 0, 1, 1;
  const ForwardMap lin = linear_map(a);
  const Vector tail = Vector::Constant(1, 0.5);
  const NewtonResult r = newton_solve(lin, vec2(1.0, 2.0), tail, Vector::Zero(2));
  REQUIRE(r.converged);
  CHECK(r.iterations == 1);
  Vector theta(3);
  theta << r.head, tail;
  CHECK((a * theta - vec2(1.0, 2.0)).lpNorm<Eigen::Infinity>() <= 1e-10 * 3.0);

  const ForwardMap sq = square_map(-2.0, 2.0);
  const NewtonResult pos = newton_solve(sq, Vector::Constant(1, 0.25), Vector(0), Vector::Constant(1, 1.0));
  const NewtonResult neg = newton_solve(sq, Vector::Constant(1, 0.25), Vector(0), Vector::Constant(1, -1.0));
  REQUIRE(pos.converged);
  REQUIRE(neg.converged);
  CHECK(pos.head[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(neg.head[0] == doctest::Approx(-0.5).epsilon(1e-10));

  const NewtonResult none = newton_solve(sq, Vector::Constant(1, -1.0), Vector(0), Vector::Constant(1, 1.0));
  CHECK_FALSE(none.converged);
}
