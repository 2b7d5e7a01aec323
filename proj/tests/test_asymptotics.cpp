#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "acg/asymptotics.hpp"
#include "acg/error.hpp"
#include "acg/exact_kernel.hpp"
#include "test_support.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace acg;
using namespace acg::test;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an acg::Error");
  return ErrorCode::io;
}

DoubleVector dv(int K, std::vector<double> values) {
  Vector v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) v(i) = values[i];
  return DoubleVector(K, v);
}

DoubleVector random_dv(int K, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  DoubleVector a(K);
  for (int i = 0; i < 2 * K; ++i) a.data()(i) = g(rng);
  return a;
}

EdgeTypeDist random_q(int K, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Matrix m = Matrix::Zero(K + 1, K + 1);
  for (int k = 1; k <= K; ++k) {
    for (int j = 1; j <= K; ++j) m(k, j) = u(rng);
  }
  return EdgeTypeDist::from_weights(m / m.sum());
}

Matrix fd_hessian(const DoubleVector& alpha, const DoubleVector& e, const EdgeTypeDist& q) {
  const int n = 2 * alpha.max_degree();
  const double h = 1e-4;
  Matrix H(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      auto f = [&](double da, double db) {
        DoubleVector p = alpha;
        p.data()(a) += da;
        p.data()(b) += db;
        return h_value(p, e, q);
      };
      H(a, b) = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
    }
  }
  return H;
}

Matrix random_orthonormal_complement(int K, std::mt19937_64& rng) {
  const Matrix base = gauge_complement_basis(K);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix r(base.cols(), base.cols());
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = g(rng);
  Eigen::HouseholderQR<Matrix> qr(r);
  const Matrix rot = qr.householderQ();
  return base * rot;
}

}  // namespace

TEST_CASE("H values") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const EdgeTypeDist q = random_q(3, rng);
    CHECK(h_value(DoubleVector(3), random_dv(3, rng), q) == doctest::Approx(1.0).epsilon(1e-14));
  }
  const DoubleVector ones = DoubleVector::ones(1);
  CHECK(h_value(ones, dv(1, {1, 1}), single_edge_type()) ==
        doctest::Approx(std::exp(2.0) - 2.0).epsilon(1e-14));
}

TEST_CASE("double vector constants") {
  const DoubleVector d = DoubleVector::delta(3, 2, 3);
  CHECK(d.minus(2) == 1.0);
  CHECK(d.plus(3) == 1.0);
  CHECK(d.data().sum() == 2.0);
  CHECK(d.dot(DoubleVector::gauge(3)) == 0.0);
  CHECK((DoubleVector::ones_minus(2) + DoubleVector::ones_plus(2)).data() ==
        DoubleVector::ones(2).data());
  const DoubleVector x = DoubleVector::from_margins(margins({1, 2}, {3, 4}));
  CHECK(x.minus(2) == 2.0);
  CHECK(x.plus(1) == 3.0);
}

TEST_CASE("gauge invariance") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int K = 1 + trial % 3;
    const EdgeTypeDist q = random_q(K, rng);
    DoubleVector e = random_dv(K, rng);
    e = project_gauge(e);  // 1̃·e = 0
    const DoubleVector a = random_dv(K, rng);
    const double shifted = h_value(a + DoubleVector::gauge(K) * u(rng), e, q);
    CHECK(std::abs(shifted - h_value(a, e, q)) <= 1e-12 * std::max(1.0, std::abs(shifted)));
  }
}

TEST_CASE("scaling identity") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.2, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int K = 1 + trial % 3;
    const EdgeTypeDist q = random_q(K, rng);
    const DoubleVector e = random_dv(K, rng);
    const DoubleVector a = random_dv(K, rng, 0.5);
    const double lambda = u(rng);
    const double half_log = std::log(lambda) / 2;
    const double lhs = h_value(a, e * lambda, q);
    const double rhs = lambda * h_value(a - DoubleVector::ones(K) * half_log, e, q) -
                       lambda * half_log * DoubleVector::ones(K).dot(e);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("gradient and Hessian") {
  std::mt19937_64 rng(4);
  SUBCASE("gradient vanishes at the Q margins") {
    for (int trial = 0; trial < 10; ++trial) {
      const EdgeTypeDist q = random_q(3, rng);
      const Vector g = h_gradient(DoubleVector(3), DoubleVector::from_marginals(q), q);
      CHECK(g.norm() <= 1e-14);
    }
  }
  SUBCASE("finite differences at 20 random points") {
    const double h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
      const int K = 1 + trial % 3;
      const EdgeTypeDist q = random_q(K, rng);
      const DoubleVector e = random_dv(K, rng);
      const DoubleVector a = random_dv(K, rng, 0.5);
      const Vector g = h_gradient(a, e, q);
      for (int i = 0; i < 2 * K; ++i) {
        DoubleVector up = a, down = a;
        up.data()(i) += h;
        down.data()(i) -= h;
        CHECK(std::abs((h_value(up, e, q) - h_value(down, e, q)) / (2 * h) - g(i)) <= 1e-6);
      }
      const Matrix H = h_hessian(a, q);
      CHECK((fd_hessian(a, e, q) - H).cwiseAbs().maxCoeff() <= 1e-5);
    }
  }
  SUBCASE("PSD with null direction 1̃") {
    for (int trial = 0; trial < 50; ++trial) {
      const int K = 1 + trial % 4;
      const EdgeTypeDist q = random_q(K, rng);
      const DoubleVector a = random_dv(K, rng);
      const Matrix H = h_hessian(a, q);
      CHECK((H * DoubleVector::gauge(K).data()).norm() <= 1e-12 * std::max(1.0, H.norm()));
      Eigen::SelfAdjointEigenSolver<Matrix> es(H);
      CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    }
  }
}

TEST_CASE("gauge complement basis") {
  for (int K = 1; K <= 4; ++K) {
    const Matrix B = gauge_complement_basis(K);
    CHECK(B.rows() == 2 * K);
    CHECK(B.cols() == 2 * K - 1);
    CHECK((B.transpose() * B - Matrix::Identity(2 * K - 1, 2 * K - 1)).norm() <= 1e-12);
    CHECK((B.transpose() * DoubleVector::gauge(K).data()).norm() <= 1e-12);
  }
}

TEST_CASE("critical points") {
  SUBCASE("at the Q margins") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      const EdgeTypeDist q = random_q(1 + trial % 3, rng);
      const CriticalPointResult r = solve_critical_point(DoubleVector::from_marginals(q), q);
      CHECK(r.alpha.data().norm() <= 1e-12);
      CHECK(r.h_at_min == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(r.iterations == 0);
    }
  }
  SUBCASE("disassortative fixture") {
    const CriticalPointResult r =
        solve_critical_point(dv(2, {1.0 / 3, 2.0 / 3, 1.0 / 3, 2.0 / 3}), bal2_disassortative());
    CHECK(r.alpha.data().norm() <= 1e-12);
  }
  SUBCASE("independent Q off the critical margins, against coordinate descent") {
    const EdgeTypeDist q = bal2_independent();
    const DoubleVector x = dv(2, {2.0 / 3, 1.0 / 3, 2.0 / 3, 1.0 / 3});
    const CriticalPointResult r = solve_critical_point(x, q);
    CHECK(r.gradient_norm < 1e-10);
    CHECK(std::abs(r.alpha.dot(DoubleVector::gauge(2))) <= 1e-12);
    std::mt19937_64 rng(6);
    for (int start = 0; start < 10; ++start) {
      const DoubleVector oracle = coordinate_descent(x, q, random_dv(2, rng, 2.0));
      CHECK((oracle - r.alpha).data().norm() <= 1e-8);
    }
  }
  SUBCASE("random consistent pairs, against coordinate descent") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.2, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      const int K = 2 + trial % 2;
      const EdgeTypeDist q = random_q(K, rng);
      DoubleVector x(K);
      double sm = 0.0, sp = 0.0;
      for (int d = 1; d <= K; ++d) {
        sm += x.minus(d) = u(rng);
        sp += x.plus(d) = u(rng);
      }
      for (int d = 1; d <= K; ++d) {
        x.minus(d) /= sm;
        x.plus(d) /= sp;
      }
      const CriticalPointResult r = solve_critical_point(x, q);
      CHECK(r.gradient_norm <= 1e-10);
      const DoubleVector oracle = coordinate_descent(x, q, DoubleVector(K));
      CHECK((oracle - r.alpha).data().norm() <= 1e-8);
    }
  }
  SUBCASE("domain errors") {
    const EdgeTypeDist q = bal2_disassortative();
    CHECK(code_of([&] { solve_critical_point(dv(2, {0.5, 0.5, 0.4, 0.4}), q); }) ==
          ErrorCode::unsupported_margin);
    Matrix m = Matrix::Zero(3, 3);
    m(1, 1) = 0.5;
    m(1, 2) = 0.5;
    const EdgeTypeDist partial = EdgeTypeDist::from_weights(m);  // Q⁺_2 = 0
    CHECK(code_of([&] { solve_critical_point(dv(2, {0.5, 0.5, 0.5, 0.5}), partial); }) ==
          ErrorCode::unsupported_margin);
    CriticalPointOptions tight;
    tight.max_iterations = 1;
    CHECK(code_of([&] {
            solve_critical_point(dv(2, {0.9, 0.1, 0.05, 0.95}), bal2_independent(), tight);
          }) == ErrorCode::no_convergence);
  }
}

TEST_CASE("projected Hessian determinant") {
  CHECK(det0_hessian(DoubleVector(1), single_edge_type()) == doctest::Approx(2.0).epsilon(1e-13));
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int K = 1 + trial % 3;
    const EdgeTypeDist q = random_q(K, rng);
    const DoubleVector a = random_dv(K, rng, 0.5);
    const double d1 = det0_hessian(a, q, random_orthonormal_complement(K, rng));
    const double d2 = det0_hessian(a, q, random_orthonormal_complement(K, rng));
    CHECK(std::abs(d1 - d2) <= 1e-10 * std::max(1.0, std::abs(d1)));
    CHECK(det0_hessian(a, q) == doctest::Approx(d1).epsilon(1e-10));
  }
  const EdgeTypeDist q = bal2_independent();
  const DoubleVector x = DoubleVector::from_marginals(q);
  const Matrix B = gauge_complement_basis(2);
  const double fd = (B.transpose() * fd_hessian(DoubleVector(2), x, q) * B).determinant();
  CHECK(std::abs(det0_hessian(DoubleVector(2), q) - fd) <= 1e-6);
  CHECK(det0_hessian(DoubleVector(2), q) > 0.0);
  Matrix m = Matrix::Zero(3, 3);
  m(1, 1) = 0.5;
  m(2, 2) = 0.5;
  CHECK(code_of([&] { det0_hessian(DoubleVector(2), EdgeTypeDist::from_weights(m)); }) ==
        ErrorCode::singular_hessian);
}

TEST_CASE("exact I") {
  const double two_pi = 2 * std::numbers::pi;
  CHECK(exact_I(margins({1}, {1}), single_edge_type()) ==
        doctest::Approx(two_pi * two_pi).epsilon(1e-13));
  CHECK(exact_I(margins({1, 2}, {1, 2}), bal2_independent()) ==
        doctest::Approx(std::pow(two_pi, 4) * 24.0 / 729).epsilon(1e-12));
  for (const NodeTypeSequence& x : small_fixtures()) {
    const StubMargins m = sequence_margins(x);
    if (!enumerate_tables(m, bal2_disassortative()).empty()) {
      CHECK(exact_I(m, bal2_disassortative()) > 0.0);
    }
  }
}

TEST_CASE("Fourier integrand is 2π-periodic in every coordinate") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
  std::uniform_int_distribution<int> eta(-3, 3);
  const DoubleVector e = DoubleVector::from_margins(margins({1, 2}, {1, 2}));
  for (int trial = 0; trial < 20; ++trial) {
    Vector a(4), b(4);
    for (int i = 0; i < 4; ++i) {
      a(i) = u(rng);
      b(i) = a(i) + 2 * std::numbers::pi * eta(rng);
    }
    CHECK(std::abs(fourier_integrand(a, e, bal2_independent()) -
                   fourier_integrand(b, e, bal2_independent())) <= 1e-12);
  }
  // averaging the integrand over the torus recovers Z
  const int grid = 8;
  std::complex<double> sum = 0.0;
  Vector u4(4);
  for (int i0 = 0; i0 < grid; ++i0) {
    for (int i1 = 0; i1 < grid; ++i1) {
      for (int i2 = 0; i2 < grid; ++i2) {
        for (int i3 = 0; i3 < grid; ++i3) {
          u4 << i0, i1, i2, i3;
          sum += fourier_integrand(u4 * (2 * std::numbers::pi / grid), e, bal2_independent());
        }
      }
    }
  }
  const double average = sum.real() / std::pow(grid, 4);
  CHECK(average == doctest::Approx(24.0 / 729).epsilon(1e-3));
}

TEST_CASE("Laplace approximation") {
  SUBCASE("ratio settles along m·(1,2;1,2)") {
    std::vector<double> ratios;
    for (int mult : {5, 10, 20}) {
      const StubMargins e = margins({mult, 2 * mult}, {mult, 2 * mult});
      ratios.push_back(std::exp(log_exact_I(e, bal2_independent()) -
                                log_laplace_I_approx(e, bal2_independent())));
    }
    CHECK(std::abs(ratios[2] - ratios[1]) < std::abs(ratios[1] - ratios[0]));
  }
  SUBCASE("finite at E = 10^4") {
    const double v = log_laplace_I_approx(margins({3333, 6667}, {3333, 6667}), bal2_independent());
    CHECK(std::isfinite(v));
  }
  SUBCASE("exponent at the critical margins") {
    const int K = 2;
    const double E = 3000;
    const StubMargins e = margins({1000, 2000}, {1000, 2000});
    const double det = det0_hessian(DoubleVector(K), bal2_independent());
    const double expected = (K + 0.5) * std::log(2 * std::numbers::pi) + (0.5 - K) * std::log(E) -
                            E * std::log(E) + E - 0.5 * std::log(det);
    CHECK(log_laplace_I_approx(e, bal2_independent()) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("asymptotic edge means") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const int K = 1 + trial % 3;
    const EdgeTypeDist q = random_q(K, rng);
    const DoubleVector x = DoubleVector::from_marginals(q);
    for (int k = 1; k <= K; ++k) {
      for (int j = 1; j <= K; ++j) {
        CHECK(asymptotic_edge_mean(x, q, k, j) == doctest::Approx(q(k, j)).epsilon(1e-12));
      }
    }
  }
  const DoubleVector x = dv(2, {1.0 / 3, 2.0 / 3, 1.0 / 3, 2.0 / 3});
  CHECK(asymptotic_edge_mean(x, bal2_disassortative(), 2, 2) ==
        doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(exact_edge_mean(margins({1, 2}, {1, 2}), bal2_disassortative(), 2, 2).value() / 3 ==
        doctest::Approx(1.0 / 3).epsilon(1e-12));

  SUBCASE("limits reproduce the margins") {
    const DoubleVector xn = dv(3, {0.2, 0.3, 0.5, 0.6, 0.1, 0.3});
    const EdgeTypeDist q = random_q(3, rng);
    const CriticalPointResult crit = solve_critical_point(xn, q);
    for (int d = 1; d <= 3; ++d) {
      double row = 0.0, col = 0.0;
      for (int o = 1; o <= 3; ++o) {
        row += asymptotic_edge_mean(crit, q, d, o);
        col += asymptotic_edge_mean(crit, q, o, d);
      }
      CHECK(row == doctest::Approx(xn.plus(d)).epsilon(1e-9));
      CHECK(col == doctest::Approx(xn.minus(d)).epsilon(1e-9));
    }
  }
  SUBCASE("independent Q gives the product of the margins") {
    const DoubleVector xn = dv(2, {2.0 / 3, 1.0 / 3, 1.0 / 3, 2.0 / 3});
    CHECK(asymptotic_edge_mean(xn, bal2_independent(), 2, 1) ==
          doctest::Approx(2.0 / 3 * 2.0 / 3).epsilon(1e-10));
  }
  SUBCASE("exact means approach the limit at a non-critical x") {
    const EdgeTypeDist q = random_q(2, rng);
    const DoubleVector xn = dv(2, {2.0 / 3, 1.0 / 3, 1.0 / 3, 2.0 / 3});
    const CriticalPointResult crit = solve_critical_point(xn, q);
    for (int k = 1; k <= 2; ++k) {
      for (int j = 1; j <= 2; ++j) {
        const double limit = asymptotic_edge_mean(crit, q, k, j);
        double previous = INFINITY;
        for (int mult : {2, 5, 10}) {
          const StubMargins e = margins({2 * mult, mult}, {mult, 2 * mult});
          const double gap = std::abs(exact_edge_mean(e, q, k, j).value() / (3 * mult) - limit);
          CHECK(gap < previous);
          previous = gap;
        }
      }
    }
  }
}
