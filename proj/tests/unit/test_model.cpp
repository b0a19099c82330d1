#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "rrsgd/errors.hpp"
#include "rrsgd/model.hpp"
#include "rrsgd/rng.hpp"

using namespace rrsgd;

namespace {

Vector random_vector(Eigen::Index m, CounterRng& rng, double scale = 1.0) {
  Vector v(m);
  for (Eigen::Index i = 0; i < m; ++i) v(i) = scale * rng.normal();
  return v;
}

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& w, double h) {
  Vector g(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    Vector a = w, b = w;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

Dataset scalar_targets(std::initializer_list<double> values) {
  Matrix t(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) t(i++, 0) = v;
  return Dataset::with_targets(t);
}

Matrix one() { return Matrix::Identity(1, 1); }

}  // namespace

TEST_CASE("dataset validation") {
  Matrix f(2, 2);
  f << 1, 2, 3, 4;
  Vector good(2), bad(2);
  good << 1, -1;
  bad << 1, 0;
  CHECK_NOTHROW(Dataset::labeled(f, good));
  CHECK_THROWS_AS(Dataset::labeled(f, bad), ValidationError);
  CHECK_THROWS_AS(Dataset::labeled(f.topRows(1), good.head(1)), ValidationError);
  Matrix nan = f;
  nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(Dataset::labeled(nan, good), ValidationError);
  CHECK_THROWS_AS(Dataset::with_targets(Matrix::Zero(1, 3)), ValidationError);
  CHECK(Dataset::labeled(f, good).positive_fraction() == doctest::Approx(0.5));
}

TEST_CASE("synthetic logistic data") {
  const Dataset a = synth_logistic_dataset(1000, 10, 7);
  const Dataset b = synth_logistic_dataset(1000, 10, 7);
  CHECK(a.rows() == b.rows());
  CHECK(a.labels() == b.labels());
  CHECK(a.n_samples() == 1000);
  CHECK(a.dim() == 10);
  CHECK(synth_logistic_dataset(1000, 10, 8).rows() != a.rows());
  for (Eigen::Index n = 0; n < a.labels().size(); ++n) CHECK(std::abs(a.labels()(n)) == 1.0);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const double pos = synth_logistic_dataset(1000, 10, seed).positive_fraction();
    CHECK(pos >= 0.2);
    CHECK(pos <= 0.8);
  }
  const Dataset tiny = synth_logistic_dataset(2, 1, 1);
  CHECK(tiny.n_samples() == 2);
  CHECK(tiny.dim() == 1);
  CHECK_THROWS_AS(synth_logistic_dataset(1, 10, 1), ValidationError);
  CHECK_THROWS_AS(synth_logistic_dataset(10, 0, 1), ValidationError);
}

TEST_CASE("random orthonormal design") {
  const Matrix a = random_orthonormal(8, 5, 3);
  CHECK((a.transpose() * a - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(random_orthonormal(8, 5, 3) == a);
}

TEST_CASE("quadratic model examples") {
  QuadraticModel model(one(), scalar_targets({-1.0, 1.0}));
  const Vector w0 = Vector::Zero(1);
  CHECK(model.sample_gradient(w0, 0)(0) == doctest::Approx(1.0));
  CHECK(model.sample_gradient(w0, 1)(0) == doctest::Approx(-1.0));
  CHECK(model.full_gradient(w0)(0) == doctest::Approx(0.0));
  CHECK(model.hessian(w0)(0, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(model.sample_gradient(w0, 2), IndexOutOfRangeError);
  CHECK_THROWS_AS(model.sample_gradient(Vector::Zero(2), 0), ValidationError);

  Matrix t(3, 2);
  t << 1, 0, -1, 0, 0, 0;
  QuadraticModel two(Matrix::Identity(2, 2), Dataset::with_targets(t));
  const Vector ws = two.closed_form_minimizer();
  CHECK(ws.norm() < 1e-15);
  CHECK(noise_stats(two, ws).K == doctest::Approx(2.0 / 3.0));

  QuadraticModel ortho(random_orthonormal(6, 3, 1), synth_targets_dataset(10, 6, 2));
  CHECK((ortho.hessian(Vector::Zero(3)) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("quadratic model rejects bad designs") {
  Matrix rank1(3, 2);
  rank1 << 1, 2, 2, 4, 3, 6;
  CHECK_THROWS_AS(QuadraticModel(rank1, synth_targets_dataset(5, 3, 1)), InvalidModelError);
  CHECK_THROWS_AS(QuadraticModel(Matrix::Identity(2, 2), synth_targets_dataset(5, 3, 1)), InvalidModelError);
  CHECK_THROWS_AS(QuadraticModel(Matrix::Identity(3, 3), synth_logistic_dataset(5, 3, 1)), InvalidModelError);
}

TEST_CASE("logistic model gradients and Hessians") {
  const Dataset data = synth_logistic_dataset(30, 4, 5);
  LogisticModel model(data, 0.1);
  CounterRng rng(99, 0);

  SUBCASE("gradient at zero is -gamma h / 2") {
    const Vector w0 = Vector::Zero(4);
    for (std::size_t n = 0; n < 30; ++n) {
      const Vector expect = -0.5 * data.labels()(static_cast<Eigen::Index>(n)) *
                            data.rows().row(static_cast<Eigen::Index>(n)).transpose();
      CHECK((model.sample_gradient(w0, n) - expect).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
  SUBCASE("per-sample finite differences") {
    for (int trial = 0; trial < 20; ++trial) {
      const Vector w = random_vector(4, rng, 0.5);
      const std::size_t n = static_cast<std::size_t>(trial) % 30;
      const Vector fd = fd_gradient([&](const Vector& v) { return model.sample_loss(v, n); }, w, 1e-5);
      CHECK((fd - model.sample_gradient(w, n)).cwiseAbs().maxCoeff() < 1e-6);
      Matrix hfd(4, 4);
      for (Eigen::Index i = 0; i < 4; ++i) {
        Vector a = w, b = w;
        a(i) += 1e-5;
        b(i) -= 1e-5;
        hfd.col(i) = (model.sample_gradient(a, n) - model.sample_gradient(b, n)) / 2e-5;
      }
      CHECK((hfd - model.sample_hessian(w, n)).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
  SUBCASE("risk gradient relative error") {
    for (int trial = 0; trial < 20; ++trial) {
      const Vector w = random_vector(4, rng, 0.5);
      const Vector fd = fd_gradient([&](const Vector& v) { return model.risk(v); }, w, 1e-5);
      const Vector g = model.full_gradient(w);
      CHECK((fd - g).norm() / g.norm() < 1e-5);
    }
  }
  SUBCASE("stable loss for large margins") {
    Vector w = Vector::Constant(4, 200.0);
    for (std::size_t n = 0; n < 30; ++n) CHECK(std::isfinite(model.sample_loss(w, n)));
  }
  CHECK_THROWS_AS(LogisticModel(data, 0.0), StrongConvexityError);
  CHECK_THROWS_AS(LogisticModel(data, -1.0), StrongConvexityError);
  CHECK_THROWS_AS(LogisticModel(synth_targets_dataset(5, 2, 1), 0.1), InvalidModelError);
}

TEST_CASE("sample gradients average to the full gradient") {
  CounterRng rng(3, 3);
  LogisticModel logistic(synth_logistic_dataset(3, 4, 11), 0.1);
  QuadraticModel quad(random_orthonormal(5, 3, 2), synth_targets_dataset(7, 5, 3));
  for (const LossModel* m : {static_cast<const LossModel*>(&logistic), static_cast<const LossModel*>(&quad)}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Vector w = random_vector(static_cast<Eigen::Index>(m->dim()), rng);
      Vector sum = Vector::Zero(w.size());
      Vector noise = Vector::Zero(w.size());
      for (std::size_t n = 0; n < m->n_samples(); ++n) {
        sum += m->sample_gradient(w, n);
        noise += m->gradient_noise(w, n);
      }
      sum /= static_cast<double>(m->n_samples());
      CHECK((sum - m->full_gradient(w)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(noise.cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("strong convexity and Lipschitz witnesses") {
  CounterRng rng(21, 0);
  LogisticModel logistic(synth_logistic_dataset(25, 5, 4), 0.1);
  QuadraticModel quad(random_orthonormal(6, 4, 8), synth_targets_dataset(12, 6, 9));
  for (const LossModel* m : {static_cast<const LossModel*>(&logistic), static_cast<const LossModel*>(&quad)}) {
    const auto d = static_cast<Eigen::Index>(m->dim());
    const double nu = m->strong_convexity();
    for (int pair = 0; pair < 100; ++pair) {
      const Vector a = random_vector(d, rng, 2.0), b = random_vector(d, rng, 2.0);
      const Vector diff = a - b;
      CHECK((m->full_gradient(a) - m->full_gradient(b)).dot(diff) >= nu * diff.squaredNorm() * (1.0 - 1e-12));
      for (std::size_t n = 0; n < m->n_samples(); ++n) {
        const double lhs = (m->sample_gradient(a, n) - m->sample_gradient(b, n)).norm();
        REQUIRE(lhs <= m->sample_lipschitz(n) * diff.norm() * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("minimizer solve") {
  SUBCASE("quadratic matches the closed form") {
    Matrix a(4, 2);
    a << 1, 0.5, 0, 1, 2, 0, 1, 1;
    QuadraticModel model(a, synth_targets_dataset(9, 4, 5));
    const MinimizerResult r = solve_minimizer(model);
    CHECK((r.w_star - model.closed_form_minimizer()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(r.grad_norm <= 1e-10);
    MinimizerOptions gd;
    gd.newton = false;
    CHECK((solve_minimizer(model, gd).w_star - model.closed_form_minimizer()).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("logistic") {
    LogisticModel model(synth_logistic_dataset(25, 5, 7), 0.1);
    const MinimizerResult r = solve_minimizer(model);
    CHECK(model.full_gradient(r.w_star).norm() < 1e-10);
    CHECK(solve_minimizer(model).w_star == r.w_star);
    LogisticModel heavy(synth_logistic_dataset(25, 5, 7), 1e6);
    CHECK(solve_minimizer(heavy).w_star.norm() < 1e-5);
  }
  SUBCASE("budget exhaustion carries the best iterate") {
    LogisticModel model(synth_logistic_dataset(25, 5, 7), 0.1);
    MinimizerOptions tiny;
    tiny.max_iterations = 1;
    tiny.newton = false;
    try {
      solve_minimizer(model, tiny);
      FAIL("expected NonConvergenceError");
    } catch (const NonConvergenceError& e) {
      CHECK(e.best_iterate().size() == 5);
      CHECK(e.best_grad_norm() > 1e-10);
      CHECK(e.best_grad_norm() <= model.full_gradient(Vector::Zero(5)).norm());
    }
  }
}

TEST_CASE("noise statistics") {
  SUBCASE("quadratic covariance is A^T R_xx A") {
    const Matrix a = random_orthonormal(5, 3, 4);
    QuadraticModel model(a, synth_targets_dataset(15, 5, 6));
    const NoiseStats s = noise_stats(model, model.closed_form_minimizer());
    CHECK((s.R_s_star - a.transpose() * model.target_covariance() * a).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(s.K == doctest::Approx(s.R_s_star.trace()).epsilon(1e-12));
    CHECK(s.nu == doctest::Approx(1.0));
    CHECK(s.nu <= s.delta * (1.0 + 1e-12));
  }
  SUBCASE("symmetric scalar targets") {
    const double c = 1.7;
    QuadraticModel model(one(), scalar_targets({-c, c}));
    CHECK(noise_stats(model, model.closed_form_minimizer()).K == doctest::Approx(c * c));
  }
  SUBCASE("logistic constants") {
    const Dataset data = synth_logistic_dataset(20, 3, 2);
    LogisticModel model(data, 0.1);
    const Vector ws = solve_minimizer(model).w_star;
    const NoiseStats s = noise_stats(model, ws);
    double delta = 0.0;
    for (Eigen::Index n = 0; n < 20; ++n) delta = std::max(delta, 0.2 + data.rows().row(n).squaredNorm() / 4.0);
    CHECK(s.delta == doctest::Approx(delta).epsilon(1e-14));
    CHECK(s.nu == doctest::Approx(0.2));
    CHECK(s.K == doctest::Approx(s.R_s_star.trace()).epsilon(1e-12));
    CHECK(s.nu_hessian >= s.nu);
    CHECK(s.nu <= s.delta);
    CHECK_THROWS_AS(noise_stats(model, Vector::Zero(2)), ValidationError);

    // Largest per-sample Hessian eigenvalue over a grid of w reaches delta at w = 0
    // and never exceeds it.
    double grid_max = 0.0;
    for (int a = -4; a <= 4; ++a)
      for (int b = -4; b <= 4; ++b)
        for (int c = -4; c <= 4; ++c) {
          Vector w(3);
          w << 0.25 * a, 0.25 * b, 0.25 * c;
          for (std::size_t n = 0; n < 20; ++n) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(model.sample_hessian(w, n));
            const double top = es.eigenvalues().maxCoeff();
            REQUIRE(top <= model.sample_lipschitz(n) * (1.0 + 1e-12));
            grid_max = std::max(grid_max, top);
          }
        }
    CHECK(grid_max == doctest::Approx(s.delta).epsilon(1e-12));
  }
}
