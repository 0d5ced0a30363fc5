#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "hypodiff/error.hpp"
#include "hypodiff/kernel.hpp"
#include "hypodiff/matrix_exponential.hpp"
#include "hypodiff/model.hpp"
#include "hypodiff/parallel.hpp"
#include "hypodiff/simulate.hpp"

using namespace hypodiff;

namespace {

Matrix chain(int d) {
  Matrix B = Matrix::Zero(d, d);
  for (int i = 1; i < d; ++i) B(i, i - 1) = 1.0;
  return B;
}

Vector vec2(double a, double b) {
  Vector x(2);
  x << a, b;
  return x;
}

ModelSpec zero_noise() {
  return constant_model("zero", chain(2), {1, 1}, Matrix::Zero(1, 1), Vector::Zero(1),
                        Domain::whole_space(2));
}

SimulationOptions opts(double dt, std::size_t n, std::uint64_t seed, unsigned threads = 1) {
  SimulationOptions o;
  o.dt = dt;
  o.n_paths = n;
  o.seed = seed;
  o.threads = threads;
  return o;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(Models, CatalogueAndCoefficients) {
  const auto models = builtin_models();
  ASSERT_EQ(models.size(), 4u);
  const ModelSpec asian = make_builtin("asian");
  EXPECT_DOUBLE_EQ(asian.diffusion_at(0.0, vec2(2.0, 5.0))(0, 0), 4.0);
  EXPECT_FALSE(asian.domain.contains(vec2(0.05, 0.0)));
  EXPECT_TRUE(asian.outer_domain.contains(vec2(0.05, 0.0)));
  EXPECT_DOUBLE_EQ(asian.M, 100.0);
  EXPECT_THROW(make_builtin("nope"), Error);

  SpaceTimeBox box{0.0, 1.0, vec2(-3, -3), vec2(3, 3)};
  const auto k2 = check_coercivity(make_builtin("kolmogorov2"), box, 200, 1);
  EXPECT_TRUE(k2.holds);
  EXPECT_DOUBLE_EQ(make_builtin("kolmogorov2").M, 1.0);
  const auto pert = check_coercivity(make_builtin("perturbed"), box, 2000, 2);
  EXPECT_TRUE(pert.holds);
  EXPECT_GE(pert.min_ratio, 0.5);
  EXPECT_LE(pert.max_ratio, 1.5);
  SpaceTimeBox abox{0.0, 1.0, vec2(0.0, -1), vec2(12.0, 1)};
  EXPECT_TRUE(check_coercivity(asian, abox, 2000, 3).holds);
}

TEST(Models, LowerFactor) {
  Matrix A(2, 2), L(2, 2);
  A << 4, 2, 2, 3;
  ASSERT_TRUE(lower_factor(A, L));
  EXPECT_LE((L * L.transpose() - A).cwiseAbs().maxCoeff(), 1e-14);
  A << 1, 1, 1, 1;  // PSD, singular
  ASSERT_TRUE(lower_factor(A, L));
  EXPECT_LE((L * L.transpose() - A).cwiseAbs().maxCoeff(), 1e-14);
  A << 1, 2, 2, 1;  // indefinite
  EXPECT_FALSE(lower_factor(A, L));
  A << 1, 0.5, 0.0, 1;  // not symmetric
  EXPECT_FALSE(lower_factor(A, L));
}

TEST(Models, DefaultDelta) {
  const ModelSpec asian = make_builtin("asian");
  EXPECT_DOUBLE_EQ(default_delta(asian, vec2(1.0, 0.0)), 0.45);
  EXPECT_DOUBLE_EQ(default_delta(make_builtin("kolmogorov2"), vec2(1.0, 0.0)), 1.0);
}

TEST(Euler, GridAndStart) {
  const auto e = euler_maruyama(make_builtin("kolmogorov2"), 0.25, vec2(0.1, 0.2), 1.25,
                                opts(0.01, 5, 3));
  EXPECT_EQ(e.n_steps, 100);
  const auto times = e.times();
  for (int k = 0; k < e.n_steps; ++k) EXPECT_NEAR(times[k + 1] - times[k], e.dt, 1e-14);
  for (std::size_t p = 0; p < e.n_paths; ++p) EXPECT_EQ(Vector(e.view(p).state(0)), vec2(0.1, 0.2));
}

TEST(Euler, Errors) {
  const ModelSpec k2 = make_builtin("kolmogorov2");
  EXPECT_EQ(kind_of([&] { euler_maruyama(k2, 0.0, vec2(0, 0), 1.0, opts(0.2, 2, 1)); }),
            ErrorKind::StepTooLarge);
  Matrix bad(1, 1);
  bad << -1.0;
  EXPECT_EQ(kind_of([&] {
              constant_model("bad", chain(2), {1, 1}, bad, Vector::Zero(1), Domain::whole_space(2));
            }),
            ErrorKind::NonSPDDiffusion);
  ModelSpec variable = make_builtin("perturbed");
  variable.diffusion = [](double, const Eigen::Ref<const Vector>&, Eigen::Ref<Matrix> out) {
    out(0, 0) = -1.0;
  };
  EXPECT_EQ(kind_of([&] { euler_maruyama(variable, 0.0, vec2(0, 0), 1.0, opts(0.01, 2, 1)); }),
            ErrorKind::NonSPDDiffusion);
}

TEST(Euler, ZeroNoiseFollowsFlow) {
  const auto e = euler_maruyama(zero_noise(), 0.0, vec2(1.0, 0.5), 1.0, opts(1e-3, 3, 1));
  for (std::size_t p = 0; p < e.n_paths; ++p) {
    const Vector xT = e.view(p).final_state();
    EXPECT_LE((xT - mat_exp(chain(2), 1.0) * vec2(1.0, 0.5)).norm(), 1e-12);
  }
}

TEST(Euler, DegenerateCoordinatesGetNoNoise) {
  const auto e = euler_maruyama(make_builtin("kolmogorov3"), 0.0, Vector::Zero(3), 0.1,
                                opts(0.01, 20, 4));
  const Matrix B = chain(3);
  for (std::size_t p = 0; p < e.n_paths; ++p) {
    const auto v = e.view(p);
    for (int k = 0; k < v.n_steps; ++k) {
      const Vector pred = v.state(k) + v.dt * (B * v.state(k));
      for (int i = 1; i < 3; ++i) EXPECT_EQ(v.state(k + 1)(i), pred(i));
    }
  }
}

TEST(Euler, BitwiseReproducibleAcrossThreads) {
  const ModelSpec asian = make_builtin("asian");
  const auto a = euler_maruyama(asian, 0.0, vec2(1.0, 0.0), 0.5, opts(0.01, 700, 77, 1));
  const auto b = euler_maruyama(asian, 0.0, vec2(1.0, 0.0), 0.5, opts(0.01, 700, 77, 4));
  const auto c = euler_maruyama(asian, 0.0, vec2(1.0, 0.0), 0.5, opts(0.01, 700, 77, 8));
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.states, c.states);
  const auto d = euler_maruyama(asian, 0.0, vec2(1.0, 0.0), 0.5, opts(0.01, 700, 78, 1));
  EXPECT_NE(a.states, d.states);
}

TEST(Euler, AsianGbmMoments) {
  const auto e =
      euler_maruyama(make_builtin("asian"), 0.0, vec2(1.0, 0.0), 1.0, opts(1e-3, 20000, 12));
  std::vector<double> x1(e.n_paths), sq(e.n_paths);
  for (std::size_t p = 0; p < e.n_paths; ++p) {
    x1[p] = e.view(p).final_state()(0);
    sq[p] = (x1[p] - 1.0) * (x1[p] - 1.0);
  }
  const MeanSe m = mean_se(x1);
  EXPECT_LE(std::abs(m.mean - 1.0), 3.0 * m.se);
  const MeanSe v = mean_se(sq);
  EXPECT_LE(std::abs(v.mean - (std::exp(1.0) - 1.0)), 3.0 * v.se);
}

TEST(Euler, ConstantModelWeakMoments) {
  const double s = 0.5;
  const Vector x0 = vec2(0.3, -0.1);
  const auto e = euler_maruyama(make_builtin("kolmogorov2"), 0.0, x0, s, opts(1e-3, 20000, 5));
  const Vector mean = mat_exp(chain(2), s) * x0;
  const Matrix cov = covariance(s, GaussianKernelParams(chain(2), 1, 1.0)).matrix;
  const std::size_t n = e.n_paths;
  for (int i = 0; i < 2; ++i) {
    std::vector<double> xi(n);
    for (std::size_t p = 0; p < n; ++p) xi[p] = e.view(p).final_state()(i);
    const MeanSe m = mean_se(xi);
    EXPECT_LE(std::abs(m.mean - mean(i)), 3.0 * m.se);
    for (int j = 0; j <= i; ++j) {
      std::vector<double> c(n);
      for (std::size_t p = 0; p < n; ++p) {
        const Vector y = e.view(p).final_state();
        c[p] = (y(i) - mean(i)) * (y(j) - mean(j));
      }
      const MeanSe mc = mean_se(c);
      EXPECT_LE(std::abs(mc.mean - cov(i, j)), 3.0 * mc.se + 2e-3 * std::abs(cov(i, j)));
    }
  }
}

TEST(ExitTimes, Examples) {
  const auto e = euler_maruyama(zero_noise(), 0.0, vec2(1.0, 0.0), 1.0, opts(1e-3, 2, 1));
  const auto none = first_exit_time(e, [](const Eigen::Ref<const Vector>&) { return true; });
  for (const auto& t : none) EXPECT_FALSE(t.has_value());
  // x2(t) = t crosses 0.37 at t* = 0.37.
  const auto cross =
      first_exit_time(e, [](const Eigen::Ref<const Vector>& x) { return x(1) < 0.37; });
  for (const auto& t : cross) {
    ASSERT_TRUE(t.has_value());
    EXPECT_GE(*t, 0.37 - 1e-12);
    EXPECT_LE(*t, 0.37 + 1e-3 + 1e-12);
  }
  EXPECT_EQ(kind_of([&] {
              first_exit_time(e, [](const Eigen::Ref<const Vector>& x) { return x(0) > 2.0; });
            }),
            ErrorKind::StartOutsideRegion);
}

TEST(Localization, SyntheticPaths) {
  const Cylinder S(vec2(0.0, 0.0), 0.5);
  const Ball V{vec2(0.0, 0.0), 0.2};
  check_inner_contained(S, V);
  EXPECT_EQ(kind_of([&] { check_inner_contained(S, Ball{vec2(0.0, 0.0), 0.6}); }),
            ErrorKind::InnerNotContained);

  // x1 on the grid k * 0.01: 0 until k=10, then 0.6 (outside S: half width 0.5)
  // until k=20, then back to 0.1 (inside V).
  const int n = 30;
  std::vector<double> states;
  for (int k = 0; k <= n; ++k) {
    const double x1 = k < 10 ? 0.0 : (k < 20 ? 0.6 : 0.1);
    states.push_back(x1);
    states.push_back(0.0);
  }
  PathView v{0.0, 0.01, n, 2, states, std::nullopt};
  const auto st = localization_times(v, S, V);
  ASSERT_EQ(st.sigma.size(), 2u);
  ASSERT_EQ(st.tau.size(), 1u);
  EXPECT_DOUBLE_EQ(st.sigma[0], 0.0);
  EXPECT_NEAR(st.tau[0], 0.10, 1e-12);
  EXPECT_NEAR(st.sigma[1], 0.20, 1e-12);
  for (std::size_t i = 0; i < st.tau.size(); ++i) {
    EXPECT_LE(st.sigma[i], st.tau[i]);
    if (i + 1 < st.sigma.size()) EXPECT_LT(st.tau[i], st.sigma[i + 1]);
  }

  // Never leaving V.
  std::vector<double> still(2 * (n + 1), 0.0);
  PathView w{0.0, 0.01, n, 2, still, std::nullopt};
  const auto st2 = localization_times(w, S, V);
  ASSERT_EQ(st2.sigma.size(), 1u);
  EXPECT_TRUE(st2.tau.empty());

  // Starting outside closed V, entering at k = 5.
  std::vector<double> enter;
  for (int k = 0; k <= n; ++k) {
    enter.push_back(k < 5 ? 0.3 : 0.0);
    enter.push_back(0.0);
  }
  PathView u{0.0, 0.01, n, 2, enter, std::nullopt};
  EXPECT_NEAR(localization_times(u, S, V).sigma.at(0), 0.05, 1e-12);
}

TEST(EnsembleIo, BinaryRoundTripAndCsv) {
  const auto e = euler_maruyama(make_builtin("kolmogorov2"), 0.0, vec2(0.1, 0.2), 0.1,
                                opts(0.01, 4, 99));
  std::stringstream bin;
  write_binary(e, bin);
  EXPECT_EQ(bin.str().size(), 5 * 8 + e.states.size() * 8);
  // First header field is d = 2 little-endian.
  EXPECT_EQ(static_cast<unsigned char>(bin.str()[0]), 2u);
  EXPECT_EQ(static_cast<unsigned char>(bin.str()[1]), 0u);
  const auto r = read_binary(bin);
  EXPECT_EQ(r.d, e.d);
  EXPECT_EQ(r.n_paths, e.n_paths);
  EXPECT_EQ(r.n_steps, e.n_steps);
  EXPECT_EQ(r.dt, e.dt);
  EXPECT_EQ(r.seed, e.seed);
  EXPECT_EQ(r.states, e.states);
  std::stringstream truncated(bin.str().substr(0, 20));
  EXPECT_THROW(read_binary(truncated), Error);

  std::stringstream csv;
  write_csv(e, csv);
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "path,step,t,x1,x2");
  std::string first;
  std::getline(csv, first);
  EXPECT_EQ(first, "0,0,0,0.10000000000000001,0.20000000000000001");
}
