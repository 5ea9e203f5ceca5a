#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "crimelab/discretization.hpp"

using namespace crimelab;

namespace {

const double kPi = std::acos(-1.0);

double sum(const Field& f) { return std::accumulate(f.begin(), f.end(), 0.0); }

double max_abs(const Field& f) {
  double m = 0.0;
  for (double x : f) m = std::max(m, std::abs(x));
  return m;
}

State random_state(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.1, 3.0);
  State s;
  s.u.resize(n);
  s.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.u[i] = d(rng);
    s.v[i] = d(rng);
  }
  return s;
}

// Smooth Neumann-compatible fields and their exact semi-discrete targets.
struct Manufactured {
  double a = 0.5, b = 0.5, chi = 3.0;
  double u(double x) const { return 1.0 + a * std::cos(kPi * x); }
  double v(double x) const { return 2.0 + b * std::cos(kPi * x); }
  double du_dt(double x) const {
    const double c = std::cos(kPi * x), s = std::sin(kPi * x);
    const double ux = -a * kPi * s, uxx = -a * kPi * kPi * c;
    const double vx = -b * kPi * s, vxx = -b * kPi * kPi * c;
    const double uu = u(x), vv = v(x);
    const double flux_x = chi * ((ux * vv - uu * vx) / (vv * vv) * vx + uu / vv * vxx);
    return uxx - flux_x - uu * vv + 1.0;
  }
  double dv_dt(double x) const {
    const double vxx = -b * kPi * kPi * std::cos(kPi * x);
    return vxx + u(x) * v(x) - v(x) + 1.0;
  }
};

double manufactured_error(std::size_t n, FaceAverage mode) {
  const Manufactured m;
  const Grid g(1.0, n);
  State s;
  for (std::size_t i = 0; i < n; ++i) {
    s.u.push_back(m.u(g.center(i)));
    s.v.push_back(m.v(g.center(i)));
  }
  const auto one = SourceSpec::constant(1.0);
  const auto r = rhs(s, ModelParams(m.chi), one, one, g, mode);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    err = std::max(err, std::abs(r.du_dt[i] - m.du_dt(g.center(i))));
    err = std::max(err, std::abs(r.dv_dt[i] - m.dv_dt(g.center(i))));
  }
  return err;
}

}  // namespace

TEST(Laplacian, ConstantFieldIsZero) {
  const Grid g(1.0, 10);
  for (double x : laplacian(Field(10, 3.7), g)) EXPECT_EQ(x, 0.0);
}

TEST(Laplacian, QuadraticGivesTwoOnInteriorCells) {
  const Grid g(1.0, 50);
  Field f;
  for (double x : g.centers()) f.push_back(x * x);
  const Field l = laplacian(f, g);
  for (std::size_t i = 1; i + 1 < g.n_cells(); ++i) EXPECT_NEAR(l[i], 2.0, 1e-9);
}

TEST(Laplacian, SpikeGivesStencilRow) {
  const Grid g(1.0, 8);
  Field f(8, 0.0);
  f[4] = 1.0;
  const Field l = laplacian(f, g);
  const double inv_h2 = 1.0 / (g.h() * g.h());
  EXPECT_DOUBLE_EQ(l[3], inv_h2);
  EXPECT_DOUBLE_EQ(l[4], -2.0 * inv_h2);
  EXPECT_DOUBLE_EQ(l[5], inv_h2);
  EXPECT_EQ(l[0], 0.0);
  EXPECT_EQ(l[7], 0.0);
}

TEST(Laplacian, SumsToZero) {
  const Grid g(1.0, 37);
  const State s = random_state(37, 3);
  EXPECT_NEAR(sum(laplacian(s.u, g)), 0.0, 1e-9 * max_abs(laplacian(s.u, g)));
}

TEST(Taxis, ConstantVGivesZeroFlux) {
  const Grid g(1.0, 12);
  const State s = random_state(12, 1);
  for (double f : taxis_fluxes(s.u, Field(12, 2.0), 5.0, g)) EXPECT_EQ(f, 0.0);
}

TEST(Taxis, LinearVFaceFlux) {
  const Grid g(1.0, 10);
  Field u(10, 1.0);
  Field v;
  for (double x : g.centers()) v.push_back(1.0 + x);
  const Field f = taxis_fluxes(u, v, 2.0, g);
  ASSERT_EQ(f.size(), 11u);
  EXPECT_EQ(f.front(), 0.0);
  EXPECT_EQ(f.back(), 0.0);
  for (std::size_t i = 0; i + 1 < 10; ++i) {
    const double mean_inv_v = 0.5 * (1.0 / v[i] + 1.0 / v[i + 1]);
    EXPECT_NEAR(f[i + 1], 2.0 * mean_inv_v * 1.0, 1e-12);
  }
}

TEST(Taxis, ZeroChiGivesZeroFlux) {
  const Grid g(1.0, 12);
  const State s = random_state(12, 2);
  for (double f : taxis_fluxes(s.u, s.v, 0.0, g)) EXPECT_EQ(f, 0.0);
}

TEST(Taxis, UpwindUsesLowSideDonor) {
  const Grid g(1.0, 4);
  const Field u{1.0, 2.0, 3.0, 4.0};
  const Field v{1.0, 2.0, 1.5, 4.0};
  const Field f = taxis_fluxes(u, v, 1.0, g, FaceAverage::upwind);
  const double inv_h = 1.0 / g.h();
  EXPECT_DOUBLE_EQ(f[1], (1.0 / 1.0) * (2.0 - 1.0) * inv_h);
  EXPECT_DOUBLE_EQ(f[2], (3.0 / 1.5) * (1.5 - 2.0) * inv_h);
  EXPECT_DOUBLE_EQ(f[3], (3.0 / 1.5) * (4.0 - 1.5) * inv_h);
}

TEST(Taxis, NonpositiveVRejected) {
  const Grid g(1.0, 4);
  EXPECT_THROW(taxis_fluxes(Field(4, 1.0), Field{1.0, 0.0, 1.0, 1.0}, 1.0, g), positivity_error);
}

TEST(Rhs, SpatiallyConstantReducesToReactions) {
  const Grid g(1.0, 16);
  const State s{0.0, Field(16, 0.7), Field(16, 1.3)};
  const auto b1 = SourceSpec::constant(0.4);
  const auto b2 = SourceSpec::constant(0.9);
  const auto r = rhs(s, ModelParams(10.0), b1, b2, g);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_DOUBLE_EQ(r.du_dt[i], -0.7 * 1.3 + 0.4);
    EXPECT_DOUBLE_EQ(r.dv_dt[i], 0.7 * 1.3 - 1.3 + 0.9);
  }
}

TEST(Rhs, HomogeneousSteadyStateIsRest) {
  const Grid g(1.0, 20);
  for (auto [b1, b2] : {std::pair{1.0, 1.0}, std::pair{2.0, 1.0}, std::pair{0.0, 3.0}, std::pair{0.3, 5.0}}) {
    const auto st = homogeneous_steady(b1, b2);
    const State s{0.0, Field(20, st.u), Field(20, st.v)};
    const auto r = rhs(s, ModelParams(7.0), SourceSpec::constant(b1), SourceSpec::constant(b2), g);
    for (std::size_t i = 0; i < 20; ++i) {
      EXPECT_LT(std::abs(r.du_dt[i]), 1e-14);
      EXPECT_LT(std::abs(r.dv_dt[i]), 1e-14);
    }
  }
}

TEST(Rhs, ZeroDensityStaysZero) {
  const Grid g(1.0, 20);
  State s = random_state(20, 4);
  s.u.assign(20, 0.0);
  const auto r = rhs(s, ModelParams(50.0), SourceSpec::constant(0.0), SourceSpec::constant(1.0), g);
  for (double x : r.du_dt) EXPECT_EQ(x, 0.0);
}

// Property: diffusion and taxis telescope, leaving the reaction and source totals.
TEST(Rhs, DiscreteMassAndBalanceIdentities) {
  for (unsigned seed = 0; seed < 50; ++seed) {
    const std::size_t n = 10 + seed;
    const Grid g(1.0, n);
    const State s = random_state(n, seed);
    const auto b1 = SourceSpec::gaussian_space(1.0, 0.3, 0.1);
    const auto b2 = SourceSpec::cosine_space(1.0, 0.5, 1.0, 1.0);
    for (FaceAverage mode : {FaceAverage::arithmetic, FaceAverage::upwind}) {
      const auto r = rhs(s, ModelParams(25.0), b1, b2, g, mode);
      const double h = g.h();
      double int_uv = 0.0, int_b1 = 0.0, int_b2 = 0.0, int_v = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        int_uv += h * s.u[i] * s.v[i];
        int_b1 += h * b1(g.center(i), 0.0);
        int_b2 += h * b2(g.center(i), 0.0);
        int_v += h * s.v[i];
      }
      double scale = 0.0;
      for (double x : r.du_dt) scale = std::max(scale, std::abs(x));
      EXPECT_NEAR(h * sum(r.du_dt), -int_uv + int_b1, 1e-13 * scale);
      EXPECT_NEAR(h * sum(r.dv_dt) + int_v, int_uv + int_b2, 1e-13 * (1.0 + max_abs(r.dv_dt)));
    }
  }
}

// Property: second-order consistency on smooth Neumann-compatible fields.
TEST(Rhs, ManufacturedRefinementOrder) {
  std::vector<double> errors;
  for (std::size_t n : {50u, 100u, 200u, 400u}) errors.push_back(manufactured_error(n, FaceAverage::arithmetic));
  for (std::size_t k = 1; k < errors.size(); ++k) EXPECT_GE(std::log2(errors[k - 1] / errors[k]), 1.8);
}

TEST(ShiftedLaplacian, SolveInvertsApply) {
  const Grid g(2.0, 64);
  const State s = random_state(64, 9);
  for (auto [a, c] : {std::pair{1.0, 0.0}, std::pair{1.0, 1e-3}, std::pair{1.5, 2.0}}) {
    const Field x = solve_shifted_laplacian(a, c, s.u, g);
    const Field back = apply_shifted_laplacian(a, c, x, g);
    for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(back[i], s.u[i], 1e-12 * (1.0 + std::abs(s.u[i])));
  }
}
