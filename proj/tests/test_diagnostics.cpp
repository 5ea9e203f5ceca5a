#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "crimelab/hypotheses.hpp"
#include "crimelab/integrator.hpp"
#include "crimelab/steady_state.hpp"

using namespace crimelab;

namespace {

struct Series {
  std::vector<double> t, y, h;
};

Series sample(double t_end, std::size_t n, auto y_of, auto h_of) {
  Series s;
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = t_end * static_cast<double>(k) / static_cast<double>(n);
    s.t.push_back(t);
    s.y.push_back(y_of(t));
    s.h.push_back(h_of(t));
  }
  return s;
}

}  // namespace

TEST(DiagnosticsRow, ConstantState) {
  const Grid g(2.0, 40);
  const double u = 0.5, v = 2.0;
  DiagnosticsConfig cfg;
  cfg.p = 0.1;
  cfg.q = 0.4;
  const auto row = diagnostics_row(State{1.5, Field(40, u), Field(40, v)}, g, cfg);
  EXPECT_EQ(row.t, 1.5);
  EXPECT_EQ(row.diss_u, 0.0);
  EXPECT_EQ(row.diss_v, 0.0);
  EXPECT_NEAR(row.entropy, 2.0 * std::pow(u, 0.1) * std::pow(v, 0.4), 1e-13);
  EXPECT_EQ(row.holder_u, 0.0);
  EXPECT_EQ(row.holder_v, 0.0);
  EXPECT_NEAR(row.mass_u, 1.0, 1e-13);
  EXPECT_NEAR(row.mass_v, 4.0, 1e-13);
  EXPECT_NEAR(row.int_uv, 2.0, 1e-13);
  EXPECT_EQ(row.sup_u, u);
  EXPECT_EQ(row.min_v, v);
  ASSERT_EQ(row.lr_norms.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(row.lr_norms[k], v * std::pow(2.0, 1.0 / cfg.r_list[k]), 1e-12);
}

// Property: with p = q = 1 the entropy is the interaction integral.
TEST(DiagnosticsRow, EntropyOneOneIsInteraction) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.0, 5.0);
  const Grid g(1.0, 64);
  DiagnosticsConfig cfg;
  cfg.p = 1.0;
  cfg.q = 1.0;
  for (int k = 0; k < 20; ++k) {
    State s;
    for (int i = 0; i < 64; ++i) {
      s.u.push_back(d(rng));
      s.v.push_back(d(rng) + 0.01);
    }
    const auto row = diagnostics_row(s, g, cfg);
    EXPECT_NEAR(row.entropy, row.int_uv, 1e-12 * row.int_uv);
    EXPECT_GE(row.mass_u, 0.0);
    EXPECT_GE(row.mass_v, 0.0);
    EXPECT_GE(row.int_uv, 0.0);
    EXPECT_TRUE(std::isfinite(row.diss_u));
    EXPECT_TRUE(std::isfinite(row.diss_v));
  }
}

TEST(DiagnosticsRow, ZeroDensityStaysFinite) {
  const Grid g(1.0, 16);
  State s{0.0, Field(16, 0.0), Field(16, 1.0)};
  s.v[5] = 2.0;
  const auto row = diagnostics_row(s, g, DiagnosticsConfig::defaults_for(2.0), 2.0);
  EXPECT_TRUE(std::isfinite(row.diss_u));
  EXPECT_TRUE(std::isfinite(row.diss_v));
  EXPECT_TRUE(row.exponents_admissible);
}

TEST(DiagnosticsRow, AdmissibilityFlag) {
  const Grid g(1.0, 8);
  const State s{0.0, Field(8, 1.0), Field(8, 1.0)};
  DiagnosticsConfig cfg;
  cfg.p = 0.1;
  cfg.q = 0.5;
  EXPECT_TRUE(diagnostics_row(s, g, cfg, 2.0).exponents_admissible);
  cfg.q = 0.9;
  EXPECT_FALSE(diagnostics_row(s, g, cfg, 2.0).exponents_admissible);
  cfg.p = 0.5;
  EXPECT_FALSE(diagnostics_row(s, g, cfg, 2.0).exponents_admissible);
}

TEST(DiagnosticsConfig, DefaultsAreAdmissible) {
  for (double chi : {0.1, 0.5, 1.0, 2.0, 20.0, 1000.0}) {
    const auto c = DiagnosticsConfig::defaults_for(chi);
    EXPECT_TRUE(exponents::q_window(c.p, chi).contains(c.q)) << chi;
    EXPECT_GT(c.gamma_u, 0.0);
    EXPECT_LT(c.gamma_u, 1.0);
  }
}

TEST(WindowIntegral, ConstantAndLinear) {
  std::vector<double> t, c, lin;
  for (int k = 0; k <= 10; ++k) {
    t.push_back(0.3 * k);
    c.push_back(2.5);
    lin.push_back(1.0 + 4.0 * 0.3 * k);
  }
  EXPECT_NEAR(window_integral(t, c, 0.0, 3.0), 7.5, 1e-12);
  EXPECT_NEAR(window_integral(t, c, 0.45, 1.0), 2.5, 1e-12);
  // a + b s on [0, tau]: a tau + b tau^2 / 2, also for windows cutting samples.
  EXPECT_NEAR(window_integral(t, lin, 0.0, 3.0), 3.0 + 2.0 * 9.0, 1e-12);
  EXPECT_NEAR(window_integral(t, lin, 0.1, 2.0), 2.0 + 2.0 * (2.1 * 2.1 - 0.1 * 0.1), 1e-12);
}

TEST(WindowIntegral, SampledSine) {
  std::vector<double> t, f;
  for (int k = 0; k < 1000; ++k) {
    t.push_back(k / 999.0);
    f.push_back(std::sin(t.back()));
  }
  EXPECT_NEAR(window_integral(t, f, 0.0, 1.0), 1.0 - std::cos(1.0), 1e-6);
}

TEST(WindowIntegral, Errors) {
  const std::vector<double> t{0.0, 1.0, 2.0}, f{1.0, 1.0, 1.0};
  EXPECT_THROW(window_integral(t, f, 1.5, 1.0), coverage_error);
  EXPECT_THROW(window_integral(t, f, -0.5, 1.0), coverage_error);
  EXPECT_THROW(window_integral(t, std::vector<double>{1.0, 1.0}, 0.0, 1.0), alignment_error);
}

TEST(Holder, ConstantLinearAndSqrt) {
  const Grid g(1.0, 50);
  EXPECT_EQ(holder_seminorm(Field(50, 2.0), 0.5, g), 0.0);
  const Field x = g.centers();
  EXPECT_NEAR(holder_seminorm(x, 1.0, g), 1.0, 1e-12);
  EXPECT_NEAR(holder_seminorm(x, 0.5, g), std::sqrt(1.0 - g.h()), 1e-12);
  EXPECT_THROW(holder_seminorm(x, 0.0, g), domain_error);
  EXPECT_THROW(holder_seminorm(x, 1.5, g), domain_error);
}

TEST(OdeBound, RelaxationToOneHolds) {
  const auto s = sample(20.0, 4000, [](double t) { return 1.0 - std::exp(-t); }, [](double) { return 1.0; });
  const auto rep = ode_bound_check(s.t, s.y, s.h, 1.0, 1.0);
  EXPECT_NEAR(rep.b, 1.0, 1e-12);
  EXPECT_NEAR(rep.bound, 1.0 / (1.0 - std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(rep.bound, 1.582, 1e-3);
  EXPECT_LT(rep.max_y, 1.0);
  EXPECT_TRUE(rep.bound_holds);
  EXPECT_TRUE(rep.inequality_holds);
  EXPECT_FALSE(rep.violation());
  EXPECT_EQ(rep.decay, DecayVerdict::not_applicable);
}

TEST(OdeBound, DecayWithoutForcing) {
  const double a = 2.0;
  const auto s = sample(20.0, 4000, [&](double t) { return std::exp(-a * t); }, [](double) { return 0.0; });
  const auto rep = ode_bound_check(s.t, s.y, s.h, a, 1.0);
  EXPECT_EQ(rep.b, 0.0);
  EXPECT_DOUBLE_EQ(rep.bound, 1.0);
  EXPECT_TRUE(rep.bound_holds);
  EXPECT_FALSE(rep.violation());
  EXPECT_EQ(rep.decay, DecayVerdict::decays);
}

TEST(OdeBound, ConstantTwoIsViolation) {
  const auto s = sample(5.0, 500, [](double) { return 2.0; }, [](double) { return 0.0; });
  const auto rep = ode_bound_check(s.t, s.y, s.h, 1.0, 1.0);
  EXPECT_TRUE(rep.violation());
  EXPECT_FALSE(rep.inequality_holds);
  EXPECT_NEAR(rep.worst_inequality_excess, 2.0 * 0.01, 1e-12);
  EXPECT_EQ(rep.decay, DecayVerdict::no_decay);
}

TEST(OdeBound, GrowthBeyondBoundDetected) {
  const auto s = sample(5.0, 500, [](double t) { return t; }, [](double) { return 0.1; });
  const auto rep = ode_bound_check(s.t, s.y, s.h, 1.0, 1.0);
  EXPECT_FALSE(rep.bound_holds);
}

TEST(OdeBound, Errors) {
  const std::vector<double> t{0.0, 1.0, 2.0}, y{1.0, 1.0, 1.0};
  EXPECT_THROW(ode_bound_check(t, y, std::vector<double>{0.0, 0.0}, 1.0, 1.0), alignment_error);
  EXPECT_THROW(ode_bound_check(std::vector<double>{0.0, 2.0, 1.0}, y, y, 1.0, 1.0), alignment_error);
  EXPECT_THROW(ode_bound_check(t, y, y, 1.0, 5.0), coverage_error);
}

TEST(Hypotheses, ExpDecayIsIntegrable) {
  const Grid g(1.0, 100);
  const auto rep = hypothesis_check(SourceSpec::exp_decay(1.0, 1.0), 10.0, g);
  EXPECT_EQ(rep.h1, Verdict::holds);
  EXPECT_EQ(rep.h1prime, Verdict::holds);
  EXPECT_NEAR(rep.h1_integral, 1.0 - std::exp(-10.0), 1e-12);
  EXPECT_NEAR(rep.h1_tail_bound, std::exp(-10.0), 1e-12);
  EXPECT_NEAR(rep.h1_integral + rep.h1_tail_bound, 1.0, 1e-12);
  EXPECT_EQ(rep.h2, Verdict::fails);
}

TEST(Hypotheses, ExpDecayOnLongerDomain) {
  const Grid g(3.0, 90);
  const auto rep = hypothesis_check(SourceSpec::exp_decay(2.0, 0.5), 4.0, g);
  EXPECT_NEAR(rep.h1_integral, 3.0 * 2.0 * (1.0 - std::exp(-2.0)) / 0.5, 1e-10);
  EXPECT_NEAR(rep.h1_tail_bound, 3.0 * 2.0 * std::exp(-2.0) / 0.5, 1e-10);
}

TEST(Hypotheses, ConstantSourceBalances) {
  const Grid g(2.0, 50);
  const auto rep = hypothesis_check(SourceSpec::constant(1.0), 10.0, g);
  EXPECT_EQ(rep.h1, Verdict::fails);
  EXPECT_EQ(rep.h2, Verdict::holds);
  EXPECT_NEAR(rep.h2_inf, 2.0, 1e-12);
  const auto with_limit = hypothesis_check(SourceSpec::constant(1.0), 10.0, g, Field(50, 1.0));
  EXPECT_EQ(with_limit.h3, Verdict::holds);
  EXPECT_EQ(with_limit.h3_window, 0.0);
  const auto wrong_limit = hypothesis_check(SourceSpec::constant(1.0), 10.0, g, Field(50, 0.5));
  EXPECT_EQ(wrong_limit.h3, Verdict::fails);
}

TEST(Hypotheses, TabulatedIsInconclusive) {
  const Grid g(1.0, 20);
  const auto rep = hypothesis_check(SourceSpec::tabulated(TabulatedProfile({0.0, 1.0}, {1.0, 2.0})), 5.0, g);
  EXPECT_EQ(rep.h1, Verdict::inconclusive);
  EXPECT_EQ(rep.h1prime, Verdict::inconclusive);
  EXPECT_EQ(rep.h2, Verdict::inconclusive);
  EXPECT_EQ(rep.h3, Verdict::inconclusive);
  EXPECT_NEAR(rep.h2_inf, 1.5, 1e-9);
}

TEST(Convergence, HeatWithDecayReachesConstant) {
  const Grid g(1.0, 50);
  const double c = 1.5;
  const State s{0.0, Field(50, 0.0), sample_ic(InitialCondition::expneg(), g, FieldRole::attractiveness)};
  AdvanceOptions opt;
  opt.output_interval = 0.5;
  const auto traj = advance(s, 15.0, StepController{}, ModelParams(2.0), SourceSpec::constant(0.0),
                            SourceSpec::constant(c), g, opt);
  const auto rep = convergence_check(traj, Field(50, c), 1e-3);
  EXPECT_TRUE(rep.attained);
  EXPECT_TRUE(std::isfinite(rep.entry_time));
  EXPECT_GT(rep.entry_time, 0.0);
  EXPECT_LT(rep.final_v_error, 1e-3);
  EXPECT_EQ(rep.final_sup_u, 0.0);
}

TEST(Convergence, AtSteadyStateFromStart) {
  const Grid g(1.0, 30);
  const State s{0.0, Field(30, 0.0), Field(30, 2.0)};
  AdvanceOptions opt;
  opt.output_interval = 0.5;
  const auto traj =
      advance(s, 3.0, StepController{}, ModelParams(1.0), SourceSpec::constant(0.0), SourceSpec::constant(2.0), g, opt);
  const auto rep = convergence_check(traj, Field(30, 2.0), 1e-3);
  EXPECT_TRUE(rep.attained);
  EXPECT_EQ(rep.entry_time, 0.0);

  const auto never = convergence_check(traj, Field(30, 2.0), 0.0);
  EXPECT_FALSE(never.attained);
  EXPECT_TRUE(std::isnan(never.entry_time));
}
