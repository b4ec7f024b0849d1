#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ldp/error.hpp"
#include "ldp/kernel.hpp"

using namespace ldp;

namespace {

KernelSpec spec(const std::string& family, std::map<std::string, std::vector<double>> params,
                int dim = 1) {
  KernelSpec s;
  s.family = family;
  s.dimension = dim;
  s.params = std::move(params);
  return s;
}

Vec point(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

const std::array<double, 1> kPlus{1.0};
const std::array<double, 1> kMinus{-1.0};

}  // namespace

TEST(BuildKernel, CompactUniformIsHalfOnUnitInterval) {
  Kernel k = build_kernel(spec("compact_uniform", {{"rho", {1.0}}, {"mass", {1.0}}}));
  EXPECT_DOUBLE_EQ(k.density(point(0.3)), 0.5);
  EXPECT_DOUBLE_EQ(k.density(point(-1.0)), 0.5);
  EXPECT_EQ(k.density(point(1.01)), 0.0);
  EXPECT_EQ(regime_of(k.tail), Regime::Compact);
  EXPECT_DOUBLE_EQ(std::get<CompactTail>(k.tail).rho, 1.0);
  EXPECT_DOUBLE_EQ(k.rho0, 0.5);
}

TEST(BuildKernel, ExpLinearHasUnitMassAndCriticalTail) {
  Kernel k = build_kernel(spec("exp_linear", {{"alpha", {1.0}}}));
  EXPECT_NEAR(k.density(point(2.0)), 0.5 * std::exp(-2.0), 1e-15);
  EXPECT_NEAR(k.density(point(-2.0)), 0.5 * std::exp(-2.0), 1e-15);
  ASSERT_EQ(regime_of(k.tail), Regime::Critical);
  EXPECT_DOUBLE_EQ(std::get<CriticalTail>(k.tail).beta0, 1.0);
  EXPECT_NEAR(tail_mass(k, 0.0, kPlus) + tail_mass(k, 0.0, kMinus), 1.0, 1e-10);

  Kernel k2 = build_kernel(spec("exp_linear", {{"alpha", {1.5}}}, 2));
  EXPECT_NEAR(tail_mass(k2, 0.0, kPlus), 1.0, 1e-10);
}

TEST(BuildKernel, ExpPowerIsIntermediateWithOmegaEqualToRadius) {
  Kernel k = build_kernel(spec("exp_power", {{"alpha", {2.0}}}));
  ASSERT_EQ(regime_of(k.tail), Regime::Intermediate);
  const auto& tail = std::get<IntermediateTail>(k.tail);
  EXPECT_DOUBLE_EQ(tail.omega(point(2.0)), 2.0);
  EXPECT_DOUBLE_EQ(tail.omega(point(-0.7)), 0.7);
}

TEST(BuildKernel, RejectsInvalidSpecs) {
  auto expect_invalid = [](const KernelSpec& s) {
    try {
      build_kernel(s);
      ADD_FAILURE() << "accepted " << s.family;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidSpec);
    }
  };
  expect_invalid(spec("gaussian", {}));
  expect_invalid(spec("tempered_stable", {{"alpha", {2.0}}, {"lambda", {1.0}}}));
  expect_invalid(spec("exp_power", {{"alpha", {2.0}}, {"beta", {1.0}}}));
  expect_invalid(spec("asymmetric_1d_demo", {}, 2));
  expect_invalid(spec("exp_power", {{"alpha", {1.0}}}));
  KernelSpec small = spec("compact_uniform", {{"rho", {1.0}}});
  small.rho0 = 2.0;
  expect_invalid(small);
  expect_invalid(spec("compact_custom", {{"radii", {0.5, 0.4}}, {"values", {1.0, 1.0}}}));
}

TEST(BuildKernel, AsymmetricDemoShape) {
  Kernel k = build_kernel(spec("asymmetric_1d_demo", {}));
  EXPECT_FALSE(k.symmetric);
  EXPECT_DOUBLE_EQ(k.density(point(0.5)), 0.5);
  EXPECT_EQ(k.density(point(1.5)), 0.0);
  EXPECT_NEAR(k.density(point(-2.0)), 0.5 * std::exp(-2.0), 1e-15);
  EXPECT_DOUBLE_EQ(k.exp_moment_limit(kMinus), 1.0);
  EXPECT_TRUE(std::isinf(k.exp_moment_limit(kPlus)));
  EXPECT_NEAR(tail_mass(k, 0.0, kPlus) + tail_mass(k, 0.0, kMinus), 1.0, 1e-12);
}

TEST(LogWeightOmega, MatchesDirectFormulas) {
  Kernel ep = build_kernel(spec("exp_power", {{"alpha", {2.0}}}));
  EXPECT_NEAR(log_weight_omega(ep, point(2.0)), 2.0, 1e-14);
  Kernel el = build_kernel(spec("exp_linear", {{"alpha", {1.0}}}));
  EXPECT_NEAR(log_weight_omega(el, point(3.0)), 1.0 + std::log(2.0) / 3.0, 1e-14);
  Kernel cu = build_kernel(spec("compact_uniform", {{"rho", {1.0}}}));
  EXPECT_NEAR(log_weight_omega(cu, point(0.5)), std::log(2.0) / 0.5, 1e-14);
}

TEST(LogWeightOmega, RejectsOriginAndPointsOffSupport) {
  Kernel cu = build_kernel(spec("compact_uniform", {{"rho", {1.0}}}));
  EXPECT_THROW(log_weight_omega(cu, point(0.0)), Error);
  EXPECT_THROW(log_weight_omega(cu, point(1.5)), Error);
}

TEST(LogWeightOmega, AgreesWithStoredOmegaForIntermediateKernels) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.05, 8.0);
  for (const KernelSpec& s :
       {spec("exp_power", {{"alpha", {2.0}}}), spec("exp_power", {{"alpha", {1.5}}}),
        spec("super_exp", {}), spec("exp_power", {{"alpha", {3.0}}}, 2)}) {
    Kernel k = build_kernel(s);
    const auto& omega = std::get<IntermediateTail>(k.tail).omega;
    for (int i = 0; i < 200; ++i) {
      Vec y = Vec::Zero(k.dimension);
      y[0] = u(rng);
      if (k.dimension == 2) y[1] = -0.5 * u(rng);
      EXPECT_NEAR(log_weight_omega(k, y), omega(y), 1e-10 * (1.0 + std::abs(omega(y))));
    }
  }
}

TEST(EssentialOrdering, AnnulusScaledCopyIsOrderedWithWitness) {
  Kernel k2 = build_kernel(spec("compact_uniform", {{"rho", {1.0}}}));
  Kernel k1 = scale_on_annulus(k2, 0.3, 0.6, 0.9);
  OrderingResult r = is_essentially_ordered(k1, k2);
  ASSERT_TRUE(r.ordered);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_GT(r.witness->first, 0.5 * k2.rho0);
  EXPECT_LT(r.witness->second, k2.rho0);
  EXPECT_LT(r.witness->first, r.witness->second);
  EXPECT_GE(r.witness->first, 0.3);

  EXPECT_FALSE(is_essentially_ordered(k2, k1).ordered);
}

TEST(EssentialOrdering, EqualKernelsAreNotOrdered) {
  Kernel k = build_kernel(spec("compact_uniform", {{"rho", {1.0}}}));
  OrderingResult r = is_essentially_ordered(k, k);
  EXPECT_FALSE(r.ordered);
  EXPECT_FALSE(r.witness.has_value());
}

TEST(EssentialOrdering, GaussianBelowScaledExponentialOnlyWithSuitableNormalization) {
  Kernel lin = build_kernel(spec("exp_linear", {{"alpha", {1.0}}}));
  // e^{-y^2} <= c (1/2) e^{-|y|} for all y needs the Gaussian scale below e^{-1/4}/2.
  Kernel small = build_kernel(spec("exp_power", {{"alpha", {2.0}}, {"scale", {0.35}}}));
  Kernel unit = build_kernel(spec("exp_power", {{"alpha", {2.0}}}));
  EXPECT_TRUE(is_essentially_ordered(small, lin).ordered);
  EXPECT_FALSE(is_essentially_ordered(unit, lin).ordered);
}

TEST(KernelInvariants, DensityNonnegativeAndCompactSupportRespected) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  std::vector<KernelSpec> specs = {
      spec("compact_uniform", {{"rho", {2.0}}}),
      spec("compact_custom", {{"radii", {0.5, 1.0, 1.5}}, {"values", {1.0, 0.5, 0.2}}}),
      spec("exp_power", {{"alpha", {2.0}}}),
      spec("exp_linear", {{"alpha", {1.0}}}),
      spec("super_exp", {}),
      spec("tempered_stable", {{"alpha", {0.5}}, {"lambda", {1.0}}}),
      spec("asymmetric_1d_demo", {})};
  for (const auto& s : specs) {
    Kernel k = build_kernel(s);
    for (int i = 0; i < 1000; ++i) {
      const double y = u(rng);
      if (y == 0.0) continue;
      const double j = k.density(point(y));
      EXPECT_GE(j, 0.0) << s.family;
      if (const auto* c = std::get_if<CompactTail>(&k.tail)) {
        if (std::abs(y) > c->rho) EXPECT_EQ(j, 0.0) << s.family;
        EXPECT_GE(c->rho, k.rho0);
      }
    }
  }
}

TEST(KernelInvariants, LevyIntegralConvergesUnderRefinement) {
  std::vector<KernelSpec> specs = {
      spec("compact_uniform", {{"rho", {1.0}}}),
      spec("exp_power", {{"alpha", {2.0}}}),
      spec("exp_linear", {{"alpha", {1.0}}}),
      spec("super_exp", {}),
      spec("tempered_stable", {{"alpha", {0.5}}, {"lambda", {1.0}}}),
      spec("tempered_stable", {{"alpha", {1.5}}, {"lambda", {1.0}}}),
      spec("asymmetric_1d_demo", {}),
      spec("exp_linear", {{"alpha", {1.0}}}, 2)};
  for (const auto& s : specs) {
    Kernel k = build_kernel(s);
    double prev = levy_integral(k, 1e-2, 20.0);
    double change = 1.0;
    for (int level = 1; level <= 7; ++level) {
      const double cur = levy_integral(k, std::pow(10.0, -2.0 - 2.0 * level), 20.0 * (level + 1));
      change = std::abs(cur - prev) / std::abs(cur);
      prev = cur;
    }
    EXPECT_LT(change, 1e-6) << s.family;
    EXPECT_TRUE(std::isfinite(prev));
  }
}

TEST(KernelInvariants, SymmetryFlagMatchesSamples) {
  std::vector<KernelSpec> specs = {
      spec("compact_uniform", {{"rho", {1.0}}}), spec("exp_power", {{"alpha", {2.0}}}),
      spec("exp_linear", {{"alpha", {1.0}}}), spec("super_exp", {}),
      spec("tempered_stable", {{"alpha", {1.2}}, {"lambda", {2.0}}}),
      spec("exp_linear", {{"alpha", {1.0}}}, 2), spec("asymmetric_1d_demo", {})};
  for (const auto& s : specs) {
    Kernel k = build_kernel(s);
    const double defect = symmetry_defect(k, 1000, 5.0, 3u);
    if (k.symmetric) {
      EXPECT_LE(defect, 1e-12) << s.family;
    } else {
      EXPECT_GT(defect, 1e-3) << s.family;
    }
  }
}

TEST(KernelInvariants, CriticalProbeRecoversBeta0) {
  for (double alpha : {0.5, 1.0, 2.0}) {
    Kernel k = build_kernel(spec("exp_linear", {{"alpha", {alpha}}}));
    EXPECT_NEAR(probe_critical_exponent(k), alpha, 0.05 * alpha);
  }
  Kernel ts = build_kernel(spec("tempered_stable", {{"alpha", {0.7}}, {"lambda", {1.5}}}));
  EXPECT_NEAR(probe_critical_exponent(ts), 1.5, 0.075);
  Kernel demo = build_kernel(spec("asymmetric_1d_demo", {}));
  EXPECT_NEAR(probe_critical_exponent(demo), 1.0, 0.05);
  Kernel cu = build_kernel(spec("compact_uniform", {{"rho", {1.0}}}));
  EXPECT_TRUE(std::isinf(probe_critical_exponent(cu)));
}

TEST(KernelInvariants, TruncatedMomentsStabilizeBelowAndGrowAboveBeta0) {
  Kernel k = build_kernel(spec("exp_linear", {{"alpha", {1.0}}}));
  const double below_a = log_truncated_exp_moment(k, 0.9, 200.0);
  const double below_b = log_truncated_exp_moment(k, 0.9, 400.0);
  EXPECT_LT(below_b - below_a, 1e-6);
  const double above_a = log_truncated_exp_moment(k, 1.1, 200.0);
  const double above_b = log_truncated_exp_moment(k, 1.1, 400.0);
  EXPECT_GT(above_b - above_a, 10.0);
}
