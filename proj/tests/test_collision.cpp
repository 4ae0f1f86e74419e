#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <stickyss/audit.hpp>
#include <stickyss/collision.hpp>

using namespace stickyss;

namespace {

Profile mixture(const Grid& g, std::mt19937_64& rng) { return detail::MixtureSpec::random(rng).sample(g); }

double energy_of(const std::vector<double>& rate, const Grid& g) {
  double e = 0.0;
  for (int i = 0; i < g.size(); ++i) e += g.x(i) * g.x(i) * rate[i];
  return e * g.dx();
}

}  // namespace

TEST(QWeak, ConstantAndLinearTestFunctionsGiveExactZero) {
  std::mt19937_64 rng(1);
  for (double L : {12.0, 20.0}) {
    Grid g(L, 256);
    for (int t = 0; t < 10; ++t) {
      Profile f = mixture(g, rng), h = mixture(g, rng);
      for (double gamma : {0.0, 0.05, 0.5, 0.9}) {
        EXPECT_EQ(q_weak(f, h, [](double) { return 1.0; }, gamma), 0.0);
        EXPECT_EQ(q_weak(f, h, [](double x) { return x; }, gamma), 0.0);
      }
    }
  }
}

TEST(QWeak, QuadraticTestFunctionIsThePairSum) {
  std::mt19937_64 rng(2);
  Grid g(12, 256);
  for (int t = 0; t < 10; ++t) {
    Profile f = mixture(g, rng);
    for (double gamma : {0.0, 0.3, 0.7}) {
      double direct = 0.0;
      for (int i = 0; i < g.size(); ++i)
        for (int j = 0; j < g.size(); ++j) {
          double r = std::abs(g.x(i) - g.x(j));
          direct += f[i] * f[j] * std::pow(r, gamma + 2);
        }
      direct *= -0.25 * g.dx() * g.dx();
      double w = q_weak(f, f, [](double x) { return x * x; }, gamma);
      EXPECT_NEAR(w, direct, 1e-12 * std::abs(direct));
      EXPECT_NEAR(dissipation_pair_sum(f, f, gamma), direct, 1e-12 * std::abs(direct));
    }
  }
}

TEST(QWeak, MaxwellEnergyLossIsHalfTheSecondMoment) {
  double prev = 1.0;
  for (double L : {20.0, 80.0, 320.0}) {
    Grid g(L, static_cast<int>(8 * L));
    Profile h = maxwell_profile(g, 1.0);
    double w = q_weak(h, h, [](double x) { return x * x; }, 0.0);
    double m = mass(h), m1 = momentum(h), m2 = moment(h, 2);
    EXPECT_NEAR(w, -0.25 * (2 * m * m2 - 2 * m1 * m1), 1e-12);
    double err = std::abs(w + 0.5);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 5e-3);
}

TEST(QApply, SpikeSelfCollisionIsZero) {
  Grid g(4, 64);
  for (double gamma : {0.0, 0.4}) {
    Profile s = spike_profile(g, 21);
    CollisionRate q = q_apply(s, s, gamma);
    for (double v : q.rate) EXPECT_NEAR(v, 0.0, 1e-12);
  }
}

TEST(QApply, ConservesMassAndMomentum) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> gd(0.0, 1.0);
  Grid g(7.3, 300);
  for (int t = 0; t < 30; ++t) {
    Profile f = mixture(g, rng), h = mixture(g, rng);
    double gamma = t % 3 == 0 ? 0.0 : gd(rng);
    for (auto rule : {MidpointRule::linear, MidpointRule::cubic}) {
      CollisionRate q = q_apply(f, h, gamma, rule);
      double m = 0, p = 0, s = 0;
      for (int i = 0; i < g.size(); ++i) {
        m += q.rate[i];
        p += q.rate[i] * g.x(i);
        s += std::abs(q.rate[i]) * (1 + std::abs(g.x(i)));
      }
      EXPECT_LE(std::abs(m), 1e-12 * s);
      EXPECT_LE(std::abs(p), 1e-12 * s);
    }
  }
}

TEST(QApply, DissipatesEnergyForEqualInputs) {
  std::mt19937_64 rng(4);
  Grid g(12, 256);
  for (int t = 0; t < 20; ++t) {
    Profile f = mixture(g, rng);
    for (double gamma : {0.0, 0.2, 0.8}) {
      CollisionRate q = q_apply(f, f, gamma);
      EXPECT_LE(energy_of(q.rate, g), 0.0);
      EXPECT_GE(q.dissipation, 0.0);
    }
  }
}

TEST(QApply, LinearSplitEnergyErrorIsSecondOrder) {
  const double gamma = 0.3;
  std::vector<double> err;
  for (int n : {128, 256, 512}) {
    Grid g(8, n);
    Profile f = gaussian_profile(g, 1.0);
    double w = q_weak(f, f, [](double x) { return x * x; }, gamma);
    err.push_back(std::abs(energy_of(q_apply(f, f, gamma).rate, g) - w) / std::abs(w));
  }
  EXPECT_NEAR(err[0] / err[1], 4.0, 0.2);
  EXPECT_NEAR(err[1] / err[2], 4.0, 0.2);
  double c = err[1] / std::pow(16.0 / 256, 2);
  EXPECT_LE(err[2], 1.1 * c * std::pow(16.0 / 512, 2));
}

TEST(QApply, CubicDepositConservesEnergyAwayFromTheWall) {
  Grid g(12, 256);
  Profile f = gaussian_profile(g, 0.5);
  for (double gamma : {0.0, 0.4}) {
    double e = energy_of(q_apply(f, f, gamma, MidpointRule::cubic).rate, g);
    double d = dissipation_pair_sum(f, f, gamma);
    EXPECT_NEAR(e, d, 1e-12 * std::abs(d));
  }
}

TEST(QApply, RejectsMismatchedGrids) {
  Profile a = gaussian_profile(Grid(4, 64), 1), b = gaussian_profile(Grid(4, 128), 1);
  EXPECT_THROW(q_apply(a, b, 0.1), GridMismatch);
  EXPECT_THROW(q_weak(a, b, [](double) { return 1.0; }, 0.1), GridMismatch);
}

TEST(QApply, RepeatableForFixedThreadCount) {
  std::mt19937_64 rng(9);
  Grid g(10, 400);
  Profile f = mixture(g, rng);
  set_thread_budget(3);
  auto a = q_apply(f, f, 0.3).rate;
  auto b = q_apply(f, f, 0.3).rate;
  set_thread_budget(1);
  EXPECT_EQ(a, b);
}

TEST(FastMaxwell, MatchesDirectGain) {
  std::mt19937_64 rng(5);
  Grid g(12, 512);
  for (int t = 0; t < 5; ++t) {
    Profile f = t == 0 ? gaussian_profile(g, 1.0) : mixture(g, rng);
    Profile fast = q_gain_fast_maxwell(f);
    auto direct = q_gain_direct(f, f, 0.0);
    double num = 0, den = 0;
    for (int i = 0; i < g.size(); ++i) {
      num = std::max(num, std::abs(fast[i] - direct[i]));
      den = std::max(den, std::abs(direct[i]));
    }
    EXPECT_LE(num, 1e-10 * den);
  }
}

TEST(FastMaxwell, SpikesLandOnMidpoints) {
  Grid g(4, 64);
  Profile one = q_gain_fast_maxwell(spike_profile(g, 40));
  for (int i = 0; i < g.size(); ++i) EXPECT_NEAR(one[i] * g.dx(), i == 40 ? 1.0 : 0.0, 1e-12);

  std::vector<double> v(g.size(), 0.0);
  v[20] = v[43] = 1.0 / g.dx();
  ASSERT_EQ(g.x(20), -g.x(43));
  Profile two = q_gain_fast_maxwell(Profile(g, v));
  for (int i = 0; i < g.size(); ++i) {
    double want = (i == 20 || i == 43) ? 1.0 : (i == 31 || i == 32) ? 1.0 : 0.0;
    EXPECT_NEAR(two[i] * g.dx(), want, 1e-12) << i;
  }
}

TEST(CollisionFrequency, MaxwellIsUnitForUnitMass) {
  Grid g(10, 256);
  auto cf = collision_frequency(gaussian_profile(g, 1.0), 0.0);
  for (int i = 0; i < g.size(); ++i) EXPECT_NEAR(cf.sigma[i], 1.0, 1e-13);
  EXPECT_NEAR(cf.kappa_hat, 1.0, 1e-13);
}

TEST(CollisionFrequency, SpikeGivesDistancePower) {
  Grid g(4, 64);
  auto cf = collision_frequency(spike_profile(g, 30), 0.35);
  for (int i = 0; i < g.size(); ++i) EXPECT_NEAR(cf.sigma[i], std::pow(std::abs(g.x(i) - g.x(30)), 0.35), 1e-13);
}

TEST(CollisionFrequency, UniformAtOrigin) {
  for (double gamma : {0.1, 0.5}) {
    double prev = 1.0;
    for (int n : {128, 512, 2048}) {
      Grid g(2, n);
      double err = std::abs(collision_frequency_at(uniform_profile(g, 1.0 / 3.0), gamma, 0.0) - 1 / (1 + gamma));
      EXPECT_LT(err, prev);
      prev = err;
    }
    EXPECT_LT(prev, 1e-4);
  }
}

TEST(CollisionFrequency, KappaTendsToOneAsGammaVanishes) {
  Grid g(10, 512);
  Profile f = gaussian_profile(g, 1.0);
  double prev = 1.0;
  for (double gamma : {0.3, 0.1, 0.01, 0.001}) {
    auto cf = collision_frequency(f, gamma);
    for (int i = 0; i < g.size(); ++i) EXPECT_GE(cf.sigma[i], cf.kappa_hat * Weight{gamma}(g.x(i)) * (1 - 1e-14));
    double d = std::abs(cf.kappa_hat - 1.0);
    EXPECT_LT(d, prev);
    prev = d;
  }
  // the diagonal cell drops out once gamma > 0, a defect of f_i dx
  double peak = *std::max_element(f.values().begin(), f.values().end());
  EXPECT_LT(prev, peak * g.dx() + 2 * 0.001);
}

TEST(QApply, WeightedL1BoundHolds) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> kd(0.0, 3.0), gd(0.0, 0.9);
  Grid g(12, 256);
  for (int t = 0; t < 20; ++t) {
    Profile f = mixture(g, rng), h = mixture(g, rng);
    double k = kd(rng), gamma = gd(rng);
    Profile q = q_apply(f, h, gamma).profile();
    EXPECT_LE(weighted_norm(q, k, 1), 2 * weighted_norm(f, k + gamma, 1) * weighted_norm(h, k + gamma, 1));
  }
}
