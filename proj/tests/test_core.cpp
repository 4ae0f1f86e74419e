#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include <stickyss/core.hpp>
#include <stickyss/io.hpp>

using namespace stickyss;

namespace {

Profile random_even_profile(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 2.0);
  double s = u(rng), a = u(rng), b = 0.5 * u(rng);
  std::vector<double> v(g.size());
  for (int i = 0; i < g.size(); ++i) {
    double x = g.x(i);
    v[i] = std::exp(-x * x / (2 * s * s)) + b * std::exp(-(x - a) * (x - a)) + b * std::exp(-(x + a) * (x + a));
  }
  return normalized(Profile(g, v));
}

Profile random_profile(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-2.0, 2.0), s(0.3, 1.5);
  double c1 = c(rng), c2 = c(rng), s1 = s(rng), s2 = s(rng);
  std::vector<double> v(g.size());
  for (int i = 0; i < g.size(); ++i) {
    double x = g.x(i);
    v[i] = std::exp(-(x - c1) * (x - c1) / (2 * s1 * s1)) + 0.5 * std::exp(-(x - c2) * (x - c2) / (2 * s2 * s2));
  }
  return normalized(Profile(g, v));
}

}  // namespace

TEST(Grid, CentersAreSymmetricAndAvoidZero) {
  for (int n : {16, 64, 1000}) {
    Grid g(7.3, n);
    EXPECT_DOUBLE_EQ(g.dx() * n, 2 * 7.3);
    for (int i = 0; i < n; ++i) {
      EXPECT_EQ(g.x(i), -g.x(n - 1 - i));
      EXPECT_NE(g.x(i), 0.0);
    }
  }
}

TEST(Grid, RejectsBadParameters) {
  EXPECT_THROW(Grid(1.0, 15), std::invalid_argument);
  EXPECT_THROW(Grid(1.0, 8), std::invalid_argument);
  EXPECT_THROW(Grid(0.0, 64), std::invalid_argument);
  EXPECT_THROW(Grid(-1.0, 64), std::invalid_argument);
}

TEST(Profile, RejectsNegativeValuesUnlessPerturbation) {
  Grid g(1, 16);
  std::vector<double> v(16, 1.0);
  v[3] = -0.5;
  EXPECT_THROW(Profile(g, v), std::invalid_argument);
  EXPECT_NO_THROW(Profile::perturbation(g, v));
  v[3] = -1e-16;
  EXPECT_NO_THROW(Profile(g, v));
  v[3] = std::nan("");
  EXPECT_THROW(Profile::perturbation(g, v), std::invalid_argument);
}

TEST(Weight, AlgebraAndUnitOrder) {
  Weight w0{0}, w1{1.3}, w2{0.7}, w3{2.0};
  for (double x : {-5.0, -0.3, 0.0, 1.0, 40.0}) {
    EXPECT_EQ(w0(x), 1.0);
    EXPECT_NEAR(w1(x) * w2(x), w3(x), 1e-12 * w3(x));
  }
}

TEST(Moment, UniformSecondMoment) {
  for (int n : {64, 128, 256}) {
    Grid g(4, n);
    Profile f = uniform_profile(g, 1.0 / 3.0);
    EXPECT_NEAR(mass(f), 1.0, 1e-14);
    EXPECT_NEAR(moment(f, 2), 1.0 / 3.0, g.dx() * g.dx());
  }
}

TEST(Moment, MaxwellMassMatchesSameIntervalIntegral) {
  for (int n : {256, 512, 1024}) {
    Grid g(10, n);
    Profile h = maxwell_profile(g, 1.0);
    EXPECT_NEAR(mass(h), maxwell_mass_on(1.0, 10), g.dx() * g.dx());
    EXPECT_NEAR(moment(h, 2), maxwell_energy_on(1.0, 10), g.dx() * g.dx());
  }
}

TEST(Moment, SpikeGivesSquaredCenter) {
  Grid g(3, 32);
  for (int j : {0, 7, 16, 31}) EXPECT_NEAR(moment(spike_profile(g, j), 2), g.x(j) * g.x(j), 1e-14);
}

TEST(Moment, RejectsNegativeOrder) {
  Grid g(3, 32);
  EXPECT_THROW(moment(maxwell_profile(g, 1), -0.5), std::invalid_argument);
}

TEST(WeightedNorm, ZeroAndUniform) {
  Grid g(4, 128);
  for (double k : {0.0, 1.0, 2.5})
    for (int p : {1, 2}) EXPECT_EQ(weighted_norm(Profile::zeros(g), k, p), 0.0);
  EXPECT_NEAR(weighted_norm(uniform_profile(g, 1.0 / 3.0), 0, 1), 1.0, g.dx());
}

TEST(WeightedNorm, MaxwellMatchesDirectQuadrature) {
  Grid g(30, 2048);
  Profile h = maxwell_profile(g, 1.0);
  double direct = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    double x = g.x(i);
    direct += 2.0 / pi / ((1 + x * x) * (1 + x * x)) * std::pow(1 + std::abs(x), 2.5);
  }
  direct *= g.dx();
  EXPECT_NEAR(weighted_norm(h, 2.5, 1), direct, 1e-12 * direct);
}

TEST(WeightedNorm, MonotoneInWeightOrder) {
  std::mt19937_64 rng(11);
  Grid g(8, 256);
  for (int t = 0; t < 20; ++t) {
    Profile f = random_profile(g, rng);
    double prev = 0.0;
    for (double k : {0.0, 0.5, 1.0, 2.0, 2.5, 3.0}) {
      double v = weighted_norm(f, k, 1);
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(Moment, EvenProfilesHaveNoMomentum) {
  std::mt19937_64 rng(3);
  Grid g(9, 512);
  for (int t = 0; t < 20; ++t) {
    Profile f = random_even_profile(g, rng);
    EXPECT_LE(std::abs(momentum(f)), 1e-13 * mass(f) * g.half_width());
  }
}

TEST(Moment, RootMomentsNondecreasing) {
  std::mt19937_64 rng(5);
  Grid g(8, 256);
  for (int t = 0; t < 20; ++t) {
    Profile f = random_profile(g, rng);
    double prev = 0.0;
    for (double s : {0.1, 0.5, 1.0, 1.5, 2.0, 3.0}) {
      double v = std::pow(moment(f, s), 1.0 / s);
      EXPECT_GE(v, prev * (1 - 1e-12));
      prev = v;
    }
  }
}

TEST(Functionals, SpikesAtUnitDistanceVanish) {
  Grid g(8, 64);
  ASSERT_EQ(g.x(36) - g.x(32), 1.0);
  Profile a = spike_profile(g, 32), b = spike_profile(g, 36);
  EXPECT_EQ(i0_functional(a, b), 0.0);
  EXPECT_NEAR(i_gamma_functional(a, b, 0.3), 0.0, 1e-15);
}

// closed form: (1/4) int_0^2 2 (2 - r) r^2 log r dr = (2/3) log 2 - 7/18
TEST(Functionals, UniformI0MatchesClosedFormAndRefinement) {
  const double exact = 2.0 / 3.0 * std::log(2.0) - 7.0 / 18.0;
  double prev = 1.0;
  for (int n : {64, 128, 256}) {
    Grid g(2, n);
    Profile u = uniform_profile(g, 1.0 / 3.0);
    double err = std::abs(i0_functional(u, u) - exact);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(Functionals, UniformI0MatchesFinerBruteForce) {
  Grid g(2, 128);
  Profile u = uniform_profile(g, 1.0 / 3.0);
  const int m = 4 * 128 / 2;  // fine cells on [-1, 1]
  const double h = 2.0 / m;
  double fine = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      double r = std::abs(i - j) * h;
      fine += 0.25 * r * r * std::log(r);
    }
  fine *= h * h;
  EXPECT_NEAR(i0_functional(u, u), fine, 5e-4);
}

TEST(Functionals, MaxwellI0ApproachesClosedFormMinusTail) {
  const double exact = 2 * std::log(2.0) + 1;
  Grid g(100, 4096);
  Profile h = maxwell_profile(g, 1.0);
  double tail = 8.0 / pi * (std::log(100.0) + 1) / 100.0;
  double v = i0_functional(h, h);
  EXPECT_LT(v, exact);
  EXPECT_NEAR(v + tail, exact, 1e-4);
}

TEST(Functionals, IGammaApproachesI0Linearly) {
  Grid g(20, 1024);
  Profile h = maxwell_profile(g, 1.0);
  double i0 = i0_functional(h, h);
  std::vector<double> c;
  for (double gm : {1e-1, 1e-2, 1e-3}) c.push_back(std::abs(i_gamma_functional(h, h, gm) - i0) / gm);
  for (double v : c) EXPECT_LT(v, 1.2 * c.back());
  EXPECT_NEAR(c[1], c[2], 0.02 * c[2]);
  EXPECT_THROW(i_gamma_functional(h, h, 0.0), std::invalid_argument);
}

TEST(Maxwell, PointValueAndLimitEnergy) {
  EXPECT_NEAR(maxwell_density(0.0, 1.0), 0.6366198, 1e-7);
  double prev = 1.0;
  for (double L : {20.0, 80.0, 320.0}) {
    Grid g(L, static_cast<int>(L) * 64);
    double m2 = moment(maxwell_profile(g, lambda_limit), 2);
    double err = std::abs(m2 - 1 / (4 * std::exp(1.0)));
    EXPECT_LT(err, prev);
    prev = err;
  }
  // both tails together carry 4 / (pi lambda^3 L)
  EXPECT_NEAR(prev, 4 / (pi * std::pow(lambda_limit, 3) * 320), 1e-6);
}

TEST(Io, CsvAndJsonRoundTripExactly) {
  std::mt19937_64 rng(1);
  Grid g(5, 64);
  Profile f = random_profile(g, rng).with_meta(0.1, 0.25);
  std::stringstream ss;
  write_profile_csv(ss, f);
  EXPECT_EQ(ss.str().substr(0, 8), "x,value\n");
  Profile back = read_profile_csv(ss, g);
  EXPECT_EQ(back.values(), f.values());
  Profile j = profile_from_json(json::parse(profile_json(f).dump()));
  EXPECT_EQ(j.values(), f.values());
  EXPECT_EQ(j.gamma(), 0.1);
  std::stringstream wrong;
  write_profile_csv(wrong, f);
  EXPECT_THROW(read_profile_csv(wrong, Grid(6, 64)), GridMismatch);
}
