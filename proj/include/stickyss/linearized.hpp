#ifndef STICKYSS_LINEARIZED_HPP
#define STICKYSS_LINEARIZED_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "collision.hpp"
#include "core.hpp"
#include "io.hpp"
#include "parallel.hpp"
#include "selfsim.hpp"

namespace stickyss {

struct LinearOperatorMatrix {
  Grid grid;
  double lambda = lambda_limit;
  Eigen::MatrixXd A;
  Eigen::MatrixXd moments;  // rows: dx, dx x, dx x^2

  Eigen::VectorXd apply(const Eigen::VectorXd& h) const { return A * h; }
  Eigen::VectorXd apply(const std::vector<double>& h) const {
    return A * Eigen::Map<const Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
  }
};

inline Eigen::MatrixXd moment_functionals(const Grid& grid) {
  const int n = grid.size();
  Eigen::MatrixXd V(3, n);
  for (int i = 0; i < n; ++i) {
    double x = grid.x(i);
    V(0, i) = grid.dx();
    V(1, i) = grid.dx() * x;
    V(2, i) = grid.dx() * x * x;
  }
  return V;
}

inline Profile phi0_profile(const Grid& grid, double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("phi0 needs lambda > 0");
  std::vector<double> v(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    double u = lambda * grid.x(i);
    double d = 1.0 + u * u;
    v[i] = (2.0 / pi) * (1.0 - 3.0 * u * u) / (d * d * d);
  }
  return Profile::perturbation(grid, std::move(v));
}

// Columns of 2 Q_0(h, G_0) - (1/4) d/dx(x h), Fromm drift and cubic deposition.
inline LinearOperatorMatrix assemble_l0(const Grid& grid, double lambda,
                                        MidpointRule rule = MidpointRule::cubic,
                                        DriftScheme drift = DriftScheme::fromm) {
  if (maxwell_mass_on(lambda, grid.half_width()) < 0.99)
    throw UnderResolved("G_0 carries less than 99% of its mass on the grid");
  const int n = grid.size();
  const double dx = grid.dx();
  Profile G = maxwell_profile(grid, lambda);
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += G[i];
  LinearOperatorMatrix L{grid, lambda, Eigen::MatrixXd::Zero(n, n), moment_functionals(grid)};
  parallel_blocks(n, thread_budget(), [&](std::size_t b, std::size_t e, int) {
    std::vector<double> H(2 * n - 1), gain, unit(n, 0.0), drift_out, slope;
    for (int j = static_cast<int>(b); j < static_cast<int>(e); ++j) {
      std::fill(H.begin(), H.end(), 0.0);
      for (int k = 0; k < n; ++k) H[j + k] = dx * dx * G[k];
      deposit_pairs(H, n, rule, gain);
      unit[j] = 1.0;
      drift_rate(grid, unit, 0.25, drift, drift_out, slope);
      unit[j] = 0.0;
      for (int i = 0; i < n; ++i) {
        double loss = 0.5 * dx * dx * ((i == j ? total : 0.0) + G[i]);
        L.A(i, j) = 2.0 * (gain[i] - loss) / dx + drift_out[i];
      }
    }
  });
  return L;
}

inline double weighted_l1(const Grid& grid, const Eigen::VectorXd& h, double a) {
  Weight w{a};
  double acc = 0.0;
  for (int i = 0; i < grid.size(); ++i) acc += std::abs(h[i]) * w(grid.x(i));
  return acc * grid.dx();
}

inline double kernel_residual_of(const LinearOperatorMatrix& L, const Profile& h, double a = 2.5) {
  require_same_grid(L.grid, h.grid());
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(h.values().data(), h.size());
  double denom = weighted_l1(L.grid, v, a);
  if (!(denom > 0)) throw std::invalid_argument("kernel residual of a zero vector");
  return weighted_l1(L.grid, L.A * v, a) / denom;
}

inline double kernel_residual(const LinearOperatorMatrix& L, double lambda, double a = 2.5) {
  return kernel_residual_of(L, phi0_profile(L.grid, lambda), a);
}

struct NearKernelVector {
  double singular_value = 0.0;
  double i0 = 0.0;
  double m2 = 0.0;
};

struct GapReport {
  double a = 2.5;
  int N = 0;
  double L = 0.0;
  double kernel_residual = 0.0;
  double gap_l2_proxy = 0.0;
  double gap_l1_probe = 0.0;
  int probes = 0;
  std::uint64_t seed = 0;
  std::vector<NearKernelVector> near_kernel;
};

// Orthonormal basis of {y : C y = 0}, C = V W^{-1}, in weighted coordinates y = W h.
inline Eigen::MatrixXd moment_free_basis(const LinearOperatorMatrix& L, const Eigen::VectorXd& w) {
  const int n = L.grid.size();
  Eigen::MatrixXd Ct = (L.moments * w.cwiseInverse().asDiagonal()).transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Ct);
  if (qr.rank() < 3) throw std::invalid_argument("moment functionals are rank deficient on this grid");
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return Q.rightCols(n - 3);
}

inline Eigen::VectorXd weight_diagonal(const Grid& grid, double a) {
  Weight wt{a};
  Eigen::VectorXd w(grid.size());
  for (int i = 0; i < grid.size(); ++i) w[i] = wt(grid.x(i)) * grid.dx();
  return w;
}

// Removes the {1, x, x^2} components of h, orthogonally in the weighted coordinates.
inline Eigen::VectorXd project_moment_free(const LinearOperatorMatrix& L, const Eigen::VectorXd& h, double a) {
  Eigen::VectorXd w = weight_diagonal(L.grid, a);
  Eigen::MatrixXd C = L.moments * w.cwiseInverse().asDiagonal();
  Eigen::VectorXd y = w.cwiseProduct(h);
  Eigen::VectorXd coef = (C * C.transpose()).ldlt().solve(C * y);
  y -= C.transpose() * coef;
  return y.cwiseQuotient(w);
}

inline GapReport spectral_gap_estimate(const LinearOperatorMatrix& L, double a, std::uint64_t seed = 1,
                                       int probes = 512) {
  if (!(a > 2) || !(a < 3)) throw std::invalid_argument("spectral gap weight must lie in (2,3)");
  const Grid& grid = L.grid;
  const int n = grid.size();
  GapReport r;
  r.a = a;
  r.N = n;
  r.L = grid.half_width();
  r.seed = seed;
  r.probes = probes;
  r.kernel_residual = kernel_residual(L, L.lambda, a);

  Eigen::VectorXd w = weight_diagonal(grid, a);
  Eigen::MatrixXd B = w.asDiagonal() * L.A * w.cwiseInverse().asDiagonal();
  Eigen::MatrixXd Q0 = moment_free_basis(L, w);
  Eigen::BDCSVD<Eigen::MatrixXd> restricted(B * Q0);
  r.gap_l2_proxy = restricted.singularValues().minCoeff();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> center(-0.5 * r.L, 0.5 * r.L), width(0.1, 2.0), amp(-1.0, 1.0);
  std::uniform_int_distribution<int> count(1, 3);
  std::vector<Eigen::VectorXd> hs(probes, Eigen::VectorXd::Zero(n));
  for (auto& h : hs) {
    int bumps = count(rng);
    for (int b = 0; b < bumps; ++b) {
      double c = center(rng), s = width(rng), A = amp(rng);
      for (int i = 0; i < n; ++i) {
        double z = (grid.x(i) - c) / s;
        h[i] += A * std::exp(-0.5 * z * z);
      }
    }
  }
  std::vector<double> ratio(probes);
  parallel_blocks(probes, thread_budget(), [&](std::size_t b, std::size_t e, int) {
    for (std::size_t p = b; p < e; ++p) {
      Eigen::VectorXd h = project_moment_free(L, hs[p], a);
      ratio[p] = weighted_l1(grid, L.A * h, a) / weighted_l1(grid, h, a);
    }
  });
  r.gap_l1_probe = *std::min_element(ratio.begin(), ratio.end());

  Eigen::BDCSVD<Eigen::MatrixXd> full(B, Eigen::ComputeThinV);
  const auto& sv = full.singularValues();
  Profile G = maxwell_profile(grid, L.lambda);
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv[k] > 10.0 * r.kernel_residual) continue;
    Eigen::VectorXd h = full.matrixV().col(k).cwiseQuotient(w);
    h /= weighted_l1(grid, h, a);
    std::vector<double> hv(h.data(), h.data() + n);
    Profile hp = Profile::perturbation(grid, hv);
    r.near_kernel.push_back({sv[k], i0_functional(hp, G), moment(hp, 2.0)});
  }
  return r;
}

inline json gap_json(const GapReport& r) {
  json nk = json::array();
  for (const auto& v : r.near_kernel) nk.push_back({{"singular_value", v.singular_value}, {"i0", v.i0}, {"m2", v.m2}});
  return json{{"a", r.a},
              {"N", r.N},
              {"L", r.L},
              {"kernel_residual", r.kernel_residual},
              {"gap_l2_proxy", r.gap_l2_proxy},
              {"gap_l1_probe", r.gap_l1_probe},
              {"probes", r.probes},
              {"seed", r.seed},
              {"near_kernel", nk}};
}

} // namespace stickyss

#endif
