#ifndef STICKYSS_CORE_HPP
#define STICKYSS_CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace stickyss {

inline constexpr double pi = std::numbers::pi;
// scaling parameter of the gamma -> 0 limit profile, 2 sqrt(e)
inline const double lambda_limit = 2.0 * std::sqrt(std::numbers::e);

class Grid {
 public:
  Grid() = default;
  Grid(double half_width, int cell_count) : L_(half_width), N_(cell_count) {
    if (!(half_width > 0) || !std::isfinite(half_width))
      throw std::invalid_argument("grid half width must be positive");
    if (cell_count < 16 || cell_count % 2 != 0)
      throw std::invalid_argument("grid cell count must be even and >= 16");
    dx_ = 2.0 * L_ / N_;
  }

  double half_width() const { return L_; }
  int size() const { return N_; }
  double dx() const { return dx_; }

  // (2i + 1 - N) is an odd integer, so x_i = -x_{N-1-i} holds bit for bit
  double x(int i) const { return (2 * i + 1 - N_) * (0.5 * dx_); }
  double interface(int i) const { return (i - N_ / 2) * dx_; }

  std::vector<double> centers() const {
    std::vector<double> out(N_);
    for (int i = 0; i < N_; ++i) out[i] = x(i);
    return out;
  }

  bool operator==(const Grid& o) const { return L_ == o.L_ && N_ == o.N_; }

 private:
  double L_ = 1.0;
  int N_ = 16;
  double dx_ = 0.125;
};

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw GridMismatch("profiles live on different grids");
}

struct Weight {
  double order = 0.0;
  double operator()(double x) const { return order == 0.0 ? 1.0 : std::pow(1.0 + std::abs(x), order); }
};

class Profile {
 public:
  Profile() = default;
  Profile(Grid grid, std::vector<double> values, double gamma = 0.0, double c = 0.25,
          bool perturbation = false)
      : grid_(grid), values_(std::move(values)), gamma_(gamma), c_(c), perturbation_(perturbation) {
    if (static_cast<int>(values_.size()) != grid_.size())
      throw std::invalid_argument("profile length does not match grid");
    double peak = 0.0;
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("profile has non-finite values");
      peak = std::max(peak, v);
    }
    if (!perturbation_) {
      for (double v : values_)
        if (v < -1e-14 * peak) throw std::invalid_argument("profile has negative values");
    }
  }

  static Profile perturbation(Grid grid, std::vector<double> values, double gamma = 0.0,
                              double c = 0.25) {
    return Profile(grid, std::move(values), gamma, c, true);
  }

  static Profile zeros(Grid grid) { return Profile(grid, std::vector<double>(grid.size(), 0.0)); }

  const Grid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  double operator[](int i) const { return values_[i]; }
  int size() const { return grid_.size(); }
  double gamma() const { return gamma_; }
  double c() const { return c_; }
  bool is_perturbation() const { return perturbation_; }
  Profile with_meta(double gamma, double c) const {
    Profile p = *this;
    p.gamma_ = gamma;
    p.c_ = c;
    return p;
  }

 private:
  Grid grid_;
  std::vector<double> values_;
  double gamma_ = 0.0;
  double c_ = 0.25;
  bool perturbation_ = false;
};

struct MomentVector {
  double mass = 0.0;
  double momentum = 0.0;
  double energy = 0.0;
  std::vector<std::pair<double, double>> higher;
};

inline double moment(const Profile& f, double s) {
  if (!(s >= 0)) throw std::invalid_argument("moment order must be nonnegative");
  const Grid& g = f.grid();
  double acc = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    double xi = std::abs(g.x(i));
    double w = s == 0.0 ? 1.0 : s == 1.0 ? xi : s == 2.0 ? xi * xi : std::pow(xi, s);
    acc += f[i] * w;
  }
  return acc * g.dx();
}

inline double mass(const Profile& f) { return moment(f, 0.0); }

inline double momentum(const Profile& f) {
  const Grid& g = f.grid();
  double acc = 0.0;
  for (int i = 0; i < g.size(); ++i) acc += f[i] * g.x(i);
  return acc * g.dx();
}

inline double signed_second_moment(const Profile& f) { return moment(f, 2.0); }

inline MomentVector moments(const Profile& f, const std::vector<double>& extra = {}) {
  MomentVector m{mass(f), momentum(f), moment(f, 2.0), {}};
  for (double s : extra) m.higher.emplace_back(s, moment(f, s));
  return m;
}

inline double weighted_norm(const Profile& f, double k, int p) {
  if (!(k >= 0)) throw std::invalid_argument("weight order must be nonnegative");
  if (p != 1 && p != 2) throw std::invalid_argument("only p = 1 and p = 2 are supported");
  const Grid& g = f.grid();
  Weight w{k};
  double acc = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    double v = std::abs(f[i]) * w(g.x(i));
    acc += p == 1 ? v : v * v;
  }
  acc *= g.dx();
  return p == 1 ? acc : std::sqrt(acc);
}

inline double weighted_distance(const Profile& f, const Profile& g, double k) {
  require_same_grid(f.grid(), g.grid());
  Weight w{k};
  double acc = 0.0;
  for (int i = 0; i < f.size(); ++i) acc += std::abs(f[i] - g[i]) * w(f.grid().x(i));
  return acc * f.grid().dx();
}

inline double l1_distance(const Profile& f, const Profile& g) { return weighted_distance(f, g, 0.0); }

// Sum_i f_i Sum_j g_j T[|i-j|]; T is indexed by the cell offset.
inline double toeplitz_form(const std::vector<double>& f, const std::vector<double>& g,
                            const std::vector<double>& table) {
  const int n = static_cast<int>(f.size());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (f[i] == 0.0) continue;
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += g[j] * table[std::abs(i - j)];
    total += f[i] * row;
  }
  return total;
}

inline double i0_functional(const Profile& f, const Profile& g) {
  require_same_grid(f.grid(), g.grid());
  const Grid& gr = f.grid();
  std::vector<double> t(gr.size(), 0.0);
  for (int d = 1; d < gr.size(); ++d) {
    double r = d * gr.dx();
    t[d] = r * r * std::log(r);
  }
  return gr.dx() * gr.dx() * toeplitz_form(f.values(), g.values(), t);
}

inline double i_gamma_functional(const Profile& f, const Profile& g, double gamma) {
  if (!(gamma > 0) || !(gamma < 1)) throw std::invalid_argument("i_gamma needs gamma in (0,1)");
  require_same_grid(f.grid(), g.grid());
  const Grid& gr = f.grid();
  std::vector<double> t(gr.size(), 0.0);
  for (int d = 1; d < gr.size(); ++d) {
    double r = d * gr.dx();
    t[d] = r * r * std::expm1(gamma * std::log(r)) / gamma;
  }
  return gr.dx() * gr.dx() * toeplitz_form(f.values(), g.values(), t);
}

inline double maxwell_density(double x, double lambda) {
  double u = lambda * x;
  double d = 1.0 + u * u;
  return lambda * (2.0 / pi) / (d * d);
}

inline Profile maxwell_profile(const Grid& grid, double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("maxwell profile needs lambda > 0");
  std::vector<double> v(grid.size());
  for (int i = 0; i < grid.size(); ++i) v[i] = maxwell_density(grid.x(i), lambda);
  return Profile(grid, std::move(v));
}

// exact integrals of H_lambda and x^2 H_lambda over [-L, L]
inline double maxwell_mass_on(double lambda, double L) {
  double a = lambda * L;
  return (2.0 / pi) * (std::atan(a) + a / (1.0 + a * a));
}

inline double maxwell_energy_on(double lambda, double L) {
  double a = lambda * L;
  return (2.0 / pi) * (std::atan(a) - a / (1.0 + a * a)) / (lambda * lambda);
}

inline Profile normalized(Profile f) {
  double m = mass(f);
  if (!(m > 0)) throw std::invalid_argument("cannot normalize a profile without mass");
  for (double& v : f.mutable_values()) v /= m;
  return f;
}

inline Profile gaussian_profile(const Grid& grid, double energy) {
  if (!(energy > 0)) throw std::invalid_argument("gaussian needs positive energy");
  std::vector<double> v(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    double x = grid.x(i);
    v[i] = std::exp(-x * x / (2.0 * energy));
  }
  return normalized(Profile(grid, std::move(v)));
}

// uniform density on [-a, a] with a = sqrt(3E), cell values from exact overlap
inline Profile uniform_profile(const Grid& grid, double energy) {
  if (!(energy > 0)) throw std::invalid_argument("uniform needs positive energy");
  double a = std::sqrt(3.0 * energy);
  std::vector<double> v(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    double lo = std::max(grid.interface(i), -a), hi = std::min(grid.interface(i + 1), a);
    v[i] = hi > lo ? (hi - lo) / grid.dx() : 0.0;
  }
  return normalized(Profile(grid, std::move(v)));
}

inline Profile spike_profile(const Grid& grid, int cell, double m = 1.0) {
  std::vector<double> v(grid.size(), 0.0);
  v.at(cell) = m / grid.dx();
  return Profile(grid, std::move(v));
}

inline double max_abs_x_times(const Profile& f) {
  double best = 0.0;
  for (int i = 0; i < f.size(); ++i) best = std::max(best, std::abs(f.grid().x(i) * f[i]));
  return best;
}

} // namespace stickyss

#endif
