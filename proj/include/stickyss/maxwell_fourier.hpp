#ifndef STICKYSS_MAXWELL_FOURIER_HPP
#define STICKYSS_MAXWELL_FOURIER_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "io.hpp"

namespace stickyss {

using cplx = std::complex<double>;

// xi_j = xi_min 2^(j/m); one transport step is an exact one-index shift
struct FourierGrid {
  double xi_min = 1e-8;
  int m = 32;
  int M = 0;

  FourierGrid() = default;
  FourierGrid(double xi_min_, int m_, int M_) : xi_min(xi_min_), m(m_), M(M_) { validate(); }

  static FourierGrid spanning(double xi_min, double xi_max, int m) {
    int M = static_cast<int>(std::ceil(m * std::log2(xi_max / xi_min))) + 1;
    return FourierGrid(xi_min, m, M);
  }

  void validate() const {
    if (!(xi_min > 0)) throw std::invalid_argument("xi_min must be positive");
    if (m < 8) throw std::invalid_argument("fourier grid needs m >= 8 points per octave");
    if (M <= m) throw std::invalid_argument("fourier grid must span more than one octave");
  }

  double xi(int j) const { return xi_min * std::exp2(static_cast<double>(j) / m); }
  double dt() const { return 4.0 * std::log(2.0) / m; }
  double xi_max() const { return xi(M - 1); }
  bool operator==(const FourierGrid& o) const { return xi_min == o.xi_min && m == o.m && M == o.M; }
};

// phi_j = 1 - E xi_j^2 / 2 + excess_j. Below xi_min the excess is taken as
// cubic |xi|^3, a coefficient the dynamics conserves.
struct FourierField {
  FourierGrid grid;
  double energy = 0.0;
  double cubic = 0.0;
  double momentum = 0.0;
  std::vector<cplx> excess;

  cplx value(int j) const {
    double x = grid.xi(j);
    return 1.0 - 0.5 * energy * x * x + excess[j];
  }

  cplx excess_at_half(int j) const {
    if (j >= grid.m) return excess[j - grid.m];
    double h = 0.5 * grid.xi(j);
    return cubic * h * h * h;
  }

  template <class Fn>
  static FourierField sample(const FourierGrid& grid, double energy, double cubic, Fn&& excess_of_xi) {
    grid.validate();
    FourierField f{grid, energy, cubic, 0.0, std::vector<cplx>(grid.M)};
    for (int j = 0; j < grid.M; ++j) f.excess[j] = excess_of_xi(grid.xi(j));
    return f;
  }
};

inline double h_hat(double xi, double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("h_hat needs lambda > 0");
  double u = std::abs(xi) / lambda;
  return (1.0 + u) * std::exp(-u);
}

// (1+u)e^{-u} - 1 + u^2/2 without cancellation
inline double h_hat_excess(double xi, double lambda) {
  double u = std::abs(xi) / lambda;
  if (u > 0.5) return (1.0 + u) * std::exp(-u) - 1.0 + 0.5 * u * u;
  double term = u * u, fact = 2.0, sum = 0.0;
  for (int k = 3; k < 30; ++k) {
    term *= u;
    fact *= k;
    double c = ((k % 2) ? -1.0 : 1.0) * (1.0 - k) / fact;
    sum += c * term;
  }
  return sum;
}

inline double gaussian_excess(double xi, double energy) {
  double z = 0.5 * energy * xi * xi;
  if (z > 0.1) return std::expm1(-z) + z;
  double term = -z, sum = 0.0;
  for (int k = 2; k < 20; ++k) {
    term *= -z / k;
    sum += term;
  }
  return sum;
}

inline FourierField maxwell_field(const FourierGrid& grid, double lambda) {
  return FourierField::sample(grid, 1.0 / (lambda * lambda), 1.0 / (3.0 * lambda * lambda * lambda),
                              [lambda](double x) { return cplx(h_hat_excess(x, lambda)); });
}

inline FourierField gaussian_field(const FourierGrid& grid, double energy) {
  return FourierField::sample(grid, energy, 0.0,
                              [energy](double x) { return cplx(gaussian_excess(x, energy)); });
}

inline double sigma_rate(double k) {
  if (!(k >= 2) || !(k <= 3)) throw std::invalid_argument("sigma_rate needs k in [2,3]");
  return 1.0 - 0.25 * k - std::exp2(1.0 - k);
}

namespace detail {

// Characteristics of the transport run xi(s) = xi0 e^{-s/4}; over one step
// the characteristic leaving xi_{j+1} lands on xi_j, and the one at half the
// argument is always j - m. Below E xi^2 = 1/4 the state is the excess and
// the quadratic terms cancel analytically; above it the state is phi itself.
struct Characteristics {
  const FourierField* f = nullptr;
  std::vector<double> start2;  // xi0^2 of each characteristic
  std::vector<char> direct;

  explicit Characteristics(const FourierField& field) : f(&field) {
    const int M = field.grid.M;
    start2.resize(M);
    direct.resize(M);
    for (int j = 0; j < M; ++j) {
      double x0 = field.grid.xi(j + 1);
      start2[j] = x0 * x0;
      direct[j] = field.energy * start2[j] > 0.25;
    }
  }

  double quad(int j, double s) const { return start2[j] * std::exp(-0.5 * s); }

  cplx excess(const std::vector<cplx>& z, int j, double s) const {
    return direct[j] ? z[j] - (1.0 - 0.5 * f->energy * quad(j, s)) : z[j];
  }
  cplx phi(const std::vector<cplx>& z, int j, double s) const {
    return direct[j] ? z[j] : 1.0 - 0.5 * f->energy * quad(j, s) + z[j];
  }

  void rate(const std::vector<cplx>& z, double s, std::vector<cplx>& out) const {
    const int M = f->grid.M, m = f->grid.m;
    const double E = f->energy;
    out.resize(M);
    for (int j = 0; j < M; ++j) {
      double x2 = quad(j, s);
      cplx half;
      if (j >= m) {
        half = excess(z, j - m, s);
      } else {
        double h = 0.5 * std::sqrt(x2);
        half = f->cubic * h * h * h;
      }
      if (direct[j]) {
        cplx ph = 1.0 - E * x2 / 8.0 + half;
        out[j] = ph * ph - z[j];
      } else {
        out[j] = E * E * x2 * x2 / 64.0 + 2.0 * half * (1.0 - E * x2 / 8.0) + half * half - z[j];
      }
    }
  }
};

} // namespace detail

// One step integrates every characteristic over dt with RK4; no splitting.
inline FourierField fourier_step(FourierField f, int steps, int substeps = 4) {
  f.grid.validate();
  if (static_cast<int>(f.excess.size()) != f.grid.M) throw std::invalid_argument("fourier field size mismatch");
  if (substeps < 1) throw std::invalid_argument("fourier_step needs at least one substep");
  const double dt = f.grid.dt();
  const int M = f.grid.M;
  const double h = dt / substeps;
  detail::Characteristics ch(f);
  std::vector<cplx> z(M), k1, k2, k3, k4, tmp(M);
  for (int s = 0; s < steps; ++s) {
    for (int j = 0; j + 1 < M; ++j) {
      z[j] = f.excess[j + 1];
      if (ch.direct[j]) z[j] += 1.0 - 0.5 * f.energy * ch.start2[j];
    }
    z[M - 1] = ch.direct[M - 1] ? cplx(0.0) : -(1.0 - 0.5 * f.energy * ch.start2[M - 1]);
    for (int n = 0; n < substeps; ++n) {
      double t0 = n * h;
      ch.rate(z, t0, k1);
      for (int j = 0; j < M; ++j) tmp[j] = z[j] + 0.5 * h * k1[j];
      ch.rate(tmp, t0 + 0.5 * h, k2);
      for (int j = 0; j < M; ++j) tmp[j] = z[j] + 0.5 * h * k2[j];
      ch.rate(tmp, t0 + 0.5 * h, k3);
      for (int j = 0; j < M; ++j) tmp[j] = z[j] + h * k3[j];
      ch.rate(tmp, t0 + h, k4);
      for (int j = 0; j < M; ++j) z[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    for (int j = 0; j < M; ++j) f.excess[j] = ch.excess(z, j, dt);
    for (int j = 0; j < M; ++j)
      if (std::abs(ch.phi(z, j, dt)) > 1.0 + 1e-12)
        throw std::logic_error("fourier field left the unit disc at xi = " + std::to_string(f.grid.xi(j)) +
                               " by " + std::to_string(std::abs(ch.phi(z, j, dt)) - 1.0));
  }
  return f;
}

inline double k_norm(const FourierField& a, const FourierField& b, double k) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("fourier fields live on different grids");
  if (std::abs(a.energy - b.energy) > 1e-8 || std::abs(a.momentum - b.momentum) > 1e-8)
    throw MomentMismatch("k-norm needs matching energy and momentum");
  double dE = b.energy - a.energy;
  double best = 0.0;
  for (int j = 0; j < a.grid.M; ++j) {
    double x = a.grid.xi(j);
    cplx d = a.excess[j] - b.excess[j] + 0.5 * dE * x * x;
    best = std::max(best, std::abs(d) / std::pow(x, k));
  }
  return best;
}

// sup_j |d_j| / xi_j^k for raw sampled values
inline double weighted_sup(const FourierGrid& grid, const std::vector<cplx>& d, double k) {
  double best = 0.0;
  for (int j = 0; j < grid.M; ++j) best = std::max(best, std::abs(d[j]) / std::pow(grid.xi(j), k));
  return best;
}

// e^{-iz} - 1 + iz + z^2/2
inline cplx third_order_remainder(double z) {
  if (std::abs(z) > 0.5) return std::exp(cplx(0.0, -z)) - 1.0 + cplx(0.0, z) + 0.5 * z * z;
  cplx w(0.0, -z), term = w * w / 2.0, sum = 0.0;
  for (int n = 3; n < 25; ++n) {
    term *= w / static_cast<double>(n);
    sum += term;
  }
  return sum;
}

// Direct sum of Sum_i f_i dx R(x_i xi_j); equals the transform when the
// first three moments of f vanish.
inline std::vector<cplx> transform_remainder(const Profile& f, const FourierGrid& grid) {
  std::vector<cplx> out(grid.M);
  const Grid& g = f.grid();
  for (int j = 0; j < grid.M; ++j) {
    double xi = grid.xi(j);
    cplx acc = 0.0;
    for (int i = 0; i < g.size(); ++i)
      if (f[i] != 0.0) acc += f[i] * third_order_remainder(g.x(i) * xi);
    out[j] = acc * g.dx();
  }
  return out;
}

inline std::vector<cplx> fourier_transform(const Profile& f, const FourierGrid& grid) {
  std::vector<cplx> out(grid.M);
  const Grid& g = f.grid();
  for (int j = 0; j < grid.M; ++j) {
    double xi = grid.xi(j);
    cplx acc = 0.0;
    for (int i = 0; i < g.size(); ++i) acc += f[i] * std::exp(cplx(0.0, -g.x(i) * xi));
    out[j] = acc * g.dx();
  }
  return out;
}

inline FourierField profile_to_fourier(const Profile& f, const FourierGrid& grid) {
  grid.validate();
  double m0 = mass(f);
  if (std::abs(m0 - 1.0) > 1e-8) throw std::invalid_argument("profile_to_fourier needs unit mass");
  FourierField out{grid, moment(f, 2.0), 0.0, momentum(f), transform_remainder(f, grid)};
  for (int j = 0; j < grid.M; ++j) {
    double xi = grid.xi(j);
    out.excess[j] += (m0 - 1.0) - cplx(0.0, xi * out.momentum);
  }
  return out;
}

struct ContractionReport {
  double k = 0.0;
  double sigma_k = 0.0;
  double fitted_rate = std::numeric_limits<double>::quiet_NaN();
  double window_start = 0.0;
  double window_end = 0.0;
  bool at_equilibrium = false;
  double worst_pair_ratio = 0.0;  // max D(t2) / (D(t1) e^{-sigma (t2-t1)})
  FourierGrid grid;
  std::vector<double> t, distance;
};

inline ContractionReport contraction_measurement(const FourierField& phi0, double lambda, double k, double T,
                                                 double record_interval = 0.5, int substeps = 4) {
  FourierField target = maxwell_field(phi0.grid, lambda);
  ContractionReport r;
  r.k = k;
  r.sigma_k = sigma_rate(k);
  r.grid = phi0.grid;
  double d0 = k_norm(phi0, target, k);
  const double dt = phi0.grid.dt();
  const int stride = std::max(1, static_cast<int>(std::round(record_interval / dt)));
  const int total = static_cast<int>(std::ceil(T / dt));
  FourierField phi = phi0;
  r.t.push_back(0.0);
  r.distance.push_back(d0);
  for (int done = 0; done < total; done += stride) {
    int n = std::min(stride, total - done);
    phi = fourier_step(std::move(phi), n, substeps);
    r.t.push_back((done + n) * dt);
    r.distance.push_back(k_norm(phi, target, k));
  }
  std::vector<double> ts, ds;
  for (std::size_t i = 0; i < r.t.size(); ++i)
    if (r.distance[i] > 1e-10) {
      ts.push_back(r.t[i]);
      ds.push_back(r.distance[i]);
    }
  if (ts.size() < 2) {
    r.at_equilibrium = true;
    return r;
  }
  r.window_start = ts.front();
  r.window_end = ts.back();
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double ly = std::log(ds[i]);
    st += ts[i];
    sy += ly;
    stt += ts[i] * ts[i];
    sty += ts[i] * ly;
  }
  double n = static_cast<double>(ts.size());
  r.fitted_rate = -(n * sty - st * sy) / (n * stt - st * st);
  for (std::size_t a = 0; a < r.t.size(); ++a)
    for (std::size_t b = a + 1; b < r.t.size(); ++b) {
      if (r.distance[a] == 0.0) continue;
      double bound = r.distance[a] * std::exp(-r.sigma_k * (r.t[b] - r.t[a]));
      r.worst_pair_ratio = std::max(r.worst_pair_ratio, r.distance[b] / bound);
    }
  return r;
}

inline json contraction_json(const ContractionReport& r) {
  json j{{"k", r.k},
         {"sigma_k", r.sigma_k},
         {"window", {r.window_start, r.window_end}},
         {"grid", {{"xi_min", r.grid.xi_min}, {"m", r.grid.m}, {"M", r.grid.M}}},
         {"at_equilibrium", r.at_equilibrium},
         {"worst_pair_ratio", r.worst_pair_ratio}};
  j["fitted_rate"] = std::isfinite(r.fitted_rate) ? json(r.fitted_rate) : json(nullptr);
  return j;
}

inline void write_decay_csv(std::ostream& os, const ContractionReport& r) {
  os << "t,distance\n" << std::setprecision(17);
  for (std::size_t i = 0; i < r.t.size(); ++i) os << r.t[i] << ',' << r.distance[i] << '\n';
}

} // namespace stickyss

#endif
