#ifndef STICKYSS_AUDIT_HPP
#define STICKYSS_AUDIT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "collision.hpp"
#include "core.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "parallel.hpp"
#include "selfsim.hpp"

namespace stickyss {

struct CheckResult {
  std::string name;
  long samples = 0;
  long violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();  // min of (rhs - lhs) / scale
  json parameters = json::object();

  void record(double lhs, double rhs, double scale, double tol = 0.0) {
    ++samples;
    double margin = (rhs - lhs) / (scale > 0 ? scale : 1.0);
    worst_margin = std::min(worst_margin, margin);
    if (margin < -tol) ++violations;
  }
  bool passed() const { return violations == 0 && samples > 0; }
};

struct AuditReport {
  std::vector<CheckResult> checks;
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed(); });
  }
  const CheckResult& find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw std::out_of_range("no audit check named " + name);
  }
};

inline json audit_json(const AuditReport& r) {
  json out = json::array();
  for (const auto& c : r.checks) {
    json j{{"name", c.name}, {"samples", c.samples}, {"violations", c.violations}, {"parameters", c.parameters}};
    j["worst_margin"] = std::isfinite(c.worst_margin) ? json(c.worst_margin) : json(nullptr);
    out.push_back(j);
  }
  return out;
}

// ---------------------------------------------------------------- pointwise

namespace detail {

// half compact uniform draws, half Cauchy-scale draws
inline double mixed_draw(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::cauchy_distribution<double> c(0.0, 1.0);
  return (rng() & 1) ? u(rng) : c(rng);
}

// -(2^{1-m}(1+u)^m - |u|^m - 1) - (1 - 2^{1-m} - alpha)(u-1)^2
inline double alpha_delta_margin(double u, double m, double alpha) {
  double p = std::exp2(1.0 - m);
  return -(p * std::pow(1.0 + u, m) - std::pow(std::abs(u), m) - 1.0) - (1.0 - p - alpha) * (u - 1.0) * (u - 1.0);
}

}  // namespace detail

struct AlphaDeltaWitness {
  double k0 = 0.1;
  double lambda = 0.0;  // inf over m of the three derivative quantities
  double alpha0 = 0.0;
  double alpha = 0.0;
  double delta = 0.0;
  double m_at_delta = 0.0;
  double boundary_margin = 0.0;  // margin at u = -delta for m_at_delta
};

// Finds one admissible (alpha, delta) by the construction in the proof:
// alpha below Lambda/4, then delta_m as the root of the margin on (-1, 0).
inline AlphaDeltaWitness find_alpha_delta(double k0 = 0.1, int m_points = 4001) {
  if (!(k0 > 0) || !(k0 < 0.5)) throw std::invalid_argument("k0 must lie in (0, 1/2)");
  AlphaDeltaWitness w;
  w.k0 = k0;
  const double m_lo = 2.0 + k0, m_hi = 3.0 - k0;
  auto m_at = [&](int i) { return m_lo + (m_hi - m_lo) * i / (m_points - 1); };
  double lam = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m_points; ++i) {
    double m = m_at(i), p = std::exp2(1.0 - m);
    lam = std::min({lam, m * (m - 1.0) * p + 2.0 * (1.0 - p), 2.0 - p * (2.0 + m), -m + 4.0 * (1.0 - p)});
  }
  if (!(lam > 0)) throw SearchFailed("Lambda is not positive on the m range");
  w.lambda = lam;
  w.alpha0 = lam / 4.0;
  w.alpha = 0.5 * w.alpha0;
  double best = 1.0;
  for (int i = 0; i < m_points; ++i) {
    double m = m_at(i);
    auto f = [&](double u) { return detail::alpha_delta_margin(u, m, w.alpha); };
    double lo = -1.0, hi = 0.0;  // f(lo) < 0 < f(hi)
    if (!(f(lo) < 0) || !(f(hi) > 0)) throw SearchFailed("alpha-delta margin has no sign change on (-1, 0)");
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      double mid = 0.5 * (lo + hi);
      (f(mid) < 0 ? lo : hi) = mid;
    }
    double d = -hi;
    if (d < best) {
      best = d;
      w.m_at_delta = m;
    }
  }
  // the grid minimum is shaved slightly so m between grid nodes stays covered
  w.delta = best * (1.0 - 1e-6);
  w.boundary_margin = detail::alpha_delta_margin(-w.delta, w.m_at_delta, w.alpha);
  if (!(w.delta > 0)) throw SearchFailed("bisection produced a non-positive delta");
  return w;
}

inline AuditReport audit_pointwise_inequalities(long sample_count, std::uint64_t seed,
                                                AlphaDeltaWitness* witness_out = nullptr) {
  if (sample_count < 100000) throw std::invalid_argument("pointwise audit needs at least 1e5 samples");
  AuditReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double eps = 1e-12;

  CheckResult a{"energy_identity"};
  for (long n = 0; n < sample_count; ++n) {
    double x = detail::mixed_draw(rng), y = detail::mixed_draw(rng);
    double ab = 0.5 + 0.5 * unit(rng), bb = 1.0 - ab;
    double xp = ab * x + bb * y, yp = bb * x + ab * y;
    double lhs = xp * xp + yp * yp - x * x - y * y;
    double rhs = -2.0 * ab * bb * (x - y) * (x - y);
    double scale = x * x + y * y + 1e-300;
    a.record(std::abs(lhs - rhs), 0.0, scale, eps);
  }
  a.parameters = {{"a_bar", "uniform [1/2, 1]"}};
  rep.checks.push_back(a);

  CheckResult b{"midpoint_defect_bound"};
  for (long n = 0; n < sample_count; ++n) {
    double x = detail::mixed_draw(rng), y = detail::mixed_draw(rng), g = unit(rng);
    double ax = std::abs(x), ay = std::abs(y);
    double lhs = -(2.0 * std::abs(0.5 * (x + y)) - ax - ay) * std::pow(std::abs(x - y), g);
    double rhs = std::exp2(g + 1.0) * std::max(std::pow(ax, g), std::pow(ay, g)) * std::min(ax, ay);
    b.record(lhs, rhs, std::max({std::abs(lhs), std::abs(rhs), 1e-300}), eps);
  }
  b.parameters = {{"gamma", "uniform (0, 1)"}};
  rep.checks.push_back(b);

  CheckResult c{"midpoint_power_expansion"};
  for (long n = 0; n < sample_count; ++n) {
    double x = detail::mixed_draw(rng), y = detail::mixed_draw(rng), k = 3.0 * unit(rng);
    double ax = std::abs(x), ay = std::abs(y);
    double lhs = std::pow(std::abs(0.5 * (x + y)), k);
    double rhs = std::exp2(-k) * (std::pow(ax, k) + 3.0 * std::pow(ax, 2 * k / 3) * std::pow(ay, k / 3) +
                                  3.0 * std::pow(ax, k / 3) * std::pow(ay, 2 * k / 3) + std::pow(ay, k));
    c.record(lhs, rhs, std::max(rhs, 1e-300), eps);
  }
  c.parameters = {{"k", "uniform (0, 3)"}};
  rep.checks.push_back(c);

  AlphaDeltaWitness w = find_alpha_delta(0.1);
  CheckResult d{"alpha_delta"};
  std::uniform_real_distribution<double> kdist(w.k0, 1.0 - w.k0);
  for (long n = 0; n < sample_count; ++n) {
    double k = kdist(rng);
    double y = detail::mixed_draw(rng);
    if (y == 0.0) y = 1.0;
    double u = -w.delta + (1.0 + w.delta) * unit(rng);
    double x = u * y;
    if (rng() & 1) std::swap(x, y);
    double m = 2.0 + k;
    double lhs = (1.0 - std::exp2(-1.0 - k) - w.alpha) * std::pow(std::max(std::abs(x), std::abs(y)), k) *
                 (x - y) * (x - y);
    double rhs = -(2.0 * std::pow(std::abs(0.5 * (x + y)), m) - std::pow(std::abs(x), m) - std::pow(std::abs(y), m));
    d.record(lhs, rhs, std::max({std::abs(lhs), std::abs(rhs), 1e-300}), eps);
  }
  d.parameters = {{"k0", w.k0},       {"Lambda", w.lambda}, {"alpha0", w.alpha0},
                  {"alpha", w.alpha}, {"delta", w.delta},   {"boundary_margin", w.boundary_margin}};
  rep.checks.push_back(d);
  if (witness_out) *witness_out = w;
  return rep;
}

// ---------------------------------------------------------------- operator bounds

namespace detail {

struct MixtureSpec {
  struct Part {
    bool gaussian;
    double center, width, weight;
  };
  std::vector<Part> parts;

  static MixtureSpec random(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> c(-3.0, 3.0), s(0.3, 1.5), wgt(0.2, 1.0);
    std::uniform_int_distribution<int> count(1, 3);
    MixtureSpec m;
    int n = count(rng);
    for (int i = 0; i < n; ++i) m.parts.push_back({(rng() & 1) == 0, c(rng), s(rng), wgt(rng)});
    return m;
  }

  Profile sample(const Grid& grid) const {
    std::vector<double> v(grid.size(), 0.0);
    for (const auto& p : parts) {
      for (int i = 0; i < grid.size(); ++i) {
        if (p.gaussian) {
          double z = (grid.x(i) - p.center) / p.width;
          v[i] += p.weight * std::exp(-0.5 * z * z) / (p.width * std::sqrt(2.0 * pi));
        } else {
          double lo = std::max(grid.interface(i), p.center - p.width);
          double hi = std::min(grid.interface(i + 1), p.center + p.width);
          if (hi > lo) v[i] += p.weight * (hi - lo) / grid.dx() / (2.0 * p.width);
        }
      }
    }
    return Profile(grid, std::move(v));
  }
};

inline double lp_weighted(const Profile& f, double k, double p) {
  Weight w{k};
  double acc = 0.0;
  for (int i = 0; i < f.size(); ++i) acc += std::pow(std::abs(f[i]) * w(f.grid().x(i)), p);
  return std::pow(acc * f.grid().dx(), 1.0 / p);
}

inline double l2_weighted_values(const Grid& grid, const std::vector<double>& v, double k) {
  Weight w{k};
  double acc = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    double t = v[i] * w(grid.x(i));
    acc += t * t;
  }
  return std::sqrt(acc * grid.dx());
}

inline double l1_weighted_values(const Grid& grid, const std::vector<double>& v, double k) {
  Weight w{k};
  double acc = 0.0;
  for (int i = 0; i < grid.size(); ++i) acc += std::abs(v[i]) * w(grid.x(i));
  return acc * grid.dx();
}

// lhs, rhs of one bound evaluated on a grid
using BoundEval = std::function<std::pair<double, double>(const Grid&)>;

// lhs_N <= rhs_N + |lhs_N - lhs_{N/2}| + |rhs_N - rhs_{N/2}|
inline void record_with_refinement(CheckResult& c, const BoundEval& eval, const Grid& fine) {
  Grid coarse(fine.half_width(), fine.size() / 2);
  auto [lf, rf] = eval(fine);
  auto [lc, rc] = eval(coarse);
  double slack = std::abs(lf - lc) + std::abs(rf - rc);
  c.record(lf, rf + slack, std::max(std::abs(rf), 1e-300));
}

inline std::vector<double> loss_values(const Profile& f, const Profile& g, double gamma) {
  const Grid& gr = f.grid();
  KernelTable K(gr, gamma);
  std::vector<double> out(gr.size());
  for (int i = 0; i < gr.size(); ++i) {
    double s = 0.0;
    for (int j = 0; j < gr.size(); ++j) s += g[j] * K.rate[std::abs(i - j)];
    out[i] = f[i] * s * gr.dx();
  }
  return out;
}

}  // namespace detail

struct OperatorAuditOptions {
  double half_width = 12.0;
  int cell_count = 512;
};

inline AuditReport audit_operator_bounds(int trial_count, std::uint64_t seed, OperatorAuditOptions opt = {}) {
  if (trial_count < 50) throw std::invalid_argument("operator audit needs at least 50 trials");
  const Grid grid(opt.half_width, opt.cell_count);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AuditReport rep;
  CheckResult q0{"gain_l2_bound"}, l1{"collision_l1_bound"}, l2m{"loss_l2_bound"}, dq{"gamma_comparison_bound"};
  CheckResult l2p{"gain_l2_fitted_constant"};
  double fitted_fine = 0.0, fitted_coarse = 0.0, proof_ratio = 0.0;

  for (int t = 0; t < trial_count; ++t) {
    auto F = detail::MixtureSpec::random(rng), G = detail::MixtureSpec::random(rng),
         H = detail::MixtureSpec::random(rng);
    double gamma = 0.01 + 0.49 * unit(rng);
    double k = 3.0 * unit(rng);
    double a = 2.0 + 0.02 + 0.96 * unit(rng);
    double s = 0.1 + 0.8 * unit(rng);
    const double ps[] = {1.5, 2.0, 3.0};
    double p = ps[t % 3];

    detail::record_with_refinement(q0, [&](const Grid& gr) {
      Profile f = F.sample(gr), g = G.sample(gr), h = H.sample(gr);
      std::vector<double> gain = q_gain_direct(f, g, 0.0);
      double lhs = 0.0;
      for (int i = 0; i < gr.size(); ++i) lhs += gain[i] * h[i];
      lhs *= gr.dx();
      double rhs = std::sqrt(2.0) * weighted_norm(h, 0, 2) *
                   std::min(weighted_norm(f, 0, 1) * weighted_norm(g, 0, 2),
                            weighted_norm(g, 0, 1) * weighted_norm(f, 0, 2));
      return std::make_pair(lhs, rhs);
    }, grid);

    detail::record_with_refinement(l1, [&](const Grid& gr) {
      Profile f = F.sample(gr), g = G.sample(gr);
      CollisionRate q = q_apply(f, g, gamma);
      double lhs = detail::l1_weighted_values(gr, q.rate, k);
      double rhs = 2.0 * weighted_norm(f, k + gamma, 1) * weighted_norm(g, k + gamma, 1);
      return std::make_pair(lhs, rhs);
    }, grid);

    detail::record_with_refinement(l2m, [&](const Grid& gr) {
      Profile f = F.sample(gr);
      double lhs = detail::l2_weighted_values(gr, detail::loss_values(f, f, gamma), k);
      double rhs = weighted_norm(f, gamma, 1) * weighted_norm(f, k + gamma, 2);
      return std::make_pair(lhs, rhs);
    }, grid);

    auto gain_ratio = [&](const Grid& gr) {
      Profile f = F.sample(gr);
      std::vector<double> gain = q_gain_direct(f, f, gamma);
      return detail::l2_weighted_values(gr, gain, k) / (weighted_norm(f, 0, 2) * weighted_norm(f, k + gamma, 1));
    };
    double rf = gain_ratio(grid), rc = gain_ratio(Grid(grid.half_width(), grid.size() / 2));
    fitted_fine = std::max(fitted_fine, rf);
    fitted_coarse = std::max(fitted_coarse, rc);
    proof_ratio = std::max(proof_ratio, rf / (std::pow(2.0, k + gamma + 0.5) + std::pow(2.0, gamma + 0.5)));

    detail::record_with_refinement(dq, [&](const Grid& gr) {
      Profile f = F.sample(gr), g = G.sample(gr);
      CollisionRate r0 = q_apply(f, g, 0.0), rg = q_apply(f, g, gamma);
      std::vector<double> diff(gr.size());
      for (int i = 0; i < gr.size(); ++i) diff[i] = r0.rate[i] - rg.rate[i];
      double lhs = detail::l1_weighted_values(gr, diff, a);
      double fa = weighted_norm(f, a, 1), ga = weighted_norm(g, a, 1);
      double rhs = 4.0 * gamma * fa * detail::lp_weighted(g, a, p) +
                   4.0 * p / (p - 1.0) * gamma * std::abs(std::log(gamma)) * fa * ga +
                   16.0 * gamma / s * weighted_norm(f, s + gamma + a, 1) * weighted_norm(g, s + gamma + a, 1);
      return std::make_pair(lhs, rhs);
    }, grid);
  }
  q0.parameters = {{"constant", std::sqrt(2.0)}};
  l1.parameters = {{"constant", 2.0}, {"k", "uniform [0, 3)"}, {"gamma", "uniform [0.01, 0.5)"}};
  l2m.parameters = {{"constant", 1.0}};
  dq.parameters = {{"constants", {"4 gamma", "4p/(p-1) gamma |log gamma|", "16 gamma / s"}},
                   {"p", {1.5, 2.0, 3.0}}};
  // fitted once on the fine grid, accepted when the coarse fit agrees to 5%
  l2p.samples = trial_count;
  double change = std::abs(fitted_fine - fitted_coarse) / fitted_fine;
  l2p.worst_margin = 0.05 - change;
  l2p.violations = change <= 0.05 ? 0 : 1;
  l2p.parameters = {{"fitted_C", fitted_fine},
                    {"fitted_C_coarse", fitted_coarse},
                    {"relative_change", change},
                    {"max_ratio_to_proof_constant", proof_ratio}};
  rep.checks = {q0, l1, l2m, l2p, dq};
  for (auto& c : rep.checks) {
    c.parameters["N"] = grid.size();
    c.parameters["L"] = grid.half_width();
    c.parameters["seed"] = seed;
  }
  return rep;
}

// ---------------------------------------------------------------- steady profile

inline AuditReport audit_steady_profile(const SteadyResult& G, const SteadyResult* coarser = nullptr) {
  AuditReport rep;
  const double gamma = G.profile.gamma();
  const double res = std::isfinite(G.residual) ? G.residual : 0.0;

  CheckResult m2{"energy_upper_bound"};
  if (gamma > 0) {
    m2.record(G.m2, 0.5 + 10.0 * res, 0.5);
    m2.parameters = {{"M2", G.m2}, {"bound", 0.5 + 10.0 * res}};
  } else {
    m2.samples = 1;
    m2.worst_margin = 0.0;
    m2.parameters = {{"M2", G.m2}, {"applies", false}};
  }
  rep.checks.push_back(m2);

  CheckResult low{"moment_lower_bound"};
  if (gamma > 0) {
    json vals = json::array();
    for (double s : {gamma, 1.0, 2.0}) {
      double floor = std::pow(1.0 / (8.0 * std::exp2(gamma)), s / gamma);
      double ms = moment(G.profile, s);
      low.record(floor, ms, std::max(ms, 1e-300));
      vals.push_back({{"s", s}, {"moment", ms}, {"floor", floor}});
    }
    low.parameters = {{"values", vals}};
  } else {
    low.samples = 1;
    low.worst_margin = 0.0;
    low.parameters = {{"applies", false}};
  }
  rep.checks.push_back(low);

  CheckResult ident{"steady_energy_identity"};
  if (gamma > 0 && G.i_gamma_identity) {
    ident.record(std::abs(*G.i_gamma_identity), 10.0 * res, std::max(10.0 * res, 1e-300));
    ident.parameters = {{"I_gamma", *G.i_gamma_identity}, {"residual", res}};
  } else {
    ident.samples = 1;
    ident.worst_margin = 0.0;
    ident.parameters = {{"applies", false}};
  }
  rep.checks.push_back(ident);

  CheckResult px{"pointwise_xG"};
  px.parameters = {{"max_xG", G.max_xG}};
  if (!std::isfinite(G.max_xG)) {
    px.samples = 1;
    px.violations = 1;
    px.worst_margin = -1.0;
  } else if (coarser) {
    double change = std::abs(G.max_xG - coarser->max_xG) / G.max_xG;
    px.record(change, 0.05, 0.05);
    px.parameters["max_xG_coarse"] = coarser->max_xG;
    px.parameters["relative_change"] = change;
  } else {
    px.samples = 1;
    px.worst_margin = 0.0;
  }
  rep.checks.push_back(px);
  return rep;
}

// ---------------------------------------------------------------- interpolation

struct InterpolationFit {
  double a = 2.3, a_star = 2.8, alpha = 0.1;
  double constant = 0.0;
  double constant_coarse = 0.0;
  double constant_variation = 0.0;  // fit on a second, independent batch
};

// fits C in ||f||_{L1(w_a)} <= C ||f||_2^alpha ||f||_{L1(w_a*)}^{1-alpha}
inline InterpolationFit fit_interpolation_constant(int profiles, std::uint64_t seed, const Grid& grid,
                                                   double a = 2.3, double a_star = 2.8, double alpha = 0.1) {
  if (!(a_star > a) || !(alpha > 0) || !(alpha < 2.0 * (a_star - a) / (2.0 * a_star + 1.0)))
    throw std::invalid_argument("interpolation exponent outside the admissible range");
  InterpolationFit fit{a, a_star, alpha};
  auto ratio = [&](const Profile& f) {
    return weighted_norm(f, a, 1) /
           (std::pow(weighted_norm(f, 0, 2), alpha) * std::pow(weighted_norm(f, a_star, 1), 1.0 - alpha));
  };
  Grid coarse(grid.half_width(), grid.size() / 2);
  auto batch = [&](std::uint64_t s, double& fine_c, double& coarse_c) {
    std::mt19937_64 rng(s);
    fine_c = coarse_c = 0.0;
    for (int i = 0; i < profiles; ++i) {
      auto spec = detail::MixtureSpec::random(rng);
      fine_c = std::max(fine_c, ratio(spec.sample(grid)));
      coarse_c = std::max(coarse_c, ratio(spec.sample(coarse)));
    }
  };
  batch(seed, fit.constant, fit.constant_coarse);
  double dummy;
  batch(seed + 0x9e3779b97f4a7c15ULL, fit.constant_variation, dummy);
  return fit;
}

inline CheckResult interpolation_check(const InterpolationFit& fit) {
  CheckResult c{"interpolation_fitted_constant"};
  double change = std::max(std::abs(fit.constant - fit.constant_coarse),
                           std::abs(fit.constant - fit.constant_variation)) / fit.constant;
  c.record(change, 0.05, 0.05);
  c.parameters = {{"a", fit.a},
                  {"a_star", fit.a_star},
                  {"alpha", fit.alpha},
                  {"fitted_C", fit.constant},
                  {"fitted_C_coarse", fit.constant_coarse},
                  {"fitted_C_second_batch", fit.constant_variation}};
  return c;
}

}  // namespace stickyss

#endif
