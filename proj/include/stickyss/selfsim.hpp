#ifndef STICKYSS_SELFSIM_HPP
#define STICKYSS_SELFSIM_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "collision.hpp"
#include "core.hpp"
#include "io.hpp"

namespace stickyss {

enum class DriftScheme {
  upwind,   // first order donor cell
  muscl,    // MC-limited linear reconstruction
  central,  // average of x g across the face; linear in g
  fromm     // unlimited centered-slope reconstruction; linear in g
};

inline const char* to_string(DriftScheme s) {
  switch (s) {
    case DriftScheme::upwind: return "upwind";
    case DriftScheme::muscl: return "muscl";
    case DriftScheme::central: return "central";
    case DriftScheme::fromm: return "fromm";
  }
  return "?";
}

inline const char* to_string(MidpointRule r) { return r == MidpointRule::linear ? "linear" : "cubic"; }

namespace detail {

inline double mc_slope(double left, double here, double right) {
  double a = here - left, b = right - here;
  if (a * b <= 0.0) return 0.0;
  double c = 0.5 * (right - left);
  double m = std::min({2.0 * std::abs(a), std::abs(c), 2.0 * std::abs(b)});
  return a > 0 ? m : -m;
}

} // namespace detail

// rate = -d/dx (c x g) in conservative flux form with zero boundary flux
inline void drift_rate(const Grid& grid, const std::vector<double>& g, double c, DriftScheme scheme,
                       std::vector<double>& out, std::vector<double>& slope) {
  const int n = grid.size();
  out.assign(n, 0.0);
  if (scheme == DriftScheme::muscl) {
    slope.assign(n, 0.0);
    for (int i = 1; i + 1 < n; ++i) slope[i] = detail::mc_slope(g[i - 1], g[i], g[i + 1]);
  } else if (scheme == DriftScheme::fromm) {
    slope.assign(n, 0.0);
    for (int i = 1; i + 1 < n; ++i) slope[i] = 0.5 * (g[i + 1] - g[i - 1]);
  }
  const double inv_dx = 1.0 / grid.dx();
  for (int k = 1; k < n; ++k) {
    double xf = grid.interface(k);
    double v = c * xf;
    double flux = 0.0;
    switch (scheme) {
      case DriftScheme::upwind:
        flux = v > 0 ? v * g[k - 1] : v < 0 ? v * g[k] : 0.0;
        break;
      case DriftScheme::muscl:
      case DriftScheme::fromm:
        flux = v > 0 ? v * (g[k - 1] + 0.5 * slope[k - 1]) : v < 0 ? v * (g[k] - 0.5 * slope[k]) : 0.0;
        break;
      case DriftScheme::central:
        flux = 0.5 * c * (grid.x(k - 1) * g[k - 1] + grid.x(k) * g[k]);
        break;
    }
    out[k - 1] -= flux * inv_dx;
    out[k] += flux * inv_dx;
  }
}

inline Profile drift_apply(const Profile& g, double c, DriftScheme scheme = DriftScheme::upwind) {
  if (!(c > 0)) throw std::invalid_argument("drift constant must be positive");
  std::vector<double> out, slope;
  drift_rate(g.grid(), g.values(), c, scheme, out, slope);
  return Profile::perturbation(g.grid(), std::move(out), g.gamma(), c);
}

struct InitialCondition {
  enum class Kind { gaussian, uniform, maxwell, file, profile };
  Kind kind = Kind::gaussian;
  double energy = 1.0;
  double lambda = 1.0;
  std::string path;
  std::optional<Profile> start;

  static InitialCondition gaussian(double e) { return {Kind::gaussian, e, 1.0, {}, {}}; }
  static InitialCondition uniform(double e) { return {Kind::uniform, e, 1.0, {}, {}}; }
  static InitialCondition maxwell(double l) { return {Kind::maxwell, 1.0 / (l * l), l, {}, {}}; }
  static InitialCondition file(std::string p) { return {Kind::file, 0.0, 0.0, std::move(p), {}}; }
  static InitialCondition from(Profile p) { return {Kind::profile, 0.0, 0.0, {}, std::move(p)}; }

  Profile build(const Grid& grid) const {
    switch (kind) {
      case Kind::gaussian: return gaussian_profile(grid, energy);
      case Kind::uniform: return uniform_profile(grid, energy);
      case Kind::maxwell: return normalized(maxwell_profile(grid, lambda));
      case Kind::file: return normalized(read_profile_file(path, grid));
      case Kind::profile:
        require_same_grid(start->grid(), grid);
        return normalized(*start);
    }
    throw std::logic_error("unknown initial condition");
  }

  std::string describe() const {
    switch (kind) {
      case Kind::gaussian: return "gaussian{E=" + format_real(energy) + "}";
      case Kind::uniform: return "uniform{E=" + format_real(energy) + "}";
      case Kind::maxwell: return "maxwell{lambda=" + format_real(lambda) + "}";
      case Kind::file: return "file{" + path + "}";
      case Kind::profile: return "profile";
    }
    return "?";
  }
};

struct SolverConfig {
  double gamma = 0.0;
  double c = 0.25;
  double half_width = 0.0;
  int cell_count = 0;
  std::optional<double> dt;  // empty means automatic
  double cfl = 0.5;
  double max_time = 100.0;
  double steady_tol = 1e-8;
  InitialCondition init = InitialCondition::gaussian(1.0);
  DriftScheme drift = DriftScheme::muscl;
  MidpointRule deposit = MidpointRule::cubic;
  bool energy_consistent = true;
  double rescale_interval = 1.0;
  double record_interval = 0.5;
  double clip_budget = 1e-8;
  double smoothing_time = 0.0;  // initial span run with linear deposition
  bool keep_even = true;

  Grid grid() const { return Grid(half_width, cell_count); }

  void validate() const {
    if (!(gamma >= 0) || !(gamma < 1)) throw std::invalid_argument("gamma must be in [0,1)");
    if (!(c > 0)) throw std::invalid_argument("c must be positive");
    (void)grid();
    if (!(cfl > 0) || cfl > 1) throw std::invalid_argument("cfl must be in (0,1]");
    if (dt && !(*dt > 0)) throw std::invalid_argument("dt must be positive");
    if (!(max_time > 0)) throw std::invalid_argument("max_time must be positive");
    if (!(steady_tol > 0)) throw std::invalid_argument("steady_tol must be positive");
    if (!(smoothing_time >= 0)) throw std::invalid_argument("smoothing_time must be nonnegative");
  }
};

class Stepper {
 public:
  explicit Stepper(const SolverConfig& cfg) : cfg_(cfg), grid_(cfg.grid()), engine_(grid_, cfg.gamma) {
    cfg_.validate();
    x2_.resize(grid_.size());
    for (int i = 0; i < grid_.size(); ++i) x2_[i] = grid_.x(i) * grid_.x(i);
  }

  const Grid& grid() const { return grid_; }
  const SolverConfig& config() const { return cfg_; }
  double dt() const { return dt_; }
  void set_deposit(MidpointRule rule) { cfg_.deposit = rule; }

  // Fixes the time step for a trajectory starting at g.
  void prepare(const std::vector<double>& g) {
    even_ = is_even(g);
    const double cfl_dt = cfg_.cfl * grid_.dx() / (cfg_.c * grid_.half_width());
    std::vector<double> ks;
    engine_.kernel_sums(g, ks, nullptr);
    double freq = *std::max_element(ks.begin(), ks.end()) * grid_.dx();
    if (cfg_.dt) {
      if (*cfg_.dt > cfl_dt * (1 + 1e-12))
        throw StabilityViolation("dt exceeds the drift CFL bound");
      dt_ = *cfg_.dt;
    } else {
      dt_ = cfl_dt;
      if (dt_ * freq > 0.5) dt_ = 0.5 / freq;
    }
    if (dt_ * freq > 1.0) throw StabilityViolation("dt exceeds the loss-rate bound");
  }

  struct RateInfo {
    double max_frequency = 0.0;
    double drift_scale = 1.0;
    double dissipation = 0.0;
  };

  RateInfo rate(const std::vector<double>& g, std::vector<double>& out) {
    engine_.apply(g, g, cfg_.deposit, coll_);
    drift_rate(grid_, g, cfg_.c, cfg_.drift, drift_, slope_);
    RateInfo info{coll_.max_frequency, 1.0, coll_.dissipation};
    if (cfg_.energy_consistent) {
      double m2 = 0.0, ec = 0.0, ed = 0.0;
      for (int i = 0; i < grid_.size(); ++i) {
        m2 += x2_[i] * g[i];
        ec += x2_[i] * coll_.rate[i];
        ed += x2_[i] * drift_[i];
      }
      const double dx = grid_.dx();
      m2 *= dx;
      ec *= dx;
      ed *= dx;
      double want = 2.0 * cfg_.c * m2 - coll_.dissipation - ec;
      if (ed > 1e-300 && want > 0) info.drift_scale = std::clamp(want / ed, 0.5, 2.0);
    }
    out.resize(grid_.size());
    for (int i = 0; i < grid_.size(); ++i) out[i] = coll_.rate[i] + info.drift_scale * drift_[i];
    return info;
  }

  struct StepInfo {
    double residual = 0.0;
    double mass_defect = 0.0;
    double clipped = 0.0;
  };

  // One SSP-RK2 step in place.
  StepInfo advance(std::vector<double>& g) {
    if (dt_ <= 0) prepare(g);
    const int n = grid_.size();
    const double dx = grid_.dx();
    double m_before = 0.0;
    for (double v : g) m_before += v;
    m_before *= dx;
    RateInfo r0 = rate(g, k0_);
    if (dt_ * r0.max_frequency > 1.0) throw StabilityViolation("dt * max collision frequency > 1");
    g1_.resize(n);
    for (int i = 0; i < n; ++i) g1_[i] = g[i] + dt_ * k0_[i];
    RateInfo r1 = rate(g1_, k1_);
    if (dt_ * r1.max_frequency > 1.0) throw StabilityViolation("dt * max collision frequency > 1");
    g2_.resize(n);
    double m_after = 0.0;
    for (int i = 0; i < n; ++i) {
      g2_[i] = 0.5 * g[i] + 0.5 * (g1_[i] + dt_ * k1_[i]);
      m_after += g2_[i];
    }
    m_after *= dx;
    StepInfo info;
    info.mass_defect = m_after - m_before;
    double neg = 0.0;
    for (double& v : g2_)
      if (v < 0) {
        neg -= v;
        v = 0.0;
      }
    info.clipped = neg * dx;
    if (info.clipped > cfg_.clip_budget) throw MassLoss("negative mass clipped beyond budget");
    double m_clip = 0.0;
    for (double v : g2_) m_clip += v;
    double scale = m_before / (m_clip * dx);
    double change = 0.0;
    for (int i = 0; i < n; ++i) {
      g2_[i] *= scale;
      change += std::abs(g2_[i] - g[i]);
    }
    info.residual = change * dx / dt_;
    if (cfg_.keep_even && even_) symmetrize(g2_);
    g.swap(g2_);
    return info;
  }

  // Dilation g -> mu g(mu x) restoring 2cM2 = D, realised by drift-only steps.
  double dilate(std::vector<double>& g) {
    if (cfg_.gamma == 0.0) return 1.0;
    RateInfo info = rate(g, k0_);
    double m2 = 0.0;
    for (int i = 0; i < grid_.size(); ++i) m2 += x2_[i] * g[i];
    m2 *= grid_.dx();
    if (!(m2 > 0) || !(info.dissipation > 0)) return 1.0;
    double log_mu = std::log(info.dissipation / (2.0 * cfg_.c * m2)) / cfg_.gamma;
    log_mu = std::clamp(log_mu, -0.2, 0.2);
    double tau = std::abs(log_mu);
    if (tau < 1e-15) return 1.0;
    double speed = log_mu > 0 ? -1.0 : 1.0;
    double h_max = cfg_.cfl * grid_.dx() / grid_.half_width();
    int steps = std::max(1, static_cast<int>(std::ceil(tau / h_max)));
    double h = tau / steps;
    const int n = grid_.size();
    double m0 = 0.0;
    for (double v : g) m0 += v;
    for (int s = 0; s < steps; ++s) {
      drift_rate(grid_, g, speed, cfg_.drift, k0_, slope_);
      g1_.resize(n);
      for (int i = 0; i < n; ++i) g1_[i] = g[i] + h * k0_[i];
      drift_rate(grid_, g1_, speed, cfg_.drift, k1_, slope_);
      for (int i = 0; i < n; ++i) g[i] = std::max(0.0, 0.5 * g[i] + 0.5 * (g1_[i] + h * k1_[i]));
    }
    double m1 = 0.0;
    for (double v : g) m1 += v;
    for (double& v : g) v *= m0 / m1;
    if (cfg_.keep_even && even_) symmetrize(g);
    return std::exp(log_mu);
  }

  static bool is_even(const std::vector<double>& g) {
    const std::size_t n = g.size();
    double peak = 0.0;
    for (double v : g) peak = std::max(peak, std::abs(v));
    for (std::size_t i = 0; i < n / 2; ++i)
      if (std::abs(g[i] - g[n - 1 - i]) > 1e-13 * peak) return false;
    return true;
  }

  // Momentum grows like exp(ct) in these variables, so roundoff asymmetry
  // is removed from even trajectories.
  static void symmetrize(std::vector<double>& g) {
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n / 2; ++i) {
      double m = 0.5 * (g[i] + g[n - 1 - i]);
      g[i] = m;
      g[n - 1 - i] = m;
    }
  }

 private:
  bool even_ = false;
  SolverConfig cfg_;
  Grid grid_;
  CollisionEngine engine_;
  CollisionEngine::Detail coll_;
  double dt_ = 0.0;
  std::vector<double> x2_, drift_, slope_, k0_, k1_, g1_, g2_;
};

inline Profile step(const Profile& g, const SolverConfig& cfg) {
  Stepper stepper(cfg);
  std::vector<double> v = g.values();
  stepper.prepare(v);
  stepper.advance(v);
  return Profile(g.grid(), std::move(v), cfg.gamma, cfg.c);
}

struct ResidualSample {
  double t = 0.0;
  double residual = 0.0;
  double m2 = 0.0;
};

struct SteadyResult {
  Profile profile;
  bool converged = false;
  double residual = 0.0;
  double m2 = 0.0;
  double lambda_hat = 0.0;
  long iterations = 0;
  double time = 0.0;
  double dt = 0.0;
  double mass = 0.0;
  double momentum = 0.0;
  std::optional<double> i_gamma_identity;
  double max_xG = 0.0;
  double energy_growth_rate = 0.0;
  double max_energy_drift = 0.0;
  std::vector<ResidualSample> history;
};

inline double fit_log_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  if (n < 2) return 0.0;
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double ly = std::log(y[i]);
    st += t[i];
    sy += ly;
    stt += t[i] * t[i];
    sty += t[i] * ly;
  }
  double den = n * stt - st * st;
  return den == 0 ? 0.0 : (n * sty - st * sy) / den;
}

inline SteadyResult finish_result(const SolverConfig& cfg, std::vector<double> g) {
  SteadyResult r;
  r.profile = Profile(cfg.grid(), std::move(g), cfg.gamma, cfg.c);
  r.m2 = moment(r.profile, 2.0);
  r.lambda_hat = 1.0 / std::sqrt(r.m2);
  r.mass = mass(r.profile);
  r.momentum = momentum(r.profile);
  r.max_xG = max_abs_x_times(r.profile);
  if (cfg.gamma > 0) r.i_gamma_identity = i_gamma_functional(r.profile, r.profile, cfg.gamma);
  return r;
}

inline SteadyResult relax_to_steady(const SolverConfig& cfg) {
  cfg.validate();
  Stepper stepper(cfg);
  std::vector<double> g = cfg.init.build(stepper.grid()).values();
  stepper.prepare(g);
  const double dt = stepper.dt();
  const double dx = stepper.grid().dx();
  auto second_moment = [&](const std::vector<double>& v) {
    double acc = 0.0;
    for (int i = 0; i < stepper.grid().size(); ++i) {
      double x = stepper.grid().x(i);
      acc += x * x * v[i];
    }
    return acc * dx;
  };
  const double m2_start = second_moment(g);
  std::vector<ResidualSample> history{{0.0, std::numeric_limits<double>::quiet_NaN(), m2_start}};
  double t = 0.0, next_record = cfg.record_interval, next_kick = cfg.rescale_interval;
  double residual = std::numeric_limits<double>::infinity();
  double drift = 0.0;
  long iterations = 0;
  bool converged = false;
  const bool accelerate = cfg.gamma > 0 && cfg.rescale_interval > 0;
  bool smoothing = cfg.smoothing_time > 0 && cfg.deposit != MidpointRule::linear;
  if (smoothing) stepper.set_deposit(MidpointRule::linear);
  while (t < cfg.max_time) {
    if (smoothing && t >= cfg.smoothing_time) {
      stepper.set_deposit(cfg.deposit);
      smoothing = false;
    }
    auto info = stepper.advance(g);
    t += dt;
    ++iterations;
    residual = info.residual;
    if (t >= next_record) {
      double m2 = second_moment(g);
      history.push_back({t, residual, m2});
      if (!accelerate) drift = std::max(drift, std::abs(m2 - m2_start) / m2_start);
      next_record += cfg.record_interval;
    }
    if (residual < cfg.steady_tol && !smoothing) {
      converged = true;
      break;
    }
    if (accelerate && t >= next_kick) {
      stepper.dilate(g);
      next_kick += cfg.rescale_interval;
    }
  }
  double m2_end = second_moment(g);
  history.push_back({t, residual, m2_end});
  SteadyResult r = finish_result(cfg, std::move(g));
  r.converged = converged;
  r.residual = residual;
  r.iterations = iterations;
  r.time = t;
  r.dt = dt;
  r.max_energy_drift = accelerate ? std::abs(m2_end - m2_start) / m2_start
                                  : std::max(drift, std::abs(m2_end - m2_start) / m2_start);
  r.history = std::move(history);
  std::vector<double> ts, ms;
  for (std::size_t i = r.history.size() / 2; i < r.history.size(); ++i) {
    ts.push_back(r.history[i].t);
    ms.push_back(r.history[i].m2);
  }
  r.energy_growth_rate = fit_log_slope(ts, ms);
  return r;
}

struct SweepEntry {
  double gamma = 0.0;
  SteadyResult result;
  double distance_to_g0 = 0.0;
  double i0 = 0.0;
  std::optional<double> i_gamma;
};

struct SweepReport {
  std::vector<SweepEntry> entries;
  double weight_order = 2.5;
};

inline SweepReport gamma_sweep(const std::vector<double>& gammas, const SolverConfig& base,
                               double weight_order = 2.5) {
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    if (!(gammas[i] > 0) || !(gammas[i] < 1)) throw std::invalid_argument("sweep gammas must be in (0,1)");
    if (i > 0 && !(gammas[i] < gammas[i - 1])) throw std::invalid_argument("sweep gammas must be descending");
  }
  SweepReport report;
  report.weight_order = weight_order;
  SolverConfig cfg = base;
  Profile g0 = maxwell_profile(base.grid(), lambda_limit);
  for (double gamma : gammas) {
    cfg.gamma = gamma;
    SweepEntry e;
    e.gamma = gamma;
    e.result = relax_to_steady(cfg);
    e.distance_to_g0 = weighted_distance(e.result.profile, g0, weight_order);
    e.i0 = i0_functional(e.result.profile, e.result.profile);
    e.i_gamma = e.result.i_gamma_identity;
    cfg.init = InitialCondition::from(e.result.profile);
    report.entries.push_back(std::move(e));
  }
  return report;
}

struct UniquenessReport {
  double gamma = 0.0;
  double distance = 0.0;
  double threshold = 0.0;
  bool success = false;
  SteadyResult a, b;
};

// gamma = 0 is accepted as the one-parameter-family control; convergence is
// then not required.
inline UniquenessReport uniqueness_test(double gamma, const InitialCondition& init_a,
                                        const InitialCondition& init_b, SolverConfig cfg,
                                        double weight_order = 2.5) {
  if (!(gamma >= 0) || gamma > 0.2) throw std::invalid_argument("uniqueness test needs gamma in [0, 0.2]");
  cfg.gamma = gamma;
  UniquenessReport r;
  r.gamma = gamma;
  cfg.init = init_a;
  r.a = relax_to_steady(cfg);
  cfg.init = init_b;
  r.b = relax_to_steady(cfg);
  if (gamma > 0 && (!r.a.converged || !r.b.converged))
    throw NotConverged("uniqueness run did not reach the steady tolerance");
  r.distance = weighted_distance(r.a.profile, r.b.profile, weight_order);
  r.threshold = 100.0 * cfg.steady_tol;
  r.success = r.distance <= r.threshold;
  return r;
}

inline json steady_json(const SteadyResult& r) {
  json j{{"converged", r.converged},
         {"residual", r.residual},
         {"M2", r.m2},
         {"lambda_hat", r.lambda_hat},
         {"iterations", r.iterations},
         {"time", r.time},
         {"dt", r.dt},
         {"mass", r.mass},
         {"momentum", r.momentum},
         {"max_xG", r.max_xG},
         {"energy_growth_rate", r.energy_growth_rate},
         {"max_energy_drift", r.max_energy_drift},
         {"profile", profile_json(r.profile)}};
  j["i_gamma_identity"] = r.i_gamma_identity ? json(*r.i_gamma_identity) : json(nullptr);
  return j;
}

inline void write_residual_csv(std::ostream& os, const SteadyResult& r) {
  os << "t,residual,M2\n" << std::setprecision(17);
  for (const auto& s : r.history) {
    os << s.t << ',';
    if (std::isfinite(s.residual)) os << s.residual;
    os << ',' << s.m2 << '\n';
  }
}

} // namespace stickyss

#endif
