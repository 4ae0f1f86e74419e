#ifndef STICKYSS_ACCEPTANCE_HPP
#define STICKYSS_ACCEPTANCE_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "audit.hpp"
#include "collision.hpp"
#include "config.hpp"
#include "core.hpp"
#include "linearized.hpp"
#include "maxwell_fourier.hpp"
#include "selfsim.hpp"

namespace stickyss {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string measured;
  std::string target;
  double seconds = 0.0;
  json detail = json::object();
};

struct AcceptanceOptions {
  std::uint64_t seed = 20240611;
  double c = 0.25;

  double pair_L = 12.0;
  int pair_N = 512;
  int pair_trials = 50;
  int dissipation_trials = 10;
  int fast_trials = 20;

  double maxwell_L = 80.0;
  int maxwell_N = 1024;
  double maxwell_T = 60.0;
  double growth_c = 0.5;
  double growth_T = 10.0;

  double xi_min = 1e-8, xi_max = 64.0;
  int xi_per_octave = 32;
  double fourier_k = 2.5, fourier_T = 60.0;

  double sweep_L = 20.0;
  int sweep_N = 1024;
  double sweep_max_time = 2000.0;
  double steady_tol = 1e-8;
  std::vector<double> sweep_gammas{0.2, 0.1, 0.05};
  double sweep_energy = 1.0 / (lambda_limit * lambda_limit);

  double unique_gamma = 0.1;
  double unique_smoothing = 5.0;
  double control_T = 60.0;

  double linear_L = 14.0;
  std::vector<int> linear_N{256, 512, 1024};
  double linear_a = 2.5;
  int gap_probes = 512;

  int operator_trials = 50;
  long pointwise_samples = 1000000;

  double i0_L = 1000.0;
  int i0_N = 32768;
  double igamma_L = 100.0;
  int igamma_N = 4096;

  static AcceptanceOptions from_config(const Config& c, const std::string& s = "acceptance") {
    AcceptanceOptions o;
    if (!c.has_section(s)) throw ConfigError("config has no [" + s + "] section");
    auto n = [&](const char* key, int fallback) { return static_cast<int>(c.integer(s, key, fallback)); };
    o.seed = static_cast<std::uint64_t>(c.integer(s, "seed", static_cast<long>(o.seed)));
    o.c = c.real(s, "c");
    o.pair_L = c.real(s, "pair_L", o.pair_L);
    o.pair_N = n("pair_N", o.pair_N);
    o.pair_trials = n("pair_trials", o.pair_trials);
    o.dissipation_trials = n("dissipation_trials", o.dissipation_trials);
    o.fast_trials = n("fast_trials", o.fast_trials);
    o.maxwell_L = c.real(s, "maxwell_L", o.maxwell_L);
    o.maxwell_N = n("maxwell_N", o.maxwell_N);
    o.maxwell_T = c.real(s, "maxwell_T", o.maxwell_T);
    o.growth_c = c.real(s, "growth_c", o.growth_c);
    o.growth_T = c.real(s, "growth_T", o.growth_T);
    o.xi_min = c.real(s, "xi_min", o.xi_min);
    o.xi_max = c.real(s, "xi_max", o.xi_max);
    o.xi_per_octave = n("xi_per_octave", o.xi_per_octave);
    o.fourier_k = c.real(s, "fourier_k", o.fourier_k);
    o.fourier_T = c.real(s, "fourier_T", o.fourier_T);
    o.sweep_L = c.real(s, "sweep_L", o.sweep_L);
    o.sweep_N = n("sweep_N", o.sweep_N);
    o.sweep_max_time = c.real(s, "sweep_max_time", o.sweep_max_time);
    o.steady_tol = c.real(s, "steady_tol", o.steady_tol);
    if (c.has(s, "sweep_gammas")) o.sweep_gammas = c.reals(s, "sweep_gammas");
    o.sweep_energy = c.real(s, "sweep_energy", o.sweep_energy);
    o.unique_gamma = c.real(s, "unique_gamma", o.unique_gamma);
    o.unique_smoothing = c.real(s, "unique_smoothing", o.unique_smoothing);
    o.control_T = c.real(s, "control_T", o.control_T);
    o.linear_L = c.real(s, "linear_L", o.linear_L);
    if (c.has(s, "linear_N")) {
      o.linear_N.clear();
      for (double v : c.reals(s, "linear_N")) o.linear_N.push_back(static_cast<int>(v));
    }
    o.linear_a = c.real(s, "linear_a", o.linear_a);
    o.gap_probes = n("gap_probes", o.gap_probes);
    o.operator_trials = n("operator_trials", o.operator_trials);
    o.pointwise_samples = c.integer(s, "pointwise_samples", o.pointwise_samples);
    o.i0_L = c.real(s, "i0_L", o.i0_L);
    o.i0_N = n("i0_N", o.i0_N);
    o.igamma_L = c.real(s, "igamma_L", o.igamma_L);
    o.igamma_N = n("igamma_N", o.igamma_N);
    if (o.linear_N.size() < 2) throw ConfigError("[acceptance] linear_N needs at least two sizes");
    return o;
  }
};

namespace detail {

inline std::string sci(double v, int digits = 3) {
  std::ostringstream os;
  os << std::setprecision(digits) << std::scientific << v;
  return os.str();
}

inline std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << std::fixed << v;
  return os.str();
}

inline SolverConfig base_solver(const AcceptanceOptions& o, double gamma, double L, int N, double T) {
  SolverConfig cfg;
  cfg.gamma = gamma;
  cfg.c = o.c;
  cfg.half_width = L;
  cfg.cell_count = N;
  cfg.max_time = T;
  cfg.steady_tol = o.steady_tol;
  return cfg;
}

}  // namespace detail

// Shared by several criteria; computed once per battery.
struct SweepPair {
  SweepReport fine, coarse;
};

class AcceptanceBattery {
 public:
  explicit AcceptanceBattery(AcceptanceOptions o) : o_(std::move(o)) {}

  const AcceptanceOptions& options() const { return o_; }

  std::vector<CriterionResult> run(const std::function<void(const CriterionResult&)>& on_result = {}) {
    std::vector<std::pair<int, std::function<CriterionResult()>>> all{
        {1, [&] { return conservation(); }},        {2, [&] { return dissipation(); }},
        {3, [&] { return maxwell_steady(); }},      {4, [&] { return energy_growth(); }},
        {5, [&] { return fourier_contraction(); }}, {6, [&] { return limit_temperature(); }},
        {7, [&] { return stability_trend(); }},     {8, [&] { return uniqueness(); }},
        {9, [&] { return steady_identities(); }},   {10, [&] { return linearized(); }},
        {11, [&] { return operator_bounds(); }},    {12, [&] { return pointwise(); }},
        {13, [&] { return fast_path(); }},          {14, [&] { return functionals(); }}};
    std::vector<CriterionResult> out;
    for (auto& [id, fn] : all) {
      auto t0 = std::chrono::steady_clock::now();
      CriterionResult r;
      try {
        r = fn();
      } catch (const std::exception& e) {
        r.pass = false;
        r.measured = std::string("error: ") + e.what();
      }
      r.id = id;
      if (r.name.empty()) r.name = names()[id - 1];
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (on_result) on_result(r);
      out.push_back(std::move(r));
    }
    return out;
  }

  static const std::vector<std::string>& names() {
    static const std::vector<std::string> n{"conservation",         "dissipation identity",
                                            "Maxwell steady state", "energy growth control",
                                            "Fourier contraction",  "limit temperature",
                                            "stability trend",      "uniqueness",
                                            "steady identities",    "linearized operator",
                                            "operator bounds",      "pointwise inequalities",
                                            "fast Maxwell gain",    "functional targets"};
    return n;
  }

  CriterionResult conservation() {
    CriterionResult r;
    r.name = names()[0];
    Grid grid(o_.pair_L, o_.pair_N);
    std::mt19937_64 rng(o_.seed);
    std::uniform_real_distribution<double> gdist(0.0, 1.0);
    double worst = 0.0, worst_weak = 0.0;
    for (int t = 0; t < o_.pair_trials; ++t) {
      Profile f = detail::MixtureSpec::random(rng).sample(grid);
      Profile g = detail::MixtureSpec::random(rng).sample(grid);
      double gamma = t == 0 ? 0.0 : gdist(rng);
      CollisionRate q = q_apply(f, g, gamma);
      double m = 0.0, p = 0.0, scale = 0.0;
      for (int i = 0; i < grid.size(); ++i) {
        m += q.rate[i];
        p += q.rate[i] * grid.x(i);
        scale += std::abs(q.rate[i]) * (1.0 + std::abs(grid.x(i)));
      }
      worst = std::max(worst, std::max(std::abs(m), std::abs(p)) / scale);
      double w1 = q_weak(f, g, [](double) { return 1.0; }, gamma);
      double wx = q_weak(f, g, [](double x) { return x; }, gamma);
      worst_weak = std::max({worst_weak, std::abs(w1), std::abs(wx)});
    }
    r.pass = worst <= 1e-12 && worst_weak == 0.0;
    r.measured = "rel " + detail::sci(worst) + ", weak " + detail::sci(worst_weak);
    r.target = "<= 1e-12, weak = 0";
    r.detail = {{"relative_mass_momentum", worst}, {"q_weak_1_x", worst_weak}, {"trials", o_.pair_trials}};
    return r;
  }

  CriterionResult dissipation() {
    CriterionResult r;
    r.name = names()[1];
    std::mt19937_64 rng(o_.seed + 2);
    std::uniform_real_distribution<double> gdist(0.0, 1.0);
    Grid fine(o_.pair_L, o_.pair_N), coarse(o_.pair_L, o_.pair_N / 2);
    double worst_weak = 0.0, worst_ratio = 0.0;
    auto energy_error = [](const Profile& f, double gamma) {
      CollisionRate q = q_apply(f, f, gamma);
      const Grid& g = f.grid();
      double e = 0.0;
      for (int i = 0; i < g.size(); ++i) e += g.x(i) * g.x(i) * q.rate[i];
      return std::abs(e * g.dx() - dissipation_pair_sum(f, f, gamma));
    };
    for (int t = 0; t < o_.dissipation_trials; ++t) {
      auto spec = detail::MixtureSpec::random(rng);
      double gamma = gdist(rng);
      Profile f = spec.sample(fine);
      double d = dissipation_pair_sum(f, f, gamma);
      double w = q_weak(f, f, [](double x) { return x * x; }, gamma);
      worst_weak = std::max(worst_weak, std::abs(w - d) / std::abs(d));
      double ec = energy_error(spec.sample(coarse), gamma), ef = energy_error(f, gamma);
      double constant = ec / (coarse.dx() * coarse.dx());
      double allowed = 3.0 * constant * fine.dx() * fine.dx();
      worst_ratio = std::max(worst_ratio, ef / allowed);
    }
    r.pass = worst_weak <= 1e-12 && worst_ratio <= 1.0;
    r.measured = "weak rel " + detail::sci(worst_weak) + ", energy err / (3 C dx^2) " + detail::fixed(worst_ratio);
    r.target = "<= 1e-12, <= 1";
    r.detail = {{"weak_relative", worst_weak}, {"energy_error_ratio", worst_ratio}};
    return r;
  }

  CriterionResult maxwell_steady() {
    CriterionResult r;
    r.name = names()[2];
    SolverConfig cfg = detail::base_solver(o_, 0.0, o_.maxwell_L, o_.maxwell_N, o_.maxwell_T);
    cfg.init = InitialCondition::gaussian(1.0);
    SteadyResult fine = relax_to_steady(cfg);
    cfg.cell_count = o_.maxwell_N / 2;
    SteadyResult coarse = relax_to_steady(cfg);
    double ef = l1_distance(fine.profile, maxwell_profile(fine.profile.grid(), 1.0));
    double ec = l1_distance(coarse.profile, maxwell_profile(coarse.profile.grid(), 1.0));
    r.pass = ef <= 0.02 && ef <= 0.6 * ec && fine.max_energy_drift <= 0.01;
    r.measured = "L1 " + detail::fixed(ef) + " (N/2: " + detail::fixed(ec) + "), M2 drift " +
                 detail::sci(fine.max_energy_drift);
    r.target = "<= 0.02, halving under refinement, drift <= 1%";
    r.detail = {{"l1_error", ef}, {"l1_error_coarse", ec}, {"energy_drift", fine.max_energy_drift}};
    return r;
  }

  CriterionResult energy_growth() {
    CriterionResult r;
    r.name = names()[3];
    SolverConfig cfg = detail::base_solver(o_, 0.0, o_.maxwell_L, o_.maxwell_N, o_.growth_T);
    cfg.c = o_.growth_c;
    cfg.init = InitialCondition::gaussian(1.0);
    SteadyResult s = relax_to_steady(cfg);
    double expected = 2.0 * o_.growth_c - 0.5;
    r.pass = !s.converged && std::abs(s.energy_growth_rate - expected) <= 0.1 * expected;
    r.measured = std::string(s.converged ? "converged" : "NotConverged") + ", rate " +
                 detail::fixed(s.energy_growth_rate);
    r.target = "NotConverged, rate " + detail::fixed(expected, 2) + " +- 10%";
    r.detail = {{"converged", s.converged}, {"growth_rate", s.energy_growth_rate}, {"expected", expected}};
    return r;
  }

  CriterionResult fourier_contraction() {
    CriterionResult r;
    r.name = names()[4];
    FourierGrid grid = FourierGrid::spanning(o_.xi_min, o_.xi_max, o_.xi_per_octave);
    ContractionReport c = contraction_measurement(gaussian_field(grid, 1.0), 1.0, o_.fourier_k, o_.fourier_T);
    r.pass = !c.at_equilibrium && c.worst_pair_ratio <= 1.0 + 1e-3 && c.fitted_rate >= 0.9 * c.sigma_k &&
             std::abs(c.sigma_k - 0.0214466) < 5e-8;
    r.measured = "rate " + detail::fixed(c.fitted_rate) + ", worst pair " + detail::fixed(c.worst_pair_ratio);
    r.target = ">= " + detail::fixed(0.9 * c.sigma_k) + ", <= 1.001";
    r.detail = contraction_json(c);
    return r;
  }

  CriterionResult limit_temperature() {
    CriterionResult r;
    r.name = names()[5];
    const SweepPair& s = sweep();
    const auto& e = s.fine.entries;
    bool monotone = true;
    json lam = json::array();
    for (std::size_t i = 0; i < e.size(); ++i) {
      lam.push_back({{"gamma", e[i].gamma}, {"lambda_hat", e[i].result.lambda_hat},
                     {"lambda_hat_coarse", s.coarse.entries[i].result.lambda_hat}});
      if (i > 0) {
        double prev = std::abs(e[i - 1].result.lambda_hat - lambda_limit);
        double here = std::abs(e[i].result.lambda_hat - lambda_limit);
        monotone = monotone && here < prev && e[i].result.lambda_hat > e[i - 1].result.lambda_hat;
      }
    }
    double err = std::abs(e.back().result.lambda_hat - lambda_limit);
    double err_coarse = std::abs(s.coarse.entries.back().result.lambda_hat - lambda_limit);
    r.pass = monotone && err <= 0.17 && err < err_coarse;
    r.measured = "lambda " + detail::fixed(e.back().result.lambda_hat) + ", |err| " + detail::fixed(err) +
                 " (N/2: " + detail::fixed(err_coarse) + "), monotone " + (monotone ? "yes" : "no");
    r.target = "|err| <= 0.17, shrinking, monotone";
    r.detail = {{"lambda_limit", lambda_limit}, {"sweep", lam}, {"monotone", monotone}};
    return r;
  }

  CriterionResult stability_trend() {
    CriterionResult r;
    r.name = names()[6];
    const auto& e = sweep().fine.entries;
    bool decreasing = true;
    std::string m;
    json d = json::array();
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (i > 0) decreasing = decreasing && e[i].distance_to_g0 < e[i - 1].distance_to_g0;
      m += (i ? " > " : "") + detail::fixed(e[i].distance_to_g0);
      d.push_back({{"gamma", e[i].gamma}, {"distance", e[i].distance_to_g0}});
    }
    r.pass = decreasing;
    r.measured = m;
    r.target = "strictly decreasing";
    r.detail = {{"distances", d}};
    return r;
  }

  CriterionResult uniqueness() {
    CriterionResult r;
    r.name = names()[7];
    SolverConfig cfg = detail::base_solver(o_, o_.unique_gamma, o_.sweep_L, o_.sweep_N, o_.sweep_max_time);
    cfg.smoothing_time = o_.unique_smoothing;
    UniquenessReport u =
        uniqueness_test(o_.unique_gamma, InitialCondition::gaussian(1.0), InitialCondition::uniform(0.25), cfg);
    SolverConfig ctl = cfg;
    ctl.max_time = o_.control_T;
    ctl.smoothing_time = 0.0;
    UniquenessReport c =
        uniqueness_test(0.0, InitialCondition::gaussian(1.0), InitialCondition::gaussian(0.5), ctl);
    r.pass = u.distance <= 1e-3 && c.distance >= 0.1;
    r.measured = "d " + detail::sci(u.distance) + ", control d " + detail::fixed(c.distance);
    r.target = "<= 1e-3, control >= 0.1";
    r.detail = {{"distance", u.distance},
                {"control_distance", c.distance},
                {"lambda_hat", {u.a.lambda_hat, u.b.lambda_hat}},
                {"times", {u.a.time, u.b.time}}};
    return r;
  }

  CriterionResult steady_identities() {
    CriterionResult r;
    r.name = names()[8];
    const SweepPair& s = sweep();
    bool ok = true;
    json per = json::array();
    double worst_ident = 0.0;
    for (std::size_t i = 0; i < s.fine.entries.size(); ++i) {
      const SteadyResult& G = s.fine.entries[i].result;
      AuditReport a = audit_steady_profile(G, &s.coarse.entries[i].result);
      double mg = moment(G.profile, G.profile.gamma());
      bool here = a.passed() && G.m2 > 0 && G.m2 <= 0.5 && mg >= 1.0 / (8.0 * std::exp2(G.profile.gamma()));
      ok = ok && here;
      worst_ident = std::max(worst_ident, std::abs(*G.i_gamma_identity) / (10.0 * G.residual));
      per.push_back({{"gamma", G.profile.gamma()}, {"pass", here}, {"M2", G.m2}, {"M_gamma", mg},
                     {"audit", audit_json(a)}});
    }
    r.pass = ok;
    r.measured = "|I_gamma| / (10 residual) <= " + detail::fixed(worst_ident) + ", all audits " +
                 (ok ? "pass" : "fail");
    r.target = "<= 1, M2 in (0,1/2], M_gamma floor, sup|x|G stable";
    r.detail = {{"profiles", per}};
    return r;
  }

  CriterionResult linearized() {
    CriterionResult r;
    r.name = names()[9];
    std::vector<double> res;
    std::vector<GapReport> gaps;
    for (std::size_t i = 0; i < o_.linear_N.size(); ++i) {
      Grid grid(o_.linear_L, o_.linear_N[i]);
      LinearOperatorMatrix L = assemble_l0(grid, lambda_limit);
      res.push_back(kernel_residual(L, lambda_limit, o_.linear_a));
      if (i + 2 >= o_.linear_N.size()) gaps.push_back(spectral_gap_estimate(L, o_.linear_a, o_.seed, o_.gap_probes));
    }
    bool monotone = true;
    for (std::size_t i = 1; i < res.size(); ++i) monotone = monotone && res[i] < res[i - 1];
    const GapReport &gc = gaps[0], &gf = gaps[1];
    bool positive = gc.gap_l2_proxy > 0 && gf.gap_l2_proxy > 0 && gc.gap_l1_probe > 0 && gf.gap_l1_probe > 0;
    double s2 = std::abs(gc.gap_l2_proxy / gf.gap_l2_proxy - 1.0);
    double s1 = std::abs(gc.gap_l1_probe / gf.gap_l1_probe - 1.0);
    r.pass = res.back() <= 1e-2 && monotone && positive && s2 <= 0.15 && s1 <= 0.15;
    r.measured = "residual " + detail::fixed(res.back()) + ", monotone " + (monotone ? "yes" : "no") + ", gaps " +
                 detail::fixed(gf.gap_l2_proxy) + " / " + detail::fixed(gf.gap_l1_probe) + " (shift " +
                 detail::fixed(100 * s2, 1) + "% / " + detail::fixed(100 * s1, 1) + "%)";
    r.target = "<= 0.01, decreasing, gaps > 0 within 15%";
    r.detail = {{"kernel_residuals", res}, {"N", o_.linear_N}, {"gap_coarse", gap_json(gc)}, {"gap_fine", gap_json(gf)}};
    return r;
  }

  CriterionResult operator_bounds() {
    CriterionResult r;
    r.name = names()[10];
    AuditReport a = audit_operator_bounds(o_.operator_trials, o_.seed);
    long v = 0;
    for (const auto& c : a.checks) v += c.violations;
    r.pass = a.passed();
    r.measured = std::to_string(v) + " violations in " + std::to_string(a.checks.size()) + " checks";
    r.target = "0 violations over " + std::to_string(o_.operator_trials) + " trials";
    r.detail = audit_json(a);
    return r;
  }

  CriterionResult pointwise() {
    CriterionResult r;
    r.name = names()[11];
    AlphaDeltaWitness w;
    AuditReport a = audit_pointwise_inequalities(o_.pointwise_samples, o_.seed, &w);
    long v = 0;
    for (const auto& c : a.checks) v += c.violations;
    r.pass = a.passed() && w.alpha > 0 && w.delta > 0;
    r.measured = std::to_string(v) + " violations, alpha " + detail::sci(w.alpha) + ", delta " + detail::sci(w.delta);
    r.target = "0 violations over " + std::to_string(o_.pointwise_samples) + " samples each";
    r.detail = {{"checks", audit_json(a)}, {"alpha", w.alpha}, {"delta", w.delta}, {"Lambda", w.lambda}};
    return r;
  }

  CriterionResult fast_path() {
    CriterionResult r;
    r.name = names()[12];
    Grid grid(o_.pair_L, o_.pair_N);
    std::mt19937_64 rng(o_.seed + 13);
    double worst = 0.0;
    for (int t = 0; t < o_.fast_trials; ++t) {
      Profile f = detail::MixtureSpec::random(rng).sample(grid);
      Profile fast = q_gain_fast_maxwell(f);
      std::vector<double> direct = q_gain_direct(f, f, 0.0);
      double num = 0.0, den = 0.0;
      for (int i = 0; i < grid.size(); ++i) {
        num = std::max(num, std::abs(fast[i] - direct[i]));
        den = std::max(den, std::abs(direct[i]));
      }
      worst = std::max(worst, num / den);
    }
    r.pass = worst <= 1e-10;
    r.measured = "rel " + detail::sci(worst);
    r.target = "<= 1e-10";
    r.detail = {{"relative_max_difference", worst}, {"trials", o_.fast_trials}};
    return r;
  }

  // The truncated tail of I_0(H,H) is (8/pi)(log L + 1)/L to leading order.
  CriterionResult functionals() {
    CriterionResult r;
    r.name = names()[13];
    const double exact = 2.0 * std::log(2.0) + 1.0;
    Grid fine(o_.i0_L, o_.i0_N), coarse(o_.i0_L, o_.i0_N / 2);
    double vf = i0_functional(maxwell_profile(fine, 1.0), maxwell_profile(fine, 1.0));
    double vc = i0_functional(maxwell_profile(coarse, 1.0), maxwell_profile(coarse, 1.0));
    double tail = (8.0 / pi) * (std::log(o_.i0_L) + 1.0) / o_.i0_L;
    double quad = 3.0 * std::abs(vf - vc);
    double budget = tail + quad;
    double err = std::abs(vf - exact);

    Grid g(o_.igamma_L, o_.igamma_N);
    Profile H = maxwell_profile(g, 1.0);
    double i0 = i0_functional(H, H);
    std::vector<double> gammas{0.1, 0.01, 0.001}, diffs;
    double st = 0, sy = 0, stt = 0, sty = 0, cmax = 0.0;
    for (double gm : gammas) {
      double d = std::abs(i_gamma_functional(H, H, gm) - i0);
      diffs.push_back(d);
      cmax = std::max(cmax, d / gm);
      double lx = std::log(gm), ly = std::log(d);
      st += lx;
      sy += ly;
      stt += lx * lx;
      sty += lx * ly;
    }
    const double n = static_cast<double>(gammas.size());
    double slope = (n * sty - st * sy) / (n * stt - st * st);
    r.pass = err <= budget && std::abs(slope - 1.0) <= 0.1;
    r.measured = "I0 " + detail::fixed(vf, 6) + " err " + detail::sci(err) + " (budget " + detail::sci(budget) +
                 "), slope " + detail::fixed(slope, 3) + ", C " + detail::fixed(cmax, 3);
    r.target = "I0 = " + detail::fixed(exact, 7) + " within budget, slope 1 +- 0.1";
    r.detail = {{"i0", vf},          {"i0_coarse", vc},       {"exact", exact},
                {"truncation", tail}, {"quadrature", quad},    {"error", err},
                {"corrected_error", std::abs(vf + tail - exact)},
                {"gammas", gammas},   {"i_gamma_minus_i0", diffs}, {"slope", slope}, {"C", cmax}};
    return r;
  }

 private:
  const SweepPair& sweep() {
    if (!sweep_) {
      SolverConfig cfg = detail::base_solver(o_, o_.sweep_gammas.front(), o_.sweep_L, o_.sweep_N, o_.sweep_max_time);
      cfg.init = InitialCondition::gaussian(o_.sweep_energy);
      SweepPair p;
      p.fine = gamma_sweep(o_.sweep_gammas, cfg);
      cfg.cell_count = o_.sweep_N / 2;
      p.coarse = gamma_sweep(o_.sweep_gammas, cfg);
      for (const auto* rep : {&p.fine, &p.coarse})
        for (const auto& e : rep->entries)
          if (!e.result.converged) throw NotConverged("sweep entry did not reach the steady tolerance");
      sweep_ = std::move(p);
    }
    return *sweep_;
  }

  AcceptanceOptions o_;
  std::optional<SweepPair> sweep_;
};

inline json acceptance_json(const std::vector<CriterionResult>& rs) {
  json out = json::array();
  for (const auto& r : rs)
    out.push_back({{"id", r.id},
                   {"name", r.name},
                   {"pass", r.pass},
                   {"measured", r.measured},
                   {"target", r.target},
                   {"detail", r.detail}});
  return out;
}

inline void print_criterion(std::ostream& os, const CriterionResult& r) {
  os << (r.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << r.id << "  " << std::left << std::setw(24) << r.name
     << std::right << "  measured: " << r.measured << "  target: " << r.target << "  ("
     << detail::fixed(r.seconds, 1) << " s)" << std::endl;
}

}  // namespace stickyss

#endif
