#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include <stickyss/acceptance.hpp>
#include <stickyss/audit.hpp>
#include <stickyss/config.hpp>
#include <stickyss/linearized.hpp>
#include <stickyss/maxwell_fourier.hpp>
#include <stickyss/selfsim.hpp>

namespace fs = std::filesystem;
using namespace stickyss;

namespace {

constexpr const char* version = "0.1.0";

enum Exit { ok = 0, check_failed = 1, config_error = 2, not_converged = 3 };

struct Run {
  std::string subcommand;
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string format = "both";
  Config config;
  std::vector<std::string> files;

  bool csv() const { return format != "json"; }
  bool want_json() const { return format != "csv"; }

  std::uint64_t seed_or(const std::string& section, std::uint64_t fallback) const {
    if (seed) return *seed;
    return static_cast<std::uint64_t>(config.integer(section, "seed", static_cast<long>(fallback)));
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream os(fs::path(out_dir) / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + name);
    os << content;
    files.push_back(name);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
};

template <class F>
std::string to_text(F&& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

int run_steady(Run& run) {
  SolverConfig cfg = solver_config(run.config, "solver");
  SteadyResult fine = relax_to_steady(cfg);
  std::optional<SteadyResult> coarse;
  if (run.config.has_section("coarse")) {
    SolverConfig c2 = cfg;
    c2.cell_count = static_cast<int>(run.config.integer("coarse", "N"));
    c2.validate();
    coarse = relax_to_steady(c2);
  }
  AuditReport audit = audit_steady_profile(fine, coarse ? &*coarse : nullptr);
  if (run.csv()) {
    run.write("profile.csv", to_text([&](std::ostream& os) { write_profile_csv(os, fine.profile); }));
    run.write("residual.csv", to_text([&](std::ostream& os) { write_residual_csv(os, fine); }));
  }
  json report = steady_json(fine);
  if (!run.want_json()) report.erase("profile");
  report["audit"] = audit_json(audit);
  report["init"] = cfg.init.describe();
  run.write_json("steady.json", report);
  std::cout << "converged " << (fine.converged ? "yes" : "no") << ", residual " << fine.residual << ", lambda_hat "
            << fine.lambda_hat << ", audit " << (audit.passed() ? "pass" : "fail") << std::endl;
  if (!fine.converged) {
    std::cout << "energy growth rate " << fine.energy_growth_rate << std::endl;
    return not_converged;
  }
  return audit.passed() ? ok : check_failed;
}

int run_sweep(Run& run) {
  SolverConfig cfg = solver_config(run.config, "sweep");
  std::vector<double> gammas = run.config.reals("sweep", "gammas");
  double weight = run.config.real("sweep", "weight", 2.5);
  SweepReport rep;
  try {
    rep = gamma_sweep(gammas, cfg, weight);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[sweep] ") + e.what());
  }
  json entries = json::array();
  std::ostringstream csv;
  csv << "gamma,lambda_hat,M2,distance_to_G0,I0,I_gamma,residual,converged\n" << std::setprecision(17);
  bool all = true;
  for (const auto& e : rep.entries) {
    all = all && e.result.converged;
    json j = steady_json(e.result);
    if (!run.want_json()) j.erase("profile");
    j["gamma"] = e.gamma;
    j["distance_to_G0"] = e.distance_to_g0;
    j["I0"] = e.i0;
    entries.push_back(j);
    csv << e.gamma << ',' << e.result.lambda_hat << ',' << e.result.m2 << ',' << e.distance_to_g0 << ',' << e.i0
        << ',' << (e.i_gamma ? *e.i_gamma : 0.0) << ',' << e.result.residual << ',' << e.result.converged << '\n';
    if (run.csv())
      run.write("profile_gamma_" + format_real(e.gamma) + ".csv",
                to_text([&](std::ostream& os) { write_profile_csv(os, e.result.profile); }));
  }
  if (run.csv()) run.write("sweep.csv", csv.str());
  run.write_json("sweep.json", {{"weight_order", weight}, {"lambda_limit", lambda_limit}, {"entries", entries}});
  for (const auto& e : rep.entries)
    std::cout << "gamma " << e.gamma << "  lambda_hat " << e.result.lambda_hat << "  distance " << e.distance_to_g0
              << std::endl;
  return all ? ok : not_converged;
}

int run_maxwell(Run& run) {
  const Config& c = run.config;
  const std::string s = "maxwell";
  if (!c.has_section(s)) throw ConfigError("config has no [maxwell] section");
  FourierGrid grid;
  try {
    grid = FourierGrid::spanning(c.real(s, "xi_min"), c.real(s, "xi_max"), static_cast<int>(c.integer(s, "per_octave")));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[maxwell] ") + e.what());
  }
  double k = c.real(s, "k"), lambda = c.real(s, "lambda"), T = c.real(s, "T");
  if (!(k > 2) || !(k < 3)) throw ConfigError("[maxwell] k must lie in (2,3)");
  if (!(lambda > 0) || !(T > 0)) throw ConfigError("[maxwell] lambda and T must be positive");
  if (c.text(s, "init") != "gaussian") throw ConfigError("[maxwell] init must be gaussian");
  FourierField start = gaussian_field(grid, c.real(s, "energy"));
  ContractionReport r = contraction_measurement(start, lambda, k, T, c.real(s, "record_interval", 0.5));
  if (run.csv()) run.write("decay.csv", to_text([&](std::ostream& os) { write_decay_csv(os, r); }));
  json j = contraction_json(r);
  if (run.want_json()) j["series"] = {{"t", r.t}, {"distance", r.distance}};
  bool pass = !r.at_equilibrium && r.fitted_rate >= 0.9 * r.sigma_k && r.worst_pair_ratio <= 1.0 + 1e-3;
  j["pass"] = pass;
  run.write_json("report.json", j);
  std::cout << "sigma_k " << r.sigma_k << ", fitted rate " << r.fitted_rate << ", worst pair ratio "
            << r.worst_pair_ratio << std::endl;
  return pass ? ok : check_failed;
}

int run_linearize(Run& run) {
  const Config& c = run.config;
  const std::string s = "linearize";
  if (!c.has_section(s)) throw ConfigError("config has no [linearize] section");
  if (c.real(s, "c") != 0.25) throw ConfigError("[linearize] the linearized operator is defined at c = 0.25");
  double lambda = c.real(s, "lambda"), a = c.real(s, "a");
  if (!(a > 2) || !(a < 3)) throw ConfigError("[linearize] a must lie in (2,3)");
  Grid grid = [&] {
    try {
      return Grid(c.real(s, "L"), static_cast<int>(c.integer(s, "N")));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("[linearize] ") + e.what());
    }
  }();
  LinearOperatorMatrix L = assemble_l0(grid, lambda);
  GapReport g = spectral_gap_estimate(L, a, run.seed_or(s, 1), static_cast<int>(c.integer(s, "probes", 512)));
  bool pass = g.kernel_residual <= 1e-2 && g.gap_l2_proxy > 0 && g.gap_l1_probe > 0;
  json j = gap_json(g);
  j["lambda"] = lambda;
  j["pass"] = pass;
  run.write_json("linearize.json", j);
  if (run.csv())
    run.write("phi0_residual.csv", to_text([&](std::ostream& os) {
                Profile phi = phi0_profile(grid, lambda);
                Eigen::VectorXd r = L.apply(phi.values());
                os << "x,phi0,L0_phi0\n" << std::setprecision(17);
                for (int i = 0; i < grid.size(); ++i) os << grid.x(i) << ',' << phi[i] << ',' << r[i] << '\n';
              }));
  std::cout << "kernel residual " << g.kernel_residual << ", gap l2 proxy " << g.gap_l2_proxy << ", gap l1 probe "
            << g.gap_l1_probe << std::endl;
  return pass ? ok : check_failed;
}

int run_audit(Run& run) {
  const Config& c = run.config;
  const std::string s = "audit";
  if (!c.has_section(s)) throw ConfigError("config has no [audit] section");
  std::uint64_t seed = run.seed_or(s, 1);
  long samples = c.integer(s, "samples");
  int trials = static_cast<int>(c.integer(s, "trials"));
  if (samples < 100000) throw ConfigError("[audit] samples must be at least 100000");
  if (trials < 50) throw ConfigError("[audit] trials must be at least 50");
  OperatorAuditOptions opt;
  opt.half_width = c.real(s, "L");
  opt.cell_count = static_cast<int>(c.integer(s, "N"));
  AlphaDeltaWitness w;
  AuditReport pw = audit_pointwise_inequalities(samples, seed, &w);
  AuditReport op = audit_operator_bounds(trials, seed, opt);
  InterpolationFit fit = fit_interpolation_constant(static_cast<int>(c.integer(s, "interpolation_profiles", 200)),
                                                    seed, Grid(opt.half_width, opt.cell_count));
  op.checks.push_back(interpolation_check(fit));
  json j{{"seed", seed},
         {"pointwise", audit_json(pw)},
         {"operator", audit_json(op)},
         {"alpha_delta", {{"Lambda", w.lambda}, {"alpha0", w.alpha0}, {"alpha", w.alpha}, {"delta", w.delta},
                          {"m_at_delta", w.m_at_delta}, {"boundary_margin", w.boundary_margin}}}};
  bool pass = pw.passed() && op.passed();
  j["pass"] = pass;
  run.write_json("audit.json", j);
  if (run.csv()) {
    std::ostringstream os;
    os << "suite,check,samples,violations,worst_margin\n" << std::setprecision(17);
    for (const auto* rep : {&pw, &op})
      for (const auto& ch : rep->checks)
        os << (rep == &pw ? "pointwise" : "operator") << ',' << ch.name << ',' << ch.samples << ',' << ch.violations
           << ',' << ch.worst_margin << '\n';
    run.write("audit.csv", os.str());
  }
  for (const auto* rep : {&pw, &op})
    for (const auto& ch : rep->checks)
      std::cout << (ch.passed() ? "pass  " : "FAIL  ") << ch.name << "  violations " << ch.violations << " / "
                << ch.samples << std::endl;
  return pass ? ok : check_failed;
}

int run_verify(Run& run) {
  AcceptanceOptions o = AcceptanceOptions::from_config(run.config);
  if (run.seed) o.seed = *run.seed;
  AcceptanceBattery battery(o);
  auto results = battery.run([](const CriterionResult& r) { print_criterion(std::cout, r); });
  run.write_json("acceptance.json", acceptance_json(results));
  if (run.csv()) {
    std::ostringstream os;
    os << "id,name,pass\n";
    for (const auto& r : results) os << r.id << ',' << r.name << ',' << (r.pass ? 1 : 0) << '\n';
    run.write("acceptance.csv", os.str());
  }
  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " of 14 criteria fail") << std::endl;
  return failed == 0 ? ok : check_failed;
}

int dispatch(Run& run) {
  if (run.subcommand == "steady") return run_steady(run);
  if (run.subcommand == "sweep") return run_sweep(run);
  if (run.subcommand == "maxwell") return run_maxwell(run);
  if (run.subcommand == "linearize") return run_linearize(run);
  if (run.subcommand == "audit") return run_audit(run);
  return run_verify(run);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-similar profiles of the sticky inelastic Boltzmann equation"};
  app.set_version_flag("--version", version);
  app.require_subcommand(1);
  Run run;
  std::uint64_t seed = 0;
  for (const char* name : {"steady", "sweep", "maxwell", "linearize", "audit", "verify"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", run.config_path, "configuration file")->required();
    sub->add_option("--out", run.out_dir, "output directory");
    sub->add_option("--seed", seed, "random seed override");
    sub->add_option("--threads", run.threads, "thread budget")->check(CLI::PositiveNumber);
    sub->add_option("--format", run.format, "output format")->check(CLI::IsMember({"csv", "json", "both"}));
    sub->callback([&run, sub, &seed] {
      run.subcommand = sub->get_name();
      if (sub->count("--seed")) run.seed = seed;
    });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return config_error;
  }

  auto t0 = std::chrono::steady_clock::now();
  int code = ok;
  try {
    run.config = Config::load(run.config_path);
    set_thread_budget(run.threads > 0 ? run.threads
                                      : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
    std::error_code ec;
    fs::create_directories(run.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + run.out_dir);
    code = dispatch(run);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return config_error;
  } catch (const NotConverged& e) {
    std::cerr << "not converged: " << e.what() << std::endl;
    code = not_converged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    code = check_failed;
  }

  json manifest{{"subcommand", run.subcommand},
                {"config", run.config_path},
                {"config_hash", run.config.hash()},
                {"out", run.out_dir},
                {"threads", thread_budget()},
                {"format", run.format},
                {"version", version},
                {"exit_code", code},
                {"files", run.files},
                {"wall_clock_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  manifest["seed"] = run.seed ? json(*run.seed) : json(nullptr);
  std::ofstream(fs::path(run.out_dir) / "manifest.json") << manifest.dump(2) << "\n";
  return code;
}
