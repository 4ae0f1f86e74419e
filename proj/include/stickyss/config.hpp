#ifndef STICKYSS_CONFIG_HPP
#define STICKYSS_CONFIG_HPP

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/uuid/detail/sha1.hpp>

#include "errors.hpp"
#include "selfsim.hpp"

namespace stickyss {

// sha1 of "blob <size>\0<content>", as git hashes file contents
inline std::string git_blob_hash(const std::string& content) {
  boost::uuids::detail::sha1 h;
  std::string header = "blob " + std::to_string(content.size());
  h.process_bytes(header.data(), header.size());
  h.process_byte(0);
  h.process_bytes(content.data(), content.size());
  unsigned int d[5];
  h.get_digest(d);
  char buf[41];
  for (int i = 0; i < 5; ++i) std::snprintf(buf + 8 * i, 9, "%08x", d[i]);
  return std::string(buf, 40);
}

class Config {
 public:
  static Config load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    Config c = parse(ss.str());
    c.path_ = path;
    return c;
  }

  static Config parse(const std::string& text) {
    Config c;
    c.text_ = text;
    std::istringstream is(text);
    try {
      boost::property_tree::ini_parser::read_ini(is, c.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(std::string("malformed config: ") + e.message() + " at line " + std::to_string(e.line()));
    }
    return c;
  }

  const std::string& path() const { return path_; }
  const std::string& text() const { return text_; }
  std::string hash() const { return git_blob_hash(text_); }
  bool has_section(const std::string& s) const { return tree_.get_child_optional(s).has_value(); }
  bool has(const std::string& s, const std::string& key) const { return raw(s, key).has_value(); }

  std::optional<std::string> raw(const std::string& s, const std::string& key) const {
    auto v = tree_.get_optional<std::string>(s + "." + key);
    if (!v) return std::nullopt;
    return boost::algorithm::trim_copy(*v);
  }

  std::string text(const std::string& s, const std::string& key) const {
    auto v = raw(s, key);
    if (!v) throw ConfigError("missing required key [" + s + "] " + key);
    return *v;
  }
  std::string text(const std::string& s, const std::string& key, const std::string& fallback) const {
    auto v = raw(s, key);
    return v ? *v : fallback;
  }

  double real(const std::string& s, const std::string& key) const { return to_real(s, key, text(s, key)); }
  double real(const std::string& s, const std::string& key, double fallback) const {
    auto v = raw(s, key);
    return v ? to_real(s, key, *v) : fallback;
  }

  long integer(const std::string& s, const std::string& key) const { return to_integer(s, key, text(s, key)); }
  long integer(const std::string& s, const std::string& key, long fallback) const {
    auto v = raw(s, key);
    return v ? to_integer(s, key, *v) : fallback;
  }

  bool boolean(const std::string& s, const std::string& key, bool fallback) const {
    auto v = raw(s, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError("[" + s + "] " + key + " must be a boolean");
  }

  std::vector<double> reals(const std::string& s, const std::string& key) const {
    std::vector<std::string> parts;
    std::string v = text(s, key);
    boost::algorithm::split(parts, v, boost::is_any_of(", "), boost::token_compress_on);
    std::vector<double> out;
    for (auto& p : parts)
      if (!p.empty()) out.push_back(to_real(s, key, p));
    if (out.empty()) throw ConfigError("[" + s + "] " + key + " must list at least one number");
    return out;
  }

 private:
  static double to_real(const std::string& s, const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || v.empty()) throw ConfigError("[" + s + "] " + key + " is not a number: " + v);
    return d;
  }
  static long to_integer(const std::string& s, const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long d = 0;
    try {
      d = std::stol(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || v.empty()) throw ConfigError("[" + s + "] " + key + " is not an integer: " + v);
    return d;
  }

  std::string path_, text_;
  boost::property_tree::ptree tree_;
};

inline DriftScheme parse_drift(const std::string& v) {
  if (v == "upwind") return DriftScheme::upwind;
  if (v == "muscl") return DriftScheme::muscl;
  if (v == "central") return DriftScheme::central;
  if (v == "fromm") return DriftScheme::fromm;
  throw ConfigError("unknown drift scheme " + v);
}

inline MidpointRule parse_deposit(const std::string& v) {
  if (v == "linear") return MidpointRule::linear;
  if (v == "cubic") return MidpointRule::cubic;
  throw ConfigError("unknown deposit rule " + v);
}

inline InitialCondition parse_init(const Config& c, const std::string& s) {
  std::string kind = c.text(s, "init");
  if (kind == "gaussian") return InitialCondition::gaussian(c.real(s, "energy"));
  if (kind == "uniform") return InitialCondition::uniform(c.real(s, "energy"));
  if (kind == "maxwell") return InitialCondition::maxwell(c.real(s, "lambda"));
  if (kind == "file") return InitialCondition::file(c.text(s, "file"));
  throw ConfigError("unknown initial condition " + kind);
}

// gamma, c, L and N are required; everything else is a tolerance or scheme choice.
inline SolverConfig solver_config(const Config& c, const std::string& s = "solver") {
  if (!c.has_section(s)) throw ConfigError("config has no [" + s + "] section");
  SolverConfig cfg;
  cfg.gamma = c.real(s, "gamma");
  cfg.c = c.real(s, "c");
  cfg.half_width = c.real(s, "L");
  cfg.cell_count = static_cast<int>(c.integer(s, "N"));
  std::string dt = c.text(s, "dt", "auto");
  if (dt != "auto") cfg.dt = c.real(s, "dt");
  cfg.cfl = c.real(s, "cfl", cfg.cfl);
  cfg.max_time = c.real(s, "max_time", cfg.max_time);
  cfg.steady_tol = c.real(s, "steady_tol", cfg.steady_tol);
  cfg.init = c.has(s, "init") ? parse_init(c, s) : InitialCondition::gaussian(1.0);
  cfg.drift = parse_drift(c.text(s, "drift", "muscl"));
  cfg.deposit = parse_deposit(c.text(s, "deposit", "cubic"));
  cfg.energy_consistent = c.boolean(s, "energy_consistent", cfg.energy_consistent);
  cfg.record_interval = c.real(s, "record_interval", cfg.record_interval);
  cfg.clip_budget = c.real(s, "clip_budget", cfg.clip_budget);
  cfg.smoothing_time = c.real(s, "smoothing_time", cfg.smoothing_time);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[") + s + "] " + e.what());
  }
  return cfg;
}

}  // namespace stickyss

#endif
