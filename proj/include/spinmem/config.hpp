// spinmem: run configuration (JSON) with strict key checking.
#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spinmem/bath.hpp"
#include "spinmem/core.hpp"

namespace spinmem {

/// The configuration file does not follow the schema.
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{"fig2a", "fig2b", "fig2c", "fig2d", "pulse-spectrum", "oracle-check"};
  return ids;
}

struct RunConfig {
  std::string experiment = "fig2a";
  std::uint64_t seed = 20240611;
  std::string output;
  int threads = 1;
  BathParams bath;
  std::vector<int> zeta{1, 2};
  std::vector<double> polarisation_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> omega_grid;  // default: one decade around bath.omega_Zn
  std::vector<double> sigma_grid;  // default: logspace(-2, 1, 13), units of G_+
  std::vector<double> fig2b_polarisations{0.0, 0.5, 1.0};
  std::optional<int> n_samples;    // default depends on the experiment
  int n_realisations = 100;
  int fig2d_sites = 2000;
  std::string shift_convention = "zeta_squared";
  std::string chain_model = "uniform";
  double truncation_tol = 1e-8;
  int l_max = 25;

  int samples() const {
    if (n_samples) return *n_samples;
    if (experiment == "fig2a") return 500;
    if (experiment == "fig2b") return 20;
    return 100;
  }

  std::vector<double> omegas() const {
    if (!omega_grid.empty()) return omega_grid;
    std::vector<double> w;
    for (int i = 0; i <= 10; ++i) w.push_back(bath.omega_Zn * std::pow(10.0, -0.5 + 0.1 * i));
    return w;
  }

  std::vector<double> sigmas() const {
    if (!sigma_grid.empty()) return sigma_grid;
    std::vector<double> s;
    for (int i = 0; i < 13; ++i) s.push_back(std::pow(10.0, -2.0 + 0.25 * i));
    return s;
  }

  void validate() const {
    bool known = false;
    for (const auto& id : experiment_ids()) known = known || id == experiment;
    if (!known) throw ConfigError("unknown experiment '" + experiment + "'");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    try {
      bath.validate();
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    if (zeta.empty()) throw ConfigError("zeta list is empty");
    for (int z : zeta)
      if (z != 1 && z != 2) throw ConfigError("zeta entries must be 1 or 2");
    for (double p : polarisation_grid)
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("polarisations must lie in [0, 1]");
    for (double p : fig2b_polarisations)
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("polarisations must lie in [0, 1]");
    for (double w : omega_grid)
      if (!(w > 0)) throw ConfigError("omega grid entries must be positive");
    for (double s : sigma_grid)
      if (!(s >= 0)) throw ConfigError("sigma grid entries must be non-negative");
    if (n_samples && *n_samples < 1) throw ConfigError("n_samples must be >= 1");
    if (experiment == "fig2a" && samples() < 100) throw ConfigError("fig2a needs n_samples >= 100");
    if (n_realisations < 1) throw ConfigError("n_realisations must be >= 1");
    if (fig2d_sites < 1) throw ConfigError("fig2d_sites must be >= 1");
    if (shift_convention != "zeta_squared" && shift_convention != "transition")
      throw ConfigError("shift_convention must be 'zeta_squared' or 'transition'");
    if (chain_model != "uniform" && chain_model != "closed_form")
      throw ConfigError("chain_model must be 'uniform' or 'closed_form'");
    if (!(truncation_tol > 0)) throw ConfigError("truncation_tol must be positive");
    if (l_max < 1) throw ConfigError("l_max must be >= 1");
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  detail::reject_unknown(j,
                         {"experiment", "seed", "output", "threads", "bath", "zeta", "polarisation_grid",
                          "omega_grid", "sigma_grid", "fig2b_polarisations", "n_samples", "n_realisations",
                          "fig2d_sites", "shift_convention", "chain_model", "truncation_tol", "l_max"},
                         "config");
  RunConfig c;
  detail::read(j, "experiment", c.experiment);
  detail::read(j, "seed", c.seed);
  detail::read(j, "output", c.output);
  detail::read(j, "threads", c.threads);
  detail::read(j, "zeta", c.zeta);
  detail::read(j, "polarisation_grid", c.polarisation_grid);
  detail::read(j, "omega_grid", c.omega_grid);
  detail::read(j, "sigma_grid", c.sigma_grid);
  detail::read(j, "fig2b_polarisations", c.fig2b_polarisations);
  if (j.contains("n_samples")) {
    int n = 0;
    detail::read(j, "n_samples", n);
    c.n_samples = n;
  }
  detail::read(j, "n_realisations", c.n_realisations);
  detail::read(j, "fig2d_sites", c.fig2d_sites);
  detail::read(j, "shift_convention", c.shift_convention);
  detail::read(j, "chain_model", c.chain_model);
  detail::read(j, "truncation_tol", c.truncation_tol);
  detail::read(j, "l_max", c.l_max);
  if (j.contains("bath")) {
    const auto& b = j.at("bath");
    detail::reject_unknown(b,
                           {"Lx", "Ly", "Lz", "lattice_spacing", "spin", "A_total", "B_Q", "theta", "omega_Zn",
                            "omega_Ze", "box_sigmas", "site_floor"},
                           "bath");
    detail::read(b, "Lx", c.bath.Lx);
    detail::read(b, "Ly", c.bath.Ly);
    detail::read(b, "Lz", c.bath.Lz);
    detail::read(b, "lattice_spacing", c.bath.lattice_spacing);
    detail::read(b, "spin", c.bath.spin);
    detail::read(b, "A_total", c.bath.A_total);
    detail::read(b, "B_Q", c.bath.B_Q);
    detail::read(b, "theta", c.bath.theta);
    detail::read(b, "omega_Zn", c.bath.omega_Zn);
    detail::read(b, "omega_Ze", c.bath.omega_Ze);
    detail::read(b, "box_sigmas", c.bath.box_sigmas);
    detail::read(b, "site_floor", c.bath.site_floor);
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

/// Fully resolved configuration as JSON (defaults filled in), without the fields that
/// do not change results (threads, output path).
inline nlohmann::json canonical_json(const RunConfig& c) {
  nlohmann::json b{{"Lx", c.bath.Lx},
                   {"Ly", c.bath.Ly},
                   {"Lz", c.bath.Lz},
                   {"lattice_spacing", c.bath.lattice_spacing},
                   {"spin", c.bath.spin},
                   {"A_total", c.bath.A_total},
                   {"B_Q", c.bath.B_Q},
                   {"theta", c.bath.theta},
                   {"omega_Zn", c.bath.omega_Zn},
                   {"omega_Ze", c.bath.omega_Ze},
                   {"box_sigmas", c.bath.box_sigmas},
                   {"site_floor", c.bath.site_floor}};
  return {{"experiment", c.experiment},
          {"seed", c.seed},
          {"bath", b},
          {"zeta", c.zeta},
          {"polarisation_grid", c.polarisation_grid},
          {"omega_grid", c.omegas()},
          {"sigma_grid", c.sigmas()},
          {"fig2b_polarisations", c.fig2b_polarisations},
          {"n_samples", c.samples()},
          {"n_realisations", c.n_realisations},
          {"fig2d_sites", c.fig2d_sites},
          {"shift_convention", c.shift_convention},
          {"chain_model", c.chain_model},
          {"truncation_tol", c.truncation_tol},
          {"l_max", c.l_max}};
}

/// 64-bit FNV-1a of the canonical JSON text.
inline std::string config_hash(const RunConfig& c) {
  const std::string text = canonical_json(c).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace spinmem
