#include "tfw/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "tfw/errors.hpp"

namespace tfw {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  double x = 0.0;
  const char* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (v.empty() || ec != std::errc{} || p != end) throw std::invalid_argument("expected a number, got '" + v + "'");
  return x;
}

long long to_integer(const std::string& v) {
  long long x = 0;
  const char* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (v.empty() || ec != std::errc{} || p != end) throw std::invalid_argument("expected an integer, got '" + v + "'");
  return x;
}

int to_int(const std::string& v) {
  const long long x = to_integer(v);
  if (x < -(1LL << 31) || x >= (1LL << 31)) throw std::invalid_argument("integer out of range: '" + v + "'");
  return static_cast<int>(x);
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<double> to_doubles(const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(to_double(s));
  return out;
}

std::vector<int> to_ints(const std::string& v) {
  std::vector<int> out;
  for (const auto& s : split_list(v)) out.push_back(to_int(s));
  return out;
}

Vec to_vec(const std::string& v) {
  const auto d = to_doubles(v);
  return Eigen::Map<const Vec>(d.data(), static_cast<Eigen::Index>(d.size()));
}

CoeffKind coeff_kind(const std::string& v) {
  if (v == "zero") return CoeffKind::zero;
  if (v == "exponential") return CoeffKind::exponential;
  if (v == "power") return CoeffKind::power;
  throw std::invalid_argument("unknown coefficient kind '" + v + "' (zero, exponential, power)");
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

void add_nonlinearity(std::vector<std::pair<std::string, Setter>>& t, const std::string& name,
                      NonlinearitySpec ModelSpec::*member) {
  t.push_back({name + ".kind", [member](RunConfig& c, const std::string& v) {
                 const auto kind = nonlinearity_kind_from_string(v);
                 if (kind == NonlinearityKind::dense)
                   throw std::invalid_argument("dense nonlinearities need callbacks and cannot be configured");
                 (c.model.*member).kind = kind;
               }});
  t.push_back({name + ".c0", [member](RunConfig& c, const std::string& v) { (c.model.*member).c0 = to_double(v); }});
  t.push_back({name + ".c1", [member](RunConfig& c, const std::string& v) { (c.model.*member).c1 = to_double(v); }});
  t.push_back({name + ".amplitude",
               [member](RunConfig& c, const std::string& v) { (c.model.*member).amplitude = to_double(v); }});
}

void add_coeffs(std::vector<std::pair<std::string, Setter>>& t, const std::string& name, CoeffRule CoeffSequences::*member) {
  auto rule = [member](RunConfig& c) -> CoeffRule& { return c.model.noise_coeffs.*member; };
  t.push_back({name + ".kind", [rule](RunConfig& c, const std::string& v) { rule(c).kind = coeff_kind(v); }});
  t.push_back({name + ".scale", [rule](RunConfig& c, const std::string& v) { rule(c).scale = to_double(v); }});
  t.push_back({name + ".rate", [rule](RunConfig& c, const std::string& v) { rule(c).rate = to_double(v); }});
  t.push_back({name + ".mod_amp", [rule](RunConfig& c, const std::string& v) { rule(c).mod_amp = to_double(v); }});
  t.push_back({name + ".mod_freq", [rule](RunConfig& c, const std::string& v) { rule(c).mod_freq = to_double(v); }});
  t.push_back({name + ".perturbation",
               [rule](RunConfig& c, const std::string& v) { rule(c).perturbation = to_double(v); }});
}

const std::vector<std::pair<std::string, Setter>>& key_table() {
  static const auto table = [] {
    std::vector<std::pair<std::string, Setter>> t;
    t.push_back({"study", [](RunConfig& c, const std::string& v) {
                   const auto& names = study_names();
                   if (std::find(names.begin(), names.end(), v) == names.end())
                     throw std::invalid_argument("unknown study '" + v + "'");
                   c.study = v;
                 }});
    t.push_back({"alpha", [](RunConfig& c, const std::string& v) { c.model.alpha = to_double(v); }});
    t.push_back({"beta", [](RunConfig& c, const std::string& v) { c.model.beta = to_double(v); }});
    t.push_back({"nu", [](RunConfig& c, const std::string& v) { c.model.nu = to_double(v); }});
    t.push_back({"hurst", [](RunConfig& c, const std::string& v) { c.model.hurst = to_double(v); }});
    t.push_back({"domain_len", [](RunConfig& c, const std::string& v) { c.model.domain_len = to_double(v); }});
    t.push_back({"horizon", [](RunConfig& c, const std::string& v) { c.model.horizon = to_double(v); }});
    t.push_back({"n_modes", [](RunConfig& c, const std::string& v) { c.model.n_modes = to_int(v); }});
    t.push_back({"gamma", [](RunConfig& c, const std::string& v) { c.model.gamma_declared = to_double(v); }});
    t.push_back({"init_a", [](RunConfig& c, const std::string& v) { c.model.init_a = to_vec(v); }});
    t.push_back({"init_b", [](RunConfig& c, const std::string& v) { c.model.init_b = to_vec(v); }});
    add_nonlinearity(t, "f", &ModelSpec::f_spec);
    add_nonlinearity(t, "g", &ModelSpec::g_spec);
    add_nonlinearity(t, "h", &ModelSpec::h_spec);
    add_coeffs(t, "sigma", &CoeffSequences::sigma);
    add_coeffs(t, "rho", &CoeffSequences::rho);

    t.push_back({"n_samples", [](RunConfig& c, const std::string& v) { c.mc.n_samples = to_int(v); }});
    t.push_back({"min_samples", [](RunConfig& c, const std::string& v) { c.mc.min_samples = to_int(v); }});
    t.push_back({"batch", [](RunConfig& c, const std::string& v) { c.mc.batch = to_int(v); }});
    t.push_back({"rel_stderr", [](RunConfig& c, const std::string& v) { c.mc.rel_stderr = to_double(v); }});
    t.push_back({"seed", [](RunConfig& c, const std::string& v) {
                   const long long s = to_integer(v);
                   if (s < 0) throw std::invalid_argument("seed must be non-negative");
                   c.mc.seed = static_cast<std::uint64_t>(s);
                 }});
    t.push_back({"output", [](RunConfig& c, const std::string& v) { c.output = v; }});

    t.push_back({"modeling.tau_exponents",
                 [](RunConfig& c, const std::string& v) { c.modeling.tau_exponents = to_ints(v); }});
    t.push_back({"modeling.ref_exponent",
                 [](RunConfig& c, const std::string& v) { c.modeling.ref_exponent = to_int(v); }});
    t.push_back({"modeling.band_low", [](RunConfig& c, const std::string& v) { c.modeling.band_low = to_double(v); }});
    t.push_back({"modeling.band_high", [](RunConfig& c, const std::string& v) { c.modeling.band_high = to_double(v); }});
    t.push_back({"modeling.eta_delta", [](RunConfig& c, const std::string& v) { c.modeling.eta_delta = to_double(v); }});
    t.push_back({"modeling.floor_factor",
                 [](RunConfig& c, const std::string& v) { c.modeling.floor_factor = to_double(v); }});
    t.push_back({"modeling.flat_ratio", [](RunConfig& c, const std::string& v) { c.modeling.flat_ratio = to_double(v); }});
    t.push_back({"modeling.ref_shift_tol",
                 [](RunConfig& c, const std::string& v) { c.modeling.ref_shift_tol = to_double(v); }});

    t.push_back({"fem.h_exponents", [](RunConfig& c, const std::string& v) { c.fem.h_exponents = to_ints(v); }});
    t.push_back({"fem.tau_exponent", [](RunConfig& c, const std::string& v) { c.fem.tau_exponent = to_int(v); }});
    t.push_back({"fem.k_ref", [](RunConfig& c, const std::string& v) { c.fem.k_ref = to_int(v); }});
    t.push_back({"fem.slope_margin", [](RunConfig& c, const std::string& v) { c.fem.slope_margin = to_double(v); }});
    t.push_back({"fem.raw_band", [](RunConfig& c, const std::string& v) {
                   const auto b = to_doubles(v);
                   if (b.size() != 2 || !(b[0] < b[1])) throw std::invalid_argument("raw_band needs 'low, high'");
                   c.fem.raw_band = std::make_pair(b[0], b[1]);
                 }});

    t.push_back({"total.enabled", [](RunConfig& c, const std::string& v) { c.total_error = to_bool(v); }});
    t.push_back({"total.h_exponent", [](RunConfig& c, const std::string& v) { c.total.h_exponent = to_int(v); }});
    t.push_back({"total.tau_exponents", [](RunConfig& c, const std::string& v) { c.total.tau_exponents = to_ints(v); }});
    t.push_back({"total.ref_exponent", [](RunConfig& c, const std::string& v) { c.total.ref_exponent = to_int(v); }});
    t.push_back({"total.k_ref", [](RunConfig& c, const std::string& v) { c.total.k_ref = to_int(v); }});
    t.push_back({"total.floor_factor", [](RunConfig& c, const std::string& v) { c.total.floor_factor = to_double(v); }});
    t.push_back({"total.flat_ratio", [](RunConfig& c, const std::string& v) { c.total.flat_ratio = to_double(v); }});

    t.push_back({"holder.tau_exponent", [](RunConfig& c, const std::string& v) { c.holder.tau_exponent = to_int(v); }});
    t.push_back({"holder.lag_exponents",
                 [](RunConfig& c, const std::string& v) { c.holder.lag_exponents = to_ints(v); }});
    t.push_back({"holder.margin", [](RunConfig& c, const std::string& v) { c.holder.margin = to_double(v); }});

    t.push_back({"stability.lam_betas", [](RunConfig& c, const std::string& v) { c.stability.lam_betas = to_doubles(v); }});
    t.push_back({"stability.nus", [](RunConfig& c, const std::string& v) { c.stability.nus = to_doubles(v); }});
    t.push_back({"stability.alpha", [](RunConfig& c, const std::string& v) { c.stability.alpha = to_double(v); }});
    t.push_back({"stability.t_max", [](RunConfig& c, const std::string& v) { c.stability.t_max = to_double(v); }});
    t.push_back({"stability.n_points", [](RunConfig& c, const std::string& v) { c.stability.n_points = to_int(v); }});
    t.push_back({"stability.decay_constant",
                 [](RunConfig& c, const std::string& v) { c.stability.decay_constant = to_double(v); }});
    return t;
  }();
  return table;
}

}  // namespace

const std::vector<std::string>& study_names() {
  static const std::vector<std::string> names{"modeling-error", "fem-error", "holder", "stability",
                                              "special-selftest"};
  return names;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : key_table()) keys.push_back(k);
  return keys;
}

RunConfig parse_config(std::istream& in) {
  static const std::map<std::string, Setter> setters(key_table().begin(), key_table().end());
  RunConfig cfg;
  std::set<std::string> seen;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + line + "'", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown key '" + key + "'", line_no);
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line_no);
    try {
      it->second(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key + ": " + e.what(), line_no);
    }
  }
  if (cfg.study.empty()) throw ConfigError("missing required key 'study'");
  cfg.model.normalize_initial_data();
  try {
    cfg.model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  return parse_config(in);
}

}  // namespace tfw
