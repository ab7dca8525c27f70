#include "rouleau/scenario.hpp"

#include <cmath>
#include <cctype>
#include <cstdio>

#include "rouleau/errors.hpp"
#include "rouleau/toml_lite.hpp"

namespace rouleau {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

double num(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) bad(path, "must be finite");
  return v;
}

long integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) bad(path, "expected an integer");
  return j.get<long>();
}

const json* find(const json& t, const char* key) {
  auto it = t.find(key);
  return it == t.end() ? nullptr : &*it;
}

double opt_num(const json& t, const char* key, const std::string& prefix, double dflt) {
  const json* v = find(t, key);
  return v ? num(*v, prefix + key) : dflt;
}

void check_keys(const json& t, const std::string& prefix, std::initializer_list<const char*> allowed) {
  for (auto it = t.begin(); it != t.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) bad(prefix + it.key(), "unknown field");
  }
}

void add_point(DiscreteMeasure& f, const json& p, const std::string& path) {
  long c, a;
  double w;
  if (p.is_array()) {
    if (p.size() != 3) bad(path, "expected [c, a, weight]");
    c = integer(p[0], path + ".c");
    a = integer(p[1], path + ".a");
    w = num(p[2], path + ".weight");
  } else if (p.is_object()) {
    check_keys(p, path + ".", {"c", "a", "w", "weight"});
    if (!p.contains("c") || !p.contains("a")) bad(path, "needs c and a");
    c = integer(p["c"], path + ".c");
    a = integer(p["a"], path + ".a");
    w = p.contains("w") ? num(p["w"], path + ".w") : (p.contains("weight") ? num(p["weight"], path + ".weight") : 1.0);
  } else {
    bad(path, "expected [c, a, weight]");
  }
  if (c < 2) bad(path + ".c", "must be >= 2 (got " + std::to_string(c) + ")");
  if (a < 2) bad(path + ".a", "must be >= 2 (got " + std::to_string(a) + ")");
  if (!(w > 0.0)) bad(path + ".weight", "must be > 0");
  if (f.weight({int(c), int(a)}) != 0.0) bad(path, "duplicate composition");
  f.set({int(c), int(a)}, w);
}

}  // namespace

std::string Scenario::hash() const {
  // FNV-1a over the canonical dump
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : raw.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Scenario scenario_from_json(const json& cfg) {
  if (!cfg.is_object()) throw ConfigError("scenario: expected a table");
  check_keys(cfg, "", {"name", "alpha", "initial", "lattice", "checkpoints", "laplace", "stochastic", "output"});
  Scenario s;
  if (!cfg.contains("name") || !cfg["name"].is_string() || cfg["name"].get<std::string>().empty())
    bad("name", "required non-empty string");
  s.name = cfg["name"].get<std::string>();
  for (char c : s.name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) bad("name", "use letters, digits, '_' or '-'");

  if (!cfg.contains("alpha") || !cfg["alpha"].is_array() || cfg["alpha"].size() != 3)
    bad("alpha", "expected three numbers");
  double al[3];
  for (int i = 0; i < 3; ++i) {
    al[i] = num(cfg["alpha"][i], "alpha[" + std::to_string(i) + "]");
    if (al[i] < 0.0) bad("alpha[" + std::to_string(i) + "]", "must be >= 0");
  }
  if (al[0] == 0.0 && al[1] == 0.0 && al[2] == 0.0) bad("alpha", "must not be all zero");
  s.alpha = AlphaWeights(al[0], al[1], al[2]);

  if (!cfg.contains("initial") || !cfg["initial"].is_object()) bad("initial", "required table");
  const json& in = cfg["initial"];
  check_keys(in, "initial.", {"family", "points", "c", "a", "w"});
  std::string family = in.contains("family") ? in["family"].get<std::string>() : "points";
  if (family == "monodisperse") {
    json p = json::object();
    p["c"] = in.contains("c") ? in["c"] : json(2);
    p["a"] = in.contains("a") ? in["a"] : json(2);
    p["w"] = in.contains("w") ? in["w"] : json(1.0);
    add_point(s.f0, p, "initial");
  } else if (family == "points" || family == "two_point") {
    if (!in.contains("points") || !in["points"].is_array() || in["points"].empty())
      bad("initial.points", "expected a non-empty list of [c, a, weight]");
    if (family == "two_point" && in["points"].size() != 2) bad("initial.points", "two_point needs exactly two points");
    for (std::size_t k = 0; k < in["points"].size(); ++k)
      add_point(s.f0, in["points"][k], "initial.points[" + std::to_string(k) + "]");
  } else {
    bad("initial.family", "unknown family '" + family + "'");
  }

  if (const json* l = find(cfg, "lattice")) {
    check_keys(*l, "lattice.", {"R", "rtol", "atol"});
    s.R = opt_num(*l, "R", "lattice.", s.R);
    s.rtol = opt_num(*l, "rtol", "lattice.", s.rtol);
    s.atol = opt_num(*l, "atol", "lattice.", s.atol);
  }
  if (!(s.R >= 1.0)) bad("lattice.R", "must be >= 1");
  if (!(s.rtol > 0.0)) bad("lattice.rtol", "must be > 0");
  if (!(s.atol > 0.0)) bad("lattice.atol", "must be > 0");
  for (const auto& [z, w] : s.f0)
    if (z.c > 2 * s.R || z.a > 2 * s.R) bad("initial", "support exceeds the truncation box 2R");

  if (const json* c = find(cfg, "checkpoints")) {
    check_keys(*c, "checkpoints.", {"count", "tau_max", "t_end"});
    if (c->contains("count")) s.checkpoint_count = int(integer((*c)["count"], "checkpoints.count"));
    s.tau_max = opt_num(*c, "tau_max", "checkpoints.", s.tau_max);
    s.t_end = opt_num(*c, "t_end", "checkpoints.", s.t_end);
  }
  if (s.checkpoint_count < 2) bad("checkpoints.count", "must be >= 2");
  if (!(s.tau_max > 0.0)) bad("checkpoints.tau_max", "must be > 0");
  if (!(s.t_end > 0.0)) bad("checkpoints.t_end", "must be > 0");

  if (const json* l = find(cfg, "laplace")) {
    check_keys(*l, "laplace.", {"rho_max", "n_rho"});
    s.rho_max = opt_num(*l, "rho_max", "laplace.", s.rho_max);
    if (l->contains("n_rho")) s.n_rho = int(integer((*l)["n_rho"], "laplace.n_rho"));
  }
  if (!(s.rho_max > 0.0)) bad("laplace.rho_max", "must be > 0");
  if (s.n_rho < 2) bad("laplace.n_rho", "must be >= 2");

  if (const json* st = find(cfg, "stochastic")) {
    check_keys(*st, "stochastic.", {"enabled", "runs", "particles", "seed", "checkpoints"});
    s.stochastic.enabled = st->contains("enabled") ? (*st)["enabled"].get<bool>() : true;
    if (st->contains("runs")) s.stochastic.runs = int(integer((*st)["runs"], "stochastic.runs"));
    if (st->contains("particles")) s.stochastic.particles = integer((*st)["particles"], "stochastic.particles");
    if (st->contains("seed")) s.stochastic.seed = std::uint64_t(integer((*st)["seed"], "stochastic.seed"));
    if (st->contains("checkpoints")) {
      s.stochastic.checkpoints.clear();
      const json& cp = (*st)["checkpoints"];
      if (!cp.is_array() || cp.empty()) bad("stochastic.checkpoints", "expected a non-empty list");
      for (std::size_t k = 0; k < cp.size(); ++k)
        s.stochastic.checkpoints.push_back(num(cp[k], "stochastic.checkpoints[" + std::to_string(k) + "]"));
    }
    if (s.stochastic.runs < 2) bad("stochastic.runs", "must be >= 2");
    if (s.stochastic.particles < 2) bad("stochastic.particles", "must be >= 2");
    for (std::size_t k = 0; k < s.stochastic.checkpoints.size(); ++k)
      if (!(s.stochastic.checkpoints[k] > (k ? s.stochastic.checkpoints[k - 1] : 0.0)))
        bad("stochastic.checkpoints", "must be positive and increasing");
  }

  s.output_dir = "out/" + s.name;
  if (const json* o = find(cfg, "output")) {
    check_keys(*o, "output.", {"dir", "checkpoints"});
    if (o->contains("dir")) s.output_dir = (*o)["dir"].get<std::string>();
    if (o->contains("checkpoints")) s.write_checkpoints = (*o)["checkpoints"].get<bool>();
  }
  s.raw = cfg;
  return s;
}

Scenario load_scenario(const std::string& path) {
  try {
    return scenario_from_json(parse_toml_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

void override_tau_max(Scenario& s, double tau_max) {
  if (!(tau_max > 0.0)) throw ConfigError("--tau-max: must be > 0");
  s.tau_max = tau_max;
  s.raw["checkpoints"]["tau_max"] = tau_max;
}

void override_truncation(Scenario& s, double R) {
  if (!(R >= 1.0)) throw ConfigError("--truncation-R: must be >= 1");
  for (const auto& [z, w] : s.f0)
    if (z.c > 2 * R || z.a > 2 * R) throw ConfigError("--truncation-R: initial support exceeds 2R");
  s.R = R;
  s.raw["lattice"]["R"] = R;
}

}  // namespace rouleau
