#include "kal/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "kal/errors.hpp"

namespace kal {

using nlohmann::json;

namespace {

void allow_keys(const json& j, const std::string& where, std::set<std::string> keys) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!keys.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

double num(const json& j, const std::string& key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

std::size_t count(const json& j, const std::string& key, std::size_t fallback,
                  const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(where + "." + key + " must be a non-negative integer");
  return static_cast<std::size_t>(v.get<long long>());
}

std::string str(const json& j, const std::string& key, const std::string& fallback,
                const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(where + "." + key + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

SpectralField modes_field(const json& j, const std::string& key, std::size_t K,
                          const std::string& where) {
  auto a = numbers(j, key, where);
  if (a.size() > K)
    throw ConfigError(where + "." + key + " has " + std::to_string(a.size()) +
                      " entries for " + std::to_string(K) + " modes");
  a.resize(K, 0.0);
  return SpectralField(std::move(a));
}

}  // namespace

ProblemSpec load_problem(const json& j) {
  allow_keys(j, "config", {"domain", "kernel", "epsilon", "m", "delta", "f", "g", "h",
                           "lyapunov", "initial"});
  const ProblemSpec def = default_problem();
  ProblemSpec p = def;

  try {
    // domain
    std::size_t K = def.grid->n_modes();
    std::size_t N = def.grid->n_phys();
    double length = def.grid->length();
    if (j.contains("domain")) {
      const auto& d = j.at("domain");
      allow_keys(d, "domain", {"length", "n_modes", "n_phys"});
      length = num(d, "length", length, "domain");
      K = count(d, "n_modes", K, "domain");
      N = count(d, "n_phys", d.contains("n_modes") ? 2 * K : N, "domain");
    }
    p.grid = std::make_shared<const DomainGrid>(K, N, length);

    // kernel
    std::size_t M = def.history->size();
    double tail_tol = def.history->tail_tol;
    if (j.contains("kernel")) {
      const auto& k = j.at("kernel");
      allow_keys(k, "kernel", {"kind", "delta1", "delta2", "M", "tail_tol", "s", "mu", "dmu"});
      const std::string kind = str(k, "kind", "exponential", "kernel");
      M = count(k, "M", M, "kernel");
      tail_tol = num(k, "tail_tol", tail_tol, "kernel");
      if (kind == "exponential") {
        if (k.contains("s") || k.contains("mu") || k.contains("dmu"))
          throw ConfigError("kernel tables are only valid for kind 'tabulated'");
        p.kernel = KernelSpec::exponential(num(k, "delta1", 1.0, "kernel"),
                                           num(k, "delta2", 1.0, "kernel"));
      } else if (kind == "tabulated") {
        std::optional<double> declared;
        if (k.contains("delta1")) declared = num(k, "delta1", 0.0, "kernel");
        if (!k.contains("delta2")) throw ConfigError("tabulated kernel needs delta2");
        p.kernel = KernelSpec::tabulated(numbers(k, "s", "kernel"), numbers(k, "mu", "kernel"),
                                         numbers(k, "dmu", "kernel"),
                                         num(k, "delta2", 0.0, "kernel"), declared);
      } else {
        throw ConfigError("unknown kernel kind '" + kind + "'");
      }
    }
    p.history = std::make_shared<const HistoryGrid>(build_history_grid(p.kernel, M, tail_tol));

    // epsilon
    if (j.contains("epsilon")) {
      const auto& e = j.at("epsilon");
      allow_keys(e, "epsilon", {"kind", "a", "eps0", "L"});
      const std::string kind = str(e, "kind", "exp_relax", "epsilon");
      std::optional<double> L;
      if (e.contains("L")) L = num(e, "L", 0.0, "epsilon");
      const double a = num(e, "a", def.eps.a(), "epsilon");
      if (kind == "exp_relax") {
        p.eps = EpsilonSpec::exp_relax(a, num(e, "eps0", def.eps.eps0(), "epsilon"), L);
      } else if (kind == "constant") {
        if (e.contains("eps0")) throw ConfigError("constant epsilon takes 'a' only");
        p.eps = EpsilonSpec::constant(a, L);
      } else {
        throw ConfigError("unknown epsilon kind '" + kind + "'");
      }
    }

    p.m = num(j, "m", def.m, "config");
    p.delta = num(j, "delta", def.delta, "config");

    if (j.contains("f")) {
      const auto& f = j.at("f");
      allow_keys(f, "f", {"kind", "offset"});
      const std::string kind = str(f, "kind", "linear", "f");
      if (kind == "linear") {
        if (f.contains("offset")) throw ConfigError("f kind 'linear' takes no offset");
        NonlinearitySpec::set_linear_damping(p.nonlin, 0.0);
      } else if (kind == "linear_offset") {
        NonlinearitySpec::set_linear_damping(p.nonlin, num(f, "offset", 0.0, "f"));
      } else {
        throw ConfigError("unknown f kind '" + kind + "'");
      }
    }

    if (j.contains("g")) {
      const auto& g = j.at("g");
      allow_keys(g, "g", {"kind", "kappa"});
      const std::string kind = str(g, "kind", "sine", "g");
      if (kind == "sine") {
        NonlinearitySpec::set_sine_source(p.nonlin, num(g, "kappa", def.nonlin.kappa, "g"));
      } else if (kind == "zero") {
        if (g.contains("kappa")) throw ConfigError("g kind 'zero' takes no kappa");
        NonlinearitySpec::set_zero_source(p.nonlin);
      } else {
        throw ConfigError("unknown g kind '" + kind + "'");
      }
    }

    p.h = with_modes(def, K).h;
    if (j.contains("h")) {
      const auto& h = j.at("h");
      allow_keys(h, "h", {"mode_amplitudes"});
      if (h.contains("mode_amplitudes")) p.h = modes_field(h, "mode_amplitudes", K, "h");
    }

    if (j.contains("lyapunov")) {
      const auto& l = j.at("lyapunov");
      allow_keys(l, "lyapunov", {"alpha", "lambda"});
      p.lyapunov.alpha = num(l, "alpha", def.lyapunov.alpha, "lyapunov");
      p.lyapunov.lambda = num(l, "lambda", def.lyapunov.lambda, "lyapunov");
    }

    const ProblemSpec resized = with_modes(def, K);
    p.u0 = resized.u0;
    p.u1 = resized.u1;
    if (j.contains("initial")) {
      const auto& ic = j.at("initial");
      allow_keys(ic, "initial", {"u0_modes", "u1_modes"});
      if (ic.contains("u0_modes")) p.u0 = modes_field(ic, "u0_modes", K, "initial");
      if (ic.contains("u1_modes")) p.u1 = modes_field(ic, "u1_modes", K, "initial");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
}

ProblemSpec load_problem_file(const std::string& path) {
  return load_problem(read_json_file(path));
}

std::string config_digest(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace kal
