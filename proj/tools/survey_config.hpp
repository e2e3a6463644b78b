#pragma once

// Flat key = value configuration for dvdp_survey, with named presets for the
// reference pictures. Later sources override earlier ones:
//   command defaults < preset < config file < --set k=v < dedicated flags.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dvdp/errors.hpp"
#include "dvdp/params.hpp"

namespace survey {

inline constexpr const char* kVersion = "1.0.0";

using dvdp::ConfigError;

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> k = {
      "command", "eps", "p1", "p2", "p3", "p4", "out", "name", "workers", "timestamp",
      // grids
      "p1_lo", "p1_hi", "p1_n", "p2_lo", "p2_hi", "p2_n", "p3_lo", "p3_hi", "p2_max",
      // resonance
      "p_max", "q", "domains", "portrait",
      // flow
      "variant", "iterates", "seeds", "x_lo", "x_hi", "t_end", "budget", "spacing", "max_points", "phases",
      // melnikov / diagram
      "side", "analytic", "numeric", "p3_tol"};
  return k;
}

class Config {
 public:
  void set(const std::string& key, const std::string& value) {
    const std::string k = trim(key);
    if (!known_keys().count(k)) throw ConfigError("unknown key '" + k + "'");
    values_[k] = trim(value);
  }

  void set_default(const std::string& key, const std::string& value) {
    if (!values_.count(key)) set(key, value);
  }

  void assign(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + kv + "'");
    set(kv.substr(0, eq), kv.substr(eq + 1));
  }

  void load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file " + path);
    std::string line;
    int n = 0;
    while (std::getline(f, line)) {
      ++n;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line = trim(line);
      if (line.empty()) continue;
      try {
        assign(line);
      } catch (const ConfigError& e) {
        throw ConfigError(path + ":" + std::to_string(n) + ": " + e.what());
      }
    }
  }

  bool has(const std::string& k) const { return values_.count(k) > 0; }

  std::string str(const std::string& k, const std::string& def = "") const {
    auto it = values_.find(k);
    return it == values_.end() ? def : it->second;
  }

  double num(const std::string& k, double def = NAN) const {
    auto it = values_.find(k);
    if (it == values_.end()) {
      if (std::isnan(def)) throw ConfigError("missing required key '" + k + "'");
      return def;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(it->second, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != it->second.size() || !std::isfinite(v))
      throw ConfigError("key '" + k + "' is not a finite number: '" + it->second + "'");
    return v;
  }

  int integer(const std::string& k, int def) const {
    const double v = num(k, def);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("key '" + k + "' must be an integer");
    return static_cast<int>(v);
  }

  bool flag(const std::string& k, bool def) const {
    if (!has(k)) return def;
    std::string v = str(k);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + k + "' must be a boolean");
  }

  /// Grid resolution, at least 2.
  int resolution(const std::string& k, int def) const {
    const int n = integer(k, def);
    if (n < 2) throw ConfigError("resolution '" + k + "' must be >= 2");
    return n;
  }

  /// [lo, hi] with lo < hi.
  std::pair<double, double> range(const std::string& lo, const std::string& hi, double dlo, double dhi) const {
    const double a = num(lo, dlo), b = num(hi, dhi);
    if (!(a < b)) throw ConfigError("degenerate range " + lo + " .. " + hi);
    return {a, b};
  }

  dvdp::Params params(bool need_eps) const {
    dvdp::Params P{num("eps", 0.1), num("p1", 0.0), num("p2", 0.0), num("p3", 0.0), num("p4", 1.0)};
    try {
      P.validate();
    } catch (const dvdp::DomainError& e) {
      throw ConfigError(e.what());
    }
    if (need_eps && !(P.eps > 0.0)) throw ConfigError("this command needs eps > 0");
    return P;
  }

  /// Config echo for provenance. The worker count is left out on purpose:
  /// it never changes the numbers, and echoing it would break byte equality
  /// between serial and parallel runs.
  std::map<std::string, std::string> echo() const {
    auto out = values_;
    out.erase("workers");
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct Preset {
  std::string name;
  std::string summary;
  std::vector<std::pair<std::string, std::string>> entries;
};

inline const std::vector<Preset>& presets() {
  using E = std::vector<std::pair<std::string, std::string>>;
  auto sep = [](std::string eps, std::string p1, std::string p2, std::string p3) {
    return E{{"command", "separatrix"}, {"variant", "transformed"}, {"eps", eps}, {"p1", p1},
             {"p2", p2},               {"p3", p3},                  {"p4", "4"}};
  };
  auto res = [](std::string p2, std::string p3, std::string p4, std::string dom) {
    return E{{"command", "resonance"}, {"eps", "0.1"}, {"p1", "1"},       {"p2", p2},
             {"p3", p3},               {"p4", p4},     {"domains", dom}, {"portrait", "true"}};
  };
  auto dia = [](std::string p1) {
    return E{{"command", "diagram"}, {"eps", "0.12"}, {"p1", p1}, {"p4", "4"}, {"p2_max", "3"},
             {"analytic", "true"},   {"numeric", "true"}};
  };
  static const std::vector<Preset> v = [&] {
    std::vector<Preset> out;
    out.push_back({"fig4", "autonomous limit cycles at one probe point per domain",
                   {{"command", "cycles"}, {"domains", "all"}}});
    out.push_back({"fig5", "pendulum portraits of a partially passable zone", res("-0.02", "0.5", "2.5", "G1+")});
    out.push_back({"fig6a", "p=2 zone in the right loop, impassable", res("-0.1", "0.5", "2.5", "G1+")});
    out.push_back({"fig6b", "p=2 zone in the right loop, partially passable", res("-0.02", "0.5", "2.5", "G1+")});
    out.push_back({"fig6c", "p=3 zone outside the loops, impassable", res("0.03", "1", "3.36", "G2")});
    out.push_back({"fig6d", "p=3 zone outside the loops, partially passable", res("0.03", "1", "3", "G2")});
    out.push_back({"fig7", "two impassable zones (p=2, p=3) in the right loop",
                   {{"command", "poincare"}, {"variant", "original"}, {"eps", "0.01"}, {"p1", "-0.221"},
                    {"p2", "1.22"}, {"p3", "1"}, {"p4", "2.782"}, {"x_lo", "0.05"}, {"x_hi", "1.35"},
                    {"seeds", "24"}, {"iterates", "400"}}});
    out.push_back({"fig8a", "separatrices near the left-loop tangency, below",
                   sep("0.3", "0.7551195621", "0.053875454", "1.13")});
    out.push_back({"fig8b", "left-loop tangency", sep("0.3", "0.7551195621", "0.053875454", "1.7")});
    out.push_back({"fig8c", "separatrices near the left-loop tangency, above",
                   sep("0.3", "0.7551195621", "0.053875454", "2.83")});
    out.push_back({"fig9a", "big-loop regime, right unstable meets left stable", sep("0.1", "0.78549", "1.6", "1.02")});
    out.push_back({"fig9b", "big-loop regime, left unstable meets right stable", sep("0.1", "0.78549", "-1.6", "1.02")});
    out.push_back({"fig10a", "tangency configuration", sep("0.175", "0.78549", "1.6", "1.02")});
    out.push_back({"fig10b", "tangency configuration", sep("0.175", "0.78549", "-1.6", "1.02")});
    out.push_back({"fig10c", "tangency configuration", sep("0.175", "0.7850145", "0.5", "0.57")});
    out.push_back({"fig10d", "tangency configuration", sep("0.175", "0.7850145", "-0.5", "0.57")});
    const char* f11[10][3] = {{"0.7", "0.3", "3"},   {"0.86", "0.2", "4.55"}, {"0.6", "0.1", "2.34"},
                              {"0.86", "0.25", "2.96"}, {"1", "0.1", "2.32"},   {"0.7", "0", "2"},
                              {"0.8", "0.2", "3.34"},  {"0.9", "0", "1.98"},   {"0.65", "0.35", "2.82"},
                              {"0.9", "0.3", "2.97"}};
    for (int i = 0; i < 10; ++i)
      out.push_back({std::string("fig11") + char('a' + i), "tangency configuration",
                     sep("0.12", f11[i][0], f11[i][1], f11[i][2])});
    out.push_back({"fig12", "(p2, p3) diagram at p1 = 0.78", dia("0.78")});
    out.push_back({"fig13", "(p2, p3) diagram at p1 = 0.8", dia("0.8")});
    out.push_back({"fig14", "(p2, p3) diagram at p1 = 0.82", dia("0.82")});
    return out;
  }();
  return v;
}

inline const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace survey
