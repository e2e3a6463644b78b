// dvdp_survey: sweeps, tables and pictures for the forced asymmetric
// Duffing-Van der Pol oscillator.
//
// Exit status: 0 success, 2 configuration/usage error, 3 numeric failure
// (whatever was computed is still written, with status = partial).

#include <chrono>
#include <cstdio>
#include <ctime>
#include <deque>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>

#include <CLI11.hpp>

#include "dvdp/dvdp.hpp"
#include "survey_config.hpp"

namespace {

using namespace dvdp;
using survey::Config;
namespace fs = std::filesystem;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
                          "#e377c2", "#17becf", "#bcbd22", "#7f7f7f", "#393b79", "#637939"};

std::string color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

// Everything a command produces, kept in memory until the end so a numeric
// failure can still flush what exists and mark it.
class Outputs {
 public:
  Outputs(const Config& cfg, std::string command) : cfg_(cfg), command_(std::move(command)) {
    dir_ = cfg.str("out", ".");
    stem_ = cfg.str("name", command_);
    timestamp_ = cfg.flag("timestamp", true);
  }

  io::Csv& csv(const std::string& suffix, std::vector<std::string> cols) {
    csvs_.push_back({suffix, io::Csv(std::move(cols))});
    return csvs_.back().second;
  }
  void svg(const std::string& suffix, std::string text) { svgs_.push_back({suffix, std::move(text)}); }
  void fail(const std::string& why) { failures_.push_back(why); }
  bool failed() const { return !failures_.empty(); }

  std::vector<std::string> flush() {
    fs::create_directories(dir_);
    const std::string status = failures_.empty() ? "complete" : "partial: " + join(failures_);
    if (csvs_.empty() && failed()) csv("", {"status"}).row(std::vector<std::string>{"failed"});
    std::vector<std::string> written;
    for (auto& [suffix, c] : csvs_) {
      c.meta("tool", std::string("dvdp_survey ") + survey::kVersion);
      c.meta("command", command_);
      for (const auto& [k, v] : cfg_.echo()) c.meta("config." + k, v);
      c.meta("status", status);
      written.push_back(path(suffix, ".csv"));
      c.write(written.back());
    }
    for (auto& [suffix, text] : svgs_) {
      std::string head = "<!-- dvdp_survey " + std::string(survey::kVersion) + " command=" + command_;
      for (const auto& [k, v] : cfg_.echo()) head += " " + k + "=" + v;
      head += " status=" + status + " -->\n";
      if (timestamp_) head += "<!-- generated " + now_utc() + " -->\n";
      const auto nl = text.find('\n');
      text.insert(nl + 1, head);
      written.push_back(path(suffix, ".svg"));
      io::Csv::write_text(written.back(), text);
    }
    return written;
  }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
    return s;
  }
  static std::string now_utc() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
  }
  std::string path(const std::string& suffix, const char* ext) const {
    return (fs::path(dir_) / (stem_ + (suffix.empty() ? "" : "_" + suffix) + ext)).string();
  }

  const Config& cfg_;
  std::string command_, dir_, stem_;
  bool timestamp_ = true;
  std::deque<std::pair<std::string, io::Csv>> csvs_;
  std::vector<std::pair<std::string, std::string>> svgs_;
  std::vector<std::string> failures_;
};

std::vector<DomainTag> parse_domains(const std::string& s) {
  if (s.empty() || s == "all") return {DomainTag::G1_PLUS, DomainTag::G1_MINUS, DomainTag::G2};
  std::vector<DomainTag> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = survey::trim(tok);
    if (tok == "G1+") out.push_back(DomainTag::G1_PLUS);
    else if (tok == "G1-") out.push_back(DomainTag::G1_MINUS);
    else if (tok == "G2") out.push_back(DomainTag::G2);
    else throw ConfigError("unknown domain '" + tok + "' (G1+, G1-, G2 or all)");
  }
  return out;
}

flow::Variant parse_variant(const Config& c, const char* def) {
  const auto v = c.str("variant", def);
  if (v == "original") return flow::Variant::ORIGINAL;
  if (v == "transformed") return flow::Variant::TRANSFORMED;
  throw ConfigError("variant must be original or transformed");
}

ode::Tolerances sweep_tolerances() {
  ode::Tolerances t;
  t.abs = 1e-9;
  t.rel = 1e-9;
  return t;
}

// Densify a segment and keep the part inside a box.
std::vector<std::array<double, 2>> clip(const std::vector<std::pair<double, double>>& pl, double x0, double x1,
                                        double y0, double y1) {
  std::vector<std::array<double, 2>> out;
  for (std::size_t i = 0; i + 1 < pl.size(); ++i)
    for (int k = 0; k <= 200; ++k) {
      const double u = k / 200.0;
      const double x = pl[i].first + u * (pl[i + 1].first - pl[i].first);
      const double y = pl[i].second + u * (pl[i + 1].second - pl[i].second);
      if (x >= x0 && x <= x1 && y >= y0 && y <= y1) out.push_back({x, y});
    }
  return out;
}

std::vector<std::array<double, 2>> orbit_polyline(const EnergyLevel& L, int n = 400) {
  const double T = period(L);
  std::vector<std::array<double, 2>> pts;
  for (int i = 0; i <= n; ++i) {
    const auto p = orbit_solution(L, T * i / n);
    pts.push_back({p.x, p.y});
  }
  return pts;
}

io::Series figure_eight() {
  io::Series s;
  s.color = "#999999";
  s.label = "figure-eight";
  for (int i = 0; i <= 400; ++i) {
    const double u = -8.0 + 16.0 * i / 400;
    const double x = std::numbers::sqrt2 / std::cosh(u);
    s.pts.push_back({x, -x * std::tanh(u)});
  }
  const std::size_t n = s.pts.size();
  for (std::size_t i = 0; i < n; ++i) s.pts.push_back({-s.pts[i][0], -s.pts[i][1]});
  return s;
}

// ------------------------------------------------------------------ commands

std::string cmd_census_plane(const Config& c, Outputs& out, unsigned workers) {
  const auto [x0, x1] = c.range("p1_lo", "p1_hi", -1.5, 1.5);
  const auto [y0, y1] = c.range("p2_lo", "p2_hi", 0.0, 2.0);
  const int nx = c.resolution("p1_n", 61), ny = c.resolution("p2_n", 41);
  std::vector<std::pair<double, double>> cells;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) cells.push_back({x0 + (x1 - x0) * i / (nx - 1), y0 + (y1 - y0) * j / (ny - 1)});
  const auto& S = autonomous::default_scanner();
  const auto types = sweep::ordered_map(cells, [&](const std::pair<double, double>& p) { return S.count(p.first, p.second); },
                                        workers);

  auto& csv = out.csv("", {"p1", "p2", "i", "j", "k", "domain"});
  std::map<std::array<int, 3>, io::Series> by_type;
  for (std::size_t n = 0; n < cells.size(); ++n) {
    const auto& t = types[n];
    const int label = autonomous::domain_label(t, cells[n].first, cells[n].second);
    csv.row({io::fmt(cells[n].first), io::fmt(cells[n].second), std::to_string(t[0]), std::to_string(t[1]),
             std::to_string(t[2]), label ? "D" + std::to_string(label) : ""});
    by_type[t].pts.push_back({cells[n].first, cells[n].second});
  }
  std::vector<io::Series> ser;
  for (auto& [t, s] : by_type) {
    s.dots = true;
    s.width = 2.0;
    s.color = color(ser.size());
    s.label = "(" + std::to_string(t[0]) + "," + std::to_string(t[1]) + "," + std::to_string(t[2]) + ")";
    ser.push_back(std::move(s));
  }
  for (const auto& L : autonomous::bifurcation_lines(x0, x1)) {
    auto pts = clip(L.polyline, x0, x1, y0, y1);
    if (pts.size() < 2) continue;
    ser.push_back({std::move(pts), "#000000", 1.0, false, ""});
  }
  out.svg("", io::svg(ser, "cycle census on the (p1, p2) plane"));
  return std::to_string(cells.size()) + " cells, " + std::to_string(by_type.size()) + " census types";
}

std::string cmd_cycles(const Config& c, Outputs& out, unsigned workers) {
  struct Site {
    std::string label;
    double p1, p2;
  };
  std::vector<Site> sites;
  if (c.str("domains") == "all") {
    for (const auto& [id, pr] : autonomous::locate_domain_samples())
      sites.push_back({"D" + std::to_string(id), pr.p1, pr.p2});
  } else {
    sites.push_back({"point", c.num("p1"), c.num("p2")});
  }
  const auto cen = sweep::ordered_map(sites, [](const Site& s) { return autonomous::find_cycles(s.p1, s.p2); },
                                      workers);
  auto& csv = out.csv("", {"site", "p1", "p2", "i", "j", "k", "domain", "rho", "h", "double_root", "stable"});
  std::size_t total = 0;
  for (std::size_t n = 0; n < sites.size(); ++n) {
    const auto& s = sites[n];
    std::vector<io::Series> ser{figure_eight()};
    for (const auto& cy : cen[n].cycles) {
      const auto L = level_from_rho(cy.rho, cy.domain);
      csv.row({s.label, io::fmt(s.p1), io::fmt(s.p2), std::to_string(cen[n].i), std::to_string(cen[n].j),
               std::to_string(cen[n].k), to_string(cy.domain), io::fmt(cy.rho), io::fmt(L.h),
               cy.double_root ? "1" : "0", cy.stable ? "1" : "0"});
      ser.push_back({orbit_polyline(L), cy.stable ? "#1f77b4" : "#d62728", 1.5, false, ""});
      ++total;
    }
    if (cen[n].cycles.empty())
      csv.row({s.label, io::fmt(s.p1), io::fmt(s.p2), "0", "0", "0", "", "nan", "nan", "", ""});
    ser.push_back({{{-1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}}, "#000000", 2.5, true, ""});
    out.svg(sites.size() > 1 ? s.label : "", io::svg(ser, s.label + ": limit cycles (blue stable, red unstable)"));
  }
  return std::to_string(sites.size()) + " sites, " + std::to_string(total) + " cycles";
}

// Pendulum portrait on the cylinder, v wrapped to one period.
std::vector<io::Series> pendulum_picture(const resonance::PendulumModel& m) {
  const double per = 2.0 * std::numbers::pi / m.p;
  const double w2 = std::abs(m.b * m.p3 * m.A) * m.p + std::abs(m.b * m.B);
  const double t_max = w2 > 0 ? 6.0 * 2.0 * std::numbers::pi / std::sqrt(w2) : 10.0;
  std::vector<io::Series> ser;
  std::size_t k = 0;
  for (const auto& tr : resonance::pendulum_trajectories(m, 24, t_max, t_max / 400)) {
    io::Series s;
    s.color = color(k++);
    for (const auto& p : tr) {
      const double v = p[0] - per * std::floor(p[0] / per);
      if (!s.pts.empty() && std::abs(v - s.pts.back()[0]) > 0.5 * per) {
        ser.push_back(s);
        s.pts.clear();
      }
      s.pts.push_back({v, p[1]});
    }
    ser.push_back(std::move(s));
  }
  return ser;
}

std::string cmd_resonance(const Config& c, Outputs& out, unsigned workers) {
  const auto P = c.params(true);
  const int p_max = c.integer("p_max", 5), q = c.integer("q", 1);
  if (p_max < 1 || q < 1) throw ConfigError("p_max and q must be positive");
  const bool portrait = c.flag("portrait", false);
  struct Job {
    DomainTag d;
    int p;
  };
  std::vector<Job> jobs;
  for (auto d : parse_domains(c.str("domains", "all")))
    for (int p = 1; p <= p_max; ++p)
      if (std::gcd(p, q) == 1) jobs.push_back({d, p});
  struct Res {
    std::optional<resonance::ResonanceZone> z;
    std::string note;
  };
  const auto rs = sweep::ordered_map(jobs, [&](const Job& j) {
    Res r;
    try {
      r.z = resonance::make_zone(resonance::ResonancePair(j.p, q), P, j.d);
    } catch (const NoResonance& e) {
      r.note = e.what();
    }
    return r;
  }, workers);

  auto& csv = out.csv("", {"domain", "p", "q", "rho", "rho_c", "omega", "b", "b_closed", "sigma", "sigma_quadrature",
                           "A", "B", "p3A", "window", "classification"});
  int zones = 0;
  for (std::size_t n = 0; n < jobs.size(); ++n) {
    const auto& j = jobs[n];
    if (!rs[n].z) continue;  // no level at this frequency
    const auto& z = *rs[n].z;
    const auto m = resonance::pendulum_model(z, P.p3, P.eps);
    csv.row({to_string(j.d), std::to_string(j.p), std::to_string(q), io::fmt(z.level.rho), io::fmt(z.level.rho_c),
             io::fmt(z.omega), io::fmt(z.coeffs.b), io::fmt(z.coeffs.b_closed), io::fmt(z.coeffs.sigma_closed),
             io::fmt(z.coeffs.sigma_quadrature), io::fmt(z.coeffs.A), io::fmt(z.B_value), io::fmt(P.p3 * z.coeffs.A),
             io::fmt(m.window()), to_string(z.classification)});
    ++zones;
    if (portrait && z.coeffs.cos_term && P.p3 * z.coeffs.A != 0.0) {
      const std::string tag = std::string(to_string(j.d)) + "_p" + std::to_string(j.p);
      out.svg(tag, io::svg(pendulum_picture(m), tag + ": " + to_string(z.classification)));
    }
  }
  return std::to_string(zones) + " zones";
}

std::string cmd_melnikov(const Config& c, Outputs& out, unsigned) {
  const auto P = c.params(false);
  if (!(P.p4 > 0.0)) throw ConfigError("melnikov needs p4 > 0");
  auto& sum = out.csv("", {"side", "mean", "amplitude", "verdict", "quadrature_mean", "quadrature_amplitude",
                           "quadrature_verdict", "p3_star"});
  std::vector<io::Series> ser;
  auto& samples = out.csv("samples", {"t0", "right", "left", "right_quadrature", "left_quadrature"});
  std::array<melnikov::MelnikovResult, 2> a, b;
  int k = 0;
  for (LoopSide side : {LoopSide::RIGHT, LoopSide::LEFT}) {
    a[k] = melnikov::melnikov(P, side);
    b[k] = melnikov::melnikov_quadrature(P, side);
    sum.row({to_string(side), io::fmt(a[k].mean), io::fmt(a[k].amplitude), melnikov::to_string(a[k].verdict),
             io::fmt(b[k].mean), io::fmt(b[k].amplitude), melnikov::to_string(b[k].verdict),
             io::fmt(melnikov::threshold_p3_star(P.p1, P.p2, P.p4, side))});
    ++k;
  }
  const double T = 2.0 * std::numbers::pi / P.p4;
  std::array<io::Series, 4> s;
  for (int i = 0; i <= 200; ++i) {
    const double t = T * i / 200;
    const double v[4] = {a[0](t, P.p4), a[1](t, P.p4), b[0](t, P.p4), b[1](t, P.p4)};
    samples.row({t, v[0], v[1], v[2], v[3]});
    for (int j = 0; j < 4; ++j) s[j].pts.push_back({t, v[j]});
  }
  const char* names[4] = {"right", "left", "right (quadrature)", "left (quadrature)"};
  for (int j = 0; j < 4; ++j) {
    s[j].color = color(j);
    s[j].label = names[j];
    ser.push_back(s[j]);
  }
  ser.push_back({{{0.0, 0.0}, {T, 0.0}}, "#000000", 0.5, false, ""});
  out.svg("", io::svg(ser, "first-order distance between the loop separatrices"));
  return std::string("right ") + melnikov::to_string(a[0].verdict) + ", left " + melnikov::to_string(a[1].verdict);
}

std::string cmd_poincare(const Config& c, Outputs& out, unsigned workers) {
  const auto P = c.params(false);
  const auto v = parse_variant(c, "original");
  const flow::StroboscopicMap M(P, v, sweep_tolerances());
  const auto [x0, x1] = c.range("x_lo", "x_hi", -1.6, 1.6);
  const int ns = c.resolution("seeds", 16);
  const int it = c.integer("iterates", 300);
  if (it < 1) throw ConfigError("iterates must be positive");
  std::vector<double> seeds;
  for (int i = 0; i < ns; ++i) seeds.push_back(x0 + (x1 - x0) * i / (ns - 1));
  struct Orbit {
    std::vector<ode::State> pts;
    std::string note;
  };
  const auto orbits = sweep::ordered_map(seeds, [&](double x) {
    Orbit o;
    ode::State s{x, 0.0};
    o.pts.push_back(s);
    try {
      for (int n = 0; n < it; ++n) {
        s = M.forward(s);
        o.pts.push_back(s);
        if (std::hypot(s[0], s[1]) > 1e3) throw NonFinite("orbit left the plotting region");
      }
    } catch (const Error& e) {
      o.note = e.what();
    }
    return o;
  }, workers);
  auto& csv = out.csv("", {"seed", "n", "x", "y"});
  std::vector<io::Series> ser{figure_eight()};
  int escaped = 0;
  for (std::size_t k = 0; k < orbits.size(); ++k) {
    io::Series s;
    s.dots = true;
    s.width = 0.8;
    s.color = color(k);
    for (std::size_t n = 0; n < orbits[k].pts.size(); ++n) {
      csv.row({std::to_string(k), std::to_string(n), io::fmt(orbits[k].pts[n][0]), io::fmt(orbits[k].pts[n][1])});
      s.pts.push_back({orbits[k].pts[n][0], orbits[k].pts[n][1]});
    }
    escaped += !orbits[k].note.empty();
    ser.push_back(std::move(s));
  }
  out.svg("", io::svg(ser, std::string("stroboscopic map (") + flow::to_string(v) + ")"));
  return std::to_string(ns) + " seeds, " + std::to_string(escaped) + " escaped";
}

std::string cmd_portrait(const Config& c, Outputs& out, unsigned workers) {
  const auto P = c.params(false);
  const auto v = parse_variant(c, "original");
  const auto [x0, x1] = c.range("x_lo", "x_hi", -1.6, 1.6);
  const int ns = c.resolution("seeds", 16);
  const double t_end = c.num("t_end", 40.0);
  if (!(t_end > 0)) throw ConfigError("t_end must be positive");
  std::vector<double> seeds;
  for (int i = 0; i < ns; ++i) seeds.push_back(x0 + (x1 - x0) * i / (ns - 1));
  struct Traj {
    std::vector<std::array<double, 3>> pts;
    std::string note;
  };
  const auto trs = sweep::ordered_map(seeds, [&](double x) {
    Traj t;
    try {
      flow::integrate_dense({x, 0.0}, 0.0, t_end, P, v, t.pts, sweep_tolerances());
    } catch (const Error& e) {
      t.note = e.what();
    }
    return t;
  }, workers);
  auto& csv = out.csv("", {"seed", "t", "x", "y"});
  std::vector<io::Series> ser{figure_eight()};
  for (std::size_t k = 0; k < trs.size(); ++k) {
    io::Series s;
    s.color = color(k);
    for (const auto& p : trs[k].pts) {
      csv.row({std::to_string(k), io::fmt(p[0]), io::fmt(p[1]), io::fmt(p[2])});
      s.pts.push_back({p[1], p[2]});
    }
    ser.push_back(std::move(s));
  }
  out.svg("", io::svg(ser, "phase portrait"));
  return std::to_string(ns) + " trajectories";
}

std::string cmd_separatrix(const Config& c, Outputs& out, unsigned workers) {
  const auto P = c.params(false);
  const auto v = parse_variant(c, "transformed");
  const flow::StroboscopicMap M(P, v);
  const auto fp = flow::find_saddle(M);
  flow::GrowOptions go;
  go.spacing = c.num("spacing", go.spacing);
  go.max_points = static_cast<std::size_t>(c.resolution("max_points", static_cast<int>(go.max_points)));
  const double budget = c.num("budget", 6.0);
  if (!(budget > 0) || !(go.spacing > 0)) throw ConfigError("budget and spacing must be positive");

  struct Job {
    flow::ManifoldSide side;
    int sign;
  };
  const std::vector<Job> jobs{{flow::ManifoldSide::UNSTABLE, 1},
                              {flow::ManifoldSide::UNSTABLE, -1},
                              {flow::ManifoldSide::STABLE, 1},
                              {flow::ManifoldSide::STABLE, -1}};
  struct Grown {
    std::optional<flow::ManifoldBranch> br;
    std::string note;
  };
  const auto grown = sweep::ordered_map(jobs, [&](const Job& j) {
    Grown g;
    try {
      g.br = flow::grow_manifold(M, fp, j.side, j.sign, budget, go);
    } catch (const Error& e) {
      g.note = e.what();
    }
    return g;
  }, workers);

  auto& csv = out.csv("", {"branch", "i", "x", "y"});
  std::vector<io::Series> ser{figure_eight()};
  std::map<std::string, const flow::ManifoldBranch*> named;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const bool u = jobs[k].side == flow::ManifoldSide::UNSTABLE;
    if (!grown[k].br) {
      out.fail(std::string(u ? "unstable" : "stable") + " branch: " + grown[k].note);
      continue;
    }
    const auto& b = *grown[k].br;
    const bool right = b.polyline.size() > 1 && b.polyline[1][0] > fp.z[0];
    const std::string name = std::string(u ? "u" : "s") + (right ? "R" : "L");
    named[name] = &b;
    io::Series s;
    s.color = u ? "#d62728" : "#1f77b4";
    s.label = name;
    for (std::size_t i = 0; i < b.polyline.size(); ++i) {
      csv.row({name, std::to_string(i), io::fmt(b.polyline[i][0]), io::fmt(b.polyline[i][1])});
      s.pts.push_back({b.polyline[i][0], b.polyline[i][1]});
    }
    ser.push_back(std::move(s));
  }
  ser.push_back({{{fp.z[0], fp.z[1]}}, "#000000", 3.0, true, ""});
  out.svg("", io::svg(ser, "separatrices of the saddle fixed point (red unstable, blue stable)"));

  // Verdicts: geometric crossings of the grown curves and, independently, the
  // phase profile of the energy splitting at the loop vertices.
  auto& rep = out.csv("splitting", {"pair", "crossings", "min_abs_distance", "geometric_verdict", "profile_max",
                                    "profile_min", "profile_verdict", "note"});
  const std::vector<flow::BranchPair> pairs{flow::BranchPair::RR, flow::BranchPair::LL, flow::BranchPair::RL,
                                            flow::BranchPair::LR};
  flow::ProfileOptions po;
  po.phases = c.integer("phases", 24);
  po.refine_extrema = false;
  struct Prof {
    std::optional<flow::PhaseProfile> pr;
    std::string note;
  };
  const auto profs = sweep::ordered_map(pairs, [&](flow::BranchPair bp) {
    Prof p;
    if (v != flow::Variant::TRANSFORMED) {
      p.note = "profile needs the transformed variant";
      return p;
    }
    try {
      p.pr = flow::splitting_profile(P, bp, po);
    } catch (const Error& e) {
      p.note = e.what();
    }
    return p;
  }, workers);
  std::string summary;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const std::string nm = flow::to_string(pairs[k]);
    const auto iu = named.find(std::string("u") + char(std::toupper(nm[0])));
    const auto is = named.find(std::string("s") + char(std::toupper(nm[1])));
    std::vector<std::string> row{nm, "", "nan", "", "nan", "nan", "", ""};
    std::string note = profs[k].note;
    if (iu != named.end() && is != named.end()) {
      try {
        const auto r = flow::splitting_report(*iu->second, *is->second);
        row[1] = std::to_string(r.crossings);
        row[2] = io::fmt(r.min_abs_distance);
        row[3] = flow::to_string(r.verdict);
      } catch (const Error& e) {
        note += (note.empty() ? "" : "; ") + std::string(e.what());
      }
    }
    if (profs[k].pr) {
      row[4] = io::fmt(profs[k].pr->max);
      row[5] = io::fmt(profs[k].pr->min);
      row[6] = flow::to_string(profs[k].pr->verdict);
      summary += nm + "=" + row[6] + " ";
    }
    for (auto& ch : note)
      if (ch == ',' || ch == '\n') ch = ' ';
    row[7] = note;
    rep.row(row);
  }
  return "saddle (" + io::fmt(fp.z[0]) + ", " + io::fmt(fp.z[1]) + ") " + summary;
}

std::string cmd_diagram(const Config& c, Outputs& out, unsigned workers) {
  const auto P = c.params(false);
  if (!(P.p4 > 0.0)) throw ConfigError("diagram needs p4 > 0");
  const double p2_max = c.num("p2_max", 3.0);
  if (!(p2_max > 0)) throw ConfigError("p2_max must be positive");
  const bool analytic = c.flag("analytic", true), numeric = c.flag("numeric", false);
  if (!analytic && !numeric) throw ConfigError("diagram needs analytic and/or numeric");

  auto& csv = out.csv("", {"label", "kind", "pair", "p2", "p3", "note"});
  auto& cross = out.csv("intersections", {"a", "b", "p2", "p3"});
  std::vector<io::Series> ser;
  const auto lines = melnikov::analytic_tangency_lines(P.p1, P.p4, P.eps, p2_max);
  char fam = lines.empty() ? 'T' : lines.front().label[0];
  int count = 0;
  if (analytic) {
    for (const auto& ln : lines) {
      std::string sides;
      for (auto s : ln.sides) sides += (sides.empty() ? "" : "+") + std::string(to_string(s));
      for (double p2 : {ln.p2_lo, ln.p2_hi}) csv.row({ln.label, "analytic", sides, io::fmt(p2), io::fmt(ln.p3(p2)), ""});
      ser.push_back({{{ln.p2_lo, ln.p3(ln.p2_lo)}, {ln.p2_hi, ln.p3(ln.p2_hi)}}, color(ser.size()), 1.5, false,
                     ln.label});
      ++count;
    }
    for (std::size_t i = 0; i < lines.size(); ++i)
      for (std::size_t j = i + 1; j < lines.size(); ++j) {
        const auto &a = lines[i], &b = lines[j];
        if (a.slope == b.slope) continue;
        const double p2 = (b.intercept - a.intercept) / (a.slope - b.slope);
        if (p2 < std::max(a.p2_lo, b.p2_lo) || p2 > std::min(a.p2_hi, b.p2_hi)) continue;
        cross.row({a.label, b.label, io::fmt(p2), io::fmt(a.p3(p2))});
      }
  }
  if (numeric) {
    // Curves traced on the map for the cross pairings. Each one touches
    // p3 = 0 at a big-loop point of the autonomous equation, where it is cut
    // into separate branches; the own-loop pairings are the analytic lines.
    if (!(P.eps > 0)) throw ConfigError("numeric diagram needs eps > 0");
    const auto [p2_lo, p2_hi] = c.range("p2_lo", "p2_hi", 0.05, p2_max);
    const auto [p3_lo, p3_hi] = c.range("p3_lo", "p3_hi", 0.0, 2.0);
    const int n = c.resolution("p2_n", 24);
    flow::ProfileOptions po;
    po.phases = c.integer("phases", 12);
    const double p3_tol = c.num("p3_tol", 1e-3);
    std::vector<double> cuts;
    if (p2_hi > 0)
      for (double b : flow::locate_big_loops(P.p1, P.eps, std::max(p2_lo, 1e-3), p2_hi)) cuts.push_back(b);
    if (p2_lo < 0)
      for (double b : flow::locate_big_loops(P.p1, P.eps, std::max(-p2_hi, 1e-3), -p2_lo)) cuts.push_back(-b);
    std::sort(cuts.begin(), cuts.end());
    for (double b : cuts) cross.row({"big-loop", "p3=0", io::fmt(b), "0"});

    const std::vector<flow::BranchPair> pairs{flow::BranchPair::RL, flow::BranchPair::LR};
    std::vector<std::pair<flow::BranchPair, double>> cells;
    for (auto bp : pairs)
      for (int i = 0; i < n; ++i) cells.push_back({bp, p2_lo + (p2_hi - p2_lo) * i / (n - 1)});
    const auto pts = sweep::ordered_map(cells, [&](const std::pair<flow::BranchPair, double>& cell) {
      return flow::trace_tangency_curve(P.p1, P.p4, P.eps, cell.first, {cell.second}, p3_lo, p3_hi, po, p3_tol)
          .points.front();
    }, workers);
    for (std::size_t k = 0; k < cells.size(); k += n) {
      std::vector<flow::TangencyPoint> seg;
      auto emit = [&] {
        if (std::none_of(seg.begin(), seg.end(), [](const auto& t) { return t.found; })) {
          for (const auto& tp : seg)
            csv.row({"", "numeric", flow::to_string(cells[k].first), io::fmt(tp.p2), "nan", tp.note});
          seg.clear();
          return;
        }
        const std::string label = std::string(1, fam) + std::to_string(++count);
        io::Series s;
        s.color = color(ser.size());
        s.label = label;
        const flow::TangencyPoint* prev = nullptr;
        for (const auto& tp : seg) {
          csv.row({label, "numeric", flow::to_string(cells[k].first), io::fmt(tp.p2), io::fmt(tp.p3), tp.note});
          if (!tp.found) continue;
          s.pts.push_back({tp.p2, tp.p3});
          if (prev)
            for (const auto& ln : lines) {
              const double a = prev->p3 - ln.p3(prev->p2), b = tp.p3 - ln.p3(tp.p2);
              if ((a > 0) == (b > 0) || prev->p2 < ln.p2_lo || tp.p2 > ln.p2_hi) continue;
              const double u = a / (a - b);
              const double x = prev->p2 + u * (tp.p2 - prev->p2);
              cross.row({label, ln.label, io::fmt(x), io::fmt(ln.p3(x))});
            }
          prev = &tp;
        }
        ser.push_back(std::move(s));
        seg.clear();
      };
      std::size_t next_cut = 0;
      for (int i = 0; i < n; ++i) {
        auto tp = pts[k + i];
        for (auto& ch : tp.note)
          if (ch == ',') ch = ' ';
        while (next_cut < cuts.size() && cuts[next_cut] < tp.p2) {
          if (!seg.empty()) emit();
          ++next_cut;
        }
        seg.push_back(tp);
      }
      if (!seg.empty()) emit();
    }
  }
  out.svg("", io::svg(ser, "tangency curves on the (p2, p3) plane"));
  return std::to_string(count) + " curves";
}

using Command = std::string (*)(const Config&, Outputs&, unsigned);

const std::map<std::string, std::pair<Command, const char*>>& commands() {
  static const std::map<std::string, std::pair<Command, const char*>> m = {
      {"census-plane", {cmd_census_plane, "limit-cycle census over a (p1, p2) grid"}},
      {"cycles", {cmd_cycles, "limit cycles at one point, or at a probe in every domain (domains=all)"}},
      {"resonance", {cmd_resonance, "resonance zones and their classification"}},
      {"melnikov", {cmd_melnikov, "first-order separatrix distance for both loops"}},
      {"poincare", {cmd_poincare, "iterates of the stroboscopic map"}},
      {"separatrix", {cmd_separatrix, "stable and unstable curves of the saddle fixed point"}},
      {"portrait", {cmd_portrait, "trajectories of the flow"}},
      {"diagram", {cmd_diagram, "tangency curves on the (p2, p3) plane"}},
  };
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sweeps and pictures for the forced asymmetric Duffing-Van der Pol oscillator"};
  app.set_version_flag("--version", std::string(survey::kVersion));
  std::string config_file, repro, out_dir, eps, p1, p2, p3, p4;
  std::vector<std::string> sets;
  unsigned workers = 0;
  bool no_timestamp = false, list = false;
  app.add_option("-c,--config", config_file, "flat key = value file");
  app.add_option("-s,--set", sets, "override, key=value (repeatable)");
  app.add_option("--repro", repro, "named preset (see --list-presets)");
  app.add_option("-o,--out", out_dir, "output directory");
  app.add_option("-j,--workers", workers, "worker threads (default: DVDP_WORKERS or all cores)");
  app.add_option("--eps", eps);
  app.add_option("--p1", p1);
  app.add_option("--p2", p2);
  app.add_option("--p3", p3);
  app.add_option("--p4", p4);
  app.add_flag("--no-timestamp", no_timestamp, "omit the generation time from SVG files");
  app.add_flag("--list-presets", list, "print the presets and exit");
  std::map<std::string, CLI::App*> subs;
  bool portrait = false, analytic = false, numeric = false;
  for (const auto& [name, cmd] : commands()) {
    auto* s = app.add_subcommand(name, cmd.second);
    s->fallthrough();
    subs[name] = s;
  }
  subs["resonance"]->add_flag("--portrait", portrait, "pendulum portraits for every zone");
  subs["diagram"]->add_flag("--analytic", analytic, "first-order tangency lines");
  subs["diagram"]->add_flag("--numeric", numeric, "curves traced on the map");
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (list) {
    for (const auto& p : survey::presets()) std::cout << p.name << "  " << p.summary << "\n";
    return 0;
  }

  try {
    Config cfg;
    if (!repro.empty())
      for (const auto& [k, v] : survey::find_preset(repro).entries) cfg.set(k, v);
    if (!config_file.empty()) cfg.load_file(config_file);
    for (const auto& kv : sets) cfg.assign(kv);
    for (const auto& [k, v] : {std::pair<const char*, std::string*>{"eps", &eps}, {"p1", &p1}, {"p2", &p2},
                               {"p3", &p3}, {"p4", &p4}, {"out", &out_dir}})
      if (!v->empty()) cfg.set(k, *v);
    if (workers) cfg.set("workers", std::to_string(workers));
    if (no_timestamp) cfg.set("timestamp", "false");
    if (portrait) cfg.set("portrait", "true");
    if (analytic || numeric) {
      cfg.set("analytic", analytic ? "true" : "false");
      cfg.set("numeric", numeric ? "true" : "false");
    }
    for (const auto& [name, s] : subs)
      if (s->parsed()) cfg.set("command", name);
    const std::string command = cfg.str("command");
    if (command.empty()) {
      std::cerr << "no command given (subcommand, command= in the config, or --repro)\n\n" << app.help();
      return 2;
    }
    const auto it = commands().find(command);
    if (it == commands().end()) throw ConfigError("unknown command '" + command + "'");
    const unsigned nw = sweep::worker_count(static_cast<unsigned>(cfg.integer("workers", 0)));

    Outputs out(cfg, command);
    const auto t0 = std::chrono::steady_clock::now();
    int rc = 0;
    std::string summary;
    try {
      summary = it->second.first(cfg, out, nw);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      out.fail(e.what());
    }
    if (out.failed()) rc = 3;
    for (const auto& f : out.flush()) std::cout << "wrote " << f << "\n";
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << command << ": " << (summary.empty() ? "failed" : summary) << " (" << nw << " workers, "
              << std::fixed << std::setprecision(2) << dt << " s)\n";
    if (rc) std::cerr << "numeric failure; outputs marked partial\n";
    return rc;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}
