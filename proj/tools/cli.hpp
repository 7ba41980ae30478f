#pragma once

// Command-line front end: evolve | transmit | sweep | verify.
//
// Exit codes: 0 ok, 2 validation, 3 numeric failure, 4 verification failure.
// Flags override keys of an optional --config JSON file (flat object, keys
// spelled like the long flags without dashes), which override defaults.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cgp/cgp.hpp"

namespace cgp::cli {

enum ExitCode : int { ok = 0, validation_failure = 2, numeric_failure = 3, verification_failure = 4 };

using json = nlohmann::json;

/// Shortest text that reads back to the same double, 17 significant digits.
inline std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return {buf, res.ptr};
}

inline std::string fmt(std::size_t v) { return std::to_string(v); }

// Options bound to CLI11 plus their config-file setters.
class Binder {
 public:
  explicit Binder(CLI::App* app) : app_(app) {}

  CLI::Option* number(const std::string& name, std::optional<double>& target,
                      const std::string& help) {
    auto* opt = app_->add_option("--" + name, target, help);
    setters_[name] = {opt, [&target, name](const json& j) {
                        if (!j.is_number()) throw domain_error("config key '" + name + "' must be a number");
                        target = j.get<double>();
                      }};
    return opt;
  }

  CLI::Option* count(const std::string& name, std::optional<std::size_t>& target,
                     const std::string& help) {
    auto* opt = app_->add_option("--" + name, target, help);
    setters_[name] = {opt, [&target, name](const json& j) {
                        if (!j.is_number_unsigned()) {
                          throw domain_error("config key '" + name + "' must be a non-negative integer");
                        }
                        target = j.get<std::size_t>();
                      }};
    return opt;
  }

  CLI::Option* text(const std::string& name, std::optional<std::string>& target,
                    const std::string& help) {
    auto* opt = app_->add_option("--" + name, target, help);
    setters_[name] = {opt, [&target, name](const json& j) {
                        if (!j.is_string()) throw domain_error("config key '" + name + "' must be a string");
                        target = j.get<std::string>();
                      }};
    return opt;
  }

  CLI::Option* list(const std::string& name, std::vector<double>& target, const std::string& help) {
    auto* opt = app_->add_option("--" + name, target, help)->delimiter(',');
    setters_[name] = {opt, [&target, name](const json& j) {
                        target.clear();
                        if (j.is_number()) {
                          target.push_back(j.get<double>());
                          return;
                        }
                        if (!j.is_array()) throw domain_error("config key '" + name + "' must be a number or array");
                        for (const auto& v : j) {
                          if (!v.is_number()) throw domain_error("config key '" + name + "' must hold numbers");
                          target.push_back(v.get<double>());
                        }
                      }};
    return opt;
  }

  CLI::Option* flag(const std::string& name, bool& target, const std::string& help) {
    auto* opt = app_->add_flag("--" + name, target, help);
    setters_[name] = {opt, [&target, name](const json& j) {
                        if (!j.is_boolean()) throw domain_error("config key '" + name + "' must be a boolean");
                        target = j.get<bool>();
                      }};
    return opt;
  }

  /// Applies config entries whose flags were not given on the command line.
  void apply(const json& cfg) const {
    if (!cfg.is_object()) throw domain_error("config file must hold a flat JSON object");
    for (const auto& [key, value] : cfg.items()) {
      if (key == "config") continue;
      const auto it = setters_.find(key);
      if (it == setters_.end()) throw domain_error("unknown config key '" + key + "'");
      if (it->second.first->count() == 0) it->second.second(value);
    }
  }

 private:
  CLI::App* app_;
  std::map<std::string, std::pair<CLI::Option*, std::function<void(const json&)>>> setters_;
};

struct CommonArgs {
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<double> rel_tol;
  std::optional<std::size_t> seed;  // reserved
  std::optional<std::string> config;

  void bind(Binder& b) {
    b.text("out", out, "Output path (standard output when omitted)");
    b.text("format", format, "Output format; only csv");
    b.number("rel-tol", rel_tol, "Relative tolerance of the T(A,B) quadrature");
    b.count("seed", seed, "Reserved; accepted and ignored");
    b.text("config", config, "Flat JSON file with defaults for any long flag");
  }

  void check() const {
    if (format && *format != "csv") throw domain_error("unsupported --format '" + *format + "'");
  }
  [[nodiscard]] double tol() const { return rel_tol.value_or(default_rel_tol); }
};

struct PacketArgs {
  std::optional<double> s, rho, xc, p0, Z, mass, hbar;

  void bind(Binder& b) {
    b.number("s", s, "Width parameter s");
    b.number("rho", rho, "Correlation parameter rho (default 0)");
    b.number("xc", xc, "Initial mean position x_c");
    b.number("p0", p0, "Mean momentum magnitude p0 (packet moves towards -x)");
    b.number("Z", Z, "Barrier strength Z >= 0");
    b.number("mass", mass, "Particle mass; with --hbar, inputs are in physical units");
    b.number("hbar", hbar, "Planck constant for physical-unit inputs");
  }

  [[nodiscard]] bool physical_units() const { return mass.has_value() || hbar.has_value(); }

  static double need(const std::optional<double>& v, const char* name) {
    if (!v) throw domain_error(std::string("missing required --") + name);
    return *v;
  }

  /// Natural-unit packet and barrier; required flags must be present.
  [[nodiscard]] NaturalSetup natural(bool need_xc = true) const {
    PhysicalSetup phys;
    phys.mass = mass.value_or(1.0);
    phys.hbar = hbar.value_or(1.0);
    phys.packet.s = need(s, "s");
    phys.packet.rho = rho.value_or(0.0);
    phys.packet.x_c = need_xc ? need(xc, "xc") : xc.value_or(phys.packet.x_c);
    phys.packet.p0 = need(p0, "p0");
    phys.barrier.Z = need(Z, "Z");
    auto nat = to_natural_units(phys);
    validate(nat.packet);
    validate(nat.barrier);
    return nat;
  }
};

inline json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw domain_error("cannot read config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw domain_error("config file '" + path + "': " + e.what());
  }
}

// Output sink: a file when --out is set, the given stream otherwise.
class Sink {
 public:
  Sink(const std::optional<std::string>& path, std::ostream& fallback) : stream_(&fallback) {
    if (path) {
      file_.open(*path, std::ios::binary | std::ios::trunc);
      if (!file_) throw domain_error("cannot open output file '" + *path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

inline std::string sidecar_path(const std::string& out) {
  std::filesystem::path p(out);
  p.replace_extension(".meta.json");
  return p.string();
}

inline void write_sidecar(const std::optional<std::string>& out, const NaturalSetup& nat) {
  if (!out) return;
  json meta;
  meta["mass"] = nat.mass;
  meta["hbar"] = nat.hbar;
  meta["time_scale"] = nat.hbar / nat.mass;
  meta["natural"] = {{"s", nat.packet.s},
                     {"rho", nat.packet.rho},
                     {"xc", nat.packet.x_c},
                     {"p0", nat.packet.p0},
                     {"Z", nat.barrier.Z}};
  std::ofstream f(sidecar_path(*out), std::ios::binary | std::ios::trunc);
  if (!f) throw domain_error("cannot write metadata file for '" + *out + "'");
  f << meta.dump(2) << '\n';
}

// ---------------------------------------------------------------- evolve

struct EvolveArgs {
  CommonArgs common;
  PacketArgs packet;
  std::vector<double> times;
  std::optional<double> x_min, x_max, kdx;
  std::optional<std::size_t> n;
  std::optional<std::string> method;
  bool long_format = false;

  void bind(Binder& b) {
    common.bind(b);
    packet.bind(b);
    b.list("t", times, "Output time(s), comma separated");
    b.number("x-min", x_min, "Left end of the output grid");
    b.number("x-max", x_max, "Right end of the output grid");
    b.count("n", n, "Number of grid points");
    b.number("kdx", kdx, "Grid resolution k_max*dx when the grid is chosen automatically");
    b.text("method", method, "closed (default) or tdse");
    b.flag("long", long_format, "Single file with a leading t column");
  }
};

inline std::vector<WavefunctionGrid> evolve_closed(const EvolveArgs& a, const NaturalSetup& nat,
                                                   const std::vector<double>& t_nat) {
  const auto& p = nat.packet;
  double reach = 0.0;
  for (double t : t_nat) {
    const double centre = std::max(std::abs(p.x_c - p.p0 * t), p.x_c);
    reach = std::max(reach, centre + 10.0 * std::sqrt(free_position_variance(p, t)));
  }
  const double x_lo = a.x_min.value_or(-reach);
  const double x_hi = a.x_max.value_or(reach);
  if (!(x_hi > x_lo)) throw domain_error("--x-max must exceed --x-min");
  std::size_t n = 0;
  if (a.n) {
    n = *a.n;
  } else {
    const double k_max = p.p0 + 6.0 * std::sqrt(initial_moments(p).sigma_p);
    n = static_cast<std::size_t>(std::ceil((x_hi - x_lo) * k_max / a.kdx.value_or(0.1))) + 1;
    n = std::max<std::size_t>(n, 1001);
  }
  if (n < 2) throw domain_error("--n must be at least 2");
  std::vector<WavefunctionGrid> grids;
  for (double t : t_nat) grids.push_back(sample_evolved(p, nat.barrier, t, x_lo, x_hi, n));
  return grids;
}

inline std::vector<WavefunctionGrid> evolve_tdse(const EvolveArgs& a, const NaturalSetup& nat,
                                                 const std::vector<double>& t_nat) {
  AutoConfigOptions opts;
  opts.kdx = a.kdx.value_or(opts.kdx);
  SolverConfig cfg =
      plan_fixed_time_run(nat.packet, *std::max_element(t_nat.begin(), t_nat.end()), opts);
  if (a.n) cfg = with_points(cfg, *a.n);
  cfg.snapshot_times = t_nat;
  auto out = evolve_numeric(nat.packet, nat.barrier, cfg);
  std::vector<WavefunctionGrid> grids;
  for (double t : t_nat) {
    // snapshots are sorted; pick the one recorded for this time
    const auto it = std::min_element(out.snapshots.begin(), out.snapshots.end(),
                                     [t](const auto& u, const auto& v) {
                                       return std::abs(u.t - t) < std::abs(v.t - t);
                                     });
    WavefunctionGrid g;
    g.t = t;
    g.dx = it->dx;
    for (std::size_t i = 0; i < it->size(); ++i) {
      if (a.x_min && it->x[i] < *a.x_min) continue;
      if (a.x_max && it->x[i] > *a.x_max) continue;
      g.x.push_back(it->x[i]);
      g.psi.push_back(it->psi[i]);
    }
    grids.push_back(std::move(g));
  }
  return grids;
}

inline void write_grid(std::ostream& os, const WavefunctionGrid& g, std::optional<double> t_col) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (t_col) os << fmt(*t_col) << ',';
    os << fmt(g.x[i]) << ',' << fmt(g.psi[i].real()) << ',' << fmt(g.psi[i].imag()) << ','
       << fmt(std::norm(g.psi[i])) << '\n';
  }
}

inline std::string indexed_path(const std::string& out, std::size_t k) {
  std::filesystem::path p(out);
  const auto ext = p.extension().string();
  p.replace_extension();
  return p.string() + "_t" + std::to_string(k) + (ext.empty() ? ".csv" : ext);
}

inline int cmd_evolve(const EvolveArgs& a, std::ostream& out) {
  a.common.check();
  const auto nat = a.packet.natural();
  if (a.times.empty()) throw domain_error("missing required --t");
  const std::string method = a.method.value_or("closed");
  if (method != "closed" && method != "tdse") throw domain_error("--method must be closed or tdse");
  std::vector<double> t_nat;
  for (double t : a.times) {
    if (!std::isfinite(t) || t < 0.0) throw domain_error("times must be non-negative");
    t_nat.push_back(nat.time(t));
  }
  const bool split = a.times.size() > 1 && !a.long_format;
  if (split && !a.common.out) {
    throw domain_error("several times need --out (one file per time) or --long");
  }

  const auto grids = method == "closed" ? evolve_closed(a, nat, t_nat) : evolve_tdse(a, nat, t_nat);

  if (split) {
    for (std::size_t k = 0; k < grids.size(); ++k) {
      Sink sink(indexed_path(*a.common.out, k), out);
      *sink << "x,re_psi,im_psi,density\n";
      write_grid(*sink, grids[k], std::nullopt);
    }
  } else {
    Sink sink(a.common.out, out);
    if (a.long_format) {
      *sink << "t,x,re_psi,im_psi,density\n";
      for (std::size_t k = 0; k < grids.size(); ++k) write_grid(*sink, grids[k], a.times[k]);
    } else {
      *sink << "x,re_psi,im_psi,density\n";
      write_grid(*sink, grids.front(), std::nullopt);
    }
  }
  if (a.packet.physical_units()) write_sidecar(a.common.out, nat);
  return ok;
}

// ---------------------------------------------------------------- transmit

struct TransmitArgs {
  CommonArgs common;
  PacketArgs packet;
  std::optional<double> A, B;

  void bind(Binder& b) {
    common.bind(b);
    packet.bind(b);
    b.number("A", A, "A = (Z/p0)^2");
    b.number("B", B, "B = sigma_p(0)/p0^2");
  }
};

inline int cmd_transmit(const TransmitArgs& a, std::ostream& out) {
  a.common.check();
  const bool dimensionless = a.A || a.B;
  const bool physical = a.packet.s || a.packet.p0 || a.packet.Z || a.packet.rho;
  if (dimensionless && physical) {
    throw domain_error("give either --A and --B or the packet flags --s --rho --p0 --Z, not both");
  }
  DimensionlessPoint pt;
  std::optional<NaturalSetup> nat;
  if (dimensionless) {
    if (!a.A || !a.B) throw domain_error("--A and --B must be given together");
    pt = {*a.A, *a.B};
  } else {
    nat = a.packet.natural(false);
    pt = point_from_physical(nat->packet, nat->barrier);
  }
  const auto T = transmission_T(pt, a.common.tol());
  const double T_apr = interpolation_Tapr(pt);
  const auto regime = classify_regime(pt);

  Sink sink(a.common.out, out);
  *sink << "A,B,T,abs_err,T_apr,regime\n"
        << fmt(pt.A) << ',' << fmt(pt.B) << ',' << fmt(T.value) << ',' << fmt(T.abs_err) << ','
        << fmt(T_apr) << ',' << to_string(regime.regime) << '\n';
  if (nat && a.packet.physical_units()) write_sidecar(a.common.out, *nat);
  return ok;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  CommonArgs common;
  std::optional<std::string> mode;
  std::vector<double> A;
  std::optional<double> B_min, B_max;
  std::optional<std::size_t> points, threads;
  bool linear = false;

  void bind(Binder& b) {
    common.bind(b);
    b.text("mode", mode, "fig1 (A,B,T,abs_err) or fig2 (A,B,T,T_apr,ratio)");
    b.list("A", A, "A values (default 0.25,1,4,25)");
    b.number("B-min", B_min, "Smallest B (default 1e-3)");
    b.number("B-max", B_max, "Largest B (default 1e2)");
    b.count("points", points, "B points per series (default 60)");
    b.count("threads", threads, "Worker threads (0: hardware concurrency)");
    b.flag("linear", linear, "Linear instead of logarithmic B spacing");
  }
};

inline int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  a.common.check();
  const std::string mode = a.mode.value_or("fig1");
  if (mode != "fig1" && mode != "fig2") throw domain_error("--mode must be fig1 or fig2");
  SweepSpec spec;
  if (!a.A.empty()) spec.A_values = a.A;
  spec.B_lo = a.B_min.value_or(spec.B_lo);
  spec.B_hi = a.B_max.value_or(spec.B_hi);
  spec.n_points = a.points.value_or(spec.n_points);
  spec.log_spacing = !a.linear;
  spec.rel_tol = a.common.tol();
  spec.threads = static_cast<unsigned>(a.threads.value_or(0));
  const auto rows = sweep(spec);

  Sink sink(a.common.out, out);
  if (mode == "fig1") {
    *sink << "A,B,T,abs_err\n";
    for (const auto& r : rows) {
      *sink << fmt(r.A) << ',' << fmt(r.B) << ',' << fmt(r.T) << ',' << fmt(r.abs_err) << '\n';
    }
  } else {
    *sink << "A,B,T,T_apr,ratio\n";
    for (const auto& r : rows) {
      *sink << fmt(r.A) << ',' << fmt(r.B) << ',' << fmt(r.T) << ',' << fmt(r.T_apr) << ','
            << fmt(r.ratio) << '\n';
    }
  }
  return ok;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  CommonArgs common;
  PacketArgs packet;
  std::optional<std::size_t> n;
  std::optional<double> kdx, l2_kdx, residual_tol;

  void bind(Binder& b) {
    common.bind(b);
    packet.bind(b);
    b.count("n", n, "Grid points of the transmission run (default: planned)");
    b.number("kdx", kdx, "Transmission run resolution k_max*dx (default 0.1)");
    b.number("l2-kdx", l2_kdx, "Wavefunction run resolution k_max*dx (default 0.01)");
    b.number("residual-tol", residual_tol, "In-flight transmission weight target (default 1e-4)");
  }
};

inline void print_report(std::ostream& os, const VerifyReport& rep) {
  os << "parameters: s=" << fmt(rep.packet.s) << " rho=" << fmt(rep.packet.rho)
     << " xc=" << fmt(rep.packet.x_c) << " p0=" << fmt(rep.packet.p0)
     << " Z=" << fmt(rep.barrier.Z) << "  (A=" << fmt(rep.point.A) << ", B=" << fmt(rep.point.B)
     << ")\n";
  std::size_t width = 8;
  for (const auto& r : rep.rows) width = std::max(width, r.quantity.size());
  auto sci = [](double v) {
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s << std::scientific << std::setprecision(6) << v;
    return s.str();
  };
  os << std::left << std::setw(static_cast<int>(width)) << "quantity"
     << "  value          reference      delta          tolerance      status\n";
  for (const auto& r : rep.rows) {
    os << std::left << std::setw(static_cast<int>(width)) << r.quantity << "  " << std::setw(13)
       << sci(r.value) << "  " << std::setw(13) << sci(r.reference) << "  " << std::setw(13)
       << sci(r.delta) << "  " << std::setw(13) << sci(r.tolerance) << "  "
       << (r.pass ? "PASS" : "FAIL");
    if (!r.note.empty()) os << "  " << r.note;
    os << '\n';
  }
  os << (rep.all_pass() ? "verify: PASS" : "verify: FAIL") << '\n';
}

inline int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  a.common.check();
  PacketArgs p = a.packet;
  // Default parameter set: s=1, rho=0, x_c=15, p0=2, Z=2 (A=1, B=0.125).
  if (!p.s) p.s = 1.0;
  if (!p.xc) p.xc = 15.0;
  if (!p.p0) p.p0 = 2.0;
  if (!p.Z) p.Z = 2.0;
  const auto nat = p.natural();
  VerifyOptions opts;
  opts.rel_tol = a.common.tol();
  opts.n_points = a.n;
  opts.kdx = a.kdx.value_or(opts.kdx);
  opts.l2_kdx = a.l2_kdx.value_or(opts.l2_kdx);
  opts.residual_tol = a.residual_tol.value_or(opts.residual_tol);
  const auto rep = run_verification(nat.packet, nat.barrier, opts);

  print_report(out, rep);
  if (a.common.out) {
    Sink sink(a.common.out, out);
    *sink << "quantity,value,reference,delta,tolerance,status\n";
    for (const auto& r : rep.rows) {
      *sink << '"' << r.quantity << '"' << ',' << fmt(r.value) << ',' << fmt(r.reference) << ','
            << fmt(r.delta) << ',' << fmt(r.tolerance) << ',' << (r.pass ? "PASS" : "FAIL") << '\n';
    }
    if (p.physical_units()) write_sidecar(a.common.out, nat);
  }
  return rep.all_pass() ? ok : verification_failure;
}

// ---------------------------------------------------------------- entry

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Correlated Gaussian packets through a repulsive delta barrier"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every command");

  EvolveArgs evolve_args;
  TransmitArgs transmit_args;
  SweepArgs sweep_args;
  VerifyArgs verify_args;
  auto* evolve = app.add_subcommand("evolve", "Closed-form (or grid) wavefunction at given times");
  auto* transmit = app.add_subcommand("transmit", "Asymptotic transmission T(A,B)");
  auto* sweep_cmd = app.add_subcommand("sweep", "T(A,B) over a B grid for several A");
  auto* verify = app.add_subcommand("verify", "Compare closed form, grid solver and quadratures");
  Binder evolve_b(evolve), transmit_b(transmit), sweep_b(sweep_cmd), verify_b(verify);
  evolve_args.bind(evolve_b);
  transmit_args.bind(transmit_b);
  sweep_args.bind(sweep_b);
  verify_args.bind(verify_b);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help requests exit 0, everything else is a usage error
    return app.exit(e, out, err) == 0 ? ok : validation_failure;
  }

  try {
    if (evolve->parsed()) {
      if (evolve_args.common.config) evolve_b.apply(load_config(*evolve_args.common.config));
      return cmd_evolve(evolve_args, out);
    }
    if (transmit->parsed()) {
      if (transmit_args.common.config) transmit_b.apply(load_config(*transmit_args.common.config));
      return cmd_transmit(transmit_args, out);
    }
    if (sweep_cmd->parsed()) {
      if (sweep_args.common.config) sweep_b.apply(load_config(*sweep_args.common.config));
      return cmd_sweep(sweep_args, out);
    }
    if (verify_args.common.config) verify_b.apply(load_config(*verify_args.common.config));
    return cmd_verify(verify_args, out);
  } catch (const cgp::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return validation_failure;
  } catch (const cgp::numeric_error& e) {
    err << "numeric failure: " << e.what() << '\n';
    return numeric_failure;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return numeric_failure;
  }
}

}  // namespace cgp::cli
