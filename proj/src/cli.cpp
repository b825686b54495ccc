#include "ptlab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>

#include <omp.h>

#include "CLI11.hpp"
#include "ptlab/classical.hpp"
#include "ptlab/errors.hpp"
#include "ptlab/matrix2.hpp"
#include "ptlab/opalg.hpp"
#include "ptlab/ptnorm.hpp"
#include "ptlab/semiclassic.hpp"
#include "ptlab/spectra.hpp"
#include "ptlab/svg.hpp"

#ifndef PTLAB_VERSION
#define PTLAB_VERSION "0.0.0"
#endif

namespace ptlab::cli {

using nlohmann::json;

namespace {

// Bumped whenever a module changes its numerical output.
const std::map<std::string, std::string> kModuleVersions = {
    {"contour", "1.2"}, {"spectra", "1.3"},   {"semiclassic", "1.0"}, {"classical", "1.1"},
    {"ptnorm", "1.2"},  {"opalg", "1.0"},     {"matrix2", "1.0"},     {"cli", "1.0"},
};

// Output locations do not change what is computed.
const std::set<std::string> kNotHashed = {"out", "svg", "config", "verify"};

std::string num(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, r.ptr};
}

std::string text(double v) { return num(v); }
std::string text(int v) { return std::to_string(v); }
std::string text(bool v) { return v ? "true" : "false"; }
std::string text(const std::string& v) { return v; }

json pair_json(cplx z) { return json::array({z.real(), z.imag()}); }

json mat_json(const Mat2& m) {
  json rows = json::array();
  for (const auto& row : m) rows.push_back(json::array({pair_json(row[0]), pair_json(row[1])}));
  return rows;
}

std::string csv_header(const json& prov) { return "# provenance: " + prov.dump() + "\n"; }

struct Artifact {
  std::string path;  // "-" for stdout
  std::string content;
};
using Outputs = std::vector<Artifact>;

// One subcommand: its CLI11 app, the flags that form its config, and its body.
struct Command {
  CLI::App* app = nullptr;
  std::vector<std::pair<std::string, std::function<std::string()>>> keys;
  std::function<Outputs(const RunConfig&)> body;
  std::string format = "json";

  void formats(const std::string& fallback, const std::vector<std::string>& allowed) {
    format = fallback;
    std::string help;
    for (const auto& a : allowed) help += (help.empty() ? "" : " | ") + a;
    flag("format", format, help)->check(CLI::IsMember(allowed));
  }

  template <class T>
  CLI::Option* flag(const std::string& name, T& var, const std::string& desc) {
    keys.emplace_back(name, [&var] { return text(var); });
    if constexpr (std::is_same_v<T, bool>) {
      return app->add_flag("--" + name, var, desc);
    } else {
      return app->add_option("--" + name, var, desc)->capture_default_str();
    }
  }
  bool has_key(const std::string& k) const {
    return std::any_of(keys.begin(), keys.end(), [&](const auto& e) { return e.first == k; });
  }
};

struct SolverFlags {
  double eigen_tol = 1e-9;
  int points_per_ray = 400;
  double phase_step = 0.02;
  double ray_offset = 0.0;

  void attach(Command& c) {
    c.flag("eigen-tol", eigen_tol, "eigenvalue tolerance")->check(CLI::PositiveNumber);
    c.flag("points-per-ray", points_per_ray, "quadrature nodes per contour ray")->check(CLI::PositiveNumber);
    c.flag("phase-step", phase_step, "RK4 step in WKB phase units")->check(CLI::PositiveNumber);
    c.flag("ray-offset", ray_offset, "rotation of both rays away from the real axis (rad)");
  }
  SolverConfig config() const {
    SolverConfig s;
    s.eigen_tol = eigen_tol;
    s.points_per_ray = points_per_ray;
    s.shoot.phase_step = phase_step;
    s.ray_offset = ray_offset;
    return s;
  }
};

cplx parse_point(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw DomainError("expected re,im but got '" + s + "'");
  auto parse = [&](std::string_view part) {
    double v = 0.0;
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    const auto r = std::from_chars(part.data(), part.data() + part.size(), v);
    if (r.ec != std::errc() || r.ptr != part.data() + part.size()) throw DomainError("bad number in '" + s + "'");
    return v;
  };
  const std::string_view v(s);
  return {parse(v.substr(0, comma)), parse(v.substr(comma + 1))};
}

// Integrates from x0 and keeps one lap when the path closes.
struct Path {
  std::string label;
  Trajectory traj;
  ClosureReport closure;
};

Path one_lap(const std::string& label, cplx x0, double E, double N, double t_max, double closure_tol,
             const TrajectoryOptions& opt = {}) {
  Path out{label, integrate_trajectory(x0, E, N, t_max, 1e-3, opt), {}};
  out.closure = detect_closure(out.traj, closure_tol * std::max(1.0, std::abs(x0)));
  if (out.closure.closed) {
    auto& s = out.traj.samples;
    const double T = *out.closure.period;
    s.erase(std::find_if(s.begin(), s.end(), [T](const TrajectorySample& q) { return q.t > T; }), s.end());
  }
  return out;
}

json path_summary(const Path& p) {
  json j;
  j["label"] = p.label;
  j["closed"] = p.closure.closed;
  j["period"] = p.closure.period ? json(*p.closure.period) : json(nullptr);
  j["turns"] = p.closure.turns;
  j["closure_distance"] = p.closure.closure_distance;
  j["escaped"] = p.traj.escaped;
  j["max_energy_residual"] = p.traj.max_energy_residual;
  return j;
}

double max_radius(const Trajectory& t) {
  double r = 0.0;
  for (const auto& s : t.samples) r = std::max(r, std::abs(s.x));
  return r > 0.0 ? r : 1.0;
}

std::string paths_csv(const json& prov, const std::vector<Path>& paths, bool rescale) {
  std::string o = csv_header(prov);
  json summary = json::array();
  for (const auto& p : paths) summary.push_back(path_summary(p));
  o += "# paths: " + summary.dump() + "\n";
  o += "path,t,re_x,im_x,sheet\n";
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const double scale = rescale ? max_radius(paths[k].traj) : 1.0;
    for (const auto& s : paths[k].traj.samples) {
      o += std::to_string(k) + ',' + num(s.t) + ',' + num(s.x.real() / scale) + ',' + num(s.x.imag() / scale) + ',' +
           std::to_string(s.sheet) + '\n';
    }
  }
  return o;
}

FigureArtifact paths_figure(const json& prov, const std::string& title, const std::vector<Path>& paths,
                            bool rescale, bool by_sheet) {
  FigureArtifact fig;
  fig.kind = ArtifactKind::kTrajectory;
  fig.title = title;
  fig.x_label = rescale ? "Re x / max|x|" : "Re x";
  fig.y_label = rescale ? "Im x / max|x|" : "Im x";
  fig.provenance = prov;
  if (!by_sheet) {
    for (const auto& p : paths) {
      Series s{p.label, {}, false};
      const double scale = rescale ? max_radius(p.traj) : 1.0;
      for (const auto& q : p.traj.samples) s.points.emplace_back(q.x.real() / scale, q.x.imag() / scale);
      fig.series.push_back(std::move(s));
    }
    return fig;
  }
  // One series per sheet; runs on other sheets are separated by gaps.
  std::map<int, Series> sheets;
  const double gap = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : paths) {
    const double scale = rescale ? max_radius(p.traj) : 1.0;
    int last = std::numeric_limits<int>::min();
    for (const auto& q : p.traj.samples) {
      auto& s = sheets[q.sheet];
      if (q.sheet != last && !s.points.empty()) s.points.emplace_back(gap, gap);
      s.points.emplace_back(q.x.real() / scale, q.x.imag() / scale);
      last = q.sheet;
    }
    for (auto& [k, s] : sheets) {
      if (!s.points.empty()) s.points.emplace_back(gap, gap);
    }
  }
  for (auto& [k, s] : sheets) {
    s.label = "sheet " + std::to_string(k);
    fig.series.push_back(std::move(s));
  }
  return fig;
}

std::string scan_csv(const json& prov, const std::vector<PhaseDiagramRow>& rows) {
  std::string o = csv_header(prov);
  o += "N,n,E,merged\n";
  for (const auto& r : rows) {
    for (std::size_t n = 0; n < r.energies.size(); ++n) {
      o += num(r.N) + ',' + std::to_string(n) + ',' + num(r.energies[n]) + ',' + (r.merged[n] ? "1" : "0") + '\n';
    }
  }
  return o;
}

FigureArtifact scan_figure(const json& prov, const std::vector<PhaseDiagramRow>& rows, int levels) {
  FigureArtifact fig;
  fig.kind = ArtifactKind::kSpectrumVsN;
  fig.title = "Real energy levels of p^2 - (ix)^N";
  fig.x_label = "N";
  fig.y_label = "E";
  fig.provenance = prov;
  for (int n = 0; n < levels; ++n) {
    Series s{"n = " + std::to_string(n), {}, true};
    for (const auto& r : rows) {
      if (static_cast<std::size_t>(n) < r.energies.size()) s.points.emplace_back(r.N, r.energies[n]);
    }
    if (!s.points.empty()) fig.series.push_back(std::move(s));
  }
  return fig;
}

std::string out_or_stdout(const RunConfig& cfg) { return cfg.out.empty() ? "-" : cfg.out; }

void write_artifact(const Artifact& a, std::ostream& out) {
  if (a.path == "-") {
    out << a.content;
    return;
  }
  const std::filesystem::path p(a.path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  f << a.content;
  if (!f) throw std::runtime_error("cannot write " + a.path);
}

}  // namespace

json RunConfig::canonical() const {
  json p = json::object();
  for (const auto& [k, v] : params) {
    if (!kNotHashed.count(k)) p[k] = v;
  }
  return {{"subcommand", subcommand}, {"format", format}, {"params", p}};
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : cfg.canonical().dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json provenance(const RunConfig& cfg) {
  return {{"tool", "ptlab"},
          {"version", PTLAB_VERSION},
          {"schema_version", kSchemaVersion},
          {"config", cfg.canonical()},
          {"config_hash", config_hash(cfg)},
          {"modules", kModuleVersions}};
}

std::map<std::string, std::string> parse_config_file(const std::string& body) {
  std::map<std::string, std::string> out;
  std::istringstream in(body);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string{};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  if (const char* env = std::getenv("PTLAB_THREADS"); env && *env) {
    int threads = 0;
    const auto r = std::from_chars(env, env + std::strlen(env), threads);
    if (r.ec != std::errc() || *r.ptr != '\0' || threads < 1) {
      err << "ptlab: PTLAB_THREADS must be a positive integer, got '" << env << "'\n";
      return kUsage;
    }
    omp_set_num_threads(threads);
  }

  CLI::App app{"ptlab: PT-symmetric quantum mechanics toolkit", "ptlab"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  std::string config_path;
  bool verify = false;
  std::string out_path = "-";

  std::map<std::string, Command> commands;
  auto add_command = [&](const std::string& name, const std::string& desc) -> Command& {
    Command& c = commands[name];
    c.app = app.add_subcommand(name, desc);
    c.app->add_option("--config", config_path, "key = value file with the same keys as the flags");
    c.app->add_flag("--verify", verify, "run twice and compare outputs byte for byte");
    c.flag("out", out_path, "output file, '-' for stdout");
    return c;
  };

  // spectrum
  struct {
    double N = 3.0;
    int levels = 4;
    SolverFlags solver;
  } sp;
  {
    Command& c = add_command("spectrum", "real eigenvalues of p^2 - (ix)^N");
    c.flag("N", sp.N, "exponent")->required();
    c.flag("levels", sp.levels, "number of levels")->check(CLI::PositiveNumber);
    sp.solver.attach(c);
    c.formats("json", {"json", "csv"});
    c.body = [&](const RunConfig& cfg) -> Outputs {
      const SpectrumResult res = find_real_eigenvalues(sp.N, sp.levels, sp.solver.config());
      if (!res.complete) {
        err << "ptlab: only " << res.pairs.size() << " real levels found at N = " << sp.N << "\n";
      }
      const json prov = provenance(cfg);
      if (cfg.format == "csv") {
        std::string o = csv_header(prov) + "n,E_re,E_im,residual\n";
        for (const auto& p : res.pairs) {
          o += std::to_string(p.n) + ',' + num(p.E.real()) + ',' + num(p.E.imag()) + ',' + num(p.residual) + '\n';
        }
        return {{out_or_stdout(cfg), o}};
      }
      json rows = json::array();
      for (const auto& p : res.pairs) {
        rows.push_back({{"n", p.n}, {"E_re", p.E.real()}, {"E_im", p.E.imag()}, {"residual", p.residual}});
      }
      const json doc = {{"schema_version", kSchemaVersion},
                        {"kind", "spectrum"},
                        {"provenance", prov},
                        {"N", sp.N},
                        {"complete", res.complete},
                        {"rows", rows}};
      return {{out_or_stdout(cfg), doc.dump(2) + "\n"}};
    };
  }

  // phase-diagram
  struct {
    double from = 1.05, to = 5.0, step = 0.05;
    int levels = 8;
    bool serial = false;
    SolverFlags solver;
  } pd;
  {
    Command& c = add_command("phase-diagram", "real levels over a grid of N");
    c.flag("from", pd.from, "first N");
    c.flag("to", pd.to, "last N");
    c.flag("step", pd.step, "grid spacing")->check(CLI::PositiveNumber);
    c.flag("levels", pd.levels, "levels tracked per N")->check(CLI::PositiveNumber);
    c.flag("serial", pd.serial, "use the single-threaded reference scan");
    pd.solver.attach(c);
    c.formats("csv", {"csv", "json", "svg"});
    c.body = [&](const RunConfig& cfg) -> Outputs {
      const double lo = std::min(pd.from, pd.to), hi = std::max(pd.from, pd.to);
      const auto rows = pd.serial ? spectrum_scan_serial(lo, hi, pd.step, pd.levels, pd.solver.config())
                                  : spectrum_scan(lo, hi, pd.step, pd.levels, pd.solver.config());
      const json prov = provenance(cfg);
      if (cfg.format == "svg") return {{out_or_stdout(cfg), emit_svg(scan_figure(prov, rows, pd.levels))}};
      if (cfg.format == "json") {
        json rj = json::array();
        for (const auto& r : rows) rj.push_back({{"N", r.N}, {"energies", r.energies}, {"merged", r.merged}});
        const json doc = {{"schema_version", kSchemaVersion}, {"kind", "spectrum-vs-N"}, {"provenance", prov},
                          {"rows", rj}};
        return {{out_or_stdout(cfg), doc.dump(2) + "\n"}};
      }
      return {{out_or_stdout(cfg), scan_csv(prov, rows)}};
    };
  }

  // wkb
  struct {
    double N = 3.0;
    int n = 0;
  } wk;
  {
    Command& c = add_command("wkb", "complex WKB level");
    c.flag("N", wk.N, "exponent")->required();
    c.flag("n", wk.n, "level index")->check(CLI::NonNegativeNumber);
    c.body = [&](const RunConfig& cfg) -> Outputs {
      const double E = wkb_energy(wk.n, wk.N);
      const json doc = {{"schema_version", kSchemaVersion},
                        {"kind", "wkb"},
                        {"provenance", provenance(cfg)},
                        {"N", wk.N},
                        {"n", wk.n},
                        {"E_wkb", E},
                        {"residual_check", quantization_residual(E, wk.n, wk.N)}};
      return {{out_or_stdout(cfg), doc.dump(2) + "\n"}};
    };
  }

  // classical
  struct {
    double N = 3.0, E = 1.0, tmax = 10.0, dt = 1e-3, closure_tol = 1e-6;
    std::string x0 = "turning";
    int branch = 1;
    bool rescale = false;
    std::string svg;
  } cl;
  {
    Command& c = add_command("classical", "complex classical trajectory");
    c.flag("N", cl.N, "exponent")->required();
    c.flag("E", cl.E, "energy")->check(CLI::PositiveNumber);
    c.flag("x0", cl.x0, "start point re,im or 'turning' for x_- at rest");
    c.flag("tmax", cl.tmax, "integration time")->check(CLI::PositiveNumber);
    c.flag("dt", cl.dt, "initial step")->check(CLI::PositiveNumber);
    c.flag("branch", cl.branch, "+1: Im(xdot) >= 0 at the start, -1: the other root")
        ->check(CLI::IsMember({-1, 1}));
    c.flag("closure-tol", cl.closure_tol, "closure tolerance")->check(CLI::PositiveNumber);
    c.flag("rescale", cl.rescale, "divide positions by max |x|");
    c.flag("svg", cl.svg, "also write an SVG polyline here");
    c.formats("csv", {"csv", "svg"});
    c.body = [&](const RunConfig& cfg) -> Outputs {
      TrajectoryOptions opt;
      opt.branch = cl.branch;
      cplx x0;
      if (cl.x0 == "turning") {
        x0 = turning_points(cl.E, cl.N).x_minus;
        opt.p0 = cplx{0.0, 0.0};
      } else {
        x0 = parse_point(cl.x0);
      }
      Path p{"N = " + num(cl.N), integrate_trajectory(x0, cl.E, cl.N, cl.tmax, cl.dt, opt), {}};
      p.closure = detect_closure(p.traj, cl.closure_tol * std::max(1.0, std::abs(x0)));
      const json prov = provenance(cfg);
      const std::string title = "N = " + num(cl.N) + ", E = " + num(cl.E);
      Outputs o;
      if (cfg.format == "svg") {
        o.push_back({out_or_stdout(cfg), emit_svg(paths_figure(prov, title, {p}, cl.rescale, false))});
      } else {
        o.push_back({out_or_stdout(cfg), paths_csv(prov, {p}, cl.rescale)});
      }
      if (!cl.svg.empty()) o.push_back({cl.svg, emit_svg(paths_figure(prov, title, {p}, cl.rescale, false))});
      return o;
    };
  }

  // cop-spectral
  struct {
    double N = 3.0;
    int levels = 12;
    int c_phi_levels = 7;
  } cs;
  {
    Command& c = add_command("cop-spectral", "C operator from a truncated eigenfunction sum");
    c.flag("N", cs.N, "exponent")->required();
    c.flag("levels", cs.levels, "K, levels in the sum")->check(CLI::PositiveNumber);
    c.flag("c-phi-levels", cs.c_phi_levels, "eigenfunctions checked against C phi_n = (-1)^n phi_n")
        ->check(CLI::NonNegativeNumber);
    c.body = [&](const RunConfig& cfg) -> Outputs {
      const SpectralBasis basis = build_basis(cs.N, cs.levels, basis_config(cs.levels));
      const Contour& ct = basis.contour;
      const int K = static_cast<int>(basis.pairs.size());
      const std::vector<cplx> gram = pt_gram(basis);
      json diag = json::array(), gram_re = json::array(), gram_im = json::array();
      double diag_err = 0.0, off = 0.0;
      for (int m = 0; m < K; ++m) {
        json re = json::array(), im = json::array();
        for (int n = 0; n < K; ++n) {
          const cplx g = gram[m * K + n];
          re.push_back(g.real());
          im.push_back(g.imag());
          if (m == n) {
            diag.push_back(g.real());
            diag_err = std::max(diag_err, std::abs(g - cplx(m % 2 == 0 ? 1.0 : -1.0)));
          } else {
            off = std::max(off, std::abs(g));
          }
        }
        gram_re.push_back(re);
        gram_im.push_back(im);
      }

      const SampledKernel kernel = build_c_kernel(basis.pairs, ct);
      const TestFunction gauss = [](cplx x) { return std::exp(-x * x); };
      const Sampled f = sample(gauss, ct);
      const Sampled cf = apply_kernel(kernel, f, ct);
      const Sampled ccf = apply_kernel(kernel, cf, ct);
      Sampled diff(f.size());
      for (std::size_t i = 0; i < f.size(); ++i) diff[i] = ccf[i] - f[i];

      json c_phi = json::array();
      for (int n = 0; n < std::min(K, cs.c_phi_levels); ++n) {
        const Sampled& phi = basis.pairs[n].eigenfunction;
        const Sampled cphi = apply_kernel(kernel, phi, ct);
        Sampled d(phi.size());
        const double sign = n % 2 == 0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < phi.size(); ++i) d[i] = cphi[i] - sign * phi[i];
        c_phi.push_back({{"n", n}, {"relative_l2", contour_norm(d, ct) / contour_norm(phi, ct)}});
      }

      json energies = json::array();
      for (const auto& p : basis.pairs) energies.push_back(p.E.real());
      const json doc = {
          {"schema_version", kSchemaVersion},
          {"kind", "kernel-report"},
          {"provenance", provenance(cfg)},
          {"N", cs.N},
          {"levels", K},
          {"energies", energies},
          {"norm_table",
           {{"diagonal", diag},
            {"max_diagonal_error", diag_err},
            {"max_off_diagonal", off},
            {"gram_re", gram_re},
            {"gram_im", gram_im}}},
          {"completeness_residual", verify_completeness(basis.pairs, ct, gauss)},
          {"c_squared_residual", contour_norm(diff, ct) / contour_norm(f, ct)},
          {"c_phi_residual", c_phi},
          {"x_expectation", pair_json(expectation_x_ground(basis, kernel))}};
      return {{out_or_stdout(cfg), doc.dump(2) + "\n"}};
    };
  }

  // cop-perturbative
  int order = 5;
  {
    Command& c = add_command("cop-perturbative", "exact Q series for H = p^2/2 + x^2/2 + i eps x^3");
    c.flag("order", order, "1, 3 or 5")->check(CLI::IsMember({1, 3, 5}));
    c.body = [&](const RunConfig& cfg) -> Outputs {
      const QSeries q = solve_q_hierarchy(order);
      json qs = json::object();
      for (const auto& [k, poly] : q.terms) {
        json terms = json::array();
        for (const auto& [deg, coef] : poly.terms()) {
          terms.push_back({{"m", deg.first}, {"n", deg.second}, {"coefficient", coef.str()}});
        }
        qs["Q" + std::to_string(k)] = {{"symmetrized", poly.str()}, {"terms", terms}};
      }
      const json doc = {{"schema_version", kSchemaVersion},
                        {"kind", "q-series"},
                        {"provenance", provenance(cfg)},
                        {"order", order},
                        {"Q", qs},
                        {"residual", verify_c_commutes(q, order).get_str()},
                        {"residual_checked_through_eps", order + 1}};
      return {{out_or_stdout(cfg), doc.dump(2) + "\n"}};
    };
  }

  // matrix2
  MatrixModel mm{1.0, 1.0, 0.0};
  {
    Command& c = add_command("matrix2", "exactly solvable 2x2 model");
    c.flag("r", mm.r, "diagonal modulus");
    c.flag("s", mm.s, "off-diagonal coupling");
    c.flag("theta", mm.theta, "diagonal phase (rad)");
    c.body = [&](const RunConfig& cfg) -> Outputs {
      const Eigensystem2 e = eigensystem(mm);
      json doc = {{"schema_version", kSchemaVersion},
                  {"kind", "matrix2"},
                  {"provenance", provenance(cfg)},
                  {"eps_plus", pair_json(e.eps_plus)},
                  {"eps_minus", pair_json(e.eps_minus)},
                  {"broken", e.broken},
                  {"exceptional", mm.exceptional()}};
      if (e.broken || mm.exceptional()) {
        doc["C"] = nullptr;
        doc["Q"] = nullptr;
        doc["checks"] = nullptr;
      } else {
        const Mat2 C = c_matrix(mm);
        const Completeness2 comp = completeness_2(mm);
        const Mat2 H = mm.hamiltonian();
        doc["C"] = mat_json(C);
        doc["Q"] = mat_json(q_matrix(mm));
        doc["checks"] = {
            {"c_squared", max_abs_diff(C * C, identity2())},
            {"completeness", comp.identity_error},
            {"c_from_states", comp.c_error},
            {"exp_q_p", max_abs_diff(exp_q(mm) * parity2(), C)},
            {"c_minus_p", max_abs_diff(C, parity2())},
            {"commutes_with_h", max_abs_diff(C * H, H * C)},
            {"observables", {{"H", is_observable_2(H, mm)}, {"C", is_observable_2(C, mm)}}}};
      }
      return {{out_or_stdout(cfg), doc.dump(2) + "\n"}};
    };
  }

  // reproduce
  struct {
    std::string figure;
    int levels = 8;
    double step = 0.05;
  } rp;
  {
    Command& c = add_command("reproduce", "regenerate a figure dataset and plot");
    c.app->add_option("figure", rp.figure, "fig1 | fig3 | fig4 | fig5 | fig6")
        ->required()
        ->check(CLI::IsMember({"fig1", "fig3", "fig4", "fig5", "fig6"}));
    c.keys.emplace_back("figure", [&] { return rp.figure; });
    c.flag("levels", rp.levels, "fig1: tracked levels")->check(CLI::PositiveNumber);
    c.flag("step", rp.step, "fig1: N grid spacing")->check(CLI::PositiveNumber);
    c.body = [&](const RunConfig& cfg) -> Outputs {
      const std::filesystem::path dir = cfg.out.empty() || cfg.out == "-" ? "." : cfg.out;
      auto at = [&](const std::string& name) { return (dir / name).string(); };
      const json prov = provenance(cfg);
      const std::string& f = rp.figure;
      if (f == "fig1") {
        const auto rows = spectrum_scan(1.05, 5.0, rp.step, rp.levels);
        return {{at("fig1.csv"), scan_csv(prov, rows)}, {at("fig1.svg"), emit_svg(scan_figure(prov, rows, rp.levels))}};
      }
      const double E = 1.0;
      const double tol = 1e-6;
      std::vector<Path> paths;
      auto rest_at = [](cplx x) {
        TrajectoryOptions o;
        o.p0 = cplx{0.0, 0.0};
        return std::pair{x, o};
      };
      if (f == "fig3" || f == "fig4") {
        const double N = f == "fig3" ? 2.0 : 3.0;
        const double T = period(E, N);
        paths.push_back({"x_- to x_+", turning_point_orbit(E, N), {}});
        paths.back().closure.closed = true;
        paths.back().closure.period = paths.back().traj.samples.back().t;
        // At N = 3 an orbit crosses the imaginary axis twice, so starts are picked on distinct orbits.
        const std::vector<double> starts =
            f == "fig3" ? std::vector<double>{0.2, 0.5, 1.0, 2.0} : std::vector<double>{0.2, 0.35, 0.45, 2.0};
        for (double y : starts) {
          paths.push_back(one_lap("x0 = -" + num(y) + "i", {0.0, -y}, E, N, 1.5 * T, tol));
        }
        if (f == "fig3") {
          return {{at("fig3.csv"), paths_csv(prov, paths, false)},
                  {at("fig3.svg"), emit_svg(paths_figure(prov, "N = 2: nested ellipses", paths, false, false))}};
        }
        // The turning point at x = i: the path leaves it and runs up the imaginary axis.
        const auto [xi, opt] = rest_at({0.0, 1.0});
        paths.push_back({"from x = i", integrate_trajectory(xi, E, N, 20.0, 1e-3, opt), {}});
        paths.back().closure = detect_closure(paths.back().traj, tol);
        // Drawn only up to |x| = 4 so the closed orbits stay readable.
        auto& up = paths.back().traj.samples;
        up.erase(std::find_if(up.begin(), up.end(), [](const TrajectorySample& q) { return std::abs(q.x) > 4.0; }),
                 up.end());
        std::vector<Path> big;
        for (double y : {4.0, 8.0, 16.0, 32.0}) {
          big.push_back(one_lap("x0 = -" + num(y) + "i", {0.0, -y}, E, N, 1.5 * T, tol));
        }
        return {{at("fig4.csv"), paths_csv(prov, paths, false)},
                {at("fig4.svg"), emit_svg(paths_figure(prov, "N = 3 classical paths", paths, false, false))},
                {at("fig4_rescaled.csv"), paths_csv(prov, big, true)},
                {at("fig4_rescaled.svg"),
                 emit_svg(paths_figure(prov, "N = 3 rescaled paths", big, true, false))}};
      }
      if (f == "fig5") {
        const double N = 2.5;
        const double T = period(E, N);
        for (double y : {2.0, 4.0, 8.0, 16.0}) {
          paths.push_back(one_lap("x0 = -" + num(y) + "i", {0.0, -y}, E, N, 4.0 * T, tol));
        }
        return {{at("fig5.csv"), paths_csv(prov, paths, true)},
                {at("fig5.svg"), emit_svg(paths_figure(prov, "N = 2.5 rescaled paths by sheet", paths, true, true))}};
      }
      // fig6: spirals from x_- below N = 2.
      for (double N : {1.8, 1.85, 1.9}) {
        const auto [x0, opt] = rest_at(turning_points(E, N).x_minus);
        paths.push_back({"N = " + num(N), integrate_trajectory(x0, E, N, 400.0, 1e-3, opt), {}});
        paths.back().closure = detect_closure(paths.back().traj, tol);
      }
      return {{at("fig6.csv"), paths_csv(prov, paths, false)},
              {at("fig6.svg"), emit_svg(paths_figure(prov, "Spirals below N = 2", paths, false, false))}};
    };
  }

  // Config file: its entries become flags placed before the command line ones,
  // so explicit flags win.
  std::vector<std::string> args = raw_args;
  try {
    auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.empty() || a[0] != '-'; });
    std::string file;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
    }
    if (!file.empty() && sub != args.end() && commands.count(*sub)) {
      std::ifstream in(file);
      if (!in) throw std::invalid_argument("cannot read config file " + file);
      std::stringstream ss;
      ss << in.rdbuf();
      const Command& c = commands.at(*sub);
      std::vector<std::string> inject;
      for (const auto& [k, v] : parse_config_file(ss.str())) {
        if (!c.has_key(k) || k == "figure") throw std::invalid_argument("unknown config key '" + k + "' for " + *sub);
        inject.push_back("--" + k + "=" + v);
      }
      args.insert(sub + 1, inject.begin(), inject.end());
    }
  } catch (const std::exception& e) {
    err << "ptlab: " << e.what() << "\n";
    return kUsage;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const auto chosen = std::find_if(commands.begin(), commands.end(), [](const auto& kv) { return kv.second.app->parsed(); });
  Command& cmd = chosen->second;
  RunConfig cfg;
  cfg.subcommand = chosen->first;
  for (const auto& [k, get] : cmd.keys) cfg.params[k] = get();
  cfg.format = cfg.subcommand == "reproduce" ? "csv+svg" : cmd.format;
  cfg.params["format"] = cfg.format;
  cfg.out = out_path;

  try {
    Outputs result = cmd.body(cfg);
    if (verify) {
      const Outputs again = cmd.body(cfg);
      bool same = again.size() == result.size();
      for (std::size_t i = 0; same && i < result.size(); ++i) {
        if (again[i].content != result[i].content) {
          err << "ptlab: --verify: " << (result[i].path == "-" ? "stdout" : result[i].path)
              << " differs between runs\n";
          same = false;
        }
      }
      if (!same) return kUsage;
      err << "ptlab: --verify: " << result.size() << " artifact(s) byte-identical across two runs\n";
    }
    for (const auto& a : result) write_artifact(a, out);
  } catch (const DomainError& e) {
    err << "ptlab: domain error: " << e.what() << "\n";
    return kDomain;
  } catch (const ConvergenceError& e) {
    err << "ptlab: convergence failure: " << e.what() << " (last iterate " << e.last_iterate().real() << " + "
        << e.last_iterate().imag() << "i)\n";
    return kConvergence;
  } catch (const OverflowError& e) {
    err << "ptlab: overflow: " << e.what() << " (at arc position " << e.where() << ")\n";
    return kConvergence;
  } catch (const std::exception& e) {
    err << "ptlab: " << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace ptlab::cli
