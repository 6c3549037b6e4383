#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ratdyn/chords.hpp"
#include "ratdyn/circle_family.hpp"
#include "ratdyn/expansion.hpp"

using namespace ratdyn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Scenario {
  std::string map_file;
  std::string builtin;
  std::vector<double> window{-2.0, 2.0, -2.0, 2.0};
  int res = 512;
  int max_iter = 500;
  double step_tol = 1e-10;
  double junction_tol = 1e-7;
  double boundary_tol = 1e-8;
  double closing_alpha = 1e-2;
  std::vector<int> basins{0, 1};
  std::vector<std::string> angles;
  std::vector<std::string> angles2;
  int bound = 3;
  int n_max = 30;
  int Q = 0;
  int max_samples = 256;
  bool strict = false;
  std::string theta = "golden";
  double theta_tol = 1e-6;
  int period_max = 8;
  double periodic_tol = 1e-6;
  std::string out = ".";
  int threads = 0;
  bool json_out = false;
  bool dry_run = false;
};

double parse_theta(const std::string& s) {
  if (s == "golden") return (std::sqrt(5.0) - 1.0) / 2.0;
  if (s == "silver") return std::sqrt(2.0) - 1.0;
  try {
    if (s.find('/') != std::string::npos) return Angle::parse(s).value();
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("bad theta '" + s + "'");
  }
}

cd parse_coeff(const json& c) {
  if (c.is_number()) return c.get<double>();
  if (c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number())
    return {c[0].get<double>(), c[1].get<double>()};
  throw Error("malformed map file: coefficient " + c.dump());
}

RationalMap load_map_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open map file " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw Error("malformed map file: " + std::string(e.what()));
  }
  if (!j.is_object() || !j.contains("numerator") || !j.contains("denominator") ||
      !j["numerator"].is_array() || !j["denominator"].is_array())
    throw Error("malformed map file: expected {\"numerator\": [...], \"denominator\": [...]}");
  Poly p, q;
  for (const auto& c : j["numerator"]) p.push_back(parse_coeff(c));
  for (const auto& c : j["denominator"]) q.push_back(parse_coeff(c));
  return RationalMap(p, q);
}

RationalMap load_builtin(const std::string& name) {
  if (name == "z2") return RationalMap({0.0, 0.0, 1.0}, {1.0});
  if (name == "basilica2") {
    const RationalMap f({-1.0, 0.0, 1.0}, {1.0});
    return compose(f, f);
  }
  if (name == "newton-cubic") return RationalMap({1.0, 0.0, 0.0, 2.0}, {0.0, 0.0, 3.0});
  if (name.rfind("ftheta:", 0) == 0) {
    const double th = parse_theta(name.substr(7));
    return make_f_theta(solve_rho(th, 1e-6).rho);
  }
  throw Error("unknown builtin '" + name + "'");
}

RationalMap load_map(const Scenario& sc) {
  if (!sc.map_file.empty()) return load_map_file(sc.map_file);
  return load_builtin(sc.builtin);
}

SpherePoint snap(const SpherePoint& p) {
  if (spherical_distance(p, SpherePoint::infinity()) < 1e-12) return SpherePoint::infinity();
  if (spherical_distance(p, cd(0.0)) < 1e-12) return cd(0.0);
  return p;
}

// Attractors in a fixed order: finite points by modulus then argument, infinity last.
std::vector<PeriodicPoint> sorted_attractors(const RationalMap& map) {
  auto att = find_attractors(map);
  for (auto& a : att) a.point = snap(a.point);
  const auto key = [](const PeriodicPoint& a) {
    if (a.point.is_infinity()) return std::make_pair(std::numeric_limits<double>::infinity(), 0.0);
    const cd z = a.point.value();
    double t = std::arg(z);
    if (t < -1e-12) t += 2.0 * std::numbers::pi;
    return std::make_pair(std::round(std::abs(z) * 1e9) / 1e9, std::max(t, 0.0));
  };
  std::stable_sort(att.begin(), att.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  return att;
}

int local_degree(const RationalMap& map, const SpherePoint& a) {
  int d = 1;
  for (const auto& c : critical_points(map))
    if (spherical_distance(c, a) < 1e-6) ++d;
  return d;
}

RayTracer make_tracer(const RationalMap& map, const std::vector<PeriodicPoint>& att, int i,
                      const Scenario& sc) {
  if (i < 0 || i >= static_cast<int>(att.size()))
    throw Error("basin index " + std::to_string(i) + " out of range (" + std::to_string(att.size()) +
                " attractors)");
  const auto& a = att[static_cast<std::size_t>(i)];
  if (a.period != 1 || a.cls != CycleClass::Superattracting)
    throw HypothesisError("attractor " + std::to_string(i) + " at " + to_string(a.point) +
                          " is not a superattracting fixed point");
  TraceOptions to;
  to.step_tol = sc.step_tol;
  return RayTracer(map, build_chart(map, a.point, local_degree(map, a.point)), i, to);
}

std::vector<Angle> parse_angles(const std::vector<std::string>& v) {
  std::vector<Angle> out;
  for (const auto& s : v) out.push_back(Angle::parse(s));
  return out;
}

std::vector<Angle> default_angles(int d, int bound) {
  std::vector<Angle> out;
  for (int q = 1; q <= bound; ++q)
    for (const auto& a : periodic_angles(d, q))
      if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
  std::sort(out.begin(), out.end());
  return out;
}

json point_json(const SpherePoint& p) {
  if (p.is_infinity()) return "inf";
  return json::array({p.value().real(), p.value().imag()});
}

json config_json(const std::string& cmd, const Scenario& sc) {
  json j;
  j["subcommand"] = cmd;
  j["map"] = sc.map_file.empty() ? json{{"builtin", sc.builtin}} : json{{"file", sc.map_file}};
  j["window"] = sc.window;
  j["res"] = sc.res;
  j["max_iter"] = sc.max_iter;
  j["tol"] = {{"step", sc.step_tol}, {"junction", sc.junction_tol}, {"boundary", sc.boundary_tol},
              {"closing_alpha", sc.closing_alpha}, {"theta", sc.theta_tol}, {"periodic", sc.periodic_tol}};
  j["basins"] = sc.basins;
  j["angles"] = sc.angles;
  j["angles2"] = sc.angles2;
  j["bound"] = sc.bound;
  j["n_max"] = sc.n_max;
  j["Q"] = sc.Q;
  j["max_samples"] = sc.max_samples;
  j["strict"] = sc.strict;
  j["theta"] = sc.theta;
  j["period_max"] = sc.period_max;
  j["out"] = sc.out;
  j["threads"] = sc.threads;
  return j;
}

void validate(const Scenario& sc) {
  if (sc.map_file.empty() == sc.builtin.empty()) throw Error("give exactly one of --map and --builtin");
  if (sc.window.size() != 4 || !(sc.window[0] < sc.window[1]) || !(sc.window[2] < sc.window[3]))
    throw Error("--window needs x0 < x1 and y0 < y1");
  if (sc.res < 8) throw Error("--res must be at least 8");
  for (double t : {sc.step_tol, sc.junction_tol, sc.boundary_tol, sc.closing_alpha, sc.theta_tol, sc.periodic_tol})
    if (!(t > 0.0)) throw Error("tolerances must be positive");
  if (sc.basins.size() != 2) throw Error("--basins needs two indices");
  if (sc.bound < 1 || sc.n_max < 1 || sc.period_max < 1) throw Error("--bound, --n-max and --period-max must be positive");
  parse_angles(sc.angles);
  parse_angles(sc.angles2);
  if (!sc.builtin.empty() && sc.builtin != "z2" && sc.builtin != "basilica2" && sc.builtin != "newton-cubic") {
    if (sc.builtin.rfind("ftheta:", 0) != 0) throw Error("unknown builtin '" + sc.builtin + "'");
    parse_theta(sc.builtin.substr(7));
  }
}

std::string path_in(const Scenario& sc, const std::string& name) {
  fs::create_directories(sc.out);
  return (fs::path(sc.out) / name).string();
}

void write_text(const std::string& path, const std::string& s) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << s << '\n';
}

BasinAtlas make_atlas(const RationalMap& map, const std::vector<PeriodicPoint>& att, const Scenario& sc) {
  return classify(map, att, Window{sc.window[0], sc.window[1], sc.window[2], sc.window[3]}, sc.res, sc.max_iter);
}

// Boundary samples of every attractor pair, or only the --basins pair when given explicitly.
std::vector<BoundarySampleSet> all_boundaries(const RationalMap& map, const BasinAtlas& atlas, const Scenario& sc) {
  std::vector<BoundarySampleSet> out;
  const int n = static_cast<int>(atlas.attractors.size());
  BoundaryOptions bo;
  bo.max_samples = static_cast<std::size_t>(sc.max_samples);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      auto s = boundary_intersection(map, atlas, i, j, sc.boundary_tol, bo);
      if (!s.points.empty()) out.push_back(std::move(s));
    }
  return out;
}

json run(const std::string& cmd, const Scenario& sc) {
  json res;
  res["subcommand"] = cmd;
  json files = json::array();

  if (cmd == "ftheta") {
    const double th = parse_theta(sc.theta);
    const auto sol = solve_rho(th, sc.theta_tol);
    const auto rep = verify_no_circle_periodics(sol.rho, sc.period_max, sc.periodic_tol);
    const std::string js = ftheta_to_json(sol, rep);
    const auto p = path_in(sc, "ftheta.json");
    write_text(p, js);
    files.push_back(p);
    res["result"] = json::parse(js);
    res["files"] = files;
    return res;
  }

  const RationalMap map = load_map(sc);
  const auto att = sorted_attractors(map);
  res["attractors"] = json::array();
  for (const auto& a : att)
    res["attractors"].push_back({{"point", point_json(a.point)}, {"period", a.period}, {"class", to_string(a.cls)}});

  if (cmd == "basins") {
    const auto atlas = make_atlas(map, att, sc);
    const auto p1 = path_in(sc, "basins.ppm"), p2 = path_in(sc, "basins_inf.ppm"), p3 = path_in(sc, "basins.csv");
    write_ppm(atlas, p1, Chart::Affine);
    write_ppm(atlas, p2, Chart::Infinity);
    std::ofstream f(p3);
    f.precision(17);
    f << "id,re,im,period,class,capture_radius,cells_affine,cells_infinity\n";
    for (std::size_t a = 0; a <= atlas.attractors.size(); ++a) {
      const int id = a < atlas.attractors.size() ? static_cast<int>(a) : UNRESOLVED;
      std::array<long, 2> cnt{0, 0};
      for (int g = 0; g < 2; ++g) cnt[g] = std::count(atlas.grids[g].labels.begin(), atlas.grids[g].labels.end(), id);
      if (id == UNRESOLVED) {
        f << "unresolved,,,,,," << cnt[0] << ',' << cnt[1] << '\n';
        continue;
      }
      const auto& A = atlas.attractors[a];
      const SpherePoint pt = snap(A.base.point);
      if (pt.is_infinity()) f << a << ",inf,inf,";
      else f << a << ',' << pt.value().real() << ',' << pt.value().imag() << ',';
      f << A.base.period << ',' << to_string(A.base.cls) << ',' << A.capture_radius << ',' << cnt[0] << ',' << cnt[1] << '\n';
    }
    files = {p1, p2, p3};
  } else if (cmd == "boundary") {
    const auto atlas = make_atlas(map, att, sc);
    BoundaryOptions bo;
    bo.max_samples = static_cast<std::size_t>(sc.max_samples);
    const auto s = boundary_intersection(map, atlas, sc.basins[0], sc.basins[1], sc.boundary_tol, bo);
    const auto p = path_in(sc, "boundary.csv");
    write_csv(s, p);
    files.push_back(p);
    res["samples"] = s.points.size();
  } else if (cmd == "rays") {
    auto tr = make_tracer(map, att, sc.basins[0], sc);
    const auto angles = sc.angles.empty() ? default_angles(tr.degree(), sc.bound) : parse_angles(sc.angles);
    std::vector<Ray> rays;
    for (const auto& a : angles) rays.push_back(tr.trace(a));
    const std::string js = rays_to_json(rays);
    const auto p = path_in(sc, "rays.json");
    write_text(p, js);
    files.push_back(p);
    res["rays"] = rays.size();
    res["landed"] = std::count_if(rays.begin(), rays.end(), [](const Ray& r) { return r.landed; });
  } else if (cmd == "chords") {
    auto t1 = make_tracer(map, att, sc.basins[0], sc);
    auto t2 = make_tracer(map, att, sc.basins[1], sc);
    const auto a1 = sc.angles.empty() ? default_angles(t1.degree(), sc.bound) : parse_angles(sc.angles);
    const auto a2 = sc.angles2.empty() ? (sc.angles.empty() ? default_angles(t2.degree(), sc.bound) : a1)
                                       : parse_angles(sc.angles2);
    const auto chords = detect_chords(t1, t2, a1, a2, sc.junction_tol);
    const auto p1 = path_in(sc, "chords.csv"), p2 = path_in(sc, "chords.json");
    std::ofstream f(p1);
    f.precision(17);
    f << "angle1,angle2,junction_re,junction_im\n";
    for (const auto& c : chords) {
      f << c.ray1.angle.str() << ',' << c.ray2.angle.str() << ',';
      if (c.junction.is_infinity()) f << "inf,inf\n";
      else f << c.junction.value().real() << ',' << c.junction.value().imag() << '\n';
    }
    write_text(p2, chords_to_json(chords));
    files = {p1, p2};
    res["chords"] = chords.size();
  } else if (cmd == "catalog") {
    auto t1 = make_tracer(map, att, sc.basins[0], sc);
    auto t2 = make_tracer(map, att, sc.basins[1], sc);
    const auto cat = boundary_periodic_catalog(map, t1, t2, sc.bound, sc.junction_tol);
    const auto p = path_in(sc, "catalog.csv");
    write_catalog_csv(cat, p);
    files.push_back(p);
    res["junctions"] = cat.size();
  } else if (cmd == "pullback") {
    auto t1 = make_tracer(map, att, sc.basins[0], sc);
    auto t2 = make_tracer(map, att, sc.basins[1], sc);
    const Angle a1 = sc.angles.empty() ? Angle(0, 1) : Angle::parse(sc.angles.front());
    const Angle a2 = sc.angles2.empty() ? a1 : Angle::parse(sc.angles2.front());
    const Chord start = make_chord(map, t1.trace(a1), t2.trace(a2), sc.junction_tol, t1.degree());
    const auto [lim, rep] = pullback_periodic(map, start, t1, t2, sc.Q, 30, 1e-8, sc.junction_tol);
    json j;
    j["start"] = json::parse(chords_to_json({start}));
    j["limit"] = json::parse(chords_to_json({lim}));
    j["pushed"] = rep.pushed;
    j["Q"] = rep.Q;
    j["d_h"] = rep.d_h;
    j["converged"] = rep.converged;
    j["junction"] = point_json(snap(rep.junction.point));
    j["junction_period"] = rep.junction.period;
    j["junction_multiplier"] = {rep.junction.multiplier.real(), rep.junction.multiplier.imag()};
    j["junction_residual"] = rep.junction_residual;
    const auto p1 = path_in(sc, "pullback.json"), p2 = path_in(sc, "pullback_dh.log");
    write_text(p1, j.dump());
    std::ofstream f(p2);
    f.precision(17);
    for (std::size_t k = 0; k < rep.d_h.size(); ++k) f << "stage " << k + 1 << " d_H " << rep.d_h[k] << '\n';
    files = {p1, p2};
    res["converged"] = rep.converged;
    res["stages"] = rep.d_h.size();
  } else if (cmd == "mane" || cmd == "closing") {
    const auto atlas = make_atlas(map, att, sc);
    const auto sets = all_boundaries(map, atlas, sc);
    if (sets.empty()) throw HypothesisError("no boundary samples between any pair of basins");
    BoundarySampleSet merged;
    std::vector<SpherePoint> pts;
    for (const auto& s : sets)
      for (const auto& b : s.points) {
        merged.points.push_back(b);
        pts.push_back(b.point);
      }
    if (cmd == "mane") {
      ScreeningOptions so;
      so.exclude_critical = !sc.strict;
      const auto rep = mane_check(map, merged, sc.n_max, so);
      const std::string js = expansion_to_json(rep);
      const auto p = path_in(sc, "mane.json");
      write_text(p, js);
      files.push_back(p);
      res["result"] = json::parse(js);
    } else {
      const auto sw = closing_sweep(map, pts, sc.closing_alpha);
      const auto p = path_in(sc, "closing.csv");
      write_closing_csv(sw.results, p);
      files.push_back(p);
      res["seeds"] = sw.seeds;
      res["certified"] = sw.results.size();
      res["failures"] = sw.failures.size();
      res["beyond_precision"] = sw.beyond_precision;
    }
  } else {
    throw Error("unknown subcommand " + cmd);
  }
  res["files"] = files;
  return res;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ratdyn: basins, internal rays and chords of rational maps"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Scenario sc;

  auto* src = app.add_option_group("map source");
  src->add_option("--map", sc.map_file, "JSON file {\"numerator\": [...], \"denominator\": [...]}, ascending, each [re, im] or a number");
  src->add_option("--builtin", sc.builtin, "z2, basilica2, newton-cubic or ftheta:<theta>");
  app.add_option("--window", sc.window, "x0,x1,y0,y1 of the affine chart")->delimiter(',')->expected(4);
  app.add_option("--res", sc.res, "grid resolution per chart");
  app.add_option("--max-iter", sc.max_iter, "classification iteration cap");
  app.add_option("--tol-step", sc.step_tol, "ray landing step tolerance");
  app.add_option("--tol-junction", sc.junction_tol, "chord junction tolerance");
  app.add_option("--tol-boundary", sc.boundary_tol, "boundary bisection tolerance");
  app.add_option("--tol-closing", sc.closing_alpha, "closing near-return radius");
  app.add_option("--tol-theta", sc.theta_tol, "rotation number tolerance");
  app.add_option("--tol-periodic", sc.periodic_tol, "circle distance for periodic findings");
  app.add_option("--basins", sc.basins, "two attractor indices i,j")->delimiter(',')->expected(2);
  app.add_option("--angles", sc.angles, "angles p/q for the first basin")->delimiter(',');
  app.add_option("--angles2", sc.angles2, "angles p/q for the second basin")->delimiter(',');
  app.add_option("--bound", sc.bound, "largest level q of periodic angles");
  app.add_option("--n-max", sc.n_max, "largest iterate in the expansion check");
  app.add_option("--Q", sc.Q, "pullback period, 0 to search");
  app.add_option("--max-samples", sc.max_samples, "boundary samples per basin pair");
  app.add_flag("--strict", sc.strict, "fail on samples whose orbit nears a critical point instead of dropping them");
  app.add_option("--theta", sc.theta, "rotation number: golden, silver, decimal or p/q");
  app.add_option("--period-max", sc.period_max, "largest period searched on the circle");
  app.add_option("--out", sc.out, "output directory");
  app.add_option("--threads", sc.threads, "worker cap, 0 for the default");
  app.add_flag("--json", sc.json_out, "machine-readable stdout");
  app.add_flag("--dry-run", sc.dry_run, "validate and print the resolved scenario");

  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"basins", "basin atlas PPM and attractor CSV"},
      {"rays", "trace internal rays, JSON"},
      {"chords", "chords between two basins, CSV and JSON"},
      {"boundary", "boundary samples of two basins, CSV"},
      {"mane", "expansion check on boundary samples, JSON"},
      {"closing", "periodic points from near-returns, CSV"},
      {"pullback", "periodic chord by pullback, JSON and d_H log"},
      {"ftheta", "rho solve and circle periodic-point check, JSON"},
      {"catalog", "periodic junction catalog, CSV"}};
  for (const auto& [name, help] : cmds) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    if (cmd == "ftheta" && sc.map_file.empty() && sc.builtin.empty()) sc.builtin = "ftheta:" + sc.theta;
    validate(sc);
#ifdef _OPENMP
    if (sc.threads > 0) omp_set_num_threads(sc.threads);
#endif
    if (sc.dry_run) {
      if (sc.builtin.rfind("ftheta:", 0) != 0) load_map(sc);
      std::cout << config_json(cmd, sc).dump(2) << '\n';
      return 0;
    }
    const json res = run(cmd, sc);
    if (sc.json_out) {
      std::cout << res.dump() << '\n';
    } else {
      std::cout << cmd << ": ok\n";
      for (const auto& [k, v] : res.items())
        if (k != "subcommand" && k != "result" && k != "attractors") std::cout << "  " << k << ": " << v.dump() << '\n';
    }
    return 0;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis not met: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
