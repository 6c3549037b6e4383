#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ratdyn/chords.hpp"
#include "ratdyn/circle_family.hpp"
#include "ratdyn/expansion.hpp"
#include "ratdyn/roots.hpp"

namespace py = pybind11;
using namespace ratdyn;

namespace {

// Sphere points cross the boundary as complex numbers, infinity as None.
using PyPoint = std::optional<cd>;

SpherePoint to_point(const PyPoint& p) { return p ? SpherePoint(*p) : SpherePoint::infinity(); }
PyPoint from_point(const SpherePoint& p) {
  if (p.is_infinity()) return std::nullopt;
  return p.value();
}

py::dict periodic_dict(const PeriodicPoint& p) {
  py::dict d;
  d["point"] = from_point(p.point);
  d["period"] = p.period;
  d["multiplier"] = p.multiplier;
  d["class"] = to_string(p.cls);
  d["residual"] = p.residual;
  return d;
}

py::dict ray_dict(const Ray& r) {
  py::dict d;
  d["basin"] = r.basin;
  d["angle"] = r.angle.str();
  d["landed"] = r.landed;
  d["landing_point"] = r.landing_point ? py::cast(from_point(*r.landing_point)) : py::none();
  d["levels"] = r.levels;
  std::vector<PyPoint> pl;
  for (const auto& p : r.polyline) pl.push_back(from_point(p));
  d["polyline"] = pl;
  return d;
}

std::vector<PyPoint> points_out(const std::vector<SpherePoint>& v) {
  std::vector<PyPoint> out;
  for (const auto& p : v) out.push_back(from_point(p));
  return out;
}

std::vector<SpherePoint> points_in(const std::vector<PyPoint>& v) {
  std::vector<SpherePoint> out;
  for (const auto& p : v) out.push_back(to_point(p));
  return out;
}

RayTracer tracer(const RationalMap& f, const PyPoint& a, int d, int basin) {
  return RayTracer(f, build_chart(f, to_point(a), d), basin);
}

BoundarySampleSet samples_of(const std::vector<PyPoint>& pts) {
  BoundarySampleSet s;
  for (const auto& p : pts) {
    const SpherePoint z = to_point(p);
    s.points.push_back({z, z, z});
  }
  return s;
}

}  // namespace

PYBIND11_MODULE(ratdyn, m) {
  m.doc() = "Basins, internal rays, chords and periodic points of rational maps on the sphere";

  static py::exception<Error> exc_error(m, "Error", PyExc_RuntimeError);
  static py::exception<HypothesisError> exc_hyp(m, "HypothesisError", exc_error.ptr());
  static py::exception<ConvergenceError> exc_conv(m, "ConvergenceError", exc_error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const HypothesisError& e) {
      py::set_error(exc_hyp, e.what());
    } catch (const ConvergenceError& e) {
      py::set_error(exc_conv, e.what());
    } catch (const Error& e) {
      py::set_error(exc_error, e.what());
    }
  });

  py::class_<RationalMap>(m, "RationalMap")
      .def(py::init<Poly, Poly>(), py::arg("numer"), py::arg("denom"))
      .def("__call__", [](const RationalMap& f, const PyPoint& z) { return from_point(f(to_point(z))); })
      .def_property_readonly("degree", &RationalMap::degree)
      .def_property_readonly("numer", &RationalMap::numer)
      .def_property_readonly("denom", &RationalMap::denom)
      .def("wronskian", &RationalMap::wronskian);

  m.def("compose", &compose);
  m.def("builtin", [](const std::string& name) {
    if (name == "z2") return RationalMap({0.0, 0.0, 1.0}, {1.0});
    if (name == "basilica") return RationalMap({-1.0, 0.0, 1.0}, {1.0});
    if (name == "basilica2") {
      const RationalMap f({-1.0, 0.0, 1.0}, {1.0});
      return compose(f, f);
    }
    if (name == "newton-cubic") return RationalMap({1.0, 0.0, 0.0, 2.0}, {0.0, 0.0, 3.0});
    throw Error("unknown builtin '" + name + "'");
  });

  m.def("find_roots", [](const Poly& p) { return find_roots(p).roots; });
  m.def("spherical_distance", [](const PyPoint& a, const PyPoint& b) { return spherical_distance(to_point(a), to_point(b)); });
  m.def("spherical_derivative", [](const RationalMap& f, const PyPoint& z) { return spherical_derivative(f, to_point(z)); });
  m.def("critical_points", [](const RationalMap& f) { return points_out(critical_points(f)); });
  m.def("orbit", [](const RationalMap& f, const PyPoint& z, int n) { return points_out(orbit(f, to_point(z), n)); });
  m.def("periodic_points", [](const RationalMap& f, int n) {
    py::list out;
    for (const auto& p : periodic_points(f, n).points) out.append(periodic_dict(p));
    return out;
  });
  m.def("find_attractors", [](const RationalMap& f, int max_period) {
    py::list out;
    for (const auto& p : find_attractors(f, max_period)) out.append(periodic_dict(p));
    return out;
  }, py::arg("map"), py::arg("max_period") = 4);
  m.def("eventually_periodic_test", [](const RationalMap& f, const PyPoint& z, int l, int q, double tol) {
    return eventually_periodic_test(f, to_point(z), l, q, tol);
  }, py::arg("map"), py::arg("z"), py::arg("preperiod_max") = 20, py::arg("period_max") = 20, py::arg("tol") = 1e-8);

  m.def("angle_eventual_period", [](const std::string& t, int d) { return angle_eventual_period(Angle::parse(t), d); });

  m.def("boundary_samples", [](const RationalMap& f, int i, int j, int res, double tol, std::size_t max_samples) {
    const auto atlas = classify(f, find_attractors(f), Window{}, res);
    BoundaryOptions bo;
    bo.max_samples = max_samples;
    std::vector<PyPoint> out;
    for (const auto& s : boundary_intersection(f, atlas, i, j, tol, bo).points) out.push_back(from_point(s.point));
    return out;
  }, py::arg("map"), py::arg("i"), py::arg("j"), py::arg("res") = 256, py::arg("tol") = 1e-8,
        py::arg("max_samples") = 256);

  m.def("trace_ray", [](const RationalMap& f, const PyPoint& a, int d, const std::string& t) {
    auto tr = tracer(f, a, d, 0);
    return ray_dict(tr.trace(Angle::parse(t)));
  }, py::arg("map"), py::arg("attractor"), py::arg("degree"), py::arg("angle"));

  m.def("catalog", [](const RationalMap& f, const PyPoint& a1, const PyPoint& a2, int d, int bound, double tol) {
    auto t1 = tracer(f, a1, d, 0);
    auto t2 = tracer(f, a2, d, 1);
    py::list out;
    for (const auto& e : boundary_periodic_catalog(f, t1, t2, bound, tol)) {
      py::dict row = periodic_dict(e.junction);
      row["level"] = e.level;
      row["angle1"] = e.chord.ray1.angle.str();
      row["angle2"] = e.chord.ray2.angle.str();
      out.append(row);
    }
    return out;
  }, py::arg("map"), py::arg("attractor1"), py::arg("attractor2"), py::arg("degree") = 2,
        py::arg("bound") = 3, py::arg("tol") = 1e-7);

  m.def("pullback", [](const RationalMap& f, const PyPoint& a1, const PyPoint& a2, int d, const std::string& s1,
                       const std::string& s2, int Q) {
    auto t1 = tracer(f, a1, d, 0);
    auto t2 = tracer(f, a2, d, 1);
    const Chord c = make_chord(f, t1.trace(Angle::parse(s1)), t2.trace(Angle::parse(s2)), 1e-7, d);
    const auto [lim, rep] = pullback_periodic(f, c, t1, t2, Q);
    py::dict out = periodic_dict(rep.junction);
    out["converged"] = rep.converged;
    out["d_h"] = rep.d_h;
    out["pushed"] = rep.pushed;
    out["Q"] = rep.Q;
    out["angle1"] = lim.ray1.angle.str();
    out["angle2"] = lim.ray2.angle.str();
    return out;
  }, py::arg("map"), py::arg("attractor1"), py::arg("attractor2"), py::arg("degree"), py::arg("angle1"),
        py::arg("angle2"), py::arg("Q") = 0);

  m.def("hausdorff_distance", [](const std::vector<PyPoint>& a, const std::vector<PyPoint>& b) {
    return hausdorff_distance(points_in(a), points_in(b));
  });

  m.def("mane_check", [](const RationalMap& f, const std::vector<PyPoint>& pts, int n_max, bool exclude_critical) {
    ScreeningOptions so;
    so.exclude_critical = exclude_critical;
    const auto r = mane_check(f, samples_of(pts), n_max, so);
    py::dict d;
    d["per_n"] = r.per_n;
    d["certified_N"] = r.certified_N;
    d["excluded"] = r.excluded.size();
    return d;
  }, py::arg("map"), py::arg("samples"), py::arg("n_max"), py::arg("exclude_critical") = false);

  m.def("closing_refine", [](const RationalMap& f, const PyPoint& seed, int L) {
    const auto r = closing_refine(f, to_point(seed), L);
    py::dict d = periodic_dict(r.refined);
    d["residual"] = r.residual;
    d["seed_distance"] = r.seed_distance;
    return d;
  });

  m.def("make_f_theta", &make_f_theta);
  m.def("rotation_number", [](cd rho, int n) { return rotation_number(rho, n).theta_hat; }, py::arg("rho"),
        py::arg("n") = 100000);
  m.def("solve_rho", [](double theta, double tol) {
    const auto s = solve_rho(theta, tol);
    py::dict d;
    d["rho"] = s.rho;
    d["theta_hat"] = s.estimate.theta_hat;
    d["error_bound"] = s.estimate.error_bound;
    d["arc"] = std::make_pair(s.arc_lo, s.arc_hi);
    d["plateau"] = s.plateau;
    return d;
  }, py::arg("theta"), py::arg("tol") = 1e-6);
  m.def("verify_no_circle_periodics", [](cd rho, int period_max, double tol) {
    py::list out;
    for (const auto& p : verify_no_circle_periodics(rho, period_max, tol).findings) out.append(periodic_dict(p));
    return out;
  });
}
