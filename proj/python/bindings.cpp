#include <memory>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "zklab/certify.hpp"
#include "zklab/commands.hpp"
#include "zklab/config.hpp"
#include "zklab/error.hpp"
#include "zklab/evolution.hpp"
#include "zklab/ground_state.hpp"
#include "zklab/modulation.hpp"
#include "zklab/profiles.hpp"
#include "zklab/transverse.hpp"

namespace py = pybind11;
using namespace zk;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const PlanarField& f) {
  Array a({f.grid.n1, f.grid.n2});
  std::copy(f.values.begin(), f.values.end(), a.mutable_data());
  return a;
}

Array to_numpy(const std::vector<double>& v) {
  Array a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

// Arrays are (n1, n2) samples on the centred box [-box1/2, box1/2) x [-box2/2, box2/2).
PlanarField from_numpy(const Array& a, double box1, double box2) {
  if (a.ndim() != 2) throw PreconditionError("expected a 2-d array");
  const int n1 = static_cast<int>(a.shape(0)), n2 = static_cast<int>(a.shape(1));
  PlanarField f(PlanarGrid::centered(box1, box2, n1, n2));
  std::copy(a.data(), a.data() + f.size(), f.values.begin());
  return f;
}

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

// Owns everything a ModulationContext refers to.
struct Modulation {
  std::shared_ptr<const RadialProfile> p;
  std::shared_ptr<const ProfileSet> s;
  std::shared_ptr<const WeightFamily> w;
  std::unique_ptr<ModulationContext> ctx;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Zakharov-Kuznetsov soliton numerics";

  auto base_value = py::handle(PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", base_value);
  py::register_exception<PreconditionError>(m, "PreconditionError", base_value);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<DependencyError>(m, "DependencyError", PyExc_RuntimeError);

  py::class_<RadialProfile, std::shared_ptr<RadialProfile>>(m, "RadialProfile")
      .def_readonly("q0", &RadialProfile::q0)
      .def_readonly("tail_coeff", &RadialProfile::tail_coeff)
      .def_readonly("residual", &RadialProfile::residual)
      .def_property_readonly("r", [](const RadialProfile& p) { return to_numpy(p.r); })
      .def_property_readonly("q", [](const RadialProfile& p) { return to_numpy(p.q); })
      .def("mass", &RadialProfile::mass)
      .def("gradient_sq", &RadialProfile::gradient_sq)
      .def("value", [](const RadialProfile& p, const py::array_t<double>& r) {
        return py::vectorize([&p](double x) { return p.value(x); })(r);
      })
      .def("sample", [](const RadialProfile& p, double box1, double box2, int n1, int n2) {
        return to_numpy(sample_to_plane(p, PlanarGrid::centered(box1, box2, n1, n2)));
      }, py::arg("box1"), py::arg("box2"), py::arg("n1"), py::arg("n2"));

  m.def("solve_ground_state", [](double tol, double r_max) {
    GroundStateOptions o;
    o.tol = tol;
    o.r_max = r_max;
    return std::make_shared<RadialProfile>(solve_ground_state(o));
  }, py::arg("tol") = 1e-9, py::arg("r_max") = 20.0);

  m.def("theta", [](const RadialProfile& p, double half_width, int n) {
    return compute_theta(transverse_profile(p, half_width, n));
  }, py::arg("profile"), py::arg("half_width") = 64.0, py::arg("n") = 4096);

  m.def("invariants", [](const Array& a, double box1, double box2) {
    const Invariants inv = invariants(from_numpy(a, box1, box2));
    return py::dict(py::arg("mass") = inv.mass, py::arg("energy") = inv.energy, py::arg("gradient") = inv.gradient);
  }, py::arg("field"), py::arg("box1"), py::arg("box2"));

  m.def("gagliardo_nirenberg_defect", [](const Array& a, double box1, double box2, double ground_state_mass) {
    return gagliardo_nirenberg_defect(from_numpy(a, box1, box2), ground_state_mass);
  }, py::arg("field"), py::arg("box1"), py::arg("box2"), py::arg("ground_state_mass"));

  m.def("evolve", [](const Array& a, double box1, double box2, double t_end, double dt, int stride,
                     double frame_speed, bool nonlinear) {
    EvolutionOptions o;
    o.dt = dt;
    o.stride = stride;
    o.frame_speed = frame_speed;
    o.nonlinear = nonlinear;
    const PlanarField f0 = from_numpy(a, box1, box2);
    Trajectory tr;
    {
      py::gil_scoped_release release;
      tr = evolve(f0, t_end, o);
    }
    Array snaps({static_cast<py::ssize_t>(tr.snapshots.size()), static_cast<py::ssize_t>(f0.grid.n1),
                 static_cast<py::ssize_t>(f0.grid.n2)});
    double* out = snaps.mutable_data();
    for (const auto& s : tr.snapshots) out = std::copy(s.values.begin(), s.values.end(), out);
    return py::dict(py::arg("times") = to_numpy(tr.times), py::arg("mass") = to_numpy(tr.mass),
                    py::arg("energy") = to_numpy(tr.energy), py::arg("gradient") = to_numpy(tr.gradient),
                    py::arg("snapshot_times") = to_numpy(tr.snapshot_times), py::arg("snapshots") = snaps,
                    py::arg("halted") = tr.halted, py::arg("halt_reason") = tr.halt_reason);
  }, py::arg("field"), py::arg("box1"), py::arg("box2"), py::arg("t_end"), py::arg("dt") = 0.01,
     py::arg("stride") = 10, py::arg("frame_speed") = 0.0, py::arg("nonlinear") = true);

  py::class_<ProfileSet, std::shared_ptr<ProfileSet>>(m, "ProfileSet")
      .def_readonly("theta", &ProfileSet::theta)
      .def_readonly("PQ", &ProfileSet::PQ)
      .def_readonly("F_sq", &ProfileSet::F_sq)
      .def_readonly("c1", &ProfileSet::c1)
      .def_readonly("c2", &ProfileSet::c2)
      .def_property_readonly("P", [](const ProfileSet& s) { return to_numpy(s.P); })
      .def_property_readonly("extent", [](const ProfileSet& s) {
        const PlanarGrid& g = s.grid;
        return py::make_tuple(g.origin1, g.origin1 + g.length1, g.origin2, g.origin2 + g.length2);
      })
      .def("min_admissible_b", [](const ProfileSet& s) { return min_admissible_b(s); })
      .def("remainder_sample", [](const ProfileSet& s, double b) {
        const RemainderSample r = remainder_sample(s, b);
        return py::dict(py::arg("b") = r.b, py::arg("mass_defect") = r.mass_defect,
                        py::arg("energy_defect") = r.energy_defect, py::arg("psi_defect") = r.psi_defect,
                        py::arg("bound_constant") = r.bound_constant);
      });

  m.def("build_profiles", [](const RadialProfile& p, double h) {
    ProfileOptions o;
    o.h = h;
    py::gil_scoped_release release;
    return std::make_shared<ProfileSet>(build_profiles(p, o));
  }, py::arg("profile"), py::arg("h") = 0.125);

  m.def("certify", [](const RadialProfile& p, const std::string& op, double box, std::vector<int> resolutions,
                      int oracle_n) {
    CertifyOptions o;
    o.box = box;
    o.resolutions = std::move(resolutions);
    o.oracle_n = oracle_n;
    o.wide_box = 0.0;
    nlohmann::json j;
    {
      py::gil_scoped_release release;
      j = to_json(certify(p, parse_operator_kind(op), o));
    }
    return to_python(j);
  }, py::arg("profile"), py::arg("op") = "L", py::arg("box") = 24.0,
     py::arg("resolutions") = std::vector<int>{96, 128, 160}, py::arg("oracle_n") = 64);

  py::class_<Modulation>(m, "Modulation")
      .def(py::init([](std::shared_ptr<RadialProfile> p, std::shared_ptr<ProfileSet> s, double B, double A) {
        auto mod = std::make_unique<Modulation>();
        mod->p = std::move(p);
        mod->s = std::move(s);
        mod->w = std::make_shared<WeightFamily>(B, A);
        mod->ctx = std::make_unique<ModulationContext>(*mod->p, *mod->s, *mod->w);
        return mod;
      }), py::arg("profile"), py::arg("profiles"), py::arg("B") = 128.0, py::arg("A") = 64.0)
      .def("synthesize", [](const Modulation& mod, double box1, double box2, int n1, int n2, double lambda,
                            double b, double x1, double x2) {
        return to_numpy(synthesize(*mod.ctx, PlanarGrid::centered(box1, box2, n1, n2), {lambda, b, x1, x2}));
      }, py::arg("box1"), py::arg("box2"), py::arg("n1"), py::arg("n2"), py::arg("lam") = 1.0, py::arg("b") = 0.0,
         py::arg("x1") = 0.0, py::arg("x2") = 0.0)
      .def("decompose", [](const Modulation& mod, const Array& a, double box1, double box2, double b_guess) {
        const PlanarField phi = from_numpy(a, box1, box2);
        const ModulationState st = decompose(*mod.ctx, phi, initial_guess(phi, mod.p->q0, b_guess));
        return py::dict(py::arg("lam") = st.params.lambda, py::arg("b") = st.params.b, py::arg("x1") = st.params.x1,
                        py::arg("x2") = st.params.x2, py::arg("eps_l2") = st.eps_l2,
                        py::arg("iterations") = st.iterations, py::arg("eps") = to_numpy(st.eps));
      }, py::arg("field"), py::arg("box1"), py::arg("box2"), py::arg("b_guess") = 0.0);

  m.def("default_config", [] { return to_text(RunConfig{}); });
  m.def("check_config", [](const std::string& text) { return to_text(parse_config(text)); }, py::arg("text"));
  m.def("config_hash", [](const std::string& text) { return config_hash(parse_config(text)); }, py::arg("text"));
  m.def("run", [](const std::string& verb, const std::string& config_text, const std::string& out, int jobs) {
    RunConfig c = parse_config(config_text);
    CommandOptions o;
    if (!out.empty()) o.out = out;
    o.jobs = jobs;
    CommandResult r;
    {
      py::gil_scoped_release release;
      r = run_verb(verb, c, o);
    }
    py::dict d = to_python(r.report);
    d["dir"] = r.dir.string();
    return d;
  }, py::arg("verb"), py::arg("config_text") = "", py::arg("out") = "", py::arg("jobs") = 1);
  m.attr("verbs") = verbs();
}
