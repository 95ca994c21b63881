#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/iostream.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "riemann_avg/experiments.hpp"
#include "riemann_avg/oracles.hpp"
#include "riemann_avg/selftest.hpp"
#include "riemann_avg/sphere_mean.hpp"

namespace py = pybind11;
using namespace ravg;

namespace {

StepSchedule schedule_from_args(const std::string& kind, double c, double alpha,
                                double gamma) {
  if (kind == "PolynomialDecay") return StepSchedule::polynomial(c, alpha);
  if (kind == "Constant") return StepSchedule::constant(gamma);
  throw DomainError("unknown schedule kind '" + kind + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Riemannian SGD with streaming iterate averaging";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<SingularityError>(m, "SingularityError", PyExc_ArithmeticError);
  py::register_exception<AveragingDomainError>(m, "AveragingDomainError",
                                               PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Manifold>(m, "Manifold")
      .def_static("euclidean", &Manifold::euclidean, py::arg("d"))
      .def_static("sphere", &Manifold::sphere, py::arg("d"))
      .def_static("grassmann", &Manifold::grassmann, py::arg("d"), py::arg("k"))
      .def_property_readonly("ambient_dim", &Manifold::ambient_dim)
      .def_property_readonly("subspace_dim", &Manifold::subspace_dim)
      .def("__eq__", [](const Manifold& a, const Manifold& b) { return a == b; });

  py::class_<ManifoldPoint>(m, "ManifoldPoint")
      .def(py::init<Manifold, Eigen::MatrixXd>(), py::arg("space"), py::arg("coords"))
      .def_readonly("space", &ManifoldPoint::space)
      .def_readonly("coords", &ManifoldPoint::coords);

  py::class_<TangentVector>(m, "TangentVector")
      .def(py::init<ManifoldPoint, Eigen::MatrixXd>(), py::arg("base"), py::arg("vec"))
      .def_readonly("base", &TangentVector::base)
      .def_readonly("vec", &TangentVector::vec)
      .def("norm", &TangentVector::norm);

  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"),
           py::arg("stream_index") = 0)
      .def("normal", &RngStream::normal)
      .def("uniform", &RngStream::uniform);

  m.def("project_tangent", &project_tangent, py::arg("x"), py::arg("w"));
  m.def("retract", &retract, py::arg("x"), py::arg("v"));
  m.def("retract_raw", &retract_raw, py::arg("x"), py::arg("w"));
  m.def("inverse_retract", &inverse_retract, py::arg("x"), py::arg("y"));
  m.def("exp_map", &exp_map, py::arg("x"), py::arg("v"));
  m.def("log_map", &log_map, py::arg("x"), py::arg("y"));
  m.def("parallel_transport_sphere", &parallel_transport_sphere, py::arg("x"),
        py::arg("y"), py::arg("v"));
  m.def("principal_angles",
        [](const ManifoldPoint& x, const ManifoldPoint& y) {
          return principal_angles(x, y).theta;
        },
        py::arg("x"), py::arg("y"));
  m.def("subspace_distances",
        [](const ManifoldPoint& x, const ManifoldPoint& y) {
          SubspaceDistances d = subspace_distances(x, y);
          return py::make_tuple(d.arc, d.frobenius, d.retraction);
        },
        py::arg("x"), py::arg("y"), "returns (arc, frobenius, retraction_norm)");
  m.def("geodesic_distance", &geodesic_distance, py::arg("x"), py::arg("y"));
  m.def("random_point", &random_point, py::arg("space"), py::arg("rng"));
  m.def("random_tangent", &random_tangent, py::arg("x"), py::arg("rng"), py::arg("norm"));

  py::class_<StepSchedule>(m, "StepSchedule")
      .def_static("polynomial", &StepSchedule::polynomial, py::arg("c"), py::arg("alpha"))
      .def_static("constant", &StepSchedule::constant, py::arg("gamma"))
      .def("label", &StepSchedule::label);
  m.def("step_size", &step_size, py::arg("schedule"), py::arg("n"));

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("iters", &Trajectory::iters)
      .def_readonly("gamma", &Trajectory::gamma)
      .def_readonly("err_sgd", &Trajectory::err_sgd)
      .def_readonly("err_avg", &Trajectory::err_avg)
      .def_readonly("seed", &Trajectory::seed)
      .def_readonly("metric_id", &Trajectory::metric_id);

  m.def("sgd_step",
        [](const ManifoldPoint& x, const TangentVector& g, double gamma,
           bool exponential) {
          return sgd_step(x, g, gamma,
                          exponential ? MapKind::Exponential : MapKind::Retraction);
        },
        py::arg("x"), py::arg("g"), py::arg("gamma"), py::arg("exponential") = false);
  m.def("streaming_average_step",
        [](const ManifoldPoint& prev, const ManifoldPoint& x_n, std::int64_t n,
           bool exponential) {
          return streaming_average_step(
              prev, x_n, n, exponential ? MapKind::Exponential : MapKind::Retraction);
        },
        py::arg("x_tilde_prev"), py::arg("x_n"), py::arg("n"),
        py::arg("exponential") = false);

  py::class_<PcaProblem>(m, "PcaProblem")
      .def_static("from_covariance", &PcaProblem::from_covariance, py::arg("h"),
                  py::arg("k"))
      .def_readonly("H", &PcaProblem::H)
      .def_readonly("k", &PcaProblem::k)
      .def_readonly("eigvals", &PcaProblem::eigvals)
      .def_readonly("x_star", &PcaProblem::x_star)
      .def("eigengap", &PcaProblem::eigengap);

  m.def("rayleigh_value", &rayleigh_value, py::arg("x"), py::arg("h"));
  m.def("riemannian_grad", &riemannian_grad, py::arg("x"), py::arg("hn"));
  m.def("hessian_apply", &hessian_apply, py::arg("x_star"), py::arg("h"),
        py::arg("delta"));
  m.def("power_update", &power_update, py::arg("x"), py::arg("hn"), py::arg("gamma"));
  m.def("oja_update", &oja_update, py::arg("x"), py::arg("hn"), py::arg("gamma"));
  m.def("yang_update", &yang_update, py::arg("x"), py::arg("hn"), py::arg("gamma"));
  m.def("rsgd_update", &rsgd_update, py::arg("x"), py::arg("hn"), py::arg("gamma"));
  m.def("pca_average_power", &pca_average_power, py::arg("x_tilde"), py::arg("x_n"),
        py::arg("n"));
  m.def("pca_average_retraction", &pca_average_retraction, py::arg("x_tilde"),
        py::arg("x_n"), py::arg("n"));
  m.def("eigengap_of_average",
        [](const std::vector<ManifoldPoint>& frames) {
          EigengapReport r = eigengap_of_average(frames);
          return py::make_tuple(r.gap, r.spectrum);
        },
        py::arg("frames"), "returns (gap, spectrum)");

  py::class_<SpectrumSpec>(m, "SpectrumSpec")
      .def(py::init([](int d, int k, double alpha, double beta, bool random_eigvecs,
                       std::uint64_t seed) {
             SpectrumSpec spec;
             spec.d = d;
             spec.k = k;
             spec.alpha = alpha;
             spec.beta = beta;
             spec.eigvecs = random_eigvecs ? SpectrumSpec::Eigvecs::RandomOrthogonal
                                           : SpectrumSpec::Eigvecs::Identity;
             spec.eigvec_seed = seed;
             return spec;
           }),
           py::arg("d"), py::arg("k"), py::arg("alpha") = 1.0, py::arg("beta") = 0.2,
           py::arg("random_eigvecs") = false, py::arg("seed") = 0);
  m.def("spectrum_eigenvalues", &spectrum_eigenvalues, py::arg("spec"));
  m.def("make_covariance",
        [](const SpectrumSpec& spec) {
          CovarianceModel model = make_covariance(spec);
          return py::make_tuple(model.H, model.problem);
        },
        py::arg("spec"), "returns (H, problem)");

  py::class_<MatrixStream>(m, "MatrixStream")
      .def_static("rank_one_gaussian", &MatrixStream::rank_one_gaussian, py::arg("h"),
                  py::arg("seed"), py::arg("stream_index") = 0)
      .def_static("counterexample_planar", &MatrixStream::counterexample_planar,
                  py::arg("seed"), py::arg("stream_index") = 0)
      .def_static("fixed", &MatrixStream::fixed, py::arg("h"), py::arg("seed") = 0)
      .def("with_stream", &MatrixStream::with_stream, py::arg("stream_index"))
      .def("sample", [](MatrixStream& s) { return sample_stream(s); });
  m.def("counterexample_covariance", &counterexample_covariance);
  m.def("counterexample_claimed_eigenvalues", &counterexample_claimed_eigenvalues);

  m.def("run_streaming_pca",
        [](const MatrixStream& stream, const PcaProblem& problem,
           const StepSchedule& schedule, std::int64_t n_iters,
           std::uint64_t replicate_index, const std::string& update_rule,
           const std::string& average_rule, int record_every) {
          PcaUpdateRule update =
              update_rule == "RSGD" ? PcaUpdateRule::Rsgd : PcaUpdateRule::Power;
          PcaAverageRule average = average_rule == "RetractionAvg"
                                       ? PcaAverageRule::RetractionAvg
                                       : PcaAverageRule::PowerAvg;
          PcaRunResult r = run_streaming_pca(stream, problem, schedule, n_iters,
                                             replicate_index, update, average,
                                             record_every);
          return py::make_tuple(r.traj, r.x_final, r.x_avg_final);
        },
        py::arg("stream"), py::arg("problem"), py::arg("schedule"), py::arg("n_iters"),
        py::arg("replicate_index") = 0, py::arg("update_rule") = "Power",
        py::arg("average_rule") = "PowerAvg", py::arg("record_every") = 20,
        "returns (trajectory, x_final, x_avg_final)");

  py::class_<SphereMeanProblem>(m, "SphereMeanProblem")
      .def(py::init<ManifoldPoint, double>(), py::arg("center"), py::arg("dispersion"))
      .def_readonly("mu", &SphereMeanProblem::mu)
      .def_readonly("dispersion", &SphereMeanProblem::dispersion);
  m.def("sample_sphere_point", &sample_sphere_point, py::arg("problem"), py::arg("rng"));
  m.def("frechet_gradient_sample", &frechet_gradient_sample, py::arg("x"), py::arg("z"));
  m.def("karcher_mean_bruteforce", &karcher_mean_bruteforce, py::arg("points"),
        py::arg("tol"));
  m.def("run_sphere_mean",
        [](const SphereMeanProblem& problem, const StepSchedule& schedule,
           std::int64_t n_iters, std::uint64_t seed, std::uint64_t stream_index,
           int record_every, int karcher_upto) {
          SphereMeanRunResult r = run_sphere_mean(problem, schedule, n_iters, seed,
                                                  stream_index, record_every, karcher_upto);
          std::vector<py::tuple> checks;
          checks.reserve(r.karcher.size());
          for (const auto& c : r.karcher)
            checks.push_back(py::make_tuple(c.n, c.karcher_sq, c.tangent_bound));
          return py::make_tuple(r.traj, checks);
        },
        py::arg("problem"), py::arg("schedule"), py::arg("n_iters"), py::arg("seed"),
        py::arg("stream_index") = 0, py::arg("record_every") = 20,
        py::arg("karcher_upto") = 50,
        "returns (trajectory, [(n, karcher_sq, tangent_bound)])");

  m.def("pca_asymptotic_covariance",
        [](const Eigen::VectorXd& eigvals, int k, double kappa) {
          CovariancePrediction p = pca_asymptotic_covariance(eigvals, k, kappa);
          return py::make_tuple(p.C, p.trace);
        },
        py::arg("eigvals_desc"), py::arg("k"), py::arg("kappa") = 1.0,
        "returns (C, trace)");
  m.def("sandwich_trace", &sandwich_trace, py::arg("hessian_eigs"),
        py::arg("sigma_diag"));
  m.def("fit_loglog_slope",
        [](const Trajectory& traj, const std::string& field, std::int64_t n_min) {
          SlopeFit f = fit_loglog_slope(
              traj, field == "err_sgd" ? TrajField::ErrSgd : TrajField::ErrAvg, n_min);
          py::dict out;
          out["slope"] = f.slope;
          out["intercept"] = f.intercept;
          out["r2"] = f.r2;
          out["n_points"] = f.n_points;
          out["n_excluded"] = f.n_excluded;
          return out;
        },
        py::arg("trajectory"), py::arg("field") = "err_avg", py::arg("n_min") = 1);

  m.def("run_config", &cmd_run, py::arg("config_path"), py::arg("workers") = 1,
        "execute an experiment config file; returns the CLI exit code");
  m.def("report_dir", &cmd_report, py::arg("csv_dir"));
  m.def("selftest", [] {
    py::scoped_ostream_redirect redirect;
    return run_selftest(std::cout);
  });
}
