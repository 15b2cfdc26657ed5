#include <optional>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "amplituder/commands.hpp"

namespace py = pybind11;
using namespace ampl;

namespace {

MultiIndex mi(const std::vector<int>& e) { return MultiIndex(e); }

py::tuple key_tuple(const MultiIndex& a) {
    py::tuple t(a.dim());
    for (int i = 0; i < a.dim(); ++i) t[i] = a.exp[i];
    return t;
}

// Exponent-keyed coefficient map as {tuple: coefficient}.
template <typename Map>
py::dict term_dict(const Map& terms) {
    py::dict d;
    for (const auto& [alpha, value] : terms) d[key_tuple(alpha)] = py::cast(value);
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spectral dispersion analysis, amplitude-equation derivation, and "
              "verification experiments for pattern-forming systems.";

    auto& err = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", err.ptr());
    py::register_exception<ParseError>(m, "ParseError", err.ptr());
    py::register_exception<PreconditionFailure>(m, "PreconditionFailure", err.ptr());
    py::register_exception<SolverError>(m, "SolverError", err.ptr());
    py::register_exception<NewtonDiverged>(m, "NewtonDiverged", err.ptr());
    py::register_exception<SingularJacobian>(m, "SingularJacobian", err.ptr());
    py::register_exception<DegenerateFit>(m, "DegenerateFit", err.ptr());

    py::class_<MatrixPolynomial>(m, "MatrixPolynomial",
                                 "Matrix-valued polynomial over d commuting variables; "
                                 "eval_symbol gives P(i xi).")
        .def(py::init<int, int>(), py::arg("dim"), py::arg("size"))
        .def_property_readonly("dim", &MatrixPolynomial::dim)
        .def_property_readonly("size", &MatrixPolynomial::size)
        .def_property_readonly("degree", &MatrixPolynomial::degree)
        .def("add_term",
             [](MatrixPolynomial& p, const std::vector<int>& a, const Eigen::MatrixXcd& c) {
                 p.add_term(mi(a), c);
             },
             py::arg("alpha"), py::arg("matrix"))
        .def("add_scalar_term",
             [](MatrixPolynomial& p, const std::vector<int>& a, Complex c) {
                 p.add_scalar_term(mi(a), c);
             },
             py::arg("alpha"), py::arg("value"))
        .def("coeff",
             [](const MatrixPolynomial& p, const std::vector<int>& a) { return p.coeff(mi(a)); },
             py::arg("alpha"))
        .def("coeffs", [](const MatrixPolynomial& p) { return term_dict(p.coeffs()); })
        .def("eval_at", &MatrixPolynomial::eval_at, py::arg("z"))
        .def("eval_symbol", &MatrixPolynomial::eval_symbol, py::arg("xi"))
        .def("coeff_distance", &MatrixPolynomial::coeff_distance, py::arg("other"))
        .def("conjugation_symmetric", &MatrixPolynomial::conjugation_symmetric,
             py::arg("tol") = 0.0)
        .def("__eq__",
             [](const MatrixPolynomial& a, const MatrixPolynomial& b) { return a == b; },
             py::is_operator());

    py::class_<PolynomialNonlinearity>(m, "PolynomialNonlinearity",
                                       "Polynomial map C^m -> C^m keyed by exponent vectors.")
        .def(py::init<int>(), py::arg("components"))
        .def_property_readonly("components", &PolynomialNonlinearity::components)
        .def_property_readonly("degree", &PolynomialNonlinearity::degree)
        .def("add_term",
             [](PolynomialNonlinearity& f, const std::vector<int>& e, int comp, Complex c) {
                 f.add_term(mi(e), comp, c);
             },
             py::arg("expo"), py::arg("component"), py::arg("value"))
        .def("add_vector_term",
             [](PolynomialNonlinearity& f, const std::vector<int>& e, const Eigen::VectorXcd& c) {
                 f.add_term(mi(e), c);
             },
             py::arg("expo"), py::arg("coeff"))
        .def("eval", &PolynomialNonlinearity::eval, py::arg("u"))
        .def("terms", [](const PolynomialNonlinearity& f) { return term_dict(f.terms()); })
        .def("conjugation_symmetric", &PolynomialNonlinearity::conjugation_symmetric);

    py::class_<ReducedPolynomial>(m, "ReducedPolynomial",
                                  "Polynomial map in the amplitude variables.")
        .def_readonly("n_vars", &ReducedPolynomial::n_vars)
        .def_readonly("dim", &ReducedPolynomial::dim)
        .def_property_readonly("degree", &ReducedPolynomial::degree)
        .def("coeff",
             [](const ReducedPolynomial& r, const std::vector<int>& e) { return r.coeff(mi(e)); },
             py::arg("expo"))
        .def("terms", [](const ReducedPolynomial& r) { return term_dict(r.terms); })
        .def("eval", &ReducedPolynomial::eval, py::arg("A"))
        .def("max_imag_coeff", &ReducedPolynomial::max_imag_coeff);

    py::class_<Carrier>(m, "Carrier", "One resonant carrier e^{i j theta} with its mode vector.")
        .def(py::init([](int j, const Eigen::VectorXcd& w) {
                 Carrier c;
                 c.j = j;
                 c.w = w;
                 return c;
             }),
             py::arg("j"), py::arg("w"))
        .def_readwrite("j", &Carrier::j)
        .def_readwrite("w", &Carrier::w);

    py::class_<AnalysisOptions>(m, "AnalysisOptions")
        .def(py::init<>())
        .def_readwrite("tol_crit", &AnalysisOptions::tol_crit)
        .def_readwrite("margin", &AnalysisOptions::margin)
        .def_readwrite("cond_max", &AnalysisOptions::cond_max)
        .def_readwrite("eig_sep_tol", &AnalysisOptions::eig_sep_tol)
        .def_readwrite("j_max", &AnalysisOptions::j_max)
        .def_readwrite("max_order", &AnalysisOptions::max_order)
        .def_readwrite("fd_h", &AnalysisOptions::fd_h)
        .def_readwrite("xi_max", &AnalysisOptions::xi_max)
        .def_readwrite("xi_points", &AnalysisOptions::xi_points)
        .def_readwrite("ellipticity_c1", &AnalysisOptions::ellipticity_c1);

    py::class_<CriticalMode>(m, "CriticalMode")
        .def_readonly("j", &CriticalMode::j)
        .def_readonly("M", &CriticalMode::M)
        .def_readonly("eigenvalue", &CriticalMode::lambda)
        .def_readonly("w", &CriticalMode::w)
        .def_readonly("l", &CriticalMode::l)
        .def_readonly("Q", &CriticalMode::Q);

    py::class_<CriticalStructure>(m, "CriticalStructure")
        .def_readonly("omega", &CriticalStructure::omega)
        .def_readonly("k", &CriticalStructure::k)
        .def_readonly("D", &CriticalStructure::D)
        .def_readonly("M", &CriticalStructure::M)
        .def_readonly("symmetric_pairing", &CriticalStructure::symmetric_pairing)
        .def_readonly("n_pairs", &CriticalStructure::n_pairs)
        .def_readonly("modes", &CriticalStructure::modes)
        .def("eta", &CriticalStructure::eta, py::arg("epsilon"));

    py::class_<AnalysisReport>(m, "AnalysisReport")
        .def_readonly("passed", &AnalysisReport::pass)
        .def_readonly("notes", &AnalysisReport::notes)
        .def_readonly("max_condition", &AnalysisReport::max_condition)
        .def_readonly("ambiguity_count", &AnalysisReport::ambiguity_count)
        .def_readonly("symmetric_reduction_available",
                      &AnalysisReport::symmetric_reduction_available)
        .def_readonly("q_pair_distance", &AnalysisReport::q_pair_distance);

    py::class_<AnalyzeResult>(m, "AnalyzeResult")
        .def_readonly("critical", &AnalyzeResult::critical)
        .def_readonly("report", &AnalyzeResult::report);

    py::class_<AmplitudeSystem>(m, "AmplitudeSystem",
                                "Reduced evolution A_n' = Q_n A_n + eps R_n(A).")
        .def_readonly("n_comps", &AmplitudeSystem::n_comps)
        .def_readonly("symmetric", &AmplitudeSystem::symmetric)
        .def_readonly("omega", &AmplitudeSystem::omega)
        .def_readonly("k", &AmplitudeSystem::k)
        .def_readonly("D", &AmplitudeSystem::D)
        .def_readonly("M", &AmplitudeSystem::M)
        .def_readonly("j", &AmplitudeSystem::j)
        .def_readonly("Q", &AmplitudeSystem::Q)
        .def_readonly("R", &AmplitudeSystem::R)
        .def_readonly("w", &AmplitudeSystem::w)
        .def_readonly("l", &AmplitudeSystem::l)
        .def("eta", &AmplitudeSystem::eta, py::arg("epsilon"));

    py::class_<ExperimentBlock>(m, "ExperimentBlock",
                                "Raw key/value parameters of one [experiment ...] section.")
        .def_readonly("name", &ExperimentBlock::name)
        .def_readonly("entries", &ExperimentBlock::entries)
        .def("has", &ExperimentBlock::has, py::arg("key"))
        .def("get", &ExperimentBlock::get, py::arg("key"))
        .def("get_double", &ExperimentBlock::get_double, py::arg("key"))
        .def("get_int", &ExperimentBlock::get_int, py::arg("key"))
        .def("get_doubles", &ExperimentBlock::get_doubles, py::arg("key"))
        .def("get_ints", &ExperimentBlock::get_ints, py::arg("key"))
        .def("get_list", &ExperimentBlock::get_list, py::arg("key"))
        .def("set", &ExperimentBlock::set, py::arg("key"), py::arg("value"));

    py::class_<ProblemFile>(m, "ProblemFile",
                            "In-memory image of a problem file: operator model, carrier, "
                            "scan options, and per-command experiment blocks.")
        .def_readwrite("name", &ProblemFile::name)
        .def_readonly("dimension", &ProblemFile::dimension)
        .def_readonly("components", &ProblemFile::components)
        .def_readonly("slow_dimension", &ProblemFile::slow_dimension)
        .def_readonly("omega", &ProblemFile::omega)
        .def_readonly("k", &ProblemFile::k)
        .def("build_symbol", &ProblemFile::build_symbol)
        .def("build_nonlinearity", &ProblemFile::build_nonlinearity)
        .def("analysis_options", &ProblemFile::analysis_options)
        .def_property_readonly("experiment_names",
                               [](const ProblemFile& p) {
                                   std::vector<std::string> names;
                                   for (const auto& e : p.experiments) names.push_back(e.name);
                                   return names;
                               })
        .def("experiment",
             [](const ProblemFile& p, const std::string& section) -> py::object {
                 const ExperimentBlock* b = p.experiment(section);
                 return b ? py::cast(*b) : py::none();
             },
             py::arg("section"))
        .def("__eq__", [](const ProblemFile& a, const ProblemFile& b) { return a == b; },
             py::is_operator())
        .def("__repr__", [](const ProblemFile& p) {
            return "<ProblemFile '" + p.name + "' d=" + std::to_string(p.dimension) +
                   " m=" + std::to_string(p.components) + ">";
        });

    py::class_<DerivedProblem>(m, "DerivedProblem",
                               "Symbol, nonlinearity, analysis, and both reductions.")
        .def_readonly("P", &DerivedProblem::P)
        .def_readonly("f", &DerivedProblem::f)
        .def_readonly("analysis", &DerivedProblem::analysis)
        .def_readonly("general", &DerivedProblem::general)
        .def_property_readonly("symmetric",
                               [](const DerivedProblem& d) -> py::object {
                                   return d.symmetric ? py::cast(*d.symmetric) : py::none();
                               })
        .def("experiment_system",
             [](const DerivedProblem& d) { return d.experiment_system(); });

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("slope", &FitResult::slope)
        .def_readonly("intercept", &FitResult::intercept)
        .def_readonly("r_squared", &FitResult::r_squared);

    py::class_<ScalingPoint>(m, "ScalingPoint")
        .def_readonly("abscissa", &ScalingPoint::abscissa)
        .def_readonly("max_error", &ScalingPoint::max_error);

    py::class_<ScalingReport>(m, "ScalingReport")
        .def_readonly("points", &ScalingReport::points)
        .def_readonly("fitted_slope", &ScalingReport::fitted_slope)
        .def_readonly("intercept", &ScalingReport::intercept)
        .def_readonly("r_squared", &ScalingReport::r_squared)
        .def_readonly("expected_slope", &ScalingReport::expected_slope)
        .def_readonly("slope_tol", &ScalingReport::slope_tol)
        .def_readonly("passed", &ScalingReport::pass)
        .def_readonly("flags", &ScalingReport::flags);

    py::class_<ErrorScalingConfig>(m, "ErrorScalingConfig")
        .def(py::init<>())
        .def_readwrite("epsilons", &ErrorScalingConfig::epsilons)
        .def_readwrite("profiles", &ErrorScalingConfig::profiles)
        .def_readwrite("periods", &ErrorScalingConfig::periods)
        .def_readwrite("points", &ErrorScalingConfig::points)
        .def_readwrite("t0", &ErrorScalingConfig::t0)
        .def_readwrite("T0", &ErrorScalingConfig::T0)
        .def_readwrite("dt_factor", &ErrorScalingConfig::dt_factor)
        .def_readwrite("samples", &ErrorScalingConfig::samples)
        .def_readwrite("slope_tol", &ErrorScalingConfig::slope_tol)
        .def_readwrite("dealias", &ErrorScalingConfig::dealias);

    py::class_<SemigroupConfig>(m, "SemigroupConfig")
        .def(py::init<>())
        .def_readwrite("profile", &SemigroupConfig::profile)
        .def_readwrite("box_length", &SemigroupConfig::box_length)
        .def_readwrite("points", &SemigroupConfig::points)
        .def_readwrite("t_min", &SemigroupConfig::t_min)
        .def_readwrite("t_max", &SemigroupConfig::t_max)
        .def_readwrite("t_samples", &SemigroupConfig::t_samples)
        .def_readwrite("slope_tol", &SemigroupConfig::slope_tol);

    py::class_<ScaledInitialConfig>(m, "ScaledInitialConfig")
        .def(py::init<>())
        .def_readwrite("profile", &ScaledInitialConfig::profile)
        .def_readwrite("slow_length", &ScaledInitialConfig::slow_length)
        .def_readwrite("points", &ScaledInitialConfig::points)
        .def_readwrite("etas", &ScaledInitialConfig::etas)
        .def_readwrite("t0", &ScaledInitialConfig::t0)
        .def_readwrite("horizon", &ScaledInitialConfig::horizon)
        .def_readwrite("time_samples", &ScaledInitialConfig::time_samples)
        .def_readwrite("slope_tol", &ScaledInitialConfig::slope_tol);

    py::class_<StabilityConfig>(m, "StabilityConfig")
        .def(py::init<>())
        .def_readwrite("epsilon", &StabilityConfig::epsilon)
        .def_readwrite("delta", &StabilityConfig::delta)
        .def_readwrite("profile", &StabilityConfig::profile)
        .def_readwrite("periods", &StabilityConfig::periods)
        .def_readwrite("points", &StabilityConfig::points)
        .def_readwrite("t0", &StabilityConfig::t0)
        .def_readwrite("horizon_factor", &StabilityConfig::horizon_factor)
        .def_readwrite("dt_factor", &StabilityConfig::dt_factor)
        .def_readwrite("band_factor", &StabilityConfig::band_factor)
        .def_readwrite("samples", &StabilityConfig::samples)
        .def_readwrite("dealias", &StabilityConfig::dealias);

    py::class_<SteadyStateReport>(m, "SteadyStateReport")
        .def_readonly("phi", &SteadyStateReport::phi)
        .def_readonly("residual", &SteadyStateReport::residual)
        .def_readonly("jacobian_eigs", &SteadyStateReport::jacobian_eigs)
        .def_readonly("stable", &SteadyStateReport::stable)
        .def_readonly("residual_history", &SteadyStateReport::residual_history);

    py::class_<StabilityReport>(m, "StabilityReport")
        .def_readonly("times", &StabilityReport::times)
        .def_readonly("errors", &StabilityReport::errors)
        .def_readonly("e_start", &StabilityReport::e_start)
        .def_readonly("e_t0", &StabilityReport::e_t0)
        .def_readonly("e_end", &StabilityReport::e_end)
        .def_readonly("band", &StabilityReport::band)
        .def_readonly("contraction", &StabilityReport::contraction)
        .def_readonly("trend_ok", &StabilityReport::trend_ok)
        .def_readonly("passed", &StabilityReport::passed);

    m.def("experiment_vocabulary", &experiment_vocabulary,
          "Names an [experiment ...] section may carry (the command vocabulary).");
    m.def("parse_problem", &parse_problem, py::arg("path"),
          "Parse a problem file from disk.");
    m.def("parse_problem_text", &parse_problem_text, py::arg("text"), py::arg("name") = "",
          "Parse problem text; `name` is used in reports.");
    m.def("serialize_problem", &serialize_problem, py::arg("problem"),
          "Canonical text form; parse_problem_text(serialize_problem(p)) == p.");
    m.def("apply_override", &apply_override, py::arg("problem"), py::arg("key"),
          py::arg("value"),
          "In-place override: omega / wavenumber / slow_dimension, scan.<key>, "
          "or <experiment>.<key>.");

    m.def("analyze_dispersion",
          [](const MatrixPolynomial& symbol, double omega, const Eigen::VectorXd& k, int D,
             std::optional<PolynomialNonlinearity> f, const AnalysisOptions& options) {
              return analyze_dispersion(symbol, f ? &*f : nullptr, omega, k, D, options);
          },
          py::arg("symbol"), py::arg("omega"), py::arg("k"), py::arg("D") = 1,
          py::arg("nonlinearity") = std::nullopt, py::arg("options") = AnalysisOptions{},
          py::call_guard<py::gil_scoped_release>(),
          "Full assumption pipeline: branch tracking, critical set, degeneracy "
          "orders, Q construction, ellipticity.");
    m.def("build_amplitude_system", &build_amplitude_system, py::arg("critical"),
          py::arg("nonlinearity"), py::arg("symmetric"),
          "Assemble the amplitude system from the critical structure.");
    m.def("derive_problem", &derive_problem, py::arg("problem"),
          py::call_guard<py::gil_scoped_release>(),
          "Analyze and reduce a parsed problem in one step.");

    m.def("fourier_coefficient_exact", &fourier_coefficient_exact, py::arg("nonlinearity"),
          py::arg("carriers"), py::arg("j"),
          "Exact Fourier coefficient of f(sum A_n e^{i j_n theta} w_n) on e^{i j theta}.");
    m.def("fourier_coefficient_quadrature", &fourier_coefficient_quadrature,
          py::arg("nonlinearity"), py::arg("carriers"), py::arg("A"), py::arg("j"),
          py::arg("quad_points") = 0,
          "Same coefficient at one point A by trapezoid quadrature in theta.");

    m.def("fit_loglog", &fit_loglog, py::arg("points"),
          "Least squares on (log x, log y) pairs.");
    m.def("error_scaling", &error_scaling, py::arg("symbol"), py::arg("nonlinearity"),
          py::arg("system"), py::arg("config"), py::call_guard<py::gil_scoped_release>(),
          "Full-vs-reduced sup error against epsilon; expected slope 1/M.");
    m.def("semigroup_decay", &semigroup_decay, py::arg("symbol"), py::arg("critical"),
          py::arg("config"), py::call_guard<py::gil_scoped_release>(),
          "Exact linear mismatch against time; expected slope -1/M.");
    m.def("scaled_initial_decay", &scaled_initial_decay, py::arg("symbol"), py::arg("critical"),
          py::arg("config"), py::call_guard<py::gil_scoped_release>(),
          "Linear mismatch for slow data v0(eta x) against eta; expected slope 1.");
    m.def("find_steady", &find_steady, py::arg("system"), py::arg("guess"),
          "Newton iteration for S(phi) = 0 with the exact polynomial Jacobian.");
    m.def("steady_jacobian", &steady_jacobian, py::arg("system"), py::arg("x"),
          "Exact Jacobian of the polynomial system on the real slice.");
    m.def("verify_periodic_stability", &verify_periodic_stability, py::arg("symbol"),
          py::arg("nonlinearity"), py::arg("system"), py::arg("phi"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>(),
          "Perturb the steady envelope, evolve the PDE, track the sup distance.");

    m.def("run_command",
          [](const std::string& command, const ProblemFile& problem, const std::string& outdir,
             int threads) {
              CommandOptions opts;
              opts.outdir = outdir;
              opts.threads = threads;
              return run_command(command, problem, opts);
          },
          py::arg("command"), py::arg("problem"), py::arg("outdir"), py::arg("threads") = 1,
          py::call_guard<py::gil_scoped_release>(),
          "Run one CLI command (reports and CSVs land in outdir); returns the exit status.");
}
