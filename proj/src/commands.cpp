#include "amplituder/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "amplituder/errors.hpp"
#include "amplituder/solver.hpp"

namespace ampl {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Line-oriented report: `key value` lines plus one level of [sections].
class Report {
public:
    void kv(const std::string& key, const std::string& value) {
        os_ << key << " " << value << "\n";
    }
    void kv(const std::string& key, const char* value) { kv(key, std::string(value)); }
    void kv(const std::string& key, double value) { kv(key, fmt17(value)); }
    void kv(const std::string& key, int value) { kv(key, std::to_string(value)); }
    void kv(const std::string& key, bool value) { kv(key, value ? "true" : "false"); }
    void kv(const std::string& key, const Eigen::VectorXd& v) {
        std::ostringstream line;
        for (int i = 0; i < v.size(); ++i) line << (i ? " " : "") << fmt17(v(i));
        kv(key, line.str());
    }
    void section(const std::string& name) { os_ << "\n[" << name << "]\n"; }
    void row(const std::string& prefix, const std::vector<std::string>& fields) {
        os_ << prefix;
        for (const std::string& f : fields) os_ << " " << f;
        os_ << "\n";
    }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << text;
}

std::string out_path(const CommandOptions& opts, const std::string& file) {
    std::filesystem::create_directories(opts.outdir);
    return (std::filesystem::path(opts.outdir) / file).string();
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
    std::ostringstream os;
    os << header << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt17(row[i]);
        os << "\n";
    }
    write_file(path, os.str());
}

void head(Report& rep, const char* command, const ProblemFile& p, bool pass) {
    rep.kv("command", command);
    rep.kv("problem", p.name.empty() ? "unnamed" : p.name);
    rep.kv("pass", pass);
}

std::vector<std::string> complex_fields(const Complex& z) {
    return {fmt17(z.real()), fmt17(z.imag())};
}

void poly_rows(Report& rep, const std::string& prefix, const MatrixPolynomial& poly) {
    for (const auto& [alpha, mat] : poly.coeffs()) {
        std::vector<std::string> fields;
        for (int i = 0; i < alpha.dim(); ++i) fields.push_back(std::to_string(alpha[i]));
        fields.push_back(fmt17(mat(0, 0).real()));
        fields.push_back(fmt17(mat(0, 0).imag()));
        rep.row(prefix, fields);
    }
}

void reduced_rows(Report& rep, const std::string& prefix, const ReducedPolynomial& poly) {
    for (const auto& [expo, coeff] : poly.terms) {
        std::vector<std::string> fields;
        for (int i = 0; i < expo.dim(); ++i) fields.push_back(std::to_string(expo[i]));
        fields.push_back(fmt17(coeff(0).real()));
        fields.push_back(fmt17(coeff(0).imag()));
        rep.row(prefix, fields);
    }
}

void vector_rows(Report& rep, const std::string& prefix, const Eigen::VectorXcd& v) {
    for (int i = 0; i < v.size(); ++i) rep.row(prefix, complex_fields(v(i)));
}

void scaling_rows(Report& rep, const ScalingReport& sr) {
    for (const ScalingPoint& pt : sr.points)
        rep.row("point", {fmt17(pt.abscissa), fmt17(pt.max_error)});
    for (const std::string& flag : sr.flags) rep.row("flag", {flag});
}

void scaling_summary(Report& rep, const ScalingReport& sr) {
    rep.kv("expected_slope", sr.expected_slope);
    rep.kv("slope_tol", sr.slope_tol);
    rep.kv("fitted_slope", sr.fitted_slope);
    rep.kv("intercept", sr.intercept);
    rep.kv("r_squared", sr.r_squared);
}

std::vector<std::vector<double>> scaling_csv_rows(const ScalingReport& sr) {
    std::vector<std::vector<double>> rows;
    for (const ScalingPoint& pt : sr.points) rows.push_back({pt.abscissa, pt.max_error});
    return rows;
}

/// Stability gate shared by the experiment commands that simulate the full
/// system; the spectral scan is much cheaper than the experiments it guards.
StabilityCheck stability_gate(const ProblemFile& p) {
    const MatrixPolynomial P = p.build_symbol();
    const AnalysisOptions opts = p.analysis_options();
    const BranchSet bs = track_branches(
        P, serpentine_grid(p.dimension, opts.xi_max, opts.xi_points), opts.cond_max);
    return check_stability(bs, opts.tol_crit, opts.margin);
}

ErrorScalingConfig error_config(const ProblemFile& p, const AmplitudeSystem& sys) {
    const ExperimentBlock* b = p.experiment("verify-error");
    if (!b) throw ValidationError("problem has no [experiment verify-error] block");
    ErrorScalingConfig cfg;
    cfg.epsilons = b->get_doubles("epsilons");
    cfg.profiles = b->get_list("profiles");
    cfg.periods = b->get_ints("periods");
    cfg.points = b->get_ints("points");
    cfg.t0 = b->get_double_or("t0", cfg.t0);
    cfg.T0 = b->get_double_or("T0", cfg.T0);
    cfg.dt_factor = b->get_double_or("dt_factor", cfg.dt_factor);
    cfg.samples = b->get_int_or("samples", cfg.samples);
    cfg.slope_tol = b->get_double_or("slope_tol", cfg.slope_tol);
    cfg.dealias = b->get_bool_or("dealias", cfg.dealias);
    if (static_cast<int>(cfg.profiles.size()) != sys.n_comps)
        throw ValidationError("verify-error.profiles needs one profile per amplitude component");
    return cfg;
}

SemigroupConfig semigroup_config(const ExperimentBlock& b) {
    SemigroupConfig cfg;
    cfg.profile = b.get_or("profile", cfg.profile);
    cfg.box_length = b.get_double_or("box_length", cfg.box_length);
    cfg.points = b.get_int_or("points", cfg.points);
    cfg.t_min = b.get_double_or("t_min", cfg.t_min);
    cfg.t_max = b.get_double_or("t_max", cfg.t_max);
    cfg.t_samples = b.get_int_or("t_samples", cfg.t_samples);
    cfg.slope_tol = b.get_double_or("slope_tol", cfg.slope_tol);
    return cfg;
}

ScaledInitialConfig scaled_config(const ExperimentBlock& b) {
    ScaledInitialConfig cfg;
    cfg.etas = b.get_doubles("etas");
    cfg.profile = b.get_or("scaled_profile", cfg.profile);
    cfg.slow_length = b.get_double_or("slow_length", cfg.slow_length);
    cfg.points = b.get_int_or("scaled_points", cfg.points);
    cfg.t0 = b.get_double_or("t0", cfg.t0);
    cfg.horizon = b.get_double_or("horizon", cfg.horizon);
    cfg.time_samples = b.get_int_or("time_samples", cfg.time_samples);
    cfg.slope_tol = b.get_double_or("scaled_slope_tol", cfg.slope_tol);
    return cfg;
}

StabilityConfig stability_config(const ExperimentBlock& b) {
    StabilityConfig cfg;
    cfg.epsilon = b.get_double_or("epsilon", cfg.epsilon);
    cfg.profile = b.get_or("profile", cfg.profile);
    cfg.periods = b.get_ints("periods");
    cfg.points = b.get_ints("points");
    cfg.t0 = b.get_double_or("t0", cfg.t0);
    cfg.horizon_factor = b.get_double_or("horizon_factor", cfg.horizon_factor);
    cfg.dt_factor = b.get_double_or("dt_factor", cfg.dt_factor);
    cfg.band_factor = b.get_double_or("band_factor", cfg.band_factor);
    cfg.samples = b.get_int_or("samples", cfg.samples);
    cfg.dealias = b.get_bool_or("dealias", cfg.dealias);
    return cfg;
}

} // namespace

const AmplitudeSystem& DerivedProblem::experiment_system() const {
    return symmetric ? *symmetric : general;
}

DerivedProblem derive_problem(const ProblemFile& p) {
    DerivedProblem d;
    d.P = p.build_symbol();
    d.f = p.build_nonlinearity();
    d.analysis =
        analyze_dispersion(d.P, &d.f, p.omega, p.k, p.slow_dimension, p.analysis_options());
    d.general = build_amplitude_system(d.analysis.critical, d.f, false);
    if (d.analysis.critical.symmetric_pairing && d.analysis.report.symmetric_reduction_available)
        d.symmetric = build_amplitude_system(d.analysis.critical, d.f, true);
    return d;
}

int cmd_analyze(const ProblemFile& p, const CommandOptions& opts) {
    const MatrixPolynomial P = p.build_symbol();
    const PolynomialNonlinearity f = p.build_nonlinearity();
    const AnalyzeResult res =
        analyze_dispersion(P, &f, p.omega, p.k, p.slow_dimension, p.analysis_options());
    const CriticalStructure& cs = res.critical;
    const AnalysisReport& ar = res.report;

    Report rep;
    head(rep, "analyze", p, ar.pass);
    rep.kv("omega", cs.omega);
    rep.kv("wavenumber", cs.k);
    rep.kv("slow_dimension", cs.D);
    rep.kv("degeneracy_order", cs.M);
    std::ostringstream js;
    for (size_t i = 0; i < cs.modes.size(); ++i) js << (i ? " " : "") << cs.modes[i].j;
    rep.kv("critical_set", js.str());
    rep.kv("symmetric_pairing", cs.symmetric_pairing);
    rep.kv("n_pairs", cs.n_pairs);
    rep.kv("stability_pass", ar.stability.pass);
    rep.kv("critical_branches", ar.stability.critical_branches);
    rep.kv("conjugate_pair", ar.stability.conjugate_pair);
    rep.kv("max_re_critical", ar.stability.max_re_critical);
    rep.kv("max_re_rest", ar.stability.max_re_rest);
    rep.kv("max_condition", ar.max_condition);
    rep.kv("ambiguity_count", ar.ambiguity_count);
    rep.kv("p_ellipticity_pass", ar.p_ellipticity.pass);
    rep.kv("p_ellipticity_c2", ar.p_ellipticity.c2);
    rep.kv("p_conjugation_symmetric", ar.p_conjugation_symmetric);
    rep.kv("f_conjugation_symmetric", ar.f_conjugation_symmetric);
    rep.kv("symmetric_reduction_available", ar.symmetric_reduction_available);
    rep.kv("q_pair_distance", ar.q_pair_distance);
    for (const std::string& note : ar.notes) rep.row("note", {note});

    for (size_t n = 0; n < cs.modes.size(); ++n) {
        const CriticalMode& mode = cs.modes[n];
        rep.section("mode " + std::to_string(mode.j));
        rep.kv("j", mode.j);
        rep.kv("M", mode.M);
        rep.row("lambda", complex_fields(mode.lambda));
        vector_rows(rep, "w", mode.w);
        vector_rows(rep, "l", mode.l);
        poly_rows(rep, "Q", mode.Q);
        for (const auto& [alpha, coeff] : mode.taylor) {
            std::vector<std::string> fields;
            for (int i = 0; i < alpha.dim(); ++i) fields.push_back(std::to_string(alpha[i]));
            fields.push_back(fmt17(coeff.real()));
            fields.push_back(fmt17(coeff.imag()));
            rep.row("taylor", fields);
        }
        if (n < ar.q_ellipticity.size()) {
            rep.kv("q_ellipticity_pass", ar.q_ellipticity[n].pass);
            rep.kv("q_ellipticity_c2", ar.q_ellipticity[n].c2);
        }
        if (n < ar.offaxis.size()) {
            for (size_t a = 0; a < ar.offaxis[n].size(); ++a) {
                std::vector<std::string> fields = {std::to_string(cs.D + static_cast<int>(a))};
                const auto d1 = complex_fields(ar.offaxis[n][a][0]);
                const auto d2 = complex_fields(ar.offaxis[n][a][1]);
                fields.insert(fields.end(), d1.begin(), d1.end());
                fields.insert(fields.end(), d2.begin(), d2.end());
                rep.row("offaxis", fields);
            }
        }
    }
    write_file(out_path(opts, "analyze.report"), rep.str());
    return ar.pass ? 0 : 1;
}

int cmd_derive(const ProblemFile& p, const CommandOptions& opts) {
    const DerivedProblem d = derive_problem(p);
    const bool pass = d.analysis.report.pass;

    Report rep;
    head(rep, "derive", p, pass);
    rep.kv("omega", d.general.omega);
    rep.kv("wavenumber", d.general.k);
    rep.kv("slow_dimension", d.general.D);
    rep.kv("degeneracy_order", d.general.M);
    rep.kv("general_components", d.general.n_comps);
    rep.kv("symmetric", static_cast<bool>(d.symmetric));
    if (d.symmetric) rep.kv("symmetric_components", d.symmetric->n_comps);

    for (int n = 0; n < d.general.n_comps; ++n) {
        rep.section("component " + std::to_string(n + 1));
        rep.kv("j", d.general.j[n]);
        vector_rows(rep, "w", d.general.w[n]);
        vector_rows(rep, "l", d.general.l[n]);
        poly_rows(rep, "Q", d.general.Q[n]);
        reduced_rows(rep, "R", d.general.R[n]);
    }
    if (d.symmetric) {
        for (int n = 0; n < d.symmetric->n_comps; ++n) {
            rep.section("symmetric " + std::to_string(n + 1));
            rep.kv("j", d.symmetric->j[n]);
            poly_rows(rep, "Q", d.symmetric->Q[n]);
            reduced_rows(rep, "S", d.symmetric->R[n]);
        }
    }
    write_file(out_path(opts, "derive.report"), rep.str());
    return pass ? 0 : 1;
}

int cmd_simulate(const ProblemFile& p, const CommandOptions& opts) {
    const ExperimentBlock* b = p.experiment("simulate");
    if (!b) throw ValidationError("problem has no [experiment simulate] block");
    const DerivedProblem d = derive_problem(p);
    const AmplitudeSystem& sys = d.experiment_system();

    const std::string system = b->get_or("system", "full");
    if (system != "full" && system != "reduced")
        throw ValidationError("simulate.system must be 'full' or 'reduced'");

    SimConfig sim;
    sim.epsilon = b->get_double("epsilon");
    sim.T_end = b->get_double("T_end");
    sim.dt = b->get_double("dt");
    sim.snapshot_stride = b->get_int_or("snapshot_stride", 1);
    sim.dealias = b->get_bool_or("dealias", true);

    const double eta = sys.eta(sim.epsilon);
    const Grid fast = pattern_grid(sys.k, sys.D, b->get_ints("periods"), b->get_ints("points"),
                                   eta);
    const Grid slow = slow_grid(fast, sys.D);
    const double slow_len = eta * slow.lengths[0];
    std::vector<Profile> profiles;
    for (const std::string& text : b->get_list("profiles"))
        profiles.push_back(parse_profile(text, slow_len));
    if (static_cast<int>(profiles.size()) != sys.n_comps)
        throw ValidationError("simulate.profiles needs one profile per amplitude component");
    const SpectralField A0 = envelope_field(profiles, slow, eta);

    Trajectory traj;
    if (system == "full") {
        const SpectralField u0 = reconstruct(A0, sys, 0.0, fast);
        traj = simulate(d.P, d.f, u0, sim);
    } else {
        traj = simulate(sys, A0, sim);
    }

    std::vector<std::vector<double>> rows;
    for (const Snapshot& snap : traj.snaps) {
        for (int c = 0; c < snap.field.components(); ++c) {
            const Eigen::VectorXcd& comp = snap.field.comps[c];
            for (std::ptrdiff_t i = 0; i < comp.size(); ++i)
                rows.push_back({snap.time, static_cast<double>(c), static_cast<double>(i),
                                comp(i).real(), comp(i).imag()});
        }
    }
    write_csv(out_path(opts, "simulate.csv"), "time,component,index,re,im", rows);

    const Grid& grid = traj.snaps.front().field.grid;
    Report rep;
    head(rep, "simulate", p, true);
    rep.kv("system", system);
    rep.kv("epsilon", sim.epsilon);
    rep.kv("eta", eta);
    rep.kv("dt", traj.dt);
    rep.kv("steps", traj.n_steps);
    rep.kv("snapshots", static_cast<int>(traj.snaps.size()));
    std::ostringstream gl, gp;
    for (size_t a = 0; a < grid.lengths.size(); ++a) {
        gl << (a ? " " : "") << fmt17(grid.lengths[a]);
        gp << (a ? " " : "") << grid.points[a];
    }
    rep.kv("grid_lengths", gl.str());
    rep.kv("grid_points", gp.str());
    rep.kv("final_time", traj.snaps.back().time);
    rep.kv("final_sup_norm", traj.snaps.back().sup_norm);
    write_file(out_path(opts, "simulate.report"), rep.str());
    return 0;
}

int cmd_verify_error(const ProblemFile& p, const CommandOptions& opts) {
    const StabilityCheck gate = stability_gate(p);
    if (!gate.pass) {
        Report rep;
        head(rep, "verify-error", p, false);
        rep.kv("precondition_failed", "spectral stability check failed");
        rep.kv("max_re_critical", gate.max_re_critical);
        rep.kv("max_re_rest", gate.max_re_rest);
        rep.kv("critical_branches", gate.critical_branches);
        write_file(out_path(opts, "verify-error.report"), rep.str());
        return 2;
    }

    const DerivedProblem d = derive_problem(p);
    const AmplitudeSystem& sys = d.experiment_system();
    const ScalingReport sr = error_scaling(d.P, d.f, sys, error_config(p, sys));

    Report rep;
    head(rep, "verify-error", p, sr.pass);
    rep.kv("system", d.symmetric ? "symmetric" : "general");
    scaling_summary(rep, sr);
    rep.section("points");
    scaling_rows(rep, sr);
    write_file(out_path(opts, "verify-error.report"), rep.str());
    write_csv(out_path(opts, "verify-error.csv"), "epsilon,max_error", scaling_csv_rows(sr));
    return sr.pass ? 0 : 1;
}

int cmd_verify_semigroup(const ProblemFile& p, const CommandOptions& opts) {
    const ExperimentBlock* b = p.experiment("verify-semigroup");
    if (!b) throw ValidationError("problem has no [experiment verify-semigroup] block");
    const DerivedProblem d = derive_problem(p);
    const CriticalStructure& cs = d.analysis.critical;

    const ScalingReport sg = semigroup_decay(d.P, cs, semigroup_config(*b));
    bool pass = sg.pass;

    std::optional<ScalingReport> scaled;
    if (b->has("etas")) {
        scaled = scaled_initial_decay(d.P, cs, scaled_config(*b));
        pass = pass && scaled->pass;
    }

    Report rep;
    head(rep, "verify-semigroup", p, pass);
    scaling_summary(rep, sg);
    rep.section("points");
    scaling_rows(rep, sg);
    if (scaled) {
        rep.section("scaled");
        scaling_summary(rep, *scaled);
        scaling_rows(rep, *scaled);
    }
    write_file(out_path(opts, "verify-semigroup.report"), rep.str());
    write_csv(out_path(opts, "verify-semigroup.csv"), "time,max_error", scaling_csv_rows(sg));
    if (scaled)
        write_csv(out_path(opts, "verify-semigroup-scaled.csv"), "eta,max_error",
                  scaling_csv_rows(*scaled));
    return pass ? 0 : 1;
}

namespace {

/// Steady solve shared by cmd_steady and cmd_verify_stability: the symmetric
/// system's S polynomials with the block's guess.
SteadyStateReport solve_steady(const DerivedProblem& d, const ExperimentBlock& b) {
    if (!d.symmetric)
        throw ValidationError("steady states need the conjugate-symmetric reduction");
    const std::vector<double> guess = b.get_doubles("guess");
    if (static_cast<int>(guess.size()) != d.symmetric->n_comps)
        throw ValidationError(b.name + ".guess needs one value per symmetric component");
    Eigen::VectorXd g(d.symmetric->n_comps);
    for (int i = 0; i < d.symmetric->n_comps; ++i) g(i) = guess[i];
    return find_steady(d.symmetric->R, g);
}

} // namespace

int cmd_steady(const ProblemFile& p, const CommandOptions& opts) {
    const ExperimentBlock* b = p.experiment("steady");
    if (!b) throw ValidationError("problem has no [experiment steady] block");
    const DerivedProblem d = derive_problem(p);
    const SteadyStateReport sr = solve_steady(d, *b);
    const bool pass = sr.residual <= 1e-10;

    Report rep;
    head(rep, "steady", p, pass);
    rep.kv("residual", sr.residual);
    rep.kv("stable", sr.stable);
    rep.kv("iterations", static_cast<int>(sr.residual_history.size()) - 1);
    rep.kv("phi", sr.phi);
    for (const Complex& eig : sr.jacobian_eigs) rep.row("eig", complex_fields(eig));
    rep.section("history");
    for (size_t i = 0; i < sr.residual_history.size(); ++i)
        rep.row("residual", {std::to_string(i), fmt17(sr.residual_history[i])});
    write_file(out_path(opts, "steady.report"), rep.str());

    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < sr.residual_history.size(); ++i)
        rows.push_back({static_cast<double>(i), sr.residual_history[i]});
    write_csv(out_path(opts, "steady.csv"), "iteration,residual", rows);
    return pass ? 0 : 1;
}

int cmd_verify_stability(const ProblemFile& p, const CommandOptions& opts) {
    const ExperimentBlock* b = p.experiment("verify-stability");
    if (!b) throw ValidationError("problem has no [experiment verify-stability] block");
    const DerivedProblem d = derive_problem(p);
    const AmplitudeSystem& sys = d.experiment_system();
    const SteadyStateReport steady = solve_steady(d, *b);

    StabilityConfig cfg = stability_config(*b);
    const double phi_max = steady.phi.cwiseAbs().maxCoeff();
    cfg.delta = b->has("delta") ? b->get_double("delta")
                                : b->get_double_or("delta_rel", 0.05) * phi_max;
    const double contraction_min = b->get_double_or("contraction_min", 10.0);

    const StabilityReport pushed =
        verify_periodic_stability(d.P, d.f, sys, steady.phi, cfg);
    StabilityConfig base_cfg = cfg;
    base_cfg.delta = 0.0;
    const StabilityReport baseline =
        verify_periodic_stability(d.P, d.f, sys, steady.phi, base_cfg);

    const bool contraction_ok = cfg.delta == 0.0 || pushed.contraction >= contraction_min;
    const bool pass = pushed.passed && baseline.passed && contraction_ok && steady.stable;

    Report rep;
    head(rep, "verify-stability", p, pass);
    rep.kv("epsilon", cfg.epsilon);
    rep.kv("eta", sys.eta(cfg.epsilon));
    rep.kv("phi", steady.phi);
    rep.kv("steady_stable", steady.stable);
    rep.kv("delta", cfg.delta);
    rep.kv("band", pushed.band);
    rep.kv("contraction", pushed.contraction);
    rep.kv("contraction_min", contraction_min);
    rep.kv("contraction_ok", contraction_ok);
    rep.kv("perturbed_passed", pushed.passed);
    rep.kv("perturbed_trend_ok", pushed.trend_ok);
    rep.kv("perturbed_e_start", pushed.e_start);
    rep.kv("perturbed_e_t0", pushed.e_t0);
    rep.kv("perturbed_e_end", pushed.e_end);
    rep.kv("baseline_passed", baseline.passed);
    rep.kv("baseline_e_end", baseline.e_end);
    write_file(out_path(opts, "verify-stability.report"), rep.str());

    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < pushed.times.size(); ++i)
        rows.push_back({pushed.times[i], pushed.errors[i]});
    write_csv(out_path(opts, "verify-stability.csv"), "time,sup_error", rows);
    rows.clear();
    for (size_t i = 0; i < baseline.times.size(); ++i)
        rows.push_back({baseline.times[i], baseline.errors[i]});
    write_csv(out_path(opts, "verify-stability-baseline.csv"), "time,sup_error", rows);
    return pass ? 0 : 1;
}

int run_command(const std::string& command, const ProblemFile& p, const CommandOptions& opts) {
    if (command == "analyze") return cmd_analyze(p, opts);
    if (command == "derive") return cmd_derive(p, opts);
    if (command == "simulate") return cmd_simulate(p, opts);
    if (command == "verify-error") return cmd_verify_error(p, opts);
    if (command == "verify-semigroup") return cmd_verify_semigroup(p, opts);
    if (command == "steady") return cmd_steady(p, opts);
    if (command == "verify-stability") return cmd_verify_stability(p, opts);
    throw ValidationError("unknown command '" + command + "'");
}

} // namespace ampl
