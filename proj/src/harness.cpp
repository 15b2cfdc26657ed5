#include "amplituder/harness.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "amplituder/errors.hpp"

namespace ampl {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string vec_str(const Eigen::VectorXd& v) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
    os << ")";
    return os.str();
}

Eigen::MatrixXcd taylor_exp(const Eigen::MatrixXcd& Z) {
    const int c = static_cast<int>(Z.rows());
    double norm = 0.0;
    for (int r = 0; r < c; ++r) norm = std::max(norm, Z.row(r).cwiseAbs().sum());
    int s = 0;
    while (norm > 0.5 && s < 60) {
        norm *= 0.5;
        ++s;
    }
    const Eigen::MatrixXcd B = Z / std::pow(2.0, s);
    Eigen::MatrixXcd X = Eigen::MatrixXcd::Identity(c, c);
    for (int k = 20; k >= 1; --k)
        X = Eigen::MatrixXcd::Identity(c, c) + (B * X) / static_cast<double>(k);
    for (int i = 0; i < s; ++i) X = X * X;
    return X;
}

/// Exact e^{Z t}, reusing one eigendecomposition across times; series
/// fallback when the eigenvector basis is ill conditioned.
struct ModeExp {
    bool scalar = false;
    Complex z;
    bool diag = false;
    Eigen::MatrixXcd V, Vinv;
    Eigen::VectorXcd lam;
    Eigen::MatrixXcd Z;

    explicit ModeExp(const Eigen::MatrixXcd& m) : Z(m) {
        if (m.rows() == 1) {
            scalar = true;
            z = m(0, 0);
            return;
        }
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
        if (es.info() == Eigen::Success) {
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
            const double smin = svd.singularValues().minCoeff();
            if (smin > 0.0 && svd.singularValues().maxCoeff() / smin <= 1e6) {
                diag = true;
                V = es.eigenvectors();
                Vinv = V.inverse();
                lam = es.eigenvalues();
            }
        }
    }

    Eigen::MatrixXcd at(double t) const {
        if (scalar) {
            Eigen::MatrixXcd e(1, 1);
            e(0, 0) = std::exp(z * t);
            return e;
        }
        if (diag) return V * (lam * t).array().exp().matrix().asDiagonal() * Vinv;
        return taylor_exp(Z * t);
    }
};

std::vector<double> log_spaced(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo)) throw ValidationError("time grid needs 0 < lo < hi");
    if (n < 2) throw ValidationError("time grid needs at least 2 samples");
    std::vector<double> ts(n);
    const double step = (std::log(hi) - std::log(lo)) / (n - 1);
    for (int i = 0; i < n; ++i) ts[i] = std::exp(std::log(lo) + i * step);
    return ts;
}

/// Sup over the probe box of the per-mode mismatch spectrum.
double probe_sup(const Eigen::VectorXcd& vhat, const std::vector<ModeExp>& expos,
                 const std::vector<Complex>& qsym, const Eigen::VectorXcd& w, double omega,
                 double t, FourierTransform& fft, std::vector<Eigen::VectorXcd>& scratch) {
    const int m = static_cast<int>(w.size());
    const std::ptrdiff_t n = vhat.size();
    const Complex phase = std::exp(Complex(0.0, omega * t));
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const Eigen::VectorXcd g = expos[i].at(t) * w - phase * std::exp(qsym[i] * t) * w;
        for (int c = 0; c < m; ++c) scratch[c](i) = vhat(i) * g(c);
    }
    double err = 0.0;
    for (int c = 0; c < m; ++c) {
        fft.backward(scratch[c]);
        err = std::max(err, scratch[c].cwiseAbs().maxCoeff());
    }
    return err;
}

} // namespace

FitResult fit_loglog(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw DegenerateFit("log-log fit needs at least 3 points");
    std::vector<double> xs, ys;
    for (const auto& [x, y] : points) {
        if (!(x > 0.0)) throw DegenerateFit("log-log fit needs positive abscissae");
        if (!(y > 0.0)) throw DegenerateFit("log-log fit needs positive values");
        xs.push_back(std::log(x));
        ys.push_back(std::log(y));
    }
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i] == sorted[i - 1]) throw DegenerateFit("degenerate abscissa in log-log fit");

    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    FitResult fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += r * r;
    }
    fit.r_squared = syy < 1e-30 ? (ss_res < 1e-30 ? 1.0 : 0.0) : 1.0 - ss_res / syy;
    return fit;
}

ScalingReport make_scaling_report(std::vector<ScalingPoint> points, double expected_slope,
                                  double slope_tol, std::vector<std::string> flags) {
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(points.size());
    for (const ScalingPoint& p : points) pairs.emplace_back(p.abscissa, p.max_error);
    const FitResult fit = fit_loglog(pairs);
    ScalingReport rep;
    rep.points = std::move(points);
    rep.fitted_slope = fit.slope;
    rep.intercept = fit.intercept;
    rep.r_squared = fit.r_squared;
    rep.expected_slope = expected_slope;
    rep.slope_tol = slope_tol;
    rep.pass = std::abs(fit.slope - expected_slope) <= slope_tol && fit.r_squared >= 0.95;
    rep.flags = std::move(flags);
    return rep;
}

Grid pattern_grid(const Eigen::VectorXd& k, int D, const std::vector<int>& periods,
                  const std::vector<int>& points, double eta) {
    const int d = static_cast<int>(k.size());
    if (D < 1 || D > d) throw ValidationError("slow dimension must satisfy 1 <= D <= d");
    if (static_cast<int>(periods.size()) != d || static_cast<int>(points.size()) != d)
        throw ValidationError("periods and points must give one entry per axis");
    if (!(eta > 0.0)) throw ValidationError("eta must be positive");
    const double knorm = k.norm();
    const double window = std::ceil(1.0 / eta);
    std::vector<double> lengths(d);
    for (int a = 0; a < d; ++a) {
        if (periods[a] < 1) throw ValidationError("period count must be positive");
        const double kref = k(a) != 0.0 ? std::abs(k(a)) : (knorm > 0.0 ? knorm : 1.0);
        lengths[a] = periods[a] * (2.0 * kPi / kref);
        if (a < D) lengths[a] *= window;
    }
    return make_grid(lengths, points);
}

ScalingReport error_scaling(const MatrixPolynomial& symbol, const PolynomialNonlinearity& f,
                            const AmplitudeSystem& sys, const ErrorScalingConfig& cfg) {
    if (cfg.epsilons.size() < 3)
        throw PreconditionFailure("error scaling needs at least 3 epsilon values");
    std::vector<double> eps = cfg.epsilons;
    std::sort(eps.begin(), eps.end());
    if (!(eps.front() > 0.0)) throw ValidationError("epsilon values must be positive");
    if (eps.front() == eps.back())
        throw DegenerateFit("identical epsilon values give a degenerate abscissa");
    if (eps.back() / eps.front() < 10.0)
        throw PreconditionFailure("epsilon values must span at least one decade");
    if (static_cast<int>(cfg.profiles.size()) != sys.n_comps)
        throw DimensionMismatch("need one envelope profile per amplitude component");

    std::vector<ScalingPoint> pts;
    std::vector<std::string> flags;
    for (double e : eps) {
        try {
            const double eta = sys.eta(e);
            const Grid fast = pattern_grid(sys.k, sys.D, cfg.periods, cfg.points, eta);
            const Grid slow = slow_grid(fast, sys.D);
            const double slow_len = eta * slow.lengths[0];
            std::vector<Profile> v;
            for (const std::string& text : cfg.profiles)
                v.push_back(parse_profile(text, slow_len));
            const SpectralField A0 = envelope_field(v, slow, eta);
            const SpectralField u0 = reconstruct(A0, sys, 0.0, fast);

            SimConfig sim;
            sim.epsilon = e;
            sim.t0 = 0.0;
            sim.T_end = cfg.T0 / e;
            sim.dt = cfg.dt_factor / e;
            sim.dealias = cfg.dealias;
            const int n_steps = static_cast<int>(std::ceil(sim.T_end / sim.dt - 1e-9));
            sim.snapshot_stride = std::max(1, n_steps / std::max(1, cfg.samples));

            const Trajectory tu = simulate(symbol, f, u0, sim);
            const Trajectory ta = simulate(sys, A0, sim);
            if (tu.snaps.size() != ta.snaps.size())
                throw SolverError("paired runs produced mismatched snapshot grids");

            double worst = 0.0;
            for (size_t i = 0; i < tu.snaps.size(); ++i) {
                const double t = tu.snaps[i].time;
                if (t < cfg.t0 - 1e-12) continue;
                const SpectralField rec = reconstruct(ta.snaps[i].field, sys, t, fast);
                worst = std::max(worst, sup_error(tu.snaps[i].field, rec));
            }
            pts.push_back({e, worst});
        } catch (const Error& err) {
            std::ostringstream os;
            os << "eps=" << e << " skipped: " << err.what();
            flags.push_back(os.str());
        }
    }
    const double expected = 1.0 / static_cast<double>(sys.M);
    return make_scaling_report(std::move(pts), expected, cfg.slope_tol, std::move(flags));
}

std::vector<ScalingPoint> semigroup_errors(const MatrixPolynomial& symbol,
                                           const CriticalStructure& cs,
                                           const SemigroupConfig& cfg) {
    if (cs.modes.empty()) throw ValidationError("critical structure has no modes");
    const CriticalMode& mode = cs.modes.front();
    const int m = symbol.size();
    if (mode.w.size() != m) throw DimensionMismatch("mode vector does not match symbol block");

    const Grid probe = make_grid({cfg.box_length}, {cfg.points});
    const Profile v0 = parse_profile(cfg.profile, cfg.box_length);
    Eigen::VectorXcd vhat(probe.size());
    Eigen::VectorXd X(1);
    for (std::ptrdiff_t i = 0; i < probe.size(); ++i) {
        X(0) = probe.coord(0, static_cast<int>(i));
        vhat(i) = v0(X);
    }
    FourierTransform fft(probe);
    fft.forward(vhat);

    std::vector<ModeExp> expos;
    expos.reserve(probe.size());
    std::vector<Complex> qsym(probe.size());
    Eigen::VectorXd xi(cs.k.size()), sig(cs.D);
    for (std::ptrdiff_t i = 0; i < probe.size(); ++i) {
        const double s = probe.wavenumber(0, static_cast<int>(i));
        xi = cs.k;
        xi(0) += s;
        expos.emplace_back(symbol.eval_symbol(xi));
        sig.setZero();
        sig(0) = s;
        qsym[i] = mode.Q.eval_symbol(sig)(0, 0);
    }

    std::vector<Eigen::VectorXcd> scratch(m, Eigen::VectorXcd(probe.size()));
    std::vector<ScalingPoint> pts;
    for (double t : log_spaced(cfg.t_min, cfg.t_max, cfg.t_samples))
        pts.push_back({t, probe_sup(vhat, expos, qsym, mode.w, cs.omega, t, fft, scratch)});
    return pts;
}

ScalingReport semigroup_decay(const MatrixPolynomial& symbol, const CriticalStructure& cs,
                              const SemigroupConfig& cfg) {
    const double expected = -1.0 / static_cast<double>(cs.M);
    return make_scaling_report(semigroup_errors(symbol, cs, cfg), expected, cfg.slope_tol);
}

std::vector<ScalingPoint> scaled_initial_errors(const MatrixPolynomial& symbol,
                                                const CriticalStructure& cs,
                                                const ScaledInitialConfig& cfg) {
    if (cs.modes.empty()) throw ValidationError("critical structure has no modes");
    if (cfg.etas.empty()) throw ValidationError("need at least one eta value");
    if (!(cfg.t0 > 0.0)) throw ValidationError("t0 must be positive");
    const CriticalMode& mode = cs.modes.front();
    const int m = symbol.size();
    if (mode.w.size() != m) throw DimensionMismatch("mode vector does not match symbol block");

    const Grid slow = make_grid({cfg.slow_length}, {cfg.points});
    const Profile v0 = parse_profile(cfg.profile, cfg.slow_length);
    Eigen::VectorXcd vhat(slow.size());
    Eigen::VectorXd X(1);
    for (std::ptrdiff_t i = 0; i < slow.size(); ++i) {
        X(0) = slow.coord(0, static_cast<int>(i));
        vhat(i) = v0(X);
    }
    FourierTransform fft(slow);
    fft.forward(vhat);

    std::vector<Eigen::VectorXcd> scratch(m, Eigen::VectorXcd(slow.size()));
    std::vector<ScalingPoint> pts;
    Eigen::VectorXd xi(cs.k.size()), sig(cs.D);
    for (double eta : cfg.etas) {
        if (!(eta > 0.0)) throw ValidationError("eta values must be positive");
        std::vector<ModeExp> expos;
        expos.reserve(slow.size());
        std::vector<Complex> qsym(slow.size());
        for (std::ptrdiff_t i = 0; i < slow.size(); ++i) {
            // data v0(eta x): slow mode s carries fast modulation eta * s
            const double s_fast = eta * slow.wavenumber(0, static_cast<int>(i));
            xi = cs.k;
            xi(0) += s_fast;
            expos.emplace_back(symbol.eval_symbol(xi));
            sig.setZero();
            sig(0) = s_fast;
            qsym[i] = mode.Q.eval_symbol(sig)(0, 0);
        }
        const double t_end = cfg.t0 + cfg.horizon / std::pow(eta, cs.M);
        double worst = 0.0;
        for (double t : log_spaced(cfg.t0, t_end, cfg.time_samples))
            worst = std::max(worst,
                             probe_sup(vhat, expos, qsym, mode.w, cs.omega, t, fft, scratch));
        pts.push_back({eta, worst});
    }
    return pts;
}

ScalingReport scaled_initial_decay(const MatrixPolynomial& symbol, const CriticalStructure& cs,
                                   const ScaledInitialConfig& cfg) {
    return make_scaling_report(scaled_initial_errors(symbol, cs, cfg), 1.0, cfg.slope_tol);
}

Eigen::MatrixXd steady_jacobian(const std::vector<ReducedPolynomial>& S,
                                const Eigen::VectorXd& x) {
    const int N = static_cast<int>(S.size());
    if (x.size() != N) throw DimensionMismatch("point dimension does not match system size");
    const Eigen::VectorXcd xc = x.cast<Complex>();
    Eigen::MatrixXd J(N, N);
    for (int n = 0; n < N; ++n) {
        if (S[n].n_vars != N || S[n].dim != 1)
            throw DimensionMismatch("steady system must be square with scalar components");
        for (int c = 0; c < N; ++c) J(n, c) = S[n].partial(c).eval(xc)(0).real();
    }
    return J;
}

SteadyStateReport find_steady(const std::vector<ReducedPolynomial>& S,
                              const Eigen::VectorXd& guess) {
    const int N = static_cast<int>(S.size());
    if (N < 1) throw ValidationError("steady solve needs a nonempty system");
    if (guess.size() != N) throw DimensionMismatch("guess dimension does not match system size");
    if (!guess.allFinite()) throw ValidationError("guess must be finite");

    Eigen::VectorXd x = guess;
    std::vector<double> history;
    const int max_updates = 50;
    for (int it = 0; it <= max_updates; ++it) {
        const Eigen::VectorXcd xc = x.cast<Complex>();
        Eigen::VectorXcd val(N);
        for (int n = 0; n < N; ++n) val(n) = S[n].eval(xc)(0);
        const double res = val.cwiseAbs().maxCoeff();
        history.push_back(res);

        if (res <= 1e-10) {
            SteadyStateReport rep;
            rep.phi = x;
            rep.residual = res;
            const Eigen::MatrixXd J = steady_jacobian(S, x);
            const Eigen::EigenSolver<Eigen::MatrixXd> es(J);
            rep.stable = true;
            for (int i = 0; i < N; ++i) {
                rep.jacobian_eigs.push_back(es.eigenvalues()(i));
                if (!(es.eigenvalues()(i).real() < 0.0)) rep.stable = false;
            }
            rep.residual_history = std::move(history);
            return rep;
        }
        if (it == max_updates) break;

        const Eigen::MatrixXd J = steady_jacobian(S, x);
        if (std::abs(J.determinant()) < 1e-12) {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
            const Eigen::VectorXd kernel = svd.matrixV().col(N - 1);
            throw SingularJacobian("jacobian singular at iterate " + vec_str(x) +
                                   "; near-kernel direction " + vec_str(kernel));
        }
        x -= J.partialPivLu().solve(val.real().eval());
        if (!x.allFinite())
            throw NewtonDiverged("iterate became non-finite after " + std::to_string(it + 1) +
                                 " updates");
    }
    throw NewtonDiverged("no convergence after " + std::to_string(max_updates) +
                         " updates; last residual " + std::to_string(history.back()));
}

StabilityReport verify_periodic_stability(const MatrixPolynomial& symbol,
                                          const PolynomialNonlinearity& f,
                                          const AmplitudeSystem& sys,
                                          const Eigen::VectorXd& phi,
                                          const StabilityConfig& cfg) {
    if (phi.size() != sys.n_comps)
        throw DimensionMismatch("phi dimension does not match amplitude system");
    if (!(cfg.epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    if (cfg.delta < 0.0) throw ValidationError("perturbation size must be nonnegative");

    const double eta = sys.eta(cfg.epsilon);
    const Grid fast = pattern_grid(sys.k, sys.D, cfg.periods, cfg.points, eta);
    const Grid slow = slow_grid(fast, sys.D);
    const double slow_len = eta * slow.lengths[0];

    // reference pattern: constant envelope phi, advanced only in carrier phase
    SpectralField A_phi = make_field(slow, sys.n_comps);
    for (int n = 0; n < sys.n_comps; ++n) A_phi.comps[n].setConstant(phi(n));

    const Profile shape = parse_profile(cfg.profile, slow_len);
    std::vector<Profile> v;
    for (int n = 0; n < sys.n_comps; ++n) {
        const double base = phi(n);
        const double delta = cfg.delta;
        v.push_back([base, delta, shape](const Eigen::VectorXd& X) {
            return Complex(base, 0.0) + delta * shape(X);
        });
    }
    const SpectralField A0 = envelope_field(v, slow, eta);
    const SpectralField u0 = reconstruct(A0, sys, 0.0, fast);

    SimConfig sim;
    sim.epsilon = cfg.epsilon;
    sim.t0 = 0.0;
    sim.T_end = cfg.horizon_factor / cfg.epsilon;
    sim.dt = cfg.dt_factor / cfg.epsilon;
    sim.dealias = cfg.dealias;
    const int n_steps = static_cast<int>(std::ceil(sim.T_end / sim.dt - 1e-9));
    sim.snapshot_stride = std::max(1, n_steps / std::max(1, cfg.samples));

    const Trajectory tr = simulate(symbol, f, u0, sim);

    StabilityReport rep;
    for (const Snapshot& snap : tr.snaps) {
        const SpectralField ref = reconstruct(A_phi, sys, snap.time, fast);
        rep.times.push_back(snap.time);
        rep.errors.push_back(sup_error(snap.field, ref));
    }
    rep.e_start = rep.errors.front();
    rep.e_end = rep.errors.back();
    rep.e_t0 = rep.errors.front();
    for (size_t i = 0; i < rep.times.size(); ++i) {
        if (rep.times[i] >= cfg.t0 - 1e-12) {
            rep.e_t0 = rep.errors[i];
            break;
        }
    }
    rep.band = cfg.band_factor * eta * (phi.size() ? phi.cwiseAbs().maxCoeff() : 0.0);
    rep.contraction = rep.e_end > 0.0 ? rep.e_start / rep.e_end
                                      : std::numeric_limits<double>::infinity();

    // post-transient trend: the later half must not exceed the earlier half.
    // A slack proportional to the band tolerates the slow secular phase drift
    // that oscillatory carriers accumulate without ever approaching the band.
    const double t_settle = std::max(cfg.t0, 0.2 * sim.T_end);
    std::vector<double> post;
    for (size_t i = 0; i < rep.times.size(); ++i)
        if (rep.times[i] >= t_settle) post.push_back(rep.errors[i]);
    if (post.size() < 4) {
        rep.trend_ok = true;
    } else {
        const size_t half = post.size() / 2;
        double first = 0.0, second = 0.0;
        for (size_t i = 0; i < half; ++i) first = std::max(first, post[i]);
        for (size_t i = half; i < post.size(); ++i) second = std::max(second, post[i]);
        rep.trend_ok = second <= first * 1.05 + 0.02 * rep.band + 1e-12;
    }
    rep.passed = rep.trend_ok && rep.e_end <= std::max(0.1 * rep.e_t0, rep.band);
    return rep;
}

} // namespace ampl
