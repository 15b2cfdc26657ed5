#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"

#include "amplituder/errors.hpp"
#include "amplituder/harness.hpp"
#include "amplituder/reduction.hpp"

using namespace ampl;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

const double pi = 3.14159265358979323846;

MatrixPolynomial sh_symbol() {
    MatrixPolynomial p(1, 1);
    p.add_scalar_term(MultiIndex({0}), -1.0);
    p.add_scalar_term(MultiIndex({2}), -2.0);
    p.add_scalar_term(MultiIndex({4}), -1.0);
    return p;
}

MatrixPolynomial cel_symbol() {
    const double d = 0.25, k = 0.75;
    MatrixPolynomial p(2, 2);
    Eigen::MatrixXcd lap(2, 2), a0(2, 2);
    lap << d, 0.0, 0.0, 1.0;
    a0 << k, -1.0, 1.0, -1.0;
    p.add_term(MultiIndex({2, 0}), lap);
    p.add_term(MultiIndex({0, 2}), lap);
    p.add_term(MultiIndex({0, 0}), a0);
    return p;
}

PolynomialNonlinearity cubic_scalar() {
    PolynomialNonlinearity f(1);
    f.add_term(MultiIndex({1}), 0, 1.0);
    f.add_term(MultiIndex({3}), 0, -1.0);
    return f;
}

CriticalStructure sh_structure() {
    CriticalStructure cs;
    cs.omega = 0.0;
    cs.k = VectorXd::Constant(1, 1.0);
    cs.D = 1;
    cs.M = 2;
    cs.symmetric_pairing = true;
    cs.n_pairs = 1;
    CriticalMode plus;
    plus.j = 1;
    plus.w = VectorXcd::Constant(1, 1.0);
    plus.l = VectorXcd::Constant(1, 1.0);
    plus.Q = MatrixPolynomial(1, 1);
    plus.Q.add_scalar_term(MultiIndex({2}), 4.0);
    CriticalMode minus = plus;
    minus.j = -1;
    cs.modes = {plus, minus};
    return cs;
}

CriticalStructure cel_structure() {
    CriticalStructure cs;
    cs.omega = 0.0;
    cs.k = VectorXd::Zero(2);
    cs.k(1) = 1.0;
    cs.D = 1;
    cs.M = 4;
    cs.symmetric_pairing = true;
    cs.n_pairs = 1;
    CriticalMode plus;
    plus.j = 1;
    plus.w = VectorXcd(2);
    plus.w << 1.0, 0.5;
    plus.l = VectorXcd(2);
    plus.l << 4.0 / 3.0, -2.0 / 3.0;
    plus.Q = MatrixPolynomial(1, 1);
    plus.Q.add_scalar_term(MultiIndex({4}), -1.0 / 6.0);
    CriticalMode minus = plus;
    minus.j = -1;
    cs.modes = {plus, minus};
    return cs;
}

AmplitudeSystem sh_amplitude() {
    AmplitudeSystem sys;
    sys.n_comps = 1;
    sys.symmetric = true;
    sys.omega = 0.0;
    sys.k = VectorXd::Constant(1, 1.0);
    sys.D = 1;
    sys.M = 2;
    sys.j = {1};
    MatrixPolynomial q(1, 1);
    q.add_scalar_term(MultiIndex({2}), 4.0);
    sys.Q = {q};
    ReducedPolynomial r(1, 1);
    r.add_term(MultiIndex({1}), VectorXcd::Constant(1, 1.0));
    r.add_term(MultiIndex({3}), VectorXcd::Constant(1, -3.0));
    sys.R = {r};
    sys.w = {VectorXcd::Constant(1, 1.0)};
    sys.l = {VectorXcd::Constant(1, 1.0)};
    return sys;
}

std::vector<ReducedPolynomial> sh_steady_system() {
    ReducedPolynomial S(1, 1);
    S.add_term(MultiIndex({1}), VectorXcd::Constant(1, 1.0));
    S.add_term(MultiIndex({3}), VectorXcd::Constant(1, -3.0));
    return {S};
}

} // namespace

TEST_CASE("loglog fit recovers exact power laws") {
    const FitResult unit = fit_loglog({{1.0, 1.0}, {10.0, 10.0}, {100.0, 100.0}});
    CHECK(std::abs(unit.slope - 1.0) <= 1e-14);
    CHECK(std::abs(unit.intercept) <= 1e-14);
    CHECK(unit.r_squared == 1.0);

    std::vector<std::pair<double, double>> pts;
    for (double x : {1.0, 4.0, 9.0, 25.0}) pts.emplace_back(x, 3.0 * std::sqrt(x));
    const FitResult root = fit_loglog(pts);
    CHECK(std::abs(root.slope - 0.5) <= 1e-13);
    CHECK(std::abs(root.intercept - std::log(3.0)) <= 1e-13);
    CHECK(root.r_squared >= 1.0 - 1e-12);

    // mild deterministic scatter barely moves the fit
    const double wiggle[5] = {0.02, -0.015, 0.01, -0.02, 0.005};
    pts.clear();
    for (int i = 0; i < 5; ++i) {
        const double x = std::pow(10.0, i * 0.5);
        pts.emplace_back(x, 2.0 * std::pow(x, 0.75) * (1.0 + wiggle[i]));
    }
    const FitResult noisy = fit_loglog(pts);
    CHECK(std::abs(noisy.slope - 0.75) <= 0.02);
    CHECK(noisy.r_squared >= 0.99);
}

TEST_CASE("loglog fit rejects degenerate inputs") {
    CHECK_THROWS_AS(fit_loglog({}), DegenerateFit);
    CHECK_THROWS_AS(fit_loglog({{1.0, 1.0}, {2.0, 2.0}}), DegenerateFit);
    CHECK_THROWS_AS(fit_loglog({{1.0, 1.0}, {1.0, 2.0}, {3.0, 3.0}}), DegenerateFit);
    CHECK_THROWS_AS(fit_loglog({{1.0, 1.0}, {-2.0, 2.0}, {3.0, 3.0}}), DegenerateFit);
    CHECK_THROWS_AS(fit_loglog({{1.0, 1.0}, {2.0, 0.0}, {3.0, 3.0}}), DegenerateFit);
    CHECK_THROWS_AS(fit_loglog({{1.0, 1.0}, {2.0, -1.0}, {3.0, 3.0}}), DegenerateFit);
}

TEST_CASE("loglog fit of constant data has zero slope and unit r2") {
    const FitResult flat = fit_loglog({{1.0, 5.0}, {10.0, 5.0}, {100.0, 5.0}});
    CHECK(std::abs(flat.slope) <= 1e-15);
    CHECK(flat.r_squared == 1.0);
}

TEST_CASE("scaling report verdict combines slope window and fit quality") {
    std::vector<ScalingPoint> pts;
    for (double x : {1.0, 10.0, 100.0}) pts.push_back({x, std::pow(x, 0.62)});

    const ScalingReport wide = make_scaling_report(pts, 0.5, 0.15);
    CHECK(std::abs(wide.fitted_slope - 0.62) <= 1e-12);
    CHECK(wide.expected_slope == 0.5);
    CHECK(wide.r_squared >= 1.0 - 1e-12);
    CHECK(wide.pass);

    const ScalingReport tight = make_scaling_report(pts, 0.5, 0.10);
    CHECK_FALSE(tight.pass);

    // scattered data fails on fit quality even when the slope matches exactly
    std::vector<ScalingPoint> noisy = {
        {1.0, 1.0}, {10.0, 30.0}, {100.0, 3.0}, {1000.0, 1000.0}};
    std::vector<std::pair<double, double>> pairs;
    for (const auto& p : noisy) pairs.emplace_back(p.abscissa, p.max_error);
    const FitResult raw = fit_loglog(pairs);
    const ScalingReport shaky = make_scaling_report(noisy, raw.slope, 10.0);
    CHECK(shaky.r_squared < 0.95);
    CHECK_FALSE(shaky.pass);

    const ScalingReport tagged = make_scaling_report(pts, 0.62, 0.01, {"cell skipped"});
    REQUIRE(tagged.flags.size() == 1);
    CHECK(tagged.flags[0] == "cell skipped");
    CHECK(tagged.points.size() == 3);
}

TEST_CASE("pattern grid sizes boxes by carrier period and envelope window") {
    const Grid sh = pattern_grid(VectorXd::Constant(1, 1.0), 1, {4}, {1024}, 0.1);
    REQUIRE(sh.dims() == 1);
    CHECK(sh.points[0] == 1024);
    CHECK(std::abs(sh.lengths[0] - 80.0 * pi) <= 1e-10);
    // whole number of carrier periods
    const double cycles = sh.lengths[0] / (2.0 * pi);
    CHECK(std::abs(cycles - std::round(cycles)) <= 1e-12);

    VectorXd kc = VectorXd::Zero(2);
    kc(1) = 1.0;
    const double eta = std::pow(0.1, 0.25);
    const Grid cel = pattern_grid(kc, 1, {2, 1}, {256, 64}, eta);
    REQUIRE(cel.dims() == 2);
    CHECK(cel.points[0] == 256);
    CHECK(cel.points[1] == 64);
    CHECK(std::abs(cel.lengths[0] - 8.0 * pi) <= 1e-10);   // ceil(1/eta) = 2, |k| fallback
    CHECK(std::abs(cel.lengths[1] - 2.0 * pi) <= 1e-12);

    // zero wavenumber falls back to unit reference scale
    const Grid plain = pattern_grid(VectorXd::Zero(1), 1, {1}, {64}, 0.5);
    CHECK(std::abs(plain.lengths[0] - 4.0 * pi) <= 1e-12);
}

TEST_CASE("pattern grid validates arguments") {
    const VectorXd k = VectorXd::Constant(1, 1.0);
    CHECK_THROWS_AS(pattern_grid(k, 0, {1}, {64}, 0.1), ValidationError);
    CHECK_THROWS_AS(pattern_grid(k, 2, {1}, {64}, 0.1), ValidationError);
    CHECK_THROWS_AS(pattern_grid(k, 1, {1, 1}, {64}, 0.1), ValidationError);
    CHECK_THROWS_AS(pattern_grid(k, 1, {1}, {64, 64}, 0.1), ValidationError);
    CHECK_THROWS_AS(pattern_grid(k, 1, {1}, {64}, 0.0), ValidationError);
    CHECK_THROWS_AS(pattern_grid(k, 1, {0}, {64}, 0.1), ValidationError);
}

TEST_CASE("semigroup probe matches the two-mode hand computation") {
    // v0 = cos(x/4) on a 32 pi box: modes +-1/4 with weight 1/2 each.
    // Per mode the mismatch factor is g(s,t) = e^{lambda(1+s) t} - e^{-4 s^2 t},
    // so the field is a cos(x/4) + i b sin(x/4) with a, b the half sum and
    // half difference; both extrema sit on grid points.
    SemigroupConfig cfg;
    cfg.profile = "cospack(1.0, 0.25)";
    cfg.t_min = 1.0;
    cfg.t_max = 25.0;
    cfg.t_samples = 3;

    const auto pts = semigroup_errors(sh_symbol(), sh_structure(), cfg);
    REQUIRE(pts.size() == 3);
    const double lam_p = -0.31640625;  // -(1 - 1.25^2)^2
    const double lam_m = -0.19140625;  // -(1 - 0.75^2)^2
    const double qs = -0.25;           // 4 (i/4)^2
    const double times[3] = {1.0, 5.0, 25.0};
    for (int i = 0; i < 3; ++i) {
        const double t = times[i];
        CHECK(std::abs(pts[i].abscissa - t) <= 1e-12 * t);
        const double gp = std::exp(lam_p * t) - std::exp(qs * t);
        const double gm = std::exp(lam_m * t) - std::exp(qs * t);
        const double expect = std::max(std::abs(gp + gm), std::abs(gp - gm)) / 2.0;
        CHECK(std::abs(pts[i].max_error - expect) <= 5e-13);
    }
}

TEST_CASE("semigroup probe is exact when the reduced symbol is the full symbol") {
    MatrixPolynomial heat(1, 1);
    heat.add_scalar_term(MultiIndex({2}), 1.0);
    CriticalStructure cs;
    cs.omega = 0.0;
    cs.k = VectorXd::Zero(1);
    cs.D = 1;
    cs.M = 2;
    CriticalMode mode;
    mode.j = 1;
    mode.w = VectorXcd::Constant(1, 1.0);
    mode.l = VectorXcd::Constant(1, 1.0);
    mode.Q = heat;
    cs.modes = {mode};

    SemigroupConfig cfg;
    cfg.points = 256;
    for (const ScalingPoint& p : semigroup_errors(heat, cs, cfg))
        CHECK(p.max_error == 0.0);
}

TEST_CASE("semigroup probe validates its inputs") {
    CriticalStructure empty;
    empty.k = VectorXd::Zero(1);
    CHECK_THROWS_AS(semigroup_errors(sh_symbol(), empty, {}), ValidationError);

    CriticalStructure narrow = sh_structure();  // scalar mode vector
    narrow.k = VectorXd::Zero(2);
    narrow.k(1) = 1.0;
    CHECK_THROWS_AS(semigroup_errors(cel_symbol(), narrow, {}), DimensionMismatch);
}

TEST_CASE("semigroup mismatch decays like 1/sqrt(t) for the quartic scalar model") {
    const ScalingReport rep = semigroup_decay(sh_symbol(), sh_structure(), {});
    REQUIRE(rep.points.size() == 13);
    CHECK(rep.expected_slope == -0.5);
    CHECK(rep.fitted_slope >= -0.60);
    CHECK(rep.fitted_slope <= -0.50);
    CHECK(rep.r_squared >= 0.99);
    CHECK(rep.pass);
}

TEST_CASE("semigroup mismatch decays like t^(-1/4) for the planar two-field model") {
    SemigroupConfig cfg;
    cfg.profile = "gaussian(1.0, 2.0)";
    const ScalingReport rep = semigroup_decay(cel_symbol(), cel_structure(), cfg);
    CHECK(rep.expected_slope == -0.25);
    CHECK(std::abs(rep.fitted_slope + 0.25) <= 0.10);
    CHECK(rep.r_squared >= 0.95);
    CHECK(rep.pass);
}

TEST_CASE("constant probe data leaves no mismatch to fit") {
    SemigroupConfig cfg;
    cfg.profile = "constant(1.0)";
    cfg.points = 128;
    for (const ScalingPoint& p : semigroup_errors(sh_symbol(), sh_structure(), cfg))
        CHECK(p.max_error == 0.0);
    CHECK_THROWS_AS(semigroup_decay(sh_symbol(), sh_structure(), cfg), DegenerateFit);
}

TEST_CASE("slow initial data costs one extra power of the modulation scale") {
    ScaledInitialConfig cfg;
    cfg.etas = {0.2, 0.1, 0.05};
    const ScalingReport rep = scaled_initial_decay(sh_symbol(), sh_structure(), cfg);
    REQUIRE(rep.points.size() == 3);
    CHECK(rep.expected_slope == 1.0);
    CHECK(std::abs(rep.fitted_slope - 1.0) <= 0.05);
    CHECK(rep.r_squared >= 0.999);
    CHECK(rep.pass);
    // smaller eta, smaller mismatch
    CHECK(rep.points[0].max_error > rep.points[1].max_error);
    CHECK(rep.points[1].max_error > rep.points[2].max_error);
}

TEST_CASE("scaled-data probe rejects degenerate sweeps") {
    ScaledInitialConfig cfg;
    CHECK_THROWS_AS(scaled_initial_errors(sh_symbol(), sh_structure(), cfg), ValidationError);

    cfg.etas = {0.2, -0.1, 0.05};
    CHECK_THROWS_AS(scaled_initial_errors(sh_symbol(), sh_structure(), cfg), ValidationError);

    cfg.etas = {0.2, 0.1, 0.05};
    cfg.t0 = 0.0;
    CHECK_THROWS_AS(scaled_initial_errors(sh_symbol(), sh_structure(), cfg), ValidationError);

    cfg.t0 = 1.0;
    cfg.etas = {0.1, 0.1, 0.1};
    CHECK_THROWS_AS(scaled_initial_decay(sh_symbol(), sh_structure(), cfg), DegenerateFit);

    // constant data excites only the exactly-reproduced zero mode
    cfg.etas = {0.2, 0.1, 0.05};
    cfg.profile = "constant(0.7)";
    cfg.points = 128;
    for (const ScalingPoint& p : scaled_initial_errors(sh_symbol(), sh_structure(), cfg))
        CHECK(p.max_error == 0.0);
    CHECK_THROWS_AS(scaled_initial_decay(sh_symbol(), sh_structure(), cfg), DegenerateFit);
}

TEST_CASE("envelope error scaling guards its sweep") {
    ErrorScalingConfig cfg;
    cfg.profiles = {"gaussian(0.5, 1.0)"};
    cfg.periods = {4};
    cfg.points = {256};

    cfg.epsilons = {1e-2, 1e-3};
    CHECK_THROWS_AS(error_scaling(sh_symbol(), cubic_scalar(), sh_amplitude(), cfg),
                    PreconditionFailure);

    cfg.epsilons = {1e-2, 1e-2, 1e-2};
    CHECK_THROWS_AS(error_scaling(sh_symbol(), cubic_scalar(), sh_amplitude(), cfg),
                    DegenerateFit);

    cfg.epsilons = {1e-2, 5e-3, 2e-3};
    CHECK_THROWS_AS(error_scaling(sh_symbol(), cubic_scalar(), sh_amplitude(), cfg),
                    PreconditionFailure);

    cfg.epsilons = {1e-1, 2e-2, 8e-3};
    cfg.profiles = {};
    CHECK_THROWS_AS(error_scaling(sh_symbol(), cubic_scalar(), sh_amplitude(), cfg),
                    DimensionMismatch);

    // an unusable profile skips every cell, leaving nothing to fit
    cfg.profiles = {"mystery(1.0)"};
    CHECK_THROWS_AS(error_scaling(sh_symbol(), cubic_scalar(), sh_amplitude(), cfg),
                    DegenerateFit);
}

TEST_CASE("envelope error sweep is deterministic and ordered") {
    ErrorScalingConfig cfg;
    cfg.epsilons = {8e-3, 1e-1, 2e-2};  // shuffled on purpose
    cfg.profiles = {"gaussian(0.5, 1.0)"};
    cfg.periods = {2};
    cfg.points = {256};
    cfg.T0 = 0.5;
    cfg.t0 = 0.5;
    cfg.dt_factor = 0.01;
    cfg.samples = 8;

    const ScalingReport a = error_scaling(sh_symbol(), cubic_scalar(), sh_amplitude(), cfg);
    const ScalingReport b = error_scaling(sh_symbol(), cubic_scalar(), sh_amplitude(), cfg);

    REQUIRE(a.points.size() == 3);
    CHECK(a.flags.empty());
    CHECK(a.points[0].abscissa == 8e-3);
    CHECK(a.points[1].abscissa == 2e-2);
    CHECK(a.points[2].abscissa == 1e-1);
    CHECK(a.points[0].max_error > 0.0);
    CHECK(a.points[0].max_error < a.points[1].max_error);
    CHECK(a.points[1].max_error < a.points[2].max_error);

    REQUIRE(b.points.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(a.points[i].abscissa == b.points[i].abscissa);
        CHECK(a.points[i].max_error == b.points[i].max_error);
    }
    CHECK(a.fitted_slope == b.fitted_slope);
    CHECK(a.intercept == b.intercept);
    CHECK(a.r_squared == b.r_squared);
}

TEST_CASE("newton steady solve lands on the cubic balance point") {
    const SteadyStateReport rep = find_steady(sh_steady_system(), VectorXd::Constant(1, 0.5));
    CHECK(std::abs(rep.phi(0) - 1.0 / std::sqrt(3.0)) <= 1e-10);
    CHECK(rep.residual <= 1e-10);
    REQUIRE(rep.jacobian_eigs.size() == 1);
    CHECK(std::abs(rep.jacobian_eigs[0].real() + 2.0) <= 1e-8);
    CHECK(std::abs(rep.jacobian_eigs[0].imag()) <= 1e-12);
    CHECK(rep.stable);

    REQUIRE(rep.residual_history.size() >= 3);
    CHECK(rep.residual_history.front() == 0.125);  // |0.5 - 3 * 0.5^3|
    CHECK(rep.residual_history.back() <= 1e-10);
    for (size_t i = 0; i + 1 < rep.residual_history.size(); ++i) {
        CHECK(rep.residual_history[i + 1] < rep.residual_history[i]);
        if (rep.residual_history[i] < 1e-2)  // quadratic tail
            CHECK(rep.residual_history[i + 1] <= 10.0 * rep.residual_history[i] *
                                                     rep.residual_history[i]);
    }

    ReducedPolynomial S(1, 1);
    S.add_term(MultiIndex({1}), VectorXcd::Constant(1, 4.0 / 3.0));
    S.add_term(MultiIndex({3}), VectorXcd::Constant(1, -4.0));
    const SteadyStateReport planar = find_steady({S}, VectorXd::Constant(1, 0.5));
    CHECK(std::abs(planar.phi(0) - 1.0 / std::sqrt(3.0)) <= 1e-10);
    CHECK(std::abs(planar.jacobian_eigs[0].real() + 8.0 / 3.0) <= 1e-8);
    CHECK(planar.stable);
}

TEST_CASE("newton steady solve flags the unstable zero state") {
    const SteadyStateReport rep = find_steady(sh_steady_system(), VectorXd::Zero(1));
    CHECK(rep.phi(0) == 0.0);
    CHECK(rep.residual == 0.0);
    REQUIRE(rep.residual_history.size() == 1);
    CHECK(std::abs(rep.jacobian_eigs[0].real() - 1.0) <= 1e-12);
    CHECK_FALSE(rep.stable);
}

TEST_CASE("newton steady solve handles decoupled components") {
    ReducedPolynomial s0(2, 1), s1(2, 1);
    s0.add_term(MultiIndex({1, 0}), VectorXcd::Constant(1, 1.0));
    s0.add_term(MultiIndex({3, 0}), VectorXcd::Constant(1, -3.0));
    s1.add_term(MultiIndex({0, 1}), VectorXcd::Constant(1, 2.0));
    s1.add_term(MultiIndex({0, 3}), VectorXcd::Constant(1, -2.0));
    VectorXd guess(2);
    guess << 0.5, 0.8;
    const SteadyStateReport rep = find_steady({s0, s1}, guess);
    CHECK(std::abs(rep.phi(0) - 1.0 / std::sqrt(3.0)) <= 1e-9);
    CHECK(std::abs(rep.phi(1) - 1.0) <= 1e-9);
    REQUIRE(rep.jacobian_eigs.size() == 2);
    double lo = rep.jacobian_eigs[0].real(), hi = rep.jacobian_eigs[1].real();
    if (lo > hi) std::swap(lo, hi);
    CHECK(std::abs(lo + 4.0) <= 1e-8);
    CHECK(std::abs(hi + 2.0) <= 1e-8);
    CHECK(rep.stable);
}

TEST_CASE("newton failure modes surface as typed errors") {
    // 1 + A^2 has no real root; the iteration wanders forever
    ReducedPolynomial S(1, 1);
    S.add_term(MultiIndex({0}), VectorXcd::Constant(1, 1.0));
    S.add_term(MultiIndex({2}), VectorXcd::Constant(1, 1.0));
    CHECK_THROWS_AS(find_steady({S}, VectorXd::Constant(1, 0.5)), NewtonDiverged);

    // same system from the symmetry point: derivative vanishes
    try {
        find_steady({S}, VectorXd::Zero(1));
        FAIL("expected a singular jacobian");
    } catch (const SingularJacobian& e) {
        CHECK(std::string(e.what()).find("near-kernel") != std::string::npos);
    }

    CHECK_THROWS_AS(find_steady({}, VectorXd::Zero(0)), ValidationError);
    CHECK_THROWS_AS(find_steady(sh_steady_system(), VectorXd::Zero(2)), DimensionMismatch);
    VectorXd bad(1);
    bad << std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(find_steady(sh_steady_system(), bad), ValidationError);
}

TEST_CASE("exact jacobian agrees with central differences") {
    ReducedPolynomial s0(2, 1), s1(2, 1);
    s0.add_term(MultiIndex({1, 0}), VectorXcd::Constant(1, 1.0));
    s0.add_term(MultiIndex({2, 1}), VectorXcd::Constant(1, -3.0));
    s1.add_term(MultiIndex({0, 1}), VectorXcd::Constant(1, 1.0));
    s1.add_term(MultiIndex({1, 2}), VectorXcd::Constant(1, -2.0));
    s1.add_term(MultiIndex({3, 0}), VectorXcd::Constant(1, 0.5));
    const std::vector<ReducedPolynomial> S = {s0, s1};

    std::mt19937 gen(314159);
    std::uniform_real_distribution<double> pick(-2.0, 2.0);
    const double h = 1e-6;
    for (int trial = 0; trial < 50; ++trial) {
        VectorXd x(2);
        x << pick(gen), pick(gen);
        const Eigen::MatrixXd J = steady_jacobian(S, x);
        for (int n = 0; n < 2; ++n) {
            for (int c = 0; c < 2; ++c) {
                VectorXd xp = x, xm = x;
                xp(c) += h;
                xm(c) -= h;
                const double fd = (S[n].eval(xp.cast<Complex>())(0).real() -
                                   S[n].eval(xm.cast<Complex>())(0).real()) /
                                  (2.0 * h);
                CHECK(std::abs(J(n, c) - fd) <= 1e-7);
            }
        }
    }

    CHECK_THROWS_AS(steady_jacobian(S, VectorXd::Zero(3)), DimensionMismatch);
}

TEST_CASE("steady states of the unfolded system form a phase circle") {
    const AmplitudeSystem sys = build_amplitude_system(sh_structure(), cubic_scalar(), false);
    REQUIRE(sys.n_comps == 2);
    REQUIRE_FALSE(sys.symmetric);

    const double phi = 1.0 / std::sqrt(3.0);
    for (int i = 0; i < 8; ++i) {
        const double theta = 2.0 * pi * i / 8.0;
        VectorXcd A(2);
        A(0) = phi * std::exp(Complex(0.0, theta));
        A(1) = phi * std::exp(Complex(0.0, -theta));
        for (int n = 0; n < 2; ++n) CHECK(std::abs(sys.R[n].eval(A)(0)) <= 1e-10);
    }
}

TEST_CASE("pattern stability harness contracts perturbations") {
    const SteadyStateReport steady =
        find_steady(sh_steady_system(), VectorXd::Constant(1, 0.5));

    StabilityConfig cfg;
    cfg.epsilon = 0.01;
    cfg.periods = {4};
    cfg.points = {1024};

    cfg.delta = 0.05 * steady.phi(0);
    const StabilityReport pushed = verify_periodic_stability(
        sh_symbol(), cubic_scalar(), sh_amplitude(), steady.phi, cfg);
    REQUIRE(pushed.times.size() == pushed.errors.size());
    REQUIRE(pushed.times.size() >= 10);
    for (size_t i = 1; i < pushed.times.size(); ++i)
        CHECK(pushed.times[i] > pushed.times[i - 1]);
    CHECK(pushed.e_start == pushed.errors.front());
    CHECK(pushed.e_end == pushed.errors.back());
    CHECK(std::abs(pushed.band - 3.0 * 0.1 * steady.phi(0)) <= 1e-12);
    CHECK(pushed.contraction >= 10.0);
    CHECK(pushed.trend_ok);
    CHECK(pushed.passed);

    cfg.delta = 0.0;
    const StabilityReport quiet = verify_periodic_stability(
        sh_symbol(), cubic_scalar(), sh_amplitude(), steady.phi, cfg);
    CHECK(quiet.e_end <= quiet.band);
    CHECK(quiet.passed);

    cfg.delta = 0.05;
    const StabilityReport unstable = verify_periodic_stability(
        sh_symbol(), cubic_scalar(), sh_amplitude(), VectorXd::Zero(1), cfg);
    CHECK(unstable.e_end > unstable.e_t0);
    CHECK_FALSE(unstable.passed);
}

TEST_CASE("stability harness validates arguments") {
    StabilityConfig cfg;
    cfg.periods = {4};
    cfg.points = {256};
    CHECK_THROWS_AS(verify_periodic_stability(sh_symbol(), cubic_scalar(), sh_amplitude(),
                                              VectorXd::Zero(2), cfg),
                    DimensionMismatch);
    cfg.epsilon = -1.0;
    CHECK_THROWS_AS(verify_periodic_stability(sh_symbol(), cubic_scalar(), sh_amplitude(),
                                              VectorXd::Zero(1), cfg),
                    ValidationError);
    cfg.epsilon = 0.01;
    cfg.delta = -0.1;
    CHECK_THROWS_AS(verify_periodic_stability(sh_symbol(), cubic_scalar(), sh_amplitude(),
                                              VectorXd::Zero(1), cfg),
                    ValidationError);
}
