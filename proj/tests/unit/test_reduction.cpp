#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "amplituder/reduction.hpp"

using namespace ampl;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

MatrixPolynomial sh_symbol(double k = 1.0) {
    double k2 = k * k;
    return scalar_polynomial(1, {
        {MultiIndex({4}), -1.0},
        {MultiIndex({2}), -2.0 * k2},
        {MultiIndex({0}), -k2 * k2},
    });
}

MatrixPolynomial oscillatory_symbol(double D = 1.0) {
    MatrixPolynomial p(1, 2);
    MatrixXcd a2 = MatrixXcd::Zero(2, 2);
    a2(0, 0) = D;
    a2(1, 1) = D;
    p.add_term(MultiIndex({2}), a2);
    MatrixXcd a0 = MatrixXcd::Zero(2, 2);
    a0(0, 1) = 1.0;
    a0(1, 0) = -1.0;
    p.add_term(MultiIndex({0}), a0);
    return p;
}

MatrixPolynomial turing_symbol(double d = 0.25, double k = 0.75) {
    MatrixPolynomial p(2, 2);
    MatrixXcd lap = MatrixXcd::Zero(2, 2);
    lap(0, 0) = d;
    lap(1, 1) = 1.0;
    p.add_term(MultiIndex({2, 0}), lap);
    p.add_term(MultiIndex({0, 2}), lap);
    MatrixXcd a0(2, 2);
    a0 << k, -1.0, 1.0, -1.0;
    p.add_term(MultiIndex({0, 0}), a0);
    return p;
}

PolynomialNonlinearity cubic_scalar() {
    PolynomialNonlinearity f(1);
    f.add_term(MultiIndex({1}), 0, 1.0);
    f.add_term(MultiIndex({3}), 0, -1.0);
    return f;
}

PolynomialNonlinearity cubic_first_component() {
    PolynomialNonlinearity f(2);
    f.add_term(MultiIndex({1, 0}), 0, 1.0);
    f.add_term(MultiIndex({3, 0}), 0, -1.0);
    return f;
}

std::vector<Carrier> scalar_pair() {
    VectorXcd one = VectorXcd::Constant(1, 1.0);
    return {{1, one}, {-1, one}};
}

VectorXcd vecc(std::initializer_list<Complex> vals) {
    VectorXcd v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (Complex c : vals) v[i++] = c;
    return v;
}

VectorXd vec1(double x) {
    VectorXd v(1);
    v[0] = x;
    return v;
}

VectorXd vec2(double x, double y) {
    VectorXd v(2);
    v << x, y;
    return v;
}

PolynomialNonlinearity random_nonlinearity(std::mt19937& rng, int m, int max_degree) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_int_distribution<int> deg_pick(0, max_degree);
    PolynomialNonlinearity f(m);
    for (int t = 0; t < 5; ++t) {
        std::vector<int> e(m, 0);
        int total = deg_pick(rng);
        for (int q = 0; q < total; ++q) e[rng() % static_cast<unsigned>(m)] += 1;
        VectorXcd c(m);
        for (int i = 0; i < m; ++i) c[i] = unif(rng);
        f.add_term(MultiIndex(std::move(e)), c);
    }
    return f;
}

} // namespace

TEST_CASE("exact Fourier coefficients of the scalar cubic") {
    auto f = cubic_scalar();
    auto carriers = scalar_pair();

    auto c1 = fourier_coefficient_exact(f, carriers, 1);
    CHECK(c1.terms.size() == 2);
    CHECK(c1.coeff(MultiIndex({1, 0}))[0] == Complex(1.0, 0.0));
    CHECK(c1.coeff(MultiIndex({2, 1}))[0] == Complex(-3.0, 0.0));

    auto c3 = fourier_coefficient_exact(f, carriers, 3);
    CHECK(c3.terms.size() == 1);
    CHECK(c3.coeff(MultiIndex({3, 0}))[0] == Complex(-1.0, 0.0));

    auto cm3 = fourier_coefficient_exact(f, carriers, -3);
    CHECK(cm3.coeff(MultiIndex({0, 3}))[0] == Complex(-1.0, 0.0));

    CHECK(fourier_coefficient_exact(f, carriers, 0).is_zero());
    CHECK(fourier_coefficient_exact(f, carriers, 2).is_zero());
    CHECK(fourier_coefficient_exact(f, carriers, 5).is_zero());   // beyond cubic support
}

TEST_CASE("exact Fourier coefficients of two-component systems") {
    SUBCASE("fold carriers share a real mode vector") {
        auto f = cubic_first_component();
        VectorXcd w = vecc({1.0, 0.5});
        std::vector<Carrier> carriers = {{1, w}, {-1, w}};
        auto c1 = fourier_coefficient_exact(f, carriers, 1);
        CHECK(c1.coeff(MultiIndex({1, 0}))[0] == Complex(1.0, 0.0));
        CHECK(c1.coeff(MultiIndex({1, 0}))[1] == Complex(0.0, 0.0));
        CHECK(c1.coeff(MultiIndex({2, 1}))[0] == Complex(-3.0, 0.0));
        CHECK(c1.coeff(MultiIndex({2, 1}))[1] == Complex(0.0, 0.0));
    }
    SUBCASE("oscillatory carriers only couple through the first field") {
        auto f = cubic_first_component();
        std::vector<Carrier> carriers = {{1, vecc({1.0, Complex(0.0, 1.0)})},
                                         {-1, vecc({1.0, Complex(0.0, -1.0)})}};
        auto c1 = fourier_coefficient_exact(f, carriers, 1);
        CHECK(std::abs(c1.coeff(MultiIndex({1, 0}))[0] - Complex(1.0, 0.0)) < 1e-15);
        CHECK(std::abs(c1.coeff(MultiIndex({2, 1}))[0] - Complex(-3.0, 0.0)) < 1e-15);
        CHECK(std::abs(c1.coeff(MultiIndex({2, 1}))[1]) < 1e-15);
    }
    SUBCASE("second-component coupling mixes the mode entries") {
        // f = (0, u*v): u = A1 e + A2 e^-, v = i A1 e - i A2 e^-
        PolynomialNonlinearity f(2);
        f.add_term(MultiIndex({1, 1}), 1, 1.0);
        std::vector<Carrier> carriers = {{1, vecc({1.0, Complex(0.0, 1.0)})},
                                         {-1, vecc({1.0, Complex(0.0, -1.0)})}};
        auto c2 = fourier_coefficient_exact(f, carriers, 2);
        CHECK(std::abs(c2.coeff(MultiIndex({2, 0}))[1] - Complex(0.0, 1.0)) < 1e-15);
        auto c0 = fourier_coefficient_exact(f, carriers, 0);
        // A1 A2 (w1[0] w2[1] + w2[0] w1[1]) = A1 A2 (-i + i) = 0
        CHECK(c0.is_zero());
    }
}

TEST_CASE("quadrature route agrees with the exact expansion") {
    SUBCASE("pinned values") {
        auto f = cubic_first_component();
        VectorXcd w = vecc({1.0, 0.5});
        std::vector<Carrier> carriers = {{1, w}, {-1, w}};
        VectorXcd A = vecc({0.5, 0.5});
        auto val = fourier_coefficient_quadrature(f, carriers, A, 1);
        CHECK(std::abs(val[0] - Complex(0.125, 0.0)) < 1e-14);
        CHECK(std::abs(val[1]) < 1e-14);

        auto zero = fourier_coefficient_quadrature(f, carriers, VectorXcd::Zero(2), 1);
        CHECK(zero.cwiseAbs().maxCoeff() < 1e-16);
    }
    SUBCASE("random polynomials across random carriers") {
        std::mt19937 rng(101);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            int m = 1 + static_cast<int>(rng() % 2);
            auto f = random_nonlinearity(rng, m, 5);
            int N = 2 + static_cast<int>(rng() % 2);
            std::vector<Carrier> carriers;
            std::vector<int> used;
            for (int n = 0; n < N; ++n) {
                int j;
                do {
                    j = static_cast<int>(rng() % 5) - 2;
                } while (std::find(used.begin(), used.end(), j) != used.end());
                used.push_back(j);
                VectorXcd w(m);
                for (int i = 0; i < m; ++i) w[i] = Complex(unif(rng), unif(rng));
                carriers.push_back({j, w});
            }
            VectorXcd A(N);
            for (int n = 0; n < N; ++n) A[n] = Complex(unif(rng), unif(rng));
            int bound = f.degree() * 2;
            for (int j = -bound; j <= bound; ++j) {
                auto exact = fourier_coefficient_exact(f, carriers, j).eval(A);
                auto quad = fourier_coefficient_quadrature(f, carriers, A, j);
                CHECK((exact - quad).cwiseAbs().maxCoeff() < 1e-10);
            }
        }
    }
    SUBCASE("coefficient family reconstructs the nonlinearity") {
        std::mt19937 rng(202);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            auto f = random_nonlinearity(rng, 2, 4);
            std::vector<Carrier> carriers = {{1, vecc({unif(rng), unif(rng)})},
                                             {-2, vecc({unif(rng), unif(rng)})}};
            VectorXcd A = vecc({Complex(unif(rng), unif(rng)), Complex(unif(rng), unif(rng))});
            int bound = f.degree() * 2;

            std::vector<VectorXcd> coeffs;
            for (int j = -bound; j <= bound; ++j)
                coeffs.push_back(fourier_coefficient_exact(f, carriers, j).eval(A));

            for (int q = 0; q < 64; ++q) {
                double theta = 2.0 * M_PI * q / 64;
                VectorXcd u = VectorXcd::Zero(2);
                for (size_t n = 0; n < carriers.size(); ++n)
                    u += A[n] * std::exp(Complex(0.0, carriers[n].j * theta)) * carriers[n].w;
                VectorXcd sum = VectorXcd::Zero(2);
                for (int j = -bound; j <= bound; ++j)
                    sum += coeffs[j + bound] * std::exp(Complex(0.0, j * theta));
                CHECK((sum - f.eval(u)).cwiseAbs().maxCoeff() < 1e-10);
            }
        }
    }
}

TEST_CASE("mode projection scales by the left eigenvector") {
    auto f = cubic_first_component();
    SUBCASE("fold factor 4/3") {
        VectorXcd w = vecc({1.0, 0.5});
        std::vector<Carrier> carriers = {{1, w}, {-1, w}};
        auto c1 = fourier_coefficient_exact(f, carriers, 1);
        auto r1 = project_mode(c1, vecc({4.0 / 3.0, -2.0 / 3.0}));
        CHECK(r1.dim == 1);
        CHECK(std::abs(r1.coeff(MultiIndex({1, 0}))[0] - Complex(4.0 / 3.0, 0.0)) < 1e-14);
        CHECK(std::abs(r1.coeff(MultiIndex({2, 1}))[0] - Complex(-4.0, 0.0)) < 1e-14);
    }
    SUBCASE("oscillatory factor 1/2") {
        std::vector<Carrier> carriers = {{1, vecc({1.0, Complex(0.0, 1.0)})},
                                         {-1, vecc({1.0, Complex(0.0, -1.0)})}};
        auto c1 = fourier_coefficient_exact(f, carriers, 1);
        auto r1 = project_mode(c1, vecc({0.5, Complex(0.0, -0.5)}));
        CHECK(std::abs(r1.coeff(MultiIndex({1, 0}))[0] - Complex(0.5, 0.0)) < 1e-12);
        CHECK(std::abs(r1.coeff(MultiIndex({2, 1}))[0] - Complex(-1.5, 0.0)) < 1e-12);
    }
    SUBCASE("scalar projection is the identity") {
        auto fs = cubic_scalar();
        auto c1 = fourier_coefficient_exact(fs, scalar_pair(), 1);
        auto r1 = project_mode(c1, VectorXcd::Constant(1, 1.0));
        CHECK(r1.coeff(MultiIndex({1, 0}))[0] == Complex(1.0, 0.0));
        CHECK(r1.coeff(MultiIndex({2, 1}))[0] == Complex(-3.0, 0.0));
    }
}

TEST_CASE("symmetric fold of conjugate pairs") {
    auto f = cubic_scalar();
    auto r1 = fourier_coefficient_exact(f, scalar_pair(), 1);
    auto s = symmetric_reduce(r1, 1);
    CHECK(s.n_vars == 1);
    CHECK(s.coeff(MultiIndex({1}))[0] == Complex(1.0, 0.0));
    CHECK(s.coeff(MultiIndex({3}))[0] == Complex(-3.0, 0.0));
    CHECK(s.max_imag_coeff() == 0.0);

    // folding matches evaluation on the diagonal
    std::mt19937 rng(55);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int t = 0; t < 25; ++t) {
        Complex a(unif(rng), unif(rng));
        CHECK(std::abs(s.eval(vecc({a}))[0] - r1.eval(vecc({a, a}))[0]) < 1e-14);
    }

    PolynomialNonlinearity lin(1);
    lin.add_term(MultiIndex({1}), 0, 1.0);
    auto slin = symmetric_reduce(fourier_coefficient_exact(lin, scalar_pair(), 1), 1);
    CHECK(slin.terms.size() == 1);
    CHECK(slin.coeff(MultiIndex({1}))[0] == Complex(1.0, 0.0));
}

TEST_CASE("torus equivariance and conjugation symmetry") {
    auto f = cubic_scalar();
    CHECK(check_equivariance(f, scalar_pair(), {1, 3, 0}) < 1e-12);
    CHECK(check_conjugation(f, scalar_pair(), {1, 3}) < 1e-12);

    auto f2 = cubic_first_component();
    VectorXcd w = vecc({1.0, 0.5});
    std::vector<Carrier> fold = {{1, w}, {-1, w}};
    CHECK(check_equivariance(f2, fold, {1, 3}) < 1e-12);
    CHECK(check_conjugation(f2, fold, {1, 3}) < 1e-12);

    std::mt19937 rng(77);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        auto fr = random_nonlinearity(rng, 2, 4);
        VectorXcd w1(2), w2(2);
        for (int i = 0; i < 2; ++i) {
            w1[i] = Complex(unif(rng), unif(rng));
            w2[i] = Complex(unif(rng), unif(rng));
        }
        std::vector<Carrier> carriers = {{1, w1}, {2, w2}, {-1, w1}, {-2, w2}};
        CHECK(check_equivariance(fr, carriers, {0, 1, 2, 3}, 20) < 1e-12);
        CHECK(check_conjugation(fr, carriers, {0, 1, 2, 3}, 20) < 1e-12);
    }

    // explicit swap identity at the polynomial level
    auto c1 = fourier_coefficient_exact(f, scalar_pair(), 1);
    auto cm1 = fourier_coefficient_exact(f, scalar_pair(), -1);
    CHECK(c1.coeff(MultiIndex({1, 0}))[0] == cm1.coeff(MultiIndex({0, 1}))[0]);
    CHECK(c1.coeff(MultiIndex({2, 1}))[0] == cm1.coeff(MultiIndex({1, 2}))[0]);
}

TEST_CASE("termwise amplitude derivatives") {
    auto f = cubic_scalar();
    auto s = symmetric_reduce(fourier_coefficient_exact(f, scalar_pair(), 1), 1);
    auto ds = s.partial(0);   // 1 - 9 A^2
    CHECK(ds.coeff(MultiIndex({0}))[0] == Complex(1.0, 0.0));
    CHECK(ds.coeff(MultiIndex({2}))[0] == Complex(-9.0, 0.0));

    std::mt19937 rng(91);
    std::uniform_real_distribution<double> unif(-0.8, 0.8);
    for (int t = 0; t < 50; ++t) {
        Complex a(unif(rng), unif(rng));
        double h = 1e-5;
        Complex fd = (s.eval(vecc({a + h}))[0] - s.eval(vecc({a - h}))[0]) / (2 * h);
        CHECK(std::abs(fd - ds.eval(vecc({a}))[0]) < 1e-7);
    }
}

TEST_CASE("amplitude system assembly from the dispersion pipeline") {
    SUBCASE("quartic scalar, symmetric and general modes") {
        auto f = cubic_scalar();
        auto res = analyze_dispersion(sh_symbol(), &f, 0.0, vec1(1.0), 1);
        auto sym = build_amplitude_system(res.critical, f, true);
        CHECK(sym.n_comps == 1);
        CHECK(sym.symmetric);
        CHECK(sym.M == 2);
        CHECK(std::abs(sym.Q[0].coeff(MultiIndex({2}))(0, 0) - Complex(4.0, 0.0)) < 1e-9);
        CHECK(std::abs(sym.R[0].coeff(MultiIndex({1}))[0] - Complex(1.0, 0.0)) < 1e-12);
        CHECK(std::abs(sym.R[0].coeff(MultiIndex({3}))[0] - Complex(-3.0, 0.0)) < 1e-12);
        CHECK(sym.eta(0.04) == doctest::Approx(0.2).epsilon(1e-12));

        auto gen = build_amplitude_system(res.critical, f, false);
        CHECK(gen.n_comps == 2);
        CHECK(gen.j[0] == 1);
        CHECK(gen.j[1] == -1);
        CHECK(std::abs(gen.R[0].coeff(MultiIndex({1, 0}))[0] - Complex(1.0, 0.0)) < 1e-12);
        CHECK(std::abs(gen.R[0].coeff(MultiIndex({2, 1}))[0] - Complex(-3.0, 0.0)) < 1e-12);
        CHECK(std::abs(gen.R[1].coeff(MultiIndex({0, 1}))[0] - Complex(1.0, 0.0)) < 1e-12);
        CHECK(std::abs(gen.R[1].coeff(MultiIndex({1, 2}))[0] - Complex(-3.0, 0.0)) < 1e-12);
    }
    SUBCASE("planar fold carries the 4/3 projection factor") {
        auto f = cubic_first_component();
        auto res = analyze_dispersion(turing_symbol(), &f, 0.0, vec2(0.0, 1.0), 1);
        auto sys = build_amplitude_system(res.critical, f, true);
        CHECK(sys.n_comps == 1);
        CHECK(sys.M == 4);
        CHECK(std::abs(sys.Q[0].coeff(MultiIndex({4}))(0, 0) - Complex(-1.0 / 6.0, 0.0)) < 1e-6);
        CHECK(std::abs(sys.R[0].coeff(MultiIndex({1}))[0] - Complex(4.0 / 3.0, 0.0)) < 1e-8);
        CHECK(std::abs(sys.R[0].coeff(MultiIndex({3}))[0] - Complex(-4.0, 0.0)) < 1e-8);
    }
    SUBCASE("oscillatory pair carries the 1/2 projection factor") {
        auto f = cubic_first_component();
        auto res = analyze_dispersion(oscillatory_symbol(), &f, 1.0, vec1(0.0), 1);
        auto sys = build_amplitude_system(res.critical, f, true);
        CHECK(std::abs(sys.R[0].coeff(MultiIndex({1}))[0] - Complex(0.5, 0.0)) < 1e-10);
        CHECK(std::abs(sys.R[0].coeff(MultiIndex({3}))[0] - Complex(-1.5, 0.0)) < 1e-10);
        CHECK(std::abs(sys.Q[0].coeff(MultiIndex({2}))(0, 0) - Complex(1.0, 0.0)) < 1e-9);
    }
    SUBCASE("symmetric mode requires the pairing flag") {
        auto f = cubic_scalar();
        auto res = analyze_dispersion(sh_symbol(), &f, 0.0, vec1(1.0), 1);
        CriticalStructure broken = res.critical;
        broken.symmetric_pairing = false;
        CHECK_THROWS_AS(build_amplitude_system(broken, f, true), PreconditionFailure);
    }
}
