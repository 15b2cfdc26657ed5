#include "amplituder/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ampl {

namespace {

bool vec_zero(const Eigen::VectorXcd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v[i] != Complex(0.0, 0.0)) return false;
    return true;
}

// scalar polynomial in the amplitude variables
using ScalarTerms = std::map<MultiIndex, Complex, GradedLexLess>;

ScalarTerms multiply(const ScalarTerms& a, const ScalarTerms& b) {
    ScalarTerms out;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            Complex c = ca * cb;
            if (c == Complex(0.0, 0.0)) continue;
            auto [it, fresh] = out.try_emplace(ea + eb, c);
            if (!fresh) {
                it->second += c;
                if (it->second == Complex(0.0, 0.0)) out.erase(it);
            }
        }
    return out;
}

int carrier_frequency(const MultiIndex& exps, const std::vector<Carrier>& carriers) {
    int freq = 0;
    for (int n = 0; n < exps.dim(); ++n) freq += exps[n] * carriers[n].j;
    return freq;
}

} // namespace

void ReducedPolynomial::add_term(const MultiIndex& exps, const Eigen::VectorXcd& coeff) {
    if (exps.dim() != n_vars) throw DimensionMismatch("term exponent has wrong variable count");
    if (coeff.size() != dim) throw DimensionMismatch("term coefficient has wrong dimension");
    auto [it, fresh] = terms.try_emplace(exps, coeff);
    if (!fresh) {
        it->second += coeff;
        if (vec_zero(it->second)) terms.erase(it);
    } else if (vec_zero(coeff)) {
        terms.erase(it);
    }
}

Eigen::VectorXcd ReducedPolynomial::coeff(const MultiIndex& exps) const {
    auto it = terms.find(exps);
    return it == terms.end() ? Eigen::VectorXcd::Zero(dim).eval() : it->second;
}

Eigen::VectorXcd ReducedPolynomial::eval(const Eigen::VectorXcd& A) const {
    if (A.size() != n_vars) throw DimensionMismatch("amplitude vector has wrong size");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
    for (const auto& [exps, coeff] : terms) {
        Complex mono(1.0, 0.0);
        for (int n = 0; n < n_vars; ++n)
            for (int p = 0; p < exps[n]; ++p) mono *= A[n];
        out += mono * coeff;
    }
    return out;
}

ReducedPolynomial ReducedPolynomial::partial(int var) const {
    if (var < 0 || var >= n_vars) throw ValidationError("partial: variable out of range");
    ReducedPolynomial out(n_vars, dim);
    for (const auto& [exps, coeff] : terms) {
        if (exps[var] == 0) continue;
        std::vector<int> e(exps.dim());
        for (int i = 0; i < exps.dim(); ++i) e[i] = exps[i];
        double p = e[var];
        e[var] -= 1;
        out.add_term(MultiIndex(std::move(e)), p * coeff);
    }
    return out;
}

double ReducedPolynomial::max_imag_coeff() const {
    double worst = 0.0;
    for (const auto& [exps, coeff] : terms)
        worst = std::max(worst, coeff.imag().cwiseAbs().maxCoeff());
    return worst;
}

ReducedPolynomial fourier_coefficient_exact(const PolynomialNonlinearity& f,
                                            const std::vector<Carrier>& carriers, int j) {
    const int N = static_cast<int>(carriers.size());
    const int m = f.components();
    for (const auto& c : carriers)
        if (c.w.size() != m) throw DimensionMismatch("carrier mode vector has wrong size");

    ReducedPolynomial out(N, m);
    int max_j = 0;
    for (const auto& c : carriers) max_j = std::max(max_j, std::abs(c.j));
    if (std::abs(j) > f.degree() * max_j) return out;   // beyond the support bound

    // per field component i, u_i = sum_n (w_n[i]) A_n: a linear form in A
    std::vector<ScalarTerms> linear(m);
    for (int i = 0; i < m; ++i)
        for (int n = 0; n < N; ++n)
            if (carriers[n].w[i] != Complex(0.0, 0.0))
                linear[i][MultiIndex::unit(N, n)] = carriers[n].w[i];

    for (const auto& [alpha, c_alpha] : f.terms()) {
        ScalarTerms prod;
        prod[MultiIndex::zero(N)] = Complex(1.0, 0.0);
        for (int i = 0; i < m; ++i)
            for (int p = 0; p < alpha[i]; ++p) prod = multiply(prod, linear[i]);
        for (const auto& [exps, scalar] : prod)
            if (carrier_frequency(exps, carriers) == j) out.add_term(exps, scalar * c_alpha);
    }
    return out;
}

Eigen::VectorXcd fourier_coefficient_quadrature(const PolynomialNonlinearity& f,
                                                const std::vector<Carrier>& carriers,
                                                const Eigen::VectorXcd& A, int j,
                                                int quad_points) {
    const int N = static_cast<int>(carriers.size());
    const int m = f.components();
    if (A.size() != N) throw DimensionMismatch("amplitude vector has wrong size");
    int max_j = 0;
    for (const auto& c : carriers) max_j = std::max(max_j, std::abs(c.j));
    int nodes = quad_points > 0 ? quad_points : 4 * (f.degree() * max_j + std::abs(j)) + 1;

    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(m);
    for (int p = 0; p < nodes; ++p) {
        double theta = 2.0 * M_PI * p / nodes;
        Eigen::VectorXcd u = Eigen::VectorXcd::Zero(m);
        for (int n = 0; n < N; ++n)
            u += A[n] * std::exp(Complex(0.0, carriers[n].j * theta)) * carriers[n].w;
        acc += f.eval(u) * std::exp(Complex(0.0, -j * theta));
    }
    return acc / static_cast<double>(nodes);
}

ReducedPolynomial project_mode(const ReducedPolynomial& Cj, const Eigen::VectorXcd& l) {
    if (l.size() != Cj.dim) throw DimensionMismatch("projection vector has wrong size");
    ReducedPolynomial out(Cj.n_vars, 1);
    for (const auto& [exps, coeff] : Cj.terms) {
        Complex s = l.transpose() * coeff;
        Eigen::VectorXcd v(1);
        v[0] = s;
        out.add_term(exps, v);
    }
    return out;
}

ReducedPolynomial symmetric_reduce(const ReducedPolynomial& Rn, int N) {
    if (Rn.n_vars != 2 * N) throw DimensionMismatch("symmetric_reduce expects 2N variables");
    ReducedPolynomial out(N, Rn.dim);
    for (const auto& [exps, coeff] : Rn.terms) {
        std::vector<int> folded(N, 0);
        for (int i = 0; i < N; ++i) folded[i] = exps[i] + exps[N + i];
        out.add_term(MultiIndex(std::move(folded)), coeff);
    }
    return out;
}

double check_equivariance(const PolynomialNonlinearity& f, const std::vector<Carrier>& carriers,
                          const std::vector<int>& js, int n_samples, unsigned seed) {
    const int N = static_cast<int>(carriers.size());
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double worst = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        Eigen::VectorXcd A(N);
        for (int n = 0; n < N; ++n) A[n] = Complex(unif(rng), unif(rng));
        double theta = M_PI * unif(rng);
        Eigen::VectorXcd rotated(N);
        for (int n = 0; n < N; ++n)
            rotated[n] = A[n] * std::exp(Complex(0.0, carriers[n].j * theta));
        for (int j : js) {
            Eigen::VectorXcd lhs = fourier_coefficient_quadrature(f, carriers, rotated, j);
            Eigen::VectorXcd rhs =
                std::exp(Complex(0.0, j * theta)) * fourier_coefficient_quadrature(f, carriers, A, j);
            worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

double check_conjugation(const PolynomialNonlinearity& f, const std::vector<Carrier>& carriers,
                         const std::vector<int>& js, int n_samples, unsigned seed) {
    const int twoN = static_cast<int>(carriers.size());
    if (twoN % 2 != 0) throw ValidationError("conjugation check needs carriers in +/- pairs");
    const int N = twoN / 2;
    for (int i = 0; i < N; ++i)
        if (carriers[N + i].j != -carriers[i].j)
            throw ValidationError("carriers are not ordered as (j_1..j_N, -j_1..-j_N)");

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double worst = 0.0;
    for (int j : js) {
        ReducedPolynomial cj = fourier_coefficient_exact(f, carriers, j);
        ReducedPolynomial cmj = fourier_coefficient_exact(f, carriers, -j);
        for (int s = 0; s < n_samples; ++s) {
            Eigen::VectorXcd A(twoN), swapped(twoN);
            for (int n = 0; n < twoN; ++n) A[n] = Complex(unif(rng), unif(rng));
            swapped.head(N) = A.tail(N);
            swapped.tail(N) = A.head(N);
            worst = std::max(worst, (cj.eval(A) - cmj.eval(swapped)).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

AmplitudeSystem build_amplitude_system(const CriticalStructure& cs,
                                       const PolynomialNonlinearity& f, bool symmetric) {
    if (cs.modes.empty()) throw ValidationError("critical structure has no modes");
    if (symmetric && !cs.symmetric_pairing)
        throw PreconditionFailure("symmetric reduction requested without conjugate pairing");

    std::vector<Carrier> carriers;
    for (const auto& mode : cs.modes) carriers.push_back({mode.j, mode.w});

    AmplitudeSystem sys;
    sys.symmetric = symmetric;
    sys.omega = cs.omega;
    sys.k = cs.k;
    sys.D = cs.D;
    sys.M = cs.M;

    const int total = static_cast<int>(cs.modes.size());
    const int keep = symmetric ? total / 2 : total;
    sys.n_comps = keep;
    for (int n = 0; n < keep; ++n) {
        const CriticalMode& mode = cs.modes[n];
        ReducedPolynomial Cj = fourier_coefficient_exact(f, carriers, mode.j);
        ReducedPolynomial Rn = project_mode(Cj, mode.l);
        if (symmetric) {
            Rn = symmetric_reduce(Rn, keep);
            if (Rn.max_imag_coeff() > 1e-12)
                throw ValidationError("symmetric reduction produced non-real coefficients");
        }
        sys.j.push_back(mode.j);
        sys.Q.push_back(mode.Q);
        sys.R.push_back(std::move(Rn));
        sys.w.push_back(mode.w);
        sys.l.push_back(mode.l);
    }
    return sys;
}

} // namespace ampl
