#ifndef AMPLITUDER_REDUCTION_HPP
#define AMPLITUDER_REDUCTION_HPP

#include <map>
#include <vector>

#include <Eigen/Dense>

#include "amplituder/dispersion.hpp"
#include "amplituder/nonlinearity.hpp"

namespace ampl {

/// One resonant carrier e^{i j theta} with its mode vector.
struct Carrier {
    int j = 0;
    Eigen::VectorXcd w;
};

/// Polynomial map C^{n_vars} -> C^{dim} in the amplitude variables.
struct ReducedPolynomial {
    using TermMap = std::map<MultiIndex, Eigen::VectorXcd, GradedLexLess>;

    int n_vars = 0;
    int dim = 1;        // value dimension: m for raw coefficients, 1 after projection
    TermMap terms;

    ReducedPolynomial(int n_vars_, int dim_) : n_vars(n_vars_), dim(dim_) {}

    void add_term(const MultiIndex& exps, const Eigen::VectorXcd& coeff);
    Eigen::VectorXcd coeff(const MultiIndex& exps) const;
    Eigen::VectorXcd eval(const Eigen::VectorXcd& A) const;
    /// Termwise partial derivative with respect to variable `var`.
    ReducedPolynomial partial(int var) const;
    int degree() const { return terms.empty() ? 0 : terms.rbegin()->first.order(); }
    bool is_zero() const { return terms.empty(); }
    double max_imag_coeff() const;
};

/// Exact Fourier coefficient of f(sum_n A_n e^{i j_n theta} w_n) on e^{i j theta}:
/// the monomial A^p rides on frequency sum_n p_n j_n, so the coefficient is a
/// polynomial in A collected by that frequency.
ReducedPolynomial fourier_coefficient_exact(const PolynomialNonlinearity& f,
                                            const std::vector<Carrier>& carriers, int j);

/// Same coefficient at a single point A by equispaced trapezoid quadrature in
/// theta (exact for trigonometric polynomials at the default node count).
Eigen::VectorXcd fourier_coefficient_quadrature(const PolynomialNonlinearity& f,
                                                const std::vector<Carrier>& carriers,
                                                const Eigen::VectorXcd& A, int j,
                                                int quad_points = 0);

/// Scalar projection l . C_j (unconjugated); identity for dim = 1.
ReducedPolynomial project_mode(const ReducedPolynomial& Cj, const Eigen::VectorXcd& l);

/// Substitute A_{N+i} := A_i, folding a 2N-variable polynomial onto the
/// conjugate-symmetric set.
ReducedPolynomial symmetric_reduce(const ReducedPolynomial& Rn, int N);

/// Max over random samples of |C_j(e^{i j_n th} A_n) - e^{i j th} C_j(A)|,
/// with both sides evaluated through the quadrature route.
double check_equivariance(const PolynomialNonlinearity& f, const std::vector<Carrier>& carriers,
                          const std::vector<int>& js, int n_samples = 100, unsigned seed = 7);

/// Max defect of C_j(A_plus, A_minus) = C_{-j}(A_minus, A_plus) over random A,
/// for a carrier family ordered as (j_1..j_N, -j_1..-j_N).
double check_conjugation(const PolynomialNonlinearity& f, const std::vector<Carrier>& carriers,
                         const std::vector<int>& js, int n_samples = 100, unsigned seed = 11);

/// The reduced evolution A_n' = Q_n A_n + eps R_n(A).
struct AmplitudeSystem {
    int n_comps = 0;            // N in symmetric mode, 2N in general mode
    bool symmetric = false;
    double omega = 0.0;
    Eigen::VectorXd k;
    int D = 1;
    int M = 1;
    std::vector<int> j;                        // carrier integer per component
    std::vector<MatrixPolynomial> Q;           // scalar symbols in D variables
    std::vector<ReducedPolynomial> R;          // scalar-valued, n_vars = n_comps
    std::vector<Eigen::VectorXcd> w, l;

    double eta(double eps) const { return std::pow(eps, 1.0 / static_cast<double>(M)); }
};

/// Assemble the amplitude system from the critical structure: general mode
/// keeps all carriers as separate components, symmetric mode folds conjugate
/// pairs (requires the pairing detected by the dispersion analysis).
AmplitudeSystem build_amplitude_system(const CriticalStructure& cs,
                                       const PolynomialNonlinearity& f, bool symmetric);

} // namespace ampl

#endif
