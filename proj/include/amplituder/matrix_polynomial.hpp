#ifndef AMPLITUDER_MATRIX_POLYNOMIAL_HPP
#define AMPLITUDER_MATRIX_POLYNOMIAL_HPP

#include <complex>
#include <map>

#include <Eigen/Dense>

#include "amplituder/multi_index.hpp"

namespace ampl {

using Complex = std::complex<double>;

/// Matrix valued polynomial P(x) = sum_alpha a_alpha x^alpha with m x m complex
/// coefficient matrices over d commuting variables.  The coefficient map is kept
/// canonical: exactly-zero matrices are never stored.
class MatrixPolynomial {
public:
    using CoeffMap = std::map<MultiIndex, Eigen::MatrixXcd, GradedLexLess>;

    MatrixPolynomial(int dim, int size) : dim_(dim), size_(size) {
        if (dim < 1) throw ValidationError("symbol needs at least one variable");
        if (size < 1) throw ValidationError("symbol matrix size must be >= 1");
    }

    int dim() const { return dim_; }
    int size() const { return size_; }
    const CoeffMap& coeffs() const { return coeffs_; }
    bool empty() const { return coeffs_.empty(); }

    /// Highest total order with a nonzero coefficient (zero polynomial: 0).
    int degree() const { return coeffs_.empty() ? 0 : coeffs_.rbegin()->first.order(); }

    /// Accumulate a term; removes the entry again if it cancels to exactly zero.
    void add_term(const MultiIndex& alpha, const Eigen::MatrixXcd& a);
    void add_scalar_term(const MultiIndex& alpha, Complex a);

    Eigen::MatrixXcd coeff(const MultiIndex& alpha) const;

    /// P evaluated at a complex point z in C^d.
    Eigen::MatrixXcd eval_at(const Eigen::VectorXcd& z) const;

    /// The symbol P(i xi) at a real frequency xi.
    Eigen::MatrixXcd eval_symbol(const Eigen::VectorXd& xi) const;

    /// Exact formal derivative d^alpha P / dx^alpha.
    MatrixPolynomial differentiate(const MultiIndex& alpha) const;

    /// True iff every stored coefficient matrix is real.
    bool conjugation_symmetric(double tol = 0.0) const;

    MatrixPolynomial operator+(const MatrixPolynomial& o) const;
    MatrixPolynomial operator*(Complex s) const;

    bool operator==(const MatrixPolynomial& o) const {
        if (dim_ != o.dim_ || size_ != o.size_ || coeffs_.size() != o.coeffs_.size()) return false;
        auto it = coeffs_.begin(), jt = o.coeffs_.begin();
        for (; it != coeffs_.end(); ++it, ++jt)
            if (!(it->first == jt->first) || it->second != jt->second) return false;
        return true;
    }

    /// Largest absolute difference between coefficient matrices (union of supports).
    double coeff_distance(const MatrixPolynomial& o) const;

private:
    int dim_;
    int size_;
    CoeffMap coeffs_;
};

/// Convenience: scalar (1x1) polynomial in `dim` variables from exponent/coefficient pairs.
MatrixPolynomial scalar_polynomial(int dim, const std::vector<std::pair<MultiIndex, Complex>>& terms);

} // namespace ampl

#endif
