#ifndef AMPLITUDER_NONLINEARITY_HPP
#define AMPLITUDER_NONLINEARITY_HPP

#include <map>
#include <vector>

#include <Eigen/Dense>

#include "amplituder/multi_index.hpp"
#include "amplituder/matrix_polynomial.hpp"

namespace ampl {

/// Polynomial map f : C^m -> C^m, stored as exponent vector -> coefficient
/// vector.  Problem files only admit real coefficients; complex ones can be
/// built programmatically (conjugation_symmetric then reports false).
class PolynomialNonlinearity {
public:
    using TermMap = std::map<MultiIndex, Eigen::VectorXcd, GradedLexLess>;

    explicit PolynomialNonlinearity(int m) : m_(m) {
        if (m < 1) throw ValidationError("nonlinearity needs m >= 1 components");
    }

    int components() const { return m_; }
    const TermMap& terms() const { return terms_; }
    int degree() const { return terms_.empty() ? 0 : terms_.rbegin()->first.order(); }

    void add_term(const MultiIndex& expo, const Eigen::VectorXcd& coeff);
    /// Adds `coeff * u^expo` to component `comp`.
    void add_term(const MultiIndex& expo, int comp, Complex coeff);

    Eigen::VectorXcd eval(const Eigen::VectorXcd& u) const;

    /// True iff all stored coefficients are exactly real.
    bool conjugation_symmetric() const;

private:
    int m_;
    TermMap terms_;
};

} // namespace ampl

#endif
