#include "amplituder/nonlinearity.hpp"

namespace ampl {

void PolynomialNonlinearity::add_term(const MultiIndex& expo, const Eigen::VectorXcd& coeff) {
    if (expo.dim() != m_) throw DimensionMismatch("exponent vector has wrong length");
    if (coeff.size() != m_) throw DimensionMismatch("coefficient vector has wrong length");
    auto it = terms_.find(expo);
    if (it == terms_.end()) {
        if (!coeff.isZero(0.0)) terms_.emplace(expo, coeff);
        return;
    }
    it->second += coeff;
    if (it->second.isZero(0.0)) terms_.erase(it);
}

void PolynomialNonlinearity::add_term(const MultiIndex& expo, int comp, Complex coeff) {
    if (comp < 0 || comp >= m_) throw ValidationError("component index out of range");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(m_);
    v[comp] = coeff;
    add_term(expo, v);
}

Eigen::VectorXcd PolynomialNonlinearity::eval(const Eigen::VectorXcd& u) const {
    if (u.size() != m_) throw DimensionMismatch("state vector has wrong length");
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(m_);
    for (const auto& [expo, coeff] : terms_) {
        Complex mono(1.0, 0.0);
        for (int i = 0; i < m_; ++i)
            for (int p = 0; p < expo[i]; ++p) mono *= u[i];
        acc += mono * coeff;
    }
    return acc;
}

bool PolynomialNonlinearity::conjugation_symmetric() const {
    for (const auto& [expo, coeff] : terms_)
        for (int i = 0; i < m_; ++i)
            if (coeff[i].imag() != 0.0) return false;
    return true;
}

} // namespace ampl
