#include "amplituder/matrix_polynomial.hpp"

namespace ampl {

namespace {

bool exactly_zero(const Eigen::MatrixXcd& a) {
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (a(i, j) != Complex(0.0, 0.0)) return false;
    return true;
}

} // namespace

void MatrixPolynomial::add_term(const MultiIndex& alpha, const Eigen::MatrixXcd& a) {
    if (alpha.dim() != dim_) throw DimensionMismatch("term multi-index has wrong dimension");
    if (a.rows() != size_ || a.cols() != size_)
        throw DimensionMismatch("coefficient matrix has wrong size");
    auto it = coeffs_.find(alpha);
    if (it == coeffs_.end()) {
        if (!exactly_zero(a)) coeffs_.emplace(alpha, a);
        return;
    }
    it->second += a;
    if (exactly_zero(it->second)) coeffs_.erase(it);
}

void MatrixPolynomial::add_scalar_term(const MultiIndex& alpha, Complex a) {
    Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(size_, size_);
    mat(0, 0) = a;
    add_term(alpha, mat);
}

Eigen::MatrixXcd MatrixPolynomial::coeff(const MultiIndex& alpha) const {
    auto it = coeffs_.find(alpha);
    if (it != coeffs_.end()) return it->second;
    return Eigen::MatrixXcd::Zero(size_, size_);
}

Eigen::MatrixXcd MatrixPolynomial::eval_at(const Eigen::VectorXcd& z) const {
    if (z.size() != dim_) throw DimensionMismatch("evaluation point has wrong dimension");
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(size_, size_);
    for (const auto& [alpha, a] : coeffs_) {
        Complex mono(1.0, 0.0);
        for (int i = 0; i < dim_; ++i)
            for (int p = 0; p < alpha[i]; ++p) mono *= z[i];
        acc += mono * a;
    }
    return acc;
}

Eigen::MatrixXcd MatrixPolynomial::eval_symbol(const Eigen::VectorXd& xi) const {
    if (xi.size() != dim_) throw DimensionMismatch("frequency has wrong dimension");
    Eigen::VectorXcd z(dim_);
    for (int i = 0; i < dim_; ++i) z[i] = Complex(0.0, xi[i]);
    return eval_at(z);
}

MatrixPolynomial MatrixPolynomial::differentiate(const MultiIndex& alpha) const {
    if (alpha.dim() != dim_) throw DimensionMismatch("derivative multi-index has wrong dimension");
    MatrixPolynomial out(dim_, size_);
    for (const auto& [gamma, a] : coeffs_) {
        // d^alpha x^gamma = falling(gamma, alpha) x^(gamma - alpha), zero if any gamma_i < alpha_i.
        bool ok = true;
        double factor = 1.0;
        std::vector<int> beta(dim_);
        for (int i = 0; i < dim_; ++i) {
            if (gamma[i] < alpha[i]) { ok = false; break; }
            beta[i] = gamma[i] - alpha[i];
            factor *= falling_factorial(gamma[i], alpha[i]);
        }
        if (!ok) continue;
        out.add_term(MultiIndex(beta), factor * a);
    }
    return out;
}

bool MatrixPolynomial::conjugation_symmetric(double tol) const {
    for (const auto& [alpha, a] : coeffs_)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index i = 0; i < a.rows(); ++i)
                if (std::abs(a(i, j).imag()) > tol) return false;
    return true;
}

MatrixPolynomial MatrixPolynomial::operator+(const MatrixPolynomial& o) const {
    if (dim_ != o.dim_ || size_ != o.size_)
        throw DimensionMismatch("polynomial shape mismatch in +");
    MatrixPolynomial out(*this);
    for (const auto& [alpha, a] : o.coeffs_) out.add_term(alpha, a);
    return out;
}

MatrixPolynomial MatrixPolynomial::operator*(Complex s) const {
    MatrixPolynomial out(dim_, size_);
    if (s == Complex(0.0, 0.0)) return out;
    for (const auto& [alpha, a] : coeffs_) out.add_term(alpha, s * a);
    return out;
}

double MatrixPolynomial::coeff_distance(const MatrixPolynomial& o) const {
    if (dim_ != o.dim_ || size_ != o.size_)
        throw DimensionMismatch("polynomial shape mismatch in coeff_distance");
    double dist = 0.0;
    for (const auto& [alpha, a] : coeffs_)
        dist = std::max(dist, (a - o.coeff(alpha)).cwiseAbs().maxCoeff());
    for (const auto& [alpha, a] : o.coeffs_)
        dist = std::max(dist, (a - coeff(alpha)).cwiseAbs().maxCoeff());
    return dist;
}

MatrixPolynomial scalar_polynomial(int dim, const std::vector<std::pair<MultiIndex, Complex>>& terms) {
    MatrixPolynomial p(dim, 1);
    for (const auto& [alpha, c] : terms) p.add_scalar_term(alpha, c);
    return p;
}

} // namespace ampl
