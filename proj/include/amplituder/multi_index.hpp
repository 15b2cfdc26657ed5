#ifndef AMPLITUDER_MULTI_INDEX_HPP
#define AMPLITUDER_MULTI_INDEX_HPP

#include <numeric>
#include <string>
#include <vector>

#include "amplituder/errors.hpp"

namespace ampl {

/// Exponent vector alpha = (a_1, ..., a_d) of a monomial x^alpha.
struct MultiIndex {
    std::vector<int> exp;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> e) : exp(std::move(e)) {
        for (int a : exp)
            if (a < 0) throw ValidationError("multi-index entries must be >= 0");
    }
    static MultiIndex zero(int dim) { return MultiIndex(std::vector<int>(dim, 0)); }
    static MultiIndex unit(int dim, int axis, int power = 1) {
        std::vector<int> e(dim, 0);
        e.at(axis) = power;
        return MultiIndex(std::move(e));
    }

    int dim() const { return static_cast<int>(exp.size()); }
    int order() const { return std::accumulate(exp.begin(), exp.end(), 0); }
    int operator[](int i) const { return exp[i]; }

    MultiIndex operator+(const MultiIndex& o) const {
        if (dim() != o.dim()) throw DimensionMismatch("multi-index dimension mismatch");
        std::vector<int> e(exp);
        for (int i = 0; i < dim(); ++i) e[i] += o.exp[i];
        return MultiIndex(std::move(e));
    }

    bool operator==(const MultiIndex& o) const { return exp == o.exp; }

    std::string str() const {
        std::string s = "(";
        for (int i = 0; i < dim(); ++i) s += (i ? "," : "") + std::to_string(exp[i]);
        return s + ")";
    }
};

/// Graded lexicographic order: lower total degree first, then lexicographic.
struct GradedLexLess {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const {
        if (a.order() != b.order()) return a.order() < b.order();
        return a.exp < b.exp;
    }
};

/// All multi-indices of the given dimension with total order exactly `order`,
/// listed in graded-lex order.
std::vector<MultiIndex> multi_indices_of_order(int dim, int order);

/// Falling factorial n (n-1) ... (n-k+1).
inline double falling_factorial(int n, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= static_cast<double>(n - i);
    return r;
}

inline double factorial(int n) { return falling_factorial(n, n); }

/// beta! = prod_i beta_i!
inline double multi_factorial(const MultiIndex& beta) {
    double r = 1.0;
    for (int b : beta.exp) r *= factorial(b);
    return r;
}

} // namespace ampl

#endif
