#include "amplituder/dispersion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace ampl {

namespace {

std::string point_str(const Eigen::VectorXd& xi) {
    std::ostringstream os;
    os << "(";
    for (Eigen::Index i = 0; i < xi.size(); ++i) os << (i ? "," : "") << xi[i];
    os << ")";
    return os.str();
}

struct EigenData {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;   // empty unless requested
    double condition = 1.0;
};

EigenData eigen_decompose(const Eigen::MatrixXcd& A, bool with_vectors) {
    EigenData out;
    const int m = static_cast<int>(A.rows());
    if (m == 1) {
        out.values = Eigen::VectorXcd::Constant(1, A(0, 0));
        if (with_vectors) out.vectors = Eigen::MatrixXcd::Identity(1, 1);
        return out;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(A, with_vectors);
    if (solver.info() != Eigen::Success)
        throw NonDiagonalizable("eigenvalue iteration failed to converge");
    out.values = solver.eigenvalues();
    if (with_vectors) {
        out.vectors = solver.eigenvectors();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(out.vectors);
        double smin = svd.singularValues().minCoeff();
        double smax = svd.singularValues().maxCoeff();
        out.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    }
    return out;
}

// Best and second-best assignment cost of new eigenvalues onto previous
// branch values, enumerating permutations (m is small).
struct Matching {
    std::vector<int> perm;
    double best = 0.0;
    double second = std::numeric_limits<double>::infinity();
};

Matching match_eigenvalues(const std::vector<Complex>& prev, const Eigen::VectorXcd& next) {
    const int m = static_cast<int>(prev.size());
    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    Matching out;
    out.perm = idx;
    out.best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int i = 0; i < m; ++i) total += std::abs(next[idx[i]] - prev[i]);
        if (total < out.best) {
            out.second = out.best;
            out.best = total;
            out.perm = idx;
        } else if (total < out.second) {
            out.second = total;
        }
    } while (std::next_permutation(idx.begin(), idx.end()));
    return out;
}

} // namespace

std::vector<std::vector<double>> fornberg_weights(double x0, const std::vector<double>& nodes,
                                                  int max_order) {
    const int n = static_cast<int>(nodes.size());
    if (n < max_order + 1)
        throw ValidationError("fornberg_weights: need at least order+1 nodes");
    // Fornberg's recursion; c[i][k] is the weight of node i for derivative k.
    std::vector<std::vector<double>> c(n, std::vector<double>(max_order + 1, 0.0));
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        int mn = std::min(i, max_order);
        double c2 = 1.0;
        double c5 = c4;
        c4 = nodes[i] - x0;
        for (int j = 0; j < i; ++j) {
            double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<std::vector<double>> weights(max_order + 1, std::vector<double>(n, 0.0));
    for (int k = 0; k <= max_order; ++k)
        for (int i = 0; i < n; ++i) weights[k][i] = c[i][k];
    return weights;
}

std::vector<Eigen::VectorXd> serpentine_grid(int dim, double xi_max, int points_per_axis) {
    if (dim < 1 || points_per_axis < 2) throw ValidationError("bad stability grid shape");
    std::vector<double> axis(points_per_axis);
    for (int i = 0; i < points_per_axis; ++i)
        axis[i] = -xi_max + 2.0 * xi_max * i / (points_per_axis - 1);

    std::vector<Eigen::VectorXd> path;
    path.reserve(static_cast<size_t>(std::pow(points_per_axis, dim)));
    std::vector<int> idx(dim, 0);
    std::vector<int> dir(dim, 1);   // sweep direction of each axis
    Eigen::VectorXd pt(dim);
    while (true) {
        for (int a = 0; a < dim; ++a) pt[a] = axis[idx[a]];
        path.push_back(pt);
        // advance axis 0, carrying into higher axes and flipping sweep direction
        int a = 0;
        while (a < dim) {
            idx[a] += dir[a];
            if (idx[a] >= 0 && idx[a] < points_per_axis) break;
            dir[a] = -dir[a];
            idx[a] += dir[a];
            ++a;
        }
        if (a == dim) break;
    }
    return path;
}

BranchSet track_branches(const MatrixPolynomial& P, const std::vector<Eigen::VectorXd>& path,
                         double cond_max) {
    if (path.empty()) throw ValidationError("track_branches: empty path");
    const int m = P.size();
    BranchSet out;
    out.path = path;
    out.branches.resize(m);
    for (int b = 0; b < m; ++b) {
        out.branches[b].branch_id = b + 1;
        out.branches[b].values.reserve(path.size());
        out.branches[b].max_re = -std::numeric_limits<double>::infinity();
    }

    std::vector<Complex> prev(m);
    for (size_t p = 0; p < path.size(); ++p) {
        EigenData ed = eigen_decompose(P.eval_symbol(path[p]), m > 1);
        out.max_condition = std::max(out.max_condition, ed.condition);
        if (ed.condition > cond_max)
            throw NonDiagonalizable("eigenvector condition " + std::to_string(ed.condition) +
                                    " exceeds limit at xi = " + point_str(path[p]));
        std::vector<Complex> cur(m);
        if (p == 0 || m == 1) {
            for (int i = 0; i < m; ++i) cur[i] = ed.values[i];
            if (p == 0 && m > 1) {
                // deterministic start: sort by (Re desc, Im desc)
                std::sort(cur.begin(), cur.end(), [](Complex a, Complex b) {
                    if (a.real() != b.real()) return a.real() > b.real();
                    return a.imag() > b.imag();
                });
            }
        } else {
            Matching match = match_eigenvalues(prev, ed.values);
            double scale = 1.0;
            for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(ed.values[i]));
            if (match.second - match.best < 1e-9 * scale) ++out.ambiguity_count;
            for (int i = 0; i < m; ++i) cur[i] = ed.values[match.perm[i]];
        }
        for (int i = 0; i < m; ++i) {
            out.branches[i].values.push_back(cur[i]);
            out.branches[i].max_re = std::max(out.branches[i].max_re, cur[i].real());
        }
        prev = cur;
    }

    std::stable_sort(out.branches.begin(), out.branches.end(),
                     [](const EigenBranch& a, const EigenBranch& b) { return a.max_re > b.max_re; });
    for (int b = 0; b < m; ++b) out.branches[b].branch_id = b + 1;
    return out;
}

StabilityCheck check_stability(const BranchSet& bs, double tol_crit, double margin) {
    if (bs.branches.empty()) throw ValidationError("check_stability: no branches");
    StabilityCheck out;
    for (const EigenBranch& b : bs.branches) out.per_branch_max_re.push_back(b.max_re);

    // the top branch is critical by definition; the second joins it only as
    // the conjugate partner of an oscillatory pair
    out.critical_branches = 1;
    if (bs.branches.size() >= 2 && bs.branches[1].max_re > -margin) {
        out.critical_branches = 2;
        const auto& b0 = bs.branches[0].values;
        const auto& b1 = bs.branches[1].values;
        double mismatch = 0.0, scale = 1.0;
        for (size_t i = 0; i < b0.size(); ++i) {
            mismatch = std::max(mismatch, std::abs(b0[i] - std::conj(b1[i])));
            scale = std::max(scale, std::abs(b0[i]));
        }
        out.conjugate_pair = mismatch < 1e-6 * scale;
    }

    out.max_re_critical = -std::numeric_limits<double>::infinity();
    out.max_re_rest = -std::numeric_limits<double>::infinity();
    for (size_t b = 0; b < bs.branches.size(); ++b) {
        if (static_cast<int>(b) < out.critical_branches)
            out.max_re_critical = std::max(out.max_re_critical, bs.branches[b].max_re);
        else
            out.max_re_rest = std::max(out.max_re_rest, bs.branches[b].max_re);
    }

    bool count_ok = out.critical_branches == 1 || out.conjugate_pair;
    bool rest_ok = bs.branches.size() == static_cast<size_t>(out.critical_branches) ||
                   out.max_re_rest <= -margin;
    out.pass = count_ok && out.max_re_critical <= tol_crit && rest_ok;
    return out;
}

EllipticityResult check_ellipticity(const MatrixPolynomial& P, double c1, int n_radii,
                                    int n_directions) {
    if (c1 <= 0.0) throw ValidationError("ellipticity shell radius c1 must be positive");
    const int d = P.dim();

    std::vector<Eigen::VectorXd> dirs;
    if (d == 1) {
        Eigen::VectorXd e(1);
        e[0] = 1.0;
        dirs.push_back(e);
        e[0] = -1.0;
        dirs.push_back(e);
    } else if (d == 2) {
        for (int i = 0; i < n_directions; ++i) {
            double th = 2.0 * M_PI * i / n_directions;
            Eigen::VectorXd e(2);
            e << std::cos(th), std::sin(th);
            dirs.push_back(e);
        }
    } else {
        // deterministic spread: golden-angle spiral in the first two coords,
        // cycling the remaining axes through a cosine ladder
        for (int i = 0; i < n_directions; ++i) {
            Eigen::VectorXd e(d);
            double z = -1.0 + 2.0 * (i + 0.5) / n_directions;
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            double th = 2.39996322972865332 * i;
            e.setZero();
            e[0] = r * std::cos(th);
            e[1] = r * std::sin(th);
            e[2 % d] = z;
            if (d > 2) e[2] = z;
            double nrm = e.norm();
            if (nrm > 0) dirs.push_back(e / nrm);
        }
        for (int a = 0; a < d; ++a) dirs.push_back(Eigen::VectorXd::Unit(d, a));
    }

    EllipticityResult out;
    out.c1 = c1;
    out.worst_ratio = std::numeric_limits<double>::infinity();
    for (int ri = 0; ri < n_radii; ++ri) {
        double r = c1 + (4.0 * c1 - c1) * ri / (n_radii - 1);
        for (const auto& e : dirs) {
            Eigen::VectorXd xi = r * e;
            EigenData ed = eigen_decompose(P.eval_symbol(xi), false);
            double max_re = ed.values.real().maxCoeff();
            double ratio = -max_re / (r * r);
            if (ratio < out.worst_ratio) {
                out.worst_ratio = ratio;
                out.witness = xi;
            }
        }
    }
    out.c2 = out.worst_ratio;
    out.pass = out.worst_ratio > 0.0;
    if (!out.pass)
        throw EllipticityFailure("no positive ellipticity constant on shell [" +
                                 std::to_string(c1) + ", " + std::to_string(4 * c1) +
                                 "]; worst sample xi = " + point_str(out.witness) +
                                 " has -Re lambda/|xi|^2 = " + std::to_string(out.worst_ratio));
    return out;
}

std::vector<int> find_critical_set(const MatrixPolynomial& P, const Eigen::VectorXd& k,
                                   double omega, int j_max, double tol_crit) {
    if (k.size() != P.dim()) throw DimensionMismatch("carrier k has wrong dimension");
    std::vector<int> pos, neg;
    for (int j = 1; j <= j_max; ++j) {
        for (int sign : {+1, -1}) {
            int jj = sign * j;
            Eigen::VectorXd xi = jj * k;
            EigenData ed = eigen_decompose(P.eval_symbol(xi), false);
            Complex target(0.0, jj * omega);
            double dist = std::numeric_limits<double>::infinity();
            for (int i = 0; i < ed.values.size(); ++i)
                dist = std::min(dist, std::abs(ed.values[i] - target));
            if (dist <= tol_crit) (sign > 0 ? pos : neg).push_back(jj);
        }
    }
    if (pos.empty() && neg.empty())
        throw EmptyCriticalSet("no carrier integer j with |j| <= " + std::to_string(j_max) +
                               " has an eigenvalue matching i j omega");
    std::vector<int> out = pos;
    out.insert(out.end(), neg.begin(), neg.end());
    return out;
}

SpectralProjection spectral_projection(const MatrixPolynomial& P, int j,
                                       const Eigen::VectorXd& k, double omega,
                                       double eig_sep_tol) {
    const int m = P.size();
    Eigen::VectorXd xi = j * k;
    Eigen::MatrixXcd A = P.eval_symbol(xi);
    Complex target(0.0, j * omega);

    SpectralProjection out;
    if (m == 1) {
        out.lambda = A(0, 0);
        out.w = Eigen::VectorXcd::Constant(1, 1.0);
        out.l = Eigen::VectorXcd::Constant(1, 1.0);
        out.separation = std::numeric_limits<double>::infinity();
        return out;
    }

    EigenData ed = eigen_decompose(A, true);
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
        double dist = std::abs(ed.values[i] - target);
        if (dist < best_dist) {
            best_dist = dist;
            best = i;
        }
    }
    out.lambda = ed.values[best];
    out.separation = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i)
        if (i != best) out.separation = std::min(out.separation, std::abs(ed.values[i] - out.lambda));
    if (out.separation < eig_sep_tol)
        throw DegenerateEigenvalue("eigenvalue separation " + std::to_string(out.separation) +
                                   " below tolerance at j = " + std::to_string(j));

    Eigen::MatrixXcd Vinv = ed.vectors.inverse();
    Eigen::VectorXcd w_raw = ed.vectors.col(best);
    Eigen::VectorXcd l_raw = Vinv.row(best).transpose();

    double wmax = w_raw.cwiseAbs().maxCoeff();
    int lead = -1;
    for (int i = 0; i < m; ++i)
        if (std::abs(w_raw[i]) > 1e-12 * wmax) { lead = i; break; }
    if (lead < 0) throw SolverError("degenerate right eigenvector");
    Complex c = w_raw[lead];
    out.w = w_raw / c;
    out.l = l_raw * c;

    double res = (A * out.w - out.lambda * out.w).cwiseAbs().maxCoeff();
    double lres = (out.l.transpose() * A - out.lambda * out.l.transpose()).cwiseAbs().maxCoeff();
    double scale = 1.0 + A.cwiseAbs().maxCoeff();
    if (res > 1e-8 * scale || lres > 1e-8 * scale)
        throw SolverError("eigenvector residual too large at j = " + std::to_string(j));
    return out;
}

namespace {

// Stencil half-width used for an order-p derivative.
int stencil_halfwidth(int p) { return std::max(3, p / 2 + 2); }

// Eigenvalue branch sampled on a D-dimensional lattice of frequencies around
// `center` with spacing `fine_h`, continued outward from the eigenvalue
// nearest `ref` at the center.
struct BranchLattice {
    int D = 1;
    int half = 0;
    std::vector<Complex> values;
    double scale = 1.0;

    size_t index(const std::vector<int>& off) const {
        size_t idx = 0;
        for (int a = 0; a < D; ++a) idx = idx * (2 * half + 1) + static_cast<size_t>(off[a] + half);
        return idx;
    }
    Complex at(const std::vector<int>& off) const { return values[index(off)]; }
};

BranchLattice sample_branch_lattice(const MatrixPolynomial& P, const Eigen::VectorXd& center,
                                    Complex ref, int D, int half, double fine_h,
                                    double eig_sep_tol, const std::vector<int>& axes) {
    BranchLattice lat;
    lat.D = D;
    lat.half = half;
    const size_t n_axis = static_cast<size_t>(2 * half + 1);
    size_t total = 1;
    for (int a = 0; a < D; ++a) total *= n_axis;
    lat.values.assign(total, Complex(0.0, 0.0));
    std::vector<char> known(total, 0);

    // offsets ordered by L1 norm so each point has a previously-visited
    // neighbour one step closer to the center
    std::vector<std::vector<int>> offsets;
    std::vector<int> cur(D, -half);
    while (true) {
        offsets.push_back(cur);
        int a = 0;
        for (; a < D; ++a) {
            if (cur[a] < half) { ++cur[a]; break; }
            cur[a] = -half;
        }
        if (a == D) break;
    }
    std::sort(offsets.begin(), offsets.end(), [](const std::vector<int>& x, const std::vector<int>& y) {
        int nx = 0, ny = 0;
        for (int v : x) nx += std::abs(v);
        for (int v : y) ny += std::abs(v);
        if (nx != ny) return nx < ny;
        return x < y;
    });

    const int m = P.size();
    for (const auto& off : offsets) {
        Eigen::VectorXd xi = center;
        for (int a = 0; a < D; ++a) xi[axes[a]] += fine_h * off[a];

        Complex prev = ref;
        bool has_parent = false;
        for (int a = 0; a < D && !has_parent; ++a) {
            if (off[a] == 0) continue;
            std::vector<int> parent = off;
            parent[a] -= (off[a] > 0 ? 1 : -1);
            prev = lat.at(parent);
            has_parent = known[lat.index(parent)] != 0;
        }
        if (!has_parent) prev = ref;

        Complex chosen;
        if (m == 1) {
            chosen = P.eval_symbol(xi)(0, 0);
        } else {
            EigenData ed = eigen_decompose(P.eval_symbol(xi), false);
            int best = 0, second = -1;
            double bd = std::numeric_limits<double>::infinity(), sd = bd;
            for (int i = 0; i < m; ++i) {
                double dist = std::abs(ed.values[i] - prev);
                if (dist < bd) {
                    sd = bd;
                    second = best;
                    bd = dist;
                    best = i;
                } else if (dist < sd) {
                    sd = dist;
                    second = i;
                }
            }
            if (second >= 0 && std::abs(ed.values[best] - ed.values[second]) < eig_sep_tol)
                throw BranchTrackingFailure("eigenvalues collide within the derivative stencil at xi = " +
                                            point_str(xi));
            chosen = ed.values[best];
        }
        lat.values[lat.index(off)] = chosen;
        known[lat.index(off)] = 1;
        lat.scale = std::max(lat.scale, std::abs(chosen));
    }
    return lat;
}

struct FdEstimate {
    Complex value;       // Richardson-extrapolated derivative d^beta lambda
    double error = 0.0;  // roundoff + extrapolation disagreement estimate
};

// Tensor finite difference of the lattice for multi-index beta, one
// Richardson halving step between spacings h and h/2.
FdEstimate fd_derivative(const BranchLattice& lat, const MultiIndex& beta, double coarse_h) {
    const int D = lat.D;
    std::vector<std::vector<double>> axis_weights(D);
    std::vector<int> axis_half(D, 0);
    int q = std::numeric_limits<int>::max();
    for (int a = 0; a < D; ++a) {
        int p = beta[a];
        if (p == 0) {
            axis_weights[a] = {1.0};
            axis_half[a] = 0;
            continue;
        }
        int W = stencil_halfwidth(p);
        std::vector<double> nodes(2 * W + 1);
        for (int i = 0; i <= 2 * W; ++i) nodes[i] = static_cast<double>(i - W);
        axis_weights[a] = fornberg_weights(0.0, nodes, p)[p];
        axis_half[a] = W;
        int qa = 2 * W - p + 1;
        if (qa % 2) ++qa;
        q = std::min(q, qa);
    }
    if (q == std::numeric_limits<int>::max()) q = 2;

    auto apply = [&](int stride, double spacing, double* weight_mass) {
        Complex acc(0.0, 0.0);
        double mass = 0.0;
        std::vector<int> node(D, 0);
        std::vector<int> off(D, 0);
        // iterate the product of per-axis stencils
        for (int a = 0; a < D; ++a) node[a] = -axis_half[a];
        while (true) {
            double w = 1.0;
            for (int a = 0; a < D; ++a) {
                w *= axis_weights[a][node[a] + axis_half[a]];
                off[a] = node[a] * stride;
            }
            acc += w * lat.at(off);
            mass += std::abs(w);
            int a = 0;
            for (; a < D; ++a) {
                if (node[a] < axis_half[a]) { ++node[a]; break; }
                node[a] = -axis_half[a];
            }
            if (a == D) break;
        }
        double scale = 1.0;
        for (int a = 0; a < D; ++a)
            for (int p = 0; p < beta[a]; ++p) scale *= spacing;
        if (weight_mass) *weight_mass = mass / scale;
        return acc / scale;
    };

    double mass_fine = 0.0;
    Complex coarse = apply(2, coarse_h, nullptr);
    Complex fine = apply(1, coarse_h / 2.0, &mass_fine);

    double pow_q = std::pow(2.0, q);
    FdEstimate out;
    out.value = (pow_q * fine - coarse) / (pow_q - 1.0);
    double roundoff = mass_fine * 1e-15 * std::max(lat.scale, 1.0);
    out.error = std::abs(fine - coarse) / (pow_q - 1.0) + roundoff;
    return out;
}

Complex ipow_inverse(int M) {
    switch (((M % 4) + 4) % 4) {
        case 0: return Complex(1.0, 0.0);
        case 1: return Complex(0.0, -1.0);
        case 2: return Complex(-1.0, 0.0);
        default: return Complex(0.0, 1.0);
    }
}

MultiIndex embed(const MultiIndex& beta, int dim) {
    std::vector<int> e(dim, 0);
    for (int i = 0; i < beta.dim(); ++i) e[i] = beta[i];
    return MultiIndex(std::move(e));
}

} // namespace

DegeneracyResult degeneracy_order(const MatrixPolynomial& P, int j, const Eigen::VectorXd& k,
                                  double omega, const DegeneracyOptions& opts) {
    if (k.size() != P.dim()) throw DimensionMismatch("carrier k has wrong dimension");
    if (opts.D < 1 || opts.D > P.dim()) throw ValidationError("invalid slow-direction count D");

    const Eigen::VectorXd center = j * k;
    const Complex ref(0.0, j * omega);
    const int half = 2 * stencil_halfwidth(opts.max_order);
    std::vector<int> axes(opts.D);
    std::iota(axes.begin(), axes.end(), 0);

    BranchLattice lat = sample_branch_lattice(P, center, ref, opts.D, half, opts.h / 2.0,
                                              opts.eig_sep_tol, axes);

    DegeneracyResult fd;
    for (int p = 1; p <= opts.max_order && fd.M == 0; ++p) {
        bool significant = false;
        for (const MultiIndex& beta : multi_indices_of_order(opts.D, p)) {
            FdEstimate est = fd_derivative(lat, beta, opts.h);
            double bf = multi_factorial(beta);
            Complex T = est.value / bf;
            double err = est.error / bf;
            fd.taylor[beta] = T;
            fd.error_estimate[beta] = err;
            if (std::abs(T) > std::max(opts.tol_crit, opts.noise_safety * err)) significant = true;
        }
        if (significant) fd.M = p;
    }

    if (P.size() > 1) {
        if (fd.M == 0)
            throw OrderExceeded("no significant Taylor coefficient up to order " +
                                std::to_string(opts.max_order) + " at j = " + std::to_string(j));
        return fd;
    }

    // Scalar case: the branch is P(i xi) itself, so the coefficients follow
    // from formal derivatives; the finite differences must reproduce them.
    Eigen::VectorXcd z(P.dim());
    for (int i = 0; i < P.dim(); ++i) z[i] = Complex(0.0, center[i]);

    DegeneracyResult exact;
    exact.exact = true;
    for (int p = 1; p <= opts.max_order && exact.M == 0; ++p) {
        bool significant = false;
        for (const MultiIndex& beta : multi_indices_of_order(opts.D, p)) {
            Complex ip = std::pow(Complex(0.0, 1.0), p);
            Complex T = ip * P.differentiate(embed(beta, P.dim())).eval_at(z)(0, 0) /
                        multi_factorial(beta);
            exact.taylor[beta] = T;
            exact.error_estimate[beta] = 0.0;
            if (std::abs(T) > opts.tol_crit) significant = true;
        }
        if (significant) exact.M = p;
    }
    if (exact.M == 0)
        throw OrderExceeded("no nonzero Taylor coefficient up to order " +
                            std::to_string(opts.max_order) + " at j = " + std::to_string(j));

    for (const auto& [beta, T] : exact.taylor) {
        auto it = fd.taylor.find(beta);
        if (it == fd.taylor.end()) continue;
        double tol = 1e-8 * std::max(1.0, std::abs(T));
        if (std::abs(it->second - T) > tol)
            throw ValidationError("finite-difference Taylor coefficient at beta = " + beta.str() +
                                  " disagrees with the formal derivative by " +
                                  std::to_string(std::abs(it->second - T)));
    }
    if (fd.M != 0 && fd.M != exact.M)
        throw ValidationError("finite-difference degeneracy order " + std::to_string(fd.M) +
                              " disagrees with the formal-derivative order " +
                              std::to_string(exact.M));
    return exact;
}

std::array<Complex, 2> branch_derivatives_along_axis(const MatrixPolynomial& P, int j,
                                                     const Eigen::VectorXd& k, double omega,
                                                     int axis, const DegeneracyOptions& opts) {
    const Eigen::VectorXd center = j * k;
    const Complex ref(0.0, j * omega);
    const int half = 2 * stencil_halfwidth(2);
    BranchLattice lat = sample_branch_lattice(P, center, ref, 1, half, opts.h / 2.0,
                                              opts.eig_sep_tol, {axis});
    FdEstimate d1 = fd_derivative(lat, MultiIndex({1}), opts.h);
    FdEstimate d2 = fd_derivative(lat, MultiIndex({2}), opts.h);
    return {d1.value, d2.value / 2.0};
}

MatrixPolynomial build_Q(const TaylorMap& taylor, int M, int D) {
    MatrixPolynomial Q(D, 1);
    Complex scale = ipow_inverse(M);
    for (const auto& [beta, T] : taylor) {
        if (beta.order() != M) continue;
        Q.add_scalar_term(beta, scale * T);
    }
    if (Q.empty()) throw ValidationError("build_Q: no order-M Taylor coefficients");
    return Q;
}

AnalyzeResult analyze_dispersion(const MatrixPolynomial& P, const PolynomialNonlinearity* f,
                                 double omega, const Eigen::VectorXd& k, int D,
                                 const AnalysisOptions& opts) {
    if (k.size() != P.dim()) throw DimensionMismatch("carrier k has wrong dimension");
    if (D < 1 || D > P.dim()) throw ValidationError("invalid slow-direction count D");
    if (omega == 0.0 && k.isZero(0.0))
        throw ValidationError("carrier (omega, k) must not vanish identically");

    AnalyzeResult res;
    AnalysisReport& rep = res.report;

    BranchSet bs = track_branches(P, serpentine_grid(P.dim(), opts.xi_max, opts.xi_points),
                                  opts.cond_max);
    rep.max_condition = bs.max_condition;
    rep.ambiguity_count = bs.ambiguity_count;
    rep.stability = check_stability(bs, opts.tol_crit, opts.margin);

    std::vector<int> J = find_critical_set(P, k, omega, opts.j_max, opts.tol_crit);

    DegeneracyOptions dopts;
    dopts.D = D;
    dopts.max_order = opts.max_order;
    dopts.h = opts.fd_h;
    dopts.tol_crit = opts.tol_crit;
    dopts.eig_sep_tol = opts.eig_sep_tol;

    CriticalStructure& cs = res.critical;
    cs.omega = omega;
    cs.k = k;
    cs.D = D;

    bool q_ok = true;
    for (int j : J) {
        CriticalMode mode;
        mode.j = j;
        SpectralProjection prj = spectral_projection(P, j, k, omega, opts.eig_sep_tol);
        mode.lambda = prj.lambda;
        mode.w = prj.w;
        mode.l = prj.l;
        DegeneracyResult deg = degeneracy_order(P, j, k, omega, dopts);
        mode.M = deg.M;
        mode.taylor = deg.taylor;
        mode.Q = build_Q(deg.taylor, deg.M, D);
        cs.modes.push_back(std::move(mode));

        std::vector<std::array<Complex, 2>> off;
        for (int a = D; a < P.dim(); ++a)
            off.push_back(branch_derivatives_along_axis(P, j, k, omega, a, dopts));
        rep.offaxis.push_back(std::move(off));

        try {
            rep.q_ellipticity.push_back(check_ellipticity(cs.modes.back().Q, 1.0,
                                                          opts.ellipticity_radii,
                                                          opts.ellipticity_dirs));
        } catch (const EllipticityFailure& e) {
            EllipticityResult bad;
            bad.pass = false;
            bad.c1 = 1.0;
            rep.q_ellipticity.push_back(bad);
            rep.notes.push_back(std::string("Q ellipticity at j = ") + std::to_string(j) +
                                ": " + e.what());
            q_ok = false;
        }
    }

    cs.M = cs.modes.front().M;
    for (const auto& mode : cs.modes) cs.M = std::min(cs.M, mode.M);

    // conjugate pairing: J = -J, matching orders, matching Q, conjugate eigenvectors
    rep.p_conjugation_symmetric = P.conjugation_symmetric();
    rep.f_conjugation_symmetric = f ? f->conjugation_symmetric() : false;
    int n_pos = 0;
    for (int j : J)
        if (j > 0) ++n_pos;
    bool paired = 2 * n_pos == static_cast<int>(J.size());
    if (paired) {
        for (int i = 0; i < n_pos && paired; ++i)
            paired = cs.modes[n_pos + i].j == -cs.modes[i].j;
    }
    if (paired) {
        for (int i = 0; i < n_pos; ++i) {
            const CriticalMode& a = cs.modes[i];
            const CriticalMode& b = cs.modes[n_pos + i];
            rep.q_pair_distance = std::max(rep.q_pair_distance, a.Q.coeff_distance(b.Q));
            if (a.M != b.M) paired = false;
            if ((a.w.conjugate() - b.w).cwiseAbs().maxCoeff() > 1e-9) paired = false;
        }
        if (rep.q_pair_distance > 1e-10) paired = false;
    }
    cs.symmetric_pairing = paired && rep.p_conjugation_symmetric &&
                           (f == nullptr || rep.f_conjugation_symmetric);
    cs.n_pairs = cs.symmetric_pairing ? n_pos : 0;
    rep.symmetric_reduction_available = cs.symmetric_pairing && f != nullptr &&
                                        rep.f_conjugation_symmetric;

    try {
        rep.p_ellipticity = check_ellipticity(P, opts.ellipticity_c1, opts.ellipticity_radii,
                                              opts.ellipticity_dirs);
    } catch (const EllipticityFailure& e) {
        rep.p_ellipticity.pass = false;
        rep.p_ellipticity.c1 = opts.ellipticity_c1;
        rep.notes.push_back(std::string("P ellipticity: ") + e.what());
    }

    rep.pass = rep.stability.pass && rep.p_ellipticity.pass && q_ok;
    if (!rep.stability.pass) rep.notes.push_back("spectral stability check failed");
    return res;
}

} // namespace ampl
