#ifndef AMPLITUDER_DISPERSION_HPP
#define AMPLITUDER_DISPERSION_HPP

#include <array>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "amplituder/matrix_polynomial.hpp"
#include "amplituder/nonlinearity.hpp"

namespace ampl {

/// One eigenvalue branch sampled along a path of frequencies.
struct EigenBranch {
    int branch_id = 0;
    std::vector<Complex> values;   // one per path point
    double max_re = 0.0;
};

struct BranchSet {
    std::vector<Eigen::VectorXd> path;
    std::vector<EigenBranch> branches;     // sorted by max_re, descending
    double max_condition = 1.0;            // worst eigenvector-matrix condition seen
    int ambiguity_count = 0;               // matchings that tied within tolerance
};

/// Track the m eigenvalue branches of P(i xi) along a path of frequencies,
/// matching consecutive points by minimal total pairwise distance.
BranchSet track_branches(const MatrixPolynomial& P,
                         const std::vector<Eigen::VectorXd>& path,
                         double cond_max = 1e8);

/// Serpentine ordering of the product grid [-xi_max, xi_max]^d, so that
/// consecutive points are one spacing apart.
std::vector<Eigen::VectorXd> serpentine_grid(int dim, double xi_max, int points_per_axis);

struct StabilityCheck {
    bool pass = false;
    int critical_branches = 0;
    bool conjugate_pair = false;
    double max_re_critical = 0.0;       // over the branches allowed to touch zero
    double max_re_rest = 0.0;           // over the strictly damped branches
    std::vector<double> per_branch_max_re;
};

/// Spectral stability on a sampled branch set: the critical branch (or
/// conjugate pair) may touch Re = 0 within tol_crit, every other branch must
/// stay below -margin.
StabilityCheck check_stability(const BranchSet& bs, double tol_crit = 1e-9,
                               double margin = 1e-6);

struct EllipticityResult {
    bool pass = false;
    double c1 = 0.0;
    double c2 = 0.0;                 // largest admissible constant found
    double worst_ratio = 0.0;        // min over samples of -Re lambda / |xi|^2
    Eigen::VectorXd witness;         // sample attaining the worst ratio
};

/// Check Re lambda_j(xi) < -c2 |xi|^2 on the shell |xi| in [c1, 4 c1].
EllipticityResult check_ellipticity(const MatrixPolynomial& P, double c1,
                                    int n_radii = 9, int n_directions = 64);

/// Critical carrier integers: j with an eigenvalue of P(i j k) within
/// tol_crit of i j omega, scanned over 0 < |j| <= j_max.  Positive entries
/// first (ascending), then negative (descending).  Throws EmptyCriticalSet.
std::vector<int> find_critical_set(const MatrixPolynomial& P, const Eigen::VectorXd& k,
                                   double omega, int j_max = 16, double tol_crit = 1e-9);

struct SpectralProjection {
    Complex lambda;
    Eigen::VectorXcd w;      // right eigenvector, first nonzero entry scaled to 1
    Eigen::VectorXcd l;      // left row vector with l . w = 1 (unconjugated dot)
    double separation = 0.0; // distance to the nearest other eigenvalue
};

/// Eigenvalue of P(i j k) nearest i j omega together with its right/left
/// eigenvectors.  Throws DegenerateEigenvalue below eig_sep_tol.
SpectralProjection spectral_projection(const MatrixPolynomial& P, int j,
                                       const Eigen::VectorXd& k, double omega,
                                       double eig_sep_tol = 1e-8);

using TaylorMap = std::map<MultiIndex, Complex, GradedLexLess>;

struct DegeneracyResult {
    int M = 0;
    TaylorMap taylor;            // coefficients T_beta = d^beta lambda / beta! for |beta| <= M
    TaylorMap error_estimate;    // per-coefficient numerical error estimate
    bool exact = false;          // true when the scalar formal-derivative path was used
};

struct DegeneracyOptions {
    int D = 1;                 // number of leading slow directions
    int max_order = 8;
    double h = 1e-2;           // coarse finite-difference spacing (fine = h/2)
    double tol_crit = 1e-9;
    double eig_sep_tol = 1e-8;
    double noise_safety = 30.0;
};

/// Degeneracy order of the tracked branch of P near frequency j k with
/// eigenvalue i j omega: the smallest order with a significant Taylor
/// coefficient in the first D frequency directions.  Central finite
/// differences with one Richardson halving; for m = 1 the formal-derivative
/// path is used and the finite differences are cross-checked against it.
DegeneracyResult degeneracy_order(const MatrixPolynomial& P, int j,
                                  const Eigen::VectorXd& k, double omega,
                                  const DegeneracyOptions& opts);

/// Taylor coefficients (orders 1..2) of the tracked branch along a single
/// off-axis direction, for reporting the non-slow directions.
std::array<Complex, 2> branch_derivatives_along_axis(const MatrixPolynomial& P, int j,
                                                     const Eigen::VectorXd& k, double omega,
                                                     int axis, const DegeneracyOptions& opts);

/// Q_n(x) = sum_{|beta| = M} T_beta (x / i)^beta as a scalar polynomial in the
/// D slow variables.
MatrixPolynomial build_Q(const TaylorMap& taylor, int M, int D);

/// Fornberg finite-difference weights for derivative orders 0..max_order at
/// x0 over the given nodes; weights[p][i] multiplies the sample at nodes[i].
std::vector<std::vector<double>> fornberg_weights(double x0, const std::vector<double>& nodes,
                                                  int max_order);

struct CriticalMode {
    int j = 0;
    int M = 0;
    Complex lambda;
    Eigen::VectorXcd w, l;
    MatrixPolynomial Q;
    TaylorMap taylor;

    CriticalMode() : Q(1, 1) {}
};

struct CriticalStructure {
    double omega = 0.0;
    Eigen::VectorXd k;
    int D = 1;
    int M = 0;                       // min over modes; eta = eps^(1/M)
    bool symmetric_pairing = false;  // J = -J with conjugate eigenvectors
    int n_pairs = 0;                 // N when symmetric_pairing
    std::vector<CriticalMode> modes; // positive j ascending, then their negatives

    double eta(double eps) const { return std::pow(eps, 1.0 / static_cast<double>(M)); }
};

struct AnalysisOptions {
    double tol_crit = 1e-9;
    double margin = 1e-6;
    double cond_max = 1e8;
    double eig_sep_tol = 1e-8;
    int j_max = 16;
    int max_order = 8;
    double fd_h = 1e-2;
    double xi_max = 3.0;
    int xi_points = 201;
    double ellipticity_c1 = 2.0;
    int ellipticity_radii = 9;
    int ellipticity_dirs = 64;
};

struct AnalysisReport {
    StabilityCheck stability;
    double max_condition = 1.0;
    int ambiguity_count = 0;
    EllipticityResult p_ellipticity;
    std::vector<EllipticityResult> q_ellipticity;      // per mode
    bool p_conjugation_symmetric = false;
    bool f_conjugation_symmetric = false;
    bool symmetric_reduction_available = false;
    double q_pair_distance = 0.0;                      // max |Q_n - Q_-n| coefficient gap
    std::vector<std::vector<std::array<Complex, 2>>> offaxis;  // [mode][axis-D] -> (d1, d2)
    bool pass = false;
    std::vector<std::string> notes;
};

struct AnalyzeResult {
    CriticalStructure critical;
    AnalysisReport report;
};

/// Full assumption pipeline: branch tracking + stability, critical set,
/// per-mode projections, degeneracy orders, Q construction, ellipticity.
AnalyzeResult analyze_dispersion(const MatrixPolynomial& P, const PolynomialNonlinearity* f,
                                 double omega, const Eigen::VectorXd& k, int D,
                                 const AnalysisOptions& opts = {});

} // namespace ampl

#endif
