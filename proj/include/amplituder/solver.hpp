#ifndef AMPLITUDER_SOLVER_HPP
#define AMPLITUDER_SOLVER_HPP

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "amplituder/reduction.hpp"

namespace ampl {

/// Periodic rectangular grid.  Axis lengths are real box sizes, point counts
/// are powers of two (>= 8).  Storage order is row major with the last axis
/// contiguous, matching the FFT layout.
struct Grid {
    std::vector<double> lengths;
    std::vector<int> points;

    int dims() const { return static_cast<int>(points.size()); }
    std::ptrdiff_t size() const;
    double spacing(int axis) const { return lengths[axis] / points[axis]; }
    double coord(int axis, int index) const { return spacing(axis) * index; }

    /// Signed FFT index: 0,1,...,n/2, -n/2+1,...,-1.
    int folded(int axis, int index) const;
    double wavenumber(int axis, int index) const;

    std::ptrdiff_t flat(const std::vector<int>& idx) const;

    bool operator==(const Grid& o) const { return points == o.points && lengths == o.lengths; }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

Grid make_grid(std::vector<double> lengths, std::vector<int> points);

/// Leading-axes subgrid carrying the envelope fields.
Grid slow_grid(const Grid& fast, int D);

/// Multi-component field on a grid, in physical or Fourier representation.
/// Fourier coefficients follow the convention u(x) = sum_xi uhat(xi) e^{i xi x}.
struct SpectralField {
    Grid grid;
    std::vector<Eigen::VectorXcd> comps;
    bool fourier = false;

    int components() const { return static_cast<int>(comps.size()); }
    double sup_norm() const;
    double max_imag() const;
    /// Max |uhat(-xi) - conj uhat(xi)| over modes; requires Fourier representation.
    double hermitian_defect() const;
};

SpectralField make_field(const Grid& grid, int n_comps, bool fourier = false);

/// Complex-to-complex FFT pair on a fixed grid (plans owned, buffer aligned).
/// forward() divides by the point count so coefficients are Fourier amplitudes.
class FourierTransform {
public:
    explicit FourierTransform(const Grid& grid);
    ~FourierTransform();
    FourierTransform(const FourierTransform&) = delete;
    FourierTransform& operator=(const FourierTransform&) = delete;

    const Grid& grid() const { return grid_; }
    void forward(Eigen::VectorXcd& data) const;
    void backward(Eigen::VectorXcd& data) const;
    void forward(SpectralField& f) const;
    void backward(SpectralField& f) const;

private:
    Grid grid_;
    void* plan_fwd_;
    void* plan_bwd_;
    Complex* buf_;
};

struct SimConfig {
    double epsilon = 0.0;
    double eta = 0.0;
    double t0 = 0.0;
    double T_end = 1.0;
    double dt = 1e-2;
    bool dealias = true;
    int snapshot_stride = 1;
};

/// Per-mode c x c matrices stored entrywise as mode vectors so application is
/// a handful of vectorized multiplies.
struct PropagatorTable {
    Grid grid;
    int block = 1;
    double dt = 0.0;
    std::vector<std::vector<Eigen::VectorXcd>> entries;  // [row][col] over modes

    Eigen::MatrixXcd at(std::ptrdiff_t mode) const;
    void apply(const std::vector<Eigen::VectorXcd>& in, std::vector<Eigen::VectorXcd>& out) const;
};

/// exp(P(i xi) dt) for every grid mode.  Eigendecomposition per mode, with a
/// scaling-and-squaring fallback once the eigenvector condition number passes
/// cond_max.  Any mode whose propagator magnitude exceeds 1 + overflow_tol
/// raises PropagatorOverflow (neutral modes sit exactly at 1).
PropagatorTable linear_propagator(const MatrixPolynomial& symbol, const Grid& grid, double dt,
                                  double cond_max = 1e6, double overflow_tol = 1e-8);

/// Block-diagonal table for component-wise scalar symbols (amplitude system).
PropagatorTable diagonal_propagator(const std::vector<MatrixPolynomial>& symbols, const Grid& grid,
                                    double dt, double overflow_tol = 1e-8);

/// Exponential integrator tables: e = exp(L dt), phi1 = dt phi_1(L dt),
/// phi2 = dt phi_2(L dt) with phi_1(z) = (e^z - 1)/z, phi_2(z) = (e^z - z - 1)/z^2.
struct EtdTables {
    PropagatorTable e, phi1, phi2;
};

EtdTables etd_tables(const MatrixPolynomial& symbol, const Grid& grid, double dt,
                     double cond_max = 1e6, double overflow_tol = 1e-8);
EtdTables etd_tables(const std::vector<MatrixPolynomial>& symbols, const Grid& grid, double dt,
                     double cond_max = 1e6, double overflow_tol = 1e-8);

/// Pointwise nonlinear map on physical-space component arrays.
using NonlinearFn =
    std::function<void(const std::vector<Eigen::VectorXcd>&, std::vector<Eigen::VectorXcd>&)>;

NonlinearFn pointwise_map(const PolynomialNonlinearity& f);
NonlinearFn pointwise_map(const std::vector<ReducedPolynomial>& R);

/// Two-stage exponential Runge-Kutta step on Fourier data:
///   a      = e uhat + eps phi1 F(uhat)
///   uhat'  = a + eps phi2 (F(a) - F(uhat))
/// with F evaluated pointwise in physical space.  The 2/3-rule truncation
/// applies to the state spectrum as well as the nonlinear injection, so the
/// scheme is a Galerkin method on the retained modes and real fields stay
/// real even when the symbol carries odd-order (transport) terms.
class Etd2 {
public:
    Etd2(EtdTables tables, NonlinearFn f, double epsilon, bool dealias);

    double dt() const { return tables_.e.dt; }
    const Grid& grid() const { return tables_.e.grid; }

    /// Advances one step; t_now only labels the NaN abort message.
    void step(SpectralField& uhat, double t_now);

private:
    void nonlinear(const std::vector<Eigen::VectorXcd>& uhat, std::vector<Eigen::VectorXcd>& out);

    EtdTables tables_;
    NonlinearFn f_;
    double eps_;
    bool dealias_;
    FourierTransform fft_;
    std::vector<char> keep_;
    std::vector<Eigen::VectorXcd> phys_, fhat_, fa_, stage_, tmp_;
};

struct Snapshot {
    double time = 0.0;
    SpectralField field;  // physical representation
    double sup_norm = 0.0;
};

struct Trajectory {
    std::vector<Snapshot> snaps;
    double dt = 0.0;
    int n_steps = 0;

    const Snapshot& at_time(double t) const;
};

/// Original system u_t = P u + eps f(u) from physical initial data.
Trajectory simulate(const MatrixPolynomial& symbol, const PolynomialNonlinearity& f,
                    const SpectralField& u0, const SimConfig& cfg);

/// Amplitude system A_n' = Q_n A_n + eps R_n(A) on the slow grid.
Trajectory simulate(const AmplitudeSystem& sys, const SpectralField& A0, const SimConfig& cfg);

/// Envelope profile, evaluated at slow coordinates X = eta * (x_1..x_D).
using Profile = std::function<Complex(const Eigen::VectorXd&)>;

/// Mini-language: constant(c) | gaussian(amp, width) | cospack(amp, q).
/// Gaussians are centered at slow_length/2 per axis; cospack(amp, q) is
/// amp cos(q X_1) and requires q to be periodic on the slow box.
Profile parse_profile(const std::string& text, double slow_length);

/// Largest |v| on the slow-box boundary faces (tail diagnostic for profiles
/// that are only numerically periodic).
double boundary_tail(const Profile& v, double slow_length, int D);

/// Envelope arrays A_n[i] = v_n(eta x_i) on the slow grid.
SpectralField envelope_field(const std::vector<Profile>& v, const Grid& slow, double eta);

/// u(0,x) = sum_n v_n(eta x_hat) e^{i j_n k x} w_n, plus conjugate carriers in
/// symmetric mode (real field).  Carriers must be grid periodic.
SpectralField synthesize_initial(const std::vector<Profile>& v, const CriticalStructure& cs,
                                 const Grid& grid, double eta, bool symmetric);

/// u(t,x) = sum_n A_n(x_hat) e^{i j_n (omega t + k x)} w_n (+ conjugates when
/// symmetric).  The envelope field must live on slow_grid(fast, D).
SpectralField reconstruct(const SpectralField& A, const CriticalStructure& cs, double t,
                          const Grid& fast, bool symmetric);
SpectralField reconstruct(const SpectralField& A, const AmplitudeSystem& sys, double t,
                          const Grid& fast);

/// r = 0: max |u - v| over grid and components; r = 1: max of that and of all
/// first spectral derivatives of the difference.
double sup_error(const SpectralField& u, const SpectralField& v, int r = 0);

} // namespace ampl

#endif
