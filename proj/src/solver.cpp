#include "amplituder/solver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include <fftw3.h>

#include "amplituder/errors.hpp"

namespace ampl {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::string point_str(const Eigen::VectorXd& xi) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < xi.size(); ++i) os << (i ? ", " : "") << xi(i);
    os << ")";
    return os.str();
}

/// Walks all grid modes in flat order, handing the frequency vector to fn.
template <class F>
void for_each_mode(const Grid& g, F&& fn) {
    const int d = g.dims();
    std::vector<int> idx(d, 0);
    Eigen::VectorXd xi(d);
    for (int a = 0; a < d; ++a) xi(a) = 0.0;
    const std::ptrdiff_t total = g.size();
    for (std::ptrdiff_t flat = 0; flat < total; ++flat) {
        fn(flat, xi);
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < g.points[a]) {
                xi(a) = g.wavenumber(a, idx[a]);
                break;
            }
            idx[a] = 0;
            xi(a) = 0.0;
        }
    }
}

} // namespace

std::ptrdiff_t Grid::size() const {
    std::ptrdiff_t n = 1;
    for (int p : points) n *= p;
    return n;
}

int Grid::folded(int axis, int index) const {
    const int n = points[axis];
    return index <= n / 2 ? index : index - n;
}

double Grid::wavenumber(int axis, int index) const {
    return 2.0 * kPi * folded(axis, index) / lengths[axis];
}

std::ptrdiff_t Grid::flat(const std::vector<int>& idx) const {
    std::ptrdiff_t f = 0;
    for (int a = 0; a < dims(); ++a) f = f * points[a] + idx[a];
    return f;
}

Grid make_grid(std::vector<double> lengths, std::vector<int> points) {
    if (lengths.empty() || lengths.size() != points.size())
        throw ValidationError("grid needs matching length and point lists");
    for (double L : lengths)
        if (!(L > 0.0)) throw ValidationError("grid lengths must be positive");
    for (int n : points)
        if (n < 8 || !power_of_two(n))
            throw ValidationError("grid points must be powers of two >= 8, got " + std::to_string(n));
    return Grid{std::move(lengths), std::move(points)};
}

Grid slow_grid(const Grid& fast, int D) {
    if (D < 1 || D > fast.dims())
        throw ValidationError("slow grid dimension out of range");
    return Grid{{fast.lengths.begin(), fast.lengths.begin() + D},
                {fast.points.begin(), fast.points.begin() + D}};
}

double SpectralField::sup_norm() const {
    double m = 0.0;
    for (const auto& c : comps) m = std::max(m, c.size() ? c.cwiseAbs().maxCoeff() : 0.0);
    return m;
}

double SpectralField::max_imag() const {
    double m = 0.0;
    for (const auto& c : comps)
        for (std::ptrdiff_t i = 0; i < c.size(); ++i) m = std::max(m, std::abs(c(i).imag()));
    return m;
}

double SpectralField::hermitian_defect() const {
    if (!fourier) throw ValidationError("hermitian_defect needs Fourier data");
    const int d = grid.dims();
    std::vector<int> idx(d, 0);
    double worst = 0.0;
    const std::ptrdiff_t total = grid.size();
    for (std::ptrdiff_t flat = 0; flat < total; ++flat) {
        std::vector<int> neg(d);
        for (int a = 0; a < d; ++a) neg[a] = (grid.points[a] - idx[a]) % grid.points[a];
        const std::ptrdiff_t nflat = grid.flat(neg);
        for (const auto& c : comps)
            worst = std::max(worst, std::abs(c(nflat) - std::conj(c(flat))));
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < grid.points[a]) break;
            idx[a] = 0;
        }
    }
    return worst;
}

SpectralField make_field(const Grid& grid, int n_comps, bool fourier) {
    if (n_comps < 1) throw ValidationError("field needs at least one component");
    SpectralField f;
    f.grid = grid;
    f.fourier = fourier;
    f.comps.assign(n_comps, Eigen::VectorXcd::Zero(grid.size()));
    return f;
}

FourierTransform::FourierTransform(const Grid& grid) : grid_(grid) {
    const std::ptrdiff_t total = grid_.size();
    buf_ = static_cast<Complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    if (!buf_) throw SolverError("fft buffer allocation failed");
    std::vector<int> n(grid_.points.begin(), grid_.points.end());
    fftw_complex* b = reinterpret_cast<fftw_complex*>(buf_);
    plan_fwd_ = fftw_plan_dft(grid_.dims(), n.data(), b, b, FFTW_FORWARD, FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft(grid_.dims(), n.data(), b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!plan_fwd_ || !plan_bwd_) throw SolverError("fft planning failed");
}

FourierTransform::~FourierTransform() {
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
    fftw_free(buf_);
}

void FourierTransform::forward(Eigen::VectorXcd& data) const {
    const std::ptrdiff_t total = grid_.size();
    if (data.size() != total) throw DimensionMismatch("fft input size does not match grid");
    std::copy(data.data(), data.data() + total, buf_);
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    const double scale = 1.0 / static_cast<double>(total);
    for (std::ptrdiff_t i = 0; i < total; ++i) data(i) = buf_[i] * scale;
}

void FourierTransform::backward(Eigen::VectorXcd& data) const {
    const std::ptrdiff_t total = grid_.size();
    if (data.size() != total) throw DimensionMismatch("fft input size does not match grid");
    std::copy(data.data(), data.data() + total, buf_);
    fftw_execute(static_cast<fftw_plan>(plan_bwd_));
    std::copy(buf_, buf_ + total, data.data());
}

void FourierTransform::forward(SpectralField& f) const {
    if (f.fourier) throw ValidationError("field already in Fourier representation");
    if (f.grid != grid_) throw GridMismatch("field grid does not match transform grid");
    for (auto& c : f.comps) forward(c);
    f.fourier = true;
}

void FourierTransform::backward(SpectralField& f) const {
    if (!f.fourier) throw ValidationError("field already in physical representation");
    if (f.grid != grid_) throw GridMismatch("field grid does not match transform grid");
    for (auto& c : f.comps) backward(c);
    f.fourier = false;
}

namespace {

// phi_1(z) = (e^z - 1)/z and phi_2(z) = (e^z - z - 1)/z^2, with short Taylor
// series below |z| = 1e-4 where the direct formulas cancel.
Complex phi1_scalar(Complex z) {
    if (std::abs(z) < 1e-4) {
        Complex s = z / 720.0 + 1.0 / 120.0;
        s = s * z + 1.0 / 24.0;
        s = s * z + 1.0 / 6.0;
        s = s * z + 0.5;
        return s * z + 1.0;
    }
    return (std::exp(z) - 1.0) / z;
}

Complex phi2_scalar(Complex z) {
    if (std::abs(z) < 1e-4) {
        Complex s = z / 5040.0 + 1.0 / 720.0;
        s = s * z + 1.0 / 120.0;
        s = s * z + 1.0 / 24.0;
        s = s * z + 1.0 / 6.0;
        return s * z + 0.5;
    }
    return (std::exp(z) - z - 1.0) / (z * z);
}

// exp of the block matrix [[Z, I, 0], [0, 0, I], [0, 0, 0]] carries e^Z,
// phi_1(Z), phi_2(Z) in its top row; Taylor with scaling and squaring is
// immune to defective Z.
void augmented_exp(const Eigen::MatrixXcd& Z, Eigen::MatrixXcd& E, Eigen::MatrixXcd& F1,
                   Eigen::MatrixXcd& F2) {
    const int c = static_cast<int>(Z.rows());
    const int n = 3 * c;
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
    M.topLeftCorner(c, c) = Z;
    M.block(0, c, c, c).setIdentity();
    M.block(c, 2 * c, c, c).setIdentity();

    double norm = M.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    while (norm > 0.5 && s < 60) {
        norm *= 0.5;
        ++s;
    }
    Eigen::MatrixXcd B = M / std::pow(2.0, s);
    Eigen::MatrixXcd X = Eigen::MatrixXcd::Identity(n, n);
    for (int k = 20; k >= 1; --k) X = Eigen::MatrixXcd::Identity(n, n) + (B * X) / k;
    for (int k = 0; k < s; ++k) X = X * X;

    E = X.topLeftCorner(c, c);
    F1 = X.block(0, c, c, c);
    F2 = X.block(0, 2 * c, c, c);
}

// Per-mode tables for L: E = exp(L dt), P1 = dt phi1(L dt), P2 = dt phi2(L dt).
// Returns the spectral radius of E for the overflow guard.
double etd_mode(const Eigen::MatrixXcd& L, double dt, double cond_max, bool with_phi,
                Eigen::MatrixXcd& E, Eigen::MatrixXcd& P1, Eigen::MatrixXcd& P2) {
    const int c = static_cast<int>(L.rows());
    const Eigen::MatrixXcd Z = L * dt;
    if (c == 1) {
        const Complex z = Z(0, 0);
        E.resize(1, 1);
        E(0, 0) = std::exp(z);
        if (with_phi) {
            P1.resize(1, 1);
            P2.resize(1, 1);
            P1(0, 0) = dt * phi1_scalar(z);
            P2(0, 0) = dt * phi2_scalar(z);
        }
        return std::abs(E(0, 0));
    }

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(Z);
    double growth = 0.0;
    for (int i = 0; i < c; ++i) growth = std::max(growth, std::abs(std::exp(ces.eigenvalues()(i))));

    double cond = std::numeric_limits<double>::infinity();
    if (ces.info() == Eigen::Success) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(ces.eigenvectors());
        const double smin = svd.singularValues()(c - 1);
        if (smin > 0.0) cond = svd.singularValues()(0) / smin;
    }

    if (ces.info() == Eigen::Success && cond <= cond_max) {
        const Eigen::MatrixXcd& V = ces.eigenvectors();
        const Eigen::MatrixXcd Vinv = V.inverse();
        Eigen::VectorXcd de(c), d1(c), d2(c);
        for (int i = 0; i < c; ++i) {
            const Complex z = ces.eigenvalues()(i);
            de(i) = std::exp(z);
            if (with_phi) {
                d1(i) = phi1_scalar(z);
                d2(i) = phi2_scalar(z);
            }
        }
        E = V * de.asDiagonal() * Vinv;
        if (with_phi) {
            P1 = dt * (V * d1.asDiagonal() * Vinv);
            P2 = dt * (V * d2.asDiagonal() * Vinv);
        }
    } else {
        Eigen::MatrixXcd F1, F2;
        augmented_exp(Z, E, F1, F2);
        if (with_phi) {
            P1 = dt * F1;
            P2 = dt * F2;
        }
    }
    return growth;
}

PropagatorTable empty_table(const Grid& grid, int block, double dt) {
    PropagatorTable t;
    t.grid = grid;
    t.block = block;
    t.dt = dt;
    t.entries.assign(block, std::vector<Eigen::VectorXcd>(block, Eigen::VectorXcd::Zero(grid.size())));
    return t;
}

void store_mode(PropagatorTable& t, std::ptrdiff_t flat, const Eigen::MatrixXcd& M) {
    for (int r = 0; r < t.block; ++r)
        for (int c = 0; c < t.block; ++c) t.entries[r][c](flat) = M(r, c);
}

EtdTables build_tables(const MatrixPolynomial& symbol, const Grid& grid, double dt,
                       double cond_max, double overflow_tol, bool with_phi) {
    if (symbol.dim() != grid.dims())
        throw DimensionMismatch("symbol variable count does not match grid dimension");
    if (!(dt > 0.0)) throw ValidationError("propagator needs dt > 0");
    const int c = symbol.size();
    EtdTables tb;
    tb.e = empty_table(grid, c, dt);
    if (with_phi) {
        tb.phi1 = empty_table(grid, c, dt);
        tb.phi2 = empty_table(grid, c, dt);
    }
    Eigen::MatrixXcd E, P1, P2;
    for_each_mode(grid, [&](std::ptrdiff_t flat, const Eigen::VectorXd& xi) {
        const double growth = etd_mode(symbol.eval_symbol(xi), dt, cond_max, with_phi, E, P1, P2);
        if (growth > 1.0 + overflow_tol)
            throw PropagatorOverflow("mode " + point_str(xi) + " grows by factor " +
                                     std::to_string(growth) + " per step");
        store_mode(tb.e, flat, E);
        if (with_phi) {
            store_mode(tb.phi1, flat, P1);
            store_mode(tb.phi2, flat, P2);
        }
    });
    return tb;
}

EtdTables build_tables(const std::vector<MatrixPolynomial>& symbols, const Grid& grid, double dt,
                       double overflow_tol, bool with_phi) {
    if (symbols.empty()) throw ValidationError("need at least one component symbol");
    for (const auto& q : symbols) {
        if (q.size() != 1) throw ValidationError("component symbols must be scalar");
        if (q.dim() != grid.dims())
            throw DimensionMismatch("symbol variable count does not match grid dimension");
    }
    if (!(dt > 0.0)) throw ValidationError("propagator needs dt > 0");
    const int c = static_cast<int>(symbols.size());
    EtdTables tb;
    tb.e = empty_table(grid, c, dt);
    if (with_phi) {
        tb.phi1 = empty_table(grid, c, dt);
        tb.phi2 = empty_table(grid, c, dt);
    }
    for_each_mode(grid, [&](std::ptrdiff_t flat, const Eigen::VectorXd& xi) {
        for (int n = 0; n < c; ++n) {
            const Complex z = symbols[n].eval_symbol(xi)(0, 0) * dt;
            const Complex e = std::exp(z);
            if (std::abs(e) > 1.0 + overflow_tol)
                throw PropagatorOverflow("component " + std::to_string(n + 1) + " mode " +
                                         point_str(xi) + " grows by factor " +
                                         std::to_string(std::abs(e)) + " per step");
            tb.e.entries[n][n](flat) = e;
            if (with_phi) {
                tb.phi1.entries[n][n](flat) = dt * phi1_scalar(z);
                tb.phi2.entries[n][n](flat) = dt * phi2_scalar(z);
            }
        }
    });
    return tb;
}

} // namespace

Eigen::MatrixXcd PropagatorTable::at(std::ptrdiff_t mode) const {
    Eigen::MatrixXcd M(block, block);
    for (int r = 0; r < block; ++r)
        for (int c = 0; c < block; ++c) M(r, c) = entries[r][c](mode);
    return M;
}

void PropagatorTable::apply(const std::vector<Eigen::VectorXcd>& in,
                            std::vector<Eigen::VectorXcd>& out) const {
    if (static_cast<int>(in.size()) != block)
        throw DimensionMismatch("propagator block size does not match component count");
    out.resize(block);
    for (int r = 0; r < block; ++r) {
        out[r] = entries[r][0].cwiseProduct(in[0]);
        for (int c = 1; c < block; ++c) out[r] += entries[r][c].cwiseProduct(in[c]);
    }
}

PropagatorTable linear_propagator(const MatrixPolynomial& symbol, const Grid& grid, double dt,
                                  double cond_max, double overflow_tol) {
    return build_tables(symbol, grid, dt, cond_max, overflow_tol, false).e;
}

PropagatorTable diagonal_propagator(const std::vector<MatrixPolynomial>& symbols, const Grid& grid,
                                    double dt, double overflow_tol) {
    return build_tables(symbols, grid, dt, overflow_tol, false).e;
}

EtdTables etd_tables(const MatrixPolynomial& symbol, const Grid& grid, double dt, double cond_max,
                     double overflow_tol) {
    return build_tables(symbol, grid, dt, cond_max, overflow_tol, true);
}

EtdTables etd_tables(const std::vector<MatrixPolynomial>& symbols, const Grid& grid, double dt,
                     double cond_max, double overflow_tol) {
    (void)cond_max;
    return build_tables(symbols, grid, dt, overflow_tol, true);
}

NonlinearFn pointwise_map(const PolynomialNonlinearity& f) {
    struct Term {
        std::vector<int> pows;
        Eigen::VectorXcd coeff;
    };
    auto terms = std::make_shared<std::vector<Term>>();
    for (const auto& [expo, coeff] : f.terms()) {
        Term t;
        t.pows.assign(expo.exp.begin(), expo.exp.end());
        t.coeff = coeff;
        terms->push_back(std::move(t));
    }
    const int m = f.components();
    return [terms, m](const std::vector<Eigen::VectorXcd>& u, std::vector<Eigen::VectorXcd>& out) {
        const std::ptrdiff_t n = u[0].size();
        out.resize(m);
        for (int c = 0; c < m; ++c) out[c] = Eigen::VectorXcd::Zero(n);
        Eigen::VectorXcd mono(n);
        for (const Term& t : *terms) {
            mono.setOnes();
            for (size_t v = 0; v < t.pows.size(); ++v)
                for (int p = 0; p < t.pows[v]; ++p) mono = mono.cwiseProduct(u[v]);
            for (int c = 0; c < m; ++c)
                if (t.coeff(c) != 0.0) out[c] += t.coeff(c) * mono;
        }
    };
}

NonlinearFn pointwise_map(const std::vector<ReducedPolynomial>& R) {
    struct Term {
        std::vector<int> pows;
        Complex coeff;
    };
    auto terms = std::make_shared<std::vector<std::vector<Term>>>(R.size());
    for (size_t n = 0; n < R.size(); ++n) {
        if (R[n].dim != 1) throw ValidationError("amplitude nonlinearity must be scalar valued");
        for (const auto& [expo, coeff] : R[n].terms) {
            Term t;
            t.pows.assign(expo.exp.begin(), expo.exp.end());
            t.coeff = coeff(0);
            (*terms)[n].push_back(std::move(t));
        }
    }
    const int m = static_cast<int>(R.size());
    return [terms, m](const std::vector<Eigen::VectorXcd>& u, std::vector<Eigen::VectorXcd>& out) {
        const std::ptrdiff_t n = u[0].size();
        out.resize(m);
        Eigen::VectorXcd mono(n);
        for (int c = 0; c < m; ++c) {
            out[c] = Eigen::VectorXcd::Zero(n);
            for (const Term& t : (*terms)[c]) {
                mono.setOnes();
                for (size_t v = 0; v < t.pows.size(); ++v)
                    for (int p = 0; p < t.pows[v]; ++p) mono = mono.cwiseProduct(u[v]);
                out[c] += t.coeff * mono;
            }
        }
    };
}

Etd2::Etd2(EtdTables tables, NonlinearFn f, double epsilon, bool dealias)
    : tables_(std::move(tables)),
      f_(std::move(f)),
      eps_(epsilon),
      dealias_(dealias),
      fft_(tables_.e.grid) {
    if (eps_ < 0.0) throw ValidationError("epsilon must be nonnegative");
    if (eps_ > 0.0) {
        if (!f_) throw ValidationError("nonlinear stepping needs a nonlinearity");
        if (tables_.phi1.entries.empty() || tables_.phi2.entries.empty())
            throw ValidationError("nonlinear stepping needs phi tables");
    }
    const Grid& g = tables_.e.grid;
    keep_.assign(g.size(), 1);
    if (dealias_) {
        const int d = g.dims();
        std::vector<int> idx(d, 0);
        for (std::ptrdiff_t flat = 0; flat < g.size(); ++flat) {
            for (int a = 0; a < d; ++a)
                if (3 * std::abs(g.folded(a, idx[a])) > g.points[a]) {
                    keep_[flat] = 0;
                    break;
                }
            for (int a = d - 1; a >= 0; --a) {
                if (++idx[a] < g.points[a]) break;
                idx[a] = 0;
            }
        }
    }
    const int c = tables_.e.block;
    phys_.assign(c, Eigen::VectorXcd(g.size()));
    fhat_.assign(c, Eigen::VectorXcd(g.size()));
    fa_.assign(c, Eigen::VectorXcd(g.size()));
    stage_.assign(c, Eigen::VectorXcd(g.size()));
    tmp_.assign(c, Eigen::VectorXcd(g.size()));
}

void Etd2::nonlinear(const std::vector<Eigen::VectorXcd>& uhat, std::vector<Eigen::VectorXcd>& out) {
    for (size_t c = 0; c < uhat.size(); ++c) {
        phys_[c] = uhat[c];
        fft_.backward(phys_[c]);
    }
    f_(phys_, out);
    for (auto& comp : out) fft_.forward(comp);
    if (dealias_)
        for (auto& comp : out)
            for (std::ptrdiff_t i = 0; i < comp.size(); ++i)
                if (!keep_[i]) comp(i) = 0.0;
}

void Etd2::step(SpectralField& uhat, double t_now) {
    if (!uhat.fourier) throw ValidationError("step expects Fourier data");
    if (uhat.grid != tables_.e.grid) throw GridMismatch("field grid does not match propagators");
    if (uhat.components() != tables_.e.block)
        throw DimensionMismatch("component count does not match propagators");

    // Galerkin truncation: the state itself lives below the cutoff.  This also
    // drops the unpaired Nyquist bins, whose factors for odd-order symbols are
    // complex and would leak an imaginary part into real fields.
    if (dealias_)
        for (auto& comp : uhat.comps)
            for (std::ptrdiff_t i = 0; i < comp.size(); ++i)
                if (!keep_[i]) comp(i) = 0.0;

    if (eps_ == 0.0) {
        tables_.e.apply(uhat.comps, tmp_);
        uhat.comps.swap(tmp_);
    } else {
        nonlinear(uhat.comps, fhat_);
        tables_.e.apply(uhat.comps, stage_);
        tables_.phi1.apply(fhat_, tmp_);
        for (size_t c = 0; c < stage_.size(); ++c) stage_[c] += eps_ * tmp_[c];
        nonlinear(stage_, fa_);
        for (size_t c = 0; c < fa_.size(); ++c) fa_[c] -= fhat_[c];
        tables_.phi2.apply(fa_, tmp_);
        for (size_t c = 0; c < stage_.size(); ++c) uhat.comps[c] = stage_[c] + eps_ * tmp_[c];
    }

    for (const auto& c : uhat.comps)
        if (!c.allFinite())
            throw SolverError("non-finite field at t = " + std::to_string(t_now + tables_.e.dt));
}

const Snapshot& Trajectory::at_time(double t) const {
    if (snaps.empty()) throw ValidationError("empty trajectory");
    size_t best = 0;
    for (size_t i = 1; i < snaps.size(); ++i)
        if (std::abs(snaps[i].time - t) < std::abs(snaps[best].time - t)) best = i;
    return snaps[best];
}

namespace {

void validate_config(const SimConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw ValidationError("config needs dt > 0");
    if (!(cfg.T_end > 0.0)) throw ValidationError("config needs T_end > 0");
    if (cfg.t0 < 0.0 || cfg.t0 >= cfg.T_end) throw ValidationError("config needs 0 <= t0 < T_end");
    if (cfg.epsilon < 0.0) throw ValidationError("config needs epsilon >= 0");
    if (cfg.snapshot_stride < 1) throw ValidationError("snapshot stride must be >= 1");
}

Trajectory run_etd2(const EtdTables& tables, const NonlinearFn& nl, const SpectralField& u0,
                    const SimConfig& cfg, int n_steps, double dt) {
    Etd2 stepper(tables, nl, cfg.epsilon, cfg.dealias);
    FourierTransform fft(u0.grid);

    SpectralField state = u0;
    fft.forward(state);

    Trajectory traj;
    traj.dt = dt;
    traj.n_steps = n_steps;

    auto record = [&](double t) {
        SpectralField g = state;
        fft.backward(g);
        double s = g.sup_norm();
        traj.snaps.push_back(Snapshot{t, std::move(g), s});
    };

    record(0.0);
    for (int s = 1; s <= n_steps; ++s) {
        stepper.step(state, (s - 1) * dt);
        if (s % cfg.snapshot_stride == 0 || s == n_steps) record(s * dt);
    }
    return traj;
}

int step_count(const SimConfig& cfg, double& dt_eff) {
    const int n = std::max(1, static_cast<int>(std::ceil(cfg.T_end / cfg.dt - 1e-9)));
    dt_eff = cfg.T_end / n;
    return n;
}

} // namespace

Trajectory simulate(const MatrixPolynomial& symbol, const PolynomialNonlinearity& f,
                    const SpectralField& u0, const SimConfig& cfg) {
    validate_config(cfg);
    if (u0.fourier) throw ValidationError("simulate expects physical initial data");
    if (u0.components() != symbol.size())
        throw DimensionMismatch("initial field component count does not match symbol");
    double dt = 0.0;
    const int n = step_count(cfg, dt);
    const EtdTables tables = etd_tables(symbol, u0.grid, dt);
    return run_etd2(tables, cfg.epsilon > 0.0 ? pointwise_map(f) : NonlinearFn(), u0, cfg, n, dt);
}

Trajectory simulate(const AmplitudeSystem& sys, const SpectralField& A0, const SimConfig& cfg) {
    validate_config(cfg);
    if (A0.fourier) throw ValidationError("simulate expects physical initial data");
    if (A0.components() != sys.n_comps)
        throw DimensionMismatch("initial field component count does not match amplitude system");
    if (A0.grid.dims() != sys.D) throw GridMismatch("amplitude grid dimension must equal D");
    double dt = 0.0;
    const int n = step_count(cfg, dt);
    const EtdTables tables = etd_tables(sys.Q, A0.grid, dt);
    return run_etd2(tables, cfg.epsilon > 0.0 ? pointwise_map(sys.R) : NonlinearFn(), A0, cfg, n, dt);
}

Profile parse_profile(const std::string& text, double slow_length) {
    auto trim = [](std::string s) {
        size_t b = s.find_first_not_of(" \t");
        size_t e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string spec = trim(text);
    const size_t open = spec.find('(');
    if (open == std::string::npos || spec.back() != ')')
        throw ParseError("profile must look like name(args), got '" + text + "'");
    const std::string name = trim(spec.substr(0, open));
    std::vector<double> args;
    std::string inner = spec.substr(open + 1, spec.size() - open - 2);
    if (!trim(inner).empty()) {
        std::stringstream ss(inner);
        std::string piece;
        while (std::getline(ss, piece, ',')) {
            try {
                size_t used = 0;
                const double v = std::stod(trim(piece), &used);
                if (used != trim(piece).size()) throw std::invalid_argument(piece);
                args.push_back(v);
            } catch (const std::exception&) {
                throw ParseError("bad profile argument '" + piece + "' in '" + text + "'");
            }
        }
    }

    if (name == "constant") {
        if (args.size() != 1) throw ParseError("constant(c) takes one argument");
        const double c = args[0];
        return [c](const Eigen::VectorXd&) { return Complex(c, 0.0); };
    }
    if (name == "gaussian") {
        if (args.size() != 2) throw ParseError("gaussian(amp, width) takes two arguments");
        const double amp = args[0], width = args[1];
        if (!(width > 0.0)) throw ValidationError("gaussian width must be positive");
        const double center = slow_length / 2.0;
        return [amp, width, center](const Eigen::VectorXd& X) {
            double q = 0.0;
            for (int a = 0; a < X.size(); ++a) {
                const double r = X(a) - center;
                q += r * r;
            }
            return Complex(amp * std::exp(-q / (2.0 * width * width)), 0.0);
        };
    }
    if (name == "cospack") {
        if (args.size() != 2) throw ParseError("cospack(amp, q) takes two arguments");
        const double amp = args[0], q = args[1];
        const double cycles = q * slow_length / (2.0 * kPi);
        if (std::abs(cycles - std::round(cycles)) > 1e-9 * std::max(1.0, std::abs(cycles)))
            throw ValidationError("cospack frequency " + std::to_string(q) +
                                  " is not periodic on the slow box");
        return [amp, q](const Eigen::VectorXd& X) { return Complex(amp * std::cos(q * X(0)), 0.0); };
    }
    throw ParseError("unknown profile '" + name + "'");
}

double boundary_tail(const Profile& v, double slow_length, int D) {
    if (D < 1) throw ValidationError("boundary tail needs D >= 1");
    const int samples = 33;
    double worst = 0.0;
    Eigen::VectorXd X(D);
    // Each face fixes one coordinate at 0 and sweeps the others.
    for (int face = 0; face < D; ++face) {
        std::vector<int> idx(D, 0);
        const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(std::pow(samples, D - 1));
        for (std::ptrdiff_t it = 0; it < total; ++it) {
            int pos = 0;
            for (int a = 0; a < D; ++a) {
                if (a == face) {
                    X(a) = 0.0;
                } else {
                    X(a) = slow_length * idx[pos] / samples;
                    ++pos;
                }
            }
            worst = std::max(worst, std::abs(v(X)));
            for (int a = D - 2; a >= 0; --a) {
                if (++idx[a] < samples) break;
                idx[a] = 0;
            }
        }
    }
    return worst;
}

SpectralField envelope_field(const std::vector<Profile>& v, const Grid& slow, double eta) {
    if (v.empty()) throw ValidationError("need at least one envelope profile");
    if (!(eta > 0.0)) throw ValidationError("eta must be positive");
    SpectralField A = make_field(slow, static_cast<int>(v.size()));
    const int D = slow.dims();
    std::vector<int> idx(D, 0);
    Eigen::VectorXd X(D);
    for (std::ptrdiff_t flat = 0; flat < slow.size(); ++flat) {
        for (int a = 0; a < D; ++a) X(a) = eta * slow.coord(a, idx[a]);
        for (size_t n = 0; n < v.size(); ++n) A.comps[n](flat) = v[n](X);
        for (int a = D - 1; a >= 0; --a) {
            if (++idx[a] < slow.points[a]) break;
            idx[a] = 0;
        }
    }
    return A;
}

namespace {

struct CarrierSet {
    std::vector<int> js;
    std::vector<const Eigen::VectorXcd*> ws;
    bool symmetric = false;
};

SpectralField reconstruct_core(const SpectralField& A, const CarrierSet& cset, double omega,
                               const Eigen::VectorXd& k, double t, const Grid& fast) {
    if (A.fourier) throw ValidationError("reconstruction expects a physical envelope");
    if (A.components() != static_cast<int>(cset.js.size()))
        throw DimensionMismatch("envelope component count does not match carrier count");
    const int D = A.grid.dims();
    if (D > fast.dims() || A.grid != slow_grid(fast, D))
        throw GridMismatch("envelope grid is not the leading subgrid of the target grid");
    if (k.size() != fast.dims()) throw DimensionMismatch("carrier vector does not match grid dimension");

    const int m = static_cast<int>(cset.ws[0]->size());
    SpectralField out = make_field(fast, m);
    const std::ptrdiff_t suffix = fast.size() / A.grid.size();
    const int d = fast.dims();
    std::vector<int> idx(d, 0);
    for (std::ptrdiff_t flat = 0; flat < fast.size(); ++flat) {
        double kx = 0.0;
        for (int a = 0; a < d; ++a)
            if (k(a) != 0.0) kx += k(a) * fast.coord(a, idx[a]);
        const std::ptrdiff_t slow_flat = flat / suffix;
        for (size_t n = 0; n < cset.js.size(); ++n) {
            const double angle = cset.js[n] * (omega * t + kx);
            const Complex z = A.comps[n](slow_flat) * std::exp(Complex(0.0, angle));
            const Eigen::VectorXcd& w = *cset.ws[n];
            for (int c = 0; c < m; ++c) {
                out.comps[c](flat) += z * w(c);
                if (cset.symmetric) out.comps[c](flat) += std::conj(z * w(c));
            }
        }
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < fast.points[a]) break;
            idx[a] = 0;
        }
    }
    return out;
}

CarrierSet carriers_of(const CriticalStructure& cs, bool symmetric) {
    CarrierSet set;
    set.symmetric = symmetric;
    if (symmetric && !cs.symmetric_pairing)
        throw PreconditionFailure("symmetric synthesis needs the conjugate carrier pairing");
    const size_t count = symmetric ? static_cast<size_t>(cs.n_pairs) : cs.modes.size();
    for (size_t n = 0; n < count; ++n) {
        set.js.push_back(cs.modes[n].j);
        set.ws.push_back(&cs.modes[n].w);
    }
    return set;
}

CarrierSet carriers_of(const AmplitudeSystem& sys) {
    CarrierSet set;
    set.symmetric = sys.symmetric;
    for (int n = 0; n < sys.n_comps; ++n) {
        set.js.push_back(sys.j[n]);
        set.ws.push_back(&sys.w[n]);
    }
    return set;
}

void check_carrier_periodic(const Eigen::VectorXd& k, const Grid& grid) {
    for (int a = 0; a < grid.dims(); ++a) {
        const double cycles = k(a) * grid.lengths[a] / (2.0 * kPi);
        if (std::abs(cycles - std::round(cycles)) > 1e-9 * std::max(1.0, std::abs(cycles)))
            throw CarrierNotPeriodic("carrier wavenumber " + std::to_string(k(a)) + " on axis " +
                                     std::to_string(a + 1) + " does not fit box length " +
                                     std::to_string(grid.lengths[a]));
    }
}

} // namespace

SpectralField synthesize_initial(const std::vector<Profile>& v, const CriticalStructure& cs,
                                 const Grid& grid, double eta, bool symmetric) {
    if (grid.dims() != cs.k.size())
        throw DimensionMismatch("grid dimension does not match the carrier vector");
    check_carrier_periodic(cs.k, grid);
    const CarrierSet cset = carriers_of(cs, symmetric);
    if (v.size() != cset.js.size())
        throw DimensionMismatch("profile count does not match carrier count");
    const SpectralField A = envelope_field(v, slow_grid(grid, cs.D), eta);
    return reconstruct_core(A, cset, cs.omega, cs.k, 0.0, grid);
}

SpectralField reconstruct(const SpectralField& A, const CriticalStructure& cs, double t,
                          const Grid& fast, bool symmetric) {
    return reconstruct_core(A, carriers_of(cs, symmetric), cs.omega, cs.k, t, fast);
}

SpectralField reconstruct(const SpectralField& A, const AmplitudeSystem& sys, double t,
                          const Grid& fast) {
    return reconstruct_core(A, carriers_of(sys), sys.omega, sys.k, t, fast);
}

double sup_error(const SpectralField& u, const SpectralField& v, int r) {
    if (u.grid != v.grid) throw GridMismatch("fields live on different grids");
    if (u.components() != v.components())
        throw DimensionMismatch("fields have different component counts");
    if (u.fourier || v.fourier) throw ValidationError("sup_error expects physical fields");
    if (r != 0 && r != 1) throw ValidationError("sup_error supports r = 0 or r = 1");

    double worst = 0.0;
    for (int c = 0; c < u.components(); ++c)
        worst = std::max(worst, (u.comps[c] - v.comps[c]).cwiseAbs().maxCoeff());
    if (r == 0) return worst;

    const Grid& g = u.grid;
    FourierTransform fft(g);
    const int d = g.dims();
    std::vector<Eigen::VectorXcd> diff_hat(u.components());
    for (int c = 0; c < u.components(); ++c) {
        diff_hat[c] = u.comps[c] - v.comps[c];
        fft.forward(diff_hat[c]);
    }
    std::vector<std::ptrdiff_t> suffix(d, 1);
    for (int a = d - 2; a >= 0; --a) suffix[a] = suffix[a + 1] * g.points[a + 1];
    Eigen::VectorXcd deriv(g.size());
    for (int a = 0; a < d; ++a) {
        for (int c = 0; c < u.components(); ++c) {
            for (std::ptrdiff_t i = 0; i < g.size(); ++i) {
                const int ia = static_cast<int>((i / suffix[a]) % g.points[a]);
                deriv(i) = diff_hat[c](i) * Complex(0.0, g.wavenumber(a, ia));
            }
            fft.backward(deriv);
            worst = std::max(worst, deriv.cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

} // namespace ampl
