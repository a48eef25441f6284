#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qkerr/operators.hpp"

namespace qkerr {

// ---------------------------------------------------------------------------
// QState: pure vector or density matrix on the composite space
// ---------------------------------------------------------------------------

class QState {
  public:
    enum class Kind { Pure, Density };

    static QState pure(const HilbertSpace& hs, Vec psi, bool renormalize = false) {
        if (psi.size() != hs.total()) throw std::invalid_argument("QState: dimension mismatch");
        const double n2 = psi.squaredNorm();
        if (renormalize) {
            if (n2 <= 0.0) throw std::invalid_argument("QState: null vector");
            psi /= std::sqrt(n2);
        } else if (std::abs(n2 - 1.0) > 1e-10) {
            throw std::invalid_argument("QState: pure state norm deviates beyond 1e-10");
        }
        QState s;
        s.space_ = hs;
        s.kind_ = Kind::Pure;
        s.psi_ = std::move(psi);
        return s;
    }

    // Validated density-matrix constructor: trace 1 +- 1e-10, Hermitian to
    // 1e-12, smallest eigenvalue >= -1e-8.
    static QState density(const HilbertSpace& hs, Mat rho) {
        if (rho.rows() != hs.total() || rho.cols() != hs.total())
            throw std::invalid_argument("QState: dimension mismatch");
        if (std::abs(rho.trace().real() - 1.0) > 1e-10 || std::abs(rho.trace().imag()) > 1e-10)
            throw std::invalid_argument("QState: density trace deviates beyond 1e-10");
        if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("QState: density matrix not Hermitian to 1e-12");
        Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-8)
            throw std::invalid_argument("QState: density matrix not positive (eig < -1e-8)");
        return density_unchecked(hs, std::move(rho));
    }

    // For integrator output whose physicality is certified by the run monitors
    // (positivity tolerance there is -1e-6, looser than the constructor's).
    static QState density_unchecked(const HilbertSpace& hs, Mat rho) {
        QState s;
        s.space_ = hs;
        s.kind_ = Kind::Density;
        s.rho_ = std::move(rho);
        return s;
    }

    const HilbertSpace& space() const { return space_; }
    Kind kind() const { return kind_; }
    bool is_pure() const { return kind_ == Kind::Pure; }

    const Vec& vector() const {
        if (kind_ != Kind::Pure) throw std::logic_error("QState: not a pure state");
        return psi_;
    }

    const Mat& matrix() const {
        if (kind_ != Kind::Density) throw std::logic_error("QState: not a density matrix");
        return rho_;
    }

    QState to_density() const {
        if (kind_ == Kind::Density) return *this;
        return density_unchecked(space_, psi_ * psi_.adjoint());
    }

  private:
    HilbertSpace space_;
    Kind kind_ = Kind::Pure;
    Vec psi_;
    Mat rho_;
};

inline Cplx expectation(const QOperator& op, const QState& s) {
    if (!(op.space() == s.space())) throw std::invalid_argument("expectation: space mismatch");
    if (s.is_pure()) {
        return s.vector().adjoint() * op.apply(s.vector());
    }
    // Tr(O rho) accumulated entrywise from the structured representation.
    if (op.structured()) {
        Cplx tr = 0.0;
        for (const auto& coo : op.term_entries())
            for (const auto& e : coo) tr += e.v * s.matrix()(e.c, e.r);
        return tr;
    }
    return (op.to_dense() * s.matrix()).trace();
}

// ---------------------------------------------------------------------------
// Single-mode constructors
// ---------------------------------------------------------------------------

// One truncated resonator factor plus the Fock weight lost to truncation.
struct ModeState {
    Vec amps;
    double truncation_leakage = 0.0;
};

inline ModeState fock_mode(int dim, int n) {
    if (n < 0 || n >= dim) throw std::invalid_argument("fock_mode: level outside truncation");
    Vec v = Vec::Zero(dim);
    v(n) = 1.0;
    return {v, 0.0};
}

struct CoherentSpec {
    Cplx alpha;
    int dim;
};

// Truncated coherent state, c_n proportional to alpha^n/sqrt(n!), renormalized.
// Leakage 1 - sum_{n<dim} e^{-|alpha|^2} |alpha|^{2n}/n! is reported.
inline ModeState coherent_state(const CoherentSpec& spec) {
    if (spec.dim < 2) throw std::invalid_argument("coherent_state: dim must be at least 2");
    Vec c(spec.dim);
    c(0) = 1.0;
    for (int n = 1; n < spec.dim; ++n) c(n) = c(n - 1) * spec.alpha / std::sqrt(double(n));
    const double a2 = std::norm(spec.alpha);
    double kept = 0.0, term = std::exp(-a2);
    for (int n = 0; n < spec.dim; ++n) {
        kept += term;
        term *= a2 / double(n + 1);
    }
    c /= c.norm();
    return {c, 1.0 - kept};
}

enum class Parity { Even, Odd };

// Even/odd coherent superposition proportional to |alpha> +- |-alpha>. The
// amplitudes of the opposite parity are exactly zero, not merely small.
inline ModeState cat_state(Cplx alpha, Parity parity, int dim) {
    if (dim < 2) throw std::invalid_argument("cat_state: dim must be at least 2");
    if (parity == Parity::Odd && alpha == 0.0)
        throw std::invalid_argument("cat_state: odd cat with alpha = 0 is the null vector");
    const int keep = parity == Parity::Even ? 0 : 1;
    Vec c = Vec::Zero(dim);
    Cplx amp = 1.0;
    for (int n = 0; n < dim; ++n) {
        if (n % 2 == keep) c(n) = amp;
        if (n + 1 < dim) amp *= alpha / std::sqrt(double(n + 1));
    }
    const double norm = c.norm();
    if (norm == 0.0) throw std::invalid_argument("cat_state: null vector after truncation");
    c /= norm;
    // Kept fraction of the exact parity series sum_{n parity} |alpha|^{2n}/n!.
    const double a2 = std::norm(alpha);
    const double total = parity == Parity::Even ? std::cosh(a2) : std::sinh(a2);
    double kept = 0.0, term = 1.0;
    for (int n = 0; n < dim; ++n) {
        if (n % 2 == keep) kept += term;
        term *= a2 / double(n + 1);
    }
    const double leak = total > 0.0 ? 1.0 - kept / total : 0.0;
    return {c, leak};
}

// ---------------------------------------------------------------------------
// Composite-state constructors
// ---------------------------------------------------------------------------

inline Vec qutrit_vec(Level l) {
    Vec v = Vec::Zero(3);
    v(int(l)) = 1.0;
    return v;
}

inline QState tensor_state(const Vec& qutrit, const ModeState& a, const ModeState& b,
                           const HilbertSpace& hs) {
    if (qutrit.size() != 3 || a.amps.size() != hs.dim_a || b.amps.size() != hs.dim_b)
        throw std::invalid_argument("tensor_state: factor dimensions do not match the space");
    Vec psi(hs.total());
    for (int q = 0; q < 3; ++q)
        for (int na = 0; na < hs.dim_a; ++na)
            for (int nb = 0; nb < hs.dim_b; ++nb)
                psi(hs.index(q, na, nb)) = qutrit(q) * a.amps(na) * b.amps(nb);
    return QState::pure(hs, std::move(psi), true);
}

// Controlled-phase truth-table output for product input
// (alpha|0>+beta|1>)_a (gamma|0>+delta|1>)_b with the coupler in |g>:
// alpha*gamma|00> + alpha*delta|01> + beta*gamma|10> - beta*delta|11>.
inline QState ideal_gate_output(Cplx alpha, Cplx beta, Cplx gamma, Cplx delta,
                                const HilbertSpace& hs) {
    if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > 1e-10 ||
        std::abs(std::norm(gamma) + std::norm(delta) - 1.0) > 1e-10)
        throw std::invalid_argument("ideal_gate_output: input amplitudes not normalized");
    Vec psi = Vec::Zero(hs.total());
    const int g = int(Level::g);
    psi(hs.index(g, 0, 0)) = alpha * gamma;
    psi(hs.index(g, 0, 1)) = alpha * delta;
    psi(hs.index(g, 1, 0)) = beta * gamma;
    psi(hs.index(g, 1, 1)) = -beta * delta;
    return QState::pure(hs, std::move(psi));
}

// Entangled-coherent-state target
//   (1/2)(|b_a>|b_b> + |-b_a>|b_b> + |b_a>|-b_b> - |-b_a>|-b_b>) (x) |g>
// with b_a = alpha_a * exp(i g^2 pi / (chi delta_a)) and b_b = beta_b. The
// four-term sum is not orthogonal, so it is normalized numerically after
// truncation. chi, g, delta_a may be in any one consistent frequency unit.
// m_truncation > 0 keeps only Fock levels n <= m-1 of each coherent factor.
inline QState ideal_cat_output(Cplx alpha_a, Cplx beta_b, double chi, double g, double delta_a,
                               const HilbertSpace& hs, int m_truncation = 0) {
    if (chi <= 0.0) throw std::invalid_argument("ideal_cat_output: chi must be positive");
    const double pi = two_pi / 2.0;
    const Cplx ba = alpha_a * std::exp(Cplx(0.0, g * g * pi / (chi * delta_a)));

    auto trunc = [&](Cplx alpha, int dim) {
        Vec c = coherent_state({alpha, dim}).amps;
        if (m_truncation > 0 && m_truncation < dim) {
            for (int n = m_truncation; n < dim; ++n) c(n) = 0.0;
        }
        return c;
    };
    const Vec pa = trunc(ba, hs.dim_a), ma = trunc(-ba, hs.dim_a);
    const Vec pb = trunc(beta_b, hs.dim_b), mb = trunc(-beta_b, hs.dim_b);

    Vec joint = Vec::Zero(hs.dim_a * hs.dim_b);
    for (int na = 0; na < hs.dim_a; ++na)
        for (int nb = 0; nb < hs.dim_b; ++nb)
            joint(na * hs.dim_b + nb) = 0.5 * (pa(na) * pb(nb) + ma(na) * pb(nb) +
                                               pa(na) * mb(nb) - ma(na) * mb(nb));
    Vec psi = Vec::Zero(hs.total());
    const int g0 = int(Level::g);
    for (int na = 0; na < hs.dim_a; ++na)
        for (int nb = 0; nb < hs.dim_b; ++nb)
            psi(hs.index(g0, na, nb)) = joint(na * hs.dim_b + nb);
    return QState::pure(hs, std::move(psi), true);
}

}  // namespace qkerr
