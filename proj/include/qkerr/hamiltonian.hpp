#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qkerr/device.hpp"
#include "qkerr/operators.hpp"

namespace qkerr {

// The Hamiltonian hierarchy: the full interaction-picture model, the same
// model with inter-resonator crosstalk, the two-step adiabatic-elimination
// effective forms, the ground-manifold reduction, the bare cross-Kerr term,
// and a time-independent rotating-frame equivalent of the full model.
enum class HamiltonianKind {
    Full,
    FullCrosstalk,
    Effective3,
    Effective4,
    GroundEffective,
    CrossKerr,
    RotatingFrame,
};

struct HamiltonianSpec {
    HamiltonianKind kind = HamiltonianKind::FullCrosstalk;
    DeviceParams params;
    HilbertSpace space;
};

// One oscillating piece amp * e^{i omega t} * op of a Hamiltonian. Hermitian
// conjugate partners are stored as separate terms.
struct HamiltonianTerm {
    QOperator op;
    Cplx amp{0.0, 0.0};
    double omega = 0.0;  // angular, rad/s

    Cplx coefficient(double t) const { return amp * std::polar(1.0, omega * t); }
};

class TimeDependentHamiltonian {
  public:
    TimeDependentHamiltonian() = default;
    TimeDependentHamiltonian(HilbertSpace hs, std::vector<HamiltonianTerm> terms)
        : space_(hs), terms_(std::move(terms)) {
        // Gershgorin row sums of the static part bound its eigenvalues, which
        // is the phase scale a fixed-step integrator has to resolve on top of
        // the oscillation frequencies of the time-dependent terms.
        Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(space_.total());
        for (const auto& t : terms_) {
            max_omega_ = std::max(max_omega_, std::abs(t.omega));
            if (t.omega == 0.0) {
                for (const auto& coo : t.op.term_entries())
                    for (const auto& e : coo) row_sums(e.r) += std::abs(t.amp * e.v);
            }
        }
        if (row_sums.size() > 0) max_static_scale_ = row_sums.maxCoeff();
    }

    const HilbertSpace& space() const { return space_; }
    const std::vector<HamiltonianTerm>& terms() const { return terms_; }
    bool time_independent() const { return max_omega_ == 0.0; }

    // Largest angular frequency appearing in the exponents or reachable by
    // the static part; the integrator step must resolve it.
    double max_angular_frequency() const { return std::max(max_omega_, max_static_scale_); }

    QOperator build_at(double t) const {
        std::vector<ProductTerm> pts;
        pts.reserve(terms_.size());
        for (const auto& term : terms_) {
            ProductTerm pt = term.op.terms()[0];
            pt.coeff *= term.coefficient(t);
            pts.push_back(std::move(pt));
        }
        return QOperator::from_terms(space_, std::move(pts), true);
    }

    Mat dense_at(double t) const { return build_at(t).to_dense(); }

    // True when every term is static and diagonal in the product basis, in
    // which case evolution reduces to closed-form phases.
    bool diagonal_static() const {
        if (!time_independent()) return false;
        for (const auto& term : terms_)
            for (const auto& coo : term.op.term_entries())
                for (const auto& e : coo)
                    if (e.r != e.c) return false;
        return true;
    }

    Eigen::VectorXd diagonal_energies() const {
        Eigen::VectorXd en = Eigen::VectorXd::Zero(space_.total());
        for (const auto& term : terms_)
            for (const auto& coo : term.op.term_entries())
                for (const auto& e : coo)
                    if (e.r == e.c) en(e.r) += (term.amp * e.v).real();
        return en;
    }

  private:
    HilbertSpace space_;
    std::vector<HamiltonianTerm> terms_;
    double max_omega_ = 0.0;
    double max_static_scale_ = 0.0;
};

namespace detail {

inline HamiltonianTerm make_term(const HilbertSpace& hs, Cplx amp, double omega, const Mat& q,
                                 const Mat& a, const Mat& b) {
    return {QOperator::from_terms(hs, {{1.0, q, a, b}}), amp, omega};
}

}  // namespace detail

// Diagonal unitary family undoing the rotating frame: the interaction-picture
// propagator factorizes as U_I(t) = V(t) exp(-i H_rot t) V(0)^dagger with
// V(t) = diag(e^{-i f_j t}) and V(0) = 1.
struct RotatingFrame {
    HilbertSpace space;
    Eigen::VectorXd f;  // angular phase rate per basis state

    Vec undo_phases(double t) const {
        Vec ph(f.size());
        for (Eigen::Index i = 0; i < f.size(); ++i) ph(i) = std::polar(1.0, -f(i) * t);
        return ph;
    }

    void undo_state(Vec& psi, double t) const {
        const Vec ph = undo_phases(t);
        psi.array() *= ph.array();
    }

    void undo_density(Mat& rho, double t) const {
        const Vec ph = undo_phases(t);
        rho = ph.asDiagonal() * rho * ph.conjugate().asDiagonal();
    }
};

std::pair<TimeDependentHamiltonian, RotatingFrame> build_rotating_frame(const HamiltonianSpec&);

inline TimeDependentHamiltonian hamiltonian_terms(const HamiltonianSpec& spec) {
    const DeviceParams& p = spec.params;
    const HilbertSpace& hs = spec.space;
    p.validate();

    const Mat i3 = identity_op(3), ia = identity_op(hs.dim_a), ib = identity_op(hs.dim_b);
    const Mat a = annihilation_op(hs.dim_a), ad = creation_op(hs.dim_a);
    const Mat b = annihilation_op(hs.dim_b), bd = creation_op(hs.dim_b);
    const Mat na = number_op(hs.dim_a), nb = number_op(hs.dim_b);
    const Mat pg = qutrit_projector(Level::g), pe = qutrit_projector(Level::e),
              pf = qutrit_projector(Level::f);

    std::vector<HamiltonianTerm> terms;
    auto add = [&](Cplx amp, double omega, const Mat& q, const Mat& fa, const Mat& fb) {
        terms.push_back(detail::make_term(hs, amp, omega, q, fa, fb));
    };

    switch (spec.kind) {
        case HamiltonianKind::FullCrosstalk:
            add(p.g_ab_rad(), p.delta_ab_rad(), i3, a, bd);
            add(p.g_ab_rad(), -p.delta_ab_rad(), i3, ad, b);
            [[fallthrough]];
        case HamiltonianKind::Full:
            add(p.g_rad(), p.delta_a_rad(), qutrit_op(Level::e, Level::g), a, ib);
            add(p.g_rad(), -p.delta_a_rad(), qutrit_op(Level::g, Level::e), ad, ib);
            add(p.mu_rad(), p.delta_b_rad(), qutrit_op(Level::f, Level::e), ia, b);
            add(p.mu_rad(), -p.delta_b_rad(), qutrit_op(Level::e, Level::f), ia, bd);
            break;
        case HamiltonianKind::Effective3: {
            const DerivedParams d = derive(p);
            const double sa = p.g_rad() * p.g_rad() / p.delta_a_rad();
            const double sb = p.mu_rad() * p.mu_rad() / p.delta_b_rad();
            add(-sa, 0.0, pg, ad * a, ib);
            add(sa, 0.0, pe, a * ad, ib);
            add(-sb, 0.0, pe, ia, bd * b);
            add(sb, 0.0, pf, ia, b * bd);
            add(d.lambda_rad(), -d.delta_rad(), qutrit_op(Level::g, Level::f), ad, bd);
            add(d.lambda_rad(), d.delta_rad(), qutrit_op(Level::f, Level::g), a, b);
            break;
        }
        case HamiltonianKind::Effective4: {
            const DerivedParams d = derive(p);
            const double sa = p.g_rad() * p.g_rad() / p.delta_a_rad();
            const double sb = p.mu_rad() * p.mu_rad() / p.delta_b_rad();
            add(-sa, 0.0, pg, ad * a, ib);
            add(sa, 0.0, pe, a * ad, ib);
            add(-sb, 0.0, pe, ia, bd * b);
            add(sb, 0.0, pf, ia, b * bd);
            add(d.chi_rad(), 0.0, pf, a * ad, b * bd);
            add(-d.chi_rad(), 0.0, pg, ad * a, bd * b);
            break;
        }
        case HamiltonianKind::GroundEffective: {
            const DerivedParams d = derive(p);
            add(-p.g_rad() * p.g_rad() / p.delta_a_rad(), 0.0, pg, na, ib);
            add(-d.chi_rad(), 0.0, pg, na, nb);
            break;
        }
        case HamiltonianKind::CrossKerr: {
            const DerivedParams d = derive(p);
            add(-d.chi_rad(), 0.0, pg, na, nb);
            break;
        }
        case HamiltonianKind::RotatingFrame: {
            HamiltonianSpec full = spec;
            full.kind = HamiltonianKind::FullCrosstalk;
            return build_rotating_frame(full).first;
        }
    }
    return TimeDependentHamiltonian(hs, std::move(terms));
}

inline QOperator build_hamiltonian(const HamiltonianSpec& spec, double t) {
    return hamiltonian_terms(spec).build_at(t);
}

// Time-independent equivalent of the full (optionally crosstalk-augmented)
// interaction-picture Hamiltonian. The frame generator is diagonal in the
// product basis, so every Lindblad channel used here is frame-invariant.
inline std::pair<TimeDependentHamiltonian, RotatingFrame> build_rotating_frame(
    const HamiltonianSpec& spec) {
    if (spec.kind != HamiltonianKind::Full && spec.kind != HamiltonianKind::FullCrosstalk)
        throw std::invalid_argument("build_rotating_frame: only the full model has one");
    const DeviceParams& p = spec.params;
    const HilbertSpace& hs = spec.space;
    p.validate();

    // f(q, n_a, n_b) = c_q + u n_a + v n_b chosen so all exponents cancel.
    // u is split symmetrically across the two photon ladders.
    const double u = p.delta_ab_rad() / 2.0;
    const double v = u - p.delta_ab_rad();
    const double c_e = u - p.delta_a_rad();
    const double c_f = c_e + v - p.delta_b_rad();

    const Mat i3 = identity_op(3), ia = identity_op(hs.dim_a), ib = identity_op(hs.dim_b);
    const Mat a = annihilation_op(hs.dim_a), ad = creation_op(hs.dim_a);
    const Mat b = annihilation_op(hs.dim_b), bd = creation_op(hs.dim_b);

    std::vector<HamiltonianTerm> terms;
    auto add = [&](Cplx amp, const Mat& q, const Mat& fa, const Mat& fb) {
        if (amp != 0.0) terms.push_back(detail::make_term(hs, amp, 0.0, q, fa, fb));
    };
    add(p.g_rad(), qutrit_op(Level::e, Level::g), a, ib);
    add(p.g_rad(), qutrit_op(Level::g, Level::e), ad, ib);
    add(p.mu_rad(), qutrit_op(Level::f, Level::e), ia, b);
    add(p.mu_rad(), qutrit_op(Level::e, Level::f), ia, bd);
    if (spec.kind == HamiltonianKind::FullCrosstalk) {
        add(p.g_ab_rad(), i3, a, bd);
        add(p.g_ab_rad(), i3, ad, b);
    }
    add(-c_e, qutrit_projector(Level::e), ia, ib);
    add(-c_f, qutrit_projector(Level::f), ia, ib);
    add(-u, i3, number_op(hs.dim_a), ib);
    add(-v, i3, ia, number_op(hs.dim_b));

    RotatingFrame frame;
    frame.space = hs;
    frame.f.resize(hs.total());
    const double c_q[3] = {0.0, c_e, c_f};
    for (int q = 0; q < 3; ++q)
        for (int na = 0; na < hs.dim_a; ++na)
            for (int nb = 0; nb < hs.dim_b; ++nb)
                frame.f(hs.index(q, na, nb)) = c_q[q] + u * na + v * nb;

    return {TimeDependentHamiltonian(hs, std::move(terms)), std::move(frame)};
}

}  // namespace qkerr
