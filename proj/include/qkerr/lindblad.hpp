#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qkerr/hamiltonian.hpp"
#include "qkerr/operators.hpp"

namespace qkerr {

struct CollapseChannel {
    QOperator op;
    double rate_per_s = 0.0;
    std::string name;
};

// Master-equation model: Hamiltonian terms, collapse channels with the
// standard dissipator L[A]rho = A rho A+ - {A+A, rho}/2, and pure-dephasing
// channels applied in the printed half-weight form
// gamma (s rho s - s rho/2 - rho s/2) for diagonal s.
//
// The right-hand side works entirely on the structured (per-term sparse)
// representation; no dense Liouvillian or dense Hamiltonian product appears
// anywhere. Evaluation is organized column by column so each output column is
// assembled in cache: -i H rho scatters inside the column, +i rho H and
// rho L+ are axpys from other columns, and the anticommutator plus dephasing
// collapse into one precomputed elementwise weight matrix.
class LindbladModel {
  public:
    LindbladModel(TimeDependentHamiltonian ham, std::vector<CollapseChannel> collapse,
                  std::vector<CollapseChannel> dephasing)
        : ham_(std::move(ham)), collapse_(std::move(collapse)), dephasing_(std::move(dephasing)) {
        compile();
    }

    // Channel set of the device model: photon loss on both resonators, the
    // three qutrit relaxation paths, and dephasing of |e> and |f>.
    static LindbladModel from_spec(const HamiltonianSpec& spec) {
        const HilbertSpace& hs = spec.space;
        const DeviceParams& p = spec.params;
        const Mat ia = identity_op(hs.dim_a), ib = identity_op(hs.dim_b), i3 = identity_op(3);
        auto one = [&](const Mat& q, const Mat& a, const Mat& b) {
            return QOperator::from_terms(hs, {{1.0, q, a, b}});
        };
        std::vector<CollapseChannel> collapse = {
            {one(i3, annihilation_op(hs.dim_a), ib), p.kappa_a_per_s(), "a"},
            {one(i3, ia, annihilation_op(hs.dim_b)), p.kappa_b_per_s(), "b"},
            {one(qutrit_op(Level::g, Level::e), ia, ib), p.gamma_eg_per_s(), "sigma-_eg"},
            {one(qutrit_op(Level::e, Level::f), ia, ib), p.gamma_fe_per_s(), "sigma-_fe"},
            {one(qutrit_op(Level::g, Level::f), ia, ib), p.gamma_fg_per_s(), "sigma-_fg"},
        };
        std::vector<CollapseChannel> dephasing = {
            {one(qutrit_projector(Level::e), ia, ib), p.gamma_phi_e_per_s(), "sigma_ee"},
            {one(qutrit_projector(Level::f), ia, ib), p.gamma_phi_f_per_s(), "sigma_ff"},
        };
        return LindbladModel(hamiltonian_terms(spec), std::move(collapse), std::move(dephasing));
    }

    const TimeDependentHamiltonian& hamiltonian() const { return ham_; }
    const HilbertSpace& space() const { return ham_.space(); }
    const std::vector<CollapseChannel>& collapse_channels() const { return collapse_; }
    const std::vector<CollapseChannel>& dephasing_channels() const { return dephasing_; }

    double max_rate_per_s() const {
        double r = 0.0;
        for (const auto& c : collapse_) r = std::max(r, c.rate_per_s);
        for (const auto& c : dephasing_) r = std::max(r, c.rate_per_s);
        return r;
    }

    struct Workspace {
        std::vector<Cplx> scatter_vals;  // per-call coefficient-scaled H entries
        std::vector<Cplx> coeff_l, coeff_r;
        std::vector<Cplx> jump_col;  // one column of rate * L rho L+
        void ensure(int n, size_t scatter, size_t terms) {
            scatter_vals.resize(scatter);
            coeff_l.resize(terms);
            coeff_r.resize(terms);
            jump_col.resize(n);
        }
    };

    // out = -i[H(t), rho] + sum_k r_k (L rho L+ - {L+L, rho}/2) + dephasing.
    // hook(j) runs right after column j of `out` is complete, while it is hot.
    template <typename Hook>
    void rhs(const Mat& rho, double t, Mat& out, Workspace& ws, Hook&& hook) const {
        const int n = space().total();
        if (rho.rows() != n || rho.cols() != n)
            throw std::invalid_argument("lindblad_rhs: space mismatch");
        ws.ensure(n, scatter_.size(), ham_.terms().size());

        for (size_t m = 0; m < ham_.terms().size(); ++m) {
            const Cplx c = ham_.terms()[m].coefficient(t);
            ws.coeff_l[m] = Cplx(0.0, -1.0) * c;
            ws.coeff_r[m] = Cplx(0.0, 1.0) * c;
        }
        for (size_t k = 0; k < scatter_.size(); ++k)
            ws.scatter_vals[k] = ws.coeff_l[scatter_[k].term] * scatter_[k].v;

        const double* w = weights_.data();
        Cplx* y = ws.jump_col.data();
        for (int j = 0; j < n; ++j) {
            const Cplx* xj = rho.data() + size_t(j) * n;
            Cplx* oj = out.data() + size_t(j) * n;
            const double* wj = w + size_t(j) * n;

            for (int i = 0; i < n; ++i) oj[i] = wj[i] * xj[i];
            for (size_t k = 0; k < scatter_.size(); ++k)
                oj[scatter_[k].r] += ws.scatter_vals[k] * xj[scatter_[k].c];
            for (int32_t k = axpy_offset_[j]; k < axpy_offset_[j + 1]; ++k) {
                const Cplx cv = ws.coeff_r[axpy_[k].term] * axpy_[k].v;
                const Cplx* src = rho.data() + size_t(axpy_[k].r) * n;
                for (int i = 0; i < n; ++i) oj[i] += cv * src[i];
            }
            for (const auto& jump : jumps_) {
                const int32_t lo = jump.row_offset[j], hi = jump.row_offset[j + 1];
                if (lo == hi) continue;
                {
                    const auto& e = jump.row_entries[lo];
                    const Cplx* src = rho.data() + size_t(e.c) * n;
                    for (int i = 0; i < n; ++i) y[i] = e.v * src[i];
                }
                for (int32_t k = lo + 1; k < hi; ++k) {
                    const auto& e = jump.row_entries[k];
                    const Cplx* src = rho.data() + size_t(e.c) * n;
                    for (int i = 0; i < n; ++i) y[i] += e.v * src[i];
                }
                for (const auto& e : jump.scatter) oj[e.r] += e.v * y[e.c];
            }
            hook(j, oj);
        }
    }

    void rhs(const Mat& rho, double t, Mat& out, Workspace& ws) const {
        rhs(rho, t, out, ws, [](int, Cplx*) {});
    }

    // Straightforward evaluation through the generic operator API; the oracle
    // the fast path is tested against.
    Mat rhs_reference(const Mat& rho, double t) const {
        Mat out = Mat::Zero(rho.rows(), rho.cols());
        const QOperator h = ham_.build_at(t);
        h.accumulate_left(Cplx(0.0, -1.0), rho, out);
        h.accumulate_right(Cplx(0.0, 1.0), rho, out);
        for (const auto& ch : collapse_) {
            if (ch.rate_per_s == 0.0) continue;
            const QOperator adj = ch.op.adjoint();
            const Mat t1 = ch.op.apply_left(rho);   // L rho
            out += ch.rate_per_s * t1 * adj.to_dense().eval();
            const Mat ldl = (adj * ch.op).to_dense();
            out -= 0.5 * ch.rate_per_s * (ldl * rho + rho * ldl);
        }
        for (const auto& ch : dephasing_) {
            if (ch.rate_per_s == 0.0) continue;
            const Mat s = ch.op.to_dense();
            out += ch.rate_per_s * (s * rho * s - 0.5 * s * rho - 0.5 * rho * s);
        }
        return out;
    }

  private:
    struct HEntry {
        int32_t r, c, term;
        Cplx v;
    };

    struct CompiledJump {
        std::vector<int32_t> row_offset;            // index by output column j
        std::vector<detail::CooEntry> row_entries;  // (r=j, c=source column, v=rate*conj)
        std::vector<detail::CooEntry> scatter;      // raw L entries
    };

    static std::vector<detail::CooEntry> flatten(const QOperator& op) {
        std::vector<detail::CooEntry> all;
        for (const auto& coo : op.term_entries()) all.insert(all.end(), coo.begin(), coo.end());
        return all;
    }

    void compile() {
        const int n = space().total();
        weights_ = Eigen::MatrixXd::Zero(n, n);

        for (size_t m = 0; m < ham_.terms().size(); ++m) {
            for (const auto& coo : ham_.terms()[m].op.term_entries())
                for (const auto& e : coo) scatter_.push_back({e.r, e.c, int32_t(m), e.v});
        }
        // rho*H column groups: entry (r,c,v) contributes v * rho.col(r) to out.col(c).
        std::vector<std::vector<HEntry>> by_col(n);
        for (const auto& e : scatter_) by_col[e.c].push_back({e.r, e.c, e.term, e.v});
        axpy_offset_.assign(n + 1, 0);
        for (int j = 0; j < n; ++j) {
            axpy_offset_[j + 1] = axpy_offset_[j] + int32_t(by_col[j].size());
            for (const auto& e : by_col[j]) axpy_.push_back(e);
        }

        for (const auto& ch : collapse_) {
            if (ch.rate_per_s == 0.0) continue;
            if (!(ch.op.space() == space()))
                throw std::invalid_argument("LindbladModel: channel on the wrong space");
            const auto entries = flatten(ch.op);

            CompiledJump j;
            j.scatter = entries;
            std::vector<std::vector<detail::CooEntry>> by_row(n);
            for (const auto& e : entries)
                by_row[e.r].push_back({e.r, e.c, ch.rate_per_s * std::conj(e.v)});
            j.row_offset.assign(n + 1, 0);
            for (int r = 0; r < n; ++r) {
                j.row_offset[r + 1] = j.row_offset[r] + int32_t(by_row[r].size());
                for (const auto& e : by_row[r]) j.row_entries.push_back(e);
            }
            jumps_.push_back(std::move(j));

            const Mat ldl = (ch.op.adjoint() * ch.op).to_dense();
            Eigen::VectorXd diag(n);
            for (int i = 0; i < n; ++i) diag(i) = ldl(i, i).real();
            Mat off = ldl;
            off.diagonal().setZero();
            if (off.cwiseAbs().maxCoeff() > 1e-14 * std::max(1.0, diag.cwiseAbs().maxCoeff()))
                throw std::invalid_argument("LindbladModel: L+L is not diagonal for channel " +
                                            ch.name);
            for (int j2 = 0; j2 < n; ++j2)
                for (int i = 0; i < n; ++i)
                    weights_(i, j2) -= 0.5 * ch.rate_per_s * (diag(i) + diag(j2));
        }
        for (const auto& ch : dephasing_) {
            if (ch.rate_per_s == 0.0) continue;
            const Mat d = ch.op.to_dense();
            Mat off = d;
            off.diagonal().setZero();
            if (off.cwiseAbs().maxCoeff() > 0.0)
                throw std::invalid_argument("LindbladModel: dephasing operator must be diagonal");
            Eigen::VectorXd s(n);
            for (int i = 0; i < n; ++i) s(i) = d(i, i).real();
            for (int j2 = 0; j2 < n; ++j2)
                for (int i = 0; i < n; ++i)
                    weights_(i, j2) += ch.rate_per_s * (s(i) * s(j2) - 0.5 * (s(i) + s(j2)));
        }
    }

    TimeDependentHamiltonian ham_;
    std::vector<CollapseChannel> collapse_;
    std::vector<CollapseChannel> dephasing_;

    std::vector<HEntry> scatter_;
    std::vector<HEntry> axpy_;
    std::vector<int32_t> axpy_offset_;
    std::vector<CompiledJump> jumps_;
    Eigen::MatrixXd weights_;
};

// Standalone right-hand-side evaluation (the form integrated by `integrate`).
inline Mat lindblad_rhs(const LindbladModel& model, const Mat& rho, double t) {
    LindbladModel::Workspace ws;
    Mat out(rho.rows(), rho.cols());
    model.rhs(rho, t, out, ws);
    return out;
}

}  // namespace qkerr
