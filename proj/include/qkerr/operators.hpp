#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qkerr/hilbert.hpp"

namespace qkerr {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

constexpr double two_pi = 6.283185307179586476925286766559;

// ---------------------------------------------------------------------------
// Factor matrices (single-mode / qutrit building blocks)
// ---------------------------------------------------------------------------

// Dense Kronecker product, (A (x) B)[(i*rowsB+k),(j*colsB+l)] = A(i,j)*B(k,l).
inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Bosonic annihilation operator on a dim-level Fock ladder, <n-1|a|n> = sqrt(n).
inline Mat annihilation_op(int dim) {
    if (dim < 2) throw std::invalid_argument("annihilation_op: dim must be at least 2");
    Mat a = Mat::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

inline Mat creation_op(int dim) { return annihilation_op(dim).adjoint(); }

inline Mat number_op(int dim) {
    Mat n = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) n(i, i) = double(i);
    return n;
}

inline Mat identity_op(int dim) { return Mat::Identity(dim, dim); }

// |row><col| on the qutrit, e.g. qutrit_op(Level::e, Level::g) is sigma+_eg.
inline Mat qutrit_op(Level row, Level col) {
    Mat s = Mat::Zero(3, 3);
    s(int(row), int(col)) = 1.0;
    return s;
}

inline Mat qutrit_op(char row, char col) {
    return qutrit_op(level_from_char(row), level_from_char(col));
}

inline Mat qutrit_projector(Level j) { return qutrit_op(j, j); }

// ---------------------------------------------------------------------------
// QOperator
// ---------------------------------------------------------------------------

// One product term coeff * (Q (x) A (x) B) of a structured operator.
struct ProductTerm {
    Cplx coeff{1.0, 0.0};
    Mat q;  // 3x3
    Mat a;  // dim_a x dim_a
    Mat b;  // dim_b x dim_b
};

namespace detail {

struct CooEntry {
    int r, c;
    Cplx v;
};

// Nonzero entries of coeff * (Q (x) A (x) B), enumerated factor by factor.
inline std::vector<CooEntry> term_entries(const HilbertSpace& hs, const ProductTerm& t) {
    auto nonzeros = [](const Mat& m) {
        std::vector<CooEntry> nz;
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                if (m(i, j) != 0.0) nz.push_back({int(i), int(j), m(i, j)});
        return nz;
    };
    const auto nq = nonzeros(t.q), na = nonzeros(t.a), nb = nonzeros(t.b);
    std::vector<CooEntry> out;
    out.reserve(nq.size() * na.size() * nb.size());
    for (const auto& eq : nq)
        for (const auto& ea : na)
            for (const auto& eb : nb)
                out.push_back({hs.index(eq.r, ea.r, eb.r), hs.index(eq.c, ea.c, eb.c),
                               t.coeff * eq.v * ea.v * eb.v});
    return out;
}

// out += scale * S * x, column by column. Columns of x/out are contiguous.
inline void acc_sparse_left(const std::vector<CooEntry>& coo, Cplx scale, const Mat& x, Mat& out,
                            std::vector<CooEntry>& scratch) {
    scratch.resize(coo.size());
    for (size_t k = 0; k < coo.size(); ++k) scratch[k] = {coo[k].r, coo[k].c, scale * coo[k].v};
    const Eigen::Index n = x.cols();
    for (Eigen::Index col = 0; col < n; ++col) {
        const Cplx* xc = x.data() + col * x.rows();
        Cplx* oc = out.data() + col * out.rows();
        for (const auto& e : scratch) oc[e.r] += e.v * xc[e.c];
    }
}

// out += scale * x * S; (x*S).col(j) += S(i,j) * x.col(i).
inline void acc_sparse_right(const std::vector<CooEntry>& coo, Cplx scale, const Mat& x, Mat& out) {
    const Eigen::Index rows = x.rows();
    for (const auto& e : coo) {
        const Cplx v = scale * e.v;
        Cplx* oc = out.data() + Eigen::Index(e.c) * rows;
        const Cplx* xc = x.data() + Eigen::Index(e.r) * rows;
        for (Eigen::Index i = 0; i < rows; ++i) oc[i] += v * xc[i];
    }
}

}  // namespace detail

// Operator on the composite space. The default representation is a structured
// sum of tensor-factor terms whose application never materializes the dense
// total matrix; a dense matrix representation is also supported and the two
// are interconvertible (the dense form is the oracle in tests).
class QOperator {
  public:
    QOperator() = default;

    static QOperator from_terms(const HilbertSpace& hs, std::vector<ProductTerm> terms,
                                bool hermitian = false) {
        QOperator op;
        op.space_ = hs;
        op.terms_ = std::move(terms);
        op.hermitian_ = hermitian;
        for (const auto& t : op.terms_) {
            if (t.q.rows() != 3 || t.q.cols() != 3 || t.a.rows() != hs.dim_a ||
                t.a.cols() != hs.dim_a || t.b.rows() != hs.dim_b || t.b.cols() != hs.dim_b)
                throw std::invalid_argument("QOperator: factor dimensions do not match the space");
            op.coo_.push_back(detail::term_entries(hs, t));
        }
        return op;
    }

    static QOperator from_dense(const HilbertSpace& hs, Mat m, bool hermitian = false) {
        if (m.rows() != hs.total() || m.cols() != hs.total())
            throw std::invalid_argument("QOperator: dense matrix does not match the space");
        QOperator op;
        op.space_ = hs;
        op.dense_ = std::move(m);
        op.hermitian_ = hermitian;
        return op;
    }

    static QOperator identity(const HilbertSpace& hs) {
        return from_terms(hs, {{1.0, identity_op(3), identity_op(hs.dim_a), identity_op(hs.dim_b)}},
                          true);
    }

    const HilbertSpace& space() const { return space_; }
    bool structured() const { return dense_ == std::nullopt; }
    bool hermitian_flag() const { return hermitian_; }
    const std::vector<ProductTerm>& terms() const { return terms_; }

    Mat to_dense() const {
        if (dense_) return *dense_;
        Mat out = Mat::Zero(space_.total(), space_.total());
        for (const auto& t : terms_) out += t.coeff * kron(t.q, kron(t.a, t.b));
        return out;
    }

    // Verifies the hermiticity flag by explicit conjugate-transpose comparison.
    double hermiticity_deviation() const {
        const Mat d = to_dense();
        return (d - d.adjoint()).cwiseAbs().maxCoeff();
    }

    // out += scale * Op * x  (x is a state vector or a density matrix).
    void accumulate_left(Cplx scale, const Mat& x, Mat& out) const {
        check_dims(x);
        if (dense_) {
            out.noalias() += scale * (*dense_ * x);
            return;
        }
        std::vector<detail::CooEntry> scratch;
        for (const auto& coo : coo_) detail::acc_sparse_left(coo, scale, x, out, scratch);
    }

    // out += scale * x * Op.
    void accumulate_right(Cplx scale, const Mat& x, Mat& out) const {
        if (x.cols() != space_.total()) throw std::invalid_argument("QOperator: space mismatch");
        if (dense_) {
            out.noalias() += scale * (x * *dense_);
            return;
        }
        for (const auto& coo : coo_) detail::acc_sparse_right(coo, scale, x, out);
    }

    Vec apply(const Vec& psi) const {
        check_dims(psi);
        Mat out = Mat::Zero(psi.size(), 1);
        accumulate_left(1.0, psi, out);
        return out.col(0);
    }

    Mat apply_left(const Mat& rho) const {
        Mat out = Mat::Zero(rho.rows(), rho.cols());
        accumulate_left(1.0, rho, out);
        return out;
    }

    Mat apply_right(const Mat& rho) const {
        Mat out = Mat::Zero(rho.rows(), rho.cols());
        accumulate_right(1.0, rho, out);
        return out;
    }

    QOperator adjoint() const {
        if (dense_) return from_dense(space_, dense_->adjoint(), hermitian_);
        std::vector<ProductTerm> terms;
        terms.reserve(terms_.size());
        for (const auto& t : terms_)
            terms.push_back({std::conj(t.coeff), t.q.adjoint(), t.a.adjoint(), t.b.adjoint()});
        return from_terms(space_, std::move(terms), hermitian_);
    }

    QOperator scaled(Cplx factor) const {
        if (dense_) return from_dense(space_, factor * *dense_, false);
        std::vector<ProductTerm> terms = terms_;
        for (auto& t : terms) t.coeff *= factor;
        return from_terms(space_, std::move(terms), false);
    }

    // Structured product; term count multiplies, which is fine for the short
    // sums used here (collapse-operator products and the like).
    QOperator operator*(const QOperator& rhs) const {
        if (!(space_ == rhs.space_)) throw std::invalid_argument("QOperator: space mismatch");
        if (dense_ || rhs.dense_) return from_dense(space_, to_dense() * rhs.to_dense(), false);
        std::vector<ProductTerm> terms;
        terms.reserve(terms_.size() * rhs.terms_.size());
        for (const auto& l : terms_)
            for (const auto& r : rhs.terms_)
                terms.push_back({l.coeff * r.coeff, l.q * r.q, l.a * r.a, l.b * r.b});
        return from_terms(space_, std::move(terms), false);
    }

    // Flattened nonzero entries, one list per term.
    const std::vector<std::vector<detail::CooEntry>>& term_entries() const { return coo_; }

  private:
    void check_dims(const Mat& x) const {
        if (x.rows() != space_.total()) throw std::invalid_argument("QOperator: space mismatch");
    }

    HilbertSpace space_;
    std::vector<ProductTerm> terms_;
    std::vector<std::vector<detail::CooEntry>> coo_;
    std::optional<Mat> dense_;
    bool hermitian_ = false;
};

}  // namespace qkerr
