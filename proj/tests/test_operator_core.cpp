#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "qkerr/operators.hpp"
#include "qkerr/states.hpp"

using namespace qkerr;

namespace {

Vec random_state(const HilbertSpace& hs, std::mt19937& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Vec v(hs.total());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Cplx(dist(rng), dist(rng));
    v /= v.norm();
    return v;
}

Mat random_factor(int dim, std::mt19937& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Mat m(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) m(i, j) = Cplx(dist(rng), dist(rng));
    return m;
}

}  // namespace

TEST_CASE("hilbert space indexing is bijective", "[operator-core]") {
    HilbertSpace hs(4, 5);
    REQUIRE(hs.total() == 60);
    std::vector<bool> seen(hs.total(), false);
    for (int q = 0; q < 3; ++q)
        for (int na = 0; na < 4; ++na)
            for (int nb = 0; nb < 5; ++nb) {
                const int i = hs.index(q, na, nb);
                REQUIRE(i >= 0);
                REQUIRE(i < hs.total());
                REQUIRE(!seen[i]);
                seen[i] = true;
                REQUIRE(hs.qutrit_of(i) == q);
                REQUIRE(hs.na_of(i) == na);
                REQUIRE(hs.nb_of(i) == nb);
            }
    REQUIRE_THROWS_AS(HilbertSpace(1, 4), std::invalid_argument);
    REQUIRE_THROWS_AS(HilbertSpace(4, 1), std::invalid_argument);
}

TEST_CASE("kron definition and shapes", "[operator-core]") {
    SECTION("identity case") {
        const Mat k = kron(identity_op(2), identity_op(2));
        REQUIRE((k - identity_op(4)).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("hand-expanded raising example") {
        Mat raise = Mat::Zero(2, 2);
        raise(0, 1) = 1.0;
        const Mat k = kron(raise, identity_op(2));
        Mat expected = Mat::Zero(4, 4);
        expected(0, 2) = 1.0;
        expected(1, 3) = 1.0;
        REQUIRE((k - expected).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("dimension product") {
        std::mt19937 rng(11);
        const Mat k = kron(random_factor(3, rng), random_factor(4, rng));
        REQUIRE(k.rows() == 12);
        REQUIRE(k.cols() == 12);
    }
    SECTION("associativity") {
        std::mt19937 rng(12);
        const Mat a = random_factor(2, rng), b = random_factor(3, rng), c = random_factor(2, rng);
        REQUIRE((kron(kron(a, b), c) - kron(a, kron(b, c))).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("annihilation operator", "[operator-core]") {
    SECTION("two-level action") {
        const Mat a = annihilation_op(2);
        Vec one(2), zero(2);
        one << 0, 1;
        zero << 1, 0;
        REQUIRE(((a * one) - zero).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE((a * zero).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("sqrt(n) rule") {
        const Mat a = annihilation_op(4);
        REQUIRE(a(2, 3).real() == Catch::Approx(std::sqrt(3.0)).epsilon(1e-15));
    }
    SECTION("number operator diagonal") {
        const int dim = 6;
        const Mat n = creation_op(dim) * annihilation_op(dim);
        for (int i = 0; i < dim; ++i) REQUIRE(n(i, i).real() == Catch::Approx(double(i)).margin(1e-14));
    }
    SECTION("truncation artifact of the commutator") {
        const int dim = 5;
        const Mat a = annihilation_op(dim);
        const Mat comm = a * a.adjoint() - a.adjoint() * a;
        for (int i = 0; i < dim - 1; ++i) REQUIRE(comm(i, i).real() == Catch::Approx(1.0).margin(1e-14));
        REQUIRE(comm(dim - 1, dim - 1).real() == Catch::Approx(1.0 - dim).margin(1e-14));
        Mat off = comm;
        off.diagonal().setZero();
        REQUIRE(off.cwiseAbs().maxCoeff() == 0.0);
    }
    REQUIRE_THROWS_AS(annihilation_op(1), std::invalid_argument);
}

TEST_CASE("qutrit transition operators", "[operator-core]") {
    const Mat seg = qutrit_op('e', 'g');
    REQUIRE(seg(1, 0).real() == 1.0);
    REQUIRE(seg.cwiseAbs().sum() == 1.0);

    const Mat sfg_minus = qutrit_op('g', 'f');
    REQUIRE(sfg_minus(0, 2).real() == 1.0);

    const Mat proj = qutrit_op('e', 'g') * qutrit_op('g', 'e');
    REQUIRE((proj - qutrit_projector(Level::e)).cwiseAbs().maxCoeff() == 0.0);

    REQUIRE_THROWS_AS(qutrit_op('x', 'g'), std::invalid_argument);
}

TEST_CASE("structured application equals dense application", "[operator-core]") {
    HilbertSpace hs(4, 4);
    std::mt19937 rng(2024);

    SECTION("identity leaves states unchanged") {
        const QOperator id = QOperator::identity(hs);
        const Vec psi = random_state(hs, rng);
        REQUIRE((id.apply(psi) - psi).cwiseAbs().maxCoeff() < 1e-15);
    }

    SECTION("photon annihilation on a basis state") {
        const QOperator a =
            QOperator::from_terms(hs, {{1.0, identity_op(3), annihilation_op(4), identity_op(4)}});
        Vec psi = Vec::Zero(hs.total());
        psi(hs.index(0, 1, 0)) = 1.0;  // |g,1,0>
        const Vec out = a.apply(psi);
        Vec expected = Vec::Zero(hs.total());
        expected(hs.index(0, 0, 0)) = 1.0;
        REQUIRE((out - expected).cwiseAbs().maxCoeff() < 1e-15);
    }

    SECTION("random structured operator vs dense oracle on 100 states") {
        std::vector<ProductTerm> terms;
        for (int t = 0; t < 3; ++t)
            terms.push_back({Cplx(0.3 * t - 0.5, 0.7), random_factor(3, rng), random_factor(4, rng),
                             random_factor(4, rng)});
        const QOperator op = QOperator::from_terms(hs, terms);
        const Mat dense = op.to_dense();
        for (int trial = 0; trial < 100; ++trial) {
            const Vec psi = random_state(hs, rng);
            REQUIRE((op.apply(psi) - dense * psi).cwiseAbs().maxCoeff() < 1e-12);
        }
        // Left/right density application against the dense oracle.
        const Vec psi = random_state(hs, rng);
        const Mat rho = psi * psi.adjoint();
        REQUIRE((op.apply_left(rho) - dense * rho).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE((op.apply_right(rho) - rho * dense).cwiseAbs().maxCoeff() < 1e-12);
    }

    SECTION("space mismatch is rejected") {
        const QOperator id = QOperator::identity(hs);
        Vec wrong = Vec::Zero(10);
        REQUIRE_THROWS_AS(id.apply(wrong), std::invalid_argument);
    }
}

TEST_CASE("expectation values", "[operator-core]") {
    HilbertSpace hs(12, 2);
    const QOperator na =
        QOperator::from_terms(hs, {{1.0, identity_op(3), number_op(12), identity_op(2)}}, true);

    SECTION("number operator on vacuum") {
        const QState vac = tensor_state(qutrit_vec(Level::g), fock_mode(12, 0), fock_mode(2, 0), hs);
        REQUIRE(std::abs(expectation(na, vac)) < 1e-15);
    }

    SECTION("excited projector on the ground state") {
        const QOperator pe =
            QOperator::from_terms(hs, {{1.0, qutrit_projector(Level::e), identity_op(12), identity_op(2)}}, true);
        const QState g00 = tensor_state(qutrit_vec(Level::g), fock_mode(12, 0), fock_mode(2, 0), hs);
        REQUIRE(std::abs(expectation(pe, g00)) < 1e-15);
    }

    SECTION("photon number of a truncated coherent state") {
        const ModeState coh = coherent_state({0.5, 12});
        // Independent oracle: direct sum over |c_n|^2 n from the expansion.
        double expected = 0.0;
        {
            double norm = 0.0;
            std::vector<double> pn(12);
            double logfact = 0.0;
            for (int n = 0; n < 12; ++n) {
                if (n > 0) logfact += std::log(double(n));
                pn[n] = std::exp(2.0 * n * std::log(0.5) - logfact);
                norm += pn[n];
            }
            for (int n = 0; n < 12; ++n) expected += pn[n] / norm * n;
        }
        const QState st = tensor_state(qutrit_vec(Level::g), coh, fock_mode(2, 0), hs);
        const double got = expectation(na, st).real();
        REQUIRE(got == Catch::Approx(expected).margin(1e-12));
        REQUIRE(std::abs(got - 0.25) < 1e-10);
        // Density-path expectation agrees.
        REQUIRE(expectation(na, st.to_density()).real() == Catch::Approx(got).margin(1e-12));
    }
}

TEST_CASE("hermiticity flag is verifiable", "[operator-core]") {
    HilbertSpace hs(3, 3);
    const QOperator herm = QOperator::from_terms(
        hs, {{1.0, qutrit_projector(Level::e), number_op(3), identity_op(3)}}, true);
    REQUIRE(herm.hermiticity_deviation() < 1e-12);

    const QOperator nonherm =
        QOperator::from_terms(hs, {{1.0, qutrit_op('e', 'g'), annihilation_op(3), identity_op(3)}});
    REQUIRE(nonherm.hermiticity_deviation() > 0.5);
}

TEST_CASE("structured operator algebra", "[operator-core]") {
    HilbertSpace hs(3, 4);
    std::mt19937 rng(7);
    std::vector<ProductTerm> t1{{Cplx(0.2, -0.1), random_factor(3, rng), random_factor(3, rng),
                                 random_factor(4, rng)}};
    std::vector<ProductTerm> t2{{Cplx(-1.0, 0.4), random_factor(3, rng), random_factor(3, rng),
                                 random_factor(4, rng)}};
    const QOperator a = QOperator::from_terms(hs, t1);
    const QOperator b = QOperator::from_terms(hs, t2);
    REQUIRE(((a * b).to_dense() - a.to_dense() * b.to_dense()).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE((a.adjoint().to_dense() - a.to_dense().adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE((a.scaled(Cplx(0, 2)).to_dense() - 2.0 * Cplx(0, 1) * a.to_dense()).cwiseAbs().maxCoeff() <
            1e-14);
}
