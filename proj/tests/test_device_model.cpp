#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "qkerr/device.hpp"
#include "qkerr/hamiltonian.hpp"
#include "qkerr/integrate.hpp"
#include "qkerr/states.hpp"

using namespace qkerr;

namespace {

// Controlled-phase-gate working point: omega_a/2pi = 3.5 GHz,
// omega_b/2pi = 6.5 GHz, delta_a/2pi = -0.3 GHz, g/2pi = 50 MHz, g_ab = 0.1 g.
DeviceParams gate_params(double delta_b_ghz = 0.7) {
    DeviceParams p;
    p.omega_a_ghz = 3.5;
    p.omega_b_ghz = 6.5;
    p.delta_a_ghz = -0.3;
    p.delta_b_ghz = delta_b_ghz;
    p.g_mhz = 50.0;
    p.g_ab_mhz = 5.0;
    p.k = 1;
    p.mu_mhz = solve_gate_parameters(p.g_mhz, p.delta_a_ghz, delta_b_ghz, 1).mu_mhz;
    return p;
}

}  // namespace

TEST_CASE("derived parameters reproduce the quoted working points", "[device-model]") {
    SECTION("gate point: chi near 4.2 MHz") {
        const DerivedParams d = derive(gate_params());
        REQUIRE(std::abs(d.chi_mhz - 4.2) / 4.2 < 0.02);
        REQUIRE(d.delta_mhz == Catch::Approx(400.0).margin(1e-9));
    }
    SECTION("cat point: chi near 0.83 MHz") {
        DeviceParams p;
        p.omega_a_ghz = 3.5;
        p.omega_b_ghz = 6.5;
        p.delta_a_ghz = -1.0;
        p.delta_b_ghz = 1.696;  // D = 8.48 at mu = 200 MHz
        p.g_mhz = 150.0;
        p.mu_mhz = 200.0;
        const DerivedParams d = derive(p);
        REQUIRE(std::abs(d.chi_mhz - 0.83) / 0.83 < 0.02);
    }
    SECTION("decoupled limit mu = 0") {
        DeviceParams p = gate_params();
        p.mu_mhz = 0.0;
        const DerivedParams d = derive(p);
        REQUIRE(d.lambda_mhz == 0.0);
        REQUIRE(d.chi_mhz == 0.0);
        REQUIRE(d.delta_mhz == Catch::Approx(400.0).margin(1e-9));
    }
    SECTION("Delta <= 0 rejected") {
        DeviceParams p = gate_params();
        p.delta_b_ghz = 0.25;
        REQUIRE_THROWS_AS(derive(p), std::invalid_argument);
    }
    SECTION("regime warnings at the paper's own point") {
        // delta_b/mu ~ 2 at the gate point, deliberately outside the x5 margin.
        const DerivedParams d = derive(gate_params());
        REQUIRE(!d.warnings.empty());
    }
}

TEST_CASE("gate parameter solver", "[device-model]") {
    SECTION("mu/2pi near 342 MHz at the gate point") {
        const GateSolution s = solve_gate_parameters(50.0, -0.3, 0.7, 1);
        REQUIRE(std::abs(s.mu_mhz - 342.0) / 342.0 < 0.01);
    }
    SECTION("gate time is 120 ns") {
        const GateSolution s = solve_gate_parameters(50.0, -0.3, 0.7, 1);
        REQUIRE(s.t_gate_s == Catch::Approx(120e-9).epsilon(1e-12));
    }
    SECTION("self-consistency identities over a random parameter scan") {
        std::mt19937 rng(31);
        std::uniform_real_distribution<double> gd(10.0, 200.0), dad(0.1, 2.0), ratio(1.1, 6.0);
        std::uniform_int_distribution<int> kd(1, 4);
        for (int trial = 0; trial < 100; ++trial) {
            const double g = gd(rng);
            const double da = -dad(rng);
            const double db = -da * ratio(rng);
            const int k = kd(rng);
            const GateSolution s = solve_gate_parameters(g, da, db, k);

            DeviceParams p;
            p.omega_a_ghz = 3.5;
            p.omega_b_ghz = 6.5;
            p.delta_a_ghz = da;
            p.delta_b_ghz = db;
            p.g_mhz = g;
            p.mu_mhz = s.mu_mhz;
            p.k = k;
            const DerivedParams d = derive(p);
            REQUIRE(std::abs(d.lambda_mhz - s.lambda_mhz) / s.lambda_mhz < 1e-10);
            // |theta| t = pi and (g^2/|delta_a|) t = 2 k pi, in angular units.
            const double pi = two_pi / 2.0;
            const double phase1 = std::abs(d.theta_rad()) * s.t_gate_s;
            const double phase2 =
                p.g_rad() * p.g_rad() / std::abs(p.delta_a_rad()) * s.t_gate_s;
            REQUIRE(std::abs(phase1 - pi) / pi < 1e-10);
            REQUIRE(std::abs(phase2 - 2.0 * k * pi) / (2.0 * k * pi) < 1e-10);
        }
    }
    SECTION("k -> infinity limit of lambda") {
        const double g = 50.0, da = -0.3, db = 0.7;
        const GateSolution s = solve_gate_parameters(g, da, db, 1000000000);
        const double limit = g * std::sqrt((db * 1e3 - 300.0) / 300.0);
        REQUIRE(std::abs(s.lambda_mhz - limit) / limit < 1e-6);
    }
    SECTION("delta_b <= |delta_a| rejected") {
        REQUIRE_THROWS_AS(solve_gate_parameters(50.0, -0.3, 0.3, 1), std::invalid_argument);
    }
}

TEST_CASE("quality factors", "[device-model]") {
    REQUIRE(std::abs(quality_factor(3.5, 20.0) - 4.4e5) / 4.4e5 < 0.02);
    REQUIRE(std::abs(quality_factor(6.5, 20.0) - 8.2e5) / 8.2e5 < 0.02);
    REQUIRE(quality_factor(3.5, 0.0) == 0.0);
}

TEST_CASE("hamiltonian builders", "[device-model]") {
    const DeviceParams p = gate_params();
    const HilbertSpace hs(4, 4);

    SECTION("full model matrix element at t = 0") {
        const QOperator h = build_hamiltonian({HamiltonianKind::Full, p, hs}, 0.0);
        const Mat d = h.to_dense();
        const Cplx elem = d(hs.index(int(Level::e), 0, 0), hs.index(int(Level::g), 1, 0));
        REQUIRE(std::abs(elem - p.g_rad()) < 1e-6 * p.g_rad());
    }
    SECTION("full model element carries the oscillating phase exactly") {
        const double t = 0.37e-9;
        const QOperator h = build_hamiltonian({HamiltonianKind::Full, p, hs}, t);
        const Cplx elem =
            h.to_dense()(hs.index(int(Level::e), 0, 0), hs.index(int(Level::g), 1, 0));
        const Cplx expected = p.g_rad() * std::polar(1.0, p.delta_a_rad() * t);
        REQUIRE(std::abs(elem - expected) < 1e-9 * p.g_rad());
    }
    SECTION("cross-Kerr kind is diagonal with eigenvalue -chi n_a n_b on |g>") {
        const DerivedParams d = derive(p);
        const QOperator h = build_hamiltonian({HamiltonianKind::CrossKerr, p, hs}, 0.0);
        const Mat m = h.to_dense();
        Mat off = m;
        off.diagonal().setZero();
        REQUIRE(off.cwiseAbs().maxCoeff() == 0.0);
        for (int na = 0; na < 4; ++na)
            for (int nb = 0; nb < 4; ++nb) {
                const double want = -d.chi_rad() * na * nb;
                REQUIRE(m(hs.index(0, na, nb), hs.index(0, na, nb)).real() ==
                        Catch::Approx(want).margin(1e-3));
                REQUIRE(m(hs.index(1, na, nb), hs.index(1, na, nb)) == Cplx(0.0, 0.0));
            }
    }
    SECTION("every kind is Hermitian at 20 random times") {
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> td(0.0, 200e-9);
        for (HamiltonianKind kind :
             {HamiltonianKind::Full, HamiltonianKind::FullCrosstalk, HamiltonianKind::Effective3,
              HamiltonianKind::Effective4, HamiltonianKind::GroundEffective,
              HamiltonianKind::CrossKerr, HamiltonianKind::RotatingFrame}) {
            for (int i = 0; i < 20; ++i) {
                const QOperator h = build_hamiltonian({kind, p, hs}, td(rng));
                REQUIRE(h.hermiticity_deviation() < 1e-12 * std::max(1.0, p.delta_ab_rad()));
            }
        }
    }
    SECTION("effective forms are diagonal except the Raman term") {
        const QOperator h4 = build_hamiltonian({HamiltonianKind::Effective4, p, hs}, 0.0);
        Mat off4 = h4.to_dense();
        off4.diagonal().setZero();
        REQUIRE(off4.cwiseAbs().maxCoeff() == 0.0);

        const QOperator h3 = build_hamiltonian({HamiltonianKind::Effective3, p, hs}, 0.0);
        const Mat m3 = h3.to_dense();
        // The only off-diagonal coupling is |g,na+1,nb+1> <-> |f,na,nb>.
        for (int r = 0; r < hs.total(); ++r)
            for (int c = 0; c < hs.total(); ++c) {
                if (r == c || m3(r, c) == Cplx(0.0, 0.0)) continue;
                const int qr = hs.qutrit_of(r), qc = hs.qutrit_of(c);
                const bool raman_down = qr == 0 && qc == 2 && hs.na_of(r) == hs.na_of(c) + 1 &&
                                        hs.nb_of(r) == hs.nb_of(c) + 1;
                const bool raman_up = qr == 2 && qc == 0 && hs.na_of(r) == hs.na_of(c) - 1 &&
                                      hs.nb_of(r) == hs.nb_of(c) - 1;
                REQUIRE((raman_down || raman_up));
            }
    }
}

TEST_CASE("effective model agrees with the full model at the gate point", "[device-model]") {
    // Dispersive-regime consistency: |g,1,1> propagated under the full model
    // and under the three-term effective form stay aligned over one gate time.
    const DeviceParams p = gate_params();
    const HilbertSpace hs(4, 4);
    const double t_gate = derive(p).t_gate_s;
    Vec v = Vec::Zero(hs.total());
    v(hs.index(0, 1, 1)) = 1.0;
    const QState psi0 = QState::pure(hs, v);

    const QState full = evolve_unitary({HamiltonianKind::Full, p, hs}, psi0, t_gate);
    const QState eff = evolve_unitary({HamiltonianKind::Effective3, p, hs}, psi0, t_gate);
    const Cplx ov = full.vector().adjoint() * eff.vector();
    REQUIRE(std::abs(ov) >= 0.99);
}

TEST_CASE("closed-form cross-Kerr propagator matches numerical exponentiation", "[device-model]") {
    const DeviceParams p = gate_params();
    const HilbertSpace hs(4, 4);
    const DerivedParams d = derive(p);
    const double t = 0.6 * d.t_cat_s;

    const Mat h = build_hamiltonian({HamiltonianKind::CrossKerr, p, hs}, 0.0).to_dense();
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    Mat u_num = Mat::Zero(hs.total(), hs.total());
    for (int i = 0; i < hs.total(); ++i)
        u_num += std::polar(1.0, -es.eigenvalues()(i) * t) *
                 (es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint());

    Mat u_closed = Mat::Zero(hs.total(), hs.total());
    for (int q = 0; q < 3; ++q)
        for (int na = 0; na < 4; ++na)
            for (int nb = 0; nb < 4; ++nb) {
                const int i = hs.index(q, na, nb);
                u_closed(i, i) = q == 0 ? std::polar(1.0, d.chi_rad() * na * nb * t) : 1.0;
            }
    REQUIRE((u_num - u_closed).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("rotating frame", "[device-model]") {
    const HilbertSpace hs(4, 4);

    SECTION("decoupled limit gives a diagonal generator and identity propagator") {
        DeviceParams p = gate_params();
        p.g_mhz = 1e-12;  // validation requires g > 0; the couplings are negligible
        p.mu_mhz = 0.0;
        p.g_ab_mhz = 0.0;
        auto [hrot, frame] = build_rotating_frame({HamiltonianKind::FullCrosstalk, p, hs});
        Mat off = hrot.dense_at(0.0);
        off.diagonal().setZero();
        REQUIRE(off.cwiseAbs().maxCoeff() < 1e-3);

        Vec v = Vec::Zero(hs.total());
        v(hs.index(0, 2, 1)) = 1.0;
        const QState psi0 = QState::pure(hs, v);
        const QState out = evolve_rotating_frame({HamiltonianKind::FullCrosstalk, p, hs}, psi0, 50e-9);
        const Cplx ov = out.vector().adjoint() * psi0.vector();
        REQUIRE(std::abs(ov) > 1.0 - 1e-9);  // equal up to global phase
    }

    SECTION("rotating-frame propagator matches direct integration on the single-excitation sector") {
        const DeviceParams p = gate_params();
        const double t = derive(p).t_gate_s;
        Vec v = Vec::Zero(hs.total());
        v(hs.index(0, 1, 0)) = 1.0;
        const QState psi0 = QState::pure(hs, v);
        const HamiltonianSpec spec{HamiltonianKind::FullCrosstalk, p, hs};
        const QState direct = evolve_unitary(spec, psi0, t);
        const QState rotated = evolve_rotating_frame(spec, psi0, t);
        REQUIRE((direct.vector() - rotated.vector()).norm() < 1e-6);
    }

    SECTION("H_rot is Hermitian") {
        const DeviceParams p = gate_params();
        auto [hrot, frame] = build_rotating_frame({HamiltonianKind::Full, p, hs});
        const Mat h = hrot.dense_at(0.0);
        REQUIRE((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-9);
    }

    SECTION("unsupported kinds rejected") {
        const DeviceParams p = gate_params();
        REQUIRE_THROWS_AS(build_rotating_frame({HamiltonianKind::Effective3, p, hs}),
                          std::invalid_argument);
    }
}

TEST_CASE("device parameter validation", "[device-model]") {
    DeviceParams p = gate_params();
    REQUIRE_NOTHROW(p.validate());
    REQUIRE(p.delta_ab_ghz() == Catch::Approx(-3.0).margin(1e-15));
    REQUIRE(p.omega_eg_ghz() == Catch::Approx(3.2).margin(1e-12));
    REQUIRE(p.omega_fe_ghz() == Catch::Approx(7.2).margin(1e-12));

    p.delta_a_ghz = 0.3;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p = gate_params();
    p.kappa_a_per_us = -1.0;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
}
