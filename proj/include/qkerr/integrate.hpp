#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qkerr/lindblad.hpp"
#include "qkerr/states.hpp"

namespace qkerr {

// Fixed-step classical RK4. The step resolves the fastest phase in the
// problem (dt * omega_max <= phase_budget) and the global error is estimated
// by Richardson comparison against a companion trajectory run at twice the
// step: |rho_dt - rho_2dt|_F / (2^4 - 1).
struct IntegratorConfig {
    double dt = 0.0;  // seconds; 0 selects phase_budget / omega_max
    double t_final = 0.0;
    int monitor_every = 64;
    bool error_estimate = true;
    // Phase advance per step used to pick the automatic dt. 0 selects the
    // default: 0.1 rad for density-matrix runs, 0.04 rad for pure-state runs
    // (cheap, and the dominant oscillation there carries more amplitude).
    // An explicit dt must always satisfy dt * omega_max <= 0.1.
    double phase_budget = 0.0;
    double tol_trace = 1e-8;
    double tol_herm = 1e-10;
    double tol_positivity = -1e-6;
    double tol_global_error = 1e-6;
    double tol_norm = 1e-8;  // pure-state evolution
};

struct MonitorSample {
    double t = 0.0;
    double trace_dev = 0.0;
    double herm_dev = 0.0;
    double p_e = 0.0, p_f = 0.0;
    double n_a = 0.0, n_b = 0.0;
    double top_level_pop = 0.0;  // combined top-Fock occupancy of both modes
};

struct Trajectory {
    std::vector<MonitorSample> samples;
    QState final_state;
    int steps = 0;
    double dt_used = 0.0;
    double global_error_estimate = 0.0;
    double max_trace_dev = 0.0;
    double max_herm_dev = 0.0;
    double max_excited_pop = 0.0;  // max over samples of P_e + P_f
    double max_top_level_pop = 0.0;
    double final_min_eigenvalue = 0.0;
    bool ok = true;
    std::string failure;
};

namespace detail {

constexpr double invariant_phase_budget = 0.1;  // dt * omega_max <= 0.1, always

inline double resolve_dt(double requested, double omega_max, double t_final, double auto_budget) {
    if (requested > 0.0) {
        if (omega_max > 0.0 && requested * omega_max > invariant_phase_budget * (1.0 + 1e-9))
            throw std::invalid_argument(
                "integrate: dt too coarse for the fastest phase (dt*omega_max exceeds 0.1)");
        return requested;
    }
    return omega_max > 0.0 ? auto_budget / omega_max : t_final;
}

inline int step_count(double t_final, double dt, bool even) {
    int n = std::max(1, int(std::ceil(t_final / dt - 1e-12)));
    if (even && n % 2 != 0) ++n;
    return n;
}

template <typename Rhs>
class Rk4 {
  public:
    explicit Rk4(int rows, int cols) { for (Mat* m : {&k_, &acc_, &tmp_}) *m = Mat::Zero(rows, cols); }

    // One classical step y <- y + dt/6 (k1 + 2 k2 + 2 k3 + k4).
    void step(Rhs& rhs, Mat& y, double t, double dt) {
        rhs(y, t, k_);                       // k1
        acc_ = k_;
        tmp_ = y + (0.5 * dt) * k_;
        rhs(tmp_, t + 0.5 * dt, k_);         // k2
        acc_ += 2.0 * k_;
        tmp_ = y + (0.5 * dt) * k_;
        rhs(tmp_, t + 0.5 * dt, k_);         // k3
        acc_ += 2.0 * k_;
        tmp_ = y + dt * k_;
        rhs(tmp_, t + dt, k_);               // k4
        acc_ += k_;
        y += (dt / 6.0) * acc_;
    }

  private:
    Mat k_, acc_, tmp_;
};

struct PopulationIndex {
    std::vector<int> e_idx, f_idx;
    std::vector<double> na_w, nb_w;
    std::vector<int> top_idx;

    explicit PopulationIndex(const HilbertSpace& hs) {
        na_w.resize(hs.total());
        nb_w.resize(hs.total());
        for (int q = 0; q < 3; ++q)
            for (int na = 0; na < hs.dim_a; ++na)
                for (int nb = 0; nb < hs.dim_b; ++nb) {
                    const int i = hs.index(q, na, nb);
                    na_w[i] = na;
                    nb_w[i] = nb;
                    if (q == int(Level::e)) e_idx.push_back(i);
                    if (q == int(Level::f)) f_idx.push_back(i);
                    if (na == hs.dim_a - 1 || nb == hs.dim_b - 1) top_idx.push_back(i);
                }
    }
};

inline MonitorSample measure(const Mat& rho, double t, const PopulationIndex& pi) {
    MonitorSample s;
    s.t = t;
    double tr = 0.0;
    for (Eigen::Index i = 0; i < rho.rows(); ++i) tr += rho(i, i).real();
    s.trace_dev = std::abs(tr - 1.0);
    for (int i : pi.e_idx) s.p_e += rho(i, i).real();
    for (int i : pi.f_idx) s.p_f += rho(i, i).real();
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        s.n_a += pi.na_w[i] * rho(i, i).real();
        s.n_b += pi.nb_w[i] * rho(i, i).real();
    }
    for (int i : pi.top_idx) s.top_level_pop += rho(i, i).real();
    return s;
}

inline double hermiticity_deviation(const Mat& rho) {
    double dev = 0.0;
    for (Eigen::Index j = 0; j < rho.cols(); ++j)
        for (Eigen::Index i = 0; i <= j; ++i)
            dev = std::max(dev, std::abs(rho(i, j) - std::conj(rho(j, i))));
    return dev;
}

inline void symmetrize(Mat& rho) { rho = 0.5 * (rho + rho.adjoint()).eval(); }

}  // namespace detail

namespace detail {

// RK4 over density matrices with the stage combinations fused into the
// column hook of the right-hand-side pass.
class DensityStepper {
  public:
    DensityStepper(const LindbladModel& model, int n)
        : model_(model), n_(n), k_(Mat::Zero(n, n)), acc_(Mat::Zero(n, n)),
          tmp_a_(Mat::Zero(n, n)), tmp_b_(Mat::Zero(n, n)) {}

    void step(Mat& y, double t, double dt) {
        const double h2 = 0.5 * dt, h6 = dt / 6.0;
        const size_t n = size_t(n_);
        auto col = [n](Mat& m, int j) { return m.data() + size_t(j) * n; };

        model_.rhs(y, t, k_, ws_, [&](int j, Cplx* kj) {
            Cplx* a = col(acc_, j);
            Cplx* ta = col(tmp_a_, j);
            const Cplx* yj = y.data() + size_t(j) * n;
            for (size_t i = 0; i < n; ++i) {
                a[i] = kj[i];
                ta[i] = yj[i] + h2 * kj[i];
            }
        });
        model_.rhs(tmp_a_, t + h2, k_, ws_, [&](int j, Cplx* kj) {
            Cplx* a = col(acc_, j);
            Cplx* tb = col(tmp_b_, j);
            const Cplx* yj = y.data() + size_t(j) * n;
            for (size_t i = 0; i < n; ++i) {
                a[i] += 2.0 * kj[i];
                tb[i] = yj[i] + h2 * kj[i];
            }
        });
        model_.rhs(tmp_b_, t + h2, k_, ws_, [&](int j, Cplx* kj) {
            Cplx* a = col(acc_, j);
            Cplx* ta = col(tmp_a_, j);
            const Cplx* yj = y.data() + size_t(j) * n;
            for (size_t i = 0; i < n; ++i) {
                a[i] += 2.0 * kj[i];
                ta[i] = yj[i] + dt * kj[i];
            }
        });
        model_.rhs(tmp_a_, t + dt, k_, ws_, [&](int j, Cplx* kj) {
            const Cplx* a = col(acc_, j);
            Cplx* yj = y.data() + size_t(j) * n;
            for (size_t i = 0; i < n; ++i) yj[i] += h6 * (a[i] + kj[i]);
        });
    }

  private:
    const LindbladModel& model_;
    int n_;
    Mat k_, acc_, tmp_a_, tmp_b_;
    LindbladModel::Workspace ws_;
};

}  // namespace detail

// Master-equation propagation of a density matrix under the model. Monitor
// violations mark the run failed rather than returning silent results.
inline Trajectory integrate(const LindbladModel& model, const QState& rho0,
                            const IntegratorConfig& cfg) {
    if (!(rho0.space() == model.space())) throw std::invalid_argument("integrate: space mismatch");
    if (!(cfg.t_final > 0.0)) throw std::invalid_argument("integrate: t_final must be positive");

    const double omega_max =
        std::max(model.hamiltonian().max_angular_frequency(), model.max_rate_per_s());
    Trajectory traj;
    const double budget = cfg.phase_budget > 0.0 ? cfg.phase_budget : 0.1;
    const double dt0 = detail::resolve_dt(cfg.dt, omega_max, cfg.t_final, budget);
    const int n_steps = detail::step_count(cfg.t_final, dt0, cfg.error_estimate);
    const double dt = cfg.t_final / n_steps;
    traj.dt_used = dt;
    traj.steps = n_steps;

    const int n = model.space().total();
    const detail::PopulationIndex pi(model.space());

    Mat rho = rho0.to_density().matrix();
    detail::DensityStepper stepper(model, n);

    auto record = [&](const Mat& r, double t) {
        MonitorSample s = detail::measure(r, t, pi);
        s.herm_dev = detail::hermiticity_deviation(r);
        traj.samples.push_back(s);
        traj.max_trace_dev = std::max(traj.max_trace_dev, s.trace_dev);
        traj.max_herm_dev = std::max(traj.max_herm_dev, s.herm_dev);
        traj.max_excited_pop = std::max(traj.max_excited_pop, s.p_e + s.p_f);
        traj.max_top_level_pop = std::max(traj.max_top_level_pop, s.top_level_pop);
        if (s.trace_dev > cfg.tol_trace) {
            traj.ok = false;
            traj.failure = "trace deviation " + std::to_string(s.trace_dev) + " at t=" + std::to_string(t);
        } else if (s.herm_dev > cfg.tol_herm) {
            traj.ok = false;
            traj.failure = "hermiticity deviation " + std::to_string(s.herm_dev);
        }
        return traj.ok;
    };

    record(rho, 0.0);
    const int cadence = std::max(1, cfg.monitor_every);
    for (int step = 0; step < n_steps && traj.ok; ++step) {
        stepper.step(rho, step * dt, dt);
        if ((step + 1) % cadence == 0 || step + 1 == n_steps) {
            if (!record(rho, (step + 1) * dt)) break;
            detail::symmetrize(rho);
        }
    }

    if (traj.ok && cfg.error_estimate) {
        Mat rho2 = rho0.to_density().matrix();
        detail::DensityStepper stepper2(model, n);
        const int half = n_steps / 2;
        for (int step = 0; step < half; ++step) {
            stepper2.step(rho2, step * 2.0 * dt, 2.0 * dt);
            if ((2 * (step + 1)) % cadence == 0 || step + 1 == half) detail::symmetrize(rho2);
        }
        traj.global_error_estimate = (rho - rho2).norm() / 15.0;
        if (traj.global_error_estimate > cfg.tol_global_error) {
            traj.ok = false;
            traj.failure = "global error estimate " + std::to_string(traj.global_error_estimate);
        }
    }

    if (traj.ok) {
        Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
        traj.final_min_eigenvalue = es.eigenvalues().minCoeff();
        if (traj.final_min_eigenvalue < cfg.tol_positivity) {
            traj.ok = false;
            traj.failure = "positivity violation, min eigenvalue " +
                           std::to_string(traj.final_min_eigenvalue);
        }
    }

    traj.final_state = QState::density_unchecked(model.space(), std::move(rho));
    return traj;
}

struct PureTrajectory {
    QState final_state;
    int steps = 0;
    double dt_used = 0.0;
    double max_norm_dev = 0.0;
    double global_error_estimate = 0.0;
    bool ok = true;
    std::string failure;
};

// Unitary (pure-state) evolution. Diagonal static Hamiltonians evolve by
// closed-form phases e^{-i E_j t}; everything else is stepped like above.
inline PureTrajectory evolve_unitary_traced(const HamiltonianSpec& spec, const QState& psi0,
                                            double t_final, const IntegratorConfig& cfg_in = {}) {
    if (!psi0.is_pure()) throw std::invalid_argument("evolve_unitary: need a pure state");
    IntegratorConfig cfg = cfg_in;
    cfg.t_final = t_final;
    const TimeDependentHamiltonian ham = hamiltonian_terms(spec);
    if (!(psi0.space() == ham.space())) throw std::invalid_argument("evolve_unitary: space mismatch");

    PureTrajectory out;
    if (ham.diagonal_static()) {
        const Eigen::VectorXd en = ham.diagonal_energies();
        Vec psi = psi0.vector();
        for (Eigen::Index i = 0; i < psi.size(); ++i) psi(i) *= std::polar(1.0, -en(i) * t_final);
        out.final_state = QState::pure(psi0.space(), std::move(psi));
        return out;
    }

    if (!(t_final > 0.0)) throw std::invalid_argument("evolve_unitary: t_final must be positive");
    const double budget = cfg.phase_budget > 0.0 ? cfg.phase_budget : 0.04;
    const double omega_max = ham.max_angular_frequency();
    const double dt0 = detail::resolve_dt(cfg.dt, omega_max, t_final, budget);
    const int n_steps = detail::step_count(t_final, dt0, cfg.error_estimate);
    const double dt = t_final / n_steps;
    out.dt_used = dt;
    out.steps = n_steps;

    std::vector<detail::CooEntry> scratch;
    auto rhs = [&](const Mat& y, double t, Mat& k) {
        k.setZero();
        for (const auto& term : ham.terms()) {
            const Cplx c = term.coefficient(t);
            detail::acc_sparse_left(term.op.term_entries()[0], Cplx(0.0, -1.0) * c, y, k, scratch);
        }
    };

    Mat psi = psi0.vector();
    detail::Rk4<decltype(rhs)> stepper(psi.rows(), 1);
    for (int step = 0; step < n_steps; ++step) {
        stepper.step(rhs, psi, step * dt, dt);
        if ((step + 1) % std::max(1, cfg.monitor_every) == 0 || step + 1 == n_steps)
            out.max_norm_dev = std::max(out.max_norm_dev, std::abs(psi.norm() - 1.0));
    }
    if (out.max_norm_dev > cfg.tol_norm) {
        out.ok = false;
        out.failure = "norm deviation " + std::to_string(out.max_norm_dev);
    }

    if (out.ok && cfg.error_estimate) {
        Mat psi2 = psi0.vector();
        detail::Rk4<decltype(rhs)> stepper2(psi2.rows(), 1);
        for (int step = 0; step < n_steps / 2; ++step)
            stepper2.step(rhs, psi2, step * 2.0 * dt, 2.0 * dt);
        out.global_error_estimate = (psi - psi2).norm() / 15.0;
        if (out.global_error_estimate > cfg.tol_global_error) {
            out.ok = false;
            out.failure = "global error estimate " + std::to_string(out.global_error_estimate);
        }
    }

    out.final_state = QState::pure(psi0.space(), psi.col(0), true);
    return out;
}

inline QState evolve_unitary(const HamiltonianSpec& spec, const QState& psi0, double t_final,
                             double dt = 0.0) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    PureTrajectory tr = evolve_unitary_traced(spec, psi0, t_final, cfg);
    if (!tr.ok) throw std::runtime_error("evolve_unitary: " + tr.failure);
    return tr.final_state;
}

// Exact propagation through the time-independent rotating frame:
// U_I(t) = V(t) exp(-i H_rot t) with V(0) = 1, evaluated by eigendecomposition.
inline QState evolve_rotating_frame(const HamiltonianSpec& spec, const QState& psi0, double t) {
    auto [hrot, frame] = build_rotating_frame(spec);
    if (!(psi0.space() == hrot.space()))
        throw std::invalid_argument("evolve_rotating_frame: space mismatch");
    const Mat h = hrot.dense_at(0.0);
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    Vec psi = es.eigenvectors().adjoint() * psi0.vector();
    for (Eigen::Index i = 0; i < psi.size(); ++i)
        psi(i) *= std::polar(1.0, -es.eigenvalues()(i) * t);
    Vec out = es.eigenvectors() * psi;
    frame.undo_state(out, t);
    return QState::pure(psi0.space(), std::move(out), true);
}

// F = sqrt(<psi_id| rho |psi_id>), clamped against -1e-12 numerical noise.
inline double fidelity(const QState& psi_id, const QState& rho) {
    if (!psi_id.is_pure()) throw std::invalid_argument("fidelity: reference must be pure");
    if (!(psi_id.space() == rho.space())) throw std::invalid_argument("fidelity: space mismatch");
    double p;
    if (rho.is_pure()) {
        const Cplx ov = psi_id.vector().adjoint() * rho.vector();
        p = std::norm(ov);
    } else {
        const Cplx q = psi_id.vector().adjoint() * (rho.matrix() * psi_id.vector());
        p = q.real();
    }
    if (p < -1e-12) throw std::runtime_error("fidelity: overlap below tolerance, state unphysical");
    return std::sqrt(std::clamp(p, 0.0, 1.0));
}

}  // namespace qkerr
