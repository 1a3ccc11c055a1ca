#include "eapm/seesaw.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "eapm/errors.hpp"
#include "eapm/parallel.hpp"
#include "eapm/random.hpp"
#include "eapm/schemes.hpp"

namespace eapm {
namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;

constexpr double kVertexMargin = 1e-9;
constexpr double kDegenerateOmega = 1e-12;

void validate_config(const SeesawConfig& cfg) {
    if (cfg.max_iters < 1) throw InvalidParams("seesaw max_iters must be >= 1");
    if (!(cfg.convergence_tol > 0.0)) throw InvalidParams("seesaw convergence_tol must be > 0");
    if (cfg.restarts < 1) throw InvalidParams("seesaw restarts must be >= 1");
}

void validate_local_dim(int local_dim) {
    if (local_dim < 2 || local_dim > 4) throw InvalidParams("local_dim must be 2, 3, or 4");
}

struct StatePair {
    MatrixXcd t0, t1;
};

DensityMatrix to_state(const MatrixXcd& m, int d) { return DensityMatrix(m, DimList{d, d}); }

// |0><0| on the message factor tensored with the identity on the helper.
MatrixXcd vacuum_projector_full(int d) {
    MatrixXcd p = MatrixXcd::Zero(d * d, d * d);
    for (int b = 0; b < d; ++b) p(b, b) = 1.0;
    return p;
}

// Product of the message vacuum with the helper marginal of tau; mixing toward
// this state raises the vacuum weight without touching the helper reduction.
MatrixXcd vacuum_with_marginal(const MatrixXcd& tau, int d) {
    MatrixXcd chi = partial_trace(tau, DimList{d, d}, std::vector<int>{1});
    MatrixXcd proj = MatrixXcd::Zero(d, d);
    proj(0, 0) = 1.0;
    return kron(proj, chi);
}

MatrixXcd pad_bipartite(const MatrixXcd& rho, int ds, int db) {
    if (ds == db) return rho;
    MatrixXcd e = MatrixXcd::Zero(db, ds);
    e.topLeftCorner(ds, ds) = MatrixXcd::Identity(ds, ds);
    MatrixXcd v = kron(e, e);
    return v * rho * v.adjoint();
}

// State step shared by both searches: maximize <obj0, t0> + <obj1, t1> over
// unit-trace PSD pairs with equal helper marginals and vacuum weight at least
// 1 - omega, plus an optional pinned overlap on t0.
StatePair state_step(int d, double omega, const MatrixXcd& obj0, const MatrixXcd& obj1,
                     const std::optional<std::pair<MatrixXcd, double>>& pin0) {
    const int dd = d * d;
    BlockSdp p;
    const int b0 = p.add_block(2 * dd, true);
    const int b1 = p.add_block(2 * dd, true);
    const int s0 = p.add_block(1);
    const int s1 = p.add_block(1);
    p.set_objective(b0, -realify_half(obj0));
    p.set_objective(b1, -realify_half(obj1));

    const MatrixXcd eye = MatrixXcd::Identity(dd, dd);
    p.add_constraint({{{b0, realify_half(eye)}}, 1.0});
    p.add_constraint({{{b1, realify_half(eye)}}, 1.0});
    const MatrixXcd eye_c = MatrixXcd::Identity(d, d);
    for (const auto& t : traceless_hermitian_basis(d)) {
        const MatrixXd a = realify_half(kron(eye_c, t));
        p.add_constraint({{{b0, a}, {b1, -a}}, 0.0});
    }
    const MatrixXd vac = realify_half(vacuum_projector_full(d));
    const MatrixXd minus_one = -MatrixXd::Identity(1, 1);
    p.add_constraint({{{b0, vac}, {s0, minus_one}}, 1.0 - omega});
    p.add_constraint({{{b1, vac}, {s1, minus_one}}, 1.0 - omega});
    if (pin0) p.add_constraint({{{b0, realify_half(pin0->first)}}, pin0->second});

    const BlockSolution sol = solve_block_sdp(p);
    auto clean = [](const MatrixXd& xr) {
        const MatrixXcd m = derealify(xr);
        MatrixXcd h = 0.5 * (m + m.adjoint());
        h /= h.trace().real();
        return h;
    };
    return {clean(sol.x[0]), clean(sol.x[1])};
}

// Product embedding of the optimal unassisted preparation pair; feasible for
// every local_dim and already achieving the product-strategy optimum.
StatePair pm_embedding(double omega, int d) {
    const double wp = std::min(omega, 0.5);
    VectorXcd v0 = VectorXcd::Zero(d), v1 = VectorXcd::Zero(d);
    v0(0) = std::sqrt(1.0 - wp);
    v0(1) = std::sqrt(wp);
    v1(0) = v0(0);
    v1(1) = -v0(1);
    MatrixXcd chi = MatrixXcd::Zero(d, d);
    chi(0, 0) = 1.0;
    return {kron(MatrixXcd(v0 * v0.adjoint()), chi), kron(MatrixXcd(v1 * v1.adjoint()), chi)};
}

StatePair scheme_states(double omega, int d, double r, bool qutrit_kind) {
    const SchemeParams sp{EnergyBound(omega), r};
    if (!qutrit_kind) {
        const Scheme sc = qubit_scheme(sp);
        return {pad_bipartite(sc.post_states[0].matrix, 2, d),
                pad_bipartite(sc.post_states[1].matrix, 2, d)};
    }
    const Scheme sc = qutrit_scheme(sp);
    return {pad_bipartite(sc.post_states[0].matrix, 3, d),
            pad_bipartite(sc.post_states[1].matrix, 3, d)};
}

MatrixXcd wishart_energy_mixed(int d, double omega, Rng& rng) {
    MatrixXcd rho = random_density(d * d, rng);
    double v = 0.0;
    for (int b = 0; b < d; ++b) v += rho(b, b).real();
    if (v < 1.0 - omega) {
        const double t = (1.0 - omega - v) / (1.0 - v);
        rho = (1.0 - t) * rho + t * vacuum_with_marginal(rho, d);
    }
    return rho;
}

StatePair pure_plus_vacuum_partner(double omega, int d, Rng& rng, bool swapped) {
    std::uniform_real_distribution<double> uo(0.0, 1.0);
    const double weight = 1.0 - omega * uo(rng);
    const VectorXcd psi = random_bipartite_with_vacuum(d, d, weight, rng);
    MatrixXcd t0 = psi * psi.adjoint();
    MatrixXcd t1 = vacuum_with_marginal(t0, d);
    if (swapped) std::swap(t0, t1);
    return {t0, t1};
}

StatePair w2_seed(double omega, int d, int k, std::uint64_t base_seed) {
    if (k == 0) return pm_embedding(omega, d);
    Rng rng(splitmix64(base_seed, static_cast<std::uint64_t>(k)));
    const double om_s = std::min(omega, 1.0 - 1e-9);
    const double rmax = std::min(om_s, 1.0 - om_s);
    switch (k % 3) {
        case 2: {
            const bool qutrit_kind = d >= 3;
            double r;
            if (k == 2) {
                const EnergyBound clamped(std::min(omega, 0.5));
                r = optimize_r(qutrit_kind ? SchemeKind::Qutrit : SchemeKind::Qubit, clamped)
                        .r_star;
                r = std::min(r, rmax);
            } else {
                std::uniform_real_distribution<double> ur(0.0, rmax);
                r = ur(rng);
            }
            return scheme_states(om_s, d, r, qutrit_kind);
        }
        case 1:
            return pure_plus_vacuum_partner(omega, d, rng, (k / 3) % 2 == 1);
        default:
            return {wishart_energy_mixed(d, omega, rng), wishart_energy_mixed(d, omega, rng)};
    }
}

SeesawW2Result run_w2_restart(double omega, int d, const SeesawConfig& cfg, StatePair states) {
    double prev = -1.0;
    for (int it = 0; it < cfg.max_iters; ++it) {
        DensityMatrix t0 = to_state(states.t0, d);
        DensityMatrix t1 = to_state(states.t1, d);
        HelstromResult h = helstrom(t0, t1);
        const double improvement = h.w2 - prev;
        if (it > 0 && improvement < cfg.convergence_tol && improvement > -1e-7)
            return {h.w2, {{t0, t1}, h.optimal_povm}};
        prev = h.w2;
        states = state_step(d, omega, 0.5 * h.optimal_povm.elements[0],
                            0.5 * h.optimal_povm.elements[1], std::nullopt);
    }
    DensityMatrix t0 = to_state(states.t0, d);
    DensityMatrix t1 = to_state(states.t1, d);
    HelstromResult h = helstrom(t0, t1);
    return {h.w2, {{t0, t1}, h.optimal_povm}};
}

// Measurement step of the boundary search: best second correlator over binary
// measurements reproducing the first one, for fixed states.
double corr_measurement_step(const StatePair& states, int d, double e0, int sign,
                             MatrixXcd* d_op_out) {
    const int dd = d * d;
    SdpProblem p;
    p.d = dd;
    p.objective = static_cast<double>(sign) * states.t1;
    p.equalities.emplace_back(states.t0, 0.5 * (1.0 + e0));
    p.upper_bound = MatrixXcd::Identity(dd, dd);
    const SdpResult r = sdp_solve(p);

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (r.optimizer + r.optimizer.adjoint()));
    const Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
    const MatrixXcd m0 = es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
    *d_op_out = 2.0 * m0 - MatrixXcd::Identity(dd, dd);
    return (states.t1 * *d_op_out).trace().real();
}

double run_corr_restart(double omega, int d, double e0, int sign, const SeesawConfig& cfg,
                        StatePair states) {
    double prev_signed = -2.0;
    double e1_last = 0.0;
    MatrixXcd d_op;
    for (int it = 0; it < cfg.max_iters; ++it) {
        e1_last = corr_measurement_step(states, d, e0, sign, &d_op);
        const double v = sign * e1_last;
        const double improvement = v - prev_signed;
        if (it > 0 && improvement < cfg.convergence_tol && improvement > -1e-7) break;
        prev_signed = v;
        const MatrixXcd zero = MatrixXcd::Zero(d * d, d * d);
        states = state_step(d, omega, zero, static_cast<double>(sign) * d_op,
                            std::make_pair(d_op, e0));
    }
    return e1_last;
}

// Deterministic approach vector: shift the first state toward its vacuum
// partner until its correlator under the pair's own optimal measurement hits
// the target, leaving the helper marginal untouched.
void slide_first_state_toward(StatePair& s, int d, double e0) {
    const HelstromResult h = helstrom(to_state(s.t0, d), to_state(s.t1, d));
    const MatrixXcd d_op =
        2.0 * h.optimal_povm.elements[0] - MatrixXcd::Identity(d * d, d * d);
    const MatrixXcd vac = vacuum_with_marginal(s.t0, d);
    const double e_raw = (s.t0 * d_op).trace().real();
    const double e_vac = (vac * d_op).trace().real();
    const double den = e_raw - e_vac;
    if (std::abs(den) < 1e-12) return;
    const double t = std::clamp((e_raw - e0) / den, 0.0, 1.0);
    s.t0 = (1.0 - t) * s.t0 + t * vac;
}

StatePair corr_seed(double omega, int d, double e0, int k, std::uint64_t base_seed) {
    if (k == 0) return pm_embedding(omega, d);
    Rng rng(splitmix64(splitmix64(base_seed, 0x636f7272ULL), static_cast<std::uint64_t>(k)));
    const double om_s = std::min(omega, 1.0 - 1e-9);
    const double rmax = std::min(om_s, 1.0 - om_s);
    switch (k % 3) {
        case 1: {
            static constexpr double kFracs[] = {0.175, 0.35, 0.6, 0.85};
            const double frac = kFracs[(k / 3) % 4];
            const bool qutrit_kind = d >= 3 && (k / 12) % 2 == 1;
            StatePair s = scheme_states(om_s, d, frac * rmax, qutrit_kind);
            slide_first_state_toward(s, d, e0);
            return s;
        }
        case 2:
            return pure_plus_vacuum_partner(omega, d, rng, (k / 3) % 2 == 1);
        default:
            return {wishart_energy_mixed(d, omega, rng), wishart_energy_mixed(d, omega, rng)};
    }
}

double rotated_vacuum_weight(const VectorXcd& psi, const MatrixXcd& u, int d) {
    double w = 0.0;
    for (int b = 0; b < d; ++b) {
        std::complex<double> amp = 0.0;
        for (int a = 0; a < d; ++a) amp += u(0, a) * psi(a * d + b);
        w += std::norm(amp);
    }
    return w;
}

std::complex<double> rotated_overlap(const VectorXcd& psi, const MatrixXcd& u0,
                                     const MatrixXcd& u1, int d) {
    const MatrixXcd w = u0.adjoint() * u1;
    std::complex<double> ov = 0.0;
    for (int a = 0; a < d; ++a)
        for (int ap = 0; ap < d; ++ap) {
            std::complex<double> s = 0.0;
            for (int b = 0; b < d; ++b) s += std::conj(psi(a * d + b)) * psi(ap * d + b);
            ov += s * w(a, ap);
        }
    return ov;
}

// Proposal cycle: generic rotation, short random rotation, then an
// energy-preserving phase rotation that is always accepted.
MatrixXcd sample_energy_unitary(const VectorXcd& psi, int d, double omega, Rng& rng,
                                int max_proposals) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi_v<double>);
    for (int k = 0; k < max_proposals; ++k) {
        MatrixXcd u;
        switch (k % 3) {
            case 0:
                u = haar_unitary(d, rng);
                break;
            case 1: {
                Eigen::SelfAdjointEigenSolver<MatrixXcd> es(random_hermitian(d, rng));
                VectorXcd ph(d);
                for (int i = 0; i < d; ++i) ph(i) = std::polar(1.0, 0.05 * es.eigenvalues()(i));
                u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
                break;
            }
            default: {
                VectorXcd ph(d);
                for (int i = 0; i < d; ++i) ph(i) = std::polar(1.0, phase(rng));
                u = MatrixXcd(ph.asDiagonal());
                break;
            }
        }
        if (rotated_vacuum_weight(psi, u, d) >= 1.0 - omega - 1e-12) return u;
    }
    throw SamplingExhausted("no energy-compatible unitary within " +
                            std::to_string(max_proposals) + " proposals");
}

}  // namespace

SeesawW2Result seesaw_w2(const EnergyBound& omega, int local_dim, const SeesawConfig& cfg) {
    validate_config(cfg);
    validate_local_dim(local_dim);
    const double om = omega.omega;
    if (om < kDegenerateOmega) {
        const StatePair s = pm_embedding(0.0, local_dim);
        DensityMatrix t0 = to_state(s.t0, local_dim);
        DensityMatrix t1 = to_state(s.t1, local_dim);
        HelstromResult h = helstrom(t0, t1);
        return {h.w2, {{t0, t1}, h.optimal_povm}};
    }
    auto results = map_restarts<SeesawW2Result>(cfg.restarts, [&](int k) {
        return run_w2_restart(om, local_dim, cfg, w2_seed(om, local_dim, k, cfg.rng_seed));
    });
    size_t best = 0;
    for (size_t k = 1; k < results.size(); ++k)
        if (results[k]->w2 > results[best]->w2) best = k;
    return std::move(*results[best]);
}

double seesaw_correlator_boundary(const EnergyBound& omega, double e0_target, int local_dim,
                                  const SeesawConfig& cfg, BoundaryDirection dir) {
    validate_config(cfg);
    validate_local_dim(local_dim);
    if (!std::isfinite(e0_target) || std::abs(e0_target) > 1.0 + 1e-12)
        throw Infeasible("correlator target outside [-1, 1] is unreachable");
    const double e0 = std::clamp(e0_target, -1.0, 1.0);
    const double om = omega.omega;
    if (om < kDegenerateOmega) return e0;
    const CorrelatorRange pm = pm_ellipse_max_correlator(omega, e0);
    if (std::abs(e0) >= 1.0 - kVertexMargin)
        return dir == BoundaryDirection::Max ? pm.e1_max : pm.e1_min;

    const int sign = dir == BoundaryDirection::Max ? 1 : -1;
    auto vals = map_restarts<double>(cfg.restarts, [&](int k) {
        return run_corr_restart(om, local_dim, e0, sign, cfg,
                                corr_seed(om, local_dim, e0, k, cfg.rng_seed));
    });
    double best = -2.0;
    for (const auto& v : vals) best = std::max(best, sign * *v);
    return sign * best;
}

double unitary_nogo_check(const EnergyBound& omega, int local_dim, int trials,
                          std::uint64_t rng_seed, int max_proposals) {
    if (local_dim < 2 || local_dim > 6) throw InvalidParams("local_dim must be in [2, 6]");
    if (trials < 1) throw InvalidParams("trials must be >= 1");
    if (max_proposals < 1) throw InvalidParams("max_proposals must be >= 1");
    const int d = local_dim;
    const double om = omega.omega;
    Rng rng(splitmix64(rng_seed, 0x756e6f676fULL));
    std::uniform_real_distribution<double> uo(0.0, 1.0);
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        const double weight = 1.0 - om * uo(rng);
        const VectorXcd psi = random_bipartite_with_vacuum(d, d, weight, rng);
        const MatrixXcd u0 = sample_energy_unitary(psi, d, om, rng, max_proposals);
        const MatrixXcd u1 = sample_energy_unitary(psi, d, om, rng, max_proposals);
        const std::complex<double> ov = rotated_overlap(psi, u0, u1, d);
        best = std::max(best, 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - std::norm(ov)))));
    }
    return best;
}

}  // namespace eapm
