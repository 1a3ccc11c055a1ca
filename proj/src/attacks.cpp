#include "eapm/attacks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "eapm/block_sdp.hpp"
#include "eapm/errors.hpp"
#include "eapm/linalg.hpp"
#include "eapm/parallel.hpp"
#include "eapm/random.hpp"
#include "eapm/sdp.hpp"

namespace eapm {
namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

constexpr double kDegenerateOmega = 1e-12;
constexpr double kModelFeasTol = 1e-7;

double plog2p(double p) {
    if (p <= 0.0) return 0.0;
    return p * std::log2(p);
}

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

VectorXd softmax(VectorXd s) {
    s.array() -= s.maxCoeff();
    VectorXd e = s.array().exp();
    return e / e.sum();
}

void validate_observation(const ObservedStatistics& obs) {
    if (!std::isfinite(obs.w2_obs) || obs.w2_obs < 0.5 - 1e-12 || obs.w2_obs > 1.0 + 1e-12)
        throw InvalidParams("observed value must lie in [1/2, 1]");
    if (obs.x_star < 0 || obs.x_star > 1)
        throw InvalidParams("x_star must be 0 or 1 in the two-input scenario");
    if (obs.y_star != 0)
        throw InvalidParams("y_star must be 0: the scenario has a single measurement");
}

void validate_config(const SeesawConfig& cfg) {
    if (cfg.max_iters < 1) throw InvalidParams("max_iters must be >= 1");
    if (!(cfg.convergence_tol > 0.0)) throw InvalidParams("convergence_tol must be > 0");
    if (cfg.restarts < 1) throw InvalidParams("restarts must be >= 1");
}

void validate_options(const AttackOptions& opts) {
    if (opts.branches < 2 || opts.branches > 6)
        throw InvalidParams("branches must be between 2 and 6");
    if (opts.local_dim < 2 || opts.local_dim > 3)
        throw InvalidParams("attack local_dim must be 2 or 3");
}

// Product state (sqrt(1-w)|0> + sign sqrt(w)|1>) on the message, vacuum helper.
MatrixXcd product_pair_state(double weight, int sign, int d) {
    VectorXcd v = VectorXcd::Zero(d);
    v(0) = std::sqrt(1.0 - weight);
    v(1) = static_cast<double>(sign) * std::sqrt(weight);
    MatrixXcd chi = MatrixXcd::Zero(d, d);
    chi(0, 0) = 1.0;
    return kron(MatrixXcd(v * v.adjoint()), chi);
}

// Strongest scheme pair available at the given local dimension, with its
// optimal discrimination measurement and success value.
struct BasePair {
    MatrixXcd t0, t1;
    Povm povm;
    double w;
};

BasePair attack_base(const EnergyBound& omega, int d) {
    const double om = omega.omega;
    MatrixXcd t0, t1;
    if (om <= kDegenerateOmega) {
        t0 = product_pair_state(0.0, 1, d);
        t1 = t0;
    } else if (om > 0.5) {
        t0 = product_pair_state(0.5, 1, d);
        t1 = product_pair_state(0.5, -1, d);
    } else if (d >= 3) {
        const OptimizeRResult opt = optimize_r(SchemeKind::Qutrit, omega);
        const Scheme sch = qutrit_scheme({omega, opt.r_star});
        t0 = sch.post_states[0].matrix;
        t1 = sch.post_states[1].matrix;
    } else {
        const OptimizeRResult opt = optimize_r(SchemeKind::Qubit, omega);
        const Scheme sch = qubit_scheme({omega, opt.r_star});
        t0 = sch.post_states[0].matrix;
        t1 = sch.post_states[1].matrix;
    }
    HelstromResult h = helstrom(DensityMatrix(t0, {d, d}), DensityMatrix(t1, {d, d}));
    return BasePair{std::move(t0), std::move(t1), std::move(h.optimal_povm), h.w2};
}

// Mixing attack over (identity, swapped) assignments of the base pair; the
// weight makes the average visible value equal w2_obs.
AttackModel two_branch_model(double w2_obs, const BasePair& base, int d, int branches) {
    const double w = base.w;
    if (w2_obs > w + 1e-9 || w2_obs < 1.0 - w - 1e-9)
        throw InfeasibleObservation("observed value lies outside the reachable mixing range");
    const double q0 = (w - 0.5 < 1e-9)
                          ? 0.5
                          : std::clamp((w2_obs - (1.0 - w)) / (2.0 * w - 1.0), 0.0, 1.0);
    const DensityMatrix d0(base.t0, {d, d});
    const DensityMatrix d1(base.t1, {d, d});
    std::vector<double> weights = {q0, 1.0 - q0};
    std::vector<std::vector<DensityMatrix>> branches_states = {{d0, d1}, {d1, d0}};
    for (int l = 2; l < branches; ++l) {
        weights.push_back(0.0);
        branches_states.push_back({d0, d1});
    }
    return AttackModel{std::move(weights), std::move(branches_states), base.povm};
}

MatrixXcd vacuum_operator(int d) {
    MatrixXcd e00 = MatrixXcd::Zero(d, d);
    e00(0, 0) = 1.0;
    return kron(e00, MatrixXcd::Identity(d, d));
}

MatrixXcd symmetrized(const MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

double real_inner(const MatrixXcd& a, const MatrixXcd& b) {
    return (a * b).trace().real();
}

// Solver output carries roundoff; project onto the unit-trace PSD cone and,
// when renormalization leaves a tiny vacuum deficit, blend just enough of the
// exact vacuum back in so the energy bound holds with its full slack.
DensityMatrix sanitized_state(const MatrixXcd& m, double omega, int d) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(symmetrized(m));
    const VectorXd vals = es.eigenvalues().cwiseMax(0.0);
    MatrixXcd cleaned = es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
    cleaned /= cleaned.trace().real();
    const double vac = real_inner(vacuum_operator(d), cleaned);
    const double deficit = (1.0 - omega) - vac;
    if (deficit > 0.0) {
        const double mu = std::min(1.0, deficit / std::max(1.0 - vac, 1e-12));
        MatrixXcd pure_vac = MatrixXcd::Zero(d * d, d * d);
        pure_vac(0, 0) = 1.0;
        cleaned = (1.0 - mu) * cleaned + mu * pure_vac;
    }
    return DensityMatrix(symmetrized(cleaned), DimList{d, d});
}

// --- min-entropy seesaw -----------------------------------------------------

using SigmaSet = std::vector<std::array<MatrixXcd, 2>>;

std::vector<int> assign_guesses(const SigmaSet& sigma, const MatrixXcd& m0, const MatrixXcd& m1,
                                int x_star) {
    std::vector<int> g(sigma.size());
    for (size_t l = 0; l < sigma.size(); ++l) {
        const double v0 = real_inner(sigma[l][static_cast<size_t>(x_star)], m0);
        const double v1 = real_inner(sigma[l][static_cast<size_t>(x_star)], m1);
        g[l] = v1 > v0 ? 1 : 0;
    }
    return g;
}

double assigned_success(const SigmaSet& sigma, const MatrixXcd& m0, const MatrixXcd& m1,
                        const std::vector<int>& guess, int x_star) {
    double pg = 0.0;
    for (size_t l = 0; l < sigma.size(); ++l)
        pg += real_inner(sigma[l][static_cast<size_t>(x_star)], guess[l] == 0 ? m0 : m1);
    return pg;
}

// Best unnormalized branch states for a fixed measurement and guess
// assignment, subject to weight, marginal, energy, and statistic constraints.
SigmaSet min_ent_state_step(const MatrixXcd& m0, const MatrixXcd& m1,
                            const std::vector<int>& guess, double w2_obs, double omega, int d,
                            int x_star, bool at_least) {
    const int nl = static_cast<int>(guess.size());
    const int dd = d * d;
    BlockSdp p;
    std::vector<std::array<int, 2>> blk(static_cast<size_t>(nl));
    for (int l = 0; l < nl; ++l) {
        blk[static_cast<size_t>(l)][0] = p.add_block(2 * dd, true);
        blk[static_cast<size_t>(l)][1] = p.add_block(2 * dd, true);
    }
    std::vector<std::array<int, 2>> vsl(static_cast<size_t>(nl));
    for (int l = 0; l < nl; ++l)
        for (int x = 0; x < 2; ++x) vsl[static_cast<size_t>(l)][static_cast<size_t>(x)] = p.add_block(1);
    const int stat_slack = at_least ? p.add_block(1) : -1;

    const MatrixXcd eye = MatrixXcd::Identity(dd, dd);
    const MatrixXd half_eye = realify_half(eye);
    const MatrixXd minus_one = MatrixXd::Constant(1, 1, -1.0);

    for (int l = 0; l < nl; ++l)
        p.set_objective(blk[static_cast<size_t>(l)][static_cast<size_t>(x_star)],
                        -realify_half(guess[static_cast<size_t>(l)] == 0 ? m0 : m1));

    // branch weight independent of the input
    for (int l = 0; l < nl; ++l)
        p.add_constraint({{{blk[static_cast<size_t>(l)][0], half_eye},
                           {blk[static_cast<size_t>(l)][1], -half_eye}},
                          0.0});
    // total weight
    {
        BlockConstraint c;
        for (int l = 0; l < nl; ++l) c.terms.push_back({blk[static_cast<size_t>(l)][0], half_eye});
        c.rhs = 1.0;
        p.add_constraint(std::move(c));
    }
    // helper marginal independent of the input
    for (const MatrixXcd& t : traceless_hermitian_basis(d)) {
        const MatrixXd a = realify_half(kron(MatrixXcd(MatrixXcd::Identity(d, d)), t));
        for (int l = 0; l < nl; ++l)
            p.add_constraint(
                {{{blk[static_cast<size_t>(l)][0], a}, {blk[static_cast<size_t>(l)][1], -a}}, 0.0});
    }
    // observed statistic: each input reproduces w2_obs, or the average is a
    // floor when only a minimum value is enforced
    if (at_least) {
        BlockConstraint c;
        for (int l = 0; l < nl; ++l) {
            c.terms.push_back({blk[static_cast<size_t>(l)][0], realify_half(m0)});
            c.terms.push_back({blk[static_cast<size_t>(l)][1], realify_half(m1)});
        }
        c.terms.push_back({stat_slack, minus_one});
        c.rhs = 2.0 * w2_obs;
        p.add_constraint(std::move(c));
    } else {
        for (int x = 0; x < 2; ++x) {
            BlockConstraint c;
            for (int l = 0; l < nl; ++l)
                c.terms.push_back({blk[static_cast<size_t>(l)][static_cast<size_t>(x)],
                                   realify_half(x == 0 ? m0 : m1)});
            c.rhs = w2_obs;
            p.add_constraint(std::move(c));
        }
    }
    // energy floor per branch state
    const MatrixXd a_vac = realify_half(vacuum_operator(d) - (1.0 - omega) * eye);
    for (int l = 0; l < nl; ++l)
        for (int x = 0; x < 2; ++x)
            p.add_constraint({{{blk[static_cast<size_t>(l)][static_cast<size_t>(x)], a_vac},
                               {vsl[static_cast<size_t>(l)][static_cast<size_t>(x)], minus_one}},
                              0.0});

    const BlockSolution sol = solve_block_sdp(p);
    SigmaSet sigma(static_cast<size_t>(nl));
    for (int l = 0; l < nl; ++l)
        for (int x = 0; x < 2; ++x)
            sigma[static_cast<size_t>(l)][static_cast<size_t>(x)] = symmetrized(
                derealify(sol.x[static_cast<size_t>(blk[static_cast<size_t>(l)][static_cast<size_t>(x)])]));
    return sigma;
}

// Best binary measurement for fixed branch states; the statistic constraint
// is carried along so the pair stays jointly feasible.
MatrixXcd min_ent_measurement_step(const SigmaSet& sigma, const std::vector<int>& guess,
                                   double w2_obs, int x_star, bool at_least) {
    const int dd = static_cast<int>(sigma.front()[0].rows());
    MatrixXcd c = MatrixXcd::Zero(dd, dd);
    for (size_t l = 0; l < sigma.size(); ++l) {
        if (guess[l] == 0)
            c += sigma[l][static_cast<size_t>(x_star)];
        else
            c -= sigma[l][static_cast<size_t>(x_star)];
    }
    MatrixXcd s0 = MatrixXcd::Zero(dd, dd);
    MatrixXcd s1 = MatrixXcd::Zero(dd, dd);
    double t1sum = 0.0;
    for (size_t l = 0; l < sigma.size(); ++l) {
        s0 += sigma[l][0];
        s1 += sigma[l][1];
        t1sum += sigma[l][1].trace().real();
    }
    SdpProblem p;
    p.d = dd;
    p.objective = symmetrized(c);
    if (at_least) {
        p.inequalities.emplace_back(symmetrized(s0 - s1), 2.0 * w2_obs - t1sum);
    } else {
        // p(0|0) = w2_obs and p(1|1) = w2_obs, written in terms of M0 alone
        p.equalities.emplace_back(symmetrized(s0), w2_obs);
        p.equalities.emplace_back(symmetrized(s1), t1sum - w2_obs);
    }
    p.upper_bound = MatrixXcd::Identity(dd, dd);
    const SdpResult r = sdp_solve(p);

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(symmetrized(r.optimizer));
    const VectorXd vals = es.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
    return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
}

AttackModel build_min_ent_model(const SigmaSet& sigma, const MatrixXcd& m0, double omega, int d,
                                const BasePair& base) {
    const int dd = d * d;
    std::vector<double> weights;
    std::vector<std::vector<DensityMatrix>> branches_states;
    double total = 0.0;
    for (const auto& pair : sigma) total += std::max(0.0, pair[0].trace().real());
    if (total <= 0.0) total = 1.0;
    for (const auto& pair : sigma) {
        weights.push_back(std::max(0.0, pair[0].trace().real()) / total);
        std::vector<DensityMatrix> states;
        for (int x = 0; x < 2; ++x) {
            const MatrixXcd& s = pair[static_cast<size_t>(x)];
            const double tr = s.trace().real();
            if (tr < 1e-10) {
                states.emplace_back(x == 0 ? base.t0 : base.t1, DimList{d, d});
            } else {
                states.push_back(sanitized_state(s, omega, d));
            }
        }
        branches_states.push_back(std::move(states));
    }
    const MatrixXcd m0s = symmetrized(m0);
    return AttackModel{std::move(weights), std::move(branches_states),
                       Povm({m0s, MatrixXcd::Identity(dd, dd) - m0s})};
}

struct MinEntOut {
    double pg = 0.0;
    AttackModel model;
};

MinEntOut run_min_ent_restart(int k, const ObservedStatistics& obs, const SeesawConfig& cfg,
                              const AttackOptions& opts, const BasePair& base) {
    const int d = opts.local_dim;
    const int dd = d * d;
    const int nl = opts.branches;
    MatrixXcd m0, m1;
    if (k == 0) {
        m0 = base.povm.elements[0];
        m1 = base.povm.elements[1];
    } else {
        Rng rng(splitmix64(splitmix64(cfg.rng_seed, 0x6d696e65u), static_cast<std::uint64_t>(k)));
        const MatrixXcd u = haar_unitary(dd, rng);
        const int rank = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(dd - 1));
        m0 = u.leftCols(rank) * u.leftCols(rank).adjoint();
        m1 = MatrixXcd::Identity(dd, dd) - m0;
    }
    std::vector<int> guess(static_cast<size_t>(nl));
    for (int l = 0; l < nl; ++l)
        guess[static_cast<size_t>(l)] = (l % 2 == 0) ? obs.x_star : 1 - obs.x_star;

    SigmaSet sigma;
    double prev = -std::numeric_limits<double>::infinity();
    double pg = 0.0;
    for (int it = 0; it < cfg.max_iters; ++it) {
        sigma = min_ent_state_step(m0, m1, guess, obs.w2_obs, obs.omega.omega, d, obs.x_star,
                                   opts.w2_at_least);
        guess = assign_guesses(sigma, m0, m1, obs.x_star);
        m0 = min_ent_measurement_step(sigma, guess, obs.w2_obs, obs.x_star, opts.w2_at_least);
        m1 = MatrixXcd::Identity(dd, dd) - m0;
        guess = assign_guesses(sigma, m0, m1, obs.x_star);
        pg = assigned_success(sigma, m0, m1, guess, obs.x_star);
        const double improvement = pg - prev;
        if (it > 0 && improvement < cfg.convergence_tol && improvement > -1e-7) break;
        prev = pg;
    }
    AttackModel model = build_min_ent_model(sigma, m0, obs.omega.omega, d, base);
    const double achieved = guessing_probability(model, obs.x_star);
    return MinEntOut{achieved, std::move(model)};
}

// --- von Neumann entropy attack (sequential quadratic steps) ----------------

// Parameter layout: complex factors G per (branch, input), measurement
// spectrum logits, branch weight logits, slack roots for the energy floor,
// and one slack root for the statistic when it is only a floor.
struct VnLayout {
    int nl = 2;
    int d = 3;
    int dd = 9;
    int rank = 4;
    bool at_least = false;

    int per_factor() const { return 2 * dd * rank; }
    int g_off(int l, int x) const { return (2 * l + x) * per_factor(); }
    int theta_off() const { return 2 * nl * per_factor(); }
    int s_off() const { return theta_off() + dd; }
    int u_off(int l, int x) const { return s_off() + nl + 2 * l + x; }
    int t_off() const { return s_off() + nl + 2 * nl; }
    int n() const { return t_off() + (at_least ? 1 : 0); }
    int mc() const { return (at_least ? 1 : 2) + nl * (d * d - 1) + 2 * nl; }
};

MatrixXcd unpack_factor(const VectorXd& p, int off, int rows, int cols) {
    MatrixXcd g(rows, cols);
    int i = off;
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) {
            g(r, c) = std::complex<double>(p(i), p(i + 1));
            i += 2;
        }
    return g;
}

void pack_factor(VectorXd& p, int off, const MatrixXcd& g) {
    int i = off;
    for (int c = 0; c < g.cols(); ++c)
        for (int r = 0; r < g.rows(); ++r) {
            p(i) = g(r, c).real();
            p(i + 1) = g(r, c).imag();
            i += 2;
        }
}

MatrixXcd factor_from_state(const MatrixXcd& tau, int rank) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(tau);
    const int dd = static_cast<int>(tau.rows());
    MatrixXcd g = MatrixXcd::Zero(dd, rank);
    for (int j = 0; j < rank && j < dd; ++j) {
        const int idx = dd - 1 - j;
        const double lam = std::max(0.0, es.eigenvalues()(idx));
        g.col(j) = es.eigenvectors().col(idx) * std::sqrt(lam);
    }
    return g;
}

// Everything fixed while one start runs: the measurement eigenbasis and the
// constraint operators.
struct VnContext {
    VnLayout lay;
    MatrixXcd u_basis;
    std::vector<MatrixXcd> marg_ops;
    MatrixXcd vac_op;
    double w2_obs = 0.5;
    double omega = 0.0;
    int x_star = 0;
};

struct VnValue {
    double f = 0.0;
    VectorXd c;
};

VnValue vn_eval(const VnContext& ctx, const VectorXd& p) {
    const VnLayout& L = ctx.lay;
    std::vector<std::array<MatrixXcd, 2>> tau(static_cast<size_t>(L.nl));
    for (int l = 0; l < L.nl; ++l)
        for (int x = 0; x < 2; ++x) {
            const MatrixXcd g = unpack_factor(p, L.g_off(l, x), L.dd, L.rank);
            MatrixXcd m = g * g.adjoint();
            const double tr = std::max(m.trace().real(), 1e-12);
            tau[static_cast<size_t>(l)][static_cast<size_t>(x)] = m / tr;
        }
    VectorXd evals(L.dd);
    for (int i = 0; i < L.dd; ++i) evals(i) = sigmoid(p(L.theta_off() + i));
    const MatrixXcd m0 = ctx.u_basis * evals.asDiagonal() * ctx.u_basis.adjoint();
    const MatrixXcd m1 = MatrixXcd::Identity(L.dd, L.dd) - m0;
    const VectorXd q = softmax(p.segment(L.s_off(), L.nl));

    VnValue out;
    out.c.resize(L.mc());
    double f = 0.0;
    double stat0 = 0.0;
    double stat1 = 0.0;
    for (int l = 0; l < L.nl; ++l) {
        const auto& pair = tau[static_cast<size_t>(l)];
        const double pb = std::clamp(real_inner(pair[static_cast<size_t>(ctx.x_star)], m0), 0.0, 1.0);
        f += q(l) * (-plog2p(pb) - plog2p(1.0 - pb));
        stat0 += q(l) * real_inner(pair[0], m0);
        stat1 += q(l) * real_inner(pair[1], m1);
    }
    out.f = f;
    int i = 0;
    if (L.at_least) {
        // only a floor on the statistic, averaged over the two inputs
        out.c(i++) = stat0 + stat1 - 2.0 * ctx.w2_obs - p(L.t_off()) * p(L.t_off());
    } else {
        out.c(i++) = stat0 - ctx.w2_obs;
        out.c(i++) = stat1 - ctx.w2_obs;
    }
    for (int l = 0; l < L.nl; ++l) {
        const MatrixXcd diff =
            tau[static_cast<size_t>(l)][0] - tau[static_cast<size_t>(l)][1];
        for (const MatrixXcd& op : ctx.marg_ops) out.c(i++) = real_inner(op, diff);
    }
    for (int l = 0; l < L.nl; ++l)
        for (int x = 0; x < 2; ++x) {
            const double u = p(L.u_off(l, x));
            out.c(i++) = real_inner(ctx.vac_op, tau[static_cast<size_t>(l)][static_cast<size_t>(x)]) -
                         (1.0 - ctx.omega) - u * u;
        }
    return out;
}

struct SqpOut {
    VectorXd p;
    double f = 0.0;
    double cmax = 0.0;
};

// Equality-constrained sequential quadratic iteration with damped BFGS
// curvature, an l1 merit line search, and a final feasibility polish.
SqpOut run_sqp(const VnContext& ctx, VectorXd p, int max_iters, double tol) {
    const int n = ctx.lay.n();
    const int mc = ctx.lay.mc();
    VnValue cur = vn_eval(ctx, p);

    VectorXd g(n);
    MatrixXd jac(mc, n);
    const auto differentiate = [&](const VectorXd& at) {
        VectorXd pp = at;
        for (int i = 0; i < n; ++i) {
            const double h = 1e-6 * std::max(1.0, std::abs(at(i)));
            pp(i) = at(i) + h;
            const VnValue up = vn_eval(ctx, pp);
            pp(i) = at(i) - h;
            const VnValue dn = vn_eval(ctx, pp);
            pp(i) = at(i);
            g(i) = (up.f - dn.f) / (2.0 * h);
            jac.col(i) = (up.c - dn.c) / (2.0 * h);
        }
    };

    MatrixXd bmat = MatrixXd::Identity(n, n);
    VectorXd nu = VectorXd::Zero(mc);
    VectorXd p_prev, glag_prev;
    double rho = 1.0;
    int flat = 0;
    double f_prev = cur.f;

    for (int it = 0; it < max_iters; ++it) {
        differentiate(p);
        if (p_prev.size() > 0) {
            const VectorXd glag = g - jac.transpose() * nu;
            const VectorXd sk = p - p_prev;
            const VectorXd yk = glag - glag_prev;
            const VectorXd bs = bmat * sk;
            const double sbs = sk.dot(bs);
            const double sy = sk.dot(yk);
            if (sbs > 1e-14) {
                const double theta = (sy >= 0.2 * sbs) ? 1.0 : 0.8 * sbs / (sbs - sy);
                const VectorXd r = theta * yk + (1.0 - theta) * bs;
                const double sr = sk.dot(r);
                if (sr > 1e-14) bmat += r * r.transpose() / sr - bs * bs.transpose() / sbs;
            }
        }

        MatrixXd kkt = MatrixXd::Zero(n + mc, n + mc);
        kkt.topLeftCorner(n, n) = bmat + 1e-8 * MatrixXd::Identity(n, n);
        kkt.topRightCorner(n, mc) = jac.transpose();
        kkt.bottomLeftCorner(mc, n) = jac;
        kkt.bottomRightCorner(mc, mc) = -1e-10 * MatrixXd::Identity(mc, mc);
        VectorXd rhs(n + mc);
        rhs.head(n) = -g;
        rhs.tail(mc) = -cur.c;
        const VectorXd sol = kkt.partialPivLu().solve(rhs);
        const VectorXd dp = sol.head(n);
        const VectorXd nu_new = sol.tail(mc);
        if (!dp.allFinite()) break;

        rho = std::max(rho, 2.0 * nu_new.cwiseAbs().maxCoeff() + 1.0);
        const double c1 = cur.c.cwiseAbs().sum();
        const double phi0 = cur.f + rho * c1;
        const double dphi = g.dot(dp) - rho * c1;
        double alpha = 1.0;
        VnValue next;
        bool accepted = false;
        for (int back = 0; back < 14; ++back) {
            next = vn_eval(ctx, p + alpha * dp);
            if (next.f + rho * next.c.cwiseAbs().sum() <=
                phi0 + 1e-4 * alpha * std::min(dphi, 0.0)) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            next = vn_eval(ctx, p + alpha * dp);
            bmat = MatrixXd::Identity(n, n);
        }

        p_prev = p;
        glag_prev = g - jac.transpose() * nu_new;
        p += alpha * dp;
        cur = next;
        nu = nu_new;

        const double cmax = cur.c.cwiseAbs().maxCoeff();
        const double step = alpha * dp.cwiseAbs().maxCoeff();
        if (cmax < 1e-9 && cur.f < 1e-12) break;
        if (cmax < 1e-9 && std::abs(cur.f - f_prev) < tol) {
            if (++flat >= 3) break;
        } else {
            flat = 0;
        }
        f_prev = cur.f;
        if (step < 1e-11 && cmax < 1e-9) break;
    }

    // Feasibility polish: Gauss-Newton steps on the constraint residual alone.
    for (int it = 0; it < 30 && cur.c.cwiseAbs().maxCoeff() > 1e-10; ++it) {
        differentiate(p);
        const MatrixXd jjt =
            jac * jac.transpose() + 1e-12 * MatrixXd::Identity(mc, mc);
        const VectorXd dp = -jac.transpose() * jjt.ldlt().solve(cur.c);
        if (!dp.allFinite()) break;
        double alpha = 1.0;
        const double base_norm = cur.c.norm();
        VnValue next;
        bool improved = false;
        for (int back = 0; back < 12; ++back) {
            next = vn_eval(ctx, p + alpha * dp);
            if (next.c.norm() < base_norm * (1.0 - 1e-4 * alpha)) {
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!improved) break;
        p += alpha * dp;
        cur = next;
    }

    SqpOut out;
    out.p = std::move(p);
    out.f = cur.f;
    out.cmax = cur.c.cwiseAbs().maxCoeff();
    return out;
}

struct VnStart {
    VectorXd p;
    MatrixXcd u_basis;
};

// Inverse of the unassisted optimum: the energy at which the closed-form
// product value equals the target.
double product_energy_for(double w2) {
    const double disc = std::max(0.0, 1.0 - 4.0 * (w2 - 0.5) * (w2 - 0.5));
    return 0.5 * (1.0 - std::sqrt(disc));
}

VnStart vn_start(int k, const VnLayout& L, const ObservedStatistics& obs, const BasePair& base,
                 std::uint64_t seed) {
    VnStart st;
    st.p = VectorXd::Zero(L.n());
    const double om = obs.omega.omega;

    const auto load_model = [&](const std::vector<MatrixXcd>& states0,
                                const std::vector<MatrixXcd>& states1, const VectorXd& logits,
                                const MatrixXcd& m0) {
        for (int l = 0; l < L.nl; ++l) {
            pack_factor(st.p, L.g_off(l, 0), factor_from_state(states0[static_cast<size_t>(l)], L.rank));
            pack_factor(st.p, L.g_off(l, 1), factor_from_state(states1[static_cast<size_t>(l)], L.rank));
        }
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(symmetrized(m0));
        st.u_basis = es.eigenvectors();
        for (int i = 0; i < L.dd; ++i) {
            const double e = std::clamp(es.eigenvalues()(i), 0.0, 1.0);
            st.p(L.theta_off() + i) = std::clamp(std::log((e + 1e-12) / (1.0 - e + 1e-12)), -18.0, 18.0);
        }
        st.p.segment(L.s_off(), L.nl) = logits;
        for (int l = 0; l < L.nl; ++l)
            for (int x = 0; x < 2; ++x) {
                const MatrixXcd& tau = (x == 0 ? states0 : states1)[static_cast<size_t>(l)];
                const double tr = std::max(tau.trace().real(), 1e-12);
                const double vac = real_inner(vacuum_operator(L.d), tau) / tr;
                st.p(L.u_off(l, x)) = std::sqrt(std::max(0.0, vac - (1.0 - om)));
            }
    };

    const bool honest_ok = product_energy_for(obs.w2_obs) <= om + 1e-12;
    if (k == 1 && honest_ok) {
        const double om_h = product_energy_for(obs.w2_obs);
        const MatrixXcd h0 = product_pair_state(om_h, 1, L.d);
        const MatrixXcd h1 = product_pair_state(om_h, -1, L.d);
        const HelstromResult h = helstrom(DensityMatrix(h0, {L.d, L.d}), DensityMatrix(h1, {L.d, L.d}));
        std::vector<MatrixXcd> s0(static_cast<size_t>(L.nl), h0);
        std::vector<MatrixXcd> s1(static_cast<size_t>(L.nl), h1);
        load_model(s0, s1, VectorXd::Zero(L.nl), h.optimal_povm.elements[0]);
        return st;
    }
    if (k <= 1) {
        const double w = base.w;
        const double q0 = (w - 0.5 < 1e-9)
                              ? 0.5
                              : std::clamp((obs.w2_obs - (1.0 - w)) / (2.0 * w - 1.0), 0.0, 1.0);
        std::vector<MatrixXcd> s0(static_cast<size_t>(L.nl), base.t0);
        std::vector<MatrixXcd> s1(static_cast<size_t>(L.nl), base.t1);
        VectorXd logits = VectorXd::Constant(L.nl, -30.0);
        logits(0) = std::log(q0 + 1e-12);
        if (L.nl > 1) {
            s0[1] = base.t1;
            s1[1] = base.t0;
            logits(1) = std::log(1.0 - q0 + 1e-12);
        }
        load_model(s0, s1, logits, base.povm.elements[0]);
        return st;
    }

    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < L.theta_off(); ++i) st.p(i) = 0.5 * gauss(rng);
    for (int i = 0; i < L.dd; ++i) st.p(L.theta_off() + i) = 2.0 * gauss(rng);
    for (int l = 0; l < L.nl; ++l) st.p(L.s_off() + l) = gauss(rng);
    for (int l = 0; l < L.nl; ++l)
        for (int x = 0; x < 2; ++x) st.p(L.u_off(l, x)) = 0.3;
    st.u_basis = haar_unitary(L.dd, rng);
    return st;
}

AttackModel build_vn_model(const VnContext& ctx, const VectorXd& p, const BasePair& base) {
    const VnLayout& L = ctx.lay;
    std::vector<double> weights;
    std::vector<std::vector<DensityMatrix>> branches_states;
    const VectorXd q = softmax(p.segment(L.s_off(), L.nl));
    for (int l = 0; l < L.nl; ++l) {
        weights.push_back(q(l));
        std::vector<DensityMatrix> states;
        for (int x = 0; x < 2; ++x) {
            const MatrixXcd g = unpack_factor(p, L.g_off(l, x), L.dd, L.rank);
            MatrixXcd tau = g * g.adjoint();
            const double tr = tau.trace().real();
            if (tr < 1e-12) {
                states.emplace_back(x == 0 ? base.t0 : base.t1, DimList{L.d, L.d});
            } else {
                states.push_back(sanitized_state(tau, ctx.omega, L.d));
            }
        }
        branches_states.push_back(std::move(states));
    }
    VectorXd evals(L.dd);
    for (int i = 0; i < L.dd; ++i) evals(i) = sigmoid(p(L.theta_off() + i));
    const MatrixXcd m0 = symmetrized(ctx.u_basis * evals.asDiagonal() * ctx.u_basis.adjoint());
    return AttackModel{std::move(weights), std::move(branches_states),
                       Povm({m0, MatrixXcd::Identity(L.dd, L.dd) - m0})};
}

}  // namespace

double binary_entropy(double p) {
    const double q = std::clamp(p, 0.0, 1.0);
    return -plog2p(q) - plog2p(1.0 - q);
}

void AttackModel::validate(const EnergyBound& omega) const {
    if (q.empty() || q.size() != branch_states.size())
        throw ShapeMismatch("attack model needs one weight per branch");
    double total = 0.0;
    for (double w : q) {
        if (!(w >= -1e-12)) throw InvalidParams("branch weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidParams("branch weights must sum to 1");
    if (measurement.elements.empty()) throw ShapeMismatch("attack model needs a measurement");
    const size_t nx = branch_states.front().size();
    if (nx == 0) throw ShapeMismatch("each branch needs a state per input");
    const int dim = branch_states.front().front().dim();
    if (measurement.elements.front().rows() != dim)
        throw ShapeMismatch("measurement dimension must match the branch states");
    for (const auto& branch : branch_states) {
        if (branch.size() != nx) throw ShapeMismatch("branches must share the input count");
        MatrixXcd first_marginal;
        for (size_t x = 0; x < branch.size(); ++x) {
            const DensityMatrix& st = branch[x];
            if (st.dim() != dim) throw ShapeMismatch("branch states must share one dimension");
            if (vacuum_weight(st) < 1.0 - omega.omega - 1e-8)
                throw InvalidParams("a branch state violates the energy bound");
            if (st.dims.size() < 2) continue;
            const MatrixXcd marg = partial_trace(st.matrix, st.dims, {1});
            if (x == 0)
                first_marginal = marg;
            else if ((marg - first_marginal).cwiseAbs().maxCoeff() > 1e-7)
                throw InvalidParams("the helper marginal must not depend on the input");
        }
    }
}

double guessing_probability(const AttackModel& model, int x_star) {
    double pg = 0.0;
    for (size_t l = 0; l < model.q.size(); ++l) {
        const MatrixXcd& st = model.branch_states.at(l).at(static_cast<size_t>(x_star)).matrix;
        double best = 0.0;
        for (const MatrixXcd& m : model.measurement.elements)
            best = std::max(best, (st * m).trace().real());
        pg += model.q[l] * best;
    }
    return pg;
}

double conditional_outcome_entropy(const AttackModel& model, int x_star) {
    double h = 0.0;
    for (size_t l = 0; l < model.q.size(); ++l) {
        const MatrixXcd& st = model.branch_states.at(l).at(static_cast<size_t>(x_star)).matrix;
        double hl = 0.0;
        for (const MatrixXcd& m : model.measurement.elements) {
            const double p = std::clamp((st * m).trace().real(), 0.0, 1.0);
            hl -= plog2p(p);
        }
        h += model.q[l] * hl;
    }
    return h;
}

AttackModel explicit_two_branch_attack(const ObservedStatistics& obs) {
    validate_observation(obs);
    const BasePair base = attack_base(obs.omega, 3);
    return two_branch_model(obs.w2_obs, base, 3, 2);
}

AttackBound min_entropy_attack(const ObservedStatistics& obs, const SeesawConfig& cfg,
                               const AttackOptions& opts) {
    validate_observation(obs);
    validate_config(cfg);
    validate_options(opts);
    const BasePair base = attack_base(obs.omega, opts.local_dim);
    // The mixing floor also certifies feasibility of the observation.
    AttackModel best_model = two_branch_model(obs.w2_obs, base, opts.local_dim, opts.branches);
    double best_pg = guessing_probability(best_model, obs.x_star);

    if (obs.omega.omega <= kDegenerateOmega) {
        // Nothing transmits, so only w2_obs = 1/2 passes the range check. A
        // helper-register flag pins the outcome per branch while the two
        // branches average to a fair coin on every input.
        const int d = opts.local_dim;
        MatrixXcd e00 = MatrixXcd::Zero(d, d);
        e00(0, 0) = 1.0;
        MatrixXcd e11 = MatrixXcd::Zero(d, d);
        e11(1, 1) = 1.0;
        const DensityMatrix flag0(kron(e00, e00), {d, d});
        const DensityMatrix flag1(kron(e00, e11), {d, d});
        std::vector<double> weights(static_cast<size_t>(opts.branches), 0.0);
        weights[0] = 0.5;
        weights[1] = 0.5;
        std::vector<std::vector<DensityMatrix>> branches_states(
            static_cast<size_t>(opts.branches), std::vector<DensityMatrix>{flag0, flag0});
        branches_states[1] = {flag1, flag1};
        const MatrixXcd read0 = kron(MatrixXcd(MatrixXcd::Identity(d, d)), e00);
        AttackModel reader{std::move(weights), std::move(branches_states),
                           Povm({read0, MatrixXcd::Identity(d * d, d * d) - read0})};
        return AttackBound{0.0, std::move(reader)};
    }

    auto runs = map_restarts<MinEntOut>(cfg.restarts, [&](int k) -> std::optional<MinEntOut> {
        try {
            return run_min_ent_restart(k, obs, cfg, opts, base);
        } catch (const Infeasible&) {
            if (k == 0) throw;
            return std::nullopt;
        } catch (const NumericalFailure&) {
            if (k == 0) throw;
            return std::nullopt;
        }
    });

    for (auto& r : runs) {
        if (r && r->pg > best_pg) {
            best_pg = r->pg;
            best_model = std::move(r->model);
        }
    }
    const double pg = std::clamp(guessing_probability(best_model, obs.x_star), 1e-12, 1.0);
    return AttackBound{std::max(0.0, -std::log2(pg)), std::move(best_model)};
}

AttackBound vn_entropy_attack(const ObservedStatistics& obs, const SeesawConfig& cfg,
                              const AttackOptions& opts) {
    validate_observation(obs);
    validate_config(cfg);
    validate_options(opts);
    const BasePair base = attack_base(obs.omega, opts.local_dim);

    VnLayout lay;
    lay.nl = opts.branches;
    lay.d = opts.local_dim;
    lay.dd = lay.d * lay.d;
    lay.rank = std::min(4, lay.dd);
    lay.at_least = opts.w2_at_least;

    std::vector<MatrixXcd> marg_ops;
    for (const MatrixXcd& t : traceless_hermitian_basis(lay.d))
        marg_ops.push_back(kron(MatrixXcd(MatrixXcd::Identity(lay.d, lay.d)), t));
    const MatrixXcd vac_op = vacuum_operator(lay.d);

    struct VnOut {
        SqpOut sqp;
        MatrixXcd u_basis;
    };
    auto runs = map_restarts<VnOut>(cfg.restarts, [&](int k) -> std::optional<VnOut> {
        const std::uint64_t seed =
            splitmix64(splitmix64(cfg.rng_seed, 0x766e6174u), static_cast<std::uint64_t>(k));
        VnStart st = vn_start(k, lay, obs, base, seed);
        VnContext ctx{lay, st.u_basis, marg_ops, vac_op, obs.w2_obs, obs.omega.omega, obs.x_star};
        VnOut out{run_sqp(ctx, std::move(st.p), cfg.max_iters, cfg.convergence_tol),
                  std::move(st.u_basis)};
        if (out.sqp.cmax > kModelFeasTol) return std::nullopt;
        return out;
    });

    const VnOut* best = nullptr;
    for (const auto& r : runs)
        if (r && (!best || r->sqp.f < best->sqp.f)) best = &*r;
    if (!best)
        throw OptimizationFailure("no feasible start found within the restart budget");

    VnContext ctx{lay, best->u_basis, marg_ops, vac_op, obs.w2_obs, obs.omega.omega, obs.x_star};
    AttackModel model = build_vn_model(ctx, best->sqp.p, base);
    const double bits = std::max(0.0, conditional_outcome_entropy(model, obs.x_star));
    return AttackBound{bits, std::move(model)};
}

std::pair<double, double> classical_entropies(const ClassicalSideInfo& info, int x_star,
                                              int y_star) {
    const size_t nl = info.q.size();
    if (nl == 0 || info.states.size() != nl || info.povms.size() != nl)
        throw ShapeMismatch("side information needs weights, states, and measurements per branch");
    if (x_star < 0 || y_star < 0) throw ShapeMismatch("input indices must be nonnegative");
    double total = 0.0;
    for (double w : info.q) {
        if (!(w >= -1e-12)) throw InvalidParams("branch weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidParams("branch weights must sum to 1");

    double pg = 0.0;
    double h = 0.0;
    for (size_t l = 0; l < nl; ++l) {
        if (static_cast<size_t>(x_star) >= info.states[l].size() ||
            static_cast<size_t>(y_star) >= info.povms[l].size())
            throw ShapeMismatch("input index outside the provided strategy");
        const DensityMatrix& st = info.states[l][static_cast<size_t>(x_star)];
        const Povm& povm = info.povms[l][static_cast<size_t>(y_star)];
        if (povm.elements.empty() || povm.elements.front().rows() != st.dim())
            throw ShapeMismatch("measurement dimension must match the state");
        double best = 0.0;
        double hl = 0.0;
        for (const MatrixXcd& m : povm.elements) {
            const double p = std::clamp((st.matrix * m).trace().real(), 0.0, 1.0);
            best = std::max(best, p);
            hl -= plog2p(p);
        }
        pg += info.q[l] * best;
        h += info.q[l] * hl;
    }
    pg = std::clamp(pg, 1e-300, 1.0);
    return {-std::log2(pg), h};
}

}  // namespace eapm
