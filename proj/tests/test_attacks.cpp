#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "eapm/attacks.hpp"
#include "eapm/errors.hpp"
#include "eapm/quantum.hpp"
#include "eapm/schemes.hpp"

using namespace eapm;
using Eigen::MatrixXcd;

namespace {

// Energy bound beyond which the entangled qutrit scheme reaches a perfect
// success probability.
constexpr double kSqrt2Minus1 = 0.41421356237309515;

SeesawConfig quick_cfg(int restarts, std::uint64_t seed = 7) {
    SeesawConfig cfg;
    cfg.restarts = restarts;
    cfg.max_iters = 40;
    cfg.rng_seed = seed;
    return cfg;
}

double scheme_w(double omega) { return optimize_r(SchemeKind::Qutrit, EnergyBound(omega)).w2_star; }

// Success probability seen by Alice and Bob for one input, averaged over the
// hidden branch.
double visible_success(const AttackModel& m, int x) {
    double v = 0.0;
    for (size_t l = 0; l < m.q.size(); ++l)
        v += m.q[l] * (m.branch_states[l][static_cast<size_t>(x)].matrix *
                       m.measurement.elements[static_cast<size_t>(x)])
                          .trace()
                          .real();
    return v;
}

ObservedStatistics obs_at(double w2, double omega, int x_star = 0) {
    return ObservedStatistics{w2, EnergyBound(omega), x_star, 0};
}

}  // namespace

TEST_CASE("binary entropy basics") {
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-14));
    for (double p : {0.1, 0.3, 0.45})
        CHECK(binary_entropy(p) == doctest::Approx(binary_entropy(1.0 - p)).epsilon(1e-14));
    CHECK(binary_entropy(0.7) > binary_entropy(0.8));
    CHECK(binary_entropy(0.8) > binary_entropy(0.95));
}

TEST_CASE("guessing probability on handcrafted models") {
    MatrixXcd e00 = MatrixXcd::Zero(2, 2);
    e00(0, 0) = 1.0;
    MatrixXcd e11 = MatrixXcd::Zero(2, 2);
    e11(1, 1) = 1.0;
    const MatrixXcd eye2 = MatrixXcd::Identity(2, 2);

    // orthogonal states, projective readout of the first register
    AttackModel orth{
        {1.0},
        {{DensityMatrix(kron(e00, e00), {2, 2}), DensityMatrix(kron(e11, e00), {2, 2})}},
        Povm({kron(e00, eye2), kron(e11, eye2)})};
    CHECK(guessing_probability(orth, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(guessing_probability(orth, 1) == doctest::Approx(1.0).epsilon(1e-12));

    // maximally mixed state: both outcomes equally likely
    AttackModel mixed{
        {1.0},
        {{DensityMatrix(MatrixXcd(0.25 * MatrixXcd::Identity(4, 4)), {2, 2}),
          DensityMatrix(MatrixXcd(0.25 * MatrixXcd::Identity(4, 4)), {2, 2})}},
        Povm({kron(e00, eye2), kron(e11, eye2)})};
    CHECK(guessing_probability(mixed, 0) == doctest::Approx(0.5).epsilon(1e-12));

    // two-branch construction at omega = 0.2 guesses at the entangled optimum
    const AttackModel two = explicit_two_branch_attack(obs_at(0.9, 0.2));
    CHECK(guessing_probability(two, 0) == doctest::Approx(scheme_w(0.2)).epsilon(1e-9));
}

TEST_CASE("explicit attack reproduces the observation and mixes linearly") {
    for (double omega : {0.1, 0.2, 0.3}) {
        const double w = scheme_w(omega);
        for (double w2 : {0.5, qc_optimal_w2(EnergyBound(omega)), w}) {
            const AttackModel m = explicit_two_branch_attack(obs_at(w2, omega));
            CHECK_NOTHROW(m.validate(EnergyBound(omega)));
            CHECK(visible_success(m, 0) == doctest::Approx(w2).epsilon(1e-9));
            CHECK(visible_success(m, 1) == doctest::Approx(w2).epsilon(1e-9));
            CHECK(guessing_probability(m, 0) == doctest::Approx(w).epsilon(1e-9));
        }
        CHECK(explicit_two_branch_attack(obs_at(w, omega)).q[0] ==
              doctest::Approx(1.0).epsilon(1e-9));
        CHECK(explicit_two_branch_attack(obs_at(0.5, omega)).q[0] ==
              doctest::Approx(0.5).epsilon(1e-12));
    }

    // the mixing weight solves the linear interpolation at omega = 0.2
    const double w = scheme_w(0.2);
    const AttackModel m = explicit_two_branch_attack(obs_at(0.9, 0.2));
    CHECK(m.q[0] == doctest::Approx((0.9 - (1.0 - w)) / (2.0 * w - 1.0)).epsilon(1e-12));
    CHECK(m.q[0] * w + (1.0 - m.q[0]) * (1.0 - w) == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("explicit attack entropy does not depend on the mixing weight") {
    const double w = scheme_w(0.2);
    for (double w2 : {0.52, 0.7, 0.9, w}) {
        const AttackModel m = explicit_two_branch_attack(obs_at(w2, 0.2));
        CHECK(conditional_outcome_entropy(m, 0) ==
              doctest::Approx(binary_entropy(w)).epsilon(1e-9));
        CHECK(conditional_outcome_entropy(m, 1) ==
              doctest::Approx(binary_entropy(w)).epsilon(1e-9));
    }
}

TEST_CASE("observations outside the reachable range are rejected") {
    CHECK_THROWS_AS((void)explicit_two_branch_attack(obs_at(0.99, 0.05)), InfeasibleObservation);
    CHECK_THROWS_AS((void)explicit_two_branch_attack(obs_at(1.2, 0.2)), InvalidParams);
    CHECK_THROWS_AS((void)explicit_two_branch_attack(obs_at(0.4, 0.2)), InvalidParams);
    CHECK_THROWS_AS((void)explicit_two_branch_attack(obs_at(0.9, 0.2, 2)), InvalidParams);
    ObservedStatistics bad_y{0.9, EnergyBound(0.2), 0, 1};
    CHECK_THROWS_AS((void)explicit_two_branch_attack(bad_y), InvalidParams);
}

TEST_CASE("min-entropy attack reaches full prediction beyond the threshold") {
    const SeesawConfig cfg = quick_cfg(2);
    for (double omega : {kSqrt2Minus1, 0.45}) {
        const double w2 = qc_optimal_w2(EnergyBound(omega));
        const AttackBound b = min_entropy_attack(obs_at(w2, omega), cfg);
        CHECK(b.bits >= 0.0);
        CHECK(b.bits <= 1e-6);
    }
}

TEST_CASE("min-entropy attack dominates the explicit construction") {
    const SeesawConfig cfg = quick_cfg(3);
    const ObservedStatistics obs = obs_at(0.9, 0.2);
    const AttackBound b = min_entropy_attack(obs, cfg);
    const double w = scheme_w(0.2);
    CHECK(b.bits <= -std::log2(w) + 1e-9);
    CHECK(b.bits >= 0.0);
    CHECK_NOTHROW(b.model.validate(obs.omega));
    CHECK(visible_success(b.model, 0) == doctest::Approx(0.9).epsilon(1e-7));
    CHECK(visible_success(b.model, 1) == doctest::Approx(0.9).epsilon(1e-7));
    // round trip between the bound and its own model
    const double pg = guessing_probability(b.model, obs.x_star);
    CHECK(std::abs(b.bits - (-std::log2(pg))) <= 1e-12);
}

TEST_CASE("low-energy observation certifies close to the no-side-information value") {
    const SeesawConfig cfg = quick_cfg(3);
    const double w2 = qc_optimal_w2(EnergyBound(0.05));
    const AttackBound b = min_entropy_attack(obs_at(w2, 0.05), cfg);
    CHECK(std::abs(b.bits - (-std::log2(w2))) <= 0.05);
}

TEST_CASE("trivial observation keeps the guessing floor") {
    const SeesawConfig cfg = quick_cfg(2);
    const AttackBound b = min_entropy_attack(obs_at(0.5, 0.3), cfg);
    const double pg = guessing_probability(b.model, 0);
    CHECK(pg >= 0.5 - 1e-9);
    CHECK(b.bits <= 1.0 + 1e-9);
}

TEST_CASE("von Neumann attack collapses beyond the threshold") {
    const SeesawConfig cfg = quick_cfg(2);
    for (double omega : {kSqrt2Minus1, 0.42}) {
        const double w2 = qc_optimal_w2(EnergyBound(omega));
        const AttackBound b = vn_entropy_attack(obs_at(w2, omega), cfg);
        CHECK(b.bits >= 0.0);
        CHECK(b.bits <= 1e-4);
    }
}

TEST_CASE("von Neumann attack stays below the honest Shannon entropy") {
    const SeesawConfig cfg = quick_cfg(3);
    const ObservedStatistics obs = obs_at(0.9, 0.2);
    const AttackBound b = vn_entropy_attack(obs, cfg);
    CHECK(b.bits <= binary_entropy(0.9) + 1e-6);
    CHECK(b.bits <= binary_entropy(scheme_w(0.2)) + 1e-6);
    CHECK(b.bits >= 0.0);
    CHECK_NOTHROW(b.model.validate(obs.omega));
    CHECK(visible_success(b.model, 0) == doctest::Approx(0.9).epsilon(1e-7));
    CHECK(visible_success(b.model, 1) == doctest::Approx(0.9).epsilon(1e-7));
    CHECK(b.bits == doctest::Approx(conditional_outcome_entropy(b.model, obs.x_star))
                        .epsilon(1e-12));
}

TEST_CASE("deterministic observation at full energy certifies nothing") {
    const SeesawConfig cfg = quick_cfg(2);
    const AttackBound v = vn_entropy_attack(obs_at(1.0, 1.0), cfg);
    CHECK(v.bits <= 1e-6);
    const AttackBound m = min_entropy_attack(obs_at(1.0, 1.0), cfg);
    CHECK(m.bits <= 1e-9);
}

TEST_CASE("entropy bounds are ordered on every returned model") {
    const SeesawConfig cfg = quick_cfg(2);
    for (double omega : {0.1, 0.3}) {
        const ObservedStatistics obs = obs_at(qc_optimal_w2(EnergyBound(omega)), omega);
        for (const AttackBound& b :
             {min_entropy_attack(obs, cfg), vn_entropy_attack(obs, cfg)}) {
            const double h_min = -std::log2(guessing_probability(b.model, obs.x_star));
            const double h_vn = conditional_outcome_entropy(b.model, obs.x_star);
            CHECK(h_min >= -1e-12);
            CHECK(h_vn >= h_min - 1e-9);
        }
    }
}

TEST_CASE("attack strength grows with the energy bound") {
    const SeesawConfig cfg = quick_cfg(3);
    std::vector<double> h_min;
    std::vector<double> h_vn;
    for (double omega : {0.1, 0.25, 0.4}) {
        const ObservedStatistics obs = obs_at(qc_optimal_w2(EnergyBound(omega)), omega);
        h_min.push_back(min_entropy_attack(obs, cfg).bits);
        h_vn.push_back(vn_entropy_attack(obs, cfg).bits);
    }
    for (size_t i = 1; i < h_min.size(); ++i) {
        CHECK(h_min[i] <= h_min[i - 1] + 1e-6);
        CHECK(h_vn[i] <= h_vn[i - 1] + 1e-6);
    }
}

TEST_CASE("hidden-branch cardinality beyond two changes nothing measurable") {
    const SeesawConfig cfg = quick_cfg(2);
    const ObservedStatistics obs = obs_at(0.9, 0.2);
    AttackOptions base_opts;
    const double m2 = min_entropy_attack(obs, cfg, base_opts).bits;
    const double v2 = vn_entropy_attack(obs, cfg, base_opts).bits;
    for (int branches : {3, 4}) {
        AttackOptions o;
        o.branches = branches;
        CHECK(std::abs(min_entropy_attack(obs, cfg, o).bits - m2) < 1e-4);
        CHECK(std::abs(vn_entropy_attack(obs, cfg, o).bits - v2) < 1e-4);
    }
}

TEST_CASE("floor-only statistic can only help the adversary") {
    const SeesawConfig cfg = quick_cfg(2);
    const ObservedStatistics obs = obs_at(0.9, 0.2);
    AttackOptions eq;
    AttackOptions al;
    al.w2_at_least = true;
    CHECK(min_entropy_attack(obs, cfg, al).bits <= min_entropy_attack(obs, cfg, eq).bits + 1e-9);
    CHECK(vn_entropy_attack(obs, cfg, al).bits <= vn_entropy_attack(obs, cfg, eq).bits + 1e-4);
}

TEST_CASE("attacks run at local dimension two") {
    const SeesawConfig cfg = quick_cfg(2);
    AttackOptions o;
    o.local_dim = 2;
    const ObservedStatistics obs = obs_at(0.88, 0.2);
    const AttackBound b = min_entropy_attack(obs, cfg, o);
    CHECK_NOTHROW(b.model.validate(obs.omega));
    CHECK(b.model.branch_states[0][0].dims == DimList{2, 2});
    CHECK(visible_success(b.model, 0) == doctest::Approx(0.88).epsilon(1e-7));
    CHECK(b.bits >= 0.0);
    const AttackBound v = vn_entropy_attack(obs, cfg, o);
    CHECK(v.bits <= binary_entropy(0.88) + 1e-6);
}

TEST_CASE("seeded attacks are reproducible") {
    const SeesawConfig cfg = quick_cfg(2);
    const ObservedStatistics obs = obs_at(0.9, 0.2);
    CHECK(min_entropy_attack(obs, cfg).bits == min_entropy_attack(obs, cfg).bits);
    CHECK(vn_entropy_attack(obs, cfg).bits == vn_entropy_attack(obs, cfg).bits);
}

TEST_CASE("zero energy pins the outcome through the helper register") {
    const SeesawConfig cfg = quick_cfg(2);
    const ObservedStatistics obs = obs_at(0.5, 0.0);
    const AttackBound b = min_entropy_attack(obs, cfg);
    CHECK(b.bits == 0.0);
    CHECK_NOTHROW(b.model.validate(obs.omega));
    CHECK(visible_success(b.model, 0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(visible_success(b.model, 1) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("infeasible observations and failed searches raise distinct errors") {
    const SeesawConfig cfg = quick_cfg(2);
    CHECK_THROWS_AS((void)min_entropy_attack(obs_at(0.9, 0.05), cfg), InfeasibleObservation);
    SeesawConfig short_cfg = quick_cfg(2);
    short_cfg.max_iters = 10;
    CHECK_THROWS_AS((void)vn_entropy_attack(obs_at(0.9, 0.05), short_cfg), OptimizationFailure);

    SeesawConfig bad = quick_cfg(2);
    bad.restarts = 0;
    CHECK_THROWS_AS((void)min_entropy_attack(obs_at(0.9, 0.2), bad), InvalidParams);
    AttackOptions o;
    o.branches = 1;
    CHECK_THROWS_AS((void)min_entropy_attack(obs_at(0.9, 0.2), cfg, o), InvalidParams);
    o = AttackOptions{};
    o.local_dim = 4;
    CHECK_THROWS_AS((void)vn_entropy_attack(obs_at(0.9, 0.2), cfg, o), InvalidParams);
}

TEST_CASE("attack models reject broken structure") {
    MatrixXcd e00 = MatrixXcd::Zero(2, 2);
    e00(0, 0) = 1.0;
    MatrixXcd e11 = MatrixXcd::Zero(2, 2);
    e11(1, 1) = 1.0;
    const MatrixXcd eye2 = MatrixXcd::Identity(2, 2);
    const Povm readout({kron(e00, eye2), kron(e11, eye2)});
    const DensityMatrix vac(kron(e00, e00), {2, 2});
    const DensityMatrix hot(kron(e11, e00), {2, 2});
    const DensityMatrix other_helper(kron(e00, e11), {2, 2});

    AttackModel bad_q{{0.6, 0.6}, {{vac, vac}, {vac, vac}}, readout};
    CHECK_THROWS_AS(bad_q.validate(EnergyBound(0.2)), InvalidParams);

    AttackModel bad_energy{{1.0}, {{hot, vac}}, readout};
    CHECK_THROWS_AS(bad_energy.validate(EnergyBound(0.1)), InvalidParams);

    AttackModel bad_marginal{{1.0}, {{vac, other_helper}}, readout};
    CHECK_THROWS_AS(bad_marginal.validate(EnergyBound(0.2)), InvalidParams);

    AttackModel bad_shape{{0.5, 0.5}, {{vac, vac}}, readout};
    CHECK_THROWS_AS(bad_shape.validate(EnergyBound(0.2)), ShapeMismatch);
}

TEST_CASE("classical side information entropies") {
    MatrixXcd e00 = MatrixXcd::Zero(2, 2);
    e00(0, 0) = 1.0;
    MatrixXcd e11 = MatrixXcd::Zero(2, 2);
    e11(1, 1) = 1.0;
    MatrixXcd plus(2, 2);
    plus << 0.5, 0.5, 0.5, 0.5;
    const Povm zbasis({e00, e11});

    ClassicalSideInfo det{{1.0},
                          {{DensityMatrix(e00, {2}), DensityMatrix(e00, {2})}},
                          {{zbasis, zbasis}}};
    const auto [dmin, dsh] = classical_entropies(det, 0, 0);
    CHECK(dmin == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(dsh == doctest::Approx(0.0).epsilon(1e-12));

    ClassicalSideInfo uniform{{1.0},
                              {{DensityMatrix(plus, {2}), DensityMatrix(plus, {2})}},
                              {{zbasis, zbasis}}};
    const auto [umin, ush] = classical_entropies(uniform, 0, 0);
    CHECK(umin == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ush == doctest::Approx(1.0).epsilon(1e-12));

    // opposite deterministic branches: the unconditioned outcome is uniform
    // but side information collapses both entropies
    ClassicalSideInfo opposite{{0.5, 0.5},
                               {{DensityMatrix(e00, {2}), DensityMatrix(e00, {2})},
                                {DensityMatrix(e11, {2}), DensityMatrix(e11, {2})}},
                               {{zbasis, zbasis}, {zbasis, zbasis}}};
    const auto [omin, osh] = classical_entropies(opposite, 0, 0);
    CHECK(omin == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(osh == doctest::Approx(0.0).epsilon(1e-12));

    ClassicalSideInfo broken{{1.0, 0.5},
                             {{DensityMatrix(e00, {2}), DensityMatrix(e00, {2})}},
                             {{zbasis, zbasis}}};
    CHECK_THROWS_AS((void)classical_entropies(broken, 0, 0), ShapeMismatch);
    CHECK_THROWS_AS((void)classical_entropies(det, 5, 0), ShapeMismatch);
}

TEST_CASE("optimized models stay valid correlation tables") {
    const SeesawConfig cfg = quick_cfg(2);
    const ObservedStatistics obs = obs_at(0.9, 0.2);
    const AttackBound b = min_entropy_attack(obs, cfg);
    std::vector<DensityMatrix> mixtures;
    for (int x = 0; x < 2; ++x) {
        MatrixXcd m = MatrixXcd::Zero(9, 9);
        for (size_t l = 0; l < b.model.q.size(); ++l)
            m += b.model.q[l] * b.model.branch_states[l][static_cast<size_t>(x)].matrix;
        mixtures.emplace_back(m, DimList{3, 3});
    }
    const CorrelationTable table = correlations(mixtures, {b.model.measurement});
    const double w2_from_table = 0.5 * (table.p(0, 0, 0) + table.p(1, 1, 0));
    CHECK(w2_from_table == doctest::Approx(0.9).epsilon(1e-7));
}
