#pragma once

#include <utility>
#include <vector>

#include "eapm/quantum.hpp"
#include "eapm/schemes.hpp"
#include "eapm/seesaw.hpp"

namespace eapm {

// Eavesdropper's decomposition of the visible behaviour: a hidden register
// lambda with weights q, one message+helper state per (lambda, input), and
// the receiver measurement shared by every branch.
struct AttackModel {
    std::vector<double> q;
    std::vector<std::vector<DensityMatrix>> branch_states;  // [lambda][x]
    Povm measurement;

    // Checks q is a distribution, every branch state respects the energy
    // bound, and the helper marginal is input-independent per branch.
    void validate(const EnergyBound& omega) const;
};

// What the honest parties certify on: the correlation value to reproduce,
// the energy restriction, and the round (input, measurement) under attack.
struct ObservedStatistics {
    double w2_obs = 0.5;
    EnergyBound omega{0.0};
    int x_star = 0;
    int y_star = 0;
};

// Knobs beyond the shared optimizer config: number of hidden branches,
// local dimension of each attack subsystem, and whether the observed value
// is reproduced exactly or only guaranteed as a floor.
struct AttackOptions {
    int branches = 2;
    int local_dim = 3;
    bool w2_at_least = false;
};

struct AttackBound {
    double bits = 0.0;
    AttackModel model;
};

double binary_entropy(double p);

// Eavesdropper's best success probability of predicting the outcome at
// input x_star, knowing the branch label.
double guessing_probability(const AttackModel& model, int x_star);

// Shannon entropy of the outcome at x_star averaged over branches; the
// side-information value of the model's hidden register.
double conditional_outcome_entropy(const AttackModel& model, int x_star);

// Two-branch mixing attack built from the strongest two-qutrit encoding:
// branch 0 keeps the state assignment, branch 1 swaps it, and the mixing
// weight is chosen so the visible value matches w2_obs.
AttackModel explicit_two_branch_attack(const ObservedStatistics& obs);

// Upper bound on certifiable min-entropy: maximizes the guessing
// probability over attack models reproducing the observation, alternating
// semidefinite steps over states+weights and over the measurement.
AttackBound min_entropy_attack(const ObservedStatistics& obs, const SeesawConfig& cfg,
                               const AttackOptions& opts = {});

// Upper bound on certifiable von Neumann entropy: minimizes the average
// branch outcome entropy with a multi-start sequential quadratic solver
// over factor-parameterized states, weights, and measurement spectrum.
AttackBound vn_entropy_attack(const ObservedStatistics& obs, const SeesawConfig& cfg,
                              const AttackOptions& opts = {});

// Side information limited to a shared classical label: per-branch
// message-only states and per-branch measurement boxes.
struct ClassicalSideInfo {
    std::vector<double> q;
    std::vector<std::vector<DensityMatrix>> states;  // [lambda][x]
    std::vector<std::vector<Povm>> povms;            // [lambda][y]
};

// Returns (min-entropy, Shannon entropy) of the outcome at (x_star, y_star)
// conditioned on the branch label.
std::pair<double, double> classical_entropies(const ClassicalSideInfo& info, int x_star,
                                              int y_star);

}  // namespace eapm
