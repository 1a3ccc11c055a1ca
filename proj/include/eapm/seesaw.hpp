#pragma once

#include <cstdint>
#include <vector>

#include "eapm/quantum.hpp"
#include "eapm/sdp.hpp"

namespace eapm {

struct SeesawConfig {
    int max_iters = 200;
    double convergence_tol = 1e-8;
    int restarts = 20;
    std::uint64_t rng_seed = 0;
};

// Alternating-search output: the optimized shared-state pair (message system
// first, helper system second) and the measurement achieving the value.
struct SeesawModel {
    std::vector<DensityMatrix> states;
    Povm povm;
};

struct SeesawW2Result {
    double w2 = 0.0;
    SeesawModel model;
};

SeesawW2Result seesaw_w2(const EnergyBound& omega, int local_dim,
                         const SeesawConfig& cfg);

enum class BoundaryDirection { Max, Min };

double seesaw_correlator_boundary(const EnergyBound& omega, double e0_target,
                                  int local_dim, const SeesawConfig& cfg,
                                  BoundaryDirection dir = BoundaryDirection::Max);

double unitary_nogo_check(const EnergyBound& omega, int local_dim, int trials,
                          std::uint64_t rng_seed, int max_proposals = 1000);

}  // namespace eapm
