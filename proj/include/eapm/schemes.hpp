#pragma once

#include <vector>

#include "eapm/quantum.hpp"

namespace eapm {

struct SchemeParams {
    EnergyBound omega;
    double r = 0.0;
};

// Shared state plus per-input encoding channels; post_states are rebuilt via
// apply_channel and cross-checked against the closed-form mixtures.
struct Scheme {
    DensityMatrix shared_state;
    std::vector<KrausChannel> channels;
    std::vector<DensityMatrix> post_states;
};

enum class SchemeKind { Qubit, Qutrit };

double qc_optimal_w2(const EnergyBound& omega);

Scheme qubit_scheme(const SchemeParams& p);
double qubit_w2_closed_form(const SchemeParams& p);

Scheme qutrit_scheme(const SchemeParams& p);
double qutrit_w2_closed_form(const SchemeParams& p);

struct OptimizeRResult {
    double r_star;
    double w2_star;
};

OptimizeRResult optimize_r(SchemeKind kind, const EnergyBound& omega);

struct CorrelatorRange {
    double e1_max;
    double e1_min;
};

CorrelatorRange pm_ellipse_max_correlator(const EnergyBound& omega, double e0);

}  // namespace eapm
