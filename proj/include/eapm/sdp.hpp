#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

#include "eapm/block_sdp.hpp"

namespace eapm {

// Dense Hermitian SDP: maximize Re tr(objective * X) over X >= 0 subject to
// tr(A X) = b for each equality, tr(G X) >= h for each inequality, and an
// optional matrix cap X <= upper_bound.
struct SdpProblem {
    int d = 0;
    Eigen::MatrixXcd objective;
    std::vector<std::pair<Eigen::MatrixXcd, double>> equalities;
    std::vector<std::pair<Eigen::MatrixXcd, double>> inequalities;
    std::optional<Eigen::MatrixXcd> upper_bound;
};

struct SdpResult {
    double optimal_value = 0.0;
    Eigen::MatrixXcd optimizer;
    double duality_gap = 0.0;
    double constraint_violation = 0.0;
    int iterations = 0;
};

SdpResult sdp_solve(const SdpProblem& p, const SdpTraceFn& trace = nullptr);

}  // namespace eapm
