#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace eapm {

// Low-level cone program: minimize sum_k <objective[k], X_k> over block-diagonal
// PSD variables X_k subject to linear equality constraints. Inequalities enter
// as explicit 1x1 slack blocks added by the caller. All blocks are real
// symmetric; complex Hermitian variables are embedded by realify() below.
struct BlockTerm {
    int block;
    Eigen::MatrixXd mat;
};

struct BlockConstraint {
    std::vector<BlockTerm> terms;
    double rhs = 0.0;
};

struct BlockSdp {
    std::vector<int> dims;
    std::vector<bool> complex_embedded;
    std::vector<Eigen::MatrixXd> objective;
    std::vector<BlockConstraint> constraints;

    int add_block(int dim, bool embedded = false);
    void set_objective(int block, const Eigen::MatrixXd& m);
    void add_constraint(BlockConstraint c);
};

struct SdpTrace {
    int iteration;
    double mu;
    double primal_violation;
    double dual_violation;
    double gap;
};

using SdpTraceFn = std::function<void(const SdpTrace&)>;

struct SolveOptions {
    int max_iters = 200;
    double feas_tol = 1e-10;
    double gap_tol = 1e-9;
    SdpTraceFn trace;
};

struct BlockSolution {
    std::vector<Eigen::MatrixXd> x;
    std::vector<Eigen::MatrixXd> z;
    Eigen::VectorXd y;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double primal_violation = 0.0;
    double duality_gap = 0.0;
    int iterations = 0;
};

BlockSolution solve_block_sdp(const BlockSdp& p, const SolveOptions& opts = {});

// Hermitian H maps to the real symmetric [[Re H, -Im H], [Im H, Re H]].
Eigen::MatrixXd realify(const Eigen::MatrixXcd& h);
// Same divided by two, so that <realify_half(A), realify(X)> = Re tr(A X).
Eigen::MatrixXd realify_half(const Eigen::MatrixXcd& h);
Eigen::MatrixXcd derealify(const Eigen::MatrixXd& s);

// Orthonormal bases of the Hermitian d x d matrices under <A,B> = tr(AB).
std::vector<Eigen::MatrixXcd> hermitian_basis(int d);
std::vector<Eigen::MatrixXcd> traceless_hermitian_basis(int d);

}  // namespace eapm
