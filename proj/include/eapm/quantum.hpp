#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "eapm/linalg.hpp"

namespace eapm {

struct EnergyBound {
    double omega;
    explicit EnergyBound(double w);
};

// Hermitian, PSD, unit-trace matrix with subsystem dimensions attached.
// Eigenvalues in [-1e-9, 0) are clipped and the state renormalized; anything
// more negative is rejected.
struct DensityMatrix {
    Eigen::MatrixXcd matrix;
    DimList dims;

    DensityMatrix(Eigen::MatrixXcd m, DimList d);

    int dim() const { return static_cast<int>(matrix.rows()); }
};

struct KrausChannel {
    std::vector<Eigen::MatrixXcd> kraus_ops;
    int in_dim = 0;
    int out_dim = 0;

    KrausChannel(std::vector<Eigen::MatrixXcd> ops, int in_d, int out_d);
};

struct Povm {
    std::vector<Eigen::MatrixXcd> elements;

    explicit Povm(std::vector<Eigen::MatrixXcd> elems);
};

struct CorrelationTable {
    int nb = 0, nx = 0, ny = 0;
    std::vector<double> probs;  // [b][x][y] row-major

    CorrelationTable(int b, int x, int y);
    double& p(int b, int x, int y) { return probs[(b * nx + x) * ny + y]; }
    double p(int b, int x, int y) const { return probs[(b * nx + x) * ny + y]; }
    void validate() const;
};

DensityMatrix apply_channel(const KrausChannel& channel, const DensityMatrix& state,
                            int subsystem);

double vacuum_weight(const DensityMatrix& state, int message_subsystem = 0);

struct HelstromResult {
    double w2;
    Povm optimal_povm;
};

HelstromResult helstrom(const DensityMatrix& tau0, const DensityMatrix& tau1);

CorrelationTable correlations(const std::vector<DensityMatrix>& states,
                              const std::vector<Povm>& povms);

std::pair<bool, double> is_ppt(const DensityMatrix& state);
double ccnr_value(const DensityMatrix& state);
double purity(const DensityMatrix& state);

}  // namespace eapm
