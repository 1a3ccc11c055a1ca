#pragma once

#include <Eigen/Dense>

#include <vector>

#include "eapm/quantum.hpp"

namespace eapm {

// Linear functional sum_bxy c[b][x][y] p(b|x,y) plus a constant offset.
// The offset carries gauge terms of the form k * sum_b p(b|x,y): adding a
// per-column constant to the coefficients and the matching total to the
// offset leaves the value on normalized correlations unchanged.
struct Functional {
    int nb = 0, nx = 0, ny = 0;
    std::vector<double> c;  // [b][x][y] row-major
    double offset = 0.0;

    Functional(int b, int x, int y);
    double& at(int b, int x, int y) { return c[(b * nx + x) * ny + y]; }
    double at(int b, int x, int y) const { return c[(b * nx + x) * ny + y]; }
};

struct ClassicalStrategy {
    int nx = 0, na = 0, nb = 0, ny = 0;
    std::vector<double> q;
    std::vector<Eigen::MatrixXd> encoder;               // per-lambda, (a, x)
    std::vector<std::vector<Eigen::MatrixXd>> decoder;  // per-lambda per-y, (b, a)

    void validate() const;
};

double no_signalling_bound(const Functional& f, const EnergyBound& omega);

Functional transmission_functional(int n);
Functional rac_functional(int m, int d);

ClassicalStrategy transmission_strategy(int n, const EnergyBound& omega);
ClassicalStrategy rac_strategy(int m, int d, const EnergyBound& omega);

double evaluate_strategy(const ClassicalStrategy& s, const Functional& f);
bool check_energy(const ClassicalStrategy& s, const EnergyBound& omega);

CorrelationTable strategy_correlations(const ClassicalStrategy& s);

}  // namespace eapm
