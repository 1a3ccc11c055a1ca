#include "eapm/random.hpp"

#include <cmath>
#include <complex>

namespace eapm {

std::uint64_t splitmix64(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + index * 0x9e3779b97f4a7c15ULL + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Eigen::MatrixXcd random_gaussian(int rows, int cols, Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXcd g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) g(i, j) = std::complex<double>(n(rng), n(rng));
    return g;
}

Eigen::MatrixXcd random_hermitian(int d, Rng& rng) {
    Eigen::MatrixXcd g = random_gaussian(d, d, rng);
    return (g + g.adjoint()) / 2.0;
}

Eigen::MatrixXcd haar_unitary(int d, Rng& rng) {
    Eigen::MatrixXcd g = random_gaussian(d, d, rng);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i) {
        std::complex<double> rii = r(i, i);
        q.col(i) *= (std::abs(rii) > 0) ? rii / std::abs(rii) : 1.0;
    }
    return q;
}

Eigen::MatrixXcd random_density(int d, Rng& rng) {
    Eigen::MatrixXcd g = random_gaussian(d, d, rng);
    Eigen::MatrixXcd w = g * g.adjoint();
    return w / w.trace().real();
}

Eigen::VectorXcd random_pure_with_vacuum(int d, double weight, Rng& rng) {
    Eigen::VectorXcd rest = Eigen::VectorXcd::Zero(d);
    if (d > 1) {
        rest.tail(d - 1) = random_gaussian(d - 1, 1, rng);
        double nrm = rest.norm();
        if (nrm > 0) rest /= nrm;
    }
    Eigen::VectorXcd psi = std::sqrt(1.0 - weight) * rest;
    psi(0) = std::sqrt(weight);
    return psi;
}

Eigen::VectorXcd random_bipartite_with_vacuum(int da, int db, double weight, Rng& rng) {
    Eigen::MatrixXcd c = random_gaussian(da, db, rng);
    double row0 = c.row(0).norm();
    double restn = std::sqrt(std::max(0.0, c.squaredNorm() - row0 * row0));
    if (row0 > 0) c.row(0) *= std::sqrt(weight) / row0;
    if (da > 1 && restn > 0) c.bottomRows(da - 1) *= std::sqrt(1.0 - weight) / restn;
    Eigen::VectorXcd psi(da * db);
    for (int a = 0; a < da; ++a)
        for (int b = 0; b < db; ++b) psi(a * db + b) = c(a, b);
    psi /= psi.norm();
    return psi;
}

}  // namespace eapm
