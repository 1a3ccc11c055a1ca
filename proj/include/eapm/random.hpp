#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace eapm {

// Stateless stream split: derive independent sub-seeds from (base, index).
std::uint64_t splitmix64(std::uint64_t base, std::uint64_t index);

using Rng = std::mt19937_64;

Eigen::MatrixXcd random_gaussian(int rows, int cols, Rng& rng);
Eigen::MatrixXcd random_hermitian(int d, Rng& rng);
Eigen::MatrixXcd haar_unitary(int d, Rng& rng);

// Wishart state G G† / tr(G G†), full rank almost surely.
Eigen::MatrixXcd random_density(int d, Rng& rng);

// Unit vector with fixed weight on the first basis vector: |<0|psi>|^2 = weight.
Eigen::VectorXcd random_pure_with_vacuum(int d, double weight, Rng& rng);

// Bipartite pure state whose first-subsystem reduction has <0|tau|0> = weight.
Eigen::VectorXcd random_bipartite_with_vacuum(int da, int db, double weight, Rng& rng);

}  // namespace eapm
