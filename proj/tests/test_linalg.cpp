#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <complex>

#include "eapm/linalg.hpp"
#include "eapm/random.hpp"

using namespace eapm;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cxd = std::complex<double>;

namespace {

MatrixXcd bell_state() {
    VectorXcd v = VectorXcd::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    return v * v.adjoint();
}

}  // namespace

TEST_CASE("eig_hermitian basic spectra") {
    MatrixXcd id = MatrixXcd::Identity(2, 2);
    auto e1 = eig_hermitian(id);
    CHECK(e1.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e1.eigenvalues(1) == doctest::Approx(1.0).epsilon(1e-12));

    MatrixXcd d(2, 2);
    d << 1, 0, 0, -2;
    auto e2 = eig_hermitian(d);
    CHECK(e2.eigenvalues(0) == doctest::Approx(-2.0));
    CHECK(e2.eigenvalues(1) == doctest::Approx(1.0));

    MatrixXcd x(2, 2);
    x << 0, 1, 1, 0;
    auto e3 = eig_hermitian(x);
    CHECK(e3.eigenvalues(0) == doctest::Approx(-1.0));
    CHECK(e3.eigenvalues(1) == doctest::Approx(1.0));
}

TEST_CASE("eig_hermitian rejects bad input") {
    MatrixXcd m(2, 3);
    m.setZero();
    CHECK_THROWS_AS(eig_hermitian(m), NonSquare);

    MatrixXcd nh(2, 2);
    nh << 0, 1, 0, 0;
    CHECK_THROWS_AS(eig_hermitian(nh), NonHermitian);
}

TEST_CASE("eig_hermitian reconstruction and orthonormality up to dim 16") {
    Rng rng(12345);
    for (int d : {2, 3, 5, 8, 16}) {
        MatrixXcd h = random_hermitian(d, rng);
        auto e = eig_hermitian(h);
        MatrixXcd rec = MatrixXcd::Zero(d, d);
        for (int i = 0; i < d; ++i)
            rec += e.eigenvalues(i) * (e.eigenvectors.col(i) * e.eigenvectors.col(i).adjoint());
        CHECK((rec - h).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((e.eigenvectors.adjoint() * e.eigenvectors - MatrixXcd::Identity(d, d))
                  .cwiseAbs()
                  .maxCoeff() < 1e-9);
        for (int i = 0; i + 1 < d; ++i) CHECK(e.eigenvalues(i) <= e.eigenvalues(i + 1));
        CHECK((h * e.eigenvectors.col(0) - e.eigenvalues(0) * e.eigenvectors.col(0)).norm() < 1e-9);
    }
}

TEST_CASE("kron identities") {
    MatrixXcd i2 = MatrixXcd::Identity(2, 2);
    CHECK((kron(i2, i2) - MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);

    MatrixXcd p(2, 2);
    p << 1, 0, 0, 0;
    MatrixXcd pp = kron(p, p);
    CHECK(pp(0, 0) == cxd(1.0));
    CHECK(pp.cwiseAbs().sum() == doctest::Approx(1.0));

    MatrixXcd x(2, 2);
    x << 0, 1, 1, 0;
    VectorXcd e00 = VectorXcd::Zero(4);
    e00(0) = 1.0;
    VectorXcd shifted = kron(x, i2) * e00;
    CHECK(std::abs(shifted(2) - cxd(1.0)) == 0.0);
}

TEST_CASE("kron is associative") {
    Rng rng(99);
    MatrixXcd a = random_gaussian(2, 2, rng), b = random_gaussian(3, 3, rng),
              c = random_gaussian(2, 2, rng);
    MatrixXcd lhs = kron(kron(a, b), c);
    MatrixXcd rhs = kron(a, kron(b, c));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("partial_trace") {
    VectorXcd e00 = VectorXcd::Zero(4);
    e00(0) = 1.0;
    MatrixXcd m = e00 * e00.adjoint();
    MatrixXcd red = partial_trace(m, {2, 2}, {0});
    CHECK(std::abs(red(0, 0) - cxd(1.0)) < 1e-15);
    CHECK(red.cwiseAbs().sum() == doctest::Approx(1.0));

    MatrixXcd bell = bell_state();
    MatrixXcd half = partial_trace(bell, {2, 2}, {1});
    CHECK((half - MatrixXcd::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() < 1e-12);

    Rng rng(7);
    MatrixXcd rho = random_density(2, rng), sigma = random_density(3, rng);
    MatrixXcd prod = kron(rho, sigma);
    CHECK((partial_trace(prod, {2, 3}, {0}) - rho).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((partial_trace(prod, {2, 3}, {1}) - sigma).cwiseAbs().maxCoeff() < 1e-12);

    MatrixXcd g = random_gaussian(6, 6, rng);
    CHECK(std::abs(partial_trace(g, {2, 3}, {})(0, 0) - g.trace()) < 1e-12);
    CHECK(std::abs(partial_trace(g, {2, 3}, {0}).trace() - g.trace()) < 1e-12);
    CHECK((partial_trace(g, {2, 3}, {0, 1}) - g).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(partial_trace(g, {2, 2}, {0}), DimMismatch);
}

TEST_CASE("partial_transpose") {
    Rng rng(11);
    MatrixXcd rho = random_density(2, rng), sigma = random_density(2, rng);
    MatrixXcd prod = kron(rho, sigma);
    CHECK((partial_transpose(prod, {2, 2}, 0) - kron(rho.transpose(), sigma))
              .cwiseAbs()
              .maxCoeff() < 1e-14);

    MatrixXcd g = random_gaussian(6, 6, rng);
    CHECK((partial_transpose(partial_transpose(g, {2, 3}, 1), {2, 3}, 1) - g)
              .cwiseAbs()
              .maxCoeff() == 0.0);

    MatrixXcd diag = MatrixXcd::Zero(4, 4);
    diag.diagonal() << 0.1, 0.2, 0.3, 0.4;
    CHECK((partial_transpose(diag, {2, 2}, 0) - diag).cwiseAbs().maxCoeff() == 0.0);

    auto e = eig_hermitian(partial_transpose(bell_state(), {2, 2}, 1));
    CHECK(e.eigenvalues(0) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("realign and trace_norm") {
    Rng rng(3);
    VectorXcd a = random_gaussian(2, 1, rng), b = random_gaussian(2, 1, rng);
    a /= a.norm();
    b /= b.norm();
    VectorXcd prod = kron(a, b);
    MatrixXcd ps = prod * prod.adjoint();
    CHECK(trace_norm(realign(ps, {2, 2})) == doctest::Approx(1.0).epsilon(1e-10));

    CHECK(trace_norm(realign(bell_state(), {2, 2})) == doctest::Approx(2.0).epsilon(1e-10));

    MatrixXcd z = MatrixXcd::Zero(4, 4);
    CHECK(trace_norm(z) == 0.0);

    MatrixXcd r = realign(random_gaussian(6, 6, rng), {2, 3});
    CHECK(r.rows() == 4);
    CHECK(r.cols() == 9);

    MatrixXcd m = random_gaussian(5, 5, rng);
    CHECK(trace_norm(m) >= std::abs(m.trace()) - 1e-12);

    CHECK_THROWS_AS(realign(MatrixXcd::Identity(8, 8), {2, 2, 2}), DimMismatch);
}
