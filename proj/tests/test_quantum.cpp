#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "eapm/quantum.hpp"
#include "eapm/random.hpp"

using namespace eapm;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cxd = std::complex<double>;

namespace {

DensityMatrix pure(const VectorXcd& psi, DimList dims) {
    return DensityMatrix(psi * psi.adjoint(), std::move(dims));
}

VectorXcd basis(int i, int d) {
    VectorXcd v = VectorXcd::Zero(d);
    v(i) = 1.0;
    return v;
}

KrausChannel random_cptp(int in_dim, int out_dim, int n_kraus, Rng& rng) {
    MatrixXcd g = random_gaussian(n_kraus * out_dim, in_dim, rng);
    Eigen::HouseholderQR<MatrixXcd> qr(g);
    MatrixXcd q = qr.householderQ() * MatrixXcd::Identity(n_kraus * out_dim, in_dim);
    std::vector<MatrixXcd> ops;
    for (int i = 0; i < n_kraus; ++i) ops.push_back(q.middleRows(i * out_dim, out_dim));
    return KrausChannel(std::move(ops), in_dim, out_dim);
}

}  // namespace

TEST_CASE("density matrix validation") {
    CHECK_THROWS_AS(EnergyBound(-0.1), InvalidEnergy);
    CHECK_THROWS_AS(EnergyBound(1.1), InvalidEnergy);

    MatrixXcd bad(2, 2);
    bad << 1.5, 0, 0, -0.5;
    CHECK_THROWS_AS(DensityMatrix(bad, {2}), InvalidParams);

    MatrixXcd tiny(2, 2);
    tiny << 1.0 + 5e-10, 0, 0, -5e-10;
    DensityMatrix repaired(tiny, {2});
    CHECK(repaired.matrix(1, 1).real() >= 0.0);
    CHECK(repaired.matrix.trace().real() == doctest::Approx(1.0).epsilon(1e-12));

    MatrixXcd off(2, 2);
    off << 0.5, 0.5, 0.2, 0.5;
    CHECK_THROWS_AS(DensityMatrix(off, {2}), InvalidParams);
}

TEST_CASE("apply_channel") {
    Rng rng(42);
    DensityMatrix rho(random_density(2, rng), {2});

    KrausChannel ident({MatrixXcd::Identity(2, 2)}, 2, 2);
    CHECK((apply_channel(ident, rho, 0).matrix - rho.matrix).cwiseAbs().maxCoeff() < 1e-12);

    MatrixXcd x(2, 2);
    x << 0, 1, 1, 0;
    KrausChannel flip({x}, 2, 2);
    DensityMatrix zero = pure(basis(0, 2), {2});
    CHECK(apply_channel(flip, zero, 0).matrix(1, 1).real() == doctest::Approx(1.0));

    MatrixXcd k0(2, 2), k1(2, 2);
    k0 << 1, 0, 0, 0;
    k1 << 0, 1, 0, 0;
    KrausChannel reset({k0, k1}, 2, 2);
    DensityMatrix mixed(MatrixXcd::Identity(2, 2) / 2.0, {2});
    CHECK(apply_channel(reset, mixed, 0).matrix(0, 0).real() == doctest::Approx(1.0));

    std::vector<MatrixXcd> bad = {k0};
    CHECK_THROWS_AS(KrausChannel(bad, 2, 2), IncompleteChannel);
}

TEST_CASE("apply_channel preserves trace and positivity for random isometric channels") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        int in_d = 2 + static_cast<int>(rng() % 2);
        int out_d = 2 + static_cast<int>(rng() % 2);
        auto ch = random_cptp(in_d, out_d, 2, rng);
        DensityMatrix rho(random_density(2 * in_d, rng), {2, in_d});
        DensityMatrix out = apply_channel(ch, rho, 1);
        CHECK(out.matrix.trace().real() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(eig_hermitian(out.matrix).eigenvalues(0) >= -1e-10);
        CHECK(out.dims[1] == out_d);
    }
}

TEST_CASE("vacuum_weight") {
    CHECK(vacuum_weight(pure(basis(0, 3), {3})) == doctest::Approx(1.0));
    CHECK(vacuum_weight(pure(basis(1, 3), {3})) == doctest::Approx(0.0));

    Rng rng(5);
    DensityMatrix a(random_density(4, rng), {2, 2});
    DensityMatrix b(random_density(4, rng), {2, 2});
    double p = 0.3;
    DensityMatrix mix(p * a.matrix + (1 - p) * b.matrix, {2, 2});
    CHECK(vacuum_weight(mix) ==
          doctest::Approx(p * vacuum_weight(a) + (1 - p) * vacuum_weight(b)).epsilon(1e-12));
}

TEST_CASE("helstrom") {
    Rng rng(10);
    DensityMatrix rho(random_density(3, rng), {3});
    auto same = helstrom(rho, rho);
    CHECK(same.w2 == doctest::Approx(0.5).epsilon(1e-12));

    auto orth = helstrom(pure(basis(0, 2), {2}), pure(basis(1, 2), {2}));
    CHECK(orth.w2 == doctest::Approx(1.0).epsilon(1e-12));

    for (double c : {0.1, 0.5, 0.6, 0.9}) {
        VectorXcd psi0 = basis(0, 2);
        VectorXcd psi1 = c * basis(0, 2) + std::sqrt(1 - c * c) * basis(1, 2);
        auto h = helstrom(pure(psi0, {2}), pure(psi1, {2}));
        CHECK(h.w2 == doctest::Approx(0.5 * (1 + std::sqrt(1 - c * c))).epsilon(1e-12));
    }

    DensityMatrix t0(random_density(4, rng), {4});
    DensityMatrix t1(random_density(4, rng), {4});
    auto h01 = helstrom(t0, t1);
    auto h10 = helstrom(t1, t0);
    CHECK(h01.w2 == doctest::Approx(h10.w2).epsilon(1e-12));
    CHECK(h01.w2 >= 0.5);

    double replay = 0.5 * ((t0.matrix * h01.optimal_povm.elements[0]).trace().real() +
                           (t1.matrix * h01.optimal_povm.elements[1]).trace().real());
    CHECK(replay == doctest::Approx(h01.w2).epsilon(1e-9));
}

TEST_CASE("correlations") {
    std::vector<DensityMatrix> states = {pure(basis(0, 2), {2}), pure(basis(1, 2), {2})};
    Povm comp({pure(basis(0, 2), {2}).matrix, pure(basis(1, 2), {2}).matrix});
    auto t = correlations(states, {comp});
    CHECK(t.p(0, 0, 0) == doctest::Approx(1.0));
    CHECK(t.p(1, 1, 0) == doctest::Approx(1.0));
    CHECK(t.p(1, 0, 0) == doctest::Approx(0.0));

    Rng rng(21);
    std::vector<DensityMatrix> mixed = {DensityMatrix(MatrixXcd::Identity(2, 2) / 2.0, {2}),
                                        DensityMatrix(MatrixXcd::Identity(2, 2) / 2.0, {2})};
    Povm equal({MatrixXcd::Identity(2, 2) / 2.0, MatrixXcd::Identity(2, 2) / 2.0});
    auto u = correlations(mixed, {equal});
    for (int b = 0; b < 2; ++b)
        for (int x = 0; x < 2; ++x) CHECK(u.p(b, x, 0) == doctest::Approx(0.5));

    DensityMatrix rho(random_density(3, rng), {3});
    auto ch = helstrom(rho, DensityMatrix(random_density(3, rng), {3}));
    double total = 0.0;
    for (const auto& e : ch.optimal_povm.elements) total += (rho.matrix * e).trace().real();
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("entanglement detectors and purity") {
    Rng rng(33);
    DensityMatrix prodst(kron(random_density(2, rng), random_density(2, rng)), {2, 2});
    auto [flag, me] = is_ppt(prodst);
    CHECK(flag);
    CHECK(ccnr_value(prodst) <= 1.0 + 1e-9);

    DensityMatrix pureprod = pure(kron(basis(0, 2), basis(1, 2)), {2, 2});
    CHECK(ccnr_value(pureprod) == doctest::Approx(1.0).epsilon(1e-9));

    VectorXcd bell = (kron(basis(0, 2), basis(0, 2)) + kron(basis(1, 2), basis(1, 2))) /
                     std::sqrt(2.0);
    DensityMatrix bs = pure(bell, {2, 2});
    auto [bflag, bme] = is_ppt(bs);
    CHECK_FALSE(bflag);
    CHECK(bme == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(ccnr_value(bs) == doctest::Approx(2.0).epsilon(1e-9));

    CHECK(purity(bs) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(purity(DensityMatrix(MatrixXcd::Identity(2, 2) / 2.0, {2})) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("povm validation") {
    MatrixXcd half = MatrixXcd::Identity(2, 2) / 2.0;
    CHECK_THROWS_AS(Povm({half, half, half}), InvalidParams);
    MatrixXcd neg(2, 2);
    neg << 1.5, 0, 0, -0.5;
    MatrixXcd comp = MatrixXcd::Identity(2, 2) - neg;
    CHECK_THROWS_AS(Povm({neg, comp}), InvalidParams);
}
