#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <complex>
#include <numeric>
#include <vector>

#include "eapm/errors.hpp"

namespace eapm {

using DimList = std::vector<int>;

inline int dim_product(const DimList& dims) {
    return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<int>());
}

template <typename Derived>
void check_square(const Eigen::MatrixBase<Derived>& m) {
    if (m.rows() != m.cols())
        throw NonSquare("matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

template <typename Derived>
void check_dims(const Eigen::MatrixBase<Derived>& m, const DimList& dims) {
    check_square(m);
    if (dims.empty() || dim_product(dims) != m.rows())
        throw DimMismatch("subsystem dimensions do not factor the matrix side length");
    for (int d : dims)
        if (d < 1) throw DimMismatch("subsystem dimension must be >= 1");
}

template <typename Derived>
double hermitian_deviation(const Eigen::MatrixBase<Derived>& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename Eigen::ScalarBinaryOpTraits<typename DerivedA::Scalar,
                                                        typename DerivedB::Scalar>::ReturnType;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
        Eigen::kroneckerProduct(a.derived(), b.derived());
    return out;
}

namespace detail {

// Row-major subsystem strides: subsystem 0 is the most significant index.
inline std::vector<int> strides(const DimList& dims) {
    std::vector<int> s(dims.size(), 1);
    for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) s[k] = s[k + 1] * dims[k + 1];
    return s;
}

}  // namespace detail

template <typename Derived>
typename Derived::PlainObject partial_trace(const Eigen::MatrixBase<Derived>& m,
                                            const DimList& dims, const std::vector<int>& keep) {
    check_dims(m, dims);
    const int n = static_cast<int>(dims.size());
    std::vector<bool> kept(n, false);
    for (int k : keep) {
        if (k < 0 || k >= n) throw DimMismatch("keep index out of range");
        kept[k] = true;
    }
    DimList kdims, tdims;
    std::vector<int> kidx, tidx;
    for (int k = 0; k < n; ++k) {
        if (kept[k]) { kdims.push_back(dims[k]); kidx.push_back(k); }
        else         { tdims.push_back(dims[k]); tidx.push_back(k); }
    }
    const auto full_s = detail::strides(dims);
    const int dk = dim_product(kdims), dt = dim_product(tdims);
    const auto ks = detail::strides(kdims.empty() ? DimList{1} : kdims);
    const auto ts = detail::strides(tdims.empty() ? DimList{1} : tdims);

    typename Derived::PlainObject out = Derived::PlainObject::Zero(dk, dk);
    for (int i = 0; i < dk; ++i)
        for (int j = 0; j < dk; ++j) {
            int base_r = 0, base_c = 0;
            for (size_t p = 0; p < kidx.size(); ++p) {
                base_r += ((i / ks[p]) % kdims[p]) * full_s[kidx[p]];
                base_c += ((j / ks[p]) % kdims[p]) * full_s[kidx[p]];
            }
            typename Derived::Scalar acc{};
            for (int t = 0; t < dt; ++t) {
                int off = 0;
                for (size_t p = 0; p < tidx.size(); ++p)
                    off += ((t / ts[p]) % tdims[p]) * full_s[tidx[p]];
                acc += m(base_r + off, base_c + off);
            }
            out(i, j) = acc;
        }
    return out;
}

template <typename Derived>
typename Derived::PlainObject partial_transpose(const Eigen::MatrixBase<Derived>& m,
                                                const DimList& dims, int subsystem) {
    check_dims(m, dims);
    const int n = static_cast<int>(dims.size());
    if (subsystem < 0 || subsystem >= n) throw DimMismatch("subsystem index out of range");
    const auto s = detail::strides(dims);
    const int d = m.rows(), ds = dims[subsystem], st = s[subsystem];

    typename Derived::PlainObject out(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
            const int rs = (r / st) % ds, cs = (c / st) % ds;
            out(r - (rs - cs) * st, c + (rs - cs) * st) = m(r, c);
        }
    return out;
}

template <typename Derived>
typename Derived::PlainObject realign(const Eigen::MatrixBase<Derived>& m, const DimList& dims) {
    check_dims(m, dims);
    if (dims.size() != 2) throw DimMismatch("realignment requires exactly two subsystems");
    const int da = dims[0], db = dims[1];
    typename Derived::PlainObject out(da * da, db * db);
    for (int i = 0; i < da; ++i)
        for (int k = 0; k < da; ++k)
            for (int j = 0; j < db; ++j)
                for (int l = 0; l < db; ++l)
                    out(i * da + k, j * db + l) = m(i * db + j, k * db + l);
    return out;
}

template <typename Derived>
double trace_norm(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<typename Derived::PlainObject> svd(m.derived());
    return svd.singularValues().sum();
}

template <typename Derived>
struct EigHermitian {
    Eigen::VectorXd eigenvalues;  // ascending
    typename Derived::PlainObject eigenvectors;
};

template <typename Derived>
EigHermitian<Derived> eig_hermitian(const Eigen::MatrixBase<Derived>& h, double tol = 1e-10) {
    check_square(h);
    if (hermitian_deviation(h) > tol)
        throw NonHermitian("deviation " + std::to_string(hermitian_deviation(h)));
    typename Derived::PlainObject sym = (h.derived() + h.derived().adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<typename Derived::PlainObject> es(sym);
    if (es.info() != Eigen::Success) throw NumericalFailure("hermitian eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace eapm
