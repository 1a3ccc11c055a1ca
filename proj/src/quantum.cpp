#include "eapm/quantum.hpp"

#include <cmath>
#include <string>

namespace eapm {

EnergyBound::EnergyBound(double w) : omega(w) {
    if (!(w >= 0.0 && w <= 1.0)) throw InvalidEnergy("omega must lie in [0, 1]");
}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd m, DimList d)
    : matrix(std::move(m)), dims(std::move(d)) {
    check_dims(matrix, dims);
    if (hermitian_deviation(matrix) > 1e-10)
        throw InvalidParams("density matrix not Hermitian");
    if (std::abs(matrix.trace().real() - 1.0) > 1e-10 || std::abs(matrix.trace().imag()) > 1e-10)
        throw InvalidParams("density matrix trace must be 1");
    auto e = eig_hermitian(matrix);
    double min_eig = e.eigenvalues(0);
    if (min_eig < -1e-9)
        throw InvalidParams("density matrix has eigenvalue " + std::to_string(min_eig));
    if (min_eig < 0.0) {
        Eigen::VectorXd vals = e.eigenvalues.cwiseMax(0.0);
        matrix = e.eigenvectors * vals.asDiagonal() * e.eigenvectors.adjoint();
        matrix /= matrix.trace().real();
    }
}

KrausChannel::KrausChannel(std::vector<Eigen::MatrixXcd> ops, int in_d, int out_d)
    : kraus_ops(std::move(ops)), in_dim(in_d), out_dim(out_d) {
    if (kraus_ops.empty()) throw InvalidParams("channel needs at least one Kraus operator");
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(in_dim, in_dim);
    for (const auto& k : kraus_ops) {
        if (k.rows() != out_dim || k.cols() != in_dim)
            throw DimMismatch("Kraus operator must be out_dim x in_dim");
        comp += k.adjoint() * k;
    }
    if ((comp - Eigen::MatrixXcd::Identity(in_dim, in_dim)).cwiseAbs().maxCoeff() > 1e-9)
        throw IncompleteChannel("sum K†K deviates from identity");
}

Povm::Povm(std::vector<Eigen::MatrixXcd> elems) : elements(std::move(elems)) {
    if (elements.empty()) throw InvalidParams("POVM needs at least one element");
    const auto n = elements[0].rows();
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& e : elements) {
        if (e.rows() != n || e.cols() != n) throw DimMismatch("POVM elements must share shape");
        if (hermitian_deviation(e) > 1e-9) throw InvalidParams("POVM element not Hermitian");
        if (eig_hermitian(e, 1e-8).eigenvalues(0) < -1e-9)
            throw InvalidParams("POVM element not PSD");
        sum += e;
    }
    if ((sum - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-9)
        throw InvalidParams("POVM elements must sum to identity");
}

CorrelationTable::CorrelationTable(int b, int x, int y) : nb(b), nx(x), ny(y) {
    probs.assign(static_cast<size_t>(b) * x * y, 0.0);
}

void CorrelationTable::validate() const {
    for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y) {
            double s = 0.0;
            for (int b = 0; b < nb; ++b) {
                double v = p(b, x, y);
                if (v < -1e-9 || v > 1.0 + 1e-9)
                    throw InvalidParams("probability out of range");
                s += v;
            }
            if (std::abs(s - 1.0) > 1e-9)
                throw InvalidParams("outcome distribution not normalized");
        }
}

DensityMatrix apply_channel(const KrausChannel& channel, const DensityMatrix& state,
                            int subsystem) {
    const int n = static_cast<int>(state.dims.size());
    if (subsystem < 0 || subsystem >= n) throw DimMismatch("subsystem index out of range");
    if (state.dims[subsystem] != channel.in_dim)
        throw DimMismatch("channel input dimension does not match subsystem");

    int before = 1, after = 1;
    for (int k = 0; k < subsystem; ++k) before *= state.dims[k];
    for (int k = subsystem + 1; k < n; ++k) after *= state.dims[k];
    Eigen::MatrixXcd ib = Eigen::MatrixXcd::Identity(before, before);
    Eigen::MatrixXcd ia = Eigen::MatrixXcd::Identity(after, after);

    DimList out_dims = state.dims;
    out_dims[subsystem] = channel.out_dim;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_product(out_dims), dim_product(out_dims));
    for (const auto& k : channel.kraus_ops) {
        Eigen::MatrixXcd lifted = kron(kron(ib, k), ia);
        out += lifted * state.matrix * lifted.adjoint();
    }
    return DensityMatrix(out, out_dims);
}

double vacuum_weight(const DensityMatrix& state, int message_subsystem) {
    Eigen::MatrixXcd red = partial_trace(state.matrix, state.dims, {message_subsystem});
    return red(0, 0).real();
}

HelstromResult helstrom(const DensityMatrix& tau0, const DensityMatrix& tau1) {
    if (tau0.dim() != tau1.dim()) throw DimMismatch("states must share dimension");
    const int d = tau0.dim();
    auto e = eig_hermitian(tau0.matrix - tau1.matrix);
    double lambda_plus = 0.0;
    Eigen::MatrixXcd m0 = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        if (e.eigenvalues(i) > 1e-12) {
            lambda_plus += e.eigenvalues(i);
            m0 += e.eigenvectors.col(i) * e.eigenvectors.col(i).adjoint();
        }
    }
    Povm povm({m0, Eigen::MatrixXcd::Identity(d, d) - m0});
    return {0.5 + 0.5 * lambda_plus, std::move(povm)};
}

CorrelationTable correlations(const std::vector<DensityMatrix>& states,
                              const std::vector<Povm>& povms) {
    if (states.empty() || povms.empty()) throw InvalidParams("empty model");
    const int nb = static_cast<int>(povms[0].elements.size());
    CorrelationTable t(nb, static_cast<int>(states.size()), static_cast<int>(povms.size()));
    for (size_t x = 0; x < states.size(); ++x)
        for (size_t y = 0; y < povms.size(); ++y) {
            if (static_cast<int>(povms[y].elements.size()) != nb)
                throw DimMismatch("POVMs must share outcome count");
            for (int b = 0; b < nb; ++b) {
                if (povms[y].elements[b].rows() != states[x].dim())
                    throw DimMismatch("POVM dimension does not match state");
                t.p(b, static_cast<int>(x), static_cast<int>(y)) =
                    (states[x].matrix * povms[y].elements[b]).trace().real();
            }
        }
    t.validate();
    return t;
}

std::pair<bool, double> is_ppt(const DensityMatrix& state) {
    if (state.dims.size() != 2) throw DimMismatch("PPT check requires a bipartite state");
    auto e = eig_hermitian(partial_transpose(state.matrix, state.dims, 1));
    double min_eig = e.eigenvalues(0);
    return {min_eig >= -1e-9, min_eig};
}

double ccnr_value(const DensityMatrix& state) {
    if (state.dims.size() != 2) throw DimMismatch("realignment requires a bipartite state");
    return trace_norm(realign(state.matrix, state.dims));
}

double purity(const DensityMatrix& state) {
    return (state.matrix * state.matrix).trace().real();
}

}  // namespace eapm
