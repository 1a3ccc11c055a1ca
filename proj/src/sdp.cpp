#include "eapm/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "eapm/errors.hpp"
#include "eapm/linalg.hpp"

namespace eapm {

namespace {

using BlockVec = std::vector<Eigen::MatrixXd>;

double block_dot(const BlockVec& a, const BlockVec& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        s += (a[k].array() * b[k].array()).sum();
    }
    return s;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

// Fixed-point projection onto the realified-complex commutant kills the
// rounding drift that would otherwise leak out of the embedded subspace.
void j_project(Eigen::MatrixXd& m) {
    const int k = static_cast<int>(m.rows()) / 2;
    Eigen::MatrixXd a = 0.5 * (m.topLeftCorner(k, k) + m.bottomRightCorner(k, k));
    a = symmetrized(a);
    Eigen::MatrixXd b = 0.5 * (m.bottomLeftCorner(k, k) - m.topRightCorner(k, k));
    b = 0.5 * (b - b.transpose().eval());
    m.topLeftCorner(k, k) = a;
    m.bottomRightCorner(k, k) = a;
    m.bottomLeftCorner(k, k) = b;
    m.topRightCorner(k, k) = -b;
}

struct EigCache {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

EigCache sym_eig(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(m));
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("symmetric eigendecomposition failed inside the solver");
    }
    return {es.eigenvalues(), es.eigenvectors()};
}

Eigen::MatrixXd apply_spectral(const EigCache& e, double (*fn)(double)) {
    Eigen::VectorXd v = e.values;
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = fn(v(i));
    return e.vectors * v.asDiagonal() * e.vectors.transpose();
}

double clamped_sqrt(double v) { return std::sqrt(std::max(v, 1e-300)); }
double clamped_inv_sqrt(double v) { return 1.0 / std::sqrt(std::max(v, 1e-300)); }
double clamped_inv(double v) { return 1.0 / std::max(v, 1e-300); }

// Largest alpha with X + alpha * D staying PSD; X assumed strictly positive.
double max_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& d) {
    EigCache e = sym_eig(x);
    Eigen::MatrixXd inv_sqrt = apply_spectral(e, clamped_inv_sqrt);
    Eigen::MatrixXd s = symmetrized(inv_sqrt * d * inv_sqrt);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin >= -1e-14) return 1e8;
    return 1.0 / (-lmin);
}

}  // namespace

int BlockSdp::add_block(int dim, bool embedded) {
    dims.push_back(dim);
    complex_embedded.push_back(embedded);
    objective.push_back(Eigen::MatrixXd::Zero(dim, dim));
    return static_cast<int>(dims.size()) - 1;
}

void BlockSdp::set_objective(int block, const Eigen::MatrixXd& m) {
    objective[block] = symmetrized(m);
}

void BlockSdp::add_constraint(BlockConstraint c) {
    for (auto& t : c.terms) t.mat = symmetrized(t.mat);
    constraints.push_back(std::move(c));
}

BlockSolution solve_block_sdp(const BlockSdp& p, const SolveOptions& opts) {
    const int nblocks = static_cast<int>(p.dims.size());
    const int m = static_cast<int>(p.constraints.size());
    int ntotal = 0;
    for (int d : p.dims) ntotal += d;
    if (nblocks == 0 || m == 0) {
        throw InvalidParams("block SDP needs at least one block and one constraint");
    }

    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) b(i) = p.constraints[i].rhs;
    const double bnorm = b.cwiseAbs().maxCoeff();
    double cnorm = 0.0;
    for (const auto& c : p.objective) {
        if (c.size()) cnorm = std::max(cnorm, c.cwiseAbs().maxCoeff());
    }

    BlockVec X, Z;
    for (int d : p.dims) {
        X.push_back(Eigen::MatrixXd::Identity(d, d));
        Z.push_back(Eigen::MatrixXd::Identity(d, d));
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

    auto apply_A = [&](const BlockVec& v) {
        Eigen::VectorXd out(m);
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            for (const auto& t : p.constraints[i].terms) {
                s += (t.mat.array() * v[t.block].array()).sum();
            }
            out(i) = s;
        }
        return out;
    };
    auto apply_At = [&](const Eigen::VectorXd& v) {
        BlockVec out;
        for (int k = 0; k < nblocks; ++k) {
            out.push_back(Eigen::MatrixXd::Zero(p.dims[k], p.dims[k]));
        }
        for (int i = 0; i < m; ++i) {
            for (const auto& t : p.constraints[i].terms) {
                out[t.block] += v(i) * t.mat;
            }
        }
        return out;
    };

    BlockSolution sol;
    double best_pviol = std::numeric_limits<double>::infinity();
    int stall = 0;

    Eigen::VectorXd rp;
    BlockVec rd;
    double dviol = 0.0;
    auto measure = [&](int iter) {
        rp = b - apply_A(X);
        BlockVec aty = apply_At(y);
        rd.clear();
        dviol = 0.0;
        for (int k = 0; k < nblocks; ++k) {
            rd.push_back(p.objective[k] - Z[k] - aty[k]);
            dviol = std::max(dviol, rd[k].cwiseAbs().maxCoeff());
        }
        sol.primal_objective = block_dot(p.objective, X);
        sol.dual_objective = b.dot(y);
        sol.primal_violation = rp.cwiseAbs().maxCoeff();
        sol.duality_gap = std::abs(sol.primal_objective - sol.dual_objective) /
                          (1.0 + std::abs(sol.primal_objective) +
                           std::abs(sol.dual_objective));
        sol.iterations = iter;
    };

    // Near machine precision the normal equations degrade, so the endgame can
    // spoil an essentially converged iterate. Keep the best one seen and fall
    // back to it whenever the final polish fails.
    const double late_p = 1e-8 * (1.0 + bnorm);
    const double late_d = 1e-7 * (1.0 + cnorm);
    const double late_g = 1e-7;
    BlockSolution best_sol;
    BlockVec best_x, best_z;
    Eigen::VectorXd best_y;
    double best_score = std::numeric_limits<double>::infinity();
    auto remember_best = [&] {
        const double score = std::max({sol.primal_violation / late_p, dviol / late_d,
                                       sol.duality_gap / late_g});
        if (score < best_score) {
            best_score = score;
            best_sol = sol;
            best_x = X;
            best_z = Z;
            best_y = y;
        }
    };

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        measure(iter);
        const double pviol = sol.primal_violation;
        const double gap = sol.duality_gap;
        const double mu = block_dot(X, Z) / ntotal;

        if (opts.trace) opts.trace({iter, mu, pviol, dviol, gap});

        const double ptol = opts.feas_tol * (1.0 + bnorm);
        const double dtol = opts.feas_tol * (1.0 + cnorm);
        if (pviol <= ptol && dviol <= dtol && gap <= opts.gap_tol) {
            sol.x = X;
            sol.z = Z;
            sol.y = y;
            return sol;
        }
        remember_best();

        // Stalled primal residual with shrinking complementarity means the
        // equalities cannot be met inside the cone.
        if (pviol < best_pviol * 0.9) {
            best_pviol = pviol;
            stall = 0;
        } else if (++stall > 15 && pviol > 1e-7 * (1.0 + bnorm)) {
            break;
        }
        if (y.cwiseAbs().maxCoeff() > 1e10 * (1.0 + bnorm) && pviol > 1e-8) {
            break;
        }

        // Nesterov-Todd scaling point per block. A spoiled factorization or a
        // cone exit this late is an endgame breakdown: stop stepping and let
        // the fallback below pick the best iterate.
        try {
        BlockVec W, Zinv;
        for (int k = 0; k < nblocks; ++k) {
            EigCache ex = sym_eig(X[k]);
            if (ex.values.minCoeff() <= 0.0 || !std::isfinite(ex.values.maxCoeff())) {
                throw NumericalFailure("iterate left the positive cone");
            }
            Eigen::MatrixXd xs = apply_spectral(ex, clamped_sqrt);
            Eigen::MatrixXd xis = apply_spectral(ex, clamped_inv_sqrt);
            EigCache et = sym_eig(xs * Z[k] * xs);
            if (et.values.minCoeff() <= 0.0 || !std::isfinite(et.values.maxCoeff())) {
                throw NumericalFailure("iterate left the positive cone");
            }
            Eigen::MatrixXd tis = apply_spectral(et, clamped_inv_sqrt);
            Eigen::MatrixXd w = symmetrized(xs * tis * xs);
            W.push_back(w);
            Eigen::MatrixXd xinv = apply_spectral(ex, clamped_inv);
            Zinv.push_back(symmetrized(w * xinv * w));
        }

        // Normal-equations matrix M_ij = <A_i, W A_j W>.
        std::vector<BlockVec> waw(m);
        for (int i = 0; i < m; ++i) {
            BlockVec rowi(nblocks);
            for (const auto& t : p.constraints[i].terms) {
                rowi[t.block] = symmetrized(W[t.block] * t.mat * W[t.block]);
            }
            waw[i] = std::move(rowi);
        }
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            for (int j = i; j < m; ++j) {
                double s = 0.0;
                for (const auto& t : p.constraints[j].terms) {
                    if (waw[i][t.block].size()) {
                        s += (waw[i][t.block].array() * t.mat.array()).sum();
                    }
                }
                M(i, j) = s;
                M(j, i) = s;
            }
        }

        Eigen::LDLT<Eigen::MatrixXd> ldlt;
        double ridge = 0.0;
        for (int attempt = 0; attempt < 4; ++attempt) {
            Eigen::MatrixXd Mr = M;
            if (ridge > 0.0) Mr.diagonal().array() += ridge;
            ldlt.compute(Mr);
            if (ldlt.info() == Eigen::Success && ldlt.isPositive()) break;
            ridge = (ridge == 0.0) ? 1e-13 * (1.0 + M.diagonal().maxCoeff())
                                   : ridge * 100.0;
        }

        // WRdW = W Rd W per block, shared by both solves.
        BlockVec wrdw;
        for (int k = 0; k < nblocks; ++k) {
            wrdw.push_back(symmetrized(W[k] * rd[k] * W[k]));
        }

        auto direction = [&](double sigma_mu) {
            BlockVec base;
            for (int k = 0; k < nblocks; ++k) {
                base.push_back((sigma_mu * Zinv[k] - X[k] - wrdw[k]).eval());
            }
            Eigen::VectorXd rhs = rp - apply_A(base);
            Eigen::VectorXd dy = ldlt.solve(rhs);
            BlockVec atdy = apply_At(dy);
            BlockVec dx, dz;
            for (int k = 0; k < nblocks; ++k) {
                dz.push_back((rd[k] - atdy[k]).eval());
                dx.push_back(symmetrized(base[k] + W[k] * atdy[k] * W[k]));
            }
            return std::make_tuple(std::move(dx), std::move(dy), std::move(dz));
        };

        auto [dx_aff, dy_aff, dz_aff] = direction(0.0);
        double ap = 1.0, ad = 1.0;
        for (int k = 0; k < nblocks; ++k) {
            ap = std::min(ap, max_step(X[k], dx_aff[k]));
            ad = std::min(ad, max_step(Z[k], dz_aff[k]));
        }
        double mu_aff = 0.0;
        for (int k = 0; k < nblocks; ++k) {
            mu_aff += ((X[k] + ap * dx_aff[k]).array() * (Z[k] + ad * dz_aff[k]).array())
                          .sum();
        }
        mu_aff = std::max(mu_aff / ntotal, 0.0);
        double sigma = std::pow(mu_aff / std::max(mu, 1e-300), 3.0);
        sigma = std::clamp(sigma, 1e-10, 0.999);

        auto [dx, dy, dz] = direction(sigma * mu);
        double sp = 1e8, sd = 1e8;
        for (int k = 0; k < nblocks; ++k) {
            sp = std::min(sp, max_step(X[k], dx[k]));
            sd = std::min(sd, max_step(Z[k], dz[k]));
        }
        const double alpha_p = std::min(1.0, 0.98 * sp);
        const double alpha_d = std::min(1.0, 0.98 * sd);

        for (int k = 0; k < nblocks; ++k) {
            X[k] = symmetrized(X[k] + alpha_p * dx[k]);
            Z[k] = symmetrized(Z[k] + alpha_d * dz[k]);
            if (p.complex_embedded[k]) {
                j_project(X[k]);
                j_project(Z[k]);
            }
            if (!X[k].allFinite() || !Z[k].allFinite()) {
                throw NumericalFailure("solver iterate became non-finite");
            }
        }
        y += alpha_d * dy;
        } catch (const NumericalFailure&) {
            break;
        }
    }

    // Out of iterations or broken down: accept the best certificate seen if it
    // is good enough, otherwise classify by where the failure sits.
    measure(sol.iterations + 1);
    if (rp.allFinite()) remember_best();
    if (best_score <= 1.0) {
        best_sol.x = std::move(best_x);
        best_sol.z = std::move(best_z);
        best_sol.y = std::move(best_y);
        return best_sol;
    }
    if (best_pviol > 1e-7 * (1.0 + bnorm)) {
        throw Infeasible("no feasible point found within the iteration budget");
    }
    throw NumericalFailure("duality gap failed to close within the iteration budget");
}

Eigen::MatrixXd realify(const Eigen::MatrixXcd& h) {
    const int d = static_cast<int>(h.rows());
    Eigen::MatrixXd out(2 * d, 2 * d);
    out.topLeftCorner(d, d) = h.real();
    out.topRightCorner(d, d) = -h.imag();
    out.bottomLeftCorner(d, d) = h.imag();
    out.bottomRightCorner(d, d) = h.real();
    return out;
}

Eigen::MatrixXd realify_half(const Eigen::MatrixXcd& h) { return 0.5 * realify(h); }

Eigen::MatrixXcd derealify(const Eigen::MatrixXd& s) {
    const int d = static_cast<int>(s.rows()) / 2;
    Eigen::MatrixXcd out(d, d);
    out.real() = 0.5 * (s.topLeftCorner(d, d) + s.bottomRightCorner(d, d));
    out.imag() = 0.5 * (s.bottomLeftCorner(d, d) - s.topRightCorner(d, d));
    return out;
}

std::vector<Eigen::MatrixXcd> hermitian_basis(int d) {
    std::vector<Eigen::MatrixXcd> out;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < d; ++i) {
        Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(d, d);
        e(i, i) = 1.0;
        out.push_back(e);
    }
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            Eigen::MatrixXcd re = Eigen::MatrixXcd::Zero(d, d);
            re(i, j) = inv_sqrt2;
            re(j, i) = inv_sqrt2;
            out.push_back(re);
            Eigen::MatrixXcd im = Eigen::MatrixXcd::Zero(d, d);
            im(i, j) = std::complex<double>(0.0, -inv_sqrt2);
            im(j, i) = std::complex<double>(0.0, inv_sqrt2);
            out.push_back(im);
        }
    }
    return out;
}

std::vector<Eigen::MatrixXcd> traceless_hermitian_basis(int d) {
    std::vector<Eigen::MatrixXcd> out;
    for (int k = 1; k < d; ++k) {
        Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(d, d);
        const double norm = 1.0 / std::sqrt(static_cast<double>(k) * (k + 1));
        for (int i = 0; i < k; ++i) e(i, i) = norm;
        e(k, k) = -static_cast<double>(k) * norm;
        out.push_back(e);
    }
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            Eigen::MatrixXcd re = Eigen::MatrixXcd::Zero(d, d);
            re(i, j) = inv_sqrt2;
            re(j, i) = inv_sqrt2;
            out.push_back(re);
            Eigen::MatrixXcd im = Eigen::MatrixXcd::Zero(d, d);
            im(i, j) = std::complex<double>(0.0, -inv_sqrt2);
            im(j, i) = std::complex<double>(0.0, inv_sqrt2);
            out.push_back(im);
        }
    }
    return out;
}

namespace {

void require_hermitian(const Eigen::MatrixXcd& m, int d, const char* what) {
    if (m.rows() != d || m.cols() != d) {
        throw InvalidParams(std::string(what) + " has wrong shape");
    }
    if (hermitian_deviation(m) > 1e-10) {
        throw InvalidParams(std::string(what) + " is not Hermitian within 1e-10");
    }
}

}  // namespace

SdpResult sdp_solve(const SdpProblem& p, const SdpTraceFn& trace) {
    if (p.d < 1 || p.d > 16) {
        throw InvalidParams("sdp variable dimension must be in [1, 16]");
    }
    require_hermitian(p.objective, p.d, "objective");
    for (const auto& [a, rhs] : p.equalities) require_hermitian(a, p.d, "equality matrix");
    for (const auto& [g, rhs] : p.inequalities) {
        require_hermitian(g, p.d, "inequality matrix");
    }
    if (p.upper_bound) require_hermitian(*p.upper_bound, p.d, "upper bound");

    BlockSdp blocks;
    const int xb = blocks.add_block(2 * p.d, true);
    blocks.set_objective(xb, -realify_half(p.objective));

    for (const auto& [a, rhs] : p.equalities) {
        blocks.add_constraint({{{xb, realify_half(a)}}, rhs});
    }
    for (const auto& [g, rhs] : p.inequalities) {
        const int sb = blocks.add_block(1);
        Eigen::MatrixXd neg(1, 1);
        neg(0, 0) = -1.0;
        blocks.add_constraint({{{xb, realify_half(g)}, {sb, neg}}, rhs});
    }
    if (p.upper_bound) {
        const int cap = blocks.add_block(2 * p.d, true);
        for (const auto& h : hermitian_basis(p.d)) {
            const double rhs = (h.adjoint() * (*p.upper_bound)).trace().real();
            blocks.add_constraint(
                {{{xb, realify_half(h)}, {cap, realify_half(h)}}, rhs});
        }
    }

    SolveOptions opts;
    opts.trace = trace;
    BlockSolution sol = solve_block_sdp(blocks, opts);

    SdpResult out;
    out.optimizer = derealify(sol.x[xb]);
    out.optimal_value = -sol.primal_objective;
    out.duality_gap = sol.duality_gap;
    out.iterations = sol.iterations;

    double viol = 0.0;
    for (const auto& [a, rhs] : p.equalities) {
        viol = std::max(viol,
                        std::abs((a.adjoint() * out.optimizer).trace().real() - rhs));
    }
    for (const auto& [g, rhs] : p.inequalities) {
        viol = std::max(viol, std::max(0.0, rhs - (g.adjoint() * out.optimizer)
                                                     .trace()
                                                     .real()));
    }
    out.constraint_violation = viol;
    return out;
}

}  // namespace eapm
