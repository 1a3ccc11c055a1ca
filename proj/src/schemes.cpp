#include "eapm/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>

#include "eapm/errors.hpp"
#include "eapm/linalg.hpp"

namespace eapm {

namespace {

using Complex = std::complex<double>;

Eigen::VectorXcd basis_ket(int dim, int index) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    v(index) = 1.0;
    return v;
}

double max_abs_deviation(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

// Post-measurement ensemble states are produced twice: operationally through
// the channel and directly from the printed mixture. Both routes must agree.
void check_routes_agree(const Eigen::MatrixXcd& from_channel,
                        const Eigen::MatrixXcd& compact, const char* what) {
    if (max_abs_deviation(from_channel, compact) > 1e-9) {
        throw NumericalFailure(std::string(what) +
                               ": channel route deviates from compact form");
    }
}

void validate_qubit_params(const SchemeParams& p) {
    const double w = p.omega.omega;
    if (!(p.r >= 0.0) || !(p.r <= w)) {
        throw InvalidParams("qubit scheme requires 0 <= r <= omega");
    }
    if (!(w < 1.0) || !(w + p.r <= 1.0)) {
        throw InvalidParams("qubit scheme requires omega < 1 and omega + r <= 1");
    }
}

void validate_qutrit_params(const SchemeParams& p) {
    const double w = p.omega.omega;
    if (!(p.r >= 0.0) || !(p.r <= w)) {
        throw InvalidParams("qutrit scheme requires 0 <= r <= omega");
    }
    if (!(1.0 - p.r - w >= 0.0)) {
        throw InvalidParams("qutrit scheme requires r + omega <= 1");
    }
}

double safe_sqrt(double v) { return std::sqrt(std::max(0.0, v)); }

}  // namespace

double qc_optimal_w2(const EnergyBound& omega) {
    const double w = omega.omega;
    if (w >= 0.5) return 1.0;
    const double s = std::sqrt(1.0 - w) + std::sqrt(w);
    return 0.5 * s * s;
}

Scheme qubit_scheme(const SchemeParams& p) {
    validate_qubit_params(p);
    const double w = p.omega.omega;
    const double r = p.r;

    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
    psi(0) = safe_sqrt(1.0 - w);
    psi(2) = -safe_sqrt((w - r) / 2.0);
    psi(3) = safe_sqrt((w + r) / 2.0);
    DensityMatrix shared(psi * psi.adjoint(), {2, 2});

    KrausChannel identity({Eigen::MatrixXcd::Identity(2, 2)}, 2, 2);

    Eigen::MatrixXcd k0 = Eigen::MatrixXcd::Zero(2, 2);
    Eigen::MatrixXcd k1 = Eigen::MatrixXcd::Zero(2, 2);
    if (w + r <= 0.0) {
        k1(0, 0) = 1.0;
        k1(1, 1) = -1.0;
    } else {
        k0(0, 0) = safe_sqrt(r * (w - r)) / safe_sqrt((1.0 - w) * (w + r));
        k0(0, 1) = safe_sqrt(2.0 * r) / safe_sqrt(w + r);
        k1(0, 0) = safe_sqrt(1.0 - r - w) / safe_sqrt(1.0 - w);
        k1(1, 0) = std::sqrt(2.0) * r / safe_sqrt((1.0 - w) * (w + r));
        k1(1, 1) = -safe_sqrt(w - r) / safe_sqrt(w + r);
    }
    KrausChannel flip({k0, k1}, 2, 2);

    DensityMatrix tau0 = apply_channel(identity, shared, 0);
    DensityMatrix tau1 = apply_channel(flip, shared, 0);

    check_routes_agree(tau0.matrix, shared.matrix, "qubit tau0");
    Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(4);
    phi(0) = safe_sqrt(1.0 - r - w);
    phi(2) = safe_sqrt((w + r) / 2.0);
    phi(3) = -safe_sqrt((w - r) / 2.0);
    phi /= std::sqrt(1.0 - r);
    Eigen::VectorXcd e01 = basis_ket(4, 1);
    Eigen::MatrixXcd tau1_compact =
        r * (e01 * e01.adjoint()) + (1.0 - r) * (phi * phi.adjoint());
    check_routes_agree(tau1.matrix, tau1_compact, "qubit tau1");

    Scheme s{std::move(shared), {identity, flip}, {tau0, tau1}};
    return s;
}

double qubit_w2_closed_form(const SchemeParams& p) {
    validate_qubit_params(p);
    const double w = p.omega.omega;
    const double r = p.r;
    const double z = 1.0 - w;
    const double inner = 5.0 * r * r - 4.0 * r * w +
                         8.0 * std::sqrt(z) * safe_sqrt(w - r) *
                             safe_sqrt((z - r) * (r + w)) +
                         8.0 * z * w;
    const double lambda = 0.5 * (r + safe_sqrt(inner));
    return 0.5 + 0.5 * lambda;
}

Scheme qutrit_scheme(const SchemeParams& p) {
    validate_qutrit_params(p);
    const double w = p.omega.omega;
    const double r = p.r;
    const double a = 1.0 - r - w;

    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(9);
    const double amp = 0.5 * safe_sqrt(1.0 - a);
    psi(2) = safe_sqrt(a);  // |02>
    psi(3) = amp;           // |10>
    psi(4) = amp;           // |11>
    psi(6) = amp;           // |20>
    psi(7) = -amp;          // |21>
    DensityMatrix shared(psi * psi.adjoint(), {3, 3});

    std::vector<KrausChannel> channels;
    std::vector<DensityMatrix> posts;
    for (int x = 0; x < 2; ++x) {
        const double s = (x == 0) ? 1.0 : -1.0;
        double bx = 0.0;
        double cx = 0.0;
        std::vector<Eigen::MatrixXcd> ops;
        if (w + r <= 0.0) {
            ops.push_back(Eigen::MatrixXcd::Identity(3, 3));
        } else {
            bx = s * safe_sqrt((w - s * r) / (2.0 * (1.0 - a)));
            cx = s * safe_sqrt((w + s * r) / (2.0 * (1.0 - a)));
            Eigen::MatrixXcd k0 = Eigen::MatrixXcd::Zero(3, 3);
            k0(0, 1) = safe_sqrt(r / (1.0 - a));
            k0(0, 2) = s * safe_sqrt(r / (1.0 - a));
            Eigen::MatrixXcd k1 = Eigen::MatrixXcd::Zero(3, 3);
            k1(0, 0) = 1.0;
            k1(1, 1) = -bx;
            k1(1, 2) = -bx;
            k1(2, 1) = cx;
            k1(2, 2) = -cx;
            ops.push_back(k0);
            ops.push_back(k1);
        }
        KrausChannel channel(ops, 3, 3);
        DensityMatrix tau = apply_channel(channel, shared, 0);

        Eigen::VectorXcd psix = Eigen::VectorXcd::Zero(9);
        const double scale = safe_sqrt((1.0 - a) / (1.0 - r));
        psix(2) = safe_sqrt(a / (1.0 - r));
        psix(3) = -scale * bx;  // |10>
        psix(7) = scale * cx;   // |21>
        Eigen::VectorXcd e0x = basis_ket(9, x);
        Eigen::MatrixXcd compact =
            r * (e0x * e0x.adjoint()) + (1.0 - r) * (psix * psix.adjoint());
        check_routes_agree(tau.matrix, compact, "qutrit tau");

        channels.push_back(std::move(channel));
        posts.push_back(std::move(tau));
    }

    Scheme s{std::move(shared), std::move(channels), std::move(posts)};
    return s;
}

double qutrit_w2_closed_form(const SchemeParams& p) {
    validate_qutrit_params(p);
    const double w = p.omega.omega;
    const double r = p.r;
    const double a = 1.0 - r - w;
    const double inner =
        2.0 * a * safe_sqrt(w * w - r * r) + r * r + 2.0 * w * a;
    return 0.5 * (1.0 + r + safe_sqrt(inner));
}

OptimizeRResult optimize_r(SchemeKind kind, const EnergyBound& omega) {
    const double w = omega.omega;
    if (!(w > 0.0) || !(w <= 0.5)) {
        throw InvalidParams("optimize_r requires 0 < omega <= 1/2");
    }
    const double hi = std::min(w, 1.0 - w);
    auto f = [&](double r) {
        SchemeParams p{omega, r};
        return kind == SchemeKind::Qubit ? qubit_w2_closed_form(p)
                                         : qutrit_w2_closed_form(p);
    };

    // The objective develops two peaks past the threshold where it reaches
    // one, so a dense pre-scan picks the basin before local refinement.
    const int n = 400;
    double best_r = 0.0;
    double best_v = f(0.0);
    for (int i = 1; i <= n; ++i) {
        const double r = hi * static_cast<double>(i) / n;
        const double v = f(r);
        if (v > best_v) {
            best_v = v;
            best_r = r;
        }
    }

    double lo = std::max(0.0, best_r - hi / n);
    double up = std::min(hi, best_r + hi / n);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = up - gr * (up - lo);
    double d = lo + gr * (up - lo);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 120 && up - lo > 1e-15; ++it) {
        if (fc > fd) {
            up = d;
            d = c;
            fd = fc;
            c = up - gr * (up - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (up - lo);
            fd = f(d);
        }
    }
    double r_star = 0.5 * (lo + up);
    double w_star = f(r_star);

    // Parabolic polish around the golden-section output.
    const double h = std::max(1e-9, hi * 1e-7);
    if (r_star - h >= 0.0 && r_star + h <= hi) {
        const double fm = f(r_star - h);
        const double fp = f(r_star + h);
        const double denom = fm - 2.0 * w_star + fp;
        if (denom < 0.0) {
            const double step = 0.5 * h * (fm - fp) / denom;
            const double cand = r_star + step;
            if (cand >= 0.0 && cand <= hi) {
                const double fv = f(cand);
                if (fv >= w_star) {
                    r_star = cand;
                    w_star = fv;
                }
            }
        }
    }

    for (double edge : {0.0, hi}) {
        const double fv = f(edge);
        if (fv > w_star) {
            w_star = fv;
            r_star = edge;
        }
    }
    return {r_star, w_star};
}

CorrelatorRange pm_ellipse_max_correlator(const EnergyBound& omega, double e0) {
    if (!(std::abs(e0) <= 1.0)) {
        throw InvalidInput("pm_ellipse_max_correlator requires |e0| <= 1");
    }
    const double w = omega.omega;
    if (w >= 0.5) return {1.0, -1.0};

    const double g = 2.0 * w - 1.0;
    const double g2 = g * g;
    const double cross = 2.0 * std::abs(g) * safe_sqrt(1.0 - g2) *
                         safe_sqrt(1.0 - e0 * e0);
    const double slope = 1.0 - 2.0 * g2;

    CorrelatorRange out{1.0, -1.0};
    bool max_on_ellipse = false;
    bool min_on_ellipse = false;
    if (e0 < 2.0 * g2 - 1.0) {
        out.e1_max = -e0 * slope + cross;
        max_on_ellipse = true;
    }
    if (e0 > 1.0 - 2.0 * g2) {
        out.e1_min = -e0 * slope - cross;
        min_on_ellipse = true;
    }

    // Ellipse-branch outputs must sit on the curve itself.
    if (g2 < 1.0 - 1e-14) {
        auto on_curve = [&](double e1) {
            const double u = (e0 + e1) / (2.0 * g);
            const double v = (e0 - e1) / (2.0 * std::sqrt(1.0 - g2));
            return std::abs(u * u + v * v - 1.0) <= 1e-9;
        };
        if ((max_on_ellipse && !on_curve(out.e1_max)) ||
            (min_on_ellipse && !on_curve(out.e1_min))) {
            throw NumericalFailure("correlator boundary point left the curve");
        }
    }
    return out;
}

}  // namespace eapm
