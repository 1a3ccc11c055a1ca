#include "eapm/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eapm {

namespace {

int ipow(int base, int exp) {
    int v = 1;
    while (exp-- > 0) v *= base;
    return v;
}

int digit(int x, int y, int d) {
    while (y-- > 0) x /= d;
    return x % d;
}

}  // namespace

Functional::Functional(int b, int x, int y) : nb(b), nx(x), ny(y) {
    if (b < 1 || x < 1 || y < 1) throw ShapeMismatch("functional alphabets must be nonempty");
    c.assign(static_cast<size_t>(b) * x * y, 0.0);
}

void ClassicalStrategy::validate() const {
    if (q.empty() || encoder.size() != q.size() || decoder.size() != q.size())
        throw ShapeMismatch("strategy branch counts disagree");
    double qs = 0.0;
    for (double v : q) {
        if (v < -1e-12) throw ShapeMismatch("negative branch probability");
        qs += v;
    }
    if (std::abs(qs - 1.0) > 1e-12) throw ShapeMismatch("branch distribution not normalized");
    for (size_t l = 0; l < q.size(); ++l) {
        if (encoder[l].rows() != na || encoder[l].cols() != nx)
            throw ShapeMismatch("encoder shape");
        for (int x = 0; x < nx; ++x)
            if (std::abs(encoder[l].col(x).sum() - 1.0) > 1e-12)
                throw ShapeMismatch("encoder column not stochastic");
        if (static_cast<int>(decoder[l].size()) != ny) throw ShapeMismatch("decoder count");
        for (const auto& dec : decoder[l]) {
            if (dec.rows() != nb || dec.cols() != na) throw ShapeMismatch("decoder shape");
            for (int a = 0; a < na; ++a)
                if (std::abs(dec.col(a).sum() - 1.0) > 1e-12)
                    throw ShapeMismatch("decoder column not stochastic");
        }
    }
}

double no_signalling_bound(const Functional& f, const EnergyBound& omega) {
    double first = 0.0;
    for (int y = 0; y < f.ny; ++y) {
        double best = -std::numeric_limits<double>::infinity();
        for (int b = 0; b < f.nb; ++b) {
            double s = 0.0;
            for (int x = 0; x < f.nx; ++x) s += f.at(b, x, y);
            best = std::max(best, s);
        }
        first += best;
    }
    double second = 0.0;
    for (int x = 0; x < f.nx; ++x)
        for (int y = 0; y < f.ny; ++y) {
            double best = -std::numeric_limits<double>::infinity();
            for (int b = 0; b < f.nb; ++b) best = std::max(best, f.at(b, x, y));
            second += best;
        }
    return first + omega.omega * second + f.offset;
}

Functional transmission_functional(int n) {
    Functional f(n, n, 1);
    for (int x = 0; x < n; ++x) f.at(x, x, 0) = 1.0 / n;
    return f;
}

Functional rac_functional(int m, int d) {
    const int nx = ipow(d, m);
    Functional f(d, nx, m);
    const double norm = 1.0 / (m * nx);
    for (int x = 0; x < nx; ++x)
        for (int y = 0; y < m; ++y)
            for (int b = 0; b < d; ++b)
                f.at(b, x, y) = ((digit(x, y, d) == b ? 1.0 : 0.0) - 1.0 / d) * norm;
    f.offset = 1.0 / d;
    return f;
}

ClassicalStrategy transmission_strategy(int n, const EnergyBound& omega) {
    if (n < 2) throw InvalidParams("transmission needs n >= 2");
    const double w = omega.omega;
    if (w > 0.5) throw InvalidEnergy("transmission strategy requires omega <= 1/2");
    const double nu = (1.0 - 2.0 * w) / (1.0 - w);

    ClassicalStrategy s;
    s.nx = s.na = s.nb = n;
    s.ny = 1;
    s.q = {w, 1.0 - w};

    Eigen::MatrixXd enc0 = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd dec0 = Eigen::MatrixXd::Identity(n, n);

    Eigen::MatrixXd enc1 = Eigen::MatrixXd::Zero(n, n);
    enc1(0, 0) = nu;
    enc1(1, 0) = 1.0 - nu;
    for (int x = 1; x < n; ++x) enc1(0, x) = 1.0;
    Eigen::MatrixXd dec1 = Eigen::MatrixXd::Zero(n, n);
    dec1(1, 0) = 1.0;
    dec1(0, 1) = 1.0;
    for (int a = 2; a < n; ++a) dec1(a, a) = 1.0;  // unreachable messages

    s.encoder = {enc0, enc1};
    s.decoder = {{dec0}, {dec1}};
    s.validate();
    return s;
}

ClassicalStrategy rac_strategy(int m, int d, const EnergyBound& omega) {
    if (m < 1 || d < 2) throw InvalidParams("rac needs m >= 1 and d >= 2");
    const int nx = ipow(d, m);
    const double w = omega.omega;
    if (w > 1.0 / nx) throw EnergyTooHigh("rac strategy requires omega <= d^-m");

    ClassicalStrategy s;
    s.nx = s.na = nx;
    s.nb = d;
    s.ny = m;
    s.q.assign(1 + nx, w);
    s.q[0] = 1.0 - nx * w;

    Eigen::MatrixXd enc_null = Eigen::MatrixXd::Zero(nx, nx);
    enc_null.row(0).setOnes();
    std::vector<Eigen::MatrixXd> dec_null(m, Eigen::MatrixXd::Constant(d, nx, 1.0 / d));
    s.encoder.push_back(enc_null);
    s.decoder.push_back(dec_null);

    for (int str = 0; str < nx; ++str) {
        Eigen::MatrixXd enc = Eigen::MatrixXd::Zero(nx, nx);
        for (int x = 0; x < nx; ++x) enc(x == str ? str : 0, x) = 1.0;
        std::vector<Eigen::MatrixXd> dec(m, Eigen::MatrixXd::Zero(d, nx));
        for (int y = 0; y < m; ++y)
            for (int a = 0; a < nx; ++a) dec[y](digit(a, y, d), a) = 1.0;
        s.encoder.push_back(enc);
        s.decoder.push_back(dec);
    }
    s.validate();
    return s;
}

CorrelationTable strategy_correlations(const ClassicalStrategy& s) {
    CorrelationTable t(s.nb, s.nx, s.ny);
    for (size_t l = 0; l < s.q.size(); ++l)
        for (int y = 0; y < s.ny; ++y) {
            Eigen::MatrixXd pbx = s.decoder[l][y] * s.encoder[l];  // (b, x)
            for (int b = 0; b < s.nb; ++b)
                for (int x = 0; x < s.nx; ++x) t.p(b, x, y) += s.q[l] * pbx(b, x);
        }
    t.validate();
    return t;
}

double evaluate_strategy(const ClassicalStrategy& s, const Functional& f) {
    if (f.nb != s.nb || f.nx != s.nx || f.ny != s.ny)
        throw ShapeMismatch("functional and strategy alphabets disagree");
    CorrelationTable t = strategy_correlations(s);
    double v = f.offset;
    for (int b = 0; b < f.nb; ++b)
        for (int x = 0; x < f.nx; ++x)
            for (int y = 0; y < f.ny; ++y) v += f.at(b, x, y) * t.p(b, x, y);
    return v;
}

bool check_energy(const ClassicalStrategy& s, const EnergyBound& omega) {
    for (int x = 0; x < s.nx; ++x) {
        double null_prob = 0.0;
        for (size_t l = 0; l < s.q.size(); ++l) null_prob += s.q[l] * s.encoder[l](0, x);
        if (null_prob < 1.0 - omega.omega - 1e-12) return false;
    }
    return true;
}

}  // namespace eapm
