#include "twophase/certification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "twophase/error.hpp"
#include "twophase/random.hpp"

namespace twophase {

std::string to_string(Certified c) {
    switch (c) {
        case Certified::A1: return "A1";
        case Certified::A2: return "A2";
        case Certified::A3: return "A3";
        case Certified::derivative_bounds: return "derivative_bounds";
    }
    return "?";
}

namespace {

constexpr double kTol = 1e-12;
constexpr double kFallbackTol = 1e-8;

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

Point random_point_in_ball(int dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Point x{};
    for (;;) {
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            x[i] = u(rng);
            r2 += x[i] * x[i];
        }
        if (r2 < 1.0) return x;
    }
}

std::array<double, 3> random_direction(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::array<double, 3> xi{};
    for (int i = 0; i < dim; ++i) xi[i] = g(rng);
    return xi;
}

class ReportBuilder {
public:
    explicit ReportBuilder(Certified which) { report_.assumption = which; }

    void record(Counterexample sample, double tol) {
        ++report_.samples;
        if (report_.samples == 1 || sample.margin < report_.worst_margin) report_.worst_margin = sample.margin;
        if (sample.margin < -tol) {
            ++report_.violation_count;
            if (report_.violations.size() < CertificationReport::kMaxStored)
                report_.violations.push_back(std::move(sample));
        }
    }

    CertificationReport finish() {
        report_.pass = report_.violation_count == 0;
        return std::move(report_);
    }

private:
    CertificationReport report_;
};

double scaled_tol(double base, std::initializer_list<double> magnitudes) {
    double m = 1.0;
    for (double v : magnitudes) m = std::max(m, std::abs(v));
    return base * m;
}

}  // namespace

SymMatrix random_symmetric(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    const double scale = log_uniform(rng, 0.1, 10.0);
    SymMatrix M(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) M.set(i, j, scale * g(rng));
    return M;
}

SymMatrix random_psd(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    double G[3][3];
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) G[i][j] = g(rng);
    SymMatrix N(dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            double s = 0.0;
            for (int k = 0; k < dim; ++k) s += G[k][i] * G[k][j];
            N.set(i, j, s);
        }
    }
    const double norm = N.frobenius_norm();
    const double target = log_uniform(rng, 1e-3, 10.0);
    return norm > 0.0 ? (target / norm) * N : SymMatrix::identity(dim) * (target / std::sqrt(double(dim)));
}

CertificationReport certify_A1(const Operator& op, std::size_t n_samples, std::uint64_t seed) {
    const int d = op.dim();
    const SymMatrix minus_identity = -SymMatrix::identity(d);
    ReportBuilder report(Certified::A1);
    for (std::size_t s = 0; s < n_samples; ++s) {
        auto rng = sample_stream(seed, s);
        Counterexample c;
        c.sample = s;
        if (s < 2) {
            // the M = -I, N = eps I family
            c.M = minus_identity;
            c.N = SymMatrix::identity(d) * (s == 0 ? 0.5 : 0.1);
        } else {
            c.M = random_symmetric(d, rng);
            c.N = random_psd(d, rng);
        }
        c.x = op.has_coefficient() ? random_point_in_ball(d, rng) : Point{};
        const double f0 = op.eval(c.M, c.x);
        const double f1 = op.eval(c.M + c.N, c.x);
        const double diff = f1 - f0;
        const double nn = c.N.frobenius_norm();
        c.margin = std::min(diff - op.lambda() * nn, op.Lambda() * nn - diff);
        report.record(std::move(c), scaled_tol(kTol, {f0, f1, op.Lambda() * nn}));
    }
    return report.finish();
}

CertificationReport certify_A2(const Operator& op, std::size_t n_samples, std::uint64_t seed) {
    const int d = op.dim();
    ReportBuilder report(Certified::A2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t s = 0; s < n_samples; ++s) {
        auto rng = sample_stream(seed, s);
        Counterexample c;
        c.sample = s;
        if (s == 0) {
            // midpoint of I and -I
            c.M = SymMatrix::identity(d);
            c.N = -SymMatrix::identity(d);
            c.t = 0.5;
        } else {
            c.M = random_symmetric(d, rng);
            c.N = random_symmetric(d, rng);
            c.t = unit(rng);
        }
        c.x = op.has_coefficient() ? random_point_in_ball(d, rng) : Point{};
        const double f1 = op.eval(c.M, c.x);
        const double f2 = op.eval(c.N, c.x);
        const double fm = op.eval(c.t * c.M + (1.0 - c.t) * c.N, c.x);
        c.margin = c.t * f1 + (1.0 - c.t) * f2 - fm;
        report.record(std::move(c), scaled_tol(kTol, {f1, f2, fm}));
    }
    return report.finish();
}

CertificationReport certify_A3(const Operator& op, std::size_t n_samples, std::uint64_t seed) {
    const int d = op.dim();
    ReportBuilder report(Certified::A3);
    for (std::size_t s = 0; s < n_samples; ++s) {
        auto rng = sample_stream(seed, s);
        Counterexample c;
        c.sample = s;
        c.M = s == 0 ? -SymMatrix::identity(d) : random_symmetric(d, rng);
        c.x = op.has_coefficient() ? random_point_in_ball(d, rng) : Point{};
        const double f = op.eval(c.M, c.x);
        const double nm = c.M.frobenius_norm();
        c.margin = std::min(f - op.lambda() * nm, op.Lambda() * nm - f);
        report.record(std::move(c), scaled_tol(kTol, {f, op.Lambda() * nm}));
    }
    return report.finish();
}

CertificationReport certify_derivative_bounds(const Operator& op, std::size_t n_samples, std::uint64_t seed) {
    const int d = op.dim();
    const double base_tol = op.has_analytic_derivative() ? kTol : kFallbackTol;
    ReportBuilder report(Certified::derivative_bounds);
    for (std::size_t s = 0; s < n_samples; ++s) {
        auto rng = sample_stream(seed, s);
        Counterexample c;
        c.sample = s;
        if (s == 0) {
            c.M = -SymMatrix::identity(d);
            c.xi = {1.0, 0.0, 0.0};
        } else {
            c.M = random_symmetric(d, rng);
            c.xi = random_direction(d, rng);
        }
        c.x = op.has_coefficient() ? random_point_in_ball(d, rng) : Point{};
        const SymMatrix D = op.derivative(c.M, c.x);
        const double q = D.quadratic_form(c.xi);
        double xi2 = 0.0;
        for (int i = 0; i < d; ++i) xi2 += c.xi[i] * c.xi[i];
        c.margin = std::min(q - op.lambda() * xi2, op.Lambda() * xi2 - q);
        report.record(std::move(c), base_tol * std::max(1.0, op.Lambda()) * std::max(xi2, 1e-300));
    }
    return report.finish();
}

}  // namespace twophase
