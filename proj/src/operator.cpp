#include "twophase/operator.hpp"

#include <cmath>
#include <utility>

#include "twophase/error.hpp"

namespace twophase {

std::string to_string(Assumption a) {
    switch (a) {
        case Assumption::A1_elliptic: return "A1";
        case Assumption::A2_convex: return "A2";
        case Assumption::A3_growth: return "A3";
    }
    return "?";
}

Operator::Operator(Spec spec) {
    if (spec.dim < 1 || spec.dim > SymMatrix::kMaxDim)
        throw InputError("operator '" + spec.name + "': dimension must be 1, 2 or 3");
    if (!(spec.lambda > 0.0) || !(spec.Lambda >= spec.lambda))
        throw InputError("operator '" + spec.name + "': need 0 < lambda <= Lambda");
    if (!spec.value) throw InputError("operator '" + spec.name + "': missing value function");
    if (spec.claims.count(Assumption::A1_elliptic) && spec.value(SymMatrix(spec.dim)) != 0.0)
        throw InputError("operator '" + spec.name + "': claims A1 but F(0) != 0");
    impl_ = std::make_shared<const Spec>(std::move(spec));
}

void Operator::check_dim(const SymMatrix& M) const {
    if (M.dim() != impl_->dim) {
        throw InputError("operator '" + impl_->name + "' has dimension " + std::to_string(impl_->dim) +
                         " but was given a " + std::to_string(M.dim()) + "x" + std::to_string(M.dim()) +
                         " matrix");
    }
}

double Operator::coefficient(const Point& x) const {
    return impl_->coefficient ? (*impl_->coefficient)(x) : 1.0;
}

double Operator::eval(const SymMatrix& M, const Point& x) const {
    check_dim(M);
    const double base = impl_->value(M);
    return impl_->coefficient ? (*impl_->coefficient)(x) * base : base;
}

SymMatrix Operator::derivative(const SymMatrix& M, const Point& x) const {
    check_dim(M);
    if (impl_->singular && (*impl_->singular)(M)) {
        throw SingularityError("operator '" + impl_->name + "' is not differentiable at M = " + M.to_string());
    }
    if (!impl_->derivative) return fallback_derivative(M, x);
    SymMatrix d = (*impl_->derivative)(M);
    if (impl_->coefficient) d *= (*impl_->coefficient)(x);
    return d;
}

SymMatrix Operator::fallback_derivative(const SymMatrix& M, const Point& x) const {
    check_dim(M);
    const int d = impl_->dim;
    const double step = fallback_step(M);
    SymMatrix out(d);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            SymMatrix plus = M, minus = M;
            plus.set(i, j, M(i, j) + step);
            minus.set(i, j, M(i, j) - step);
            double slope = (impl_->value(plus) - impl_->value(minus)) / (2.0 * step);
            // moving m_ij moves m_ji too; split the slope between the two entries
            if (i != j) slope *= 0.5;
            out.set(i, j, slope);
        }
    }
    if (impl_->coefficient) out *= (*impl_->coefficient)(x);
    return out;
}

Operator make_trace(int dim) {
    Operator::Spec s;
    s.name = "trace";
    s.dim = dim;
    s.lambda = 1.0;
    s.Lambda = std::sqrt(static_cast<double>(dim));
    s.claims = {Assumption::A1_elliptic, Assumption::A2_convex};
    s.value = [](const SymMatrix& M) { return M.trace(); };
    s.derivative = [dim](const SymMatrix&) { return SymMatrix::identity(dim); };
    return Operator(std::move(s));
}

namespace {

Operator::Spec frobenius_spec(int dim, double lambda, double Lambda) {
    Operator::Spec s;
    s.name = "frobenius";
    s.dim = dim;
    s.lambda = lambda;
    s.Lambda = Lambda;
    s.claims = {Assumption::A2_convex, Assumption::A3_growth};
    s.value = [](const SymMatrix& M) { return M.frobenius_norm(); };
    s.derivative = [](const SymMatrix& M) { return (1.0 / M.frobenius_norm()) * M; };
    s.singular = [](const SymMatrix& M) { return M.frobenius_norm() == 0.0; };
    return s;
}

}  // namespace

Operator make_frobenius(int dim, double lambda, double Lambda) {
    return Operator(frobenius_spec(dim, lambda, Lambda));
}

Operator make_weighted(int dim, Operator::CoefficientFn a, double a_min, double a_max, std::string name) {
    if (!(a_min > 0.0)) throw InputError("weighted operator: A_min must be positive");
    Operator::Spec s = frobenius_spec(dim, a_min, a_max);
    s.name = std::move(name);
    s.coefficient = std::move(a);
    return Operator(std::move(s));
}

Operator make_weighted_constant(int dim, double a) {
    return make_weighted(dim, [a](const Point&) { return a; }, a, a);
}

Operator make_positive_trace(int dim) {
    Operator::Spec s;
    s.name = "positive_trace";
    s.dim = dim;
    s.lambda = 1.0;
    s.Lambda = std::sqrt(static_cast<double>(dim));
    s.claims = {Assumption::A2_convex};
    s.value = [](const SymMatrix& M) { return std::max(M.trace(), 0.0); };
    s.derivative = [dim](const SymMatrix& M) {
        return M.trace() > 0.0 ? SymMatrix::identity(dim) : SymMatrix::zero(dim);
    };
    s.singular = [](const SymMatrix& M) { return M.trace() == 0.0; };
    return Operator(std::move(s));
}

}  // namespace twophase
