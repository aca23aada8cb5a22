#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include "twophase/sym_matrix.hpp"

namespace twophase {

/// Position in R^d, zero-padded to three components.
using Point = std::array<double, 3>;

enum class Assumption { A1_elliptic, A2_convex, A3_growth };

std::string to_string(Assumption a);

/// A fully nonlinear operator F(x, M) = A(x) * F0(M) with declared
/// ellipticity constants. Instances are immutable and cheap to copy.
class Operator {
public:
    using ValueFn = std::function<double(const SymMatrix&)>;
    using DerivativeFn = std::function<SymMatrix(const SymMatrix&)>;
    using CoefficientFn = std::function<double(const Point&)>;
    /// True at points where F0 is not differentiable.
    using SingularFn = std::function<bool(const SymMatrix&)>;

    struct Spec {
        std::string name;
        int dim = 2;
        double lambda = 1.0;
        double Lambda = 1.0;
        std::set<Assumption> claims;
        ValueFn value;
        std::optional<DerivativeFn> derivative;
        std::optional<CoefficientFn> coefficient;
        std::optional<SingularFn> singular;
    };

    explicit Operator(Spec spec);

    const std::string& name() const { return impl_->name; }
    int dim() const { return impl_->dim; }
    double lambda() const { return impl_->lambda; }
    double Lambda() const { return impl_->Lambda; }
    const std::set<Assumption>& claims() const { return impl_->claims; }
    bool claims(Assumption a) const { return impl_->claims.count(a) > 0; }
    bool has_analytic_derivative() const { return impl_->derivative.has_value(); }
    bool has_coefficient() const { return impl_->coefficient.has_value(); }

    /// A(x); 1 when the operator carries no coefficient field.
    double coefficient(const Point& x) const;

    double eval(const SymMatrix& M) const { return eval(M, Point{}); }
    double eval(const SymMatrix& M, const Point& x) const;

    /// Matrix of partials dF/dm_ij, entries m_ij and m_ji treated as
    /// independent so that dF = sum_ij F_ij dM_ij. Throws SingularityError at
    /// declared singular points.
    SymMatrix derivative(const SymMatrix& M) const { return derivative(M, Point{}); }
    SymMatrix derivative(const SymMatrix& M, const Point& x) const;

    /// Central-difference derivative with step 1e-5 * (1 + |M|_F); used
    /// whenever no analytic derivative was supplied.
    SymMatrix fallback_derivative(const SymMatrix& M, const Point& x = {}) const;

    static double fallback_step(const SymMatrix& M) { return 1e-5 * (1.0 + M.frobenius_norm()); }

private:
    void check_dim(const SymMatrix& M) const;

    std::shared_ptr<const Spec> impl_;
};

/// Tr(M): (lambda, Lambda) = (1, sqrt(d)) under the Frobenius norm.
Operator make_trace(int dim);
/// |M|_F with the given constants (default 1, 1).
Operator make_frobenius(int dim, double lambda = 1.0, double Lambda = 1.0);
/// A(x) |M|_F with 0 < a_min <= A <= a_max.
Operator make_weighted(int dim, Operator::CoefficientFn a, double a_min, double a_max,
                       std::string name = "weighted");
/// A(x) == a constant.
Operator make_weighted_constant(int dim, double a);
/// max(Tr M, 0); fails the A3 lower bound, shipped for negative tests.
Operator make_positive_trace(int dim);

}  // namespace twophase
