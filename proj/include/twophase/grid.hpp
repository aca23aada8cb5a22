#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "twophase/operator.hpp"
#include "twophase/sym_matrix.hpp"

namespace twophase {

enum class NodeKind : std::uint8_t { interior, band, exterior };

/// Uniform Cartesian grid on [-1,1]^d with a mask for the unit ball.
///
/// A node is interior iff |x| < 1 - h * band_width. The band consists of
/// every other node that lies in the 3^d stencil ring of an interior node
/// or whose cell meets the ball; everything else is exterior. Interior
/// nodes carry quadrature weight h^d, band nodes h^d times the fraction of
/// their cell inside the ball (4^d subsamples), exterior nodes 0.
///
/// Flat index k = i1 * n + i2 (2-D) with x_a = -1 + i_a h, so flat order is
/// lexicographic in the multi-index.
class Grid {
public:
    int dim() const { return dim_; }
    int n() const { return n_; }
    double h() const { return h_; }
    double band_width() const { return band_width_; }
    std::size_t size() const { return kind_.size(); }

    NodeKind kind(std::size_t k) const { return kind_[k]; }
    bool is_interior(std::size_t k) const { return kind_[k] == NodeKind::interior; }
    bool is_exterior(std::size_t k) const { return kind_[k] == NodeKind::exterior; }
    double weight(std::size_t k) const { return weight_[k]; }
    const std::vector<double>& weights() const { return weight_; }

    const std::vector<std::size_t>& interior_nodes() const { return interior_; }
    const std::vector<std::size_t>& non_exterior_nodes() const { return non_exterior_; }

    Point coord(std::size_t k) const;
    double radius(std::size_t k) const;
    std::array<int, 2> multi_index(std::size_t k) const;
    std::size_t flat(int i1, int i2 = 0) const;
    /// Flat-index offset of a unit step along `axis`.
    std::ptrdiff_t stride(int axis) const { return dim_ == 1 ? 1 : (axis == 0 ? n_ : 1); }

    /// Sum of all quadrature weights (approximates |B_1|).
    double measure() const;

    friend std::shared_ptr<const Grid> build_grid(int dim, int n, double band_width);

private:
    Grid() = default;

    int dim_ = 1;
    int n_ = 0;
    double h_ = 0.0;
    double band_width_ = 0.0;
    std::vector<NodeKind> kind_;
    std::vector<double> weight_;
    std::vector<std::size_t> interior_;
    std::vector<std::size_t> non_exterior_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// dim in {1,2}, n odd and >= 9, band_width > 0.
GridPtr build_grid(int dim, int n, double band_width = 0.5);

struct ScalarField {
    GridPtr grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(GridPtr g, double fill = 0.0);
    ScalarField(GridPtr g, std::vector<double> v);

    static ScalarField from_function(GridPtr g, const std::function<double(const Point&)>& f);

    double& operator[](std::size_t k) { return values[k]; }
    double operator[](std::size_t k) const { return values[k]; }
    std::size_t size() const { return values.size(); }
};

struct HessianField {
    GridPtr grid;
    std::vector<SymMatrix> values;  ///< meaningful at interior nodes only
};

/// Second-order central differences at an interior node: 3-point stencil on
/// the diagonal, 4-point cross stencil off it. Exact on quadratics.
SymMatrix hessian_at(const ScalarField& u, std::size_t k);
HessianField hessian(const ScalarField& u);

/// Central-difference gradient at an interior node.
std::array<double, 3> gradient_at(const ScalarField& u, std::size_t k);

/// Dirichlet data g extended to every node. `profile`, when present, lets
/// the data be re-sampled on another grid.
struct BoundaryData {
    ScalarField g;
    bool nonnegative = false;  ///< A4 flag
    std::function<double(const Point&)> profile;

    /// Validates A4 when `require_a4` is set: g >= 0 at every node and g not
    /// identically zero.
    static BoundaryData from_profile(GridPtr grid, std::function<double(const Point&)> profile,
                                     bool require_a4);
    static BoundaryData from_field(ScalarField g, bool require_a4);

    /// The same data on another grid (profile evaluation, else interpolation).
    BoundaryData on(GridPtr grid) const;

    double sup_norm() const;
};

/// Band and exterior nodes overwritten by g; interior untouched.
ScalarField apply_trace(const ScalarField& u, const BoundaryData& bd);

/// sum_k f(x_k) w(x_k) over non-exterior nodes.
double integrate(const ScalarField& f);

/// Multilinear interpolation of `f` at point x (clamped to [-1,1]^d) using
/// the non-exterior corners only, renormalized; the nearest non-exterior node
/// when every corner is exterior.
double interpolate_at(const ScalarField& f, const Point& x);
/// Interpolates onto the non-exterior nodes of `target`; exterior nodes get 0.
ScalarField interpolate(const ScalarField& f, GridPtr target);

/// CSV with header `x1[,x2],value`, one row per non-exterior node in flat order.
void write_field_csv(std::ostream& os, const ScalarField& f);
/// Reads the format above; rows must match the grid's non-exterior nodes.
/// Exterior nodes are set to 0.
ScalarField read_field_csv(std::istream& is, GridPtr grid);

}  // namespace twophase
