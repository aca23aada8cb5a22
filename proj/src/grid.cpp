#include "twophase/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "twophase/error.hpp"

namespace twophase {
namespace {

constexpr int kSubsamples = 4;

double cell_fraction_inside(const Point& x, int dim, double h) {
    int inside = 0, total = 0;
    const double sub = h / kSubsamples;
    if (dim == 1) {
        for (int a = 0; a < kSubsamples; ++a) {
            const double y = x[0] - 0.5 * h + (a + 0.5) * sub;
            inside += std::abs(y) < 1.0;
            ++total;
        }
    } else {
        for (int a = 0; a < kSubsamples; ++a) {
            for (int b = 0; b < kSubsamples; ++b) {
                const double y1 = x[0] - 0.5 * h + (a + 0.5) * sub;
                const double y2 = x[1] - 0.5 * h + (b + 0.5) * sub;
                inside += y1 * y1 + y2 * y2 < 1.0;
                ++total;
            }
        }
    }
    return static_cast<double>(inside) / total;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

Point Grid::coord(std::size_t k) const {
    const auto idx = multi_index(k);
    Point x{};
    x[0] = -1.0 + idx[0] * h_;
    if (dim_ == 2) x[1] = -1.0 + idx[1] * h_;
    return x;
}

double Grid::radius(std::size_t k) const {
    const Point x = coord(k);
    return std::sqrt(x[0] * x[0] + x[1] * x[1]);
}

std::array<int, 2> Grid::multi_index(std::size_t k) const {
    if (dim_ == 1) return {static_cast<int>(k), 0};
    return {static_cast<int>(k / n_), static_cast<int>(k % n_)};
}

std::size_t Grid::flat(int i1, int i2) const {
    return dim_ == 1 ? static_cast<std::size_t>(i1) : static_cast<std::size_t>(i1) * n_ + i2;
}

double Grid::measure() const {
    double s = 0.0;
    for (std::size_t k : non_exterior_) s += weight_[k];
    return s;
}

GridPtr build_grid(int dim, int n, double band_width) {
    if (dim != 1 && dim != 2)
        throw InputError("build_grid: dim must be 1 or 2 (got " + std::to_string(dim) + ")");
    if (n < 9 || n % 2 == 0)
        throw InputError("build_grid: n must be odd and at least 9 (got " + std::to_string(n) + ")");
    if (!(band_width > 0.0)) throw InputError("build_grid: band_width must be positive");

    auto grid = std::shared_ptr<Grid>(new Grid());
    Grid& g = *grid;
    g.dim_ = dim;
    g.n_ = n;
    g.h_ = 2.0 / (n - 1);
    g.band_width_ = band_width;
    const std::size_t total = dim == 1 ? n : static_cast<std::size_t>(n) * n;
    const double interior_radius = 1.0 - g.h_ * band_width;
    if (!(interior_radius > 0.0)) throw InputError("build_grid: band_width leaves no interior");

    g.kind_.assign(total, NodeKind::exterior);
    g.weight_.assign(total, 0.0);
    for (std::size_t k = 0; k < total; ++k)
        if (g.radius(k) < interior_radius) g.kind_[k] = NodeKind::interior;

    const double cell = std::pow(g.h_, dim);
    for (std::size_t k = 0; k < total; ++k) {
        if (g.kind_[k] == NodeKind::interior) {
            g.weight_[k] = cell;
            continue;
        }
        const auto idx = g.multi_index(k);
        bool in_ring = false;
        for (int a = -1; a <= 1 && !in_ring; ++a) {
            for (int b = (dim == 2 ? -1 : 0); b <= (dim == 2 ? 1 : 0) && !in_ring; ++b) {
                const int i1 = idx[0] + a, i2 = idx[1] + b;
                if (i1 < 0 || i1 >= n || (dim == 2 && (i2 < 0 || i2 >= n))) continue;
                in_ring = g.kind_[g.flat(i1, i2)] == NodeKind::interior;
            }
        }
        const double frac = cell_fraction_inside(g.coord(k), dim, g.h_);
        if (in_ring || frac > 0.0) {
            g.kind_[k] = NodeKind::band;
            g.weight_[k] = cell * frac;
        }
    }
    for (std::size_t k = 0; k < total; ++k) {
        if (g.kind_[k] == NodeKind::interior) g.interior_.push_back(k);
        if (g.kind_[k] != NodeKind::exterior) g.non_exterior_.push_back(k);
    }
    if (g.interior_.empty()) throw InputError("build_grid: no interior nodes");
    return grid;
}

ScalarField::ScalarField(GridPtr g, double fill) : grid(std::move(g)) { values.assign(grid->size(), fill); }

ScalarField::ScalarField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid->size()) throw InputError("ScalarField: value count does not match grid");
}

ScalarField ScalarField::from_function(GridPtr g, const std::function<double(const Point&)>& f) {
    ScalarField out(g);
    for (std::size_t k = 0; k < g->size(); ++k) out.values[k] = f(g->coord(k));
    return out;
}

SymMatrix hessian_at(const ScalarField& u, std::size_t k) {
    const Grid& g = *u.grid;
    if (!g.is_interior(k)) throw InternalError("hessian_at: node " + std::to_string(k) + " is not interior");
    const double inv_h2 = 1.0 / (g.h() * g.h());
    const auto& v = u.values;
    const int d = g.dim();
    SymMatrix H(d);
    for (int a = 0; a < d; ++a) {
        const std::ptrdiff_t s = g.stride(a);
        H.set(a, a, (v[k + s] - 2.0 * v[k] + v[k - s]) * inv_h2);
    }
    if (d == 2) {
        const std::ptrdiff_t s0 = g.stride(0), s1 = g.stride(1);
        H.set(0, 1, (v[k + s0 + s1] - v[k + s0 - s1] - v[k - s0 + s1] + v[k - s0 - s1]) * 0.25 * inv_h2);
    }
    return H;
}

HessianField hessian(const ScalarField& u) {
    HessianField out{u.grid, std::vector<SymMatrix>(u.grid->size(), SymMatrix(u.grid->dim()))};
    for (std::size_t k : u.grid->interior_nodes()) out.values[k] = hessian_at(u, k);
    return out;
}

std::array<double, 3> gradient_at(const ScalarField& u, std::size_t k) {
    const Grid& g = *u.grid;
    if (!g.is_interior(k)) throw InternalError("gradient_at: node " + std::to_string(k) + " is not interior");
    std::array<double, 3> du{};
    for (int a = 0; a < g.dim(); ++a) {
        const std::ptrdiff_t s = g.stride(a);
        du[a] = (u.values[k + s] - u.values[k - s]) / (2.0 * g.h());
    }
    return du;
}

namespace {

void validate_a4(const ScalarField& g) {
    bool nontrivial = false;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!(g[k] >= 0.0)) {
            const Point x = g.grid->coord(k);
            throw InputError("boundary data violates A4 (nonnegative): g = " + fmt(g[k]) + " at x = (" +
                             fmt(x[0]) + ", " + fmt(x[1]) + ")");
        }
        nontrivial = nontrivial || g[k] > 0.0;
    }
    if (!nontrivial) throw InputError("boundary data violates A4 (nontrivial): g is identically zero");
}

}  // namespace

BoundaryData BoundaryData::from_profile(GridPtr grid, std::function<double(const Point&)> profile,
                                        bool require_a4) {
    BoundaryData bd;
    bd.g = ScalarField::from_function(std::move(grid), profile);
    bd.nonnegative = require_a4;
    bd.profile = std::move(profile);
    if (require_a4) validate_a4(bd.g);
    return bd;
}

BoundaryData BoundaryData::from_field(ScalarField g, bool require_a4) {
    BoundaryData bd;
    bd.g = std::move(g);
    bd.nonnegative = require_a4;
    if (require_a4) validate_a4(bd.g);
    return bd;
}

BoundaryData BoundaryData::on(GridPtr grid) const {
    if (profile) return from_profile(std::move(grid), profile, nonnegative);
    return from_field(interpolate(g, std::move(grid)), nonnegative);
}

double BoundaryData::sup_norm() const {
    double m = 0.0;
    for (std::size_t k : g.grid->non_exterior_nodes()) m = std::max(m, std::abs(g[k]));
    return m;
}

ScalarField apply_trace(const ScalarField& u, const BoundaryData& bd) {
    if (u.grid != bd.g.grid && (u.grid->n() != bd.g.grid->n() || u.grid->dim() != bd.g.grid->dim()))
        throw InputError("apply_trace: field and boundary data live on different grids");
    ScalarField out = u;
    const Grid& g = *u.grid;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (!g.is_interior(k)) out.values[k] = bd.g.values[k];
    return out;
}

double integrate(const ScalarField& f) {
    const Grid& g = *f.grid;
    double s = 0.0;
    for (std::size_t k : g.non_exterior_nodes()) s += f.values[k] * g.weight(k);
    return s;
}

double interpolate_at(const ScalarField& f, const Point& x) {
    const Grid& g = *f.grid;
    const int n = g.n();
    auto locate = [&](double xa, int& i, double& t) {
        const double s = std::clamp((xa + 1.0) / g.h(), 0.0, static_cast<double>(n - 1));
        i = std::min(static_cast<int>(std::floor(s)), n - 2);
        t = s - i;
    };
    int i1, i2 = 0;
    double t1, t2 = 0.0;
    locate(x[0], i1, t1);
    if (g.dim() == 2) locate(x[1], i2, t2);

    // exterior nodes carry no data, so only non-exterior corners take part
    double sum = 0.0, wsum = 0.0;
    const int corners = g.dim() == 1 ? 2 : 4;
    for (int c = 0; c < corners; ++c) {
        const int a = c & 1, b = c >> 1;
        const std::size_t k = g.dim() == 1 ? g.flat(i1 + a) : g.flat(i1 + a, i2 + b);
        const double w = (a ? t1 : 1.0 - t1) * (g.dim() == 1 ? 1.0 : (b ? t2 : 1.0 - t2));
        if (g.is_exterior(k) || w == 0.0) continue;
        sum += w * f.values[k];
        wsum += w;
    }
    if (wsum > 0.0) return sum / wsum;

    double best = std::numeric_limits<double>::infinity(), value = 0.0;
    for (std::size_t k : g.non_exterior_nodes()) {
        const Point y = g.coord(k);
        const double d = (y[0] - x[0]) * (y[0] - x[0]) + (y[1] - x[1]) * (y[1] - x[1]);
        if (d < best) {
            best = d;
            value = f.values[k];
        }
    }
    return value;
}

ScalarField interpolate(const ScalarField& f, GridPtr target) {
    if (target->dim() != f.grid->dim()) throw InputError("interpolate: dimension mismatch");
    ScalarField out(target);
    for (std::size_t k : target->non_exterior_nodes()) out.values[k] = interpolate_at(f, target->coord(k));
    return out;
}

void write_field_csv(std::ostream& os, const ScalarField& f) {
    const Grid& g = *f.grid;
    os << (g.dim() == 1 ? "x1,value\n" : "x1,x2,value\n");
    os.precision(17);
    for (std::size_t k : g.non_exterior_nodes()) {
        const Point x = g.coord(k);
        os << x[0] << ',';
        if (g.dim() == 2) os << x[1] << ',';
        os << f.values[k] << '\n';
    }
}

ScalarField read_field_csv(std::istream& is, GridPtr grid) {
    const Grid& g = *grid;
    std::string line;
    if (!std::getline(is, line)) throw InputError("field CSV: empty input");
    const std::string expected = g.dim() == 1 ? "x1,value" : "x1,x2,value";
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected) throw InputError("field CSV: expected header '" + expected + "', got '" + line + "'");

    ScalarField out(grid);
    const auto& nodes = g.non_exterior_nodes();
    std::size_t row = 0;
    const double tol = 1e-9;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        if (row >= nodes.size()) throw InputError("field CSV: more rows than non-exterior grid nodes");
        std::istringstream ls(line);
        std::array<double, 3> vals{};
        const int cols = g.dim() + 1;
        for (int c = 0; c < cols; ++c) {
            std::string cell;
            if (!std::getline(ls, cell, ',')) throw InputError("field CSV: short row " + std::to_string(row + 2));
            try {
                vals[c] = std::stod(cell);
            } catch (const std::exception&) {
                throw InputError("field CSV: non-numeric cell '" + cell + "' on row " + std::to_string(row + 2));
            }
        }
        const Point x = g.coord(nodes[row]);
        for (int a = 0; a < g.dim(); ++a)
            if (std::abs(vals[a] - x[a]) > tol)
                throw InputError("field CSV: row " + std::to_string(row + 2) + " coordinates do not match the grid");
        out.values[nodes[row]] = vals[g.dim()];
        ++row;
    }
    if (row != nodes.size()) throw InputError("field CSV: fewer rows than non-exterior grid nodes");
    return out;
}

}  // namespace twophase
