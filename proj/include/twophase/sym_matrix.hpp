#pragma once

#include <array>
#include <cstddef>
#include <string>

namespace twophase {

/// Dense real symmetric d x d matrix, d in {1,2,3}, stored as its upper
/// triangle. Element access is symmetric by construction.
class SymMatrix {
public:
    static constexpr int kMaxDim = 3;

    SymMatrix() = default;
    explicit SymMatrix(int dim);

    static SymMatrix zero(int dim) { return SymMatrix(dim); }
    static SymMatrix identity(int dim);
    static SymMatrix diagonal(int dim, const std::array<double, kMaxDim>& diag);

    int dim() const { return dim_; }

    double operator()(int i, int j) const { return packed_[index(i, j)]; }
    /// Writes both (i,j) and (j,i).
    void set(int i, int j, double v) { packed_[index(i, j)] = v; }

    double trace() const;
    double frobenius_norm() const;
    double frobenius_dot(const SymMatrix& other) const;
    /// xi^T M xi
    double quadratic_form(const std::array<double, kMaxDim>& xi) const;

    SymMatrix& operator+=(const SymMatrix& o);
    SymMatrix& operator-=(const SymMatrix& o);
    SymMatrix& operator*=(double s);

    friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
    friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
    friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
    friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
    friend SymMatrix operator-(SymMatrix a) { return a *= -1.0; }

    bool operator==(const SymMatrix&) const = default;

    std::string to_string() const;

private:
    static constexpr int index(int i, int j) {
        if (i > j) std::swap(i, j);
        // (0,0) (0,1) (0,2) (1,1) (1,2) (2,2)
        return i == 0 ? j : (i == 1 ? 2 + j : 5);
    }

    int dim_ = 1;
    std::array<double, 6> packed_{};
};

}  // namespace twophase
