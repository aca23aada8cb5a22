#include "twophase/sym_matrix.hpp"

#include <cmath>
#include <sstream>

#include "twophase/error.hpp"

namespace twophase {

SymMatrix::SymMatrix(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) {
        throw InputError("SymMatrix: dimension must be 1, 2 or 3 (got " + std::to_string(dim) + ")");
    }
}

SymMatrix SymMatrix::identity(int dim) {
    SymMatrix m(dim);
    for (int i = 0; i < dim; ++i) m.set(i, i, 1.0);
    return m;
}

SymMatrix SymMatrix::diagonal(int dim, const std::array<double, kMaxDim>& diag) {
    SymMatrix m(dim);
    for (int i = 0; i < dim; ++i) m.set(i, i, diag[i]);
    return m;
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
}

double SymMatrix::frobenius_dot(const SymMatrix& o) const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) {
        s += (*this)(i, i) * o(i, i);
        for (int j = i + 1; j < dim_; ++j) s += 2.0 * (*this)(i, j) * o(i, j);
    }
    return s;
}

double SymMatrix::frobenius_norm() const { return std::sqrt(frobenius_dot(*this)); }

double SymMatrix::quadratic_form(const std::array<double, kMaxDim>& xi) const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) s += (*this)(i, j) * xi[i] * xi[j];
    return s;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
    if (o.dim_ != dim_) throw InputError("SymMatrix: dimension mismatch in addition");
    for (std::size_t k = 0; k < packed_.size(); ++k) packed_[k] += o.packed_[k];
    return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
    if (o.dim_ != dim_) throw InputError("SymMatrix: dimension mismatch in subtraction");
    for (std::size_t k = 0; k < packed_.size(); ++k) packed_[k] -= o.packed_[k];
    return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
    for (double& v : packed_) v *= s;
    return *this;
}

std::string SymMatrix::to_string() const {
    std::ostringstream os;
    os.precision(17);
    os << '[';
    for (int i = 0; i < dim_; ++i) {
        if (i) os << "; ";
        for (int j = 0; j < dim_; ++j) {
            if (j) os << ", ";
            os << (*this)(i, j);
        }
    }
    os << ']';
    return os.str();
}

}  // namespace twophase
