#pragma once

// Dense vectors and matrices for small ambient dimensions, affine maps and
// finite iterated function systems.

#include "ifs_transit/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ifs_transit {

class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t dim, double fill = 0.0) : coords_(dim, fill) {}
    Vector(std::initializer_list<double> coords) : coords_(coords) {}
    explicit Vector(std::vector<double> coords) : coords_(std::move(coords)) {}
    explicit Vector(std::span<const double> coords) : coords_(coords.begin(), coords.end()) {}

    std::size_t dim() const noexcept { return coords_.size(); }
    double& operator[](std::size_t i) { return coords_[i]; }
    double operator[](std::size_t i) const { return coords_[i]; }
    const double* data() const noexcept { return coords_.data(); }
    double* data() noexcept { return coords_.data(); }
    std::span<const double> span() const noexcept { return coords_; }
    const std::vector<double>& coords() const noexcept { return coords_; }

    bool all_finite() const {
        return std::all_of(coords_.begin(), coords_.end(), [](double v) { return std::isfinite(v); });
    }

    double norm() const {
        double s = 0.0;
        for (double v : coords_) s += v * v;
        return std::sqrt(s);
    }

    Vector& operator+=(const Vector& o) {
        require_same_dim(dim(), o.dim(), "vector +");
        for (std::size_t i = 0; i < dim(); ++i) coords_[i] += o.coords_[i];
        return *this;
    }
    Vector& operator-=(const Vector& o) {
        require_same_dim(dim(), o.dim(), "vector -");
        for (std::size_t i = 0; i < dim(); ++i) coords_[i] -= o.coords_[i];
        return *this;
    }
    Vector& operator*=(double s) {
        for (double& v : coords_) v *= s;
        return *this;
    }

    friend Vector operator+(Vector a, const Vector& b) { return a += b; }
    friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
    friend Vector operator*(double s, Vector a) { return a *= s; }
    friend Vector operator*(Vector a, double s) { return a *= s; }
    friend Vector operator-(Vector a) { return a *= -1.0; }
    friend bool operator==(const Vector&, const Vector&) = default;

private:
    std::vector<double> coords_;
};

inline double distance(const Vector& a, const Vector& b) {
    require_same_dim(a.dim(), b.dim(), "distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

/// Square matrix, row-major.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t dim, double fill = 0.0) : dim_(dim), entries_(dim * dim, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        dim_ = rows.size();
        entries_.reserve(dim_ * dim_);
        for (const auto& row : rows) {
            if (row.size() != dim_) fail(ErrorKind::dimension_mismatch, "matrix literal is not square");
            entries_.insert(entries_.end(), row.begin(), row.end());
        }
    }
    Matrix(std::size_t dim, std::vector<double> row_major) : dim_(dim), entries_(std::move(row_major)) {
        if (entries_.size() != dim_ * dim_) {
            fail(ErrorKind::dimension_mismatch, "matrix needs " + std::to_string(dim_ * dim_) + " entries");
        }
    }

    static Matrix identity(std::size_t dim) {
        Matrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }
    static Matrix diagonal(const Vector& diag) {
        Matrix m(diag.dim());
        for (std::size_t i = 0; i < diag.dim(); ++i) m(i, i) = diag[i];
        return m;
    }

    std::size_t dim() const noexcept { return dim_; }
    double& operator()(std::size_t r, std::size_t c) { return entries_[r * dim_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return entries_[r * dim_ + c]; }
    const double* data() const noexcept { return entries_.data(); }
    const std::vector<double>& entries() const noexcept { return entries_; }

    bool all_finite() const {
        return std::all_of(entries_.begin(), entries_.end(), [](double v) { return std::isfinite(v); });
    }

    Matrix transposed() const {
        Matrix t(dim_);
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t c = 0; c < dim_; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : entries_) m = std::max(m, std::abs(v));
        return m;
    }

    Matrix& operator*=(double s) {
        for (double& v : entries_) v *= s;
        return *this;
    }
    Matrix& operator+=(const Matrix& o) {
        require_same_dim(dim_, o.dim_, "matrix +");
        for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        require_same_dim(dim_, o.dim_, "matrix -");
        for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= o.entries_[i];
        return *this;
    }

    friend Matrix operator*(double s, Matrix m) { return m *= s; }
    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        require_same_dim(a.dim_, b.dim_, "matrix product");
        Matrix p(a.dim_);
        for (std::size_t r = 0; r < a.dim_; ++r)
            for (std::size_t k = 0; k < a.dim_; ++k) {
                const double ark = a(r, k);
                for (std::size_t c = 0; c < a.dim_; ++c) p(r, c) += ark * b(k, c);
            }
        return p;
    }

    friend Vector operator*(const Matrix& m, const Vector& x) {
        require_same_dim(m.dim_, x.dim(), "matrix-vector product");
        Vector y(m.dim_);
        for (std::size_t r = 0; r < m.dim_; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < m.dim_; ++c) s += m(r, c) * x[c];
            y[r] = s;
        }
        return y;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> entries_;
};

inline Matrix matrix_power(const Matrix& m, unsigned p) {
    Matrix result = Matrix::identity(m.dim());
    for (unsigned i = 0; i < p; ++i) result = result * m;
    return result;
}

namespace detail {

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd e(m.dim(), m.dim());
    for (std::size_t r = 0; r < m.dim(); ++r)
        for (std::size_t c = 0; c < m.dim(); ++c) e(r, c) = m(r, c);
    return e;
}

} // namespace detail

/// Largest singular value.
inline double spectral_norm(const Matrix& m) {
    if (m.dim() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(detail::to_eigen(m));
    return svd.singularValues()(0);
}

/// Modulus of the dominant eigenvalue.
inline double spectral_radius(const Matrix& m) {
    if (m.dim() == 0) return 0.0;
    if (m.dim() == 1) return std::abs(m(0, 0));
    Eigen::EigenSolver<Eigen::MatrixXd> es(detail::to_eigen(m), false);
    double rho = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) rho = std::max(rho, std::abs(es.eigenvalues()(i)));
    return rho;
}

inline bool is_orthogonal(const Matrix& m, double tol = 1e-9) {
    const Matrix gram = m.transposed() * m;
    return (gram - Matrix::identity(m.dim())).max_abs() <= tol;
}

/// Solves a x = b; throws singular_system when a is numerically singular.
inline Vector solve_linear(const Matrix& a, const Vector& b, const std::string& context = "linear system") {
    require_same_dim(a.dim(), b.dim(), "solve");
    const Eigen::MatrixXd ea = detail::to_eigen(a);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ea, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double scale = std::max(1.0, s(0));
    if (s(s.size() - 1) <= 1e-12 * scale) fail(ErrorKind::singular_system, context + " is singular");
    Eigen::VectorXd eb(b.dim());
    for (std::size_t i = 0; i < b.dim(); ++i) eb(i) = b[i];
    const Eigen::VectorXd x = svd.solve(eb);
    Vector out(b.dim());
    for (std::size_t i = 0; i < b.dim(); ++i) out[i] = x(i);
    return out;
}

/// x -> linear * x + offset.
class AffineMap {
public:
    AffineMap() = default;
    AffineMap(Matrix linear, Vector offset) : linear_(std::move(linear)), offset_(std::move(offset)) {
        require_same_dim(linear_.dim(), offset_.dim(), "affine map");
        if (!linear_.all_finite() || !offset_.all_finite()) {
            fail(ErrorKind::invalid_argument, "affine map has non-finite entries");
        }
    }

    static AffineMap identity(std::size_t dim) { return {Matrix::identity(dim), Vector(dim)}; }
    static AffineMap translation(Vector v) {
        const std::size_t d = v.dim();
        return {Matrix::identity(d), std::move(v)};
    }
    static AffineMap constant(Vector v) {
        const std::size_t d = v.dim();
        return {Matrix(d), std::move(v)};
    }

    std::size_t dim() const noexcept { return offset_.dim(); }
    const Matrix& linear() const noexcept { return linear_; }
    const Vector& offset() const noexcept { return offset_; }

    /// Raw evaluation for hot loops; `in` and `out` must not alias.
    void apply(const double* in, double* out) const noexcept {
        const std::size_t d = dim();
        const double* m = linear_.data();
        for (std::size_t r = 0; r < d; ++r) {
            double s = offset_[r];
            for (std::size_t c = 0; c < d; ++c) s += m[r * d + c] * in[c];
            out[r] = s;
        }
    }

    friend bool operator==(const AffineMap&, const AffineMap&) = default;

private:
    Matrix linear_;
    Vector offset_;
};

inline Vector apply_affine(const AffineMap& map, const Vector& x) {
    require_same_dim(map.dim(), x.dim(), "apply_affine");
    Vector y(x.dim());
    map.apply(x.data(), y.data());
    return y;
}

/// x -> outer(inner(x)).
inline AffineMap compose(const AffineMap& outer, const AffineMap& inner) {
    require_same_dim(outer.dim(), inner.dim(), "compose");
    return {outer.linear() * inner.linear(), outer.linear() * inner.offset() + outer.offset()};
}

/// Euclidean Lipschitz constant: the largest singular value of the linear part.
inline double lipschitz(const AffineMap& map) { return spectral_norm(map.linear()); }

/// Unique fixed point of a map whose linear part does not have eigenvalue 1.
inline Vector fixed_point(const AffineMap& map) {
    return solve_linear(Matrix::identity(map.dim()) - map.linear(), map.offset(), "I - L");
}

class IfsSystem {
public:
    IfsSystem() = default;
    IfsSystem(std::size_t dim, std::vector<AffineMap> maps) : dim_(dim), maps_(std::move(maps)) {
        if (dim_ == 0) fail(ErrorKind::invalid_argument, "IFS dimension must be positive");
        if (maps_.empty()) fail(ErrorKind::invalid_argument, "IFS needs at least one map");
        for (std::size_t i = 0; i < maps_.size(); ++i) {
            if (maps_[i].dim() != dim_) {
                fail(ErrorKind::dimension_mismatch, "map " + std::to_string(i) + " has dimension " +
                                                        std::to_string(maps_[i].dim()) + ", expected " +
                                                        std::to_string(dim_));
            }
        }
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return maps_.size(); }
    const std::vector<AffineMap>& maps() const noexcept { return maps_; }
    const AffineMap& operator[](std::size_t i) const { return maps_[i]; }

    /// Largest Euclidean Lipschitz constant over the maps.
    double max_lipschitz() const {
        double l = 0.0;
        for (const auto& m : maps_) l = std::max(l, lipschitz(m));
        return l;
    }

    friend bool operator==(const IfsSystem&, const IfsSystem&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<AffineMap> maps_;
};

/// All N^2 compositions f_i o f_j, ordered (1o1), (1o2), ..., (NoN).
inline IfsSystem second_iterate(const IfsSystem& ifs) {
    std::vector<AffineMap> maps;
    maps.reserve(ifs.size() * ifs.size());
    for (const auto& outer : ifs.maps())
        for (const auto& inner : ifs.maps()) maps.push_back(compose(outer, inner));
    return {ifs.dim(), std::move(maps)};
}

} // namespace ifs_transit
