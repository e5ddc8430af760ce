#pragma once

// One-parameter families of affine maps.
//
// The base form is f_t(x) = t (L x + u) + w. Some families also carry terms
// whose coefficient is 1/t or 1/(1 - t); those are representable and can be
// instantiated, but every operation that relies on linearity in t rejects them.

#include "ifs_transit/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ifs_transit {

enum class Basis { inverse, pole };

inline const char* to_string(Basis b) { return b == Basis::inverse ? "inverse" : "pole"; }

/// c(t) (L x + u) with c(t) = 1/t or 1/(1 - t).
struct ParamTerm {
    Basis basis = Basis::inverse;
    Matrix linear;
    Vector offset;

    double coefficient(double t) const {
        if (basis == Basis::inverse) {
            if (t == 0.0) fail(ErrorKind::invalid_argument, "term 1/t is undefined at t = 0");
            return 1.0 / t;
        }
        if (t == 1.0) fail(ErrorKind::invalid_argument, "term 1/(1-t) is undefined at t = 1");
        return 1.0 / (1.0 - t);
    }

    friend bool operator==(const ParamTerm&, const ParamTerm&) = default;
};

class ParamAffineMap {
public:
    ParamAffineMap() = default;
    ParamAffineMap(Matrix linear, Vector u, Vector w, std::vector<ParamTerm> terms = {})
        : linear_(std::move(linear)), u_(std::move(u)), w_(std::move(w)), terms_(std::move(terms)) {
        require_same_dim(linear_.dim(), u_.dim(), "parametric map u");
        require_same_dim(linear_.dim(), w_.dim(), "parametric map w");
        if (!linear_.all_finite() || !u_.all_finite() || !w_.all_finite()) {
            fail(ErrorKind::invalid_argument, "parametric map has non-finite entries");
        }
        for (const auto& term : terms_) {
            require_same_dim(linear_.dim(), term.linear.dim(), "parametric term L");
            require_same_dim(linear_.dim(), term.offset.dim(), "parametric term u");
        }
    }

    /// t L (x - q) + q, which fixes q for every t.
    static ParamAffineMap anchored(Matrix linear, Vector q) {
        Vector u = -(linear * q);
        return {std::move(linear), std::move(u), std::move(q)};
    }

    std::size_t dim() const noexcept { return w_.dim(); }
    const Matrix& linear() const noexcept { return linear_; }
    const Vector& u() const noexcept { return u_; }
    const Vector& w() const noexcept { return w_; }
    const std::vector<ParamTerm>& terms() const noexcept { return terms_; }
    bool affine_in_t() const noexcept { return terms_.empty(); }
    bool has_pole() const {
        for (const auto& term : terms_) {
            if (term.basis == Basis::pole) return true;
        }
        return false;
    }

    AffineMap at(double t) const {
        Matrix lin = t * linear_;
        Vector off = t * u_ + w_;
        for (const auto& term : terms_) {
            const double c = term.coefficient(t);
            lin += c * term.linear;
            off += c * term.offset;
        }
        return {std::move(lin), std::move(off)};
    }

    /// True for t-affine maps of the form t L (x - w) + w with orthogonal L.
    bool is_anchored_isometry(double tol = 1e-9) const {
        if (!affine_in_t() || !is_orthogonal(linear_, tol)) return false;
        const Vector gap = u_ + linear_ * w_;
        double scale = 1.0;
        for (std::size_t i = 0; i < dim(); ++i) scale = std::max(scale, std::abs(w_[i]));
        for (std::size_t i = 0; i < dim(); ++i) {
            if (std::abs(gap[i]) > tol * scale) return false;
        }
        return true;
    }

    friend bool operator==(const ParamAffineMap&, const ParamAffineMap&) = default;

private:
    Matrix linear_;
    Vector u_;
    Vector w_;
    std::vector<ParamTerm> terms_;
};

class ParamFamily {
public:
    ParamFamily() = default;
    ParamFamily(std::size_t dim, std::vector<ParamAffineMap> maps) : dim_(dim), maps_(std::move(maps)) {
        if (dim_ == 0) fail(ErrorKind::invalid_argument, "family dimension must be positive");
        if (maps_.empty()) fail(ErrorKind::invalid_argument, "family needs at least one map");
        isometry_.reserve(maps_.size());
        for (std::size_t i = 0; i < maps_.size(); ++i) {
            if (maps_[i].dim() != dim_) {
                fail(ErrorKind::dimension_mismatch, "map " + std::to_string(i) + " has dimension " +
                                                        std::to_string(maps_[i].dim()) + ", expected " +
                                                        std::to_string(dim_));
            }
            isometry_.push_back(maps_[i].affine_in_t() && is_orthogonal(maps_[i].linear()));
        }
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return maps_.size(); }
    const std::vector<ParamAffineMap>& maps() const noexcept { return maps_; }
    const ParamAffineMap& operator[](std::size_t i) const { return maps_[i]; }

    /// Per map: linear part orthogonal, so the map is an isometry at t = 1.
    const std::vector<bool>& isometry_flags() const noexcept { return isometry_; }

    bool affine_in_t() const {
        for (const auto& m : maps_) {
            if (!m.affine_in_t()) return false;
        }
        return true;
    }

    std::vector<Matrix> linear_parts() const {
        std::vector<Matrix> out;
        for (const auto& m : maps_) out.push_back(m.linear());
        return out;
    }

    friend bool operator==(const ParamFamily& a, const ParamFamily& b) {
        return a.dim_ == b.dim_ && a.maps_ == b.maps_;
    }

private:
    std::size_t dim_ = 0;
    std::vector<ParamAffineMap> maps_;
    std::vector<bool> isometry_;
};

inline void require_affine_in_t(const ParamFamily& fam, const char* what) {
    if (!fam.affine_in_t()) {
        fail(ErrorKind::not_affine_in_t, std::string(what) + " needs a family that is affine in t");
    }
}

inline IfsSystem instantiate(const ParamFamily& fam, double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) fail(ErrorKind::invalid_argument, "parameter t must be finite and >= 0");
    std::vector<AffineMap> maps;
    maps.reserve(fam.size());
    for (const auto& m : fam.maps()) maps.push_back(m.at(t));
    return {fam.dim(), std::move(maps)};
}

} // namespace ifs_transit
