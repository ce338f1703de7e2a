#include "edgeadmm/convex_sets.hpp"

#include <cmath>
#include <limits>

namespace edgeadmm {

bool ConvexSet::contains(const Vector& v, double tol) const {
    if (v.size() != dim()) {
        throw DimensionMismatch("contains: vector of length " + std::to_string(v.size()) +
                                " against a set of dimension " + std::to_string(dim()));
    }
    return (project(v) - v).norm() <= tol;
}

Vector WholeSpace::project(const Vector& v) const { return v; }

Box::Box(Vector lower, Vector upper)
    : ConvexSet(lower.size()), lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size()) {
        throw DimensionMismatch("box bounds of different lengths");
    }
    for (Eigen::Index k = 0; k < lower_.size(); ++k) {
        if (!(lower_(k) <= upper_(k))) {
            throw Error("box has lower > upper at coordinate " + std::to_string(k));
        }
    }
}

Vector Box::project(const Vector& v) const {
    if (v.size() != dim()) throw DimensionMismatch("box projection: wrong length");
    Vector out = v;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (std::isfinite(lower_(k)) && out(k) < lower_(k)) out(k) = lower_(k);
        if (std::isfinite(upper_(k)) && out(k) > upper_(k)) out(k) = upper_(k);
    }
    return out;
}

AffineSlice::AffineSlice(ConvexSetPtr base, Matrix a_eq, Vector b_eq, DykstraOptions options)
    : ConvexSet(base ? base->dim() : 0),
      base_(std::move(base)),
      a_eq_(std::move(a_eq)),
      b_eq_(std::move(b_eq)),
      options_(options) {
    if (!base_) throw Error("affine slice needs a base set");
    if (a_eq_.cols() != dim()) {
        throw DimensionMismatch("A_eq has " + std::to_string(a_eq_.cols()) +
                                " columns against dimension " + std::to_string(dim()));
    }
    if (b_eq_.size() != a_eq_.rows()) {
        throw DimensionMismatch("b_eq length does not match A_eq rows");
    }
    Matrix gram = a_eq_ * a_eq_.transpose();
    gram_llt_.compute(gram);
    if (gram_llt_.info() != Eigen::Success) {
        throw RankDeficient("A_eq must have full row rank");
    }

    // Certify nonemptiness by projecting one point and checking it lands in
    // both sets. Tolerance scales with the right-hand side.
    Vector probe = project(Vector::Zero(dim()));
    const double scale = 1.0 + b_eq_.cwiseAbs().maxCoeff();
    const double eq_gap = (a_eq_ * probe - b_eq_).cwiseAbs().maxCoeff();
    const double base_gap = (base_->project(probe) - probe).cwiseAbs().maxCoeff();
    if (eq_gap > 1e-6 * scale || base_gap > 1e-6 * scale) {
        throw EmptySlice("affine slice certified empty (residuals " + std::to_string(eq_gap) +
                         ", " + std::to_string(base_gap) + ")");
    }
}

Vector AffineSlice::project_affine(const Vector& v) const {
    return v - a_eq_.transpose() * gram_llt_.solve(a_eq_ * v - b_eq_);
}

Vector AffineSlice::project(const Vector& v) const {
    if (v.size() != dim()) throw DimensionMismatch("affine slice projection: wrong length");
    // Dykstra with correction terms; the affine half needs no correction
    // (projection onto a subspace is linear), the base set keeps one.
    Vector x = v;
    Vector p = Vector::Zero(dim());
    Vector x_prev(dim());
    double change = std::numeric_limits<double>::infinity();
    for (long sweep = 0; sweep < options_.max_sweeps; ++sweep) {
        x_prev = x;
        Vector y = base_->project(x + p);
        p = x + p - y;
        x = project_affine(y);
        change = (x - x_prev).cwiseAbs().maxCoeff();
        if (change < options_.tol) return x;
    }
    if (change > options_.accept_tol) {
        throw NotConverged("Dykstra projection stalled", options_.max_sweeps, change);
    }
    return x;
}

}  // namespace edgeadmm
