#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <memory>

#include "edgeadmm/errors.hpp"

namespace edgeadmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Closed convex set with Euclidean projection. Immutable after
/// construction; project() is pure, so instances are safe to share
/// across threads.
class ConvexSet {
  public:
    virtual ~ConvexSet() = default;

    Eigen::Index dim() const { return dim_; }

    /// Euclidean projection of v onto the set.
    virtual Vector project(const Vector& v) const = 0;

    /// True iff v lies within tol (Euclidean distance) of the set.
    bool contains(const Vector& v, double tol) const;

  protected:
    explicit ConvexSet(Eigen::Index dim) : dim_(dim) {}

  private:
    Eigen::Index dim_;
};

using ConvexSetPtr = std::shared_ptr<const ConvexSet>;

class WholeSpace final : public ConvexSet {
  public:
    explicit WholeSpace(Eigen::Index dim) : ConvexSet(dim) {}
    Vector project(const Vector& v) const override;
};

/// Axis-aligned box. Bounds may be +-infinity; the clamp skips infinite
/// sides, so one-sided constraints and free coordinates come along for free.
class Box final : public ConvexSet {
  public:
    Box(Vector lower, Vector upper);

    Vector project(const Vector& v) const override;

    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }

  private:
    Vector lower_;
    Vector upper_;
};

struct DykstraOptions {
    double tol = 1e-10;          // successive-iterate change, inf-norm
    long max_sweeps = 20000;
    double accept_tol = 1e-6;    // at the cap, accept if change is below this
};

/// Intersection of a base convex set with the affine subspace
/// { z : A_eq z = b_eq }. Projection runs Dykstra's alternating scheme with
/// correction terms between the base projection and the (exact) affine
/// projection; plain alternation would land somewhere in the intersection
/// rather than at the projection.
///
/// Nonemptiness is certified once at construction by projecting a point and
/// checking it lands in both sets.
class AffineSlice final : public ConvexSet {
  public:
    AffineSlice(ConvexSetPtr base, Matrix a_eq, Vector b_eq,
                DykstraOptions options = {});

    Vector project(const Vector& v) const override;

    const Matrix& a_eq() const { return a_eq_; }
    const Vector& b_eq() const { return b_eq_; }
    const ConvexSet& base() const { return *base_; }

    /// Projection onto the affine subspace alone:
    /// z - A'(AA')^{-1}(Az - b), with AA' factored once.
    Vector project_affine(const Vector& v) const;

  private:
    ConvexSetPtr base_;
    Matrix a_eq_;
    Vector b_eq_;
    Eigen::LLT<Matrix> gram_llt_;  // factorization of A_eq A_eq'
    DykstraOptions options_;
};

}  // namespace edgeadmm
