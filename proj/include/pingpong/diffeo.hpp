#pragma once

// Sphere diffeomorphisms that push finitely many points to prescribed
// targets, built from chains of compactly supported bump rotations.

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pingpong/sphere.hpp"

namespace pingpong {

class CollisionError : public std::runtime_error {
  public:
    CollisionError(std::size_t i, std::size_t j, const std::string& what);
    std::size_t first() const noexcept { return i_; }
    std::size_t second() const noexcept { return j_; }

  private:
    std::size_t i_, j_;
};

class InversionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// One bump: x -> rotate(x, axis, theta * phi(d(x, center) / radius)),
/// phi = 1 - smoothstep.  theta <= radius / 3 keeps it a diffeomorphism.
struct Bump {
    Vec3 center;
    Vec3 axis;
    double theta = 0;
    double radius = 0;  // angular
    double chord2 = 0;  // squared chordal radius of the support

    Vec3 forward(const Vec3& x) const;
    Vec3 backward(const Vec3& y) const;
};

class InterpolatingDiffeo {
  public:
    InterpolatingDiffeo() = default;  // identity

    /// Moves are applied in order; each p_i travels along the geodesic to
    /// q_i through bumps that avoid every other constraint point.
    static InterpolatingDiffeo build(const std::vector<std::pair<SpherePoint, SpherePoint>>& pairs, double lambda);

    SpherePoint operator()(const SpherePoint& x) const;
    SpherePoint inverse(const SpherePoint& y) const;
    Vec3 forward(Vec3 x) const;
    Vec3 backward(Vec3 y) const;

    const std::vector<std::pair<SpherePoint, SpherePoint>>& pairs() const noexcept { return pairs_; }
    double lambda() const noexcept { return lambda_; }
    std::size_t bump_count() const noexcept { return bumps_.size(); }
    bool is_identity() const noexcept { return bumps_.empty(); }

    /// Sampled sup of d(f(x), x): random points plus the constraint points.
    double sup_displacement(std::size_t samples, std::uint64_t seed = 7) const;
    /// Largest residual |f(p_i) - q_i|.
    double constraint_residual() const;

  private:
    struct Move {
        Cap bound;  // contains the support of every bump of the move
        double chord2 = 0;
        std::size_t begin = 0, end = 0;
    };
    std::vector<std::pair<SpherePoint, SpherePoint>> pairs_;
    std::vector<Bump> bumps_;
    std::vector<Move> moves_;
    double lambda_ = 0;
};

}  // namespace pingpong
