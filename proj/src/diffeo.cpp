#include "pingpong/diffeo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace pingpong {

namespace {

double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

double chord_to_angle(double chord) { return 2.0 * std::asin(std::min(1.0, chord / 2.0)); }

constexpr std::size_t kMaxStepsPerMove = 200000;
constexpr double kMinBumpRadius = 1e-12;

}  // namespace

CollisionError::CollisionError(std::size_t i, std::size_t j, const std::string& what)
    : std::runtime_error(what + " (moves " + std::to_string(i) + " and " + std::to_string(j) + ")"), i_(i), j_(j) {}

Vec3 Bump::forward(const Vec3& x) const {
    if ((x - center).dot(x - center) >= chord2) return x;
    const double d = angle_between(x, center);
    if (d >= radius) return x;
    return rotate(x, axis, theta * (1.0 - smoothstep(d / radius)));
}

Vec3 Bump::backward(const Vec3& y) const {
    if ((y - center).dot(y - center) >= chord2) return y;
    if (angle_between(y, center) >= radius) return y;
    // x = R(-theta phi(x)) y is a contraction with constant <= 1/2.
    Vec3 x = y;
    for (int it = 0; it < 100; ++it) {
        const double d = angle_between(x, center);
        const double phi = d >= radius ? 0.0 : 1.0 - smoothstep(d / radius);
        const Vec3 next = rotate(y, axis, -theta * phi);
        const double step = (next - x).norm();
        x = next;
        if (step < 1e-15) return x;
    }
    const double d = angle_between(x, center);
    const double phi = d >= radius ? 0.0 : 1.0 - smoothstep(d / radius);
    if ((rotate(x, axis, theta * phi) - y).norm() < 1e-12) return x;
    throw InversionError("bump inverse did not converge in 100 iterations");
}

InterpolatingDiffeo InterpolatingDiffeo::build(const std::vector<std::pair<SpherePoint, SpherePoint>>& pairs,
                                               double lambda) {
    if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
    InterpolatingDiffeo f;
    f.pairs_ = pairs;
    f.lambda_ = lambda;
    const std::size_t n = pairs.size();
    std::vector<Vec3> src(n), dst(n);
    for (std::size_t i = 0; i < n; ++i) {
        src[i] = pairs[i].first.lift();
        dst[i] = pairs[i].second.lift();
        if (chordal_distance(pairs[i].first, pairs[i].second) >= lambda)
            throw std::invalid_argument("move " + std::to_string(i) + " is not shorter than lambda");
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if ((src[i] - src[j]).norm() < 1e-12) throw CollisionError(i, j, "coincident sources");
            if ((dst[i] - dst[j]).norm() < 1e-12) throw CollisionError(i, j, "coincident targets");
        }

    // Current constraint positions: targets before move i, sources after it.
    std::vector<Vec3> where = src;
    const double lambda_angle = chord_to_angle(lambda);
    for (std::size_t i = 0; i < n; ++i) {
        Move mv;
        mv.begin = f.bumps_.size();
        Vec3 m = where[i];
        const Vec3 q = dst[i];
        std::size_t steps = 0;
        while (angle_between(m, q) > 0) {
            double nearest2 = std::numeric_limits<double>::infinity();
            std::size_t who = i;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const Vec3 d = where[j] - m;
                const double d2 = d.dot(d);
                if (d2 < nearest2) {
                    nearest2 = d2;
                    who = j;
                }
            }
            const double room = 0.5 * chord_to_angle(std::sqrt(nearest2));
            if (room < kMinBumpRadius) throw CollisionError(i, who, "bump support collision");
            const double r = std::min(room, lambda_angle);
            if (++steps > kMaxStepsPerMove) throw CollisionError(i, who, "move needs too many bumps");
            const double remaining = angle_between(m, q);
            Vec3 axis = m.cross(q);
            if (axis.norm() < 1e-300) break;
            Bump b;
            b.center = m;
            b.axis = axis.normalized();
            b.theta = std::min(remaining, r / 3.0);
            b.radius = r;
            b.chord2 = std::pow(2.0 * std::sin(r / 2.0), 2);
            m = b.forward(m);
            f.bumps_.push_back(b);
            if (b.theta == remaining) break;
        }
        where[i] = m;
        mv.end = f.bumps_.size();
        if (mv.end > mv.begin) {
            Vec3 c = src[i] + dst[i];
            c = c.norm() > 1e-12 ? c.normalized() : src[i];
            double ang = 0;
            for (std::size_t k = mv.begin; k < mv.end; ++k)
                ang = std::max(ang, angle_between(c, f.bumps_[k].center) + f.bumps_[k].radius);
            mv.bound = Cap{c, ang};
            mv.chord2 = std::pow(2.0 * std::sin(std::min(ang * (1 + 1e-9) + 1e-15, 3.14159) / 2.0), 2);
            f.moves_.push_back(mv);
        }
    }
    return f;
}

Vec3 InterpolatingDiffeo::forward(Vec3 x) const {
    for (const Move& mv : moves_) {
        if ((x - mv.bound.center).dot(x - mv.bound.center) >= mv.chord2) continue;
        for (std::size_t k = mv.begin; k < mv.end; ++k) x = bumps_[k].forward(x);
    }
    return x;
}

Vec3 InterpolatingDiffeo::backward(Vec3 y) const {
    for (auto it = moves_.rbegin(); it != moves_.rend(); ++it) {
        if ((y - it->bound.center).dot(y - it->bound.center) >= it->chord2) continue;
        for (std::size_t k = it->end; k-- > it->begin;) y = bumps_[k].backward(y);
    }
    return y;
}

SpherePoint InterpolatingDiffeo::operator()(const SpherePoint& x) const {
    if (bumps_.empty()) return x;
    return SpherePoint::from_vec3(forward(x.lift()));
}

SpherePoint InterpolatingDiffeo::inverse(const SpherePoint& y) const {
    if (bumps_.empty()) return y;
    return SpherePoint::from_vec3(backward(y.lift()));
}

double InterpolatingDiffeo::sup_displacement(std::size_t samples, std::uint64_t seed) const {
    double best = 0;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < samples; ++i) {
        const SpherePoint x = random_sphere_point(rng);
        best = std::max(best, chordal_distance((*this)(x), x));
    }
    for (const auto& [p, q] : pairs_) best = std::max(best, chordal_distance((*this)(p), p));
    // Supports are small; probe inside each move's bounding cap as well.
    std::mt19937_64 local(seed ^ 0x9e3779b97f4a7c15ULL);
    for (const Move& mv : moves_)
        for (int k = 0; k < 8; ++k) {
            const SpherePoint x = random_point_in_cap(mv.bound, local);
            best = std::max(best, chordal_distance((*this)(x), x));
        }
    return best;
}

double InterpolatingDiffeo::constraint_residual() const {
    double worst = 0;
    for (const auto& [p, q] : pairs_) worst = std::max(worst, chordal_distance((*this)(p), q));
    return worst;
}

}  // namespace pingpong
