#pragma once

// Riemann-sphere geometry: points under the chordal metric, Mobius maps,
// round discs (spherical caps) and sampled polygonal regions.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace pingpong {

using Complex = std::complex<double>;

/// Points with modulus above this are identified with infinity.
inline constexpr double kInfinityThreshold = 1e30;

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double t) const { return {x * t, y * t, z * t}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const { return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x}; }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const { return *this * (1.0 / norm()); }
};

/// Angle between two unit vectors, accurate for nearly equal inputs.
double angle_between(const Vec3& u, const Vec3& v);

/// Rotates v about the unit axis by the given angle (Rodrigues).
Vec3 rotate(const Vec3& v, const Vec3& axis, double angle);

/// A point of the extended complex plane.
class SpherePoint {
  public:
    SpherePoint() = default;
    SpherePoint(Complex z);  // NOLINT: implicit from a finite coordinate
    SpherePoint(double re, double im) : SpherePoint(Complex(re, im)) {}

    static SpherePoint infinity() {
        SpherePoint p;
        p.inf_ = true;
        return p;
    }
    /// Inverse stereographic projection of a unit 3-vector (north pole = infinity).
    static SpherePoint from_vec3(const Vec3& v);

    bool is_infinity() const noexcept { return inf_; }
    /// Finite coordinate; undefined for infinity.
    Complex z() const noexcept { return z_; }
    /// Stereographic lift onto the unit sphere in R^3.
    Vec3 lift() const;

    friend bool operator==(const SpherePoint&, const SpherePoint&) = default;

  private:
    Complex z_{0.0, 0.0};
    bool inf_ = false;
};

double chordal_distance(const SpherePoint& p, const SpherePoint& q);

/// Geodesic interpolation between two points, t in [0, 1].
SpherePoint slerp(const SpherePoint& p, const SpherePoint& q, double t);

/// z -> (p z + q) / (r z + s), normalized to determinant one.
class MobiusMap {
  public:
    MobiusMap() = default;  // identity
    MobiusMap(Complex p, Complex q, Complex r, Complex s);

    static MobiusMap identity() { return {}; }
    /// z -> w with fixed points `attractor` (multiplier lambda < 1) and `repeller`.
    static MobiusMap loxodromic(const SpherePoint& attractor, const SpherePoint& repeller, Complex lambda);
    /// A rotation of the sphere (chordal isometry) taking `p` to 0.
    static MobiusMap rotation_to_origin(const SpherePoint& p);
    /// Some Mobius map with 0 -> a and infinity -> b (a != b).
    static MobiusMap sending_zero_infinity_to(const SpherePoint& a, const SpherePoint& b);

    SpherePoint operator()(const SpherePoint& x) const;
    MobiusMap operator*(const MobiusMap& o) const;  // composition: (this * o)(x) = this(o(x))
    MobiusMap inverse() const;

    const std::array<Complex, 4>& entries() const noexcept { return m_; }
    Complex determinant() const { return m_[0] * m_[3] - m_[1] * m_[2]; }
    Complex trace() const { return m_[0] + m_[3]; }
    /// Preimage of infinity.
    SpherePoint pole() const;
    std::vector<SpherePoint> fixed_points() const;

  private:
    std::array<Complex, 4> m_{Complex(1), Complex(0), Complex(0), Complex(1)};
};

inline SpherePoint apply(const MobiusMap& m, const SpherePoint& p) { return m(p); }
inline MobiusMap compose(const MobiusMap& outer, const MobiusMap& inner) { return outer * inner; }

/// Chordal derivative |m'(z)| (1 + |z|^2) / (1 + |m(z)|^2), chart independent.
double chordal_derivative(const MobiusMap& m, const SpherePoint& p);

/// A round disc on the sphere, the one of the two circle sides selected by `side`.
struct Cap;

class DegenerateImageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Disc {
    enum class Side { bounded, unbounded };

    Complex center{0.0, 0.0};
    double radius = 1.0;
    Side side = Side::bounded;

    Disc() = default;
    Disc(Complex c, double r, Side s = Side::bounded);

    /// Open-disc membership.
    bool contains(const SpherePoint& p) const;
    /// Signed margin: positive inside, in chart units of the boundary circle.
    double signed_chart_margin(const SpherePoint& p) const;
    SpherePoint boundary_point(double t) const;  // t in [0, 1)
    /// A point certainly inside: the center or infinity.
    SpherePoint witness() const;
    Cap to_cap() const;
    double chordal_diameter() const;
};

/// A disc described intrinsically: unit center vector and angular radius.
struct Cap {
    Vec3 center;
    double angle = 0;  // in (0, pi)

    bool contains(const Vec3& v) const { return angle_between(center, v) < angle; }
    SpherePoint center_point() const { return SpherePoint::from_vec3(center); }
    double chordal_diameter() const;
    /// Chordal radius containing the cap around its center.
    static Cap around(const SpherePoint& p, double chordal_radius);
    Disc to_disc() const;
};

Disc image_disc(const MobiusMap& m, const Disc& d);

struct Separation {
    double distance = 0;  // chordal distance between the closed discs
    bool nested = false;  // one disc contains the other
    bool overlapping = false;
};

Separation disc_separation(const Disc& d1, const Disc& d2);

/// Angular margin by which `outer` contains the closure of `inner`;
/// negative when containment fails.
double containment_margin(const Disc& outer, const Disc& inner);

struct ContractionEstimate {
    double factor = 0;
    std::size_t samples = 0;
};

/// Sampled upper estimate of the chordal Lipschitz constant of m on the
/// union of the given discs (random pairs, near-diagonal pairs and the
/// chordal derivative on a grid).
ContractionEstimate contraction_factor(const MobiusMap& m, std::span<const Disc> discs, std::size_t samples,
                                       std::uint64_t seed = 1);
inline ContractionEstimate contraction_factor(const MobiusMap& m, const Disc& d, std::size_t samples,
                                              std::uint64_t seed = 1) {
    return contraction_factor(m, std::span<const Disc>(&d, 1), samples, seed);
}

// Sampling helpers.
Vec3 random_unit_vector(std::mt19937_64& rng);
SpherePoint random_sphere_point(std::mt19937_64& rng);
/// Area-uniform point in a cap.
SpherePoint random_point_in_cap(const Cap& cap, std::mt19937_64& rng);
/// Area-uniform point at chordal distance below r from p.
SpherePoint random_point_near(const SpherePoint& p, double chordal_radius, std::mt19937_64& rng);
/// Fibonacci lattice of n nearly uniform points.
std::vector<SpherePoint> fibonacci_points(std::size_t n);

/// A closed curve on the sphere bounding a small region, with a point
/// known to be inside.  Membership is tested in a chart centered at the
/// witness.
struct Polygon {
    std::vector<SpherePoint> vertices;
    SpherePoint witness;

    bool contains(const SpherePoint& p) const;
    double chordal_diameter() const;
    /// Chordal distance from p to the nearest vertex.
    double vertex_distance(const SpherePoint& p) const;
    static Polygon from_disc(const Disc& d, std::size_t n);
};

}  // namespace pingpong
