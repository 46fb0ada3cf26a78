#include "pingpong/sphere.hpp"

#include <algorithm>
#include <numbers>

namespace pingpong {

namespace {

constexpr Vec3 kNorth{0.0, 0.0, 1.0};

MobiusMap inversion() { return MobiusMap(Complex(0), Complex(1), Complex(1), Complex(0)); }

Vec3 any_perpendicular(const Vec3& v) {
    Vec3 t = std::abs(v.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    return v.cross(t).normalized();
}

}  // namespace

double angle_between(const Vec3& u, const Vec3& v) { return std::atan2(u.cross(v).norm(), u.dot(v)); }

Vec3 rotate(const Vec3& v, const Vec3& axis, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1.0 - c));
}

SpherePoint::SpherePoint(Complex z) : z_(z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > kInfinityThreshold) {
        z_ = Complex(0);
        inf_ = true;
    }
}

SpherePoint SpherePoint::from_vec3(const Vec3& v_in) {
    const Vec3 v = v_in.normalized();
    const double rho2 = v.x * v.x + v.y * v.y;
    if (v.z <= 0) return SpherePoint(Complex(v.x, v.y) / (1.0 - v.z));
    if (rho2 == 0) return infinity();
    // 1 - z = rho^2 / (1 + z) avoids cancellation near the north pole.
    return SpherePoint(Complex(v.x, v.y) * ((1.0 + v.z) / rho2));
}

Vec3 SpherePoint::lift() const {
    if (inf_) return kNorth;
    const double r2 = std::norm(z_);
    const double d = 1.0 + r2;
    return {2.0 * z_.real() / d, 2.0 * z_.imag() / d, (r2 - 1.0) / d};
}

double chordal_distance(const SpherePoint& p, const SpherePoint& q) {
    if (p.is_infinity() && q.is_infinity()) return 0.0;
    if (p.is_infinity()) return 2.0 / std::sqrt(1.0 + std::norm(q.z()));
    if (q.is_infinity()) return 2.0 / std::sqrt(1.0 + std::norm(p.z()));
    Complex z = p.z();
    Complex w = q.z();
    // z -> 1/z is a chordal isometry; use it to keep both moduli small.
    if (std::abs(z) > 1.0 && std::abs(w) > 1.0) {
        z = 1.0 / z;
        w = 1.0 / w;
    }
    return 2.0 * std::abs(z - w) / std::sqrt((1.0 + std::norm(z)) * (1.0 + std::norm(w)));
}

SpherePoint slerp(const SpherePoint& p, const SpherePoint& q, double t) {
    const Vec3 u = p.lift();
    const Vec3 v = q.lift();
    const double theta = angle_between(u, v);
    if (theta < 1e-300) return p;
    const double s = std::sin(theta);
    return SpherePoint::from_vec3(u * (std::sin((1.0 - t) * theta) / s) + v * (std::sin(t * theta) / s));
}

MobiusMap::MobiusMap(Complex p, Complex q, Complex r, Complex s) : m_{p, q, r, s} {
    const Complex det = p * s - q * r;
    if (std::abs(det) == 0) throw std::invalid_argument("singular Mobius matrix");
    const Complex k = 1.0 / std::sqrt(det);
    for (auto& e : m_) e *= k;
}

MobiusMap MobiusMap::sending_zero_infinity_to(const SpherePoint& a, const SpherePoint& b) {
    if (a == b) throw std::invalid_argument("fixed points must differ");
    if (b.is_infinity()) return {Complex(1), a.z(), Complex(0), Complex(1)};
    if (a.is_infinity()) return {b.z(), Complex(1), Complex(1), Complex(0)};
    return {b.z(), a.z(), Complex(1), Complex(1)};
}

MobiusMap MobiusMap::loxodromic(const SpherePoint& attractor, const SpherePoint& repeller, Complex lambda) {
    const MobiusMap c = sending_zero_infinity_to(attractor, repeller);
    const Complex root = std::sqrt(lambda);
    const MobiusMap scale(root, Complex(0), Complex(0), 1.0 / root);
    return c * scale * c.inverse();
}

MobiusMap MobiusMap::rotation_to_origin(const SpherePoint& p) {
    if (p.is_infinity()) return {Complex(0), Complex(1), Complex(-1), Complex(0)};
    const Complex z0 = p.z();
    return {Complex(1), -z0, std::conj(z0), Complex(1)};
}

SpherePoint MobiusMap::operator()(const SpherePoint& x) const {
    const auto& [p, q, r, s] = m_;
    if (x.is_infinity()) {
        if (r == Complex(0)) return SpherePoint::infinity();
        return SpherePoint(p / r);
    }
    const Complex z = x.z();
    Complex num;
    Complex den;
    if (std::abs(z) > 1.0) {
        const Complex u = 1.0 / z;
        num = p + q * u;
        den = r + s * u;
    } else {
        num = p * z + q;
        den = r * z + s;
    }
    if (den == Complex(0)) return SpherePoint::infinity();
    return SpherePoint(num / den);
}

MobiusMap MobiusMap::operator*(const MobiusMap& o) const {
    const auto& a = m_;
    const auto& b = o.m_;
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3]};
}

MobiusMap MobiusMap::inverse() const { return {m_[3], -m_[1], -m_[2], m_[0]}; }

SpherePoint MobiusMap::pole() const {
    if (m_[2] == Complex(0)) return SpherePoint::infinity();
    return SpherePoint(-m_[3] / m_[2]);
}

std::vector<SpherePoint> MobiusMap::fixed_points() const {
    const auto& [p, q, r, s] = m_;
    std::vector<SpherePoint> out;
    if (std::abs(r) < 1e-300) {
        out.push_back(SpherePoint::infinity());
        if (std::abs(s - p) > 1e-300) out.emplace_back(q / (s - p));
        return out;
    }
    // r z^2 + (s - p) z - q = 0
    const Complex bq = s - p;
    const Complex disc = std::sqrt(bq * bq + 4.0 * r * q);
    const Complex big = std::abs(-bq + disc) > std::abs(-bq - disc) ? -bq + disc : -bq - disc;
    if (std::abs(big) == 0) {
        out.emplace_back(-bq / (2.0 * r));
        return out;
    }
    out.emplace_back(big / (2.0 * r));
    out.emplace_back(-2.0 * q / big);
    if (std::abs(disc) < 1e-14) out.pop_back();
    return out;
}

double chordal_derivative(const MobiusMap& m_in, const SpherePoint& x) {
    MobiusMap m = m_in;
    Complex z;
    if (x.is_infinity() || std::abs(x.z()) > 1.0) {
        m = m * inversion();
        z = x.is_infinity() ? Complex(0) : 1.0 / x.z();
    } else {
        z = x.z();
    }
    const SpherePoint image = m(SpherePoint(z));
    if (image.is_infinity() || std::abs(image.z()) > 1.0) m = inversion() * m;
    const auto& e = m.entries();
    const Complex den = e[2] * z + e[3];
    const Complex w = (e[0] * z + e[1]) / den;
    return (1.0 + std::norm(z)) / (std::norm(den) * (1.0 + std::norm(w)));
}

Disc::Disc(Complex c, double r, Side s) : center(c), radius(r), side(s) {
    if (!(r > 0) || !std::isfinite(r)) throw std::invalid_argument("disc radius must be positive");
}

bool Disc::contains(const SpherePoint& p) const { return signed_chart_margin(p) > 0; }

double Disc::signed_chart_margin(const SpherePoint& p) const {
    if (p.is_infinity()) return side == Side::unbounded ? std::numeric_limits<double>::infinity() : -1.0;
    const double d = std::abs(p.z() - center);
    return side == Side::bounded ? radius - d : d - radius;
}

SpherePoint Disc::boundary_point(double t) const {
    return SpherePoint(center + radius * std::polar(1.0, 2.0 * std::numbers::pi * t));
}

SpherePoint Disc::witness() const { return side == Side::bounded ? SpherePoint(center) : SpherePoint::infinity(); }

Cap Disc::to_cap() const {
    const double cm = std::abs(center);
    const Complex u = cm > 0 ? center / cm : Complex(1);
    const SpherePoint z1(center + radius * u);
    const SpherePoint z2(center - radius * u);
    const Vec3 p1 = z1.lift();
    const Vec3 p2 = z2.lift();
    const Vec3 mid = p1 + p2;
    Cap k;
    if (mid.norm() > 0.5) {
        k.center = mid.normalized();
        k.angle = std::asin(std::min(1.0, chordal_distance(z1, z2) / 2.0));
    } else {
        const Vec3 p3 = SpherePoint(center + radius * u * Complex(0, 1)).lift();
        k.center = (p2 - p1).cross(p3 - p1).normalized();
        k.angle = angle_between(k.center, p1);
    }
    // k is one of the two sides; the bounded side is the one avoiding infinity.
    // <= so that a circle collapsed onto infinity (k.angle == 0) counts as containing it.
    const bool k_has_infinity = angle_between(k.center, kNorth) <= k.angle;
    const bool want_infinity = side == Side::unbounded;
    if (k_has_infinity != want_infinity) {
        k.center = -k.center;
        k.angle = std::numbers::pi - k.angle;
    }
    return k;
}

double Disc::chordal_diameter() const { return to_cap().chordal_diameter(); }

double Cap::chordal_diameter() const { return angle >= std::numbers::pi / 2 ? 2.0 : 2.0 * std::sin(angle); }

Cap Cap::around(const SpherePoint& p, double chordal_radius) {
    return Cap{p.lift(), 2.0 * std::asin(std::min(1.0, chordal_radius / 2.0))};
}

Disc Cap::to_disc() const {
    Vec3 axis = center.cross(kNorth);
    axis = axis.norm() < 1e-12 ? Vec3{1, 0, 0} : axis.normalized();
    const SpherePoint w1 = SpherePoint::from_vec3(rotate(center, axis, angle));
    const SpherePoint w2 = SpherePoint::from_vec3(rotate(center, axis, -angle));
    if (w1.is_infinity() || w2.is_infinity()) throw DegenerateImageError("cap boundary passes through infinity");
    const Complex c = 0.5 * (w1.z() + w2.z());
    const double r = 0.5 * std::abs(w1.z() - w2.z());
    const bool has_infinity = angle_between(center, kNorth) < angle;
    return Disc(c, r, has_infinity ? Disc::Side::unbounded : Disc::Side::bounded);
}

Disc image_disc(const MobiusMap& m, const Disc& d) {
    const auto& [p, q, r, s] = m.entries();
    const Complex rc = r * d.center + s;
    const double r2 = d.radius * d.radius;
    const double den = std::norm(rc) - std::norm(r) * r2;
    // den = |r|^2 (|c - pole|^2 - R^2); distance of the pole from the circle.
    const SpherePoint pole = m.pole();
    if (!pole.is_infinity()) {
        const double gap = std::abs(std::abs(pole.z() - d.center) - d.radius);
        const double chordal_gap = 2.0 * gap / (1.0 + std::norm(pole.z()));
        if (chordal_gap <= 1e-9) throw DegenerateImageError("disc boundary passes through the pole");
    }
    const Complex c = ((p * d.center + q) * std::conj(rc) - p * std::conj(r) * r2) / den;
    const double radius = d.radius / std::abs(den);
    const Disc::Side side = den > 0 ? d.side : (d.side == Disc::Side::bounded ? Disc::Side::unbounded
                                                                               : Disc::Side::bounded);
    return Disc(c, radius, side);
}

Separation disc_separation(const Disc& d1, const Disc& d2) {
    const Cap k1 = d1.to_cap();
    const Cap k2 = d2.to_cap();
    const double delta = angle_between(k1.center, k2.center);
    Separation out;
    const double gap = delta - k1.angle - k2.angle;
    if (gap > 0) {
        out.distance = 2.0 * std::sin(std::min(gap, std::numbers::pi) / 2.0);
        return out;
    }
    out.nested = delta + std::min(k1.angle, k2.angle) <= std::max(k1.angle, k2.angle);
    out.overlapping = !out.nested;
    return out;
}

double containment_margin(const Disc& outer, const Disc& inner) {
    const Cap ko = outer.to_cap();
    const Cap ki = inner.to_cap();
    return ko.angle - (angle_between(ko.center, ki.center) + ki.angle);
}

Vec3 random_unit_vector(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    for (;;) {
        Vec3 v{n(rng), n(rng), n(rng)};
        const double len = v.norm();
        if (len > 1e-12) return v * (1.0 / len);
    }
}

SpherePoint random_sphere_point(std::mt19937_64& rng) { return SpherePoint::from_vec3(random_unit_vector(rng)); }

SpherePoint random_point_in_cap(const Cap& cap, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double theta = 2.0 * std::asin(std::sqrt(u(rng)) * std::sin(std::min(cap.angle, std::numbers::pi) / 2.0));
    const double phi = 2.0 * std::numbers::pi * u(rng);
    const Vec3 e1 = any_perpendicular(cap.center);
    const Vec3 e2 = cap.center.cross(e1);
    const Vec3 v = cap.center * std::cos(theta) + (e1 * std::cos(phi) + e2 * std::sin(phi)) * std::sin(theta);
    return SpherePoint::from_vec3(v);
}

SpherePoint random_point_near(const SpherePoint& p, double chordal_radius, std::mt19937_64& rng) {
    return random_point_in_cap(Cap::around(p, chordal_radius), rng);
}

std::vector<SpherePoint> fibonacci_points(std::size_t n) {
    std::vector<SpherePoint> out;
    out.reserve(n);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * static_cast<double>(i);
        out.push_back(SpherePoint::from_vec3({r * std::cos(phi), r * std::sin(phi), z}));
    }
    return out;
}

ContractionEstimate contraction_factor(const MobiusMap& m, std::span<const Disc> discs, std::size_t samples,
                                       std::uint64_t seed) {
    if (samples < 2) throw std::invalid_argument("contraction_factor needs at least two samples");
    if (discs.empty()) return {0.0, 0};
    std::mt19937_64 rng(seed);
    std::vector<Cap> caps;
    caps.reserve(discs.size());
    for (const auto& d : discs) caps.push_back(d.to_cap());
    std::uniform_int_distribution<std::size_t> pick(0, caps.size() - 1);

    double best = 0.0;
    auto ratio = [&](const SpherePoint& x, const SpherePoint& y) {
        const double dxy = chordal_distance(x, y);
        if (dxy < 1e-13) return;
        best = std::max(best, chordal_distance(m(x), m(y)) / dxy);
    };

    // Finite pairs across the union, then near-diagonal pairs.
    const std::size_t pairs = samples / 2;
    for (std::size_t i = 0; i < pairs; ++i) {
        const SpherePoint x = random_point_in_cap(caps[pick(rng)], rng);
        const SpherePoint y = random_point_in_cap(caps[pick(rng)], rng);
        ratio(x, y);
    }
    for (std::size_t i = pairs; i < samples; ++i) {
        const Cap& k = caps[pick(rng)];
        const SpherePoint x = random_point_in_cap(k, rng);
        const SpherePoint y = random_point_near(x, 1e-5 * std::max(1e-6, k.chordal_diameter()), rng);
        if (k.contains(y.lift())) ratio(x, y);
    }

    // Chordal derivative on a polar grid of each cap, refined locally.
    const auto grid = static_cast<std::size_t>(std::max(4.0, std::sqrt(static_cast<double>(samples))));
    for (const Cap& k : caps) {
        const Vec3 e1 = any_perpendicular(k.center);
        const Vec3 e2 = k.center.cross(e1);
        auto at = [&](double t, double phi) {
            const double theta = k.angle * std::clamp(t, 0.0, 1.0);
            return SpherePoint::from_vec3(k.center * std::cos(theta) +
                                          (e1 * std::cos(phi) + e2 * std::sin(phi)) * std::sin(theta));
        };
        double best_t = 0;
        double best_phi = 0;
        double best_d = -1;
        for (std::size_t i = 0; i <= grid; ++i)
            for (std::size_t j = 0; j < grid; ++j) {
                const double t = static_cast<double>(i) / static_cast<double>(grid);
                const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(grid);
                const double dv = chordal_derivative(m, at(t, phi));
                if (dv > best_d) {
                    best_d = dv;
                    best_t = t;
                    best_phi = phi;
                }
            }
        double step_t = 1.0 / static_cast<double>(grid);
        double step_phi = 2.0 * std::numbers::pi / static_cast<double>(grid);
        for (int it = 0; it < 40; ++it) {
            bool moved = false;
            for (auto [dt, dp] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
                const double t = std::clamp(best_t + dt * step_t, 0.0, 1.0);
                const double phi = best_phi + dp * step_phi;
                const double dv = chordal_derivative(m, at(t, phi));
                if (dv > best_d) {
                    best_d = dv;
                    best_t = t;
                    best_phi = phi;
                    moved = true;
                }
            }
            if (!moved) {
                step_t *= 0.5;
                step_phi *= 0.5;
            }
        }
        best = std::max(best, best_d);
    }
    return {best, samples};
}

bool Polygon::contains(const SpherePoint& p) const {
    const MobiusMap chart = MobiusMap::rotation_to_origin(witness);
    const SpherePoint w = chart(p);
    if (w.is_infinity()) return false;
    const Complex z = w.z();
    bool inside = false;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const SpherePoint vi_p = chart(vertices[i]);
        const SpherePoint vj_p = chart(vertices[j]);
        if (vi_p.is_infinity() || vj_p.is_infinity()) continue;
        const Complex vi = vi_p.z();
        const Complex vj = vj_p.z();
        if ((vi.imag() > z.imag()) != (vj.imag() > z.imag())) {
            const double x = vj.real() + (z.imag() - vj.imag()) * (vi.real() - vj.real()) / (vi.imag() - vj.imag());
            if (z.real() < x) inside = !inside;
        }
    }
    return inside;
}

double Polygon::chordal_diameter() const {
    std::vector<Vec3> v;
    v.reserve(vertices.size());
    for (const auto& p : vertices) v.push_back(p.lift());
    double best = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j) best = std::max(best, (v[i] - v[j]).dot(v[i] - v[j]));
    return std::sqrt(best);
}

double Polygon::vertex_distance(const SpherePoint& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : vertices) best = std::min(best, chordal_distance(p, v));
    return best;
}

Polygon Polygon::from_disc(const Disc& d, std::size_t n) {
    Polygon out;
    out.vertices.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.vertices.push_back(d.boundary_point(static_cast<double>(i) / n));
    out.witness = d.to_cap().center_point();
    return out;
}

}  // namespace pingpong
