#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "pingpong/sphere.hpp"

using namespace pingpong;

namespace {

// Oracle: chordal distance as the Euclidean distance of stereographic lifts,
// computed directly from the textbook formula.
double lift_distance(Complex z, Complex w) {
    auto lift = [](Complex u) {
        const double r2 = std::norm(u);
        return std::array<double, 3>{2 * u.real() / (1 + r2), 2 * u.imag() / (1 + r2), (r2 - 1) / (r2 + 1)};
    };
    const auto p = lift(z), q = lift(w);
    return std::hypot(p[0] - q[0], p[1] - q[1], p[2] - q[2]);
}

Complex random_complex(std::mt19937_64& rng, double scale = 2.0) {
    std::normal_distribution<double> n(0.0, scale);
    return {n(rng), n(rng)};
}

MobiusMap random_mobius(std::mt19937_64& rng) {
    for (;;) {
        const Complex p = random_complex(rng, 1), q = random_complex(rng, 1), r = random_complex(rng, 1),
                      s = random_complex(rng, 1);
        if (std::abs(p * s - q * r) > 0.1) return {p, q, r, s};
    }
}

}  // namespace

TEST(Sphere, ChordalDistanceMatchesLift) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
        const Complex z = random_complex(rng), w = random_complex(rng);
        EXPECT_NEAR(chordal_distance(z, w), lift_distance(z, w), 1e-12);
    }
    EXPECT_NEAR(chordal_distance(Complex(0), SpherePoint::infinity()), 2.0, 1e-15);
    EXPECT_NEAR(chordal_distance(Complex(1), SpherePoint::infinity()), std::sqrt(2.0), 1e-15);
}

TEST(Sphere, LiftRoundTrip) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 1000; ++i) {
        const SpherePoint p = random_sphere_point(rng);
        EXPECT_LT(chordal_distance(SpherePoint::from_vec3(p.lift()), p), 1e-13);
    }
    EXPECT_TRUE(SpherePoint::from_vec3({0, 0, 1}).is_infinity());
    EXPECT_TRUE(SpherePoint(Complex(2 * kInfinityThreshold, 0)).is_infinity());
    const SpherePoint big(Complex(0.5 * kInfinityThreshold, 0));
    ASSERT_FALSE(big.is_infinity());
    // Chordal distance to infinity is 2 / sqrt(1 + |z|^2).
    EXPECT_NEAR(chordal_distance(big, SpherePoint::infinity()), 4 / kInfinityThreshold, 1e-12 / kInfinityThreshold);
    EXPECT_LT(chordal_distance(SpherePoint::from_vec3(big.lift()), big), 1e-13 / kInfinityThreshold);
}

TEST(Sphere, MobiusCompositionAndInverse) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const MobiusMap f = random_mobius(rng), g = random_mobius(rng);
        const SpherePoint x = random_sphere_point(rng);
        EXPECT_LT(chordal_distance((f * g)(x), f(g(x))), 1e-9);
        EXPECT_LT(chordal_distance(f.inverse()(f(x)), x), 1e-9);
        EXPECT_NEAR(std::abs(f.determinant()), 1.0, 1e-12);
    }
}

TEST(Sphere, LoxodromicFixedPoints) {
    const MobiusMap m = MobiusMap::loxodromic(Complex(1), Complex(-1), Complex(0.04));
    EXPECT_LT(chordal_distance(m(Complex(1)), Complex(1)), 1e-14);
    EXPECT_LT(chordal_distance(m(Complex(-1)), Complex(-1)), 1e-14);
    EXPECT_EQ(m.fixed_points().size(), 2u);
    // Multiplier at the attractor equals lambda.
    EXPECT_NEAR(chordal_derivative(m, Complex(1)), 0.04, 1e-12);
    const MobiusMap a = MobiusMap::loxodromic(Complex(0), SpherePoint::infinity(), Complex(0.04));
    EXPECT_LT(chordal_distance(a(Complex(3, 1)), Complex(0.12, 0.04)), 1e-15);
    EXPECT_TRUE(a(SpherePoint::infinity()).is_infinity());
}

TEST(Sphere, RotationToOriginIsIsometry) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 200; ++i) {
        const SpherePoint p = random_sphere_point(rng);
        const MobiusMap r = MobiusMap::rotation_to_origin(p);
        EXPECT_LT(chordal_distance(r(p), Complex(0)), 1e-12);
        const SpherePoint x = random_sphere_point(rng), y = random_sphere_point(rng);
        EXPECT_NEAR(chordal_distance(r(x), r(y)), chordal_distance(x, y), 1e-12);
    }
}

TEST(Sphere, ChordalDerivativeMatchesFiniteDifference) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const MobiusMap m = random_mobius(rng);
        const SpherePoint x = random_sphere_point(rng);
        const SpherePoint y = random_point_near(x, 1e-7, rng);
        const double ratio = chordal_distance(m(x), m(y)) / chordal_distance(x, y);
        EXPECT_NEAR(ratio, chordal_derivative(m, x), 1e-5 * std::max(1.0, ratio));
    }
}

TEST(Sphere, DiscCapRoundTrip) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    for (int i = 0; i < 300; ++i) {
        const Disc d(random_complex(rng, 1), u(rng), i % 2 ? Disc::Side::bounded : Disc::Side::unbounded);
        const Cap k = d.to_cap();
        // Membership agrees on random points.
        for (int j = 0; j < 50; ++j) {
            const SpherePoint x = random_sphere_point(rng);
            if (std::abs(d.signed_chart_margin(x)) < 1e-6) continue;
            EXPECT_EQ(d.contains(x), k.contains(x.lift()));
        }
        const Disc back = k.to_disc();
        EXPECT_NEAR(std::abs(back.center - d.center), 0.0, 1e-9 * (1 + std::abs(d.center)));
        EXPECT_NEAR(back.radius, d.radius, 1e-9 * (1 + d.radius));
        EXPECT_EQ(back.side, d.side);
    }
}

TEST(Sphere, ImageDiscMatchesPointImages) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.05, 2.0);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        const MobiusMap m = random_mobius(rng);
        const Disc d(random_complex(rng, 1), u(rng));
        Disc img;
        try {
            img = image_disc(m, d);
        } catch (const DegenerateImageError&) {
            continue;
        }
        ++checked;
        // Boundary maps to boundary.
        for (int j = 0; j < 16; ++j) {
            const SpherePoint b = m(d.boundary_point(j / 16.0));
            const Cap k = img.to_cap();
            EXPECT_NEAR(angle_between(k.center, b.lift()), k.angle, 1e-8);
        }
        // The center witness maps inside.
        EXPECT_TRUE(img.contains(m(d.center)));
    }
    EXPECT_GT(checked, 250);
}

TEST(Sphere, ImageDiscDegenerate) {
    const MobiusMap inv(Complex(0), Complex(1), Complex(1), Complex(0));
    EXPECT_THROW(image_disc(inv, Disc(Complex(1), 1.0)), DegenerateImageError);
    // Pole inside: the image is an unbounded disc.
    EXPECT_EQ(image_disc(inv, Disc(Complex(0), 0.5)).side, Disc::Side::unbounded);
}

TEST(Sphere, SeparationAndContainment) {
    const Disc a(Complex(0), 0.2), b(Complex(1), 0.2), big(Complex(0), 0.5);
    const Separation s = disc_separation(a, b);
    EXPECT_GT(s.distance, 0);
    // Oracle: along the real axis the closest points are 0.2 and 0.8.
    EXPECT_NEAR(s.distance, lift_distance(Complex(0.2), Complex(0.8)), 1e-12);
    EXPECT_TRUE(disc_separation(a, big).nested);
    EXPECT_TRUE(disc_separation(Disc(Complex(0), 0.5), Disc(Complex(0.6), 0.5)).overlapping);
    EXPECT_GT(containment_margin(big, a), 0);
    EXPECT_LT(containment_margin(a, big), 0);
}

TEST(Sphere, ContractionMatchesAnalyticSup) {
    // z -> lambda z on |z| < r: chordal derivative peaks at |z| = r.
    const double lambda = 0.04, r = 0.2;
    const MobiusMap m = MobiusMap::loxodromic(Complex(0), SpherePoint::infinity(), Complex(lambda));
    const double analytic = lambda * (1 + r * r) / (1 + lambda * lambda * r * r);
    const auto est = contraction_factor(m, Disc(Complex(0), r), 20000);
    EXPECT_NEAR(est.factor, analytic, 1e-6);
    EXPECT_LE(est.factor, analytic + 1e-12);
}

TEST(Sphere, FibonacciCoverage) {
    const auto pts = fibonacci_points(2000);
    std::mt19937_64 rng(8);
    double worst = 0;
    for (int i = 0; i < 500; ++i) {
        const SpherePoint x = random_sphere_point(rng);
        double best = 10;
        for (const auto& p : pts) best = std::min(best, chordal_distance(x, p));
        worst = std::max(worst, best);
    }
    EXPECT_LT(worst, 0.1);
}

TEST(Sphere, PolygonContainsLikeDisc) {
    const Disc d(Complex(0.3, -0.2), 0.4);
    const Polygon poly = Polygon::from_disc(d, 256);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 2000; ++i) {
        const SpherePoint x = random_sphere_point(rng);
        if (std::abs(d.signed_chart_margin(x)) < 1e-3) continue;
        EXPECT_EQ(poly.contains(x), d.contains(x));
    }
}

TEST(Sphere, SlerpEndpoints) {
    const SpherePoint p(Complex(0.1, 0.2)), q(Complex(-1, 3));
    EXPECT_LT(chordal_distance(slerp(p, q, 0), p), 1e-14);
    EXPECT_LT(chordal_distance(slerp(p, q, 1), q), 1e-12);
    const SpherePoint m = slerp(p, q, 0.5);
    EXPECT_NEAR(chordal_distance(m, p), chordal_distance(m, q), 1e-12);
}
