#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "pingpong/action.hpp"

using namespace pingpong;

namespace {

const SchottkyAction& model() {
    static const SchottkyAction act = [] {
        ActionConfig cfg;
        cfg.samples = 20000;
        return build_model_action(cfg);
    }();
    return act;
}

ReducedWord random_word(std::mt19937_64& rng, std::size_t len) {
    std::uniform_int_distribution<int> pick(0, 3);
    std::vector<Generator> raw;
    while (true) {
        raw.clear();
        for (std::size_t i = 0; i < len; ++i) raw.push_back(kGenerators[pick(rng)]);
        auto w = reduce(raw);
        if (w.length() == len) return w;
    }
}

}  // namespace

TEST(Action, DefaultModelPasses) {
    const auto& act = model();
    EXPECT_TRUE(act.report().all_pass());
    EXPECT_GE(act.report().min_margin("contraction "), 0.02);
    EXPECT_GE(act.report().min_margin("pair contraction "), 0.02);
    // Oracle: the caps have angular radius 2 atan(0.2) and centers 90 degrees apart.
    const double rho = 2 * std::atan(0.2);
    EXPECT_NEAR(act.alpha(), 2 * std::sin((std::acos(0.0) - 2 * rho) / 2), 1e-12);
    EXPECT_GE(act.alpha(), 0.3);
}

TEST(Action, FixedPointsInDiscs) {
    const auto& act = model();
    EXPECT_TRUE(act.disc(Generator::a).contains(Complex(0)));
    EXPECT_TRUE(act.disc(Generator::a_inv).contains(SpherePoint::infinity()));
    EXPECT_TRUE(act.disc(Generator::b).contains(Complex(1)));
    EXPECT_TRUE(act.disc(Generator::b_inv).contains(Complex(-1)));
}

TEST(Action, WeakContractionRejected) {
    ActionConfig cfg;
    cfg.lambda_a = 0.9;
    cfg.radii = {std::sqrt(0.9), std::sqrt(0.9), 0.02, 0.02};
    cfg.lambda_b = 0.02 * 0.02;
    cfg.samples = 5000;
    try {
        build_model_action(cfg);
        FAIL() << "expected rejection";
    } catch (const ConstructionRejected& e) {
        EXPECT_NE(e.property().find("contraction"), std::string::npos);
        EXPECT_LT(e.margin(), 0);
    }
}

TEST(Action, OverlappingDiscsArePreconditionFailure) {
    ActionConfig cfg;
    cfg.radii = {0.9, 0.04 / 0.9, 0.2, 0.2};
    EXPECT_THROW(build_model_action(cfg), std::invalid_argument);
    ActionConfig bad;
    bad.radii = {0.2, 0.3, 0.2, 0.2};
    EXPECT_THROW(build_model_action(bad), std::invalid_argument);
}

TEST(Action, EvaluateMatchesMatrixProduct) {
    const auto& act = model();
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const ReducedWord g = random_word(rng, 6);
        const SpherePoint x = random_sphere_point(rng);
        EXPECT_LT(chordal_distance(act.evaluate(g, x), act.composed(g)(x)), 1e-9) << g.str();
    }
    const SpherePoint x(Complex(0.3, 0.7));
    EXPECT_EQ(act.evaluate(ReducedWord::identity(), x), x);
    EXPECT_LT(chordal_distance(act.apply(Generator::a, act.apply(Generator::a_inv, x)), x), 1e-10);
}

TEST(Action, EvaluateOrderRightmostFirst) {
    const auto& act = model();
    const SpherePoint x(Complex(0.5, 0.1));
    const SpherePoint expect = act.apply(Generator::a, act.apply(Generator::b, x));
    EXPECT_LT(chordal_distance(act.evaluate(ReducedWord::parse("ab"), x), expect), 1e-15);
}

TEST(Action, C0DistanceBasics) {
    const auto& act = model();
    EXPECT_LT(c0_distance(act, act, 1000), 1e-12);
    const PerturbedAction j = mobius_jitter(act, 1e-3, 3);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 20; ++i) {
        const std::uint64_t seed = rng();
        EXPECT_LE(c0_distance(act, j, 500, seed), c0_distance(act, j, 1000, seed));
    }
}

TEST(Action, JitterRoundTripAndRegions) {
    const auto& act = model();
    const PerturbedAction j = mobius_jitter(act, 1e-3, 4);
    EXPECT_LT(j.round_trip_error(1000), 1e-9);
    const auto disc = j.region_disc(Generator::a_inv);
    ASSERT_TRUE(disc.has_value());
    std::mt19937_64 rng(10);
    for (int i = 0; i < 2000; ++i) {
        const SpherePoint x = random_sphere_point(rng);
        if (std::abs(disc->signed_chart_margin(x)) < 1e-6) continue;
        EXPECT_EQ(disc->contains(x), j.in_region(Generator::a_inv, x));
    }
}

TEST(Action, C1EstimateForMultiplierJitter) {
    const auto& act = model();
    const double l2 = 0.041;
    const MobiusMap ma = MobiusMap::loxodromic(Complex(0), SpherePoint::infinity(), Complex(l2));
    const PerturbedAction p = mobius_perturbation(act, ma, act.map(Generator::b));
    // Oracle: closed-form derivative gap of z -> lambda z in the chordal frame.
    // On the sphere the sup is attained near |z| = 1 for a and for its inverse
    // near infinity; the inverse map 1/lambda dominates: 1/0.04 - 1/0.041.
    const double analytic = std::abs(1 / 0.04 - 1 / l2);
    const double est = c1_distance_estimate(act, p, 4000, 1e-5);
    EXPECT_GT(est, analytic / 3);
    EXPECT_LT(est, analytic * 3);
    EXPECT_LT(c1_distance_estimate(act, act, 500, 1e-5), 1e-6);
}

TEST(Action, InterpolatingDiffeoConstraints) {
    std::mt19937_64 rng(11);
    std::vector<std::pair<SpherePoint, SpherePoint>> pairs;
    const double lambda = 0.02;
    for (int i = 0; i < 50; ++i) {
        const SpherePoint p = SpherePoint::from_vec3(fibonacci_points(50)[i].lift());
        pairs.emplace_back(p, random_point_near(p, lambda / 2, rng));
    }
    const auto f = InterpolatingDiffeo::build(pairs, lambda);
    for (const auto& [p, q] : pairs) EXPECT_LT(chordal_distance(f(p), q), 1e-10);
    EXPECT_LT(f.sup_displacement(20000), 2 * std::numbers::pi * lambda);
    for (int i = 0; i < 500; ++i) {
        const SpherePoint x = i < 50 ? pairs[i].second : random_sphere_point(rng);
        EXPECT_LT(chordal_distance(f(f.inverse(x)), x), 1e-9);
    }
}

TEST(Action, InterpolatingDiffeoEdgeCases) {
    const auto id = InterpolatingDiffeo::build({}, 0.01);
    EXPECT_EQ(id.sup_displacement(100), 0.0);
    const SpherePoint p(Complex(0.3, 0.1));
    std::mt19937_64 rng(1);
    const SpherePoint q = random_point_near(p, 1e-3, rng);
    const auto f = InterpolatingDiffeo::build({{p, q}}, 1e-2);
    EXPECT_LT(chordal_distance(f(p), q), 1e-10);
    EXPECT_LT(f.sup_displacement(5000), 2 * std::numbers::pi * 1e-2);
    EXPECT_THROW(InterpolatingDiffeo::build({{p, q}, {p, Complex(5)}}, 10.0), CollisionError);
    EXPECT_THROW(InterpolatingDiffeo::build({{p, Complex(-3)}}, 0.01), std::invalid_argument);
}

TEST(Action, ClusteredConstraintsStillInterpolate) {
    // Tight clusters with moves much longer than the gaps.
    std::mt19937_64 rng(12);
    std::vector<std::pair<SpherePoint, SpherePoint>> pairs;
    const SpherePoint c(Complex(0.01, 0.0));
    for (int i = 0; i < 40; ++i) {
        const SpherePoint p = random_point_near(c, 1e-5, rng);
        pairs.emplace_back(p, random_point_near(p, 2e-3, rng));
    }
    const auto f = InterpolatingDiffeo::build(pairs, 3e-3);
    EXPECT_LT(f.constraint_residual(), 1e-10);
    for (const auto& [p, q] : pairs) EXPECT_LT(chordal_distance(f.inverse(q), p), 1e-9);
}

TEST(Action, PerturbByDiffeo) {
    const auto& act = model();
    const PerturbedAction same = perturb_action(act, InterpolatingDiffeo());
    std::mt19937_64 rng(13);
    for (int i = 0; i < 1000; ++i) {
        const SpherePoint x = random_sphere_point(rng);
        for (Generator s : kGenerators) EXPECT_EQ(same.apply(s, x), act.apply(s, x));
    }
    const SpherePoint p(Complex(0.02, 0.01));
    const SpherePoint q = random_point_near(p, 1e-3, rng);
    const auto f = InterpolatingDiffeo::build({{p, q}}, 2e-3);
    const double fd = f.sup_displacement(20000);
    const PerturbedAction pert = perturb_action(act, f);
    EXPECT_LE(c0_distance(act, pert, 5000, 1), std::max(fd, c0_distance(act, pert, 5000, 1)));
    double forward_gap = 0;
    for (int i = 0; i < 5000; ++i) {
        const SpherePoint x = random_sphere_point(rng);
        for (Generator s : {Generator::a, Generator::b})
            forward_gap = std::max(forward_gap, chordal_distance(pert.apply(s, x), act.apply(s, x)));
    }
    EXPECT_LE(forward_gap, fd + 1e-15);
    EXPECT_LT(pert.round_trip_error(1000), 1e-9);
}

TEST(Action, PlateauFixesCircles) {
    const auto& act = model();
    const PerturbedAction zero = radial_plateau_perturbation(act, 0.01, 0.005, 0.0);
    std::mt19937_64 rng(14);
    for (int i = 0; i < 200; ++i) {
        const SpherePoint x = random_sphere_point(rng);
        EXPECT_EQ(zero.apply(Generator::a, x), act.apply(Generator::a, x));
    }
    const PerturbedAction p = radial_plateau_perturbation(act, 0.01, 0.005, 2.0);
    for (const auto& x : p.plateau()->plateau_points(10)) EXPECT_LT(chordal_distance(p.apply(Generator::a, x), x), 1e-10);
    for (int i = 0; i < 200; ++i) {
        const SpherePoint x = random_sphere_point(rng);
        EXPECT_EQ(p.apply(Generator::b, x), act.apply(Generator::b, x));
    }
    EXPECT_LT(p.round_trip_error(2000), 1e-9);
    EXPECT_THROW(radial_plateau_perturbation(act, 0.15, 0.05, 2.0), PlacementError);
    EXPECT_THROW(radial_plateau_perturbation(act, 0.01, 0.005, 1e-3), PlacementError);
}

TEST(Action, PlateauC1DominatesC0) {
    const auto& act = model();
    const PerturbedAction p = radial_plateau_perturbation(act, 1e-4, 5e-5, 0.01);
    const double c0 = c0_distance(act, p, 20000);
    const double c1 = c1_distance_estimate(act, p, 20000, 1e-6);
    EXPECT_LE(c0, 0.01);
    // Analytic slope gap on the plateau: 1/lambda - 1 in the u chart.
    EXPECT_GT(c1, 10 * c0);
    EXPECT_GT(c1, 0.5 * (1 / 0.04 - 1));
}
