#include <gtest/gtest.h>

#include <random>

#include "pingpong/semiconj.hpp"

using namespace pingpong;

namespace {

const SchottkyAction& model() {
    static const SchottkyAction act = [] {
        ActionConfig cfg;
        cfg.samples = 5000;
        return build_model_action(cfg);
    }();
    return act;
}

StabilityOptions quick() {
    StabilityOptions o;
    o.samples = 20000;
    o.diameter_depth = 4;
    return o;
}

StabilityBudget standard_budget() {
    const double eps = model().alpha() / 10;
    return StabilityBudget::for_action(model(), eps, eps / 2);
}

PerturbedAction identity_perturbation() {
    return mobius_perturbation(model(), model().map(Generator::a), model().map(Generator::b));
}

const JitterCalibration& calibration() {
    static const JitterCalibration c = calibrate_jitter(model(), standard_budget(), 4, 12, quick());
    return c;
}

}  // namespace

TEST(Semiconj, BudgetInvariants) {
    const double a = model().alpha();
    EXPECT_THROW(StabilityBudget(a / 8, a / 16, a), std::invalid_argument);
    EXPECT_THROW(StabilityBudget(a / 10, a / 10, a), std::invalid_argument);
    EXPECT_THROW(StabilityBudget(a / 10, 0, a), std::invalid_argument);
    EXPECT_NO_THROW(StabilityBudget(a / 10, a / 20, a));
}

TEST(Semiconj, ZeroPerturbationPassesWithModelMargins) {
    const auto rep = verify_stability_neighborhood(model(), identity_perturbation(), standard_budget(), quick());
    EXPECT_TRUE(rep.all_pass()) << rep.first_failure()->property;
    EXPECT_EQ(rep.find("0 c0 distance")->lhs, 0.0);
    EXPECT_LT(rep.find("4 a~^-1 a near id")->lhs, 1e-12);
}

TEST(Semiconj, ZeroPerturbationGivesIdentity) {
    const auto pert = identity_perturbation();
    FundamentalOptions fo;
    fo.checklist = quick();
    FundamentalReport fr;
    const auto sc = build_fundamental_h(model(), pert, standard_budget(), fo, &fr);
    EXPECT_LT(fr.sup_displacement, 1e-12);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        const auto x = random_sphere_point(rng);
        if (sc.classify(x).kind == Classification::Kind::limit) continue;
        EXPECT_LT(chordal_distance(sc(x), x), 1e-10);
    }
    const auto rep = verify_semiconjugacy(sc, 1400, 6, 5, 20000);
    EXPECT_LT(rep.equivariance_residual, 1e-10);
    EXPECT_TRUE(extension_injectivity_probe(sc, 50).injective);
}

TEST(Semiconj, JitterCalibrationPassesChecklist) {
    const auto& c = calibration();
    EXPECT_GT(c.sigma, 0.0);
    EXPECT_TRUE(c.checklist.all_pass());
    // Twice the calibrated size leaves the neighbourhood.
    const auto rep =
        verify_stability_neighborhood(model(), mobius_jitter(model(), 2 * c.sigma, 4), standard_budget(), quick());
    EXPECT_FALSE(rep.all_pass());
}

TEST(Semiconj, JitterSemiconjugacy) {
    const auto pert = mobius_jitter(model(), calibration().sigma, 4);
    FundamentalOptions fo;
    fo.checklist = quick();
    FundamentalReport fr;
    const auto sc = build_fundamental_h(model(), pert, standard_budget(), fo, &fr);
    EXPECT_LT(fr.boundary_rule_residual, 1e-9);
    EXPECT_LT(fr.identity_residual, 1e-12);
    EXPECT_LT(fr.sup_displacement, standard_budget().epsilon);

    // Direct two-sided evaluation of the boundary rule.
    for (Generator s : {Generator::a, Generator::b})
        for (int i = 0; i < 256; ++i) {
            const auto x = model().disc(s).boundary_point(i / 256.0);
            const auto lhs = sc.chart(pert.apply(inv(s), x));
            const auto rhs = model().apply(inv(s), x);
            EXPECT_LT(chordal_distance(lhs, rhs), 1e-9);
        }

    const auto rep = verify_semiconjugacy(sc, 7000, 6, 8, 20000);
    EXPECT_LT(rep.equivariance_residual, 1e-6);
    EXPECT_LT(rep.sup_displacement, standard_budget().epsilon);
    EXPECT_TRUE(rep.surjective);
    for (auto n : rep.samples_per_depth) EXPECT_GT(n, 900u);
    EXPECT_TRUE(extension_injectivity_probe(sc).injective);
}

TEST(Semiconj, CollarIdentityAndDepthCap) {
    const auto pert = mobius_jitter(model(), calibration().sigma, 4);
    FundamentalOptions fo;
    fo.checklist = quick();
    const auto sc = build_fundamental_h(model(), pert, standard_budget(), fo);
    const ReducedWord w = ReducedWord::parse("abA");
    const SpherePoint home(Complex(0.3, 2.0));
    ASSERT_FALSE(pert.region_of(home));
    const auto x = pert.evaluate(w, home);
    ASSERT_TRUE(in_collar(pert, w, x));
    const auto g = minimal_escape_word(pert, w);
    EXPECT_EQ(g, ReducedWord::parse("aBA"));
    const auto rhs = model().evaluate(inverse(g), sc.chart(pert.evaluate(g, x)));
    EXPECT_LT(chordal_distance(sc(x), rhs), 1e-9);
    EXPECT_LT(chordal_distance(sc(x), x), standard_budget().epsilon);

    // Deep point: table value of its code.
    std::mt19937_64 rng(2);
    const ReducedWord deep = random_reduced_word(rng, sc.depth_cap());
    const auto y = pert.evaluate(deep, pert.apply(deep.last(), home));
    const auto c = sc.classify(y);
    ASSERT_EQ(c.kind, Classification::Kind::limit);
    const auto oracle = point_from_code(model(), CantorPointCode::from_word(deep, kCodeDepth));
    const double diam = component_disc(model(), deep.letters()).chordal_diameter();
    EXPECT_LE(chordal_distance(sc(y), oracle), diam + 1e-12);
}

TEST(Semiconj, EscapeWordsByBruteForce) {
    const auto pert = mobius_jitter(model(), calibration().sigma, 4);
    EXPECT_EQ(minimal_escape_word(pert, ReducedWord::parse("a")), ReducedWord::parse("A"));
    EXPECT_EQ(minimal_escape_word(pert, ReducedWord::parse("aba")).length(), 3u);
    std::mt19937_64 rng(6);
    for (std::size_t n = 0; n <= 3; ++n) {
        const auto words = ball(n + 2);
        for (const auto& w : sphere_words(n + 1)) {
            const auto x = sample_collar(pert, w, rng);
            ASSERT_TRUE(x);
            std::vector<ReducedWord> hits;
            for (const auto& g : words) {
                if (!pert.region_of(pert.evaluate(g, *x))) hits.push_back(g);
            }
            ASSERT_EQ(hits.size(), 1u) << w.str();
            EXPECT_EQ(hits.front(), minimal_escape_word(pert, w, 2));
        }
    }
}

TEST(Semiconj, InterpolatingDiffeoAtHalfDelta) {
    const auto budget = standard_budget();
    const SpherePoint p(Complex(0.0, 2.0));
    const Cap c = Cap::around(p, budget.delta / 2);
    // Target at chordal distance delta/2 from p.
    const Vec3 axis = c.center.cross(Vec3{1, 0, 0}).normalized();
    const SpherePoint q = SpherePoint::from_vec3(rotate(c.center, axis, 2 * std::asin(budget.delta / 4)));
    ASSERT_NEAR(chordal_distance(p, q), budget.delta / 2, 1e-12);
    const auto f = InterpolatingDiffeo::build({{p, q}}, budget.delta / 2 * 1.0001);
    const auto pert = perturb_action(model(), f);
    const auto rep = verify_stability_neighborhood(model(), pert, budget, quick());
    EXPECT_TRUE(rep.all_pass()) << rep.first_failure()->property;
}

TEST(Semiconj, PlateauCollapses) {
    const auto pert = radial_plateau_perturbation(model(), 0.01, 0.005, 2.0);
    const StabilityBudget budget = StabilityBudget::for_action(model(), 1e-4, 5e-5);
    StabilityOptions opt = quick();
    opt.diameter_depth = 3;
    const auto rep = verify_stability_neighborhood(model(), pert, budget, opt);
    EXPECT_FALSE(rep.find("3 component diameter")->pass);
    EXPECT_GT(rep.min_margin("1 "), 0.0);
    EXPECT_GT(rep.min_margin("2 "), 0.0);

    FundamentalOptions fo;
    fo.checklist = opt;
    EXPECT_THROW(build_fundamental_h(model(), pert, budget, fo), ConstructionRejected);
    fo.require_checklist = false;
    const auto sc = build_fundamental_h(model(), pert, budget, fo);
    const auto pts = pert.plateau()->plateau_points(64);
    const auto h0 = sc(pts.front());
    double spread = 0, src = 0;
    for (const auto& x : pts) {
        spread = std::max(spread, chordal_distance(sc(x), h0));
        src = std::max(src, chordal_distance(x, pts.front()));
    }
    EXPECT_LT(spread, 1e-6);
    EXPECT_GT(src, 0.4 * 0.005);
    const auto v = extension_injectivity_probe(sc, 50);
    EXPECT_FALSE(v.injective);
    EXPECT_EQ(v.label(), "collapsing");
    ASSERT_FALSE(v.witnesses.empty());
    bool plateau_witness = false;
    for (const auto& w : v.witnesses)
        plateau_witness |= w.code == reduce(std::vector<Generator>(sc.depth_cap(), Generator::a_inv));
    EXPECT_TRUE(plateau_witness);
}
