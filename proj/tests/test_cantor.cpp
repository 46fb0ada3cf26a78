#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "pingpong/cantor.hpp"

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

CantorPointCode random_code(std::mt19937_64& rng, std::size_t len) {
    std::uniform_int_distribution<int> pick(0, 3);
    CantorPointCode c;
    while (c.letters.size() < len) {
        const Generator s = kGenerators[pick(rng)];
        if (!c.letters.empty() && c.letters.back() == inv(s)) continue;
        c.letters.push_back(s);
    }
    return c;
}

}  // namespace

TEST(Cantor, LevelZeroIsTheFourDiscs) {
    const auto a0 = approximant(model(), 0);
    ASSERT_EQ(a0.components.size(), 4u);
    for (const auto& c : a0.components) {
        ASSERT_TRUE(c.disc);
        const Disc& d = model().disc(c.code.first());
        EXPECT_EQ(c.disc->center, d.center);
        EXPECT_EQ(c.disc->radius, d.radius);
    }
    EXPECT_NEAR(a0.max_diameter, 2 * std::sin(2 * std::atan(0.2)), 1e-12);
}

TEST(Cantor, LevelOneComponentAb) {
    const auto a1 = approximant(model(), 1);
    EXPECT_EQ(a1.components.size(), 12u);
    const Component* ab = a1.find(ReducedWord::parse("ab"));
    ASSERT_NE(ab, nullptr);
    // Oracle: the disc is the image of I_b under z -> 0.04 z.
    const Disc& ib = model().disc(Generator::b);
    for (int k = 0; k < 8; ++k) {
        const SpherePoint img = Complex(0.04) * ib.boundary_point(k / 8.0).z();
        EXPECT_NEAR(std::abs(std::abs(img.z() - ab->disc->center) - ab->disc->radius), 0, 1e-12);
    }
    EXPECT_GT(containment_margin(model().disc(Generator::a), *ab->disc), 0);
}

TEST(Cantor, CountsAndMonotoneDiameters) {
    const auto tower = approximant_tower(model(), 8);
    std::size_t expected = 4;
    for (std::size_t n = 0; n <= 8; ++n) {
        EXPECT_EQ(tower[n].components.size(), expected);
        expected *= 3;
        if (n > 0) {
            EXPECT_LT(tower[n].max_diameter, tower[n - 1].max_diameter);
            EXPECT_LE(tower[n].max_diameter / tower[n - 1].max_diameter, 0.55);
            EXPECT_GT(tower[n].min_nesting_margin, 0);
        }
    }
}

TEST(Cantor, DepthThreePairwiseDisjoint) {
    const auto a3 = approximant(model(), 3);
    ASSERT_EQ(a3.components.size(), 108u);
    for (std::size_t i = 0; i < 108; ++i)
        for (std::size_t j = i + 1; j < 108; ++j)
            EXPECT_GT(disc_separation(*a3.components[i].disc, *a3.components[j].disc).distance, 0);
}

TEST(Cantor, LeftExtensionConsistency) {
    const auto a4 = approximant(model(), 4);
    const auto a3 = approximant(model(), 3);
    for (const auto& c : a3.components)
        for (Generator s : kGenerators) {
            if (c.code.first() == inv(s)) continue;
            const Disc img = image_disc(model().map(s), *c.disc);
            const Component* child = a4.find(c.code.prepend(s));
            ASSERT_NE(child, nullptr);
            const Cap k1 = img.to_cap(), k2 = child->disc->to_cap();
            EXPECT_LT(angle_between(k1.center, k2.center) + std::abs(k1.angle - k2.angle), 1e-9);
        }
}

TEST(Cantor, DepthCap) {
    EXPECT_THROW(approximant(model(), 11), ResourceLimitError);
    const PerturbedAction p = perturb_action(model(), InterpolatingDiffeo());
    EXPECT_THROW(approximant(p, 9), ResourceLimitError);
}

TEST(Cantor, FixedPointCodes) {
    const auto aaa = CantorPointCode::from_word(ReducedWord::parse("a"));
    EXPECT_LT(chordal_distance(point_from_code(model(), aaa, 20), Complex(0)), 1e-8);
    // Oracle: attracting eigenvector of the matrix of ab.
    const auto ab = CantorPointCode::periodic(ReducedWord::parse("ab"));
    const MobiusMap m = model().map(Generator::a) * model().map(Generator::b);
    const auto& e = m.entries();
    const Complex tr = e[0] + e[3];
    const Complex root = std::sqrt(tr * tr - 4.0);
    // Eigenvalues mu with |mu| large give the attracting fixed point.
    const Complex mu = std::abs((tr + root) / 2.0) > std::abs((tr - root) / 2.0) ? (tr + root) / 2.0 : (tr - root) / 2.0;
    const SpherePoint fix = (mu - e[3]) / e[2];
    EXPECT_LT(chordal_distance(point_from_code(model(), ab), fix), 1e-10);
}

TEST(Cantor, PointTowerIsNested) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        const auto c = random_code(rng, 12);
        for (std::size_t d = 1; d < 11; ++d) {
            const SpherePoint x = point_from_code(model(), c, d);
            EXPECT_TRUE(component_disc(model(), std::span(c.letters.data(), d)).contains(x));
        }
    }
}

TEST(Cantor, Expansivity) {
    const auto& act = model();
    auto c1 = CantorPointCode::from_word(ReducedWord::parse("abba"), 10);
    auto c2 = CantorPointCode::from_word(ReducedWord::parse("bab"), 10);
    auto r = expansivity_separation(act, c1, c2);
    EXPECT_TRUE(r.g.is_identity());
    EXPECT_GE(r.separation, act.alpha());
    // Common prefix of length 5.
    c1 = CantorPointCode::from_word(ReducedWord::parse("abABaa"), 12);
    c2 = CantorPointCode::from_word(ReducedWord::parse("abABab"), 12);
    r = expansivity_separation(act, c1, c2);
    EXPECT_EQ(r.g, inverse(ReducedWord::parse("abABa")));
    // Oracle: push the points themselves by g.
    const double direct = chordal_distance(act.evaluate(r.g, point_from_code(act, c1)),
                                           act.evaluate(r.g, point_from_code(act, c2)));
    EXPECT_NEAR(direct, r.separation, 1e-6);
    EXPECT_GE(direct, act.alpha());
    EXPECT_THROW(expansivity_separation(act, c1, c1), IndistinguishableError);
}

TEST(Cantor, Minimality) {
    const auto aaa = CantorPointCode::from_word(ReducedWord::parse("a"));
    auto rep = minimality_probe(model(), aaa, 2);
    EXPECT_TRUE(rep.minimal);
    EXPECT_EQ(rep.targets, 36u);
    EXPECT_EQ(rep.numeric_failures, 0u);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 10; ++t) {
        rep = minimality_probe(model(), random_code(rng, 40), 1);
        EXPECT_TRUE(rep.minimal);
        EXPECT_EQ(rep.numeric_failures, 0u);
    }
}

TEST(Cantor, PlateauIsNotCantor) {
    const PerturbedAction p = radial_plateau_perturbation(model(), 0.01, 0.005, 2.0);
    try {
        minimality_probe(p, CantorPointCode::from_word(ReducedWord::parse("a")), 2);
        FAIL() << "expected NonCantorError";
    } catch (const NonCantorError& e) {
        EXPECT_GT(e.ratio(), 0.9);
    }
}

TEST(Cantor, CollarImages) {
    const auto chk = collar_image_check(model(), 2, 3, 3, 5);
    EXPECT_GT(chk.cases, 0u);
    EXPECT_EQ(chk.symbolic_violations, 0u);
    EXPECT_EQ(chk.numeric_violations, 0u);
}

TEST(Cantor, EscapeWords) {
    EXPECT_EQ(escape_word(ReducedWord::parse("abA")), ReducedWord::parse("aBA"));
    const auto chk = escape_word_check(model(), 2, 6);
    EXPECT_EQ(chk.symbolic_violations, 0u);
    EXPECT_EQ(chk.numeric_violations, 0u);
}
