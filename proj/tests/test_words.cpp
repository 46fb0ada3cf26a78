#include <gtest/gtest.h>

#include <random>
#include <set>

#include "pingpong/words.hpp"

using namespace pingpong;

namespace {

// Oracle: naive reduction by repeated scanning, independent of the stack pass.
std::string naive_reduce(std::string w) {
    auto cancels = [](char x, char y) { return x != y && std::tolower(x) == std::tolower(y); };
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i + 1 < w.size(); ++i)
            if (cancels(w[i], w[i + 1])) {
                w.erase(i, 2);
                changed = true;
                break;
            }
    }
    return w.empty() ? "e" : w;
}

std::string random_raw(std::mt19937_64& rng, std::size_t max_len) {
    static const char letters[] = "aAbB";
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<int> pick(0, 3);
    std::string s;
    for (std::size_t i = len(rng); i > 0; --i) s.push_back(letters[pick(rng)]);
    return s;
}

}  // namespace

TEST(Words, ParseAndPrint) {
    EXPECT_EQ(ReducedWord::parse("e").str(), "e");
    EXPECT_EQ(ReducedWord::parse("abAB").str(), "abAB");
    EXPECT_EQ(ReducedWord::parse("aA").str(), "e");
    EXPECT_EQ(ReducedWord::parse("abBa").str(), "aa");
    EXPECT_THROW(ReducedWord::parse("abx"), std::invalid_argument);
}

TEST(Words, ReductionMatchesNaiveOracle) {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 2000; ++i) {
        const std::string raw = random_raw(rng, 20);
        EXPECT_EQ(ReducedWord::parse(raw).str(), naive_reduce(raw)) << raw;
    }
}

TEST(Words, MultiplyAndInverse) {
    const auto ab = ReducedWord::parse("ab");
    const auto bA = ReducedWord::parse("BA");
    EXPECT_TRUE(multiply(ab, bA).is_identity());
    EXPECT_EQ(inverse(ab), bA);
    EXPECT_EQ(multiply(ReducedWord::parse("aab"), ReducedWord::parse("Ba")).str(), "aaa");
}

TEST(Words, GroupLawsOnRandomWords) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i) {
        const auto x = ReducedWord::parse(random_raw(rng, 10));
        const auto y = ReducedWord::parse(random_raw(rng, 10));
        const auto z = ReducedWord::parse(random_raw(rng, 10));
        EXPECT_EQ(multiply(multiply(x, y), z), multiply(x, multiply(y, z)));
        EXPECT_TRUE(multiply(x, inverse(x)).is_identity());
        EXPECT_TRUE(multiply(inverse(x), x).is_identity());
        EXPECT_EQ(inverse(inverse(x)), x);
        EXPECT_EQ(inverse(multiply(x, y)), multiply(inverse(y), inverse(x)));
    }
}

TEST(Words, BallSizes) {
    std::size_t expected = 1;
    for (std::size_t n = 0; n <= 8; ++n) {
        const auto b = ball(n);
        EXPECT_EQ(b.size(), 2 * expected - 1);
        EXPECT_EQ(b.size(), ball_size(n));
        expected *= 3;
    }
}

TEST(Words, BallIsShortlexSortedAndDistinct) {
    const auto b = ball(5);
    for (std::size_t i = 1; i < b.size(); ++i) EXPECT_LT(b[i - 1], b[i]);
    std::set<std::string> seen;
    for (const auto& g : b) seen.insert(g.str());
    EXPECT_EQ(seen.size(), b.size());
}

TEST(Words, BallMatchesBruteForce) {
    // All raw strings up to length 4, reduced, give exactly the ball of radius 4.
    std::set<std::string> brute{"e"};
    std::vector<std::string> frontier{""};
    for (int len = 1; len <= 4; ++len) {
        std::vector<std::string> next;
        for (const auto& w : frontier)
            for (char c : std::string("aAbB")) next.push_back(w + c);
        for (const auto& w : next) brute.insert(naive_reduce(w));
        frontier = next;
    }
    std::set<std::string> mine;
    for (const auto& g : ball(4)) mine.insert(g.str());
    EXPECT_EQ(mine, brute);
}

TEST(Words, SphereWordsAreExactLength) {
    for (std::size_t n = 1; n <= 6; ++n) {
        const auto s = sphere_words(n);
        EXPECT_EQ(s.size(), 4 * static_cast<std::size_t>(std::pow(3, n - 1)));
        for (const auto& g : s) EXPECT_EQ(g.length(), n);
    }
}

TEST(Words, ResourceLimit) { EXPECT_THROW(ball(13), ResourceLimitError); }

TEST(Words, BallIndexParents) {
    BallIndex idx(4);
    for (std::size_t i = 1; i < idx.size(); ++i)
        EXPECT_EQ(idx.words[i], idx.words[idx.parent[i]].prepend(idx.first_letter[i]));
    EXPECT_FALSE(idx.contains(ReducedWord::parse("aaaaa")));
    EXPECT_TRUE(idx.contains(ReducedWord::parse("abAB")));
}

TEST(Words, PrependRejectsCancellation) {
    EXPECT_THROW(ReducedWord::parse("a").prepend(Generator::a_inv), std::invalid_argument);
    EXPECT_EQ(left_extensions(ReducedWord::parse("a")).size(), 3u);
    EXPECT_EQ(left_extensions(ReducedWord::identity()).size(), 4u);
}
