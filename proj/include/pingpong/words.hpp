#pragma once

// Exact combinatorics of the free group F2 = <a, b>: reduced words,
// multiplication, inversion and Cayley-ball enumeration.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pingpong {

/// Symmetric generator set S = {a, a^-1, b, b^-1}.  The enumerator order is
/// the canonical letter order used for every enumeration and tie-break.
enum class Generator : std::uint8_t { a = 0, a_inv = 1, b = 2, b_inv = 3 };

inline constexpr std::array<Generator, 4> kGenerators = {Generator::a, Generator::a_inv, Generator::b,
                                                         Generator::b_inv};

constexpr Generator inv(Generator s) noexcept {
    return static_cast<Generator>(static_cast<std::uint8_t>(s) ^ 1U);
}

constexpr std::size_t index(Generator s) noexcept { return static_cast<std::size_t>(s); }

/// True for a and b (the generators whose maps are defined directly).
constexpr bool is_positive(Generator s) noexcept { return s == Generator::a || s == Generator::b; }

char to_char(Generator s) noexcept;
Generator generator_from_char(char c);

class ResourceLimitError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An element of F2 in normal form.  Letters are stored in written order:
/// letters()[0] is the leftmost letter, i.e. the generator applied last.
class ReducedWord {
  public:
    ReducedWord() = default;

    static ReducedWord identity() { return {}; }
    static ReducedWord letter(Generator s) { return ReducedWord(std::vector<Generator>{s}); }

    /// Parses "e" or a string over {a, A, b, B}; the input is freely reduced.
    static ReducedWord parse(std::string_view text);

    std::size_t length() const noexcept { return letters_.size(); }
    bool is_identity() const noexcept { return letters_.empty(); }
    std::span<const Generator> letters() const noexcept { return letters_; }
    Generator first() const { return letters_.front(); }
    Generator last() const { return letters_.back(); }
    Generator operator[](std::size_t i) const { return letters_[i]; }

    /// s * this; requires the product to be reduced (s != inv(first())).
    ReducedWord prepend(Generator s) const;

    /// this with the leftmost letter removed (the parent in the Cayley tree).
    ReducedWord tail() const;

    /// Prefix and suffix of written letters.
    ReducedWord prefix(std::size_t n) const;
    ReducedWord suffix_from(std::size_t pos) const;

    std::string str() const;

    friend bool operator==(const ReducedWord&, const ReducedWord&) = default;
    /// Shortlex order: by length, then lexicographic over a < A < b < B.
    friend std::strong_ordering operator<=>(const ReducedWord& x, const ReducedWord& y);

  private:
    explicit ReducedWord(std::vector<Generator> letters) : letters_(std::move(letters)) {}
    friend ReducedWord reduce(std::span<const Generator> raw);

    std::vector<Generator> letters_;
};

/// Free reduction by a single stack pass.
ReducedWord reduce(std::span<const Generator> raw);
inline ReducedWord reduce(std::initializer_list<Generator> raw) {
    return reduce(std::span<const Generator>(raw.begin(), raw.size()));
}

ReducedWord multiply(const ReducedWord& g1, const ReducedWord& g2);
ReducedWord inverse(const ReducedWord& g);

/// Longest common prefix length of two letter sequences.
std::size_t common_prefix_length(std::span<const Generator> x, std::span<const Generator> y);

inline constexpr std::size_t kDefaultMaxBallRadius = 12;

/// All reduced words with length <= n in shortlex order, built by left
/// extension from e.  Size is 2 * 3^n - 1.
std::vector<ReducedWord> ball(std::size_t n, std::size_t max_radius = kDefaultMaxBallRadius);

/// Reduced words of length exactly n, shortlex order.
std::vector<ReducedWord> sphere_words(std::size_t n, std::size_t max_radius = kDefaultMaxBallRadius);

/// All s * g with |s * g| = |g| + 1, in letter order of s.
std::vector<ReducedWord> left_extensions(const ReducedWord& g);

std::size_t ball_size(std::size_t n);

/// Uniform reduced word of exactly the given length.
ReducedWord random_reduced_word(std::mt19937_64& rng, std::size_t length);

}  // namespace pingpong

template <>
struct std::hash<pingpong::ReducedWord> {
    std::size_t operator()(const pingpong::ReducedWord& g) const noexcept;
};

namespace pingpong {

/// The Cayley ball with parent links, for breadth-first orbit evaluation:
/// words[i] = first_letter[i] * words[parent[i]] for i > 0.
struct BallIndex {
    std::vector<ReducedWord> words;
    std::vector<std::size_t> parent;
    std::vector<Generator> first_letter;

    explicit BallIndex(std::size_t n);
    std::size_t radius() const noexcept { return radius_; }
    std::size_t size() const noexcept { return words.size(); }
    /// Index of g, or size() when g lies outside the ball.
    std::size_t find(const ReducedWord& g) const;
    bool contains(const ReducedWord& g) const { return find(g) != size(); }

  private:
    std::size_t radius_;
    std::unordered_map<ReducedWord, std::size_t> lookup_;
};

}  // namespace pingpong
