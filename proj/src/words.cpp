#include "pingpong/words.hpp"

#include <algorithm>

namespace pingpong {

char to_char(Generator s) noexcept {
    switch (s) {
    case Generator::a: return 'a';
    case Generator::a_inv: return 'A';
    case Generator::b: return 'b';
    case Generator::b_inv: return 'B';
    }
    return '?';
}

Generator generator_from_char(char c) {
    switch (c) {
    case 'a': return Generator::a;
    case 'A': return Generator::a_inv;
    case 'b': return Generator::b;
    case 'B': return Generator::b_inv;
    default: throw std::invalid_argument(std::string("not a generator letter: '") + c + "'");
    }
}

ReducedWord ReducedWord::parse(std::string_view text) {
    if (text == "e" || text.empty()) return {};
    std::vector<Generator> raw;
    raw.reserve(text.size());
    for (char c : text) raw.push_back(generator_from_char(c));
    return reduce(raw);
}

ReducedWord ReducedWord::prepend(Generator s) const {
    if (!letters_.empty() && letters_.front() == inv(s))
        throw std::invalid_argument("prepend would cancel; use multiply");
    std::vector<Generator> out;
    out.reserve(letters_.size() + 1);
    out.push_back(s);
    out.insert(out.end(), letters_.begin(), letters_.end());
    return ReducedWord(std::move(out));
}

ReducedWord ReducedWord::tail() const {
    if (letters_.empty()) return {};
    return ReducedWord(std::vector<Generator>(letters_.begin() + 1, letters_.end()));
}

ReducedWord ReducedWord::prefix(std::size_t n) const {
    n = std::min(n, letters_.size());
    return ReducedWord(std::vector<Generator>(letters_.begin(), letters_.begin() + static_cast<std::ptrdiff_t>(n)));
}

ReducedWord ReducedWord::suffix_from(std::size_t pos) const {
    pos = std::min(pos, letters_.size());
    return ReducedWord(std::vector<Generator>(letters_.begin() + static_cast<std::ptrdiff_t>(pos), letters_.end()));
}

std::string ReducedWord::str() const {
    if (letters_.empty()) return "e";
    std::string out;
    out.reserve(letters_.size());
    for (Generator s : letters_) out.push_back(to_char(s));
    return out;
}

std::strong_ordering operator<=>(const ReducedWord& x, const ReducedWord& y) {
    if (auto c = x.length() <=> y.length(); c != 0) return c;
    return std::lexicographical_compare_three_way(x.letters_.begin(), x.letters_.end(), y.letters_.begin(),
                                                  y.letters_.end());
}

ReducedWord reduce(std::span<const Generator> raw) {
    std::vector<Generator> stack;
    stack.reserve(raw.size());
    for (Generator s : raw) {
        if (!stack.empty() && stack.back() == inv(s))
            stack.pop_back();
        else
            stack.push_back(s);
    }
    return ReducedWord(std::move(stack));
}

ReducedWord multiply(const ReducedWord& g1, const ReducedWord& g2) {
    std::vector<Generator> raw(g1.letters().begin(), g1.letters().end());
    raw.insert(raw.end(), g2.letters().begin(), g2.letters().end());
    return reduce(raw);
}

ReducedWord inverse(const ReducedWord& g) {
    std::vector<Generator> raw;
    raw.reserve(g.length());
    for (auto it = g.letters().rbegin(); it != g.letters().rend(); ++it) raw.push_back(inv(*it));
    return reduce(raw);
}

std::size_t common_prefix_length(std::span<const Generator> x, std::span<const Generator> y) {
    std::size_t k = 0;
    while (k < x.size() && k < y.size() && x[k] == y[k]) ++k;
    return k;
}

std::size_t ball_size(std::size_t n) {
    std::size_t p = 1;
    for (std::size_t i = 0; i < n; ++i) p *= 3;
    return 2 * p - 1;
}

ReducedWord random_reduced_word(std::mt19937_64& rng, std::size_t length) {
    std::vector<Generator> out;
    out.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
        if (out.empty()) {
            out.push_back(kGenerators[rng() % 4]);
            continue;
        }
        // Three choices avoid cancelling the previous letter.
        const auto k = static_cast<std::uint8_t>((static_cast<std::uint8_t>(inv(out.back())) + 1 + rng() % 3) % 4);
        out.push_back(static_cast<Generator>(k));
    }
    return reduce(out);
}

namespace {

void check_radius(std::size_t n, std::size_t max_radius) {
    if (n > max_radius)
        throw ResourceLimitError("ball radius " + std::to_string(n) + " exceeds maximum " +
                                 std::to_string(max_radius));
}

// Next shell from a shortlex-sorted shell.  Iterating s in letter order and
// g in shell order keeps the output shortlex-sorted.
std::vector<ReducedWord> next_shell(const std::vector<ReducedWord>& shell) {
    std::vector<ReducedWord> out;
    out.reserve(shell.size() * 3 + 1);
    for (Generator s : kGenerators)
        for (const auto& g : shell)
            if (g.is_identity() || g.first() != inv(s)) out.push_back(g.prepend(s));
    return out;
}

}  // namespace

std::vector<ReducedWord> ball(std::size_t n, std::size_t max_radius) {
    check_radius(n, max_radius);
    std::vector<ReducedWord> out;
    out.reserve(ball_size(n));
    std::vector<ReducedWord> shell{ReducedWord::identity()};
    out.push_back(shell.front());
    for (std::size_t k = 1; k <= n; ++k) {
        shell = next_shell(shell);
        out.insert(out.end(), shell.begin(), shell.end());
    }
    return out;
}

std::vector<ReducedWord> sphere_words(std::size_t n, std::size_t max_radius) {
    check_radius(n, max_radius);
    std::vector<ReducedWord> shell{ReducedWord::identity()};
    for (std::size_t k = 1; k <= n; ++k) shell = next_shell(shell);
    return shell;
}

std::vector<ReducedWord> left_extensions(const ReducedWord& g) {
    std::vector<ReducedWord> out;
    for (Generator s : kGenerators)
        if (g.is_identity() || g.first() != inv(s)) out.push_back(g.prepend(s));
    return out;
}

BallIndex::BallIndex(std::size_t n) : words(ball(n)), radius_(n) {
    parent.assign(words.size(), 0);
    first_letter.assign(words.size(), Generator::a);
    lookup_.reserve(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) lookup_.emplace(words[i], i);
    for (std::size_t i = 1; i < words.size(); ++i) {
        parent[i] = lookup_.at(words[i].tail());
        first_letter[i] = words[i].first();
    }
}

std::size_t BallIndex::find(const ReducedWord& g) const {
    if (g.length() > radius_) return words.size();
    auto it = lookup_.find(g);
    return it == lookup_.end() ? words.size() : it->second;
}

}  // namespace pingpong

std::size_t std::hash<pingpong::ReducedWord>::operator()(const pingpong::ReducedWord& g) const noexcept {
    std::size_t h = 1469598103934665603ULL ^ g.length();
    for (auto s : g.letters()) {
        h ^= static_cast<std::size_t>(s) + 1;
        h *= 1099511628211ULL;
    }
    return h;
}
