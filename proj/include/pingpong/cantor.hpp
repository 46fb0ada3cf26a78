#pragma once

// Approximants A_n, the symbolic coding of their components, points of the
// limit set, expansivity and minimality probes, and symbolic checks of the
// collar lemmas.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "pingpong/action.hpp"

namespace pingpong {

inline constexpr std::size_t kSchottkyDepthCap = 10;
inline constexpr std::size_t kPerturbedDepthCap = 8;
inline constexpr std::size_t kCodeDepth = 40;

/// Component C_w of A_n, w = s_1 ... s_{n+1}:
/// C_w = Phi_{s_1} o ... o Phi_{s_n} (I_{s_{n+1}}).
struct Component {
    ReducedWord code;
    std::optional<Disc> disc;  // exact for Mobius actions
    Polygon polygon;           // otherwise the image of the region boundary
    double diameter = 0;
    double nesting_margin = 0;  // inside the component of code.prefix(n); +inf at n = 0

    bool contains(const SpherePoint& x) const;
};

struct Approximant {
    std::size_t depth = 0;
    std::vector<Component> components;  // shortlex order of codes
    double max_diameter = 0;
    double min_nesting_margin = 0;

    const Component* find(const ReducedWord& code) const;

  private:
    friend std::vector<Approximant> approximant_tower(const Action&, std::size_t, std::size_t);
    std::unordered_map<ReducedWord, std::size_t> index_;
};

/// Levels 0..n.  Components are exact discs when every generator is Mobius
/// and every region is a disc, otherwise polygons with `vertices` points.
std::vector<Approximant> approximant_tower(const Action& act, std::size_t n, std::size_t vertices = 128);
Approximant approximant(const Action& act, std::size_t n, std::size_t vertices = 128);
double max_component_diameter(const Action& act, std::size_t n);

/// True when x lies in C_w: pulls x back by the prefix and tests the last region.
bool component_contains(const Action& act, const ReducedWord& code, const SpherePoint& x);

/// Exact disc of C_w for Mobius actions.
Disc component_disc(const Action& act, std::span<const Generator> code);

/// Right-infinite reduced code, truncated.
struct CantorPointCode {
    std::vector<Generator> letters;

    /// w followed by repetitions of its last letter.
    static CantorPointCode from_word(const ReducedWord& w, std::size_t depth = kCodeDepth);
    /// w w w ... (w cyclically reduced).
    static CantorPointCode periodic(const ReducedWord& w, std::size_t depth = kCodeDepth);
    ReducedWord prefix(std::size_t n) const;
    std::size_t size() const noexcept { return letters.size(); }
};

/// Center of the component coded by the first depth+1 letters.
SpherePoint point_from_code(const Action& act, const CantorPointCode& code, std::size_t depth);
inline SpherePoint point_from_code(const Action& act, const CantorPointCode& code) {
    return point_from_code(act, code, code.size() - 1);
}

class IndistinguishableError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ExpansivityResult {
    ReducedWord g;
    double separation = 0;
};

/// g = inverse of the common prefix; separation measured between the
/// shifted codes' points, which lie in different discs.
ExpansivityResult expansivity_separation(const Action& act, const CantorPointCode& c1, const CantorPointCode& c2);

class NonCantorError : public std::runtime_error {
  public:
    NonCantorError(const std::string& what, ReducedWord code, double ratio)
        : std::runtime_error(what), code_(std::move(code)), ratio_(ratio) {}
    const ReducedWord& code() const noexcept { return code_; }
    double ratio() const noexcept { return ratio_; }

  private:
    ReducedWord code_;
    double ratio_;
};

struct MinimalityReport {
    bool minimal = false;
    std::size_t targets = 0;
    std::size_t reached = 0;
    std::size_t numeric_checks = 0;
    std::size_t numeric_failures = 0;
};

/// Symbolic search over ball(n + 2) for words carrying the code into every
/// depth-n component, plus numeric spot checks.  Throws NonCantorError when
/// the components stop shrinking.
MinimalityReport minimality_probe(const Action& act, const CantorPointCode& code, std::size_t n);

struct LemmaCheck {
    std::size_t cases = 0;
    std::size_t symbolic_violations = 0;
    std::size_t numeric_checks = 0;
    std::size_t numeric_violations = 0;
    bool pass() const { return symbolic_violations == 0 && numeric_violations == 0 && cases > 0; }
};

/// Collar of w: points of C_w outside its three children.  The collar of e
/// is the fundamental domain.
bool in_collar(const Action& act, const ReducedWord& code, const SpherePoint& x);
/// Rejection sample of a collar point.
std::optional<SpherePoint> sample_collar(const Action& act, const ReducedWord& code, std::mt19937_64& rng,
                                         int attempts = 2000);

/// Images of depth-n collars under reduced g = s_j ... s_1 with s_1 != s^-1
/// (s the first letter of the collar code) are depth-(n+j) collars.
LemmaCheck collar_image_check(const Action& act, std::size_t max_depth, std::size_t max_len,
                              std::size_t points_per_case, std::uint64_t seed);

/// The unique shortest word carrying a depth-n collar into the fundamental
/// domain is the inverse of its code; brute force over ball(n + 2).
LemmaCheck escape_word_check(const Action& act, std::size_t max_depth, std::uint64_t seed);

/// reduce(g w) for a finite g and code w.
ReducedWord collar_image_code(const ReducedWord& g, const ReducedWord& code);
/// Minimal escape word of the collar coded by w.
inline ReducedWord escape_word(const ReducedWord& code) { return inverse(code); }

}  // namespace pingpong
