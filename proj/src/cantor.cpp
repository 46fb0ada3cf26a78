#include "pingpong/cantor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_set>

namespace pingpong {

namespace {

bool exact_mode(const Action& act) {
    for (Generator s : kGenerators)
        if (!act.mobius(s) || !act.region_disc(s)) return false;
    return true;
}

double polygon_diameter(const Polygon& p) {
    if (p.vertices.empty()) return 0;
    auto farthest = [&](const SpherePoint& from) {
        std::size_t best = 0;
        double d = -1;
        for (std::size_t i = 0; i < p.vertices.size(); ++i) {
            const double di = chordal_distance(from, p.vertices[i]);
            if (di > d) {
                d = di;
                best = i;
            }
        }
        return best;
    };
    const std::size_t i = farthest(p.vertices.front());
    const std::size_t j = farthest(p.vertices[i]);
    return chordal_distance(p.vertices[i], p.vertices[j]);
}

double polygon_nesting_margin(const Polygon& outer, const Polygon& inner) {
    double margin = std::numeric_limits<double>::infinity();
    const std::size_t step = std::max<std::size_t>(1, inner.vertices.size() / 16);
    for (std::size_t i = 0; i < inner.vertices.size(); i += step) {
        const SpherePoint& v = inner.vertices[i];
        const double d = outer.vertex_distance(v);
        margin = std::min(margin, outer.contains(v) ? d : -d);
    }
    return margin;
}

ReducedWord append(const ReducedWord& w, Generator t) { return multiply(w, ReducedWord::letter(t)); }

SpherePoint region_center(const Action& act, Generator s) {
    if (auto d = act.region_disc(s)) return d->to_cap().center_point();
    return act.region_polygon(s, 64).witness;
}

ReducedWord reduce_concat(std::span<const Generator> x, std::span<const Generator> y) {
    std::vector<Generator> raw(x.begin(), x.end());
    raw.insert(raw.end(), y.begin(), y.end());
    return reduce(raw);
}

}  // namespace

bool Component::contains(const SpherePoint& x) const { return disc ? disc->contains(x) : polygon.contains(x); }

const Component* Approximant::find(const ReducedWord& code) const {
    auto it = index_.find(code);
    return it == index_.end() ? nullptr : &components[it->second];
}

Disc component_disc(const Action& act, std::span<const Generator> code) {
    if (code.empty()) throw std::invalid_argument("empty component code");
    auto d = act.region_disc(code.back());
    if (!d) throw std::logic_error("component discs need disc regions");
    Disc disc = *d;
    for (std::size_t i = code.size() - 1; i-- > 0;) {
        const MobiusMap* m = act.mobius(code[i]);
        if (!m) throw std::logic_error("component discs need Mobius generators");
        disc = image_disc(*m, disc);
    }
    return disc;
}

std::vector<Approximant> approximant_tower(const Action& act, std::size_t n, std::size_t vertices) {
    const bool exact = exact_mode(act);
    const std::size_t cap = exact ? kSchottkyDepthCap : kPerturbedDepthCap;
    if (n > cap)
        throw ResourceLimitError("approximant depth " + std::to_string(n) + " exceeds cap " + std::to_string(cap));

    std::vector<Approximant> tower;
    tower.reserve(n + 1);
    Approximant level0;
    for (Generator s : kGenerators) {
        Component c;
        c.code = ReducedWord::letter(s);
        if (exact) {
            c.disc = act.region_disc(s);
            c.diameter = c.disc->chordal_diameter();
        } else {
            c.polygon = act.region_polygon(s, vertices);
            c.diameter = polygon_diameter(c.polygon);
        }
        c.nesting_margin = std::numeric_limits<double>::infinity();
        level0.components.push_back(std::move(c));
    }
    tower.push_back(std::move(level0));

    for (std::size_t k = 1; k <= n; ++k) {
        const Approximant& prev = tower.back();
        Approximant next;
        next.depth = k;
        next.components.reserve(prev.components.size() * 3);
        for (Generator s : kGenerators)
            for (const Component& parent : prev.components) {
                if (parent.code.first() == inv(s)) continue;
                Component c;
                c.code = parent.code.prepend(s);
                if (exact) {
                    c.disc = image_disc(*act.mobius(s), *parent.disc);
                    c.diameter = c.disc->chordal_diameter();
                } else {
                    c.polygon.vertices.reserve(parent.polygon.vertices.size());
                    for (const auto& v : parent.polygon.vertices) c.polygon.vertices.push_back(act.apply(s, v));
                    c.polygon.witness = act.apply(s, parent.polygon.witness);
                    c.diameter = polygon_diameter(c.polygon);
                }
                next.components.push_back(std::move(c));
            }
        tower.push_back(std::move(next));
    }

    for (std::size_t k = 0; k <= n; ++k) {
        Approximant& lvl = tower[k];
        lvl.depth = k;
        lvl.index_.reserve(lvl.components.size());
        for (std::size_t i = 0; i < lvl.components.size(); ++i) lvl.index_.emplace(lvl.components[i].code, i);
        lvl.max_diameter = 0;
        lvl.min_nesting_margin = std::numeric_limits<double>::infinity();
        for (Component& c : lvl.components) {
            lvl.max_diameter = std::max(lvl.max_diameter, c.diameter);
            if (k == 0) continue;
            const Component* parent = tower[k - 1].find(c.code.prefix(k));
            c.nesting_margin = exact ? containment_margin(*parent->disc, *c.disc)
                                     : polygon_nesting_margin(parent->polygon, c.polygon);
            lvl.min_nesting_margin = std::min(lvl.min_nesting_margin, c.nesting_margin);
        }
    }
    return tower;
}

Approximant approximant(const Action& act, std::size_t n, std::size_t vertices) {
    return std::move(approximant_tower(act, n, vertices).back());
}

double max_component_diameter(const Action& act, std::size_t n) { return approximant(act, n).max_diameter; }

bool component_contains(const Action& act, const ReducedWord& code, const SpherePoint& x) {
    if (code.is_identity()) throw std::invalid_argument("empty component code");
    const SpherePoint y = act.evaluate(inverse(code.prefix(code.length() - 1)), x);
    return act.in_region(code.last(), y);
}

CantorPointCode CantorPointCode::from_word(const ReducedWord& w, std::size_t depth) {
    if (w.is_identity()) throw std::invalid_argument("point codes need at least one letter");
    CantorPointCode c;
    c.letters.assign(w.letters().begin(), w.letters().end());
    while (c.letters.size() < depth) c.letters.push_back(c.letters.back());
    if (c.letters.size() > depth) c.letters.resize(std::max<std::size_t>(depth, 1));
    return c;
}

CantorPointCode CantorPointCode::periodic(const ReducedWord& w, std::size_t depth) {
    if (w.is_identity()) throw std::invalid_argument("period must be nonempty");
    if (w.length() > 1 && w.first() == inv(w.last())) throw std::invalid_argument("period must be cyclically reduced");
    CantorPointCode c;
    for (std::size_t i = 0; i < depth; ++i) c.letters.push_back(w[i % w.length()]);
    return c;
}

ReducedWord CantorPointCode::prefix(std::size_t n) const {
    n = std::min(n, letters.size());
    return reduce(std::span<const Generator>(letters.data(), n));
}

SpherePoint point_from_code(const Action& act, const CantorPointCode& code, std::size_t depth) {
    if (code.letters.empty() || depth + 1 > code.letters.size())
        throw std::invalid_argument("depth exceeds code truncation");
    const std::span<const Generator> head(code.letters.data(), depth + 1);
    if (exact_mode(act)) return component_disc(act, head).to_cap().center_point();
    SpherePoint x = region_center(act, head.back());
    for (std::size_t i = depth; i-- > 0;) x = act.apply(head[i], x);
    return x;
}

ExpansivityResult expansivity_separation(const Action& act, const CantorPointCode& c1, const CantorPointCode& c2) {
    const std::size_t k = common_prefix_length(c1.letters, c2.letters);
    const std::size_t len = std::min(c1.size(), c2.size());
    if (k >= len) throw IndistinguishableError("codes agree to the truncation depth");
    ExpansivityResult out;
    out.g = inverse(c1.prefix(k));
    CantorPointCode s1, s2;
    s1.letters.assign(c1.letters.begin() + static_cast<std::ptrdiff_t>(k), c1.letters.begin() + static_cast<std::ptrdiff_t>(len));
    s2.letters.assign(c2.letters.begin() + static_cast<std::ptrdiff_t>(k), c2.letters.begin() + static_cast<std::ptrdiff_t>(len));
    out.separation = chordal_distance(point_from_code(act, s1), point_from_code(act, s2));
    return out;
}

MinimalityReport minimality_probe(const Action& act, const CantorPointCode& code, std::size_t n) {
    if (n > 6) throw std::invalid_argument("minimality probe supports n <= 6");
    const std::size_t cap = exact_mode(act) ? kSchottkyDepthCap : kPerturbedDepthCap;
    const std::size_t d = std::min(n + 2, cap);
    const auto tower = approximant_tower(act, d, 64);
    const double ratio = tower[d].max_diameter / tower[d - 1].max_diameter;
    if (ratio > 0.9) {
        const auto& comps = tower[d].components;
        const auto big = std::max_element(comps.begin(), comps.end(),
                                          [](const Component& x, const Component& y) { return x.diameter < y.diameter; });
        throw NonCantorError("limit set is not a Cantor set: component " + big->code.str() + " has diameter " +
                                 std::to_string(big->diameter) + " and shrinks by ratio " + std::to_string(ratio),
                             big->code, ratio);
    }

    const auto targets = sphere_words(n + 1);
    std::unordered_map<ReducedWord, ReducedWord> witness;
    witness.reserve(targets.size());
    for (const auto& g : ball(n + 2)) {
        const ReducedWord product = reduce_concat(g.letters(), code.letters);
        if (product.length() < n + 1) continue;
        witness.try_emplace(product.prefix(n + 1), g);
    }
    MinimalityReport rep;
    rep.targets = targets.size();
    for (const auto& w : targets)
        if (witness.count(w)) ++rep.reached;
    rep.minimal = rep.reached == rep.targets;

    const SpherePoint x = point_from_code(act, code, std::min<std::size_t>(code.size() - 1, 30));
    const std::size_t stride = std::max<std::size_t>(1, targets.size() / 8);
    for (std::size_t i = 0; i < targets.size(); i += stride) {
        auto it = witness.find(targets[i]);
        if (it == witness.end()) continue;
        ++rep.numeric_checks;
        if (!component_contains(act, targets[i], act.evaluate(it->second, x))) ++rep.numeric_failures;
    }
    return rep;
}

bool in_collar(const Action& act, const ReducedWord& code, const SpherePoint& x) {
    if (code.is_identity()) return !act.region_of(x).has_value();
    if (!component_contains(act, code, x)) return false;
    for (Generator t : kGenerators) {
        if (t == inv(code.last())) continue;
        if (component_contains(act, append(code, t), x)) return false;
    }
    return true;
}

std::optional<SpherePoint> sample_collar(const Action& act, const ReducedWord& code, std::mt19937_64& rng,
                                         int attempts) {
    std::optional<Cap> cap;
    if (!code.is_identity() && exact_mode(act)) cap = component_disc(act, code.letters()).to_cap();
    for (int i = 0; i < attempts; ++i) {
        const SpherePoint x = cap ? random_point_in_cap(*cap, rng) : random_sphere_point(rng);
        if (cap || code.is_identity()) {
            if (in_collar(act, code, x)) return x;
            continue;
        }
        // No exact geometry: carry a fundamental-domain point into the collar.
        if (act.region_of(x)) continue;
        const SpherePoint y = act.evaluate(code, x);
        if (in_collar(act, code, y)) return y;
    }
    return std::nullopt;
}

ReducedWord collar_image_code(const ReducedWord& g, const ReducedWord& code) { return multiply(g, code); }

LemmaCheck collar_image_check(const Action& act, std::size_t max_depth, std::size_t max_len,
                              std::size_t points_per_case, std::uint64_t seed) {
    LemmaCheck out;
    std::mt19937_64 rng(seed);
    const auto words = ball(max_len);
    for (std::size_t n = 0; n <= max_depth; ++n)
        for (const auto& w : sphere_words(n + 1)) {
            std::vector<SpherePoint> pts;
            for (std::size_t i = 0; i < points_per_case; ++i)
                if (auto x = sample_collar(act, w, rng)) pts.push_back(*x);
            if (pts.size() < points_per_case) ++out.numeric_violations;
            for (const auto& g : words) {
                if (!g.is_identity() && g.last() == inv(w.first())) continue;
                ++out.cases;
                const ReducedWord u = collar_image_code(g, w);
                if (u.length() != n + 1 + g.length() || u.prefix(g.length()) != g) ++out.symbolic_violations;
                for (const auto& x : pts) {
                    ++out.numeric_checks;
                    if (!in_collar(act, u, act.evaluate(g, x))) ++out.numeric_violations;
                }
            }
        }
    return out;
}

LemmaCheck escape_word_check(const Action& act, std::size_t max_depth, std::uint64_t seed) {
    LemmaCheck out;
    std::mt19937_64 rng(seed);
    for (std::size_t n = 0; n <= max_depth; ++n) {
        const auto words = ball(n + 2);
        for (const auto& w : sphere_words(n + 1)) {
            ++out.cases;
            std::vector<ReducedWord> escapes;
            for (const auto& g : words)
                if (collar_image_code(g, w).is_identity()) escapes.push_back(g);
            if (escapes.size() != 1 || escapes.front() != escape_word(w)) ++out.symbolic_violations;
            const auto x = sample_collar(act, w, rng);
            if (!x) {
                ++out.numeric_violations;
                continue;
            }
            for (const auto& g : words) {
                ++out.numeric_checks;
                const bool home = !act.region_of(act.evaluate(g, *x)).has_value();
                if (home != (g == escape_word(w))) ++out.numeric_violations;
            }
        }
    }
    return out;
}

}  // namespace pingpong
