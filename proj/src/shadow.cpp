#include "pingpong/shadow.hpp"

#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <random>

#include "pingpong/cantor.hpp"

namespace pingpong {

std::shared_ptr<const BallIndex> ball_index(std::size_t n) {
    if (n > kMaxSequenceRadius)
        throw ResourceLimitError("sequence radius " + std::to_string(n) + " exceeds " +
                                 std::to_string(kMaxSequenceRadius));
    static std::mutex mu;
    static std::map<std::size_t, std::shared_ptr<const BallIndex>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_shared<const BallIndex>(n);
    return slot;
}

GSequence::GSequence(std::size_t n) : ball_(ball_index(n)), points_(ball_->size()) {}

GSequence::GSequence(std::shared_ptr<const BallIndex> ball, std::vector<SpherePoint> points)
    : ball_(std::move(ball)), points_(std::move(points)) {
    if (points_.size() != ball_->size()) throw std::invalid_argument("sequence size does not match its ball");
}

const SpherePoint& GSequence::at(const ReducedWord& g) const {
    const std::size_t i = ball_->find(g);
    if (i == ball_->size()) throw std::out_of_range("word " + g.str() + " outside the sequence ball");
    return points_[i];
}

GSequence GSequence::restrict_to(std::size_t m) const {
    if (m > radius()) throw std::out_of_range("restriction radius exceeds the sequence radius");
    auto sub = ball_index(m);
    // Shortlex order makes ball(m) a prefix of ball(n).
    return GSequence(sub, std::vector<SpherePoint>(points_.begin(), points_.begin() + sub->size()));
}

GSequence orbit_sequence(const Action& act, const SpherePoint& y, std::size_t n) {
    GSequence seq(n);
    const auto& ball = seq.ball();
    seq[0] = y;
    for (std::size_t i = 1; i < seq.size(); ++i) seq[i] = act.apply(ball.first_letter[i], seq[ball.parent[i]]);
    return seq;
}

GSequence noisy_pseudotrajectory(const Action& act, const SpherePoint& y, std::size_t n, double delta,
                                 std::uint64_t seed) {
    if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
    GSequence seq(n);
    const auto& ball = seq.ball();
    std::mt19937_64 rng(seed);
    const double bound = 0.9 * delta;
    seq[0] = y;
    for (std::size_t i = 1; i < seq.size(); ++i) {
        const Generator s = ball.first_letter[i];
        const SpherePoint& parent = seq[ball.parent[i]];
        const SpherePoint target = act.apply(s, parent);
        double radius = bound;
        SpherePoint x = target;
        for (int k = 0; k < 60; ++k, radius *= 0.5) {
            const SpherePoint cand = random_point_near(target, radius, rng);
            if (chordal_distance(cand, target) < bound &&
                chordal_distance(act.apply(inv(s), cand), parent) < bound) {
                x = cand;
                break;
            }
        }
        seq[i] = x;
    }
    return seq;
}

PseudoDefectReport pseudo_defect(const Action& act, const GSequence& seq) {
    PseudoDefectReport r;
    const auto& ball = seq.ball();
    auto consider = [&](double d, std::size_t g, Generator s) {
        ++r.edges;
        if (d > r.max_defect || r.edges == 1) {
            r.max_defect = std::max(r.max_defect, d);
            r.worst_g = ball.words[g];
            r.worst_s = s;
        }
    };
    for (std::size_t i = 1; i < seq.size(); ++i) {
        const std::size_t p = ball.parent[i];
        const Generator s = ball.first_letter[i];
        consider(chordal_distance(seq[i], act.apply(s, seq[p])), p, s);
        consider(chordal_distance(seq[p], act.apply(inv(s), seq[i])), i, inv(s));
    }
    return r;
}

ReducedWord class_generator() { return ReducedWord::parse("Ba"); }

ClassDecomposition class_decomposition(std::size_t n) {
    auto ball = ball_index(n);
    ClassDecomposition cd;
    cd.radius = n;
    const ReducedWord c = class_generator(), ci = inverse(c);
    std::vector<bool> seen(ball->size(), false);
    for (std::size_t i = 0; i < ball->size(); ++i) {
        if (seen[i]) continue;
        // Shortlex iteration reaches the minimal element of each class first.
        GClass cls;
        cls.representative = ball->words[i];
        std::vector<std::size_t> up, down;
        for (ReducedWord g = multiply(c, cls.representative);; g = multiply(c, g)) {
            const std::size_t j = ball->find(g);
            if (j == ball->size()) break;
            up.push_back(j);
        }
        for (ReducedWord g = multiply(ci, cls.representative);; g = multiply(ci, g)) {
            const std::size_t j = ball->find(g);
            if (j == ball->size()) break;
            down.push_back(j);
        }
        cls.m_begin = -static_cast<int>(down.size());
        cls.members.assign(down.rbegin(), down.rend());
        cls.members.push_back(i);
        cls.members.insert(cls.members.end(), up.begin(), up.end());
        for (auto j : cls.members) seen[j] = true;
        cd.classes.push_back(std::move(cls));
    }
    return cd;
}

ZSegment z_sequence_from_class(const GSequence& seq, const GClass& cls) {
    ZSegment z;
    z.m_begin = cls.m_begin;
    for (auto j : cls.members) {
        if (j >= seq.size()) throw std::out_of_range("class lies outside the sequence radius");
        z.z.push_back(seq[j]);
    }
    return z;
}

SpherePoint composite(const Action& act, const SpherePoint& y) {
    return act.apply(Generator::b_inv, act.apply(Generator::a, y));
}

SpherePoint composite_inverse(const Action& act, const SpherePoint& y) {
    return act.apply(Generator::a_inv, act.apply(Generator::b, y));
}

SpherePoint composite_power(const Action& act, const SpherePoint& y, int m) {
    SpherePoint x = y;
    for (; m > 0; --m) x = composite(act, x);
    for (; m < 0; ++m) x = composite_inverse(act, x);
    return x;
}

double z_defect(const Action& act, const ZSegment& seg) {
    double d = 0;
    for (std::size_t k = 0; k + 1 < seg.z.size(); ++k)
        d = std::max(d, chordal_distance(composite(act, seg.z[k]), seg.z[k + 1]));
    return d;
}

double z_shadow_error(const Action& act, const ZSegment& seg, const SpherePoint& y) {
    double err = 0;
    SpherePoint x = y;
    for (int m = 0; m < seg.m_end(); ++m) {
        if (m >= seg.m_begin) err = std::max(err, chordal_distance(x, seg.at(m)));
        x = composite(act, x);
    }
    x = y;
    for (int m = -1; m >= seg.m_begin; --m) {
        x = composite_inverse(act, x);
        if (m < seg.m_end()) err = std::max(err, chordal_distance(x, seg.at(m)));
    }
    return err;
}

double delta1(const SchottkyAction& act, double delta, std::size_t pairs, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const MobiusMap& B = act.map(Generator::b_inv);
    double worst = 0;
    auto probe = [&](const SpherePoint& x) {
        const SpherePoint y = random_point_near(x, delta, rng);
        worst = std::max(worst, chordal_distance(B(x), B(y)));
    };
    for (std::size_t i = 0; i < pairs; ++i) probe(random_sphere_point(rng));
    // Phi_{b^-1} expands most at its repeller, the attractor of b.
    std::vector<SpherePoint> anchors{act.config().attractor_b, act.config().repeller_b, act.config().attractor_a,
                                     act.config().repeller_a};
    for (const auto& a : anchors)
        for (std::size_t i = 0; i < pairs / 10 + 1; ++i) probe(random_point_near(a, delta, rng));
    return worst;
}

bool composite_is_loxodromic(const SchottkyAction& act) {
    const MobiusMap m = act.composed(class_generator());
    const Complex t = m.trace();
    // Elliptic or parabolic exactly when the trace is real in [-2, 2].
    return !(std::abs(t.imag()) < 1e-12 && std::abs(t.real()) <= 2 + 1e-12);
}

namespace {

struct Minimum {
    SpherePoint point;
    double value = 0;
    std::size_t evaluations = 0;
};

struct ChartProblem {
    const std::function<double(const SpherePoint&)>* objective;
    MobiusMap to_sphere;
    double scale;
    std::size_t evaluations = 0;
    std::size_t budget = 0;

    SpherePoint point(const gsl_vector* v) const {
        return to_sphere(SpherePoint(Complex(scale * gsl_vector_get(v, 0), scale * gsl_vector_get(v, 1))));
    }
};

double chart_thunk(const gsl_vector* v, void* params) {
    auto* p = static_cast<ChartProblem*>(params);
    ++p->evaluations;
    return (*p->objective)(p->point(v));
}

// Nelder-Mead over the rotation chart centred at `seed`, scale in chart units.
Minimum simplex_minimize(const std::function<double(const SpherePoint&)>& f, const SpherePoint& seed, double scale,
                         std::size_t budget) {
    ChartProblem prob{&f, MobiusMap::rotation_to_origin(seed).inverse(), scale, 0, budget};
    gsl_multimin_function fn{&chart_thunk, 2, &prob};
    gsl_vector* x = gsl_vector_calloc(2);
    gsl_vector* step = gsl_vector_alloc(2);
    gsl_vector_set_all(step, 1.0);
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
    gsl_multimin_fminimizer_set(s, &fn, x, step);
    while (prob.evaluations < budget) {
        if (gsl_multimin_fminimizer_iterate(s)) break;
        if (gsl_multimin_fminimizer_size(s) * scale < 1e-15) break;
        if (s->fval == 0) break;
    }
    Minimum out{prob.point(s->x), s->fval, prob.evaluations};
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(step);
    gsl_vector_free(x);
    return out;
}

}  // namespace

SpherePoint z_shadow_northsouth(const Action& act, const ZSegment& seg, double eta) {
    if (seg.z.empty()) throw std::invalid_argument("empty segment");
    const std::function<double(const SpherePoint&)> f = [&](const SpherePoint& y) {
        return z_shadow_error(act, seg, y);
    };
    // Candidates: z_0 and every z_m pulled back to index 0.
    std::vector<std::pair<double, SpherePoint>> seeds;
    for (int m = seg.m_begin; m < seg.m_end(); ++m) {
        const SpherePoint y = composite_power(act, seg.at(m), -m);
        seeds.emplace_back(f(y), y);
    }
    std::stable_sort(seeds.begin(), seeds.end(), [](const auto& p, const auto& q) { return p.first < q.first; });
    Minimum best{seeds.front().second, seeds.front().first, 0};
    if (best.value > 0) {
        for (std::size_t k = 0; k < std::min<std::size_t>(3, seeds.size()); ++k) {
            auto r = simplex_minimize(f, seeds[k].second, eta, 2000);
            if (r.value < best.value) best = r;
            // Restart at the optimum with a finer simplex.
            r = simplex_minimize(f, best.point, std::max(best.value, 1e-14), 1000);
            if (r.value < best.value) best = r;
        }
    }
    if (!(best.value < eta)) throw ShadowingFailed("no eta-shadow for the segment", 0, best.value);
    return best.point;
}

GSequence tilde_from_shadows(const Action& act, const ClassDecomposition& cd, const std::vector<ClassShadow>& sh,
                             std::size_t n) {
    GSequence out(n);
    for (std::size_t c = 0; c < cd.classes.size(); ++c) {
        const auto& cls = cd.classes[c];
        const int zero = -cls.m_begin;
        SpherePoint x = sh[c].y;
        for (std::size_t k = static_cast<std::size_t>(zero); k < cls.members.size(); ++k) {
            out[cls.members[k]] = x;
            x = composite(act, x);
        }
        x = sh[c].y;
        for (int k = zero - 1; k >= 0; --k) {
            x = composite_inverse(act, x);
            out[cls.members[static_cast<std::size_t>(k)]] = x;
        }
    }
    return out;
}

double compatibility_residual(const Action& act, const GSequence& seq) {
    const auto& ball = seq.ball();
    double r = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const std::size_t ia = ball.find(multiply(ReducedWord::letter(Generator::a_inv), ball.words[i]));
        const std::size_t ib = ball.find(multiply(ReducedWord::letter(Generator::b_inv), ball.words[i]));
        if (ia == ball.size() || ib == ball.size()) continue;
        r = std::max(r, chordal_distance(act.apply(Generator::a, seq[ia]), act.apply(Generator::b, seq[ib])));
    }
    return r;
}

namespace {

struct Move {
    std::size_t g;  // target index
    SpherePoint p, q;
};

// Source Phi_s(x~_{s^-1 g}) for the target x~_g, preferring s = a.
std::vector<Move> constraint_moves(const Action& act, const GSequence& tilde) {
    const auto& ball = tilde.ball();
    std::vector<Move> out;
    for (std::size_t i = 0; i < tilde.size(); ++i)
        for (Generator s : {Generator::a, Generator::b}) {
            const std::size_t j = ball.find(multiply(ReducedWord::letter(inv(s)), ball.words[i]));
            if (j == ball.size()) continue;
            out.push_back({i, act.apply(s, tilde[j]), tilde[i]});
            break;
        }
    return out;
}

// Pairs (i, j), i < j, of points closer than tol (sweep along x).
std::vector<std::pair<std::size_t, std::size_t>> close_pairs(const std::vector<SpherePoint>& pts, double tol) {
    std::vector<Vec3> v(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) v[i] = pts[i].lift();
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a].x < v[b].x; });
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t k = 0; k < order.size(); ++k)
        for (std::size_t l = k + 1; l < order.size() && v[order[l]].x - v[order[k]].x < tol; ++l)
            if ((v[order[k]] - v[order[l]]).norm() < tol)
                out.emplace_back(std::min(order[k], order[l]), std::max(order[k], order[l]));
    return out;
}

double min_separation(const std::vector<SpherePoint>& pts) {
    double best = std::numeric_limits<double>::infinity();
    for (double tol = 1e-9; tol <= 4; tol *= 10) {
        const auto pairs = close_pairs(pts, tol);
        if (pairs.empty()) continue;
        for (auto [i, j] : pairs) best = std::min(best, chordal_distance(pts[i], pts[j]));
        return best;
    }
    return best;
}

std::vector<std::size_t> class_of_index(const ClassDecomposition& cd, std::size_t size) {
    std::vector<std::size_t> out(size, 0);
    for (std::size_t c = 0; c < cd.classes.size(); ++c)
        for (auto j : cd.classes[c].members) out[j] = c;
    return out;
}

// Moves the shadow point of class c by less than eta / 100, keeping its error below eta.
void jitter_class(const Action& act, const ClassDecomposition& cd, const GSequence& seq,
                  std::vector<ClassShadow>& sh, std::size_t c, double eta, std::mt19937_64& rng) {
    const ZSegment seg = z_sequence_from_class(seq, cd.classes[c]);
    for (double r = eta / 100; r > 1e-300; r *= 0.5) {
        const SpherePoint y = random_point_near(sh[c].y, r, rng);
        const double err = z_shadow_error(act, seg, y);
        if (err < eta) {
            sh[c].y = y;
            sh[c].shadow_error = err;
            return;
        }
    }
}

}  // namespace

int enforce_distinctness(const Action& act, const ClassDecomposition& cd, const GSequence& seq,
                         std::vector<ClassShadow>& shadows, double eta, double tolerance, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto owner = class_of_index(cd, seq.size());
    for (int round = 0; round < 50; ++round) {
        const GSequence tilde = tilde_from_shadows(act, cd, shadows, seq.radius());
        auto bad = close_pairs(tilde.points(), tolerance);
        const auto moves = constraint_moves(act, tilde);
        std::vector<SpherePoint> sources;
        for (const auto& m : moves) sources.push_back(m.p);
        for (auto [i, j] : close_pairs(sources, tolerance)) bad.emplace_back(moves[i].g, moves[j].g);
        if (bad.empty()) return round;
        std::vector<bool> done(cd.classes.size(), false);
        for (auto [i, j] : bad) {
            // Points of one exact orbit cannot be separated by moving their class.
            const std::size_t c = owner[j] != owner[i] ? owner[j] : owner[i];
            if (done[c]) continue;
            done[c] = true;
            jitter_class(act, cd, seq, shadows, c, eta, rng);
        }
    }
    throw CollisionError(0, 0, "distinctness not reached after jitter");
}

Realization realize_pseudotrajectory(const SchottkyAction& act, const GSequence& seq, double eta,
                                     const RealizeOptions& opt) {
    if (!(eta > 0)) throw std::invalid_argument("eta must be positive");
    if (!composite_is_loxodromic(act)) throw std::invalid_argument("composite generator is not loxodromic");
    const std::size_t n = seq.radius();
    const ClassDecomposition cd = class_decomposition(n);

    std::vector<ClassShadow> shadows(cd.classes.size());
    for (std::size_t c = 0; c < cd.classes.size(); ++c) {
        const ZSegment seg = z_sequence_from_class(seq, cd.classes[c]);
        auto& sh = shadows[c];
        sh.representative = cd.classes[c].representative;
        sh.length = seg.z.size();
        sh.z_defect = z_defect(act, seg);
        try {
            sh.y = z_shadow_northsouth(act, seg, eta);
        } catch (const ShadowingFailed& e) {
            throw ShadowingFailed("class " + sh.representative.str() + ": " + e.what(), c, e.error());
        }
        sh.shadow_error = z_shadow_error(act, seg, sh.y);
    }

    std::mt19937_64 rng(opt.seed);
    const auto owner = class_of_index(cd, seq.size());
    int retries = 0;
    for (;; ++retries) {
        enforce_distinctness(act, cd, seq, shadows, eta, opt.distinct_tolerance, rng());
        GSequence tilde = tilde_from_shadows(act, cd, shadows, n);
        const auto moves = constraint_moves(act, tilde);
        std::vector<std::pair<SpherePoint, SpherePoint>> pairs;
        double lambda = 0;
        for (const auto& m : moves) {
            pairs.emplace_back(m.p, m.q);
            lambda = std::max(lambda, chordal_distance(m.p, m.q));
        }
        lambda = lambda * 1.0001 + 1e-15;
        InterpolatingDiffeo f;
        try {
            f = InterpolatingDiffeo::build(pairs, lambda);
        } catch (const CollisionError& e) {
            if (retries >= opt.max_retries) throw;
            for (std::size_t k : {e.first(), e.second()})
                if (k < moves.size()) jitter_class(act, cd, seq, shadows, owner[moves[k].g], eta, rng);
            continue;
        }
        Realization r{tilde, perturb_action(act, std::move(f)), shadows};
        r.retries = retries;
        r.lambda = lambda;
        for (std::size_t i = 0; i < seq.size(); ++i)
            r.max_shadow_error = std::max(r.max_shadow_error, chordal_distance(seq[i], tilde[i]));
        r.exact_defect = pseudo_defect(r.perturbed, tilde).max_defect;
        r.compatibility = compatibility_residual(act, tilde);
        std::vector<SpherePoint> sources;
        for (const auto& m : moves) sources.push_back(m.p);
        r.min_separation = std::min(min_separation(tilde.points()), min_separation(sources));
        return r;
    }
}

double shadow_objective(const Action& act, const GSequence& seq, const SpherePoint& y) {
    const auto& ball = seq.ball();
    std::vector<SpherePoint> orbit(seq.size());
    orbit[0] = y;
    double worst = chordal_distance(y, seq[0]);
    for (std::size_t i = 1; i < seq.size(); ++i) {
        orbit[i] = act.apply(ball.first_letter[i], orbit[ball.parent[i]]);
        worst = std::max(worst, chordal_distance(orbit[i], seq[i]));
    }
    return worst;
}

ShadowOptions default_shadow_options(double epsilon) {
    ShadowOptions o;
    o.eta = std::min(1e-3, epsilon / 10);
    o.semiconj.require_checklist = false;
    o.semiconj.samples = 2000;
    o.semiconj.boundary_samples = 128;
    o.semiconj.checklist.samples = 5000;
    o.semiconj.checklist.diameter_depth = 2;
    o.semiconj.checklist.boundary_vertices = 128;
    return o;
}

ShadowResult shadow_search(const SchottkyAction& act, const GSequence& seq, double epsilon, ShadowMode mode,
                           const ShadowOptions& opt) {
    ShadowResult out;
    if (mode == ShadowMode::via_realization) {
        Realization real = realize_pseudotrajectory(act, seq, opt.eta, opt.realize);
        const double eh = epsilon / 2;
        const StabilityBudget budget(eh, 0.99 * eh, act.alpha());
        FundamentalReport fr;
        const Semiconjugacy sc = build_fundamental_h(act, real.perturbed, budget, opt.semiconj, &fr);
        const SpherePoint y = sc(real.tilde[0]);
        out.objective = shadow_objective(act, seq, y);
        out.checklist = std::move(fr.checklist);
        out.realization = std::move(real);
        if (out.objective < epsilon) out.point = y;
        return out;
    }

    const std::function<double(const SpherePoint&)> f = [&](const SpherePoint& y) {
        return shadow_objective(act, seq, y);
    };
    std::vector<SpherePoint> seeds{seq[0]};
    {
        // Component of x_e in the model approximant, if any.
        std::vector<Generator> code;
        SpherePoint x = seq[0];
        while (code.size() < kSchottkyDepthCap) {
            const auto s = act.region_of(x);
            if (!s) break;
            code.push_back(*s);
            x = act.apply(inv(*s), x);
        }
        if (!code.empty()) seeds.push_back(point_from_code(act, CantorPointCode::from_word(reduce(code))));
    }
    Minimum best{seeds[0], f(seeds[0]), 1};
    const std::size_t per = std::max<std::size_t>(opt.evaluations / std::max<std::size_t>(opt.restarts, 1), 20);
    double scale = epsilon;
    for (std::size_t k = 0; k < opt.restarts && best.value > 0; ++k) {
        const SpherePoint start = k < seeds.size() ? seeds[k] : best.point;
        const auto r = simplex_minimize(f, start, scale, per);
        out.evaluations += r.evaluations;
        if (r.value < best.value) best = r;
        if (k + 1 >= seeds.size()) scale = std::max(best.value, 1e-12);
    }
    out.objective = best.value;
    if (best.value < epsilon) out.point = best.point;
    return out;
}

Delta0Calibration calibrate_delta0(const SchottkyAction& act, std::size_t n, double eta, std::uint64_t seed,
                                   std::size_t probes, std::size_t steps) {
    Delta0Calibration out;
    auto works = [&](double delta) {
        ++out.candidates;
        std::mt19937_64 rng(seed);
        for (std::size_t k = 0; k < probes; ++k) {
            const SpherePoint y = random_sphere_point(rng);
            const auto seq = noisy_pseudotrajectory(act, y, n, delta, rng());
            try {
                const auto r = realize_pseudotrajectory(act, seq, eta);
                if (!(r.max_shadow_error < eta && r.exact_defect < 1e-8)) return false;
            } catch (const std::runtime_error&) {
                return false;
            }
        }
        return true;
    };
    double lo = std::log10(eta) - 8, hi = std::log10(eta);
    if (works(std::pow(10.0, hi))) {
        out.delta0 = eta;
        return out;
    }
    if (!works(std::pow(10.0, lo))) return out;
    for (std::size_t i = 0; i < steps; ++i) {
        const double mid = 0.5 * (lo + hi);
        (works(std::pow(10.0, mid)) ? lo : hi) = mid;
    }
    out.delta0 = std::pow(10.0, lo);
    return out;
}

}  // namespace pingpong
