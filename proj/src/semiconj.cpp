#include "pingpong/semiconj.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <unordered_map>

namespace pingpong {

namespace {

std::string pair_name(Generator s, Generator t) { return std::string{to_char(s)} + "|" + to_char(t); }

bool exact_regions(const Action& act) {
    for (Generator s : kGenerators)
        if (!act.mobius(s) || !act.region_disc(s)) return false;
    return true;
}

// A disc containing the perturbed region of t together with the model one.
std::vector<Disc> region_cover(const SchottkyAction& act, const PerturbedAction& pert, Generator t,
                               std::size_t vertices) {
    std::vector<Disc> out{act.disc(t)};
    if (auto d = pert.region_disc(t)) {
        out.push_back(*d);
        return out;
    }
    Cap cap = act.disc(t).to_cap();
    for (const auto& v : pert.region_polygon(t, vertices).vertices)
        cap.angle = std::max(cap.angle, angle_between(cap.center, v.lift()));
    cap.angle = std::min(cap.angle * (1 + 1e-9), std::numbers::pi - 1e-9);
    out.push_back(cap.to_disc());
    return out;
}

double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3 - 2 * t);
}

}  // namespace

StabilityBudget::StabilityBudget(double eps, double del, double alp) : epsilon(eps), delta(del), alpha(alp) {
    if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
    if (!(epsilon > 0 && epsilon < alpha / 8)) throw std::invalid_argument("budget needs 0 < epsilon < alpha/8");
    if (!(delta > 0 && delta < epsilon)) throw std::invalid_argument("budget needs 0 < delta < epsilon");
}

double region_margin(const PerturbedAction& pert, Generator s, const SpherePoint& x) {
    const auto& act = pert.base();
    if (is_positive(s)) return act.disc(s).signed_chart_margin(x);
    const Generator t = inv(s);
    return -act.disc(t).signed_chart_margin(pert.apply(t, x));
}

Report verify_stability_neighborhood(const SchottkyAction& act, const PerturbedAction& pert,
                                     const StabilityBudget& budget, const StabilityOptions& opt) {
    Report rep;
    const double eps = budget.epsilon;
    rep.less("0 c0 distance", c0_distance(act, pert, opt.samples, opt.seed), budget.delta, opt.samples);

    std::array<Polygon, 4> bnd;
    for (Generator s : kGenerators) bnd[index(s)] = pert.region_polygon(s, opt.boundary_vertices);

    // Item 1: each boundary lies outside the other closure.
    for (Generator s : kGenerators)
        for (Generator t : kGenerators) {
            if (index(t) <= index(s)) continue;
            double m = std::numeric_limits<double>::infinity();
            for (const auto& v : bnd[index(s)].vertices) m = std::min(m, -region_margin(pert, t, v));
            for (const auto& v : bnd[index(t)].vertices) m = std::min(m, -region_margin(pert, s, v));
            rep.positive("1 disjoint " + pair_name(s, t), m, 2 * opt.boundary_vertices);
        }

    // Item 2: closure of Phi~_s(I~_t) inside I~_s.
    for (Generator s : kGenerators)
        for (Generator t : kGenerators) {
            if (t == inv(s)) continue;
            double m = region_margin(pert, s, pert.apply(s, bnd[index(t)].witness));
            for (const auto& v : bnd[index(t)].vertices) m = std::min(m, region_margin(pert, s, pert.apply(s, v)));
            rep.positive(std::string("2 ") + to_char(s) + "(I_" + to_char(t) + ") in I_" + to_char(s), m,
                         opt.boundary_vertices + 1);
        }

    // Item 3: components of the perturbed approximant bound those of the limit set.
    rep.less("3 component diameter", max_component_diameter(pert, opt.diameter_depth), eps / 2);

    // Item 4.
    std::mt19937_64 rng(opt.seed + 1);
    std::vector<SpherePoint> pts;
    pts.reserve(opt.samples);
    for (std::size_t i = 0; i < opt.samples; ++i) pts.push_back(random_sphere_point(rng));
    for (const auto& p : pert.probe_points()) pts.push_back(p);
    for (Generator s : kGenerators) {
        double d1 = 0, d2 = 0;
        for (const auto& x : pts) {
            d1 = std::max(d1, chordal_distance(pert.apply(inv(s), act.apply(s, x)), x));
            d2 = std::max(d2, chordal_distance(act.apply(inv(s), pert.apply(s, x)), x));
        }
        rep.less(std::string("4 ") + to_char(s) + "~^-1 " + to_char(s) + " near id", d1, eps / 2, pts.size());
        rep.less(std::string("4 ") + to_char(s) + "^-1 " + to_char(s) + "~ near id", d2, eps / 2, pts.size());
    }

    // Item 5: model maps contract on the union of model and perturbed regions.
    for (Generator s : kGenerators)
        for (Generator t : kGenerators) {
            if (t == inv(s)) continue;
            const auto cover = region_cover(act, pert, t, opt.boundary_vertices);
            const auto est = contraction_factor(act.map(s), cover, opt.samples / 12 + 1, opt.seed + 7 * index(t));
            rep.less(std::string("5 contraction ") + to_char(s) + " on I_" + to_char(t), est.factor, 0.5,
                     est.samples);
        }
    return rep;
}

ReducedWord minimal_escape_word(const PerturbedAction& pert, const ReducedWord& code, std::size_t samples,
                                std::uint64_t seed) {
    const ReducedWord g = escape_word(code);
    std::mt19937_64 rng(seed);
    std::size_t found = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        auto x = sample_collar(pert, code, rng);
        if (!x) continue;
        ++found;
        if (pert.region_of(pert.evaluate(g, *x)))
            throw GeometryError("collar " + code.str() + " does not escape under " + g.str());
        // No proper prefix of the escape path reaches the fundamental domain.
        SpherePoint y = *x;
        for (std::size_t k = 0; k + 1 < g.length(); ++k) {
            y = pert.apply(g[g.length() - 1 - k], y);
            if (!pert.region_of(y)) throw GeometryError("collar " + code.str() + " escapes early");
        }
    }
    if (found == 0) throw GeometryError("no sample found in collar " + code.str());
    return g;
}

Semiconjugacy::Semiconjugacy(const SchottkyAction& act, const PerturbedAction& pert, const StabilityBudget& budget,
                             std::size_t depth_cap)
    : act_(act), pert_(pert), budget_(budget), depth_cap_(depth_cap) {
    if (depth_cap_ == 0) throw std::invalid_argument("depth cap must be positive");
    caps_ = {act_.disc(Generator::a).to_cap(), act_.disc(Generator::b).to_cap()};
}

Classification Semiconjugacy::classify(const SpherePoint& x) const {
    std::vector<Generator> letters;
    SpherePoint cur = x;
    while (letters.size() < depth_cap_) {
        const auto s = pert_.region_of(cur);
        if (!s) break;
        if (!letters.empty() && *s == inv(letters.back()))
            throw DepthCapError("pull-back left the stability neighbourhood", reduce(letters));
        letters.push_back(*s);
        cur = pert_.apply(inv(*s), cur);
    }
    Classification c;
    c.code = reduce(letters);
    c.point = cur;
    if (letters.empty())
        c.kind = Classification::Kind::fundamental;
    else if (letters.size() == depth_cap_ && pert_.region_of(cur))
        c.kind = Classification::Kind::limit;
    else
        c.kind = Classification::Kind::collar;
    return c;
}

SpherePoint Semiconjugacy::chart(const SpherePoint& y) const {
    // Near the boundary of I~_{s^-1} the chart moves toward Phi_{s^-1} Phi~_s(y),
    // which is where the boundary rule sends those points.
    for (Generator s : {Generator::a, Generator::b}) {
        const Cap& cap = caps_[index(s) / 2];
        const SpherePoint z = pert_.apply(s, y);
        const double t = (cap.angle - angle_between(z.lift(), cap.center)) / cap.angle;
        if (t < -0.5 * kCollarWidth || t >= kCollarWidth) continue;
        const double w = 1 - smoothstep(t / kCollarWidth);
        return slerp(y, act_.apply(inv(s), z), w);
    }
    return y;
}

SpherePoint Semiconjugacy::collapse_point(const ReducedWord& code) const {
    return point_from_code(act_, CantorPointCode::from_word(code, std::max(kCodeDepth, code.length())));
}

SpherePoint Semiconjugacy::operator()(const SpherePoint& x) const {
    const auto c = classify(x);
    switch (c.kind) {
    case Classification::Kind::fundamental: return chart(x);
    case Classification::Kind::collar: return act_.evaluate(c.code, chart(c.point));
    case Classification::Kind::limit: return collapse_point(c.code);
    }
    return x;
}

Semiconjugacy build_fundamental_h(const SchottkyAction& act, const PerturbedAction& pert,
                                  const StabilityBudget& budget, const FundamentalOptions& opt,
                                  FundamentalReport* report) {
    FundamentalReport fr;
    fr.checklist = verify_stability_neighborhood(act, pert, budget, opt.checklist);
    for (const auto& c : fr.checklist.checks()) {
        const bool structural = c.property[0] == '1' || c.property[0] == '2';
        if (!c.pass && (structural || opt.require_checklist)) throw ConstructionRejected(c.property, c.margin);
    }

    std::size_t cap = opt.depth_cap;
    if (cap == 0) cap = exact_regions(pert) ? kSchottkyDepthCap : kPerturbedDepthCap;
    Semiconjugacy sc(act, pert, budget, cap);

    for (Generator s : {Generator::a, Generator::b}) {
        const Disc& d = act.disc(s);
        for (std::size_t i = 0; i < opt.boundary_samples; ++i) {
            const SpherePoint x = d.boundary_point(double(i) / opt.boundary_samples);
            const SpherePoint y = pert.apply(inv(s), x);
            fr.identity_residual = std::max(fr.identity_residual, chordal_distance(sc.chart(x), x));
            fr.boundary_rule_residual =
                std::max(fr.boundary_rule_residual, chordal_distance(sc.chart(y), act.apply(inv(s), sc.chart(x))));
        }
    }

    // Uniform fundamental-domain samples plus samples concentrated in the collars.
    std::mt19937_64 rng(opt.seed);
    std::size_t n = 0;
    for (std::size_t i = 0; n < opt.samples && i < 50 * opt.samples; ++i) {
        SpherePoint y = random_sphere_point(rng);
        if (i % 2 == 1) {
            const Generator s = (i / 2) % 2 ? Generator::b : Generator::a;
            Cap ring = act.disc(s).to_cap();
            const double theta = ring.angle * (1 - kCollarWidth * std::uniform_real_distribution<>(0, 1)(rng));
            const Vec3 u = random_unit_vector(rng);
            Vec3 axis = ring.center.cross(u);
            if (axis.norm() < 1e-9) continue;
            y = pert.apply(inv(s), SpherePoint::from_vec3(rotate(ring.center, axis.normalized(), theta)));
        }
        if (pert.region_of(y)) continue;
        ++n;
        fr.sup_displacement = std::max(fr.sup_displacement, chordal_distance(sc.chart(y), y));
    }
    if (fr.sup_displacement >= 0.95 * budget.epsilon)
        throw BudgetError("fundamental chart displacement " + std::to_string(fr.sup_displacement) +
                          " reaches the epsilon budget");
    if (report) *report = std::move(fr);
    return sc;
}

Report SemiconjugacyReport::as_report() const {
    Report r;
    r.less("equivariance residual", equivariance_residual, 1e-6, samples);
    r.less("sup d(h, id)", sup_displacement, epsilon, samples);
    r.flag("surjectivity probe", surjective, mesh_cells);
    return r;
}

namespace {

// Bucket grid on R^3 for neighbourhood queries at a fixed scale.
class PointGrid {
  public:
    explicit PointGrid(double cell) : cell_(cell) {}
    void insert(const Vec3& v) {
        cells_[key(cell_of(v.x), cell_of(v.y), cell_of(v.z))].push_back(v);
    }
    bool any_within(const Vec3& v, double r) const {
        const long cx = cell_of(v.x), cy = cell_of(v.y), cz = cell_of(v.z);
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy)
                for (long dz = -1; dz <= 1; ++dz) {
                    auto it = cells_.find(key(cx + dx, cy + dy, cz + dz));
                    if (it == cells_.end()) continue;
                    for (const auto& p : it->second)
                        if ((p - v).norm() < r) return true;
                }
        return false;
    }

  private:
    long cell_of(double t) const { return static_cast<long>(std::floor(t / cell_)); }
    static std::uint64_t key(long x, long y, long z) {
        auto u = [](long t) { return static_cast<std::uint64_t>(t + (1L << 20)) & 0x1FFFFFULL; };
        return (u(x) << 42) | (u(y) << 21) | u(z);
    }
    double cell_;
    std::unordered_map<std::uint64_t, std::vector<Vec3>> cells_;
};

}  // namespace

SemiconjugacyReport verify_semiconjugacy(const Semiconjugacy& sc, std::size_t samples, std::size_t max_depth,
                                         std::uint64_t seed, std::size_t max_mesh) {
    SemiconjugacyReport out;
    out.epsilon = sc.budget().epsilon;
    const auto& act = sc.base();
    const auto& pert = sc.perturbed();
    std::mt19937_64 rng(seed);
    out.samples_per_depth.assign(max_depth + 1, 0);
    out.residual_per_depth.assign(max_depth + 1, 0);

    const std::size_t per = samples / (max_depth + 1) + 1;
    for (std::size_t d = 0; d <= max_depth; ++d) {
        for (std::size_t i = 0, tries = 0; i < per && tries < 20 * per; ++tries) {
            const ReducedWord w = random_reduced_word(rng, d);
            const auto x = sample_collar(pert, w, rng);
            if (!x) continue;
            ++i;
            const SpherePoint hx = sc(*x);
            out.sup_displacement = std::max(out.sup_displacement, chordal_distance(hx, *x));
            for (Generator s : kGenerators) {
                const double r = chordal_distance(sc(pert.apply(s, *x)), act.apply(s, hx));
                out.residual_per_depth[d] = std::max(out.residual_per_depth[d], r);
            }
            ++out.samples_per_depth[d];
            ++out.samples;
        }
        out.equivariance_residual = std::max(out.equivariance_residual, out.residual_per_depth[d]);
    }

    // Surjectivity: images of a fine source mesh must meet every cell of the target mesh.
    const double target = sc.budget().epsilon / 2;
    std::size_t cells = static_cast<std::size_t>(std::ceil(4 * std::numbers::pi / (target * target)));
    cells = std::clamp<std::size_t>(cells, 12, max_mesh);
    out.mesh_spacing = std::max(target, std::sqrt(4 * std::numbers::pi / double(cells)));
    out.mesh_cells = cells;
    PointGrid grid(out.mesh_spacing);
    for (const auto& p : fibonacci_points(4 * cells)) grid.insert(sc(p).lift());
    for (const auto& m : fibonacci_points(cells))
        if (!grid.any_within(m.lift(), out.mesh_spacing)) ++out.uncovered_cells;
    out.surjective = out.uncovered_cells == 0;
    return out;
}

InjectivityVerdict extension_injectivity_probe(const Semiconjugacy& sc, std::size_t codes, std::uint64_t seed) {
    constexpr double kCollapse = 1e-6;
    const auto& pert = sc.perturbed();
    std::mt19937_64 rng(seed);

    std::vector<SpherePoint> pts;
    for (std::size_t i = 0; i < codes; ++i) {
        const ReducedWord w = random_reduced_word(rng, sc.depth_cap());
        for (int k = 0, got = 0; got < 2 && k < 200; ++k) {
            const SpherePoint y = random_sphere_point(rng);
            if (pert.in_region(inv(w.last()), y)) continue;
            pts.push_back(pert.evaluate(w, y));
            ++got;
        }
    }
    for (const auto& p : pert.probe_points()) pts.push_back(p);

    struct Group {
        std::vector<SpherePoint> src, img;
    };
    std::unordered_map<ReducedWord, Group> groups;
    std::vector<ReducedWord> order;
    InjectivityVerdict v;
    for (const auto& x : pts) {
        const auto c = sc.classify(x);
        if (c.kind != Classification::Kind::limit) continue;
        ++v.probes;
        auto [it, fresh] = groups.try_emplace(c.code);
        if (fresh) order.push_back(c.code);
        it->second.src.push_back(x);
        it->second.img.push_back(sc.collapse_point(c.code));
    }
    v.distinct_codes = groups.size();

    auto diameter = [](const std::vector<SpherePoint>& v) {
        double d = 0;
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = i + 1; j < v.size(); ++j) d = std::max(d, chordal_distance(v[i], v[j]));
        return d;
    };
    for (const auto& code : order) {
        const auto& g = groups.at(code);
        const double src = diameter(g.src), img = diameter(g.img);
        if (src > kCollapse && img < kCollapse) v.witnesses.push_back({code, src, img, g.src.size()});
    }
    // Distinct codes must give distinct table points.
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            const auto& p = groups.at(order[i]).img.front();
            const auto& q = groups.at(order[j]).img.front();
            if (chordal_distance(p, q) == 0) v.witnesses.push_back({order[j], 0, 0, 2});
        }
    std::sort(v.witnesses.begin(), v.witnesses.end(),
              [](const CollapseWitness& x, const CollapseWitness& y) { return x.source_diameter > y.source_diameter; });
    v.injective = v.witnesses.empty();
    return v;
}

JitterCalibration calibrate_jitter(const SchottkyAction& act, const StabilityBudget& budget, std::uint64_t seed,
                                   std::size_t probes, const StabilityOptions& opt) {
    JitterCalibration out;
    auto passes = [&](double sigma) {
        ++out.probes;
        return verify_stability_neighborhood(act, mobius_jitter(act, sigma, seed), budget, opt).all_pass();
    };
    double lo = 0, hi = budget.delta;
    for (int k = 0; k < 8 && passes(hi); ++k) {
        lo = hi;
        hi *= 2;
    }
    for (std::size_t i = 0; i < probes; ++i) {
        const double mid = 0.5 * (lo + hi);
        (passes(mid) ? lo : hi) = mid;
    }
    if (lo == 0) throw BudgetError("no jitter size passes the stability checklist");
    out.sigma = lo;
    out.checklist = verify_stability_neighborhood(act, mobius_jitter(act, lo, seed), budget, opt);
    return out;
}

}  // namespace pingpong
