#include "pingpong/action.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace pingpong {

namespace {

constexpr double kSafety = 1.05;

std::string name(Generator s) { return std::string(1, to_char(s)); }

Disc complement(const Disc& d) {
    return Disc(d.center, d.radius, d.side == Disc::Side::bounded ? Disc::Side::unbounded : Disc::Side::bounded);
}

double cap_deviation(const Disc& x, const Disc& y) {
    const Cap kx = x.to_cap();
    const Cap ky = y.to_cap();
    return angle_between(kx.center, ky.center) + std::abs(kx.angle - ky.angle);
}

double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

}  // namespace

SpherePoint Action::evaluate(const ReducedWord& g, SpherePoint x) const {
    const auto letters = g.letters();
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) x = apply(*it, x);
    return x;
}

std::optional<Generator> Action::region_of(const SpherePoint& x) const {
    for (Generator s : kGenerators)
        if (in_region(s, x)) return s;
    return std::nullopt;
}

Polygon Action::region_polygon(Generator s, std::size_t n) const {
    const auto d = region_disc(s);
    if (!d) throw std::logic_error("region of " + name(s) + " has no polygon representation");
    return Polygon::from_disc(*d, n);
}

MobiusMap SchottkyAction::composed(const ReducedWord& g) const {
    MobiusMap m;
    for (Generator s : g.letters()) m = m * maps_[index(s)];
    return m;
}

SchottkyAction build_model_action(const ActionConfig& cfg) {
    if (!(cfg.lambda_a > 0 && cfg.lambda_a < 1 && cfg.lambda_b > 0 && cfg.lambda_b < 1))
        throw std::invalid_argument("multipliers must lie in (0, 1)");
    for (double r : cfg.radii)
        if (!(r > 0)) throw std::invalid_argument("disc radii must be positive");
    if (cfg.samples < 2) throw std::invalid_argument("verification needs at least two samples");

    SchottkyAction act;
    act.cfg_ = cfg;
    const std::array<std::pair<SpherePoint, SpherePoint>, 2> fixed = {
        std::pair{cfg.attractor_a, cfg.repeller_a}, std::pair{cfg.attractor_b, cfg.repeller_b}};
    const std::array<double, 2> lambdas = {cfg.lambda_a, cfg.lambda_b};
    for (std::size_t k = 0; k < 2; ++k) {
        const double r_pos = cfg.radii[2 * k];
        const double r_neg = cfg.radii[2 * k + 1];
        if (std::abs(r_pos * r_neg - lambdas[k]) > 1e-9 * lambdas[k])
            throw std::invalid_argument("radii of generator " + std::to_string(k) +
                                        " inconsistent: r_s * r_{s^-1} must equal lambda_s");
        const MobiusMap c = MobiusMap::sending_zero_infinity_to(fixed[k].first, fixed[k].second);
        act.charts_[k] = c;
        act.maps_[2 * k] = MobiusMap::loxodromic(fixed[k].first, fixed[k].second, Complex(lambdas[k]));
        act.maps_[2 * k + 1] = act.maps_[2 * k].inverse();
        act.discs_[2 * k] = image_disc(c, Disc(Complex(0), r_pos));
        act.discs_[2 * k + 1] = image_disc(c, Disc(Complex(0), 1.0 / r_neg, Disc::Side::unbounded));
    }

    act.alpha_ = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) {
            const Separation sep = disc_separation(act.discs_[i], act.discs_[j]);
            if (sep.distance <= 0)
                throw std::invalid_argument("discs I_" + name(kGenerators[i]) + " and I_" + name(kGenerators[j]) +
                                            " are not disjoint");
            act.alpha_ = std::min(act.alpha_, sep.distance);
        }
    if (!act.discs_[0].contains(cfg.attractor_a) || !act.discs_[1].contains(cfg.repeller_a) ||
        !act.discs_[2].contains(cfg.attractor_b) || !act.discs_[3].contains(cfg.repeller_b))
        throw std::invalid_argument("fixed points must lie in their discs");

    act.report_ = verify_model(act, cfg.samples, cfg.seed);
    if (const CheckResult* bad = act.report_.first_failure()) throw ConstructionRejected(bad->property, bad->margin);
    return act;
}

Report verify_model(const SchottkyAction& act, std::size_t samples, std::uint64_t seed) {
    Report rep;
    std::uint64_t stream = seed * 1000003ULL;

    for (Generator s : {Generator::a, Generator::b}) {
        const Disc expected = complement(image_disc(act.map(inv(s)), act.disc(s)));
        rep.less("inverse-disc " + name(inv(s)), cap_deviation(act.disc(inv(s)), expected), 1e-9);
    }
    for (Generator s : kGenerators)
        for (Generator t : kGenerators) {
            if (t == inv(s)) continue;
            const auto c = contraction_factor(act.map(s), act.disc(t), samples, ++stream);
            rep.less("contraction " + name(s) + " on I_" + name(t), kSafety * c.factor, 0.5, c.samples);
        }
    for (Generator s : kGenerators)
        for (Generator t : kGenerators) {
            if (t == inv(s)) continue;
            rep.positive("inclusion " + name(s) + "(I_" + name(t) + ") in I_" + name(s),
                         containment_margin(act.disc(s), image_disc(act.map(s), act.disc(t))));
        }
    for (Generator s : kGenerators) {
        const Separation sep = disc_separation(image_disc(act.map(s), act.disc(s)), act.disc(inv(s)));
        rep.positive("self-image " + name(s) + "(I_" + name(s) + ") misses I_" + name(inv(s)), sep.distance);
    }
    for (Generator s : {Generator::a, Generator::a_inv})
        for (Generator t : {Generator::b, Generator::b_inv})
            rep.positive("gap I_" + name(s) + " | I_" + name(t), disc_separation(act.disc(s), act.disc(t)).distance);
    const std::array<Disc, 2> bdiscs = {act.disc(Generator::b), act.disc(Generator::b_inv)};
    const std::array<Disc, 2> adiscs = {act.disc(Generator::a), act.disc(Generator::a_inv)};
    const std::array<std::pair<Generator, const std::array<Disc, 2>*>, 4> unions = {
        std::pair{Generator::a, &bdiscs}, std::pair{Generator::a_inv, &bdiscs}, std::pair{Generator::b, &adiscs},
        std::pair{Generator::b_inv, &adiscs}};
    for (const auto& [s, ds] : unions) {
        const auto c = contraction_factor(act.map(s), std::span<const Disc>(*ds), samples, ++stream);
        const std::string on = (ds == &bdiscs) ? "I_b+I_B" : "I_a+I_A";
        rep.less("pair contraction " + name(s) + " on " + on, kSafety * c.factor, 0.5,
                 c.samples);
    }
    return rep;
}

// ---------------------------------------------------------------- perturbed

SpherePoint PerturbedAction::apply(Generator s, const SpherePoint& x) const {
    switch (kind_) {
    case PerturbationKind::mobius_jitter: return maps_[index(s)](x);
    case PerturbationKind::interpolating_diffeo:
        if (is_positive(s)) return (*diffeo_)(base_.apply(s, x));
        return base_.apply(s, diffeo_->inverse(x));
    case PerturbationKind::radial_plateau:
        if (!plateau_) return base_.apply(s, x);
        if (s == Generator::a) return plateau_->forward(x);
        if (s == Generator::a_inv) return plateau_->backward(x);
        return base_.apply(s, x);
    }
    return x;
}

bool PerturbedAction::in_region(Generator s, const SpherePoint& x) const {
    if (is_positive(s)) return base_.disc(s).contains(x);
    const Generator t = inv(s);
    return base_.disc(t).signed_chart_margin(apply(t, x)) < 0;
}

const MobiusMap* PerturbedAction::mobius(Generator s) const {
    if (kind_ == PerturbationKind::mobius_jitter) return &maps_[index(s)];
    return nullptr;
}

std::vector<SpherePoint> PerturbedAction::probe_points() const {
    std::vector<SpherePoint> out;
    if (diffeo_) {
        for (const auto& [p, q] : diffeo_->pairs()) {
            out.push_back(p);
            out.push_back(q);
            out.push_back(base_.apply(Generator::a_inv, p));
            out.push_back(base_.apply(Generator::b_inv, p));
        }
    }
    if (plateau_) {
        auto pts = plateau_->plateau_points(16);
        out.insert(out.end(), pts.begin(), pts.end());
    }
    return out;
}

std::optional<Disc> PerturbedAction::region_disc(Generator s) const {
    if (is_positive(s)) return base_.disc(s);
    if (kind_ != PerturbationKind::mobius_jitter) {
        if (kind_ == PerturbationKind::radial_plateau) return base_.disc(s);
        if (diffeo_ && diffeo_->is_identity()) return base_.disc(s);
        return std::nullopt;
    }
    return complement(image_disc(maps_[index(s)], base_.disc(inv(s))));
}

Polygon PerturbedAction::region_polygon(Generator s, std::size_t n) const {
    if (is_positive(s)) return Polygon::from_disc(base_.disc(s), n);
    const Disc& target = base_.disc(inv(s));
    Polygon poly;
    poly.vertices.reserve(n);
    for (std::size_t i = 0; i < n; ++i) poly.vertices.push_back(apply(s, target.boundary_point(double(i) / n)));
    poly.witness = apply(s, SpherePoint::from_vec3(-target.to_cap().center));
    return poly;
}

double PerturbedAction::round_trip_error(std::size_t samples, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::vector<SpherePoint> pts;
    pts.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) pts.push_back(random_sphere_point(rng));
    for (const auto& p : probe_points()) pts.push_back(p);
    double worst = 0;
    for (const auto& x : pts)
        for (Generator s : kGenerators) worst = std::max(worst, chordal_distance(apply(inv(s), apply(s, x)), x));
    return worst;
}

PerturbedAction mobius_perturbation(const SchottkyAction& base, const MobiusMap& ma, const MobiusMap& mb) {
    PerturbedAction p(base, PerturbationKind::mobius_jitter);
    p.maps_ = {ma, ma.inverse(), mb, mb.inverse()};
    return p;
}

PerturbedAction mobius_jitter(const SchottkyAction& base, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    auto near_identity = [&] {
        auto c = [&] { return Complex(n(rng), n(rng)) * sigma; };
        const Complex e1 = c(), e2 = c(), e3 = c(), e4 = c();
        return MobiusMap(1.0 + e1, e2, e3, 1.0 + e4);
    };
    const MobiusMap ja = near_identity();
    const MobiusMap jb = near_identity();
    return mobius_perturbation(base, ja * base.map(Generator::a), jb * base.map(Generator::b));
}

PerturbedAction perturb_action(const SchottkyAction& base, InterpolatingDiffeo f) {
    PerturbedAction p(base, PerturbationKind::interpolating_diffeo);
    p.diffeo_ = std::make_shared<const InterpolatingDiffeo>(std::move(f));
    return p;
}

// ------------------------------------------------------------------ plateau

RadialPlateau::RadialPlateau(const SchottkyAction& base, double center, double width)
    : chart_(base.chart(Generator::a)),
      chart_inv_(chart_.inverse()),
      model_(base.map(Generator::a)),
      lo_(center - width / 2),
      hi_(center + width / 2),
      L_(-std::log(base.config().lambda_a)),
      left_ramp_(2.0 * L_),
      right_ramp_(0.5) {
    if (!(width > 0) || !(lo_ > 0)) throw PlacementError("plateau interval must be a positive range of |u|");
    const double r_inv = base.config().radii[index(Generator::a_inv)];
    if (support_high() >= r_inv)
        throw PlacementError("plateau support reaches |u| = " + std::to_string(support_high()) +
                             ", outside I_A (|u| < " + std::to_string(r_inv) + ")");
}

double RadialPlateau::support_low() const { return lo_ * std::exp(-left_ramp_); }
double RadialPlateau::support_high() const { return hi_ * std::exp(right_ramp_); }

double RadialPlateau::beta(double tau) const {
    const double tlo = std::log(lo_);
    const double thi = std::log(hi_);
    if (tau <= tlo - left_ramp_ || tau >= thi + right_ramp_) return 0.0;
    if (tau < tlo) return smoothstep((tau - tlo + left_ramp_) / left_ramp_);
    if (tau <= thi) return 1.0;
    return 1.0 - smoothstep((tau - thi) / right_ramp_);
}

double RadialPlateau::profile(double tau) const { return tau + L_ * (1.0 - beta(tau)); }

double RadialPlateau::profile_inverse(double t) const {
    double a = std::log(support_low());
    double b = std::log(support_high());
    if (t <= profile(a)) return t - L_;
    if (t >= profile(b)) return t - L_;
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        const double m = 0.5 * (a + b);
        (profile(m) < t ? a : b) = m;
    }
    return 0.5 * (a + b);
}

Complex RadialPlateau::to_u(const SpherePoint& x) const {
    const SpherePoint w = chart_inv_(x);
    if (w.is_infinity()) return Complex(0);
    if (w.z() == Complex(0)) return Complex(std::numeric_limits<double>::infinity());
    return 1.0 / w.z();
}

SpherePoint RadialPlateau::from_u(Complex u) const {
    if (u == Complex(0)) return chart_(SpherePoint::infinity());
    return chart_(SpherePoint(1.0 / u));
}

SpherePoint RadialPlateau::forward(const SpherePoint& x) const {
    const Complex u = to_u(x);
    const double rho = std::abs(u);
    if (!(rho > support_low() && rho < support_high())) return model_(x);
    const double tau = std::log(rho);
    return from_u(u * std::exp(profile(tau) - tau));
}

SpherePoint RadialPlateau::backward(const SpherePoint& y) const {
    const Complex u = to_u(y);
    const double rho = std::abs(u);
    if (!(rho > support_low() * std::exp(L_) && rho < support_high() * std::exp(L_))) return model_.inverse()(y);
    const double t = std::log(rho);
    return from_u(u * std::exp(profile_inverse(t) - t));
}

double RadialPlateau::displacement() const {
    double best = 0;
    const double a = std::log(support_low());
    const double b = std::log(support_high());
    constexpr int kRadial = 4000;
    for (int i = 0; i <= kRadial; ++i) {
        const double tau = a + (b - a) * i / kRadial;
        for (int j = 0; j < 8; ++j) {
            const SpherePoint x = from_u(std::polar(std::exp(tau), 2.0 * std::numbers::pi * j / 8));
            best = std::max(best, chordal_distance(forward(x), model_(x)));
        }
    }
    return best;
}

std::vector<SpherePoint> RadialPlateau::plateau_points(std::size_t n) const {
    std::vector<SpherePoint> out;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double rho = lo_ + (hi_ - lo_) * (double(i) + 0.5) / double(n);
            out.push_back(from_u(std::polar(rho, 2.0 * std::numbers::pi * double(j) / double(n))));
        }
    return out;
}

PerturbedAction radial_plateau_perturbation(const SchottkyAction& base, double interval_center, double width,
                                            double amplitude) {
    PerturbedAction p(base, PerturbationKind::radial_plateau);
    if (amplitude == 0) return p;
    if (!(amplitude > 0)) throw std::invalid_argument("amplitude must be nonnegative");
    auto plateau = std::make_shared<const RadialPlateau>(base, interval_center, width);
    const double disp = plateau->displacement();
    if (disp > amplitude)
        throw PlacementError("plateau displacement " + std::to_string(disp) + " exceeds amplitude " +
                             std::to_string(amplitude));
    p.plateau_ = std::move(plateau);
    return p;
}

// ---------------------------------------------------------------- distances

namespace {

std::vector<SpherePoint> distance_samples(const Action& A, const Action& B, std::size_t samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<SpherePoint> pts;
    pts.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) pts.push_back(random_sphere_point(rng));
    for (const auto& p : A.probe_points()) pts.push_back(p);
    for (const auto& p : B.probe_points()) pts.push_back(p);
    return pts;
}

}  // namespace

double c0_distance(const Action& A, const Action& B, std::size_t samples, std::uint64_t seed) {
    double best = 0;
    for (const auto& x : distance_samples(A, B, samples, seed))
        for (Generator s : kGenerators) best = std::max(best, chordal_distance(A.apply(s, x), B.apply(s, x)));
    return best;
}

double c1_distance_estimate(const Action& A, const Action& B, std::size_t samples, double h,
                            std::uint64_t seed) {
    if (!(h >= 1e-6 && h <= 1e-3)) throw std::invalid_argument("h_step must lie in [1e-6, 1e-3]");
    double best = c0_distance(A, B, samples, seed);
    const std::array<Complex, 2> dirs = {Complex(1, 0), Complex(0, 1)};
    for (const auto& x : distance_samples(A, B, samples, seed)) {
        const MobiusMap chart_in = MobiusMap::rotation_to_origin(x).inverse();
        for (Generator s : kGenerators) {
            const MobiusMap chart_out = MobiusMap::rotation_to_origin(A.apply(s, x));
            for (const Complex& e : dirs) {
                const SpherePoint xp = chart_in(SpherePoint(h * e));
                const SpherePoint xm = chart_in(SpherePoint(-h * e));
                auto diff = [&](const Action& F) -> std::optional<Complex> {
                    const SpherePoint yp = chart_out(F.apply(s, xp));
                    const SpherePoint ym = chart_out(F.apply(s, xm));
                    if (yp.is_infinity() || ym.is_infinity()) return std::nullopt;
                    return (yp.z() - ym.z()) / (2.0 * h);
                };
                const auto da = diff(A);
                const auto db = diff(B);
                if (da && db) best = std::max(best, std::abs(*da - *db));
            }
        }
    }
    return best;
}

}  // namespace pingpong
