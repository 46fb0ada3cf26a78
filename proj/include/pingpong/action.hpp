#pragma once

// The ping-pong model action of F2 on the sphere and its perturbations.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pingpong/diffeo.hpp"
#include "pingpong/report.hpp"
#include "pingpong/sphere.hpp"
#include "pingpong/words.hpp"

namespace pingpong {

struct ActionConfig {
    SpherePoint attractor_a{Complex(0.0, 0.0)};
    SpherePoint repeller_a = SpherePoint::infinity();
    SpherePoint attractor_b{Complex(1.0, 0.0)};
    SpherePoint repeller_b{Complex(-1.0, 0.0)};
    double lambda_a = 0.04;
    double lambda_b = 0.04;
    /// Chart radii indexed by Generator.  In the chart w of s (attractor at 0,
    /// repeller at infinity) I_s = {|w| < r_s} and I_{s^-1} = {|1/w| < r_{s^-1}};
    /// consistency requires r_s * r_{s^-1} = lambda_s.
    std::array<double, 4> radii{0.2, 0.2, 0.2, 0.2};
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
};

/// Anything that assigns a sphere map to each generator.
class Action {
  public:
    virtual ~Action() = default;

    virtual SpherePoint apply(Generator s, const SpherePoint& x) const = 0;
    /// Open region I_s (or its perturbed counterpart).
    virtual bool in_region(Generator s, const SpherePoint& x) const = 0;
    /// Extra points where the action differs from the model (for sup sampling).
    virtual std::vector<SpherePoint> probe_points() const { return {}; }
    /// The Mobius map of s, when the generator acts by one.
    virtual const MobiusMap* mobius(Generator) const { return nullptr; }
    /// The region of s as an exact disc, when it is one.
    virtual std::optional<Disc> region_disc(Generator) const { return std::nullopt; }
    /// Boundary of the region of s sampled at n points.
    virtual Polygon region_polygon(Generator s, std::size_t n = 256) const;

    /// Phi_g(x) for g = s_n ... s_1: s_1 is applied first.
    SpherePoint evaluate(const ReducedWord& g, SpherePoint x) const;
    /// The generator whose region contains x, if any.
    std::optional<Generator> region_of(const SpherePoint& x) const;
};

class SchottkyAction final : public Action {
  public:
    SpherePoint apply(Generator s, const SpherePoint& x) const override { return maps_[index(s)](x); }
    bool in_region(Generator s, const SpherePoint& x) const override { return discs_[index(s)].contains(x); }
    const MobiusMap* mobius(Generator s) const override { return &maps_[index(s)]; }
    std::optional<Disc> region_disc(Generator s) const override { return discs_[index(s)]; }

    const ActionConfig& config() const noexcept { return cfg_; }
    const MobiusMap& map(Generator s) const { return maps_[index(s)]; }
    const Disc& disc(Generator s) const { return discs_[index(s)]; }
    const std::array<Disc, 4>& discs() const noexcept { return discs_; }
    /// Chart map w -> z of the generator pair of s (attractor of the positive letter at 0).
    const MobiusMap& chart(Generator s) const { return charts_[index(s) / 2]; }
    /// Minimum pairwise chordal gap between the four closed discs.
    double alpha() const noexcept { return alpha_; }
    const Report& report() const noexcept { return report_; }
    /// Matrix product of the generator maps of g.
    MobiusMap composed(const ReducedWord& g) const;

  private:
    friend SchottkyAction build_model_action(const ActionConfig& cfg);
    ActionConfig cfg_;
    std::array<MobiusMap, 4> maps_;
    std::array<Disc, 4> discs_;
    std::array<MobiusMap, 2> charts_;
    double alpha_ = 0;
    Report report_;
};

/// Builds the model and runs its verification suite; throws
/// ConstructionRejected naming the first failing property, or
/// std::invalid_argument when the configuration itself is inconsistent.
SchottkyAction build_model_action(const ActionConfig& cfg);

/// The verification checks alone (skipping the rejection).
Report verify_model(const SchottkyAction& act, std::size_t samples, std::uint64_t seed);

class RadialPlateau;

enum class PerturbationKind { mobius_jitter, interpolating_diffeo, radial_plateau };

class PerturbedAction final : public Action {
  public:
    SpherePoint apply(Generator s, const SpherePoint& x) const override;
    /// I~_a = I_a, I~_b = I_b; x lies in I~_{s^-1} iff Phi~_s(x) misses the closure of I_s.
    bool in_region(Generator s, const SpherePoint& x) const override;
    std::vector<SpherePoint> probe_points() const override;
    const MobiusMap* mobius(Generator s) const override;

    PerturbationKind kind() const noexcept { return kind_; }
    const SchottkyAction& base() const noexcept { return base_; }
    const InterpolatingDiffeo* diffeo() const noexcept { return diffeo_.get(); }
    const RadialPlateau* plateau() const noexcept { return plateau_.get(); }

    /// Boundary of I~_s sampled at n points (the image of the model circle
    /// under the inverse generator for s = a^-1, b^-1).
    Polygon region_polygon(Generator s, std::size_t n = 256) const override;
    /// For jitter perturbations every region is a round disc.
    std::optional<Disc> region_disc(Generator s) const override;

    /// Round-trip error max |Phi~_{s^-1} Phi~_s x - x| over s and samples.
    double round_trip_error(std::size_t samples, std::uint64_t seed = 3) const;

  private:
    friend PerturbedAction mobius_perturbation(const SchottkyAction&, const MobiusMap&, const MobiusMap&);
    friend PerturbedAction perturb_action(const SchottkyAction&, InterpolatingDiffeo);
    friend PerturbedAction radial_plateau_perturbation(const SchottkyAction&, double, double, double);

    explicit PerturbedAction(SchottkyAction base, PerturbationKind kind) : base_(std::move(base)), kind_(kind) {}

    SchottkyAction base_;
    PerturbationKind kind_;
    std::array<MobiusMap, 4> maps_;  // jitter only
    std::shared_ptr<const InterpolatingDiffeo> diffeo_;
    std::shared_ptr<const RadialPlateau> plateau_;
};

/// Generators replaced by the given Mobius maps m~_a, m~_b.
PerturbedAction mobius_perturbation(const SchottkyAction& base, const MobiusMap& ma, const MobiusMap& mb);
/// m~_s = J_s m_s with J_s a random near-identity Mobius map of size sigma.
PerturbedAction mobius_jitter(const SchottkyAction& base, double sigma, std::uint64_t seed);
/// Phi~_s = f Phi_s and Phi~_{s^-1} = Phi_s^-1 f^-1 for s in {a, b}.
PerturbedAction perturb_action(const SchottkyAction& base, InterpolatingDiffeo f);

class PlacementError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Radial plateau near the repeller of a.  In the chart u = 1/w of a (w the
/// a-chart) with tau = ln|u|, Phi_a is tau -> tau + L, L = -ln(lambda_a).
/// The perturbed profile G(tau) = tau + L (1 - beta(tau)) has beta = 1 on
/// J = [center - width/2, center + width/2] (|u| units), so each circle
/// |u| in J is fixed; the argument of u is untouched.
class RadialPlateau {
  public:
    RadialPlateau(const SchottkyAction& base, double center, double width);

    SpherePoint forward(const SpherePoint& x) const;
    SpherePoint backward(const SpherePoint& y) const;
    double profile(double tau) const;
    double profile_inverse(double tau_image) const;
    /// Sup chordal distance between Phi~_a and Phi_a (sampled along the support).
    double displacement() const;
    double plateau_low() const noexcept { return lo_; }
    double plateau_high() const noexcept { return hi_; }
    /// |u| range where the profile differs from the model.
    double support_low() const;
    double support_high() const;
    /// Points on the plateau circles.
    std::vector<SpherePoint> plateau_points(std::size_t n) const;

  private:
    double beta(double tau) const;
    SpherePoint from_u(Complex u) const;
    Complex to_u(const SpherePoint& x) const;  // u = 1/w, 0 for the repeller

    MobiusMap chart_;      // w -> z for the a-chart
    MobiusMap chart_inv_;  // z -> w
    MobiusMap model_;
    double lo_, hi_;  // plateau |u| range
    double L_;
    double left_ramp_, right_ramp_;  // in tau
};

/// Phi~_a replaced by the plateau map; amplitude bounds the sup
/// displacement (0 returns the model).  Throws PlacementError when the
/// support leaves I_{a^-1} or the displacement exceeds the amplitude.
PerturbedAction radial_plateau_perturbation(const SchottkyAction& base, double interval_center, double width,
                                            double amplitude);

/// max over s of the sampled sup of d(A_s(x), B_s(x)); prefix-stable in samples.
double c0_distance(const Action& A, const Action& B, std::size_t samples, std::uint64_t seed = 11);

/// max of c0_distance and the finite-difference discrepancy of differentials
/// in two orthogonal chart directions.
double c1_distance_estimate(const Action& A, const Action& B, std::size_t samples, double h_step,
                            std::uint64_t seed = 13);

}  // namespace pingpong
