#pragma once

// Stability neighbourhood checks and the semiconjugacy h between a
// perturbed action and the model: h is prescribed on the fundamental
// domain, carried to the collars by escape words and collapsed on the
// limit set through the symbolic code table.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pingpong/action.hpp"
#include "pingpong/cantor.hpp"
#include "pingpong/report.hpp"

namespace pingpong {

class BudgetError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct StabilityBudget {
    double epsilon = 0;
    double delta = 0;
    double alpha = 0;

    /// Throws std::invalid_argument unless 0 < delta < epsilon < alpha / 8.
    StabilityBudget(double epsilon, double delta, double alpha);
    static StabilityBudget for_action(const SchottkyAction& act, double epsilon, double delta) {
        return {epsilon, delta, act.alpha()};
    }
};

struct StabilityOptions {
    std::size_t samples = 100000;  // items 4 and 5
    std::size_t diameter_depth = 6;
    std::size_t boundary_vertices = 256;
    std::uint64_t seed = 5;
};

/// Checklist items, each with its margin:
///   "0 c0 distance", "1 disjoint s|t", "2 s(I_t) in I_s", "3 component diameter",
///   "4 s^-1 s~ near id" / "4 s~^-1 s near id", "5 contraction s on I_t".
Report verify_stability_neighborhood(const SchottkyAction& act, const PerturbedAction& pert,
                                     const StabilityBudget& budget, const StabilityOptions& opt = {});

/// Signed margin of x in the perturbed region of s (positive inside), in
/// chart units of the boundary circle that defines the region.
double region_margin(const PerturbedAction& pert, Generator s, const SpherePoint& x);

class GeometryError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// inverse(w), confirmed on sampled collar points of the perturbed action.
ReducedWord minimal_escape_word(const PerturbedAction& pert, const ReducedWord& code, std::size_t samples = 16,
                                std::uint64_t seed = 7);

class DepthCapError : public std::runtime_error {
  public:
    DepthCapError(const std::string& what, ReducedWord code) : std::runtime_error(what), code_(std::move(code)) {}
    const ReducedWord& code() const noexcept { return code_; }

  private:
    ReducedWord code_;
};

struct Classification {
    enum class Kind { fundamental, collar, limit };
    Kind kind = Kind::fundamental;
    ReducedWord code;   // letters pulled back, outermost first
    SpherePoint point;  // Phi~_{code^-1}(x); in the fundamental domain unless kind == limit
};

/// Width of the collar blend as a fraction of the region radius.
inline constexpr double kCollarWidth = 0.1;

class Semiconjugacy {
  public:
    Semiconjugacy(const SchottkyAction& act, const PerturbedAction& pert, const StabilityBudget& budget,
                  std::size_t depth_cap);

    Classification classify(const SpherePoint& x) const;
    /// h on the fundamental domain (near identity, boundary rule on the collars).
    SpherePoint chart(const SpherePoint& y) const;
    SpherePoint operator()(const SpherePoint& x) const;
    /// Point of K with the given code (the collapse table).
    SpherePoint collapse_point(const ReducedWord& code) const;

    const StabilityBudget& budget() const noexcept { return budget_; }
    std::size_t depth_cap() const noexcept { return depth_cap_; }
    const SchottkyAction& base() const noexcept { return act_; }
    const PerturbedAction& perturbed() const noexcept { return pert_; }

  private:
    SchottkyAction act_;
    PerturbedAction pert_;
    StabilityBudget budget_;
    std::size_t depth_cap_;
    std::array<Cap, 2> caps_;  // I_a, I_b
};

struct FundamentalOptions {
    std::size_t samples = 10000;
    std::size_t boundary_samples = 256;
    std::size_t depth_cap = 0;  // 0: kSchottkyDepthCap for Mobius perturbations, else kPerturbedDepthCap
    bool require_checklist = true;
    StabilityOptions checklist{};
    std::uint64_t seed = 17;
};

struct FundamentalReport {
    Report checklist;
    double boundary_rule_residual = 0;  // max over s of d(h(Phi~_{s^-1} x), Phi_{s^-1} h(x)) on the circles
    double identity_residual = 0;       // h = id on the boundaries of I_a and I_b
    double sup_displacement = 0;        // sampled on the fundamental domain
};

/// Builds h.  Throws ConstructionRejected when the checklist fails and is
/// required, BudgetError when the sampled displacement of the chart
/// reaches 95% of epsilon.
Semiconjugacy build_fundamental_h(const SchottkyAction& act, const PerturbedAction& pert,
                                  const StabilityBudget& budget, const FundamentalOptions& opt = {},
                                  FundamentalReport* report = nullptr);

inline SpherePoint evaluate_h(const Semiconjugacy& sc, const SpherePoint& x) { return sc(x); }

struct SemiconjugacyReport {
    double equivariance_residual = 0;
    double sup_displacement = 0;
    double epsilon = 0;
    std::size_t samples = 0;
    std::vector<std::size_t> samples_per_depth;
    std::vector<double> residual_per_depth;
    double mesh_spacing = 0;
    std::size_t mesh_cells = 0;
    std::size_t uncovered_cells = 0;
    bool surjective = false;

    Report as_report() const;
};

/// Samples stratified by collar depth 0..max_depth.
SemiconjugacyReport verify_semiconjugacy(const Semiconjugacy& sc, std::size_t samples, std::size_t max_depth = 6,
                                         std::uint64_t seed = 19, std::size_t max_mesh = 200000);

struct CollapseWitness {
    ReducedWord code;
    double source_diameter = 0;
    double image_diameter = 0;
    std::size_t points = 0;
};

struct InjectivityVerdict {
    bool injective = true;  // "injective-on-probes", otherwise "collapsing"
    std::size_t probes = 0;
    std::size_t distinct_codes = 0;
    std::vector<CollapseWitness> witnesses;

    std::string label() const { return injective ? "injective-on-probes" : "collapsing"; }
};

/// Samples points in perturbed depth-cap components (random codes plus the
/// perturbation's probe points) and compares source and image spread.
InjectivityVerdict extension_injectivity_probe(const Semiconjugacy& sc, std::size_t codes = 200,
                                               std::uint64_t seed = 23);

struct JitterCalibration {
    double sigma = 0;
    std::size_t probes = 0;
    Report checklist;
};

/// Largest jitter size (binary search, `probes` steps) whose perturbation
/// passes the checklist at the given budget.
JitterCalibration calibrate_jitter(const SchottkyAction& act, const StabilityBudget& budget, std::uint64_t seed,
                                   std::size_t probes = 20, const StabilityOptions& opt = {});

}  // namespace pingpong
