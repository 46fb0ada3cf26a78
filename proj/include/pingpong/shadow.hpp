#pragma once

// Pseudotrajectories indexed by the Cayley ball, their defect, the class
// reduction to orbits of the composite Phi_{b^-1} Phi_a, and the shadowing
// pipelines (direct search, or realization as an exact orbit of a nearby
// action followed by the semiconjugacy).

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pingpong/action.hpp"
#include "pingpong/report.hpp"
#include "pingpong/semiconj.hpp"
#include "pingpong/words.hpp"

namespace pingpong {

inline constexpr std::size_t kMaxSequenceRadius = 8;

/// Shared Cayley ball of the given radius (cached, thread-safe).
std::shared_ptr<const BallIndex> ball_index(std::size_t n);

/// A map ball(n) -> sphere, stored in the shortlex order of the ball.
class GSequence {
  public:
    explicit GSequence(std::size_t n);
    GSequence(std::shared_ptr<const BallIndex> ball, std::vector<SpherePoint> points);

    std::size_t radius() const noexcept { return ball_->radius(); }
    std::size_t size() const noexcept { return points_.size(); }
    const BallIndex& ball() const noexcept { return *ball_; }
    const std::vector<SpherePoint>& points() const noexcept { return points_; }
    std::vector<SpherePoint>& points() noexcept { return points_; }
    const SpherePoint& operator[](std::size_t i) const { return points_[i]; }
    SpherePoint& operator[](std::size_t i) { return points_[i]; }
    /// Throws std::out_of_range outside the ball.
    const SpherePoint& at(const ReducedWord& g) const;
    /// The values on ball(m), m <= radius().
    GSequence restrict_to(std::size_t m) const;

  private:
    std::shared_ptr<const BallIndex> ball_;
    std::vector<SpherePoint> points_;
};

/// x_g = Phi_g(y) over ball(n).
GSequence orbit_sequence(const Action& act, const SpherePoint& y, std::size_t n);

/// Breadth-first from x_e = y: x_{sg} is Phi_s(x_g) moved by a random
/// chordal offset, resampled until both edge defects with the parent stay
/// below 0.9 delta.
GSequence noisy_pseudotrajectory(const Action& act, const SpherePoint& y, std::size_t n, double delta,
                                 std::uint64_t seed);

struct PseudoDefectReport {
    double max_defect = 0;
    ReducedWord worst_g;  // edge x_{sg} vs Phi_s(x_g)
    Generator worst_s = Generator::a;
    std::size_t edges = 0;
};

/// Max of d(x_{sg}, Phi_s(x_g)) over edges with g and sg both in the ball.
PseudoDefectReport pseudo_defect(const Action& act, const GSequence& seq);

/// The word b^-1 a, whose left multiplication defines the classes.
ReducedWord class_generator();

struct GClass {
    ReducedWord representative;
    int m_begin = 0;                   // first index m; the representative sits at m = 0
    std::vector<std::size_t> members;  // ball indices of c^m g0 for m = m_begin, m_begin + 1, ...
};

struct ClassDecomposition {
    std::size_t radius = 0;
    std::vector<GClass> classes;  // ordered by representative, shortlex
};

ClassDecomposition class_decomposition(std::size_t n);

/// z_m = x_{c^m g0} over a class, with c = b^-1 a.
struct ZSegment {
    int m_begin = 0;
    std::vector<SpherePoint> z;
    const SpherePoint& at(int m) const { return z[static_cast<std::size_t>(m - m_begin)]; }
    int m_end() const { return m_begin + static_cast<int>(z.size()); }
};

ZSegment z_sequence_from_class(const GSequence& seq, const GClass& cls);

/// Phi_{b^-1} Phi_a and its inverse.
SpherePoint composite(const Action& act, const SpherePoint& y);
SpherePoint composite_inverse(const Action& act, const SpherePoint& y);
/// (Phi_{b^-1} Phi_a)^m.
SpherePoint composite_power(const Action& act, const SpherePoint& y, int m);

/// max_m d(F(z_m), z_{m+1}).
double z_defect(const Action& act, const ZSegment& seg);
/// max_m d(F^m(y), z_m).
double z_shadow_error(const Action& act, const ZSegment& seg, const SpherePoint& y);

/// Sampled modulus of continuity of Phi_{b^-1} at scale delta: random pairs
/// plus pairs anchored where Phi_{b^-1} expands most.
double delta1(const SchottkyAction& act, double delta, std::size_t pairs = 100000, std::uint64_t seed = 29);

/// True when the composite generator acts by a loxodromic Mobius map.
bool composite_is_loxodromic(const SchottkyAction& act);

class ShadowingFailed : public std::runtime_error {
  public:
    ShadowingFailed(const std::string& what, std::size_t class_id, double error)
        : std::runtime_error(what), class_id_(class_id), error_(error) {}
    std::size_t class_id() const noexcept { return class_id_; }
    double error() const noexcept { return error_; }

  private:
    std::size_t class_id_;
    double error_;
};

/// Point y whose composite orbit stays within eta of the segment: the
/// Chebyshev center of the pulled-back eta-discs, found by simplex
/// minimization of the shadowing error.  Throws ShadowingFailed (class id
/// 0) when the error stays at or above eta.
SpherePoint z_shadow_northsouth(const Action& act, const ZSegment& seg, double eta);

struct ClassShadow {
    ReducedWord representative;
    std::size_t length = 0;
    double z_defect = 0;
    double shadow_error = 0;
    SpherePoint y;
};

struct RealizeOptions {
    std::uint64_t seed = 31;
    int max_retries = 5;
    double distinct_tolerance = 1e-9;
};

struct Realization {
    GSequence tilde;
    PerturbedAction perturbed;
    std::vector<ClassShadow> classes;
    double max_shadow_error = 0;    // max_g d(x_g, x~_g)
    double exact_defect = 0;        // pseudo defect of x~ under the perturbed action
    double compatibility = 0;       // max_g d(Phi_a(x~_{a^-1 g}), Phi_b(x~_{b^-1 g}))
    double lambda = 0;              // move bound of the diffeomorphism
    double min_separation = 0;      // among the x~_g and among the move sources
    int retries = 0;
};

/// Per-class shadowing, distinctness enforcement and the interpolating
/// diffeomorphism f; the perturbed action is (f Phi_a, f Phi_b).
Realization realize_pseudotrajectory(const SchottkyAction& act, const GSequence& seq, double eta,
                                     const RealizeOptions& opt = {});

/// Moves classes apart by jitter of their shadow points (< eta / 100) until
/// every pair of realized points is farther apart than the tolerance.
/// Returns the number of jitter rounds used.
int enforce_distinctness(const Action& act, const ClassDecomposition& cd, const GSequence& seq,
                         std::vector<ClassShadow>& shadows, double eta, double tolerance, std::uint64_t seed);

/// x~ from per-class shadow points.
GSequence tilde_from_shadows(const Action& act, const ClassDecomposition& cd, const std::vector<ClassShadow>& sh,
                             std::size_t n);

/// max over g with a^-1 g and b^-1 g in the ball.
double compatibility_residual(const Action& act, const GSequence& seq);

enum class ShadowMode { direct, via_realization };

struct ShadowOptions {
    std::size_t restarts = 8;
    std::size_t evaluations = 10000;
    double eta = 1e-3;  // via_realization
    RealizeOptions realize{};
    FundamentalOptions semiconj{};
};

struct ShadowResult {
    std::optional<SpherePoint> point;
    double objective = 0;  // max_g d(Phi_g(y), x_g) at the best y
    std::size_t evaluations = 0;
    std::optional<Realization> realization;
    Report checklist;  // via_realization: stability checklist of the realized action
};

/// max_g d(Phi_g(y), x_g).
double shadow_objective(const Action& act, const GSequence& seq, const SpherePoint& y);

ShadowResult shadow_search(const SchottkyAction& act, const GSequence& seq, double epsilon, ShadowMode mode,
                           const ShadowOptions& opt = {});

ShadowOptions default_shadow_options(double epsilon);

struct Delta0Calibration {
    double delta0 = 0;
    std::size_t candidates = 0;
};

/// Largest delta (binary search in log scale) for which realization
/// succeeds on `probes` seeded pseudotrajectories of radius n.
Delta0Calibration calibrate_delta0(const SchottkyAction& act, std::size_t n, double eta, std::uint64_t seed,
                                   std::size_t probes = 20, std::size_t steps = 10);

}  // namespace pingpong
