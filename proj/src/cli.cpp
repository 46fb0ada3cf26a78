#include "pingpong/cli.hpp"

#include <gsl/gsl_version.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "pingpong/cantor.hpp"
#include "pingpong/semiconj.hpp"
#include "pingpong/shadow.hpp"

namespace pingpong {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr std::size_t kMaxApproximantDepth = 10;

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json point_json(const SpherePoint& p) {
    json j;
    if (p.is_infinity()) {
        j["inf"] = true;
    } else {
        j["re"] = p.z().real();
        j["im"] = p.z().imag();
    }
    return j;
}

json disc_json(const Disc& d) {
    json j;
    j["re"] = d.center.real();
    j["im"] = d.center.imag();
    j["radius"] = d.radius;
    j["side"] = d.side == Disc::Side::bounded ? "bounded" : "unbounded";
    return j;
}

json action_json(const ActionConfig& a) {
    json j;
    j["attractor_a"] = point_json(a.attractor_a);
    j["repeller_a"] = point_json(a.repeller_a);
    j["attractor_b"] = point_json(a.attractor_b);
    j["repeller_b"] = point_json(a.repeller_b);
    j["lambda_a"] = a.lambda_a;
    j["lambda_b"] = a.lambda_b;
    j["radii"] = a.radii;
    j["samples"] = a.samples;
    j["seed"] = a.seed;
    return j;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// RFC 4180: CRLF records, fields quoted when they need it.
class Csv {
  public:
    explicit Csv(std::vector<std::string> header) { row(header); }
    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            const auto& f = fields[i];
            if (f.find_first_of(",\"\r\n") == std::string::npos) {
                out_ << f;
            } else {
                out_ << '"';
                for (char c : f) {
                    if (c == '"') out_ << '"';
                    out_ << c;
                }
                out_ << '"';
            }
        }
        out_ << "\r\n";
    }
    std::string str() const { return out_.str(); }

  private:
    std::ostringstream out_;
};

std::vector<std::string> point_fields(const SpherePoint& p) {
    if (p.is_infinity()) return {"inf", "inf"};
    return {fmt(p.z().real()), fmt(p.z().imag())};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

bool stochastic(Pipeline p) { return p != Pipeline::verify_model && p != Pipeline::approximant; }

struct Outputs {
    fs::path dir;
    std::vector<std::string> files;
    void text(const std::string& name, const std::string& content) {
        write_text(dir / name, content);
        files.push_back(name);
    }
};

json class_entries(const SchottkyAction& act, const GSequence& seq, const Realization* real) {
    const auto cd = class_decomposition(seq.radius());
    json arr = json::array();
    for (std::size_t k = 0; k < cd.classes.size(); ++k) {
        const auto& cls = cd.classes[k];
        json j;
        j["representative"] = cls.representative.str();
        j["m_begin"] = cls.m_begin;
        j["length"] = cls.members.size();
        j["z_defect"] = z_defect(act, z_sequence_from_class(seq, cls));
        if (real) {
            j["shadow_error"] = real->classes[k].shadow_error;
            j["y"] = point_json(real->classes[k].y);
        }
        arr.push_back(j);
    }
    return arr;
}

GSequence make_pseudotrajectory(const SchottkyAction& act, const ExperimentSpec& spec, SpherePoint* y_out) {
    std::mt19937_64 rng(*spec.seed);
    const SpherePoint y = random_sphere_point(rng);
    if (y_out) *y_out = y;
    return noisy_pseudotrajectory(act, y, spec.n, spec.delta.value_or(1e-4), *spec.seed);
}

// Rotation of the sphere sending a fundamental-domain point to infinity, so
// that every component is a bounded disc in the drawing chart.
MobiusMap drawing_chart(const SchottkyAction& act) {
    for (double im = 2.0; im < 50; im += 0.5) {
        const SpherePoint p(Complex(0.5, im));
        if (!act.region_of(p)) {
            const MobiusMap flip(Complex(0), Complex(1), Complex(1), Complex(0));
            return flip * MobiusMap::rotation_to_origin(p);
        }
    }
    return MobiusMap::identity();
}

std::string approximant_svg(const SchottkyAction& act, const Approximant& level) {
    const MobiusMap chart = drawing_chart(act);
    std::vector<Disc> discs;
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& c : level.components) {
        const Disc d = image_disc(chart, *c.disc);
        discs.push_back(d);
        x0 = std::min(x0, d.center.real() - d.radius);
        x1 = std::max(x1, d.center.real() + d.radius);
        y0 = std::min(y0, d.center.imag() - d.radius);
        y1 = std::max(y1, d.center.imag() + d.radius);
    }
    const double size = 800, pad = 10;
    const double scale = (size - 2 * pad) / std::max(x1 - x0, y1 - y0);
    static const char* palette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};
    const char* colour = palette[level.depth % 6];
    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"800\" viewBox=\"0 0 800 "
         "800\">\n"
      << "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n"
      << "<g fill=\"" << colour << "\" fill-opacity=\"0.6\" stroke=\"black\" stroke-width=\"0.3\">\n";
    for (std::size_t i = 0; i < discs.size(); ++i) {
        const auto& d = discs[i];
        if (d.side != Disc::Side::bounded) continue;
        s << "<circle cx=\"" << short_fmt(pad + (d.center.real() - x0) * scale) << "\" cy=\""
          << short_fmt(pad + (y1 - d.center.imag()) * scale) << "\" r=\"" << short_fmt(d.radius * scale)
          << "\"><title>" << level.components[i].code.str() << "</title></circle>\n";
    }
    s << "</g>\n</svg>\n";
    return s.str();
}

int gate(const Report& rep) { return rep.all_pass() ? kExitOk : kExitGateFailed; }

json run_verify_model(const ExperimentSpec& spec, Outputs&, int& exit_code) {
    ActionConfig cfg = spec.action;
    if (spec.samples) cfg.samples = *spec.samples;
    if (spec.seed) cfg.seed = *spec.seed;
    json j;
    j["samples"] = cfg.samples;
    j["seed"] = cfg.seed;
    try {
        const auto act = build_model_action(cfg);
        j["alpha"] = act.alpha();
        json discs = json::array();
        for (const auto& d : act.discs()) discs.push_back(disc_json(d));
        j["discs"] = discs;
        j["checks"] = act.report().to_json();
        exit_code = gate(act.report());
    } catch (const ConstructionRejected& e) {
        j["error"] = e.what();
        j["failed_property"] = e.property();
        j["margin"] = num(e.margin());
        exit_code = kExitGateFailed;
    }
    return j;
}

json run_approximant(const SchottkyAction& act, const ExperimentSpec& spec, Outputs& out, int& exit_code) {
    const auto tower = approximant_tower(act, spec.n);
    Report rep;
    json levels = json::array();
    for (const auto& lvl : tower) {
        const double expected = 4 * std::pow(3.0, double(lvl.depth));
        json l;
        l["depth"] = lvl.depth;
        l["components"] = lvl.components.size();
        l["expected"] = expected;
        l["max_diameter"] = lvl.max_diameter;
        l["min_nesting_margin"] = num(lvl.min_nesting_margin);
        rep.flag("count at depth " + std::to_string(lvl.depth), double(lvl.components.size()) == expected);
        if (lvl.depth > 0) {
            const double ratio = lvl.max_diameter / tower[lvl.depth - 1].max_diameter;
            l["diameter_ratio"] = ratio;
            rep.less("diameter ratio at depth " + std::to_string(lvl.depth), ratio, 0.55);
            rep.positive("nesting margin at depth " + std::to_string(lvl.depth), lvl.min_nesting_margin,
                         lvl.components.size());
        }
        levels.push_back(l);
    }
    const auto& top = tower.back();
    Csv csv({"code", "center_re", "center_im", "radius", "side", "diameter"});
    for (const auto& c : top.components) {
        const Disc& d = *c.disc;
        csv.row({c.code.str(), fmt(d.center.real()), fmt(d.center.imag()), fmt(d.radius),
                 d.side == Disc::Side::bounded ? "bounded" : "unbounded", fmt(c.diameter)});
    }
    out.text("approximant.csv", csv.str());
    out.text("approximant.svg", approximant_svg(act, top));
    json j;
    j["n"] = spec.n;
    j["levels"] = levels;
    j["checks"] = rep.to_json();
    exit_code = gate(rep);
    return j;
}

json run_pseudo(const SchottkyAction& act, const ExperimentSpec& spec, Outputs& out, int& exit_code) {
    SpherePoint y;
    const auto seq = make_pseudotrajectory(act, spec, &y);
    const double delta = spec.delta.value_or(1e-4);
    const auto d = pseudo_defect(act, seq);
    Report rep;
    rep.less("defect", d.max_defect, delta, d.edges);
    Csv csv({"word", "re", "im"});
    for (std::size_t i = 0; i < seq.size(); ++i) {
        auto f = point_fields(seq[i]);
        csv.row({seq.ball().words[i].str(), f[0], f[1]});
    }
    out.text("pseudo.csv", csv.str());
    json j;
    j["n"] = spec.n;
    j["delta"] = delta;
    j["seed"] = *spec.seed;
    j["y"] = point_json(y);
    j["defect"] = d.max_defect;
    j["edges"] = d.edges;
    j["worst_edge"] = {{"g", d.worst_g.str()}, {"s", ReducedWord::letter(d.worst_s).str()}};
    j["checks"] = rep.to_json();
    exit_code = gate(rep);
    return j;
}

json run_shadow(const SchottkyAction& act, const ExperimentSpec& spec, Outputs& out, int& exit_code) {
    const auto seq = make_pseudotrajectory(act, spec, nullptr);
    const double eps = spec.epsilon.value_or(1e-2);
    const bool realize = spec.mode == "realize";
    ShadowOptions opt = realize ? default_shadow_options(eps) : ShadowOptions{};
    if (spec.eta) opt.eta = *spec.eta;
    opt.realize.seed = *spec.seed;
    if (spec.samples) opt.evaluations = *spec.samples;

    json j;
    j["n"] = spec.n;
    j["delta"] = spec.delta.value_or(1e-4);
    j["epsilon"] = eps;
    j["seed"] = *spec.seed;
    j["mode"] = spec.mode;
    j["defect"] = pseudo_defect(act, seq).max_defect;
    Report rep;
    std::optional<ShadowResult> res;
    try {
        res = shadow_search(act, seq, eps, realize ? ShadowMode::via_realization : ShadowMode::direct, opt);
    } catch (const std::runtime_error& e) {
        j["error"] = e.what();
    }
    const bool found = res && res->point;
    j["found"] = found;
    j["shadow_point"] = found ? point_json(*res->point) : json(nullptr);
    j["objective"] = res ? num(res->objective) : json(nullptr);
    j["evaluations"] = res ? res->evaluations : 0;
    if (realize) j["eta"] = opt.eta;
    j["per_class"] = class_entries(act, seq, res && res->realization ? &*res->realization : nullptr);
    if (res && res->realization) j["realized_checklist"] = res->checklist.to_json();
    rep.flag("shadow found", found);
    if (res) rep.less("shadow error", res->objective, eps, seq.size());
    j["checks"] = rep.to_json();

    if (found) {
        Csv csv({"word", "x_re", "x_im", "orbit_re", "orbit_im", "error"});
        for (std::size_t i = 0; i < seq.size(); ++i) {
            const auto& g = seq.ball().words[i];
            const auto o = act.evaluate(g, *res->point);
            auto a = point_fields(seq[i]), b = point_fields(o);
            csv.row({g.str(), a[0], a[1], b[0], b[1], fmt(chordal_distance(o, seq[i]))});
        }
        out.text("shadow.csv", csv.str());
    }
    exit_code = gate(rep);
    return j;
}

json run_realize(const SchottkyAction& act, const ExperimentSpec& spec, Outputs& out, int& exit_code) {
    const auto seq = make_pseudotrajectory(act, spec, nullptr);
    const double delta = spec.delta.value_or(1e-4);
    const double eta = spec.eta.value_or(1e-3);
    json j;
    j["n"] = spec.n;
    j["delta"] = delta;
    j["eta"] = eta;
    j["seed"] = *spec.seed;
    j["defect"] = pseudo_defect(act, seq).max_defect;
    Report rep;
    RealizeOptions ro;
    ro.seed = *spec.seed;
    try {
        const auto r = realize_pseudotrajectory(act, seq, eta, ro);
        const double c0 = c0_distance(act, r.perturbed, spec.samples.value_or(10000), *spec.seed);
        rep.less("exact-orbit defect", r.exact_defect, 1e-8, seq.size());
        rep.less("c0 distance", c0, 2 * std::numbers::pi * (eta + delta), spec.samples.value_or(10000));
        rep.less("shadow error", r.max_shadow_error, eta, seq.size());
        rep.less("compatibility", r.compatibility, 1e-9, seq.size());
        j["lambda"] = r.lambda;
        j["min_separation"] = r.min_separation;
        j["retries"] = r.retries;
        j["per_class"] = class_entries(act, seq, &r);
        Csv csv({"word", "x_re", "x_im", "tilde_re", "tilde_im", "distance"});
        for (std::size_t i = 0; i < seq.size(); ++i) {
            auto a = point_fields(seq[i]), b = point_fields(r.tilde[i]);
            csv.row({seq.ball().words[i].str(), a[0], a[1], b[0], b[1], fmt(chordal_distance(seq[i], r.tilde[i]))});
        }
        out.text("realize.csv", csv.str());
    } catch (const std::runtime_error& e) {
        j["error"] = e.what();
        rep.flag("realized", false);
    }
    j["checks"] = rep.to_json();
    exit_code = gate(rep);
    return j;
}

json run_semiconj(const SchottkyAction& act, const ExperimentSpec& spec, Outputs& out, int& exit_code) {
    const double eps = spec.epsilon.value_or(act.alpha() / 10);
    const double delta = spec.delta.value_or(eps / 2);
    std::optional<StabilityBudget> budget;
    try {
        budget = StabilityBudget::for_action(act, eps, delta);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("semiconj: ") + e.what());
    }
    const std::size_t samples = spec.samples.value_or(10000);
    StabilityOptions so;
    so.samples = std::max<std::size_t>(samples, 20000);
    so.diameter_depth = 4;

    json j;
    j["epsilon"] = eps;
    j["delta"] = delta;
    j["seed"] = *spec.seed;
    j["depth"] = spec.depth;
    Report rep;
    try {
        const auto cal = calibrate_jitter(act, *budget, *spec.seed, 12, so);
        const auto pert = mobius_jitter(act, cal.sigma, *spec.seed);
        FundamentalOptions fo;
        fo.checklist = so;
        FundamentalReport fr;
        const auto sc = build_fundamental_h(act, pert, *budget, fo, &fr);
        const auto v = verify_semiconjugacy(sc, samples, spec.depth, *spec.seed);
        const auto inj = extension_injectivity_probe(sc, 200, *spec.seed);
        j["sigma"] = cal.sigma;
        j["checklist"] = cal.checklist.to_json();
        json res;
        res["boundary_rule"] = fr.boundary_rule_residual;
        res["identity"] = fr.identity_residual;
        res["equivariance"] = v.equivariance_residual;
        res["sup_displacement"] = v.sup_displacement;
        res["per_depth"] = v.residual_per_depth;
        res["samples_per_depth"] = v.samples_per_depth;
        j["residuals"] = res;
        j["surjectivity"] = {{"mesh_spacing", v.mesh_spacing},
                             {"mesh_cells", v.mesh_cells},
                             {"uncovered_cells", v.uncovered_cells},
                             {"surjective", v.surjective}};
        j["injectivity_verdict"] = inj.label();
        j["injectivity_witnesses"] = inj.witnesses.size();
        rep.flag("stability checklist", cal.checklist.all_pass());
        rep.less("boundary rule", fr.boundary_rule_residual, 1e-9);
        rep.less("equivariance", v.equivariance_residual, 1e-6, v.samples);
        rep.less("sup displacement", v.sup_displacement, eps, v.samples);
        rep.flag("surjective on mesh", v.surjective, v.mesh_cells);
        rep.flag("injective on probes", inj.injective, inj.probes);

        std::mt19937_64 rng(*spec.seed);
        Csv csv({"x_re", "x_im", "h_re", "h_im"});
        for (int i = 0; i < 200; ++i) {
            const auto x = random_sphere_point(rng);
            auto a = point_fields(x), b = point_fields(sc(x));
            csv.row({a[0], a[1], b[0], b[1]});
        }
        out.text("semiconj.csv", csv.str());
    } catch (const std::runtime_error& e) {
        j["error"] = e.what();
        rep.flag("constructed", false);
    }
    j["checks"] = rep.to_json();
    exit_code = gate(rep);
    return j;
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json spec_json(const ExperimentSpec& s) {
    json j;
    j["pipeline"] = pipeline_name(s.pipeline);
    j["config"] = s.config_path;
    j["action"] = action_json(s.action);
    j["n"] = s.n;
    j["delta"] = s.delta ? json(*s.delta) : json(nullptr);
    j["epsilon"] = s.epsilon ? json(*s.epsilon) : json(nullptr);
    j["eta"] = s.eta ? json(*s.eta) : json(nullptr);
    j["depth"] = s.depth;
    j["samples"] = s.samples ? json(*s.samples) : json(nullptr);
    j["seed"] = s.seed ? json(*s.seed) : json(nullptr);
    j["mode"] = s.mode;
    j["out"] = s.out;
    return j;
}

}  // namespace

std::string pipeline_name(Pipeline p) {
    switch (p) {
        case Pipeline::verify_model: return "verify-model";
        case Pipeline::approximant: return "approximant";
        case Pipeline::pseudo: return "pseudo";
        case Pipeline::shadow: return "shadow";
        case Pipeline::realize: return "realize";
        case Pipeline::semiconj: return "semiconj";
    }
    return "?";
}

void ExperimentSpec::validate() const {
    const std::string name = pipeline_name(pipeline);
    if (stochastic(pipeline) && !seed) throw UsageError(name + " needs --seed (or [experiment] seed)");
    if (out.empty()) throw UsageError("--out must not be empty");
    auto positive = [&](const std::optional<double>& v, const char* flag) {
        if (v && !(*v > 0 && std::isfinite(*v))) throw UsageError(std::string(flag) + " must be positive");
    };
    positive(delta, "--delta");
    positive(epsilon, "--epsilon");
    positive(eta, "--eta");
    if (samples && *samples == 0) throw UsageError("--samples must be positive");
    switch (pipeline) {
        case Pipeline::approximant:
            if (n > kMaxApproximantDepth) throw UsageError("approximant depth is capped at 10");
            break;
        case Pipeline::pseudo:
        case Pipeline::shadow:
        case Pipeline::realize:
            if (n > kMaxSequenceRadius) throw UsageError("--n is capped at " + std::to_string(kMaxSequenceRadius));
            if (pipeline == Pipeline::shadow && mode != "direct" && mode != "realize")
                throw UsageError("--mode must be direct or realize");
            break;
        case Pipeline::semiconj:
            if (depth > kSchottkyDepthCap) throw UsageError("--depth is capped at 10");
            break;
        case Pipeline::verify_model: break;
    }
}

RunResult run(const ExperimentSpec& spec) {
    spec.validate();
    const auto start = std::chrono::steady_clock::now();
    const std::string started = utc_now();
    Outputs out;
    out.dir = spec.out;
    fs::create_directories(out.dir);

    RunResult result;
    json body;
    if (spec.pipeline == Pipeline::verify_model) {
        body = run_verify_model(spec, out, result.exit_code);
    } else {
        std::optional<SchottkyAction> act;
        try {
            act = build_model_action(spec.action);
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("invalid action config: ") + e.what());
        } catch (const ConstructionRejected& e) {
            body["error"] = e.what();
            result.exit_code = kExitGateFailed;
        }
        if (act) switch (spec.pipeline) {
                case Pipeline::approximant: body = run_approximant(*act, spec, out, result.exit_code); break;
                case Pipeline::pseudo: body = run_pseudo(*act, spec, out, result.exit_code); break;
                case Pipeline::shadow: body = run_shadow(*act, spec, out, result.exit_code); break;
                case Pipeline::realize: body = run_realize(*act, spec, out, result.exit_code); break;
                case Pipeline::semiconj: body = run_semiconj(*act, spec, out, result.exit_code); break;
                case Pipeline::verify_model: break;
            }
    }

    const std::string name = pipeline_name(spec.pipeline);
    json report;
    report["pipeline"] = name;
    report["pass"] = result.exit_code == kExitOk;
    for (auto& [k, v] : body.items()) report[k] = v;
    out.text(name + ".json", report.dump(2) + "\n");

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest;
    manifest["tool"] = "pingpong";
    manifest["version"] = kVersion;
    manifest["inputs"] = spec_json(spec);
    manifest["versions"] = {{"pingpong", kVersion},
                            {"compiler", __VERSION__},
                            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                            {"tomlplusplus", toml_library_version()},
                            {"gsl", GSL_VERSION}};
    manifest["started_at"] = started;
    manifest["wall_time_seconds"] = wall;
    manifest["exit_code"] = result.exit_code;
    manifest["artifacts"] = out.files;
    write_text(out.dir / "manifest.json", manifest.dump(2) + "\n");

    result.report = std::move(report);
    result.artifacts = std::move(out.files);
    return result;
}

int cli_main(int argc, char** argv) {
    CLI::App app{"Ping-pong action experiments: model checks, approximants, shadowing and semiconjugacy."};
    app.require_subcommand(1);
    std::string config_path, mode = "direct", out = "run";
    std::size_t n = 0, depth = 0, samples = 0;
    double delta = 0, epsilon = 0, eta = 0;
    std::uint64_t seed = 0;
    auto* o_n = app.add_option("--n", n, "Radius or depth");
    auto* o_delta = app.add_option("--delta", delta, "Pseudotrajectory defect or perturbation size");
    auto* o_eps = app.add_option("--epsilon", epsilon, "Shadowing or semiconjugacy tolerance");
    auto* o_eta = app.add_option("--eta", eta, "Realization tolerance");
    auto* o_depth = app.add_option("--depth", depth, "Verification depth");
    auto* o_samples = app.add_option("--samples", samples, "Sample count");
    auto* o_seed = app.add_option("--seed", seed, "RNG seed");
    app.add_option("--config", config_path, "TOML config file")->check(CLI::ExistingFile);
    app.add_option("--out", out, "Run directory");
    app.add_option("--mode", mode, "shadow: direct or realize");

    const std::pair<const char*, Pipeline> subs[] = {
        {"verify-model", Pipeline::verify_model}, {"approximant", Pipeline::approximant},
        {"pseudo", Pipeline::pseudo},             {"shadow", Pipeline::shadow},
        {"realize", Pipeline::realize},           {"semiconj", Pipeline::semiconj}};
    std::vector<std::pair<CLI::App*, Pipeline>> commands;
    for (auto [name, p] : subs) commands.emplace_back(app.add_subcommand(name)->fallthrough(), p);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    ExperimentSpec spec;
    for (auto& [cmd, p] : commands)
        if (cmd->parsed()) spec.pipeline = p;
    try {
        if (!config_path.empty()) {
            const Config cfg = load_config(config_path);
            spec.action = cfg.action;
            const auto& e = cfg.experiment;
            if (e.n) spec.n = *e.n;
            if (e.depth) spec.depth = *e.depth;
            spec.delta = e.delta;
            spec.epsilon = e.epsilon;
            spec.eta = e.eta;
            spec.samples = e.samples;
            spec.seed = e.seed;
        }
        spec.config_path = config_path;
        if (o_n->count()) spec.n = n;
        if (o_depth->count()) spec.depth = depth;
        if (o_delta->count()) spec.delta = delta;
        if (o_eps->count()) spec.epsilon = epsilon;
        if (o_eta->count()) spec.eta = eta;
        if (o_samples->count()) spec.samples = samples;
        if (o_seed->count()) spec.seed = seed;
        spec.out = out;
        spec.mode = mode;
        const auto r = run(spec);
        std::cout << pipeline_name(spec.pipeline) << ": " << (r.exit_code == kExitOk ? "pass" : "FAIL") << " ("
                  << (fs::path(spec.out) / (pipeline_name(spec.pipeline) + ".json")).string() << ")\n";
        return r.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace pingpong
