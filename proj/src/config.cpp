#include "pingpong/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

namespace pingpong {

namespace {

void reject_unknown(const toml::table& t, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [k, v] : t)
        if (!known.count(std::string(k.str()))) throw ConfigError("unknown key '" + std::string(k.str()) + "' in " + where);
}

double number(const toml::node& n, const std::string& key) {
    if (auto v = n.value<double>()) return *v;
    throw ConfigError("'" + key + "' must be a number");
}

std::uint64_t count(const toml::node& n, const std::string& key) {
    auto v = n.value<std::int64_t>();
    if (!v || !n.is_integer() || *v < 0) throw ConfigError("'" + key + "' must be a non-negative integer");
    return static_cast<std::uint64_t>(*v);
}

SpherePoint point(const toml::node& n, const std::string& key) {
    if (auto s = n.value<std::string>()) {
        if (*s == "inf") return SpherePoint::infinity();
        throw ConfigError("'" + key + "' must be [re, im] or \"inf\"");
    }
    const auto* arr = n.as_array();
    if (!arr || arr->size() != 2) throw ConfigError("'" + key + "' must be [re, im] or \"inf\"");
    return SpherePoint(Complex(number(*arr->get(0), key), number(*arr->get(1), key)));
}

}  // namespace

Config parse_config(const std::string& text, const std::string& source) {
    toml::table root;
    try {
        root = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << source << ":" << e.source().begin.line << ": " << e.description();
        throw ConfigError(os.str());
    }
    reject_unknown(root, {"version", "action", "experiment"}, source);
    Config cfg;
    if (auto* v = root.get("version")) cfg.version = static_cast<int>(count(*v, "version"));
    if (cfg.version != kConfigVersion) throw ConfigError("unsupported config version " + std::to_string(cfg.version));

    if (auto* node = root.get("action")) {
        const auto* t = node->as_table();
        if (!t) throw ConfigError("[action] must be a table");
        reject_unknown(*t,
                       {"attractor_a", "repeller_a", "attractor_b", "repeller_b", "lambda_a", "lambda_b", "radii",
                        "samples", "seed"},
                       "[action]");
        auto& a = cfg.action;
        if (auto* v = t->get("attractor_a")) a.attractor_a = point(*v, "attractor_a");
        if (auto* v = t->get("repeller_a")) a.repeller_a = point(*v, "repeller_a");
        if (auto* v = t->get("attractor_b")) a.attractor_b = point(*v, "attractor_b");
        if (auto* v = t->get("repeller_b")) a.repeller_b = point(*v, "repeller_b");
        if (auto* v = t->get("lambda_a")) a.lambda_a = number(*v, "lambda_a");
        if (auto* v = t->get("lambda_b")) a.lambda_b = number(*v, "lambda_b");
        if (auto* v = t->get("radii")) {
            const auto* arr = v->as_array();
            if (!arr || arr->size() != 4) throw ConfigError("'radii' must list four numbers");
            for (std::size_t i = 0; i < 4; ++i) a.radii[i] = number(*arr->get(i), "radii");
        }
        if (auto* v = t->get("samples")) a.samples = count(*v, "samples");
        if (auto* v = t->get("seed")) a.seed = count(*v, "seed");
    }

    if (auto* node = root.get("experiment")) {
        const auto* t = node->as_table();
        if (!t) throw ConfigError("[experiment] must be a table");
        reject_unknown(*t, {"n", "delta", "epsilon", "eta", "depth", "samples", "seed"}, "[experiment]");
        auto& e = cfg.experiment;
        if (auto* v = t->get("n")) e.n = count(*v, "n");
        if (auto* v = t->get("delta")) e.delta = number(*v, "delta");
        if (auto* v = t->get("epsilon")) e.epsilon = number(*v, "epsilon");
        if (auto* v = t->get("eta")) e.eta = number(*v, "eta");
        if (auto* v = t->get("depth")) e.depth = count(*v, "depth");
        if (auto* v = t->get("samples")) e.samples = count(*v, "samples");
        if (auto* v = t->get("seed")) e.seed = count(*v, "seed");
    }
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string toml_library_version() {
    return std::to_string(TOML_LIB_MAJOR) + "." + std::to_string(TOML_LIB_MINOR) + "." + std::to_string(TOML_LIB_PATCH);
}

}  // namespace pingpong
