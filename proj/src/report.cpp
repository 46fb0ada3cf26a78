#include "pingpong/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pingpong {

const CheckResult& Report::less(std::string property, double lhs, double rhs, std::size_t samples) {
    const bool ok = std::isfinite(lhs) && lhs < rhs;
    checks_.push_back({std::move(property), lhs, rhs, rhs - lhs, samples, ok});
    return checks_.back();
}

const CheckResult& Report::positive(std::string property, double margin, std::size_t samples) {
    checks_.push_back({std::move(property), 0.0, margin, margin, samples, std::isfinite(margin) && margin > 0});
    return checks_.back();
}

const CheckResult& Report::flag(std::string property, bool ok, std::size_t samples) {
    checks_.push_back({std::move(property), ok ? 0.0 : 1.0, 0.5, ok ? 0.5 : -0.5, samples, ok});
    return checks_.back();
}

void Report::append(const Report& other, const std::string& prefix) {
    for (auto c : other.checks_) {
        c.property = prefix + c.property;
        checks_.push_back(std::move(c));
    }
}

bool Report::all_pass() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* Report::first_failure() const {
    for (const auto& c : checks_)
        if (!c.pass) return &c;
    return nullptr;
}

const CheckResult* Report::find(const std::string& property) const {
    for (const auto& c : checks_)
        if (c.property == property) return &c;
    return nullptr;
}

double Report::min_margin(const std::string& prefix) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : checks_)
        if (c.property.rfind(prefix, 0) == 0) m = std::min(m, c.margin);
    return m;
}

nlohmann::ordered_json to_json(const CheckResult& c) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); };
    nlohmann::ordered_json j;
    j["property"] = c.property;
    j["lhs"] = num(c.lhs);
    j["rhs"] = num(c.rhs);
    j["margin"] = num(c.margin);
    j["samples"] = c.samples;
    j["pass"] = c.pass;
    return j;
}

nlohmann::ordered_json Report::to_json() const {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : checks_) arr.push_back(pingpong::to_json(c));
    return arr;
}

ConstructionRejected::ConstructionRejected(std::string property, double margin)
    : std::runtime_error("construction rejected: " + property + " (margin " + std::to_string(margin) + ")"),
      property_(std::move(property)),
      margin_(margin) {}

}  // namespace pingpong
