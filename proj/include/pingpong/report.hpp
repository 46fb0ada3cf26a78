#pragma once

// Verification records shared by every module.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace pingpong {

struct CheckResult {
    std::string property;
    double lhs = 0;
    double rhs = 0;
    double margin = 0;  // rhs - lhs for "lhs < rhs"
    std::size_t samples = 0;
    bool pass = false;
};

class Report {
  public:
    /// Records lhs < rhs (strict).
    const CheckResult& less(std::string property, double lhs, double rhs, std::size_t samples = 0);
    /// Records a positive margin (margin > 0).
    const CheckResult& positive(std::string property, double margin, std::size_t samples = 0);
    const CheckResult& flag(std::string property, bool ok, std::size_t samples = 0);
    void append(const Report& other, const std::string& prefix = "");

    const std::vector<CheckResult>& checks() const noexcept { return checks_; }
    bool all_pass() const;
    /// First failing check, or nullptr.
    const CheckResult* first_failure() const;
    const CheckResult* find(const std::string& property) const;
    double min_margin(const std::string& prefix) const;

    nlohmann::ordered_json to_json() const;

  private:
    std::vector<CheckResult> checks_;
};

nlohmann::ordered_json to_json(const CheckResult& c);

/// A construction whose verification failed.
class ConstructionRejected : public std::runtime_error {
  public:
    ConstructionRejected(std::string property, double margin);
    const std::string& property() const noexcept { return property_; }
    double margin() const noexcept { return margin_; }

  private:
    std::string property_;
    double margin_;
};

}  // namespace pingpong
