#pragma once

// File formats: scenario files (flight simulation), case files (forensic
// reasoning) and the rate CSV rows. JSON parsing is strict: unknown keys
// and wrong types are rejected with the offending key path.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aoaq/analytics.hpp"
#include "aoaq/flight_sim.hpp"
#include "aoaq/forensic.hpp"

namespace aoaq {

class ParseError : public std::runtime_error {
public:
    ParseError(std::string key, const std::string& message)
        : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

struct ScenarioFile {
    ScenarioConfig config;
    VariantPolicy policy;
    bool has_seed = false;  // whether the file pinned `seed`
};

ScenarioFile parse_scenario(std::string_view json_text);
ScenarioFile load_scenario(const std::filesystem::path& path);

struct OddsSpec {
    double prior = 1.0;
    double threshold = 1.0;
    std::vector<forensic::Evidence> factors;
};

struct CaseFile {
    std::vector<forensic::Proposition> propositions;
    std::vector<forensic::Implication> implications;
    std::vector<forensic::PromiseRecord> promises;
    std::optional<OddsSpec> odds;
};

CaseFile parse_case(std::string_view json_text);
CaseFile load_case(const std::filesystem::path& path);

// 17 significant digits.
std::string format_number(double value);

// Fixed column order of every rate table.
inline constexpr std::string_view kRateCsvHeader =
    "protocol,f,a,d,n,source,fp,fn,p_neutral,se_fp,se_fn,se_neutral,trials,seed,note";

std::vector<std::string> rate_csv_fields(const RateReport& report, std::string_view note = {});
std::string to_csv_line(const std::vector<std::string>& fields);
std::vector<std::string> parse_csv_line(std::string_view line);

}  // namespace aoaq
