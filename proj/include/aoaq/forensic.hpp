#pragma once

// Ordinal plausibility reasoning and likelihood-ratio odds updating.
//
// Plausibility levels are an ordered scale with no numeric meaning; every
// check here is order-theoretic.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aoaq::forensic {

enum class Plausibility {
    False,
    VeryImplausible,
    Implausible,
    FiftyFifty,
    Plausible,
    VeryPlausible,
    True,
};

inline constexpr int kPlausibilityLevels = 7;

// Tokens: false, very-implausible, implausible, fifty-fifty, plausible,
// very-plausible, true.
std::string_view to_string(Plausibility p) noexcept;
Plausibility parse_plausibility(std::string_view token);

// Returns the level one step up/down, saturating at the ends.
Plausibility raised(Plausibility p) noexcept;
Plausibility lowered(Plausibility p) noexcept;

struct Proposition {
    std::string id;
    std::string statement;
    Plausibility level = Plausibility::FiftyFifty;
};

struct Implication {
    std::string antecedent;
    std::string consequent;
};

struct ImplicationGraph {
    std::vector<std::string> nodes;
    std::vector<Implication> edges;

    static ImplicationGraph from_propositions(const std::vector<Proposition>& propositions,
                                              std::vector<Implication> edges);
};

struct Violation {
    std::string antecedent;
    std::string consequent;
    Plausibility antecedent_level;
    Plausibility consequent_level;
    std::string reason;
};

// For every edge A -> B: level(A) must not exceed level(B); a True
// antecedent forces a True consequent and a False consequent forces a
// False antecedent. Throws std::invalid_argument on duplicate ids, edges
// naming unknown propositions, or a cycle.
std::vector<Violation> check_consistency(const ImplicationGraph& graph,
                                         const std::vector<Proposition>& propositions);

struct PromiseRecord {
    std::string promiser;
    std::string promisee;
    std::string body;
    Plausibility assessment = Plausibility::FiftyFifty;

    void validate() const;
};

struct Evidence {
    double likelihood_ratio = 1.0;
    std::string label;
};

class OddsState {
public:
    OddsState(double prior_odds, double threshold);

    double prior_odds() const noexcept { return prior_; }
    double posterior_odds() const noexcept { return posterior_; }
    double threshold() const noexcept { return threshold_; }
    const std::vector<Evidence>& evidence() const noexcept { return evidence_; }

    friend OddsState update_odds(OddsState state, double likelihood_ratio, std::string label);

private:
    double prior_;
    double posterior_;
    double threshold_;
    std::vector<Evidence> evidence_;
};

// Throws std::invalid_argument unless likelihood_ratio > 0.
OddsState update_odds(OddsState state, double likelihood_ratio, std::string label);

// Inclusive: decides true when the posterior odds reach the threshold.
bool decide_threshold(const OddsState& state) noexcept;

}  // namespace aoaq::forensic
