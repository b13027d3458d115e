#include "aoaq/forensic.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace aoaq::forensic {

namespace {

constexpr std::array<std::string_view, kPlausibilityLevels> kTokens{
    "false", "very-implausible", "implausible", "fifty-fifty", "plausible", "very-plausible", "true",
};

int rank(Plausibility p) noexcept { return static_cast<int>(p); }

}  // namespace

std::string_view to_string(Plausibility p) noexcept { return kTokens[static_cast<std::size_t>(rank(p))]; }

Plausibility parse_plausibility(std::string_view token) {
    for (std::size_t i = 0; i < kTokens.size(); ++i) {
        if (kTokens[i] == token) return static_cast<Plausibility>(i);
    }
    throw std::invalid_argument("unknown plausibility level '" + std::string(token) + "'");
}

Plausibility raised(Plausibility p) noexcept {
    return p == Plausibility::True ? p : static_cast<Plausibility>(rank(p) + 1);
}

Plausibility lowered(Plausibility p) noexcept {
    return p == Plausibility::False ? p : static_cast<Plausibility>(rank(p) - 1);
}

ImplicationGraph ImplicationGraph::from_propositions(const std::vector<Proposition>& propositions,
                                                     std::vector<Implication> edges) {
    ImplicationGraph g;
    g.nodes.reserve(propositions.size());
    for (const auto& p : propositions) g.nodes.push_back(p.id);
    g.edges = std::move(edges);
    return g;
}

std::vector<Violation> check_consistency(const ImplicationGraph& graph,
                                         const std::vector<Proposition>& propositions) {
    std::unordered_map<std::string, Plausibility> level;
    for (const auto& p : propositions) {
        if (p.id.empty()) throw std::invalid_argument("proposition with empty id");
        if (!level.emplace(p.id, p.level).second) {
            throw std::invalid_argument("duplicate proposition id '" + p.id + "'");
        }
    }

    std::unordered_map<std::string, std::size_t> index;
    for (const auto& id : graph.nodes) {
        if (!level.contains(id)) throw std::invalid_argument("graph node '" + id + "' has no proposition");
        index.emplace(id, index.size());
    }
    std::vector<std::vector<std::size_t>> out(index.size());
    for (const auto& e : graph.edges) {
        const auto a = index.find(e.antecedent);
        const auto b = index.find(e.consequent);
        if (a == index.end() || b == index.end()) {
            throw std::invalid_argument("implication " + e.antecedent + " -> " + e.consequent +
                                        " names an unknown proposition");
        }
        out[a->second].push_back(b->second);
    }

    // Iterative three-colour DFS for cycle detection.
    std::vector<int> colour(index.size(), 0);
    for (std::size_t root = 0; root < index.size(); ++root) {
        if (colour[root] != 0) continue;
        std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
        colour[root] = 1;
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (next < out[node].size()) {
                const std::size_t child = out[node][next++];
                if (colour[child] == 1) throw std::invalid_argument("implication graph contains a cycle");
                if (colour[child] == 0) {
                    colour[child] = 1;
                    stack.emplace_back(child, 0);
                }
            } else {
                colour[node] = 2;
                stack.pop_back();
            }
        }
    }

    std::vector<Violation> violations;
    for (const auto& e : graph.edges) {
        const Plausibility la = level.at(e.antecedent);
        const Plausibility lb = level.at(e.consequent);
        std::string reason;
        if (rank(la) > rank(lb)) {
            reason = "antecedent is more plausible than its consequent";
        } else if (la == Plausibility::True && lb != Plausibility::True) {
            reason = "true antecedent requires a true consequent";
        } else if (lb == Plausibility::False && la != Plausibility::False) {
            reason = "false consequent requires a false antecedent";
        }
        if (!reason.empty()) violations.push_back({e.antecedent, e.consequent, la, lb, std::move(reason)});
    }
    return violations;
}

void PromiseRecord::validate() const {
    if (promiser.empty()) throw std::invalid_argument("promise without promiser");
    if (promisee.empty()) throw std::invalid_argument("promise without promisee");
}

OddsState::OddsState(double prior_odds, double threshold)
    : prior_(prior_odds), posterior_(prior_odds), threshold_(threshold) {
    if (!(prior_odds > 0.0) || !std::isfinite(prior_odds)) {
        throw std::invalid_argument("prior odds must be a positive finite number");
    }
    if (!(threshold > 0.0) || !std::isfinite(threshold)) {
        throw std::invalid_argument("odds threshold must be a positive finite number");
    }
}

OddsState update_odds(OddsState state, double likelihood_ratio, std::string label) {
    if (!(likelihood_ratio > 0.0) || !std::isfinite(likelihood_ratio)) {
        throw std::invalid_argument("likelihood ratio must be a positive finite number");
    }
    state.posterior_ *= likelihood_ratio;
    state.evidence_.push_back({likelihood_ratio, std::move(label)});
    return state;
}

bool decide_threshold(const OddsState& state) noexcept {
    return state.posterior_odds() >= state.threshold();
}

}  // namespace aoaq::forensic
