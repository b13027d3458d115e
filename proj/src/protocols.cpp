#include "aoaq/protocols.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace aoaq {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

TriState verdict(double reading, double a) noexcept {
    return reading > a ? TriState::Positive : TriState::Negative;
}

void require_majority_size(std::size_t n) {
    if (n < 3 || n % 2 == 0) {
        throw std::invalid_argument("majority voting needs an odd sensor count >= 3, got " +
                                    std::to_string(n));
    }
}

TriState majority_gated(std::span<const double> r, double a) noexcept {
    std::size_t best_count = 1;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        std::size_t count = 0;
        for (double v : r) count += (v == r[i]);
        if (count > best_count) {
            best_count = count;
            best_index = i;
        }
    }
    if (best_count < 2) return TriState::Neutral;
    return verdict(r[best_index], a);
}

}  // namespace

std::string_view to_string(TriState s) noexcept {
    switch (s) {
        case TriState::Positive: return "positive";
        case TriState::Negative: return "negative";
        case TriState::Neutral: return "neutral";
    }
    return "?";
}

void ThresholdConfig::validate() const {
    if (!(trigger_threshold > 0.0 && trigger_threshold < 1.0)) {
        throw std::invalid_argument("trigger threshold a must lie in (0, 1), got " +
                                    std::to_string(trigger_threshold));
    }
    if (disagreement_threshold) {
        const double d = *disagreement_threshold;
        if (!(d > 0.0 && d < 1.0)) {
            throw std::invalid_argument("disagreement threshold d must lie in (0, 1), got " +
                                        std::to_string(d));
        }
    }
}

std::size_t sensor_count(const ProtocolSpec& protocol) noexcept {
    return std::visit(overloaded{
                          [](const SingleSensor& p) { return p.sensors; },
                          [](const Alternating&) { return std::size_t{2}; },
                          [](const Conjunctive&) { return std::size_t{2}; },
                          [](const Disjunctive&) { return std::size_t{2}; },
                          [](const GuardedSingle&) { return std::size_t{2}; },
                          [](const MajorityBoolean& p) { return p.sensors; },
                          [](const MajorityAgreementGated& p) { return p.sensors; },
                      },
                      protocol);
}

void validate(const ProtocolSpec& protocol) {
    std::visit(overloaded{
                   [](const SingleSensor& p) {
                       if (p.sensors == 0 || p.index >= p.sensors) {
                           throw std::invalid_argument("single-sensor index out of range");
                       }
                   },
                   [](const Alternating&) {},
                   [](const Conjunctive&) {},
                   [](const Disjunctive&) {},
                   [](const GuardedSingle& p) {
                       if (p.lead > 1) throw std::invalid_argument("guarded lead sensor must be 0 or 1");
                   },
                   [](const MajorityBoolean& p) { require_majority_size(p.sensors); },
                   [](const MajorityAgreementGated& p) { require_majority_size(p.sensors); },
               },
               protocol);
}

std::string protocol_token(const ProtocolSpec& protocol) {
    return std::visit(overloaded{
                          [](const SingleSensor&) { return std::string("single"); },
                          [](const Alternating&) { return std::string("alternating"); },
                          [](const Conjunctive&) { return std::string("conj2"); },
                          [](const Disjunctive&) { return std::string("disj2"); },
                          [](const GuardedSingle&) { return std::string("guarded2"); },
                          [](const MajorityBoolean& p) { return "majbool" + std::to_string(p.sensors); },
                          [](const MajorityAgreementGated& p) {
                              return "majgate" + std::to_string(p.sensors);
                          },
                      },
                      protocol);
}

ProtocolSpec parse_protocol(std::string_view token) {
    if (token == "single") return SingleSensor{};
    if (token == "alternating") return Alternating{};
    if (token == "conj2") return Conjunctive{};
    if (token == "disj2") return Disjunctive{};
    if (token == "guarded2") return GuardedSingle{};

    auto parse_majority = [&](std::string_view prefix) -> std::optional<std::size_t> {
        if (!token.starts_with(prefix)) return std::nullopt;
        const std::string_view digits = token.substr(prefix.size());
        std::size_t n = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
        if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size()) {
            throw std::invalid_argument("bad sensor count in protocol token '" + std::string(token) + "'");
        }
        require_majority_size(n);
        return n;
    };
    if (auto n = parse_majority("majbool")) return MajorityBoolean{*n};
    if (auto n = parse_majority("majgate")) return MajorityAgreementGated{*n};

    throw std::invalid_argument("unknown protocol '" + std::string(token) + "'");
}

ProtocolSpec resolve_disagreement_mode(ProtocolSpec protocol, const ThresholdConfig& thresholds) {
    if (auto* g = std::get_if<GuardedSingle>(&protocol)) {
        g->mode = thresholds.disagreement_threshold ? DisagreementMode::Threshold
                                                    : DisagreementMode::ExactEquality;
    }
    return protocol;
}

ProtocolSpec with_parity(ProtocolSpec protocol, unsigned parity) {
    if (auto* alt = std::get_if<Alternating>(&protocol)) alt->parity = parity;
    return protocol;
}

TriState decide(const ProtocolSpec& protocol, std::span<const double> r,
                const ThresholdConfig& thresholds) {
    const std::size_t n = sensor_count(protocol);
    if (r.size() != n) {
        throw std::invalid_argument("protocol " + protocol_token(protocol) + " expects " +
                                    std::to_string(n) + " readings, got " + std::to_string(r.size()));
    }
    const double a = thresholds.trigger_threshold;

    return std::visit(
        overloaded{
            [&](const SingleSensor& p) { return verdict(r[p.index], a); },
            [&](const Alternating& p) { return verdict(r[p.active_index()], a); },
            [&](const Conjunctive&) {
                return (r[0] > a && r[1] > a) ? TriState::Positive : TriState::Negative;
            },
            [&](const Disjunctive&) {
                return (r[0] > a || r[1] > a) ? TriState::Positive : TriState::Negative;
            },
            [&](const GuardedSingle& p) {
                bool disagree = false;
                if (p.mode == DisagreementMode::ExactEquality) {
                    disagree = r[0] != r[1];
                } else {
                    if (!thresholds.disagreement_threshold) {
                        throw std::invalid_argument("threshold disagreement mode needs a value for d");
                    }
                    disagree = std::fabs(r[0] - r[1]) >= *thresholds.disagreement_threshold;
                }
                return disagree ? TriState::Neutral : verdict(r[p.lead], a);
            },
            [&](const MajorityBoolean&) {
                std::size_t positives = 0;
                for (double v : r) positives += (v > a);
                return 2 * positives > n ? TriState::Positive : TriState::Negative;
            },
            [&](const MajorityAgreementGated&) { return majority_gated(r, a); },
        },
        protocol);
}

}  // namespace aoaq
