#pragma once

// Reading protocols: how a panel of AOA readings becomes the tri-state
// signal handed to the intervention logic.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "aoaq/sensor_model.hpp"

namespace aoaq {

enum class TriState { Negative, Positive, Neutral };

std::string_view to_string(TriState s) noexcept;

// Neutral ("sensor system out of order") never triggers an intervention.
constexpr bool effective_trigger(TriState decision) noexcept {
    return decision == TriState::Positive;
}

struct ThresholdConfig {
    double trigger_threshold = 0.5;                   // a, open interval (0, 1)
    std::optional<double> disagreement_threshold;     // d, open interval (0, 1)

    void validate() const;
    bool operator==(const ThresholdConfig&) const = default;
};

enum class DisagreementMode { ExactEquality, Threshold };

struct SingleSensor {
    std::size_t index = 0;
    std::size_t sensors = 1;
    bool operator==(const SingleSensor&) const = default;
};

// Two sensors; the one in use flips with the flight parity.
struct Alternating {
    unsigned parity = 0;
    std::size_t active_index() const noexcept { return parity % 2; }
    bool operator==(const Alternating&) const = default;
};

struct Conjunctive {
    bool operator==(const Conjunctive&) const = default;
};
struct Disjunctive {
    bool operator==(const Disjunctive&) const = default;
};

struct GuardedSingle {
    std::size_t lead = 0;
    DisagreementMode mode = DisagreementMode::ExactEquality;
    bool operator==(const GuardedSingle&) const = default;
};

// Positive iff strictly more than half of the per-sensor verdicts are positive.
struct MajorityBoolean {
    std::size_t sensors = 3;
    bool operator==(const MajorityBoolean&) const = default;
};

// Uses the value shared by the largest group of exactly-equal readings
// (needs at least two); Neutral when all readings differ. Ties between
// groups of equal size go to the group holding the lowest sensor index.
struct MajorityAgreementGated {
    std::size_t sensors = 3;
    bool operator==(const MajorityAgreementGated&) const = default;
};

using ProtocolSpec = std::variant<SingleSensor, Alternating, Conjunctive, Disjunctive, GuardedSingle,
                                  MajorityBoolean, MajorityAgreementGated>;

std::size_t sensor_count(const ProtocolSpec& protocol) noexcept;

// Throws std::invalid_argument when the protocol's own parameters are
// inconsistent (even majority size, lead index out of range, ...).
void validate(const ProtocolSpec& protocol);

// CLI/CSV tokens: single, alternating, conj2, disj2, guarded2, majbool<n>, majgate<n>.
std::string protocol_token(const ProtocolSpec& protocol);
ProtocolSpec parse_protocol(std::string_view token);

// A guarded protocol switches to threshold-d disagreement when the
// thresholds carry a d; every other protocol is returned unchanged.
ProtocolSpec resolve_disagreement_mode(ProtocolSpec protocol, const ThresholdConfig& thresholds);

ProtocolSpec with_parity(ProtocolSpec protocol, unsigned parity);

TriState decide(const ProtocolSpec& protocol, std::span<const double> readings,
                const ThresholdConfig& thresholds);

inline TriState decide(const ProtocolSpec& protocol, const PanelSample& sample,
                       const ThresholdConfig& thresholds) {
    return decide(protocol, std::span<const double>(sample.readings), thresholds);
}

}  // namespace aoaq
