#pragma once

// Discrete-time flight simulation of the intervention logic on top of the
// sensor and protocol layers.
//
// Each step samples the panel at the current true AOA, decides, and then
// lets the variant policy react. The AOA follows a clamped AR(1) process
// on [0, 1], which is a stylization with no aerodynamic meaning. Trim is a
// scalar in abstract units; the default magnitudes are arbitrary.
//
// Random draws per flight are independent of the variant policy: the bird
// strike is drawn up front, then every step draws sensor readings, one
// pilot uniform and one AOA innovation. Two policies run on the same seed
// therefore see identical AOA traces and identical decisions.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aoaq/protocols.hpp"
#include "aoaq/random_stream.hpp"
#include "aoaq/sensor_model.hpp"

namespace aoaq {

enum class MachBucket { Low, Mid, High };
enum class VariantName { McasLegacy, Mcasu, MaxMin };
enum class DisagreePolicy { Ignore, DisableForFlight };
enum class RepeatPolicy { RepeatAfterPause, OncePerEpisode, Never };
enum class OverridePolicy { YokeOverrides, YokeIgnored };

std::string_view to_string(MachBucket b) noexcept;
std::string_view to_string(VariantName v) noexcept;
MachBucket parse_mach_bucket(std::string_view token);
VariantName parse_variant_name(std::string_view token);

struct MagnitudeTable {
    double low = 2.0;
    double mid = 2.0;
    double high = 2.0;

    double at(MachBucket bucket) const noexcept;
    bool dominated_by(const MagnitudeTable& other) const noexcept;
};

struct VariantPolicy {
    VariantName name = VariantName::McasLegacy;
    DisagreePolicy disagree_policy = DisagreePolicy::Ignore;
    RepeatPolicy repeat_policy = RepeatPolicy::RepeatAfterPause;
    OverridePolicy override_policy = OverridePolicy::YokeIgnored;
    MagnitudeTable magnitude;
    int intervention_duration = 5;  // steps
    int pause_steps = 5;            // quiet steps before a legacy repeat
    int episode_reset_steps = 10;   // E: non-positive steps that close an episode
    int runaway_limit = 3;          // consecutive un-countered interventions

    static VariantPolicy mcas_legacy();
    static VariantPolicy mcasu();
    static VariantPolicy max_min();
    static VariantPolicy named(VariantName name);

    // Checks the per-variant behavioural constraints; mcasu magnitudes must
    // not exceed the legacy defaults.
    void validate() const;
};

struct AoaProcess {
    double mean = 0.3;         // mu in (0, 1)
    double persistence = 0.9;  // rho in [0, 1)
    double volatility = 0.02;  // sigma >= 0
    double initial = 0.3;      // in [0, 1]
};

struct BirdStrikeModel {
    bool enabled = false;
    double probability = 0.0;  // per flight
};

struct MachSegment {
    int start = 0;
    MachBucket bucket = MachBucket::Mid;
};

struct PilotModel {
    std::optional<int> cutout_after_interventions;
    double counteract_probability = 0.0;  // per step while an intervention runs
};

struct ScenarioConfig {
    int steps = 200;
    AoaProcess aoa;
    BirdStrikeModel bird_strike;
    std::vector<MachSegment> mach_profile{MachSegment{}};
    PilotModel pilot;
    ProtocolSpec protocol = GuardedSingle{};
    ThresholdConfig thresholds;
    FaultModel fault;
    std::uint64_t seed = 0;

    void validate() const;
    MachBucket mach_at(int step) const noexcept;
};

struct BirdStrike {
    int step = 0;
    std::size_t sensor = 0;
};

struct FlightState {
    int step = 0;
    double aoa = 0.0;
    DefectMask defects;
    std::optional<BirdStrike> strike;
    unsigned parity = 0;

    double trim = 0.0;
    bool disabled = false;
    bool cutout = false;

    // Running intervention, if any.
    int intervention_remaining = 0;
    double intervention_rate = 0.0;     // trim per step
    double intervention_applied = 0.0;  // trim applied so far by it
    int next_repeat_step = 0;           // earliest legacy restart

    bool episode_active = false;
    int quiet_steps = 0;
    bool intervened_this_episode = false;
    int consecutive_uncountered = 0;

    // Running outcome.
    int interventions = 0;
    int episodes = 0;
    int disagreement_events = 0;
    double max_trim_excursion = 0.0;
    std::optional<int> disabled_at;
    std::optional<int> cutout_engaged_at;
    bool runaway = false;

    bool intervention_active() const noexcept { return intervention_remaining > 0; }
};

struct StepEvents {
    int step = 0;
    double aoa = 0.0;
    TriState decision = TriState::Negative;
    bool disagreement = false;
    bool disabled_now = false;
    bool episode_started = false;
    bool intervention_started = false;
    bool counteracted = false;
    bool intervention_completed = false;
    bool cutout_now = false;
    double trim = 0.0;

    bool operator==(const StepEvents&) const = default;
};

struct StepResult {
    FlightState state;
    StepEvents events;
};

struct FlightOutcome {
    int interventions = 0;
    std::optional<int> disabled_at;
    int disagreement_events = 0;
    double max_trim_excursion = 0.0;
    std::optional<int> cutout_engaged_at;
    int episodes = 0;
    bool runaway_flag = false;

    bool operator==(const FlightOutcome&) const = default;
};

// Draws the bird strike (always consuming the same randomness) and the
// per-flight defect mask.
FlightState start_flight(const ScenarioConfig& config, RandomStream& rng, unsigned parity = 0);

StepResult step_flight(const FlightState& state, const ScenarioConfig& config,
                       const VariantPolicy& policy, RandomStream& rng);

FlightOutcome outcome_of(const FlightState& state);

// Uses RandomStream(config.seed).
FlightOutcome run_flight(const ScenarioConfig& config, const VariantPolicy& policy);

FlightOutcome run_flight_with_seed(const ScenarioConfig& config, const VariantPolicy& policy,
                                   std::uint64_t stream_seed, unsigned parity);

// Same flight, with the per-step event log.
std::vector<StepEvents> trace_flight(const ScenarioConfig& config, const VariantPolicy& policy,
                                     std::uint64_t stream_seed, unsigned parity = 0);

struct FleetStatistics {
    std::uint64_t flights = 0;
    std::uint64_t seed = 0;
    std::uint64_t disabled = 0;
    std::uint64_t with_disagreement = 0;
    std::uint64_t runaway = 0;
    std::uint64_t cutout = 0;
    std::uint64_t total_interventions = 0;
    double mean_interventions = 0.0;
    double mean_max_trim_excursion = 0.0;

    double fraction_disabled() const noexcept;
    double fraction_with_disagreement() const noexcept;
    double runaway_fraction() const noexcept;
    double cutout_fraction() const noexcept;
    // Binomial standard error of a fleet fraction.
    double se(double fraction) const noexcept;
};

// Flight i runs on substream_seed(seed, i) with alternating parity i % 2.
std::uint64_t flight_seed(std::uint64_t fleet_seed, std::uint64_t flight_index) noexcept;

FleetStatistics run_fleet(const ScenarioConfig& config, const VariantPolicy& policy,
                          std::uint64_t n_flights, std::uint64_t seed, unsigned threads = 0);

}  // namespace aoaq
