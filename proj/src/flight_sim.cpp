#include "aoaq/flight_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "aoaq/parallel.hpp"

namespace aoaq {

std::string_view to_string(MachBucket b) noexcept {
    switch (b) {
        case MachBucket::Low: return "low";
        case MachBucket::Mid: return "mid";
        case MachBucket::High: return "high";
    }
    return "?";
}

std::string_view to_string(VariantName v) noexcept {
    switch (v) {
        case VariantName::McasLegacy: return "mcas-legacy";
        case VariantName::Mcasu: return "mcasu";
        case VariantName::MaxMin: return "max-min";
    }
    return "?";
}

MachBucket parse_mach_bucket(std::string_view token) {
    if (token == "low") return MachBucket::Low;
    if (token == "mid") return MachBucket::Mid;
    if (token == "high") return MachBucket::High;
    throw std::invalid_argument("unknown Mach bucket '" + std::string(token) + "'");
}

VariantName parse_variant_name(std::string_view token) {
    if (token == "mcas-legacy") return VariantName::McasLegacy;
    if (token == "mcasu") return VariantName::Mcasu;
    if (token == "max-min") return VariantName::MaxMin;
    throw std::invalid_argument("unknown policy '" + std::string(token) + "'");
}

double MagnitudeTable::at(MachBucket bucket) const noexcept {
    switch (bucket) {
        case MachBucket::Low: return low;
        case MachBucket::Mid: return mid;
        case MachBucket::High: return high;
    }
    return mid;
}

bool MagnitudeTable::dominated_by(const MagnitudeTable& other) const noexcept {
    return low <= other.low && mid <= other.mid && high <= other.high;
}

VariantPolicy VariantPolicy::mcas_legacy() {
    VariantPolicy p;
    p.name = VariantName::McasLegacy;
    p.disagree_policy = DisagreePolicy::Ignore;
    p.repeat_policy = RepeatPolicy::RepeatAfterPause;
    p.override_policy = OverridePolicy::YokeIgnored;
    p.magnitude = {2.0, 2.0, 2.0};
    return p;
}

VariantPolicy VariantPolicy::mcasu() {
    VariantPolicy p;
    p.name = VariantName::Mcasu;
    p.disagree_policy = DisagreePolicy::DisableForFlight;
    p.repeat_policy = RepeatPolicy::OncePerEpisode;
    p.override_policy = OverridePolicy::YokeOverrides;
    p.magnitude = {1.0, 1.0, 1.0};
    return p;
}

VariantPolicy VariantPolicy::max_min() {
    VariantPolicy p;
    p.name = VariantName::MaxMin;
    p.disagree_policy = DisagreePolicy::Ignore;
    p.repeat_policy = RepeatPolicy::Never;
    p.override_policy = OverridePolicy::YokeIgnored;
    p.magnitude = {0.0, 0.0, 0.0};
    return p;
}

VariantPolicy VariantPolicy::named(VariantName name) {
    switch (name) {
        case VariantName::McasLegacy: return mcas_legacy();
        case VariantName::Mcasu: return mcasu();
        case VariantName::MaxMin: return max_min();
    }
    throw std::invalid_argument("unknown policy");
}

void VariantPolicy::validate() const {
    if (intervention_duration < 1) throw std::invalid_argument("intervention duration must be >= 1 step");
    if (pause_steps < 0) throw std::invalid_argument("pause must be >= 0 steps");
    if (episode_reset_steps < 1) throw std::invalid_argument("episode reset must be >= 1 step");
    if (runaway_limit < 1) throw std::invalid_argument("runaway limit must be >= 1");
    if (magnitude.low < 0 || magnitude.mid < 0 || magnitude.high < 0) {
        throw std::invalid_argument("intervention magnitudes must be non-negative");
    }
    switch (name) {
        case VariantName::Mcasu:
            if (disagree_policy != DisagreePolicy::DisableForFlight ||
                repeat_policy != RepeatPolicy::OncePerEpisode ||
                override_policy != OverridePolicy::YokeOverrides) {
                throw std::invalid_argument(
                    "mcasu must disable on disagreement, intervene once per episode and yield to the yoke");
            }
            if (!magnitude.dominated_by(mcas_legacy().magnitude)) {
                throw std::invalid_argument("mcasu magnitudes must not exceed the legacy magnitudes");
            }
            break;
        case VariantName::MaxMin:
            if (repeat_policy != RepeatPolicy::Never) {
                throw std::invalid_argument("max-min never intervenes");
            }
            break;
        case VariantName::McasLegacy: break;
    }
}

void ScenarioConfig::validate() const {
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");
    if (!(aoa.mean > 0.0 && aoa.mean < 1.0)) throw std::invalid_argument("aoa_process.mu must lie in (0, 1)");
    if (!(aoa.persistence >= 0.0 && aoa.persistence < 1.0)) {
        throw std::invalid_argument("aoa_process.rho must lie in [0, 1)");
    }
    if (!(aoa.volatility >= 0.0)) throw std::invalid_argument("aoa_process.sigma must be >= 0");
    require_normalized_aoa(aoa.initial);
    if (!(bird_strike.probability >= 0.0 && bird_strike.probability <= 1.0)) {
        throw std::invalid_argument("bird_strike.prob must lie in [0, 1]");
    }
    if (mach_profile.empty() || mach_profile.front().start != 0) {
        throw std::invalid_argument("mach_profile must start at step 0");
    }
    for (std::size_t i = 1; i < mach_profile.size(); ++i) {
        if (mach_profile[i].start <= mach_profile[i - 1].start) {
            throw std::invalid_argument("mach_profile starts must be strictly increasing");
        }
    }
    if (!(pilot.counteract_probability >= 0.0 && pilot.counteract_probability <= 1.0)) {
        throw std::invalid_argument("pilot.counteract_prob must lie in [0, 1]");
    }
    if (pilot.cutout_after_interventions && *pilot.cutout_after_interventions < 1) {
        throw std::invalid_argument("pilot.cutout_after must be >= 1");
    }
    aoaq::validate(protocol);
    thresholds.validate();
    fault.validate();
    if (const auto* g = std::get_if<GuardedSingle>(&protocol);
        g && g->mode == DisagreementMode::Threshold && !thresholds.disagreement_threshold) {
        throw std::invalid_argument("threshold disagreement mode needs thresholds.d");
    }
}

MachBucket ScenarioConfig::mach_at(int step) const noexcept {
    MachBucket bucket = mach_profile.front().bucket;
    for (const auto& seg : mach_profile) {
        if (seg.start > step) break;
        bucket = seg.bucket;
    }
    return bucket;
}

FlightState start_flight(const ScenarioConfig& config, RandomStream& rng, unsigned parity) {
    const std::size_t n = sensor_count(config.protocol);
    FlightState s;
    s.aoa = config.aoa.initial;
    s.parity = parity;

    const double u_occurs = rng.uniform01();
    const double u_step = rng.uniform01();
    const double u_sensor = rng.uniform01();
    if (config.bird_strike.enabled && u_occurs < config.bird_strike.probability) {
        BirdStrike strike;
        strike.step = std::min(config.steps - 1, static_cast<int>(u_step * config.steps));
        strike.sensor = std::min(n - 1, static_cast<std::size_t>(u_sensor * static_cast<double>(n)));
        s.strike = strike;
    }
    s.defects = draw_defect_mask(config.fault, n, rng);
    return s;
}

namespace {

void end_intervention(FlightState& s, const ScenarioConfig& config, const VariantPolicy& policy,
                      StepEvents& ev) {
    s.intervention_remaining = 0;
    s.next_repeat_step = s.step + policy.pause_steps + 1;
    const auto& cutout_after = config.pilot.cutout_after_interventions;
    if (!s.cutout && cutout_after && s.interventions >= *cutout_after) {
        s.cutout = true;
        s.cutout_engaged_at = s.step;
        ev.cutout_now = true;
    }
}

void apply_increment(FlightState& s, const ScenarioConfig& config, const VariantPolicy& policy,
                     StepEvents& ev) {
    s.trim -= s.intervention_rate;  // nose-down
    s.intervention_applied += s.intervention_rate;
    if (--s.intervention_remaining == 0) {
        ev.intervention_completed = true;
        if (++s.consecutive_uncountered >= policy.runaway_limit) s.runaway = true;
        end_intervention(s, config, policy, ev);
    }
}

bool may_start(const FlightState& s, const VariantPolicy& policy) noexcept {
    if (s.disabled || s.cutout || s.intervention_active()) return false;
    switch (policy.repeat_policy) {
        case RepeatPolicy::Never: return false;
        case RepeatPolicy::RepeatAfterPause: return s.step >= s.next_repeat_step;
        case RepeatPolicy::OncePerEpisode: return !s.intervened_this_episode;
    }
    return false;
}

}  // namespace

StepResult step_flight(const FlightState& state, const ScenarioConfig& config,
                       const VariantPolicy& policy, RandomStream& rng) {
    StepResult result{state, {}};
    FlightState& s = result.state;
    StepEvents& ev = result.events;
    ev.step = s.step;
    ev.aoa = s.aoa;

    if (s.strike && s.strike->step == s.step) s.defects[s.strike->sensor] = true;

    std::vector<double> readings(s.defects.size());
    for (std::size_t i = 0; i < readings.size(); ++i) {
        readings[i] = read_sensor(s.aoa, s.defects[i], rng);
    }
    const TriState decision =
        decide(with_parity(config.protocol, s.parity), std::span<const double>(readings), config.thresholds);
    ev.decision = decision;

    if (decision == TriState::Neutral) {
        ev.disagreement = true;
        ++s.disagreement_events;
        if (policy.disagree_policy == DisagreePolicy::DisableForFlight && !s.disabled) {
            s.disabled = true;
            s.disabled_at = s.step;
            ev.disabled_now = true;
            s.intervention_remaining = 0;
        }
    }

    const bool positive = effective_trigger(decision);
    if (positive) {
        if (!s.episode_active) {
            s.episode_active = true;
            s.intervened_this_episode = false;
            ++s.episodes;
            ev.episode_started = true;
        }
        s.quiet_steps = 0;
    } else if (s.episode_active && ++s.quiet_steps >= policy.episode_reset_steps) {
        s.episode_active = false;
    }

    // The pilot uniform is drawn every step so that the stream does not
    // depend on the policy.
    const double u_pilot = rng.uniform01();
    if (s.intervention_active()) {
        if (policy.override_policy == OverridePolicy::YokeOverrides &&
            u_pilot < config.pilot.counteract_probability) {
            ev.counteracted = true;
            s.trim += s.intervention_applied;
            s.consecutive_uncountered = 0;
            end_intervention(s, config, policy, ev);
        } else {
            apply_increment(s, config, policy, ev);
        }
    } else if (positive && may_start(s, policy)) {
        ev.intervention_started = true;
        ++s.interventions;
        s.intervened_this_episode = true;
        s.intervention_remaining = policy.intervention_duration;
        s.intervention_rate = policy.magnitude.at(config.mach_at(s.step)) / policy.intervention_duration;
        s.intervention_applied = 0.0;
        apply_increment(s, config, policy, ev);
    }

    s.max_trim_excursion = std::max(s.max_trim_excursion, std::fabs(s.trim));
    ev.trim = s.trim;

    std::normal_distribution<double> innovation(0.0, 1.0);
    const double z = innovation(rng);
    const auto& p = config.aoa;
    s.aoa = std::clamp(p.mean + p.persistence * (s.aoa - p.mean) + p.volatility * z, 0.0, 1.0);
    ++s.step;
    return result;
}

FlightOutcome outcome_of(const FlightState& s) {
    FlightOutcome out;
    out.interventions = s.interventions;
    out.disabled_at = s.disabled_at;
    out.disagreement_events = s.disagreement_events;
    out.max_trim_excursion = s.max_trim_excursion;
    out.cutout_engaged_at = s.cutout_engaged_at;
    out.episodes = s.episodes;
    out.runaway_flag = s.runaway;
    return out;
}

FlightOutcome run_flight_with_seed(const ScenarioConfig& config, const VariantPolicy& policy,
                                   std::uint64_t stream_seed, unsigned parity) {
    config.validate();
    policy.validate();
    RandomStream rng(stream_seed);
    FlightState s = start_flight(config, rng, parity);
    for (int t = 0; t < config.steps; ++t) s = step_flight(s, config, policy, rng).state;
    return outcome_of(s);
}

FlightOutcome run_flight(const ScenarioConfig& config, const VariantPolicy& policy) {
    return run_flight_with_seed(config, policy, config.seed, 0);
}

std::vector<StepEvents> trace_flight(const ScenarioConfig& config, const VariantPolicy& policy,
                                     std::uint64_t stream_seed, unsigned parity) {
    config.validate();
    policy.validate();
    RandomStream rng(stream_seed);
    FlightState s = start_flight(config, rng, parity);
    std::vector<StepEvents> events;
    events.reserve(static_cast<std::size_t>(config.steps));
    for (int t = 0; t < config.steps; ++t) {
        auto r = step_flight(s, config, policy, rng);
        s = std::move(r.state);
        events.push_back(r.events);
    }
    return events;
}

double FleetStatistics::fraction_disabled() const noexcept {
    return flights ? static_cast<double>(disabled) / static_cast<double>(flights) : 0.0;
}
double FleetStatistics::fraction_with_disagreement() const noexcept {
    return flights ? static_cast<double>(with_disagreement) / static_cast<double>(flights) : 0.0;
}
double FleetStatistics::runaway_fraction() const noexcept {
    return flights ? static_cast<double>(runaway) / static_cast<double>(flights) : 0.0;
}
double FleetStatistics::cutout_fraction() const noexcept {
    return flights ? static_cast<double>(cutout) / static_cast<double>(flights) : 0.0;
}
double FleetStatistics::se(double fraction) const noexcept {
    return flights ? std::sqrt(fraction * (1.0 - fraction) / static_cast<double>(flights)) : 0.0;
}

std::uint64_t flight_seed(std::uint64_t fleet_seed, std::uint64_t flight_index) noexcept {
    return substream_seed(fleet_seed, flight_index);
}

FleetStatistics run_fleet(const ScenarioConfig& config, const VariantPolicy& policy,
                          std::uint64_t n_flights, std::uint64_t seed, unsigned threads) {
    if (n_flights == 0) throw std::invalid_argument("a fleet needs at least one flight");
    config.validate();
    policy.validate();

    constexpr std::uint64_t kFlightsPerChunk = 256;
    const std::uint64_t chunks = (n_flights + kFlightsPerChunk - 1) / kFlightsPerChunk;
    std::vector<FlightOutcome> outcomes(n_flights);
    parallel_chunks(chunks, threads, [&](std::size_t chunk) {
        const std::uint64_t begin = chunk * kFlightsPerChunk;
        const std::uint64_t end = std::min(n_flights, begin + kFlightsPerChunk);
        for (std::uint64_t i = begin; i < end; ++i) {
            outcomes[i] = run_flight_with_seed(config, policy, flight_seed(seed, i),
                                               static_cast<unsigned>(i % 2));
        }
    });

    FleetStatistics stats;
    stats.flights = n_flights;
    stats.seed = seed;
    double trim_sum = 0.0;
    for (const auto& o : outcomes) {
        stats.disabled += o.disabled_at.has_value();
        stats.with_disagreement += o.disagreement_events > 0;
        stats.runaway += o.runaway_flag;
        stats.cutout += o.cutout_engaged_at.has_value();
        stats.total_interventions += static_cast<std::uint64_t>(o.interventions);
        trim_sum += o.max_trim_excursion;
    }
    const double n = static_cast<double>(n_flights);
    stats.mean_interventions = static_cast<double>(stats.total_interventions) / n;
    stats.mean_max_trim_excursion = trim_sum / n;
    return stats;
}

}  // namespace aoaq
