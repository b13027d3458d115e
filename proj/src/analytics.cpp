#include "aoaq/analytics.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <string>

#include "aoaq/parallel.hpp"
#include "aoaq/sensor_model.hpp"

namespace aoaq {

std::string_view to_string(Conditioning c) noexcept {
    return c == Conditioning::AoaAbove ? "above" : "at-or-below";
}

std::string_view to_string(NeutralPolicy p) noexcept {
    return p == NeutralPolicy::CountsNegative ? "counts-negative" : "excluded";
}

std::string_view to_string(RateSource s) noexcept {
    switch (s) {
        case RateSource::ExactEnumeration: return "exact-enumeration";
        case RateSource::PublishedClosedForm: return "paper-closed-form";
        case RateSource::MonteCarlo: return "monte-carlo";
    }
    return "?";
}

Conditioning parse_conditioning(std::string_view token) {
    if (token == "above" || token == "high") return Conditioning::AoaAbove;
    if (token == "at-or-below" || token == "low") return Conditioning::AoaAtOrBelow;
    throw std::invalid_argument("unknown conditioning '" + std::string(token) + "'");
}

NeutralPolicy parse_neutral_policy(std::string_view token) {
    if (token == "counts-negative") return NeutralPolicy::CountsNegative;
    if (token == "excluded") return NeutralPolicy::Excluded;
    throw std::invalid_argument("unknown neutral policy '" + std::string(token) + "'");
}

void RateQuery::validate() const {
    fault.validate();
    thresholds.validate();
    aoaq::validate(protocol);
}

namespace {

// Per-side tallies of the three decisions (probability mass or counts).
struct SideTally {
    double positive = 0.0;
    double negative = 0.0;
    double neutral = 0.0;

    void add(TriState d, double w) noexcept {
        switch (d) {
            case TriState::Positive: positive += w; break;
            case TriState::Negative: negative += w; break;
            case TriState::Neutral: neutral += w; break;
        }
    }
};

double fn_under(NeutralPolicy policy, const SideTally& above) {
    if (policy == NeutralPolicy::CountsNegative) return above.negative + above.neutral;
    const double decided = above.negative + above.positive;
    return decided > 0.0 ? above.negative / decided : 0.0;
}

bool guarded_threshold_mode(const ProtocolSpec& p) {
    const auto* g = std::get_if<GuardedSingle>(&p);
    return g != nullptr && g->mode == DisagreementMode::Threshold;
}

}  // namespace

RateReport exact_rates(const RateQuery& query) {
    query.validate();
    if (guarded_threshold_mode(query.protocol)) {
        throw UnsupportedQuery(
            "exact rates are unavailable for threshold-d disagreement; they depend on the true-AOA "
            "distribution (use Monte Carlo)");
    }
    const std::size_t n = sensor_count(query.protocol);
    if (n > kMaxEnumeratedSensors) {
        throw UnsupportedQuery("exact enumeration is limited to " +
                               std::to_string(kMaxEnumeratedSensors) + " sensors");
    }

    const double f = query.fault.defect_probability;
    const double a = query.thresholds.trigger_threshold;

    // Representative readings. Healthy sensors sit at the midpoint of the
    // true-AOA side; defective sensor i takes a distinct value on its side
    // of a, never equal to the healthy value. Decisions depend only on the
    // side of each reading and on which readings coincide, so one
    // representative per leaf is enough.
    const double healthy_below = a / 2.0;
    const double healthy_above = a + (1.0 - a) / 2.0;
    std::vector<double> spread(n);
    for (std::size_t i = 0; i < n; ++i) {
        spread[i] = static_cast<double>(i + 1) / static_cast<double>(2 * (n + 1));
    }

    SideTally below;
    SideTally above;
    std::vector<double> low(n);
    std::vector<double> high(n);
    const std::uint32_t full = (1u << n) - 1u;

    for (std::uint32_t defects = 0; defects <= full; ++defects) {
        // Iterate every subset `up` of `defects`, including the empty one.
        std::uint32_t up = defects;
        for (;;) {
            double w = 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const std::uint32_t bit = 1u << i;
                if (defects & bit) {
                    w *= f;
                    if (up & bit) {
                        w *= (1.0 - a);
                        low[i] = high[i] = a + (1.0 - a) * spread[i];
                    } else {
                        w *= a;
                        low[i] = high[i] = a * spread[i];
                    }
                } else {
                    w *= (1.0 - f);
                    low[i] = healthy_below;
                    high[i] = healthy_above;
                }
            }
            if (w > 0.0) {
                below.add(decide(query.protocol, std::span<const double>(low), query.thresholds), w);
                above.add(decide(query.protocol, std::span<const double>(high), query.thresholds), w);
            }
            if (up == 0) break;
            up = (up - 1) & defects;
        }
    }

    RateReport report;
    report.query = query;
    report.source = RateSource::ExactEnumeration;
    report.fp = below.positive;
    report.fn = fn_under(query.neutral_policy, above);
    report.p_neutral = query.conditioning == Conditioning::AoaAbove ? above.neutral : below.neutral;
    return report;
}

namespace {

struct CatalogEntry {
    std::string_view name;
    double (*eval)(double f, double a);
};

// Verbatim printed expressions.
constexpr std::array<CatalogEntry, 9> kCatalog{{
    {"single-fp", [](double f, double a) { return f * (1 - a); }},
    {"single-fn", [](double f, double a) { return f * a; }},
    {"conj-fp", [](double f, double a) { return f * f * (1 - a) * (1 - a); }},
    // Does not equal its own preceding sum f^2(2a - a^2) + 2f(1-f)a.
    {"conj-fn", [](double f, double a) { return f * a * (4 - a - 2 * f); }},
    {"disj-fp", [](double f, double a) { return f * (1 - a) * (f * (1 + a) + 2 * (1 - f)); }},
    // Final line of an inconsistent chain; enumeration gives f^2 a^2.
    {"disj-fn", [](double f, double a) { return f * f * a * (1 - a); }},
    {"guarded-fn", [](double f, double a) { return f * a; }},
    {"p-disagree", [](double f, double) { return f * (2 - f); }},
    {"maj3-no-agreement", [](double f, double) { return f * f * (3 - 2 * f); }},
}};

}  // namespace

double published_formula(std::string_view name, double f, double a) {
    for (const auto& entry : kCatalog) {
        if (entry.name == name) return entry.eval(f, a);
    }
    throw std::invalid_argument("unknown formula '" + std::string(name) + "'");
}

const std::vector<std::string>& published_formula_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& entry : kCatalog) out.emplace_back(entry.name);
        return out;
    }();
    return names;
}

RateReport published_rates(const RateQuery& query) {
    query.validate();
    const double f = query.fault.defect_probability;
    const double a = query.thresholds.trigger_threshold;

    RateReport report;
    report.query = query;
    report.source = RateSource::PublishedClosedForm;

    auto set = [&](std::optional<double>& slot, std::string_view name) {
        slot = published_formula(name, f, a);
    };
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, SingleSensor> || std::is_same_v<P, Alternating>) {
                set(report.fp, "single-fp");
                set(report.fn, "single-fn");
            } else if constexpr (std::is_same_v<P, Conjunctive>) {
                set(report.fp, "conj-fp");
                set(report.fn, "conj-fn");
            } else if constexpr (std::is_same_v<P, Disjunctive>) {
                set(report.fp, "disj-fp");
                set(report.fn, "disj-fn");
            } else if constexpr (std::is_same_v<P, GuardedSingle>) {
                if (p.mode == DisagreementMode::ExactEquality) {
                    set(report.fn, "guarded-fn");
                    set(report.p_neutral, "p-disagree");
                }
            } else if constexpr (std::is_same_v<P, MajorityAgreementGated>) {
                if (p.sensors == 3) set(report.p_neutral, "maj3-no-agreement");
            }
        },
        query.protocol);
    return report;
}

AoaSampler uniform_conditional_sampler(double a) {
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("threshold a must lie in (0, 1)");
    return [a](Conditioning side, RandomStream& rng) {
        const double u = rng.uniform01();
        return side == Conditioning::AoaAtOrBelow ? u * a : a + (1.0 - a) * (1.0 - u);
    };
}

namespace {

struct McCounts {
    std::uint64_t below_positive = 0;
    std::uint64_t below_neutral = 0;
    std::uint64_t above_positive = 0;
    std::uint64_t above_negative = 0;
    std::uint64_t above_neutral = 0;
};

constexpr std::uint64_t kTrialsPerChunk = 1u << 15;

double binomial_se(double p, double n) {
    return n > 0.0 ? std::sqrt(p * (1.0 - p) / n) : 0.0;
}

}  // namespace

RateReport monte_carlo_rates(const RateQuery& query, const AoaSampler& sampler,
                             const MonteCarloOptions& options) {
    query.validate();
    if (options.trials == 0) throw std::invalid_argument("Monte Carlo needs at least one trial");
    if (!sampler) throw std::invalid_argument("missing true-AOA sampler");

    const std::size_t n = sensor_count(query.protocol);
    const double a = query.thresholds.trigger_threshold;
    const std::uint64_t chunks = (options.trials + kTrialsPerChunk - 1) / kTrialsPerChunk;
    std::vector<McCounts> partial(chunks);

    parallel_chunks(chunks, options.threads, [&](std::size_t chunk) {
        McCounts counts;
        PanelSample panel;
        panel.defect_mask.reserve(n);
        panel.readings.reserve(n);
        const std::uint64_t begin = chunk * kTrialsPerChunk;
        const std::uint64_t end = std::min(options.trials, begin + kTrialsPerChunk);
        for (std::uint64_t t = begin; t < end; ++t) {
            RandomStream rng(substream_seed(options.seed, t));

            const double low = sampler(Conditioning::AoaAtOrBelow, rng);
            if (!(low >= 0.0 && low <= a)) {
                throw std::invalid_argument("sampler returned AOA above a on the at-or-below side");
            }
            sample_panel_into(low, query.fault, n, rng, panel);
            const TriState d_low = decide(query.protocol, panel, query.thresholds);
            counts.below_positive += d_low == TriState::Positive;
            counts.below_neutral += d_low == TriState::Neutral;

            const double high = sampler(Conditioning::AoaAbove, rng);
            if (!(high > a && high <= 1.0)) {
                throw std::invalid_argument("sampler returned AOA at or below a on the above side");
            }
            sample_panel_into(high, query.fault, n, rng, panel);
            const TriState d_high = decide(query.protocol, panel, query.thresholds);
            counts.above_positive += d_high == TriState::Positive;
            counts.above_negative += d_high == TriState::Negative;
            counts.above_neutral += d_high == TriState::Neutral;
        }
        partial[chunk] = counts;
    });

    McCounts total;
    for (const auto& c : partial) {
        total.below_positive += c.below_positive;
        total.below_neutral += c.below_neutral;
        total.above_positive += c.above_positive;
        total.above_negative += c.above_negative;
        total.above_neutral += c.above_neutral;
    }

    const double trials = static_cast<double>(options.trials);
    RateReport report;
    report.query = query;
    report.source = RateSource::MonteCarlo;
    report.trials = options.trials;
    report.seed = options.seed;

    const double fp = static_cast<double>(total.below_positive) / trials;
    report.fp = fp;
    report.se_fp = binomial_se(fp, trials);

    if (query.neutral_policy == NeutralPolicy::CountsNegative) {
        const double fn = static_cast<double>(total.above_negative + total.above_neutral) / trials;
        report.fn = fn;
        report.se_fn = binomial_se(fn, trials);
    } else {
        const double decided = static_cast<double>(total.above_negative + total.above_positive);
        const double fn = decided > 0.0 ? static_cast<double>(total.above_negative) / decided : 0.0;
        report.fn = fn;
        report.se_fn = binomial_se(fn, decided);
    }

    const std::uint64_t neutral = query.conditioning == Conditioning::AoaAbove ? total.above_neutral
                                                                               : total.below_neutral;
    const double p_neutral = static_cast<double>(neutral) / trials;
    report.p_neutral = p_neutral;
    report.se_neutral = binomial_se(p_neutral, trials);
    return report;
}

bool RateComparison::pass() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const RateCheck& c) { return c.pass; });
}

RateComparison compare_reports(const RateReport& reference, const RateReport& monte_carlo,
                               double k_sigma) {
    if (!(reference.query == monte_carlo.query)) {
        throw std::invalid_argument("cannot compare reports for different queries");
    }
    if (!(k_sigma > 0.0)) throw std::invalid_argument("k_sigma must be positive");

    RateComparison out;
    auto check = [&](std::string_view name, const std::optional<double>& ref,
                     const std::optional<double>& est, const std::optional<double>& se) {
        if (!ref || !est) return;
        RateCheck c;
        c.rate = std::string(name);
        c.reference = *ref;
        c.estimate = *est;
        c.se = se.value_or(0.0);
        if (c.se == 0.0 && monte_carlo.trials) {
            c.se = binomial_se(*ref, static_cast<double>(*monte_carlo.trials));
        }
        const double diff = std::fabs(c.reference - c.estimate);
        if (c.se > 0.0) {
            c.z = diff / c.se;
        } else {
            c.z = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        }
        c.pass = c.z <= k_sigma;
        out.checks.push_back(c);
    };
    check("fp", reference.fp, monte_carlo.fp, monte_carlo.se_fp);
    check("fn", reference.fn, monte_carlo.fn, monte_carlo.se_fn);
    check("p_neutral", reference.p_neutral, monte_carlo.p_neutral, monte_carlo.se_neutral);
    return out;
}

}  // namespace aoaq
