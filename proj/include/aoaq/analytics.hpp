#pragma once

// False-positive / false-negative / neutral rates for the reading
// protocols.
//
//  * exact_rates       enumerates every defect subset and, inside it, every
//                      above/below-threshold pattern of the defective
//                      readings. The leaf probabilities are closed form
//                      under the sensor model, and each leaf is decided by
//                      the same decide() that the simulators use.
//  * published_formula evaluates the closed forms as printed in the source
//                      analysis, including the simplifications that do not
//                      survive enumeration (conj-fn, disj-fn). Kept for
//                      auditing only.
//  * monte_carlo_rates samples panels from explicit conditional AOA
//                      distributions and arbitrates between the two above.
//
// fp is P(Positive | AOA <= a). fn is P(no trigger | AOA > a) when Neutral
// counts as negative, or P(Negative | AOA > a, not Neutral) when Neutral
// is excluded. p_neutral is P(Neutral) on the query's conditioning side.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aoaq/protocols.hpp"
#include "aoaq/random_stream.hpp"

namespace aoaq {

enum class Conditioning { AoaAtOrBelow, AoaAbove };
enum class NeutralPolicy { CountsNegative, Excluded };
enum class RateSource { ExactEnumeration, PublishedClosedForm, MonteCarlo };

std::string_view to_string(Conditioning c) noexcept;
std::string_view to_string(NeutralPolicy p) noexcept;
std::string_view to_string(RateSource s) noexcept;
Conditioning parse_conditioning(std::string_view token);
NeutralPolicy parse_neutral_policy(std::string_view token);

struct RateQuery {
    ProtocolSpec protocol = SingleSensor{};
    FaultModel fault;
    ThresholdConfig thresholds;
    Conditioning conditioning = Conditioning::AoaAbove;
    NeutralPolicy neutral_policy = NeutralPolicy::CountsNegative;

    void validate() const;
    bool operator==(const RateQuery&) const = default;
};

struct RateReport {
    RateQuery query;
    RateSource source = RateSource::ExactEnumeration;
    std::optional<double> fp;
    std::optional<double> fn;
    std::optional<double> p_neutral;
    std::optional<std::uint64_t> trials;
    std::optional<double> se_fp;
    std::optional<double> se_fn;
    std::optional<double> se_neutral;
    std::optional<std::uint64_t> seed;
};

// Raised for queries the exact engine cannot answer (threshold-d guarded
// reading depends on the true-AOA distribution; use Monte Carlo).
class UnsupportedQuery : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Largest panel the enumeration accepts (3^n leaves).
inline constexpr std::size_t kMaxEnumeratedSensors = 15;

RateReport exact_rates(const RateQuery& query);

// Catalog names: single-fp, single-fn, conj-fp, conj-fn, disj-fp, disj-fn,
// guarded-fn, p-disagree, maj3-no-agreement.
double published_formula(std::string_view name, double f, double a);
const std::vector<std::string>& published_formula_names();

// Fills whichever of fp/fn/p_neutral have a printed closed form for the
// query's protocol. Rates without one stay empty.
RateReport published_rates(const RateQuery& query);

// Draws a true AOA on the requested side of the threshold.
using AoaSampler = std::function<double(Conditioning, RandomStream&)>;

// Uniform on [0, a) below and on (a, 1] above.
AoaSampler uniform_conditional_sampler(double a);

struct MonteCarloOptions {
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 0;
    unsigned threads = 0;  // 0: all hardware threads
};

// Each trial owns RandomStream(substream_seed(seed, trial)) and samples one
// panel on each side of the threshold, so results do not depend on the
// thread count.
RateReport monte_carlo_rates(const RateQuery& query, const AoaSampler& sampler,
                             const MonteCarloOptions& options);

struct RateCheck {
    std::string rate;  // "fp", "fn" or "p_neutral"
    double reference = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    double z = 0.0;
    bool pass = false;
};

struct RateComparison {
    std::vector<RateCheck> checks;
    bool pass() const noexcept;
};

// Compares every rate present in both reports at |reference - estimate| <=
// k_sigma * SE, with SE taken from the Monte Carlo report. When the
// estimate sits on 0 or 1 (zero empirical SE) the binomial SE of the
// reference value at the same trial count is used instead.
RateComparison compare_reports(const RateReport& reference, const RateReport& monte_carlo,
                               double k_sigma);

}  // namespace aoaq
