#include <doctest.h>

#include <cmath>
#include <vector>

#include "aoaq/analytics.hpp"
#include "oracles.hpp"

using namespace aoaq;

namespace {

RateQuery query(const ProtocolSpec& p, double f, double a,
                NeutralPolicy policy = NeutralPolicy::CountsNegative) {
    RateQuery q;
    q.protocol = p;
    q.fault.defect_probability = f;
    q.thresholds.trigger_threshold = a;
    q.neutral_policy = policy;
    return q;
}

struct Case {
    ProtocolSpec protocol;
    oracle::Kind kind;
    int n;
};

const std::vector<Case>& cases() {
    static const std::vector<Case> c{
        {SingleSensor{}, oracle::Kind::Single, 1},
        {Alternating{0}, oracle::Kind::Single, 2},
        {Alternating{1}, oracle::Kind::Single, 2},
        {Conjunctive{}, oracle::Kind::Conj, 2},
        {Disjunctive{}, oracle::Kind::Disj, 2},
        {GuardedSingle{}, oracle::Kind::Guarded, 2},
        {MajorityBoolean{3}, oracle::Kind::MajBool, 3},
        {MajorityAgreementGated{3}, oracle::Kind::MajGate, 3},
        {MajorityBoolean{5}, oracle::Kind::MajBool, 5},
        {MajorityAgreementGated{5}, oracle::Kind::MajGate, 5},
    };
    return c;
}

const std::vector<double> kF{0.001, 0.01, 0.1, 0.5};
const std::vector<double> kA{0.3, 0.5, 0.8, 0.9};

}  // namespace

TEST_CASE("exact rates: frozen values") {
    SUBCASE("single sensor") {
        const RateReport r = exact_rates(query(SingleSensor{}, 0.1, 0.8));
        CHECK(*r.fp == doctest::Approx(0.02).epsilon(1e-12));
        CHECK(*r.fn == doctest::Approx(0.08).epsilon(1e-12));
        CHECK(*r.p_neutral == 0.0);
        CHECK(r.source == RateSource::ExactEnumeration);
        CHECK_FALSE(r.trials.has_value());
        CHECK_FALSE(r.se_fp.has_value());
    }
    SUBCASE("conjunctive") {
        CHECK(*exact_rates(query(Conjunctive{}, 0.1, 0.8)).fp == doctest::Approx(0.0004).epsilon(1e-12));
        // fa(2 - fa), not the printed fa(4 - a - 2f) = 0.165.
        CHECK(*exact_rates(query(Conjunctive{}, 0.1, 0.5)).fn == doctest::Approx(0.0975).epsilon(1e-12));
    }
    SUBCASE("disjunctive fn is f^2 a^2") {
        CHECK(*exact_rates(query(Disjunctive{}, 0.1, 0.8)).fn == doctest::Approx(0.0064).epsilon(1e-12));
    }
    SUBCASE("disable probabilities") {
        CHECK(*exact_rates(query(GuardedSingle{}, 0.1, 0.5)).p_neutral == doctest::Approx(0.19).epsilon(1e-12));
        const double f = 1e-6;
        const double maj3 = *exact_rates(query(MajorityAgreementGated{3}, f, 0.5)).p_neutral;
        CHECK(maj3 == doctest::Approx(f * f * (3 - 2 * f)).epsilon(1e-12));
        CHECK(maj3 == doctest::Approx(3e-12).epsilon(1e-5));
    }
    SUBCASE("guarded fn under both neutral policies") {
        const double f = 0.1;
        CHECK(*exact_rates(query(GuardedSingle{}, f, 0.5)).fn == doctest::Approx(f * (2 - f)).epsilon(1e-12));
        CHECK(*exact_rates(query(GuardedSingle{}, f, 0.5, NeutralPolicy::Excluded)).fn == 0.0);
    }
}

TEST_CASE("exact rates agree with the hand-written per-mask oracle") {
    for (const auto& c : cases()) {
        for (double f : kF) {
            for (double a : kA) {
                CAPTURE(protocol_token(c.protocol));
                CAPTURE(f);
                CAPTURE(a);
                const oracle::Rates o = oracle::rates(c.kind, c.n, f, a);
                const RateReport neg = exact_rates(query(c.protocol, f, a));
                const RateReport exc = exact_rates(query(c.protocol, f, a, NeutralPolicy::Excluded));
                CHECK(oracle::rel_diff(*neg.fp, o.fp) <= 1e-12);
                CHECK(oracle::rel_diff(*neg.fn, o.fn_counts_negative) <= 1e-12);
                CHECK(oracle::rel_diff(*exc.fn, o.fn_excluded) <= 1e-12);
                CHECK(oracle::rel_diff(*neg.p_neutral, o.p_neutral) <= 1e-12);
            }
        }
    }
}

TEST_CASE("exact rates at f = 0 and f = 1") {
    for (const auto& c : cases()) {
        const RateReport zero = exact_rates(query(c.protocol, 0.0, 0.7));
        CHECK(*zero.fp == 0.0);
        CHECK(*zero.fn == 0.0);
        CHECK(*zero.p_neutral == 0.0);
        const RateReport one = exact_rates(query(c.protocol, 1.0, 0.7));
        const oracle::Rates o = oracle::rates(c.kind, c.n, 1.0, 0.7);
        CHECK(*one.fp == doctest::Approx(o.fp).epsilon(1e-12));
        CHECK(*one.p_neutral == doctest::Approx(o.p_neutral).epsilon(1e-12));
    }
}

TEST_CASE("exact rates reject threshold-d guarded reading and invalid queries") {
    RateQuery q = query(GuardedSingle{}, 0.1, 0.5);
    q.thresholds.disagreement_threshold = 0.1;
    q.protocol = resolve_disagreement_mode(q.protocol, q.thresholds);
    CHECK_THROWS_AS(exact_rates(q), UnsupportedQuery);
    CHECK_THROWS_AS(exact_rates(query(SingleSensor{}, 1.2, 0.5)), std::invalid_argument);
    CHECK_THROWS_AS(exact_rates(query(SingleSensor{}, 0.1, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(exact_rates(query(MajorityBoolean{17}, 0.1, 0.5)), UnsupportedQuery);
}

TEST_CASE("published formulas: catalog values") {
    CHECK(published_formula("conj-fn", 0.1, 0.5) == doctest::Approx(0.165).epsilon(1e-12));
    CHECK(published_formula("disj-fp", 0.1, 0.8) == doctest::Approx(0.0396).epsilon(1e-12));
    CHECK(published_formula("single-fp", 0.0, 0.5) == 0.0);
    CHECK(published_formula("disj-fn", 0.1, 0.8) == doctest::Approx(0.0016).epsilon(1e-12));
    CHECK(published_formula("p-disagree", 0.1, 0.5) == doctest::Approx(0.19).epsilon(1e-12));
    CHECK(published_formula_names().size() == 9);
    CHECK_THROWS_AS(published_formula("conj-fn-typo", 0.1, 0.5), std::invalid_argument);
}

TEST_CASE("published formulas: which survive enumeration") {
    for (double f : kF) {
        for (double a : kA) {
            CAPTURE(f);
            CAPTURE(a);
            const RateReport single = exact_rates(query(SingleSensor{}, f, a));
            const RateReport conj = exact_rates(query(Conjunctive{}, f, a));
            const RateReport disj = exact_rates(query(Disjunctive{}, f, a));
            const RateReport guarded = exact_rates(query(GuardedSingle{}, f, a));
            const RateReport maj3 = exact_rates(query(MajorityAgreementGated{3}, f, a));
            CHECK(oracle::rel_diff(published_formula("single-fp", f, a), *single.fp) <= 1e-12);
            CHECK(oracle::rel_diff(published_formula("single-fn", f, a), *single.fn) <= 1e-12);
            CHECK(oracle::rel_diff(published_formula("conj-fp", f, a), *conj.fp) <= 1e-12);
            CHECK(oracle::rel_diff(published_formula("disj-fp", f, a), *disj.fp) <= 1e-12);
            CHECK(oracle::rel_diff(published_formula("p-disagree", f, a), *guarded.p_neutral) <= 1e-12);
            CHECK(oracle::rel_diff(published_formula("maj3-no-agreement", f, a), *maj3.p_neutral) <= 1e-12);
            // The two simplifications that do not hold.
            CHECK(oracle::rel_diff(published_formula("conj-fn", f, a), *conj.fn) > 1e-3);
            // f^2 a (1 - a) and f^2 a^2 only meet at a = 1/2.
            if (a != 0.5) CHECK(oracle::rel_diff(published_formula("disj-fn", f, a), *disj.fn) > 1e-3);
            // The unsimplified sum for conj-fn does hold.
            const double sum = f * f * (2 * a - a * a) + 2 * f * (1 - f) * a;
            CHECK(oracle::rel_diff(sum, *conj.fn) <= 1e-12);
        }
    }
}

TEST_CASE("inequalities and orderings across the grid") {
    for (double f : kF) {
        for (double a : kA) {
            CAPTURE(f);
            CAPTURE(a);
            const RateReport single = exact_rates(query(SingleSensor{}, f, a));
            const RateReport conj = exact_rates(query(Conjunctive{}, f, a));
            const RateReport disj = exact_rates(query(Disjunctive{}, f, a));
            CHECK(*conj.fp <= f * (1 - a));
            CHECK(*disj.fp >= f * (1 - a));
            CHECK(*conj.fn >= f * a);
            CHECK(*disj.fn <= f * a);
            CHECK(*conj.fp <= *single.fp);
            CHECK(*single.fp <= *disj.fp);
            CHECK(*disj.fn <= *single.fn);
            CHECK(*single.fn <= *conj.fn);

            const double guarded = *exact_rates(query(GuardedSingle{}, f, a)).p_neutral;
            const double maj3 = *exact_rates(query(MajorityAgreementGated{3}, f, a)).p_neutral;
            const double maj5 = *exact_rates(query(MajorityAgreementGated{5}, f, a)).p_neutral;
            CHECK(maj3 <= guarded);
            CHECK(maj5 <= maj3);
        }
    }
    const double f = 1e-6;
    const double ratio = *exact_rates(query(MajorityAgreementGated{3}, f, 0.5)).p_neutral /
                         *exact_rates(query(GuardedSingle{}, f, 0.5)).p_neutral;
    CHECK(ratio == doctest::Approx(1.5e-6).epsilon(1e-5));
}

TEST_CASE("neutral policy: law of total probability") {
    for (const auto& c : cases()) {
        for (double f : kF) {
            for (double a : kA) {
                const RateReport neg = exact_rates(query(c.protocol, f, a));
                const RateReport exc = exact_rates(query(c.protocol, f, a, NeutralPolicy::Excluded));
                const double composed = *exc.fn * (1.0 - *neg.p_neutral) + *neg.p_neutral;
                CHECK(oracle::rel_diff(composed, *neg.fn) <= 1e-12);
            }
        }
    }
}

TEST_CASE("published_rates fills only printed rates") {
    const RateReport g = published_rates(query(GuardedSingle{}, 0.1, 0.5));
    CHECK_FALSE(g.fp.has_value());
    CHECK(*g.fn == doctest::Approx(0.05));
    CHECK(*g.p_neutral == doctest::Approx(0.19));
    const RateReport m = published_rates(query(MajorityBoolean{3}, 0.1, 0.5));
    CHECK_FALSE(m.fp.has_value());
    CHECK_FALSE(m.fn.has_value());
    CHECK_FALSE(m.p_neutral.has_value());
    CHECK(m.source == RateSource::PublishedClosedForm);
}

TEST_CASE("Monte Carlo agrees with enumeration") {
    MonteCarloOptions opts;
    opts.trials = 1'000'000;
    opts.seed = 7;
    SUBCASE("single, f = 0.1, a = 0.8") {
        const RateQuery q = query(SingleSensor{}, 0.1, 0.8);
        const RateReport mc = monte_carlo_rates(q, uniform_conditional_sampler(0.8), opts);
        CHECK(mc.trials == opts.trials);
        CHECK(mc.se_fp.has_value());
        CHECK(compare_reports(exact_rates(q), mc, 4.0).pass());
    }
    SUBCASE("disj2 fn arbitrates the printed chain") {
        const RateQuery q = query(Disjunctive{}, 0.1, 0.8);
        const RateReport mc = monte_carlo_rates(q, uniform_conditional_sampler(0.8), opts);
        CHECK(std::fabs(*mc.fn - 0.0064) <= 4 * *mc.se_fn);
        CHECK(std::fabs(*mc.fn - 0.0016) > 20 * *mc.se_fn);
        CHECK(std::fabs(*mc.fn - 0.0096) > 20 * *mc.se_fn);
    }
    SUBCASE("neutral-excluded policy") {
        const RateQuery q = query(MajorityAgreementGated{3}, 0.3, 0.5, NeutralPolicy::Excluded);
        const RateReport mc = monte_carlo_rates(q, uniform_conditional_sampler(0.5), opts);
        CHECK(compare_reports(exact_rates(q), mc, 4.0).pass());
    }
}

TEST_CASE("Monte Carlo with perfect sensors never errs") {
    MonteCarloOptions opts;
    opts.trials = 20000;
    for (const auto& c : cases()) {
        const RateReport mc = monte_carlo_rates(query(c.protocol, 0.0, 0.6), uniform_conditional_sampler(0.6), opts);
        CHECK(*mc.fp == 0.0);
        CHECK(*mc.fn == 0.0);
        CHECK(*mc.p_neutral == 0.0);
    }
}

TEST_CASE("Monte Carlo is independent of the thread count") {
    const RateQuery q = query(MajorityBoolean{5}, 0.2, 0.7);
    MonteCarloOptions opts;
    opts.trials = 100'003;
    opts.seed = 99;
    opts.threads = 1;
    const RateReport serial = monte_carlo_rates(q, uniform_conditional_sampler(0.7), opts);
    opts.threads = 4;
    const RateReport parallel = monte_carlo_rates(q, uniform_conditional_sampler(0.7), opts);
    CHECK(*serial.fp == *parallel.fp);
    CHECK(*serial.fn == *parallel.fn);
    CHECK(*serial.p_neutral == *parallel.p_neutral);
}

TEST_CASE("Monte Carlo guarded threshold mode matches quadrature") {
    const double f = 0.2, a = 0.6, d = 0.1;
    RateQuery q = query(GuardedSingle{}, f, a);
    q.thresholds.disagreement_threshold = d;
    q.protocol = resolve_disagreement_mode(q.protocol, q.thresholds);

    // One defective sensor against a healthy one at x: disagreement unless
    // the uniform reading falls within d of x. Average x over (a, 1].
    const int cells = 200000;
    double mean_g = 0.0;
    for (int i = 0; i < cells; ++i) {
        const double x = a + (1 - a) * (i + 0.5) / cells;
        mean_g += 1.0 - (std::min(1.0, x + d) - std::max(0.0, x - d));
    }
    mean_g /= cells;
    const double expected = 2 * f * (1 - f) * mean_g + f * f * (1 - d) * (1 - d);

    MonteCarloOptions opts;
    opts.trials = 1'000'000;
    opts.seed = 3;
    const RateReport mc = monte_carlo_rates(q, uniform_conditional_sampler(a), opts);
    CHECK(std::fabs(*mc.p_neutral - expected) <= 4 * *mc.se_neutral);
}

TEST_CASE("Monte Carlo argument validation") {
    MonteCarloOptions opts;
    opts.trials = 0;
    CHECK_THROWS_AS(monte_carlo_rates(query(SingleSensor{}, 0.1, 0.5), uniform_conditional_sampler(0.5), opts),
                    std::invalid_argument);
    opts.trials = 10;
    const AoaSampler wrong_side = [](Conditioning, RandomStream&) { return 0.9; };
    CHECK_THROWS_AS(monte_carlo_rates(query(SingleSensor{}, 0.1, 0.5), wrong_side, opts), std::invalid_argument);
}

TEST_CASE("compare_reports") {
    const RateQuery q = query(SingleSensor{}, 0.1, 0.8);
    RateReport exact;
    exact.query = q;
    exact.fp = 0.02;
    RateReport mc;
    mc.query = q;
    mc.source = RateSource::MonteCarlo;
    mc.fp = 0.0201;
    mc.se_fp = 3e-5;
    mc.trials = 1'000'000;

    SUBCASE("z of 3.3 passes at k = 4") {
        const RateComparison c = compare_reports(exact, mc, 4.0);
        REQUIRE(c.checks.size() == 1);
        CHECK(c.checks[0].z == doctest::Approx(0.0001 / 0.00003).epsilon(1e-6));
        CHECK(c.pass());
        CHECK_FALSE(compare_reports(exact, mc, 3.0).pass());
    }
    SUBCASE("identical reports give z = 0") {
        const RateComparison c = compare_reports(mc, mc, 4.0);
        for (const auto& check : c.checks) CHECK(check.z == 0.0);
        CHECK(c.pass());
    }
    SUBCASE("mismatched queries are rejected") {
        RateReport other = mc;
        other.query.fault.defect_probability = 0.2;
        CHECK_THROWS_AS(compare_reports(exact, other, 4.0), std::invalid_argument);
    }
    SUBCASE("printed conj-fn fails against simulation") {
        const RateQuery cq = query(Conjunctive{}, 0.1, 0.5);
        MonteCarloOptions opts;
        opts.trials = 1'000'000;
        opts.seed = 11;
        const RateReport sim = monte_carlo_rates(cq, uniform_conditional_sampler(0.5), opts);
        const RateReport printed = published_rates(cq);
        const RateComparison c = compare_reports(printed, sim, 4.0);
        bool fn_failed = false;
        for (const auto& check : c.checks) {
            if (check.rate == "fn") fn_failed = !check.pass;
        }
        CHECK(fn_failed);
        CHECK(compare_reports(exact_rates(cq), sim, 4.0).pass());
    }
    SUBCASE("zero empirical SE falls back to the reference SE") {
        RateReport zero = mc;
        zero.fp = 0.0;
        zero.se_fp = 0.0;
        RateReport tiny = exact;
        tiny.fp = 1e-8;
        CHECK(compare_reports(tiny, zero, 4.0).pass());
    }
}
