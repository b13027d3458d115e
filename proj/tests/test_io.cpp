#include <doctest.h>

#include <string>

#include "aoaq/io.hpp"

using namespace aoaq;

namespace {

const char* kScenario = R"({
  "steps": 120,
  "aoa_process": {"mu": 0.35, "rho": 0.9, "sigma": 0.05, "init": 0.3},
  "bird_strike": {"prob": 0.5, "enabled": true},
  "mach_profile": [{"start": 0, "bucket": "low"}, {"start": 60, "bucket": "high"}],
  "pilot": {"cutout_after": 3, "counteract_prob": 0.2},
  "protocol": "guarded2",
  "fault": {"f": 0.01},
  "thresholds": {"a": 0.6, "d": 0.05},
  "policy": {"name": "mcasu", "magnitude": {"low": 0.5, "mid": 1.0, "high": 1.5}},
  "seed": 42
})";

std::string replace(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

std::string key_of(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ParseError& e) {
        return e.key();
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("scenario file: full parse") {
    const ScenarioFile f = parse_scenario(kScenario);
    const ScenarioConfig& c = f.config;
    CHECK(c.steps == 120);
    CHECK(c.aoa.mean == 0.35);
    CHECK(c.aoa.persistence == 0.9);
    CHECK(c.bird_strike.enabled);
    CHECK(c.mach_profile.size() == 2);
    CHECK(c.mach_at(70) == MachBucket::High);
    CHECK(c.pilot.cutout_after_interventions == 3);
    CHECK(c.fault.defect_probability == 0.01);
    CHECK(c.thresholds.disagreement_threshold == 0.05);
    // d present switches the guarded reading to threshold mode.
    CHECK(std::get<GuardedSingle>(c.protocol).mode == DisagreementMode::Threshold);
    CHECK(f.policy.name == VariantName::Mcasu);
    CHECK(f.policy.magnitude.high == 1.5);
    CHECK(f.has_seed);
    CHECK(c.seed == 42);
}

TEST_CASE("scenario file: minimal parse uses defaults") {
    const ScenarioFile f = parse_scenario(
        R"({"steps": 10, "protocol": "majbool3", "fault": {"f": 0.1}, "thresholds": {"a": 0.5}, "policy": "max-min"})");
    CHECK(f.policy.name == VariantName::MaxMin);
    CHECK_FALSE(f.has_seed);
    CHECK(f.config.mach_profile.size() == 1);
    CHECK_FALSE(f.config.bird_strike.enabled);
}

TEST_CASE("scenario file: unknown and invalid keys are reported by name") {
    CHECK(key_of(replace(kScenario, "\"seed\": 42", "\"seed\": 42, \"wind\": 3")) == "wind");
    CHECK(key_of(replace(kScenario, "\"sigma\": 0.05", "\"sigma\": 0.05, \"theta\": 1")) == "aoa_process.theta");
    CHECK(key_of(replace(kScenario, "\"f\": 0.01", "\"p\": 0.01")) == "fault.f");
    CHECK(key_of(replace(kScenario, "\"steps\": 120", "\"steps\": \"many\"")) == "steps");
    CHECK(key_of(replace(kScenario, "\"guarded2\"", "\"guarded9\"")) == "protocol");
    CHECK(key_of(replace(kScenario, "\"high\"}]", "\"supersonic\"}]")) == "mach_profile[1].bucket");
    CHECK(key_of(replace(kScenario, "\"high\": 1.5", "\"high\": 2.5")) == "policy");
    CHECK(key_of(replace(kScenario, "\"seed\": 42", "\"seed\": -1")) == "seed");
    CHECK_THROWS_AS(parse_scenario("{\"steps\": 3,"), ParseError);
    CHECK_THROWS_AS(parse_scenario("[]"), ParseError);
    // Domain validation surfaces as a parse error too.
    CHECK_THROWS_AS(parse_scenario(replace(kScenario, "\"mu\": 0.35", "\"mu\": 1.35")), ParseError);
}

TEST_CASE("case file parse") {
    const CaseFile c = parse_case(R"({
      "propositions": [
        {"id": "P1", "statement": "s1", "level": "very-implausible"},
        {"id": "P2", "statement": "s2", "level": "implausible"}
      ],
      "implications": [["P1", "P2"]],
      "promises": [{"promiser": "A", "promisee": "B", "body": "x", "assessment": "plausible"}],
      "odds": {"prior": 0.1, "threshold": 1, "factors": [{"lr": 10, "label": "e1"}, {"lr": 2}]}
    })");
    CHECK(c.propositions.size() == 2);
    CHECK(c.propositions[0].level == forensic::Plausibility::VeryImplausible);
    CHECK(c.implications.size() == 1);
    CHECK(c.promises[0].assessment == forensic::Plausibility::Plausible);
    REQUIRE(c.odds.has_value());
    CHECK(c.odds->factors.size() == 2);
    CHECK(c.odds->factors[0].label == "e1");

    CHECK_THROWS_AS(parse_case(R"({"propositions": [{"id": "P", "statement": "", "level": "likely"}]})"),
                    ParseError);
    CHECK_THROWS_AS(parse_case(R"({"implications": [["P1"]]})"), ParseError);
    CHECK_THROWS_AS(parse_case(R"({"promises": [{"promiser": "", "promisee": "B", "body": "", "assessment": "true"}]})"),
                    ParseError);
    CHECK_THROWS_AS(parse_case(R"({"verdict": "guilty"})"), ParseError);
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.0, 0.1, 0.0975, 1.0 / 3.0, 2.98e-4, 1e-300, 123456789.125}) {
        CHECK(std::stod(format_number(v)) == v);
    }
    CHECK(format_number(0.5) == "0.5");
}

TEST_CASE("CSV rows round-trip and re-serialize identically") {
    RateReport r;
    r.query.protocol = Conjunctive{};
    r.query.fault.defect_probability = 0.1;
    r.query.thresholds.trigger_threshold = 0.5;
    r.fp = 0.0025;
    r.fn = 0.0975;
    r.p_neutral = 0.0;
    const auto fields = rate_csv_fields(r, "errata fn: printed=0.165, \"enumerated\"=0.0975");
    CHECK(fields.size() == 15);
    CHECK(fields[0] == "conj2");
    CHECK(fields[4] == "2");
    CHECK(fields[5] == "exact-enumeration");
    const std::string line = to_csv_line(fields);
    CHECK(parse_csv_line(line) == fields);
    CHECK(to_csv_line(parse_csv_line(line)) == line);
    CHECK(parse_csv_line(std::string(kRateCsvHeader)).size() == 15);
    CHECK_THROWS_AS(parse_csv_line("a,\"b"), std::invalid_argument);
}
