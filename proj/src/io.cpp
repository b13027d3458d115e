#include "aoaq/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace aoaq {

using nlohmann::json;

namespace {

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported.
class ObjectReader {
public:
    ObjectReader(const json& value, std::string path) : value_(value), path_(std::move(path)) {
        if (!value_.is_object()) throw ParseError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    const json* find(std::string_view key) {
        seen_.emplace(key);
        auto it = value_.find(std::string(key));
        return it == value_.end() ? nullptr : &*it;
    }

    const json& require(std::string_view key) {
        const json* v = find(key);
        if (v == nullptr) throw ParseError(join(path_, key), "missing required key");
        return *v;
    }

    double number(std::string_view key) { return as_number(require(key), key); }

    std::optional<double> optional_number(std::string_view key) {
        const json* v = find(key);
        if (v == nullptr || v->is_null()) return std::nullopt;
        return as_number(*v, key);
    }

    long long integer(std::string_view key) { return as_integer(require(key), key); }

    std::optional<long long> optional_integer(std::string_view key) {
        const json* v = find(key);
        if (v == nullptr || v->is_null()) return std::nullopt;
        return as_integer(*v, key);
    }

    bool boolean(std::string_view key) {
        const json& v = require(key);
        if (!v.is_boolean()) throw ParseError(join(path_, key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(std::string_view key) { return as_string(require(key), key); }

    std::string as_string(const json& v, std::string_view key) const {
        if (!v.is_string()) throw ParseError(join(path_, key), "expected a string");
        return v.get<std::string>();
    }

    std::string child_path(std::string_view key) const { return join(path_, key); }

    void finish() const {
        for (const auto& [key, _] : value_.items()) {
            if (!seen_.contains(key)) throw ParseError(join(path_, key), "unknown key");
        }
    }

private:
    double as_number(const json& v, std::string_view key) const {
        if (!v.is_number()) throw ParseError(join(path_, key), "expected a number");
        return v.get<double>();
    }

    long long as_integer(const json& v, std::string_view key) const {
        if (!v.is_number_integer()) throw ParseError(join(path_, key), "expected an integer");
        return v.get<long long>();
    }

    const json& value_;
    std::string path_;
    std::set<std::string, std::less<>> seen_;
};

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("", std::string("malformed JSON: ") + e.what());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Wraps domain validation errors so they also carry a key.
template <class F>
auto with_key(const std::string& key, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ParseError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ParseError(key, e.what());
    }
}

int to_int(long long v, const std::string& key) {
    if (v < 0 || v > 1'000'000'000) throw ParseError(key, "integer out of range");
    return static_cast<int>(v);
}

VariantPolicy parse_policy(const json& v) {
    if (v.is_string()) {
        return with_key("policy", [&] { return VariantPolicy::named(parse_variant_name(v.get<std::string>())); });
    }
    ObjectReader r(v, "policy");
    const std::string name = r.string("name");
    VariantPolicy policy =
        with_key("policy.name", [&] { return VariantPolicy::named(parse_variant_name(name)); });
    if (const json* m = r.find("magnitude")) {
        ObjectReader mr(*m, r.child_path("magnitude"));
        if (auto x = mr.optional_number("low")) policy.magnitude.low = *x;
        if (auto x = mr.optional_number("mid")) policy.magnitude.mid = *x;
        if (auto x = mr.optional_number("high")) policy.magnitude.high = *x;
        mr.finish();
    }
    if (auto x = r.optional_integer("duration")) policy.intervention_duration = to_int(*x, "policy.duration");
    if (auto x = r.optional_integer("pause")) policy.pause_steps = to_int(*x, "policy.pause");
    if (auto x = r.optional_integer("episode_reset")) {
        policy.episode_reset_steps = to_int(*x, "policy.episode_reset");
    }
    if (auto x = r.optional_integer("runaway_limit")) {
        policy.runaway_limit = to_int(*x, "policy.runaway_limit");
    }
    r.finish();
    with_key("policy", [&] { policy.validate(); });
    return policy;
}

std::vector<MachSegment> parse_mach_profile(const json& v) {
    if (v.is_string()) {
        return {MachSegment{0, with_key("mach_profile", [&] { return parse_mach_bucket(v.get<std::string>()); })}};
    }
    if (!v.is_array()) throw ParseError("mach_profile", "expected a bucket name or an array of segments");
    std::vector<MachSegment> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string path = "mach_profile[" + std::to_string(i) + "]";
        ObjectReader r(v[i], path);
        MachSegment seg;
        seg.start = to_int(r.integer("start"), path + ".start");
        const std::string bucket = r.string("bucket");
        seg.bucket = with_key(path + ".bucket", [&] { return parse_mach_bucket(bucket); });
        r.finish();
        out.push_back(seg);
    }
    return out;
}

}  // namespace

ScenarioFile parse_scenario(std::string_view json_text) {
    const json root = parse_json(json_text);
    ObjectReader r(root, "");
    ScenarioFile file;
    ScenarioConfig& c = file.config;

    c.steps = to_int(r.integer("steps"), "steps");

    if (const json* v = r.find("aoa_process")) {
        ObjectReader ar(*v, "aoa_process");
        c.aoa.mean = ar.number("mu");
        c.aoa.persistence = ar.number("rho");
        c.aoa.volatility = ar.number("sigma");
        c.aoa.initial = ar.number("init");
        ar.finish();
    }
    if (const json* v = r.find("bird_strike")) {
        ObjectReader br(*v, "bird_strike");
        c.bird_strike.probability = br.number("prob");
        c.bird_strike.enabled = br.boolean("enabled");
        br.finish();
    }
    if (const json* v = r.find("mach_profile")) c.mach_profile = parse_mach_profile(*v);
    if (const json* v = r.find("pilot")) {
        ObjectReader pr(*v, "pilot");
        if (auto x = pr.optional_integer("cutout_after")) {
            c.pilot.cutout_after_interventions = to_int(*x, "pilot.cutout_after");
        }
        c.pilot.counteract_probability = pr.number("counteract_prob");
        pr.finish();
    }
    {
        ObjectReader fr(r.require("fault"), "fault");
        c.fault.defect_probability = fr.number("f");
        fr.finish();
    }
    {
        ObjectReader tr(r.require("thresholds"), "thresholds");
        c.thresholds.trigger_threshold = tr.number("a");
        c.thresholds.disagreement_threshold = tr.optional_number("d");
        tr.finish();
    }
    const std::string token = r.string("protocol");
    c.protocol = with_key("protocol", [&] {
        return resolve_disagreement_mode(parse_protocol(token), c.thresholds);
    });
    file.policy = parse_policy(r.require("policy"));
    if (const json* v = r.find("seed"); v != nullptr && !v->is_null()) {
        if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
            throw ParseError("seed", "expected a non-negative integer");
        }
        c.seed = v->get<std::uint64_t>();
        file.has_seed = true;
    }
    r.finish();

    with_key("", [&] { c.validate(); });
    return file;
}

ScenarioFile load_scenario(const std::filesystem::path& path) { return parse_scenario(read_file(path)); }

CaseFile parse_case(std::string_view json_text) {
    const json root = parse_json(json_text);
    ObjectReader r(root, "");
    CaseFile file;

    if (const json* v = r.find("propositions")) {
        if (!v->is_array()) throw ParseError("propositions", "expected an array");
        for (std::size_t i = 0; i < v->size(); ++i) {
            const std::string path = "propositions[" + std::to_string(i) + "]";
            ObjectReader pr((*v)[i], path);
            forensic::Proposition p;
            p.id = pr.string("id");
            p.statement = pr.string("statement");
            const std::string level = pr.string("level");
            p.level = with_key(path + ".level", [&] { return forensic::parse_plausibility(level); });
            pr.finish();
            file.propositions.push_back(std::move(p));
        }
    }
    if (const json* v = r.find("implications")) {
        if (!v->is_array()) throw ParseError("implications", "expected an array");
        for (std::size_t i = 0; i < v->size(); ++i) {
            const json& e = (*v)[i];
            if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
                throw ParseError("implications[" + std::to_string(i) + "]", "expected [from, to]");
            }
            file.implications.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
        }
    }
    if (const json* v = r.find("promises")) {
        if (!v->is_array()) throw ParseError("promises", "expected an array");
        for (std::size_t i = 0; i < v->size(); ++i) {
            const std::string path = "promises[" + std::to_string(i) + "]";
            ObjectReader pr((*v)[i], path);
            forensic::PromiseRecord p;
            p.promiser = pr.string("promiser");
            p.promisee = pr.string("promisee");
            p.body = pr.string("body");
            const std::string level = pr.string("assessment");
            p.assessment = with_key(path + ".assessment", [&] { return forensic::parse_plausibility(level); });
            pr.finish();
            with_key(path, [&] { p.validate(); });
            file.promises.push_back(std::move(p));
        }
    }
    if (const json* v = r.find("odds")) {
        ObjectReader orr(*v, "odds");
        OddsSpec odds;
        odds.prior = orr.number("prior");
        odds.threshold = orr.number("threshold");
        if (const json* fs = orr.find("factors")) {
            if (!fs->is_array()) throw ParseError("odds.factors", "expected an array");
            for (std::size_t i = 0; i < fs->size(); ++i) {
                const std::string path = "odds.factors[" + std::to_string(i) + "]";
                ObjectReader fr((*fs)[i], path);
                forensic::Evidence e;
                e.likelihood_ratio = fr.number("lr");
                if (fr.find("label") != nullptr) e.label = fr.string("label");
                fr.finish();
                odds.factors.push_back(std::move(e));
            }
        }
        orr.finish();
        file.odds = std::move(odds);
    }
    r.finish();
    return file;
}

CaseFile load_case(const std::filesystem::path& path) { return parse_case(read_file(path)); }

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::vector<std::string> rate_csv_fields(const RateReport& report, std::string_view note) {
    auto num = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    auto uint = [](const std::optional<std::uint64_t>& v) { return v ? std::to_string(*v) : std::string(); };
    const RateQuery& q = report.query;
    return {
        protocol_token(q.protocol),
        format_number(q.fault.defect_probability),
        format_number(q.thresholds.trigger_threshold),
        num(q.thresholds.disagreement_threshold),
        std::to_string(sensor_count(q.protocol)),
        std::string(to_string(report.source)),
        num(report.fp),
        num(report.fn),
        num(report.p_neutral),
        num(report.se_fp),
        num(report.se_fn),
        num(report.se_neutral),
        uint(report.trials),
        uint(report.seed),
        std::string(note),
    };
}

std::string to_csv_line(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\n\r") == std::string::npos) {
            line += f;
        } else {
            line += '"';
            for (char ch : f) {
                if (ch == '"') line += '"';
                line += ch;
            }
            line += '"';
        }
    }
    return line;
}

std::vector<std::string> parse_csv_line(std::string_view line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    fields.back() += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                fields.back() += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.emplace_back();
        } else {
            fields.back() += ch;
        }
    }
    if (quoted) throw std::invalid_argument("unterminated quoted CSV field");
    return fields;
}

}  // namespace aoaq
