#include "pairelim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace pairelim {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

struct ParseContext {
    std::string origin;
    int line = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        require(false, origin + ":" + std::to_string(line) + ": " + msg);
        std::abort();  // unreachable
    }

    double number(const std::string& raw) const {
        char* end = nullptr;
        const double v = std::strtod(raw.c_str(), &end);
        if (end == raw.c_str() || *end != '\0') fail("expected a number, got '" + raw + "'");
        return v;
    }

    std::int64_t integer(const std::string& raw) const {
        char* end = nullptr;
        const long long v = std::strtoll(raw.c_str(), &end, 10);
        if (end == raw.c_str() || *end != '\0') fail("expected an integer, got '" + raw + "'");
        return v;
    }

    std::uint64_t unsigned64(const std::string& raw) const {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(raw.c_str(), &end, 10);
        if (end == raw.c_str() || *end != '\0')
            fail("expected an unsigned integer, got '" + raw + "'");
        return v;
    }

    bool boolean(const std::string& raw) const {
        if (raw == "true") return true;
        if (raw == "false") return false;
        fail("expected true or false, got '" + raw + "'");
    }

    std::vector<double> numbers(const std::string& raw) const {
        std::vector<double> out;
        for (const std::string& tok : split_list(raw)) out.push_back(number(tok));
        return out;
    }
};

}  // namespace

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

Config parse_config_text(std::string_view text, const std::string& origin) {
    Config cfg;
    ParseContext ctx{origin, 0};
    std::string section;
    std::string canon;
    std::vector<std::string> seen;

    const auto was_set = [&](const std::string& key) {
        return std::find(seen.begin(), seen.end(), key) != seen.end();
    };

    std::istringstream in{std::string(text)};
    std::string raw_line;
    while (std::getline(in, raw_line)) {
        ++ctx.line;
        const std::size_t hash_pos = raw_line.find('#');
        if (hash_pos != std::string::npos) raw_line.erase(hash_pos);
        const std::string line = trim(raw_line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') ctx.fail("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "instance" && section != "learner" && section != "run" &&
                section != "sweep" && section != "audit")
                ctx.fail("unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) ctx.fail("expected 'key = value'");
        if (section.empty()) ctx.fail("key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) ctx.fail("empty key");
        const std::string qualified = section + "." + key;
        if (was_set(qualified)) ctx.fail("duplicate key '" + qualified + "'");
        seen.push_back(qualified);
        canon += qualified + "=" + value + "\n";

        if (section == "instance") {
            if (key == "family") {
                if (value != "gap" && value != "bernoulli_pair")
                    ctx.fail("family must be gap or bernoulli_pair");
                cfg.instance.family = value;
            } else if (key == "target") {
                const std::vector<std::string> tok = split_list(value);
                if (tok.empty()) ctx.fail("empty target");
                if (tok[0] == "const" && tok.size() == 2) {
                    cfg.instance.target = {TargetSpec::Kind::Constant, ctx.number(tok[1])};
                } else if (tok[0] == "bernoulli" && tok.size() == 2) {
                    cfg.instance.target = {TargetSpec::Kind::Bernoulli, ctx.number(tok[1])};
                } else if (tok[0] == "uniform" && tok.size() == 1) {
                    cfg.instance.target = {TargetSpec::Kind::Uniform, 0.0};
                } else {
                    ctx.fail("target must be 'const V', 'bernoulli P', or 'uniform'");
                }
            } else if (key == "centers") {
                cfg.instance.centers = ctx.numbers(value);
            } else if (key == "halfwidths") {
                cfg.instance.halfwidths = ctx.numbers(value);
            } else if (key == "risks") {
                cfg.instance.risks = ctx.numbers(value);
            } else if (key == "signs") {
                for (const std::string& tok : split_list(value)) {
                    const std::int64_t s = ctx.integer(tok);
                    if (s != 1 && s != -1) ctx.fail("signs must be +-1");
                    cfg.instance.signs.push_back(static_cast<int>(s));
                }
            } else if (key == "epsilon") {
                if (value == "auto") {
                    cfg.instance.epsilon_auto = true;
                } else {
                    cfg.instance.epsilon = ctx.number(value);
                    if (cfg.instance.epsilon <= 0.0 || cfg.instance.epsilon >= 1.0)
                        ctx.fail("epsilon must lie in (0,1)");
                }
            } else if (key == "coupled") {
                cfg.instance.coupled = ctx.boolean(value);
            } else if (key == "flipped") {
                if (value == "alternate")
                    cfg.instance.flipped = Flip::Alternate;
                else
                    cfg.instance.flipped = ctx.boolean(value) ? Flip::Yes : Flip::No;
            } else {
                ctx.fail("unknown key '" + key + "' in [instance]");
            }
        } else if (section == "learner") {
            if (key == "kind") {
                if (value == "full_info")
                    cfg.learner.kind = LearnerKind::FullInfo;
                else if (value == "budgeted")
                    cfg.learner.kind = LearnerKind::Budgeted;
                else if (value == "two_point")
                    cfg.learner.kind = LearnerKind::TwoPoint;
                else if (value == "multi_point")
                    cfg.learner.kind = LearnerKind::MultiPoint;
                else if (value == "erm_single")
                    cfg.learner.kind = LearnerKind::ErmSingle;
                else
                    ctx.fail("unknown learner kind '" + value + "'");
            } else if (key == "delta") {
                cfg.learner.delta = ctx.number(value);
                if (cfg.learner.delta <= 0.0 || cfg.learner.delta >= 1.0)
                    ctx.fail("delta must lie in (0,1)");
            } else if (key == "rounds") {
                cfg.learner.rounds = ctx.integer(value);
                if (cfg.learner.rounds < 1) ctx.fail("rounds must be positive");
            } else if (key == "budget") {
                cfg.learner.budget = ctx.integer(value);
                if (cfg.learner.budget < 1) ctx.fail("budget must be positive");
            } else if (key == "m") {
                const std::int64_t m = ctx.integer(value);
                if (m < 2) ctx.fail("m must be at least 2");
                cfg.learner.subset_size = static_cast<int>(m);
            } else {
                ctx.fail("unknown key '" + key + "' in [learner]");
            }
        } else if (section == "run") {
            if (key == "replications") {
                const std::int64_t r = ctx.integer(value);
                if (r < 1) ctx.fail("replications must be positive");
                cfg.run.replications = static_cast<int>(r);
            } else if (key == "seed") {
                cfg.run.seed = ctx.unsigned64(value);
            } else if (key == "threads") {
                const std::int64_t n = ctx.integer(value);
                if (n < 0) ctx.fail("threads must be nonnegative");
                cfg.run.threads = static_cast<int>(n);
            } else if (key == "eval") {
                const std::vector<std::string> tok = split_list(value);
                if (tok.size() == 1 && tok[0] == "closed_form") {
                    cfg.run.eval = {true, 0};
                } else if (tok.size() == 2 && tok[0] == "mc") {
                    const std::int64_t n = ctx.integer(tok[1]);
                    if (n < 1) ctx.fail("mc sample count must be positive");
                    cfg.run.eval = {false, n};
                } else {
                    ctx.fail("eval must be 'closed_form' or 'mc N'");
                }
            } else if (key == "out") {
                cfg.run.out = value;
            } else if (key == "trace") {
                cfg.run.trace = value;
            } else if (key == "stats_trace") {
                cfg.run.stats_trace = value;
            } else {
                ctx.fail("unknown key '" + key + "' in [run]");
            }
        } else if (section == "sweep") {
            cfg.sweep.present = true;
            if (key == "variable") {
                if (value == "rounds")
                    cfg.sweep.variable = SweepVariable::Rounds;
                else if (value == "budget")
                    cfg.sweep.variable = SweepVariable::Budget;
                else if (value == "m")
                    cfg.sweep.variable = SweepVariable::SubsetSize;
                else if (value == "epsilon")
                    cfg.sweep.variable = SweepVariable::Epsilon;
                else
                    ctx.fail("sweep variable must be rounds, budget, m, or epsilon");
            } else if (key == "values") {
                cfg.sweep.values = ctx.numbers(value);
            } else if (key == "out") {
                cfg.sweep.out = value;
            } else {
                ctx.fail("unknown key '" + key + "' in [sweep]");
            }
        } else {  // audit
            cfg.audit.present = true;
            if (key == "checks") {
                for (const std::string& tok : split_list(value)) {
                    if (tok != "event_a" && tok != "optimal_elim" && tok != "pair_spread" &&
                        tok != "budget_exact" && tok != "monotone_s")
                        ctx.fail("unknown audit check '" + tok + "'");
                    cfg.audit.checks.push_back(tok);
                }
            } else if (key == "out") {
                cfg.audit.out = value;
            } else {
                ctx.fail("unknown key '" + key + "' in [audit]");
            }
        }
    }

    // Cross-key validation; messages name the offending keys.
    const std::string where = origin + ": ";
    const auto swept = [&](SweepVariable v) { return cfg.sweep.present && cfg.sweep.variable == v; };
    if (cfg.instance.family == "gap") {
        require(!was_set("instance.epsilon") && !was_set("instance.coupled") &&
                    !was_set("instance.flipped"),
                where + "epsilon/coupled/flipped apply to bernoulli_pair only");
        require(!cfg.instance.centers.empty() || !cfg.instance.risks.empty(),
                where + "gap instance needs centers or risks");
        require(cfg.instance.centers.empty() || cfg.instance.risks.empty(),
                where + "give centers or risks, not both");
        require(!swept(SweepVariable::Epsilon),
                where + "epsilon sweeps require the bernoulli_pair family");
    } else {
        require(cfg.instance.centers.empty() && cfg.instance.risks.empty() &&
                    cfg.instance.halfwidths.empty() && cfg.instance.signs.empty() &&
                    !was_set("instance.target"),
                where + "target/centers/halfwidths/risks/signs apply to the gap family only");
        require(cfg.instance.epsilon_auto || cfg.instance.epsilon > 0.0 ||
                    swept(SweepVariable::Epsilon),
                where + "bernoulli_pair needs epsilon (a number or auto)");
    }
    const bool needs_rounds = cfg.learner.kind != LearnerKind::Budgeted;
    if (needs_rounds)
        require(cfg.learner.rounds >= 1 || swept(SweepVariable::Rounds),
                where + "this learner kind needs rounds");
    else
        require(cfg.learner.budget >= 1 || swept(SweepVariable::Budget),
                where + "the budgeted learner needs budget");
    if (cfg.sweep.present) {
        require(cfg.sweep.values.size() >= 3, where + "sweeps need at least three values");
        for (double v : cfg.sweep.values) {
            require(v > 0.0, where + "sweep values must be positive");
            switch (cfg.sweep.variable) {
                case SweepVariable::Rounds:
                case SweepVariable::Budget:
                    require(v == std::floor(v), where + "rounds/budget sweep values must be integers");
                    break;
                case SweepVariable::SubsetSize:
                    require(v == std::floor(v) && v >= 2.0,
                            where + "m sweep values must be integers >= 2");
                    require(cfg.learner.kind == LearnerKind::MultiPoint,
                            where + "m sweeps require the multi_point learner");
                    break;
                case SweepVariable::Epsilon:
                    require(v < 1.0, where + "epsilon sweep values must lie in (0,1)");
                    break;
            }
        }
        if (cfg.sweep.variable == SweepVariable::Budget)
            require(cfg.learner.kind == LearnerKind::Budgeted,
                    where + "budget sweeps require the budgeted learner");
        if (cfg.sweep.variable == SweepVariable::Rounds)
            require(cfg.learner.kind != LearnerKind::Budgeted,
                    where + "rounds sweeps do not apply to the budgeted learner");
    }

    cfg.hash = fnv1a(canon);
    return cfg;
}

Config parse_config_file(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

double config_resource(const Config& cfg) {
    return cfg.learner.kind == LearnerKind::Budgeted ? static_cast<double>(cfg.learner.budget)
                                                     : static_cast<double>(cfg.learner.rounds);
}

Instance make_replication_instance(const Config& cfg, int replication) {
    require(replication >= 0, "replication index must be nonnegative");
    if (cfg.instance.family == "gap") {
        GapSpec spec;
        spec.target = cfg.instance.target;
        spec.centers = cfg.instance.centers;
        spec.halfwidths = cfg.instance.halfwidths;
        spec.risks = cfg.instance.risks;
        spec.signs = cfg.instance.signs;
        return make_gap_instance(spec);
    }
    double eps = cfg.instance.epsilon;
    if (cfg.instance.epsilon_auto) {
        const double resource = config_resource(cfg);
        require(resource >= 1.0, "automatic epsilon needs a positive round count");
        eps = 1.0 / (2.0 * std::sqrt(resource));
    }
    bool flip = false;
    switch (cfg.instance.flipped) {
        case Flip::No: flip = false; break;
        case Flip::Yes: flip = true; break;
        case Flip::Alternate: flip = (replication % 2 == 1); break;
    }
    return make_two_expert_bernoulli(eps, cfg.instance.coupled, flip);
}

}  // namespace pairelim
