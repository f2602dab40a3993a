/*
Acceptance harness: one end-to-end check per claim the library is built
around, at desk scale.  Each run prints exactly one line

    ACCEPTANCE NN <name>: PASS|FAIL (details)

and exits 0 on pass, 1 on fail.  Invoke with the criterion number (1-10)
or "all"; criterion 10 additionally needs the CLI binary path.
*/

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "pairelim/analysis.hpp"
#include "pairelim/config.hpp"
#include "pairelim/environments.hpp"
#include "pairelim/experiment.hpp"
#include "pairelim/learners.hpp"

using namespace pairelim;

namespace {

std::string g_cli_path;

struct EventLog : RoundObserver {
    struct Event {
        std::int64_t t;
        int victim;
    };
    std::vector<Event> events;
    void on_eliminate(std::int64_t t, int, int victim, int, std::int64_t) override {
        events.push_back({t, victim});
    }
};

Instance three_expert_instance() {
    GapSpec spec;
    spec.target = {TargetSpec::Kind::Constant, 0.0};
    spec.centers = {0.05, 0.6, 0.95};
    spec.halfwidths = {0.05};
    return make_gap_instance(spec);
}

Config sweep_config(const std::string& kind) {
    return parse_config_text("[instance]\n"
                             "family = gap\n"
                             "centers = 0.05 0.95 0.42 0.17\n"
                             "halfwidths = 0.05\n"
                             "[learner]\n"
                             "kind = " +
                                 kind +
                                 "\n"
                                 "delta = 0.05\n"
                                 "[run]\n"
                                 "replications = 200\n"
                                 "seed = 1\n"
                                 "[sweep]\n"
                                 "variable = rounds\n"
                                 "values = 128 256 512 1024 2048 4096 8192 16384\n",
                             "acceptance");
}

std::string g3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

bool slope_criterion(const std::string& kind, double lo, double hi, std::string& detail) {
    const SweepOutput sweep = run_sweep(sweep_config(kind), 1, 0);
    std::ostringstream meds;
    for (const SweepPointResult& p : sweep.points) {
        if (meds.tellp() > 0) meds << ' ';
        meds << g3(p.output.excess.median);
    }
    if (!sweep.fit_ok) {
        detail = "no slope: " + sweep.fit_note + "; medians " + meds.str();
        return false;
    }
    detail = "slope=" + g3(sweep.fit.slope) + " target [" + g3(lo) + "," + g3(hi) +
             "], medians " + meds.str();
    return sweep.fit.slope >= lo && sweep.fit.slope <= hi;
}

bool criterion_full_info_rate(std::string& detail) {
    return slope_criterion("full_info", -1.35, -0.75, detail);
}

bool criterion_two_point_rate(std::string& detail) {
    // same instance and grid; the two-point grid 2 K^2 {4..512} equals
    // {128..16384} at K = 4
    return slope_criterion("two_point", -1.35, -0.70, detail);
}

bool criterion_single_query_floor(std::string& detail) {
    bool ok = true;
    std::ostringstream parts;
    for (const std::int64_t rounds : {100, 400, 1600}) {
        const Config cfg = parse_config_text("[instance]\n"
                                             "family = bernoulli_pair\n"
                                             "epsilon = auto\n"
                                             "flipped = alternate\n"
                                             "[learner]\n"
                                             "kind = erm_single\n"
                                             "rounds = " +
                                                 std::to_string(rounds) +
                                                 "\n"
                                                 "[run]\n"
                                                 "replications = 2000\n"
                                                 "seed = 3\n",
                                             "acceptance");
        const RunOutput out = run_replications(cfg, 3, 0);
        const double eps = 1.0 / (2.0 * std::sqrt(static_cast<double>(rounds)));
        int hits = 0;
        for (const ReplicationRow& row : out.rows)
            if (row.excess >= eps / 4.0 - 1e-12) ++hits;
        const double freq = hits / static_cast<double>(out.rows.size());
        if (parts.tellp() > 0) parts << ' ';
        parts << "T=" << rounds << ":" << g3(freq);
        ok = ok && freq >= 0.09;
    }
    detail = "freq(excess >= eps/4) " + parts.str() + ", floor 0.09";
    return ok;
}

bool criterion_optimal_survival(std::string& detail) {
    const Instance inst = three_expert_instance();
    const int runs = 1000;
    const double bound = 0.2 + 3.0 * std::sqrt(0.2 * 0.8 / runs);
    std::ostringstream parts;
    bool ok = true;
    const std::array<std::string, 3> names = {"budgeted", "two_point", "multi_point"};
    for (int alg = 0; alg < 3; ++alg) {
        int eliminated = 0;
        for (int r = 0; r < runs; ++r) {
            const std::uint64_t base = 3 * static_cast<std::uint64_t>(r);
            RoundStream stream(inst, Rng(4, base));
            EventLog log;
            if (alg == 0) {
                run_budgeted(stream, 30000, 0.05, &log);
            } else if (alg == 1) {
                run_two_point(stream, 30000, 0.05, &log);
            } else {
                Rng subsets(4, base + 1);
                run_multi_point(stream, 30000, 2, 0.05, subsets, &log);
            }
            for (const auto& e : log.events)
                if (e.victim == 0) {
                    ++eliminated;
                    break;
                }
        }
        const double freq = eliminated / static_cast<double>(runs);
        if (parts.tellp() > 0) parts << ' ';
        parts << names[static_cast<std::size_t>(alg)] << ":" << g3(freq);
        ok = ok && freq <= bound;
    }
    detail = "optimal elimination freq " + parts.str() + ", cap " + g3(bound);
    return ok;
}

bool criterion_elimination_window(std::string& detail) {
    GapSpec spec;
    spec.target = {TargetSpec::Kind::Constant, 0.0};
    spec.centers = {0.05, std::sqrt(0.1025)};  // risk gap exactly 0.1
    spec.halfwidths = {0.05};
    const Instance inst = make_gap_instance(spec);
    const double delta = 0.05;
    const int runs = 500;
    int inside = 0;
    double t_sum = 0.0;
    for (int r = 0; r < runs; ++r) {
        RoundStream stream(inst, Rng(5, 3 * static_cast<std::uint64_t>(r)));
        EventLog log;
        run_two_point(stream, 35000, delta, &log);
        if (log.events.empty()) continue;  // counts against coverage
        const std::int64_t t = log.events.front().t;  // pair count equals t at K = 2
        t_sum += static_cast<double>(t);
        const EliminationWindow w =
            elimination_window(*inst.moments, inst.loss, 0, 1, t, delta);
        if (static_cast<double>(t) > w.lower && static_cast<double>(t) < w.upper) ++inside;
    }
    const double freq = inside / static_cast<double>(runs);
    detail = "window coverage " + g3(freq) + " (need >= 0.8), mean elimination round " +
             g3(t_sum / runs);
    return freq >= 1.0 - 4.0 * delta;
}

bool criterion_budget_exactness(std::string& detail) {
    Rng rng(6, 0);
    int violations = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int K = 2 + static_cast<int>(rng.below(7));
        const std::int64_t budget = K + static_cast<std::int64_t>(rng.below(5001));
        GapSpec spec;
        spec.target = {TargetSpec::Kind::Constant, 0.5};
        spec.centers.resize(static_cast<std::size_t>(K));
        for (auto& c : spec.centers) c = 0.05 + 0.9 * rng.uniform();
        spec.halfwidths = {0.05};
        const Instance inst = make_gap_instance(spec);
        RoundStream stream(inst, Rng(6, 1 + static_cast<std::uint64_t>(trial)));
        const RunOutcome out = run_budgeted(stream, budget, 0.05);
        const auto s = static_cast<std::int64_t>(out.survivors.size());
        if (out.queries_used > budget || budget - out.queries_used >= s) ++violations;
    }
    detail = std::to_string(violations) + " violations in 100 random configurations";
    return violations == 0;
}

bool criterion_concentration_event(std::string& detail) {
    const Config cfg = parse_config_text(
        "[instance]\n"
        "family = gap\n"
        "centers = 0.05 0.6 0.95\n"
        "halfwidths = 0.05\n"
        "[learner]\n"
        "kind = budgeted\n"
        "delta = 0.05\n"
        "budget = 6000\n"
        "[run]\n"
        "replications = 1000\n"
        "seed = 7\n"
        "[audit]\n"
        "checks = event_a\n",
        "acceptance");
    const AuditOutput audit = run_audit(cfg, 7, 0);
    const AuditCheckResult& check = audit.checks.front();
    detail = "violation freq " + g3(check.frequency) + " vs cap " + g3(check.bound);
    return check.passed;
}

bool criterion_midpoint_identity(std::string& detail) {
    Rng rng(8, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        GapSpec spec;
        switch (trial % 3) {
            case 0: spec.target = {TargetSpec::Kind::Constant, rng.uniform()}; break;
            case 1: spec.target = {TargetSpec::Kind::Bernoulli, rng.uniform()}; break;
            default: spec.target = {TargetSpec::Kind::Uniform, 0.0}; break;
        }
        const int K = 2 + static_cast<int>(rng.below(7));
        spec.centers.resize(static_cast<std::size_t>(K));
        spec.halfwidths.resize(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) {
            const double a = 0.1 * rng.uniform();
            spec.halfwidths[static_cast<std::size_t>(k)] = a;
            spec.centers[static_cast<std::size_t>(k)] = a + (1.0 - 2.0 * a) * rng.uniform();
        }
        const Instance inst = make_gap_instance(spec);
        const MomentTable& m = *inst.moments;
        const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
        int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(K - 1)));
        if (j >= i) ++j;
        const double lhs = m.risk_of(Prediction::midpoint(i, j));
        const double rhs = 0.5 * m.risk(i) + 0.5 * m.risk(j) - 0.25 * m.sqdist(i, j);
        worst = std::max(worst, std::fabs(lhs - rhs));
    }
    detail = "max deviation " + g3(worst) + " over 10000 pairs, tolerance 1e-12";
    return worst <= 1e-12;
}

bool criterion_subset_interpolation(std::string& detail) {
    std::array<double, 3> medians{};
    const std::array<int, 3> sizes = {2, 4, 8};
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        const Config cfg = parse_config_text(
            "[instance]\n"
            "family = gap\n"
            "centers = 0.05 0.95 0.63 0.30 0.20 0.15 0.10 0.075\n"
            "halfwidths = 0.05\n"
            "[learner]\n"
            "kind = multi_point\n"
            "delta = 0.05\n"
            "rounds = 24000\n"
            "m = " +
                std::to_string(sizes[k]) +
                "\n"
                "[run]\n"
                "replications = 200\n"
                "seed = 9\n",
            "acceptance");
        medians[k] = run_replications(cfg, 9, 0).excess.median;
    }
    const double r1 = medians[0] / medians[1];
    const double r2 = medians[1] / medians[2];
    detail = "medians m=2:" + g3(medians[0]) + " m=4:" + g3(medians[1]) + " m=8:" +
             g3(medians[2]) + ", ratios " + g3(r1) + "," + g3(r2) + " target [1.33,12]";
    const bool monotone = medians[0] >= medians[1] - 1e-12 && medians[1] >= medians[2] - 1e-12;
    const bool scaling = r1 >= 4.0 / 3.0 && r1 <= 12.0 && r2 >= 4.0 / 3.0 && r2 <= 12.0;
    return monotone && scaling;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<missing " + path.string() + ">";
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool criterion_determinism(std::string& detail) {
    const std::string config_text =
        "[instance]\n"
        "family = gap\n"
        "centers = 0.1 0.5 0.9\n"
        "halfwidths = 0.05\n"
        "[learner]\n"
        "kind = multi_point\n"
        "delta = 0.05\n"
        "rounds = 2000\n"
        "m = 2\n"
        "[run]\n"
        "replications = 8\n"
        "seed = 10\n"
        "threads = 4\n"
        "out = results.csv\n"
        "trace = trace.csv\n"
        "stats_trace = stats.csv\n";

    const Config cfg = parse_config_text(config_text, "acceptance");
    const RunOutput first = run_replications(cfg, 10, 4);
    const RunOutput second = run_replications(cfg, 10, 4);
    std::ostringstream a, b;
    write_results_csv(a, cfg, 10, first);
    write_trace_csv(a, cfg, 10, first.events);
    write_stats_trace_csv(a, cfg, 10, first);
    write_results_csv(b, cfg, 10, second);
    write_trace_csv(b, cfg, 10, second.events);
    write_stats_trace_csv(b, cfg, 10, second);
    if (a.str() != b.str()) {
        detail = "in-process reruns differ";
        return false;
    }

    if (g_cli_path.empty()) {
        detail = "pass the CLI binary path as the second argument";
        return false;
    }
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "pairelim_acceptance";
    fs::remove_all(base);
    fs::create_directories(base);
    const fs::path cfg_path = base / "det.cfg";
    {
        std::ofstream out(cfg_path, std::ios::binary);
        out << config_text;
    }
    for (const char* dir : {"a", "b"}) {
        const std::string cmd = "\"" + g_cli_path + "\" run --config \"" + cfg_path.string() +
                                "\" --out \"" + (base / dir).string() + "\"";
        if (std::system(cmd.c_str()) != 0) {
            detail = "CLI run failed: " + cmd;
            return false;
        }
    }
    for (const char* file : {"results.csv", "trace.csv", "stats.csv"}) {
        if (slurp(base / "a" / file) != slurp(base / "b" / file)) {
            detail = std::string("CLI reruns differ in ") + file;
            return false;
        }
        if (slurp(base / "a" / file).rfind("<missing", 0) == 0) {
            detail = std::string("CLI produced no ") + file;
            return false;
        }
    }
    fs::remove_all(base);
    detail = "in-process and CLI reruns byte-identical across results, trace, stats";
    return true;
}

struct Criterion {
    const char* name;
    bool (*run)(std::string&);
};

constexpr std::array<Criterion, 10> kCriteria = {{
    {"full-information fast rate", criterion_full_info_rate},
    {"two-point fast rate", criterion_two_point_rate},
    {"single-query slow rate", criterion_single_query_floor},
    {"optimal expert survival", criterion_optimal_survival},
    {"elimination window coverage", criterion_elimination_window},
    {"budget exactness", criterion_budget_exactness},
    {"concentration event frequency", criterion_concentration_event},
    {"midpoint risk identity", criterion_midpoint_identity},
    {"subset-size interpolation", criterion_subset_interpolation},
    {"determinism", criterion_determinism},
}};

int run_one(int index) {
    const Criterion& c = kCriteria[static_cast<std::size_t>(index - 1)];
    std::string detail;
    bool ok = false;
    try {
        ok = c.run(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    std::printf("ACCEPTANCE %02d %s: %s (%s)\n", index, c.name, ok ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <1-10|all> [cli-binary]\n", argv[0]);
        return 2;
    }
    if (argc >= 3) g_cli_path = argv[2];
    const std::string which = argv[1];
    if (which == "all") {
        int status = 0;
        for (int i = 1; i <= 10; ++i) status |= run_one(i);
        return status;
    }
    const int index = std::atoi(which.c_str());
    if (index < 1 || index > 10) {
        std::fprintf(stderr, "unknown criterion '%s'\n", which.c_str());
        return 2;
    }
    return run_one(index);
}
