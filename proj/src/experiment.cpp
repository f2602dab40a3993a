#include "pairelim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "pairelim/stats.hpp"

namespace pairelim {

namespace {

std::string g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string header_comment(const Config& cfg, std::uint64_t seed) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "# config_hash=%016llx seed=%llu\n",
                  static_cast<unsigned long long>(cfg.hash),
                  static_cast<unsigned long long>(seed));
    return buf;
}

int resolve_threads(int threads, int jobs) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    return std::max(1, std::min(threads, jobs));
}

// Runs fn(r) for r in [0, jobs) across workers; the first exception wins.
template <typename Fn>
void parallel_for(int jobs, int threads, Fn&& fn) {
    threads = resolve_threads(threads, jobs);
    if (threads == 1) {
        for (int r = 0; r < jobs; ++r) fn(r);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (int r; (r = next.fetch_add(1)) < jobs;) {
                try {
                    fn(r);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                    next.store(jobs);
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

class CollectingObserver final : public RoundObserver {
  public:
    CollectingObserver(int rep, bool want_stats, double delta, const LossSpec* loss)
        : rep_(rep), want_stats_(want_stats), delta_(delta), loss_(loss) {}

    void on_eliminate(std::int64_t t, int by, int victim, int survivors_after,
                      std::int64_t queries_used) override {
        events_.push_back({rep_, t, by, victim, survivors_after, queries_used});
    }

    void on_round(const PairStats& stats, std::span<const std::uint8_t>, std::int64_t t,
                  std::int64_t) override {
        if (!want_stats_) return;
        write_pair_stat_rows(stats_, stats, t, delta_, *loss_, first_);
        first_ = false;
    }

    std::vector<EliminationEvent> take_events() { return std::move(events_); }
    std::string take_stats() { return std::move(stats_).str(); }

  private:
    int rep_;
    bool want_stats_;
    bool first_ = true;
    double delta_;
    const LossSpec* loss_;
    std::vector<EliminationEvent> events_;
    std::ostringstream stats_;
};

RunOutcome execute_learner(const Config& cfg, RoundStream& stream, Rng learner_rng,
                           RoundObserver* obs) {
    switch (cfg.learner.kind) {
        case LearnerKind::FullInfo:
            return run_full_information(stream, cfg.learner.rounds, cfg.learner.delta, obs);
        case LearnerKind::Budgeted:
            return run_budgeted(stream, cfg.learner.budget, cfg.learner.delta, obs);
        case LearnerKind::TwoPoint:
            return run_two_point(stream, cfg.learner.rounds, cfg.learner.delta, obs);
        case LearnerKind::MultiPoint:
            return run_multi_point(stream, cfg.learner.rounds, cfg.learner.subset_size,
                                   cfg.learner.delta, learner_rng, obs);
        case LearnerKind::ErmSingle:
            return run_round_robin_erm(stream, cfg.learner.rounds, obs);
    }
    throw std::logic_error("unreachable learner kind");
}

double evaluate_excess(const Config& cfg, const Instance& inst, const Prediction& p,
                       Rng eval_rng) {
    if (cfg.run.eval.closed_form) {
        require(inst.moments.has_value(), "closed-form evaluation needs instance moments");
        return excess_risk(inst, p);
    }
    return excess_risk(inst, p, cfg.run.eval.mc_samples, &eval_rng);
}

}  // namespace

SummaryStats summarize(std::vector<double> values) {
    SummaryStats s;
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    s.median = (n % 2 == 1) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    double total = 0.0;
    for (double v : values) total += v;
    s.mean = total / static_cast<double>(n);
    const std::size_t rank =
        std::min(n - 1, static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(n))) - 1);
    s.q90 = values[rank];
    return s;
}

RunOutput run_replications(const Config& cfg, std::uint64_t seed, int threads,
                           std::uint64_t stream_block) {
    const int reps = cfg.run.replications;
    RunOutput out;
    out.rows.resize(static_cast<std::size_t>(reps));
    std::vector<std::vector<EliminationEvent>> events(static_cast<std::size_t>(reps));
    const bool want_stats = !cfg.run.stats_trace.empty();

    parallel_for(reps, threads, [&](int r) {
        const std::uint64_t base = 3 * (stream_block + static_cast<std::uint64_t>(r));
        const Instance inst = make_replication_instance(cfg, r);
        RoundStream stream(inst, Rng(seed, base));
        CollectingObserver obs(r, want_stats && r == 0, cfg.learner.delta, &inst.loss);
        const RunOutcome run = execute_learner(cfg, stream, Rng(seed, base + 1), &obs);
        ReplicationRow& row = out.rows[static_cast<std::size_t>(r)];
        row.replication = r;
        row.resource = config_resource(cfg);
        row.excess = evaluate_excess(cfg, inst, run.prediction, Rng(seed, base + 2));
        row.s_final = static_cast<int>(run.survivors.size());
        row.branch = run.branch;
        row.queries_used = run.queries_used;
        events[static_cast<std::size_t>(r)] = obs.take_events();
        if (want_stats && r == 0) out.stats_trace = obs.take_stats();
    });

    for (std::vector<EliminationEvent>& e : events)
        out.events.insert(out.events.end(), e.begin(), e.end());
    std::vector<double> excess, survivors, queries;
    for (const ReplicationRow& row : out.rows) {
        excess.push_back(row.excess);
        survivors.push_back(static_cast<double>(row.s_final));
        queries.push_back(static_cast<double>(row.queries_used));
    }
    out.excess = summarize(std::move(excess));
    out.survivors = summarize(std::move(survivors));
    out.queries = summarize(std::move(queries));
    return out;
}

Config apply_sweep_value(const Config& cfg, double value) {
    Config out = cfg;
    switch (cfg.sweep.variable) {
        case SweepVariable::Rounds:
            out.learner.rounds = static_cast<std::int64_t>(value);
            break;
        case SweepVariable::Budget:
            out.learner.budget = static_cast<std::int64_t>(value);
            break;
        case SweepVariable::SubsetSize:
            out.learner.subset_size = static_cast<int>(value);
            break;
        case SweepVariable::Epsilon:
            out.instance.epsilon = value;
            out.instance.epsilon_auto = false;
            break;
    }
    return out;
}

SweepOutput run_sweep(const Config& cfg, std::uint64_t seed, int threads) {
    require(cfg.sweep.present, "sweep requested without a [sweep] section");
    SweepOutput out;
    const std::uint64_t reps = static_cast<std::uint64_t>(cfg.run.replications);
    for (std::size_t v = 0; v < cfg.sweep.values.size(); ++v) {
        const double value = cfg.sweep.values[v];
        const Config point = apply_sweep_value(cfg, value);
        out.points.push_back({value, run_replications(point, seed, threads, v * reps)});
    }
    std::vector<double> xs, ys;
    for (const SweepPointResult& p : out.points) {
        xs.push_back(p.value);
        ys.push_back(p.output.excess.median);
    }
    try {
        out.fit = loglog_slope(xs, ys);
        out.fit_ok = true;
    } catch (const contract_error& e) {
        out.fit_ok = false;
        out.fit_note = e.what();
    }
    return out;
}

namespace {

// Per-replication audit flags; each flagged property counts once per run.
struct AuditFlags {
    bool event_a = false;
    bool optimal_elim = false;
    bool pair_spread = false;
    bool monotone_s = false;
    bool budget_exact = false;
};

class AuditObserver final : public RoundObserver {
  public:
    AuditObserver(const Instance& inst, double delta, bool check_event_a, bool check_optimal,
                  bool check_spread, bool check_monotone)
        : check_optimal_(check_optimal), check_spread_(check_spread),
          check_monotone_(check_monotone) {
        if (check_event_a) {
            risks_ = inst.moments->risks();
            sqdists_ = inst.moments->sqdists();
            checker_.emplace(risks_, sqdists_, delta, inst.loss);
        }
        if (check_optimal_) optimal_ = inst.moments->optimal_set();
    }

    void on_eliminate(std::int64_t, int, int victim, int, std::int64_t) override {
        if (check_optimal_ &&
            std::binary_search(optimal_.begin(), optimal_.end(), victim))
            flags_.optimal_elim = true;
    }

    void on_round(const PairStats& stats, std::span<const std::uint8_t> alive, std::int64_t t,
                  std::int64_t) override {
        if (checker_ && !checker_->check_round(stats, t)) flags_.event_a = true;
        int survivors = 0;
        for (std::uint8_t a : alive) survivors += a;
        if (check_monotone_ && (survivors > last_survivors_ || survivors < 1))
            flags_.monotone_s = true;
        last_survivors_ = survivors;
        if (check_spread_) {
            double lo = kPosInf, hi = 0.0;
            const int K = static_cast<int>(alive.size());
            for (int i = 0; i < K; ++i) {
                if (!alive[i]) continue;
                for (int j = i + 1; j < K; ++j) {
                    if (!alive[j]) continue;
                    const double n = stats.pair_count(i, j);
                    lo = std::min(lo, n);
                    hi = std::max(hi, n);
                }
            }
            if (hi > 0.0 && lo < kPosInf && hi - lo > 1.0) flags_.pair_spread = true;
        }
    }

    const AuditFlags& flags() const { return flags_; }

  private:
    bool check_optimal_, check_spread_, check_monotone_;
    std::vector<double> risks_, sqdists_;
    std::optional<ConcentrationChecker> checker_;
    std::vector<int> optimal_;
    int last_survivors_ = std::numeric_limits<int>::max();
    AuditFlags flags_;
};

}  // namespace

AuditOutput run_audit(const Config& cfg, std::uint64_t seed, int threads) {
    require(cfg.audit.present, "audit requested without an [audit] section");
    std::vector<std::string> checks = cfg.audit.checks;
    if (checks.empty()) {
        checks = {"event_a", "optimal_elim", "monotone_s"};
        if (cfg.learner.kind == LearnerKind::TwoPoint) checks.push_back("pair_spread");
        if (cfg.learner.kind == LearnerKind::Budgeted) checks.push_back("budget_exact");
    }
    const auto has = [&](const char* name) {
        return std::find(checks.begin(), checks.end(), name) != checks.end();
    };
    require(!has("pair_spread") || cfg.learner.kind == LearnerKind::TwoPoint,
            "pair_spread audit applies to the two_point learner only");
    require(!has("budget_exact") || cfg.learner.kind == LearnerKind::Budgeted,
            "budget_exact audit applies to the budgeted learner only");
    require(!has("optimal_elim") || cfg.learner.kind != LearnerKind::ErmSingle,
            "optimal_elim audit needs an eliminating learner");
    if (has("event_a") || has("optimal_elim")) {
        const Instance probe = make_replication_instance(cfg, 0);
        require(probe.moments.has_value(), "event_a and optimal_elim audits need instance moments");
    }

    const int reps = cfg.run.replications;
    std::vector<AuditFlags> flags(static_cast<std::size_t>(reps));
    parallel_for(reps, threads, [&](int r) {
        const std::uint64_t base = 3 * static_cast<std::uint64_t>(r);
        const Instance inst = make_replication_instance(cfg, r);
        RoundStream stream(inst, Rng(seed, base));
        AuditObserver obs(inst, cfg.learner.delta, has("event_a"), has("optimal_elim"),
                          has("pair_spread"), has("monotone_s"));
        const RunOutcome run = execute_learner(cfg, stream, Rng(seed, base + 1), &obs);
        AuditFlags f = obs.flags();
        if (has("budget_exact")) {
            const std::int64_t c = cfg.learner.budget;
            const std::int64_t s = static_cast<std::int64_t>(run.survivors.size());
            if (run.queries_used > c || c - run.queries_used >= s) f.budget_exact = true;
        }
        flags[static_cast<std::size_t>(r)] = f;
    });

    AuditOutput out;
    // event_a and optimal_elim tolerate the 4 delta failure probability plus
    // three standard errors; the rest are hard invariants.
    const double p0 = std::min(1.0, 4.0 * cfg.learner.delta);
    const double freq_bound =
        std::min(1.0, p0 + 3.0 * std::sqrt(p0 * (1.0 - p0) / static_cast<double>(reps)));
    for (const std::string& name : checks) {
        AuditCheckResult res;
        res.name = name;
        res.runs = reps;
        for (const AuditFlags& f : flags) {
            const bool hit = (name == "event_a" && f.event_a) ||
                             (name == "optimal_elim" && f.optimal_elim) ||
                             (name == "pair_spread" && f.pair_spread) ||
                             (name == "monotone_s" && f.monotone_s) ||
                             (name == "budget_exact" && f.budget_exact);
            if (hit) ++res.violations;
        }
        res.frequency = static_cast<double>(res.violations) / static_cast<double>(reps);
        res.hard = (name != "event_a" && name != "optimal_elim");
        res.bound = res.hard ? 0.0 : freq_bound;
        res.passed = res.hard ? (res.violations == 0) : (res.frequency <= res.bound);
        if (!res.passed) out.all_passed = false;
        out.checks.push_back(std::move(res));
    }
    return out;
}

void write_results_csv(std::ostream& out, const Config& cfg, std::uint64_t seed,
                       const RunOutput& run) {
    out << header_comment(cfg, seed);
    out << "replication,T_or_C,excess_risk,S_final,branch,queries_used\n";
    for (const ReplicationRow& row : run.rows)
        out << (row.replication + 1) << ',' << g12(row.resource) << ',' << g12(row.excess) << ','
            << row.s_final << ',' << row.branch << ',' << row.queries_used << '\n';
    const double resource = run.rows.empty() ? 0.0 : run.rows.front().resource;
    out << "median," << g12(resource) << ',' << g12(run.excess.median) << ','
        << g12(run.survivors.median) << ",," << g12(run.queries.median) << '\n';
    out << "mean," << g12(resource) << ',' << g12(run.excess.mean) << ','
        << g12(run.survivors.mean) << ",," << g12(run.queries.mean) << '\n';
    out << "q90," << g12(resource) << ',' << g12(run.excess.q90) << ','
        << g12(run.survivors.q90) << ",," << g12(run.queries.q90) << '\n';
}

void write_trace_csv(std::ostream& out, const Config& cfg, std::uint64_t seed,
                     std::span<const EliminationEvent> events) {
    out << header_comment(cfg, seed);
    out << "replication,t,by,victim,survivors_after,queries_used\n";
    for (const EliminationEvent& e : events)
        out << (e.replication + 1) << ',' << e.t << ',' << (e.by + 1) << ',' << (e.victim + 1)
            << ',' << e.survivors_after << ',' << e.queries_used << '\n';
}

void write_stats_trace_csv(std::ostream& out, const Config& cfg, std::uint64_t seed,
                           const RunOutput& run) {
    out << header_comment(cfg, seed);
    out << run.stats_trace;
}

void write_sweep_csv(std::ostream& out, const Config& cfg, std::uint64_t seed,
                     const SweepOutput& sweep) {
    out << header_comment(cfg, seed);
    out << "value,median_excess,q90_excess\n";
    for (const SweepPointResult& p : sweep.points)
        out << g12(p.value) << ',' << g12(p.output.excess.median) << ','
            << g12(p.output.excess.q90) << '\n';
    if (sweep.fit_ok)
        out << "# slope=" << g12(sweep.fit.slope) << " intercept=" << g12(sweep.fit.intercept)
            << " used=" << sweep.fit.used << " dropped=" << sweep.fit.dropped << '\n';
    else
        out << "# slope=nan (" << sweep.fit_note << ")\n";
}

void write_audit_csv(std::ostream& out, const Config& cfg, std::uint64_t seed,
                     const AuditOutput& audit) {
    out << header_comment(cfg, seed);
    out << "check,runs,violations,frequency,bound,status\n";
    for (const AuditCheckResult& c : audit.checks)
        out << c.name << ',' << c.runs << ',' << c.violations << ',' << g12(c.frequency) << ','
            << g12(c.bound) << ',' << (c.passed ? "pass" : "fail") << '\n';
}

}  // namespace pairelim
