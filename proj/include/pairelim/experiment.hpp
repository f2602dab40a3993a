#pragma once
/*
Replication fan-out and report writers behind the command-line harness.

Substream layout: replication r of sweep point v draws from stream base
3 (v * replications + r); base + 0 feeds the environment, base + 1 the
learner's own randomness (subset draws), base + 2 Monte-Carlo evaluation.
Workers fan out over replications and never share state; results are
ordered by replication index regardless of completion order, so output
files depend only on the configuration and seed.
*/

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pairelim/analysis.hpp"
#include "pairelim/config.hpp"
#include "pairelim/learners.hpp"

namespace pairelim {

struct EliminationEvent {
    int replication = 0;  // 0-based
    std::int64_t t = 0;
    int by = 0;
    int victim = 0;
    int survivors_after = 0;
    std::int64_t queries_used = 0;
};

struct ReplicationRow {
    int replication = 0;  // 0-based
    double resource = 0.0;
    double excess = 0.0;
    int s_final = 0;
    std::string branch;
    std::int64_t queries_used = 0;
};

struct SummaryStats {
    double median = 0.0;
    double mean = 0.0;
    double q90 = 0.0;  // nearest-rank 0.9 quantile
};

SummaryStats summarize(std::vector<double> values);

struct RunOutput {
    std::vector<ReplicationRow> rows;
    std::vector<EliminationEvent> events;
    SummaryStats excess, survivors, queries;
    std::string stats_trace;  // replication 1's per-round pair statistics
};

// threads <= 0 means one worker per hardware thread.
RunOutput run_replications(const Config& cfg, std::uint64_t seed, int threads,
                           std::uint64_t stream_block = 0);

struct SweepPointResult {
    double value = 0.0;
    RunOutput output;
};

struct SweepOutput {
    std::vector<SweepPointResult> points;
    SlopeFit fit;
    bool fit_ok = false;
    std::string fit_note;  // why the fit is absent
};

Config apply_sweep_value(const Config& cfg, double value);
SweepOutput run_sweep(const Config& cfg, std::uint64_t seed, int threads);

struct AuditCheckResult {
    std::string name;
    int runs = 0;
    std::int64_t violations = 0;  // runs that violated the property
    double frequency = 0.0;
    double bound = 0.0;  // allowed frequency; 0 for hard invariants
    bool hard = false;
    bool passed = false;
};

struct AuditOutput {
    std::vector<AuditCheckResult> checks;
    bool all_passed = true;
};

AuditOutput run_audit(const Config& cfg, std::uint64_t seed, int threads);

// Writers.  Every file starts with "# config_hash=<hex> seed=<n>"; rows
// use 1-based replication and expert indices.
void write_results_csv(std::ostream& out, const Config& cfg, std::uint64_t seed,
                       const RunOutput& run);
void write_trace_csv(std::ostream& out, const Config& cfg, std::uint64_t seed,
                     std::span<const EliminationEvent> events);
void write_stats_trace_csv(std::ostream& out, const Config& cfg, std::uint64_t seed,
                           const RunOutput& run);
void write_sweep_csv(std::ostream& out, const Config& cfg, std::uint64_t seed,
                     const SweepOutput& sweep);
void write_audit_csv(std::ostream& out, const Config& cfg, std::uint64_t seed,
                     const AuditOutput& audit);

}  // namespace pairelim
