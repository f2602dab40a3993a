#pragma once
/*
Flat key = value configuration, grouped into [instance], [learner], [run],
[sweep], and [audit] sections.  Lists accept spaces or commas.  Parse
errors carry "file:line:" prefixes and surface as contract violations.
*/

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pairelim/environments.hpp"

namespace pairelim {

enum class Flip { No, Yes, Alternate };

struct InstanceConfig {
    std::string family = "gap";  // "gap" | "bernoulli_pair"
    TargetSpec target;
    std::vector<double> centers;
    std::vector<double> halfwidths;
    std::vector<double> risks;
    std::vector<int> signs;
    double epsilon = 0.0;       // bernoulli_pair separation
    bool epsilon_auto = false;  // epsilon = 1 / (2 sqrt(rounds))
    bool coupled = true;
    Flip flipped = Flip::No;
};

enum class LearnerKind { FullInfo, Budgeted, TwoPoint, MultiPoint, ErmSingle };

struct LearnerConfig {
    LearnerKind kind = LearnerKind::FullInfo;
    double delta = 0.05;
    std::int64_t rounds = 0;
    std::int64_t budget = 0;
    int subset_size = 2;
};

struct EvalConfig {
    bool closed_form = true;
    std::int64_t mc_samples = 0;
};

struct RunSection {
    int replications = 1;
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = one per hardware thread
    EvalConfig eval;
    std::string out;          // results CSV; empty = stdout
    std::string trace;        // elimination events CSV, all replications
    std::string stats_trace;  // per-round pair statistics, replication 1 only
};

enum class SweepVariable { Rounds, Budget, SubsetSize, Epsilon };

struct SweepSection {
    bool present = false;
    SweepVariable variable = SweepVariable::Rounds;
    std::vector<double> values;
    std::string out;
};

struct AuditSection {
    bool present = false;
    std::vector<std::string> checks;  // empty = every applicable check
    std::string out;
};

struct Config {
    InstanceConfig instance;
    LearnerConfig learner;
    RunSection run;
    SweepSection sweep;
    AuditSection audit;
    std::uint64_t hash = 0;  // FNV-1a over the canonical key/value list
};

std::uint64_t fnv1a(std::string_view text);

// origin labels error messages (usually the file path).
Config parse_config_text(std::string_view text, const std::string& origin);
Config parse_config_file(const std::string& path);

// The resource value a run consumes: rounds, except for the budgeted
// learner where it is the query budget.
double config_resource(const Config& cfg);

// Builds the replication's environment.  For the alternating Bernoulli
// pair, odd replications get the flipped instance; automatic epsilon
// resolves to 1 / (2 sqrt(rounds)).
Instance make_replication_instance(const Config& cfg, int replication);

}  // namespace pairelim
