#pragma once
/*
Elimination learners.  All of them share the same skeleton: query some
experts through the RoundStream gate, fold the observations into
PairStats, run one simultaneous elimination pass over the surviving set
(every ordered pair is tested, victims are removed together after the
pass), and finally aggregate the two most informative survivors:

    k = smallest surviving index,
    l = argmax over survivors of the estimated distance to k,
    output the midpoint (F_k + F_l) / 2   (singleton when l == k).

They differ in what a round costs and which test statistic applies:
  - full information: all K experts every round, one fixed-confidence
    elimination pass at the end;
  - budgeted: all survivors every round while the remaining budget covers
    them, anytime statistic;
  - two-point: the least-sampled surviving pair each round, pairwise
    anytime statistic, with an empirical-risk-minimizer fallback when the
    chosen pair has too few shared samples;
  - multi-point: a uniformly random size-m subset of all K experts each
    round, pairwise anytime statistic, midpoint finalization only.

A round-robin ERM baseline (one query per round, no elimination) serves
as the single-query comparison point.
*/

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pairelim/environments.hpp"
#include "pairelim/stats.hpp"

namespace pairelim {

// Hook for traces and audits.  on_query fires after the round's statistics
// update, on_eliminate once per victim of the round's elimination pass
// (survivor count is the post-pass value), on_round after the pass.
struct RoundObserver {
    virtual ~RoundObserver() = default;
    virtual void on_query(std::int64_t /*t*/, std::span<const int> /*queried*/,
                          std::int64_t /*queries_used*/) {}
    virtual void on_eliminate(std::int64_t /*t*/, int /*by*/, int /*victim*/,
                              int /*survivors_after*/, std::int64_t /*queries_used*/) {}
    virtual void on_round(const PairStats& /*stats*/, std::span<const std::uint8_t> /*alive*/,
                          std::int64_t /*t*/, std::int64_t /*queries_used*/) {}
};

struct RunOutcome {
    Prediction prediction;
    std::vector<int> survivors;
    std::int64_t rounds = 0;
    std::int64_t queries_used = 0;
    std::string branch;  // "midpoint", "singleton", or "erm"
};

RunOutcome run_full_information(RoundStream& stream, std::int64_t rounds, double delta,
                                RoundObserver* obs = nullptr, PairStats* stats_out = nullptr);

RunOutcome run_budgeted(RoundStream& stream, std::int64_t budget, double delta,
                        RoundObserver* obs = nullptr, PairStats* stats_out = nullptr);

// Stepwise two-point learner; each step costs two queries (one when only a
// single expert survives).
class TwoPointLearner {
  public:
    TwoPointLearner(RoundStream& stream, double delta, RoundObserver* obs = nullptr);

    void step();
    RunOutcome finalize() const;

    const PairStats& stats() const { return stats_; }
    std::span<const std::uint8_t> alive() const { return alive_; }
    std::int64_t rounds() const { return t_; }
    std::int64_t queries_used() const { return queries_; }

  private:
    RoundStream* stream_;
    double delta_;
    RoundObserver* obs_;
    int K_;
    PairStats stats_;
    std::vector<std::uint8_t> alive_;
    std::int64_t t_ = 0;
    std::int64_t queries_ = 0;
    std::vector<double> values_, losses_, y_;
    std::vector<double> compact_;
};

RunOutcome run_two_point(RoundStream& stream, std::int64_t rounds, double delta,
                         RoundObserver* obs = nullptr, PairStats* stats_out = nullptr);

// subset_rng drives the random size-m subsets and is independent of the
// environment's generator.
RunOutcome run_multi_point(RoundStream& stream, std::int64_t rounds, int subset_size, double delta,
                           Rng& subset_rng, RoundObserver* obs = nullptr,
                           PairStats* stats_out = nullptr);

RunOutcome run_round_robin_erm(RoundStream& stream, std::int64_t rounds,
                               RoundObserver* obs = nullptr, PairStats* stats_out = nullptr);

}  // namespace pairelim
