#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "pairelim/environments.hpp"
#include "pairelim/learners.hpp"
#include "pairelim/rng.hpp"
#include "pairelim/stats.hpp"

using namespace pairelim;

namespace {

Instance mild_instance(int num_experts) {
    GapSpec spec;
    spec.target = {TargetSpec::Kind::Constant, 0.45};
    spec.centers.resize(static_cast<std::size_t>(num_experts));
    for (int i = 0; i < num_experts; ++i)
        spec.centers[static_cast<std::size_t>(i)] = 0.40 + 0.02 * i;
    spec.halfwidths = {0.02};
    return make_gap_instance(spec);
}

Instance spread_instance(std::vector<double> centers) {
    GapSpec spec;
    spec.target = {TargetSpec::Kind::Constant, 0.0};
    spec.centers = std::move(centers);
    spec.halfwidths = {0.05};
    return make_gap_instance(spec);
}

struct QueryLog : RoundObserver {
    std::vector<std::vector<int>> queried;
    std::vector<std::int64_t> used;
    void on_query(std::int64_t, std::span<const int> q, std::int64_t queries_used) override {
        queried.emplace_back(q.begin(), q.end());
        used.push_back(queries_used);
    }
};

struct EventLog : RoundObserver {
    struct Event {
        std::int64_t t;
        int by, victim, survivors_after;
    };
    std::vector<Event> events;
    void on_eliminate(std::int64_t t, int by, int victim, int survivors_after,
                      std::int64_t) override {
        events.push_back({t, by, victim, survivors_after});
    }
};

struct SpreadCheck : RoundObserver {
    int worst_spread = 0;
    void on_round(const PairStats& stats, std::span<const std::uint8_t> alive, std::int64_t,
                  std::int64_t) override {
        double lo = 1e18, hi = -1e18;
        const int K = stats.num_experts();
        for (int i = 0; i < K; ++i) {
            if (!alive[static_cast<std::size_t>(i)]) continue;
            for (int j = i + 1; j < K; ++j) {
                if (!alive[static_cast<std::size_t>(j)]) continue;
                lo = std::min(lo, stats.pair_count(i, j));
                hi = std::max(hi, stats.pair_count(i, j));
            }
        }
        if (hi >= lo) worst_spread = std::max(worst_spread, static_cast<int>(hi - lo));
    }
};

void check_outcome_shape(const RunOutcome& out, int num_experts) {
    REQUIRE(!out.survivors.empty());
    REQUIRE(out.prediction.support.size() <= 2);
    out.prediction.validate(num_experts, 2);
    for (int s : out.prediction.support)
        CHECK(std::find(out.survivors.begin(), out.survivors.end(), s) != out.survivors.end());
}

}  // namespace

TEST_CASE("two-point learner cycles through least-sampled pairs") {
    const Instance inst = mild_instance(3);
    RoundStream stream(inst, Rng(11, 0));
    QueryLog log;
    TwoPointLearner learner(stream, 0.05, &log);
    learner.step();
    learner.step();
    learner.step();
    learner.step();
    REQUIRE(log.queried.size() == 4);
    CHECK(log.queried[0] == std::vector<int>{0, 1});
    CHECK(log.queried[1] == std::vector<int>{0, 2});
    CHECK(log.queried[2] == std::vector<int>{1, 2});
    // all pairs tied again, lexicographic order restarts
    CHECK(log.queried[3] == std::vector<int>{0, 1});
    CHECK(log.used == std::vector<std::int64_t>{2, 4, 6, 8});
    CHECK(learner.stats().pair_count(0, 1) == 2.0);
    CHECK(learner.stats().pair_count(0, 2) == 1.0);
    CHECK(learner.stats().pair_count(1, 2) == 1.0);
}

TEST_CASE("two-point pair counts never spread by more than one") {
    const Instance inst = mild_instance(4);
    RoundStream stream(inst, Rng(12, 0));
    SpreadCheck spread;
    const RunOutcome out = run_two_point(stream, 500, 0.05, &spread);
    CHECK(spread.worst_spread <= 1);
    CHECK(out.queries_used == 1000);
    CHECK(out.rounds == 500);
}

TEST_CASE("two-point finalize falls back to the empirical minimizer early") {
    const Instance inst = mild_instance(3);
    RoundStream stream(inst, Rng(13, 0));
    const RunOutcome out = run_two_point(stream, 1, 0.05);
    // one shared sample cannot clear the midpoint sample threshold
    CHECK(out.branch == "erm");
    CHECK(out.prediction.support.size() == 1);
    CHECK(out.survivors.size() == 3);
}

TEST_CASE("budgeted learner spends its budget exactly down to the surviving set") {
    Rng seeds(77, 3);
    for (int trial = 0; trial < 20; ++trial) {
        const int K = 2 + static_cast<int>(seeds.below(5));
        const std::int64_t budget = K + static_cast<std::int64_t>(seeds.below(500));
        const Instance inst = mild_instance(K);
        RoundStream stream(inst, Rng(100 + trial, 0));
        const RunOutcome out = run_budgeted(stream, budget, 0.05);
        check_outcome_shape(out, K);
        CHECK(out.queries_used <= budget);
        CHECK(budget - out.queries_used <
              static_cast<std::int64_t>(out.survivors.size()));
    }
}

TEST_CASE("budgeted learner empties the budget on a two-expert gap") {
    const Instance inst = spread_instance({0.05, 0.95});
    RoundStream stream(inst, Rng(21, 0));
    const RunOutcome out = run_budgeted(stream, 12000, 0.05);
    CHECK(out.queries_used == 12000);
    CHECK(out.survivors == std::vector<int>{0});
    CHECK(out.branch == "singleton");
    REQUIRE(out.prediction.support.size() == 1);
    CHECK(out.prediction.support[0] == 0);
}

TEST_CASE("budgeted learner rarely eliminates the optimal expert") {
    const Instance inst = spread_instance({0.05, 0.6, 0.95});
    const int runs = 50;
    int optimal_out = 0;
    for (int r = 0; r < runs; ++r) {
        RoundStream stream(inst, Rng(500, static_cast<std::uint64_t>(r)));
        EventLog events;
        run_budgeted(stream, 12000, 0.05, &events);
        for (const auto& e : events.events)
            if (e.victim == 0) ++optimal_out;
    }
    // guarantee is 4 delta = 0.2; allow three sigmas of slack at 50 runs
    CHECK(optimal_out / static_cast<double>(runs) <= 0.37);
}

TEST_CASE("budgeted learner removes the worst expert first") {
    GapSpec spec;
    spec.target = {TargetSpec::Kind::Constant, 0.0};
    spec.risks = {0.25, 0.35, 0.5};
    spec.halfwidths = {0.05};
    const Instance inst = make_gap_instance(spec);
    const int runs = 50;
    int with_events = 0, worst_first = 0;
    for (int r = 0; r < runs; ++r) {
        RoundStream stream(inst, Rng(900, static_cast<std::uint64_t>(r)));
        EventLog events;
        run_budgeted(stream, 40000, 0.05, &events);
        if (events.events.empty()) continue;
        ++with_events;
        if (events.events.front().victim == 2) ++worst_first;
    }
    CHECK(with_events >= 45);
    CHECK(worst_first >= with_events - 2);
}

TEST_CASE("multi-point subsets hit every pair at the uniform rate") {
    const Instance inst = mild_instance(6);
    RoundStream stream(inst, Rng(31, 0));
    Rng subsets(31, 100);
    PairStats stats(1);
    run_multi_point(stream, 3000, 3, 0.05, subsets, nullptr, &stats);
    // each pair lands in a 3-of-6 subset with probability 1/5; four sigmas
    // of a binomial(3000, 1/5) around the mean 600
    const double slack = 4.0 * std::sqrt(3000 * 0.2 * 0.8);
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) {
            CHECK(stats.pair_count(i, j) > 600.0 - slack);
            CHECK(stats.pair_count(i, j) < 600.0 + slack);
        }
}

TEST_CASE("multi-point keeps querying eliminated experts") {
    const Instance inst = spread_instance({0.05, 0.5, 0.95});
    RoundStream stream(inst, Rng(41, 0));
    Rng subsets(41, 100);
    EventLog events;
    PairStats stats(1);
    const RunOutcome out = run_multi_point(stream, 3500, 3, 0.05, subsets, &events, &stats);
    // with m = K every round samples everyone, eliminated or not
    CHECK(stats.pair_count(0, 2) == 3500.0);
    CHECK(stats.expert_count(2) == 3500.0);
    REQUIRE(!events.events.empty());
    CHECK(events.events.front().victim == 2);
    CHECK(events.events.front().t < 3500);
    CHECK(out.survivors == std::vector<int>{0, 1});
    CHECK(out.branch == "midpoint");
    CHECK(out.queries_used == 3 * 3500);
}

TEST_CASE("full information keeps tied experts and aggregates them") {
    GapSpec spec;
    spec.target = {TargetSpec::Kind::Bernoulli, 0.5};
    spec.centers = {0.0, 1.0};
    const Instance inst = make_gap_instance(spec);
    RoundStream stream(inst, Rng(51, 0));
    const RunOutcome out = run_full_information(stream, 400, 0.05);
    CHECK(out.survivors == std::vector<int>{0, 1});
    CHECK(out.branch == "midpoint");
    REQUIRE(out.prediction.support.size() == 2);
    CHECK(out.prediction.weights[0] == 0.5);
    CHECK(out.queries_used == 800);
    // the aggregate beats both experts: risk 1/4 against their 1/2
    CHECK(inst.moments->risk_of(out.prediction) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("all learners collapse cleanly on a single expert") {
    GapSpec spec;
    spec.target = {TargetSpec::Kind::Constant, 0.5};
    spec.centers = {0.4};
    const Instance inst = make_gap_instance(spec);

    auto fresh = [&] { return RoundStream(inst, Rng(61, 0)); };
    {
        RoundStream s = fresh();
        const RunOutcome out = run_full_information(s, 10, 0.05);
        CHECK(out.survivors == std::vector<int>{0});
        CHECK(out.branch == "singleton");
        CHECK(out.queries_used == 10);
    }
    {
        RoundStream s = fresh();
        const RunOutcome out = run_budgeted(s, 10, 0.05);
        CHECK(out.survivors == std::vector<int>{0});
        CHECK(out.queries_used == 10);
    }
    {
        RoundStream s = fresh();
        const RunOutcome out = run_two_point(s, 10, 0.05);
        CHECK(out.survivors == std::vector<int>{0});
        CHECK(out.queries_used == 10);  // solo queries once alone
        CHECK(out.prediction.support == std::vector<int>{0});
    }
    {
        RoundStream s = fresh();
        const RunOutcome out = run_round_robin_erm(s, 10);
        CHECK(out.survivors == std::vector<int>{0});
        CHECK(out.branch == "erm");
        CHECK(out.queries_used == 10);
    }
}

TEST_CASE("round-robin baseline queries one expert per round in order") {
    const Instance inst = mild_instance(3);
    RoundStream stream(inst, Rng(71, 0));
    QueryLog log;
    PairStats stats(1);
    const RunOutcome out = run_round_robin_erm(stream, 7, &log, &stats);
    REQUIRE(log.queried.size() == 7);
    for (std::size_t t = 0; t < log.queried.size(); ++t) {
        REQUIRE(log.queried[t].size() == 1);
        CHECK(log.queried[t][0] == static_cast<int>(t % 3));
    }
    CHECK(out.queries_used == 7);
    CHECK(out.branch == "erm");
    CHECK(out.prediction.support.size() == 1);
    CHECK(stats.expert_count(0) == 3.0);
    CHECK(stats.expert_count(1) == 2.0);
    CHECK(stats.expert_count(2) == 2.0);
    CHECK(stats.pair_count(0, 1) == 0.0);
}

TEST_CASE("learner runs are deterministic given the generator state") {
    const Instance inst = spread_instance({0.05, 0.6, 0.95});
    auto run_once = [&](PairStats& stats) {
        RoundStream stream(inst, Rng(81, 4));
        return run_budgeted(stream, 9000, 0.05, nullptr, &stats);
    };
    PairStats first(1), second(1);
    const RunOutcome a = run_once(first);
    const RunOutcome b = run_once(second);
    CHECK(a.prediction.support == b.prediction.support);
    CHECK(a.prediction.weights == b.prediction.weights);
    CHECK(a.survivors == b.survivors);
    CHECK(a.rounds == b.rounds);
    CHECK(a.queries_used == b.queries_used);
    CHECK(a.branch == b.branch);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            CHECK(first.pair_count(i, j) == second.pair_count(i, j));
            CHECK(first.loss_sum(i, j) == second.loss_sum(i, j));
            CHECK(first.sqdist_sum(i, j) == second.sqdist_sum(i, j));
        }
}

TEST_CASE("every learner emits a valid one- or two-point prediction") {
    const Instance inst = spread_instance({0.05, 0.4, 0.7, 0.95});
    {
        RoundStream s(inst, Rng(91, 0));
        check_outcome_shape(run_full_information(s, 300, 0.05), 4);
    }
    {
        RoundStream s(inst, Rng(92, 0));
        check_outcome_shape(run_budgeted(s, 1200, 0.05), 4);
    }
    {
        RoundStream s(inst, Rng(93, 0));
        check_outcome_shape(run_two_point(s, 600, 0.05), 4);
    }
    {
        RoundStream s(inst, Rng(94, 0));
        Rng subsets(94, 100);
        check_outcome_shape(run_multi_point(s, 600, 2, 0.05, subsets), 4);
    }
    {
        RoundStream s(inst, Rng(95, 0));
        check_outcome_shape(run_round_robin_erm(s, 600), 4);
    }
}

TEST_CASE("learner entry contracts") {
    const Instance inst = mild_instance(3);
    RoundStream stream(inst, Rng(99, 0));
    Rng subsets(99, 100);
    CHECK_THROWS_AS(run_full_information(stream, 0, 0.05), contract_error);
    CHECK_THROWS_AS(run_full_information(stream, 10, 0.0), contract_error);
    CHECK_THROWS_AS(run_full_information(stream, 10, 1.0), contract_error);
    CHECK_THROWS_AS(run_budgeted(stream, 2, 0.05), contract_error);  // budget below K
    CHECK_THROWS_AS(run_two_point(stream, 0, 0.05), contract_error);
    CHECK_THROWS_AS(run_multi_point(stream, 10, 1, 0.05, subsets), contract_error);
    CHECK_THROWS_AS(run_multi_point(stream, 10, 4, 0.05, subsets), contract_error);
    CHECK_THROWS_AS(run_round_robin_erm(stream, 0), contract_error);
    TwoPointLearner learner(stream, 0.05);
    CHECK_THROWS_AS(learner.finalize(), contract_error);  // no rounds yet
}
