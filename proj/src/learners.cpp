#include "pairelim/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pairelim {

namespace {

std::vector<int> alive_list(std::span<const std::uint8_t> alive) {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(alive.size()); ++i)
        if (alive[i]) out.push_back(i);
    return out;
}

// Queries `queried` through the gate, computes losses, and updates stats.
// values/losses are full-K scratch (unqueried slots zeroed), compact is the
// gate's output buffer.  Scalar squared loss goes through the vector kernel.
void observe_round(RoundStream& stream, PairStats& stats, std::span<const int> queried,
                   std::vector<double>& values, std::vector<double>& losses,
                   std::vector<double>& compact, std::vector<double>& y) {
    const Instance& inst = stream.instance();
    const int dim = inst.dim;
    compact.resize(queried.size() * static_cast<std::size_t>(dim));
    stream.query(queried, compact, y);
    if (dim == 1 && inst.loss.kind == LossKind::Squared) {
        simd::active().squared_residuals(losses.data(), y[0], compact.data(), queried.size());
        // losses currently compact; scatter together with the values
        for (std::size_t k = queried.size(); k-- > 0;) {
            values[static_cast<std::size_t>(queried[k])] = compact[k];
            losses[static_cast<std::size_t>(queried[k])] = losses[k];
        }
    } else {
        for (std::size_t k = 0; k < queried.size(); ++k) {
            const std::span<const double> f(compact.data() + k * dim,
                                            static_cast<std::size_t>(dim));
            for (int d = 0; d < dim; ++d)
                values[static_cast<std::size_t>(queried[k]) * dim + d] = f[d];
            losses[static_cast<std::size_t>(queried[k])] =
                inst.loss.eval(f, std::span<const double>(y));
        }
    }
    stats.observe_joint(queried, values.data(), losses.data());
}

// One simultaneous elimination pass: every ordered surviving pair (u, v)
// with stat(u, v) > 0 marks v; victims leave together afterwards.
template <typename StatFn>
void elimination_pass(std::vector<std::uint8_t>& alive, std::int64_t t, std::int64_t queries,
                      RoundObserver* obs, StatFn&& stat) {
    const int K = static_cast<int>(alive.size());
    std::vector<int> eliminator(static_cast<std::size_t>(K), -1);
    int marked = 0, living = 0;
    for (int u = 0; u < K; ++u) {
        if (!alive[u]) continue;
        ++living;
        for (int v = 0; v < K; ++v) {
            if (v == u || !alive[v] || eliminator[v] >= 0) continue;
            if (stat(u, v) > 0.0) {
                eliminator[v] = u;
                ++marked;
            }
        }
    }
    if (marked == 0) return;
    if (marked >= living)
        throw std::logic_error("elimination pass would empty the surviving set");
    for (int v = 0; v < K; ++v)
        if (eliminator[v] >= 0) alive[v] = 0;
    if (obs) {
        const int survivors = living - marked;
        for (int v = 0; v < K; ++v)
            if (eliminator[v] >= 0) obs->on_eliminate(t, eliminator[v], v, survivors, queries);
    }
}

// Midpoint of the smallest survivor and the survivor farthest from it.
RunOutcome finalize_midpoint(const PairStats& stats, std::span<const std::uint8_t> alive,
                             std::int64_t rounds, std::int64_t queries) {
    RunOutcome out;
    out.survivors = alive_list(alive);
    if (out.survivors.empty()) throw std::logic_error("no surviving expert at finalization");
    const int k = out.survivors.front();
    int far = k;
    double far_sq = 0.0;
    for (int j : out.survivors) {
        const double sq = stats.emp_sqdist(k, j);
        if (sq > far_sq) {
            far_sq = sq;
            far = j;
        }
    }
    out.prediction = (far == k) ? Prediction::singleton(k) : Prediction::midpoint(k, far);
    out.branch = (far == k) ? "singleton" : "midpoint";
    out.rounds = rounds;
    out.queries_used = queries;
    return out;
}

}  // namespace

RunOutcome run_full_information(RoundStream& stream, std::int64_t rounds, double delta,
                                RoundObserver* obs, PairStats* stats_out) {
    const Instance& inst = stream.instance();
    require(rounds >= 1, "full information: need at least one round");
    require(delta > 0.0 && delta < 1.0, "full information: delta must be in (0,1)");
    const int K = inst.num_experts;
    PairStats stats(K, inst.dim);
    std::vector<int> queried(static_cast<std::size_t>(K));
    std::iota(queried.begin(), queried.end(), 0);
    std::vector<double> values(static_cast<std::size_t>(K) * inst.dim, 0.0);
    std::vector<double> losses(static_cast<std::size_t>(K), 0.0);
    std::vector<double> y(static_cast<std::size_t>(inst.dim), 0.0);
    std::vector<double> compact;
    std::vector<std::uint8_t> alive(static_cast<std::size_t>(K), 1);

    std::int64_t queries = 0;
    for (std::int64_t t = 1; t <= rounds; ++t) {
        observe_round(stream, stats, queried, values, losses, compact, y);
        queries += K;
        if (obs) {
            obs->on_query(t, queried, queries);
            obs->on_round(stats, alive, t, queries);
        }
    }
    elimination_pass(alive, rounds, queries, obs, [&](int u, int v) {
        return elim_stat_full(stats, u, v, delta, inst.loss);
    });
    RunOutcome out = finalize_midpoint(stats, alive, rounds, queries);
    if (stats_out) *stats_out = stats;
    return out;
}

RunOutcome run_budgeted(RoundStream& stream, std::int64_t budget, double delta, RoundObserver* obs,
                        PairStats* stats_out) {
    const Instance& inst = stream.instance();
    const int K = inst.num_experts;
    require(budget >= K, "budgeted: budget must cover one full round");
    require(delta > 0.0 && delta < 1.0, "budgeted: delta must be in (0,1)");
    PairStats stats(K, inst.dim);
    std::vector<std::uint8_t> alive(static_cast<std::size_t>(K), 1);
    std::vector<double> values(static_cast<std::size_t>(K) * inst.dim, 0.0);
    std::vector<double> losses(static_cast<std::size_t>(K), 0.0);
    std::vector<double> y(static_cast<std::size_t>(inst.dim), 0.0);
    std::vector<double> compact;
    std::vector<int> queried;

    std::int64_t queries = 0;
    std::int64_t t = 0;
    while (true) {
        queried = alive_list(alive);
        // A round queries every survivor; stop before overdrawing.
        if (queries + static_cast<std::int64_t>(queried.size()) > budget) break;
        ++t;
        observe_round(stream, stats, queried, values, losses, compact, y);
        queries += static_cast<std::int64_t>(queried.size());
        if (obs) obs->on_query(t, queried, queries);
        elimination_pass(alive, t, queries, obs, [&](int u, int v) {
            return elim_stat_anytime(stats, u, v, t, delta, inst.loss);
        });
        if (obs) obs->on_round(stats, alive, t, queries);
    }
    RunOutcome out = finalize_midpoint(stats, alive, t, queries);
    if (stats_out) *stats_out = stats;
    return out;
}

TwoPointLearner::TwoPointLearner(RoundStream& stream, double delta, RoundObserver* obs)
    : stream_(&stream),
      delta_(delta),
      obs_(obs),
      K_(stream.instance().num_experts),
      stats_(K_, stream.instance().dim),
      alive_(static_cast<std::size_t>(K_), 1),
      values_(static_cast<std::size_t>(K_) * stream.instance().dim, 0.0),
      losses_(static_cast<std::size_t>(K_), 0.0),
      y_(static_cast<std::size_t>(stream.instance().dim), 0.0) {
    require(delta > 0.0 && delta < 1.0, "two-point: delta must be in (0,1)");
}

void TwoPointLearner::step() {
    const std::vector<int> survivors = alive_list(alive_);
    ++t_;
    if (survivors.size() == 1) {
        const int a = survivors.front();
        const int query[1] = {a};
        compact_.resize(static_cast<std::size_t>(stream_->instance().dim));
        stream_->query(query, compact_, y_);
        const std::span<const double> f(compact_.data(), compact_.size());
        stats_.observe_single(a, stream_->instance().loss.eval(f, std::span<const double>(y_)));
        queries_ += 1;
        if (obs_) {
            obs_->on_query(t_, query, queries_);
            obs_->on_round(stats_, alive_, t_, queries_);
        }
        return;
    }
    // Least-sampled surviving pair, lexicographic on ties.
    int pi = -1, pj = -1;
    double best = kPosInf;
    for (std::size_t a = 0; a < survivors.size(); ++a) {
        for (std::size_t b = a + 1; b < survivors.size(); ++b) {
            const double n = stats_.pair_count(survivors[a], survivors[b]);
            if (n < best) {
                best = n;
                pi = survivors[a];
                pj = survivors[b];
            }
        }
    }
    const int dim = stream_->instance().dim;
    const int query[2] = {pi, pj};
    compact_.resize(2 * static_cast<std::size_t>(dim));
    stream_->query(query, compact_, y_);
    const std::span<const double> fi(compact_.data(), static_cast<std::size_t>(dim));
    const std::span<const double> fj(compact_.data() + dim, static_cast<std::size_t>(dim));
    const LossSpec& loss = stream_->instance().loss;
    stats_.observe_pair(pi, pj, fi, fj, loss.eval(fi, std::span<const double>(y_)),
                        loss.eval(fj, std::span<const double>(y_)));
    queries_ += 2;
    if (obs_) obs_->on_query(t_, query, queries_);
    elimination_pass(alive_, t_, queries_, obs_, [&](int u, int v) {
        return elim_stat_pairwise(stats_, u, v, t_, delta_, loss);
    });
    if (obs_) obs_->on_round(stats_, alive_, t_, queries_);
}

RunOutcome TwoPointLearner::finalize() const {
    require(t_ >= 1, "two-point finalize: no rounds elapsed");
    RunOutcome out;
    out.survivors = alive_list(alive_);
    out.rounds = t_;
    out.queries_used = queries_;
    const int k = out.survivors.front();
    int far = k;
    double far_sq = 0.0;
    for (int j : out.survivors) {
        const double sq = stats_.emp_sqdist(k, j);
        if (sq > far_sq) {
            far_sq = sq;
            far = j;
        }
    }
    // ERM fallback: prefer the empirically best survivor unless the chosen
    // pair has clearly enough shared samples.
    int erm = k;
    double erm_risk = kPosInf;
    for (int j : out.survivors) {
        const double r = stats_.emp_risk(j);
        if (r < erm_risk) {
            erm_risk = r;
            erm = j;
        }
    }
    const double threshold =
        std::sqrt(std::log(static_cast<double>(K_) * static_cast<double>(t_) / delta_) *
                  stats_.expert_count(erm));
    if (stats_.pair_count(k, far) > threshold) {
        out.prediction = (far == k) ? Prediction::singleton(k) : Prediction::midpoint(k, far);
        out.branch = "midpoint";
    } else {
        out.prediction = Prediction::singleton(erm);
        out.branch = "erm";
    }
    return out;
}

RunOutcome run_two_point(RoundStream& stream, std::int64_t rounds, double delta, RoundObserver* obs,
                         PairStats* stats_out) {
    require(rounds >= 1, "two-point: need at least one round");
    TwoPointLearner learner(stream, delta, obs);
    for (std::int64_t t = 0; t < rounds; ++t) learner.step();
    RunOutcome out = learner.finalize();
    if (stats_out) *stats_out = learner.stats();
    return out;
}

RunOutcome run_multi_point(RoundStream& stream, std::int64_t rounds, int subset_size, double delta,
                           Rng& subset_rng, RoundObserver* obs, PairStats* stats_out) {
    const Instance& inst = stream.instance();
    const int K = inst.num_experts;
    require(rounds >= 1, "multi-point: need at least one round");
    require(subset_size >= 2 && subset_size <= K, "multi-point: subset size must be in [2, K]");
    require(delta > 0.0 && delta < 1.0, "multi-point: delta must be in (0,1)");
    PairStats stats(K, inst.dim);
    std::vector<std::uint8_t> alive(static_cast<std::size_t>(K), 1);
    std::vector<double> values(static_cast<std::size_t>(K) * inst.dim, 0.0);
    std::vector<double> losses(static_cast<std::size_t>(K), 0.0);
    std::vector<double> y(static_cast<std::size_t>(inst.dim), 0.0);
    std::vector<double> compact;
    std::vector<int> perm(static_cast<std::size_t>(K));
    std::vector<int> subset(static_cast<std::size_t>(subset_size));

    std::int64_t queries = 0;
    for (std::int64_t t = 1; t <= rounds; ++t) {
        // Uniform subset of all K experts (not just survivors): partial
        // Fisher-Yates, then sorted for a deterministic query order.
        std::iota(perm.begin(), perm.end(), 0);
        for (int a = 0; a < subset_size; ++a) {
            const int b = a + static_cast<int>(subset_rng.below(static_cast<std::uint64_t>(K - a)));
            std::swap(perm[a], perm[b]);
            subset[a] = perm[a];
        }
        std::sort(subset.begin(), subset.end());
        observe_round(stream, stats, subset, values, losses, compact, y);
        queries += subset_size;
        if (obs) obs->on_query(t, subset, queries);
        elimination_pass(alive, t, queries, obs, [&](int u, int v) {
            return elim_stat_pairwise(stats, u, v, t, delta, inst.loss);
        });
        if (obs) obs->on_round(stats, alive, t, queries);
    }
    RunOutcome out = finalize_midpoint(stats, alive, rounds, queries);
    if (stats_out) *stats_out = stats;
    return out;
}

RunOutcome run_round_robin_erm(RoundStream& stream, std::int64_t rounds, RoundObserver* obs,
                               PairStats* stats_out) {
    const Instance& inst = stream.instance();
    const int K = inst.num_experts;
    require(rounds >= 1, "round-robin ERM: need at least one round");
    PairStats stats(K, inst.dim);
    std::vector<double> y(static_cast<std::size_t>(inst.dim), 0.0);
    std::vector<double> compact(static_cast<std::size_t>(inst.dim));
    std::vector<std::uint8_t> alive(static_cast<std::size_t>(K), 1);

    for (std::int64_t t = 1; t <= rounds; ++t) {
        const int e = static_cast<int>((t - 1) % K);
        const int query[1] = {e};
        stream.query(query, compact, y);
        const std::span<const double> f(compact.data(), compact.size());
        stats.observe_single(e, inst.loss.eval(f, std::span<const double>(y)));
        if (obs) {
            obs->on_query(t, query, t);
            obs->on_round(stats, alive, t, t);
        }
    }
    RunOutcome out;
    out.rounds = rounds;
    out.queries_used = rounds;
    out.survivors.resize(static_cast<std::size_t>(K));
    std::iota(out.survivors.begin(), out.survivors.end(), 0);
    int best = 0;
    double best_risk = kPosInf;
    for (int i = 0; i < K; ++i) {
        const double r = stats.emp_risk(i);
        if (r < best_risk) {
            best_risk = r;
            best = i;
        }
    }
    out.prediction = Prediction::singleton(best);
    out.branch = "erm";
    if (stats_out) *stats_out = stats;
    return out;
}

}  // namespace pairelim
