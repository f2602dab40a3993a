#pragma once
/*
Synthetic stochastic environments with closed-form moments.

Every instance carries a moment table (E||Y||^2, E<Y,F_i>, E<F_i,F_j>)
from which squared-loss risks, pairwise distances, and the exact risk of
any convex combination follow by expansion.  The same tables make the
strong-convexity midpoint identity

    R((F_i + F_j) / 2) = R(F_i)/2 + R(F_j)/2 - d_ij^2 / 4

an algebraic consequence rather than an estimate.

Learners observe instances only through RoundStream::query, which draws
the next round internally and copies out the values of exactly the
requested experts; unqueried values are never exposed.
*/

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pairelim/core.hpp"
#include "pairelim/rng.hpp"

namespace pairelim {

struct MomentTable {
    double y_sq = 0.0;             // E||Y||^2
    std::vector<double> y_dot_f;   // E<Y, F_i>
    std::vector<double> f_dot_f;   // K*K, E<F_i, F_j>; diagonal E||F_i||^2

    int num_experts() const { return static_cast<int>(y_dot_f.size()); }

    double cross(int i, int j) const {
        return f_dot_f[static_cast<std::size_t>(i) * num_experts() + j];
    }

    // Squared-loss risk of expert i.
    double risk(int i) const { return y_sq - 2.0 * y_dot_f[i] + cross(i, i); }

    // E||F_i - F_j||^2.
    double sqdist(int i, int j) const { return cross(i, i) + cross(j, j) - 2.0 * cross(i, j); }

    double best_risk() const;
    std::vector<int> optimal_set(double tol = 1e-12) const;
    std::vector<double> risks() const;
    std::vector<double> sqdists() const;  // K*K matrix

    // Exact squared-loss risk of a convex combination of experts.
    double risk_of(const Prediction& p) const;
};

struct Instance {
    std::string family;
    int num_experts = 0;
    int dim = 1;
    LossSpec loss;
    std::optional<MomentTable> moments;
    std::function<void(Rng&, Round&)> sample;  // fills a pre-sized Round
};

// Two experts watching the same uniform draw (coupled = true): F_1 = 1{U <= a_1},
// F_2 = 1{U <= a_2} with {a_1, a_2} = {1/2 - eps/2, 1/2 + eps/2} and Y = 0, so
// R = {a_1, a_2} and d^2 = eps.  flipped swaps which expert gets the smaller
// level.  With coupled = false the experts are pinned at 0 and 1 and the
// instance identity hides in the target: Y ~ Bernoulli(1/2 -+ eps/2).
Instance make_two_expert_bernoulli(double eps, bool coupled, bool flipped);

struct TargetSpec {
    enum class Kind { Constant, Bernoulli, Uniform } kind = Kind::Constant;
    double param = 0.0;  // Constant: the value; Bernoulli: success probability

    double mean() const;
    double variance() const;
    double second_moment() const { return variance() + mean() * mean(); }
};

// Scalar experts F_i = c_i + a_i U_i with independent U_i ~ Uniform[-1, 1],
// supports kept inside [0, 1]; the target is drawn independently.  Exact
// moments: R_i = Var(Y) + (E Y - c_i)^2 + a_i^2/3 and
// d_ij^2 = (c_i - c_j)^2 + (a_i^2 + a_j^2)/3.
struct GapSpec {
    TargetSpec target;
    std::vector<double> centers;     // c_i; leave empty to derive from risks
    std::vector<double> halfwidths;  // a_i; empty means all zero, single value broadcasts
    std::vector<double> risks;       // desired risks when centers is empty
    std::vector<int> signs;          // +-1 placement side per expert when deriving
};

Instance make_gap_instance(const GapSpec& spec);

struct RiskEstimate {
    double value = 0.0;
    double std_error = 0.0;  // zero for closed-form evaluation
};

// Exact risk via the moment table when available (squared loss); otherwise
// Monte-Carlo with the provided sample budget and generator.
RiskEstimate oracle_risk(const Instance& inst, const Prediction& p, std::int64_t mc_samples = 0,
                         Rng* rng = nullptr);

// The query gate: draws rounds internally, exposes requested experts only.
class RoundStream {
  public:
    RoundStream(const Instance& inst, Rng rng);

    // Advances one round.  values_out receives the requested experts'
    // predictions compactly (position k holds expert experts[k], dim
    // entries each); y_out receives the target.  Returns the round index
    // (1-based).
    std::int64_t query(std::span<const int> experts, std::span<double> values_out,
                       std::span<double> y_out);

    std::int64_t rounds_drawn() const { return scratch_.t; }
    const Instance& instance() const { return *inst_; }

  private:
    const Instance* inst_;
    Rng rng_;
    Round scratch_;
};

}  // namespace pairelim
