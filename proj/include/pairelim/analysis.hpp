#pragma once
/*
Instance-dependent complexity and reference thresholds.

For an instance with risks R_i, best risk R* attained on the optimal set,
and pairwise distances d_ij, each suboptimal expert carries a separation
complexity

    lambda_i = min over optimal i* of max{ L^2 d(i,i*)^2 / (R_i - R*)^2,
                                           B / (R_i - R*) },

with lambda_i = +inf for optimal experts and lambda* = the largest finite
lambda_i (0 when every expert is optimal).  Experts whose lambda exceeds
1/eps (and all optimal experts) form the coverage set S_eps; everything
outside it is cheap to eliminate and contributes its lambda_i to the
aggregate cost

    budgeted:   C_eps =   sum_{i not in S_eps} lambda_i
                        + |S_eps| * min{1/eps, lambda*},
    two-point:  C_eps = K sum_{i not in S_eps} lambda_i
                        + 2 |S_eps|^2 * min{1/eps, lambda*}.

The sufficient sampling thresholds are 578 C log(K C / delta) queries for
the budgeted learner and 578 C log(C / delta) rounds for the two-point
learner.  A suboptimal expert j facing i is eliminated (with probability
at least 1 - 4 delta) only after its pair count passes

    lower = 3 M log(K t (t+1) / delta),

and certainly once it passes

    upper = 289 M log(K t (t+1) / delta),

where M = max{L^2 d_ij^2 / gap^2, B / gap} and gap = |R_i - R_j|.

Two reference floors bound what any strategy can do: on the coupled
two-expert family, any learner with m queries errs with probability at
least (1/4)(1 - sqrt(1 - exp(-2 ceil(m/2) eps^2 / (1 - eps^2)))), and on
the endpoint family any T-round strategy mispredicts with probability at
least (1/2) exp(-4 eps^2 T) for eps <= 1/2.
*/

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pairelim/core.hpp"
#include "pairelim/environments.hpp"
#include "pairelim/rng.hpp"

namespace pairelim {

struct InstanceComplexity {
    std::vector<double> lambda;  // +inf for optimal experts
    double lambda_star = 0.0;    // largest finite entry, 0 when none
    std::vector<int> optimal;    // ascending indices of best-risk experts
};

InstanceComplexity separation_complexity(const MomentTable& moments, const LossSpec& loss);

// S_eps: optimal experts always belong; a suboptimal expert belongs iff
// lambda_i > 1/eps.  eps = 0 keeps only the optimal set.
std::vector<int> coverage_set(const InstanceComplexity& sep, double eps);

double budgeted_complexity(const InstanceComplexity& sep, double eps);
double two_point_complexity(const InstanceComplexity& sep, double eps);

// 0 when c_eps <= 0 (every output is optimal, nothing to learn).
double required_budget(double c_eps, double delta, int num_experts);
double required_rounds_two_point(double c_eps, double delta);

// Everything above, evaluated at one eps.
struct ComplexityProfile {
    double eps = 0.0;
    std::vector<int> s_eps;
    double c_eps_budgeted = 0.0;
    double c_eps_twopoint = 0.0;
    double required_budget = 0.0;
    double required_rounds = 0.0;
};

ComplexityProfile complexity_profile(const InstanceComplexity& sep, double eps, double delta);

struct EliminationWindow {
    double lower = 0.0;
    double upper = 0.0;
};

// Bounds on the pair count at which j is eliminated against i when the
// elimination test runs at round t.  Requires R_i != R_j.
EliminationWindow elimination_window(const MomentTable& moments, const LossSpec& loss, int i, int j,
                                     std::int64_t t, double delta);

double coupled_error_floor(int m, double eps);
double bandit_deviation_floor(std::int64_t rounds, double eps);

// oracle_risk(p) minus the best single-expert risk.  Negative values are
// possible: the midpoint rule is improper.
double excess_risk(const Instance& inst, const Prediction& p, std::int64_t mc_samples = 0,
                   Rng* rng = nullptr);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    int used = 0;
    int dropped = 0;  // points with nonpositive ordinate
};

// Least-squares fit of log(y) against log(x).  Nonpositive y values are
// dropped; fewer than three remaining points is an error.
SlopeFit loglog_slope(std::span<const double> xs, std::span<const double> ys);

// Report writers.  Columns, in order:
//   per-expert: instance_id, expert (1-based), risk, lambda;
//   aggregate:  instance_id, epsilon, c_eps_budgeted, c_eps_twopoint,
//               threshold_budgeted, threshold_twopoint.
void write_lambda_csv(std::ostream& out, const std::string& instance_id,
                      const MomentTable& moments, const LossSpec& loss);
void write_complexity_csv(std::ostream& out, const std::string& instance_id,
                          const MomentTable& moments, const LossSpec& loss,
                          std::span<const double> eps_values, double delta);

}  // namespace pairelim
