#pragma once
/*
Pairwise query statistics and the elimination test statistics built on them.

For experts i, j let T_ij be the number of rounds both were queried
together, R̂_ij(i) the mean loss of i over those shared rounds, and d̂_ij
the root mean squared prediction distance.  With the confidence radius

    alpha(n, delta_eff) = sqrt(log(4 K / delta_eff) / n)

the statistic certifying "j is worse than i" is

    R̂(j) - R̂(i) - 6 max{ L alpha d̂_ij , B alpha^2 },

in a fixed-sample form (full information, confidence delta), an anytime
form (effective confidence delta / (t (t+1)) at round t), and a pairwise
form whose risks are estimated only on shared rounds.  A positive value
eliminates j.  Zero-count statistics are the explicit sentinel -infinity:
no data never eliminates anyone.

Storage note: the K x K count and loss-sum matrices carry the per-expert
counters on their diagonals (a round that queries expert i updates entry
(i, i) exactly once), so a single masked row update per queried expert
maintains both the pair and the per-expert accumulators.
*/

#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "pairelim/core.hpp"
#include "pairelim/kernels.hpp"

namespace pairelim {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

// sqrt(log(4K / delta_eff) / count); +infinity when count == 0.
inline double confidence_radius(double count, double delta_eff, int num_experts) {
    require(delta_eff > 0.0 && delta_eff < 1.0, "confidence_radius: delta_eff must be in (0,1)");
    require(num_experts >= 1, "confidence_radius: need at least one expert");
    if (count <= 0.0) return kPosInf;
    return std::sqrt(std::log(4.0 * num_experts / delta_eff) / count);
}

class PairStats {
  public:
    explicit PairStats(int num_experts, int dim = 1);

    int num_experts() const { return K_; }
    int dim() const { return dim_; }
    std::int64_t rounds() const { return round_; }

    // One round in which every expert in `queried` (distinct indices) was
    // observed jointly.  `values` is expert-major over all K experts with
    // dim entries per expert; entries of unqueried experts are ignored.
    // `losses` holds l(F_i, y) for each queried i (indexed by expert id).
    void observe_joint(std::span<const int> queried, const double* values, const double* losses);

    // One round observing exactly the pair {i, j}, i != j.
    void observe_pair(int i, int j, std::span<const double> f_i, std::span<const double> f_j,
                      double loss_i, double loss_j);

    // One round observing a single expert.
    void observe_single(int i, double loss_i);

    // Accessors.  pair_count(i, i) and loss_sum(i, i) are the per-expert
    // query count and loss sum.
    double pair_count(int i, int j) const { return count_[idx(i, j)]; }
    double expert_count(int i) const { return count_[idx(i, i)]; }
    double loss_sum(int i, int j) const { return loss_[idx(i, j)]; }
    double sqdist_sum(int i, int j) const { return sqdist_[idx(i, j)]; }

    // Mean loss of i over all rounds i was queried; +infinity if never queried.
    double emp_risk(int i) const;
    // Mean loss of j over the rounds shared with i; +infinity if T_ij == 0.
    double emp_risk_on_shared(int j, int i) const;
    // Mean squared prediction distance over shared rounds; 0 if T_ij == 0.
    double emp_sqdist(int i, int j) const;
    double emp_dist(int i, int j) const { return std::sqrt(emp_sqdist(i, j)); }

  private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * K_ + static_cast<std::size_t>(j);
    }

    int K_;
    int dim_;
    std::int64_t round_ = 0;
    std::vector<double> count_;   // K*K; diagonal = per-expert counts
    std::vector<double> loss_;    // K*K; (i,j) = sum of l(F_i) over shared rounds
    std::vector<double> sqdist_;  // K*K symmetric; diagonal 0
    std::vector<double> mask_;    // scratch for the masked row kernels
};

// Fixed-sample statistic (full information): every pair shares the same
// sample set and the confidence level is delta itself.
double elim_stat_full(const PairStats& stats, int i, int j, double delta, const LossSpec& loss);

// Anytime statistic for jointly queried survivors: per-expert risks, pair
// distance, effective confidence delta / (t (t+1)).
double elim_stat_anytime(const PairStats& stats, int i, int j, std::int64_t t, double delta,
                         const LossSpec& loss);

// Anytime pairwise statistic: risks and distance both restricted to the
// rounds the pair shared.
double elim_stat_pairwise(const PairStats& stats, int i, int j, std::int64_t t, double delta,
                          const LossSpec& loss);

// Audits the four concentration inequality families against the true
// moments after every round; their union holds with probability at least
// 1 - 4 delta over a full run:
//   (1) |(R̂_ij(i) - R̂_ij(j)) - (R_i - R_j)| <= 3 max{L d̂_ij a_ij, B a_ij^2}
//   (2) |R̂_i - R_i|                         <= 2 B a_i
//   (3) d̂_ij^2 <= 12 max{d_ij^2, (B/L)^2 a_ij^2}
//   (4) d_ij^2  <= 12 max{d̂_ij^2, (B/L)^2 a_ij^2}
// with a_xy = confidence_radius(T_xy, delta / (t (t+1))).
class ConcentrationChecker {
  public:
    struct Violation {
        std::int64_t t;
        int family;  // 1..4
        int i, j;    // j == -1 for family 2
        double slack;
    };

    ConcentrationChecker(std::span<const double> true_risks, std::span<const double> true_sqdists,
                         double delta, const LossSpec& loss);

    // Checks all families at round t; records violations.  Returns true
    // when every inequality held.
    bool check_round(const PairStats& stats, std::int64_t t);

    bool clean() const { return total_violations_ == 0; }
    std::int64_t total_violations() const { return total_violations_; }
    const std::vector<Violation>& sample_violations() const { return sample_; }

  private:
    std::vector<double> risk_;
    std::vector<double> sqdist_;
    double delta_;
    double lipschitz_;
    double range_;
    int K_;
    std::int64_t total_violations_ = 0;
    std::vector<Violation> sample_;  // first few only
};

// Writes one CSV row per ordered pair i < j with the current shared-round
// statistics and the pairwise test value.  Indices are 1-based in the file.
void write_pair_stat_rows(std::ostream& out, const PairStats& stats, std::int64_t t, double delta,
                          const LossSpec& loss, bool header = false);

}  // namespace pairelim
