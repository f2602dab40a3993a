#include "pairelim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace pairelim {

PairStats::PairStats(int num_experts, int dim) : K_(num_experts), dim_(dim) {
    require(num_experts >= 1, "PairStats: need at least one expert");
    require(dim >= 1, "PairStats: dim must be >= 1");
    const std::size_t n = static_cast<std::size_t>(K_) * K_;
    count_.assign(n, 0.0);
    loss_.assign(n, 0.0);
    sqdist_.assign(n, 0.0);
    mask_.assign(static_cast<std::size_t>(K_), 0.0);
}

void PairStats::observe_joint(std::span<const int> queried, const double* values,
                              const double* losses) {
    require(!queried.empty(), "observe_joint: empty query set");
    ++round_;
    for (int q : queried) {
        require(q >= 0 && q < K_, "observe_joint: expert index out of range");
        mask_[static_cast<std::size_t>(q)] = 1.0;
    }
    const auto& k = simd::active();
    const std::size_t n = static_cast<std::size_t>(K_);
    if (dim_ == 1) {
        for (int a : queried) {
            const std::size_t row = static_cast<std::size_t>(a) * n;
            k.masked_add(count_.data() + row, 1.0, mask_.data(), n);
            k.masked_add(loss_.data() + row, losses[a], mask_.data(), n);
            k.masked_sqdiff_add(sqdist_.data() + row, values[a], values, mask_.data(), n);
        }
    } else {
        for (int a : queried) {
            const std::size_t row = static_cast<std::size_t>(a) * n;
            k.masked_add(count_.data() + row, 1.0, mask_.data(), n);
            k.masked_add(loss_.data() + row, losses[a], mask_.data(), n);
        }
        for (std::size_t u = 0; u < queried.size(); ++u) {
            for (std::size_t v = u + 1; v < queried.size(); ++v) {
                const int a = queried[u], b = queried[v];
                double sq = 0.0;
                for (int d = 0; d < dim_; ++d) {
                    const double diff = values[static_cast<std::size_t>(a) * dim_ + d] -
                                        values[static_cast<std::size_t>(b) * dim_ + d];
                    sq += diff * diff;
                }
                sqdist_[idx(a, b)] += sq;
                sqdist_[idx(b, a)] += sq;
            }
        }
    }
    for (int q : queried) mask_[static_cast<std::size_t>(q)] = 0.0;
}

void PairStats::observe_pair(int i, int j, std::span<const double> f_i,
                             std::span<const double> f_j, double loss_i, double loss_j) {
    require(i != j, "observe_pair: expert paired with itself");
    require(i >= 0 && i < K_ && j >= 0 && j < K_, "observe_pair: expert index out of range");
    ++round_;
    double sq = 0.0;
    for (int d = 0; d < dim_; ++d) {
        const double diff = f_i[d] - f_j[d];
        sq += diff * diff;
    }
    count_[idx(i, i)] += 1.0;
    count_[idx(j, j)] += 1.0;
    count_[idx(i, j)] += 1.0;
    count_[idx(j, i)] += 1.0;
    loss_[idx(i, i)] += loss_i;
    loss_[idx(j, j)] += loss_j;
    loss_[idx(i, j)] += loss_i;
    loss_[idx(j, i)] += loss_j;
    sqdist_[idx(i, j)] += sq;
    sqdist_[idx(j, i)] += sq;
}

void PairStats::observe_single(int i, double loss_i) {
    require(i >= 0 && i < K_, "observe_single: expert index out of range");
    ++round_;
    count_[idx(i, i)] += 1.0;
    loss_[idx(i, i)] += loss_i;
}

double PairStats::emp_risk(int i) const {
    const double n = count_[idx(i, i)];
    if (n <= 0.0) return kPosInf;
    return loss_[idx(i, i)] / n;
}

double PairStats::emp_risk_on_shared(int j, int i) const {
    const double n = count_[idx(j, i)];
    if (n <= 0.0) return kPosInf;
    return loss_[idx(j, i)] / n;
}

double PairStats::emp_sqdist(int i, int j) const {
    const double n = count_[idx(i, j)];
    if (n <= 0.0) return 0.0;
    return sqdist_[idx(i, j)] / n;
}

namespace {

// 6 max{L alpha d̂, B alpha^2}; the two elimination-test branches.
double test_margin(double alpha, double dhat, const LossSpec& loss) {
    return 6.0 * std::max(loss.lipschitz * alpha * dhat, loss.range * alpha * alpha);
}

double anytime_delta(double delta, std::int64_t t) {
    require(t >= 1, "elimination statistic: round index must be >= 1");
    require(delta > 0.0 && delta < 1.0, "elimination statistic: delta must be in (0,1)");
    return delta / (static_cast<double>(t) * (static_cast<double>(t) + 1.0));
}

}  // namespace

double elim_stat_full(const PairStats& stats, int i, int j, double delta, const LossSpec& loss) {
    require(delta > 0.0 && delta < 1.0, "elim_stat_full: delta must be in (0,1)");
    const double n = stats.pair_count(i, j);
    if (n <= 0.0) return kNegInf;
    const double alpha = confidence_radius(n, delta, stats.num_experts());
    return stats.emp_risk(j) - stats.emp_risk(i) - test_margin(alpha, stats.emp_dist(i, j), loss);
}

double elim_stat_anytime(const PairStats& stats, int i, int j, std::int64_t t, double delta,
                         const LossSpec& loss) {
    const double delta_eff = anytime_delta(delta, t);
    const double n = stats.pair_count(i, j);
    if (n <= 0.0) return kNegInf;
    const double alpha = confidence_radius(n, delta_eff, stats.num_experts());
    return stats.emp_risk(j) - stats.emp_risk(i) - test_margin(alpha, stats.emp_dist(i, j), loss);
}

double elim_stat_pairwise(const PairStats& stats, int i, int j, std::int64_t t, double delta,
                          const LossSpec& loss) {
    const double delta_eff = anytime_delta(delta, t);
    const double n = stats.pair_count(i, j);
    if (n <= 0.0) return kNegInf;
    const double alpha = confidence_radius(n, delta_eff, stats.num_experts());
    return stats.emp_risk_on_shared(j, i) - stats.emp_risk_on_shared(i, j) -
           test_margin(alpha, stats.emp_dist(i, j), loss);
}

ConcentrationChecker::ConcentrationChecker(std::span<const double> true_risks,
                                           std::span<const double> true_sqdists, double delta,
                                           const LossSpec& loss)
    : risk_(true_risks.begin(), true_risks.end()),
      sqdist_(true_sqdists.begin(), true_sqdists.end()),
      delta_(delta),
      lipschitz_(loss.lipschitz),
      range_(loss.range),
      K_(static_cast<int>(true_risks.size())) {
    require(delta > 0.0 && delta < 1.0, "ConcentrationChecker: delta must be in (0,1)");
    require(sqdist_.size() == static_cast<std::size_t>(K_) * K_,
            "ConcentrationChecker: sqdist matrix size mismatch");
}

bool ConcentrationChecker::check_round(const PairStats& stats, std::int64_t t) {
    const double delta_eff = delta_ / (static_cast<double>(t) * (static_cast<double>(t) + 1.0));
    const double diam = range_ / lipschitz_;
    bool ok = true;
    auto record = [&](int family, int i, int j, double slack) {
        ++total_violations_;
        ok = false;
        if (sample_.size() < 16) sample_.push_back(Violation{t, family, i, j, slack});
    };
    for (int i = 0; i < K_; ++i) {
        const double n_i = stats.expert_count(i);
        if (n_i > 0.0) {
            const double a_i = confidence_radius(n_i, delta_eff, K_);
            const double dev = std::abs(stats.emp_risk(i) - risk_[static_cast<std::size_t>(i)]);
            const double bound = 2.0 * range_ * a_i;
            if (dev > bound) record(2, i, -1, dev - bound);
        }
        for (int j = i + 1; j < K_; ++j) {
            const double n_ij = stats.pair_count(i, j);
            if (n_ij <= 0.0) continue;
            const double a = confidence_radius(n_ij, delta_eff, K_);
            const double dhat_sq = stats.emp_sqdist(i, j);
            const double d_sq = sqdist_[static_cast<std::size_t>(i) * K_ + j];
            const double gap_true = risk_[static_cast<std::size_t>(i)] - risk_[static_cast<std::size_t>(j)];
            const double gap_emp = stats.emp_risk_on_shared(i, j) - stats.emp_risk_on_shared(j, i);
            const double b1 =
                3.0 * std::max(lipschitz_ * std::sqrt(dhat_sq) * a, range_ * a * a);
            if (std::abs(gap_emp - gap_true) > b1) record(1, i, j, std::abs(gap_emp - gap_true) - b1);
            const double floor = diam * diam * a * a;
            const double b3 = 12.0 * std::max(d_sq, floor);
            if (dhat_sq > b3) record(3, i, j, dhat_sq - b3);
            const double b4 = 12.0 * std::max(dhat_sq, floor);
            if (d_sq > b4) record(4, i, j, d_sq - b4);
        }
    }
    return ok;
}

void write_pair_stat_rows(std::ostream& out, const PairStats& stats, std::int64_t t, double delta,
                          const LossSpec& loss, bool header) {
    if (header) out << "t,i,j,pair_count,risk_i_shared,risk_j_shared,dist,stat_pairwise\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    const int K = stats.num_experts();
    for (int i = 0; i < K; ++i) {
        for (int j = i + 1; j < K; ++j) {
            out << t << ',' << (i + 1) << ',' << (j + 1) << ',' << num(stats.pair_count(i, j))
                << ',' << num(stats.emp_risk_on_shared(i, j)) << ','
                << num(stats.emp_risk_on_shared(j, i)) << ',' << num(stats.emp_dist(i, j)) << ','
                << num(elim_stat_pairwise(stats, i, j, t, delta, loss)) << '\n';
        }
    }
}

}  // namespace pairelim
