#include "pairelim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "pairelim/stats.hpp"

namespace pairelim {

namespace {

std::string g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

InstanceComplexity separation_complexity(const MomentTable& moments, const LossSpec& loss) {
    const int K = moments.num_experts();
    InstanceComplexity sep;
    sep.lambda.assign(static_cast<std::size_t>(K), kPosInf);
    sep.optimal = moments.optimal_set();
    const double best = moments.best_risk();
    const double L = loss.lipschitz;
    const double B = loss.range;
    for (int i = 0; i < K; ++i) {
        const bool opt =
            std::binary_search(sep.optimal.begin(), sep.optimal.end(), i);
        if (opt) continue;
        const double gap = moments.risk(i) - best;
        double value = kPosInf;
        for (int star : sep.optimal) {
            const double cand = std::max(L * L * moments.sqdist(i, star) / (gap * gap), B / gap);
            value = std::min(value, cand);
        }
        sep.lambda[static_cast<std::size_t>(i)] = value;
        sep.lambda_star = std::max(sep.lambda_star, value);
    }
    return sep;
}

std::vector<int> coverage_set(const InstanceComplexity& sep, double eps) {
    require(eps >= 0.0, "coverage set: eps must be nonnegative");
    const double cutoff = (eps == 0.0) ? kPosInf : 1.0 / eps;
    std::vector<int> s;
    for (int i = 0; i < static_cast<int>(sep.lambda.size()); ++i) {
        const double l = sep.lambda[static_cast<std::size_t>(i)];
        if (std::isinf(l) || l > cutoff) s.push_back(i);
    }
    return s;
}

namespace {

// Shared pieces of the two aggregate forms: the lambda mass outside the
// coverage set and the clipped per-member cost min{1/eps, lambda*}.
struct Split {
    double outside_sum;
    double member_cost;
    double coverage_size;
};

Split split_complexity(const InstanceComplexity& sep, double eps) {
    const std::vector<int> s = coverage_set(sep, eps);
    Split out{0.0, 0.0, static_cast<double>(s.size())};
    std::size_t pos = 0;
    for (int i = 0; i < static_cast<int>(sep.lambda.size()); ++i) {
        if (pos < s.size() && s[pos] == i) {
            ++pos;
            continue;
        }
        out.outside_sum += sep.lambda[static_cast<std::size_t>(i)];
    }
    const double inv = (eps == 0.0) ? kPosInf : 1.0 / eps;
    out.member_cost = std::min(inv, sep.lambda_star);
    return out;
}

}  // namespace

double budgeted_complexity(const InstanceComplexity& sep, double eps) {
    const Split s = split_complexity(sep, eps);
    return s.outside_sum + s.coverage_size * s.member_cost;
}

double two_point_complexity(const InstanceComplexity& sep, double eps) {
    const Split s = split_complexity(sep, eps);
    const double K = static_cast<double>(sep.lambda.size());
    return K * s.outside_sum + 2.0 * s.coverage_size * s.coverage_size * s.member_cost;
}

double required_budget(double c_eps, double delta, int num_experts) {
    if (c_eps <= 0.0) return 0.0;
    require(delta > 0.0 && delta < 1.0, "required budget: delta must be in (0,1)");
    require(num_experts >= 1, "required budget: need at least one expert");
    return 578.0 * c_eps * std::log(static_cast<double>(num_experts) * c_eps / delta);
}

double required_rounds_two_point(double c_eps, double delta) {
    if (c_eps <= 0.0) return 0.0;
    require(delta > 0.0 && delta < 1.0, "required rounds: delta must be in (0,1)");
    return 578.0 * c_eps * std::log(c_eps / delta);
}

ComplexityProfile complexity_profile(const InstanceComplexity& sep, double eps, double delta) {
    ComplexityProfile p;
    p.eps = eps;
    p.s_eps = coverage_set(sep, eps);
    p.c_eps_budgeted = budgeted_complexity(sep, eps);
    p.c_eps_twopoint = two_point_complexity(sep, eps);
    p.required_budget =
        required_budget(p.c_eps_budgeted, delta, static_cast<int>(sep.lambda.size()));
    p.required_rounds = required_rounds_two_point(p.c_eps_twopoint, delta);
    return p;
}

EliminationWindow elimination_window(const MomentTable& moments, const LossSpec& loss, int i, int j,
                                     std::int64_t t, double delta) {
    const int K = moments.num_experts();
    require(i >= 0 && i < K && j >= 0 && j < K && i != j,
            "elimination window: need two distinct experts");
    require(t >= 1, "elimination window: round index must be positive");
    require(delta > 0.0 && delta < 1.0, "elimination window: delta must be in (0,1)");
    const double gap = std::fabs(moments.risk(i) - moments.risk(j));
    require(gap > 0.0, "elimination window: undefined for equal risks");
    const double L = loss.lipschitz;
    const double B = loss.range;
    const double m = std::max(L * L * moments.sqdist(i, j) / (gap * gap), B / gap);
    const double log_term = std::log(static_cast<double>(K) * static_cast<double>(t) *
                                     static_cast<double>(t + 1) / delta);
    return {3.0 * m * log_term, 289.0 * m * log_term};
}

double coupled_error_floor(int m, double eps) {
    require(m >= 1, "coupled error floor: need at least one query");
    require(eps > 0.0 && eps < 1.0, "coupled error floor: eps must be in (0,1)");
    const double half = static_cast<double>((m + 1) / 2);
    const double expo = std::exp(-2.0 * half * eps * eps / (1.0 - eps * eps));
    return 0.25 * (1.0 - std::sqrt(1.0 - expo));
}

double bandit_deviation_floor(std::int64_t rounds, double eps) {
    require(rounds >= 0, "bandit deviation floor: rounds must be nonnegative");
    require(eps > 0.0 && eps <= 0.5, "bandit deviation floor: eps must be in (0, 1/2]");
    return 0.5 * std::exp(-4.0 * eps * eps * static_cast<double>(rounds));
}

double excess_risk(const Instance& inst, const Prediction& p, std::int64_t mc_samples, Rng* rng) {
    const RiskEstimate r = oracle_risk(inst, p, mc_samples, rng);
    double best = kPosInf;
    if (inst.moments) {
        best = inst.moments->best_risk();
    } else {
        for (int i = 0; i < inst.num_experts; ++i)
            best = std::min(best,
                            oracle_risk(inst, Prediction::singleton(i), mc_samples, rng).value);
    }
    return r.value - best;
}

SlopeFit loglog_slope(std::span<const double> xs, std::span<const double> ys) {
    require(xs.size() == ys.size(), "log-log slope: series lengths differ");
    SlopeFit fit;
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        require(xs[k] > 0.0, "log-log slope: abscissas must be positive");
        if (ys[k] <= 0.0) {
            ++fit.dropped;
            continue;
        }
        lx.push_back(std::log(xs[k]));
        ly.push_back(std::log(ys[k]));
    }
    fit.used = static_cast<int>(lx.size());
    require(fit.used >= 3, "log-log slope: need at least three positive points");
    double mx = 0.0, my = 0.0;
    for (int k = 0; k < fit.used; ++k) {
        mx += lx[static_cast<std::size_t>(k)];
        my += ly[static_cast<std::size_t>(k)];
    }
    mx /= fit.used;
    my /= fit.used;
    double sxx = 0.0, sxy = 0.0;
    for (int k = 0; k < fit.used; ++k) {
        const double dx = lx[static_cast<std::size_t>(k)] - mx;
        sxx += dx * dx;
        sxy += dx * (ly[static_cast<std::size_t>(k)] - my);
    }
    require(sxx > 0.0, "log-log slope: abscissas must not all coincide");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

void write_lambda_csv(std::ostream& out, const std::string& instance_id,
                      const MomentTable& moments, const LossSpec& loss) {
    const InstanceComplexity sep = separation_complexity(moments, loss);
    out << "instance_id,expert,risk,lambda\n";
    for (int i = 0; i < moments.num_experts(); ++i)
        out << instance_id << ',' << (i + 1) << ',' << g12(moments.risk(i)) << ','
            << g12(sep.lambda[static_cast<std::size_t>(i)]) << '\n';
}

void write_complexity_csv(std::ostream& out, const std::string& instance_id,
                          const MomentTable& moments, const LossSpec& loss,
                          std::span<const double> eps_values, double delta) {
    const InstanceComplexity sep = separation_complexity(moments, loss);
    out << "instance_id,epsilon,c_eps_budgeted,c_eps_twopoint,threshold_budgeted,"
           "threshold_twopoint\n";
    for (double eps : eps_values) {
        const ComplexityProfile p = complexity_profile(sep, eps, delta);
        out << instance_id << ',' << g12(eps) << ',' << g12(p.c_eps_budgeted) << ','
            << g12(p.c_eps_twopoint) << ',' << g12(p.required_budget) << ','
            << g12(p.required_rounds) << '\n';
    }
}

}  // namespace pairelim
