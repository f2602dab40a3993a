#include "pairelim/environments.hpp"

#include <algorithm>
#include <cmath>

#include "pairelim/stats.hpp"

namespace pairelim {

double MomentTable::best_risk() const {
    double best = kPosInf;
    for (int i = 0; i < num_experts(); ++i) best = std::min(best, risk(i));
    return best;
}

std::vector<int> MomentTable::optimal_set(double tol) const {
    const double best = best_risk();
    std::vector<int> out;
    for (int i = 0; i < num_experts(); ++i)
        if (risk(i) <= best + tol) out.push_back(i);
    return out;
}

std::vector<double> MomentTable::risks() const {
    std::vector<double> out(static_cast<std::size_t>(num_experts()));
    for (int i = 0; i < num_experts(); ++i) out[static_cast<std::size_t>(i)] = risk(i);
    return out;
}

std::vector<double> MomentTable::sqdists() const {
    const int K = num_experts();
    std::vector<double> out(static_cast<std::size_t>(K) * K, 0.0);
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) out[static_cast<std::size_t>(i) * K + j] = sqdist(i, j);
    return out;
}

double MomentTable::risk_of(const Prediction& p) const {
    p.validate(num_experts(), static_cast<int>(p.support.size()));
    double acc = y_sq;
    for (std::size_t s = 0; s < p.support.size(); ++s) {
        acc -= 2.0 * p.weights[s] * y_dot_f[p.support[s]];
        for (std::size_t r = 0; r < p.support.size(); ++r)
            acc += p.weights[s] * p.weights[r] * cross(p.support[s], p.support[r]);
    }
    return acc;
}

Instance make_two_expert_bernoulli(double eps, bool coupled, bool flipped) {
    require(eps > 0.0 && eps < 1.0, "two-expert Bernoulli: eps must be in (0,1)");
    const double lo = 0.5 - eps / 2.0;
    const double hi = 0.5 + eps / 2.0;

    Instance inst;
    inst.num_experts = 2;
    inst.dim = 1;
    inst.loss = LossSpec::squared();
    MomentTable m;
    m.y_dot_f.assign(2, 0.0);
    m.f_dot_f.assign(4, 0.0);

    if (coupled) {
        const double a1 = flipped ? hi : lo;
        const double a2 = flipped ? lo : hi;
        // F_i in {0,1} so E F_i^2 = E F_i; both indicators fire iff U is
        // below the smaller threshold.
        m.y_sq = 0.0;
        m.f_dot_f[0] = a1;
        m.f_dot_f[3] = a2;
        m.f_dot_f[1] = m.f_dot_f[2] = std::min(a1, a2);
        inst.family = "coupled_bernoulli";
        inst.sample = [a1, a2](Rng& rng, Round& round) {
            const double u = rng.uniform();
            round.y[0] = 0.0;
            round.f[0] = (u <= a1) ? 1.0 : 0.0;
            round.f[1] = (u <= a2) ? 1.0 : 0.0;
        };
    } else {
        const double bias = flipped ? hi : lo;
        m.y_sq = bias;
        m.y_dot_f[1] = bias;
        m.f_dot_f[3] = 1.0;
        inst.family = "endpoint_bernoulli";
        inst.sample = [bias](Rng& rng, Round& round) {
            round.y[0] = rng.bernoulli(bias) ? 1.0 : 0.0;
            round.f[0] = 0.0;
            round.f[1] = 1.0;
        };
    }
    inst.moments = std::move(m);
    return inst;
}

double TargetSpec::mean() const {
    switch (kind) {
        case Kind::Constant: return param;
        case Kind::Bernoulli: return param;
        case Kind::Uniform: return 0.5;
    }
    return 0.0;
}

double TargetSpec::variance() const {
    switch (kind) {
        case Kind::Constant: return 0.0;
        case Kind::Bernoulli: return param * (1.0 - param);
        case Kind::Uniform: return 1.0 / 12.0;
    }
    return 0.0;
}

Instance make_gap_instance(const GapSpec& spec) {
    if (spec.target.kind == TargetSpec::Kind::Bernoulli)
        require(spec.target.param >= 0.0 && spec.target.param <= 1.0,
                "gap instance: Bernoulli target probability out of [0,1]");
    if (spec.target.kind == TargetSpec::Kind::Constant)
        require(spec.target.param >= 0.0 && spec.target.param <= 1.0,
                "gap instance: constant target out of [0,1]");

    std::vector<double> centers = spec.centers;
    const std::size_t K =
        centers.empty() ? spec.risks.size() : centers.size();
    require(K >= 1, "gap instance: no experts specified");

    std::vector<double> widths = spec.halfwidths;
    if (widths.empty()) widths.assign(K, 0.0);
    if (widths.size() == 1 && K > 1) widths.assign(K, widths[0]);
    require(widths.size() == K, "gap instance: halfwidth count mismatch");
    for (double a : widths) require(a >= 0.0, "gap instance: negative noise halfwidth");

    const double mu = spec.target.mean();
    const double var = spec.target.variance();

    if (centers.empty()) {
        // Place expert i at c_i = mu +- sqrt(R_i - Var(Y) - a_i^2/3),
        // alternating sides unless a sign pattern says otherwise.  A risk
        // below the attainable floor, or a center that no side can keep
        // inside [0,1], is a construction error.
        centers.resize(K);
        for (std::size_t i = 0; i < K; ++i) {
            const double excess = spec.risks[i] - var - widths[i] * widths[i] / 3.0;
            require(excess >= -1e-12,
                    "gap instance: requested risk below the attainable floor");
            const double off = std::sqrt(std::max(0.0, excess));
            int sign = (i % 2 == 0) ? -1 : +1;
            if (i < spec.signs.size() && spec.signs[i] != 0) sign = spec.signs[i];
            double c = mu + sign * off;
            if (c < widths[i] - 1e-12 || c > 1.0 - widths[i] + 1e-12) c = mu - sign * off;
            require(c >= widths[i] - 1e-12 && c <= 1.0 - widths[i] + 1e-12,
                    "gap instance: no placement keeps the expert support inside [0,1]");
            centers[i] = std::clamp(c, widths[i], 1.0 - widths[i]);
        }
    } else {
        for (std::size_t i = 0; i < K; ++i)
            require(centers[i] - widths[i] >= -1e-12 && centers[i] + widths[i] <= 1.0 + 1e-12,
                    "gap instance: expert support leaves [0,1]");
    }

    MomentTable m;
    m.y_sq = spec.target.second_moment();
    m.y_dot_f.resize(K);
    m.f_dot_f.assign(K * K, 0.0);
    for (std::size_t i = 0; i < K; ++i) {
        m.y_dot_f[i] = mu * centers[i];
        for (std::size_t j = 0; j < K; ++j)
            m.f_dot_f[i * K + j] = centers[i] * centers[j];
        m.f_dot_f[i * K + i] += widths[i] * widths[i] / 3.0;
    }

    Instance inst;
    inst.family = "gap";
    inst.num_experts = static_cast<int>(K);
    inst.dim = 1;
    inst.loss = LossSpec::squared();
    inst.moments = std::move(m);
    const TargetSpec target = spec.target;
    inst.sample = [target, centers, widths](Rng& rng, Round& round) {
        switch (target.kind) {
            case TargetSpec::Kind::Constant: round.y[0] = target.param; break;
            case TargetSpec::Kind::Bernoulli:
                round.y[0] = rng.bernoulli(target.param) ? 1.0 : 0.0;
                break;
            case TargetSpec::Kind::Uniform: round.y[0] = rng.uniform(); break;
        }
        for (std::size_t i = 0; i < centers.size(); ++i) {
            const double noise =
                (widths[i] > 0.0) ? widths[i] * (2.0 * rng.uniform() - 1.0) : 0.0;
            round.f[i] = centers[i] + noise;
        }
    };
    return inst;
}

RiskEstimate oracle_risk(const Instance& inst, const Prediction& p, std::int64_t mc_samples,
                         Rng* rng) {
    p.validate(inst.num_experts, static_cast<int>(p.support.size()));
    if (mc_samples <= 0) {
        require(inst.moments.has_value() && inst.loss.kind == LossKind::Squared,
                "oracle_risk: closed form needs squared loss with moments");
        return RiskEstimate{inst.moments->risk_of(p), 0.0};
    }
    require(rng != nullptr, "oracle_risk: Monte-Carlo evaluation needs a generator");
    Round round;
    round.resize(inst.num_experts, inst.dim);
    double sum = 0.0, sum_sq = 0.0;
    std::vector<double> combo;
    for (std::int64_t s = 0; s < mc_samples; ++s) {
        round.t = s + 1;
        inst.sample(*rng, round);
        combo = predict(p, round);
        const double l = inst.loss.eval(std::span<const double>(combo),
                                        std::span<const double>(round.y));
        sum += l;
        sum_sq += l * l;
    }
    const double n = static_cast<double>(mc_samples);
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    return RiskEstimate{mean, std::sqrt(var / n)};
}

RoundStream::RoundStream(const Instance& inst, Rng rng) : inst_(&inst), rng_(rng) {
    scratch_.resize(inst.num_experts, inst.dim);
    scratch_.t = 0;
}

std::int64_t RoundStream::query(std::span<const int> experts, std::span<double> values_out,
                                std::span<double> y_out) {
    require(!experts.empty(), "RoundStream::query: empty request");
    require(values_out.size() == experts.size() * static_cast<std::size_t>(inst_->dim),
            "RoundStream::query: values buffer size mismatch");
    require(y_out.size() == static_cast<std::size_t>(inst_->dim),
            "RoundStream::query: target buffer size mismatch");
    ++scratch_.t;
    inst_->sample(rng_, scratch_);
    for (std::size_t k = 0; k < experts.size(); ++k) {
        const int e = experts[k];
        require(e >= 0 && e < inst_->num_experts, "RoundStream::query: expert index out of range");
        const auto src = scratch_.expert(e);
        std::copy(src.begin(), src.end(),
                  values_out.begin() + static_cast<std::ptrdiff_t>(k * inst_->dim));
    }
    std::copy(scratch_.y.begin(), scratch_.y.end(), y_out.begin());
    return scratch_.t;
}

}  // namespace pairelim
