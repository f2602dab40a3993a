#pragma once
/*
Core domain types shared by all learners: loss specifications, observation
rounds, and the (at most two expert) convex-combination predictions.

A loss l(x, y) that is L-Lipschitz and rho-strongly convex in x has an
effective range bounded by B = 8 L^2 / rho^2, and the prediction set has
diameter at most B / L.  These derived constants drive every confidence
radius in the elimination tests, so they are computed once and carried
around inside LossSpec.
*/

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pairelim {

struct contract_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw contract_error(msg);
}

struct DerivedBounds {
    double range;     // B = 8 L^2 / rho^2
    double diameter;  // B / L = 8 L / rho^2
};

inline DerivedBounds derive_bounds(double lipschitz, double rho_sq) {
    require(lipschitz > 0.0, "derive_bounds: Lipschitz constant must be positive");
    require(rho_sq > 0.0, "derive_bounds: strong-convexity modulus must be positive");
    const double range = 8.0 * lipschitz * lipschitz / rho_sq;
    return DerivedBounds{range, range / lipschitz};
}

enum class LossKind { Squared, Custom };

// A loss function together with the constants the algorithms need.
// Custom losses must declare their own L and rho^2; nothing is estimated.
struct LossSpec {
    LossKind kind = LossKind::Squared;
    double lipschitz = 2.0;  // L
    double rho_sq = 2.0;     // rho^2
    double range = 16.0;     // B = 8 L^2 / rho^2
    int dim = 1;
    std::function<double(std::span<const double>, std::span<const double>)> fn;

    static LossSpec squared(int dim = 1) {
        require(dim >= 1, "LossSpec: dim must be >= 1");
        LossSpec s;
        s.kind = LossKind::Squared;
        s.lipschitz = 2.0;
        s.rho_sq = 2.0;
        s.range = derive_bounds(2.0, 2.0).range;
        s.dim = dim;
        return s;
    }

    static LossSpec custom(std::function<double(std::span<const double>, std::span<const double>)> f,
                           double lipschitz, double rho_sq, int dim = 1) {
        require(dim >= 1, "LossSpec: dim must be >= 1");
        LossSpec s;
        s.kind = LossKind::Custom;
        s.lipschitz = lipschitz;
        s.rho_sq = rho_sq;
        s.range = derive_bounds(lipschitz, rho_sq).range;
        s.dim = dim;
        s.fn = std::move(f);
        return s;
    }

    double eval(std::span<const double> x, std::span<const double> y) const {
        require(static_cast<int>(x.size()) == dim && static_cast<int>(y.size()) == dim,
                "loss eval: dimension mismatch");
        if (kind == LossKind::Squared) {
            double acc = 0.0;
            for (int d = 0; d < dim; ++d) {
                const double diff = y[d] - x[d];
                acc += diff * diff;
            }
            return acc;
        }
        return fn(x, y);
    }

    // Scalar convenience for dim == 1.
    double eval(double x, double y) const {
        require(dim == 1, "scalar loss eval requires dim == 1");
        return eval(std::span<const double>(&x, 1), std::span<const double>(&y, 1));
    }
};

// One observation round: target y and the K expert predictions, stored
// expert-major (expert i occupies [i*dim, (i+1)*dim)).
struct Round {
    std::int64_t t = 0;
    int num_experts = 0;
    int dim = 1;
    std::vector<double> y;  // dim entries
    std::vector<double> f;  // num_experts * dim entries

    void resize(int K, int d) {
        num_experts = K;
        dim = d;
        y.assign(static_cast<std::size_t>(d), 0.0);
        f.assign(static_cast<std::size_t>(K) * d, 0.0);
    }

    std::span<const double> expert(int i) const {
        return std::span<const double>(f.data() + static_cast<std::size_t>(i) * dim,
                                       static_cast<std::size_t>(dim));
    }
    std::span<double> expert_mut(int i) {
        return std::span<double>(f.data() + static_cast<std::size_t>(i) * dim,
                                 static_cast<std::size_t>(dim));
    }
};

// A convex combination of at most p experts.  All experiments use p = 2.
struct Prediction {
    std::vector<int> support;      // 0-based expert indices, distinct
    std::vector<double> weights;   // aligned with support, sums to 1

    static Prediction singleton(int i) { return Prediction{{i}, {1.0}}; }
    static Prediction midpoint(int i, int j) {
        if (i == j) return singleton(i);
        return Prediction{{i, j}, {0.5, 0.5}};
    }

    void validate(int num_experts, int max_support = 2) const {
        require(!support.empty(), "Prediction: empty support");
        require(support.size() == weights.size(), "Prediction: support/weight length mismatch");
        require(static_cast<int>(support.size()) <= max_support,
                "Prediction: support larger than allowed");
        double total = 0.0;
        for (std::size_t s = 0; s < support.size(); ++s) {
            require(support[s] >= 0 && support[s] < num_experts,
                    "Prediction: support index out of range");
            require(weights[s] >= 0.0, "Prediction: negative weight");
            for (std::size_t r = s + 1; r < support.size(); ++r)
                require(support[s] != support[r], "Prediction: duplicate support index");
            total += weights[s];
        }
        require(std::abs(total - 1.0) <= 1e-12, "Prediction: weights must sum to 1");
    }
};

// Evaluates the combined prediction sum_s w_s F_{support_s} for one round.
inline std::vector<double> predict(const Prediction& p, const Round& round) {
    p.validate(round.num_experts, static_cast<int>(p.support.size()));
    std::vector<double> out(static_cast<std::size_t>(round.dim), 0.0);
    for (std::size_t s = 0; s < p.support.size(); ++s) {
        const auto fi = round.expert(p.support[s]);
        for (int d = 0; d < round.dim; ++d) out[d] += p.weights[s] * fi[d];
    }
    return out;
}

// Scalar convenience: expert values given directly, dim == 1.
inline double predict(const Prediction& p, std::span<const double> expert_values) {
    double out = 0.0;
    for (std::size_t s = 0; s < p.support.size(); ++s) {
        require(p.support[s] >= 0 && p.support[s] < static_cast<int>(expert_values.size()),
                "predict: support index out of range");
        out += p.weights[s] * expert_values[p.support[s]];
    }
    return out;
}

}  // namespace pairelim
