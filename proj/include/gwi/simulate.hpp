#pragma once

#include "gwi/limits.hpp"
#include "gwi/model.hpp"
#include "gwi/rng.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string_view>
#include <vector>

namespace gwi {

// Walker alias table over a finite set of outcomes 0..size-1.
class AliasTable {
public:
    AliasTable() = default;
    explicit AliasTable(const std::vector<double>& weights);

    int sample(Philox& rng) const {
        const double u = rng.uniform() * static_cast<double>(prob_.size());
        const auto i = static_cast<std::size_t>(u);
        return (u - static_cast<double>(i)) < prob_[i] ? static_cast<int>(i) : alias_[i];
    }
    std::size_t size() const noexcept { return prob_.size(); }

private:
    std::vector<double> prob_;
    std::vector<int> alias_;
};

enum class IncrementKind { shifted_pareto, truncated_discrete, gaussian };

std::string_view to_string(IncrementKind kind);

// Law of X_1: mean zero, variance sigma0^2, optionally P(X >= x) ~ a x^{-alpha}.
class IncrementLaw {
public:
    // W = x_m U^{-1/alpha}, X = W - alpha x_m / (alpha - 1). Needs alpha > 2.
    static IncrementLaw shifted_pareto(double alpha, double x_m = 1.0);
    static IncrementLaw gaussian(double sigma0_sq);
    // Finite support; centred by subtracting the raw mean.
    static IncrementLaw truncated_discrete(std::vector<double> values, std::vector<double> probs);

    IncrementKind kind() const noexcept { return kind_; }
    std::optional<double> alpha() const noexcept { return alpha_; }
    std::optional<double> x_m() const noexcept { return x_m_; }
    std::optional<double> a() const noexcept { return a_; }
    double sigma0_sq() const noexcept { return sigma0_sq_; }
    double mean_shift() const noexcept { return mean_shift_; }
    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<double>& probs() const noexcept { return probs_; }

    // finite_moment when E (X^+)^{1+sigma} < inf, tail_index otherwise.
    MomentCondition moment_condition(double sigma) const;
    LimitConstants limit_constants(double sigma, double gamma) const;

    // P(X_1 >= x).
    double tail(double x) const;
    // E[X_1^t; 0 <= X_1 <= upper].
    double truncated_moment(double t, double upper) const;

    double sample(Philox& rng) const {
        switch (kind_) {
            case IncrementKind::shifted_pareto: return *x_m_ * std::pow(rng.uniform_pos(), -1.0 / *alpha_) - mean_shift_;
            case IncrementKind::gaussian: return std::sqrt(sigma0_sq_) * standard_normal(rng);
            case IncrementKind::truncated_discrete: return values_[alias_.sample(rng)] - mean_shift_;
        }
        return 0.0;
    }

    // S_k = X_1 + ... + X_k. Gaussian increments use S_k ~ Normal(0, k sigma0^2).
    double sample_sum(long long k, Philox& rng) const;

private:
    static double standard_normal(Philox& rng) {
        std::normal_distribution<double> normal;
        return normal(rng);
    }

    IncrementKind kind_ = IncrementKind::gaussian;
    std::optional<double> alpha_;
    std::optional<double> x_m_;
    std::optional<double> a_;
    double sigma0_sq_ = 1.0;
    double mean_shift_ = 0.0;
    std::vector<double> values_;
    std::vector<double> probs_;
    AliasTable alias_;
};

std::vector<double> sample_increments(const IncrementLaw& law, long count, std::uint64_t seed);

// Draws Z_n by the branching recursion with Z_0 = 0.
class BranchingSampler {
public:
    // Above this many parents geometric and Poisson offspring sums are drawn in
    // one shot (negative binomial / Poisson additivity).
    static constexpr long long kShortcutThreshold = 32;
    static constexpr long long kNormalApproxThreshold = 1'000'000;

    explicit BranchingSampler(const ModelParams& model, bool allow_normal_approx = false);

    long long sample(int n, Philox& rng) const;
    long long offspring_sum(long long parents, Philox& rng) const;
    long long immigrants(Philox& rng) const;

private:
    static long long poisson(double mean, Philox& rng);
    long long draw(const DistributionSpec& spec, const AliasTable& table, Philox& rng) const;

    ModelParams model_;
    bool allow_normal_approx_;
    AliasTable offspring_table_;
    AliasTable immigration_table_;
};

long long simulate_Zn_path(const ModelParams& model, int n, std::uint64_t seed);

struct MCEstimate {
    double probability = 0.0;
    double std_error = 0.0;
    long long paths = 0;
    std::uint64_t seed = 0;
    long long hits = 0;
};

struct ShardingOptions {
    int shards = 64;
    int threads = 0;  // 0: GWI_THREADS or hardware concurrency
};

// Worker count: GWI_THREADS if set, else hardware concurrency, capped by shards.
int worker_count(const ShardingOptions& opts);

// P(L_n >= eps) with L_n = S_{Z_n} / Z_n on {Z_n > 0}. Shards own independent
// RNG streams and hits are reduced in shard order, so the result depends only
// on (seed, shards).
MCEstimate estimate_large_deviation(const ModelParams& model, const IncrementLaw& law, int n, double eps,
                                    long long paths, std::uint64_t seed, const ShardingOptions& opts = {});

struct FukNagaevTerms {
    double big_jump = 0.0;        // k P(X_1 >= eps k / r)
    double moment_term = 0.0;     // (e r sigma0^2)^r eps^{-2r} k^{-r}
    double exp_term = 0.0;        // exp(-2 eps^2 k / ((t+2)^2 e^t sigma0^2))
    double truncated_term = 0.0;  // ((t+2) r^{t-1} E[X^t; 0<=X<=eps k] / (t eps^t k^{t-1}))^{t r/(t+2)}
    double bound_polynomial = 0.0;   // big_jump + moment_term
    double bound_exponential = 0.0;  // big_jump + exp_term + truncated_term
    double bound = 0.0;              // min of the two
};

FukNagaevTerms fuk_nagaev_terms(const IncrementLaw& law, long long k, double eps, double r, double t);
inline double fuk_nagaev_bound(const IncrementLaw& law, long long k, double eps, double r, double t) {
    return fuk_nagaev_terms(law, k, eps, r, t).bound;
}

// CSV "n,eps,paths,hits,p_hat,std_err,seed".
void write_estimate_csv(std::ostream& os, int n, double eps, const MCEstimate& est, bool with_header = true);

}  // namespace gwi
