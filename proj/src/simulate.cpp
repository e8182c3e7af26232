#include "gwi/simulate.hpp"

#include "gwi/errors.hpp"
#include "gwi/numerics.hpp"

#include <boost/random/poisson_distribution.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <iomanip>
#include <numeric>
#include <thread>

namespace gwi {

AliasTable::AliasTable(const std::vector<double>& weights) {
    const std::size_t m = weights.size();
    if (m == 0) throw InvalidArgument("alias table needs at least one outcome");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw InvalidArgument("alias table weights must have positive sum");
    prob_.assign(m, 0.0);
    alias_.assign(m, 0);
    std::vector<double> scaled(m);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < m; ++i) {
        if (weights[i] < 0.0) throw InvalidArgument("alias table weights must be >= 0");
        scaled[i] = weights[i] * static_cast<double>(m) / total;
        (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
        const std::size_t s = small.back();
        small.pop_back();
        const std::size_t l = large.back();
        prob_[s] = scaled[s];
        alias_[s] = static_cast<int>(l);
        scaled[l] -= 1.0 - scaled[s];
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (std::size_t i : large) prob_[i] = 1.0;
    for (std::size_t i : small) prob_[i] = 1.0;
}

std::string_view to_string(IncrementKind kind) {
    switch (kind) {
        case IncrementKind::shifted_pareto: return "shifted-pareto";
        case IncrementKind::truncated_discrete: return "truncated-discrete";
        case IncrementKind::gaussian: return "gaussian";
    }
    return "unknown";
}

IncrementLaw IncrementLaw::shifted_pareto(double alpha, double x_m) {
    if (!(alpha > 2.0)) throw InvalidArgument("shifted-pareto needs alpha > 2 for a finite variance");
    if (!(x_m > 0.0)) throw InvalidArgument("pareto scale x_m must be positive");
    IncrementLaw law;
    law.kind_ = IncrementKind::shifted_pareto;
    law.alpha_ = alpha;
    law.x_m_ = x_m;
    law.a_ = std::pow(x_m, alpha);
    law.mean_shift_ = alpha * x_m / (alpha - 1.0);
    law.sigma0_sq_ = alpha * x_m * x_m / ((alpha - 1.0) * (alpha - 1.0) * (alpha - 2.0));
    return law;
}

IncrementLaw IncrementLaw::gaussian(double sigma0_sq) {
    if (!(sigma0_sq > 0.0)) throw InvalidArgument("gaussian variance must be positive");
    IncrementLaw law;
    law.kind_ = IncrementKind::gaussian;
    law.sigma0_sq_ = sigma0_sq;
    return law;
}

IncrementLaw IncrementLaw::truncated_discrete(std::vector<double> values, std::vector<double> probs) {
    if (values.empty() || values.size() != probs.size())
        throw InvalidArgument("truncated-discrete needs matching, non-empty values and probs");
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("truncated-discrete probabilities must sum to 1");
    IncrementLaw law;
    law.kind_ = IncrementKind::truncated_discrete;
    double mean = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) mean += values[i] * probs[i];
    double var = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) var += (values[i] - mean) * (values[i] - mean) * probs[i];
    if (!(var > 0.0)) throw InvalidArgument("truncated-discrete law is degenerate");
    law.mean_shift_ = mean;
    law.sigma0_sq_ = var;
    law.alias_ = AliasTable(probs);
    law.values_ = std::move(values);
    law.probs_ = std::move(probs);
    return law;
}

MomentCondition IncrementLaw::moment_condition(double sigma) const {
    if (!alpha_ || *alpha_ > 1.0 + sigma + 1e-12) return MomentCondition::finite_moment;
    return MomentCondition::tail_index;
}

LimitConstants IncrementLaw::limit_constants(double sigma, double gamma) const {
    return LimitConstants::make(sigma, gamma, sigma0_sq_, alpha_, a_);
}

double IncrementLaw::tail(double x) const {
    switch (kind_) {
        case IncrementKind::shifted_pareto: {
            const double w = x + mean_shift_;
            return w <= *x_m_ ? 1.0 : std::pow(*x_m_ / w, *alpha_);
        }
        case IncrementKind::gaussian: return normal_tail(x / std::sqrt(sigma0_sq_));
        case IncrementKind::truncated_discrete: {
            double p = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i)
                if (values_[i] - mean_shift_ >= x) p += probs_[i];
            return p;
        }
    }
    return 0.0;
}

namespace {

// E[X^t; 0 <= X <= B] for the shifted Pareto with integer t, via
// x^t = sum_i C(t,i) (x+s)^i (-s)^{t-i}. Exact but cancels badly for B << s.
double pareto_truncated_moment_integer(int t, double alpha, double x_m, double shift, double B) {
    const double c = alpha * std::pow(x_m, alpha);
    double acc = 0.0;
    double binom = 1.0;
    for (int i = 0; i <= t; ++i) {
        if (i > 0) binom = binom * (t - i + 1) / i;
        const double e = i - alpha;
        const double piece = std::abs(e) < 1e-14 ? std::log((B + shift) / shift)
                                                 : (std::pow(B + shift, e) - std::pow(shift, e)) / e;
        acc += binom * std::pow(-shift, t - i) * piece;
    }
    return c * acc;
}

}  // namespace

double IncrementLaw::truncated_moment(double t, double upper) const {
    if (!(upper > 0.0)) return 0.0;
    switch (kind_) {
        case IncrementKind::shifted_pareto: {
            const double alpha = *alpha_;
            const double x_m = *x_m_;
            const double s = mean_shift_;
            // X >= 0 iff W >= s, and s > x_m, so the density is alpha x_m^alpha (x+s)^{-alpha-1} on [0, upper].
            const double ti = std::round(t);
            if (std::abs(t - ti) < 1e-12 && upper >= s) return pareto_truncated_moment_integer(int(ti), alpha, x_m, s, upper);
            auto density_moment = [&](double x) {
                return std::pow(x, t) * alpha * std::pow(x_m, alpha) * std::pow(x + s, -alpha - 1.0);
            };
            return integrate(density_moment, 0.0, upper, 1e-12).value;
        }
        case IncrementKind::gaussian: {
            const double sd = std::sqrt(sigma0_sq_);
            auto density_moment = [&](double x) {
                const double z = x / sd;
                return std::pow(x, t) * std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
            };
            return integrate(density_moment, 0.0, std::min(upper, 40.0 * sd), 1e-12).value;
        }
        case IncrementKind::truncated_discrete: {
            double acc = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) {
                const double x = values_[i] - mean_shift_;
                if (x >= 0.0 && x <= upper) acc += std::pow(x, t) * probs_[i];
            }
            return acc;
        }
    }
    return 0.0;
}

double IncrementLaw::sample_sum(long long k, Philox& rng) const {
    if (k <= 0) return 0.0;
    if (kind_ == IncrementKind::gaussian) return std::sqrt(static_cast<double>(k) * sigma0_sq_) * standard_normal(rng);
    double s = 0.0;
    for (long long i = 0; i < k; ++i) s += sample(rng);
    return s;
}

std::vector<double> sample_increments(const IncrementLaw& law, long count, std::uint64_t seed) {
    if (count < 1) throw InvalidArgument("count must be >= 1");
    Philox rng(seed);
    std::vector<double> out(static_cast<std::size_t>(count));
    for (auto& v : out) v = law.sample(rng);
    return out;
}

namespace {

AliasTable table_for(const DistributionSpec& spec) {
    if (spec.kind() != DistributionKind::explicit_pmf) return {};
    return AliasTable(std::vector<double>(spec.pmf().data(), spec.pmf().data() + spec.pmf().size()));
}

}  // namespace

BranchingSampler::BranchingSampler(const ModelParams& model, bool allow_normal_approx)
    : model_(model),
      allow_normal_approx_(allow_normal_approx),
      offspring_table_(table_for(model.offspring)),
      immigration_table_(table_for(model.immigration)) {}

// boost's PTRS sampler: its setup is cheap, which matters because the mean
// changes on every call.
long long BranchingSampler::poisson(double mean, Philox& rng) {
    if (!(mean > 0.0)) return 0;
    boost::random::poisson_distribution<long long, double> poi(mean);
    return poi(rng);
}

long long BranchingSampler::draw(const DistributionSpec& spec, const AliasTable& table, Philox& rng) const {
    switch (spec.kind()) {
        case DistributionKind::geometric: {
            std::geometric_distribution<long long> geo(spec.param());
            return geo(rng);
        }
        case DistributionKind::poisson: return poisson(spec.param(), rng);
        case DistributionKind::explicit_pmf: return table.sample(rng);
    }
    return 0;
}

long long BranchingSampler::offspring_sum(long long parents, Philox& rng) const {
    if (parents <= 0) return 0;
    const DistributionSpec& f = model_.offspring;
    switch (f.kind()) {
        case DistributionKind::geometric:
            if (parents > kShortcutThreshold) {
                // Sum of k geometric(q) failure counts is negative binomial(k, q),
                // drawn as a Poisson mixture over Gamma(k, (1-q)/q).
                const double q = f.param();
                std::gamma_distribution<double> mix(static_cast<double>(parents), (1.0 - q) / q);
                return poisson(mix(rng), rng);
            }
            break;
        case DistributionKind::poisson: return poisson(static_cast<double>(parents) * f.param(), rng);
        case DistributionKind::explicit_pmf:
            if (allow_normal_approx_ && parents > kNormalApproxThreshold) {
                const double k = static_cast<double>(parents);
                std::normal_distribution<double> normal(k * f.mean(), std::sqrt(k * f.variance()));
                return std::max<long long>(0, std::llround(normal(rng)));
            }
            break;
    }
    long long total = 0;
    for (long long i = 0; i < parents; ++i) total += draw(f, offspring_table_, rng);
    return total;
}

long long BranchingSampler::immigrants(Philox& rng) const { return draw(model_.immigration, immigration_table_, rng); }

long long BranchingSampler::sample(int n, Philox& rng) const {
    if (n < 0) throw InvalidArgument("n must be >= 0");
    long long z = 0;
    for (int gen = 0; gen < n; ++gen) z = offspring_sum(z, rng) + immigrants(rng);
    return z;
}

long long simulate_Zn_path(const ModelParams& model, int n, std::uint64_t seed) {
    Philox rng(seed);
    return BranchingSampler(model).sample(n, rng);
}

int worker_count(const ShardingOptions& opts) {
    int threads = opts.threads;
    if (threads <= 0) {
        if (const char* env = std::getenv("GWI_THREADS"); env != nullptr && std::atoi(env) > 0)
            threads = std::atoi(env);
        else
            threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    return std::clamp(threads, 1, std::max(1, opts.shards));
}

MCEstimate estimate_large_deviation(const ModelParams& model, const IncrementLaw& law, int n, double eps,
                                    long long paths, std::uint64_t seed, const ShardingOptions& opts) {
    if (paths < 1000) throw InvalidArgument("estimate_large_deviation needs at least 1000 paths");
    if (opts.shards < 1) throw InvalidArgument("shards must be >= 1");
    const BranchingSampler sampler(model);
    const int shards = opts.shards;
    std::vector<long long> hits(shards, 0);

    auto run_shard = [&](int s) {
        const long long count = paths / shards + (s < paths % shards ? 1 : 0);
        Philox rng(shard_seed(seed, static_cast<std::uint64_t>(s)));
        long long h = 0;
        for (long long p = 0; p < count; ++p) {
            const long long z = sampler.sample(n, rng);
            if (z <= 0) continue;
            if (law.sample_sum(z, rng) >= eps * static_cast<double>(z)) ++h;
        }
        hits[s] = h;
    };

    const int workers = worker_count(opts);
    if (workers == 1) {
        for (int s = 0; s < shards; ++s) run_shard(s);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int s = next++; s < shards; s = next++) run_shard(s);
            });
        for (auto& t : pool) t.join();
    }

    MCEstimate est;
    est.paths = paths;
    est.seed = seed;
    for (long long h : hits) est.hits += h;
    est.probability = static_cast<double>(est.hits) / static_cast<double>(paths);
    est.std_error = std::sqrt(est.probability * (1.0 - est.probability) / static_cast<double>(paths));
    return est;
}

FukNagaevTerms fuk_nagaev_terms(const IncrementLaw& law, long long k, double eps, double r, double t) {
    if (k < 1) throw InvalidArgument("k must be >= 1");
    if (!(r > 1.0)) throw InvalidArgument("r must exceed 1");
    if (!(t >= 2.0)) throw InvalidArgument("t must be >= 2");
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    const double dk = static_cast<double>(k);
    const double s2 = law.sigma0_sq();
    const double e = std::numbers::e;
    FukNagaevTerms out;
    out.big_jump = dk * law.tail(eps * dk / r);
    out.moment_term = std::pow(e * r * s2, r) * std::pow(eps, -2.0 * r) * std::pow(dk, -r);
    out.exp_term = std::exp(-2.0 / ((t + 2.0) * (t + 2.0) * std::exp(t) * s2) * eps * eps * dk);
    const double trunc = law.truncated_moment(t, eps * dk);
    const double base = (t + 2.0) * std::pow(r, t - 1.0) * trunc / (t * std::pow(eps, t) * std::pow(dk, t - 1.0));
    out.truncated_term = std::pow(base, t * r / (t + 2.0));
    out.bound_polynomial = out.big_jump + out.moment_term;
    out.bound_exponential = out.big_jump + out.exp_term + out.truncated_term;
    out.bound = std::min(out.bound_polynomial, out.bound_exponential);
    return out;
}

void write_estimate_csv(std::ostream& os, int n, double eps, const MCEstimate& est, bool with_header) {
    const auto old_precision = os.precision(17);
    if (with_header) os << "n,eps,paths,hits,p_hat,std_err,seed\n";
    os << n << ',' << eps << ',' << est.paths << ',' << est.hits << ',' << est.probability << ',' << est.std_error
       << ',' << est.seed << '\n';
    os.precision(old_precision);
}

}  // namespace gwi
