#include "gwi/model.hpp"

#include "gwi/errors.hpp"
#include "gwi/series.hpp"

#include <cmath>
#include <numeric>

namespace gwi {

std::string_view to_string(DistributionKind kind) {
    switch (kind) {
        case DistributionKind::explicit_pmf: return "explicit";
        case DistributionKind::geometric: return "geometric";
        case DistributionKind::poisson: return "poisson";
    }
    return "unknown";
}

DistributionKind distribution_kind_from_string(std::string_view name) {
    if (name == "explicit") return DistributionKind::explicit_pmf;
    if (name == "geometric") return DistributionKind::geometric;
    if (name == "poisson") return DistributionKind::poisson;
    throw InvalidDistribution("unknown distribution kind '" + std::string(name) + "'");
}

DistributionSpec::DistributionSpec(DistributionKind kind, double param, Eigen::VectorXd pmf)
    : kind_(kind), param_(param), pmf_(std::move(pmf)) {}

DistributionSpec DistributionSpec::explicit_pmf(Eigen::VectorXd pmf) {
    if (pmf.size() == 0) throw InvalidDistribution("explicit pmf is empty");
    for (Eigen::Index j = 0; j < pmf.size(); ++j)
        if (!(pmf[j] >= 0.0) || !std::isfinite(pmf[j]))
            throw InvalidDistribution("pmf coefficient " + std::to_string(j) + " is negative or not finite");
    if (std::abs(pmf.sum() - 1.0) > 1e-12)
        throw InvalidDistribution("pmf sums to " + std::to_string(pmf.sum()) + ", expected 1");
    return DistributionSpec(DistributionKind::explicit_pmf, 0.0, std::move(pmf));
}

DistributionSpec DistributionSpec::geometric(double success) {
    if (!(success > 0.0 && success <= 1.0))
        throw InvalidDistribution("geometric success probability must lie in (0, 1]");
    return DistributionSpec(DistributionKind::geometric, success, {});
}

DistributionSpec DistributionSpec::poisson(double rate) {
    if (!(rate >= 0.0) || !std::isfinite(rate))
        throw InvalidDistribution("poisson rate must be finite and >= 0");
    return DistributionSpec(DistributionKind::poisson, rate, {});
}

DistributionSpec& DistributionSpec::set_pmf_truncation(int k) {
    if (k < 0) throw InvalidDistribution("pmf_truncation must be >= 0");
    pmf_truncation_ = k;
    return *this;
}

double DistributionSpec::mean() const {
    switch (kind_) {
        case DistributionKind::geometric: return (1.0 - param_) / param_;
        case DistributionKind::poisson: return param_;
        case DistributionKind::explicit_pmf: {
            double m = 0.0;
            for (Eigen::Index j = 1; j < pmf_.size(); ++j) m += static_cast<double>(j) * pmf_[j];
            return m;
        }
    }
    return 0.0;
}

double DistributionSpec::factorial_moment2() const {
    switch (kind_) {
        case DistributionKind::geometric: {
            const double r = (1.0 - param_) / param_;
            return 2.0 * r * r;
        }
        case DistributionKind::poisson: return param_ * param_;
        case DistributionKind::explicit_pmf: {
            double m = 0.0;
            for (Eigen::Index j = 2; j < pmf_.size(); ++j)
                m += static_cast<double>(j) * static_cast<double>(j - 1) * pmf_[j];
            return m;
        }
    }
    return 0.0;
}

double DistributionSpec::prob(int k) const {
    if (k < 0) return 0.0;
    switch (kind_) {
        case DistributionKind::geometric: return param_ * std::pow(1.0 - param_, k);
        case DistributionKind::poisson:
            if (param_ == 0.0) return k == 0 ? 1.0 : 0.0;
            return std::exp(-param_ + k * std::log(param_) - std::lgamma(k + 1.0));
        case DistributionKind::explicit_pmf: return k < pmf_.size() ? pmf_[k] : 0.0;
    }
    return 0.0;
}

int DistributionSpec::support_max() const noexcept {
    if (kind_ != DistributionKind::explicit_pmf) return -1;
    for (Eigen::Index j = pmf_.size() - 1; j > 0; --j)
        if (pmf_[j] > 0.0) return static_cast<int>(j);
    return 0;
}

double DistributionSpec::pgf(double s) const {
    switch (kind_) {
        case DistributionKind::geometric: return param_ / (1.0 - (1.0 - param_) * s);
        case DistributionKind::poisson: return std::exp(param_ * (s - 1.0));
        case DistributionKind::explicit_pmf: {
            double acc = 0.0;
            for (Eigen::Index j = pmf_.size() - 1; j >= 0; --j) acc = acc * s + pmf_[j];
            return acc;
        }
    }
    return 0.0;
}

double DistributionSpec::pgf_diff(double a, double b, double d) const {
    switch (kind_) {
        case DistributionKind::geometric: {
            const double p = 1.0 - param_;
            return param_ * p * d / ((1.0 - p * a) * (1.0 - p * b));
        }
        case DistributionKind::poisson:
            return std::exp(param_ * (b - 1.0)) * std::expm1(param_ * d);
        case DistributionKind::explicit_pmf: {
            // a^j - b^j = a (a^{j-1} - b^{j-1}) + b^{j-1} d, every term >= 0.
            double diff = 0.0;
            double e = 0.0;
            double bpow = 1.0;
            for (Eigen::Index j = 1; j < pmf_.size(); ++j) {
                e = a * e + bpow * d;
                bpow *= b;
                diff += pmf_[j] * e;
            }
            return diff;
        }
    }
    return 0.0;
}

namespace {

int support_gcd(const DistributionSpec& spec) {
    if (spec.kind() != DistributionKind::explicit_pmf) {
        // Named families put mass on 1 whenever they are non-degenerate.
        return spec.prob(1) > 0.0 ? 1 : 0;
    }
    int g = 0;
    for (Eigen::Index j = 1; j < spec.pmf().size(); ++j)
        if (spec.pmf()[j] > 0.0) g = std::gcd(g, static_cast<int>(j));
    return g;
}

}  // namespace

ModelParams validate_condition_A(const DistributionSpec& offspring, const DistributionSpec& immigration) {
    const double m = offspring.mean();
    if (!(std::abs(m - 1.0) <= kCriticalityTolerance))
        throw CriticalityViolation("offspring mean is " + std::to_string(m) + ", expected 1");

    const double p0 = offspring.prob(0);
    const double h0 = immigration.prob(0);
    if (!(p0 > 0.0 && p0 < 1.0)) throw DegenerateLaw("offspring p0 must lie in (0, 1)");
    if (!(h0 > 0.0 && h0 < 1.0)) throw DegenerateLaw("immigration h0 must lie in (0, 1)");

    const double gamma = 0.5 * offspring.factorial_moment2();
    const double beta = immigration.mean();
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DegenerateLaw("gamma = f''(1)/2 must be positive and finite");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DegenerateLaw("beta = h'(1) must be positive and finite");

    if (support_gcd(offspring) != 1)
        throw PeriodicSupport("gcd of the offspring support is " + std::to_string(support_gcd(offspring)));

    // Log-moment conditions: finite support makes both sums finite; geometric
    // and Poisson have all moments.
    if (offspring.kind() == DistributionKind::explicit_pmf) {
        double s = 0.0;
        for (Eigen::Index j = 2; j < offspring.pmf().size(); ++j)
            s += offspring.pmf()[j] * double(j) * double(j) * std::log(double(j));
        if (!std::isfinite(s)) throw DegenerateLaw("sum p_j j^2 log j is not finite");
    }
    if (immigration.kind() == DistributionKind::explicit_pmf) {
        double s = 0.0;
        for (Eigen::Index j = 1; j < immigration.pmf().size(); ++j)
            s += immigration.pmf()[j] * double(j) * double(j);
        if (!std::isfinite(s)) throw DegenerateLaw("sum h_j j^2 is not finite");
    }

    return ModelParams{offspring, immigration, m, beta, gamma, beta / gamma};
}

Series pgf_coefficients(const DistributionSpec& spec, int K) {
    if (K < 0) throw InvalidArgument("K must be >= 0");
    Series s(K);
    for (int j = 0; j <= K; ++j) s[j] = spec.prob(j);
    return s;
}

}  // namespace gwi
