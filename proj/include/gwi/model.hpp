#pragma once

#include <Eigen/Core>

#include <string>
#include <string_view>

namespace gwi {

template <typename Scalar>
class TruncatedSeries;

enum class DistributionKind { explicit_pmf, geometric, poisson };

std::string_view to_string(DistributionKind kind);
DistributionKind distribution_kind_from_string(std::string_view name);

// A law on the non-negative integers: either an explicit finite pmf or a named
// family. Geometric is parameterised by its success probability q, with
// P(k) = q (1-q)^k; Poisson by its rate.
class DistributionSpec {
public:
    static DistributionSpec explicit_pmf(Eigen::VectorXd pmf);
    static DistributionSpec geometric(double success);
    static DistributionSpec poisson(double rate);

    DistributionKind kind() const noexcept { return kind_; }
    double param() const noexcept { return param_; }
    const Eigen::VectorXd& pmf() const noexcept { return pmf_; }

    // Default order used when a named family is expanded to coefficients.
    int pmf_truncation() const noexcept { return pmf_truncation_; }
    DistributionSpec& set_pmf_truncation(int k);

    double mean() const;
    // f''(1), the second factorial moment.
    double factorial_moment2() const;
    double variance() const { return factorial_moment2() + mean() - mean() * mean(); }
    double prob(int k) const;

    // Highest index with positive mass; -1 for named families (infinite support).
    int support_max() const noexcept;

    // Generating function f(s) for s in [0, 1].
    double pgf(double s) const;
    // f(a) - f(b) for 0 <= b <= a <= 1, given d = a - b computed elsewhere.
    // Evaluated without forming the difference of two nearly equal values.
    double pgf_diff(double a, double b, double d) const;

private:
    DistributionSpec(DistributionKind kind, double param, Eigen::VectorXd pmf);

    DistributionKind kind_;
    double param_ = 0.0;
    Eigen::VectorXd pmf_;
    int pmf_truncation_ = 1024;
};

// Validated critical model. Constructed only through validate_condition_A.
struct ModelParams {
    DistributionSpec offspring;
    DistributionSpec immigration;
    double m;      // offspring mean
    double beta;   // immigration mean h'(1)
    double gamma;  // f''(1) / 2
    double sigma;  // beta / gamma
};

inline constexpr double kCriticalityTolerance = 1e-10;

ModelParams validate_condition_A(const DistributionSpec& offspring,
                                 const DistributionSpec& immigration);

// Coefficients P(law = j) for j <= K. tail_mass() on the result gives the
// probability beyond K.
TruncatedSeries<double> pgf_coefficients(const DistributionSpec& spec, int K);

}  // namespace gwi
