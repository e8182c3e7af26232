#include "gwi/series.hpp"

#include <iomanip>

namespace gwi {

Series apply_pgf(const DistributionSpec& spec, const Series& inner) {
    const int K = inner.order();
    switch (spec.kind()) {
        case DistributionKind::geometric: {
            const double q = spec.param();
            Series denom(K);
            denom.coeffs() = -(1.0 - q) * inner.coeffs();
            denom[0] += 1.0;
            Series out = reciprocal(denom);
            out.coeffs() *= q;
            return out;
        }
        case DistributionKind::poisson: {
            const double rate = spec.param();
            Series arg(K);
            arg.coeffs() = rate * inner.coeffs();
            arg[0] -= rate;
            return exp(arg);
        }
        case DistributionKind::explicit_pmf: {
            // Full Horner over the finite pmf: degrees beyond K still feed the
            // low coefficients when inner has a constant term.
            const Eigen::VectorXd& pmf = spec.pmf();
            Series acc = Series::constant(K, pmf[pmf.size() - 1]);
            for (Eigen::Index j = pmf.size() - 2; j >= 0; --j) {
                acc = multiply(acc, inner);
                acc[0] += pmf[j];
            }
            return acc;
        }
    }
    return inner;
}

void clamp_probabilities(Series& s) {
    for (int j = 0; j <= s.order(); ++j) {
        if (s[j] < 0.0) {
            if (s[j] < -kRoundoffFloor)
                throw NegativeCoefficient("coefficient " + std::to_string(j) + " = " + std::to_string(s[j]));
            s[j] = 0.0;
        }
    }
}

IterationTrace iterate_pgf(const ModelParams& model, int n, int K) {
    if (n < 0) throw InvalidArgument("n must be >= 0");
    if (K < 1) throw InvalidArgument("K must be >= 1");
    IterationTrace trace;
    trace.n = n;
    trace.f_at_zero.reserve(n + 1);
    Series f = Series::identity(K);
    Series H = Series::constant(K, 1.0);
    trace.f_at_zero.push_back(0.0);
    for (int k = 0; k < n; ++k) {
        H = multiply(H, apply_pgf(model.immigration, f));
        f = apply_pgf(model.offspring, f);
        clamp_probabilities(f);
        trace.f_at_zero.push_back(f[0]);
    }
    clamp_probabilities(H);
    trace.f_n = std::move(f);
    trace.H_n = std::move(H);
    return trace;
}

Series iterate_offspring(const DistributionSpec& offspring, int n, int K) {
    if (n < 0) throw InvalidArgument("n must be >= 0");
    Series f = Series::identity(K);
    for (int k = 0; k < n; ++k) {
        f = apply_pgf(offspring, f);
        clamp_probabilities(f);
    }
    return f;
}

double linear_fractional_oracle(double gamma, int n, double s) {
    const double y = 1.0 - s;
    return 1.0 - y / (1.0 + gamma * n * y);
}

void write_series_csv(std::ostream& os, const Series& s, int n) {
    const auto old_precision = os.precision(17);
    os << "# n=" << n << ",K=" << s.order() << ",tail_mass=" << s.tail_mass() << '\n';
    os << "j,coeff\n";
    for (int j = 0; j <= s.order(); ++j) os << j << ',' << s[j] << '\n';
    os.precision(old_precision);
}

}  // namespace gwi
