#pragma once

#include "gwi/errors.hpp"
#include "gwi/model.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>
#include <type_traits>
#include <vector>

namespace gwi {

// Power series c_0 + c_1 x + ... + c_K x^K. All arithmetic is modulo x^{K+1},
// so coefficients 0..K of every result are exact (up to round-off) regardless
// of what was discarded beyond K.
template <typename Scalar = double>
class TruncatedSeries {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    TruncatedSeries() : c_(Vector::Zero(1)) {}
    explicit TruncatedSeries(int K) : c_(Vector::Zero(K + 1)) {
        if (K < 0) throw InvalidArgument("truncation order must be >= 0");
    }
    explicit TruncatedSeries(Vector coeffs) : c_(std::move(coeffs)) {
        if (c_.size() == 0) throw InvalidArgument("series needs at least one coefficient");
    }

    static TruncatedSeries constant(int K, Scalar value) {
        TruncatedSeries s(K);
        s.c_[0] = value;
        return s;
    }
    static TruncatedSeries identity(int K) {
        TruncatedSeries s(K);
        if (K >= 1) s.c_[1] = Scalar(1);
        return s;
    }

    int order() const noexcept { return static_cast<int>(c_.size()) - 1; }
    const Vector& coeffs() const noexcept { return c_; }
    Vector& coeffs() noexcept { return c_; }
    Scalar operator[](int j) const { return c_[j]; }
    Scalar& operator[](int j) { return c_[j]; }

    // Index of the last nonzero coefficient (0 for the zero series).
    int degree() const noexcept {
        for (int j = order(); j > 0; --j)
            if (c_[j] != Scalar(0)) return j;
        return 0;
    }

    Scalar sum() const { return c_.sum(); }

    // 1 - sum of coefficients, floored at 0. Meaningful for (sub-)pgfs.
    double tail_mass() const {
        static_assert(std::is_floating_point_v<Scalar>);
        return std::max(0.0, 1.0 - static_cast<double>(c_.sum()));
    }

private:
    Vector c_;
};

using Series = TruncatedSeries<double>;

inline constexpr double kOverflowMagnitude = 1e6;
inline constexpr double kRoundoffFloor = 1e-12;

namespace detail {

template <typename Scalar>
void require_same_order(const TruncatedSeries<Scalar>& a, const TruncatedSeries<Scalar>& b) {
    if (a.order() != b.order()) throw InvalidArgument("series truncation orders differ");
}

template <typename Scalar>
void check_overflow(const TruncatedSeries<Scalar>& s) {
    for (int j = 0; j <= s.order(); ++j)
        if (!(std::abs(s[j]) <= kOverflowMagnitude))
            throw TruncationOverflow("coefficient " + std::to_string(j) +
                                     " exceeds magnitude 1e6");
}

}  // namespace detail

template <typename Scalar>
TruncatedSeries<Scalar> multiply(const TruncatedSeries<Scalar>& a, const TruncatedSeries<Scalar>& b) {
    detail::require_same_order(a, b);
    const int K = a.order();
    const int da = a.degree();
    const int db = b.degree();
    TruncatedSeries<Scalar> out(K);
    for (int i = 0; i <= da; ++i) {
        const Scalar ai = a[i];
        if (ai == Scalar(0)) continue;
        const int jmax = std::min(db, K - i);
        for (int j = 0; j <= jmax; ++j) out[i + j] += ai * b[j];
    }
    return out;
}

// 1 / s, requires s_0 != 0.
template <typename Scalar>
TruncatedSeries<Scalar> reciprocal(const TruncatedSeries<Scalar>& s) {
    if (s[0] == Scalar(0)) throw InvalidArgument("reciprocal of a series with zero constant term");
    const int K = s.order();
    const int ds = s.degree();
    TruncatedSeries<Scalar> out(K);
    const Scalar inv0 = Scalar(1) / s[0];
    out[0] = inv0;
    for (int j = 1; j <= K; ++j) {
        Scalar acc(0);
        const int imax = std::min(j, ds);
        for (int i = 1; i <= imax; ++i) acc += s[i] * out[j - i];
        out[j] = -acc * inv0;
    }
    return out;
}

// exp(s) via j e_j = sum_i i s_i e_{j-i}.
template <typename Scalar>
TruncatedSeries<Scalar> exp(const TruncatedSeries<Scalar>& s) {
    const int K = s.order();
    const int ds = s.degree();
    TruncatedSeries<Scalar> out(K);
    out[0] = std::exp(s[0]);
    for (int j = 1; j <= K; ++j) {
        Scalar acc(0);
        const int imax = std::min(j, ds);
        for (int i = 1; i <= imax; ++i) acc += Scalar(i) * s[i] * out[j - i];
        out[j] = acc / Scalar(j);
    }
    return out;
}

// Horner evaluation sum c_j x^j.
template <typename Scalar, typename Arg>
auto evaluate(const TruncatedSeries<Scalar>& s, Arg x) {
    using R = std::common_type_t<Scalar, Arg>;
    R acc(0);
    for (int j = s.order(); j >= 0; --j) acc = acc * x + R(s[j]);
    return acc;
}

// outer(inner(x)) by Horner over series arithmetic. Cost is O(deg(outer) K^2).
// Exact through order K only when inner[0] == 0; otherwise the coefficients of
// outer beyond K are missing from the result. apply_pgf avoids both issues for
// named families.
template <typename Scalar>
TruncatedSeries<Scalar> compose(const TruncatedSeries<Scalar>& outer,
                                const TruncatedSeries<Scalar>& inner) {
    detail::require_same_order(outer, inner);
    if constexpr (std::is_floating_point_v<Scalar>) {
        if (!(inner[0] >= 0 && inner[0] < 1))
            throw InvalidArgument("inner constant term must lie in [0, 1)");
    } else {
        if (!(std::abs(inner[0]) < 1))
            throw InvalidArgument("inner constant term must lie inside the unit disc");
    }
    const int K = outer.order();
    TruncatedSeries<Scalar> acc = TruncatedSeries<Scalar>::constant(K, outer[outer.degree()]);
    for (int j = outer.degree() - 1; j >= 0; --j) {
        acc = multiply(acc, inner);
        acc[0] += outer[j];
        detail::check_overflow(acc);
    }
    detail::check_overflow(acc);
    return acc;
}

// spec.pgf applied to a series argument, using the family's closed form.
// Geometric: q / (1 - (1-q) g); Poisson: exp(lambda (g - 1)); explicit: Horner.
Series apply_pgf(const DistributionSpec& spec, const Series& inner);

// Floors round-off negatives at zero; throws NegativeCoefficient below -1e-12.
void clamp_probabilities(Series& s);

struct IterationTrace {
    int n = 0;
    std::vector<double> f_at_zero;  // f_k(0), k = 0..n
    Series f_n;                     // n-th iterate of the offspring pgf
    Series H_n;                     // generating function of Z_n
};

// f_k by repeated composition and H_n = prod_{k<n} h(f_k) by running product.
IterationTrace iterate_pgf(const ModelParams& model, int n, int K);

// n-th iterate of a single pgf as a series of order K.
Series iterate_offspring(const DistributionSpec& offspring, int n, int K);

// Closed form of the n-th iterate of the critical linear-fractional pgf with
// 1 - f(s) = (1-s) / (1 + gamma (1-s)); gamma = 1 is the geometric(1/2) law.
double linear_fractional_oracle(double gamma, int n, double s);

// CSV rows "j,coeff" preceded by a comment header carrying n, K and tail_mass.
void write_series_csv(std::ostream& os, const Series& s, int n);

}  // namespace gwi
