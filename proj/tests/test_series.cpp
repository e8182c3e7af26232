#include "gwi/series.hpp"
#include "test_models.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <sstream>

using namespace gwi;

TEST_CASE("compose examples") {
    const int K = 8;
    Series s(K);
    for (int j = 0; j <= K; ++j) s[j] = 0.1 / (j + 1);
    const Series id = Series::identity(K);
    CHECK((compose(id, s).coeffs() - s.coeffs()).cwiseAbs().maxCoeff() == 0.0);

    const Series f2 = pgf_coefficients(DistributionSpec::geometric(0.5), 2);
    const Series fx = compose(f2, Series::identity(2));
    CHECK(fx[0] == 0.5);
    CHECK(fx[1] == 0.25);
    CHECK(fx[2] == 0.125);

    // f(f(0)) = 2/3. Composing the order-64 expansion with itself loses only
    // the truncated tail of f.
    const Series f = pgf_coefficients(DistributionSpec::geometric(0.5), 64);
    CHECK(compose(f, f)[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(apply_pgf(DistributionSpec::geometric(0.5), f)[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("compose rejects bad input") {
    Series inner = Series::constant(4, 1.0);
    CHECK_THROWS_AS(compose(Series::identity(4), inner), InvalidArgument);
    CHECK_THROWS_AS(compose(Series::identity(4), Series::identity(5)), InvalidArgument);
    Series big(4);
    big[4] = 1e7;
    Series x = Series::identity(4);
    x[0] = 0.5;
    CHECK_THROWS_AS(compose(big, x), TruncationOverflow);
}

TEST_CASE("series arithmetic") {
    const int K = 10;
    const Series f = pgf_coefficients(DistributionSpec::geometric(0.5), K);
    // (1 - x/2) * f = 1/2 exactly.
    Series g = Series::constant(K, 1.0);
    g[1] = -0.5;
    const Series prod = multiply(g, f);
    CHECK(prod[0] == 0.5);
    for (int j = 1; j <= K; ++j) CHECK(prod[j] == doctest::Approx(0.0));
    const Series inv = reciprocal(g);
    for (int j = 0; j <= K; ++j) CHECK(inv[j] == doctest::Approx(std::pow(0.5, j)));
    // exp(x) = sum x^j / j!.
    const Series e = exp(Series::identity(K));
    double fact = 1.0;
    for (int j = 0; j <= K; ++j) {
        if (j > 0) fact *= j;
        CHECK(e[j] == doctest::Approx(1.0 / fact).epsilon(1e-14));
    }
    CHECK_THROWS_AS(reciprocal(Series::identity(K)), InvalidArgument);
}

TEST_CASE("scalar template: long double and complex") {
    TruncatedSeries<long double> a = TruncatedSeries<long double>::constant(3, 1.0L);
    a[1] = -0.5L;
    const auto inv = reciprocal(a);
    CHECK(static_cast<double>(inv[3]) == doctest::Approx(0.125));
    TruncatedSeries<std::complex<double>> z = TruncatedSeries<std::complex<double>>::identity(4);
    const auto ez = exp(z);
    CHECK(std::abs(evaluate(ez, std::complex<double>(0.0, 0.1)) - std::exp(std::complex<double>(0.0, 0.1))) < 1e-7);
}

TEST_CASE("iterate_pgf examples") {
    const ModelParams model = test::geometric_model();
    const IterationTrace t0 = iterate_pgf(model, 0, 16);
    CHECK(t0.H_n[0] == 1.0);
    for (int j = 1; j <= 16; ++j) CHECK(t0.H_n[j] == 0.0);

    const IterationTrace t1 = iterate_pgf(model, 1, 16);
    for (int k = 0; k <= 16; ++k) CHECK(t1.H_n[k] == doctest::Approx(std::pow(2.0 / 3.0, k) / 3.0).epsilon(1e-14));

    const IterationTrace t2 = iterate_pgf(model, 2, 16);
    CHECK(t2.H_n[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("linear fractional oracle") {
    CHECK(linear_fractional_oracle(1.0, 2, 0.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(linear_fractional_oracle(1.0, 99, 0.0) == doctest::Approx(0.99).epsilon(1e-15));
    for (double g : {0.5, 1.0, 3.0}) CHECK(linear_fractional_oracle(g, 0, 0.37) == 0.37);

    // f_k as a series against the closed form, k <= 50.
    const auto offspring = DistributionSpec::geometric(0.5);
    Series fk = Series::identity(200);
    for (int k = 1; k <= 50; ++k) {
        fk = apply_pgf(offspring, fk);
        for (double s : {0.0, 0.3, 0.7})
            CHECK(std::abs(evaluate(fk, s) - linear_fractional_oracle(1.0, k, s)) <= 1e-9);
    }
}

TEST_CASE("evaluate examples") {
    Series s(20);
    for (int j = 0; j <= 20; ++j) s[j] = std::pow(0.5, j + 1);
    CHECK(evaluate(s, 1.0) == doctest::Approx(1.0 - std::pow(2.0, -21)).epsilon(1e-15));
    CHECK(evaluate(s, 0.0) == s[0]);
    const IterationTrace t1 = iterate_pgf(test::geometric_model(), 1, 256);
    CHECK(evaluate(t1.H_n, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("iteration properties") {
    for (const ModelParams& model : {test::geometric_model(), test::explicit_model()}) {
        const IterationTrace t = iterate_pgf(model, 200, 64);
        for (std::size_t k = 1; k < t.f_at_zero.size(); ++k) {
            CHECK(t.f_at_zero[k] >= t.f_at_zero[k - 1]);
            CHECK(t.f_at_zero[k] < 1.0);
        }
        // k gamma (1 - f_k(0)) -> 1, monotone over [10, 200].
        double previous = INFINITY;
        for (int k = 10; k <= 200; ++k) {
            const double gap = std::abs(k * model.gamma * (1.0 - t.f_at_zero[k]) - 1.0);
            CHECK(gap <= previous);
            previous = gap;
        }
        CHECK(previous < 0.05);
        for (int j = 0; j <= 64; ++j) {
            CHECK(t.H_n[j] >= 0.0);
            CHECK(t.H_n[j] <= 1.0);
        }
    }
}

TEST_CASE("H_n is nonincreasing in n") {
    const ModelParams model = test::explicit_model();
    Series previous = iterate_pgf(model, 1, 128).H_n;
    for (int n = 2; n <= 20; ++n) {
        const Series H = iterate_pgf(model, n, 128).H_n;
        for (double x : {0.0, 0.25, 0.5, 0.9}) CHECK(evaluate(H, x) <= evaluate(previous, x) + 1e-15);
        previous = H;
    }
}

TEST_CASE("clamp_probabilities") {
    Series s(3);
    s[0] = 0.5;
    s[1] = -1e-14;
    clamp_probabilities(s);
    CHECK(s[1] == 0.0);
    s[2] = -1e-9;
    CHECK_THROWS_AS(clamp_probabilities(s), NegativeCoefficient);
}

TEST_CASE("series csv") {
    std::ostringstream os;
    write_series_csv(os, pgf_coefficients(DistributionSpec::geometric(0.5), 2), 1);
    const std::string out = os.str();
    CHECK(out.find("n=1") != std::string::npos);
    CHECK(out.find("K=2") != std::string::npos);
    CHECK(out.find("tail_mass=") != std::string::npos);
    CHECK(out.find("j,coeff\n0,0.5\n") != std::string::npos);
}
