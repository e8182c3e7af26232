#pragma once

#include "gwi/model.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace gwi {

struct LimitConstants {
    double sigma = 0.0;
    double gamma = 0.0;
    double sigma0_sq = 0.0;
    std::optional<double> alpha;
    std::optional<double> a;
    std::optional<double> rho;  // set iff 2 < alpha < 1 + sigma

    static LimitConstants make(double sigma, double gamma, double sigma0_sq,
                               std::optional<double> alpha = std::nullopt,
                               std::optional<double> a = std::nullopt);
};

// Boundary exponent separating the Gaussian and single-big-jump regimes.
double rho_exponent(double sigma, double alpha);

// Normalising sequence of the harmonic moment: n^sigma, n^sigma/log n or n^r.
double scaling_A(int n, double r, double sigma);

// Limit of A(n, r) J_n(r). The r > sigma branch needs the model, since it
// integrates U(e^{-t}) - U(0) with U approximated by n^sigma H_n at n_star and
// 2 n_star, extrapolated to first order in 1/n.
double I_constant(double r, double sigma, double gamma, const ModelParams* model = nullptr,
                  int n_star = 1024);

// The r < sigma integral (1/Gamma(r)) int_0^inf (1+gamma s)^{-sigma} s^{r-1} ds
// by quadrature; cross-check of the closed form.
double I_quadrature_below(double r, double sigma, double gamma);

double upsilon(double sigma, double sigma0_sq, double gamma);

// (1/(Gamma(sigma) gamma^sigma)) int_0^inf u^{sigma-1} Psi(sqrt(u)/sigma0) du.
double upsilon_quadrature(double sigma, double sigma0_sq, double gamma);

enum class Regime {
    a_gaussian,
    b_heavy_tail,
    c_boundary,
    crit_a,
    crit_b,
    crit_c,
    fixed_eps_a,
    fixed_eps_b,
    fixed_eps_c,
};

std::string_view to_string(Regime regime);

// How the positive part of the increments is controlled.
enum class MomentCondition {
    finite_moment,  // E (X^+)^{1+sigma} < inf, e.g. Gaussian or bounded
    tail_index,     // P(X^+ >= x) ~ a x^{-alpha} with alpha from LimitConstants
};

// eps_n = coef * n^{-exponent} * (log n)^{-log_exponent}, or a fixed eps.
struct EpsSequence {
    bool fixed = false;
    double coef = 1.0;
    double exponent = 0.0;
    double log_exponent = 0.0;

    static EpsSequence power(double exponent, double coef = 1.0, double log_exponent = 0.0) {
        return {false, coef, exponent, log_exponent};
    }
    static EpsSequence constant(double eps) { return {true, eps, 0.0, 0.0}; }

    double at(int n) const;
};

struct RegimeReport {
    Regime regime = Regime::a_gaussian;
    std::optional<double> tau;
    std::string scaling;
    // Absent only for fixed_eps_a when q(eps) was not supplied: that limit
    // depends on the model and increment law, not on the constants alone.
    std::optional<double> limit_value;
};

RegimeReport classify_regime(const LimitConstants& consts, const EpsSequence& eps, MomentCondition moments,
                             std::optional<double> q_eps = std::nullopt);

// The regime's normalising factor at n for the value eps_n.
double regime_normalization(const RegimeReport& report, const LimitConstants& consts, int n, double eps_n);

// Draws from the limit law of sqrt(n) L_n: sigma0 N / sqrt(Y), Y ~ Gamma(sigma, scale gamma).
std::vector<double> sample_limit_law(double sigma, double gamma, double sigma0_sq, long count, std::uint64_t seed);

struct ConstantRow {
    std::string name;
    double sigma = 0.0;
    double gamma = 0.0;
    double sigma0_sq = 0.0;
    std::optional<double> alpha;
    double value = 0.0;
};

void write_constants_csv(std::ostream& os, const std::vector<ConstantRow>& rows);

}  // namespace gwi
