#include "gwi/limits.hpp"

#include "gwi/errors.hpp"
#include "gwi/exact.hpp"
#include "gwi/numerics.hpp"
#include "gwi/rng.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace gwi {

namespace {

constexpr double kEqualTol = 1e-12;

bool nearly_equal(double x, double y) { return std::abs(x - y) <= kEqualTol; }

}  // namespace

double rho_exponent(double sigma, double alpha) { return (1.0 + sigma - alpha) / (2.0 * sigma - alpha); }

LimitConstants LimitConstants::make(double sigma, double gamma, double sigma0_sq, std::optional<double> alpha,
                                    std::optional<double> a) {
    if (!(sigma > 0.0) || !(gamma > 0.0)) throw InvalidArgument("sigma and gamma must be positive");
    if (!(sigma0_sq > 0.0)) throw InvalidArgument("sigma0_sq must be positive");
    LimitConstants c{sigma, gamma, sigma0_sq, alpha, a, std::nullopt};
    if (alpha && *alpha > 2.0 && *alpha < 1.0 + sigma && !nearly_equal(*alpha, 1.0 + sigma))
        c.rho = rho_exponent(sigma, *alpha);
    return c;
}

double scaling_A(int n, double r, double sigma) {
    if (n < 2) throw InvalidArgument("scaling_A needs n >= 2");
    if (!(r > 0.0) || !(sigma > 0.0)) throw InvalidArgument("r and sigma must be positive");
    const double dn = static_cast<double>(n);
    if (nearly_equal(r, sigma)) return std::pow(dn, sigma) / std::log(dn);
    if (r > sigma) return std::pow(dn, sigma);
    return std::pow(dn, r);
}

double I_constant(double r, double sigma, double gamma, const ModelParams* model, int n_star) {
    if (!(r > 0.0) || !(sigma > 0.0) || !(gamma > 0.0)) throw InvalidArgument("r, sigma, gamma must be positive");
    if (nearly_equal(r, sigma)) return std::pow(gamma, -sigma) / std::tgamma(sigma);
    if (r < sigma) return std::pow(gamma, -r) * std::tgamma(sigma - r) / std::tgamma(sigma);

    if (model == nullptr) throw ModelRequired("I(r, sigma) for r > sigma integrates U and needs the model");
    if (std::abs(model->sigma - sigma) > 1e-9 * sigma || std::abs(model->gamma - gamma) > 1e-9 * gamma)
        throw InvalidArgument("sigma/gamma disagree with the supplied model");
    auto scaled = [&](int n) {
        return std::pow(static_cast<double>(n), sigma) * laplace_harmonic_integral(*model, n, r, 1e-11);
    };
    const double coarse = scaled(n_star);
    const double fine = scaled(2 * n_star);
    return 2.0 * fine - coarse;
}

double I_quadrature_below(double r, double sigma, double gamma) {
    if (!(r > 0.0 && r < sigma)) throw InvalidArgument("I_quadrature_below needs 0 < r < sigma");
    auto g = [&](double s) { return std::pow(1.0 + gamma * s, -sigma); };
    // [0, 1] with s = v^{1/r}: the s^{r-1} factor becomes 1/r.
    const double head = integrate([&](double v) { return g(std::pow(v, 1.0 / r)) / r; }, 0.0, 1.0, 1e-12).value;
    // [1, inf) with s = u^{-p}, p = 1/(sigma - r): the algebraic tail becomes bounded.
    const double p = 1.0 / (sigma - r);
    auto tail_integrand = [&](double u) {
        if (u == 0.0) return 0.0;
        const double s = std::pow(u, -p);
        return g(s) * std::pow(s, r - 1.0) * p * std::pow(u, -p - 1.0);
    };
    const double tail = integrate(tail_integrand, 0.0, 1.0, 1e-12).value;
    return (head + tail) / std::tgamma(r);
}

double upsilon(double sigma, double sigma0_sq, double gamma) {
    if (!(sigma > 1.0)) throw InvalidArgument("upsilon needs sigma > 1");
    if (!(sigma0_sq > 0.0) || !(gamma > 0.0)) throw InvalidArgument("sigma0_sq and gamma must be positive");
    return std::pow(2.0, sigma - 1.0) * std::tgamma(sigma + 0.5) /
           (std::tgamma(sigma) * std::pow(gamma, sigma) * sigma * std::sqrt(std::numbers::pi)) *
           std::pow(sigma0_sq, sigma);
}

double upsilon_quadrature(double sigma, double sigma0_sq, double gamma) {
    if (!(sigma > 0.0) || !(sigma0_sq > 0.0) || !(gamma > 0.0)) throw InvalidArgument("parameters must be positive");
    const double sigma0 = std::sqrt(sigma0_sq);
    // u = w^2: u^{sigma-1} du = 2 w^{2 sigma - 1} dw.
    auto integrand = [&](double w) { return 2.0 * std::pow(w, 2.0 * sigma - 1.0) * normal_tail(w / sigma0); };
    const double split = 8.0 * sigma0;
    const double body = integrate(integrand, 0.0, split, 1e-12).value;
    const double tail = integrate_to_infinity(integrand, split, 1e-12).value;
    return (body + tail) / (std::tgamma(sigma) * std::pow(gamma, sigma));
}

std::string_view to_string(Regime regime) {
    switch (regime) {
        case Regime::a_gaussian: return "a_gaussian";
        case Regime::b_heavy_tail: return "b_heavy_tail";
        case Regime::c_boundary: return "c_boundary";
        case Regime::crit_a: return "crit_a";
        case Regime::crit_b: return "crit_b";
        case Regime::crit_c: return "crit_c";
        case Regime::fixed_eps_a: return "fixed_eps_a";
        case Regime::fixed_eps_b: return "fixed_eps_b";
        case Regime::fixed_eps_c: return "fixed_eps_c";
    }
    return "unknown";
}

double EpsSequence::at(int n) const {
    if (fixed) return coef;
    const double dn = static_cast<double>(n);
    double v = coef * std::pow(dn, -exponent);
    if (log_exponent != 0.0) v *= std::pow(std::log(dn), -log_exponent);
    return v;
}

namespace {

// Sign of the limit of coef n^{p} (log n)^{q}: -1 -> 0, +1 -> inf, 0 -> coef.
int power_log_trend(double p, double q) {
    if (!nearly_equal(p, 0.0)) return p > 0.0 ? 1 : -1;
    if (!nearly_equal(q, 0.0)) return q > 0.0 ? 1 : -1;
    return 0;
}

}  // namespace

RegimeReport classify_regime(const LimitConstants& consts, const EpsSequence& eps, MomentCondition moments,
                             std::optional<double> q_eps) {
    const double sigma = consts.sigma;
    if (!(sigma > 1.0)) throw OutOfScope("large-deviation regimes need sigma > 1");

    enum class Tail { light, critical, heavy } tail = Tail::light;
    double alpha = 0.0;
    double a = 0.0;
    if (moments == MomentCondition::tail_index) {
        if (!consts.alpha || !consts.a) throw InvalidArgument("tail-index regimes need alpha and a");
        alpha = *consts.alpha;
        a = *consts.a;
        if (!(alpha > 2.0)) throw OutOfScope("tail index alpha must exceed 2");
        if (!(a > 0.0)) throw InvalidArgument("tail constant a must be positive");
        if (nearly_equal(alpha, 1.0 + sigma))
            tail = Tail::critical;
        else if (alpha < 1.0 + sigma)
            tail = Tail::heavy;
    }

    const double ups = upsilon(sigma, consts.sigma0_sq, consts.gamma);
    RegimeReport rep;

    if (eps.fixed) {
        const double e = eps.coef;
        if (!(e > 0.0)) throw OutOfScope("fixed eps must be positive");
        switch (tail) {
            case Tail::light:
                rep.regime = Regime::fixed_eps_a;
                rep.scaling = "n^sigma";
                rep.limit_value = q_eps;
                break;
            case Tail::critical:
                rep.regime = Regime::fixed_eps_b;
                rep.scaling = "n^sigma / log n";
                rep.limit_value = std::pow(e, -(sigma + 1.0)) * a * I_constant(sigma, sigma, consts.gamma);
                break;
            case Tail::heavy:
                rep.regime = Regime::fixed_eps_c;
                rep.scaling = "n^(alpha-1)";
                rep.limit_value = std::pow(e, -alpha) * a * I_constant(alpha - 1.0, sigma, consts.gamma);
                break;
        }
        return rep;
    }

    // eps_n -> 0 and n eps_n^2 -> inf.
    const double e = eps.exponent;
    const double l = eps.log_exponent;
    if (!(eps.coef > 0.0)) throw OutOfScope("eps sequence coefficient must be positive");
    if (!(e >= 0.0 && e < 0.5) || (nearly_equal(e, 0.0) && !(l > 0.0)))
        throw OutOfScope("eps_n must satisfy eps_n -> 0 and n eps_n^2 -> inf (exponent in (0, 1/2))");

    switch (tail) {
        case Tail::light:
            rep.regime = Regime::a_gaussian;
            rep.scaling = "eps_n^(2 sigma) n^sigma";
            rep.limit_value = ups;
            return rep;
        case Tail::heavy: {
            const double rho = rho_exponent(sigma, alpha);
            const double aI = a * I_constant(alpha - 1.0, sigma, consts.gamma);
            // eps_n n^rho = coef n^{rho - e} (log n)^{-l}
            switch (power_log_trend(rho - e, -l)) {
                case -1:
                    rep.regime = Regime::a_gaussian;
                    rep.scaling = "eps_n^(2 sigma) n^sigma";
                    rep.limit_value = ups;
                    break;
                case 1:
                    rep.regime = Regime::b_heavy_tail;
                    rep.scaling = "eps_n^alpha n^(alpha-1)";
                    rep.limit_value = aI;
                    break;
                default: {
                    const double tau = eps.coef;
                    rep.regime = Regime::c_boundary;
                    rep.tau = tau;
                    rep.scaling = "n^(sigma (alpha-2) / (2 sigma - alpha))";
                    rep.limit_value = std::pow(tau, -2.0 * sigma) * ups + std::pow(tau, -alpha) * aI;
                }
            }
            return rep;
        }
        case Tail::critical: {
            const double aI = a * I_constant(sigma, sigma, consts.gamma);
            // eps_n^{sigma-1} log n = coef^{sigma-1} n^{-e (sigma-1)} (log n)^{1 - l (sigma-1)}
            switch (power_log_trend(-e * (sigma - 1.0), 1.0 - l * (sigma - 1.0))) {
                case -1:
                    rep.regime = Regime::crit_a;
                    rep.scaling = "eps_n^(2 sigma) n^sigma";
                    rep.limit_value = ups;
                    break;
                case 1:
                    rep.regime = Regime::crit_b;
                    rep.scaling = "eps_n^(sigma+1) n^sigma / log n";
                    rep.limit_value = aI;
                    break;
                default: {
                    const double tau = std::pow(eps.coef, sigma - 1.0);
                    rep.regime = Regime::crit_c;
                    rep.tau = tau;
                    rep.scaling = "eps_n^(2 sigma) n^sigma";
                    rep.limit_value = ups + tau * aI;
                }
            }
            return rep;
        }
    }
    return rep;
}

double regime_normalization(const RegimeReport& report, const LimitConstants& consts, int n, double eps_n) {
    const double dn = static_cast<double>(n);
    const double sigma = consts.sigma;
    const double alpha = consts.alpha.value_or(0.0);
    switch (report.regime) {
        case Regime::a_gaussian:
        case Regime::crit_a:
        case Regime::crit_c: return std::pow(eps_n, 2.0 * sigma) * std::pow(dn, sigma);
        case Regime::b_heavy_tail: return std::pow(eps_n, alpha) * std::pow(dn, alpha - 1.0);
        case Regime::c_boundary: return std::pow(dn, sigma * (alpha - 2.0) / (2.0 * sigma - alpha));
        case Regime::crit_b: return std::pow(eps_n, sigma + 1.0) * std::pow(dn, sigma) / std::log(dn);
        case Regime::fixed_eps_a: return std::pow(dn, sigma);
        case Regime::fixed_eps_b: return std::pow(dn, sigma) / std::log(dn);
        case Regime::fixed_eps_c: return std::pow(dn, alpha - 1.0);
    }
    return 0.0;
}

std::vector<double> sample_limit_law(double sigma, double gamma, double sigma0_sq, long count, std::uint64_t seed) {
    if (count < 1) throw InvalidArgument("count must be >= 1");
    if (!(sigma > 0.0) || !(gamma > 0.0) || !(sigma0_sq > 0.0)) throw InvalidArgument("parameters must be positive");
    Philox rng(seed);
    std::gamma_distribution<double> mixing(sigma, gamma);
    std::normal_distribution<double> normal;
    const double sigma0 = std::sqrt(sigma0_sq);
    std::vector<double> out(static_cast<std::size_t>(count));
    for (auto& v : out) {
        const double y = mixing(rng);
        v = sigma0 * normal(rng) / std::sqrt(y);
    }
    return out;
}

void write_constants_csv(std::ostream& os, const std::vector<ConstantRow>& rows) {
    const auto old_precision = os.precision(17);
    os << "name,sigma,gamma,sigma0_sq,alpha,value\n";
    for (const auto& r : rows) {
        os << r.name << ',' << r.sigma << ',' << r.gamma << ',' << r.sigma0_sq << ',';
        if (r.alpha) os << *r.alpha;
        os << ',' << r.value << '\n';
    }
    os.precision(old_precision);
}

}  // namespace gwi
