#include "gwi/exact.hpp"

#include "gwi/errors.hpp"
#include "gwi/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

namespace gwi {

LawOfZn law_of_Zn(const ModelParams& model, int n, int K) {
    if (n < 1) throw InvalidArgument("law_of_Zn needs n >= 1");
    const IterationTrace trace = iterate_pgf(model, n, K);
    LawOfZn law;
    law.n = n;
    law.pmf = trace.H_n.coeffs();
    law.survival = 1.0 - law.pmf[0];
    law.tail_mass = trace.H_n.tail_mass();
    return law;
}

namespace {

// Plain truncated convolution, kept separate from the series module so the
// brute-force route shares no code with the generating-function route.
Eigen::VectorXd convolve(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::Index K = a.size() - 1;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(K + 1);
    for (Eigen::Index i = 0; i <= K; ++i) {
        if (a[i] == 0.0) continue;
        for (Eigen::Index j = 0; i + j <= K; ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

Eigen::VectorXd pmf_vector(const DistributionSpec& spec, int K) {
    Eigen::VectorXd p(K + 1);
    for (int j = 0; j <= K; ++j) p[j] = spec.prob(j);
    return p;
}

}  // namespace

LawOfZn brute_force_law(const ModelParams& model, int n, int K) {
    if (n < 0 || n > 5) throw InvalidArgument("brute_force_law is limited to 0 <= n <= 5");
    if (K < 1 || K > 256) throw InvalidArgument("brute_force_law is limited to 1 <= K <= 256");
    // States are tracked up to a fixed cap, whatever K is, so the law below K
    // does not lose the paths that pass through larger parent counts.
    constexpr int kStates = 256;
    const Eigen::VectorXd offspring = pmf_vector(model.offspring, kStates);
    const Eigen::VectorXd immigration = pmf_vector(model.immigration, kStates);

    Eigen::VectorXd law = Eigen::VectorXd::Zero(kStates + 1);
    law[0] = 1.0;
    for (int gen = 1; gen <= n; ++gen) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(kStates + 1);
        Eigen::VectorXd power = Eigen::VectorXd::Zero(kStates + 1);  // offspring pmf convolved k times
        power[0] = 1.0;
        for (int k = 0; k <= kStates; ++k) {
            if (k > 0) power = convolve(power, offspring);
            if (law[k] != 0.0) next += law[k] * power;
        }
        law = convolve(next, immigration);
    }
    LawOfZn out;
    out.n = n;
    out.pmf = law.head(K + 1);
    out.survival = 1.0 - law[0];
    out.tail_mass = std::max(0.0, 1.0 - out.pmf.sum());
    return out;
}

double log_generating_function(const ModelParams& model, int n, double x) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        acc += std::log(model.immigration.pgf(x));
        x = model.offspring.pgf(x);
    }
    return acc;
}

double survival_transform(const ModelParams& model, int n, double x) {
    double a = x;    // f_k(x)
    double b = 0.0;  // f_k(0)
    double d = x;    // f_k(x) - f_k(0)
    double log_h0 = 0.0;
    double log_ratio = 0.0;
    for (int k = 0; k < n; ++k) {
        const double hb = model.immigration.pgf(b);
        log_h0 += std::log(hb);
        log_ratio += std::log1p(model.immigration.pgf_diff(a, b, d) / hb);
        const double next_d = model.offspring.pgf_diff(a, b, d);
        a = model.offspring.pgf(a);
        b = model.offspring.pgf(b);
        d = next_d;
    }
    return std::exp(log_h0) * std::expm1(log_ratio);
}

HarmonicMoment harmonic_moment_sum(const LawOfZn& law, double r) {
    if (!(r > 0.0)) throw InvalidArgument("harmonic moment order r must be > 0");
    if (law.survival < 1e-300) throw ZeroSurvival("P(Z_n > 0) is zero");
    double acc = 0.0;
    for (int k = law.order(); k >= 1; --k) acc += std::pow(static_cast<double>(k), -r) * law.pmf[k];
    HarmonicMoment out;
    out.value = acc / law.survival;
    out.remainder_bound = law.tail_mass * std::pow(static_cast<double>(std::max(law.order(), 1)), -r) / law.survival;
    return out;
}

double laplace_harmonic_integral(const ModelParams& model, int n, double r, double rel_tol) {
    if (!(r > 0.0)) throw InvalidArgument("harmonic moment order r must be > 0");
    if (n < 1) throw InvalidArgument("n must be >= 1");

    const double dn = static_cast<double>(n);
    auto transform = [&](double t) { return survival_transform(model, n, std::exp(-t)); };

    // (0, 1] in the variable s = n t, where the integrand has its bulk.
    double inner;
    if (r < 1.0) {
        // s = v^{1/r} absorbs the s^{r-1} singularity at the origin.
        auto integrand = [&](double v) { return transform(std::pow(v, 1.0 / r) / dn) / r; };
        inner = integrate(integrand, 0.0, std::pow(dn, r), rel_tol).value;
    } else {
        auto integrand = [&](double s) { return transform(s / dn) * std::pow(s, r - 1.0); };
        inner = integrate(integrand, 0.0, dn, rel_tol).value;
    }
    inner *= std::pow(dn, -r);

    auto outer_integrand = [&](double t) { return transform(t) * std::pow(t, r - 1.0); };
    const double outer = integrate_to_infinity(outer_integrand, 1.0, rel_tol).value;

    return (inner + outer) / std::tgamma(r);
}

double harmonic_moment_integral(const ModelParams& model, int n, double r, double rel_tol) {
    if (n < 1) throw InvalidArgument("harmonic_moment_integral needs n >= 1");
    const double survival = -std::expm1(log_generating_function(model, n, 0.0));
    if (survival < 1e-300) throw ZeroSurvival("P(Z_n > 0) is zero");
    return laplace_harmonic_integral(model, n, r, rel_tol) / survival;
}

std::vector<MuEstimate> mu_coefficients(const ModelParams& model, int J, const std::vector<int>& n_grid) {
    if (J < 0) throw InvalidArgument("J must be >= 0");
    if (n_grid.empty()) throw InvalidArgument("n_grid is empty");
    for (std::size_t i = 0; i < n_grid.size(); ++i)
        if (n_grid[i] < 1 || (i > 0 && n_grid[i] <= n_grid[i - 1]))
            throw InvalidArgument("n_grid must be positive and strictly increasing");

    const int K = std::max(J, 1);
    std::vector<MuEstimate> out(J + 1);
    for (int j = 0; j <= J; ++j) {
        out[j].j = j;
        out[j].n_used = n_grid;
    }

    // One sweep of the iteration, sampling H_n at each grid point.
    Series f = Series::identity(K);
    Series H = Series::constant(K, 1.0);
    std::size_t next = 0;
    for (int k = 0; next < n_grid.size(); ++k) {
        if (k == n_grid[next]) {
            const double scale = std::pow(static_cast<double>(k), model.sigma);
            for (int j = 0; j <= J; ++j) out[j].scaled.push_back(scale * H[j]);
            ++next;
            if (next == n_grid.size()) break;
        }
        H = multiply(H, apply_pgf(model.immigration, f));
        clamp_probabilities(H);
        f = apply_pgf(model.offspring, f);
        clamp_probabilities(f);
    }

    for (auto& est : out) {
        const auto& v = est.scaled;
        for (std::size_t i = 1; i < v.size(); ++i) {
            const double n1 = n_grid[i - 1];
            const double n2 = n_grid[i];
            est.richardson.push_back((n2 * v[i] - n1 * v[i - 1]) / (n2 - n1));
        }
        const auto& R = est.richardson;
        est.extrapolated = R.size() >= 2 && std::abs(R.back() - R[R.size() - 2]) < 0.01 * std::abs(R.back());
        est.value = est.extrapolated ? R.back() : v.back();
        if (est.value < 0.0) est.value = 0.0;
    }
    return out;
}

MuEstimate mu_coefficient(const ModelParams& model, int j, const std::vector<int>& n_grid, int K) {
    if (j < 0) throw InvalidArgument("j must be >= 0");
    if (j > K) throw NonConvergent("j = " + std::to_string(j) + " lies beyond the truncation order K = " + std::to_string(K));
    MuEstimate est = std::move(mu_coefficients(model, j, n_grid)[j]);
    const auto& v = est.scaled;
    if (v.size() >= 2) {
        const double last = v.back();
        const double prev = v[v.size() - 2];
        if (std::abs(last - prev) > 0.05 * std::abs(last))
            throw NonConvergent("n^sigma P(Z_n = " + std::to_string(j) + ") moved by more than 5% between the two largest grid points");
    }
    return est;
}

EnvelopeFit envelope_constants(const ModelParams& model, int n, const std::vector<double>& s_grid) {
    if (s_grid.empty()) throw InvalidArgument("s_grid is empty");
    EnvelopeFit fit;
    fit.n = n;
    fit.c1 = std::numeric_limits<double>::infinity();
    fit.c2 = 0.0;
    for (double s : s_grid) {
        if (!(s > 0.0)) throw InvalidArgument("envelope grid points must be > 0");
        const double ratio = generating_function(model, n, std::exp(-s / n)) *
                             std::pow(1.0 + model.gamma * s, model.sigma);
        fit.c1 = std::min(fit.c1, ratio);
        fit.c2 = std::max(fit.c2, ratio);
    }
    return fit;
}

std::vector<double> envelope_grid(int n, int points) {
    std::vector<double> grid;
    const double lo = std::log(1e-3);
    const double hi = std::log(static_cast<double>(n));
    for (int i = 0; i < points; ++i) grid.push_back(std::exp(lo + (hi - lo) * i / (points - 1)));
    grid.back() = n;
    return grid;
}

void write_law_csv(std::ostream& os, const LawOfZn& law, bool with_header) {
    const auto old_precision = os.precision(17);
    if (with_header) os << "n,k,p\n";
    for (int k = 0; k <= law.order(); ++k) os << law.n << ',' << k << ',' << law.pmf[k] << '\n';
    os.precision(old_precision);
}

}  // namespace gwi
