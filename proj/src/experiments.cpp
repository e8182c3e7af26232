#include "gwi/experiments.hpp"

#include "gwi/errors.hpp"
#include "gwi/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace gwi {

std::string_view to_string(Study study) {
    switch (study) {
        case Study::thm11_harmonic: return "thm11_harmonic";
        case Study::thm12_ldp: return "thm12_ldp";
        case Study::thm13_critical_alpha: return "thm13_critical_alpha";
        case Study::cor2_fixed_eps: return "cor2_fixed_eps";
        case Study::lemma23_local_limit: return "lemma23_local_limit";
        case Study::lemma22_envelope: return "lemma22_envelope";
        case Study::functional_eq_U: return "functional_eq_U";
    }
    return "unknown";
}

Study study_from_string(std::string_view name) {
    for (Study s : {Study::thm11_harmonic, Study::thm12_ldp, Study::thm13_critical_alpha, Study::cor2_fixed_eps,
                    Study::lemma23_local_limit, Study::lemma22_envelope, Study::functional_eq_U})
        if (to_string(s) == name) return s;
    throw InvalidArgument("unknown study '" + std::string(name) + "'");
}

namespace {

bool is_monte_carlo(Study s) {
    return s == Study::thm12_ldp || s == Study::thm13_critical_alpha || s == Study::cor2_fixed_eps;
}

std::uint64_t grid_seed(std::uint64_t root, int n) { return mix64(root + static_cast<std::uint64_t>(n)); }

}  // namespace

void ExperimentConfig::validate() const {
    if (n_grid.empty()) throw InvalidArgument("n_grid is empty");
    for (std::size_t i = 0; i < n_grid.size(); ++i)
        if (n_grid[i] < 1 || (i > 0 && n_grid[i] <= n_grid[i - 1]))
            throw InvalidArgument("n_grid must be positive and strictly increasing");
    if (is_monte_carlo(study)) {
        if (paths < 1000) throw InvalidArgument("Monte Carlo studies need paths >= 1000");
        if (!law) throw InvalidArgument("Monte Carlo studies need an increment law");
    }
    if (study == Study::thm11_harmonic && r_values.empty()) throw InvalidArgument("thm11 needs r values");
}

ConvergenceRow make_row(int n, double r_or_eps, double scaled, double limit, std::optional<double> std_error) {
    return {n, r_or_eps, scaled, limit, std::abs(scaled - limit) / std::abs(limit), std_error};
}

std::vector<ConvergenceRow> run_thm11(const ExperimentConfig& config) {
    const ModelParams& model = config.model;
    std::vector<ConvergenceRow> rows;
    for (double r : config.r_values) {
        const double limit = I_constant(r, model.sigma, model.gamma, &model, config.n_star);
        for (int n : config.n_grid) {
            const double scaled = scaling_A(n, r, model.sigma) * harmonic_moment_integral(model, n, r);
            rows.push_back(make_row(n, r, scaled, limit));
        }
    }
    return rows;
}

namespace {

std::vector<ConvergenceRow> run_deviation_rows(const ExperimentConfig& config, const RegimeReport& report,
                                               const LimitConstants& consts) {
    if (!report.limit_value) throw InvalidArgument("regime limit is unknown");
    std::vector<ConvergenceRow> rows;
    const ShardingOptions opts{config.shards, 0};
    for (int n : config.n_grid) {
        const double eps_n = config.eps.at(n);
        const MCEstimate est = estimate_large_deviation(config.model, *config.law, n, eps_n, config.paths,
                                                        grid_seed(config.seed, n), opts);
        const double norm = regime_normalization(report, consts, n, eps_n);
        rows.push_back(make_row(n, eps_n, norm * est.probability, *report.limit_value, norm * est.std_error));
    }
    return rows;
}

}  // namespace

std::vector<ConvergenceRow> run_thm12(const ExperimentConfig& config) {
    config.validate();
    const ModelParams& model = config.model;
    const IncrementLaw& law = *config.law;
    const LimitConstants consts = law.limit_constants(model.sigma, model.gamma);
    const RegimeReport report = classify_regime(consts, config.eps, law.moment_condition(model.sigma));
    return run_deviation_rows(config, report, consts);
}

std::vector<ConvergenceRow> run_thm13_and_cor2(const ExperimentConfig& config) {
    config.validate();
    const ModelParams& model = config.model;
    const IncrementLaw& law = *config.law;
    const LimitConstants consts = law.limit_constants(model.sigma, model.gamma);
    if (config.study == Study::thm13_critical_alpha) {
        if (!law.alpha() || std::abs(*law.alpha() - (1.0 + model.sigma)) > 1e-12)
            throw InvalidArgument("thm13 needs a tail index alpha = 1 + sigma");
        if (config.eps.fixed) throw InvalidArgument("thm13 needs a vanishing eps sequence");
        const RegimeReport report = classify_regime(consts, config.eps, MomentCondition::tail_index);
        return run_deviation_rows(config, report, consts);
    }
    if (!config.eps.fixed) throw InvalidArgument("cor2 needs a fixed eps");
    std::optional<double> q;
    const MomentCondition moments = law.moment_condition(model.sigma);
    if (moments == MomentCondition::finite_moment)
        q = q_series(model, law, config.eps.coef, config.q_terms, config.q_paths, mix64(config.seed)).value;
    const RegimeReport report = classify_regime(consts, config.eps, moments, q);
    return run_deviation_rows(config, report, consts);
}

LocalLimitWindow local_limit_window(const ModelParams& model, int n) {
    if (n < 4) throw InvalidArgument("local limit window needs n >= 4");
    const LawOfZn law = law_of_Zn(model, n, n);
    LocalLimitWindow w;
    w.n = n;
    w.k_lo = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    w.k_hi = n;
    const double sigma = model.sigma;
    const double gamma = model.gamma;
    const double dn = static_cast<double>(n);
    const double log_norm = -std::lgamma(sigma) - sigma * std::log(gamma) - sigma * std::log(dn);
    for (int k = w.k_lo; k <= w.k_hi; ++k) {
        const double dk = static_cast<double>(k);
        const double ref = std::exp(log_norm + (sigma - 1.0) * std::log(dk) - dk / (gamma * dn));
        const double ratio = law.pmf[k] / ref;
        if (std::abs(ratio - 1.0) > w.max_deviation) {
            w.max_deviation = std::abs(ratio - 1.0);
            w.worst_ratio = ratio;
            w.worst_k = k;
        }
    }
    return w;
}

std::vector<ConvergenceRow> run_lemma23(const ExperimentConfig& config) {
    std::vector<ConvergenceRow> rows;
    for (int n : config.n_grid) {
        const LocalLimitWindow w = local_limit_window(config.model, n);
        rows.push_back(make_row(n, static_cast<double>(w.worst_k), w.worst_ratio, 1.0));
    }
    return rows;
}

std::vector<ConvergenceRow> run_lemma22_envelope(const ExperimentConfig& config) {
    std::vector<EnvelopeFit> fits;
    for (int n : config.n_grid) fits.push_back(envelope_constants(config.model, n, envelope_grid(n)));
    const EnvelopeFit& ref = fits.back();
    std::vector<ConvergenceRow> rows;
    for (const auto& fit : fits) {
        rows.push_back(make_row(fit.n, 1.0, fit.c1, ref.c1));
        rows.push_back(make_row(fit.n, 2.0, fit.c2, ref.c2));
    }
    return rows;
}

namespace {

// Signed worst deviation of h(x) U(f(x)) / U(x) from 1.
double functional_eq_ratio(const ModelParams& model, int n_star) {
    double worst = 0.0;
    for (int i = 0; i <= 9; ++i) {
        const double x = 0.1 * i;
        const double log_lhs = std::log(model.immigration.pgf(x)) +
                               log_generating_function(model, n_star, model.offspring.pgf(x));
        const double log_rhs = log_generating_function(model, n_star, x);
        const double dev = std::expm1(log_lhs - log_rhs);
        if (std::abs(dev) > std::abs(worst)) worst = dev;
    }
    return worst;
}

}  // namespace

double functional_eq_residual(const ModelParams& model, int n_star) {
    if (n_star < 1) throw InvalidArgument("n_star must be >= 1");
    return std::abs(functional_eq_ratio(model, n_star));
}

std::vector<ConvergenceRow> run_functional_eq_U(const ExperimentConfig& config) {
    std::vector<ConvergenceRow> rows;
    for (int n : config.n_grid) rows.push_back(make_row(n, 0.0, 1.0 + functional_eq_ratio(config.model, n), 1.0));
    return rows;
}

double increment_sum_tail(const IncrementLaw& law, int j, double eps, long long paths, std::uint64_t seed) {
    if (j < 1) throw InvalidArgument("j must be >= 1");
    if (law.kind() == IncrementKind::gaussian)
        return normal_tail(eps * std::sqrt(static_cast<double>(j) / law.sigma0_sq()));
    Philox rng(seed);
    long long hits = 0;
    for (long long p = 0; p < paths; ++p)
        if (law.sample_sum(j, rng) >= eps * j) ++hits;
    return static_cast<double>(hits) / static_cast<double>(paths);
}

QSeries q_series(const ModelParams& model, const IncrementLaw& law, double eps, int max_terms, long long paths,
                 std::uint64_t seed, const std::vector<int>& mu_grid) {
    if (max_terms < 1) throw InvalidArgument("max_terms must be >= 1");
    const std::vector<MuEstimate> mu = mu_coefficients(model, max_terms, mu_grid);
    QSeries q;
    double sum = 0.0;
    for (int j = 1; j <= max_terms; ++j) {
        const double term = mu[j].value * increment_sum_tail(law, j, eps, paths, shard_seed(seed, j));
        sum += term;
        q.partial_sums.push_back(sum);
        q.terms = j;
        if (sum > 0.0 && term < 1e-8 * sum) break;
    }
    q.value = sum;
    return q;
}

bool convergence_failed(const std::vector<ConvergenceRow>& rows, bool by_parameter) {
    std::map<double, std::vector<const ConvergenceRow*>> groups;
    for (const auto& row : rows) groups[by_parameter ? row.r_or_eps : 0.0].push_back(&row);
    for (const auto& [key, group] : groups) {
        const auto [lo, hi] = std::minmax_element(group.begin(), group.end(),
                                                  [](const auto* a, const auto* b) { return a->n < b->n; });
        if (!((*hi)->rel_error <= (*lo)->rel_error)) return true;
    }
    return false;
}

StudyReport run_study(const ExperimentConfig& config) {
    config.validate();
    StudyReport report;
    report.study = config.study;
    switch (config.study) {
        case Study::thm11_harmonic: report.rows = run_thm11(config); break;
        case Study::thm12_ldp: report.rows = run_thm12(config); break;
        case Study::thm13_critical_alpha:
        case Study::cor2_fixed_eps: report.rows = run_thm13_and_cor2(config); break;
        case Study::lemma23_local_limit: report.rows = run_lemma23(config); break;
        case Study::lemma22_envelope: report.rows = run_lemma22_envelope(config); break;
        case Study::functional_eq_U: report.rows = run_functional_eq_U(config); break;
    }

    for (const auto& row : report.rows) report.worst_rel_error = std::max(report.worst_rel_error, row.rel_error);
    // Deviation studies vary eps with n, so their rows form one group.
    report.failed = convergence_failed(
        report.rows, config.study == Study::thm11_harmonic || config.study == Study::lemma22_envelope);
    return report;
}

void write_study_csv(std::ostream& os, const StudyReport& report, std::uint64_t seed) {
    const auto old_precision = os.precision(17);
    os << "study,n,r_or_eps,scaled_value,limit_value,rel_error,std_error,seed\n";
    for (const auto& row : report.rows) {
        os << to_string(report.study) << ',' << row.n << ',' << row.r_or_eps << ',' << row.scaled_value << ','
           << row.limit_value << ',' << row.rel_error << ',';
        if (row.std_error) os << *row.std_error;
        os << ',' << seed << '\n';
    }
    os.precision(old_precision);
}

nlohmann::json distribution_manifest(const DistributionSpec& spec) {
    nlohmann::json j;
    j["kind"] = std::string(to_string(spec.kind()));
    if (spec.kind() == DistributionKind::explicit_pmf)
        j["pmf"] = std::vector<double>(spec.pmf().data(), spec.pmf().data() + spec.pmf().size());
    else
        j["params"] = {spec.param()};
    return j;
}

nlohmann::json increment_manifest(const IncrementLaw& law) {
    nlohmann::json j;
    j["kind"] = std::string(to_string(law.kind()));
    j["sigma0sq"] = law.sigma0_sq();
    if (law.alpha()) j["alpha"] = *law.alpha();
    if (law.x_m()) j["x_m"] = *law.x_m();
    if (law.kind() == IncrementKind::truncated_discrete) {
        j["values"] = law.values();
        j["probs"] = law.probs();
    }
    return j;
}

nlohmann::json study_manifest(const ExperimentConfig& config, const StudyReport& report) {
    nlohmann::json j;
    j["study"] = std::string(to_string(config.study));
    j["model"]["offspring"] = distribution_manifest(config.model.offspring);
    j["model"]["immigration"] = distribution_manifest(config.model.immigration);
    j["model"]["derived"] = {{"m", config.model.m},
                             {"beta", config.model.beta},
                             {"gamma", config.model.gamma},
                             {"sigma", config.model.sigma}};
    if (config.law) j["increments"] = increment_manifest(*config.law);
    j["experiment"]["n_grid"] = config.n_grid;
    j["experiment"]["r"] = config.r_values;
    if (config.eps.fixed) {
        j["experiment"]["eps"] = config.eps.coef;
    } else {
        j["experiment"]["eps_coef"] = config.eps.coef;
        j["experiment"]["eps_exponent"] = config.eps.exponent;
        j["experiment"]["eps_log_exponent"] = config.eps.log_exponent;
    }
    j["experiment"]["paths"] = config.paths;
    j["experiment"]["seed"] = config.seed;
    j["experiment"]["shards"] = config.shards;
    j["experiment"]["n_star"] = config.n_star;
    j["result"]["rows"] = report.rows.size();
    j["result"]["failed"] = report.failed;
    j["result"]["worst_rel_error"] = report.worst_rel_error;
    return j;
}

}  // namespace gwi
