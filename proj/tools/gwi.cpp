// Command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 config parse error, 3 domain error
// (the error name is printed), 4 FAILED convergence trend or oracle check.

#include "gwi/config.hpp"
#include "gwi/errors.hpp"
#include "gwi/exact.hpp"
#include "gwi/experiments.hpp"
#include "gwi/limits.hpp"
#include "gwi/series.hpp"
#include "gwi/simulate.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDomain = 3;
constexpr int kExitFailed = 4;

struct Options {
    std::string config;
    std::string output_dir = ".";
    std::vector<std::string> overrides;
    std::uint64_t seed = 1;
    long long paths = 100'000;
    std::vector<int> n;
    int K = 1024;
    double sigma = 0.0;
    double gamma = 0.0;
    double sigma0sq = 0.0;
    double alpha = 0.0;
    double a = 1.0;
    double eps = 0.0;
    double eps_exponent = 0.0;
    double eps_coef = 1.0;
    double eps_log_exponent = 0.0;
    std::vector<double> r;
    int n_star = 1024;

    // Set by CLI11 for options the user actually passed.
    std::map<std::string, CLI::Option*> flags;

    bool given(const std::string& name) const {
        const auto it = flags.find(name);
        return it != flags.end() && it->second->count() > 0;
    }
};

gwi::ConfigFile load_config(const Options& opt, bool required) {
    gwi::ConfigFile config;
    if (!opt.config.empty()) {
        config = gwi::ConfigFile::load(opt.config);
    } else if (required) {
        throw gwi::ConfigError("--config is required for this subcommand");
    }
    for (const auto& o : opt.overrides) config.apply_override(o);
    if (opt.given("--alpha")) config.set("increments", "alpha", std::to_string(opt.alpha));
    if (opt.given("--sigma0sq")) config.set("increments", "sigma0sq", std::to_string(opt.sigma0sq));
    return config;
}

std::ofstream open_output(const Options& opt, const std::string& name) {
    fs::create_directories(opt.output_dir);
    const fs::path path = fs::path(opt.output_dir) / name;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

int single_n(const Options& opt, int fallback) {
    if (opt.n.empty()) return fallback;
    if (opt.n.size() != 1) throw gwi::InvalidArgument("this subcommand takes a single --n");
    return opt.n.front();
}

gwi::EpsSequence eps_from_flags(const Options& opt) {
    if (opt.given("--eps") && opt.given("--eps-exponent"))
        throw gwi::InvalidArgument("--eps and --eps-exponent are exclusive");
    if (opt.given("--eps")) return gwi::EpsSequence::constant(opt.eps);
    if (opt.given("--eps-exponent"))
        return gwi::EpsSequence::power(opt.eps_exponent, opt.eps_coef, opt.eps_log_exponent);
    throw gwi::InvalidArgument("one of --eps or --eps-exponent is required");
}

// Constants from the config (model and increments) with flag overrides.
struct ResolvedConstants {
    gwi::LimitConstants consts;
    gwi::MomentCondition moments;
};

ResolvedConstants resolve_constants(const Options& opt) {
    double sigma = opt.sigma, gamma = opt.gamma, sigma0_sq = opt.sigma0sq;
    std::optional<double> alpha, a;
    std::optional<gwi::MomentCondition> moments;
    if (!opt.config.empty()) {
        const gwi::ConfigFile config = load_config(opt, true);
        const gwi::ModelParams model = gwi::model_from_config(config);
        sigma = model.sigma;
        gamma = model.gamma;
        if (const auto law = gwi::increments_from_config(config)) {
            const gwi::LimitConstants c = law->limit_constants(sigma, gamma);
            sigma0_sq = c.sigma0_sq;
            alpha = c.alpha;
            a = c.a;
            moments = law->moment_condition(sigma);
        }
    }
    if (opt.given("--sigma")) sigma = opt.sigma;
    if (opt.given("--gamma")) gamma = opt.gamma;
    if (opt.given("--sigma0sq")) sigma0_sq = opt.sigma0sq;
    if (opt.given("--alpha")) {
        alpha = opt.alpha;
        moments.reset();
    }
    if (opt.given("--a")) a = opt.a;
    if (alpha && !a) a = 1.0;
    if (!moments)
        moments = alpha && *alpha <= 1.0 + sigma ? gwi::MomentCondition::tail_index : gwi::MomentCondition::finite_moment;
    return {gwi::LimitConstants::make(sigma, gamma, sigma0_sq, alpha, a), *moments};
}

int cmd_law(const Options& opt) {
    const gwi::ModelParams model = gwi::model_from_config(load_config(opt, true));
    const int n = single_n(opt, 50);
    const gwi::LawOfZn law = gwi::law_of_Zn(model, n, opt.K);
    auto out = open_output(opt, "law_n" + std::to_string(n) + ".csv");
    gwi::write_law_csv(out, law);
    std::cout << "law n=" << n << " K=" << opt.K << " survival=" << law.survival
              << " tail_mass=" << law.tail_mass << '\n';
    return kExitOk;
}

int cmd_harmonic(const Options& opt) {
    const gwi::ModelParams model = gwi::model_from_config(load_config(opt, true));
    const int n = single_n(opt, 100);
    const std::vector<double> rs = opt.r.empty() ? std::vector<double>{1.0, model.sigma, model.sigma + 1.0} : opt.r;
    const gwi::LawOfZn law = gwi::law_of_Zn(model, n, opt.K);
    auto out = open_output(opt, "harmonic_n" + std::to_string(n) + ".csv");
    out << std::setprecision(17) << "n,r,sum,remainder_bound,integral,scaled,limit\n";
    for (double r : rs) {
        const gwi::HarmonicMoment sum = gwi::harmonic_moment_sum(law, r);
        const double integral = gwi::harmonic_moment_integral(model, n, r);
        const double limit = gwi::I_constant(r, model.sigma, model.gamma, &model, opt.n_star);
        out << n << ',' << r << ',' << sum.value << ',' << sum.remainder_bound << ',' << integral << ','
            << gwi::scaling_A(n, r, model.sigma) * integral << ',' << limit << '\n';
    }
    std::cout << "harmonic n=" << n << " rows=" << rs.size() << " sigma=" << model.sigma << '\n';
    return kExitOk;
}

int cmd_constants(const Options& opt) {
    const ResolvedConstants rc = resolve_constants(opt);
    const gwi::LimitConstants& c = rc.consts;
    std::vector<gwi::ConstantRow> rows;
    rows.push_back({"upsilon", c.sigma, c.gamma, c.sigma0_sq, c.alpha, gwi::upsilon(c.sigma, c.sigma0_sq, c.gamma)});
    if (c.rho) rows.push_back({"rho", c.sigma, c.gamma, c.sigma0_sq, c.alpha, *c.rho});
    if (c.alpha && *c.alpha - 1.0 <= c.sigma)
        rows.push_back({"a_I_alpha_minus_1", c.sigma, c.gamma, c.sigma0_sq, c.alpha,
                        *c.a * gwi::I_constant(*c.alpha - 1.0, c.sigma, c.gamma)});
    auto out = open_output(opt, "constants.csv");
    gwi::write_constants_csv(out, rows);
    gwi::write_constants_csv(std::cout, rows);
    return kExitOk;
}

int cmd_classify(const Options& opt) {
    const ResolvedConstants rc = resolve_constants(opt);
    const gwi::RegimeReport report = gwi::classify_regime(rc.consts, eps_from_flags(opt), rc.moments);
    std::cout << "regime=" << gwi::to_string(report.regime) << " scaling=" << report.scaling;
    if (report.tau) std::cout << " tau=" << *report.tau;
    if (report.limit_value) std::cout << " limit=" << std::setprecision(12) << *report.limit_value;
    std::cout << '\n';
    return kExitOk;
}

int cmd_simulate(const Options& opt) {
    const gwi::ConfigFile config = load_config(opt, true);
    const gwi::ModelParams model = gwi::model_from_config(config);
    const auto law = gwi::increments_from_config(config);
    if (!law) throw gwi::ConfigError("simulate needs an [increments] section");
    const gwi::EpsSequence eps = eps_from_flags(opt);
    const int n = single_n(opt, 100);
    const double eps_n = eps.at(n);
    const gwi::MCEstimate est = gwi::estimate_large_deviation(model, *law, n, eps_n, opt.paths, opt.seed);
    auto out = open_output(opt, "estimate_n" + std::to_string(n) + ".csv");
    gwi::write_estimate_csv(out, n, eps_n, est);
    nlohmann::json manifest;
    manifest["model"]["offspring"] = gwi::distribution_manifest(model.offspring);
    manifest["model"]["immigration"] = gwi::distribution_manifest(model.immigration);
    manifest["increments"] = gwi::increment_manifest(*law);
    manifest["n"] = n;
    manifest["eps"] = eps_n;
    manifest["paths"] = opt.paths;
    manifest["seed"] = opt.seed;
    open_output(opt, "estimate_n" + std::to_string(n) + ".json") << manifest.dump(2) << '\n';
    std::cout << "simulate n=" << n << " eps=" << eps_n << " p_hat=" << est.probability
              << " std_err=" << est.std_error << " hits=" << est.hits << '\n';
    return kExitOk;
}

int cmd_experiment(const Options& opt) {
    const gwi::ConfigFile config = load_config(opt, true);
    gwi::ExperimentConfig exp = gwi::experiment_from_config(config);
    if (opt.given("--seed")) exp.seed = opt.seed;
    if (opt.given("--paths")) exp.paths = opt.paths;
    if (!opt.n.empty()) exp.n_grid = opt.n;
    if (!opt.r.empty()) exp.r_values = opt.r;
    if (opt.given("--eps") || opt.given("--eps-exponent")) exp.eps = eps_from_flags(opt);
    if (opt.given("--n-star")) exp.n_star = opt.n_star;

    const gwi::StudyReport report = gwi::run_study(exp);
    const fs::path csv_name = exp.output_path.empty() ? fs::path(std::string(gwi::to_string(exp.study)) + ".csv")
                                                      : fs::path(exp.output_path);
    auto csv = open_output(opt, csv_name.string());
    gwi::write_study_csv(csv, report, exp.seed);
    fs::path json_name = csv_name;
    json_name.replace_extension(".json");
    open_output(opt, json_name.string()) << gwi::study_manifest(exp, report).dump(2) << '\n';

    std::cout << "study=" << gwi::to_string(report.study) << " rows=" << report.rows.size()
              << " worst_rel_error=" << report.worst_rel_error << (report.failed ? " FAILED" : " OK") << '\n';
    return report.failed ? kExitFailed : kExitOk;
}

// Independent cross-checks between the series, closed forms and quadrature.
int cmd_oracle_check(const Options& opt) {
    gwi::ModelParams model = opt.config.empty()
                                 ? gwi::validate_condition_A(gwi::DistributionSpec::geometric(0.5),
                                                             gwi::DistributionSpec::geometric(1.0 / 3.0))
                                 : gwi::model_from_config(load_config(opt, true));
    int failures = 0;
    auto check = [&](const std::string& name, double got, double want, double tol) {
        const double err = std::abs(got - want);
        const bool ok = err <= tol;
        if (!ok) ++failures;
        std::cout << (ok ? "PASS " : "FAIL ") << name << " got=" << std::setprecision(12) << got << " want=" << want
                  << " err=" << err << '\n';
    };

    for (int n : {1, 2, 3, 4}) {
        const gwi::LawOfZn a = gwi::law_of_Zn(model, n, 64);
        const gwi::LawOfZn b = gwi::brute_force_law(model, n, 64);
        check("brute_force_law n=" + std::to_string(n), (a.pmf - b.pmf).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    }
    if (model.offspring.kind() == gwi::DistributionKind::geometric && model.offspring.param() == 0.5) {
        const gwi::Series f50 = gwi::iterate_offspring(model.offspring, 50, 256);
        for (double s : {0.0, 0.3, 0.7})
            check("linear_fractional s=" + std::to_string(s), gwi::evaluate(f50, s),
                  gwi::linear_fractional_oracle(model.gamma, 50, s), 1e-9);
    }
    const int n = 100;
    const gwi::LawOfZn law = gwi::law_of_Zn(model, n, 8192);
    const gwi::HarmonicMoment sum = gwi::harmonic_moment_sum(law, 1.0);
    check("harmonic sum vs integral n=100 r=1", sum.value, gwi::harmonic_moment_integral(model, n, 1.0),
          1e-6 + sum.remainder_bound);
    check("upsilon closed form vs quadrature", gwi::upsilon(model.sigma, 1.0, model.gamma),
          gwi::upsilon_quadrature(model.sigma, 1.0, model.gamma), 1e-8);
    if (model.sigma > 0.5)
        check("I(r<sigma) closed form vs quadrature", gwi::I_constant(0.5, model.sigma, model.gamma),
              gwi::I_quadrature_below(0.5, model.sigma, model.gamma), 1e-8);
    std::cout << "oracle-check failures=" << failures << '\n';
    return failures == 0 ? kExitOk : kExitFailed;
}

void add_common(CLI::App* sub, Options& opt) {
    sub->add_option("--config", opt.config, "Config file")->check(CLI::ExistingFile);
    sub->add_option("--output-dir", opt.output_dir, "Directory for CSV and JSON outputs");
    sub->add_option("--set", opt.overrides, "Config override section.key=value");
    opt.flags["--seed"] = sub->add_option("--seed", opt.seed, "Root seed");
    opt.flags["--paths"] = sub->add_option("--paths", opt.paths, "Monte Carlo paths");
    opt.flags["--n"] = sub->add_option("--n", opt.n, "Generation(s)");
    opt.flags["--K"] = sub->add_option("--K", opt.K, "Series truncation order");
    opt.flags["--sigma"] = sub->add_option("--sigma", opt.sigma, "sigma = beta / gamma");
    opt.flags["--gamma"] = sub->add_option("--gamma", opt.gamma, "gamma = f''(1) / 2");
    opt.flags["--sigma0sq"] = sub->add_option("--sigma0sq", opt.sigma0sq, "Increment variance");
    opt.flags["--alpha"] = sub->add_option("--alpha", opt.alpha, "Increment tail index");
    opt.flags["--a"] = sub->add_option("--a", opt.a, "Increment tail constant");
    opt.flags["--eps"] = sub->add_option("--eps", opt.eps, "Fixed deviation level");
    opt.flags["--eps-exponent"] = sub->add_option("--eps-exponent", opt.eps_exponent, "eps_n = c n^-e (log n)^-l");
    opt.flags["--eps-coef"] = sub->add_option("--eps-coef", opt.eps_coef, "c in eps_n");
    opt.flags["--eps-log-exponent"] = sub->add_option("--eps-log-exponent", opt.eps_log_exponent, "l in eps_n");
    opt.flags["--r"] = sub->add_option("--r", opt.r, "Harmonic moment order(s)");
    opt.flags["--n-star"] = sub->add_option("--n-star", opt.n_star, "Generation used to approximate U");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Critical Galton-Watson process with immigration: exact laws, limits and simulation"};
    app.require_subcommand(1);
    struct Entry {
        const char* name;
        const char* help;
        int (*run)(const Options&);
    };
    const Entry entries[] = {
        {"law", "Write the exact law of Z_n", cmd_law},
        {"harmonic", "Harmonic moments E(Z_n^-r | Z_n > 0) and their limits", cmd_harmonic},
        {"constants", "Limit constants for given sigma, gamma, sigma0^2, alpha", cmd_constants},
        {"classify", "Deviation regime for an eps sequence", cmd_classify},
        {"simulate", "Monte Carlo estimate of P(L_n >= eps_n)", cmd_simulate},
        {"experiment", "Run a convergence study from a config", cmd_experiment},
        {"oracle-check", "Cross-check independent computation routes", cmd_oracle_check},
    };
    std::vector<std::pair<CLI::App*, int (*)(const Options&)>> subs;
    for (const auto& e : entries) {
        subs.emplace_back(app.add_subcommand(e.name, e.help), e.run);
    }
    // Every subcommand gets the same flags, bound to its own Options.
    std::vector<Options> per_sub(subs.size());
    for (std::size_t i = 0; i < subs.size(); ++i) add_common(subs[i].first, per_sub[i]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        for (std::size_t i = 0; i < subs.size(); ++i)
            if (subs[i].first->parsed()) return subs[i].second(per_sub[i]);
    } catch (const gwi::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const gwi::DomainError& e) {
        std::cout << e.name() << '\n';
        std::cerr << e.what() << '\n';
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
