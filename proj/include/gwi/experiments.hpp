#pragma once

#include "gwi/exact.hpp"
#include "gwi/limits.hpp"
#include "gwi/model.hpp"
#include "gwi/simulate.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace gwi {

enum class Study {
    thm11_harmonic,
    thm12_ldp,
    thm13_critical_alpha,
    cor2_fixed_eps,
    lemma23_local_limit,
    lemma22_envelope,
    functional_eq_U,
};

std::string_view to_string(Study study);
Study study_from_string(std::string_view name);

struct ExperimentConfig {
    Study study;
    ModelParams model;
    std::optional<IncrementLaw> law;
    std::vector<int> n_grid;
    std::vector<double> r_values;  // harmonic-moment orders
    EpsSequence eps;               // deviation level, power sequence or fixed
    long long paths = 100'000;
    std::uint64_t seed = 1;
    int shards = 64;
    int n_star = 1024;             // U approximation point
    int q_terms = 64;              // cap on the q(eps) series
    long long q_paths = 100'000;   // MC paths per q(eps) term when no exact tail is available
    std::string output_path;

    void validate() const;
};

struct ConvergenceRow {
    int n = 0;
    double r_or_eps = 0.0;
    double scaled_value = 0.0;
    double limit_value = 0.0;
    double rel_error = 0.0;
    std::optional<double> std_error;
};

struct StudyReport {
    Study study;
    std::vector<ConvergenceRow> rows;
    bool failed = false;  // rel_error at the largest n exceeds rel_error at the smallest n
    double worst_rel_error = 0.0;
};

ConvergenceRow make_row(int n, double r_or_eps, double scaled, double limit, std::optional<double> std_error = {});

std::vector<ConvergenceRow> run_thm11(const ExperimentConfig& config);
std::vector<ConvergenceRow> run_thm12(const ExperimentConfig& config);
std::vector<ConvergenceRow> run_thm13_and_cor2(const ExperimentConfig& config);
std::vector<ConvergenceRow> run_lemma23(const ExperimentConfig& config);
std::vector<ConvergenceRow> run_lemma22_envelope(const ExperimentConfig& config);
std::vector<ConvergenceRow> run_functional_eq_U(const ExperimentConfig& config);

// max over x in {0, 0.1, ..., 0.9} of |h(x) U(f(x)) - U(x)| / U(x), U = n^sigma H_n.
double functional_eq_residual(const ModelParams& model, int n_star);

struct LocalLimitWindow {
    int n = 0;
    int k_lo = 0;
    int k_hi = 0;
    int worst_k = 0;
    double worst_ratio = 1.0;
    double max_deviation = 0.0;
};

// Ratio of P(Z_n = k) to k^{sigma-1} n^{-sigma} e^{-k/(gamma n)} / (Gamma(sigma) gamma^sigma)
// over k in [ceil(sqrt n), n].
LocalLimitWindow local_limit_window(const ModelParams& model, int n);

struct QSeries {
    double value = 0.0;
    std::vector<double> partial_sums;
    int terms = 0;
};

// q(eps) = sum_j mu_j P(S_j >= eps j), truncated once a term falls below
// 1e-8 of the partial sum or after max_terms terms.
QSeries q_series(const ModelParams& model, const IncrementLaw& law, double eps, int max_terms, long long paths,
                 std::uint64_t seed, const std::vector<int>& mu_grid = {128, 256, 512, 1024});

// P(S_j >= eps j): exact for Gaussian increments, Monte Carlo otherwise.
double increment_sum_tail(const IncrementLaw& law, int j, double eps, long long paths, std::uint64_t seed);

// True when, within any group of rows, rel_error at the largest n exceeds
// rel_error at the smallest n. Groups share r_or_eps when by_parameter is set;
// otherwise all rows form one group.
bool convergence_failed(const std::vector<ConvergenceRow>& rows, bool by_parameter);

StudyReport run_study(const ExperimentConfig& config);

// Fixed-header CSV: study,n,r_or_eps,scaled_value,limit_value,rel_error,std_error,seed
void write_study_csv(std::ostream& os, const StudyReport& report, std::uint64_t seed);

nlohmann::json distribution_manifest(const DistributionSpec& spec);
nlohmann::json increment_manifest(const IncrementLaw& law);
nlohmann::json study_manifest(const ExperimentConfig& config, const StudyReport& report);

}  // namespace gwi
