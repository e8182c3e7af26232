#pragma once

#include "gwi/model.hpp"
#include "gwi/series.hpp"

#include <Eigen/Core>

#include <ostream>
#include <vector>

namespace gwi {

struct LawOfZn {
    int n = 0;
    Eigen::VectorXd pmf;  // P(Z_n = k), k = 0..K
    double survival = 0.0;
    double tail_mass = 0.0;

    int order() const noexcept { return static_cast<int>(pmf.size()) - 1; }
};

// Law of Z_n read off the coefficients of H_n.
LawOfZn law_of_Zn(const ModelParams& model, int n, int K);

// Law of Z_n by direct convolution of offspring and immigration pmfs, without
// any generating-function arithmetic. n <= 5, K <= 256. Parent counts above
// 256 are dropped, so the result is short by up to P(Z_j > 256), j < n.
LawOfZn brute_force_law(const ModelParams& model, int n, int K);

// --- Pointwise generating functions -----------------------------------------
// These evaluate H_n at a single point by iterating the scalar pgfs, O(n) work
// per point, with no truncation.

// log H_n(x) for x in [0, 1].
double log_generating_function(const ModelParams& model, int n, double x);
inline double generating_function(const ModelParams& model, int n, double x) {
    return std::exp(log_generating_function(model, n, x));
}

// E(x^{Z_n}; Z_n > 0) = H_n(x) - H_n(0), evaluated without cancellation by
// tracking f_k(x) - f_k(0) through divided differences.
double survival_transform(const ModelParams& model, int n, double x);

// --- Harmonic moments -------------------------------------------------------

struct HarmonicMoment {
    double value = 0.0;
    double remainder_bound = 0.0;  // bound on the part of J_n(r) lost to truncation
};

// J_n(r) = sum_{k>=1} k^{-r} P(Z_n = k) / P(Z_n > 0).
HarmonicMoment harmonic_moment_sum(const LawOfZn& law, double r);

// J_n(r) via the Laplace-transform identity
//   J_n(r) = 1/(Gamma(r) P(Z_n > 0)) int_0^inf E(e^{-t Z_n}; Z_n > 0) t^{r-1} dt,
// with the integral split at t = 1.
double harmonic_moment_integral(const ModelParams& model, int n, double r, double rel_tol = 1e-9);

// The numerator alone: (1/Gamma(r)) int_0^inf E(e^{-t Z_n}; Z_n > 0) t^{r-1} dt.
double laplace_harmonic_integral(const ModelParams& model, int n, double r, double rel_tol = 1e-9);

// --- Limit coefficients of n^sigma P(Z_n = j) ------------------------------

struct MuEstimate {
    int j = 0;
    double value = 0.0;
    std::vector<int> n_used;
    std::vector<double> scaled;       // n^sigma P(Z_n = j) at each grid point
    std::vector<double> richardson;   // first-order extrapolation of consecutive pairs
    bool extrapolated = false;
};

MuEstimate mu_coefficient(const ModelParams& model, int j, const std::vector<int>& n_grid, int K = 4096);

// mu_0..mu_J from a single sweep of the grid.
std::vector<MuEstimate> mu_coefficients(const ModelParams& model, int J, const std::vector<int>& n_grid);

// --- Uniform envelope of H_n(e^{-s/n}) --------------------------------------

struct EnvelopeFit {
    int n = 0;
    double c1 = 0.0;  // min over the s grid of H_n(e^{-s/n}) (1 + gamma s)^sigma
    double c2 = 0.0;  // max over the same grid
};

EnvelopeFit envelope_constants(const ModelParams& model, int n, const std::vector<double>& s_grid);

// Logarithmic grid on (0, n] used by default for envelope fits.
std::vector<double> envelope_grid(int n, int points = 200);

// CSV "n,k,p" rows.
void write_law_csv(std::ostream& os, const LawOfZn& law, bool with_header = true);

}  // namespace gwi
