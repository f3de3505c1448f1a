#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>

#include "freeprob/measure.hpp"
#include "freeprob/record.hpp"

namespace freeprob {

/// SplitMix64 step; used to derive independent per-trial RNG seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministic Gaussian stream: mt19937_64 + explicit Box-Muller (the
/// standard library normal_distribution is implementation-defined).
/// Stream splitting: trial k of a run with master seed s uses the engine
/// seed splitmix64(s + k + 1), so trials are reproducible independently
/// of scheduling order.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}
    double next();

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
    double uniform01();
};

/// Eigenvalues of a real symmetric tridiagonal matrix by the implicit-shift
/// QL algorithm; `off` couples diag[i] and diag[i+1].  Ascending order.
std::vector<double> tridiagonal_eigenvalues(std::vector<double> diag,
                                            std::vector<double> off,
                                            int max_sweeps_per_value = 30);

/// Eigenvalues of a dense complex Hermitian matrix (column-major, n x n):
/// Householder reduction to real tridiagonal form, then implicit-shift QL.
std::vector<double> hermitian_eigenvalues(std::vector<cdouble> a, int n);

struct SpectralSample {
    int n_dim = 0;
    int n_trials = 0;
    std::uint64_t seed = 0;
    double r = 0.0;
    std::string measure_id;
    /// n_dim * n_trials values; each trial's block sorted ascending.
    std::vector<double> eigenvalues;
};

/// Empirical spectra of A + sqrt(r) * GUE where A is the deterministic
/// diagonal of quantile midpoints of m; the pooled law approximates
/// mu (+) sigma_r as n_dim grows.
SpectralSample sample_deformed_gue(const Measure& m, double r, int n_dim,
                                   int n_trials, std::uint64_t seed);

/// Kolmogorov-Smirnov distance between the pooled empirical law and a
/// grid measure.
double ks_distance(const SpectralSample& sample, const GridMeasure& target);
/// Quantile-coupling W2 between the pooled empirical law and a grid measure.
double w2_empirical(const SpectralSample& sample, const GridMeasure& target);

struct SpectrumThresholds {
    double ks = 0.03;
    double w2 = 0.05;
};

/// Pass iff both the KS and W2 distances are below their thresholds
/// (lhs = KS, rhs = W2; margin = min of the two threshold gaps).
VerificationRecord compare_spectrum(const SpectralSample& sample,
                                    const GridMeasure& target,
                                    const SpectrumThresholds& thresholds = {});

/// CSV dump: trial, index, eigenvalue.
void dump_eigenvalues_csv(const SpectralSample& sample, std::ostream& os);

}  // namespace freeprob
