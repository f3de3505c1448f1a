#include "freeprob/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "freeprob/common.hpp"

namespace freeprob {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double GaussianStream::uniform01() {
    // (0, 1]: top 53 bits, shifted away from 0 so log() is safe
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;
}

double GaussianStream::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * kPi * u2;
    spare_ = rad * std::sin(ang);
    have_spare_ = true;
    return rad * std::cos(ang);
}

std::vector<double> tridiagonal_eigenvalues(std::vector<double> d,
                                            std::vector<double> e,
                                            int max_sweeps_per_value) {
    const int n = static_cast<int>(d.size());
    if (n == 0) return {};
    if (static_cast<int>(e.size()) != std::max(0, n - 1))
        throw spec_error("tridiagonal_eigenvalues", "off-diagonal size must be n-1");
    e.push_back(0.0);
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        for (;;) {
            int m = l;
            for (; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 1e-300 || std::abs(e[m]) <= 1e-16 * dd) break;
            }
            if (m == l) break;
            if (++iter > max_sweeps_per_value)
                throw numerical_error("tridiagonal QL did not converge");
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            bool underflow = false;
            for (int i = m - 1; i >= l; --i) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if (underflow) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    std::sort(d.begin(), d.end());
    return d;
}

std::vector<double> hermitian_eigenvalues(std::vector<cdouble> a, int n) {
    if (static_cast<int>(a.size()) != n * n)
        throw spec_error("hermitian_eigenvalues", "matrix size mismatch");
    auto at = [&](int i, int j) -> cdouble& { return a[i + static_cast<std::size_t>(j) * n]; };
    std::vector<double> d(n), e(std::max(0, n - 1), 0.0);
    // Householder reduction: for each column k eliminate entries below the
    // first subdiagonal with the reflector H = I - 2 u u*/|u|^2, applied
    // two-sided via p = A u, q = p - (u* p / |u|^2) u, A -= u q* + q u*.
    std::vector<cdouble> u(n), p(n), q(n);
    for (int k = 0; k + 2 < n; ++k) {
        double scale = 0.0;
        for (int i = k + 1; i < n; ++i) scale += std::abs(at(i, k));
        if (scale == 0.0) {
            e[k] = 0.0;
            continue;
        }
        double norm2 = 0.0;
        for (int i = k + 1; i < n; ++i) {
            const cdouble v = at(i, k) / scale;
            norm2 += std::norm(v);
        }
        const double norm = scale * std::sqrt(norm2);
        const cdouble a0 = at(k + 1, k);
        const cdouble phase = std::abs(a0) > 0 ? a0 / std::abs(a0) : cdouble(1, 0);
        const cdouble alpha = -phase * norm;
        double usq = 0.0;
        for (int i = k + 1; i < n; ++i) {
            u[i] = at(i, k);
            if (i == k + 1) u[i] -= alpha;
            usq += std::norm(u[i]);
        }
        if (usq <= 0.0) {
            e[k] = std::abs(alpha);
            continue;
        }
        const double beta = 2.0 / usq;
        for (int i = k + 1; i < n; ++i) {
            cdouble acc(0, 0);
            for (int j = k + 1; j < n; ++j) acc += at(i, j) * u[j];
            p[i] = beta * acc;
        }
        cdouble kup(0, 0);
        for (int i = k + 1; i < n; ++i) kup += std::conj(u[i]) * p[i];
        const cdouble kappa = 0.5 * beta * kup;
        for (int i = k + 1; i < n; ++i) q[i] = p[i] - kappa * u[i];
        for (int j = k + 1; j < n; ++j)
            for (int i = k + 1; i < n; ++i)
                at(i, j) -= u[i] * std::conj(q[j]) + q[i] * std::conj(u[j]);
        at(k + 1, k) = alpha;
        e[k] = std::abs(alpha);
    }
    if (n >= 2) e[n - 2] = std::abs(at(n - 1, n - 2));
    for (int i = 0; i < n; ++i) d[i] = at(i, i).real();
    // phases of the complex subdiagonal are removed by a diagonal unitary,
    // leaving |e| unchanged eigenvalues
    return tridiagonal_eigenvalues(std::move(d), std::move(e));
}

SpectralSample sample_deformed_gue(const Measure& m, double r, int n_dim,
                                   int n_trials, std::uint64_t seed) {
    if (n_dim < 32) throw spec_error("sample_deformed_gue", "n_dim must be >= 32");
    if (n_trials < 1) throw spec_error("sample_deformed_gue", "n_trials must be >= 1");
    if (!(r > 0)) throw spec_error("sample_deformed_gue", "r must be > 0");
    SpectralSample out;
    out.n_dim = n_dim;
    out.n_trials = n_trials;
    out.seed = seed;
    out.r = r;
    out.eigenvalues.assign(static_cast<std::size_t>(n_dim) * n_trials, 0.0);
    std::vector<double> diag(n_dim);
    for (int j = 0; j < n_dim; ++j) diag[j] = quantile(m, (j + 0.5) / n_dim);
    const double sr = std::sqrt(r);
    const double offd = sr / std::sqrt(2.0 * n_dim);
    const double ond = sr / std::sqrt(static_cast<double>(n_dim));
    parallel_blocks(n_trials, 1, [&](std::size_t b, std::size_t eidx) {
        for (std::size_t trial = b; trial < eidx; ++trial) {
            std::uint64_t s = seed + trial + 1;
            GaussianStream gauss(splitmix64(s));
            std::vector<cdouble> a(static_cast<std::size_t>(n_dim) * n_dim,
                                   cdouble(0, 0));
            auto at = [&](int i, int j) -> cdouble& {
                return a[i + static_cast<std::size_t>(j) * n_dim];
            };
            for (int j = 0; j < n_dim; ++j) {
                at(j, j) = diag[j] + ond * gauss.next();
                for (int i = j + 1; i < n_dim; ++i) {
                    const cdouble v(offd * gauss.next(), offd * gauss.next());
                    at(i, j) = v;
                    at(j, i) = std::conj(v);
                }
            }
            auto eigs = hermitian_eigenvalues(std::move(a), n_dim);
            std::copy(eigs.begin(), eigs.end(),
                      out.eigenvalues.begin() + trial * n_dim);
        }
    });
    return out;
}

double ks_distance(const SpectralSample& sample, const GridMeasure& target) {
    std::vector<double> pooled = sample.eigenvalues;
    std::sort(pooled.begin(), pooled.end());
    const double n = static_cast<double>(pooled.size());
    double dmax = 0.0;
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        const double f = cdf(target, pooled[i]);
        dmax = std::max(dmax, std::max(f - i / n, (i + 1) / n - f));
    }
    return dmax;
}

double w2_empirical(const SpectralSample& sample, const GridMeasure& target) {
    std::vector<double> pooled = sample.eigenvalues;
    std::sort(pooled.begin(), pooled.end());
    const std::size_t n = pooled.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double q = quantile(target, (i + 0.5) / n);
        acc += (pooled[i] - q) * (pooled[i] - q);
    }
    return std::sqrt(acc / n);
}

VerificationRecord compare_spectrum(const SpectralSample& sample,
                                    const GridMeasure& target,
                                    const SpectrumThresholds& thresholds) {
    const double ks = ks_distance(sample, target);
    const double w2 = w2_empirical(sample, target);
    const double margin = std::min(thresholds.ks - ks, thresholds.w2 - w2);
    VerificationRecord rec = VerificationRecord::inequality(
        "check_rmt_spectrum", "Monte Carlo oracle", sample.measure_id,
        "n_dim=" + std::to_string(sample.n_dim) + ";n_trials=" +
            std::to_string(sample.n_trials) + ";seed=" + std::to_string(sample.seed) +
            ";ks_thr=" + format_sci(thresholds.ks) + ";w2_thr=" +
            format_sci(thresholds.w2),
        ks, w2, 0.0);
    rec.margin = margin;
    rec.status = margin >= 0 ? VerificationRecord::Status::pass
                             : VerificationRecord::Status::fail;
    return rec;
}

void dump_eigenvalues_csv(const SpectralSample& sample, std::ostream& os) {
    os << "trial,index,eigenvalue\n";
    for (int trial = 0; trial < sample.n_trials; ++trial)
        for (int i = 0; i < sample.n_dim; ++i)
            os << trial << ',' << i << ','
               << format_sci(sample.eigenvalues[static_cast<std::size_t>(trial) *
                                                    sample.n_dim +
                                                i])
               << '\n';
}

}  // namespace freeprob
