#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace freeprob {

using cdouble = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Input/config validation failure.  `where` names the offending field
/// (dotted path for config files) so CLI diagnostics can point at it.
class spec_error : public std::runtime_error {
public:
    spec_error(std::string where, const std::string& what)
        : std::runtime_error(where.empty() ? what : where + ": " + what),
          where_(std::move(where)) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

/// A solver or quadrature left its validated operating regime
/// (non-convergence, mass-balance failure, branch ambiguity).
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Locale-independent scientific formatting with 17 significant digits;
/// round-trips any double exactly, so report CSVs diff cleanly.
std::string format_sci(double v);

/// FNV-1a 64-bit hash; used for config fingerprints in run manifests.
std::uint64_t fnv1a64(std::string_view bytes);

/// Worker count for parallel sections: FREEPROB_WORKERS env var if set,
/// else hardware concurrency clamped to [1, 16].
int worker_count();

/// Runs fn(begin, end) over fixed-size blocks of [0, n).  The block
/// partition does not depend on the worker count, so any reduction done
/// per block and combined in block order is deterministic.
void parallel_blocks(std::size_t n, std::size_t block_size,
                     const std::function<void(std::size_t, std::size_t)>& fn);

/// In-place radix-2 FFT; size must be a power of two.  inverse=true applies
/// the 1/N normalization.
void fft_inplace(std::vector<cdouble>& a, bool inverse);

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// Discrete correlation y_j = sum_k c_k * kernel(j - k) for j in [0, n),
/// evaluated with FFTs.  kernel is queried for lags in (-n, n).
std::vector<cdouble> correlate(const std::vector<cdouble>& c,
                               const std::function<cdouble(std::ptrdiff_t)>& kernel);
std::vector<double> correlate_real(const std::vector<double>& c,
                                   const std::function<double(std::ptrdiff_t)>& kernel);

/// Autocorrelation A_d = sum_i x_i x_{i+d} for d in [0, n), via FFT.
std::vector<double> autocorrelation(const std::vector<double>& x);

}  // namespace freeprob
