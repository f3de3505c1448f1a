#include "freeprob/common.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <thread>

namespace freeprob {

std::string format_sci(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v,
                             std::chars_format::scientific, 16);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

int worker_count() {
    if (const char* env = std::getenv("FREEPROB_WORKERS")) {
        int v = 0;
        auto [p, ec] = std::from_chars(env, env + std::string_view(env).size(), v);
        (void)p;
        if (ec == std::errc() && v >= 1) return std::min(v, 256);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return std::clamp<int>(static_cast<int>(hc), 1, 16);
}

void parallel_blocks(std::size_t n, std::size_t block_size,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    if (block_size == 0) block_size = 1;
    const std::size_t n_blocks = (n + block_size - 1) / block_size;
    const int workers = std::min<std::size_t>(worker_count(), n_blocks);
    if (workers <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b)
            fn(b * block_size, std::min(n, (b + 1) * block_size));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (;;) {
            std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
            if (b >= n_blocks) return;
            fn(b * block_size, std::min(n, (b + 1) * block_size));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int i = 1; i < workers; ++i) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
}

void fft_inplace(std::vector<cdouble>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const cdouble wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cdouble w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cdouble u = a[i + k];
                cdouble v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= inv;
    }
}

std::vector<cdouble> correlate(const std::vector<cdouble>& c,
                               const std::function<cdouble(std::ptrdiff_t)>& kernel) {
    const std::size_t n = c.size();
    if (n == 0) return {};
    const std::size_t nf = next_pow2(2 * n);
    std::vector<cdouble> A(nf, cdouble(0, 0)), B(nf, cdouble(0, 0));
    for (std::size_t k = 0; k < n; ++k) A[k] = c[k];
    for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(n); ++m) B[m] = kernel(m);
    for (std::ptrdiff_t m = -1; m > -static_cast<std::ptrdiff_t>(n); --m)
        B[nf + m] = kernel(m);
    fft_inplace(A, false);
    fft_inplace(B, false);
    for (std::size_t i = 0; i < nf; ++i) A[i] *= B[i];
    fft_inplace(A, true);
    A.resize(n);
    return A;
}

std::vector<double> correlate_real(const std::vector<double>& c,
                                   const std::function<double(std::ptrdiff_t)>& kernel) {
    std::vector<cdouble> cc(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) cc[i] = c[i];
    auto out = correlate(cc, [&](std::ptrdiff_t m) { return cdouble(kernel(m), 0.0); });
    std::vector<double> r(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) r[i] = out[i].real();
    return r;
}

std::vector<double> autocorrelation(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    const std::size_t nf = next_pow2(2 * n);
    std::vector<cdouble> A(nf, cdouble(0, 0));
    for (std::size_t i = 0; i < n; ++i) A[i] = x[i];
    fft_inplace(A, false);
    for (auto& v : A) v = cdouble(std::norm(v), 0.0);
    fft_inplace(A, true);
    std::vector<double> r(n);
    for (std::size_t d = 0; d < n; ++d) r[d] = A[d].real();
    return r;
}

}  // namespace freeprob
