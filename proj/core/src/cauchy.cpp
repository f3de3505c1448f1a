#include "freeprob/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace freeprob {

namespace {

// ---- closed-form cell integrals against the Cauchy kernel ----------------
//
// Linear cell [yl, yr] with density a + b (y - yl):
//   I(z) = (a + b (z - yl)) Log((z - yl)/(z - yr)) - b (yr - yl).
//
// Sqrt cell, density sqrt(u) (gA + gB u) in the offset coordinate u with
// kernel 1/(zeta - u):  substituting u = v^2,
//   J(zeta) = 2 [ -(gA + gB zeta)(sr - sl) - gB (sr^3 - sl^3)/3
//                 + (gA + gB zeta) sqrt(zeta) (atanh(sr/sqrt(zeta)) - atanh(sl/sqrt(zeta))) ].
// The principal branches are analytic along the integration path for zeta
// off [u_l, u_r]; on the real axis the atanh is replaced by its principal
// value.

cdouble linear_cell_c(cdouble z, double yl, double yr, double a, double b) {
    const cdouble L = std::log((z - yl) / (z - yr));
    return (a + b * (z - yl)) * L - b * (yr - yl);
}

double linear_cell_pv(double x, double yl, double yr, double a, double b) {
    const double L = std::log(std::abs((x - yl) / (x - yr)));
    return (a + b * (x - yl)) * L - b * (yr - yl);
}

double atanh_pv(double t) {
    return 0.5 * std::log(std::abs((1.0 + t) / (1.0 - t)));
}

struct SqrtCellView {
    double u_l, u_r, gA, gB;
};

cdouble j_sqrt_c(cdouble zeta, const SqrtCellView& c) {
    const double sl = std::sqrt(c.u_l), sr = std::sqrt(c.u_r);
    const cdouble rt = std::sqrt(zeta);
    const cdouble P = c.gA + c.gB * zeta;
    const cdouble dA = std::atanh(sr / rt) - std::atanh(sl / rt);
    return 2.0 * (-P * (sr - sl) - c.gB * (sr * sr * sr - sl * sl * sl) / 3.0 + P * rt * dA);
}

cdouble j_sqrt_prime_c(cdouble zeta, const SqrtCellView& c) {
    // d/dzeta of j_sqrt_c; uses d(sqrt(zeta) atanh(s/sqrt(zeta)))/dzeta
    //   = atanh(s/sqrt(zeta))/(2 sqrt(zeta)) - s/(2 (zeta - s^2)).
    const double sl = std::sqrt(c.u_l), sr = std::sqrt(c.u_r);
    const cdouble rt = std::sqrt(zeta);
    const cdouble P = c.gA + c.gB * zeta;
    const cdouble dA = std::atanh(sr / rt) - std::atanh(sl / rt);
    const cdouble dRtA = dA / (2.0 * rt) -
                         0.5 * (sr / (zeta - c.u_r) - sl / (zeta - c.u_l));
    return 2.0 * (-c.gB * (sr - sl) + c.gB * rt * dA + P * dRtA);
}

// integral of sqrt(u)(gA + gB u)/(c + u), c > 0
double j_sqrt_plus(double cpos, const SqrtCellView& c) {
    const double sl = std::sqrt(c.u_l), sr = std::sqrt(c.u_r);
    const double rc = std::sqrt(cpos);
    const double P = c.gA - c.gB * cpos;
    const double dA = std::atan(sr / rc) - std::atan(sl / rc);
    return 2.0 * (P * (sr - sl) + c.gB * (sr * sr * sr - sl * sl * sl) / 3.0 - P * rc * dA);
}

double j_sqrt_pv(double zeta, const SqrtCellView& c) {
    const double sl = std::sqrt(c.u_l), sr = std::sqrt(c.u_r);
    if (zeta > 0.0) {
        const double rt = std::sqrt(zeta);
        const double P = c.gA + c.gB * zeta;
        const double dA = atanh_pv(sr / rt) - atanh_pv(sl / rt);
        return 2.0 * (-P * (sr - sl) - c.gB * (sr * sr * sr - sl * sl * sl) / 3.0 + P * rt * dA);
    }
    if (zeta == 0.0)
        return -(2.0 * c.gA * (sr - sl) + (2.0 / 3.0) * c.gB * (sr * sr * sr - sl * sl * sl));
    return -j_sqrt_plus(-zeta, c);
}

// integral of (sqrt(u) g(u) - sqrt(zeta) g(zeta))/(zeta - u) over the cell
// containing zeta; finite because the model is continuous at zeta.
double j_sqrt_contained(double zeta, const SqrtCellView& c) {
    const double sl = std::sqrt(c.u_l), sr = std::sqrt(c.u_r);
    const double rt = std::sqrt(zeta);
    const double gval = c.gA + c.gB * zeta;
    double logterm = 0.0;
    if (rt > 0.0) logterm = rt * std::log((rt + sr) / (rt + sl));
    return -c.gB * (2.0 / 3.0) * (c.u_r * sr - c.u_l * sl) -
           2.0 * gval * ((sr - sl) - logterm);
}

}  // namespace

// ---- DensityModel ---------------------------------------------------------

DensityModel::DensityModel(const GridMeasure& m, int sqrt_edge_cells) {
    lo_ = m.lo();
    hi_ = m.hi();
    h_ = m.spacing();
    p_ = m.density();
    const int n = static_cast<int>(p_.size());
    a_.resize(n - 1);
    b_.resize(n - 1);
    for (int k = 0; k + 1 < n; ++k) {
        a_[k] = p_[k];
        b_[k] = (p_[k + 1] - p_[k]) / h_;
    }
    k_edge_ = m.edge() == EdgeModel::sqrt_vanishing
                  ? std::min(sqrt_edge_cells, (n - 1) / 4)
                  : 0;
    if (k_edge_ > 0) {
        left_.resize(k_edge_);
        right_.resize(k_edge_);
        auto gamma = [&](int k, bool from_left) {
            const double pv = from_left ? p_[k] : p_[n - 1 - k];
            return pv / std::sqrt(k * h_);
        };
        for (int k = 0; k < k_edge_; ++k) {
            SqrtCell cell;
            cell.u_l = k * h_;
            cell.u_r = (k + 1) * h_;
            if (k == 0) {
                cell.gA = gamma(1, true);
                cell.gB = 0.0;
            } else {
                const double g0 = gamma(k, true), g1 = gamma(k + 1, true);
                cell.gB = (g1 - g0) / h_;
                cell.gA = g0 - cell.gB * cell.u_l;
            }
            left_[k] = cell;
            if (k == 0) {
                cell.gA = gamma(1, false);
                cell.gB = 0.0;
            } else {
                const double g0 = gamma(k, false), g1 = gamma(k + 1, false);
                cell.gB = (g1 - g0) / h_;
                cell.gA = g0 - cell.gB * cell.u_l;
            }
            right_[k] = cell;
        }
    }
}

double DensityModel::value(double x) const {
    if (x < lo_ || x > hi_) return 0.0;
    const int n = static_cast<int>(p_.size());
    int k = std::min(static_cast<int>((x - lo_) / h_), n - 2);
    if (k < k_edge_) {
        const double u = x - lo_;
        const auto& c = left_[k];
        return std::sqrt(u) * (c.gA + c.gB * u);
    }
    if (k >= n - 1 - k_edge_) {
        const double t = hi_ - x;
        const auto& c = right_[n - 2 - k];
        return std::sqrt(t) * (c.gA + c.gB * t);
    }
    return a_[k] + b_[k] * (x - (lo_ + k * h_));
}

cdouble DensityModel::cell_complex(int k, cdouble z) const {
    const int n = static_cast<int>(p_.size());
    if (k < k_edge_) {
        const auto& c = left_[k];
        return j_sqrt_c(z - lo_, SqrtCellView{c.u_l, c.u_r, c.gA, c.gB});
    }
    if (k >= n - 1 - k_edge_) {
        const auto& c = right_[n - 2 - k];
        return -j_sqrt_c(hi_ - z, SqrtCellView{c.u_l, c.u_r, c.gA, c.gB});
    }
    const double yl = lo_ + k * h_;
    return linear_cell_c(z, yl, yl + h_, a_[k], b_[k]);
}

cdouble DensityModel::g(cdouble z) const {
    const int n = static_cast<int>(p_.size());
    cdouble acc(0, 0);
    for (int k = 0; k + 1 < n; ++k) acc += cell_complex(k, z);
    return acc;
}

cdouble DensityModel::g_prime(cdouble z) const {
    const int n = static_cast<int>(p_.size());
    cdouble acc(0, 0);
    for (int k = 0; k + 1 < n; ++k) {
        if (k < k_edge_) {
            const auto& c = left_[k];
            acc += j_sqrt_prime_c(z - lo_, SqrtCellView{c.u_l, c.u_r, c.gA, c.gB});
        } else if (k >= n - 1 - k_edge_) {
            const auto& c = right_[n - 2 - k];
            // contribution is -J(hi - z); d/dz gives +J'(hi - z)
            acc += j_sqrt_prime_c(hi_ - z, SqrtCellView{c.u_l, c.u_r, c.gA, c.gB});
        } else {
            const double yl = lo_ + k * h_;
            const double yr = yl + h_;
            const cdouble L = std::log((z - yl) / (z - yr));
            acc += b_[k] * L + (a_[k] + b_[k] * (z - yl)) * (1.0 / (z - yl) - 1.0 / (z - yr));
        }
    }
    return acc;
}

std::vector<cdouble> DensityModel::g_on_grid(double eps) const {
    const int n = static_cast<int>(p_.size());
    const double h = h_;
    std::vector<cdouble> ca(n, cdouble(0, 0)), cb(n, cdouble(0, 0));
    for (int k = 0; k + 1 < n; ++k) {
        ca[k] = a_[k];
        cb[k] = b_[k];
    }
    auto kc1 = [h, eps](std::ptrdiff_t m) {
        return std::log((cdouble(m * h, eps)) / (cdouble((m - 1) * h, eps)));
    };
    auto r1 = correlate(ca, kc1);
    auto r2 = correlate(cb, [&](std::ptrdiff_t m) {
        return cdouble(m * h, eps) * kc1(m) - h;
    });
    std::vector<cdouble> out(n);
    for (int j = 0; j < n; ++j) out[j] = r1[j] + r2[j];
    if (k_edge_ > 0) {
        for (int j = 0; j < n; ++j) {
            const cdouble z(lo_ + j * h_, eps);
            cdouble corr(0, 0);
            for (int k = 0; k < k_edge_; ++k) {
                const auto& cl = left_[k];
                corr += j_sqrt_c(z - lo_, SqrtCellView{cl.u_l, cl.u_r, cl.gA, cl.gB});
                const double yl = lo_ + k * h_;
                corr -= linear_cell_c(z, yl, yl + h_, a_[k], b_[k]);
                const auto& cr = right_[k];
                corr -= j_sqrt_c(hi_ - z, SqrtCellView{cr.u_l, cr.u_r, cr.gA, cr.gB});
                const int kk = n - 2 - k;
                const double yl2 = lo_ + kk * h_;
                corr -= linear_cell_c(z, yl2, yl2 + h_, a_[kk], b_[kk]);
            }
            out[j] += corr;
        }
    }
    return out;
}

double DensityModel::cell_pv_subtracted(int k, double x, double px) const {
    const int n = static_cast<int>(p_.size());
    const double yl = lo_ + k * h_;
    const double yr = yl + h_;
    const bool inside = x >= yl && x <= yr;
    if (k < k_edge_) {
        const auto& c = left_[k];
        const SqrtCellView v{c.u_l, c.u_r, c.gA, c.gB};
        const double zeta = x - lo_;
        if (inside) return j_sqrt_contained(zeta, v);
        return j_sqrt_pv(zeta, v) - px * std::log(std::abs((x - yl) / (x - yr)));
    }
    if (k >= n - 1 - k_edge_) {
        const auto& c = right_[n - 2 - k];
        const SqrtCellView v{c.u_l, c.u_r, c.gA, c.gB};
        const double d = hi_ - x;
        if (inside) return -j_sqrt_contained(d, v);
        return -j_sqrt_pv(d, v) - px * std::log(std::abs((x - yl) / (x - yr)));
    }
    if (inside) return -b_[k] * h_;
    return linear_cell_pv(x, yl, yr, a_[k] - px, b_[k]);
}

double DensityModel::hilbert_at(double x) const {
    const int n = static_cast<int>(p_.size());
    if (x <= lo_ || x >= hi_) {
        // no singularity outside the window; raw cell sums
        double acc = 0.0;
        for (int k = 0; k + 1 < n; ++k) acc += cell_pv_subtracted(k, x, 0.0);
        return acc / kPi;
    }
    const double px = value(x);
    double acc = 0.0;
    for (int k = 0; k + 1 < n; ++k) acc += cell_pv_subtracted(k, x, px);
    if (px != 0.0) acc += px * std::log((x - lo_) / (hi_ - x));
    return acc / kPi;
}

std::vector<double> DensityModel::hilbert_on_grid() const {
    const int n = static_cast<int>(p_.size());
    std::vector<double> bh(n, 0.0), av(n, 0.0);
    for (int k = 0; k + 1 < n; ++k) {
        av[k] = a_[k];
        bh[k] = b_[k] * h_;
    }
    // lag kernels with the m = 0, 1 singular lags replaced by the finite
    // limits of the subtracted form (the log terms telescope away exactly)
    auto kh1 = [](std::ptrdiff_t m) {
        if (m == 0 || m == 1) return 0.0;
        return std::log(std::abs(double(m) / double(m - 1)));
    };
    auto kh2 = [&](std::ptrdiff_t m) {
        if (m == 0 || m == 1) return -1.0;
        return double(m) * std::log(std::abs(double(m) / double(m - 1))) - 1.0;
    };
    auto r1 = correlate_real(av, kh1);
    auto r2 = correlate_real(bh, kh2);
    std::vector<double> out(n);
    for (int j = 0; j < n; ++j) out[j] = (r1[j] + r2[j]) / kPi;
    if (k_edge_ == 0) return out;

    const int jlo = k_edge_ + 2;
    const int jhi = n - 3 - k_edge_;
    for (int j = jlo; j <= jhi; ++j) {
        const double x = lo_ + j * h_;
        double corr = 0.0;
        for (int k = 0; k < k_edge_; ++k) {
            const auto& cl = left_[k];
            corr += j_sqrt_pv(x - lo_, SqrtCellView{cl.u_l, cl.u_r, cl.gA, cl.gB});
            double yl = lo_ + k * h_;
            corr -= linear_cell_pv(x, yl, yl + h_, a_[k], b_[k]);
            const auto& cr = right_[k];
            corr -= j_sqrt_pv(hi_ - x, SqrtCellView{cr.u_l, cr.u_r, cr.gA, cr.gB});
            const int kk = n - 2 - k;
            yl = lo_ + kk * h_;
            corr -= linear_cell_pv(x, yl, yl + h_, a_[kk], b_[kk]);
        }
        out[j] += corr / kPi;
    }
    for (int j = 0; j < std::min(jlo, n); ++j) out[j] = hilbert_at(lo_ + j * h_);
    for (int j = std::max(jhi + 1, 0); j < n; ++j) out[j] = hilbert_at(lo_ + j * h_);
    return out;
}

// ---- sources ---------------------------------------------------------------

namespace {

class AtomSource final : public CauchySource {
public:
    explicit AtomSource(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}
    cdouble g(cdouble z) const override {
        cdouble acc(0, 0);
        for (const auto& a : atoms_) acc += a.w / (z - a.x);
        return acc;
    }
    cdouble g_prime(cdouble z) const override {
        cdouble acc(0, 0);
        for (const auto& a : atoms_) {
            const cdouble d = z - a.x;
            acc -= a.w / (d * d);
        }
        return acc;
    }
    double lo() const override { return atoms_.front().x; }
    double hi() const override { return atoms_.back().x; }
    double feature() const override { return 0.0; }

private:
    std::vector<Atom> atoms_;
};

class SemicircleSource final : public CauchySource {
public:
    SemicircleSource(double c, double v) : c_(c), v_(v), r_(2.0 * std::sqrt(v)) {}
    cdouble g(cdouble z) const override {
        const cdouble zeta = z - c_;
        const cdouble s = std::sqrt(zeta - r_) * std::sqrt(zeta + r_);
        return (zeta - s) / (2.0 * v_);
    }
    cdouble g_prime(cdouble z) const override {
        const cdouble zeta = z - c_;
        const cdouble s = std::sqrt(zeta - r_) * std::sqrt(zeta + r_);
        return (1.0 - zeta / s) / (2.0 * v_);
    }
    double lo() const override { return c_ - r_; }
    double hi() const override { return c_ + r_; }
    double feature() const override { return std::sqrt(v_); }

private:
    double c_, v_, r_;
};

class UniformSource final : public CauchySource {
public:
    UniformSource(double a, double b) : a_(a), b_(b) {}
    cdouble g(cdouble z) const override {
        return std::log((z - a_) / (z - b_)) / (b_ - a_);
    }
    cdouble g_prime(cdouble z) const override {
        return (1.0 / (z - a_) - 1.0 / (z - b_)) / (b_ - a_);
    }
    double lo() const override { return a_; }
    double hi() const override { return b_; }
    double feature() const override { return 0.0; }

private:
    double a_, b_;
};

class GridSource final : public CauchySource {
public:
    explicit GridSource(const GridMeasure& m) : model_(m) {}
    cdouble g(cdouble z) const override { return model_.g(z); }
    cdouble g_prime(cdouble z) const override { return model_.g_prime(z); }
    double lo() const override { return model_.lo(); }
    double hi() const override { return model_.hi(); }
    double feature() const override { return model_.spacing(); }

private:
    DensityModel model_;
};

class DilateSource final : public CauchySource {
public:
    DilateSource(SourcePtr inner, double alpha) : inner_(std::move(inner)), alpha_(alpha) {}
    cdouble g(cdouble z) const override { return inner_->g(z / alpha_) / alpha_; }
    cdouble g_prime(cdouble z) const override {
        return inner_->g_prime(z / alpha_) / (alpha_ * alpha_);
    }
    double lo() const override { return alpha_ * inner_->lo(); }
    double hi() const override { return alpha_ * inner_->hi(); }
    double feature() const override { return alpha_ * inner_->feature(); }
    double tail_lambda() const override { return alpha_ * inner_->tail_lambda(); }

private:
    SourcePtr inner_;
    double alpha_;  // > 0; reflections are composed via MirrorSource
};

class MirrorSource final : public CauchySource {
public:
    explicit MirrorSource(SourcePtr inner) : inner_(std::move(inner)) {}
    cdouble g(cdouble z) const override { return -std::conj(inner_->g(-std::conj(z))); }
    cdouble g_prime(cdouble z) const override {
        return std::conj(inner_->g_prime(-std::conj(z)));
    }
    double lo() const override { return -inner_->hi(); }
    double hi() const override { return -inner_->lo(); }
    double feature() const override { return inner_->feature(); }
    double tail_lambda() const override { return inner_->tail_lambda(); }

private:
    SourcePtr inner_;
};

class SmoothSource final : public CauchySource {
public:
    SmoothSource(SourcePtr inner, double lambda)
        : inner_(std::move(inner)), lambda_(lambda) {}
    cdouble g(cdouble z) const override { return inner_->g(z + cdouble(0, lambda_)); }
    cdouble g_prime(cdouble z) const override {
        return inner_->g_prime(z + cdouble(0, lambda_));
    }
    double lo() const override { return inner_->lo(); }
    double hi() const override { return inner_->hi(); }
    double feature() const override { return inner_->feature() + lambda_; }
    double tail_lambda() const override { return inner_->tail_lambda() + lambda_; }

private:
    SourcePtr inner_;
    double lambda_;
};

class MixSource final : public CauchySource {
public:
    explicit MixSource(std::vector<std::pair<double, SourcePtr>> comps)
        : comps_(std::move(comps)) {}
    cdouble g(cdouble z) const override {
        cdouble acc(0, 0);
        for (const auto& [w, s] : comps_) acc += w * s->g(z);
        return acc;
    }
    cdouble g_prime(cdouble z) const override {
        cdouble acc(0, 0);
        for (const auto& [w, s] : comps_) acc += w * s->g_prime(z);
        return acc;
    }
    double lo() const override {
        double m = comps_.front().second->lo();
        for (const auto& [w, s] : comps_) m = std::min(m, s->lo());
        return m;
    }
    double hi() const override {
        double m = comps_.front().second->hi();
        for (const auto& [w, s] : comps_) m = std::max(m, s->hi());
        return m;
    }
    double feature() const override {
        double f = comps_.front().second->feature();
        for (const auto& [w, s] : comps_) f = std::min(f, s->feature());
        return f;
    }
    double tail_lambda() const override {
        double t = 0;
        for (const auto& [w, s] : comps_) t = std::max(t, s->tail_lambda());
        return t;
    }

private:
    std::vector<std::pair<double, SourcePtr>> comps_;
};

}  // namespace

SourcePtr make_source(const GridMeasure& m) { return std::make_shared<GridSource>(m); }

SourcePtr make_source(const AtomicMeasure& m) {
    return std::make_shared<AtomSource>(m.atoms());
}

SourcePtr make_source(const Measure& m) {
    return std::visit([](const auto& mm) { return make_source(mm); }, m);
}

SourcePtr semicircle_source(double center, double variance) {
    if (!(variance > 0)) throw spec_error("semicircle", "variance must be > 0");
    return std::make_shared<SemicircleSource>(center, variance);
}

SourcePtr uniform_source(double a, double b) {
    if (!(a < b)) throw spec_error("uniform", "need a < b");
    return std::make_shared<UniformSource>(a, b);
}

SourcePtr dilate_source(SourcePtr inner, double alpha) {
    if (alpha == 0.0) throw spec_error("dilate", "alpha must be nonzero");
    if (alpha < 0)
        return std::make_shared<MirrorSource>(
            std::make_shared<DilateSource>(std::move(inner), -alpha));
    return std::make_shared<DilateSource>(std::move(inner), alpha);
}

SourcePtr smooth_source(SourcePtr inner, double lambda) {
    if (!(lambda > 0)) throw spec_error("cauchy_smooth", "lambda must be > 0");
    return std::make_shared<SmoothSource>(std::move(inner), lambda);
}

SourcePtr mix_source(std::vector<std::pair<double, SourcePtr>> components) {
    if (components.empty()) throw spec_error("mix", "at least one component");
    double wsum = 0;
    for (auto& [w, s] : components) {
        if (!(w > 0)) throw spec_error("mix", "weights must be positive");
        wsum += w;
    }
    for (auto& [w, s] : components) w /= wsum;
    return std::make_shared<MixSource>(std::move(components));
}

// ---- boundary sampling and inversion ---------------------------------------

BoundaryTransform sample_boundary(const CauchySource& src, std::vector<double> grid,
                                  const BoundaryOptions& opt) {
    if (grid.size() < 2) throw spec_error("boundary", "grid too small");
    double R = std::max({1.0, std::abs(grid.front()), std::abs(grid.back())});
    BoundaryTransform bt;
    bt.epsilon = opt.eps > 0 ? opt.eps : 1e-9 * R;
    bt.grid = std::move(grid);
    bt.g_values.resize(bt.grid.size());
    if (opt.two_level) bt.g_values_half.resize(bt.grid.size());
    const double eps = bt.epsilon;
    parallel_blocks(bt.grid.size(), 256, [&](std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j) {
            bt.g_values[j] = src.g(cdouble(bt.grid[j], eps));
            if (opt.two_level)
                bt.g_values_half[j] = src.g(cdouble(bt.grid[j], eps / 2));
        }
    });
    bt.extrapolated = opt.two_level;
    for (std::size_t j = 0; j < bt.grid.size(); ++j) {
        if (!(bt.g_values[j].imag() < 0) ||
            (opt.two_level && !(bt.g_values_half[j].imag() < 0)))
            throw numerical_error("boundary transform lost the Herglotz property");
    }
    return bt;
}

GridMeasure stieltjes_invert(const BoundaryTransform& bt, const InvertOptions& opt) {
    const std::size_t n = bt.grid.size();
    if (n < 16) throw spec_error("stieltjes_invert", "grid too small");
    std::vector<double> p(n);
    for (std::size_t j = 0; j < n; ++j)
        p[j] = std::max(0.0, -bt.boundary(j).imag() / kPi);
    const double h = (bt.grid.back() - bt.grid.front()) / static_cast<double>(n - 1);
    double mass = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) mass += 0.5 * h * (p[j] + p[j + 1]);
    if (std::abs(mass - 1.0) > opt.mass_tol)
        throw numerical_error("stieltjes inversion mass " + std::to_string(mass) +
                              " outside tolerance; upstream solve is suspect");
    GridMeasure::Options gopt;
    gopt.edge = opt.edge;
    gopt.mass_tol = opt.mass_tol + 1e-6;
    if (opt.edge == EdgeModel::sqrt_vanishing) {
        p.front() = 0.0;
        p.back() = 0.0;
    }
    return GridMeasure::make(bt.grid.front(), bt.grid.back(), std::move(p), gopt);
}

cdouble cauchy_transform(const Measure& m, cdouble z) {
    if (!(z.imag() > 0)) throw spec_error("cauchy_transform", "Im z must be > 0");
    if (const auto* am = std::get_if<AtomicMeasure>(&m)) {
        cdouble acc(0, 0);
        for (const auto& a : am->atoms()) acc += a.w / (z - a.x);
        return acc;
    }
    return DensityModel(std::get<GridMeasure>(m)).g(z);
}

std::vector<double> hilbert_density(const GridMeasure& m) {
    return DensityModel(m).hilbert_on_grid();
}

double hilbert_at(const GridMeasure& m, double x) {
    return DensityModel(m).hilbert_at(x);
}

SmoothedMeasure cauchy_smooth(const Measure& m, double lambda, const SmoothOptions& opt) {
    if (!(lambda > 0)) throw spec_error("cauchy_smooth", "lambda must be > 0");
    const SourcePtr src = smooth_source(make_source(m), lambda);
    auto density = [&](double x) {
        return std::max(0.0, -src->g(cdouble(x, 0.0)).imag() / kPi);
    };
    // extend the window until the exact density falls below the threshold;
    // the tail is ~ lambda/(pi d^2), so start from that estimate
    double d = std::max(2.0 * lambda, std::sqrt(lambda / (kPi * opt.density_threshold)));
    while (density(support_lo(m) - d) >= opt.density_threshold ||
           density(support_hi(m) + d) >= opt.density_threshold) {
        d *= 1.3;
        if (d > 1e9) throw numerical_error("cauchy_smooth window search diverged");
    }
    const double lo = support_lo(m) - d, hi = support_hi(m) + d;
    const double h_target = lambda / opt.nodes_per_lambda;
    int n = static_cast<int>(std::ceil((hi - lo) / h_target)) + 1;
    n = std::clamp(n, opt.min_n, opt.max_n);
    std::vector<double> p(n);
    const double h = (hi - lo) / (n - 1);
    parallel_blocks(n, 512, [&](std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j) p[j] = density(lo + h * j);
    });
    double raw = 0.0;
    for (int j = 0; j + 1 < n; ++j) raw += 0.5 * h * (p[j] + p[j + 1]);
    const double truncated = std::max(0.0, 1.0 - raw);
    GridMeasure::Options gopt;
    gopt.edge = EdgeModel::blunt;
    gopt.mass_tol = std::max(0.05, 2.0 * truncated);
    SmoothedMeasure out{GridMeasure::make(lo, hi, std::move(p), gopt), truncated};
    return out;
}

void dump_boundary_csv(const BoundaryTransform& bt, std::ostream& os) {
    os << "x,re_g,im_g,eps\n";
    for (std::size_t j = 0; j < bt.grid.size(); ++j)
        os << format_sci(bt.grid[j]) << ',' << format_sci(bt.g_values[j].real()) << ','
           << format_sci(bt.g_values[j].imag()) << ',' << format_sci(bt.epsilon) << '\n';
    if (!bt.g_values_half.empty()) {
        for (std::size_t j = 0; j < bt.grid.size(); ++j)
            os << format_sci(bt.grid[j]) << ',' << format_sci(bt.g_values_half[j].real())
               << ',' << format_sci(bt.g_values_half[j].imag()) << ','
               << format_sci(bt.epsilon / 2) << '\n';
    }
}

}  // namespace freeprob
