#include "freeprob/freeconv.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace freeprob {

namespace {

struct RefineResult {
    cdouble w;
    bool ok;
};

RefineResult refine_subordination(const CauchySource& src, double r, cdouble z,
                                  cdouble w0, double tol, int max_iter,
                                  double damping) {
    cdouble w = w0;
    if (!(w.imag() < 0)) w = cdouble(w.real(), -1e-12);
    for (int it = 0; it < max_iter; ++it) {
        const cdouble arg = z - r * w;
        const cdouble gv = src.g(arg);
        const cdouble F = w - gv;
        if (std::abs(F) <= tol * std::max(1.0, std::abs(w))) return {w, true};
        const cdouble Fp = 1.0 + r * src.g_prime(arg);
        cdouble wn = w - F / Fp;
        if (!std::isfinite(wn.real()) || !std::isfinite(wn.imag()) || wn.imag() >= 0)
            wn = w - damping * F;  // Picard step; convex combinations stay in the LHP
        if (wn.imag() >= 0) wn = cdouble(wn.real(), 0.5 * w.imag());
        w = wn;
    }
    return {w, false};
}

cdouble solve_subordination(const CauchySource& src, double r, cdouble z,
                            const SubordinationOptions& opt) {
    const double R = std::max({1.0, std::abs(src.lo()), std::abs(src.hi())});
    const double im_hi = opt.im_start_factor * std::max(1.0, R);
    auto run_ladder = [&](double factor, int max_iter) -> RefineResult {
        double im = std::max(im_hi, z.imag());
        cdouble w = 1.0 / cdouble(z.real(), im);
        RefineResult res{w, true};
        for (;;) {
            const bool final_level = im <= z.imag();
            const cdouble zz(z.real(), std::max(im, z.imag()));
            res = refine_subordination(src, r, zz, res.w, opt.tol, max_iter,
                                       opt.damping);
            if (final_level) return res;
            im *= factor;
            if (im < z.imag()) im = z.imag();
        }
    };
    RefineResult res = run_ladder(opt.level_factor, opt.max_iter);
    if (!res.ok) {
        // finer continuation before giving up
        res = run_ladder(std::sqrt(opt.level_factor), 4 * opt.max_iter);
        if (!res.ok)
            throw numerical_error("subordination fixed point did not converge");
    }
    return res.w;
}

cdouble solve_characteristic(const CauchySource& src, double r, cdouble z,
                             const SubordinationOptions& opt) {
    const double R = std::max({1.0, std::abs(src.lo()), std::abs(src.hi())});
    const double im_hi = opt.im_start_factor * std::max(1.0, R);
    double im = std::max(im_hi, z.imag());
    cdouble ztop(z.real(), im);
    cdouble z0 = ztop - r / ztop;  // asymptotic root
    for (;;) {
        const bool final_level = im <= z.imag();
        const cdouble zz(z.real(), std::max(im, z.imag()));
        bool ok = false;
        for (int it = 0; it < opt.max_iter; ++it) {
            const cdouble H = z0 + r * src.g(z0) - zz;
            if (std::abs(H) <= opt.tol * std::max(1.0, std::abs(zz))) {
                ok = true;
                break;
            }
            const cdouble Hp = 1.0 + r * src.g_prime(z0);
            cdouble step = H / Hp;
            cdouble zn = z0 - step;
            int halvings = 0;
            while ((!std::isfinite(zn.real()) || !std::isfinite(zn.imag()) ||
                    zn.imag() <= 0) &&
                   halvings < 50) {
                step *= 0.5;
                zn = z0 - step;
                ++halvings;
            }
            if (zn.imag() <= 0)
                throw numerical_error(
                    "characteristic root left the upper half-plane (crossing ambiguity)");
            z0 = zn;
        }
        if (final_level) {
            if (!ok)
                throw numerical_error("characteristic solve did not converge");
            return src.g(z0);
        }
        im *= opt.level_factor;
        if (im < z.imag()) im = z.imag();
    }
}

/// Stack-allocated dilation by a positive factor (flow rescaling).
class DilatedView final : public CauchySource {
public:
    DilatedView(const CauchySource& inner, double alpha)
        : inner_(inner), alpha_(alpha) {}
    cdouble g(cdouble z) const override { return inner_.g(z / alpha_) / alpha_; }
    cdouble g_prime(cdouble z) const override {
        return inner_.g_prime(z / alpha_) / (alpha_ * alpha_);
    }
    double lo() const override { return alpha_ * inner_.lo(); }
    double hi() const override { return alpha_ * inner_.hi(); }
    double feature() const override { return alpha_ * inner_.feature(); }
    double tail_lambda() const override { return alpha_ * inner_.tail_lambda(); }

private:
    const CauchySource& inner_;
    double alpha_;
};

/// Transform of mu (+) sigma_r as a source, for boundary sampling.
class ConvolvedSource final : public CauchySource {
public:
    ConvolvedSource(SourcePtr inner, double r, SubordinationOptions opt)
        : inner_(std::move(inner)), r_(r), opt_(opt) {}
    cdouble g(cdouble z) const override {
        return free_convolve_semicircle(*inner_, r_, z, opt_);
    }
    cdouble g_prime(cdouble z) const override {
        // implicit differentiation of w = G(z - r w)
        const cdouble w = g(z);
        const cdouble gp = inner_->g_prime(z - r_ * w);
        return gp / (1.0 + r_ * gp);
    }
    double lo() const override { return inner_->lo() - 2.0 * std::sqrt(r_); }
    double hi() const override { return inner_->hi() + 2.0 * std::sqrt(r_); }
    double feature() const override {
        return inner_->feature() + 2.0 * std::sqrt(r_);
    }
    double tail_lambda() const override { return inner_->tail_lambda(); }

private:
    SourcePtr inner_;
    double r_;
    SubordinationOptions opt_;
};

}  // namespace

cdouble free_convolve_semicircle(const CauchySource& src, double r, cdouble z,
                                 const SubordinationOptions& opt) {
    if (!(z.imag() > 0)) throw spec_error("free_convolve", "Im z must be > 0");
    if (r < 0) throw spec_error("free_convolve", "r must be >= 0");
    if (r == 0) return src.g(z);
    return solve_subordination(src, r, z, opt);
}

cdouble free_convolve_semicircle(const Measure& m, double r, cdouble z,
                                 const SubordinationOptions& opt) {
    return free_convolve_semicircle(*make_source(m), r, z, opt);
}

cdouble burgers_characteristics(const CauchySource& src, double r, cdouble z,
                                const SubordinationOptions& opt) {
    if (!(z.imag() > 0)) throw spec_error("burgers_characteristics", "Im z must be > 0");
    if (r < 0) throw spec_error("burgers_characteristics", "r must be >= 0");
    if (r == 0) return src.g(z);
    return solve_characteristic(src, r, z, opt);
}

cdouble burgers_characteristics(const Measure& m, double r, cdouble z,
                                const SubordinationOptions& opt) {
    return burgers_characteristics(*make_source(m), r, z, opt);
}

cdouble flow_transform(const CauchySource& m0, double t, cdouble z,
                       const SubordinationOptions& opt) {
    if (t < 0) throw spec_error("flow", "t must be >= 0");
    if (t == 0) return m0.g(z);
    const double scale = std::exp(-0.5 * t);
    const double r = 1.0 - std::exp(-t);
    // G_{aY}(z) = a^{-1} G_Y(a^{-1} z) applied to the dilated initial law
    DilatedView view{m0, scale};
    return free_convolve_semicircle(view, r, z, opt);
}

ConvolvedDensity free_convolve_density(const SourcePtr& m0, double r,
                                       const FlowOptions& opt) {
    if (r < 0) throw spec_error("free_convolve", "r must be >= 0");
    auto conv = std::make_shared<ConvolvedSource>(m0, r, opt.solver);

    double lo, hi;
    if (opt.window_lo < opt.window_hi) {
        lo = opt.window_lo;
        hi = opt.window_hi;
    } else {
        lo = conv->lo();
        hi = conv->hi();
        const double tail = m0->tail_lambda();
        if (tail > 0) {
            const double ext = 2.0 * tail / (kPi * opt.cauchy_tail_mass);
            lo -= ext;
            hi += ext;
        }
    }
    int n = opt.n_grid;
    if (n <= 0) {
        const double feature = std::max(conv->feature(), 1e-12);
        const double h_target = feature / opt.nodes_per_feature;
        n = std::clamp(static_cast<int>(std::ceil((hi - lo) / h_target)) + 1,
                       opt.min_n, opt.max_n);
    }
    const double h0 = (hi - lo) / (n - 1);
    lo -= opt.pad_cells * h0;
    hi += opt.pad_cells * h0;
    std::vector<double> grid(n);
    const double h = (hi - lo) / (n - 1);
    for (int j = 0; j < n; ++j) grid[j] = lo + h * j;

    BoundaryTransform bt = sample_boundary(*conv, std::move(grid), opt.boundary);
    InvertOptions iopt;
    iopt.edge = m0->tail_lambda() > 0 ? EdgeModel::blunt : EdgeModel::sqrt_vanishing;
    GridMeasure measure = stieltjes_invert(bt, iopt);
    return ConvolvedDensity{std::move(measure), std::move(bt)};
}

FlowState ou_flow(const SourcePtr& m0, double t, const FlowOptions& opt) {
    if (t < 0) throw spec_error("ou_flow", "t must be >= 0");
    const double scale = std::exp(-0.5 * t);
    const double r = 1.0 - std::exp(-t);
    SourcePtr src_t = t == 0 ? m0 : dilate_source(m0, scale);
    ConvolvedDensity cd = free_convolve_density(src_t, r, opt);
    return FlowState{t, std::move(cd.measure), std::move(cd.boundary), r};
}

FlowState ou_flow(const Measure& m0, double t, const FlowOptions& opt) {
    if (t == 0) {
        if (const auto* gm = std::get_if<GridMeasure>(&m0)) {
            std::vector<double> grid(gm->n());
            for (int j = 0; j < gm->n(); ++j) grid[j] = gm->node(j);
            BoundaryTransform bt =
                sample_boundary(*make_source(*gm), std::move(grid), opt.boundary);
            return FlowState{0.0, *gm, std::move(bt), 0.0};
        }
    }
    return ou_flow(make_source(m0), t, opt);
}

std::vector<FlowState> flow_family(const SourcePtr& m0, std::span<const double> ts,
                                   FlowOptions opt) {
    if (ts.empty()) return {};
    if (!(opt.window_lo < opt.window_hi)) {
        // union window and maximal resolution across the family
        double lo = 0, hi = 0;
        int n = opt.min_n;
        bool first = true;
        for (double t : ts) {
            const double scale = std::exp(-0.5 * t);
            const double r = 1.0 - std::exp(-t);
            const double ext =
                m0->tail_lambda() > 0
                    ? 2.0 * scale * m0->tail_lambda() / (kPi * opt.cauchy_tail_mass)
                    : 0.0;
            const double l = scale * m0->lo() - 2.0 * std::sqrt(r) - ext;
            const double u = scale * m0->hi() + 2.0 * std::sqrt(r) + ext;
            const double feature =
                std::max(scale * m0->feature() + 2.0 * std::sqrt(r), 1e-12);
            const int nt = std::clamp(
                static_cast<int>(std::ceil((u - l) * opt.nodes_per_feature / feature)) + 1,
                opt.min_n, opt.max_n);
            lo = first ? l : std::min(lo, l);
            hi = first ? u : std::max(hi, u);
            n = std::max(n, nt);
            first = false;
        }
        opt.window_lo = lo;
        opt.window_hi = hi;
        opt.n_grid = n;
    }
    std::vector<FlowState> states;
    states.reserve(ts.size());
    for (double t : ts) states.push_back(ou_flow(m0, t, opt));
    return states;
}

BurgersResidual burgers_residual(const SourcePtr& m0, double t,
                                 std::span<const cdouble> zs, double dt, double dz,
                                 const SubordinationOptions& opt) {
    if (!(t > 0) || !(dt > 0) || t <= dt)
        throw spec_error("burgers_residual", "need t > dt > 0");
    BurgersResidual out;
    out.residual.resize(zs.size());
    parallel_blocks(zs.size(), 16, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const cdouble z = zs[i];
            const cdouble g0 = flow_transform(*m0, t, z, opt);
            const cdouble gtp = flow_transform(*m0, t + dt, z, opt);
            const cdouble gtm = flow_transform(*m0, t - dt, z, opt);
            const cdouble gzp = flow_transform(*m0, t, z + dz, opt);
            const cdouble gzm = flow_transform(*m0, t, z - dz, opt);
            const cdouble gt = (gtp - gtm) / (2.0 * dt);
            const cdouble gz = (gzp - gzm) / (2.0 * dz);
            out.residual[i] = gt + (g0 - z / 2.0) * gz - 0.5 * g0;
        }
    });
    for (const auto& rres : out.residual)
        out.max_abs = std::max(out.max_abs, std::abs(rres));
    return out;
}

void dump_flow_csv(std::span<const FlowState> states, std::ostream& os) {
    os << "t,x,p,hp\n";
    for (const auto& st : states) {
        const auto hp = hilbert_density(st.measure);
        for (int j = 0; j < st.measure.n(); ++j)
            os << format_sci(st.t) << ',' << format_sci(st.measure.node(j)) << ','
               << format_sci(st.measure.density()[j]) << ',' << format_sci(hp[j])
               << '\n';
    }
}

}  // namespace freeprob
