#include "freeprob/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace freeprob {

namespace {

std::vector<double> compute_cells(const std::vector<double>& p, double h, EdgeModel edge) {
    const std::size_t n = p.size();
    std::vector<double> cells(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k)
        cells[k] = 0.5 * h * (p[k] + p[k + 1]);
    if (edge == EdgeModel::sqrt_vanishing && n >= 3) {
        // p ~ C sqrt(u) near the edge with C fixed by the adjacent node:
        // integral over the edge cell is (2/3) h p_1 instead of (1/2) h p_1.
        cells.front() = (2.0 / 3.0) * h * p[1];
        cells.back() = (2.0 / 3.0) * h * p[n - 2];
    }
    return cells;
}

}  // namespace

GridMeasure GridMeasure::make(double lo, double hi, std::vector<double> density,
                              const Options& opt) {
    GridMeasure m;
    if (!(lo < hi)) throw spec_error("grid", "support_lo must be < support_hi");
    if (density.size() < 16) throw spec_error("grid", "n_grid must be >= 16");
    if (!(opt.mass_tol > 0)) throw spec_error("grid", "total_mass_tolerance must be > 0");
    for (double v : density) {
        if (!(v >= 0) || !std::isfinite(v))
            throw spec_error("grid", "density values must be finite and >= 0");
    }
    if (opt.edge == EdgeModel::sqrt_vanishing) {
        // the sqrt model presumes vanishing endpoints; tolerate rounding dust
        const double peak = *std::max_element(density.begin(), density.end());
        if (density.front() > 1e-9 * peak || density.back() > 1e-9 * peak)
            throw spec_error("grid", "sqrt_vanishing edges require zero endpoint density");
        density.front() = 0.0;
        density.back() = 0.0;
    }
    m.lo_ = lo;
    m.hi_ = hi;
    m.h_ = (hi - lo) / static_cast<double>(density.size() - 1);
    m.edge_ = opt.edge;
    m.mass_tol_ = opt.mass_tol;
    m.density_ = std::move(density);

    auto cells = compute_cells(m.density_, m.h_, m.edge_);
    double total = std::accumulate(cells.begin(), cells.end(), 0.0);
    if (std::abs(total - 1.0) > opt.mass_tol)
        throw spec_error("grid", "density mass " + std::to_string(total) +
                                     " deviates from 1 beyond tolerance " +
                                     std::to_string(opt.mass_tol));
    if (opt.renormalize && total > 0) {
        const double s = 1.0 / total;
        for (double& v : m.density_) v *= s;
        for (double& v : cells) v *= s;
        m.renorm_ = s;
    }
    m.cells_ = std::move(cells);
    m.cum_.resize(m.density_.size());
    m.cum_[0] = 0.0;
    for (std::size_t k = 0; k + 1 < m.cum_.size(); ++k)
        m.cum_[k + 1] = m.cum_[k] + m.cells_[k];
    // pin the endpoint against accumulated rounding
    m.cum_.back() = 1.0;
    return m;
}

double GridMeasure::integrate_nodes(std::span<const double> f) const {
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < density_.size(); ++k)
        acc += cells_[k] * 0.5 * (f[k] + f[k + 1]);
    return acc;
}

AtomicMeasure AtomicMeasure::make(std::vector<Atom> atoms, double weight_tol) {
    if (atoms.empty()) throw spec_error("atoms", "at least one atom required");
    for (const auto& a : atoms) {
        if (!(a.w > 0) || !std::isfinite(a.w) || !std::isfinite(a.x))
            throw spec_error("atoms", "atom weights must be positive and finite");
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.x < b.x; });
    std::vector<Atom> merged;
    for (const auto& a : atoms) {
        if (!merged.empty() && a.x == merged.back().x)
            merged.back().w += a.w;
        else
            merged.push_back(a);
    }
    double total = 0.0;
    for (const auto& a : merged) total += a.w;
    if (std::abs(total - 1.0) > weight_tol)
        throw spec_error("atoms", "weights sum to " + std::to_string(total) +
                                      ", expected 1");
    for (auto& a : merged) a.w /= total;
    AtomicMeasure m;
    m.atoms_ = std::move(merged);
    return m;
}

GridMeasure semicircle(double center, double variance, int n_grid) {
    if (!(variance > 0)) throw spec_error("semicircle", "variance must be > 0");
    const double radius = 2.0 * std::sqrt(variance);
    const double lo = center - radius, hi = center + radius;
    std::vector<double> p(n_grid);
    const double h = (hi - lo) / (n_grid - 1);
    for (int j = 0; j < n_grid; ++j) {
        const double x = lo + h * j - center;
        const double d = 4.0 * variance - x * x;
        p[j] = d > 0 ? std::sqrt(d) / (2.0 * kPi * variance) : 0.0;
    }
    GridMeasure::Options opt;
    opt.edge = EdgeModel::sqrt_vanishing;
    return GridMeasure::make(lo, hi, std::move(p), opt);
}

GridMeasure uniform_measure(double a, double b, int n_grid) {
    if (!(a < b)) throw spec_error("uniform", "need a < b");
    std::vector<double> p(n_grid, 1.0 / (b - a));
    return GridMeasure::make(a, b, std::move(p));
}

GridMeasure grid_from_function(double lo, double hi, int n_grid,
                               const std::function<double(double)>& p,
                               EdgeModel edge) {
    std::vector<double> d(n_grid);
    const double h = (hi - lo) / (n_grid - 1);
    for (int j = 0; j < n_grid; ++j) d[j] = std::max(0.0, p(lo + h * j));
    GridMeasure::Options opt;
    opt.edge = edge;
    if (edge == EdgeModel::sqrt_vanishing) {
        d.front() = 0.0;
        d.back() = 0.0;
    }
    return GridMeasure::make(lo, hi, std::move(d), opt);
}

double cdf(const GridMeasure& m, double a) {
    if (a <= m.lo()) return 0.0;
    if (a >= m.hi()) return 1.0;
    const double pos = (a - m.lo()) / m.spacing();
    const int k = std::min(static_cast<int>(pos), m.n() - 2);
    const double frac = pos - k;
    return m.cumulative()[k] + frac * m.cell_mass()[k];
}

double cdf(const AtomicMeasure& m, double a) {
    double acc = 0.0;
    for (const auto& at : m.atoms()) {
        if (at.x <= a) acc += at.w;
        else break;
    }
    return acc;
}

double cdf(const Measure& m, double a) {
    return std::visit([a](const auto& mm) { return cdf(mm, a); }, m);
}

double quantile(const GridMeasure& m, double u) {
    if (u <= 0.0) return m.lo();
    if (u >= 1.0) return m.hi();
    const auto& cum = m.cumulative();
    // first node with cumulative >= u, then invert the cell linearly
    auto it = std::lower_bound(cum.begin(), cum.end(), u);
    int k = static_cast<int>(it - cum.begin());
    if (k == 0) return m.lo();
    --k;  // u lies in cell k = [node k, node k+1]
    const double mk = m.cell_mass()[k];
    if (mk <= 0.0) return m.node(k + 1);
    const double frac = (u - cum[k]) / mk;
    return m.node(k) + m.spacing() * std::min(1.0, std::max(0.0, frac));
}

double quantile(const AtomicMeasure& m, double u) {
    if (u <= 0.0) return m.atoms().front().x;
    double acc = 0.0;
    for (const auto& at : m.atoms()) {
        acc += at.w;
        if (acc >= u - 1e-15) return at.x;
    }
    return m.atoms().back().x;
}

double quantile(const Measure& m, double u) {
    return std::visit([u](const auto& mm) { return quantile(mm, u); }, m);
}

QuantileTable quantile_table(const Measure& m, int n_quantile) {
    if (n_quantile < 2) throw spec_error("quantile_table", "n_quantile must be >= 2");
    QuantileTable t;
    t.values.resize(n_quantile);
    for (int k = 0; k < n_quantile; ++k)
        t.values[k] = quantile(m, (k + 0.5) / n_quantile);
    return t;
}

double moment(const Measure& m, int k) {
    if (k < 0) throw spec_error("moment", "order must be >= 0");
    if (k == 0) return 1.0;
    if (const auto* am = std::get_if<AtomicMeasure>(&m)) {
        double acc = 0.0;
        for (const auto& a : am->atoms()) acc += a.w * std::pow(a.x, k);
        return acc;
    }
    const auto& gm = std::get<GridMeasure>(m);
    std::vector<double> f(gm.n());
    for (int j = 0; j < gm.n(); ++j) f[j] = std::pow(gm.node(j), k);
    return gm.integrate_nodes(f);
}

double measure_mean(const Measure& m) { return moment(m, 1); }

double measure_variance(const Measure& m) {
    const double mu = moment(m, 1);
    return moment(m, 2) - mu * mu;
}

GridMeasure dilate(const GridMeasure& m, double alpha) {
    if (alpha == 0.0)
        throw spec_error("dilate", "alpha must be nonzero (a point mass is not a grid measure)");
    std::vector<double> p = m.density();
    const double s = 1.0 / std::abs(alpha);
    for (double& v : p) v *= s;
    double lo = alpha * m.lo(), hi = alpha * m.hi();
    if (alpha < 0) {
        std::reverse(p.begin(), p.end());
        std::swap(lo, hi);
    }
    GridMeasure::Options opt;
    opt.edge = m.edge();
    opt.mass_tol = m.mass_tol();
    return GridMeasure::make(lo, hi, std::move(p), opt);
}

AtomicMeasure dilate(const AtomicMeasure& m, double alpha) {
    if (alpha == 0.0) throw spec_error("dilate", "alpha must be nonzero");
    std::vector<Atom> atoms = m.atoms();
    for (auto& a : atoms) a.x *= alpha;
    return AtomicMeasure::make(std::move(atoms));
}

Measure dilate(const Measure& m, double alpha) {
    return std::visit([alpha](const auto& mm) -> Measure { return dilate(mm, alpha); }, m);
}

double support_lo(const Measure& m) {
    return std::visit([](const auto& mm) { return mm.lo(); }, m);
}

double support_hi(const Measure& m) {
    return std::visit([](const auto& mm) { return mm.hi(); }, m);
}

}  // namespace freeprob
