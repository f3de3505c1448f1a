#pragma once

#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "freeprob/common.hpp"

namespace freeprob {

inline constexpr int kDefaultNGrid = 4096;
inline constexpr int kDefaultNQuantile = 16384;
inline constexpr double kDefaultMassTol = 1e-5;

/// How the density behaves at the ends of its grid window.  Densities
/// obtained by semicircular free convolution vanish like sqrt(distance)
/// at the support edges; modelling that explicitly removes the dominant
/// O(h^{3/2}) quadrature error of the first and last cell.
enum class EdgeModel { blunt, sqrt_vanishing };

/// A compactly supported probability measure given by density values at
/// uniform grid nodes on [lo, hi].  Immutable after construction; the
/// density is renormalized so the cell masses sum to one exactly, and
/// the applied factor is kept in renormalization().
class GridMeasure {
public:
    struct Options {
        EdgeModel edge = EdgeModel::blunt;
        double mass_tol = kDefaultMassTol;
        /// Scale the density to unit mass (on by default).  When off, the
        /// raw mass must still be within mass_tol of one.
        bool renormalize = true;
    };

    static GridMeasure make(double lo, double hi, std::vector<double> density,
                            const Options& opt = {});

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double spacing() const { return h_; }
    int n() const { return static_cast<int>(density_.size()); }
    double node(int j) const { return lo_ + h_ * j; }
    const std::vector<double>& density() const { return density_; }
    EdgeModel edge() const { return edge_; }
    double mass_tol() const { return mass_tol_; }
    /// Factor the raw density was multiplied by to reach unit mass.
    double renormalization() const { return renorm_; }

    /// Per-cell masses (n-1 entries).  Interior cells carry the trapezoid
    /// mass h*(p_l+p_r)/2; under sqrt_vanishing edges the first and last
    /// cell carry the exact integral of the local sqrt model.
    const std::vector<double>& cell_mass() const { return cells_; }
    /// Cumulative cell masses at the nodes; front() = 0, back() = 1.
    const std::vector<double>& cumulative() const { return cum_; }

    /// sum_cells m_k * (f_l + f_r)/2 for f sampled at the grid nodes.
    double integrate_nodes(std::span<const double> f) const;

private:
    GridMeasure() = default;
    double lo_ = 0, hi_ = 1, h_ = 0;
    std::vector<double> density_;
    std::vector<double> cells_, cum_;
    EdgeModel edge_ = EdgeModel::blunt;
    double mass_tol_ = kDefaultMassTol;
    double renorm_ = 1.0;
};

struct Atom {
    double x;
    double w;
};

/// A purely atomic probability measure.  Canonical form: locations
/// strictly increasing, duplicate locations merged, weights normalized.
class AtomicMeasure {
public:
    static AtomicMeasure make(std::vector<Atom> atoms, double weight_tol = 1e-12);

    const std::vector<Atom>& atoms() const { return atoms_; }
    double lo() const { return atoms_.front().x; }
    double hi() const { return atoms_.back().x; }

private:
    AtomicMeasure() = default;
    std::vector<Atom> atoms_;
};

using Measure = std::variant<GridMeasure, AtomicMeasure>;

/// Inverse-CDF values q(u_k) at the midpoint nodes u_k = (k + 1/2)/n.
struct QuantileTable {
    std::vector<double> values;
    int n() const { return static_cast<int>(values.size()); }
};

/// (0,variance) semicircle law shifted to `center`: density
/// sqrt(4v - (x-c)^2) / (2 pi v) on [c - 2 sqrt(v), c + 2 sqrt(v)].
GridMeasure semicircle(double center, double variance, int n_grid = kDefaultNGrid);

/// Uniform law on [a, b].
GridMeasure uniform_measure(double a, double b, int n_grid = kDefaultNGrid);

/// Samples a density function at uniform nodes and normalizes.
GridMeasure grid_from_function(double lo, double hi, int n_grid,
                               const std::function<double(double)>& p,
                               EdgeModel edge = EdgeModel::blunt);

double cdf(const GridMeasure& m, double a);
double cdf(const AtomicMeasure& m, double a);
double cdf(const Measure& m, double a);

/// inf{ x : F(x) >= u } for u in (0, 1); clamps at the support bounds.
double quantile(const GridMeasure& m, double u);
double quantile(const AtomicMeasure& m, double u);
double quantile(const Measure& m, double u);

QuantileTable quantile_table(const Measure& m, int n_quantile);

double moment(const Measure& m, int k);
double measure_mean(const Measure& m);
double measure_variance(const Measure& m);

GridMeasure dilate(const GridMeasure& m, double alpha);
AtomicMeasure dilate(const AtomicMeasure& m, double alpha);
Measure dilate(const Measure& m, double alpha);

double support_lo(const Measure& m);
double support_hi(const Measure& m);

}  // namespace freeprob
