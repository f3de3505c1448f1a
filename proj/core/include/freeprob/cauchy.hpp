#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "freeprob/measure.hpp"

namespace freeprob {

/// Provider of the Cauchy transform G(z) = integral d mu(x) / (z - x) of a
/// probability law, analytic on the upper half-plane with Im G < 0.
/// Atomic laws, the semicircle and uniform families, dilations, mixtures
/// and Cauchy-smoothed laws all have exact transforms; grid data falls
/// back to closed-form cell quadrature.
class CauchySource {
public:
    virtual ~CauchySource() = default;
    virtual cdouble g(cdouble z) const = 0;
    virtual cdouble g_prime(cdouble z) const = 0;
    /// Window outside which the density is negligible (exact support for
    /// compactly supported laws).
    virtual double lo() const = 0;
    virtual double hi() const = 0;
    /// Smallest length scale of density features; 0 for atoms and jumps.
    virtual double feature() const = 0;
    /// Total Cauchy smoothing width lambda; the density then has
    /// lambda/(pi x^2) tails beyond the nominal window.
    virtual double tail_lambda() const { return 0.0; }
};

using SourcePtr = std::shared_ptr<const CauchySource>;

/// Piecewise model of a grid density: linear between nodes, with the cells
/// nearest a sqrt_vanishing edge modelled as sqrt(u) * (linear in u).
/// All Cauchy-kernel cell integrals are closed forms, so G(x + i*eps) is
/// available for every eps >= 0, the eps = 0 real part being the principal
/// value.  Model error is O(h^2 log h) uniformly in eps.
class DensityModel {
public:
    explicit DensityModel(const GridMeasure& m, int sqrt_edge_cells = 64);

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    int n() const { return static_cast<int>(p_.size()); }
    double spacing() const { return h_; }

    /// Model density at x (0 outside the window).
    double value(double x) const;

    /// G(z) for Im z > 0; O(n) closed-form cell sum.
    cdouble g(cdouble z) const;
    cdouble g_prime(cdouble z) const;

    /// G(x_j + i*eps) at every grid node via FFT correlation; O(n log n).
    std::vector<cdouble> g_on_grid(double eps) const;

    /// (1/pi) PV integral p(y)/(x-y) dy at one interior point.
    double hilbert_at(double x) const;
    /// Hilbert transform at every node; FFT plus edge-cell corrections.
    std::vector<double> hilbert_on_grid() const;

private:
    struct SqrtCell {
        double u_l, u_r;  // offsets from the edge
        double gA, gB;    // density = sqrt(u) * (gA + gB u)
    };
    cdouble cell_complex(int k, cdouble z) const;
    double cell_pv_subtracted(int k, double x, double px) const;

    double lo_ = 0, hi_ = 0, h_ = 0;
    std::vector<double> p_;
    std::vector<double> a_, b_;  // linear cell coefficients
    int k_edge_ = 0;             // sqrt-modelled cells per vanishing edge
    std::vector<SqrtCell> left_, right_;
};

/// Boundary values G(x_j + i*eps) on a real grid, optionally with a second
/// level at eps/2 for linear Richardson extrapolation toward the axis.
struct BoundaryTransform {
    std::vector<double> grid;
    double epsilon = 0.0;
    std::vector<cdouble> g_values;       // at x_j + i eps
    std::vector<cdouble> g_values_half;  // at x_j + i eps/2
    bool extrapolated = false;

    cdouble boundary(std::size_t j) const {
        return extrapolated ? 2.0 * g_values_half[j] - g_values[j] : g_values[j];
    }
};

struct BoundaryOptions {
    /// Sampling height; 0 selects the near-axis default 1e-9 * max(1, |window|).
    double eps = 0.0;
    bool two_level = true;
};

BoundaryTransform sample_boundary(const CauchySource& src, std::vector<double> grid,
                                  const BoundaryOptions& opt = {});

struct InvertOptions {
    EdgeModel edge = EdgeModel::sqrt_vanishing;
    /// Extrapolated mass farther than this from 1 signals an upstream
    /// solver failure (atoms, wrong window, diverged fixed point).
    double mass_tol = 0.01;
};

/// Density p = -(1/pi) Im G at the axis, clipped at 0 and renormalized;
/// the renormalization factor is recorded on the returned measure.
GridMeasure stieltjes_invert(const BoundaryTransform& bt, const InvertOptions& opt = {});

/// G(z) of a measure;  Im z > 0 required.
cdouble cauchy_transform(const Measure& m, cdouble z);

/// Hilbert transform of the density at the grid nodes, normalized so that
/// Hp(x) = (1/pi) Re G(x + i0);  for the (0,1) semicircle Hp(x) = x/(2 pi).
std::vector<double> hilbert_density(const GridMeasure& m);
/// Same at a single interior point.
double hilbert_at(const GridMeasure& m, double x);

struct SmoothOptions {
    /// Window truncation: extend until the density falls below this.
    double density_threshold = 1e-5;
    double nodes_per_lambda = 32.0;
    int min_n = kDefaultNGrid;
    int max_n = 49152;
};

struct SmoothedMeasure {
    GridMeasure measure;
    double truncated_mass;  // mass outside the represented window
};

/// Cauchy convolution P_lambda * mu, materialized on a truncated window.
/// Node densities are exact: the transform of the smoothed law is the
/// original transform shifted up by i*lambda.
SmoothedMeasure cauchy_smooth(const Measure& m, double lambda, const SmoothOptions& opt = {});

SourcePtr make_source(const Measure& m);
SourcePtr make_source(const GridMeasure& m);
SourcePtr make_source(const AtomicMeasure& m);
SourcePtr semicircle_source(double center, double variance);
SourcePtr uniform_source(double a, double b);
SourcePtr dilate_source(SourcePtr inner, double alpha);
SourcePtr smooth_source(SourcePtr inner, double lambda);
SourcePtr mix_source(std::vector<std::pair<double, SourcePtr>> components);

/// CSV dump: x, Re G, Im G, eps — one row per level per node.
void dump_boundary_csv(const BoundaryTransform& bt, std::ostream& os);

}  // namespace freeprob
