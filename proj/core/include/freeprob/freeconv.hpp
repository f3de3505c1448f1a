#pragma once

#include <iosfwd>
#include <span>

#include "freeprob/cauchy.hpp"

namespace freeprob {

struct SubordinationOptions {
    double tol = 1e-13;
    int max_iter = 400;
    double damping = 0.5;          // Picard fallback step
    double level_factor = 0.25;    // geometric descent of Im z
    double im_start_factor = 8.0;  // continuation starts at 8 max(1, radius)
};

/// G_{mu (+) sigma_r}(z): the unique lower-half-plane solution of the
/// subordination equation w = G_mu(z - r w), by Newton iteration with
/// damped-Picard fallback and continuation from large Im z.
cdouble free_convolve_semicircle(const CauchySource& src, double r, cdouble z,
                                 const SubordinationOptions& opt = {});
cdouble free_convolve_semicircle(const Measure& m, double r, cdouble z,
                                 const SubordinationOptions& opt = {});

/// The same function through the characteristics of the complex Burgers
/// equation: solves z = z0 + r G_mu(z0) for z0 in the upper half-plane
/// (root branch continued from Im z -> infinity) and returns G_mu(z0).
cdouble burgers_characteristics(const CauchySource& src, double r, cdouble z,
                                const SubordinationOptions& opt = {});
cdouble burgers_characteristics(const Measure& m, double r, cdouble z,
                                const SubordinationOptions& opt = {});

/// G_{X(t)}(z) for X(t) = e^{-t/2} X + (1 - e^{-t})^{1/2} S.
cdouble flow_transform(const CauchySource& m0, double t, cdouble z,
                       const SubordinationOptions& opt = {});

struct FlowOptions {
    int n_grid = 0;  // 0: choose from the density feature scale
    int min_n = kDefaultNGrid;
    int max_n = 49152;
    double nodes_per_feature = 24.0;
    double pad_cells = 5.0;
    /// Fixed window override when window_lo < window_hi.
    double window_lo = 0.0, window_hi = 0.0;
    /// Window budget for lambda/(pi x^2) tails of smoothed laws.
    double cauchy_tail_mass = 1e-3;
    BoundaryOptions boundary;
    SubordinationOptions solver;
};

struct FlowState {
    double t;
    GridMeasure measure;
    BoundaryTransform boundary;
    double r_effective;  // 1 - e^{-t}
};

struct ConvolvedDensity {
    GridMeasure measure;
    BoundaryTransform boundary;
};

/// Density of mu (+) sigma_r by subordination plus Stieltjes inversion.
/// r = 0 inverts the source transform itself.
ConvolvedDensity free_convolve_density(const SourcePtr& m0, double r,
                                       const FlowOptions& opt = {});

/// Law of X(t): dilation of the initial law by e^{-t/2}, free convolution
/// with a semicircle of variance 1 - e^{-t}, Stieltjes inversion.
FlowState ou_flow(const SourcePtr& m0, double t, const FlowOptions& opt = {});
FlowState ou_flow(const Measure& m0, double t, const FlowOptions& opt = {});

/// Flow states sharing one window and grid so time differences of derived
/// quantities are not polluted by window changes.
std::vector<FlowState> flow_family(const SourcePtr& m0, std::span<const double> ts,
                                   FlowOptions opt = {});

struct BurgersResidual {
    std::vector<cdouble> residual;
    double max_abs = 0.0;
};

/// Residual of  dG/dt + (G - z/2) dG/dz - G/2  by central differences,
/// evaluated at the given z nodes (Im z bounded away from 0).
BurgersResidual burgers_residual(const SourcePtr& m0, double t,
                                 std::span<const cdouble> zs, double dt = 1e-3,
                                 double dz = 1e-3,
                                 const SubordinationOptions& opt = {});

/// CSV dump: t, x, p(x,t), Hp(x,t); one block per state.
void dump_flow_csv(std::span<const FlowState> states, std::ostream& os);

}  // namespace freeprob
