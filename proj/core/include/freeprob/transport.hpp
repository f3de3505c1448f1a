#pragma once

#include <iosfwd>

#include "freeprob/freeconv.hpp"
#include "freeprob/record.hpp"

namespace freeprob {

struct Coupling {
    enum class Kind { quantile, explicit_plan };
    struct Entry {
        double x, y, mass;
    };
    Kind kind = Kind::quantile;
    std::vector<Entry> plan;  // explicit plans only
};

/// Monotone transport map phi = F_target^{-1} o F_source, represented by a
/// pair of quantile tables pinned at the same midpoint u-nodes.
struct TransportMap {
    QuantileTable source;
    QuantileTable target;
    double operator()(double x) const;
};

/// p-Wasserstein distance via the quantile coupling
/// ( int_0^1 |q_a(u) - q_b(u)|^p du )^{1/p}.  Atomic pairs are computed
/// exactly on the merged weight partition; otherwise the integral uses the
/// midpoint rule on n_quantile nodes.
double wasserstein(const Measure& a, const Measure& b, double p = 2.0,
                   int n_quantile = kDefaultNQuantile);

/// Exact minimum over all permutation couplings of the expanded
/// equal-weight atom lists (common denominator <= 8); independent oracle
/// for the quantile value.
double brute_force_w(const AtomicMeasure& a, const AtomicMeasure& b, double p);

/// The explicit monotone coupling of two atomic laws; marginals reproduce
/// the inputs exactly.
Coupling quantile_coupling(const AtomicMeasure& a, const AtomicMeasure& b);

TransportMap monotone_map(const Measure& source, const Measure& target,
                          int n_quantile = kDefaultNQuantile);

struct TransportResidualOptions {
    int n_quantile = 1024;
    FlowOptions flow;
};

struct TransportResidual {
    std::vector<double> residual;  // signed, per quantile node
    double max_abs = 0.0;
    double mean_abs = 0.0;
};

/// Residual of  d phi_{s,t}(x)/dt = pi Hp(.,t)(phi) - phi/2  along the
/// flow, by central differences in t at the source quantile nodes.
TransportResidual transport_equation_residual(const SourcePtr& m0, double s, double t,
                                              double dt,
                                              const TransportResidualOptions& opt = {});

/// Symmetry, identity of indiscernibles and the triangle inequality over
/// all pairs/triples of the given measures at exponent p.
std::vector<VerificationRecord> metric_axiom_suite(
    const std::vector<std::pair<std::string, Measure>>& measures, double p,
    double tol = 1e-12, int n_quantile = kDefaultNQuantile);

void dump_coupling_csv(const Coupling& c, std::ostream& os);

}  // namespace freeprob
