#pragma once

#include <iosfwd>
#include <string>

#include "freeprob/cauchy.hpp"

namespace freeprob {

/// Logarithmic energy  integral integral log|s-t| dmu(s) dmu(t).
/// The log kernel is integrated analytically over cell pairs within two
/// cells of the diagonal (density locally constant there); plain tensor
/// quadrature elsewhere.  -infinity for atomic laws.
double log_energy(const GridMeasure& m);
double log_energy(const Measure& m);

/// Free entropy: log_energy + 3/4 + (1/2) log(2 pi).  The unit-variance
/// semicircle attains the maximum 1/2 + (1/2) log(2 pi).
double chi(const Measure& m);

struct PhiResult {
    double p3_form;       // (4/3) pi^2 int p^3 dx  (primary value)
    double hilbert_form;  // 4 pi^2 int (Hp)^2 p dx (cross-check)
    double rel_gap;
};

/// Free Fisher information; the two integral expressions agree for exact
/// densities, so a gap above ~1% flags Hilbert-transform inaccuracy.
PhiResult phi_detailed(const GridMeasure& m);
double phi(const GridMeasure& m);

struct IouResult {
    double integral_form;  // 4 int (pi Hp(x) - x/2)^2 p dx
    double identity_form;  // phi - 2 + tau(X^2)
    double rel_gap;
};

/// Fisher information relative to the stationary semicircle; vanishes
/// exactly at the (0,1) semicircle.
IouResult i_ou_detailed(const GridMeasure& m);
double i_ou(const GridMeasure& m);

/// (1/2) tau(X^2) - log_energy - 3/4; nonnegative, zero only at the (0,1)
/// semicircle, +infinity for atomic laws.
double sigma_tilde(const Measure& m);

/// Finite-difference entropy derivative 2 eps^{-1} (chi(mu (+) sigma_eps)
/// - chi(mu)); approaches phi(mu) at rate O(eps).  Both entropies run
/// through the same convolve-invert pipeline on a shared window so the
/// systematic quadrature error cancels in the difference.
double phi_from_entropy_derivative(const Measure& m, double eps = 1e-3);

struct FunctionalReport {
    std::string measure_id;
    double tau_x2 = 0.0;
    double log_energy = 0.0;
    double chi = 0.0;
    double phi = 0.0;
    double i_ou = 0.0;
    double sigma_tilde = 0.0;
    double phi_consistency_gap = 0.0;
};

FunctionalReport functional_report(const std::string& id, const Measure& m);
void functional_report_csv_header(std::ostream& os);
void functional_report_csv_row(const FunctionalReport& r, std::ostream& os);

}  // namespace freeprob
