#include "freeprob/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "freeprob/freeconv.hpp"

namespace freeprob {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// F2'' = log|x|; building block of the exact log-kernel cell integrals
double f2(double x) {
    if (x == 0.0) return 0.0;
    return x * x * (2.0 * std::log(std::abs(x)) - 3.0) / 4.0;
}

}  // namespace

double log_energy(const GridMeasure& m) {
    const auto& cells = m.cell_mass();
    const std::size_t nc = cells.size();
    const double h = m.spacing();
    // pair sum organized by diagonal: E = sum_d W(d) A_d with the mass
    // autocorrelation A_d; the band |d| <= 2 uses the exact cell-pair
    // integral of the log kernel per unit density
    auto acorr = autocorrelation(cells);
    auto band_weight = [&](int d) {
        const double c =
            f2((d + 1) * h) - 2.0 * f2(d * h) + f2((d - 1) * h);
        return c / (h * h);
    };
    double e = band_weight(0) * acorr[0];
    for (std::size_t d = 1; d < nc; ++d) {
        const double w = d <= 2 ? band_weight(static_cast<int>(d))
                                : std::log(static_cast<double>(d) * h);
        e += 2.0 * w * acorr[d];
    }
    return e;
}

double log_energy(const Measure& m) {
    if (std::holds_alternative<AtomicMeasure>(m)) return -kInf;
    return log_energy(std::get<GridMeasure>(m));
}

double chi(const Measure& m) {
    const double e = log_energy(m);
    if (e == -kInf) return -kInf;
    return e + 0.75 + 0.5 * std::log(2.0 * kPi);
}

PhiResult phi_detailed(const GridMeasure& m) {
    const auto& p = m.density();
    const int n = m.n();
    std::vector<double> f(n);
    for (int j = 0; j < n; ++j) f[j] = p[j] * p[j];
    const double p3 = (4.0 / 3.0) * kPi * kPi * m.integrate_nodes(f);
    const auto hp = hilbert_density(m);
    for (int j = 0; j < n; ++j) f[j] = hp[j] * hp[j];
    const double hil = 4.0 * kPi * kPi * m.integrate_nodes(f);
    const double gap = std::abs(p3 - hil) / std::max({std::abs(p3), std::abs(hil), 1e-6});
    return {p3, hil, gap};
}

double phi(const GridMeasure& m) { return phi_detailed(m).p3_form; }

IouResult i_ou_detailed(const GridMeasure& m) {
    const auto hp = hilbert_density(m);
    const int n = m.n();
    std::vector<double> f(n);
    for (int j = 0; j < n; ++j) {
        const double v = kPi * hp[j] - 0.5 * m.node(j);
        f[j] = v * v;
    }
    const double integral = 4.0 * m.integrate_nodes(f);
    std::vector<double> p2(n);
    const auto& p = m.density();
    for (int j = 0; j < n; ++j) p2[j] = p[j] * p[j];
    const double p3 = (4.0 / 3.0) * kPi * kPi * m.integrate_nodes(p2);
    for (int j = 0; j < n; ++j) p2[j] = m.node(j) * m.node(j);
    const double tau2 = m.integrate_nodes(p2);
    const double ident = p3 - 2.0 + tau2;
    const double gap =
        std::abs(integral - ident) / std::max({std::abs(integral), std::abs(ident), 1e-6});
    return {integral, ident, gap};
}

double i_ou(const GridMeasure& m) { return i_ou_detailed(m).integral_form; }

double sigma_tilde(const Measure& m) {
    if (std::holds_alternative<AtomicMeasure>(m)) return kInf;
    const auto& gm = std::get<GridMeasure>(m);
    const double v = 0.5 * moment(m, 2) - log_energy(gm) - 0.75;
    if (v < -1e-6)
        throw numerical_error("sigma_tilde came out negative (" + std::to_string(v) +
                              "); quadrature failure");
    return v;
}

double phi_from_entropy_derivative(const Measure& m, double eps) {
    if (!(eps > 0)) throw spec_error("phi_from_entropy_derivative", "eps must be > 0");
    const SourcePtr src = make_source(m);
    FlowOptions fopt;
    // shared window sized for the widened law so both entropies see the
    // same grid and their quadrature errors cancel in the difference
    const double pad = 2.0 * std::sqrt(eps);
    fopt.window_lo = src->lo() - pad;
    fopt.window_hi = src->hi() + pad;
    if (const auto* gm = std::get_if<GridMeasure>(&m))
        fopt.n_grid = std::max(gm->n(), fopt.min_n);
    const GridMeasure nu_eps = free_convolve_density(src, eps, fopt).measure;
    const GridMeasure nu_0 = free_convolve_density(src, 0.0, fopt).measure;
    return 2.0 * (log_energy(nu_eps) - log_energy(nu_0)) / eps;
}

FunctionalReport functional_report(const std::string& id, const Measure& m) {
    FunctionalReport r;
    r.measure_id = id;
    r.tau_x2 = moment(m, 2);
    r.log_energy = log_energy(m);
    r.chi = chi(m);
    if (const auto* gm = std::get_if<GridMeasure>(&m)) {
        const auto ph = phi_detailed(*gm);
        r.phi = ph.p3_form;
        r.phi_consistency_gap = ph.rel_gap;
        r.i_ou = i_ou_detailed(*gm).integral_form;
        r.sigma_tilde = sigma_tilde(m);
    } else {
        r.phi = kInf;
        r.i_ou = kInf;
        r.sigma_tilde = kInf;
        r.phi_consistency_gap = 0.0;
    }
    return r;
}

void functional_report_csv_header(std::ostream& os) {
    os << "measure_id,tau_x2,log_energy,chi,phi,i_ou,sigma_tilde,phi_consistency_gap\n";
}

void functional_report_csv_row(const FunctionalReport& r, std::ostream& os) {
    os << r.measure_id << ',' << format_sci(r.tau_x2) << ',' << format_sci(r.log_energy)
       << ',' << format_sci(r.chi) << ',' << format_sci(r.phi) << ','
       << format_sci(r.i_ou) << ',' << format_sci(r.sigma_tilde) << ','
       << format_sci(r.phi_consistency_gap) << '\n';
}

}  // namespace freeprob
