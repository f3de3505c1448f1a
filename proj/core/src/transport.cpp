#include "freeprob/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace freeprob {

namespace {

double pow_cost(double d, double p) {
    d = std::abs(d);
    if (p == 1.0) return d;
    if (p == 2.0) return d * d;
    return std::pow(d, p);
}

/// Segments of the common refinement of two atomic quantile functions.
template <typename Fn>
void merged_partition(const AtomicMeasure& a, const AtomicMeasure& b, Fn&& fn) {
    const auto& xa = a.atoms();
    const auto& xb = b.atoms();
    std::size_t i = 0, j = 0;
    double ca = xa[0].w, cb = xb[0].w, prev = 0.0;
    for (;;) {
        const double next = std::min(ca, cb);
        fn(xa[i].x, xb[j].x, next - prev);
        prev = next;
        if (prev >= 1.0 - 1e-15) break;
        if (ca <= next + 1e-15 && i + 1 < xa.size()) ca += xa[++i].w;
        if (cb <= next + 1e-15 && j + 1 < xb.size()) cb += xb[++j].w;
        if (ca <= prev && i + 1 >= xa.size()) break;
    }
}

}  // namespace

double TransportMap::operator()(double x) const {
    const auto& s = source.values;
    const auto& t = target.values;
    if (x <= s.front()) return t.front();
    if (x >= s.back()) return t.back();
    auto it = std::lower_bound(s.begin(), s.end(), x);
    std::size_t k = static_cast<std::size_t>(it - s.begin());
    // interpolate within the bracketing source quantiles
    const double x1 = s[k - 1], x2 = s[k];
    if (x2 <= x1) return t[k];
    const double w = (x - x1) / (x2 - x1);
    return t[k - 1] + w * (t[k] - t[k - 1]);
}

double wasserstein(const Measure& a, const Measure& b, double p, int n_quantile) {
    if (!(p >= 1.0)) throw spec_error("wasserstein", "p must be >= 1");
    const auto* aa = std::get_if<AtomicMeasure>(&a);
    const auto* ab = std::get_if<AtomicMeasure>(&b);
    if (aa && ab) {
        double acc = 0.0;
        merged_partition(*aa, *ab, [&](double x, double y, double mass) {
            acc += mass * pow_cost(x - y, p);
        });
        return std::pow(acc, 1.0 / p);
    }
    double acc = 0.0;
    for (int k = 0; k < n_quantile; ++k) {
        const double u = (k + 0.5) / n_quantile;
        acc += pow_cost(quantile(a, u) - quantile(b, u), p);
    }
    return std::pow(acc / n_quantile, 1.0 / p);
}

double brute_force_w(const AtomicMeasure& a, const AtomicMeasure& b, double p) {
    if (!(p >= 1.0)) throw spec_error("brute_force_w", "p must be >= 1");
    // smallest common denominator D <= 8 turning both laws into D
    // equal-weight atoms
    auto expands = [](const AtomicMeasure& m, int d) {
        for (const auto& at : m.atoms()) {
            const double c = at.w * d;
            if (std::abs(c - std::round(c)) > 1e-9 * d) return false;
        }
        return true;
    };
    int d = 0;
    for (int cand = 1; cand <= 8; ++cand) {
        if (expands(a, cand) && expands(b, cand)) {
            d = cand;
            break;
        }
    }
    if (d == 0)
        throw spec_error("brute_force_w",
                         "weights do not expand to <= 8 equal-weight atoms");
    auto expand = [&](const AtomicMeasure& m) {
        std::vector<double> xs;
        for (const auto& at : m.atoms()) {
            const int c = static_cast<int>(std::round(at.w * d));
            xs.insert(xs.end(), c, at.x);
        }
        return xs;
    };
    const std::vector<double> xs = expand(a);
    std::vector<double> ys = expand(b);
    std::sort(ys.begin(), ys.end());
    double best = std::numeric_limits<double>::infinity();
    do {
        double acc = 0.0;
        for (int i = 0; i < d; ++i) acc += pow_cost(xs[i] - ys[i], p);
        best = std::min(best, acc);
    } while (std::next_permutation(ys.begin(), ys.end()));
    return std::pow(best / d, 1.0 / p);
}

Coupling quantile_coupling(const AtomicMeasure& a, const AtomicMeasure& b) {
    Coupling c;
    c.kind = Coupling::Kind::explicit_plan;
    merged_partition(a, b, [&](double x, double y, double mass) {
        if (mass > 0) c.plan.push_back({x, y, mass});
    });
    return c;
}

TransportMap monotone_map(const Measure& source, const Measure& target,
                          int n_quantile) {
    if (std::holds_alternative<AtomicMeasure>(source))
        throw spec_error("monotone_map",
                         "atomic source rejected: the monotone map may not exist");
    TransportMap map{quantile_table(source, n_quantile),
                     quantile_table(target, n_quantile)};
    return map;
}

TransportResidual transport_equation_residual(const SourcePtr& m0, double s, double t,
                                              double dt,
                                              const TransportResidualOptions& opt) {
    if (!(0 < s && s < t)) throw spec_error("transport_residual", "need 0 < s < t");
    if (!(dt > 0) || t - dt <= s)
        throw spec_error("transport_residual", "need 0 < dt < t - s");
    const double ts[4] = {s, t - dt, t, t + dt};
    auto states = flow_family(m0, std::span<const double>(ts, 4), opt.flow);
    const auto& st_s = states[0];
    const auto& st_m = states[1];
    const auto& st_0 = states[2];
    const auto& st_p = states[3];
    DensityModel model_t(st_0.measure);
    TransportResidual out;
    out.residual.resize(opt.n_quantile);
    double sum = 0.0;
    for (int k = 0; k < opt.n_quantile; ++k) {
        const double u = (k + 0.5) / opt.n_quantile;
        // phi_{s,tau}(q_s(u)) = q_tau(u): quantile coupling along the flow
        const double phi0 = quantile(st_0.measure, u);
        const double dphi =
            (quantile(st_p.measure, u) - quantile(st_m.measure, u)) / (2.0 * dt);
        const double rhs = kPi * model_t.hilbert_at(phi0) - 0.5 * phi0;
        out.residual[k] = dphi - rhs;
        out.max_abs = std::max(out.max_abs, std::abs(out.residual[k]));
        sum += std::abs(out.residual[k]);
    }
    (void)st_s;
    out.mean_abs = sum / opt.n_quantile;
    return out;
}

std::vector<VerificationRecord> metric_axiom_suite(
    const std::vector<std::pair<std::string, Measure>>& measures, double p, double tol,
    int n_quantile) {
    if (measures.size() < 3)
        throw spec_error("metric_axiom_suite", "need at least 3 measures");
    const std::size_t n = measures.size();
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j)
                w[i][j] = wasserstein(measures[i].second, measures[j].second, p,
                                      n_quantile);
    std::vector<VerificationRecord> recs;
    const std::string pstr = "p=" + std::to_string(p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            recs.push_back(VerificationRecord::identity(
                "metric_symmetry", "Thm. 1.3",
                measures[i].first + "|" + measures[j].first, pstr, w[i][j], w[j][i],
                tol));
            // identity of indiscernibles: equal quantile tables iff W ~ 0
            const auto qa = quantile_table(measures[i].second, n_quantile);
            const auto qb = quantile_table(measures[j].second, n_quantile);
            double sup = 0.0;
            for (int k = 0; k < n_quantile; ++k)
                sup = std::max(sup, std::abs(qa.values[k] - qb.values[k]));
            if (sup < 1e-9)
                recs.push_back(VerificationRecord::identity(
                    "metric_indiscernible", "Thm. 1.3",
                    measures[i].first + "|" + measures[j].first, pstr, w[i][j], 0.0,
                    tol));
            else
                recs.push_back(VerificationRecord::inequality(
                    "metric_indiscernible", "Thm. 1.3",
                    measures[i].first + "|" + measures[j].first, pstr, 1e-9, w[i][j],
                    tol));
        }
    for (std::size_t i = 0; i < n; ++i) {
        recs.push_back(VerificationRecord::identity(
            "metric_identity_self", "Thm. 1.3", measures[i].first, pstr,
            wasserstein(measures[i].second, measures[i].second, p, n_quantile), 0.0,
            tol));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                if (i == j || j == k || i == k) continue;
                recs.push_back(VerificationRecord::inequality(
                    "metric_triangle", "Thm. 1.3",
                    measures[i].first + "|" + measures[j].first + "|" +
                        measures[k].first,
                    pstr, w[i][k], w[i][j] + w[j][k], tol));
            }
    return recs;
}

void dump_coupling_csv(const Coupling& c, std::ostream& os) {
    os << "x,y,mass\n";
    for (const auto& e : c.plan)
        os << format_sci(e.x) << ',' << format_sci(e.y) << ',' << format_sci(e.mass)
           << '\n';
}

}  // namespace freeprob
