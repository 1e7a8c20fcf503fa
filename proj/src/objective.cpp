#include "hypermax/objective.hpp"

#include <algorithm>
#include <cmath>

namespace hypermax {

ScalarDensityFn entropy_kernel() {
    ScalarDensityFn fn;
    fn.name = "entropy";
    fn.domain_lo = 0.0;
    fn.domain_hi = 1.0;
    fn.f0 = [](double x) { return x * std::log(2.0 * x) + (1.0 - x) * std::log(2.0 * (1.0 - x)); };
    fn.f0_prime = [](double x) { return std::log(x / (1.0 - x)); };
    return fn;
}

ScalarDensityFn quadratic_kernel(double c, double center) {
    ScalarDensityFn fn;
    fn.name = "quadratic";
    fn.f0 = [c, center](double x) { return c * (x - center) * (x - center); };
    fn.f0_prime = [c, center](double x) { return 2.0 * c * (x - center); };
    return fn;
}

ScalarDensityFn tabulated_kernel(std::vector<double> x, std::vector<double> f0,
                                 std::vector<double> f0_prime) {
    if (x.size() < 2 || x.size() != f0.size() || x.size() != f0_prime.size())
        raise(ErrorCode::ValidationError, "tabulated kernel needs matching samples, at least 2");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1]))
            raise(ErrorCode::ValidationError, "tabulated kernel abscissae must increase");
    ScalarDensityFn fn;
    fn.name = "tabulated";
    fn.domain_lo = x.front();
    fn.domain_hi = x.back();
    auto interp = [](const std::vector<double>& xs, const std::vector<double>& ys, double v) {
        const auto it = std::upper_bound(xs.begin(), xs.end(), v);
        const std::size_t hi = std::min(xs.size() - 1,
                                        static_cast<std::size_t>(it - xs.begin()));
        const std::size_t lo = hi == 0 ? 0 : hi - 1;
        if (hi == lo) return ys[lo];
        const double tt = (v - xs[lo]) / (xs[hi] - xs[lo]);
        return ys[lo] + tt * (ys[hi] - ys[lo]);
    };
    fn.f0 = [x, f0, interp](double v) { return interp(x, f0, v); };
    fn.f0_prime = [x, f0_prime, interp](double v) { return interp(x, f0_prime, v); };
    return fn;
}

ScalarDensityFn kernel_by_name(const std::string& name) {
    if (name == "entropy") return entropy_kernel();
    if (name == "quadratic") return quadratic_kernel(1.0, 0.0);
    raise(ErrorCode::ValidationError, "unknown objective kernel '" + name + "'");
}

double ObjectiveConfig::weight(const Signature& sig, int k) const {
    if (!relation_weights.empty()) {
        const double w = relation_weights.at(static_cast<std::size_t>(k));
        if (!(w > 0.0)) raise(ErrorCode::ValidationError, "relation weights must be positive");
        return w;
    }
    double fact = 1.0;
    for (int i = 2; i <= sig.arity(k); ++i) fact *= i;
    return 1.0 / fact;
}

ObjectiveConfig ObjectiveConfig::entropy() {
    ObjectiveConfig cfg;
    cfg.scalar_fn = entropy_kernel();
    return cfg;
}

namespace {

constexpr double kClampInset = 1e-12;

double eval_kernel(const ScalarDensityFn& fn, double x, bool clamped) {
    if (!fn.in_domain(x)) {
        if (!clamped)
            raise(ErrorCode::DomainViolation,
                  "entry " + std::to_string(x) + " outside kernel domain");
        x = std::clamp(x, fn.domain_lo + kClampInset, fn.domain_hi - kClampInset);
    }
    return fn.f0(x);
}

bool next_multi_index(std::vector<int>& idx, int m) {
    for (int pos = static_cast<int>(idx.size()) - 1; pos >= 0; --pos) {
        if (++idx[static_cast<std::size_t>(pos)] < m) return true;
        idx[static_cast<std::size_t>(pos)] = 0;
    }
    return false;
}

} // namespace

double objective_value(const ObjectiveConfig& cfg, const StepFunction& w, bool clamped) {
    const Signature& sig = w.signature();
    const int m = w.block_count();
    double total = 0.0;
    for (int k = 0; k < sig.relation_count(); ++k) {
        const double weight = cfg.weight(sig, k);
        const int d = sig.arity(k);
        std::vector<int> idx(static_cast<std::size_t>(d), 0);
        double rel_total = 0.0;
        do {
            double p = 1.0;
            for (int b : idx) p *= w.pi()[static_cast<std::size_t>(b)];
            if (p != 0.0) rel_total += eval_kernel(cfg.scalar_fn, w.at(k, idx), clamped) * p;
        } while (next_multi_index(idx, m));
        total += weight * rel_total;
    }
    return total;
}

GradientVector objective_gradient(const ObjectiveConfig& cfg, const StepFunction& w) {
    const Signature& sig = w.signature();
    const int m = w.block_count();
    GradientVector g = GradientVector::zeros(sig, m);

    for (int k = 0; k < sig.relation_count(); ++k) {
        const double weight = cfg.weight(sig, k);
        const int d = sig.arity(k);

        const auto canon = canonical_multi_indices(m, d);
        for (std::size_t ci = 0; ci < canon.size(); ++ci) {
            const double a = w.at(k, canon[ci]);
            if (!cfg.scalar_fn.in_domain(a))
                raise(ErrorCode::DomainViolation,
                      "entry " + std::to_string(a) + " outside kernel domain");
            double p = 1.0;
            for (int b : canon[ci]) p *= w.pi()[static_cast<std::size_t>(b)];
            const double orbit_size = static_cast<double>(index_orbit(canon[ci]).size());
            g.a_part[static_cast<std::size_t>(k)][ci] =
                weight * orbit_size * cfg.scalar_fn.f0_prime(a) * p;
        }

        // d f_s / d pi_i = w_k * d_k * sum over the remaining d_k-1 indices
        // of f0(A[i, rest]) * prod(pi_rest)
        std::vector<int> rest(static_cast<std::size_t>(d - 1), 0);
        std::vector<int> full(static_cast<std::size_t>(d), 0);
        for (int i = 0; i < m; ++i) {
            double total = 0.0;
            std::fill(rest.begin(), rest.end(), 0);
            while (true) {
                full[0] = i;
                std::copy(rest.begin(), rest.end(), full.begin() + 1);
                double p = 1.0;
                for (int b : rest) p *= w.pi()[static_cast<std::size_t>(b)];
                if (p != 0.0) total += eval_kernel(cfg.scalar_fn, w.at(k, full), false) * p;
                if (rest.empty() || !next_multi_index(rest, m)) break;
            }
            g.pi_part[static_cast<std::size_t>(i)] += weight * d * total;
        }
    }
    for (int i = 0; i + 1 < m; ++i)
        g.pi_reduced[static_cast<std::size_t>(i)] =
            g.pi_part[static_cast<std::size_t>(i)] - g.pi_part[static_cast<std::size_t>(m - 1)];
    return g;
}

} // namespace hypermax
