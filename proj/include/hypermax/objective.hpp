#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hypermax/density.hpp"
#include "hypermax/stepfn.hpp"

namespace hypermax {

/// Scalar kernel f0 applied cellwise by a density functional, with its
/// derivative and open domain.
struct ScalarDensityFn {
    std::string name;
    double domain_lo = -std::numeric_limits<double>::infinity();
    double domain_hi = std::numeric_limits<double>::infinity();
    std::function<double(double)> f0;
    std::function<double(double)> f0_prime;

    bool in_domain(double x) const { return x > domain_lo && x < domain_hi; }
};

/// h_{1/2}(x) = x log(2x) + (1-x) log(2(1-x)) on (0,1); the per-cell kernel
/// of the rate function I. Non-negative, zero only at 1/2.
ScalarDensityFn entropy_kernel();

/// f0(x) = c (x - center)^2; the quadratic perturbation kernel.
ScalarDensityFn quadratic_kernel(double c, double center);

/// User-tabulated kernel: piecewise-linear interpolation of (x, f0, f0')
/// samples; the open domain is (x.front(), x.back()).
ScalarDensityFn tabulated_kernel(std::vector<double> x, std::vector<double> f0,
                                 std::vector<double> f0_prime);

ScalarDensityFn kernel_by_name(const std::string& name);

struct ObjectiveConfig {
    ScalarDensityFn scalar_fn;
    // One positive weight per relation; defaults (empty) mean 1/d_k!,
    // which reproduces the rate function when scalar_fn is the entropy
    // kernel.
    std::vector<double> relation_weights;

    double weight(const Signature& sig, int k) const;
    static ObjectiveConfig entropy();
};

/// f_s((A,pi)) = sum_k w_k sum_{full multi-index} f0(A_k[idx]) prod(pi).
/// Strict mode raises DomainViolation on out-of-domain entries; clamped
/// mode evaluates at clamp(x, 1e-12 inset) and is for diagnostics only.
double objective_value(const ObjectiveConfig& cfg, const StepFunction& w, bool clamped = false);

GradientVector objective_gradient(const ObjectiveConfig& cfg, const StepFunction& w);

} // namespace hypermax
