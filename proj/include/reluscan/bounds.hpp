#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "reluscan/network.hpp"
#include "reluscan/rng.hpp"

namespace reluscan {

/// Exact number of connected components cut out of R^n by m generic
/// hyperplanes: sum_{i=0..min(m,n)} C(m,i). Throws std::overflow_error if
/// the value does not fit in 64 bits.
std::uint64_t arrangement_count(long long m, long long n);

struct BoundParams {
    long long n_neurons = 0;
    long long n_in = 0;
    double T = 1.0;       ///< order-one constant; 1 matches the depth-1 value
    double C_bias = 0.0;  ///< reported only, not used numerically
    double volume = 1.0;  ///< window volume
};

struct DensityBound {
    double value = 0.0;
    bool saturated = false; ///< true when the value overflowed a double
    double log10_value = 0.0;
};

/// Expected-regions cap per window: volume * (T*n_neurons)^n_in / n_in! when
/// n_neurons >= n_in, else volume * 2^n_neurons. Evaluated in log space for
/// large inputs.
DensityBound density_bound(const BoundParams& p);

/// n_neurons^n_in / n_in!, the depth-1 value that the count concentrates on.
double expected_count_prediction(long long n_neurons, long long n_in);

struct GradStats {
    std::vector<double> per_neuron_mean; ///< mean of |grad z(x)| per hidden neuron
    std::vector<double> per_neuron_max;
    /// m -> max over neurons of (E |grad z|^m)^(1/m); the largest is the
    /// empirical gradient-constant estimate.
    std::map<int, double> moment_roots;
    long long sample_count = 0;

    double grad_constant_estimate() const;
};

struct GradSampler {
    /// Draws one input point.
    std::function<std::vector<double>(Rng&)> sample_x;
    /// Optional: draws a fresh network per sample, making the estimate an
    /// average over network randomness rather than over inputs only.
    std::function<Network(std::uint64_t)> fresh_net;
};

/// Empirical moments of per-neuron pre-activation gradient norms, computed
/// from the fixed-pattern affine map at each sampled point. Points that land
/// on an activation boundary are jittered.
GradStats estimate_grad_constant(const Network& net, const GradSampler& sampler, int n_samples,
                                 const std::vector<int>& moments, std::uint64_t seed);

} // namespace reluscan
