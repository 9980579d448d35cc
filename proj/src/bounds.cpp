#include "reluscan/bounds.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "reluscan/errors.hpp"
#include "reluscan/rng.hpp"

namespace reluscan {

std::uint64_t arrangement_count(long long m, long long n) {
    if (m < 0 || n < 1) throw std::invalid_argument("arrangement_count requires m >= 0, n >= 1");
    const long long top = std::min(m, n);
    unsigned __int128 total = 0;
    unsigned __int128 binom = 1; // C(m, 0)
    const unsigned __int128 limit = static_cast<unsigned __int128>(UINT64_MAX);
    for (long long i = 0; i <= top; ++i) {
        total += binom;
        if (total > limit) throw std::overflow_error("arrangement_count exceeds 64 bits");
        if (i < top) {
            binom = binom * static_cast<unsigned __int128>(m - i) / static_cast<unsigned __int128>(i + 1);
            if (binom > limit) throw std::overflow_error("arrangement_count exceeds 64 bits");
        }
    }
    return static_cast<std::uint64_t>(total);
}

DensityBound density_bound(const BoundParams& p) {
    if (p.n_neurons < 1 || p.n_in < 1 || p.T <= 0.0 || p.volume <= 0.0)
        throw std::invalid_argument("density_bound parameters must be positive");
    DensityBound out;
    double log_val;
    if (p.n_neurons >= p.n_in) {
        log_val = std::log(p.volume) + p.n_in * std::log(p.T * p.n_neurons) -
                  std::lgamma(static_cast<double>(p.n_in) + 1.0);
    } else {
        log_val = std::log(p.volume) + p.n_neurons * std::log(2.0);
    }
    out.log10_value = log_val / std::log(10.0);
    if (p.n_in >= 20 || log_val > 700.0) {
        out.value = log_val > 700.0 ? std::numeric_limits<double>::max() : std::exp(log_val);
        out.saturated = log_val > 700.0;
    } else {
        out.value = p.n_neurons >= p.n_in
                        ? p.volume * std::pow(p.T * p.n_neurons, p.n_in) /
                              std::tgamma(static_cast<double>(p.n_in) + 1.0)
                        : p.volume * std::pow(2.0, static_cast<double>(p.n_neurons));
    }
    return out;
}

double expected_count_prediction(long long n_neurons, long long n_in) {
    if (n_neurons < 1 || n_in < 1)
        throw std::invalid_argument("expected_count_prediction requires positive arguments");
    return std::exp(n_in * std::log(static_cast<double>(n_neurons)) -
                    std::lgamma(static_cast<double>(n_in) + 1.0));
}

double GradStats::grad_constant_estimate() const {
    double best = 0.0;
    for (const auto& [m, root] : moment_roots) best = std::max(best, root);
    for (double v : per_neuron_mean) best = std::max(best, v);
    return best;
}

namespace {

// Per-neuron pre-activation gradient norms at x, following the single open
// path structure: rows of the running Jacobian are zeroed where the ReLU is
// off before the next layer multiplies in.
std::vector<double> neuron_grad_norms(const Network& net, std::span<const double> x) {
    const int n_in = net.input_dim();
    ForwardResult fr = forward(net, x);
    std::vector<double> norms;
    norms.reserve(net.hidden_neuron_count());
    std::vector<double> jac; // rows x n_in, post-activation Jacobian of previous layer
    int base = 0;
    for (int l = 0; l < net.depth(); ++l) {
        const int rows = net.layer_width(l);
        const int cols = net.layer_input_dim(l);
        const auto w = net.layer_weights(l);
        std::vector<double> cur(static_cast<std::size_t>(rows) * n_in, 0.0);
        for (int i = 0; i < rows; ++i) {
            double* out = cur.data() + static_cast<std::size_t>(i) * n_in;
            const double* wrow = w.data() + static_cast<std::size_t>(i) * cols;
            if (l == 0) {
                for (int j = 0; j < n_in; ++j) out[j] = wrow[j];
            } else {
                for (int m = 0; m < cols; ++m) {
                    if (wrow[m] == 0.0) continue;
                    const double* prev = jac.data() + static_cast<std::size_t>(m) * n_in;
                    for (int j = 0; j < n_in; ++j) out[j] += wrow[m] * prev[j];
                }
            }
            double s = 0.0;
            for (int j = 0; j < n_in; ++j) s += out[j] * out[j];
            norms.push_back(std::sqrt(s));
        }
        for (int i = 0; i < rows; ++i)
            if (fr.preactivations[base + i] <= 0.0)
                std::fill_n(cur.begin() + static_cast<std::size_t>(i) * n_in, n_in, 0.0);
        base += rows;
        jac.swap(cur);
    }
    return norms;
}

} // namespace

GradStats estimate_grad_constant(const Network& net, const GradSampler& sampler, int n_samples,
                                 const std::vector<int>& moments, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
    if (!sampler.sample_x) throw std::invalid_argument("sampler.sample_x is required");
    const int n_neurons = net.hidden_neuron_count();
    GradStats stats;
    stats.per_neuron_mean.assign(n_neurons, 0.0);
    stats.per_neuron_max.assign(n_neurons, 0.0);
    std::map<int, std::vector<double>> moment_acc;
    for (int m : moments) moment_acc[m].assign(n_neurons, 0.0);

    for (int s = 0; s < n_samples; ++s) {
        Rng rng = make_rng(seed, "grad-sample", static_cast<std::uint64_t>(s));
        std::vector<double> x = sampler.sample_x(rng);
        const Network* active = &net;
        std::optional<Network> fresh;
        if (sampler.fresh_net) {
            fresh = sampler.fresh_net(substream_seed(seed, "grad-net", s));
            active = &*fresh;
        }
        // nudge off activation boundaries so the pattern is well-defined
        for (int attempt = 0; attempt < 4; ++attempt) {
            try {
                (void)pattern_at(*active, x);
                break;
            } catch (const BoundaryPointError&) {
                for (double& v : x) v += 1e-9 * (1.0 + std::abs(v));
            }
        }
        std::vector<double> norms = neuron_grad_norms(*active, x);
        for (int z = 0; z < n_neurons; ++z) {
            stats.per_neuron_mean[z] += norms[z];
            stats.per_neuron_max[z] = std::max(stats.per_neuron_max[z], norms[z]);
            for (auto& [m, acc] : moment_acc) acc[z] += std::pow(norms[z], m);
        }
    }
    for (double& v : stats.per_neuron_mean) v /= n_samples;
    for (auto& [m, acc] : moment_acc) {
        double worst = 0.0;
        for (double v : acc) worst = std::max(worst, std::pow(v / n_samples, 1.0 / m));
        stats.moment_roots[m] = worst;
    }
    stats.sample_count = n_samples;
    return stats;
}

} // namespace reluscan
