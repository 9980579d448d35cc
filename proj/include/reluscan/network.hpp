#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reluscan/errors.hpp"

namespace reluscan {

/// Sign convention, used by every module: the pre-activation of neuron i in
/// layer l is  a_i = W_l(i,:) . x_below + b_l(i)  and the ReLU fires iff
/// a_i > 0. Networks that threshold at the bias instead store the negated
/// bias here.

/// One sign in {-1,+1} per hidden neuron, layer-major.
using ActivationPattern = std::vector<std::int8_t>;

struct InitSpec {
    double weight_scale = 1.0; ///< multiplier on the variance-2/fan-in baseline
    double bias_std = 0.0;
    std::uint64_t seed = 0;
};

/// Fully-connected ReLU network. `widths` lists the hidden layer widths
/// followed by the output width; the output layer has no ReLU. Immutable
/// after construction and safe to share across threads.
class Network {
public:
    Network(int input_dim, std::vector<int> widths,
            std::vector<std::vector<double>> weights,
            std::vector<std::vector<double>> biases);

    int input_dim() const { return input_dim_; }
    int output_dim() const { return widths_.back(); }
    /// Number of hidden layers.
    int depth() const { return static_cast<int>(widths_.size()) - 1; }
    int num_layers() const { return static_cast<int>(widths_.size()); }
    int layer_width(int layer) const { return widths_[layer]; }
    int layer_input_dim(int layer) const { return layer == 0 ? input_dim_ : widths_[layer - 1]; }
    const std::vector<int>& widths() const { return widths_; }

    /// Hidden neurons only; the output layer has no ReLU.
    int hidden_neuron_count() const;

    /// Row-major (layer_width x layer_input_dim) weight matrix of one layer.
    std::span<const double> layer_weights(int layer) const { return weights_[layer]; }
    std::span<const double> layer_biases(int layer) const { return biases_[layer]; }
    double weight(int layer, int row, int col) const {
        return weights_[layer][static_cast<std::size_t>(row) * layer_input_dim(layer) + col];
    }
    double bias(int layer, int row) const { return biases_[layer][row]; }

    /// Layer and in-layer index of a layer-major hidden neuron index.
    std::pair<int, int> locate_neuron(int neuron) const;

    /// The first `prefix_layers` hidden layers with a zero 1-wide output layer
    /// attached; used for partition-refinement checks.
    Network hidden_prefix(int prefix_layers) const;

private:
    int input_dim_;
    std::vector<int> widths_;
    std::vector<std::vector<double>> weights_;
    std::vector<std::vector<double>> biases_;
};

/// He-style initialization: weights i.i.d. normal with variance
/// weight_scale^2 * 2/fan-in, biases i.i.d. normal with std bias_std.
/// Each layer draws from its own substream of spec.seed.
Network he_init(int input_dim, const std::vector<int>& widths, const InitSpec& spec);

struct ForwardResult {
    std::vector<double> output;
    std::vector<double> preactivations; ///< hidden neurons, layer-major
};

ForwardResult forward(const Network& net, std::span<const double> x);

/// Sign of every hidden pre-activation at x. Pre-activations within
/// 1e-12*(1+|x|) of zero raise BoundaryPointError; callers must perturb.
ActivationPattern pattern_at(const Network& net, std::span<const double> x);

/// Affine map x -> gradient*x + offset of the network on the open region
/// with the given pattern. gradient is row-major (output_dim x input_dim).
struct AffineMap {
    int n_in = 0;
    int n_out = 0;
    std::vector<double> gradient;
    std::vector<double> offset;

    std::vector<double> apply(std::span<const double> x) const;
};

AffineMap cell_affine_map(const Network& net, const ActivationPattern& pattern);

/// All biases multiplied by c; satisfies N(x) = scaled(cx)/c.
Network scale_biases(const Network& net, double c);

/// All weights multiplied by c.
Network scale_weights(const Network& net, double c);

/// Bias of hidden/output layer k (1-based) divided by c^k.
Network layerwise_scale_biases(const Network& net, double c);

/// For a zero-bias network: checks N(cx) = cN(x) and equal patterns at x, cx.
bool zero_bias_equivariance_check(const Network& net, std::span<const double> x, double c);

/// JSON round-trip; loaded networks reproduce forward outputs exactly.
std::string save_network_json(const Network& net);
Network load_network_json(const std::string& text);
void save_network_file(const Network& net, const std::string& path);
Network load_network_file(const std::string& path);

} // namespace reluscan
