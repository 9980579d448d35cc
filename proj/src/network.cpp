#include "reluscan/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "reluscan/rng.hpp"

namespace reluscan {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

Network::Network(int input_dim, std::vector<int> widths,
                 std::vector<std::vector<double>> weights,
                 std::vector<std::vector<double>> biases)
    : input_dim_(input_dim), widths_(std::move(widths)),
      weights_(std::move(weights)), biases_(std::move(biases)) {
    require(input_dim_ >= 1, "input_dim must be >= 1");
    require(!widths_.empty(), "need at least an output layer");
    for (int w : widths_) require(w >= 1, "invalid architecture: zero layer width");
    require(weights_.size() == widths_.size() && biases_.size() == widths_.size(),
            "one weight matrix and one bias vector per layer");
    for (std::size_t l = 0; l < widths_.size(); ++l) {
        const std::size_t rows = static_cast<std::size_t>(widths_[l]);
        const std::size_t cols = static_cast<std::size_t>(layer_input_dim(static_cast<int>(l)));
        require(weights_[l].size() == rows * cols, "weight matrix shape mismatch");
        require(biases_[l].size() == rows, "bias vector length mismatch");
        require(all_finite(weights_[l]) && all_finite(biases_[l]), "non-finite parameter");
    }
}

int Network::hidden_neuron_count() const {
    int n = 0;
    for (int l = 0; l + 1 < num_layers(); ++l) n += widths_[l];
    return n;
}

std::pair<int, int> Network::locate_neuron(int neuron) const {
    int l = 0;
    while (l < depth() && neuron >= widths_[l]) {
        neuron -= widths_[l];
        ++l;
    }
    return {l, neuron};
}

Network Network::hidden_prefix(int prefix_layers) const {
    require(prefix_layers >= 1 && prefix_layers <= depth(), "prefix_layers out of range");
    std::vector<int> w(widths_.begin(), widths_.begin() + prefix_layers);
    std::vector<std::vector<double>> ws(weights_.begin(), weights_.begin() + prefix_layers);
    std::vector<std::vector<double>> bs(biases_.begin(), biases_.begin() + prefix_layers);
    w.push_back(1);
    ws.emplace_back(static_cast<std::size_t>(widths_[prefix_layers - 1]), 0.0);
    bs.emplace_back(1, 0.0);
    return Network(input_dim_, std::move(w), std::move(ws), std::move(bs));
}

Network he_init(int input_dim, const std::vector<int>& widths, const InitSpec& spec) {
    require(input_dim >= 1, "input_dim must be >= 1");
    require(!widths.empty(), "need at least an output layer");
    for (int w : widths) require(w >= 1, "invalid architecture: zero layer width");
    require(spec.weight_scale > 0.0, "weight_scale must be positive");
    require(spec.bias_std >= 0.0, "bias_std must be non-negative");

    std::vector<std::vector<double>> weights(widths.size());
    std::vector<std::vector<double>> biases(widths.size());
    for (std::size_t l = 0; l < widths.size(); ++l) {
        const int fan_in = l == 0 ? input_dim : widths[l - 1];
        const int rows = widths[l];
        const double wstd = spec.weight_scale * std::sqrt(2.0 / fan_in);
        Rng wrng = make_rng(spec.seed, "weights", l);
        Rng brng = make_rng(spec.seed, "biases", l);
        std::normal_distribution<double> normal(0.0, 1.0);
        weights[l].resize(static_cast<std::size_t>(rows) * fan_in);
        for (double& w : weights[l]) w = wstd * normal(wrng);
        biases[l].resize(rows);
        for (double& b : biases[l]) b = spec.bias_std == 0.0 ? 0.0 : spec.bias_std * normal(brng);
    }
    return Network(input_dim, widths, std::move(weights), std::move(biases));
}

ForwardResult forward(const Network& net, std::span<const double> x) {
    require(static_cast<int>(x.size()) == net.input_dim(), "input dimension mismatch");
    ForwardResult r;
    r.preactivations.reserve(net.hidden_neuron_count());
    std::vector<double> cur(x.begin(), x.end());
    std::vector<double> next;
    for (int l = 0; l < net.num_layers(); ++l) {
        const int rows = net.layer_width(l);
        const int cols = net.layer_input_dim(l);
        const auto w = net.layer_weights(l);
        const auto b = net.layer_biases(l);
        next.assign(rows, 0.0);
        for (int i = 0; i < rows; ++i) {
            double acc = b[i];
            const double* row = w.data() + static_cast<std::size_t>(i) * cols;
            for (int j = 0; j < cols; ++j) acc += row[j] * cur[j];
            next[i] = acc;
        }
        if (l + 1 < net.num_layers()) {
            for (int i = 0; i < rows; ++i) {
                r.preactivations.push_back(next[i]);
                next[i] = std::max(0.0, next[i]);
            }
        }
        cur.swap(next);
    }
    r.output = std::move(cur);
    return r;
}

ActivationPattern pattern_at(const Network& net, std::span<const double> x) {
    double xnorm = 0.0;
    for (double v : x) xnorm += v * v;
    xnorm = std::sqrt(xnorm);
    const double tie_tol = 1e-12 * (1.0 + xnorm);
    ForwardResult r = forward(net, x);
    ActivationPattern pat(r.preactivations.size());
    for (std::size_t i = 0; i < r.preactivations.size(); ++i) {
        double v = r.preactivations[i];
        if (std::abs(v) <= tie_tol) throw BoundaryPointError(static_cast<int>(i), v);
        pat[i] = v > 0.0 ? 1 : -1;
    }
    return pat;
}

std::vector<double> AffineMap::apply(std::span<const double> x) const {
    std::vector<double> out(offset);
    for (int i = 0; i < n_out; ++i) {
        const double* row = gradient.data() + static_cast<std::size_t>(i) * n_in;
        for (int j = 0; j < n_in; ++j) out[i] += row[j] * x[j];
    }
    return out;
}

AffineMap cell_affine_map(const Network& net, const ActivationPattern& pattern) {
    require(static_cast<int>(pattern.size()) == net.hidden_neuron_count(),
            "pattern length must equal the hidden neuron count");
    const int n_in = net.input_dim();
    // Running affine map from input to the current layer's post-activations,
    // rows masked to zero where the pattern says the neuron is off.
    std::vector<double> grad; // rows x n_in
    std::vector<double> off;  // rows
    int pat_base = 0;
    for (int l = 0; l < net.num_layers(); ++l) {
        const int rows = net.layer_width(l);
        const int cols = net.layer_input_dim(l);
        const auto w = net.layer_weights(l);
        const auto b = net.layer_biases(l);
        std::vector<double> g(static_cast<std::size_t>(rows) * n_in, 0.0);
        std::vector<double> o(rows, 0.0);
        for (int i = 0; i < rows; ++i) {
            const double* wrow = w.data() + static_cast<std::size_t>(i) * cols;
            double acc = b[i];
            double* grow = g.data() + static_cast<std::size_t>(i) * n_in;
            if (l == 0) {
                for (int j = 0; j < cols; ++j) grow[j] = wrow[j];
            } else {
                for (int m = 0; m < cols; ++m) {
                    const double wm = wrow[m];
                    if (wm == 0.0) continue;
                    acc += wm * off[m];
                    const double* prev = grad.data() + static_cast<std::size_t>(m) * n_in;
                    for (int j = 0; j < n_in; ++j) grow[j] += wm * prev[j];
                }
            }
            o[i] = acc;
        }
        if (l + 1 < net.num_layers()) {
            for (int i = 0; i < rows; ++i) {
                if (pattern[pat_base + i] < 0) {
                    o[i] = 0.0;
                    std::fill_n(g.begin() + static_cast<std::size_t>(i) * n_in, n_in, 0.0);
                }
            }
            pat_base += rows;
        }
        grad.swap(g);
        off.swap(o);
    }
    AffineMap m;
    m.n_in = n_in;
    m.n_out = net.output_dim();
    m.gradient = std::move(grad);
    m.offset = std::move(off);
    return m;
}

namespace {

Network map_params(const Network& net,
                   const std::function<double(int, double)>& fw,
                   const std::function<double(int, double)>& fb) {
    std::vector<std::vector<double>> ws, bs;
    ws.reserve(net.num_layers());
    bs.reserve(net.num_layers());
    for (int l = 0; l < net.num_layers(); ++l) {
        auto w = net.layer_weights(l);
        auto b = net.layer_biases(l);
        std::vector<double> wl(w.begin(), w.end());
        std::vector<double> bl(b.begin(), b.end());
        for (double& v : wl) v = fw(l, v);
        for (double& v : bl) v = fb(l, v);
        ws.push_back(std::move(wl));
        bs.push_back(std::move(bl));
    }
    return Network(net.input_dim(), net.widths(), std::move(ws), std::move(bs));
}

} // namespace

Network scale_biases(const Network& net, double c) {
    require(c > 0.0, "invalid scale: c must be positive");
    return map_params(net, [](int, double w) { return w; }, [c](int, double b) { return c * b; });
}

Network scale_weights(const Network& net, double c) {
    require(c > 0.0, "invalid scale: c must be positive");
    return map_params(net, [c](int, double w) { return c * w; }, [](int, double b) { return b; });
}

Network layerwise_scale_biases(const Network& net, double c) {
    require(c > 0.0, "invalid scale: c must be positive");
    return map_params(net, [](int, double w) { return w; },
                      [c](int l, double b) { return b / std::pow(c, l + 1); });
}

bool zero_bias_equivariance_check(const Network& net, std::span<const double> x, double c) {
    require(c > 0.0, "invalid scale: c must be positive");
    for (int l = 0; l < net.num_layers(); ++l)
        for (double b : net.layer_biases(l))
            require(b == 0.0, "zero_bias_equivariance_check requires all biases to be exactly 0");
    std::vector<double> cx(x.begin(), x.end());
    for (double& v : cx) v *= c;
    auto out_x = forward(net, x).output;
    auto out_cx = forward(net, cx).output;
    for (std::size_t i = 0; i < out_x.size(); ++i) {
        double want = c * out_x[i];
        if (std::abs(out_cx[i] - want) > 1e-9 * (1.0 + std::abs(want))) return false;
    }
    return pattern_at(net, x) == pattern_at(net, cx);
}

std::string save_network_json(const Network& net) {
    nlohmann::json j;
    j["input_dim"] = net.input_dim();
    j["widths"] = net.widths();
    nlohmann::json ws = nlohmann::json::array();
    nlohmann::json bs = nlohmann::json::array();
    for (int l = 0; l < net.num_layers(); ++l) {
        auto w = net.layer_weights(l);
        auto b = net.layer_biases(l);
        ws.push_back(std::vector<double>(w.begin(), w.end()));
        bs.push_back(std::vector<double>(b.begin(), b.end()));
    }
    j["weights"] = std::move(ws);
    j["biases"] = std::move(bs);
    return j.dump();
}

Network load_network_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    return Network(j.at("input_dim").get<int>(), j.at("widths").get<std::vector<int>>(),
                   j.at("weights").get<std::vector<std::vector<double>>>(),
                   j.at("biases").get<std::vector<std::vector<double>>>());
}

void save_network_file(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << save_network_json(net);
}

Network load_network_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_network_json(ss.str());
}

} // namespace reluscan
