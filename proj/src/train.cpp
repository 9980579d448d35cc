#include "reluscan/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "reluscan/errors.hpp"
#include "reluscan/rng.hpp"

namespace reluscan {

namespace {

struct Params {
    std::vector<std::vector<double>> w, b;

    static Params from(const Network& net) {
        Params p;
        p.w.resize(net.num_layers());
        p.b.resize(net.num_layers());
        for (int l = 0; l < net.num_layers(); ++l) {
            auto wl = net.layer_weights(l);
            auto bl = net.layer_biases(l);
            p.w[l].assign(wl.begin(), wl.end());
            p.b[l].assign(bl.begin(), bl.end());
        }
        return p;
    }

    Params zeros_like() const {
        Params z;
        z.w.resize(w.size());
        z.b.resize(b.size());
        for (std::size_t l = 0; l < w.size(); ++l) {
            z.w[l].assign(w[l].size(), 0.0);
            z.b[l].assign(b[l].size(), 0.0);
        }
        return z;
    }

    Network to_network(const Network& like) const {
        return Network(like.input_dim(), like.widths(), w, b);
    }
};

struct Workspace {
    std::vector<std::vector<double>> acts;    // acts[l] = input to layer l
    std::vector<std::vector<double>> preacts; // preacts[l] = pre-activation of layer l
    std::vector<std::vector<double>> deltas;
};

void forward_ws(const Network& like, const Params& p, std::span<const double> x, Workspace& ws) {
    const int L = like.num_layers();
    ws.acts.resize(L + 1);
    ws.preacts.resize(L);
    ws.acts[0].assign(x.begin(), x.end());
    for (int l = 0; l < L; ++l) {
        const int rows = like.layer_width(l);
        const int cols = like.layer_input_dim(l);
        ws.preacts[l].assign(rows, 0.0);
        for (int i = 0; i < rows; ++i) {
            const double* wrow = p.w[l].data() + static_cast<std::size_t>(i) * cols;
            double acc = p.b[l][i];
            for (int j = 0; j < cols; ++j) acc += wrow[j] * ws.acts[l][j];
            ws.preacts[l][i] = acc;
        }
        ws.acts[l + 1] = ws.preacts[l];
        if (l + 1 < L)
            for (double& v : ws.acts[l + 1]) v = std::max(0.0, v);
    }
}

// dloss/dlogits and the sample loss for one example.
double loss_grad_at_output(Loss loss, const std::vector<double>& out, int label,
                           std::vector<double>& dout) {
    const std::size_t n = out.size();
    dout.assign(n, 0.0);
    if (loss == Loss::CrossEntropy) {
        double mx = *std::max_element(out.begin(), out.end());
        double z = 0.0;
        for (double v : out) z += std::exp(v - mx);
        double logz = std::log(z) + mx;
        for (std::size_t i = 0; i < n; ++i) dout[i] = std::exp(out[i] - logz);
        dout[label] -= 1.0;
        return logz - out[label];
    }
    double l = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double t = static_cast<int>(i) == label ? 1.0 : 0.0;
        dout[i] = out[i] - t;
        l += 0.5 * (out[i] - t) * (out[i] - t);
    }
    return l;
}

// Accumulates the gradient of one sample's loss into g. Returns the loss.
double backward_sample(const Network& like, const Params& p, std::span<const double> x, int label,
                       Loss loss, Params& g, Workspace& ws) {
    const int L = like.num_layers();
    forward_ws(like, p, x, ws);
    ws.deltas.resize(L);
    double sample_loss = loss_grad_at_output(loss, ws.acts[L], label, ws.deltas[L - 1]);
    for (int l = L - 1; l >= 0; --l) {
        const int rows = like.layer_width(l);
        const int cols = like.layer_input_dim(l);
        const std::vector<double>& delta = ws.deltas[l];
        for (int i = 0; i < rows; ++i) {
            const double d = delta[i];
            if (d != 0.0) {
                double* grow = g.w[l].data() + static_cast<std::size_t>(i) * cols;
                for (int j = 0; j < cols; ++j) grow[j] += d * ws.acts[l][j];
                g.b[l][i] += d;
            }
        }
        if (l > 0) {
            std::vector<double>& below = ws.deltas[l - 1];
            below.assign(cols, 0.0);
            for (int i = 0; i < rows; ++i) {
                const double d = delta[i];
                if (d == 0.0) continue;
                const double* wrow = p.w[l].data() + static_cast<std::size_t>(i) * cols;
                for (int j = 0; j < cols; ++j) below[j] += d * wrow[j];
            }
            // ReLU subgradient, 0 at exactly-0 pre-activations
            for (int j = 0; j < cols; ++j)
                if (ws.preacts[l - 1][j] <= 0.0) below[j] = 0.0;
        }
    }
    return sample_loss;
}

struct Adam {
    Params m, v;
    long long t = 0;

    explicit Adam(const Params& like) : m(like.zeros_like()), v(like.zeros_like()) {}

    void step(Params& p, const Params& g, const TrainConfig& cfg) {
        ++t;
        const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
        auto update = [&](std::vector<double>& theta, std::vector<double>& mm,
                          std::vector<double>& vv, const std::vector<double>& gg) {
            for (std::size_t i = 0; i < theta.size(); ++i) {
                mm[i] = cfg.beta1 * mm[i] + (1.0 - cfg.beta1) * gg[i];
                vv[i] = cfg.beta2 * vv[i] + (1.0 - cfg.beta2) * gg[i] * gg[i];
                theta[i] -= cfg.lr * (mm[i] / c1) / (std::sqrt(vv[i] / c2) + cfg.adam_eps);
            }
        };
        for (std::size_t l = 0; l < p.w.size(); ++l) {
            update(p.w[l], m.w[l], v.w[l], g.w[l]);
            update(p.b[l], m.b[l], v.b[l], g.b[l]);
        }
    }
};

} // namespace

std::pair<double, double> evaluate(const Network& net, const Dataset& ds, Loss loss) {
    double total_loss = 0.0;
    long long correct = 0;
    std::vector<double> dout;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto out = forward(net, ds.inputs[i]).output;
        total_loss += loss_grad_at_output(loss, out, ds.labels[i], dout);
        int argmax = static_cast<int>(std::max_element(out.begin(), out.end()) - out.begin());
        if (argmax == ds.labels[i]) ++correct;
    }
    const double n = static_cast<double>(ds.size());
    return {total_loss / n, correct / n};
}

TrainTrace train(const Network& initial, const Dataset& ds, const TrainConfig& cfg,
                 const CheckpointHook& hook) {
    if (ds.size() == 0) throw std::invalid_argument("empty dataset");
    if (initial.input_dim() != ds.input_dim())
        throw std::invalid_argument("network input_dim does not match the dataset");
    if (cfg.lr <= 0.0 || cfg.batch_size < 1 || cfg.epochs < 0.0)
        throw std::invalid_argument("invalid training configuration");

    const long long steps_per_epoch =
        (static_cast<long long>(ds.size()) + cfg.batch_size - 1) / cfg.batch_size;
    const long long total_steps = std::llround(cfg.epochs * static_cast<double>(steps_per_epoch));

    std::vector<double> schedule = cfg.checkpoint_schedule;
    if (schedule.empty()) {
        schedule = {0.0};
        if (cfg.epochs > 0.0) schedule.push_back(cfg.epochs);
    }
    if (!std::is_sorted(schedule.begin(), schedule.end()))
        throw std::invalid_argument("checkpoint schedule must be sorted");
    for (double e : schedule)
        if (e < 0.0 || e > cfg.epochs + 1e-12)
            throw std::invalid_argument("checkpoint outside [0, epochs]");
    std::vector<long long> checkpoint_steps(schedule.size());
    for (std::size_t i = 0; i < schedule.size(); ++i)
        checkpoint_steps[i] = std::min<long long>(
            total_steps, std::llround(schedule[i] * static_cast<double>(steps_per_epoch)));

    Params p = Params::from(initial);
    Adam adam(p);
    Workspace ws;
    TrainTrace trace;
    std::size_t next_cp = 0;

    auto emit_checkpoints = [&](long long step) {
        while (next_cp < checkpoint_steps.size() && checkpoint_steps[next_cp] == step) {
            Network snap = p.to_network(initial);
            auto [l, a] = evaluate(snap, ds, cfg.loss);
            Checkpoint cp;
            cp.epoch = schedule[next_cp];
            cp.train_loss = l;
            cp.train_accuracy = a;
            cp.net = std::make_shared<Network>(std::move(snap));
            if (hook) hook(cp);
            trace.checkpoints.push_back(std::move(cp));
            ++next_cp;
        }
    };

    emit_checkpoints(0);
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    long long step = 0;
    for (long long epoch = 0; step < total_steps; ++epoch) {
        Rng shuffle_rng = make_rng(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (long long bstart = 0; bstart < static_cast<long long>(ds.size()) && step < total_steps;
             bstart += cfg.batch_size) {
            const long long bend =
                std::min<long long>(bstart + cfg.batch_size, static_cast<long long>(ds.size()));
            Params g = p.zeros_like();
            double batch_loss = 0.0;
            for (long long s = bstart; s < bend; ++s)
                batch_loss += backward_sample(initial, p, ds.inputs[order[s]], ds.labels[order[s]],
                                              cfg.loss, g, ws);
            const double inv = 1.0 / static_cast<double>(bend - bstart);
            batch_loss *= inv;
            if (!std::isfinite(batch_loss))
                throw DivergenceError(static_cast<double>(step) / steps_per_epoch);
            for (auto& wl : g.w)
                for (double& v : wl) v *= inv;
            for (auto& bl : g.b)
                for (double& v : bl) v *= inv;
            adam.step(p, g, cfg);
            ++step;
            emit_checkpoints(step);
        }
    }
    trace.final_net = trace.checkpoints.empty() || checkpoint_steps.back() != total_steps
                          ? std::make_shared<const Network>(p.to_network(initial))
                          : trace.checkpoints.back().net;
    return trace;
}

double finite_difference_gradcheck(const Network& net, const Dataset& ds, int n_probes,
                                   std::uint64_t seed, Loss loss) {
    if (n_probes < 1) throw std::invalid_argument("n_probes must be >= 1");
    Params p = Params::from(net);
    Params g = p.zeros_like();
    Workspace ws;
    for (std::size_t i = 0; i < ds.size(); ++i)
        backward_sample(net, p, ds.inputs[i], ds.labels[i], loss, g, ws);

    auto total_loss = [&](const Params& q) {
        Network n2 = q.to_network(net);
        double total = 0.0;
        std::vector<double> dout;
        for (std::size_t i = 0; i < ds.size(); ++i)
            total += loss_grad_at_output(loss, forward(n2, ds.inputs[i]).output, ds.labels[i], dout);
        return total;
    };
    auto patterns_of = [&](const Params& q) {
        Network n2 = q.to_network(net);
        std::vector<ActivationPattern> pats;
        pats.reserve(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) pats.push_back(pattern_at(n2, ds.inputs[i]));
        return pats;
    };

    // flat index space over all weights and biases
    std::size_t n_params = 0;
    for (std::size_t l = 0; l < p.w.size(); ++l) n_params += p.w[l].size() + p.b[l].size();

    Rng rng = make_rng(seed, "gradcheck");
    std::uniform_int_distribution<std::size_t> pick(0, n_params - 1);
    double max_rel = 0.0;
    int done = 0;
    for (int attempt = 0; attempt < n_probes * 20 && done < n_probes; ++attempt) {
        std::size_t flat = pick(rng);
        int layer = 0;
        bool is_bias = false;
        std::size_t idx = flat;
        for (std::size_t l = 0; l < p.w.size(); ++l) {
            if (idx < p.w[l].size()) { layer = static_cast<int>(l); break; }
            idx -= p.w[l].size();
            if (idx < p.b[l].size()) { layer = static_cast<int>(l); is_bias = true; break; }
            idx -= p.b[l].size();
        }
        double& slot = is_bias ? p.b[layer][idx] : p.w[layer][idx];
        const double orig = slot;
        const double h = 1e-5 * (1.0 + std::abs(orig));
        double bp = is_bias ? g.b[layer][idx] : g.w[layer][idx];
        try {
            slot = orig + h;
            auto pat_plus = patterns_of(p);
            double lp = total_loss(p);
            slot = orig - h;
            if (patterns_of(p) != pat_plus) { slot = orig; continue; } // crossed a kink; redraw
            double lm = total_loss(p);
            slot = orig;
            double fd = (lp - lm) / (2.0 * h);
            double rel = std::abs(fd - bp) / std::max({std::abs(fd), std::abs(bp), 1e-10});
            max_rel = std::max(max_rel, rel);
            ++done;
        } catch (const BoundaryPointError&) {
            slot = orig; // probe sat on a boundary; redraw
        }
    }
    if (done < n_probes)
        throw std::runtime_error("could not find enough kink-free probes for the gradient check");
    return max_rel;
}

} // namespace reluscan
