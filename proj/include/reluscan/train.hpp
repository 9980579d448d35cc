#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "reluscan/dataset.hpp"
#include "reluscan/network.hpp"

namespace reluscan {

enum class Loss { CrossEntropy, Mse };

struct TrainConfig {
    double lr = 1e-3;
    int batch_size = 128;
    double epochs = 1.0;
    Loss loss = Loss::CrossEntropy;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    /// Checkpoints in epoch units; fractional values give sub-epoch
    /// checkpoints. Empty selects {0, epochs}.
    std::vector<double> checkpoint_schedule;
    std::uint64_t seed = 0;
};

struct Checkpoint {
    double epoch = 0.0;
    double train_accuracy = 0.0;
    double train_loss = 0.0;
    /// Deep, immutable snapshot; safe to hand to other threads.
    std::shared_ptr<const Network> net;
};

struct TrainTrace {
    std::vector<Checkpoint> checkpoints;
    std::shared_ptr<const Network> final_net;
};

using CheckpointHook = std::function<void(const Checkpoint&)>;

/// Mini-batch Adam on the whole dataset with seeded per-epoch shuffling.
/// The ReLU subgradient at exactly 0 is taken to be 0. Raises
/// DivergenceError when the loss turns non-finite.
TrainTrace train(const Network& initial, const Dataset& ds, const TrainConfig& cfg,
                 const CheckpointHook& hook = {});

/// Mean loss and accuracy of a network on a dataset.
std::pair<double, double> evaluate(const Network& net, const Dataset& ds, Loss loss);

/// Max relative error between backprop and central differences over
/// `n_probes` randomly chosen parameters. Probes whose perturbation crosses
/// an activation boundary are redrawn.
double finite_difference_gradcheck(const Network& net, const Dataset& ds, int n_probes,
                                   std::uint64_t seed, Loss loss = Loss::CrossEntropy);

} // namespace reluscan
