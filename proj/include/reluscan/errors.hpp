#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace reluscan {

/// Thrown by pattern_at when a pre-activation sits within the tie tolerance
/// of zero. The caller decides how to proceed (usually by jittering the
/// query point); we never pick a sign silently.
class BoundaryPointError : public std::runtime_error {
public:
    BoundaryPointError(int neuron, double value)
        : std::runtime_error("pre-activation of neuron " + std::to_string(neuron) +
                             " is on the boundary (value " + std::to_string(value) + ")"),
          neuron_index(neuron), preactivation(value) {}
    int neuron_index;
    double preactivation;
};

/// A neuron whose functional is numerically zero on an entire cell. Such
/// points belong to no open activation region, so the enumeration refuses
/// to assign a sign and reports the event instead.
class DegenerateNeuronError : public std::runtime_error {
public:
    explicit DegenerateNeuronError(int neuron)
        : std::runtime_error("neuron " + std::to_string(neuron) +
                             " has a numerically zero functional on a whole cell"),
          neuron_index(neuron) {}
    int neuron_index;
};

/// Enumeration exceeded its configured cell budget.
class BudgetExceededError : public std::runtime_error {
public:
    BudgetExceededError(std::size_t cells, std::size_t budget, int neuron)
        : std::runtime_error("cell budget exceeded: " + std::to_string(cells) + " cells > budget " +
                             std::to_string(budget) + " while processing neuron " +
                             std::to_string(neuron)),
          cell_count(cells), budget(budget), neuron_index(neuron) {}
    std::size_t cell_count;
    std::size_t budget;
    int neuron_index;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(double epoch)
        : std::runtime_error("training diverged (non-finite loss) at epoch " + std::to_string(epoch)),
          epoch(epoch) {}
    double epoch;
};

/// Malformed IDX file (bad magic, truncated payload, count mismatch).
class IdxFormatError : public std::runtime_error {
public:
    explicit IdxFormatError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace reluscan
