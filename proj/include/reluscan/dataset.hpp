#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace reluscan {

struct Dataset {
    std::vector<std::vector<double>> inputs;
    std::vector<int> labels;
    int n_classes = 0;
    std::string name;
    std::uint64_t seed = 0;

    std::size_t size() const { return inputs.size(); }
    int input_dim() const { return inputs.empty() ? 0 : static_cast<int>(inputs.front().size()); }
};

/// Inputs i.i.d. uniform on [-1,1]^input_dim, labels i.i.d. uniform {0,1}.
Dataset make_memorization_dataset(int n_points, int input_dim, std::uint64_t seed);

/// Resamples the labels of a uniformly chosen floor(p*N)-subset uniformly
/// from all classes (a resample may coincide with the original label).
Dataset corrupt_labels(const Dataset& ds, double p, int n_classes, std::uint64_t seed);

/// Parses an IDX image/label file pair (big-endian magics 0x803 / 0x801);
/// pixels are scaled to [0,1].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Writes a dataset whose inputs are rows*cols pixel vectors in [0,1] back
/// to the IDX pair format.
void save_idx(const Dataset& ds, const std::string& images_path, const std::string& labels_path,
              int rows, int cols);

/// Deterministic stand-in for handwritten-digit data when the real files are
/// not available: each class is a smooth random template plus pixel noise,
/// so uncorrupted labels are learnable while corrupted ones require
/// memorization. Images are `rows x cols` in [0,1].
Dataset make_template_image_dataset(int n_points, int n_classes, int rows, int cols,
                                    std::uint64_t seed);

/// Returns a directory containing an IDX pair (train-images-idx3-ubyte,
/// train-labels-idx1-ubyte), preferring `preferred_dir` when the files exist
/// there and otherwise generating the synthetic stand-in under fallback_dir.
std::string ensure_idx_dataset(const std::string& preferred_dir, const std::string& fallback_dir,
                               int synth_points = 10000, std::uint64_t synth_seed = 7);

} // namespace reluscan
