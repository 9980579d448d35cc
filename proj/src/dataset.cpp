#include "reluscan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "reluscan/errors.hpp"
#include "reluscan/rng.hpp"

namespace reluscan {

Dataset make_memorization_dataset(int n_points, int input_dim, std::uint64_t seed) {
    if (n_points < 1) throw std::invalid_argument("n_points must be >= 1");
    if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
    Dataset ds;
    ds.n_classes = 2;
    ds.name = "memorize" + std::to_string(input_dim) + "d";
    ds.seed = seed;
    Rng xrng = make_rng(seed, "memorize-inputs");
    Rng yrng = make_rng(seed, "memorize-labels");
    std::uniform_real_distribution<double> ux(-1.0, 1.0);
    std::uniform_int_distribution<int> uy(0, 1);
    ds.inputs.resize(n_points);
    ds.labels.resize(n_points);
    for (int i = 0; i < n_points; ++i) {
        ds.inputs[i].resize(input_dim);
        for (double& v : ds.inputs[i]) v = ux(xrng);
        ds.labels[i] = uy(yrng);
    }
    return ds;
}

Dataset corrupt_labels(const Dataset& ds, double p, int n_classes, std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("corruption fraction must be in [0,1]");
    if (n_classes < 1) throw std::invalid_argument("n_classes must be >= 1");
    Dataset out = ds;
    out.n_classes = std::max(out.n_classes, n_classes);
    const std::size_t n_corrupt = static_cast<std::size_t>(std::floor(p * ds.size()));
    if (n_corrupt == 0) return out;
    std::vector<std::size_t> idx(ds.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = make_rng(seed, "corrupt");
    std::shuffle(idx.begin(), idx.end(), rng);
    std::uniform_int_distribution<int> label(0, n_classes - 1);
    for (std::size_t i = 0; i < n_corrupt; ++i) out.labels[idx[i]] = label(rng);
    return out;
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw IdxFormatError("truncated IDX header: " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

} // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw IdxFormatError("cannot open " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw IdxFormatError("cannot open " + labels_path);

    const std::uint32_t img_magic = read_be32(img, images_path);
    if (img_magic != 0x00000803u)
        throw IdxFormatError("bad image magic in " + images_path + ": expected 0x803");
    const std::uint32_t n_images = read_be32(img, images_path);
    const std::uint32_t rows = read_be32(img, images_path);
    const std::uint32_t cols = read_be32(img, images_path);

    const std::uint32_t lab_magic = read_be32(lab, labels_path);
    if (lab_magic != 0x00000801u)
        throw IdxFormatError("bad label magic in " + labels_path + ": expected 0x801");
    const std::uint32_t n_labels = read_be32(lab, labels_path);
    if (n_images != n_labels)
        throw IdxFormatError("image/label count mismatch: " + std::to_string(n_images) + " vs " +
                             std::to_string(n_labels));

    const std::size_t dim = static_cast<std::size_t>(rows) * cols;
    Dataset ds;
    ds.name = "idx";
    ds.inputs.resize(n_images);
    ds.labels.resize(n_images);
    std::vector<unsigned char> buf(dim);
    for (std::uint32_t i = 0; i < n_images; ++i) {
        if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(dim)))
            throw IdxFormatError("truncated image payload in " + images_path);
        ds.inputs[i].resize(dim);
        for (std::size_t j = 0; j < dim; ++j) ds.inputs[i][j] = buf[j] / 255.0;
        unsigned char l;
        if (!lab.read(reinterpret_cast<char*>(&l), 1))
            throw IdxFormatError("truncated label payload in " + labels_path);
        ds.labels[i] = l;
    }
    ds.n_classes = ds.labels.empty() ? 0 : *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
    ds.n_classes = std::max(ds.n_classes, 10); // digit files may omit classes in small subsets
    return ds;
}

void save_idx(const Dataset& ds, const std::string& images_path, const std::string& labels_path,
              int rows, int cols) {
    if (ds.input_dim() != rows * cols) throw std::invalid_argument("rows*cols must equal input_dim");
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("cannot open " + images_path + " for writing");
    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("cannot open " + labels_path + " for writing");
    write_be32(img, 0x00000803u);
    write_be32(img, static_cast<std::uint32_t>(ds.size()));
    write_be32(img, static_cast<std::uint32_t>(rows));
    write_be32(img, static_cast<std::uint32_t>(cols));
    write_be32(lab, 0x00000801u);
    write_be32(lab, static_cast<std::uint32_t>(ds.size()));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (double v : ds.inputs[i]) {
            double clamped = std::clamp(v, 0.0, 1.0);
            unsigned char byte = static_cast<unsigned char>(std::lround(clamped * 255.0));
            img.write(reinterpret_cast<const char*>(&byte), 1);
        }
        unsigned char l = static_cast<unsigned char>(ds.labels[i]);
        lab.write(reinterpret_cast<const char*>(&l), 1);
    }
}

Dataset make_template_image_dataset(int n_points, int n_classes, int rows, int cols,
                                    std::uint64_t seed) {
    if (n_points < 1 || n_classes < 2 || rows < 1 || cols < 1)
        throw std::invalid_argument("invalid template dataset parameters");
    const int dim = rows * cols;

    // Smooth class templates: a few random Gaussian bumps per class.
    std::vector<std::vector<double>> templates(n_classes, std::vector<double>(dim, 0.0));
    Rng trng = make_rng(seed, "templates");
    std::uniform_real_distribution<double> upos(0.15, 0.85);
    std::uniform_real_distribution<double> uwidth(0.08, 0.2);
    for (int c = 0; c < n_classes; ++c) {
        for (int bump = 0; bump < 3; ++bump) {
            double cx = upos(trng) * cols, cy = upos(trng) * rows;
            double sx = uwidth(trng) * cols, sy = uwidth(trng) * rows;
            for (int r = 0; r < rows; ++r) {
                for (int q = 0; q < cols; ++q) {
                    double dx = (q - cx) / sx, dy = (r - cy) / sy;
                    templates[c][r * cols + q] += std::exp(-0.5 * (dx * dx + dy * dy));
                }
            }
        }
        for (double& v : templates[c]) v = std::min(1.0, v);
    }

    Dataset ds;
    ds.n_classes = n_classes;
    ds.name = "template-images";
    ds.seed = seed;
    ds.inputs.resize(n_points);
    ds.labels.resize(n_points);
    Rng rng = make_rng(seed, "samples");
    std::uniform_int_distribution<int> ulabel(0, n_classes - 1);
    std::normal_distribution<double> noise(0.0, 0.12);
    for (int i = 0; i < n_points; ++i) {
        int c = ulabel(rng);
        ds.labels[i] = c;
        ds.inputs[i].resize(dim);
        for (int j = 0; j < dim; ++j)
            ds.inputs[i][j] = std::clamp(templates[c][j] + noise(rng), 0.0, 1.0);
    }
    return ds;
}

std::string ensure_idx_dataset(const std::string& preferred_dir, const std::string& fallback_dir,
                               int synth_points, std::uint64_t synth_seed) {
    namespace fs = std::filesystem;
    const char* img_name = "train-images-idx3-ubyte";
    const char* lab_name = "train-labels-idx1-ubyte";
    if (!preferred_dir.empty() && fs::exists(fs::path(preferred_dir) / img_name) &&
        fs::exists(fs::path(preferred_dir) / lab_name))
        return preferred_dir;
    fs::create_directories(fallback_dir);
    fs::path img = fs::path(fallback_dir) / img_name;
    fs::path lab = fs::path(fallback_dir) / lab_name;
    if (!fs::exists(img) || !fs::exists(lab)) {
        Dataset ds = make_template_image_dataset(synth_points, 10, 28, 28, synth_seed);
        save_idx(ds, img.string(), lab.string(), 28, 28);
    }
    return fallback_dir;
}

} // namespace reluscan
