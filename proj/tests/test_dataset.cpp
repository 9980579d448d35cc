#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "reluscan/dataset.hpp"
#include "reluscan/errors.hpp"

using namespace reluscan;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    fs::path dir = fs::temp_directory_path() / "reluscan_dataset_tests";
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("memorization dataset") {
    CHECK_THROWS_AS(make_memorization_dataset(0, 2, 1), std::invalid_argument);

    Dataset a = make_memorization_dataset(64, 2, 9);
    Dataset b = make_memorization_dataset(64, 2, 9);
    CHECK(a.inputs == b.inputs);
    CHECK(a.labels == b.labels);
    CHECK(a.n_classes == 2);
    for (const auto& x : a.inputs) {
        REQUIRE(x.size() == 2);
        for (double v : x) CHECK((v >= -1.0 && v <= 1.0));
    }

    // label mean within 1% of 0.5 at 1e5 points
    Dataset big = make_memorization_dataset(100000, 2, 123);
    double mean = std::accumulate(big.labels.begin(), big.labels.end(), 0.0) / big.size();
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("label corruption") {
    Dataset ds = make_memorization_dataset(1000, 2, 3);

    SUBCASE("p = 0 changes nothing") {
        Dataset out = corrupt_labels(ds, 0.0, 2, 7);
        CHECK(out.labels == ds.labels);
    }
    SUBCASE("p = 1 with 10 classes changes about 90% of labels") {
        Dataset big = make_memorization_dataset(100000, 2, 5);
        // spread original labels over 10 classes first
        for (std::size_t i = 0; i < big.size(); ++i) big.labels[i] = static_cast<int>(i % 10);
        Dataset out = corrupt_labels(big, 1.0, 10, 11);
        double changed = 0;
        for (std::size_t i = 0; i < big.size(); ++i) changed += out.labels[i] != big.labels[i];
        CHECK(changed / big.size() == doctest::Approx(0.9).epsilon(0.012));
    }
    SUBCASE("p = 0.5 resamples exactly floor(N/2) indices") {
        // with one class, resampling forces label 0, making selections visible
        Dataset ones = ds;
        std::fill(ones.labels.begin(), ones.labels.end(), 1);
        Dataset out = corrupt_labels(ones, 0.5, 1, 13);
        long long zeros = std::count(out.labels.begin(), out.labels.end(), 0);
        CHECK(zeros == 500);
    }
    CHECK_THROWS_AS(corrupt_labels(ds, -0.1, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(corrupt_labels(ds, 1.5, 2, 1), std::invalid_argument);
}

TEST_CASE("idx round-trip on a two-image fixture") {
    fs::path dir = temp_dir();
    fs::path img = dir / "fixture-images-idx3-ubyte";
    fs::path lab = dir / "fixture-labels-idx1-ubyte";

    Dataset fixture;
    fixture.n_classes = 10;
    fixture.inputs = {{0.0, 37.0 / 255.0, 1.0, 128.0 / 255.0},
                      {255.0 / 255.0, 0.0, 9.0 / 255.0, 200.0 / 255.0}};
    fixture.labels = {3, 7};
    save_idx(fixture, img.string(), lab.string(), 2, 2);

    Dataset back = load_idx(img.string(), lab.string());
    REQUIRE(back.size() == 2);
    CHECK(back.labels == fixture.labels);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(back.inputs[i][j] == fixture.inputs[i][j]);
}

TEST_CASE("idx error paths") {
    fs::path dir = temp_dir();

    SUBCASE("wrong magic") {
        fs::path img = dir / "badmagic-images";
        fs::path lab = dir / "badmagic-labels";
        {
            std::ofstream f(img, std::ios::binary);
            const unsigned char hdr[] = {0, 0, 8, 2, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 2};
            f.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
            const unsigned char px[4] = {1, 2, 3, 4};
            f.write(reinterpret_cast<const char*>(px), 4);
        }
        {
            std::ofstream f(lab, std::ios::binary);
            const unsigned char hdr[] = {0, 0, 8, 1, 0, 0, 0, 1};
            f.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
            const unsigned char l = 0;
            f.write(reinterpret_cast<const char*>(&l), 1);
        }
        CHECK_THROWS_AS(load_idx(img.string(), lab.string()), IdxFormatError);
    }
    SUBCASE("count mismatch") {
        Dataset one;
        one.inputs = {{0.5}};
        one.labels = {1};
        fs::path img = dir / "mismatch-images";
        fs::path lab = dir / "mismatch-labels";
        save_idx(one, img.string(), lab.string(), 1, 1);
        // rewrite the label header with a different count
        std::fstream f(lab, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(4);
        const unsigned char two[4] = {0, 0, 0, 2};
        f.write(reinterpret_cast<const char*>(two), 4);
        f.close();
        CHECK_THROWS_AS(load_idx(img.string(), lab.string()), IdxFormatError);
    }
    SUBCASE("truncated payload") {
        fs::path img = dir / "trunc-images";
        fs::path lab = dir / "trunc-labels";
        Dataset two;
        two.inputs = {{0.1, 0.2}, {0.3, 0.4}};
        two.labels = {0, 1};
        save_idx(two, img.string(), lab.string(), 1, 2);
        fs::resize_file(img, 16 + 3); // header plus one and a half images
        CHECK_THROWS_AS(load_idx(img.string(), lab.string()), IdxFormatError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_idx((dir / "nope-img").string(), (dir / "nope-lab").string()),
                        IdxFormatError);
    }
}

TEST_CASE("template image dataset") {
    Dataset a = make_template_image_dataset(200, 10, 28, 28, 7);
    Dataset b = make_template_image_dataset(200, 10, 28, 28, 7);
    CHECK(a.inputs == b.inputs);
    CHECK(a.labels == b.labels);
    CHECK(a.input_dim() == 784);
    CHECK(a.n_classes == 10);
    for (const auto& x : a.inputs)
        for (double v : x) CHECK((v >= 0.0 && v <= 1.0));
    // every class appears in a sample this large
    std::vector<int> counts(10, 0);
    for (int l : a.labels) ++counts[l];
    for (int c : counts) CHECK(c > 0);
}

TEST_CASE("ensure_idx_dataset falls back to the synthetic set") {
    fs::path dir = temp_dir() / "ensure";
    fs::remove_all(dir);
    std::string got = ensure_idx_dataset("/definitely/not/here", dir.string(), 128, 5);
    CHECK(got == dir.string());
    CHECK(fs::exists(dir / "train-images-idx3-ubyte"));
    Dataset ds = load_idx((dir / "train-images-idx3-ubyte").string(),
                          (dir / "train-labels-idx1-ubyte").string());
    CHECK(ds.size() == 128);
    CHECK(ds.input_dim() == 784);

    // second call reuses the files
    auto t0 = fs::last_write_time(dir / "train-images-idx3-ubyte");
    ensure_idx_dataset("", dir.string(), 128, 5);
    CHECK(fs::last_write_time(dir / "train-images-idx3-ubyte") == t0);
}
