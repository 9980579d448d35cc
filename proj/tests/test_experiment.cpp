#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "reluscan/experiment.hpp"
#include "reluscan/rng.hpp"
#include "reluscan/svg.hpp"

using namespace reluscan;
namespace fs = std::filesystem;

namespace {

Network hat_net() {
    return Network(1, {2, 1}, {{1.0, 1.0}, {1.0, -2.0}}, {{0.0, -1.0}, {0.0}});
}

std::size_t count_substr(const std::string& hay, const std::string& needle) {
    std::size_t count = 0, pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

fs::path temp_dir(const std::string& leaf) {
    fs::path dir = fs::temp_directory_path() / "reluscan_experiment_tests" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("slice builders") {
    SUBCASE("axis pair through the origin") {
        AffineSlice s = slice_through_points(std::vector<double>{1, 0, 0},
                                             std::vector<double>{0, 1, 0});
        CHECK(s.basis[0] == std::vector<double>{1, 0, 0});
        CHECK(s.basis[1] == std::vector<double>{0, 1, 0});
        for (double v : s.origin) CHECK(v == 0.0);
    }
    SUBCASE("collinear points are degenerate") {
        std::vector<double> p{0.3, -0.7, 0.2};
        std::vector<double> q{0.6, -1.4, 0.4};
        CHECK_THROWS_AS(slice_through_points(p, q), std::invalid_argument);
    }
    SUBCASE("defining points lie in the slice") {
        Rng rng(5);
        std::normal_distribution<double> g(0.0, 1.0);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<double> p(784), q(784);
            for (double& v : p) v = g(rng);
            for (double& v : q) v = g(rng);
            AffineSlice s = slice_through_points(p, q);
            CHECK(s.projection_residual(p) < 1e-8);
            CHECK(s.projection_residual(q) < 1e-8);

            std::vector<double> r(784);
            for (double& v : r) v = g(rng);
            AffineSlice three = slice_through_points(p, q, r);
            CHECK(three.projection_residual(p) < 1e-8);
            CHECK(three.projection_residual(q) < 1e-8);
            CHECK(three.projection_residual(r) < 1e-8);
        }
    }
    SUBCASE("lines through points") {
        AffineSlice line = line_through_points(std::vector<double>{3, 0});
        CHECK(line.basis[0] == std::vector<double>{1, 0});
        CHECK_THROWS_AS(line_through_points(std::vector<double>{0, 0}),
                        std::invalid_argument);
        // a data point p maps to slice coordinate |p|
        std::vector<double> p{0.3, -0.4};
        AffineSlice l2 = line_through_points(p);
        CHECK(l2.project(p).x == doctest::Approx(0.5));
    }
}

TEST_CASE("svg polygon count equals the activation count") {
    SUBCASE("one square cell") {
        Network linear(2, {1}, {{0.5, -0.2}}, {{0.1}});
        RegionCensus census =
            enumerate_regions(linear, AffineSlice::axis_plane(), Window::box(1.0));
        REQUIRE(census.activation_count == 1);
        std::string svg = render_svg(census);
        CHECK(count_substr(svg, "<polygon") == 1);
    }
    SUBCASE("hat net renders three segments") {
        RegionCensus census = enumerate_regions(hat_net(), AffineSlice::axis_line(),
                                                Window::segment(-2.0, 3.0));
        std::string svg = render_svg(census);
        CHECK(count_substr(svg, "<polygon") == 3);
    }
    SUBCASE("a deep random net renders one polygon per cell") {
        Network net = he_init(2, {8, 8, 8, 8, 8, 1}, InitSpec{1.0, 0.4, 12});
        EnumerateOptions opts;
        opts.merge_linear = false;
        RegionCensus census =
            enumerate_regions(net, AffineSlice::axis_plane(), Window::box(3.0), opts);
        std::string svg = render_svg(census);
        CHECK(count_substr(svg, "<polygon") ==
              static_cast<std::size_t>(census.activation_count));
        // data point overlay adds circles, not polygons
        SvgStyle style;
        style.data_points = {{0.0, 0.0}, {1.0, 1.0}};
        std::string svg2 = render_svg(census, style);
        CHECK(count_substr(svg2, "<circle") == 2);
    }
}

TEST_CASE("epoch-0 experiment equals a direct enumeration") {
    ExperimentConfig cfg;
    cfg.input_dim = 2;
    cfg.hidden_widths = {8, 8};
    cfg.init.bias_std = 1e-3;
    cfg.task.kind = TaskSpec::Kind::Memorize2D;
    cfg.task.n_points = 50;
    cfg.train.epochs = 0.0;
    cfg.slices.k = 2;
    cfg.slices.count = 1;
    cfg.runs = 1;
    cfg.seed = 31;
    CountSeries series = run_experiment(cfg);
    REQUIRE(series.all_ok());
    REQUIRE(series.mean_count.size() == 1);

    InitSpec init = cfg.init;
    init.seed = substream_seed(cfg.seed, "init", 0);
    Network net = he_init(2, {8, 8, 2}, init);
    RegionCensus direct =
        enumerate_regions(net, AffineSlice::axis_plane(), Window::box(3.0));
    CHECK(series.mean_count[0] == doctest::Approx(double(direct.activation_count)));
    CHECK(series.predicted_count == doctest::Approx(16.0 * 16.0 / 2.0));
}

TEST_CASE("training experiment writes consistent outputs") {
    fs::path out = temp_dir("train_outputs");
    ExperimentConfig cfg;
    cfg.input_dim = 2;
    cfg.hidden_widths = {8, 8};
    cfg.init.bias_std = 1e-3;
    cfg.task.kind = TaskSpec::Kind::Memorize2D;
    cfg.task.n_points = 64;
    cfg.train.epochs = 2.0;
    cfg.train.batch_size = 32;
    cfg.train.checkpoint_schedule = {0.0, 1.0, 2.0};
    cfg.slices.k = 2;
    cfg.slices.count = 1;
    cfg.runs = 3;
    cfg.seed = 5;
    cfg.output_dir = out.string();
    cfg.render_snapshots = true;
    CountSeries series = run_experiment(cfg);
    REQUIRE(series.all_ok());
    REQUIRE(series.mean_count.size() == 3);
    CHECK(series.records.size() == 9); // 3 runs x 1 slice x 3 checkpoints

    CHECK(fs::exists(out / "series.csv"));
    CHECK(fs::exists(out / "meta.json"));
    for (int r = 0; r < 3; ++r) CHECK(fs::exists(out / "runs" / ("run_" + std::to_string(r) + ".csv")));
    CHECK(fs::exists(out / "snapshots"));
    int svg_count = 0;
    for (auto& e : fs::directory_iterator(out / "snapshots"))
        svg_count += e.path().extension() == ".svg";
    CHECK(svg_count == 3);

    SUBCASE("series.csv equals a recomputation from the per-run csvs") {
        // parse the per-run files
        std::vector<std::vector<double>> counts(3), accs(3);
        for (int r = 0; r < 3; ++r) {
            std::ifstream f(out / "runs" / ("run_" + std::to_string(r) + ".csv"));
            std::string line;
            std::getline(f, line); // header
            while (std::getline(f, line)) {
                std::stringstream ss(line);
                std::string field;
                std::vector<std::string> fields;
                while (std::getline(ss, field, ',')) fields.push_back(field);
                REQUIRE(fields.size() == 7);
                int checkpoint = std::stoi(fields[2]);
                counts[checkpoint].push_back(std::stod(fields[4]));
                if (std::stoi(fields[1]) == 0) accs[checkpoint].push_back(std::stod(fields[6]));
            }
        }
        std::ifstream sf(out / "series.csv");
        std::string line;
        std::getline(sf, line);
        int c = 0;
        while (std::getline(sf, line)) {
            std::stringstream ss(line);
            std::string field;
            std::vector<std::string> fields;
            while (std::getline(ss, field, ',')) fields.push_back(field);
            REQUIRE(fields.size() == 5);
            auto [mc, sc] = mean_and_std(counts[c]);
            auto [ma, sa] = mean_and_std(accs[c]);
            (void)sa;
            CHECK(std::stod(fields[2]) == mc);
            CHECK(std::stod(fields[3]) == sc);
            CHECK(std::stod(fields[4]) == ma);
            ++c;
        }
        CHECK(c == 3);
    }
}

TEST_CASE("idx task with subset and corruption") {
    fs::path data = temp_dir("idx_data");
    std::string dir = ensure_idx_dataset("", data.string(), 400, 3);
    ExperimentConfig cfg;
    cfg.input_dim = 784;
    cfg.hidden_widths = {8, 8};
    cfg.init.bias_std = 1e-3;
    cfg.task.kind = TaskSpec::Kind::CorruptedIdx;
    cfg.task.n_points = 100;
    cfg.task.corruption = 1.0;
    cfg.task.data_dir = dir;
    cfg.train.epochs = 0.0;
    cfg.slices.k = 1;
    cfg.slices.count = 4;
    cfg.runs = 2;
    cfg.seed = 17;
    CountSeries series = run_experiment(cfg);
    REQUIRE(series.all_ok());
    CHECK(series.records.size() == 8);
    CHECK(series.mean_count[0] > 1.0);
    CHECK(series.predicted_count == doctest::Approx(16.0));
}

TEST_CASE("experiment failures are recorded, not dropped") {
    ExperimentConfig cfg;
    cfg.input_dim = 2;
    cfg.hidden_widths = {10};
    cfg.init.bias_std = 0.5;
    cfg.task.kind = TaskSpec::Kind::Memorize2D;
    cfg.task.n_points = 16;
    cfg.train.epochs = 0.0;
    cfg.slices.count = 1;
    cfg.runs = 2;
    cfg.seed = 2;
    cfg.cell_budget = 3; // guaranteed to blow
    CountSeries series = run_experiment(cfg);
    CHECK(series.failures.size() == 2);
    CHECK_FALSE(series.all_ok());
}

TEST_CASE("config json round trip") {
    ExperimentConfig cfg;
    cfg.input_dim = 784;
    cfg.hidden_widths = {32, 32, 32};
    cfg.init.bias_std = 1e-3;
    cfg.task.kind = TaskSpec::Kind::CorruptedIdx;
    cfg.task.corruption = 0.5;
    cfg.task.n_points = 5000;
    cfg.task.data_dir = "data/x";
    cfg.train.epochs = 50;
    cfg.train.lr = 2e-3;
    cfg.slices.k = 1;
    cfg.slices.count = 25;
    cfg.runs = 4;
    cfg.seed = 99;
    cfg.window_b = 12.0;

    fs::path file = temp_dir("config") / "cfg.json";
    std::ofstream(file) << experiment_config_to_json(cfg);
    ExperimentConfig back = experiment_config_from_json_file(file.string());
    CHECK(back.input_dim == cfg.input_dim);
    CHECK(back.hidden_widths == cfg.hidden_widths);
    CHECK(back.init.bias_std == cfg.init.bias_std);
    CHECK(back.task.kind == cfg.task.kind);
    CHECK(back.task.corruption == cfg.task.corruption);
    CHECK(back.task.data_dir == cfg.task.data_dir);
    CHECK(back.train.epochs == cfg.train.epochs);
    CHECK(back.train.lr == cfg.train.lr);
    CHECK(back.slices.k == cfg.slices.k);
    CHECK(back.slices.count == cfg.slices.count);
    CHECK(back.runs == cfg.runs);
    CHECK(back.seed == cfg.seed);
    CHECK(back.window_b == cfg.window_b);
}
