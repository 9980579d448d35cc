#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "reluscan/bounds.hpp"
#include "reluscan/dataset.hpp"
#include "reluscan/experiment.hpp"
#include "reluscan/rng.hpp"
#include "reluscan/serialize.hpp"
#include "reluscan/svg.hpp"
#include "reluscan/train.hpp"

using namespace reluscan;

namespace {

std::vector<int> parse_widths(const std::string& s) {
    std::vector<int> widths;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        widths.push_back(std::stoi(s.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    if (widths.empty()) throw CLI::ValidationError("--widths must be a comma-separated list");
    return widths;
}

int total(const std::vector<int>& w) {
    int t = 0;
    for (int x : w) t += x;
    return t;
}

void print_series(const CountSeries& series) {
    std::printf("%-12s %-12s %-12s %-12s\n", "epoch", "mean_count", "std_count", "mean_acc");
    for (std::size_t i = 0; i < series.checkpoint_epochs.size(); ++i)
        std::printf("%-12.4g %-12.6g %-12.6g %-12.4f\n", series.checkpoint_epochs[i],
                    series.mean_count[i], series.std_count[i], series.mean_accuracy[i]);
    std::printf("predicted (depth-1 value): %.6g\n", series.predicted_count);
    for (const std::string& f : series.failures) std::fprintf(stderr, "FAILED %s\n", f.c_str());
}

int run_and_report(const ExperimentConfig& cfg) {
    CountSeries series = run_experiment(cfg);
    print_series(series);
    return series.all_ok() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact activation-region census for fully-connected ReLU networks"};
    app.require_subcommand(1);

    // ---- bounds ----------------------------------------------------------
    auto* bounds_cmd = app.add_subcommand("bounds", "closed-form region-count quantities");
    std::string b_widths = "20,20,20";
    long long b_nin = 2;
    double b_T = 1.0, b_volume = 1.0;
    bool b_json = false;
    bounds_cmd->add_option("--widths", b_widths, "hidden layer widths, comma separated");
    bounds_cmd->add_option("--input-dim", b_nin, "input dimension (or slice dimension)");
    bounds_cmd->add_option("--T", b_T, "order-one constant in the density bound");
    bounds_cmd->add_option("--volume", b_volume, "window volume");
    bounds_cmd->add_flag("--json", b_json, "emit JSON instead of a table");
    bounds_cmd->callback([&] {
        const long long m = total(parse_widths(b_widths));
        BoundParams p{m, b_nin, b_T, 0.0, b_volume};
        DensityBound db = density_bound(p);
        double pred = expected_count_prediction(m, b_nin);
        nlohmann::json j;
        j["n_neurons"] = m;
        j["n_in"] = b_nin;
        try {
            j["arrangement_count"] = arrangement_count(m, b_nin);
        } catch (const std::overflow_error&) {
            j["arrangement_count"] = nullptr;
        }
        j["density_bound"] = db.value;
        j["density_bound_log10"] = db.log10_value;
        j["density_bound_saturated"] = db.saturated;
        j["expected_count_prediction"] = pred;
        if (b_json) {
            std::cout << j.dump(2) << "\n";
        } else {
            std::printf("%-28s %s\n", "quantity", "value");
            std::printf("%-28s %lld\n", "n_neurons", m);
            std::printf("%-28s %lld\n", "n_in", b_nin);
            if (j["arrangement_count"].is_null())
                std::printf("%-28s %s\n", "arrangement_count", "overflow (> 2^64)");
            else
                std::printf("%-28s %" PRIu64 "\n", "arrangement_count",
                            j["arrangement_count"].get<std::uint64_t>());
            std::printf("%-28s %.6g%s\n", "density_bound", db.value, db.saturated ? " (saturated)" : "");
            std::printf("%-28s %.6g\n", "expected_count_prediction", pred);
        }
    });

    // ---- init-count ------------------------------------------------------
    auto* init_cmd = app.add_subcommand("init-count", "region counts at initialization");
    ExperimentConfig icfg;
    std::string i_widths = "20,20,20", i_task = "memorize2d";
    icfg.init.bias_std = 1e-3;
    icfg.runs = 5;
    icfg.slices.count = 3;
    init_cmd->add_option("--widths", i_widths, "hidden layer widths");
    init_cmd->add_option("--input-dim", icfg.input_dim, "input dimension");
    init_cmd->add_option("--task", i_task, "memorize2d | idx | corrupted-idx");
    init_cmd->add_option("--data", icfg.task.data_dir, "IDX directory for idx tasks");
    init_cmd->add_option("--n-points", icfg.task.n_points, "dataset size (0 = all)");
    init_cmd->add_option("--bias-std", icfg.init.bias_std, "bias standard deviation");
    init_cmd->add_option("--weight-scale", icfg.init.weight_scale, "weight scale multiplier");
    init_cmd->add_option("--runs", icfg.runs, "number of seeds");
    init_cmd->add_option("--slices", icfg.slices.count, "slices per run");
    init_cmd->add_option("--k", icfg.slices.k, "slice dimension (1 or 2)");
    init_cmd->add_option("--seed", icfg.seed, "experiment seed");
    init_cmd->add_option("--window-b", icfg.window_b, "window half-width (0 = auto)");
    init_cmd->add_option("--out", icfg.output_dir, "output directory");
    init_cmd->add_flag("--render", icfg.render_snapshots, "write SVG snapshots");
    init_cmd->add_flag("--linear", icfg.count_linear, "also count linear regions");
    init_cmd->add_option("--jobs", icfg.jobs, "parallel runs (0 = hardware)");
    init_cmd->callback([&] {
        icfg.hidden_widths = parse_widths(i_widths);
        icfg.task.kind = i_task == "memorize2d"      ? TaskSpec::Kind::Memorize2D
                         : i_task == "corrupted-idx" ? TaskSpec::Kind::CorruptedIdx
                                                     : TaskSpec::Kind::Idx;
        icfg.train.epochs = 0.0;
        std::exit(run_and_report(icfg));
    });

    // ---- train-count -----------------------------------------------------
    auto* train_cmd = app.add_subcommand("train-count", "region counts during training");
    std::string t_config;
    ExperimentConfig tcfg;
    std::string t_widths, t_task;
    double t_epochs = -1.0, t_lr = -1.0, t_corruption = -1.0;
    int t_runs = -1, t_slices = -1, t_k = -1, t_npoints = -1;
    std::string t_out, t_data;
    std::uint64_t t_seed = UINT64_MAX;
    bool t_render = false, t_linear = false;
    int t_input_dim = -1;
    double t_bias_std = -1.0;
    train_cmd->add_option("--config", t_config, "JSON experiment config");
    train_cmd->add_option("--widths", t_widths, "hidden layer widths override");
    train_cmd->add_option("--input-dim", t_input_dim, "input dimension");
    train_cmd->add_option("--bias-std", t_bias_std, "bias standard deviation at init");
    train_cmd->add_option("--task", t_task, "memorize2d | idx | corrupted-idx");
    train_cmd->add_option("--data", t_data, "IDX directory");
    train_cmd->add_option("--n-points", t_npoints, "dataset size");
    train_cmd->add_option("--corruption", t_corruption, "label corruption fraction");
    train_cmd->add_option("--epochs", t_epochs, "training epochs");
    train_cmd->add_option("--lr", t_lr, "learning rate");
    train_cmd->add_option("--runs", t_runs, "number of seeds");
    train_cmd->add_option("--slices", t_slices, "slices per run");
    train_cmd->add_option("--k", t_k, "slice dimension");
    train_cmd->add_option("--seed", t_seed, "experiment seed");
    train_cmd->add_option("--out", t_out, "output directory");
    train_cmd->add_flag("--render", t_render, "write SVG snapshots");
    train_cmd->add_flag("--linear", t_linear, "also count linear regions");
    train_cmd->callback([&] {
        ExperimentConfig cfg = t_config.empty() ? tcfg : experiment_config_from_json_file(t_config);
        if (!t_widths.empty()) cfg.hidden_widths = parse_widths(t_widths);
        if (t_input_dim > 0) cfg.input_dim = t_input_dim;
        if (t_bias_std >= 0.0) cfg.init.bias_std = t_bias_std;
        if (!t_task.empty())
            cfg.task.kind = t_task == "memorize2d"      ? TaskSpec::Kind::Memorize2D
                            : t_task == "corrupted-idx" ? TaskSpec::Kind::CorruptedIdx
                                                        : TaskSpec::Kind::Idx;
        if (!t_data.empty()) cfg.task.data_dir = t_data;
        if (t_npoints >= 0) cfg.task.n_points = t_npoints;
        if (t_corruption >= 0.0) cfg.task.corruption = t_corruption;
        if (t_epochs >= 0.0) cfg.train.epochs = t_epochs;
        if (t_lr > 0.0) cfg.train.lr = t_lr;
        if (t_runs > 0) cfg.runs = t_runs;
        if (t_slices > 0) cfg.slices.count = t_slices;
        if (t_k > 0) cfg.slices.k = t_k;
        if (t_seed != UINT64_MAX) cfg.seed = t_seed;
        if (!t_out.empty()) cfg.output_dir = t_out;
        if (t_render) cfg.render_snapshots = true;
        if (t_linear) cfg.count_linear = true;
        std::exit(run_and_report(cfg));
    });

    // ---- render ----------------------------------------------------------
    auto* render_cmd = app.add_subcommand("render", "SVG of the cell complex of a network");
    std::string r_net, r_out = "regions.svg", r_widths = "8,8,8,8,8";
    int r_input_dim = 2, r_k = 2;
    double r_b = 3.0, r_bias_std = 0.5;
    std::uint64_t r_seed = 0;
    bool r_linear = false;
    render_cmd->add_option("--net", r_net, "network JSON (omit to render a random net)");
    render_cmd->add_option("--widths", r_widths, "hidden widths for the random net");
    render_cmd->add_option("--input-dim", r_input_dim, "input dimension for the random net");
    render_cmd->add_option("--bias-std", r_bias_std, "bias std for the random net");
    render_cmd->add_option("--seed", r_seed, "seed for the random net");
    render_cmd->add_option("--k", r_k, "slice dimension (axis-aligned slice)");
    render_cmd->add_option("--b", r_b, "window half-width");
    render_cmd->add_option("--out", r_out, "output SVG path");
    render_cmd->add_flag("--linear", r_linear, "merge linear regions before reporting");
    render_cmd->callback([&] {
        std::vector<int> widths = parse_widths(r_widths);
        widths.push_back(1);
        Network net = r_net.empty()
                          ? he_init(r_input_dim, widths, InitSpec{1.0, r_bias_std, r_seed})
                          : load_network_file(r_net);
        AffineSlice slice;
        if (r_k == 2) {
            if (net.input_dim() == 2) {
                slice = AffineSlice::axis_plane();
            } else {
                // random orthonormal plane
                Rng rng = make_rng(r_seed, "render-slice");
                std::normal_distribution<double> g(0.0, 1.0);
                std::vector<double> p1(net.input_dim()), p2(net.input_dim());
                for (double& v : p1) v = g(rng);
                for (double& v : p2) v = g(rng);
                slice = slice_through_points(p1, p2);
            }
        } else {
            Rng rng = make_rng(r_seed, "render-slice");
            std::normal_distribution<double> g(0.0, 1.0);
            std::vector<double> p(net.input_dim());
            for (double& v : p) v = g(rng);
            slice = line_through_points(p);
        }
        Window window = r_k == 2 ? Window::box(r_b) : Window::segment(-r_b, r_b);
        EnumerateOptions opts;
        opts.merge_linear = r_linear;
        RegionCensus census = enumerate_regions(net, slice, window, opts);
        save_svg(census, r_out);
        save_census_json(census, r_out + ".json");
        std::printf("activation regions: %lld", census.activation_count);
        if (census.linear_count) std::printf("  linear regions: %lld", *census.linear_count);
        std::printf("  slivers: %lld\n", census.discarded_slivers);
        std::printf("wrote %s and %s.json\n", r_out.c_str(), r_out.c_str());
    });

    // ---- gradcheck -------------------------------------------------------
    auto* grad_cmd = app.add_subcommand("gradcheck", "backprop vs central differences");
    std::string g_widths = "8,8,8";
    int g_input_dim = 4, g_probes = 100, g_points = 16;
    std::uint64_t g_seed = 0;
    double g_tol = 1e-4;
    grad_cmd->add_option("--widths", g_widths, "hidden layer widths");
    grad_cmd->add_option("--input-dim", g_input_dim, "input dimension");
    grad_cmd->add_option("--probes", g_probes, "number of parameter probes");
    grad_cmd->add_option("--points", g_points, "dataset size used for the loss");
    grad_cmd->add_option("--seed", g_seed, "seed");
    grad_cmd->add_option("--tol", g_tol, "max relative error allowed");
    grad_cmd->callback([&] {
        std::vector<int> widths = parse_widths(g_widths);
        widths.push_back(2);
        Network net = he_init(g_input_dim, widths, InitSpec{1.0, 0.1, g_seed});
        Dataset ds = make_memorization_dataset(g_points, g_input_dim, g_seed + 1);
        double err = finite_difference_gradcheck(net, ds, g_probes, g_seed + 2);
        std::printf("max relative error over %d probes: %.3e (tolerance %.1e)\n", g_probes, err,
                    g_tol);
        std::exit(err < g_tol ? 0 : 1);
    });

    // ---- make-data -------------------------------------------------------
    auto* data_cmd = app.add_subcommand(
        "make-data", "write the synthetic IDX image dataset (digit-file stand-in)");
    std::string d_out = "data/synthetic";
    int d_n = 10000;
    std::uint64_t d_seed = 7;
    data_cmd->add_option("--out", d_out, "output directory");
    data_cmd->add_option("--n", d_n, "number of images");
    data_cmd->add_option("--seed", d_seed, "seed");
    data_cmd->callback([&] {
        std::filesystem::create_directories(d_out);
        Dataset ds = make_template_image_dataset(d_n, 10, 28, 28, d_seed);
        save_idx(ds, (std::filesystem::path(d_out) / "train-images-idx3-ubyte").string(),
                 (std::filesystem::path(d_out) / "train-labels-idx1-ubyte").string(), 28, 28);
        std::printf("wrote %d 28x28 images to %s\n", d_n, d_out.c_str());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
