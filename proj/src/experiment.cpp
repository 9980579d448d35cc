#include "reluscan/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "reluscan/bounds.hpp"
#include "reluscan/rng.hpp"
#include "reluscan/svg.hpp"

namespace fs = std::filesystem;

namespace reluscan {

int ExperimentConfig::n_neurons() const {
    return std::accumulate(hidden_widths.begin(), hidden_widths.end(), 0);
}

std::pair<double, double> mean_and_std(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return {mean, std::sqrt(acc / xs.size())};
}

namespace {

Dataset build_dataset(const ExperimentConfig& cfg, int run) {
    const std::uint64_t dseed = substream_seed(cfg.seed, "data", run);
    switch (cfg.task.kind) {
    case TaskSpec::Kind::Memorize2D:
        return make_memorization_dataset(cfg.task.n_points, cfg.input_dim, dseed);
    case TaskSpec::Kind::Idx:
    case TaskSpec::Kind::CorruptedIdx: {
        fs::path dir(cfg.task.data_dir);
        Dataset full = load_idx((dir / "train-images-idx3-ubyte").string(),
                                (dir / "train-labels-idx1-ubyte").string());
        Dataset ds;
        if (cfg.task.n_points > 0 && cfg.task.n_points < static_cast<int>(full.size())) {
            // same subset for every run so runs differ only in seed
            std::vector<std::size_t> idx(full.size());
            std::iota(idx.begin(), idx.end(), 0);
            Rng rng = make_rng(cfg.seed, "subset");
            std::shuffle(idx.begin(), idx.end(), rng);
            ds.n_classes = full.n_classes;
            ds.name = full.name + "-subset";
            for (int i = 0; i < cfg.task.n_points; ++i) {
                ds.inputs.push_back(std::move(full.inputs[idx[i]]));
                ds.labels.push_back(full.labels[idx[i]]);
            }
        } else {
            ds = std::move(full);
        }
        if (cfg.task.kind == TaskSpec::Kind::CorruptedIdx)
            ds = corrupt_labels(ds, cfg.task.corruption, ds.n_classes,
                                substream_seed(cfg.seed, "corrupt", run));
        return ds;
    }
    }
    throw std::logic_error("unknown task kind");
}

std::vector<AffineSlice> choose_slices(const ExperimentConfig& cfg, const Dataset& ds, int run) {
    std::vector<AffineSlice> out;
    Rng rng = make_rng(cfg.seed, "slices", run);
    std::uniform_int_distribution<std::size_t> pick(0, ds.size() - 1);
    int guard = 0;
    while (static_cast<int>(out.size()) < cfg.slices.count) {
        if (++guard > 100 * cfg.slices.count + 100)
            throw std::runtime_error("could not draw non-degenerate slices from the dataset");
        try {
            if (cfg.slices.k == 1) {
                out.push_back(line_through_points(ds.inputs[pick(rng)]));
            } else if (cfg.input_dim == 2) {
                out.push_back(AffineSlice::axis_plane());
            } else {
                std::size_t i = pick(rng), j = pick(rng);
                if (i == j) continue;
                out.push_back(slice_through_points(ds.inputs[i], ds.inputs[j]));
            }
        } catch (const std::invalid_argument&) {
            continue; // degenerate draw (zero or collinear); redraw
        }
    }
    return out;
}

double window_halfwidth(const ExperimentConfig& cfg, const AffineSlice& slice, const Dataset& ds) {
    if (cfg.window_b > 0.0) return cfg.window_b;
    if (cfg.task.kind == TaskSpec::Kind::Memorize2D) return 3.0;
    double worst = 0.0;
    for (const auto& x : ds.inputs) {
        Vec2 u = slice.project(x);
        worst = std::max(worst, norm(u));
    }
    return worst > 0.0 ? 3.0 * worst : 3.0;
}

struct RunResult {
    std::vector<RunRecord> records;
    std::string failure;
    std::vector<std::pair<int, RegionCensus>> snapshots; ///< (checkpoint, census) for slice 0
    std::vector<Vec2> snapshot_points;
};

RunResult execute_run(const ExperimentConfig& cfg, int run, const std::vector<double>& schedule,
                      bool keep_snapshots) {
    RunResult result;
    try {
        Dataset ds = build_dataset(cfg, run);
        std::vector<int> widths = cfg.hidden_widths;
        widths.push_back(std::max(2, ds.n_classes));
        InitSpec init = cfg.init;
        init.seed = substream_seed(cfg.seed, "init", run);
        Network net = he_init(cfg.input_dim, widths, init);

        std::vector<AffineSlice> slices = choose_slices(cfg, ds, run);
        std::vector<Window> windows;
        windows.reserve(slices.size());
        for (const AffineSlice& s : slices) {
            double b = window_halfwidth(cfg, s, ds);
            windows.push_back(cfg.slices.k == 1 ? Window::segment(-b, b) : Window::box(b));
        }

        EnumerateOptions eopts;
        eopts.merge_linear = cfg.count_linear;
        eopts.retain_cells = true;
        if (cfg.cell_budget) eopts.cell_budget = cfg.cell_budget;

        TrainConfig tcfg = cfg.train;
        tcfg.seed = substream_seed(cfg.seed, "train", run);
        tcfg.checkpoint_schedule = schedule;

        int checkpoint_index = 0;
        auto count_all = [&](const Checkpoint& cp) {
            const bool snap_now = keep_snapshots;
            for (std::size_t s = 0; s < slices.size(); ++s) {
                EnumerateOptions o = eopts;
                o.retain_cells = true;
                RegionCensus census = enumerate_regions(*cp.net, slices[s], windows[s], o);
                RunRecord rec;
                rec.run = run;
                rec.slice = static_cast<int>(s);
                rec.checkpoint = checkpoint_index;
                rec.epoch = cp.epoch;
                rec.count = census.activation_count;
                rec.linear_count = census.linear_count;
                rec.accuracy = cp.train_accuracy;
                result.records.push_back(rec);
                if (s == 0 && snap_now) result.snapshots.emplace_back(checkpoint_index, std::move(census));
            }
            ++checkpoint_index;
        };

        if (keep_snapshots) {
            if (cfg.input_dim == 2 && cfg.slices.k == 2) {
                for (std::size_t i = 0; i < ds.size() && i < 400; ++i)
                    result.snapshot_points.push_back(slices[0].project(ds.inputs[i]));
            }
        }

        if (tcfg.epochs <= 0.0) {
            // no training: a single epoch-0 census per slice
            auto [l, a] = evaluate(net, ds, tcfg.loss);
            Checkpoint cp;
            cp.epoch = 0.0;
            cp.train_loss = l;
            cp.train_accuracy = a;
            cp.net = std::make_shared<Network>(net);
            count_all(cp);
        } else {
            train(net, ds, tcfg, count_all);
        }
    } catch (const std::exception& e) {
        result.failure = std::string("run ") + std::to_string(run) + ": " + e.what();
    }
    return result;
}

void write_run_csv(const std::string& dir, int run, const std::vector<RunRecord>& records) {
    fs::create_directories(dir);
    std::ofstream f(fs::path(dir) / ("run_" + std::to_string(run) + ".csv"));
    f << "run,slice,checkpoint,epoch,count,linear_count,accuracy\n";
    char buf[64];
    for (const RunRecord& r : records) {
        if (r.run != run) continue;
        std::snprintf(buf, sizeof(buf), "%.17g", r.epoch);
        f << r.run << "," << r.slice << "," << r.checkpoint << "," << buf << "," << r.count << ",";
        if (r.linear_count) f << *r.linear_count;
        std::snprintf(buf, sizeof(buf), "%.17g", r.accuracy);
        f << "," << buf << "\n";
    }
}

} // namespace

CountSeries run_experiment(const ExperimentConfig& cfg) {
    if (cfg.runs < 1) throw std::invalid_argument("runs must be >= 1");
    if (cfg.slices.count < 1) throw std::invalid_argument("slice count must be >= 1");
    if (cfg.slices.k != 1 && cfg.slices.k != 2)
        throw std::invalid_argument("slice dimension must be 1 or 2");

    std::vector<double> schedule = cfg.train.checkpoint_schedule;
    if (schedule.empty()) {
        schedule.push_back(0.0);
        if (cfg.train.epochs > 0.0)
            for (int i = 5; i >= 0; --i) schedule.push_back(cfg.train.epochs / std::pow(2.0, i));
    }
    if (schedule.front() != 0.0) schedule.insert(schedule.begin(), 0.0);

    const int jobs = cfg.jobs > 0
                         ? cfg.jobs
                         : std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                           static_cast<unsigned>(cfg.runs)));

    std::vector<RunResult> results(cfg.runs);
    for (int base = 0; base < cfg.runs; base += jobs) {
        std::vector<std::future<RunResult>> wave;
        const int hi = std::min(cfg.runs, base + jobs);
        for (int r = base; r < hi; ++r)
            wave.push_back(std::async(std::launch::async, [&cfg, &schedule, r] {
                return execute_run(cfg, r, schedule, cfg.render_snapshots && r == 0);
            }));
        for (int r = base; r < hi; ++r) results[r] = wave[r - base].get();
    }

    CountSeries series;
    series.predicted_count =
        expected_count_prediction(std::max(1, cfg.n_neurons()), cfg.slices.k);
    for (RunResult& rr : results) {
        if (!rr.failure.empty()) series.failures.push_back(rr.failure);
        for (const RunRecord& rec : rr.records) series.records.push_back(rec);
    }

    int n_checkpoints = 0;
    for (const RunRecord& r : series.records)
        n_checkpoints = std::max(n_checkpoints, r.checkpoint + 1);
    series.checkpoint_epochs.assign(n_checkpoints, 0.0);
    for (int c = 0; c < n_checkpoints; ++c) {
        std::vector<double> counts, accs;
        for (const RunRecord& r : series.records) {
            if (r.checkpoint != c) continue;
            series.checkpoint_epochs[c] = r.epoch;
            counts.push_back(static_cast<double>(r.count));
            if (r.slice == 0) accs.push_back(r.accuracy);
        }
        auto [mc, sc] = mean_and_std(counts);
        auto [ma, sa] = mean_and_std(accs);
        (void)sa;
        series.mean_count.push_back(mc);
        series.std_count.push_back(sc);
        series.mean_accuracy.push_back(ma);
    }

    if (!cfg.output_dir.empty()) {
        fs::create_directories(cfg.output_dir);
        std::ofstream csv(fs::path(cfg.output_dir) / "series.csv");
        csv << "checkpoint,epoch,mean_count,std_count,mean_acc\n";
        char buf[64];
        for (int c = 0; c < n_checkpoints; ++c) {
            csv << c;
            for (double v : {series.checkpoint_epochs[c], series.mean_count[c],
                             series.std_count[c], series.mean_accuracy[c]}) {
                std::snprintf(buf, sizeof(buf), "%.17g", v);
                csv << "," << buf;
            }
            csv << "\n";
        }
        for (int r = 0; r < cfg.runs; ++r)
            write_run_csv((fs::path(cfg.output_dir) / "runs").string(), r, results[r].records);

        nlohmann::json meta;
        meta["config"] = nlohmann::json::parse(experiment_config_to_json(cfg));
        meta["predicted_count"] = series.predicted_count;
        meta["n_neurons"] = cfg.n_neurons();
        meta["checkpoints"] = series.checkpoint_epochs;
        meta["failures"] = series.failures;
        std::ofstream(fs::path(cfg.output_dir) / "meta.json") << meta.dump(2) << "\n";

        if (cfg.render_snapshots && !results.empty() && !results[0].snapshots.empty()) {
            fs::path snapdir = fs::path(cfg.output_dir) / "snapshots";
            fs::create_directories(snapdir);
            const auto& snaps = results[0].snapshots;
            std::vector<std::size_t> wanted = {0};
            if (snaps.size() > 2) wanted.push_back(snaps.size() / 2);
            if (snaps.size() > 1) wanted.push_back(snaps.size() - 1);
            SvgStyle style;
            style.data_points = results[0].snapshot_points;
            for (std::size_t i : wanted) {
                char name[64];
                std::snprintf(name, sizeof(name), "checkpoint_%02d.svg", snaps[i].first);
                save_svg(snaps[i].second, (snapdir / name).string(), style);
            }
        }
    }
    return series;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["input_dim"] = cfg.input_dim;
    j["hidden_widths"] = cfg.hidden_widths;
    j["init"] = {{"weight_scale", cfg.init.weight_scale}, {"bias_std", cfg.init.bias_std}};
    const char* kind = cfg.task.kind == TaskSpec::Kind::Memorize2D ? "memorize2d"
                       : cfg.task.kind == TaskSpec::Kind::Idx      ? "idx"
                                                                   : "corrupted-idx";
    j["task"] = {{"kind", kind},
                 {"n_points", cfg.task.n_points},
                 {"corruption", cfg.task.corruption},
                 {"data_dir", cfg.task.data_dir}};
    j["train"] = {{"lr", cfg.train.lr},
                  {"batch_size", cfg.train.batch_size},
                  {"epochs", cfg.train.epochs},
                  {"loss", cfg.train.loss == Loss::CrossEntropy ? "cross-entropy" : "mse"},
                  {"checkpoint_schedule", cfg.train.checkpoint_schedule}};
    j["slices"] = {{"k", cfg.slices.k}, {"count", cfg.slices.count}};
    j["runs"] = cfg.runs;
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    j["render_snapshots"] = cfg.render_snapshots;
    j["window_b"] = cfg.window_b;
    j["count_linear"] = cfg.count_linear;
    j["cell_budget"] = cfg.cell_budget;
    j["jobs"] = cfg.jobs;
    return j.dump(2);
}

ExperimentConfig experiment_config_from_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config " + path);
    nlohmann::json j = nlohmann::json::parse(f);
    ExperimentConfig cfg;
    cfg.input_dim = j.value("input_dim", cfg.input_dim);
    cfg.hidden_widths = j.value("hidden_widths", cfg.hidden_widths);
    if (j.contains("init")) {
        cfg.init.weight_scale = j["init"].value("weight_scale", 1.0);
        cfg.init.bias_std = j["init"].value("bias_std", 0.0);
    }
    if (j.contains("task")) {
        const auto& t = j["task"];
        std::string kind = t.value("kind", "memorize2d");
        if (kind == "memorize2d")
            cfg.task.kind = TaskSpec::Kind::Memorize2D;
        else if (kind == "idx" || kind == "mnist")
            cfg.task.kind = TaskSpec::Kind::Idx;
        else if (kind == "corrupted-idx" || kind == "corrupted-mnist")
            cfg.task.kind = TaskSpec::Kind::CorruptedIdx;
        else
            throw std::invalid_argument("unknown task kind: " + kind);
        cfg.task.n_points = t.value("n_points", cfg.task.n_points);
        cfg.task.corruption = t.value("corruption", 0.0);
        cfg.task.data_dir = t.value("data_dir", std::string());
    }
    if (j.contains("train")) {
        const auto& t = j["train"];
        cfg.train.lr = t.value("lr", cfg.train.lr);
        cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
        cfg.train.epochs = t.value("epochs", cfg.train.epochs);
        std::string loss = t.value("loss", "cross-entropy");
        cfg.train.loss = loss == "mse" ? Loss::Mse : Loss::CrossEntropy;
        cfg.train.checkpoint_schedule =
            t.value("checkpoint_schedule", cfg.train.checkpoint_schedule);
    }
    if (j.contains("slices")) {
        cfg.slices.k = j["slices"].value("k", cfg.slices.k);
        cfg.slices.count = j["slices"].value("count", cfg.slices.count);
    }
    cfg.runs = j.value("runs", cfg.runs);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.render_snapshots = j.value("render_snapshots", cfg.render_snapshots);
    cfg.window_b = j.value("window_b", cfg.window_b);
    cfg.count_linear = j.value("count_linear", cfg.count_linear);
    cfg.cell_budget = j.value("cell_budget", cfg.cell_budget);
    cfg.jobs = j.value("jobs", cfg.jobs);
    return cfg;
}

} // namespace reluscan
