#include "vtp/cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vtp/cluster/virtual_targets.hpp"
#include "vtp/core/error.hpp"
#include "vtp/core/normalization.hpp"
#include "vtp/flow/model.hpp"
#include "vtp/io/checkpoint.hpp"
#include "vtp/io/csv.hpp"
#include "vtp/io/dataset_io.hpp"
#include "vtp/io/manifest.hpp"
#include "vtp/io/svg.hpp"
#include "vtp/predict/predict.hpp"
#include "vtp/sim/simulate.hpp"
#include "vtp/train/train.hpp"

namespace vtp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

fs::path manifest_path(const std::string& flag, const fs::path& primary) {
    return flag.empty() ? fs::path(primary.string() + ".manifest.json") : fs::path(flag);
}

fs::path with_suffix(const fs::path& path, const std::string& suffix) {
    fs::path out = path;
    out.replace_extension();
    return fs::path(out.string() + suffix);
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
    std::string scenario;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    std::string out;
    std::string manifest;
    sim::SimpleTargetConfig simple;
    double lateral_accel = 3.0;
    sim::BallisticConfig ballistic;
    double disturbance_variance = 1.0;
};

void add_common_simulate(CLI::App* app, SimulateOptions& o) {
    app->add_option("--n", o.n, "number of trajectories")->check(CLI::PositiveNumber);
    app->add_option("--seed", o.seed, "RNG seed");
    app->add_option("--out", o.out, "dataset CSV path")->required();
    app->add_option("--manifest", o.manifest, "manifest path (default <out>.manifest.json)");
}

void add_planar_flags(CLI::App* app, SimulateOptions& o) {
    app->add_option("--duration", o.simple.duration, "seconds");
    app->add_option("--dt", o.simple.dt, "seconds");
    app->add_option("--speed", o.simple.speed, "m/s");
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
    const auto start = Clock::now();
    TrajectoryDataset ds;
    json config;
    if (o.scenario == "simple" || o.scenario == "deterministic") {
        sim::SimpleTargetConfig c = o.simple;
        c.rng_seed = o.seed;
        c.validate();
        config = {{"duration", c.duration},
                  {"dt", c.dt},
                  {"speed", c.speed},
                  {"maneuver_duration_range", {c.maneuver_duration_range.first, c.maneuver_duration_range.second}},
                  {"lateral_accel_range", {c.lateral_accel_range.first, c.lateral_accel_range.second}}};
        if (o.scenario == "simple") {
            ds = sim::simulate_simple(c, o.n);
        } else {
            if (!(o.lateral_accel > 0.0) || !std::isfinite(o.lateral_accel))
                throw ConfigError("--lateral-accel must be positive");
            config["lateral_accel"] = o.lateral_accel;
            ds = sim::simulate_deterministic_modes(c, o.n, o.lateral_accel);
        }
    } else {
        sim::BallisticConfig c = o.ballistic;
        c.rng_seed = o.seed;
        c.disturbance_variance = {o.disturbance_variance, o.disturbance_variance, o.disturbance_variance};
        c.validate();
        config = {{"duration", c.duration},     {"dt", c.dt},       {"air_density", c.air_density},
                  {"bc_range", {c.bc_range.first, c.bc_range.second}},
                  {"x0", c.x0},                 {"v0", c.v0},       {"disturbance_variance", c.disturbance_variance},
                  {"gravity", c.gravity}};
        ds = sim::simulate_ballistic(c, o.n);
    }
    config["scenario"] = o.scenario;
    config["n"] = o.n;
    io::write_dataset(o.out, ds, {{"seed", o.seed}, {"scenario", o.scenario}, {"config", config}});

    io::RunManifest m;
    m.subcommand = "simulate " + o.scenario;
    m.config = config;
    m.seeds = {o.seed};
    m.outputs = {o.out, io::sidecar_path(o.out)};
    m.wall_seconds = seconds_since(start);
    m.write(manifest_path(o.manifest, o.out));
    out << "wrote " << ds.size() << " trajectories to " << o.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainOptions {
    std::string data;
    std::string out_model;
    std::string report;
    std::string manifest;
    double subsample = 1.0;
    int layers = 4;
    int hidden_layers = 2;
    int hidden_units = 32;
    int bins = 8;
    double tail_bound = 3.0;
    bool verbose = false;
    train::TrainConfig config;
};

int cmd_train(const TrainOptions& o, std::ostream& out) {
    const auto start = Clock::now();
    const TrajectoryDataset ds = io::read_dataset(o.data);
    if (ds.size() == 0) throw DataError(o.data + ": dataset is empty");
    if (!(o.subsample > 0.0 && o.subsample <= 1.0)) throw ConfigError("--subsample-points must lie in (0, 1]");
    train::TrainConfig tc = o.config;
    if (tc.epochs < 0) throw ConfigError("--epochs must not be negative");
    if (tc.epochs == 0) {
        train::TrainConfig probe = tc;
        probe.epochs = 1;
        probe.validate();
    } else {
        tc.validate();
    }

    const NormalizationParams norm = fit_normalization(ds);
    flow::CnfArchitecture arch;
    arch.dim = ds.dim;
    arch.n_psi = ds.n_psi;
    arch.layers = o.layers;
    arch.hidden_layers = o.hidden_layers;
    arch.hidden_units = o.hidden_units;
    arch.spline.bins = o.bins;
    arch.spline.tail_bound = o.tail_bound;
    if (arch.layers < 1 || arch.hidden_layers < 0 || arch.hidden_units < 1) throw ConfigError("invalid architecture");
    arch.spline.validate();
    flow::CnfModel model = flow::create_model(arch, norm, tc.seed);
    model.frame_origin = ds.trajectories.front().position(0);

    json training = {{"epochs", tc.epochs},
                     {"batch_size", tc.batch_size},
                     {"learning_rate", tc.learning_rate},
                     {"train_fraction", tc.train_fraction},
                     {"noise_std", tc.noise_std},
                     {"subsample_points", o.subsample},
                     {"seed", tc.seed},
                     {"data_sha256", io::sha256_file(o.data)}};
    const fs::path report_path = o.report.empty() ? with_suffix(o.out_model, ".report.csv") : fs::path(o.report);
    std::vector<fs::path> outputs{o.out_model};

    if (tc.epochs == 0) {
        training["best_epoch"] = -1;
        io::save_checkpoint(o.out_model, model, training);
        out << "wrote untrained model to " << o.out_model << "\n";
    } else {
        train::TrainingPoints points = train::build_training_points(ds, norm);
        if (o.subsample < 1.0) points = train::subsample_points(points, o.subsample, mix_seed(tc.seed, 0x5b));
        if (points.size() < 2) throw ConfigError("too few training points after subsampling");

        train::TrainHooks hooks;
        if (o.verbose)
            hooks.on_epoch = [&out](int epoch, double tr, double va) {
                out << "epoch " << epoch << " train_nll " << tr << " val_nll " << va << "\n";
            };
        hooks.on_checkpoint = [&](int, const flow::CnfModel& best) { io::save_checkpoint(o.out_model, best, training); };
        train::TrainResult result = train::train_model(points, tc, std::move(model), hooks);

        training["best_epoch"] = result.report.best_epoch;
        training["test_nll"] = result.report.test_nll;
        training["train_points"] = result.report.train_points;
        training["validation_points"] = result.report.validation_points;
        io::save_checkpoint(o.out_model, result.model, training);

        std::ostringstream buf;
    io::CsvWriter w(buf);
    w.header({"epoch", "train_nll", "val_nll"});
        for (std::size_t e = 0; e < result.report.train_nll.size(); ++e) {
            w.field(e + 1);
            w.field(result.report.train_nll[e]);
            w.field(result.report.val_nll[e]);
            w.end_row();
        }
        io::write_file(report_path, buf.str());
        outputs.push_back(report_path);
        out << "best epoch " << result.report.best_epoch << ", held-out nll " << result.report.test_nll << "\n";
    }

    io::RunManifest m;
    m.subcommand = "train";
    m.config = training;
    m.config["architecture"] = {{"layers", o.layers},
                                {"hidden_layers", o.hidden_layers},
                                {"hidden_units", o.hidden_units},
                                {"bins", o.bins},
                                {"tail_bound", o.tail_bound}};
    m.seeds = {tc.seed};
    m.inputs = {o.data, io::sidecar_path(o.data)};
    m.outputs = outputs;
    m.wall_seconds = seconds_since(start);
    m.write(manifest_path(o.manifest, o.out_model));
    return kExitOk;
}

// ---------------------------------------------------------------- targets

std::vector<predict::TargetState> read_targets(const fs::path& path, const flow::CnfModel& model) {
    const io::CsvTable table = io::read_csv(path);
    const std::string src = path.string();
    auto column = [&](const std::string& name) {
        const auto it = std::find(table.header.begin(), table.header.end(), name);
        if (it == table.header.end()) throw DataError(src + ": missing column " + name);
        return static_cast<std::size_t>(it - table.header.begin());
    };
    const std::size_t id_col = column("target_id");
    std::vector<std::size_t> p_cols, v_cols, psi_cols;
    for (int a = 0; a < model.dim; ++a) {
        p_cols.push_back(column("p" + std::to_string(a)));
        v_cols.push_back(column("v" + std::to_string(a)));
    }
    for (int a = 0; a < model.n_psi; ++a) psi_cols.push_back(column("psi" + std::to_string(a)));

    std::vector<predict::TargetState> targets;
    for (const auto& row : table.rows) {
                const long long id = io::parse_int(row.fields[id_col], src, row.line);
        if (id != static_cast<long long>(targets.size()))
            throw DataError(src + ":" + std::to_string(row.line) + ": target ids must run 0, 1, 2, ... in file order");
        predict::TargetState s;
        s.pose.position.resize(model.dim);
        Vector v(model.dim);
        for (int a = 0; a < model.dim; ++a) {
            s.pose.position(a) = io::parse_double(row.fields[p_cols[a]], src, row.line);
            v(a) = io::parse_double(row.fields[v_cols[a]], src, row.line);
        }
        s.psi.resize(model.n_psi);
        for (int a = 0; a < model.n_psi; ++a) s.psi(a) = io::parse_double(row.fields[psi_cols[a]], src, row.line);
        if (!s.pose.position.allFinite() || !v.allFinite() || !s.psi.allFinite())
            throw DataError(src + ":" + std::to_string(row.line) + ": non-finite value");
        if (v.head(2).norm() == 0.0) throw DataError(src + ":" + std::to_string(row.line) + ": velocity has no horizontal component");
        s.pose.heading = heading_from_velocity(v.head(2));
        targets.push_back(std::move(s));
    }
    if (targets.empty()) throw DataError(src + ": no targets");
    return targets;
}

predict::TargetState default_target(const flow::CnfModel& model, const std::vector<double>& psi) {
    predict::TargetState s;
    s.pose.position = model.frame_origin;
    s.pose.heading = 0.0;
    if (static_cast<int>(psi.size()) != model.n_psi)
        throw ConfigError("model expects " + std::to_string(model.n_psi) + " psi values");
    s.psi = Eigen::Map<const Vector>(psi.data(), static_cast<Eigen::Index>(psi.size()));
    return s;
}

double model_noise_std(const io::LoadedCheckpoint& ckpt, std::optional<double> flag) {
    if (flag) return *flag;
    return ckpt.training.value("noise_std", train::TrainConfig{}.noise_std);
}

std::vector<io::ScatterSeries> scatter_series(const predict::SampleTensor& s, const NormalizationParams& norm,
                                              int step) {
    std::vector<io::ScatterSeries> series;
    for (int i = 0; i < s.n_targets; ++i) {
        io::ScatterSeries ser;
        ser.label = "target " + std::to_string(i);
        std::vector<Vector> pts;
        for (int j = 0; j < s.n_samples; ++j)
            for (int k = 0; k < s.n_steps; ++k)
                if ((step < 0 || k == step) && s.is_kept(i, j, k))
                    pts.push_back(norm.denormalize_position(s.position(i, j, k)));
        ser.points.resize(static_cast<Eigen::Index>(pts.size()), 2);
        for (std::size_t r = 0; r < pts.size(); ++r) ser.points.row(static_cast<Eigen::Index>(r)) = pts[r].head(2);
        series.push_back(std::move(ser));
    }
    return series;
}

// ---------------------------------------------------------------- sample

struct SampleOptions {
    std::string model;
    std::string targets;
    std::vector<double> psi;
    std::vector<double> times;
    int n_samples = 200;
    std::uint64_t seed = 0;
    std::optional<double> noise_std;
    bool independent = false;
    bool share = false;
    std::string out;
    std::string svg;
    std::string manifest;
};

int cmd_sample(const SampleOptions& o, std::ostream& out) {
    const auto start = Clock::now();
    const io::LoadedCheckpoint ckpt = io::load_checkpoint(o.model);
    const flow::CnfModel& model = ckpt.model;

    predict::PredictionRequest req;
    req.targets = o.targets.empty() ? std::vector<predict::TargetState>{default_target(model, o.psi)}
                                    : read_targets(o.targets, model);
    req.times = o.times;
    req.samples_per_target = o.n_samples;
    req.seed = o.seed;
    req.noise_std = model_noise_std(ckpt, o.noise_std);
    req.independent_latents = o.independent;
    req.share_samples = o.share;
    predict::SampleTensor s = predict::draw_samples(model, req);
    s.model_id = ckpt.digest;

    std::vector<std::string> header{"target_id", "sample_id", "step", "t"};
    for (int a = 0; a < model.dim; ++a) header.push_back("p" + std::to_string(a));
    std::ostringstream buf;
    io::CsvWriter w(buf);
    w.header(header);
    for (int i = 0; i < s.n_targets; ++i)
        for (int j = 0; j < s.n_samples; ++j)
            for (int k = 0; k < s.n_steps; ++k) {
                if (!s.is_kept(i, j, k)) continue;
                const Vector p = model.norm.denormalize_position(s.position(i, j, k));
                w.field(i);
                w.field(j);
                w.field(k);
                w.field(s.times[static_cast<std::size_t>(k)]);
                for (int a = 0; a < model.dim; ++a) w.field(p(a));
                w.end_row();
            }
    io::write_file(o.out, buf.str());
    std::vector<fs::path> outputs{o.out};
    if (!o.svg.empty()) {
        io::write_file(o.svg, io::scatter_svg(scatter_series(s, model.norm, -1), {}, "samples"));
        outputs.push_back(o.svg);
    }

    io::RunManifest m;
    m.subcommand = "sample";
    m.config = {{"times", o.times},
                {"n_samples", o.n_samples},
                {"noise_std", req.noise_std},
                {"independent_latents", o.independent},
                {"share_samples", o.share},
                {"psi", o.psi},
                {"model_id", ckpt.digest},
                {"removed", s.removed}};
    m.seeds = {o.seed};
    m.inputs = {o.model};
    if (!o.targets.empty()) m.inputs.push_back(o.targets);
    m.outputs = outputs;
    m.wall_seconds = seconds_since(start);
    m.write(manifest_path(o.manifest, o.out));
    out << "wrote " << s.n_targets << "x" << s.n_samples << "x" << s.n_steps << " samples (" << s.removed
        << " removed) to " << o.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- density

struct DensityOptions {
    std::string model;
    double t = 0.0;
    std::vector<double> psi;
    std::string targets;
    int target_index = 0;
    int grid = 200;
    predict::GridSpec spec;
    std::string out;
    std::string svg;
    std::string manifest;
};

int cmd_density(const DensityOptions& o, std::ostream& out) {
    const auto start = Clock::now();
    const io::LoadedCheckpoint ckpt = io::load_checkpoint(o.model);
    const flow::CnfModel& model = ckpt.model;
    if (model.dim != 2) throw ConfigError("density grids need a 2D model");
    predict::TargetState target = default_target(model, o.psi);
    if (!o.targets.empty()) {
        const auto all = read_targets(o.targets, model);
        if (o.target_index < 0 || o.target_index >= static_cast<int>(all.size()))
            throw ConfigError("--target-index out of range");
        target = all[static_cast<std::size_t>(o.target_index)];
    }
    predict::GridSpec spec = o.spec;
    spec.nx = spec.ny = o.grid;
    const predict::PdfGrid g = predict::evaluate_pdf_grid(model, o.t, target.psi, target.pose, spec);

    std::ostringstream buf;
    io::CsvWriter w(buf);
    w.header({"x", "y", "pdf"});
    for (std::size_t i = 0; i < g.xs.size(); ++i)
        for (std::size_t j = 0; j < g.ys.size(); ++j) {
            w.field(g.xs[i]);
            w.field(g.ys[j]);
            w.field(g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            w.end_row();
        }
    io::write_file(o.out, buf.str());
    std::vector<fs::path> outputs{o.out};
    if (!o.svg.empty()) {
        io::write_file(o.svg, io::heatmap_svg(g, "density at t = " + io::format_double(o.t) + " s"));
        outputs.push_back(o.svg);
    }

    io::RunManifest m;
    m.subcommand = "density";
    m.config = {{"t", o.t},
                {"psi", std::vector<double>(target.psi.data(), target.psi.data() + target.psi.size())},
                {"grid", o.grid},
                {"x_range", {spec.x_min, spec.x_max}},
                {"y_range", {spec.y_min, spec.y_max}},
                {"world_units", spec.world_units},
                {"model_id", ckpt.digest},
                {"riemann_sum", g.riemann_sum()}};
    m.inputs = {o.model};
    if (!o.targets.empty()) m.inputs.push_back(o.targets);
    m.outputs = outputs;
    m.wall_seconds = seconds_since(start);
    m.write(manifest_path(o.manifest, o.out));
    out << "grid sum " << g.riemann_sum() << ", wrote " << o.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- cluster

struct ClusterOptions {
    std::string model;
    std::string targets;
    std::vector<double> psi;
    int n_samples = 200;
    int steps = 10;
    std::optional<double> horizon;
    std::optional<double> noise_std;
    bool share = false;
    cluster::ClusterConfig config;
    std::string out;
    std::string summary;
    std::string svg;
    std::string manifest;
};

int cmd_cluster(const ClusterOptions& o, std::ostream& out) {
    const auto start = Clock::now();
    const io::LoadedCheckpoint ckpt = io::load_checkpoint(o.model);
    const flow::CnfModel& model = ckpt.model;
    if (o.steps < 1) throw ConfigError("--steps must be positive");

    const auto [lo, hi_trained] = model.norm.time_range();
    const double hi = o.horizon.value_or(hi_trained);
    if (!(hi > lo)) throw ConfigError("--horizon must exceed the start of the trained time range");
    std::vector<double> times;
    for (int k = 1; k <= o.steps; ++k) times.push_back(lo + k * (hi - lo) / o.steps);

    predict::PredictionRequest req;
    req.targets = o.targets.empty() ? std::vector<predict::TargetState>{default_target(model, o.psi)}
                                    : read_targets(o.targets, model);
    req.times = times;
    req.samples_per_target = o.n_samples;
    req.seed = o.config.seed;
    req.noise_std = model_noise_std(ckpt, o.noise_std);
    req.share_samples = o.share;
    predict::SampleTensor s = predict::draw_samples(model, req);
    s.model_id = ckpt.digest;

    const cluster::VirtualTargetResult r = cluster::build_virtual_targets(s, o.config, model.norm);

    std::vector<std::string> header{"virtual_id", "t"};
    for (int a = 0; a < model.dim; ++a) header.push_back("p" + std::to_string(a));
    std::ostringstream buf;
    io::CsvWriter w(buf);
    w.header(header);
    for (std::size_t v = 0; v < r.set.trajectories.size(); ++v) {
        const Trajectory& tr = r.set.trajectories[v];
        for (std::size_t k = 0; k < tr.size(); ++k) {
            w.field(v);
            w.field(tr.times[k]);
            for (int a = 0; a < model.dim; ++a) w.field(tr.positions(static_cast<Eigen::Index>(k), a));
            w.end_row();
        }
    }
    io::write_file(o.out, buf.str());

    // members per (cluster, real target)
    json composition = json::array();
    for (int v = 0; v < o.config.n_virtual; ++v) {
        std::vector<std::size_t> by_target(static_cast<std::size_t>(s.n_targets), 0);
        for (std::size_t row = 0; row < r.kmeans.assignment.size(); ++row)
            if (r.kmeans.assignment[row] == v) ++by_target[static_cast<std::size_t>(r.flattened.target_ids[row])];
        composition.push_back(by_target);
    }
    const json summary = {{"n_virtual", o.config.n_virtual},
                          {"times", times},
                          {"inertia", r.set.inertia},
                          {"counts", r.set.counts},
                          {"composition", composition},
                          {"iterations", r.kmeans.iterations},
                          {"best_restart", r.kmeans.best_restart},
                          {"usable_trajectories", r.flattened.y.rows()},
                          {"removed_samples", s.removed},
                          {"model_id", ckpt.digest},
                          {"seed", o.config.seed}};
    const fs::path summary_path = o.summary.empty() ? with_suffix(o.out, ".summary.json") : fs::path(o.summary);
    io::write_file(summary_path, summary.dump(2) + "\n");
    std::vector<fs::path> outputs{o.out, summary_path};
    if (!o.svg.empty()) {
        io::write_file(o.svg, io::scatter_svg(scatter_series(s, model.norm, -1), r.set.trajectories,
                                              "virtual targets"));
        outputs.push_back(o.svg);
    }

    io::RunManifest m;
    m.subcommand = "cluster";
    m.config = {{"n_virtual", o.config.n_virtual}, {"n_samples", o.n_samples},   {"steps", o.steps},
                {"times", times},                  {"noise_std", req.noise_std}, {"restarts", o.config.restarts},
                {"tolerance", o.config.tolerance}, {"max_iter", o.config.max_iter}, {"model_id", ckpt.digest}};
    m.seeds = {o.config.seed};
    m.inputs = {o.model};
    if (!o.targets.empty()) m.inputs.push_back(o.targets);
    m.outputs = outputs;
    m.wall_seconds = seconds_since(start);
    m.write(manifest_path(o.manifest, o.out));
    out << "inertia " << r.set.inertia << ", wrote " << r.set.trajectories.size() << " virtual targets to " << o.out
        << "\n";
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Virtual target prediction: simulate, train, sample, density, cluster"};
    app.name("vtp");
    app.require_subcommand(1, 1);

    // simulate
    SimulateOptions sim_o;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo trajectory dataset");
    simulate->require_subcommand(1, 1);
    auto* simple = simulate->add_subcommand("simple", "randomly maneuvering planar targets");
    add_common_simulate(simple, sim_o);
    add_planar_flags(simple, sim_o);
    simple->add_option("--maneuver-min", sim_o.simple.maneuver_duration_range.first, "seconds");
    simple->add_option("--maneuver-max", sim_o.simple.maneuver_duration_range.second, "seconds");
    simple->add_option("--accel-min", sim_o.simple.lateral_accel_range.first, "m/s^2");
    simple->add_option("--accel-max", sim_o.simple.lateral_accel_range.second, "m/s^2");
    auto* deterministic = simulate->add_subcommand("deterministic", "single straight, left or right maneuver");
    add_common_simulate(deterministic, sim_o);
    add_planar_flags(deterministic, sim_o);
    deterministic->add_option("--lateral-accel", sim_o.lateral_accel, "m/s^2");
    auto* ballistic = simulate->add_subcommand("ballistic", "3D ballistic targets with drag");
    add_common_simulate(ballistic, sim_o);
    ballistic->add_option("--duration", sim_o.ballistic.duration, "seconds");
    ballistic->add_option("--dt", sim_o.ballistic.dt, "seconds");
    ballistic->add_option("--air-density", sim_o.ballistic.air_density, "kg/m^3");
    ballistic->add_option("--bc-min", sim_o.ballistic.bc_range.first, "kg/m^2");
    ballistic->add_option("--bc-max", sim_o.ballistic.bc_range.second, "kg/m^2");
    ballistic->add_option("--disturbance-variance", sim_o.disturbance_variance, "per axis, m^2/s^4");

    // train
    TrainOptions tr_o;
    auto* trn = app.add_subcommand("train", "fit the conditional flow to a dataset");
    trn->add_option("--data", tr_o.data, "dataset CSV")->required();
    trn->add_option("--out-model", tr_o.out_model, "checkpoint JSON path")->required();
    trn->add_option("--report", tr_o.report, "per-epoch CSV (default <model>.report.csv)");
    trn->add_option("--manifest", tr_o.manifest, "manifest path");
    trn->add_option("--epochs", tr_o.config.epochs);
    trn->add_option("--batch-size", tr_o.config.batch_size);
    trn->add_option("--lr", tr_o.config.learning_rate);
    trn->add_option("--train-fraction", tr_o.config.train_fraction);
    trn->add_option("--noise-std", tr_o.config.noise_std);
    trn->add_option("--subsample-points", tr_o.subsample, "fraction of (x, t) rows to keep");
    trn->add_option("--seed", tr_o.config.seed);
    trn->add_option("--checkpoint-every", tr_o.config.checkpoint_every);
    trn->add_option("--layers", tr_o.layers);
    trn->add_option("--hidden-layers", tr_o.hidden_layers);
    trn->add_option("--hidden-units", tr_o.hidden_units);
    trn->add_option("--bins", tr_o.bins);
    trn->add_option("--tail-bound", tr_o.tail_bound);
    trn->add_flag("--verbose", tr_o.verbose, "print every epoch");

    // sample
    SampleOptions sa_o;
    auto* sample = app.add_subcommand("sample", "draw future positions for real targets");
    sample->add_option("--model", sa_o.model)->required();
    sample->add_option("--targets", sa_o.targets, "CSV target_id,p0..,v0..,psi0..");
    sample->add_option("--psi", sa_o.psi, "psi of a single target in the training frame")->delimiter(',');
    sample->add_option("--times", sa_o.times, "comma-separated seconds")->delimiter(',')->required();
    sample->add_option("--n-samples", sa_o.n_samples);
    sample->add_option("--seed", sa_o.seed);
    sample->add_option("--noise-std", sa_o.noise_std, "outlier rule sigma (default: from checkpoint)");
    sample->add_flag("--independent-latents", sa_o.independent);
    sample->add_flag("--share-samples", sa_o.share);
    sample->add_option("--out", sa_o.out)->required();
    sample->add_option("--svg", sa_o.svg);
    sample->add_option("--manifest", sa_o.manifest);

    // density
    DensityOptions de_o;
    auto* density = app.add_subcommand("density", "probability density on a regular grid");
    density->add_option("--model", de_o.model)->required();
    density->add_option("--t", de_o.t, "seconds")->required();
    density->add_option("--psi", de_o.psi)->delimiter(',');
    density->add_option("--targets", de_o.targets);
    density->add_option("--target-index", de_o.target_index);
    density->add_option("--grid", de_o.grid, "cells per axis")->check(CLI::PositiveNumber);
    density->add_option("--x-min", de_o.spec.x_min);
    density->add_option("--x-max", de_o.spec.x_max);
    density->add_option("--y-min", de_o.spec.y_min);
    density->add_option("--y-max", de_o.spec.y_max);
    density->add_flag("--world-units", de_o.spec.world_units, "axes in metres instead of normalized units");
    density->add_option("--out", de_o.out)->required();
    density->add_option("--svg", de_o.svg);
    density->add_option("--manifest", de_o.manifest);

    // cluster
    ClusterOptions cl_o;
    auto* clu = app.add_subcommand("cluster", "virtual targets from clustered sample trajectories");
    clu->add_option("--model", cl_o.model)->required();
    clu->add_option("--targets", cl_o.targets);
    clu->add_option("--psi", cl_o.psi)->delimiter(',');
    clu->add_option("--n-virtual", cl_o.config.n_virtual);
    clu->add_option("--n-samples", cl_o.n_samples);
    clu->add_option("--steps", cl_o.steps);
    clu->add_option("--horizon", cl_o.horizon, "last time stamp (default: end of trained range)");
    clu->add_option("--noise-std", cl_o.noise_std);
    clu->add_flag("--share-samples", cl_o.share);
    clu->add_option("--seed", cl_o.config.seed);
    clu->add_option("--restarts", cl_o.config.restarts);
    clu->add_option("--tolerance", cl_o.config.tolerance);
    clu->add_option("--max-iter", cl_o.config.max_iter);
    clu->add_option("--out", cl_o.out)->required();
    clu->add_option("--summary", cl_o.summary, "JSON summary (default <out>.summary.json)");
    clu->add_option("--svg", cl_o.svg);
    clu->add_option("--manifest", cl_o.manifest);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simple->parsed() || deterministic->parsed() || ballistic->parsed()) {
            sim_o.scenario = simple->parsed() ? "simple" : deterministic->parsed() ? "deterministic" : "ballistic";
            return cmd_simulate(sim_o, out);
        }
        if (trn->parsed()) return cmd_train(tr_o, out);
        if (sample->parsed()) return cmd_sample(sa_o, out);
        if (density->parsed()) return cmd_density(de_o, out);
        if (clu->parsed()) return cmd_cluster(cl_o, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ContractViolation& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}

}  // namespace vtp::cli
