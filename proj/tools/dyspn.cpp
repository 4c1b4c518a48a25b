#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "dyspn/autograd.hpp"
#include "dyspn/fixtures.hpp"
#include "dyspn/gradcheck.hpp"
#include "dyspn/io.hpp"
#include "dyspn/metrics.hpp"
#include "dyspn/oracle.hpp"
#include "dyspn/propagation.hpp"
#include "dyspn/synth.hpp"

namespace fs = std::filesystem;
using namespace dyspn;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitCheckFailed = 2;

AffinityVolume tensor_to_affinity(const io::Tensor& t, const fs::path& path) {
    if (t.dims.size() != 3)
        throw std::invalid_argument(path.string() + ": affinity tensor must be rank 3 [K,H,W]");
    return AffinityVolume(int(t.dims[0]), int(t.dims[1]), int(t.dims[2]), t.data);
}

AttentionStack tensor_to_attention(const io::Tensor& t, const fs::path& path) {
    if (t.dims.size() != 4)
        throw std::invalid_argument(path.string() +
                                    ": attention tensor must be rank 4 [T,R+1,H,W]");
    return AttentionStack(int(t.dims[0]), int(t.dims[1]), int(t.dims[2]), int(t.dims[3]),
                          t.data);
}

OffsetField tensor_to_offsets(const io::Tensor& t, const fs::path& path) {
    if (t.dims.size() != 5 || t.dims[2] != 2)
        throw std::invalid_argument(path.string() +
                                    ": offset tensor must be rank 5 [ring,slot,2,H,W]");
    return OffsetField(int(t.dims[0]), int(t.dims[1]), int(t.dims[3]), int(t.dims[4]), t.data);
}

io::Tensor grid_tensor(const DepthGrid& grid) {
    io::Tensor t;
    t.dims = {std::uint32_t(grid.height()), std::uint32_t(grid.width())};
    t.data.assign(grid.values().begin(), grid.values().end());
    return t;
}

// Deterministic deformable offsets for synthetic runs: rings 2 and 3 reuse the
// eight 3x3 directions scaled by 2 and 3, with seeded fractional jitter.
OffsetField make_synth_offsets(int height, int width, std::uint64_t seed) {
    OffsetField field(2, 8, height, width);
    const int dirs[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1},
                            {0, 1},   {1, -1}, {1, 0},  {1, 1}};
    std::mt19937_64 rng(seed ^ 0x5f0f5e1dULL);
    auto jitter = [&] { return ((rng() >> 11) * 0x1.0p-53 - 0.5) * 0.5; };
    for (int r = 0; r < 2; ++r) {
        const int scale = r + 2;
        for (int s = 0; s < 8; ++s) {
            for (int i = 0; i < height; ++i) {
                for (int j = 0; j < width; ++j) {
                    field.dy(r, s, i, j) = dirs[s][0] * scale + jitter();
                    field.dx(r, s, i, j) = dirs[s][1] * scale + jitter();
                }
            }
        }
    }
    return field;
}

NeighborhoodSpec build_spec_for(const io::RunConfig& config, int height, int width,
                                const fs::path& base_dir) {
    const Variant variant = variant_from_name(config.variant);
    std::optional<OffsetField> field;
    if (variant == Variant::Deformable) {
        if (config.offsets.empty())
            throw std::invalid_argument("deformable variant requires an offsets tensor");
        const fs::path path = base_dir / config.offsets;
        field = tensor_to_offsets(io::read_tensor(path), path);
    }
    return build_neighborhood(variant, height, width, std::move(field));
}

synth::AttentionSchedule schedule_for(const std::string& name, int plane_count) {
    if (name == "constant") return synth::AttentionSchedule::constant(plane_count, 1.0);
    if (name == "far-decay") return synth::AttentionSchedule::far_decay(plane_count);
    throw std::invalid_argument("unknown schedule '" + name +
                                "' (expected constant or far-decay)");
}

int run_propagate(const io::RunConfig& config, const fs::path& tape_dir,
                  const fs::path& base_dir) {
    if (config.depth.empty() || config.affinity.empty() || config.attention.empty() ||
        config.output.empty())
        throw std::invalid_argument("propagate needs depth, affinity, attention, and output");
    // Relative input paths resolve against the config file's directory.
    auto resolve = [&](const std::string& p) {
        return fs::path(p).is_absolute() ? fs::path(p) : base_dir / p;
    };
    const DepthGrid h0 = io::read_depth_pgm(resolve(config.depth));
    const AffinityVolume affinity =
        tensor_to_affinity(io::read_tensor(resolve(config.affinity)), config.affinity);
    const AttentionStack attention =
        tensor_to_attention(io::read_tensor(resolve(config.attention)), config.attention);
    const NeighborhoodSpec spec = build_spec_for(config, h0.height(), h0.width(), base_dir);
    const PropagationConfig pcfg = config.propagation_config();
    const auto [result, tape] = propagate(h0, affinity, attention, spec, pcfg);
    const fs::path out(config.output);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    io::write_depth_pgm(out, result);
    io::write_run_config(out.string() + ".config.txt", config);
    if (!tape_dir.empty()) {
        fs::create_directories(tape_dir);
        for (std::size_t t = 0; t < tape.grids.size(); ++t) {
            char name[32];
            std::snprintf(name, sizeof(name), "h_%03zu.dyt", t);
            io::write_tensor(tape_dir / name, grid_tensor(tape.grids[t]));
        }
    }
    std::cout << "wrote " << out.string() << " (" << result.height() << "x" << result.width()
              << ", " << pcfg.steps << " steps)\n";
    return 0;
}

int run_synth(io::RunConfig config, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    synth::SceneSpec scene_spec;
    scene_spec.kind = synth::scene_from_name(config.scene);
    scene_spec.height = config.height;
    scene_spec.width = config.width;
    scene_spec.near_m = config.near_m;
    scene_spec.far_m = config.far_m;
    scene_spec.seed = config.seed;
    const synth::Scene scene = synth::generate_scene(scene_spec);
    const DepthGrid sparse = synth::sparsify(scene.ground_truth, config.rate, config.seed);
    const DepthGrid h0 = synth::nearest_fill(sparse);

    const Variant variant = variant_from_name(config.variant);
    std::optional<OffsetField> field;
    if (variant == Variant::Deformable)
        field = make_synth_offsets(config.height, config.width, config.seed);
    if (field) {
        io::Tensor t;
        t.dims = {2, 8, 2, std::uint32_t(config.height), std::uint32_t(config.width)};
        t.data.assign(field->data().begin(), field->data().end());
        io::write_tensor(out_dir / "offsets.dyt", t);
        config.offsets = "offsets.dyt";
    }
    const NeighborhoodSpec spec =
        build_neighborhood(variant, config.height, config.width, std::move(field));

    const AffinityVolume affinity = synth::edge_affinity(scene.guidance, spec, config.sigma);
    synth::AttentionSchedule schedule = schedule_for(config.schedule, spec.ring_count() + 1);
    if (config.schedule == "far-decay")
        schedule.edge_modulation = synth::sample_anchors(sparse);
    const AttentionStack attention = synth::schedule_attention(schedule, config.steps, spec);

    io::write_depth_pgm(out_dir / "gt.pgm", scene.ground_truth);
    io::write_depth_pgm(out_dir / "sparse.pgm", sparse);
    io::write_depth_pgm(out_dir / "h0.pgm", h0);
    {
        io::Tensor t;
        t.dims = {std::uint32_t(config.height), std::uint32_t(config.width)};
        t.data = scene.guidance;
        io::write_tensor(out_dir / "guidance.dyt", t);
    }
    {
        io::Tensor t;
        t.dims = {std::uint32_t(affinity.neighbor_count()), std::uint32_t(config.height),
                  std::uint32_t(config.width)};
        t.data.assign(affinity.weights().begin(), affinity.weights().end());
        io::write_tensor(out_dir / "affinity.dyt", t);
    }
    {
        io::Tensor t;
        t.dims = {std::uint32_t(attention.steps()), std::uint32_t(attention.ring_count()),
                  std::uint32_t(config.height), std::uint32_t(config.width)};
        t.data.assign(attention.values().begin(), attention.values().end());
        io::write_tensor(out_dir / "attention.dyt", t);
    }
    config.depth = "h0.pgm";
    config.affinity = "affinity.dyt";
    config.attention = "attention.dyt";
    io::write_run_config(out_dir / "config.txt", config);
    std::cout << "wrote scene bundle to " << out_dir.string() << "\n";
    return 0;
}

int run_eval(const fs::path& pred_path, const fs::path& gt_path, const fs::path& csv_path) {
    const DepthGrid pred = io::read_depth_pgm(pred_path);
    const DepthGrid gt = io::read_depth_pgm(gt_path);
    const MetricsReport report = evaluate(pred, gt);
    std::cout << report.to_text();
    if (!csv_path.empty()) {
        std::ofstream out(csv_path, std::ios::trunc);
        if (!out) throw std::runtime_error(csv_path.string() + ": cannot open for writing");
        out << report.to_csv();
    } else {
        std::cout << report.to_csv();
    }
    return 0;
}

int run_oracle_check(const std::string& variant_name, int height, int width, int steps,
                     std::uint64_t seed, int count, double epsilon) {
    fixtures::BundleOptions options;
    options.variant = variant_from_name(variant_name);
    options.height = height;
    options.width = width;
    options.steps = steps;
    options.integral_offsets = true;
    PropagationConfig config;
    config.steps = steps;
    config.epsilon = epsilon;
    double worst = 0.0;
    for (int c = 0; c < count; ++c) {
        options.seed = seed + std::uint64_t(c);
        const auto bundle = fixtures::make_random_bundle(options);
        const auto [fast, tape] =
            propagate(bundle.h0, bundle.affinity, bundle.attention, bundle.spec, config);
        (void)tape;
        const DepthGrid dense =
            oracle::propagate(bundle.h0, bundle.affinity, bundle.attention, bundle.spec, config);
        double diff = 0.0;
        for (std::size_t idx = 0; idx < fast.size(); ++idx)
            diff = std::max(diff, std::abs(fast.values()[idx] - dense.values()[idx]));
        worst = std::max(worst, diff);
    }
    const double tol = 1e-10;
    std::cout << "oracle-check " << variant_name << " " << height << "x" << width << " N="
              << steps << " bundles=" << count << " max-abs-diff=" << worst << " ["
              << (worst <= tol ? "PASS" : "FAIL") << "]\n";
    return worst <= tol ? 0 : kExitCheckFailed;
}

int run_gradcheck(const std::string& variant_name, int height, int width, int steps,
                  std::uint64_t seed, int seeds, double epsilon) {
    fixtures::BundleOptions options;
    options.variant = variant_from_name(variant_name);
    options.height = height;
    options.width = width;
    options.steps = steps;
    options.integral_offsets = false;
    options.attention_margin = 1e-3;
    options.weight_min_abs = 1e-3;
    PropagationConfig config;
    config.steps = steps;
    config.epsilon = epsilon;
    gradcheck::Report worst;
    for (int c = 0; c < seeds; ++c) {
        options.seed = seed + std::uint64_t(c);
        const auto bundle = fixtures::make_random_bundle(options);
        const auto report = gradcheck::check(bundle, config);
        worst.max_rel_h0 = std::max(worst.max_rel_h0, report.max_rel_h0);
        worst.max_rel_aff = std::max(worst.max_rel_aff, report.max_rel_aff);
        worst.max_rel_attn = std::max(worst.max_rel_attn, report.max_rel_attn);
    }
    const double tol = 1e-5;
    std::cout << "gradcheck " << variant_name << " " << height << "x" << width << " N=" << steps
              << " seeds=" << seeds << "\n"
              << "  d_h0   max rel err: " << worst.max_rel_h0 << "\n"
              << "  d_aff  max rel err: " << worst.max_rel_aff << "\n"
              << "  d_attn max rel err: " << worst.max_rel_attn << "\n"
              << "  [" << (worst.pass(tol) ? "PASS" : "FAIL") << "] tolerance " << tol << "\n";
    return worst.pass(tol) ? 0 : kExitCheckFailed;
}

int run_bench(int height, int width, int steps, int reps, int threads) {
    std::cout << "bench " << height << "x" << width << " N=" << steps << " reps=" << reps
              << " threads=" << threads << "\n";
    for (const Variant variant :
         {Variant::Ring7x7, Variant::Dilated, Variant::Deformable}) {
        fixtures::BundleOptions options;
        options.variant = variant;
        options.height = height;
        options.width = width;
        options.steps = steps;
        options.nonnegative_weights = true;
        options.integral_offsets = false;
        options.seed = 7;
        const auto bundle = fixtures::make_random_bundle(options);
        PropagationConfig config;
        config.steps = steps;
        config.threads = threads;
        // warmup
        propagate(bundle.h0, bundle.affinity, bundle.attention, bundle.spec, config);
        const auto start = std::chrono::steady_clock::now();
        for (int r = 0; r < reps; ++r)
            propagate(bundle.h0, bundle.affinity, bundle.attention, bundle.spec, config);
        const auto stop = std::chrono::steady_clock::now();
        const double seconds = std::chrono::duration<double>(stop - start).count();
        const double steps_per_sec = double(reps) * steps / seconds;
        std::cout << "  " << variant_name(variant) << ": " << steps_per_sec << " steps/s ("
                  << 1000.0 * seconds / (double(reps) * steps) << " ms/step, "
                  << bundle.spec.neighbor_count() << " neighbors)\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DySPN depth-completion propagation toolkit"};
    app.require_subcommand(1);

    // propagate
    auto* propagate_cmd = app.add_subcommand("propagate", "run N-step propagation");
    std::string cfg_path, depth, affinity, attention, offsets, output, variant = "ring7x7",
                precision = "f64";
    int steps = 6, threads = 1;
    double epsilon = 1e-8;
    std::string tape_dir;
    propagate_cmd->add_option("--config", cfg_path, "key=value run configuration file");
    propagate_cmd->add_option("--depth", depth, "initial depth map (16-bit PGM)");
    propagate_cmd->add_option("--affinity", affinity, "affinity tensor [K,H,W] (.dyt)");
    propagate_cmd->add_option("--attention", attention, "attention tensor [T,R+1,H,W] (.dyt)");
    propagate_cmd->add_option("--offsets", offsets, "offset tensor [2,8,2,H,W] (.dyt)");
    propagate_cmd->add_option("--out", output, "output depth map (16-bit PGM)");
    propagate_cmd->add_option("--variant", variant, "ring7x7 | dilated | deformable");
    propagate_cmd->add_option("--steps", steps, "iteration count");
    propagate_cmd->add_option("--epsilon", epsilon, "denominator guard");
    propagate_cmd->add_option("--precision", precision, "f32 | f64");
    propagate_cmd->add_option("--threads", threads, "row-block worker threads");
    propagate_cmd->add_option("--tape-dir", tape_dir, "dump per-step grids here (.dyt)");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic experiment bundle");
    std::string out_dir, scene = "step-edge", schedule = "far-decay";
    int s_height = 64, s_width = 64;
    std::uint64_t seed = 0;
    double rate = 0.05, sigma = 0.06, near_m = 2.0, far_m = 5.0;
    std::string s_variant = "ring7x7";
    int s_steps = 6;
    synth_cmd->add_option("--out", out_dir, "output directory")->required();
    synth_cmd->add_option("--scene", scene, "step-edge | slanted-planes | sphere-on-plane");
    synth_cmd->add_option("--height", s_height, "grid rows");
    synth_cmd->add_option("--width", s_width, "grid cols");
    synth_cmd->add_option("--seed", seed, "rng seed");
    synth_cmd->add_option("--rate", rate, "sparsity keep fraction (0,1]");
    synth_cmd->add_option("--sigma", sigma, "guidance affinity falloff");
    synth_cmd->add_option("--variant", s_variant, "ring7x7 | dilated | deformable");
    synth_cmd->add_option("--steps", s_steps, "attention schedule length");
    synth_cmd->add_option("--schedule", schedule, "constant | far-decay");
    synth_cmd->add_option("--near", near_m, "scene near depth (m)");
    synth_cmd->add_option("--far", far_m, "scene far depth (m)");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "depth-completion metrics");
    std::string pred_path, gt_path, csv_path;
    eval_cmd->add_option("--pred", pred_path, "prediction (16-bit PGM)")->required();
    eval_cmd->add_option("--gt", gt_path, "ground truth (16-bit PGM)")->required();
    eval_cmd->add_option("--csv", csv_path, "also write the report as CSV");

    // oracle-check
    auto* oracle_cmd = app.add_subcommand("oracle-check",
                                          "dense-matrix equivalence check on random bundles");
    std::string o_variant = "ring7x7";
    int o_height = 8, o_width = 8, o_steps = 6, o_count = 1;
    std::uint64_t o_seed = 0;
    double o_epsilon = 1e-8;
    oracle_cmd->add_option("--variant", o_variant, "ring7x7 | dilated | deformable");
    oracle_cmd->add_option("--height", o_height, "grid rows");
    oracle_cmd->add_option("--width", o_width, "grid cols");
    oracle_cmd->add_option("--steps", o_steps, "iteration count");
    oracle_cmd->add_option("--seed", o_seed, "base rng seed");
    oracle_cmd->add_option("--count", o_count, "number of random bundles");
    oracle_cmd->add_option("--epsilon", o_epsilon, "denominator guard");

    // gradcheck
    auto* grad_cmd = app.add_subcommand("gradcheck",
                                        "finite-difference gradient certification");
    std::string g_variant = "ring7x7";
    int g_height = 5, g_width = 5, g_steps = 3, g_seeds = 5;
    std::uint64_t g_seed = 0;
    double g_epsilon = 1e-8;
    grad_cmd->add_option("--variant", g_variant, "ring7x7 | dilated | deformable");
    grad_cmd->add_option("--height", g_height, "grid rows");
    grad_cmd->add_option("--width", g_width, "grid cols");
    grad_cmd->add_option("--steps", g_steps, "iteration count");
    grad_cmd->add_option("--seed", g_seed, "base rng seed");
    grad_cmd->add_option("--seeds", g_seeds, "number of random bundles");
    grad_cmd->add_option("--epsilon", g_epsilon, "denominator guard (> 0)");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "per-variant propagation throughput");
    int b_height = 128, b_width = 128, b_steps = 6, b_reps = 10, b_threads = 1;
    bench_cmd->add_option("--height", b_height, "grid rows");
    bench_cmd->add_option("--width", b_width, "grid cols");
    bench_cmd->add_option("--steps", b_steps, "iteration count");
    bench_cmd->add_option("--reps", b_reps, "repetitions");
    bench_cmd->add_option("--threads", b_threads, "row-block worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (propagate_cmd->parsed()) {
            io::RunConfig config;
            if (!cfg_path.empty()) config = io::read_run_config(cfg_path);
            auto override_str = [&](const CLI::Option* opt, std::string& dst,
                                    const std::string& src) {
                if (opt->count() > 0 || cfg_path.empty()) dst = src;
            };
            override_str(propagate_cmd->get_option("--depth"), config.depth, depth);
            override_str(propagate_cmd->get_option("--affinity"), config.affinity, affinity);
            override_str(propagate_cmd->get_option("--attention"), config.attention, attention);
            override_str(propagate_cmd->get_option("--offsets"), config.offsets, offsets);
            override_str(propagate_cmd->get_option("--out"), config.output, output);
            override_str(propagate_cmd->get_option("--variant"), config.variant, variant);
            override_str(propagate_cmd->get_option("--precision"), config.precision, precision);
            if (propagate_cmd->get_option("--steps")->count() || cfg_path.empty())
                config.steps = steps;
            if (propagate_cmd->get_option("--epsilon")->count() || cfg_path.empty())
                config.epsilon = epsilon;
            if (propagate_cmd->get_option("--threads")->count() || cfg_path.empty())
                config.threads = threads;
            const fs::path base_dir =
                cfg_path.empty() ? fs::path(".") : fs::path(cfg_path).parent_path();
            return run_propagate(config, tape_dir, base_dir.empty() ? "." : base_dir);
        }
        if (synth_cmd->parsed()) {
            io::RunConfig config;
            config.scene = scene;
            config.height = s_height;
            config.width = s_width;
            config.seed = seed;
            config.rate = rate;
            config.sigma = sigma;
            config.variant = s_variant;
            config.steps = s_steps;
            config.schedule = schedule;
            config.near_m = near_m;
            config.far_m = far_m;
            return run_synth(std::move(config), out_dir);
        }
        if (eval_cmd->parsed()) return run_eval(pred_path, gt_path, csv_path);
        if (oracle_cmd->parsed())
            return run_oracle_check(o_variant, o_height, o_width, o_steps, o_seed, o_count,
                                    o_epsilon);
        if (grad_cmd->parsed())
            return run_gradcheck(g_variant, g_height, g_width, g_steps, g_seed, g_seeds,
                                 g_epsilon);
        if (bench_cmd->parsed())
            return run_bench(b_height, b_width, b_steps, b_reps, b_threads);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return 0;
}
