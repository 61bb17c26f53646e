#include "wheelplan/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wheelplan/costmap.hpp"
#include "wheelplan/errors.hpp"
#include "wheelplan/evaluation.hpp"
#include "wheelplan/io.hpp"
#include "wheelplan/labels.hpp"
#include "wheelplan/navigation.hpp"
#include "wheelplan/parallel.hpp"
#include "wheelplan/planeloss.hpp"
#include "wheelplan/planners.hpp"
#include "wheelplan/random.hpp"
#include "wheelplan/render.hpp"
#include "wheelplan/synthetic.hpp"

namespace fs = std::filesystem;

namespace wheelplan {

namespace {

// Raised for malformed flag values; maps to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_numbers(const std::string& text, const char* what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string field = text.substr(pos, comma - pos);
        double v = 0.0;
        const auto r = std::from_chars(field.data(), field.data() + field.size(), v);
        if (field.empty() || r.ec != std::errc{} || r.ptr != field.data() + field.size()) {
            throw UsageError(std::string("bad number in ") + what + ": '" + field + "'");
        }
        out.push_back(v);
        pos = comma + 1;
    }
    return out;
}

Pose2D parse_pose(const std::string& text, const char* what, bool theta_required) {
    const auto v = parse_numbers(text, what);
    if (v.size() < 2 || v.size() > 3 || (theta_required && v.size() != 3)) {
        throw UsageError(std::string(what) + " expects x,y" + (theta_required ? ",theta" : "[,theta]"));
    }
    return {v[0], v[1], v.size() == 3 ? v[2] : 0.0};
}

Algorithm parse_algo(const std::string& name) {
    const auto a = parse_algorithm(name);
    if (!a) throw UsageError("unknown planner '" + name + "' (astar, jps, rrtstar, prm)");
    return *a;
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
    const auto dots = text.find("..");
    auto num = [&](const std::string& s) {
        std::uint64_t v = 0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw UsageError("bad seed range '" + text + "'");
        return v;
    };
    if (dots == std::string::npos) {
        const auto v = num(text);
        return {v, v};
    }
    const auto a = num(text.substr(0, dots)), b = num(text.substr(dots + 2));
    if (b < a) throw UsageError("seed range is reversed: '" + text + "'");
    return {a, b};
}

CameraModel camera_for(const std::string& path, int width, int height) {
    CameraModel cam = path.empty() ? CameraModel::default_model() : load_camera(path);
    if (cam.width != width || cam.height != height) cam = cam.scaled_to(width, height);
    return cam;
}

std::string file_digest(const std::string& path) { return io::digest(io::read_file(path)); }

struct Common {
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

// --- subcommands ------------------------------------------------------------

struct GenScenesArgs {
    int count = 5;
    std::string out;
    std::string camera;
    double depth_noise = 0.0, flip_drivable = 0.0, flip_obstacle = 0.0;
};

int gen_scenes(const GenScenesArgs& a, const Common& c, std::ostream& out) {
    if (a.count <= 0) throw UsageError("--count must be positive");
    const CameraModel cam = camera_for(a.camera, kWorkingWidth, kWorkingHeight);
    io::Provenance prov{"gen-scenes", c.seed, {}};
    if (!a.camera.empty()) prov.inputs.emplace_back("camera", file_digest(a.camera));
    const std::string header = prov.line();
    std::vector<std::string> names(static_cast<std::size_t>(a.count));
    parallel_for(
        names.size(),
        [&](std::size_t i) {
            SceneSpec spec = random_scene_spec(derive_seed(c.seed, i));
            spec.noise = {a.depth_noise, a.flip_drivable, a.flip_obstacle};
            const SceneRender r = generate_scene(spec, cam, derive_seed(derive_seed(c.seed, i), 0));
            char base[32];
            std::snprintf(base, sizeof base, "scene_%04zu", i);
            const fs::path dir(a.out);
            const std::vector<std::string> comments{header};
            io::write_file(dir / (std::string(base) + ".json"), scene_to_json(spec, header));
            io::write_file(dir / (std::string(base) + "_depth.pgm"), encode_depth(r.depth, 0.001, comments));
            io::write_file(dir / (std::string(base) + "_semantic.pgm"), encode_semantic(r.semantic, comments));
            io::write_file(dir / (std::string(base) + "_rgb.ppm"),
                           std::string_view(reinterpret_cast<const char*>(r.rgb.bytes.data()), r.rgb.bytes.size()));
            io::write_file(dir / (std::string(base) + "_gt.costmap"), format_costmap(r.ground_truth, comments));
            names[i] = base;
        },
        c.threads);
    for (const auto& n : names) out << n << '\n';
    return 0;
}

struct BuildCostmapArgs {
    std::string depth, semantic, camera, out;
    bool no_filter = false, single_hull = false;
    int k = 8;
    double std_mult = 1.0;
};

int build_costmap_cmd(const BuildCostmapArgs& a, const Common& c, std::ostream& out) {
    const DepthImage depth = load_depth(a.depth);
    const SemanticImage semantic = load_semantic(a.semantic);
    const CameraModel cam = camera_for(a.camera, depth.width, depth.height);
    PerceptionOptions opts;
    opts.filter = !a.no_filter;
    opts.outlier_k = a.k;
    opts.outlier_std_mult = a.std_mult;
    opts.costmap.single_hull = a.single_hull;
    const Costmap map = perceive_costmap(depth, semantic, cam, opts);
    io::Provenance prov{"build-costmap", c.seed, {{"depth", file_digest(a.depth)}, {"semantic", file_digest(a.semantic)}}};
    if (!a.camera.empty()) prov.inputs.emplace_back("camera", file_digest(a.camera));
    const std::vector<std::string> comments{prov.line()};
    io::write_file(a.out, format_costmap(map, comments));
    out << "free=" << map.count(CellState::Free) << " occupied=" << map.count(CellState::Occupied)
        << " unknown=" << map.count(CellState::Unknown) << '\n';
    return 0;
}

struct PlanArgs {
    std::string map, start = "0,0,0", goal, algo = "astar", out;
    bool no_smooth = false;
};

int plan_cmd(const PlanArgs& a, const Common& c, std::ostream& out) {
    const Costmap map = parse_costmap(io::read_file(a.map));
    PlannerParams params;
    params.algorithm = parse_algo(a.algo);
    params.seed = c.seed;
    params.smooth = !a.no_smooth;
    const PlanResult r = plan_path(map, parse_pose(a.start, "--start", false), parse_pose(a.goal, "--goal", true), params);
    const io::Provenance prov{"plan", c.seed, {{"map", file_digest(a.map)}}};
    const std::vector<std::string> comments{prov.line(), "planner " + a.algo};
    io::write_file(a.out, format_path_csv(r.path, comments));
    out << "goal=" << io::format_double(r.goal.x) << ',' << io::format_double(r.goal.y) << ','
        << io::format_double(r.goal.theta) << " length_m=" << io::format_double(r.grid.length)
        << " tc=" << io::format_double(turning_cost(r.path)) << '\n';
    return 0;
}

struct GenDatasetArgs {
    std::string scenes, out, algo = "astar", split = "0.6,0.2,0.2", camera;
    int count = 0, goals = 10;
};

int gen_dataset_cmd(const GenDatasetArgs& a, const Common& c, std::ostream& out) {
    std::vector<SceneSpec> specs;
    io::Provenance prov{"gen-dataset", c.seed, {}};
    if (!a.scenes.empty()) {
        std::vector<fs::path> files;
        std::error_code ec;
        for (const auto& e : fs::directory_iterator(a.scenes, ec)) {
            if (e.path().extension() == ".json") files.push_back(e.path());
        }
        if (ec) throw IoError("cannot list " + a.scenes);
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            const std::string text = io::read_file(f);
            specs.push_back(scene_from_json(text));
            prov.inputs.emplace_back(f.filename().string(), io::digest(text));
        }
    }
    for (int i = 0; i < a.count; ++i) specs.push_back(random_scene_spec(derive_seed(c.seed, 0x5343454eULL + i)));
    if (specs.empty()) throw UsageError("no scenes: pass --scenes DIR or --count N");

    DatasetOptions opts;
    opts.planner.algorithm = parse_algo(a.algo);
    opts.goals_per_scene = a.goals;
    opts.seed = c.seed;
    opts.threads = c.threads;
    const auto ratio = parse_numbers(a.split, "--split");
    if (ratio.size() != 3) throw UsageError("--split expects three ratios");
    opts.split_ratio = {ratio[0], ratio[1], ratio[2]};
    opts.camera = camera_for(a.camera, kWorkingWidth, kWorkingHeight);
    if (!a.camera.empty()) prov.inputs.emplace_back("camera", file_digest(a.camera));

    const DatasetResult r = generate_dataset(specs, opts, a.out, prov.line());
    std::size_t counts[4] = {0, 0, 0, 0};
    for (const auto& rec : r.records) {
        if (rec.split == "train") ++counts[0];
        else if (rec.split == "val") ++counts[1];
        else if (rec.split == "test") ++counts[2];
        else ++counts[3];
    }
    out << "samples=" << r.records.size() << " train=" << counts[0] << " val=" << counts[1] << " test=" << counts[2]
        << " failed=" << counts[3] << '\n';
    return 0;
}

struct LossesArgs {
    std::string depth, pred_mask, label_mask, pred_path, label_path, camera;
    double lambda_er = 0.10, lambda_ir = 0.15;
};

int losses_cmd(const LossesArgs& a, const Common&, std::ostream& out) {
    const DepthImage depth = load_depth(a.depth);
    const CameraModel cam = camera_for(a.camera, depth.width, depth.height);
    const BinaryMask label = decode_mask(io::read_file(a.label_mask));
    const BinaryMask pred = a.pred_mask.empty() ? label : decode_mask(io::read_file(a.pred_mask));
    const PlannedPath label_path = parse_path_csv(io::read_file(a.label_path));
    const PlannedPath pred_path = a.pred_path.empty() ? label_path : parse_path_csv(io::read_file(a.pred_path));

    const double l_ep = loss_ep(pred, label);
    const double l_ip = loss_ip(pred_path, label_path);
    std::optional<double> l_er, l_ir;
    PlaneFit er_fit;
    try {
        l_er = loss_er(pred, depth, &er_fit);
    } catch (const InsufficientSamples&) {
    }
    try {
        l_ir = loss_ir(pred_path, depth, cam);
    } catch (const InsufficientSamples&) {
    }
    const CombinedLosses combined = combined_losses(l_ep, l_er, l_ip, l_ir, {a.lambda_er, a.lambda_ir});
    nlohmann::ordered_json j;
    j["l_ep"] = l_ep;
    j["l_er"] = l_er.value_or(0.0);
    j["l_ip"] = l_ip;
    j["l_ir"] = l_ir.value_or(0.0);
    j["l_e"] = combined.l_e;
    j["l_i"] = combined.l_i;
    j["n_p"] = l_er ? er_fit.sample_count : 0;
    j["phi_deg"] = l_er ? rad2deg(er_fit.phi) : 0.0;
    j["er_degenerate"] = combined.er_degenerate;
    j["ir_degenerate"] = combined.ir_degenerate;
    out << j.dump() << '\n';
    return 0;
}

struct NavigateArgs {
    std::string seeds = "0..0", noise = "0", algo = "rrtstar", out, world, start, goal;
    bool fov_only = false;
    int bins = 6;
};

int navigate_cmd(const NavigateArgs& a, const Common& c, std::ostream& out) {
    const auto [first, last] = parse_seed_range(a.seeds);
    const std::vector<double> levels = parse_numbers(a.noise, "--noise");
    for (double p : levels) {
        if (!(p >= 0.0 && p <= 1.0)) throw UsageError("--noise values must lie in [0,1]");
    }
    std::optional<WorldMap> fixed_world;
    io::Provenance prov{"navigate", first, {}};
    if (!a.world.empty()) {
        if (a.start.empty() || a.goal.empty()) throw UsageError("--world needs --start and --goal");
        fixed_world = WorldMap{parse_costmap(io::read_file(a.world))};
        prov.inputs.emplace_back("world", file_digest(a.world));
    }
    PlannerParams local;
    local.algorithm = parse_algo(a.algo);
    NavigationOptions opts;
    opts.fov_only = a.fov_only;

    const std::size_t n_seeds = static_cast<std::size_t>(last - first + 1);
    std::vector<NavigationReport> reports(levels.size() * n_seeds);
    parallel_for(
        reports.size(),
        [&](std::size_t k) {
            const double p = levels[k / n_seeds];
            const std::uint64_t seed = first + k % n_seeds;
            if (fixed_world) {
                reports[k] = simulate_navigation(*fixed_world, parse_pose(a.start, "--start", false),
                                                 parse_pose(a.goal, "--goal", true), local, p, seed, opts);
            } else {
                const CorridorWorld w = corridor_world(seed);
                reports[k] = simulate_navigation(w.map, w.start, w.goal, local, p, seed, opts);
            }
        },
        c.threads);

    std::string lines = "# " + prov.line() + "\n";
    std::vector<EvalRecord> records;
    for (std::size_t k = 0; k < reports.size(); ++k) {
        std::string line = format_report(reports[k]);
        line.insert(line.size() - 2, ",\"noise\":" + io::format_double(levels[k / n_seeds]));
        lines += line;
        records.push_back({std::to_string(reports[k].seed), a.algo, reports[k].outcome == NavOutcome::Success, reports[k].mean_tc,
                           reports[k].mean_D, reports[k].outcome == NavOutcome::Success ? FailureReason::None : FailureReason::GoalMissed});
    }
    out << lines;
    const auto bins = bin_by_quality(records, a.bins);
    if (levels.size() > 1) out << format_bins_text(bins) << "trend_slope=" << io::format_double(sr_trend_slope(bins)) << '\n';
    if (!a.out.empty()) {
        const fs::path dir(a.out);
        io::write_file(dir / "reports.jsonl", lines);
        io::write_file(dir / "quality_bins.txt", "# " + prov.line() + "\n" + format_bins_text(bins));
        for (std::size_t k = 0; k < reports.size(); ++k) {
            const std::string name = "trajectory_p" + io::format_double(levels[k / n_seeds]) + "_seed" +
                                     std::to_string(reports[k].seed) + ".csv";
            io::write_file(dir / name, format_trajectory_csv(reports[k], {prov.line()}));
        }
    }
    return 0;
}

struct EvaluateArgs {
    std::string manifest, algos = "astar,jps,rrtstar,prm", split = "test", out, records;
    int bins = 6;
};

int evaluate_cmd(const EvaluateArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
    const std::string text = io::read_file(a.manifest);
    const fs::path base = fs::path(a.manifest).parent_path();
    std::vector<EvalSample> samples;
    std::size_t skipped = 0;
    for (const auto& rec : parse_manifest(text)) {
        if (rec.status != "ok" || !rec.has_goal) continue;
        if (a.split != "all" && rec.split != a.split) continue;
        if (rec.gt_costmap.empty() || !fs::exists(base / rec.gt_costmap) || !fs::exists(base / rec.costmap)) {
            ++skipped;
            continue;
        }
        samples.push_back({rec.id, parse_costmap(io::read_file(base / rec.costmap)),
                           parse_costmap(io::read_file(base / rec.gt_costmap)), rec.goal});
    }
    if (skipped > 0) err << "warning: skipped " << skipped << " samples without ground truth\n";

    std::vector<PlannerParams> planners;
    for (const auto& name : CLI::detail::split(a.algos, ',')) {
        PlannerParams p;
        p.algorithm = parse_algo(name);
        p.seed = c.seed;
        planners.push_back(p);
    }
    const SuiteResult result = evaluate_suite(samples, planners, c.threads);
    const io::Provenance prov{"evaluate", c.seed, {{"manifest", io::digest(text)}}};
    out << format_table_text(result.rows);
    out << format_bins_text(bin_by_quality(result.records, a.bins));
    if (!a.out.empty()) io::write_file(a.out, "# " + prov.line() + "\n" + format_table_csv(result.rows));
    if (!a.records.empty()) {
        std::ostringstream csv;
        csv << "# " << prov.line() << "\nsample,planner,success,tc,D,reason\n";
        for (const auto& r : result.records) {
            csv << r.sample_id << ',' << r.planner << ',' << (r.success ? 1 : 0) << ',' << io::format_double(r.tc) << ','
                << io::format_double(r.D) << ',' << failure_name(r.reason) << '\n';
        }
        io::write_file(a.records, csv.str());
    }
    return 0;
}

struct RenderArgs {
    std::string map, path, out;
    int scale = 4;
};

int render_cmd(const RenderArgs& a, const Common& c, std::ostream& out) {
    const Costmap map = parse_costmap(io::read_file(a.map));
    std::optional<PlannedPath> path;
    io::Provenance prov{"render", c.seed, {{"map", file_digest(a.map)}}};
    if (!a.path.empty()) {
        path = parse_path_csv(io::read_file(a.path));
        prov.inputs.emplace_back("path", file_digest(a.path));
    }
    const std::vector<std::string> comments{prov.line()};
    const bool svg = fs::path(a.out).extension() == ".svg";
    io::write_file(a.out, svg ? render_svg(map, path ? &*path : nullptr, a.scale, comments)
                              : render_ppm(map, path ? &*path : nullptr, a.scale, comments));
    out << a.out << '\n';
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Costmap construction, classical planning, label generation and navigation simulation", "wheelplan"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(io::kToolVersion));
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", common.seed, "RNG seed (echoed into every artifact)");
        sub->add_option("--threads", common.threads, "worker threads (default: WHEELPLAN_THREADS or all cores)");
    };

    GenScenesArgs gs;
    auto* gen = app.add_subcommand("gen-scenes", "generate random synthetic scenes with ground truth");
    gen->add_option("--count", gs.count, "number of scenes");
    gen->add_option("--out", gs.out, "output directory")->required();
    gen->add_option("--camera", gs.camera, "camera config file");
    gen->add_option("--depth-noise", gs.depth_noise, "depth noise sigma (m)");
    gen->add_option("--flip-drivable", gs.flip_drivable, "P(drivable pixel labeled obstacle)");
    gen->add_option("--flip-obstacle", gs.flip_obstacle, "P(obstacle pixel labeled drivable)");
    add_common(gen);

    BuildCostmapArgs bc;
    auto* build = app.add_subcommand("build-costmap", "depth + semantic images -> costmap");
    build->add_option("--depth", bc.depth, "16-bit depth graymap")->required();
    build->add_option("--semantic", bc.semantic, "semantic graymap (0/1/2)")->required();
    build->add_option("--camera", bc.camera, "camera config file");
    build->add_option("--out", bc.out, "output costmap")->required();
    build->add_flag("--no-filter", bc.no_filter, "skip statistical outlier removal");
    build->add_flag("--single-hull", bc.single_hull, "one hull over all obstacle points");
    build->add_option("--k", bc.k, "outlier filter neighbours");
    build->add_option("--std-mult", bc.std_mult, "outlier filter threshold multiplier");
    add_common(build);

    PlanArgs pa;
    auto* plan_sub = app.add_subcommand("plan", "plan a 25-node path on a costmap");
    plan_sub->add_option("--map", pa.map, "costmap file")->required();
    plan_sub->add_option("--start", pa.start, "x,y[,theta] (default 0,0,0)");
    plan_sub->add_option("--goal", pa.goal, "x,y,theta")->required();
    plan_sub->add_option("--algo", pa.algo, "astar | jps | rrtstar | prm");
    plan_sub->add_option("--out", pa.out, "output path CSV")->required();
    plan_sub->add_flag("--no-smooth", pa.no_smooth, "disable shortcut smoothing of sampling planners");
    add_common(plan_sub);

    GenDatasetArgs gd;
    auto* dataset = app.add_subcommand("gen-dataset", "generate planned-path labels and a manifest");
    dataset->add_option("--scenes", gd.scenes, "directory of scene JSON files");
    dataset->add_option("--count", gd.count, "number of additional random scenes");
    dataset->add_option("--goals", gd.goals, "goals per scene");
    dataset->add_option("--algo", gd.algo, "astar | jps | rrtstar | prm");
    dataset->add_option("--split", gd.split, "train,val,test ratios");
    dataset->add_option("--camera", gd.camera, "camera config file");
    dataset->add_option("--out", gd.out, "output directory")->required();
    add_common(dataset);

    LossesArgs la;
    auto* losses = app.add_subcommand("losses", "evaluate the training losses on one sample");
    losses->add_option("--depth", la.depth, "depth graymap")->required();
    losses->add_option("--label-mask", la.label_mask, "label path mask")->required();
    losses->add_option("--pred-mask", la.pred_mask, "predicted path mask (default: label)");
    losses->add_option("--label-path", la.label_path, "label path CSV")->required();
    losses->add_option("--pred-path", la.pred_path, "predicted path CSV (default: label)");
    losses->add_option("--camera", la.camera, "camera config file");
    losses->add_option("--lambda-er", la.lambda_er, "weight of the external plane loss");
    losses->add_option("--lambda-ir", la.lambda_ir, "weight of the internal plane loss");
    add_common(losses);

    NavigateArgs na;
    auto* navigate = app.add_subcommand("navigate", "closed-loop navigation simulation");
    navigate->add_option("--seeds", na.seeds, "seed or range a..b (one corridor world per seed)");
    navigate->add_option("--noise", na.noise, "misclassification probability, or a comma list for a sweep");
    navigate->add_option("--algo", na.algo, "local planner");
    navigate->add_option("--world", na.world, "world costmap file instead of generated corridors");
    navigate->add_option("--start", na.start, "start pose x,y[,theta] for --world");
    navigate->add_option("--goal", na.goal, "goal pose x,y,theta for --world");
    navigate->add_flag("--fov-only", na.fov_only, "visibility without the line-of-sight test");
    navigate->add_option("--bins", na.bins, "costmap-quality bins for sweeps");
    navigate->add_option("--out", na.out, "output directory for reports and trajectories");
    navigate->add_option("--threads", common.threads, "worker threads");

    EvaluateArgs ea;
    auto* evaluate = app.add_subcommand("evaluate", "success rate and turning cost per planner");
    evaluate->add_option("--manifest", ea.manifest, "dataset manifest")->required();
    evaluate->add_option("--algos", ea.algos, "comma-separated planners");
    evaluate->add_option("--split", ea.split, "train | val | test | all");
    evaluate->add_option("--bins", ea.bins, "costmap-quality bins");
    evaluate->add_option("--out", ea.out, "table CSV");
    evaluate->add_option("--records", ea.records, "per-sample CSV");
    add_common(evaluate);

    RenderArgs ra;
    auto* render = app.add_subcommand("render", "draw a costmap with an optional path (.ppm or .svg)");
    render->add_option("--map", ra.map, "costmap file")->required();
    render->add_option("--path", ra.path, "path CSV");
    render->add_option("--out", ra.out, "output .ppm or .svg")->required();
    render->add_option("--scale", ra.scale, "pixels per cell");
    add_common(render);

    std::vector<std::string> argv_storage{"wheelplan"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_storage) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return gen_scenes(gs, common, out);
        if (build->parsed()) return build_costmap_cmd(bc, common, out);
        if (plan_sub->parsed()) return plan_cmd(pa, common, out);
        if (dataset->parsed()) return gen_dataset_cmd(gd, common, out);
        if (losses->parsed()) return losses_cmd(la, common, out);
        if (navigate->parsed()) return navigate_cmd(na, common, out);
        if (evaluate->parsed()) return evaluate_cmd(ea, common, out, err);
        if (render->parsed()) return render_cmd(ra, common, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        err << e.code() << ": " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << e.code() << ": " << e.what() << '\n';
        return 1;
    }
    err << app.help();
    return 2;
}

}  // namespace wheelplan
