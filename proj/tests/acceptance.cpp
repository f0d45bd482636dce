// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance --workdir DIR --prepare   trains the mask net and evaluates it
//   acceptance --workdir DIR --only N    checks criterion N (1..10)
//   acceptance --workdir DIR             prepares if needed, then checks all

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "deocc/amodal.hpp"
#include "deocc/completers.hpp"
#include "deocc/errors.hpp"
#include "deocc/eval.hpp"
#include "deocc/gradcheck.hpp"
#include "deocc/image.hpp"
#include "deocc/ordering.hpp"
#include "deocc/pipeline.hpp"
#include "deocc/recompose.hpp"
#include "deocc/scene.hpp"
#include "deocc/selfsup.hpp"
#include "deocc/train.hpp"

using namespace deocc;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::uint64_t kTrainSeed = 100000;
constexpr int kTrainScenes = 500;
constexpr int kEvalScenes = 200;
constexpr int kIterations = 3000;
constexpr double kCpuBudget = 600;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double cpu_now() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

void run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (code != 0) {
        std::string line;
        for (const auto& a : args) line += a + " ";
        throw std::runtime_error("deocc " + line + "exited " + std::to_string(code) + ": " + err.str());
    }
}

json read_json(const fs::path& p) {
    const auto b = read_file(p.string());
    return json::parse(b.begin(), b.end());
}

struct Workdir {
    fs::path root;
    fs::path train_data() const { return root / "train"; }
    fs::path eval_data() const { return root / "eval"; }
    fs::path checkpoint() const { return root / "mask_net.json"; }
    fs::path report_dir() const { return root / "report"; }
    fs::path training() const { return root / "training.json"; }
    fs::path stamp() const { return root / "stamp.json"; }
};

json prepare_key() {
    return {{"train_seed", kTrainSeed}, {"train_scenes", kTrainScenes}, {"eval_scenes", kEvalScenes},
            {"iterations", kIterations}, {"cpu_budget", kCpuBudget},   {"levels", cli::kDefaultMaskLevels}};
}

/// Reuses a previous preparation with identical settings.
void prepare(const Workdir& w) {
    if (fs::exists(w.stamp()) && read_json(w.stamp()) == prepare_key() && fs::exists(w.checkpoint()) &&
        fs::exists(w.report_dir() / "report.json") && fs::exists(w.training())) {
        std::cout << "prepare: reusing " << w.root.string() << "\n";
        return;
    }
    fs::remove_all(w.root);
    fs::create_directories(w.root);
    run_cli({"synth", "--seed", std::to_string(kTrainSeed), "--n-scenes", std::to_string(kTrainScenes), "--out",
             w.train_data().string()});
    run_cli({"synth", "--seed", "0", "--n-scenes", std::to_string(kEvalScenes), "--out", w.eval_data().string()});

    const double c0 = cpu_now();
    run_cli({"train-m", "--data", w.train_data().string(), "--out", w.checkpoint().string(), "--seed", "1", "--iters",
             std::to_string(kIterations), "--workers", "1", "--cpu-budget", fmt("%g", kCpuBudget), "--log",
             (w.root / "loss.csv").string()});
    const double train_cpu = cpu_now() - c0;
    const auto meta = load_checkpoint(w.checkpoint().string()).metadata;
    write_text(w.training().string(), json{{"cpu_seconds", train_cpu},
                                           {"iterations_run", meta.at("iterations_run")},
                                           {"stopped_by_budget", meta.at("stopped_by_budget")},
                                           {"final_loss", meta.at("final_loss")}}
                                          .dump(2));

    write_text((w.root / "methods.json").string(),
               json{{"completers", {"neural:" + w.checkpoint().string()}}}.dump());
    run_cli({"eval", "--data", w.eval_data().string(), "--methods", (w.root / "methods.json").string(), "--out",
             w.report_dir().string()});
    write_text(w.stamp().string(), prepare_key().dump());
    std::cout << "prepare: trained " << meta.at("iterations_run") << " iterations in " << fmt("%.1f", train_cpu)
              << " CPU s\n";
}

EvalReport load_report(const Workdir& w) { return report_from_json(read_json(w.report_dir() / "report.json")); }

std::vector<Scene> scenes_from(std::uint64_t seed, int n, const SceneSamplerConfig& cfg = {}) {
    std::vector<Scene> out;
    for (int i = 0; i < n; ++i) out.push_back(render_scene(sample_scene(seed + i, cfg)));
    return out;
}

// 1
Outcome oracle_identity(const Workdir&) {
    const auto t0 = std::chrono::steady_clock::now();
    PairCount pc;
    double iou_sum = 0;
    std::size_t objects = 0, acyclic = 0;
    for (int s = 0; s < kEvalScenes; ++s) {
        const auto scene = render_scene(sample_scene(s));
        if (total_order(OcclusionGraph::from_matrix(scene.gt_order)).cycles.empty()) ++acyclic;
        const OracleCompleter oracle(scene);
        const auto modals = scene.modal_masks();
        const auto ctx = object_contexts(&scene.image, scene.categories());
        const auto graph = build_order_graph(oracle, modals, ctx);
        const auto c = ordering_counts(graph.matrix(), scene.gt_order);
        pc.correct += c.correct;
        pc.total += c.total;
        const auto amodal = amodal_all_og(oracle, modals, graph, ctx);
        for (std::size_t i = 0; i < amodal.size(); ++i) iou_sum += *iou(amodal[i], scene.objects[i].amodal);
        objects += amodal.size();
    }
    const double t = seconds_since(t0);
    const double acc = static_cast<double>(pc.correct) / static_cast<double>(pc.total);
    const double miou = iou_sum / static_cast<double>(objects);
    return {acyclic == kEvalScenes && pc.correct == pc.total && miou == 1.0 && t < 60,
            fmt("oracle identity on %d acyclic scenes (%zu/%d acyclic): ordering %.4f, OG mIoU %.4f, %.1f s (< 60 s)",
                kEvalScenes, acyclic, kEvalScenes, acc, miou, t)};
}

// 2
Outcome oracle_cycle(const Workdir&) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto scene = render_scene(make_cyclic_scene());
    const OracleCompleter oracle(scene);
    const auto graph =
        build_order_graph(oracle, scene.modal_masks(), object_contexts(&scene.image, scene.categories()));
    const double t = seconds_since(t0);
    const auto cycles = total_order(graph).cycles;
    const bool four_cycle = graph.edges().size() == 4 && cycles.size() == 1 && cycles[0].size() == 4;
    return {graph.matrix() == scene.gt_order && four_cycle && t < 1,
            fmt("oracle recovers the 4-cycle: graph %s ground truth, %zu edges, %.3f s (< 1 s)",
                graph.matrix() == scene.gt_order ? "==" : "!=", graph.edges().size(), t)};
}

// 3
Outcome neural_quality(const Workdir& w) {
    const auto r = load_report(w);
    const auto training = read_json(w.training());
    auto v = [&](const char* method, const char* metric) { return r.value(method, metric).value_or(NAN); };
    const double raw = v("raw", "amodal_miou"), cr = v("convex_r", "amodal_miou"), og = v("og:neural", "amodal_miou");
    const double ord = v("og:neural", "ordering_accuracy"), area = v("area", "ordering_accuracy"),
                 yaxis = v("yaxis", "ordering_accuracy"), convex = v("convex", "ordering_accuracy");
    const double cpu = training.at("cpu_seconds").get<double>();
    const bool miou_ok = raw < cr && cr < og;
    const bool ord_ok = ord >= 0.95 && ord > area && ord > yaxis && ord > convex;
    const bool time_ok = cpu <= kCpuBudget;
    return {miou_ok && ord_ok && time_ok,
            fmt("neural on %d scenes: mIoU raw %.4f < convex_r %.4f < OG %.4f [%s]; ordering %.4f >= 0.95 and > "
                "area %.4f, yaxis %.4f, convex %.4f [%s]; training %.0f CPU s, %d iterations (<= %.0f) [%s]",
                kEvalScenes, raw, cr, og, miou_ok ? "ok" : "no", ord, area, yaxis, convex, ord_ok ? "ok" : "no", cpu,
                training.at("iterations_run").get<int>(), kCpuBudget, time_ok ? "ok" : "no")};
}

// 4
Outcome nog_below_og(const Workdir& w) {
    const auto r = load_report(w);
    const double nog = r.value("nog:neural", "amodal_miou").value_or(NAN);
    const double og = r.value("og:neural", "amodal_miou").value_or(NAN);
    return {nog <= og, fmt("NOG mIoU %.4f <= OG mIoU %.4f", nog, og)};
}

// 5
Outcome iou_falls_with_occlusion(const Workdir& w) {
    const auto r = load_report(w);
    bool pass = true;
    std::string detail = "IoU[0.5,1] <= IoU[0,0.1):";
    for (const char* m : {"raw", "convex", "convex_r", "nog:neural", "og:neural"}) {
        const auto lo = r.value(m, "amodal_miou", bin_label(0));
        const auto hi = r.value(m, "amodal_miou", bin_label(kNumBins - 1));
        const bool ok = lo && hi && *hi <= *lo;
        pass = pass && ok;
        detail += fmt(" %s %.4f vs %.4f%s;", m, hi.value_or(NAN), lo.value_or(NAN), ok ? "" : " (FAIL)");
    }
    return {pass, detail};
}

// 6
Outcome case2_clamp(const Workdir& w) {
    const auto ck = load_checkpoint(w.checkpoint().string());
    const NeuralCompleter neural(ck.net, ck.metadata.value("use_rgb", false));
    const auto scenes = scenes_from(0, kEvalScenes);
    const InstancePool pool(scenes);
    std::mt19937_64 rng(123);
    constexpr int kInputs = 500;
    int exact = 0;
    double added = 0;
    for (int k = 0; k < kInputs; ++k) {
        const std::size_t t = (static_cast<std::size_t>(k) * 7919) % pool.size();
        const auto& a = pool[t];
        const auto eraser = subtract(sample_eraser(pool, rng, t, EraserUse::Case2), a.modal);
        CompletionContext ctx;
        ctx.image = a.image;
        ctx.category = a.category_id;
        if (neural.complete_mask(a.modal, eraser, ctx) == a.modal) ++exact;
        const auto raw = neural.raw_complete(a.modal, eraser, ctx);
        added += static_cast<double>(area(subtract(raw, a.modal))) / static_cast<double>(area(a.modal));
    }
    const double mean_added = added / kInputs;
    return {exact == kInputs && mean_added < 0.02,
            fmt("case-2 inputs: clamped output == modal on %d/%d; raw output adds %.2f%% of target area (< 2%%)",
                exact, kInputs, 100 * mean_added)};
}

// 7
Outcome gradcheck(const Workdir&) {
    double worst = 0;
    std::string worst_name;
    std::size_t checked = 0;
    for (const auto& [name, r] : nn::gradcheck_all_layers(7)) {
        checked += r.checked;
        if (r.max_rel_error >= worst) {
            worst = r.max_rel_error;
            worst_name = name;
        }
    }
    return {worst < 1e-4, fmt("gradcheck on 8x8 inputs: %zu entries, max relative error %.2e (%s) < 1e-4", checked,
                              worst, worst_name.c_str())};
}

// 8
Outcome case_fraction(const Workdir&) {
    const auto scenes = scenes_from(0, 50);
    const InstancePool pool(scenes);
    const MaskSampleStream stream(pool, 0.8, 5);
    constexpr int kSamples = 10000;
    int case1 = 0;
    for (int i = 0; i < kSamples; ++i)
        if (stream.sample(static_cast<std::uint64_t>(i)).case_id == 1) ++case1;
    const double f = static_cast<double>(case1) / kSamples;
    return {std::abs(f - 0.8) <= 0.02, fmt("case-1 fraction %.4f over %d samples (0.8 +- 0.02)", f, kSamples)};
}

// 9
Outcome round_trip(const Workdir&) {
    CompleterFactory factory;
    int identical = 0;
    constexpr int kOracleScenes = 20;
    for (int s = 0; s < kOracleScenes; ++s) {
        const auto scene = render_scene(sample_scene(static_cast<std::uint64_t>(s)));
        const auto res = deocclude(scene, DeoccludeOptions{}, factory);
        if (render(res.layered) == scene.image) ++identical;
    }

    SceneSamplerConfig flat;
    flat.textured = false;
    constexpr int kFlatScenes = 20;
    int worst = 0;
    std::size_t filled = 0;
    DeoccludeOptions diffusion;
    diffusion.content = ContentSpec{ContentSpec::Kind::Diffusion, {}};
    for (int s = 0; s < kFlatScenes; ++s) {
        const auto scene = render_scene(sample_scene(static_cast<std::uint64_t>(s), flat));
        const auto res = deocclude(scene, diffusion, factory);
        auto compare = [&](const RgbImage& got, const RgbImage& want, const BinaryMask& region) {
            for (int y = 0; y < region.height(); ++y)
                for (int x = 0; x < region.width(); ++x) {
                    if (!region.at(x, y)) continue;
                    ++filled;
                    for (int c = 0; c < 3; ++c)
                        worst = std::max(worst, std::abs(int(got.at(x, y)[c]) - int(want.at(x, y)[c])));
                }
        };
        for (std::size_t i = 0; i < scene.size(); ++i)
            compare(res.layered.layer(static_cast<int>(i)).rgb, scene.object_raster(i),
                    subtract(scene.objects[i].amodal, scene.objects[i].modal));
        BinaryMask covered(scene.width(), scene.height());
        for (const auto& m : scene.modal_masks()) covered = unite(covered, m);
        compare(res.layered.background, scene.background_raster(), covered);
    }
    return {identical == kOracleScenes && worst <= 1,
            fmt("round trip: %d/%d oracle decompositions re-render identically; diffusion on %d flat scenes max "
                "error %d/255 over %zu filled pixels (<= 1)",
                identical, kOracleScenes, kFlatScenes, worst, filled)};
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files) {
    std::vector<fs::path> fa, fb;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    if (fa != fb) return false;
    files += fa.size();
    for (const auto& f : fa)
        if (read_file((a / f).string()) != read_file((b / f).string())) return false;
    return true;
}

// 10
Outcome determinism(const Workdir& w) {
    const auto root = w.root / "determinism";
    fs::remove_all(root);
    for (const char* run : {"a", "b"}) {
        const auto d = root / run;
        const auto data = (d / "data").string();
        const auto ck = (d / "model" / "m.json").string();
        run_cli({"synth", "--seed", "77", "--n-scenes", "6", "--out", data});
        run_cli({"train-m", "--data", data, "--out", ck, "--seed", "3", "--iters", "20", "--batch", "4", "--width", "4",
                 "--workers", "1", "--log", (d / "model" / "loss.csv").string()});
        run_cli({"deocclude", "--scene", data + "/" + dataset_file_name(2), "--completer", "neural:" + ck, "--out",
                 (d / "deocc").string()});
        write_text((d / "methods.json").string(), json{{"completers", {"oracle", "neural:" + ck}}}.dump());
        run_cli({"eval", "--data", data, "--methods", (d / "methods.json").string(), "--out", (d / "eval").string()});
    }
    std::size_t files = 0;
    std::string detail = "two runs byte-identical:";
    bool pass = true;
    for (const char* part : {"data", "model", "deocc", "eval"}) {
        const bool ok = same_tree(root / "a" / part, root / "b" / part, files);
        pass = pass && ok;
        detail += fmt(" %s %s;", part, ok ? "ok" : "DIFFERS");
    }
    detail += fmt(" %zu files", files);
    fs::remove_all(root);
    return {pass, detail};
}

struct Criterion {
    int number;
    bool needs_model;
    std::function<Outcome(const Workdir&)> check;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all{
        {1, false, oracle_identity},          {2, false, oracle_cycle},  {3, true, neural_quality},
        {4, true, nog_below_og},              {5, true, iou_falls_with_occlusion},
        {6, true, case2_clamp},               {7, false, gradcheck},     {8, false, case_fraction},
        {9, false, round_trip},               {10, false, determinism},
    };
    return all;
}

bool report(const Criterion& c, const Workdir& w) {
    Outcome o;
    try {
        o = c.check(w);
    } catch (const std::exception& e) {
        o = {false, std::string("error: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << fmt(" [%02d] ", c.number) << o.detail << std::endl;
    return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app("acceptance checks");
    std::string workdir = (fs::temp_directory_path() / "deocc_acceptance").string();
    int only = 0;
    bool prepare_only = false;
    app.add_option("--workdir", workdir, "where the trained model and report live");
    app.add_option("--only", only, "check a single criterion")->check(CLI::Range(1, 10));
    app.add_flag("--prepare", prepare_only, "train and evaluate the mask network, then exit");
    CLI11_PARSE(app, argc, argv);

    const Workdir w{workdir};
    try {
        if (prepare_only) {
            prepare(w);
            return 0;
        }
        bool pass = true;
        for (const auto& c : criteria()) {
            if (only != 0 && c.number != only) continue;
            if (c.needs_model && only == 0) prepare(w);
            if (c.needs_model && !fs::exists(w.stamp())) {
                std::cout << "FAIL" << fmt(" [%02d] ", c.number) << "model not prepared; run --prepare first\n";
                pass = false;
                continue;
            }
            pass = report(c, w) && pass;
        }
        return pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "acceptance: " << e.what() << "\n";
        return 1;
    }
}
