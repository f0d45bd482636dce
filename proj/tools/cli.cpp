#include "cli.hpp"

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "deocc/errors.hpp"
#include "deocc/eval.hpp"
#include "deocc/image.hpp"
#include "deocc/pipeline.hpp"
#include "deocc/recompose.hpp"
#include "deocc/scene.hpp"
#include "deocc/selfsup.hpp"
#include "deocc/service.hpp"
#include "deocc/train.hpp"

namespace deocc::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string config;
    std::uint64_t seed = 0;

    // synth
    std::size_t n_scenes = 100;
    SceneSamplerConfig sampler;
    std::string demo;

    // shared by several commands
    std::string out;
    std::string data;
    double enlarge_ratio = 2.0;
    int crop_size = 64;
    int dilation = 1;

    // train-m / train-c
    double gamma = 0.8;
    int iters = 3000;
    double lr = 0.01;
    double momentum = 0.9;
    int batch = 16;
    int width = 16;
    int levels = kDefaultMaskLevels;
    int workers = 1;
    double cpu_budget = 0;
    bool rgb = false;
    std::string log;

    // deocclude / recompose / eval / serve
    std::string scene;
    std::string completer = "oracle";
    std::string content;
    std::string layers;
    std::string edits;
    std::string methods;
    std::string host = "127.0.0.1";
    int port = 8080;
};

nlohmann::json read_json_file(const std::string& path) {
    const auto bytes = read_file(path);
    try {
        return nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path + ": not valid JSON: " + e.what());
    }
}

std::string option_key(const CLI::Option* opt) { return opt->get_single_name(); }

std::vector<std::string> config_inputs(const nlohmann::json& v) {
    std::vector<std::string> in;
    auto one = [](const nlohmann::json& x) { return x.is_string() ? x.get<std::string>() : x.dump(); };
    if (v.is_array())
        for (const auto& x : v) in.push_back(one(x));
    else
        in.push_back(one(v));
    return in;
}

// Config values fill options the command line left unset, so flags win.
// Layout: top-level keys for global options, one object per subcommand.
void apply_config(CLI::App& app, CLI::App& sub, const nlohmann::json& cfg) {
    if (!cfg.is_object()) throw CLI::ValidationError("--config", "config file must hold a JSON object");
    std::set<std::string> known;
    for (const auto* s : app.get_subcommands({})) known.insert(s->get_name());
    for (const auto* s : app.get_subcommands({}))
        for (const auto* o : s->get_options()) known.insert(option_key(o));
    for (const auto* o : app.get_options()) known.insert(option_key(o));
    for (const auto& [key, value] : cfg.items()) {
        if (!known.count(key)) throw CLI::ValidationError("--config", "unknown key '" + key + "'");
        if (const auto* s = app.get_subcommand_no_throw(key); s && !value.is_object())
            throw CLI::ValidationError("--config", "section '" + key + "' must be an object");
    }
    const nlohmann::json section = cfg.value(sub.get_name(), nlohmann::json::object());
    for (const auto& [key, value] : section.items()) {
        bool found = false;
        for (const auto* o : sub.get_options()) found = found || option_key(o) == key;
        if (!found) throw CLI::ValidationError("--config", "unknown key '" + sub.get_name() + "." + key + "'");
    }
    auto fill = [&](CLI::App& owner, const nlohmann::json& scope) {
        for (auto* o : owner.get_options()) {
            const auto key = option_key(o);
            if (key == "help" || key == "config" || o->count() > 0 || !scope.contains(key)) continue;
            o->add_result(config_inputs(scope[key]));
            o->run_callback();
        }
    };
    fill(sub, section);
    fill(sub, cfg);  // top-level values reach any subcommand option of that name
    fill(app, cfg);
}

void require(const CLI::App& sub, const std::string& name, const std::string& value) {
    if (value.empty()) throw CLI::RequiredError("--" + name + " (" + sub.get_name() + ")");
}

CropPolicy crop_of(const Options& o) { return CropPolicy{o.enlarge_ratio, o.crop_size}; }

nn::SGDConfig sgd_of(const Options& o) {
    nn::SGDConfig c;
    c.learning_rate = o.lr;
    c.momentum = o.momentum;
    c.batch_size = o.batch;
    c.iterations = o.iters;
    c.seed = o.seed;
    return c;
}

void ensure_parent(const std::string& file) {
    const auto parent = fs::path(file).parent_path();
    if (parent.empty()) return;
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw IoError("cannot create directory " + parent.string() + ": " + ec.message());
}

int cmd_synth(const Options& o, std::ostream& out) {
    if (!o.demo.empty()) {
        SceneSpec spec;
        if (o.demo == "a_under_b")
            spec = make_a_under_b_scene();
        else if (o.demo == "cyclic")
            spec = make_cyclic_scene();
        else
            throw SpecificationError("unknown demo '" + o.demo + "' (a_under_b | cyclic)");
        std::error_code ec;
        fs::create_directories(o.out, ec);
        if (ec) throw IoError("cannot create directory " + o.out + ": " + ec.message());
        save_scene_file((fs::path(o.out) / dataset_file_name(0)).string(), render_scene(spec));
        out << "wrote demo scene " << o.demo << " to " << o.out << "\n";
        return 0;
    }
    synthesize_dataset(o.out, o.seed, o.n_scenes, o.sampler);
    out << "wrote " << o.n_scenes << " scenes to " << o.out << "\n";
    return 0;
}

TrainOptions train_options(const Options& o, std::ostream& out) {
    TrainOptions t;
    t.width = o.width;
    t.levels = o.levels;
    t.workers = o.workers;
    t.max_cpu_seconds = o.cpu_budget;
    const int every = std::max(1, o.iters / 20);
    t.on_iteration = [&out, every](const TrainLogEntry& e) {
        if (e.iteration % every == 0)
            out << "iteration " << e.iteration << " loss " << std::setprecision(5) << e.loss << "\n";
    };
    return t;
}

void finish_training(const Options& o, const TrainResult& r, nlohmann::json meta, std::ostream& out) {
    ensure_parent(o.out);
    meta["seed"] = o.seed;
    meta["iterations"] = o.iters;
    meta["learning_rate"] = o.lr;
    meta["momentum"] = o.momentum;
    meta["batch_size"] = o.batch;
    meta["final_loss"] = r.history.empty() ? 0.0 : r.history.back().loss;
    meta["iterations_run"] = r.history.size();
    meta["stopped_by_budget"] = r.stopped_by_budget;
    save_checkpoint(o.out, r.net, meta);
    if (!o.log.empty()) {
        ensure_parent(o.log);
        write_text(o.log, loss_history_csv(r.history));
    }
    out << "wrote checkpoint " << o.out << "\n";
}

int cmd_train_m(const Options& o, std::ostream& out) {
    const auto scenes = load_dataset(o.data);
    if (scenes.empty()) throw IoError("no scenes in " + o.data);
    const InstancePool pool(scenes);
    SampleConfig sc;
    sc.crop = crop_of(o);
    sc.use_rgb = o.rgb;
    const MaskSampleStream stream(pool, o.gamma, o.seed, sc);
    const auto r = train_pcnet_m(stream, sgd_of(o), train_options(o, out));
    finish_training(o, r, {{"kind", "pcnet_m"}, {"gamma", o.gamma}, {"use_rgb", o.rgb}}, out);
    return 0;
}

int cmd_train_c(const Options& o, std::ostream& out) {
    const auto scenes = load_dataset(o.data);
    if (scenes.empty()) throw IoError("no scenes in " + o.data);
    const InstancePool pool(scenes);
    SampleConfig sc;
    sc.crop = crop_of(o);
    const ContentSampleStream stream(pool, o.seed, sc);
    const auto r = train_pcnet_c_l1(stream, sgd_of(o), o.crop_size, train_options(o, out));
    finish_training(o, r, {{"kind", "pcnet_c"}}, out);
    return 0;
}

int cmd_deocclude(const Options& o, std::ostream& out) {
    const auto scene = load_scene_file(o.scene);
    DeoccludeOptions d;
    d.completer = CompleterSpec::parse(o.completer);
    if (!o.content.empty()) d.content = ContentSpec::parse(o.content);
    d.crop = crop_of(o);
    d.dilation_radius = o.dilation;
    CompleterFactory factory;
    const auto result = deocclude(scene, d, factory);
    write_deocclusion(o.out, result);
    const auto order = total_order(result.graph);
    out << "objects " << scene.size() << ", edges " << result.graph.edges().size() << ", cycles "
        << order.cycles.size() << "; wrote " << o.out << "\n";
    return 0;
}

int cmd_recompose(const Options& o, std::ostream& out) {
    const auto layered = load_layered_scene(o.layers);
    const auto script = edit_script_from_json(read_json_file(o.edits));
    const auto edited = apply_edits(layered, script);
    ensure_parent(o.out);
    write_file(o.out, encode_png(render(edited)));
    out << "applied " << script.edits.size() << " edits; wrote " << o.out << "\n";
    return 0;
}

int cmd_eval(const Options& o, std::ostream& out) {
    auto cfg = eval_config_from_json(read_json_file(o.methods));
    const auto report = run_eval(o.data, cfg, o.seed);
    write_report(report, o.out);
    for (const auto& row : report.rows) {
        if (row.bin != "all" || !row.value) continue;
        out << std::left << std::setw(22) << row.method << std::setw(20) << row.metric << std::fixed
            << std::setprecision(4) << *row.value << "\n";
    }
    out << "wrote " << o.out << "\n";
    return 0;
}

int cmd_serve(const Options& o, std::ostream& out) {
    ServiceConfig sc;
    sc.data_dir = o.data;
    sc.crop = crop_of(o);
    sc.dilation_radius = o.dilation;
    sc.default_completer = o.completer;
    CompleterSpec::parse(o.completer);  // reject a bad default before binding
    SceneService service(sc);
    HttpServer server(service);
    const int port = server.bind(o.host, o.port);
    out << "listening on http://" << o.host << ":" << port << std::endl;
    server.listen();
    return 0;
}

void add_crop(CLI::App* s, Options& o) {
    s->add_option("--enlarge-ratio", o.enlarge_ratio, "crop side / object bbox side")->check(CLI::PositiveNumber);
    s->add_option("--crop-size", o.crop_size, "network input side in pixels")->check(CLI::Range(8, 1024));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Self-supervised scene de-occlusion on synthetic desk-scale scenes", "deocc"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", o.config, "JSON config; command-line flags take precedence");
    app.add_option("--seed", o.seed, "random seed");

    auto* synth = app.add_subcommand("synth", "synthesize a dataset of scene JSON files");
    synth->add_option("--n-scenes", o.n_scenes, "number of scenes")->check(CLI::NonNegativeNumber);
    synth->add_option("--out", o.out, "output directory");
    synth->add_option("--width", o.sampler.width, "canvas width")->check(CLI::PositiveNumber);
    synth->add_option("--height", o.sampler.height, "canvas height")->check(CLI::PositiveNumber);
    synth->add_option("--min-objects", o.sampler.min_objects, "fewest objects per scene")->check(CLI::PositiveNumber);
    synth->add_option("--max-objects", o.sampler.max_objects, "most objects per scene")->check(CLI::PositiveNumber);
    synth->add_option("--overlap", o.sampler.overlap_target, "target mean occlusion ratio")->check(CLI::Range(0.0, 0.9));
    synth->add_option("--demo", o.demo, "write one demo scene instead (a_under_b | cyclic)");

    auto* train_m = app.add_subcommand("train-m", "train the mask completion network");
    auto* train_c = app.add_subcommand("train-c", "train the content completion network");
    for (auto* s : {train_m, train_c}) {
        s->add_option("--data", o.data, "dataset directory");
        s->add_option("--out", o.out, "checkpoint path");
        s->add_option("--iters", o.iters, "SGD iterations")->check(CLI::PositiveNumber);
        s->add_option("--lr", o.lr, "learning rate")->check(CLI::PositiveNumber);
        s->add_option("--momentum", o.momentum, "SGD momentum")->check(CLI::Range(0.0, 1.0));
        s->add_option("--batch", o.batch, "batch size")->check(CLI::PositiveNumber);
        s->add_option("--width", o.width, "base channel width")->check(CLI::PositiveNumber);
        s->add_option("--levels", o.levels, "UNet down/up levels")->check(CLI::Range(1, 4));
        s->add_option("--workers", o.workers, "threads per batch (1 = reproducible)")->check(CLI::PositiveNumber);
        s->add_option("--log", o.log, "loss history CSV path");
        s->add_option("--cpu-budget", o.cpu_budget, "stop early after this many CPU seconds (0 = off)")
            ->check(CLI::NonNegativeNumber);
        add_crop(s, o);
    }
    train_m->add_option("--gamma", o.gamma, "probability of a case-1 (partial completion) sample")
        ->check(CLI::Range(0.0, 1.0));
    train_m->add_flag("--rgb", o.rgb, "feed the erased RGB crop as extra input channels");

    auto* deocc = app.add_subcommand("deocclude", "order, complete and decompose one scene");
    deocc->add_option("--scene", o.scene, "scene JSON file");
    deocc->add_option("--completer", o.completer, "oracle | convex | convex_r | neural:CKPT");
    deocc->add_option("--content", o.content, "oracle | diffusion | neural:CKPT (default: oracle for the oracle completer, else diffusion)");
    deocc->add_option("--out", o.out, "output directory");
    deocc->add_option("--dilation", o.dilation, "neighbor test dilation radius")->check(CLI::NonNegativeNumber);
    add_crop(deocc, o);

    auto* recompose = app.add_subcommand("recompose", "apply an edit script to a layered scene and render it");
    recompose->add_option("--layers", o.layers, "layered scene directory (from deocclude)");
    recompose->add_option("--edits", o.edits, "edit script JSON");
    recompose->add_option("--out", o.out, "output PNG");

    auto* eval = app.add_subcommand("eval", "evaluate ordering and amodal completion on a dataset");
    eval->add_option("--data", o.data, "dataset directory");
    eval->add_option("--methods", o.methods, "evaluation config JSON");
    eval->add_option("--out", o.out, "report directory");

    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    serve->add_option("--host", o.host, "bind address");
    serve->add_option("--port", o.port, "TCP port (0 picks a free one)")->check(CLI::Range(0, 65535));
    serve->add_option("--data", o.data, "persistence directory (empty: memory only)");
    serve->add_option("--completer", o.completer, "default completer for deocclude requests");
    serve->add_option("--dilation", o.dilation, "neighbor test dilation radius")->check(CLI::NonNegativeNumber);
    add_crop(serve, o);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
        CLI::App* sub = app.get_subcommands().front();
        if (!o.config.empty()) apply_config(app, *sub, read_json_file(o.config));
        const std::map<CLI::App*, std::vector<std::pair<std::string, std::string*>>> required{
            {synth, {{"out", &o.out}}},
            {train_m, {{"data", &o.data}, {"out", &o.out}}},
            {train_c, {{"data", &o.data}, {"out", &o.out}}},
            {deocc, {{"scene", &o.scene}, {"out", &o.out}}},
            {recompose, {{"layers", &o.layers}, {"edits", &o.edits}, {"out", &o.out}}},
            {eval, {{"data", &o.data}, {"methods", &o.methods}, {"out", &o.out}}},
            {serve, {}}};
        for (const auto& [name, value] : required.at(sub)) require(*sub, name, *value);
        if (sub == synth && o.sampler.min_objects > o.sampler.max_objects)
            throw CLI::ValidationError("--min-objects", "must not exceed --max-objects");

        if (sub == synth) return cmd_synth(o, out);
        if (sub == train_m) return cmd_train_m(o, out);
        if (sub == train_c) return cmd_train_c(o, out);
        if (sub == deocc) return cmd_deocclude(o, out);
        if (sub == recompose) return cmd_recompose(o, out);
        if (sub == eval) return cmd_eval(o, out);
        return cmd_serve(o, out);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\nrun with --help for usage\n";
        return 2;
    } catch (const Error& e) {
        err << nlohmann::json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << nlohmann::json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    }
}

}  // namespace deocc::cli
