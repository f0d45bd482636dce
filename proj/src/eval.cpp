#include "deocc/eval.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "deocc/errors.hpp"
#include "deocc/image.hpp"

namespace deocc {

CompleterSpec CompleterSpec::parse(const std::string& text) {
    CompleterSpec s;
    if (text == "oracle") {
        s.kind = Kind::Oracle;
    } else if (text == "convex") {
        s.kind = Kind::Convex;
    } else if (text == "convex_r") {
        s.kind = Kind::ConvexR;
    } else if (text.starts_with("neural:") && text.size() > 7) {
        s.kind = Kind::Neural;
        s.checkpoint = text.substr(7);
    } else {
        throw SpecificationError("unknown completer '" + text + "' (oracle | convex | convex_r | neural:CKPT)");
    }
    return s;
}

std::string CompleterSpec::to_string() const {
    return kind == Kind::Neural ? "neural:" + checkpoint : label();
}

std::string CompleterSpec::label() const {
    switch (kind) {
        case Kind::Oracle: return "oracle";
        case Kind::Convex: return "convex";
        case Kind::ConvexR: return "convex_r";
        case Kind::Neural: return "neural";
    }
    return "?";
}

namespace {

// Non-owning view so cached networks can be handed out as unique_ptr.
class SharedCompleter final : public PartialCompleter {
public:
    explicit SharedCompleter(std::shared_ptr<const NeuralCompleter> inner) : inner_(std::move(inner)) {}
    BinaryMask complete_mask(const BinaryMask& m, const BinaryMask& e, const CompletionContext& c) const override {
        return inner_->complete_mask(m, e, c);
    }
    std::string name() const override { return inner_->name(); }

private:
    std::shared_ptr<const NeuralCompleter> inner_;
};

}  // namespace

std::unique_ptr<PartialCompleter> CompleterFactory::make(const CompleterSpec& spec, const Scene& scene) {
    switch (spec.kind) {
        case CompleterSpec::Kind::Oracle: return std::make_unique<OracleCompleter>(scene);
        case CompleterSpec::Kind::Convex: return std::make_unique<ConvexCompleter>(false);
        case CompleterSpec::Kind::ConvexR: return std::make_unique<ConvexCompleter>(true);
        case CompleterSpec::Kind::Neural: {
            for (const auto& [path, c] : cache_)
                if (path == spec.checkpoint) return std::make_unique<SharedCompleter>(c);
            auto ck = load_checkpoint(spec.checkpoint);
            const bool rgb = ck.net.config().in_channels == mask_input_channels(true);
            auto c = std::make_shared<const NeuralCompleter>(std::move(ck.net), rgb);
            cache_.emplace_back(spec.checkpoint, c);
            return std::make_unique<SharedCompleter>(c);
        }
    }
    throw SpecificationError("unsupported completer");
}

EvalConfig eval_config_from_json(const nlohmann::json& j) {
    try {
        EvalConfig cfg;
        if (!j.is_object()) throw FormatError("eval config must be a JSON object");
        const auto completers = j.value("completers", nlohmann::json::array());
        if (!completers.is_array()) throw FormatError("eval config: completers must be an array");
        for (const auto& c : completers)
            cfg.completers.push_back(CompleterSpec::parse(c.get<std::string>()));
        cfg.baseline.larger_in_front = j.value("area_larger_in_front", true);
        cfg.dilation_radius = j.value("dilation_radius", 1);
        cfg.baseline.dilation_radius = cfg.dilation_radius;
        if (j.contains("crop")) {
            cfg.crop.enlarge_ratio = j["crop"].value("enlarge_ratio", cfg.crop.enlarge_ratio);
            cfg.crop.out_size = j["crop"].value("out_size", cfg.crop.out_size);
        }
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed eval config: ") + e.what());
    }
}

nlohmann::json eval_config_to_json(const EvalConfig& cfg) {
    nlohmann::json completers = nlohmann::json::array();
    for (const auto& c : cfg.completers) completers.push_back(c.to_string());
    return {{"completers", completers},
            {"area_larger_in_front", cfg.baseline.larger_in_front},
            {"dilation_radius", cfg.dilation_radius},
            {"crop", {{"enlarge_ratio", cfg.crop.enlarge_ratio}, {"out_size", cfg.crop.out_size}}}};
}

int occlusion_bin(double ratio) {
    if (ratio < 0.1) return 0;
    if (ratio < 0.3) return 1;
    if (ratio < 0.5) return 2;
    return 3;
}

std::string bin_label(int bin) {
    static const std::array<const char*, kNumBins> labels{"[0,0.1)", "[0.1,0.3)", "[0.3,0.5)", "[0.5,1]"};
    if (bin < 0 || bin >= kNumBins) throw DomainError("bin index out of range");
    return labels[static_cast<std::size_t>(bin)];
}

std::optional<double> EvalReport::value(const std::string& method, const std::string& metric,
                                        const std::string& bin) const {
    for (const auto& r : rows)
        if (r.method == method && r.metric == metric && r.bin == bin) return r.value;
    return std::nullopt;
}

namespace {

struct Accum {
    std::array<double, kNumBins + 1> sum{};  // last slot: all
    std::array<std::size_t, kNumBins + 1> n{};

    void add(int bin, double v) {
        sum[static_cast<std::size_t>(bin)] += v;
        ++n[static_cast<std::size_t>(bin)];
        sum[kNumBins] += v;
        ++n[kNumBins];
    }
};

struct MethodAccum {
    std::string name;
    bool has_order = false;
    bool has_iou = false;
    Accum order;
    Accum iou;
};

void add_order(MethodAccum& m, const OcclusionGraph& g, const Scene& scene, const std::vector<double>& ratios) {
    const auto pred = g.matrix();
    for (std::size_t i = 0; i < scene.size(); ++i)
        for (std::size_t j = i + 1; j < scene.size(); ++j) {
            const int gt = scene.gt_order[i][j];
            if (gt == 0) continue;
            const std::size_t occludee = gt == 1 ? j : i;
            m.order.add(occlusion_bin(ratios[occludee]), pred[i][j] == gt ? 1.0 : 0.0);
        }
}

void add_iou(MethodAccum& m, const std::vector<BinaryMask>& pred, const Scene& scene,
             const std::vector<double>& ratios) {
    for (std::size_t i = 0; i < scene.size(); ++i)
        if (const auto v = iou(pred[i], scene.objects[i].amodal)) m.iou.add(occlusion_bin(ratios[i]), *v);
}

}  // namespace

EvalReport run_eval(const std::vector<Scene>& scenes, const EvalConfig& cfg, std::uint64_t seed) {
    if (scenes.empty()) throw DomainError("evaluation needs at least one scene");
    std::vector<MethodAccum> methods;
    auto add_method = [&](const std::string& name, bool order, bool iou_metric) {
        methods.push_back(MethodAccum{name, order, iou_metric, {}, {}});
        return methods.size() - 1;
    };
    const auto m_raw = add_method("raw", false, true);
    const auto m_area = add_method("area", true, false);
    const auto m_yaxis = add_method("yaxis", true, false);
    const auto m_convex = add_method("convex", true, true);
    const auto m_convex_r = add_method("convex_r", false, true);
    std::vector<std::pair<std::size_t, std::size_t>> per_completer;  // (nog, og)
    for (const auto& c : cfg.completers) {
        const auto nog = add_method("nog:" + c.label(), false, true);
        const auto og = add_method("og:" + c.label(), true, true);
        per_completer.emplace_back(nog, og);
    }

    CompleterFactory factory;
    const ConvexCompleter convex_refined(true);
    for (const auto& scene : scenes) {
        const auto modals = scene.modal_masks();
        const auto contexts = object_contexts(&scene.image, scene.categories(), cfg.crop);
        std::vector<double> ratios;
        for (std::size_t i = 0; i < scene.size(); ++i) ratios.push_back(occlusion_ratio(scene, i));

        add_iou(methods[m_raw], modals, scene, ratios);
        add_order(methods[m_area], baseline_graph(BaselineKind::Area, modals, cfg.baseline), scene, ratios);
        add_order(methods[m_yaxis], baseline_graph(BaselineKind::YAxis, modals, cfg.baseline), scene, ratios);
        const auto convex_graph = baseline_graph(BaselineKind::Convex, modals, cfg.baseline);
        add_order(methods[m_convex], convex_graph, scene, ratios);
        std::vector<BinaryMask> hulls;
        for (const auto& m : modals) hulls.push_back(convex_complete(m, BinaryMask(m.width(), m.height()), false));
        add_iou(methods[m_convex], hulls, scene, ratios);

        std::optional<OcclusionGraph> reference;
        for (std::size_t c = 0; c < cfg.completers.size(); ++c) {
            const auto completer = factory.make(cfg.completers[c], scene);
            const auto graph = build_order_graph(*completer, modals, contexts, cfg.dilation_radius);
            if (!reference) reference = graph;
            add_order(methods[per_completer[c].second], graph, scene, ratios);
            add_iou(methods[per_completer[c].second], amodal_all_og(*completer, modals, graph, contexts), scene,
                    ratios);
            add_iou(methods[per_completer[c].first],
                    amodal_all_nog(*completer, modals, contexts, cfg.dilation_radius), scene, ratios);
        }
        add_iou(methods[m_convex_r],
                amodal_all_og(convex_refined, modals, reference ? *reference : convex_graph, contexts), scene,
                ratios);
    }

    EvalReport report;
    report.seed = seed;
    report.scenes = scenes.size();
    auto emit = [&](const std::string& method, const std::string& metric, const Accum& a) {
        auto row = [&](std::size_t slot, const std::string& bin) {
            ReportRow r{method, metric, bin, std::nullopt, a.n[slot]};
            if (a.n[slot] > 0) r.value = a.sum[slot] / static_cast<double>(a.n[slot]);
            report.rows.push_back(std::move(r));
        };
        row(kNumBins, "all");
        for (int b = 0; b < kNumBins; ++b) row(static_cast<std::size_t>(b), bin_label(b));
    };
    for (const auto& m : methods) {
        if (m.has_order) emit(m.name, "ordering_accuracy", m.order);
        if (m.has_iou) emit(m.name, "amodal_miou", m.iou);
    }
    return report;
}

EvalReport run_eval(const std::string& dataset_dir, const EvalConfig& cfg, std::uint64_t seed) {
    return run_eval(load_dataset(dataset_dir), cfg, seed);
}

std::string report_csv(const EvalReport& report) {
    std::ostringstream os;
    os << "method,metric,bin,value,n\n";
    for (const auto& r : report.rows) {
        os << r.method << ',' << r.metric << ',' << r.bin << ',';
        if (r.value) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6f", *r.value);
            os << buf;
        }
        os << ',' << r.n << '\n';
    }
    return os.str();
}

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"method", r.method},
                        {"metric", r.metric},
                        {"bin", r.bin},
                        {"value", r.value ? nlohmann::json(*r.value) : nlohmann::json(nullptr)},
                        {"n", r.n}});
    return {{"seed", report.seed}, {"scenes", report.scenes}, {"rows", rows}};
}

EvalReport report_from_json(const nlohmann::json& j) {
    try {
        EvalReport r;
        r.seed = j.at("seed").get<std::uint64_t>();
        r.scenes = j.at("scenes").get<std::size_t>();
        for (const auto& row : j.at("rows")) {
            ReportRow x{row.at("method").get<std::string>(), row.at("metric").get<std::string>(),
                        row.at("bin").get<std::string>(), std::nullopt, row.at("n").get<std::size_t>()};
            if (!row.at("value").is_null()) x.value = row["value"].get<double>();
            r.rows.push_back(std::move(x));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed eval report: ") + e.what());
    }
}

void write_report(const EvalReport& report, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
    const std::filesystem::path root(dir);
    write_text((root / "report.csv").string(), report_csv(report));
    write_text((root / "report.json").string(), report_to_json(report).dump(2) + "\n");
}

}  // namespace deocc
