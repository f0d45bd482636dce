#include "deocc/pipeline.hpp"

#include <filesystem>

#include <nlohmann/json.hpp>

#include "deocc/amodal.hpp"
#include "deocc/content.hpp"
#include "deocc/errors.hpp"
#include "deocc/image.hpp"
#include "deocc/train.hpp"

namespace deocc {

ContentSpec ContentSpec::parse(const std::string& text) {
    ContentSpec s;
    if (text == "oracle") {
        s.kind = Kind::Oracle;
    } else if (text == "diffusion") {
        s.kind = Kind::Diffusion;
    } else if (text.starts_with("neural:") && text.size() > 7) {
        s.kind = Kind::Neural;
        s.checkpoint = text.substr(7);
    } else {
        throw SpecificationError("unknown content completer '" + text + "' (oracle | diffusion | neural:CKPT)");
    }
    return s;
}

std::string ContentSpec::to_string() const {
    switch (kind) {
        case Kind::Oracle: return "oracle";
        case Kind::Diffusion: return "diffusion";
        case Kind::Neural: return "neural:" + checkpoint;
    }
    return "diffusion";
}

std::unique_ptr<ContentCompleter> make_content_completer(const ContentSpec& spec, const Scene& scene) {
    switch (spec.kind) {
        case ContentSpec::Kind::Oracle: return std::make_unique<OracleContentCompleter>(scene);
        case ContentSpec::Kind::Diffusion: return std::make_unique<DiffusionContentCompleter>();
        case ContentSpec::Kind::Neural: {
            auto ck = load_checkpoint(spec.checkpoint);
            if (ck.net.config().out_channels != 3)
                throw SpecificationError("checkpoint " + spec.checkpoint + " is not a content network");
            return std::make_unique<NeuralContentCompleter>(std::move(ck.net));
        }
    }
    throw SpecificationError("unsupported content completer");
}

DeoccludeResult deocclude(const Scene& scene, const DeoccludeOptions& options, CompleterFactory& factory) {
    const auto completer = factory.make(options.completer, scene);
    const ContentSpec content_spec =
        options.content.value_or(options.completer.kind == CompleterSpec::Kind::Oracle
                                     ? ContentSpec{ContentSpec::Kind::Oracle, {}}
                                     : ContentSpec{ContentSpec::Kind::Diffusion, {}});
    const auto content = make_content_completer(content_spec, scene);

    const auto modals = scene.modal_masks();
    const auto contexts = object_contexts(&scene.image, scene.categories(), options.crop);
    DeoccludeResult r;
    r.graph = build_order_graph(*completer, modals, contexts, options.dilation_radius, &r.diagnostics);
    r.amodal = amodal_all_og(*completer, modals, r.graph, contexts);
    auto d = decompose_scene(scene.image, modals, r.amodal, contexts, *content);
    r.layered = make_layered_scene(std::move(d), r.graph);
    return r;
}

nlohmann::json deocclusion_to_json(const DeoccludeResult& result) {
    nlohmann::json amodal = nlohmann::json::array();
    for (std::size_t i = 0; i < result.amodal.size(); ++i)
        amodal.push_back({{"id", static_cast<int>(i)},
                          {"width", result.amodal[i].width()},
                          {"height", result.amodal[i].height()},
                          {"rle", rle_encode(result.amodal[i])}});
    nlohmann::json ties = nlohmann::json::array();
    for (auto [a, b] : result.diagnostics.ties) ties.push_back({a, b});
    return {{"graph", graph_to_json(result.graph)},
            {"amodal", std::move(amodal)},
            {"layers", layer_manifest(result.layered)},
            {"pairs_evaluated", result.diagnostics.pairs_evaluated},
            {"ties", std::move(ties)}};
}

void write_deocclusion(const std::string& dir, const DeoccludeResult& result) {
    namespace fs = std::filesystem;
    save_layered_scene(dir, result.layered);
    const fs::path root(dir);
    write_text((root / "graph.json").string(), graph_to_json(result.graph).dump(2) + "\n");
    write_text((root / "graph.dot").string(), graph_to_dot(result.graph));
    for (std::size_t i = 0; i < result.amodal.size(); ++i)
        write_file((root / ("amodal_" + std::to_string(i) + ".png")).string(), encode_png(result.amodal[i]));
    write_text((root / "deocclusion.json").string(), deocclusion_to_json(result).dump() + "\n");
}

}  // namespace deocc
