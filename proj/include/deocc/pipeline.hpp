#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "deocc/completers.hpp"
#include "deocc/eval.hpp"
#include "deocc/ordering.hpp"
#include "deocc/recompose.hpp"
#include "deocc/scene.hpp"

namespace deocc {

/// "oracle", "diffusion" or "neural:<checkpoint>".
struct ContentSpec {
    enum class Kind { Oracle, Diffusion, Neural };
    Kind kind = Kind::Diffusion;
    std::string checkpoint;

    static ContentSpec parse(const std::string& text);
    std::string to_string() const;
};

struct DeoccludeOptions {
    CompleterSpec completer;
    /// Unset: oracle content for the oracle completer, diffusion otherwise.
    std::optional<ContentSpec> content;
    CropPolicy crop;
    int dilation_radius = 1;
};

struct DeoccludeResult {
    OcclusionGraph graph;
    GraphDiagnostics diagnostics;
    std::vector<BinaryMask> amodal;  // indexed by object id
    LayeredScene layered;
};

/// Ordering, OG amodal completion and content completion for every object.
/// Neural checkpoints are loaded through (and cached in) `factory`.
DeoccludeResult deocclude(const Scene& scene, const DeoccludeOptions& options, CompleterFactory& factory);

/// {"graph", "amodal":[{"id","rle"}], "layers": manifest, "ties"}
nlohmann::json deocclusion_to_json(const DeoccludeResult& result);

/// graph.json, graph.dot, amodal_<id>.png, deocclusion.json and the layered
/// scene (manifest.json, layer_<id>.png, background.png) under `dir`.
void write_deocclusion(const std::string& dir, const DeoccludeResult& result);

std::unique_ptr<ContentCompleter> make_content_completer(const ContentSpec& spec, const Scene& scene);

}  // namespace deocc
