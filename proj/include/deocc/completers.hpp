#pragma once

#include <memory>
#include <optional>
#include <string>

#include "deocc/crop.hpp"
#include "deocc/image.hpp"
#include "deocc/mask.hpp"
#include "deocc/scene.hpp"
#include "deocc/train.hpp"

namespace deocc {

/// Per-call information a completer may use. object_id only matters to the
/// oracle implementations, which look the ground truth up by it.
struct CompletionContext {
    const RgbImage* image = nullptr;
    int category = 1;
    int num_categories = kNumShapeKinds;
    CropPolicy crop;
    std::optional<int> object_id;
};

/// Partial mask completion. Implementations promise output ⊇ target_modal
/// and output \ target_modal ⊆ eraser (unrefined Convex excepted).
class PartialCompleter {
public:
    virtual ~PartialCompleter() = default;
    virtual BinaryMask complete_mask(const BinaryMask& target_modal, const BinaryMask& eraser,
                                     const CompletionContext& ctx) const = 0;
    virtual std::string name() const = 0;
    /// False only for baselines that may add pixels outside the eraser.
    virtual bool honors_contract() const { return true; }
};

/// Fills `region` of an image. Pixels outside the region come back unchanged.
class ContentCompleter {
public:
    virtual ~ContentCompleter() = default;
    virtual RgbImage fill(const RgbImage& image, const BinaryMask& region, const BinaryMask& guide,
                          const CompletionContext& ctx) const = 0;
    virtual std::string name() const = 0;
};

/// union(modal_i, amodal_i ∩ eraser).
BinaryMask oracle_complete(const Scene& scene, int i, const BinaryMask& eraser);

class OracleCompleter final : public PartialCompleter {
public:
    explicit OracleCompleter(const Scene& scene) : scene_(&scene) {}
    BinaryMask complete_mask(const BinaryMask& target_modal, const BinaryMask& eraser,
                             const CompletionContext& ctx) const override;
    std::string name() const override { return "oracle"; }

private:
    const Scene* scene_;
};

/// Pixels whose centers fall inside (or on) the convex hull of the mask's
/// pixel centers. An empty mask gives an empty hull.
BinaryMask convex_hull_mask(const BinaryMask& m);

/// Hull of the modal mask. Refined mode clips to modal ∪ eraser.
BinaryMask convex_complete(const BinaryMask& target_modal, const BinaryMask& eraser, bool refined);

class ConvexCompleter final : public PartialCompleter {
public:
    explicit ConvexCompleter(bool refined) : refined_(refined) {}
    BinaryMask complete_mask(const BinaryMask& target_modal, const BinaryMask& eraser,
                             const CompletionContext&) const override {
        return convex_complete(target_modal, eraser, refined_);
    }
    std::string name() const override { return refined_ ? "convex_r" : "convex"; }
    bool honors_contract() const override { return refined_; }

private:
    bool refined_;
};

class NeuralCompleter final : public PartialCompleter {
public:
    explicit NeuralCompleter(Net net, bool use_rgb = false);

    BinaryMask complete_mask(const BinaryMask& target_modal, const BinaryMask& eraser,
                             const CompletionContext& ctx) const override;
    /// Thresholded network output pasted back to the canvas, before the
    /// contract clamp.
    BinaryMask raw_complete(const BinaryMask& target_modal, const BinaryMask& eraser,
                            const CompletionContext& ctx) const;
    std::string name() const override { return "neural"; }
    const Net& net() const { return net_; }

private:
    Net net_;
    bool use_rgb_;
};

/// Network input for one target/eraser pair, in crop space.
Tensor neural_mask_input(const BinaryMask& target_modal, const BinaryMask& eraser,
                         const CompletionContext& ctx, bool use_rgb, CropTransform& crop_out);

struct DiffusionConfig {
    double tolerance = 1e-3;  // max per-channel change, 0..255 units
    int max_iterations = 500;
};

/// Jacobi harmonic fill. A region pixel averages its in-canvas 8-neighbors
/// that are unknown (region) or known. In a region component that touches
/// the guide, known pixels outside the guide are ignored. Throws
/// NoBoundaryError if a component has no known neighbor.
RgbImage diffusion_fill(const RgbImage& image, const BinaryMask& region, const BinaryMask& guide,
                        const DiffusionConfig& cfg = {});

class DiffusionContentCompleter final : public ContentCompleter {
public:
    explicit DiffusionContentCompleter(DiffusionConfig cfg = {}) : cfg_(cfg) {}
    RgbImage fill(const RgbImage& image, const BinaryMask& region, const BinaryMask& guide,
                  const CompletionContext&) const override {
        return diffusion_fill(image, region, guide, cfg_);
    }
    std::string name() const override { return "diffusion"; }

private:
    DiffusionConfig cfg_;
};

/// Copies ground-truth texture into the region: the object's raster when
/// ctx.object_id is set, the background plate otherwise.
class OracleContentCompleter final : public ContentCompleter {
public:
    explicit OracleContentCompleter(const Scene& scene) : scene_(&scene) {}
    RgbImage fill(const RgbImage& image, const BinaryMask& region, const BinaryMask& guide,
                  const CompletionContext& ctx) const override;
    std::string name() const override { return "oracle_content"; }

private:
    const Scene* scene_;
};

/// Network fill for object regions. Background requests (no object_id) go
/// to diffusion, since the net only ever saw object crops.
class NeuralContentCompleter final : public ContentCompleter {
public:
    explicit NeuralContentCompleter(Net net, DiffusionConfig fallback = {});
    RgbImage fill(const RgbImage& image, const BinaryMask& region, const BinaryMask& guide,
                  const CompletionContext& ctx) const override;
    std::string name() const override { return "neural_c"; }

private:
    Net net_;
    DiffusionConfig fallback_;
};

}  // namespace deocc
