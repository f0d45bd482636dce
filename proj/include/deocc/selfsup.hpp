#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "deocc/crop.hpp"
#include "deocc/image.hpp"
#include "deocc/mask.hpp"
#include "deocc/scene.hpp"
#include "deocc/tensor.hpp"

namespace deocc {

/// One annotated instance usable as a target or as an eraser source.
struct Instance {
    BinaryMask modal;
    int category_id = 1;
    const RgbImage* image = nullptr;  // owning scene image, may be null
};

/// Modal-only view over a set of scenes: nothing here reads amodal masks or
/// ground-truth order. Scenes must share canvas dimensions.
class InstancePool {
public:
    InstancePool() = default;
    explicit InstancePool(const std::vector<Scene>& scenes);

    void add(Instance instance);
    std::size_t size() const { return instances_.size(); }
    const Instance& operator[](std::size_t i) const { return instances_[i]; }

private:
    std::vector<Instance> instances_;
};

enum class EraserUse { Case1, Case2 };

struct EraserPolicy {
    double min_overlap = 0.1;  // case 1: |A ∩ B| / |A| window
    double max_overlap = 0.7;
    int max_attempts = 200;
};

/// Translates `source` (another instance's modal mask) to a random offset
/// around `target` until it satisfies the case constraint; nullopt when the
/// attempts run out.
std::optional<BinaryMask> place_eraser(const BinaryMask& target, const BinaryMask& source,
                                       EraserUse use, std::mt19937_64& rng,
                                       const EraserPolicy& policy = {});

/// Picks another instance from the pool and places it. Throws
/// SamplingExhaustedError after policy.max_attempts placements.
BinaryMask sample_eraser(const InstancePool& pool, std::mt19937_64& rng, std::size_t target,
                         EraserUse use, const EraserPolicy& policy = {});

struct SampleConfig {
    CropPolicy crop;
    int num_categories = kNumShapeKinds;
    bool use_rgb = false;
    EraserPolicy eraser;
};

/// Mask-completion training sample, all channels in crop space.
struct TrainSampleM {
    BinaryMask input_mask;
    BinaryMask eraser_mask;
    std::vector<float> category_channel;  // input_mask * category / K
    BinaryMask target_mask;
    std::optional<RgbImage> erased_image;  // only with use_rgb
    int case_id = 1;
    CropTransform crop;
};

/// Content-completion training sample, in crop space.
struct TrainSampleC {
    RgbImage erased_image;
    BinaryMask guide_mask;
    BinaryMask eraser_region;
    RgbImage target_image;
    CropTransform crop;
};

/// Case-specific construction; `eraser_source` is B's unplaced modal mask.
TrainSampleM make_pcnet_m_sample_for_case(const Instance& a, const BinaryMask& eraser_source,
                                          int case_id, std::mt19937_64& rng,
                                          const SampleConfig& cfg = {});

/// Draws the case from Bernoulli(gamma) (case 1 with probability gamma) and
/// builds the sample.
TrainSampleM make_pcnet_m_sample(const Instance& a, const BinaryMask& eraser_source,
                                 double gamma, std::mt19937_64& rng, const SampleConfig& cfg = {});

/// `b` is the already-placed eraser mask; requires A ∩ B nonempty.
TrainSampleC make_pcnet_c_sample(const BinaryMask& a, const BinaryMask& b, const RgbImage& image,
                                 const CropPolicy& crop = {});

/// Input channels for mask completion: [input, eraser, category] (+ RGB).
int mask_input_channels(bool use_rgb);
inline constexpr int kContentInputChannels = 5;

/// Writes a sample's channels into slot n of an (N, C, S, S) tensor.
void write_mask_input(const TrainSampleM& s, Tensor& x, int n);
void write_mask_target(const TrainSampleM& s, Tensor& y, int n);
void write_content_input(const TrainSampleC& s, Tensor& x, int n);
void write_content_target(const TrainSampleC& s, Tensor& y, int n);
void write_content_region(const TrainSampleC& s, Tensor& r, int n);

/// Deterministic sample source: sample(i) depends only on (pool, seed, i).
class MaskSampleStream {
public:
    MaskSampleStream(const InstancePool& pool, double gamma, std::uint64_t seed,
                     SampleConfig cfg = {});
    TrainSampleM sample(std::uint64_t index) const;
    const SampleConfig& config() const { return cfg_; }
    double gamma() const { return gamma_; }

private:
    const InstancePool* pool_;
    double gamma_;
    std::uint64_t seed_;
    SampleConfig cfg_;
};

class ContentSampleStream {
public:
    ContentSampleStream(const InstancePool& pool, std::uint64_t seed, SampleConfig cfg = {});
    TrainSampleC sample(std::uint64_t index) const;

private:
    const InstancePool* pool_;
    std::uint64_t seed_;
    SampleConfig cfg_;
};

}  // namespace deocc
