#include "deocc/selfsup.hpp"

#include <algorithm>

#include "deocc/errors.hpp"

namespace deocc {

InstancePool::InstancePool(const std::vector<Scene>& scenes) {
    for (const auto& scene : scenes)
        for (const auto& o : scene.objects)
            if (o.modal.any()) add(Instance{o.modal, o.category_id, &scene.image});
}

void InstancePool::add(Instance instance) {
    if (!instances_.empty() && !instances_.front().modal.same_dims(instance.modal))
        throw DimensionError("instance pool requires a shared canvas size");
    instances_.push_back(std::move(instance));
}

namespace {

std::mt19937_64 index_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

bool satisfies(const BinaryMask& target, const BinaryMask& eraser, EraserUse use,
               const EraserPolicy& policy) {
    if (use == EraserUse::Case1) {
        const double frac = static_cast<double>(area(intersect(target, eraser))) /
                            static_cast<double>(area(target));
        return frac >= policy.min_overlap && frac <= policy.max_overlap;
    }
    const auto rest = subtract(eraser, target);
    return rest.any() && are_neighbors(rest, target, 1);
}

std::optional<TrainSampleM> try_make_m(const Instance& a, const BinaryMask& eraser_source,
                                       int case_id, std::mt19937_64& rng, const SampleConfig& cfg) {
    const auto use = case_id == 1 ? EraserUse::Case1 : EraserUse::Case2;
    const auto placed = place_eraser(a.modal, eraser_source, use, rng, cfg.eraser);
    if (!placed) return std::nullopt;

    BinaryMask input, eraser;
    if (case_id == 1) {
        input = subtract(a.modal, *placed);
        eraser = *placed;
    } else {
        input = a.modal;
        eraser = subtract(*placed, a.modal);
    }

    TrainSampleM s;
    s.case_id = case_id;
    s.crop = crop_window(input, cfg.crop);
    s.input_mask = crop_mask(input, s.crop);
    s.eraser_mask = crop_mask(eraser, s.crop);
    s.target_mask = crop_mask(a.modal, s.crop);
    const float weight = static_cast<float>(a.category_id) / static_cast<float>(cfg.num_categories);
    s.category_channel.resize(s.input_mask.pixel_count());
    for (std::size_t i = 0; i < s.category_channel.size(); ++i)
        s.category_channel[i] = s.input_mask.bits()[i] ? weight : 0.0f;
    if (cfg.use_rgb) {
        if (!a.image) throw DomainError("RGB channels requested for an instance without image");
        s.erased_image = crop_image(erase(*a.image, eraser), s.crop);
    }
    return s;
}

}  // namespace

std::optional<BinaryMask> place_eraser(const BinaryMask& target, const BinaryMask& source,
                                       EraserUse use, std::mt19937_64& rng,
                                       const EraserPolicy& policy) {
    const auto tbox = bounding_box(target);
    const auto sbox = bounding_box(source);
    if (!tbox) throw EmptyTargetError("eraser placement around an empty target");
    if (!sbox) return std::nullopt;
    const int half_w = sbox->w / 2, half_h = sbox->h / 2;
    const int scx = sbox->x + half_w, scy = sbox->y + half_h;
    std::uniform_int_distribution<int> px(tbox->x - half_w, tbox->right() - 1 + half_w);
    std::uniform_int_distribution<int> py(tbox->y - half_h, tbox->bottom() - 1 + half_h);
    for (int attempt = 0; attempt < policy.max_attempts; ++attempt) {
        const int cx = px(rng), cy = py(rng);
        auto placed = translate(source, cx - scx, cy - scy);
        if (satisfies(target, placed, use, policy)) return placed;
    }
    return std::nullopt;
}

BinaryMask sample_eraser(const InstancePool& pool, std::mt19937_64& rng, std::size_t target,
                         EraserUse use, const EraserPolicy& policy) {
    if (pool.size() < 2) throw DomainError("eraser sampling needs at least two instances");
    if (target >= pool.size()) throw LookupError("target instance out of range");
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 2);
    EraserPolicy single = policy;
    single.max_attempts = 1;
    for (int attempt = 0; attempt < policy.max_attempts; ++attempt) {
        std::size_t other = pick(rng);
        if (other >= target) ++other;
        if (auto placed = place_eraser(pool[target].modal, pool[other].modal, use, rng, single))
            return *placed;
    }
    throw SamplingExhaustedError("sample_eraser: no valid placement after " +
                                 std::to_string(policy.max_attempts) + " attempts");
}

TrainSampleM make_pcnet_m_sample_for_case(const Instance& a, const BinaryMask& eraser_source,
                                          int case_id, std::mt19937_64& rng,
                                          const SampleConfig& cfg) {
    if (case_id != 1 && case_id != 2) throw DomainError("case must be 1 or 2");
    auto s = try_make_m(a, eraser_source, case_id, rng, cfg);
    if (!s) throw SamplingExhaustedError("eraser placement exhausted for case " + std::to_string(case_id));
    return std::move(*s);
}

TrainSampleM make_pcnet_m_sample(const Instance& a, const BinaryMask& eraser_source,
                                 double gamma, std::mt19937_64& rng, const SampleConfig& cfg) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [0, 1]");
    const int case_id = std::bernoulli_distribution(gamma)(rng) ? 1 : 2;
    return make_pcnet_m_sample_for_case(a, eraser_source, case_id, rng, cfg);
}

TrainSampleC make_pcnet_c_sample(const BinaryMask& a, const BinaryMask& b, const RgbImage& image,
                                 const CropPolicy& crop) {
    const auto hidden = intersect(a, b);
    if (hidden.none()) throw EmptyEraserError("content sample needs A ∩ B nonempty");
    TrainSampleC s;
    s.crop = crop_window(a, crop);
    s.eraser_region = crop_mask(hidden, s.crop);
    s.guide_mask = crop_mask(subtract(a, b), s.crop);
    s.target_image = crop_image(image, s.crop);
    s.erased_image = erase(s.target_image, s.eraser_region);
    return s;
}

int mask_input_channels(bool use_rgb) { return use_rgb ? 6 : 3; }

namespace {

void check_slot(const Tensor& t, int n, int channels, int size) {
    if (n < 0 || n >= t.batch() || t.channels() != channels || t.height() != size || t.width() != size)
        throw ShapeError("sample does not fit the destination tensor");
}

void write_mask(const BinaryMask& m, Tensor& t, int n, int c) {
    auto plane = t.plane(n, c);
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = m.bits()[i] ? 1.0f : 0.0f;
}

void write_rgb(const RgbImage& img, Tensor& t, int n, int c0) {
    for (int c = 0; c < 3; ++c) {
        auto plane = t.plane(n, c0 + c);
        for (std::size_t i = 0; i < plane.size(); ++i)
            plane[i] = static_cast<float>(img.pixels()[i][c]) / 255.0f;
    }
}

}  // namespace

void write_mask_input(const TrainSampleM& s, Tensor& x, int n) {
    const int size = s.input_mask.width();
    check_slot(x, n, mask_input_channels(s.erased_image.has_value()), size);
    write_mask(s.input_mask, x, n, 0);
    write_mask(s.eraser_mask, x, n, 1);
    std::copy(s.category_channel.begin(), s.category_channel.end(), x.plane(n, 2).begin());
    if (s.erased_image) write_rgb(*s.erased_image, x, n, 3);
}

void write_mask_target(const TrainSampleM& s, Tensor& y, int n) {
    check_slot(y, n, 1, s.target_mask.width());
    write_mask(s.target_mask, y, n, 0);
}

void write_content_input(const TrainSampleC& s, Tensor& x, int n) {
    check_slot(x, n, kContentInputChannels, s.guide_mask.width());
    write_rgb(s.erased_image, x, n, 0);
    write_mask(s.guide_mask, x, n, 3);
    write_mask(s.eraser_region, x, n, 4);
}

void write_content_target(const TrainSampleC& s, Tensor& y, int n) {
    check_slot(y, n, 3, s.target_image.width());
    write_rgb(s.target_image, y, n, 0);
}

void write_content_region(const TrainSampleC& s, Tensor& r, int n) {
    check_slot(r, n, 1, s.eraser_region.width());
    write_mask(s.eraser_region, r, n, 0);
}

MaskSampleStream::MaskSampleStream(const InstancePool& pool, double gamma, std::uint64_t seed,
                                   SampleConfig cfg)
    : pool_(&pool), gamma_(gamma), seed_(seed), cfg_(cfg) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [0, 1]");
    if (pool.size() < 2) throw DomainError("sample stream needs at least two instances");
}

TrainSampleM MaskSampleStream::sample(std::uint64_t index) const {
    auto rng = index_rng(seed_, index);
    // The case is drawn once; instance pairs are redrawn on failed placement
    // so the realized case frequency stays Bernoulli(gamma).
    const int case_id = std::bernoulli_distribution(gamma_)(rng) ? 1 : 2;
    std::uniform_int_distribution<std::size_t> pick(0, pool_->size() - 1);
    std::uniform_int_distribution<std::size_t> pick_other(0, pool_->size() - 2);
    for (int attempt = 0; attempt < 64; ++attempt) {
        const std::size_t a = pick(rng);
        std::size_t b = pick_other(rng);
        if (b >= a) ++b;
        EraserPolicy quick = cfg_.eraser;
        quick.max_attempts = std::min(quick.max_attempts, 20);
        SampleConfig cfg = cfg_;
        cfg.eraser = quick;
        if (auto s = try_make_m((*pool_)[a], (*pool_)[b].modal, case_id, rng, cfg)) return std::move(*s);
    }
    throw SamplingExhaustedError("mask sample stream: no valid pair for index " + std::to_string(index));
}

ContentSampleStream::ContentSampleStream(const InstancePool& pool, std::uint64_t seed, SampleConfig cfg)
    : pool_(&pool), seed_(seed), cfg_(cfg) {
    if (pool.size() < 2) throw DomainError("sample stream needs at least two instances");
}

TrainSampleC ContentSampleStream::sample(std::uint64_t index) const {
    auto rng = index_rng(seed_, index);
    std::uniform_int_distribution<std::size_t> pick(0, pool_->size() - 1);
    std::uniform_int_distribution<std::size_t> pick_other(0, pool_->size() - 2);
    EraserPolicy quick = cfg_.eraser;
    quick.max_attempts = std::min(quick.max_attempts, 20);
    for (int attempt = 0; attempt < 64; ++attempt) {
        const std::size_t a = pick(rng);
        std::size_t b = pick_other(rng);
        if (b >= a) ++b;
        const auto& inst = (*pool_)[a];
        if (!inst.image) throw DomainError("content samples need instances with images");
        if (auto placed = place_eraser(inst.modal, (*pool_)[b].modal, EraserUse::Case1, rng, quick))
            return make_pcnet_c_sample(inst.modal, *placed, *inst.image, cfg_.crop);
    }
    throw SamplingExhaustedError("content sample stream: no valid pair for index " + std::to_string(index));
}

}  // namespace deocc
