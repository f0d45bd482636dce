#include "deocc/train.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <ctime>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "deocc/errors.hpp"
#include "deocc/image.hpp"

namespace deocc {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

namespace {

// Per-iteration activations are a few MB each; glibc would otherwise serve
// them with fresh mmap/munmap pairs and page-fault them in every step.
void keep_large_allocations_in_heap() {
#ifdef __GLIBC__
    static const bool once = [] {
        mallopt(M_MMAP_THRESHOLD, 1 << 30);
        mallopt(M_TRIM_THRESHOLD, 1 << 30);
        return true;
    }();
    (void)once;
#endif
}

Tensor slice_batch(const Tensor& t, int begin, int end) {
    Tensor out(end - begin, t.channels(), t.height(), t.width());
    std::copy(t.data().begin() + static_cast<std::ptrdiff_t>(t.sample_size() * begin),
              t.data().begin() + static_cast<std::ptrdiff_t>(t.sample_size() * end), out.data().begin());
    return out;
}

void add_into(Net::Gradients& dst, const Net::Gradients& src) {
    for (std::size_t l = 0; l < dst.size(); ++l) {
        for (std::size_t k = 0; k < dst[l].weight.size(); ++k) dst[l].weight[k] += src[l].weight[k];
        for (std::size_t k = 0; k < dst[l].bias.size(); ++k) dst[l].bias[k] += src[l].bias[k];
    }
}

// Loss and gradient for a sub-batch, gradient scaled so summing over all
// sub-batches equals the full-batch mean.
double sub_batch_step(const Net& net, const Tensor& x, const Tensor& target, const Tensor* region,
                      bool masked_l1, double scale, Net::Gradients& grads) {
    Net::Activations acts;
    const Tensor out = net.forward(x, acts);
    auto loss = masked_l1 ? nn::masked_l1_loss(out, target, *region) : nn::bce_loss(out, target);
    if (scale != 1.0)
        for (auto& g : loss.grad.data()) g = static_cast<float>(g * scale);
    net.backward(acts, loss.grad, grads, false);
    return loss.loss;
}

}  // namespace

TrainResult train_generic(const BatchSource& source, const nn::SGDConfig& cfg,
                          const TrainOptions& options) {
    if (cfg.batch_size < 1) throw DomainError("batch size must be >= 1");
    if (!(cfg.learning_rate > 0)) throw DomainError("learning rate must be positive");
    keep_large_allocations_in_heap();
    const std::clock_t cpu_start = std::clock();
    auto cpu_used = [cpu_start] { return static_cast<double>(std::clock() - cpu_start) / CLOCKS_PER_SEC; };
    TrainResult result{Net(nn::UNetConfig{source.in_channels, source.out_channels, options.width, options.levels}), {}};
    std::mt19937_64 init_rng(cfg.seed);
    result.net.initialize(init_rng, true);
    nn::SGD<float> sgd(cfg.learning_rate, cfg.momentum);

    const int batch = cfg.batch_size;
    const int workers = std::clamp(options.workers, 1, batch);
    Tensor x(batch, source.in_channels, source.size, source.size);
    Tensor target(batch, source.out_channels, source.size, source.size);
    Tensor region(batch, 1, source.size, source.size);

    double last_step = 0;
    for (int it = 0; it < cfg.iterations; ++it) {
        const double step_start = cpu_used();
        if (options.max_cpu_seconds > 0 && step_start + last_step > options.max_cpu_seconds) {
            result.stopped_by_budget = true;
            break;
        }
        x.fill(0.0f);
        target.fill(0.0f);
        region.fill(0.0f);
        int case1 = 0;
        for (int n = 0; n < batch; ++n) {
            const auto index = static_cast<std::uint64_t>(it) * static_cast<std::uint64_t>(batch) +
                               static_cast<std::uint64_t>(n);
            if (source.fill(index, x, target, source.masked_l1 ? &region : nullptr, n) == 1) ++case1;
        }

        auto grads = result.net.zero_grad();
        double loss = 0;
        if (workers == 1) {
            loss = sub_batch_step(result.net, x, target, source.masked_l1 ? &region : nullptr,
                                  source.masked_l1, 1.0, grads);
        } else {
            // Masked L1 normalizes by the region size, which differs per
            // split, so only BCE splits exactly; L1 uses sample-count weights.
            std::vector<Net::Gradients> partial(static_cast<std::size_t>(workers), result.net.zero_grad());
            std::vector<double> losses(static_cast<std::size_t>(workers), 0.0);
            std::vector<std::thread> threads;
            for (int w = 0; w < workers; ++w) {
                const int b0 = batch * w / workers, b1 = batch * (w + 1) / workers;
                threads.emplace_back([&, w, b0, b1] {
                    const Tensor xs = slice_batch(x, b0, b1);
                    const Tensor ts = slice_batch(target, b0, b1);
                    const Tensor rs = slice_batch(region, b0, b1);
                    const double share = static_cast<double>(b1 - b0) / batch;
                    losses[static_cast<std::size_t>(w)] =
                        share * sub_batch_step(result.net, xs, ts, &rs, source.masked_l1, share,
                                               partial[static_cast<std::size_t>(w)]);
                });
            }
            for (auto& t : threads) t.join();
            for (int w = 0; w < workers; ++w) {
                add_into(grads, partial[static_cast<std::size_t>(w)]);
                loss += losses[static_cast<std::size_t>(w)];
            }
        }
        if (!std::isfinite(loss))
            throw TrainingDivergedError(it, "training diverged at iteration " + std::to_string(it));
        sgd.step(result.net, grads);

        TrainLogEntry entry{it, loss, static_cast<double>(case1) / batch};
        result.history.push_back(entry);
        if (options.on_iteration) options.on_iteration(entry);
        last_step = cpu_used() - step_start;
    }
    result.cpu_seconds = cpu_used();
    return result;
}

TrainResult train_pcnet_m(const MaskSampleStream& stream, const nn::SGDConfig& cfg,
                          const TrainOptions& options) {
    BatchSource source;
    source.in_channels = mask_input_channels(stream.config().use_rgb);
    source.out_channels = 1;
    source.size = stream.config().crop.out_size;
    source.fill = [&stream](std::uint64_t index, Tensor& x, Tensor& target, Tensor*, int n) {
        const auto s = stream.sample(index);
        write_mask_input(s, x, n);
        write_mask_target(s, target, n);
        return s.case_id;
    };
    return train_generic(source, cfg, options);
}

TrainResult train_pcnet_c_l1(const ContentSampleStream& stream, const nn::SGDConfig& cfg,
                             int out_size, const TrainOptions& options) {
    BatchSource source;
    source.in_channels = kContentInputChannels;
    source.out_channels = 3;
    source.size = out_size;
    source.masked_l1 = true;
    source.fill = [&stream](std::uint64_t index, Tensor& x, Tensor& target, Tensor* region, int n) {
        const auto s = stream.sample(index);
        write_content_input(s, x, n);
        write_content_target(s, target, n);
        write_content_region(s, *region, n);
        return 0;
    };
    return train_generic(source, cfg, options);
}

namespace {

std::string floats_to_b64(const std::vector<float>& v) {
    std::vector<std::uint8_t> bytes(v.size() * sizeof(float));
    std::memcpy(bytes.data(), v.data(), bytes.size());
    return base64_encode(bytes);
}

std::vector<float> floats_from_b64(const std::string& s, std::size_t expected) {
    const auto bytes = base64_decode(s);
    if (bytes.size() != expected * sizeof(float))
        throw FormatError("checkpoint tensor has the wrong number of values");
    std::vector<float> v(expected);
    std::memcpy(v.data(), bytes.data(), bytes.size());
    return v;
}

}  // namespace

nlohmann::json checkpoint_to_json(const Net& net, const nlohmann::json& metadata) {
    nlohmann::json j;
    j["format"] = "deocc.miniunet";
    j["version"] = 1;
    j["config"] = {{"in_channels", net.config().in_channels},
                   {"out_channels", net.config().out_channels},
                   {"width", net.config().width},
                   {"levels", net.config().levels}};
    j["metadata"] = metadata.is_null() ? nlohmann::json::object() : metadata;
    j["params"] = nlohmann::json::array();
    const auto names = net.layer_names();
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        const auto& layer = net.layers()[l];
        const std::string name = names[l];
        j["params"].push_back({{"name", name + ".weight"},
                               {"shape", {layer.out_channels(), layer.in_channels(), layer.kernel(), layer.kernel()}},
                               {"data_b64", floats_to_b64(layer.weight())}});
        j["params"].push_back({{"name", name + ".bias"},
                               {"shape", {layer.out_channels()}},
                               {"data_b64", floats_to_b64(layer.bias())}});
    }
    return j;
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "deocc.miniunet")
            throw FormatError("not a MiniUNet checkpoint");
        if (j.at("version").get<int>() != 1) throw FormatError("unsupported checkpoint version");
        nn::UNetConfig cfg{j.at("config").at("in_channels").get<int>(),
                           j.at("config").at("out_channels").get<int>(),
                           j.at("config").at("width").get<int>(),
                           j.at("config").value("levels", 1)};
        Checkpoint ck{Net(cfg), j.value("metadata", nlohmann::json::object())};
        const auto names = ck.net.layer_names();
        std::map<std::string, const nlohmann::json*> by_name;
        for (const auto& p : j.at("params")) by_name[p.at("name").get<std::string>()] = &p;
        for (std::size_t l = 0; l < ck.net.layers().size(); ++l) {
            auto& layer = ck.net.layers()[l];
            const std::string name = names[l];
            const auto w = by_name.find(name + ".weight");
            const auto b = by_name.find(name + ".bias");
            if (w == by_name.end() || b == by_name.end())
                throw FormatError("checkpoint is missing parameters of layer " + name);
            layer.weight() = floats_from_b64(w->second->at("data_b64").get<std::string>(), layer.weight().size());
            layer.bias() = floats_from_b64(b->second->at("data_b64").get<std::string>(), layer.bias().size());
        }
        return ck;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::string& path, const Net& net, const nlohmann::json& metadata) {
    write_text(path, checkpoint_to_json(net, metadata).dump());
}

Checkpoint load_checkpoint(const std::string& path) {
    const auto bytes = read_file(path);
    try {
        return checkpoint_from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
}

std::string loss_history_csv(const std::vector<TrainLogEntry>& history) {
    std::ostringstream os;
    os << "iteration,loss,case1_fraction\n";
    os << std::setprecision(9);
    for (const auto& e : history) os << e.iteration << ',' << e.loss << ',' << e.case1_fraction << '\n';
    return os.str();
}

}  // namespace deocc
