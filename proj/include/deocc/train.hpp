#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deocc/nn.hpp"
#include "deocc/selfsup.hpp"

namespace deocc {

using Net = nn::MiniUNet<float>;

struct TrainLogEntry {
    int iteration = 0;
    double loss = 0;
    double case1_fraction = 0;  // share of case-1 samples in the batch (mask training)
};

struct TrainOptions {
    /// >1 splits each batch across threads and sums gradients. Summation
    /// order then depends on the split, so results are not bit-reproducible
    /// against the single-threaded run.
    int workers = 1;
    /// Architecture of the trained net.
    int width = 16;
    int levels = 1;
    /// Skip the remaining iterations once the next one would likely take
    /// process CPU time spent in training past this; 0 disables. Timing-dependent, so
    /// leave it off when runs must be reproducible.
    double max_cpu_seconds = 0;
    std::function<void(const TrainLogEntry&)> on_iteration;
};

struct TrainResult {
    Net net;
    std::vector<TrainLogEntry> history;
    bool stopped_by_budget = false;
    double cpu_seconds = 0;
};

/// Mask completion with BCE against the target mask. Each sample's case is
/// already drawn by the stream, realizing the x*L1 + (1-x)*L2 mixture.
TrainResult train_pcnet_m(const MaskSampleStream& stream, const nn::SGDConfig& cfg,
                          const TrainOptions& options = {});

/// Content completion, L1 over the erased region only; 3-channel output.
TrainResult train_pcnet_c_l1(const ContentSampleStream& stream, const nn::SGDConfig& cfg,
                             int out_size, const TrainOptions& options = {});

/// Training from arbitrary per-index batches (used by both trainers and tests).
struct BatchSource {
    int in_channels = 3;
    int out_channels = 1;
    int size = 64;
    /// Fills slot n of x/target (and region, when the loss is masked) for
    /// sample index `index`; returns the sample's case id (0 if n/a).
    std::function<int(std::uint64_t index, Tensor& x, Tensor& target, Tensor* region, int n)> fill;
    bool masked_l1 = false;
};

TrainResult train_generic(const BatchSource& source, const nn::SGDConfig& cfg,
                          const TrainOptions& options = {});

struct Checkpoint {
    Net net;
    nlohmann::json metadata;
};

void save_checkpoint(const std::string& path, const Net& net, const nlohmann::json& metadata);
Checkpoint load_checkpoint(const std::string& path);
nlohmann::json checkpoint_to_json(const Net& net, const nlohmann::json& metadata);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

/// CSV with header "iteration,loss,case1_fraction".
std::string loss_history_csv(const std::vector<TrainLogEntry>& history);

}  // namespace deocc
