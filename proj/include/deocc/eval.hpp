#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "deocc/amodal.hpp"
#include "deocc/ordering.hpp"
#include "deocc/scene.hpp"

namespace deocc {

/// "oracle", "convex_r", "convex" or "neural:<checkpoint path>".
struct CompleterSpec {
    enum class Kind { Oracle, Convex, ConvexR, Neural };
    Kind kind = Kind::Oracle;
    std::string checkpoint;

    static CompleterSpec parse(const std::string& text);
    std::string to_string() const;
    /// Short name used in method labels: oracle, convex, convex_r, neural.
    std::string label() const;
};

/// Completer for one scene; neural checkpoints are cached by path.
class CompleterFactory {
public:
    std::unique_ptr<PartialCompleter> make(const CompleterSpec& spec, const Scene& scene);

private:
    std::vector<std::pair<std::string, std::shared_ptr<const NeuralCompleter>>> cache_;
};

struct EvalConfig {
    std::vector<CompleterSpec> completers;  // OG/NOG rows for each
    BaselineConfig baseline;
    CropPolicy crop;
    int dilation_radius = 1;
};

/// {"completers":["oracle","neural:m.json"], "area_larger_in_front":true,
///  "dilation_radius":1, "crop":{"enlarge_ratio":2.0,"out_size":64}}
EvalConfig eval_config_from_json(const nlohmann::json& j);
nlohmann::json eval_config_to_json(const EvalConfig& cfg);

/// Occlusion-ratio bins: [0,0.1), [0.1,0.3), [0.3,0.5), [0.5,1].
inline constexpr int kNumBins = 4;
int occlusion_bin(double ratio);
std::string bin_label(int bin);

struct ReportRow {
    std::string method;
    std::string metric;  // ordering_accuracy | amodal_miou
    std::string bin;     // all | [0,0.1) | ...
    std::optional<double> value;  // nullopt when n == 0
    std::size_t n = 0;
};

struct EvalReport {
    std::uint64_t seed = 0;
    std::size_t scenes = 0;
    std::vector<ReportRow> rows;

    /// nullopt if the row is missing or empty.
    std::optional<double> value(const std::string& method, const std::string& metric,
                                const std::string& bin = "all") const;
};

/// Methods, in report order: raw, area, yaxis, convex, convex_r, then
/// nog:<c> and og:<c> per configured completer. convex_r grounds the refined
/// hull on the graph of the first configured completer (convex's own graph
/// when none). Ordering accuracy is binned by the occludee's occlusion
/// ratio, IoU by the object's.
EvalReport run_eval(const std::vector<Scene>& scenes, const EvalConfig& cfg, std::uint64_t seed = 0);
EvalReport run_eval(const std::string& dataset_dir, const EvalConfig& cfg, std::uint64_t seed = 0);

/// Header "method,metric,bin,value,n"; empty value cell when n == 0.
std::string report_csv(const EvalReport& report);
nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
/// Writes report.csv and report.json into `dir`.
void write_report(const EvalReport& report, const std::string& dir);

}  // namespace deocc
