#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deocc/eval.hpp"
#include "deocc/pipeline.hpp"
#include "deocc/recompose.hpp"
#include "deocc/scene.hpp"

namespace deocc {

/// An HTTP-level failure: status plus the {code, message} body.
class ServiceError : public std::runtime_error {
public:
    ServiceError(int status, std::string code, const std::string& message,
                 nlohmann::json extra = nlohmann::json::object())
        : std::runtime_error(message), status_(status), code_(std::move(code)), extra_(std::move(extra)) {}
    int status() const noexcept { return status_; }
    const std::string& code() const noexcept { return code_; }
    nlohmann::json body() const;

private:
    int status_;
    std::string code_;
    nlohmann::json extra_;
};

struct ServiceConfig {
    /// Empty: memory only. Otherwise scenes/<id>/ holds scene.json and one
    /// v<version>/ layered-scene directory per version, reloaded on start.
    std::string data_dir;
    SceneSamplerConfig sampler;
    CropPolicy crop;
    int dilation_radius = 1;
    /// Completer used when a deocclude request names none.
    std::string default_completer = "oracle";
    std::string cors_origin = "*";
};

/// Scene store behind the HTTP API. Methods return response bodies and
/// throw ServiceError; safe to call from many threads.
class SceneService {
public:
    explicit SceneService(ServiceConfig config = {});

    /// {"seed": n} | {"spec": SceneSpec JSON} | {"demo": "a_under_b" | "cyclic"}
    nlohmann::json create_scene(const nlohmann::json& body);
    nlohmann::json get_scene(const std::string& id) const;
    /// {"completer": "..."} optional, plus optional "content".
    nlohmann::json deocclude(const std::string& id, const nlohmann::json& body);
    /// EditScript JSON plus "base_version".
    nlohmann::json apply_edits(const std::string& id, const nlohmann::json& body);
    /// Latest version when unset; the scene image before any de-occlusion.
    std::vector<std::uint8_t> render_png(const std::string& id, std::optional<int> version) const;
    std::vector<std::uint8_t> layer_png(const std::string& id, int object_id, std::optional<int> version) const;
    std::vector<std::string> scene_ids() const;
    const ServiceConfig& config() const { return config_; }

private:
    struct Entry {
        mutable std::mutex mutex;
        Scene scene;
        std::vector<LayeredScene> versions;
        std::string completer;
    };

    std::shared_ptr<Entry> find(const std::string& id) const;
    const LayeredScene& version_of(const Entry& e, std::optional<int> version) const;
    void persist_scene(const std::string& id, const Entry& e) const;
    void persist_version(const std::string& id, const Entry& e, int version) const;
    void load_persisted();

    ServiceConfig config_;
    mutable std::shared_mutex store_mutex_;
    std::map<std::string, std::shared_ptr<Entry>> scenes_;
    std::uint64_t next_id_ = 1;
    std::mutex factory_mutex_;
    CompleterFactory factory_;
};

/// Routes the service's endpoints onto an HTTP server.
class HttpServer {
public:
    explicit HttpServer(SceneService& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Port 0 picks a free one. Returns the bound port; throws IoError.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace deocc
