#include "deocc/service.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>

#include <httplib.h>

#include "deocc/errors.hpp"
#include "deocc/image.hpp"

namespace deocc {

nlohmann::json ServiceError::body() const {
    nlohmann::json j = extra_.is_object() ? extra_ : nlohmann::json::object();
    j["code"] = code_;
    j["message"] = what();
    return j;
}

namespace {

namespace fs = std::filesystem;

// Engine errors become client errors when the request caused them.
template <typename F>
auto translating(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ServiceError&) {
        throw;
    } catch (const EditError& e) {
        throw ServiceError(400, "invalid_edit", e.what(), {{"edit_index", e.edit_index()}});
    } catch (const LookupError& e) {
        throw ServiceError(404, "not_found", e.what());
    } catch (const FormatError& e) {
        throw ServiceError(400, "bad_request", e.what());
    } catch (const SpecificationError& e) {
        throw ServiceError(400, "bad_request", e.what());
    } catch (const DomainError& e) {
        throw ServiceError(400, "bad_request", e.what());
    } catch (const SamplingExhaustedError& e) {
        throw ServiceError(422, e.kind(), e.what());
    } catch (const IoError& e) {
        throw ServiceError(500, "io", e.what());
    } catch (const Error& e) {
        throw ServiceError(422, e.kind(), e.what());
    } catch (const nlohmann::json::exception& e) {
        throw ServiceError(400, "bad_request", e.what());
    }
}

bool valid_id(const std::string& id) {
    return !id.empty() && id.size() <= 64 &&
           std::all_of(id.begin(), id.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

}  // namespace

SceneService::SceneService(ServiceConfig config) : config_(std::move(config)) {
    if (!config_.data_dir.empty()) translating([&] { load_persisted(); });
}

std::shared_ptr<SceneService::Entry> SceneService::find(const std::string& id) const {
    std::shared_lock lock(store_mutex_);
    const auto it = scenes_.find(id);
    if (it == scenes_.end()) throw ServiceError(404, "not_found", "unknown scene '" + id + "'");
    return it->second;
}

std::vector<std::string> SceneService::scene_ids() const {
    std::shared_lock lock(store_mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, e] : scenes_) ids.push_back(id);
    return ids;
}

nlohmann::json SceneService::create_scene(const nlohmann::json& body) {
    auto entry = std::make_shared<Entry>();
    translating([&] {
        if (!body.is_object()) throw ServiceError(400, "bad_request", "body must be a JSON object");
        const int given = static_cast<int>(body.contains("seed")) + static_cast<int>(body.contains("spec")) +
                          static_cast<int>(body.contains("demo"));
        if (given != 1) throw ServiceError(400, "bad_request", "give exactly one of seed, spec, demo");
        if (body.contains("seed")) {
            if (!body["seed"].is_number_integer() || body["seed"].get<std::int64_t>() < 0)
                throw ServiceError(400, "bad_request", "seed must be a non-negative integer");
            entry->scene = render_scene(sample_scene(body["seed"].get<std::uint64_t>(), config_.sampler));
        } else if (body.contains("spec")) {
            entry->scene = render_scene(scene_spec_from_json(body["spec"]));
        } else {
            const auto demo = body["demo"].get<std::string>();
            if (demo == "a_under_b")
                entry->scene = render_scene(make_a_under_b_scene());
            else if (demo == "cyclic")
                entry->scene = render_scene(make_cyclic_scene());
            else
                throw ServiceError(400, "bad_request", "unknown demo '" + demo + "'");
        }
    });
    std::string id;
    {
        std::unique_lock lock(store_mutex_);
        id = "s" + std::to_string(next_id_++);
        scenes_[id] = entry;
    }
    std::lock_guard lock(entry->mutex);
    persist_scene(id, *entry);
    return {{"scene_id", id}, {"objects", entry->scene.size()}};
}

nlohmann::json SceneService::get_scene(const std::string& id) const {
    const auto e = find(id);
    std::lock_guard lock(e->mutex);
    return scene_to_json(e->scene);
}

nlohmann::json SceneService::deocclude(const std::string& id, const nlohmann::json& body) {
    const auto e = find(id);
    return translating([&] {
        if (!body.is_null() && !body.is_object()) throw ServiceError(400, "bad_request", "body must be a JSON object");
        DeoccludeOptions options;
        const std::string completer =
            body.is_object() ? body.value("completer", config_.default_completer) : config_.default_completer;
        options.completer = CompleterSpec::parse(completer);
        if (body.is_object() && body.contains("content"))
            options.content = ContentSpec::parse(body["content"].get<std::string>());
        options.crop = config_.crop;
        options.dilation_radius = config_.dilation_radius;

        std::lock_guard lock(e->mutex);
        DeoccludeResult result;
        {
            std::lock_guard flock(factory_mutex_);
            result = deocc::deocclude(e->scene, options, factory_);
        }
        e->versions.push_back(result.layered);
        e->completer = completer;
        const int version = static_cast<int>(e->versions.size()) - 1;
        persist_version(id, *e, version);
        auto j = deocclusion_to_json(result);
        j["version"] = version;
        j["completer"] = completer;
        return j;
    });
}

nlohmann::json SceneService::apply_edits(const std::string& id, const nlohmann::json& body) {
    const auto e = find(id);
    return translating([&] {
        if (!body.is_object() || !body.contains("base_version") || !body["base_version"].is_number_integer())
            throw ServiceError(400, "bad_request", "edit request needs an integer base_version");
        const auto script = edit_script_from_json(body);
        const int base = body["base_version"].get<int>();

        std::lock_guard lock(e->mutex);
        if (e->versions.empty())
            throw ServiceError(409, "not_deoccluded", "scene '" + id + "' has not been de-occluded yet");
        const int latest = static_cast<int>(e->versions.size()) - 1;
        if (base != latest)
            throw ServiceError(409, "stale_version",
                               "base_version " + std::to_string(base) + " is not the latest (" +
                                   std::to_string(latest) + ")",
                               {{"latest_version", latest}});
        e->versions.push_back(deocc::apply_edits(e->versions.back(), script));
        const int version = latest + 1;
        persist_version(id, *e, version);
        return nlohmann::json{{"version", version}, {"layers", layer_manifest(e->versions.back())}};
    });
}

const LayeredScene& SceneService::version_of(const Entry& e, std::optional<int> version) const {
    if (e.versions.empty()) throw ServiceError(409, "not_deoccluded", "scene has not been de-occluded yet");
    const int v = version.value_or(static_cast<int>(e.versions.size()) - 1);
    if (v < 0 || v >= static_cast<int>(e.versions.size()))
        throw ServiceError(404, "not_found", "unknown version " + std::to_string(v));
    return e.versions[static_cast<std::size_t>(v)];
}

std::vector<std::uint8_t> SceneService::render_png(const std::string& id, std::optional<int> version) const {
    const auto e = find(id);
    std::lock_guard lock(e->mutex);
    if (e->versions.empty() && !version) return encode_png(e->scene.image);
    return translating([&] { return encode_png(render(version_of(*e, version))); });
}

std::vector<std::uint8_t> SceneService::layer_png(const std::string& id, int object_id,
                                                  std::optional<int> version) const {
    const auto e = find(id);
    std::lock_guard lock(e->mutex);
    return translating([&] {
        const auto& l = version_of(*e, version).layer(object_id);
        return encode_png_rgba(l.rgb, l.amodal);
    });
}

void SceneService::persist_scene(const std::string& id, const Entry& e) const {
    if (config_.data_dir.empty()) return;
    translating([&] {
        const auto dir = fs::path(config_.data_dir) / "scenes" / id;
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
        save_scene_file((dir / "scene.json").string(), e.scene);
        write_text((dir / "state.json").string(),
                   nlohmann::json{{"versions", e.versions.size()}, {"completer", e.completer}}.dump() + "\n");
    });
}

void SceneService::persist_version(const std::string& id, const Entry& e, int version) const {
    if (config_.data_dir.empty()) return;
    const auto dir = fs::path(config_.data_dir) / "scenes" / id;
    save_layered_scene((dir / ("v" + std::to_string(version))).string(), e.versions[static_cast<std::size_t>(version)]);
    // state.json last, so a crash mid-write leaves the previous count valid
    write_text((dir / "state.json").string(),
               nlohmann::json{{"versions", e.versions.size()}, {"completer", e.completer}}.dump() + "\n");
}

void SceneService::load_persisted() {
    const auto root = fs::path(config_.data_dir) / "scenes";
    std::error_code ec;
    if (!fs::is_directory(root, ec)) return;
    for (const auto& dir : fs::directory_iterator(root)) {
        const auto id = dir.path().filename().string();
        if (!dir.is_directory() || !valid_id(id) || !fs::exists(dir.path() / "scene.json")) continue;
        auto entry = std::make_shared<Entry>();
        entry->scene = load_scene_file((dir.path() / "scene.json").string());
        std::size_t versions = 0;
        if (fs::exists(dir.path() / "state.json")) {
            const auto bytes = read_file((dir.path() / "state.json").string());
            const auto state = nlohmann::json::parse(bytes.begin(), bytes.end());
            versions = state.value("versions", std::size_t{0});
            entry->completer = state.value("completer", std::string{});
        }
        for (std::size_t v = 0; v < versions; ++v)
            entry->versions.push_back(load_layered_scene((dir.path() / ("v" + std::to_string(v))).string()));
        if (id.size() > 1 && id[0] == 's' && std::all_of(id.begin() + 1, id.end(), ::isdigit))
            next_id_ = std::max<std::uint64_t>(next_id_, std::stoull(id.substr(1)) + 1);
        scenes_[id] = std::move(entry);
    }
}

// ---------------------------------------------------------------- HTTP

struct HttpServer::Impl {
    SceneService& service;
    httplib::Server server;
    explicit Impl(SceneService& s) : service(s) {}
};

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, const ServiceError& e) { send_json(res, e.status(), e.body()); }

nlohmann::json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return nullptr;
    try {
        return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ServiceError(400, "bad_json", std::string("request body is not valid JSON: ") + e.what());
    }
}

std::optional<int> version_param(const httplib::Request& req) {
    if (!req.has_param("version")) return std::nullopt;
    const auto v = req.get_param_value("version");
    try {
        std::size_t used = 0;
        const int n = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw ServiceError(400, "bad_request", "version must be an integer");
    }
}

void send_png(httplib::Response& res, const std::vector<std::uint8_t>& png, bool versioned) {
    res.status = 200;
    res.set_header("Cache-Control", versioned ? "public, max-age=31536000, immutable" : "no-cache");
    res.set_content(std::string(png.begin(), png.end()), "image/png");
}

template <typename F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const ServiceError& e) {
            send_error(res, e);
        } catch (const std::exception& e) {
            send_error(res, ServiceError(500, "internal", e.what()));
        }
    };
}

}  // namespace

HttpServer::HttpServer(SceneService& service) : impl_(std::make_unique<Impl>(service)) {
    auto& s = impl_->server;
    auto& svc = impl_->service;
    s.set_default_headers({{"Access-Control-Allow-Origin", svc.config().cors_origin},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
    s.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    s.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { send_json(res, 200, {{"status", "ok"}}); });
    s.Get("/scenes", guarded([&svc](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"scenes", svc.scene_ids()}});
    }));
    s.Post("/scenes", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 201, svc.create_scene(parse_body(req)));
    }));
    s.Get(R"(/scenes/([A-Za-z0-9_]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, svc.get_scene(req.matches[1]));
    }));
    s.Post(R"(/scenes/([A-Za-z0-9_]+)/deocclude)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, svc.deocclude(req.matches[1], parse_body(req)));
    }));
    s.Post(R"(/scenes/([A-Za-z0-9_]+)/edits)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, svc.apply_edits(req.matches[1], parse_body(req)));
    }));
    s.Get(R"(/scenes/([A-Za-z0-9_]+)/render\.png)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const auto v = version_param(req);
        send_png(res, svc.render_png(req.matches[1], v), v.has_value());
    }));
    s.Get(R"(/scenes/([A-Za-z0-9_]+)/layers/(-?\d+)\.png)",
          guarded([&svc](const httplib::Request& req, httplib::Response& res) {
              const auto v = version_param(req);
              int obj = 0;
              try {
                  obj = std::stoi(req.matches[2]);
              } catch (const std::exception&) {
                  throw ServiceError(404, "not_found", "unknown object");
              }
              send_png(res, svc.layer_png(req.matches[1], obj, v), v.has_value());
          }));
    s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty())
            send_json(res, res.status, {{"code", res.status == 404 ? "not_found" : "http_error"},
                                        {"message", httplib::status_message(res.status)}});
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound <= 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::listen() {
    if (!impl_->server.listen_after_bind()) throw IoError("server stopped with an error");
}

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace deocc
