#include <atomic>
#include <filesystem>
#include <set>
#include <thread>

#include <unistd.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "deocc/image.hpp"
#include "deocc/scene.hpp"
#include "deocc/service.hpp"

// after the engine headers: resolv.h defines a _res macro that Eigen trips on
#include <httplib.h>

using namespace deocc;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("deocc_service_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(d);
    return d;
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

class ServiceHttp : public ::testing::Test {
protected:
    void SetUp() override {
        service_ = std::make_unique<SceneService>();
        server_ = std::make_unique<HttpServer>(*service_);
        port_ = server_->bind("127.0.0.1", 0);
        thread_ = std::thread([this] { server_->listen(); });
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
        client_->set_read_timeout(30, 0);
    }
    void TearDown() override {
        server_->stop();
        thread_.join();
    }

    httplib::Result post(const std::string& path, const json& body) {
        return client_->Post(path, body.dump(), "application/json");
    }
    std::string create(const json& body) {
        auto r = post("/scenes", body);
        EXPECT_EQ(r->status, 201);
        return json::parse(r->body).at("scene_id").get<std::string>();
    }

    std::unique_ptr<SceneService> service_;
    std::unique_ptr<HttpServer> server_;
    std::unique_ptr<httplib::Client> client_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace

TEST_F(ServiceHttp, HealthzAndCors) {
    auto r = client_->Get("/healthz");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");
    auto pre = client_->Options("/scenes");
    ASSERT_TRUE(pre);
    EXPECT_EQ(pre->status, 204);
    EXPECT_NE(pre->get_header_value("Access-Control-Allow-Methods").find("POST"), std::string::npos);
}

TEST_F(ServiceHttp, SeededSceneMatchesSynthesizedFile) {
    const auto dir = fresh_dir("synth");
    synthesize_dataset(dir.string(), 7, 1);
    const auto file = read_file((dir / dataset_file_name(0)).string());
    const auto expected = json::parse(file.begin(), file.end());

    const auto id = create({{"seed", 7}});
    auto r = client_->Get("/scenes/" + id);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    EXPECT_EQ(json::parse(r->body), expected);
    fs::remove_all(dir);
}

TEST_F(ServiceHttp, UnknownIdsGive404WithCodeAndMessage) {
    for (const std::string path : {"/scenes/s999", "/scenes/s999/render.png", "/scenes/s999/layers/0.png", "/nowhere"}) {
        auto r = client_->Get(path);
        ASSERT_TRUE(r) << path;
        EXPECT_EQ(r->status, 404) << path;
        const auto j = json::parse(r->body);
        EXPECT_EQ(j.at("code"), "not_found") << path;
        EXPECT_TRUE(j.contains("message"));
    }
    auto r = post("/scenes/s999/deocclude", json::object());
    EXPECT_EQ(r->status, 404);
}

TEST_F(ServiceHttp, BadRequests) {
    auto r = client_->Post("/scenes", "{not json", "application/json");
    EXPECT_EQ(r->status, 400);
    EXPECT_EQ(json::parse(r->body).at("code"), "bad_json");
    EXPECT_EQ(post("/scenes", {{"seed", 1}, {"demo", "cyclic"}})->status, 400);
    EXPECT_EQ(post("/scenes", {{"seed", -3}})->status, 400);
    EXPECT_EQ(post("/scenes", {{"demo", "nope"}})->status, 400);
    EXPECT_EQ(post("/scenes", {{"spec", {{"canvas", 3}}}})->status, 400);

    const auto id = create({{"demo", "a_under_b"}});
    EXPECT_EQ(post("/scenes/" + id + "/deocclude", {{"completer", "telepathy"}})->status, 400);
    EXPECT_EQ(client_->Get("/scenes/" + id + "/render.png?version=x")->status, 400);
}

TEST_F(ServiceHttp, RenderBeforeEditsIsPixelIdentical) {
    const auto scene = render_scene(sample_scene(11));
    const auto id = create({{"seed", 11}});
    auto d = post("/scenes/" + id + "/deocclude", {{"completer", "oracle"}});
    ASSERT_EQ(d->status, 200);
    const auto dj = json::parse(d->body);
    EXPECT_EQ(dj.at("version"), 0);
    EXPECT_EQ(dj.at("amodal").size(), scene.size());
    for (const auto& a : dj.at("amodal")) {
        const int i = a.at("id").get<int>();
        EXPECT_EQ(rle_decode(scene.width(), scene.height(), a.at("rle").get<std::vector<std::uint32_t>>()),
                  scene.objects[static_cast<std::size_t>(i)].amodal);
    }
    auto r = client_->Get("/scenes/" + id + "/render.png");
    ASSERT_EQ(r->status, 200);
    EXPECT_EQ(r->get_header_value("Content-Type"), "image/png");
    EXPECT_EQ(decode_png(bytes_of(r->body)).rgb, scene.image);
}

TEST_F(ServiceHttp, LayerPngIsGroundTruthUnderOracle) {
    const auto scene = render_scene(sample_scene(5));
    const auto id = create({{"seed", 5}});
    ASSERT_EQ(post("/scenes/" + id + "/deocclude", json::object())->status, 200);
    for (std::size_t i = 0; i < scene.size(); ++i) {
        auto r = client_->Get("/scenes/" + id + "/layers/" + std::to_string(i) + ".png");
        ASSERT_EQ(r->status, 200);
        const auto png = decode_png(bytes_of(r->body));
        EXPECT_EQ(png.alpha, scene.objects[i].amodal);
        EXPECT_EQ(mask_image(png.rgb, png.alpha), scene.object_raster(i));
    }
    EXPECT_EQ(client_->Get("/scenes/" + id + "/layers/99.png")->status, 404);
}

TEST_F(ServiceHttp, InvalidEditReportsIndex) {
    const auto id = create({{"demo", "a_under_b"}});
    ASSERT_EQ(post("/scenes/" + id + "/deocclude", json::object())->status, 200);
    json body = {{"base_version", 0},
                 {"edits", {{{"op", "move"}, {"id", 0}, {"dx", 1}}, {{"op", "delete"}, {"id", 42}}}}};
    auto r = post("/scenes/" + id + "/edits", body);
    ASSERT_EQ(r->status, 400);
    const auto j = json::parse(r->body);
    EXPECT_EQ(j.at("code"), "invalid_edit");
    EXPECT_EQ(j.at("edit_index"), 1);
    // the failed script left no version behind
    EXPECT_EQ(post("/scenes/" + id + "/edits", {{"base_version", 0}, {"edits", json::array()}})->status, 200);
}

TEST_F(ServiceHttp, EditsNeedDeocclusionAndFreshVersion) {
    const auto id = create({{"demo", "a_under_b"}});
    const json noop = {{"base_version", 0}, {"edits", json::array()}};
    auto r = post("/scenes/" + id + "/edits", noop);
    EXPECT_EQ(r->status, 409);
    EXPECT_EQ(json::parse(r->body).at("code"), "not_deoccluded");
    EXPECT_EQ(post("/scenes/" + id + "/edits", {{"edits", json::array()}})->status, 400);

    ASSERT_EQ(post("/scenes/" + id + "/deocclude", json::object())->status, 200);
    auto first = post("/scenes/" + id + "/edits", noop);
    ASSERT_EQ(first->status, 200);
    EXPECT_EQ(json::parse(first->body).at("version"), 1);
    auto stale = post("/scenes/" + id + "/edits", noop);
    EXPECT_EQ(stale->status, 409);
    const auto j = json::parse(stale->body);
    EXPECT_EQ(j.at("code"), "stale_version");
    EXPECT_EQ(j.at("latest_version"), 1);
}

TEST_F(ServiceHttp, ConcurrentEditsOnOneVersionLinearize) {
    const auto id = create({{"seed", 3}});
    ASSERT_EQ(post("/scenes/" + id + "/deocclude", json::object())->status, 200);
    for (int round = 0; round < 5; ++round) {
        const json body = {{"base_version", round}, {"edits", {{{"op", "move"}, {"id", 0}, {"dx", 1}}}}};
        std::atomic<bool> go{false};
        int status[2] = {0, 0};
        std::vector<std::thread> ts;
        for (int k = 0; k < 2; ++k)
            ts.emplace_back([&, k] {
                httplib::Client c("127.0.0.1", port_);
                while (!go) std::this_thread::yield();
                auto r = c.Post("/scenes/" + id + "/edits", body.dump(), "application/json");
                status[k] = r ? r->status : -1;
            });
        go = true;
        for (auto& t : ts) t.join();
        std::multiset<int> got{status[0], status[1]};
        EXPECT_EQ(got, (std::multiset<int>{200, 409})) << "round " << round;
    }
}

TEST_F(ServiceHttp, DeletingOccluderRevealsCompletedObject) {
    const auto id = create({{"demo", "a_under_b"}});
    ASSERT_EQ(post("/scenes/" + id + "/deocclude", json::object())->status, 200);
    // object 1 sits on top of object 0
    ASSERT_EQ(post("/scenes/" + id + "/edits", {{"base_version", 0}, {"edits", {{{"op", "delete"}, {"id", 1}}}}})->status,
              200);
    const auto img = decode_png(bytes_of(client_->Get("/scenes/" + id + "/render.png")->body)).rgb;
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 6; ++x) EXPECT_EQ(img.at(x, y), x < 4 ? (Rgb{220, 30, 30}) : (Rgb{200, 200, 200}));
}

TEST_F(ServiceHttp, VersionedRendersAreStable) {
    const auto id = create({{"seed", 9}});
    ASSERT_EQ(post("/scenes/" + id + "/deocclude", json::object())->status, 200);
    auto v0 = client_->Get("/scenes/" + id + "/render.png?version=0");
    ASSERT_EQ(v0->status, 200);
    EXPECT_NE(v0->get_header_value("Cache-Control").find("immutable"), std::string::npos);
    ASSERT_EQ(post("/scenes/" + id + "/edits", {{"base_version", 0}, {"edits", {{{"op", "move"}, {"id", 0}, {"dx", 5}}}}})->status,
              200);
    EXPECT_EQ(client_->Get("/scenes/" + id + "/render.png?version=0")->body, v0->body);
    EXPECT_NE(client_->Get("/scenes/" + id + "/render.png?version=1")->body, v0->body);
    EXPECT_EQ(client_->Get("/scenes/" + id + "/render.png?version=2")->status, 404);
}

TEST_F(ServiceHttp, CyclicDemoReportsCycle) {
    const auto id = create({{"demo", "cyclic"}});
    auto r = post("/scenes/" + id + "/deocclude", {{"completer", "oracle"}});
    ASSERT_EQ(r->status, 200);
    const auto cycles = json::parse(r->body).at("layers").at("cycles");
    ASSERT_EQ(cycles.size(), 1u);
    EXPECT_EQ(cycles[0].size(), 4u);
}

TEST(ServicePersistence, ReloadsScenesAndVersions) {
    const auto dir = fresh_dir("persist");
    ServiceConfig cfg;
    cfg.data_dir = dir.string();
    std::string id;
    std::vector<std::uint8_t> v0, v1;
    {
        SceneService s(cfg);
        id = s.create_scene({{"seed", 4}}).at("scene_id").get<std::string>();
        s.deocclude(id, json::object());
        s.apply_edits(id, {{"base_version", 0}, {"edits", {{{"op", "move"}, {"id", 1}, {"dx", -3}, {"dy", 2}}}}});
        v0 = s.render_png(id, 0);
        v1 = s.render_png(id, 1);
    }
    SceneService reloaded(cfg);
    EXPECT_EQ(reloaded.scene_ids(), std::vector<std::string>{id});
    EXPECT_EQ(reloaded.get_scene(id), scene_to_json(render_scene(sample_scene(4))));
    EXPECT_EQ(reloaded.render_png(id, 0), v0);
    EXPECT_EQ(reloaded.render_png(id, 1), v1);
    // ids keep counting past the reloaded ones
    EXPECT_NE(reloaded.create_scene({{"seed", 1}}).at("scene_id").get<std::string>(), id);
    fs::remove_all(dir);
}

TEST(ServiceCore, SpecBodyRendersGivenScene) {
    SceneService s;
    const auto spec = make_cyclic_scene();
    const auto id = s.create_scene({{"spec", scene_spec_to_json(spec)}}).at("scene_id").get<std::string>();
    EXPECT_EQ(s.get_scene(id), scene_to_json(render_scene(spec)));
    EXPECT_EQ(scene_spec_from_json(scene_spec_to_json(spec)), spec);
    const auto z = sample_scene(2);
    EXPECT_EQ(scene_spec_from_json(scene_spec_to_json(z)), z);
}

TEST(ServiceCore, ErrorBodyCarriesCodeMessageAndExtras) {
    const ServiceError e(400, "invalid_edit", "bad op", {{"edit_index", 3}});
    const auto j = e.body();
    EXPECT_EQ(j.at("code"), "invalid_edit");
    EXPECT_EQ(j.at("message"), "bad op");
    EXPECT_EQ(j.at("edit_index"), 3);
}
