#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <string>

#include "sfd/checkpoint.hpp"
#include "sfd/rng.hpp"

using namespace sfd;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

ModelBundle sample_bundle(int T, int T_prime, std::uint64_t seed) {
    ModelBundle b;
    b.kind = T_prime == T ? BundleKind::Teacher : BundleKind::Student;
    b.schedule = make_sigmoid_schedule(T);
    b.phi = uniform_subsequence(T, T_prime);
    b.net = make_net(2, {8, 8}, seed);
    b.metadata["steps"] = "123";
    b.metadata["note"] = "line1\nline2 \"quoted\"";
    return b;
}

bool bundles_equal(const ModelBundle& a, const ModelBundle& b) {
    if (a.kind != b.kind || a.schedule.T != b.schedule.T || a.schedule.alpha != b.schedule.alpha ||
        a.phi.phi != b.phi.phi || a.metadata != b.metadata)
        return false;
    if (a.net.input_dim != b.net.input_dim || a.net.time_embed_dim != b.net.time_embed_dim ||
        a.net.hidden_widths != b.net.hidden_widths || a.net.layers.size() != b.net.layers.size())
        return false;
    for (std::size_t l = 0; l < a.net.layers.size(); ++l)
        if (a.net.layers[l].w.data != b.net.layers[l].w.data ||
            a.net.layers[l].b != b.net.layers[l].b)
            return false;
    return true;
}

// Parse, apply a mutation, rewrite. Formatting changes; only load behavior
// matters for the tamper tests.
template <typename F>
void tamper(const std::string& src, const std::string& dst, F&& mutate) {
    nlohmann::json j = nlohmann::json::parse(slurp(src));
    mutate(j);
    spit(dst, j.dump());
}

}  // namespace

TEST_CASE("save then load restores the bundle exactly") {
    ModelBundle b = sample_bundle(30, 6, 1);
    save_bundle(b, "ckpt_rt.json");
    ModelBundle back = load_bundle("ckpt_rt.json");
    CHECK(bundles_equal(b, back));
    std::remove("ckpt_rt.json");
}

TEST_CASE("save, load, save is byte-identical") {
    ModelBundle b = sample_bundle(25, 25, 2);
    save_bundle(b, "ckpt_a.json");
    ModelBundle back = load_bundle("ckpt_a.json");
    save_bundle(back, "ckpt_b.json");
    CHECK(slurp("ckpt_a.json") == slurp("ckpt_b.json"));
    std::remove("ckpt_a.json");
    std::remove("ckpt_b.json");
}

TEST_CASE("full-size teacher schedule survives the round trip") {
    ModelBundle b = sample_bundle(500, 500, 3);
    save_bundle(b, "ckpt_big.json");
    ModelBundle back = load_bundle("ckpt_big.json");
    CHECK(bundles_equal(b, back));
    save_bundle(back, "ckpt_big2.json");
    CHECK(slurp("ckpt_big.json") == slurp("ckpt_big2.json"));
    std::remove("ckpt_big.json");
    std::remove("ckpt_big2.json");
}

TEST_CASE("randomized round-trip property") {
    Rng rng(77);
    for (int rep = 0; rep < 10; ++rep) {
        int T = 2 + static_cast<int>(rng.below(60));
        int T_prime = 1 + static_cast<int>(rng.below(T));
        ModelBundle b = sample_bundle(T, T_prime, 100 + rep);
        save_bundle(b, "ckpt_prop.json");
        CHECK(bundles_equal(b, load_bundle("ckpt_prop.json")));
    }
    std::remove("ckpt_prop.json");
}

TEST_CASE("non-monotone alpha is rejected on load with a named breach") {
    ModelBundle b = sample_bundle(20, 4, 4);
    save_bundle(b, "ckpt_tamper_src.json");
    tamper("ckpt_tamper_src.json", "ckpt_tamper.json", [](nlohmann::json& j) {
        j["alpha"][5] = j["alpha"][4];  // breaks strict decrease
    });
    try {
        load_bundle("ckpt_tamper.json");
        FAIL("expected SchemaViolation");
    } catch (const SchemaViolation& e) {
        CHECK(std::string(e.what()).find("invariant breach") != std::string::npos);
    }
    std::remove("ckpt_tamper_src.json");
    std::remove("ckpt_tamper.json");
}

TEST_CASE("wrong format version is rejected") {
    ModelBundle b = sample_bundle(10, 2, 5);
    save_bundle(b, "ckpt_ver_src.json");
    tamper("ckpt_ver_src.json", "ckpt_ver.json",
           [](nlohmann::json& j) { j["format_version"] = 2; });
    CHECK_THROWS_AS(load_bundle("ckpt_ver.json"), VersionMismatch);
    std::remove("ckpt_ver_src.json");
    std::remove("ckpt_ver.json");
}

TEST_CASE("schema violations are rejected") {
    ModelBundle b = sample_bundle(10, 2, 6);
    save_bundle(b, "ckpt_schema_src.json");

    tamper("ckpt_schema_src.json", "ckpt_schema.json",
           [](nlohmann::json& j) { j.erase("alpha"); });
    CHECK_THROWS_AS(load_bundle("ckpt_schema.json"), SchemaViolation);

    tamper("ckpt_schema_src.json", "ckpt_schema.json",
           [](nlohmann::json& j) { j["kind"] = "oracle"; });
    CHECK_THROWS_AS(load_bundle("ckpt_schema.json"), SchemaViolation);

    tamper("ckpt_schema_src.json", "ckpt_schema.json",
           [](nlohmann::json& j) { j["net"]["layers"][0]["w"].erase(0); });
    CHECK_THROWS_AS(load_bundle("ckpt_schema.json"), SchemaViolation);

    tamper("ckpt_schema_src.json", "ckpt_schema.json",
           [](nlohmann::json& j) { j["phi"][1] = 99; });
    CHECK_THROWS_AS(load_bundle("ckpt_schema.json"), SchemaViolation);

    std::remove("ckpt_schema_src.json");
    std::remove("ckpt_schema.json");
}

TEST_CASE("io and parse failures map to their own errors") {
    CHECK_THROWS_AS(load_bundle("definitely_missing.json"), IoError);
    spit("ckpt_garbage.json", "this is not json {");
    CHECK_THROWS_AS(load_bundle("ckpt_garbage.json"), ParseError);
    std::remove("ckpt_garbage.json");
}

TEST_CASE("save refuses an invalid bundle") {
    ModelBundle b = sample_bundle(10, 2, 7);
    b.phi.phi.back() = 9;
    CHECK_THROWS_AS(save_bundle(b, "never_written.json"), InvalidParameter);
    std::ifstream f("never_written.json");
    CHECK_FALSE(f.good());
}
