#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "experiments.hpp"
#include "strichartz/grid.hpp"

using namespace strz::cli;

TEST_CASE("fnv1a reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("configs round-trip and hash stably") {
    for (const auto& cmd : command_names()) {
        CAPTURE(cmd);
        json cfg = resolve_config(cmd, json::object());
        CHECK(cfg.contains("curve"));
        CHECK(cfg.contains("seed"));
        for (const char* k : {"L", "n_points", "T0", "n_times"}) CHECK(cfg["grid"].contains(k));
        json back = json::parse(cfg.dump());
        CHECK(back == cfg);
        CHECK(resolve_config(cmd, back) == cfg);
        CHECK(config_hash(back) == config_hash(cfg));
        CHECK(config_hash(cfg).size() == 16);
    }
    json a = resolve_config("norm", {{"seed", 2}});
    CHECK(a["seed"] == 2);
    CHECK(config_hash(a) != config_hash(resolve_config("norm", json::object())));
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(resolve_config("norm", {{"bogus", 1}}), strz::ValidationError);
    CHECK_THROWS_AS(resolve_config("norm", {{"grid", {{"n", 4}}}}), strz::ValidationError);
    CHECK_THROWS_AS(default_config("plot"), strz::ValidationError);
    CHECK(is_command("threshold"));
    CHECK_FALSE(is_command("plot"));
    CHECK(command_names().size() == 10);
}

TEST_CASE("artifacts embed the hash and are reproducible") {
    json cfg = resolve_config("classify", json::object());
    auto first = run_command("classify", cfg), second = run_command("classify", cfg);
    REQUIRE(first.size() == second.size());
    const std::string h = config_hash(cfg);
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].name == second[i].name);
        CHECK(first[i].content == second[i].content);
        if (first[i].name != "config.json") CHECK(first[i].content.find(h) != std::string::npos);
    }
    auto verdicts = json::parse(first[0].content)["verdicts"];
    CHECK(verdicts["odd"]["orthogonal"] == false);
    CHECK(verdicts["even"]["orthogonal"] == true);
}
