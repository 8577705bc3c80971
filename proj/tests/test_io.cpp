#include "catch_amalgamated.hpp"

#include "kbraess/braess.hpp"
#include "kbraess/io.hpp"

#include <string>

using namespace kbraess;
using nlohmann::json;

namespace {
const std::string samples = KBRAESS_SAMPLES_DIR;
}

TEST_CASE("circuit JSON round trip", "[io]") {
    auto c = braess_circuit({0.5, 2.0, 1.0, 3.0, 0.25});
    CHECK(circuit_from_json(circuit_to_json(c)) == c);
    CHECK(circuit_from_json(json::parse(circuit_to_json(c).dump())) == c);
}

TEST_CASE("sample circuit matches the built-in layout", "[io]") {
    auto c = circuit_from_json(read_json_file(samples + "/two_source_balanced.json"));
    CHECK(c == braess_circuit({0.0, 1.0, 1.0, 1.0, std::nullopt}));
    auto ladder = circuit_from_json(read_json_file(samples + "/rlc_ladder.json"));
    CHECK(ladder.element_count() == 6);
    CHECK(ladder.element(2).kind == ElementKind::Inductor);
}

TEST_CASE("circuit JSON rejects malformed input", "[io][errors]") {
    auto good = json::parse(R"({"nodes": 2, "elements": [{"kind": "R", "value": 1, "a": 0, "b": 1}]})");
    CHECK_NOTHROW(circuit_from_json(good));

    auto extra = good;
    extra["comment"] = "x";
    CHECK_THROWS_AS(circuit_from_json(extra), FormatError);

    auto bad_kind = good;
    bad_kind["elements"][0]["kind"] = "Q";
    CHECK_THROWS_AS(circuit_from_json(bad_kind), FormatError);

    auto missing = good;
    missing["elements"][0].erase("value");
    CHECK_THROWS_AS(circuit_from_json(missing), FormatError);

    auto negative = good;
    negative["elements"][0]["a"] = -1;
    CHECK_THROWS_AS(circuit_from_json(negative), FormatError);

    auto bad_value = good;
    bad_value["elements"][0]["value"] = 0.0;
    CHECK_THROWS_AS(circuit_from_json(bad_value), CircuitError);

    CHECK_THROWS_AS(read_json_file(samples + "/does_not_exist.json"), FormatError);
}

TEST_CASE("network JSON", "[io]") {
    auto n = network_from_json(read_json_file(samples + "/three_bus.json"));
    CHECK(n.x12 == 1.0);
    CHECK(n.beta2 == 1.675);
    CHECK(std::isinf(n.pmax[0]));
    CHECK(std::isinf(n.fmax[2]));

    auto weak = network_from_json(read_json_file(samples + "/three_bus_weak_middle.json"));
    CHECK(weak.fmax[1] == 1.0);

    auto j = json::parse(R"({"x12": 1, "x13": null, "x23": 2, "alpha": 3, "beta1": 1, "beta2": 2,
                             "Pc": 0.5, "Pmax": [2, "Infinity"], "Fmax": ["inf", 1, 4]})");
    auto m = network_from_json(j);
    CHECK_FALSE(m.x13.has_value());
    CHECK(m.pmax[0] == 2.0);
    CHECK(std::isinf(m.pmax[1]));
    CHECK(m.pc == 0.5);

    auto unknown = j;
    unknown["x14"] = 1.0;
    CHECK_THROWS_AS(network_from_json(unknown), FormatError);
    auto short_limits = j;
    short_limits["Fmax"] = json::array({1, 2});
    CHECK_THROWS_AS(network_from_json(short_limits), FormatError);
    auto bad_limit = j;
    bad_limit["Pmax"][0] = "huge";
    CHECK_THROWS_AS(network_from_json(bad_limit), FormatError);
}
