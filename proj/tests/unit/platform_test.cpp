// Copyright 2026 The dcsurrogate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>

#include <json.hpp>

#include "core/platform.hpp"

namespace dcs {
namespace {

using nlohmann::json;

TEST(Platform, HomogeneousPresetHasExpectedWorkers) {
    const PlatformSpec p = builtin_platform(Scenario::homogeneous);
    ASSERT_NO_THROW(validate_platform(p));
    const auto workers = p.workers();
    ASSERT_EQ(workers.size(), 3u);
    EXPECT_EQ(p.total_worker_cores(), 60);
    EXPECT_EQ(p.node("worker-1").cores, 24);
    EXPECT_EQ(p.node("worker-3").cores, 12);
    EXPECT_EQ(p.storage_nodes().size(), 1u);
}

TEST(Platform, HeterogeneousPresetHasTwoSites) {
    const PlatformSpec p = builtin_platform(Scenario::heterogeneous);
    ASSERT_NO_THROW(validate_platform(p));
    EXPECT_EQ(p.workers().size(), 11u);
    EXPECT_EQ(p.total_worker_cores(), 10 * 42 + 200);
    const auto route = p.route("dc1-storage", "dc2-worker-01");
    ASSERT_TRUE(route.has_value());
    EXPECT_NE(std::find(route->begin(), route->end(), "link-dc1-dc2"), route->end());
}

TEST(Platform, RoutesAreSymmetric) {
    for (Scenario s : {Scenario::homogeneous, Scenario::heterogeneous}) {
        const PlatformSpec p = builtin_platform(s);
        for (const auto& [key, links] : p.routes) {
            const auto back = p.route(key.second, key.first);
            ASSERT_TRUE(back.has_value());
            EXPECT_EQ(back->size(), links.size());
        }
    }
}

TEST(Platform, SerializeParseRoundTrip) {
    for (Scenario s : {Scenario::homogeneous, Scenario::heterogeneous}) {
        const PlatformSpec p = builtin_platform(s);
        EXPECT_EQ(parse_platform(serialize_platform(p)), p);
    }
}

TEST(Platform, ShippedDataFilesMatchBuiltins) {
    EXPECT_EQ(load_platform_file(DCS_SOURCE_DIR "/data/platforms/homogeneous.json"),
              builtin_platform(Scenario::homogeneous));
    EXPECT_EQ(load_platform_file(DCS_SOURCE_DIR "/data/platforms/heterogeneous.json"),
              builtin_platform(Scenario::heterogeneous));
}

TEST(Platform, MissingFileIsIoError) {
    try {
        load_platform_file("/nonexistent/platform.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::io);
    }
}

TEST(Platform, SyntaxErrorReportsPosition) {
    try {
        parse_platform("{\"nodes\": [}");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::parse);
        EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
    }
}

json mutate(Scenario s, const std::function<void(json&)>& edit) {
    json j = json::parse(serialize_platform(builtin_platform(s)));
    edit(j);
    return j;
}

ErrorCategory category_of(const json& j) {
    try {
        parse_platform(j.dump());
    } catch (const Error& e) {
        return e.category();
    }
    return ErrorCategory::internal;
}

TEST(Platform, InvalidSpecsAreRejected) {
    const std::vector<std::pair<std::string, std::function<void(json&)>>> cases = {
        {"negative cores", [](json& j) { j["nodes"][2]["cores"] = -1; }},
        {"zero link bandwidth", [](json& j) { j["links"][0]["bandwidth_bps"] = 0.0; }},
        {"negative latency", [](json& j) { j["links"][0]["latency_s"] = -1.0; }},
        {"duplicate node", [](json& j) { j["nodes"].push_back(j["nodes"][0]); }},
        {"unknown route link", [](json& j) { j["routes"][0]["links"].push_back("nope"); }},
        {"unknown route node", [](json& j) { j["routes"][0]["dst"] = "ghost"; }},
        {"missing field", [](json& j) { j["nodes"][0].erase("id"); }},
        {"bad role", [](json& j) { j["nodes"][0]["role"] = "oracle"; }},
    };
    for (const auto& [name, edit] : cases)
        EXPECT_EQ(category_of(mutate(Scenario::homogeneous, edit)), ErrorCategory::validation) << name;
}

TEST(Platform, UnknownNodeLookupThrows) {
    const PlatformSpec p = builtin_platform(Scenario::homogeneous);
    EXPECT_THROW(p.node("worker-99"), Error);
    EXPECT_FALSE(p.route("worker-1", "worker-99").has_value());
}

}  // namespace
}  // namespace dcs
