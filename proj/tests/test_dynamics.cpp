// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>

#include "ftft/error.hpp"
#include "ftft/format.hpp"
#include "support.hpp"

namespace {

using ftft::ParseError;
using support::from_text;
using support::to_text;

const std::string kHeader1 =
    R"({"schema_version":"ftft-dyn-1","run_id":"r","model_name":"m","num_params":10,"dataset_name":"d","num_instances":1,"num_checkpoints":3})";
const std::string kHeader2 =
    R"({"schema_version":"ftft-dyn-1","run_id":"r","model_name":"m","num_params":10,"dataset_name":"d","num_instances":2,"num_checkpoints":3})";

// Parses text expecting a ParseError; returns it for inspection.
ParseError parse_error(const std::string& text) {
    try {
        from_text(text);
    } catch (const ParseError& e) {
        return e;
    }
    ADD_FAILURE() << "no parse error for:\n" << text;
    return ParseError(0, "none");
}

TEST(DynamicsParse, MinimalFile) {
    const auto d = from_text(kHeader1 + "\n" + R"({"id":0,"gold":1,"p_true":[0.2,0.5,0.9]})" + "\n");
    ASSERT_EQ(d.records.size(), 1u);
    EXPECT_EQ(d.records[0].id, 0u);
    EXPECT_EQ(d.records[0].gold, 1);
    EXPECT_EQ(d.records[0].p_true, (std::vector<double>{0.2, 0.5, 0.9}));
    EXPECT_EQ(d.num_checkpoints, 3u);
    EXPECT_EQ(d.run_id, "r");
}

TEST(DynamicsParse, ToleratesMissingTrailingNewlineAndCrLf) {
    const std::string rec = R"({"id":0,"gold":1,"p_true":[0.2,0.5,0.9]})";
    EXPECT_EQ(from_text(kHeader1 + "\n" + rec).records.size(), 1u);
    EXPECT_EQ(from_text(kHeader1 + "\r\n" + rec + "\r\n").records.size(), 1u);
}

TEST(DynamicsParse, IgnoresUnknownKeys) {
    const auto d = from_text(kHeader1 + "\n" + R"({"id":4,"gold":0,"p_true":[0.1,0.1,0.1],"note":"x"})" + "\n");
    EXPECT_EQ(d.records[0].id, 4u);
}

TEST(DynamicsParse, ProbabilityOutOfRangeNamesLine) {
    const auto e = parse_error(kHeader1 + "\n" + R"({"id":0,"gold":1,"p_true":[0.2,1.4,0.9]})" + "\n");
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("probability out of range"), std::string::npos);
}

TEST(DynamicsParse, DuplicateIdNamesLine) {
    const auto e = parse_error(kHeader2 + "\n" + R"({"id":7,"gold":1,"p_true":[0.2,0.4,0.9]})" + "\n" +
                               R"({"id":7,"gold":0,"p_true":[0.2,0.4,0.9]})" + "\n");
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("duplicate instance id 7"), std::string::npos);
}

TEST(DynamicsParse, LengthMismatchNamesLine) {
    const auto e = parse_error(kHeader1 + "\n" + R"({"id":0,"gold":1,"p_true":[0.2,0.4]})" + "\n");
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("p_true length 2"), std::string::npos);
}

TEST(DynamicsParse, MalformedLineNamesLine) {
    const auto e = parse_error(kHeader2 + "\n" + R"({"id":0,"gold":1,"p_true":[0.2,0.4,0.5]})" + "\n{oops\n");
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("malformed line"), std::string::npos);
}

TEST(DynamicsParse, UnknownSchemaRejected) {
    std::string h = kHeader1;
    h.replace(h.find("ftft-dyn-1"), 10, "ftft-dyn-9");
    const auto e = parse_error(h + "\n");
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find("unknown schema_version"), std::string::npos);
}

TEST(DynamicsParse, SingleCheckpointRejected) {
    std::string h = kHeader1;
    h.replace(h.find("\"num_checkpoints\":3"), 19, "\"num_checkpoints\":1");
    const auto e = parse_error(h + "\n");
    EXPECT_NE(std::string(e.what()).find("num_checkpoints must be >= 2"), std::string::npos);
}

TEST(DynamicsParse, RecordCountMustMatchHeader) {
    const auto e = parse_error(kHeader2 + "\n" + R"({"id":0,"gold":1,"p_true":[0.2,0.4,0.5]})" + "\n");
    EXPECT_NE(std::string(e.what()).find("header declares 2 instances but 1"), std::string::npos);
}

TEST(DynamicsParse, EmptyInputRejected) {
    EXPECT_EQ(parse_error("").line(), 1u);
}

TEST(DynamicsParse, MissingFieldNamesLine) {
    const auto e = parse_error(kHeader1 + "\n" + R"({"id":0,"p_true":[0.2,0.4,0.5]})" + "\n");
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("gold"), std::string::npos);
}

TEST(DynamicsWrite, EmptyRunIsHeaderOnly) {
    auto d = support::make_dynamics({});
    d.num_checkpoints = 4;
    const std::string text = to_text(d);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
    EXPECT_NE(text.find("\"num_instances\":0"), std::string::npos);
    EXPECT_EQ(from_text(text), d);
}

TEST(DynamicsWrite, RoundTrip) {
    const auto d = support::make_dynamics({{0.0, 1.0, 0.5}, {0.1, 0.2, 0.3}, {1.0 / 3.0, 2.0 / 3.0, 1e-17}});
    EXPECT_EQ(from_text(to_text(d)), d);
}

TEST(DynamicsWrite, FuzzedThousandInstancesRoundTripBitEqual) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto d = support::random_dynamics(seed, 1000, 7);
        const std::string once = to_text(d);
        const auto back = from_text(once);
        ASSERT_EQ(back, d);
        for (std::size_t i = 0; i < d.records.size(); ++i)
            for (std::size_t c = 0; c < 7; ++c)
                ASSERT_EQ(std::bit_cast<std::uint64_t>(back.records[i].p_true[c]),
                          std::bit_cast<std::uint64_t>(d.records[i].p_true[c]));
        EXPECT_EQ(to_text(back), once);
    }
}

TEST(DynamicsWrite, ValidateRejectsInvalidValues) {
    auto d = support::make_dynamics({{0.2, 0.3}});
    d.records[0].p_true[1] = std::nan("");
    EXPECT_THROW(ftft::dynamics::validate(d), ftft::DataError);
    EXPECT_THROW(to_text(d), ftft::DataError);
}

TEST(DynamicsFile, ReadErrorsCarryPathAndLine) {
    const auto dir = std::filesystem::temp_directory_path() / "ftft_test_dynamics";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "bad.dyn.jsonl").string();
    ftft::write_text_file(path, kHeader1 + "\n" + R"({"id":0,"gold":1,"p_true":[0.2,1.4,0.9]})" + "\n");
    try {
        ftft::dynamics::read_dynamics_file(path);
        FAIL() << "expected an error";
    } catch (const ftft::DataError& e) {
        EXPECT_NE(std::string(e.what()).find(path), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

}  // namespace
