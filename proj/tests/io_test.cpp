/*
 * Copyright 2026 The gpbound Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <filesystem>

namespace gpbound {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("gpbound_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

TEST(Numbers, ShortestRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 5e-324}) {
        EXPECT_EQ(parse_double(format_double(v), "test"), v);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(-10.0), "-10");
    EXPECT_EQ(parse_double(" 2.5\r", "test"), 2.5);
    EXPECT_THROW((void)parse_double("2.5x", "test"), ParseError);
    EXPECT_THROW((void)parse_double("", "test"), ParseError);
}

TEST(Csv, ParsesHeaderAndRows) {
    const auto t = parse_csv("x_1,y_1\n0.5,1\n\n-1,2.25\n");
    EXPECT_EQ(t.header, (std::vector<std::string>{"x_1", "y_1"}));
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[1][1], 2.25);
}

TEST(Csv, EmptyFileIsAnError) { EXPECT_THROW((void)parse_csv("", "data.csv"), ParseError); }

TEST(Csv, ErrorsCarryLineNumbers) {
    try {
        (void)parse_csv("x_1,y_1\n1,2\n3,abc\n", "data.csv");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("data.csv:3"), std::string::npos) << e.what();
    }
    try {
        (void)parse_csv("x_1,y_1\n1\n", "data.csv");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("data.csv:2"), std::string::npos) << e.what();
    }
}

TEST(Csv, DatasetColumns) {
    const auto t = parse_csv("x_1,x_2,y_1,y_2\n1,2,3,4\n5,6,7,8\n");
    const Dataset d = dataset_from_csv(t, Vector::Constant(1, 0.1), "mem");
    EXPECT_EQ(d.input_dim(), 2);
    EXPECT_EQ(d.output_dim(), 2);
    EXPECT_EQ(d.X(1, 1), 6.0);
    EXPECT_EQ(d.Y(0, 1), 4.0);
    EXPECT_EQ(d.noise_var.size(), 2);
    EXPECT_THROW((void)dataset_from_csv(parse_csv("a,b\n1,2\n"), Vector::Zero(1), "mem"), ParseError);
    EXPECT_THROW((void)dataset_from_csv(parse_csv("x_1,y_1\n"), Vector::Zero(1), "mem"), ParseError);
}

TEST(Csv, WriterAndBoundReport) {
    BoundReport r;
    r.x = Vector::Constant(1, 0.5);
    r.est_var_trace = 0.25;
    r.thm2 = 1.0 / 3.0;
    const std::string text = bound_report_csv({r}, 1, false, false, true);
    EXPECT_EQ(text, "x_1,est_var_trace,thm2\n0.5,0.25,0.3333333333333333\n");
    const auto t = parse_csv(text);
    EXPECT_EQ(t.rows[0][2], 1.0 / 3.0);
}

TEST(Json, KernelSpecRoundTrip) {
    const KernelSpec a{KernelFamily::matern(2), (Vector(2) << 5.2, 1.6).finished()};
    const KernelSpec b = kernel_spec_from_json(kernel_spec_to_json(a));
    EXPECT_EQ(b.family, a.family);
    EXPECT_EQ(b.phi, a.phi);
    const auto se = kernel_spec_from_json(json::parse(R"({"family":"se_ard","phi":[1,2,3]})"));
    EXPECT_EQ(se.family, KernelFamily::se_ard(2));
    EXPECT_THROW((void)kernel_spec_from_json(json::parse(R"({"family":"laplace","phi":[1]})")), ParseError);
    EXPECT_THROW((void)kernel_spec_from_json(json::parse(R"({"family":"matern","p":1,"phi":[0,1]})")), DomainError);
}

TEST(Json, CandidateSetRoundTrip) {
    const auto j = json::parse(R"([{"family":"matern","p":1,"lower":[1,1],"upper":[2,2]},
                                  {"family":"rq","p":1,"lower":[1,0.1],"upper":[20,1]}])");
    const CandidateSet c = candidate_set_from_json(j);
    EXPECT_EQ(c.size(), 2u);
    EXPECT_EQ(candidate_set_to_json(c), j);
    EXPECT_THROW((void)candidate_set_from_json(json::parse(R"({"family":"rq"})")), ParseError);
}

TEST(Files, ModelLoadResolvesRelativeData) {
    const fs::path dir = scratch_dir("model");
    write_text_file_atomic(dir / "train.csv", "x_1,y_1\n0,1\n1,2\n");
    write_text_file_atomic(dir / "model.json",
                           R"({"kernels":[{"family":"matern","p":1,"phi":[1,1]}],"noise_var":[0.1],"data":"train.csv"})");
    const GpModel m = load_model(dir / "model.json");
    EXPECT_EQ(m.size(), 2);
    EXPECT_EQ(m.data().noise_var[0], 0.1);
    write_text_file_atomic(dir / "truth.json", R"({"kernel":{"family":"se_ard","phi":[2,1]}})");
    const GpModel t = load_model_on(dir / "truth.json", m);
    EXPECT_EQ(t.data().X, m.data().X);
    EXPECT_EQ(t.kernel(0).family, KernelFamily::se_ard(1));
    EXPECT_THROW((void)load_model(dir / "missing.json"), ParseError);
}

TEST(Files, AtomicWriteLeavesNoTemporary) {
    const fs::path dir = scratch_dir("atomic");
    write_text_file_atomic(dir / "out.txt", "a");
    write_text_file_atomic(dir / "out.txt", "b");
    EXPECT_EQ(read_text_file(dir / "out.txt"), "b");
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
    EXPECT_EQ(n, 1u);
}

TEST(ScenarioJson, MissingKeysAreDefaultedAndListed) {
    std::vector<std::string> defaulted;
    const auto c = scenario_config_from_json(json::parse(R"({"n_train": 12, "seed": 9,
        "rollout": {"x0": -2, "follow": "truth"}})"), &defaulted);
    EXPECT_EQ(c.n_train, 12);
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.rollout.x0, -2.0);
    EXPECT_TRUE(c.rollout.follow_truth);
    EXPECT_EQ(c.truth_kernel.phi[0], 5.2);
    EXPECT_NE(std::find(defaulted.begin(), defaulted.end(), "truth_kernel"), defaulted.end());
    EXPECT_EQ(std::find(defaulted.begin(), defaulted.end(), "n_train"), defaulted.end());
}

TEST(ScenarioJson, BadValuesRejected) {
    EXPECT_THROW((void)scenario_config_from_json(json::parse(R"({"n_train": "ten"})")), ParseError);
    EXPECT_THROW((void)scenario_config_from_json(json::parse(R"({"n_train": 0})")), ConfigError);
    EXPECT_THROW((void)scenario_config_from_json(json::parse(R"({"rollout": {"follow": "both"}})")), ParseError);
    EXPECT_THROW((void)scenario_config_from_json(json::parse("[1,2]")), ParseError);
}

}  // namespace
}  // namespace gpbound
