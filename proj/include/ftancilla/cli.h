// Copyright 2026 The ftancilla Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FTANCILLA_CLI_H
#define FTANCILLA_CLI_H

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ftancilla/montecarlo.h"

namespace ftancilla {

/// Batch experiment description, stored as JSON. Code fields take a registry
/// name or a path to a code file; "c_d1"/"c_d2" also accept "none" and
/// "ideal" to select the postselection mode.
struct ExperimentConfig {
    std::string label;
    /// Quantum code: a registry name, or a pair of classical code files.
    std::string code = "golay23";
    std::string code_cx_file;
    std::string code_cz_file;
    std::string ancilla = "zero";
    /// Optional "A".."D" or "<c_c1>+<c_c2>"; fills c_c1 / c_c2.
    std::string combination;
    std::string c_c1 = "bch15_7_5";
    std::string c_c2 = "bch15_7_5";
    std::string c_d1 = "golay23";
    std::string c_d2 = "golay23_dual";
    std::vector<double> p = {1e-3};
    uint64_t trials = 1000;
    size_t n_extra = 2;
    uint64_t seed = 0;
    size_t w_cap = 4;
    size_t threads = 0;
    double mem_ratio = 0;
    bool perfect_prep = false;
    bool reject_uncorrectable = true;
    std::string output;
    /// Directory used to resolve relative file paths.
    std::string base_dir;

    bool operator==(const ExperimentConfig &other) const = default;
};

/// Built-in combinations: "A".."D" and "<name>+<name>" pairs.
std::pair<std::string, std::string> resolve_combination(const std::string &name);

/// Throws std::invalid_argument naming the offending field.
ExperimentConfig parse_experiment_config(const std::string &json_text, const std::string &base_dir = "");
std::string experiment_config_to_json(const ExperimentConfig &config);
ExperimentConfig load_experiment_config(const std::string &path);

/// Resolves code names and files into a validated distillation configuration.
DistillationConfig to_distillation_config(const ExperimentConfig &config);

/// Runs the command line; returns 0 on success, 1 on a validation error and
/// 2 on a runtime error.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace ftancilla

#endif
