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

#include "ftancilla/cli.h"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

namespace ftancilla {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Input problems (bad files, bad fields) map to exit code 1.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::string read_text(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path &path, const std::string &text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out << text;
    if (!out) {
        throw std::runtime_error("error writing '" + path.string() + "'");
    }
}

std::string resolve_path(const std::string &path, const std::string &base_dir) {
    fs::path p(path);
    if (p.is_relative() && !base_dir.empty()) {
        return (fs::path(base_dir) / p).string();
    }
    return path;
}

bool looks_like_path(const std::string &s) {
    return s.find('/') != std::string::npos || s.find('.') != std::string::npos;
}

std::shared_ptr<const LinearCode> resolve_code(
    const std::string &value, const std::string &base_dir, const std::string &field) {
    if (value.empty()) {
        throw ValidationError(field + ": empty code name");
    }
    try {
        if (looks_like_path(value)) {
            return std::make_shared<LinearCode>(load_code_file(resolve_path(value, base_dir)));
        }
        return registry(value);
    } catch (const std::invalid_argument &e) {
        throw ValidationError(field + ": " + e.what());
    }
}

std::string weight_str(size_t w, size_t w_cap) {
    return w > w_cap ? ">" + std::to_string(w_cap) : std::to_string(w);
}

std::string qubit_list(const BitVec &v) {
    std::string s = "{";
    bool first = true;
    for (size_t q : v.ones()) {
        s += (first ? "" : ",") + std::to_string(q);
        first = false;
    }
    return s + "}";
}

std::string ps_label(const DistillationConfig &cfg) {
    return std::string(postselect_mode_name(cfg.ps1)) + "/" + postselect_mode_name(cfg.ps2);
}

const std::set<std::string> kConfigKeys = {
    "label", "code", "ancilla", "combination", "c_c1", "c_c2", "c_d1", "c_d2", "p", "trials", "n_extra", "seed",
    "w_cap", "threads", "mem_ratio", "perfect_prep", "reject_uncorrectable", "output"};

template <typename T>
void read_field(const json &j, const char *key, T &dst) {
    if (!j.contains(key)) {
        return;
    }
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception &) {
        throw ValidationError(std::string("config field '") + key + "': wrong type");
    }
}

// ---- simulate ----

int cmd_simulate(const std::string &config_path, const std::string &out_path, int threads_override,
                 std::ostream &out) {
    ExperimentConfig ec = load_experiment_config(config_path);
    Distiller distiller(to_distillation_config(ec), ec.w_cap);
    ExperimentOptions opt;
    opt.p_grid = ec.p;
    opt.trials = ec.trials;
    opt.seed = ec.seed;
    opt.threads = threads_override > 0 ? size_t(threads_override) : ec.threads;
    opt.mem_ratio = ec.mem_ratio;
    opt.label = ec.label;
    RunStats stats = run_experiment(distiller, opt);

    std::string dest = !out_path.empty() ? out_path : !ec.output.empty() ? resolve_path(ec.output, ec.base_dir)
                                                                         : "results.json";
    fs::path json_path(dest);
    fs::path csv_path = json_path;
    csv_path.replace_extension(".csv");
    write_text(json_path, stats_to_json(stats));
    write_text(csv_path, metrics_csv(all_metrics(stats)));
    out << summary_table(stats);
    out << "wrote " << json_path.string() << " and " << csv_path.string() << "\n";
    return 0;
}

// ---- inject ----

struct SweepRequest {
    bool present = false;
    size_t group = 0;
};

SweepRequest parse_sweep(const std::string &text) {
    SweepRequest req;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream fields(line.substr(0, line.find('#')));
        std::string head;
        if (!(fields >> head) || head != "@sweep") {
            continue;
        }
        std::string stage, kind, word;
        if (!(fields >> stage >> kind) || stage != "round1" || kind != "single-cnot") {
            throw ValidationError("sweep manifest: expected '@sweep round1 single-cnot [group <g>]'");
        }
        if (fields >> word) {
            if (word != "group" || !(fields >> req.group)) {
                throw ValidationError("sweep manifest: expected 'group <g>'");
            }
        }
        req.present = true;
    }
    return req;
}

int cmd_sweep(const DistillationConfig &cfg, const SweepRequest &req, std::ostream &out) {
    SweepReport rep = single_fault_sweep(cfg, req.group);
    out << "single-fault sweep over round-1 CNOTs of group " << req.group << " (" << cfg.cc1->name() << ", "
        << postselect_mode_name(cfg.ps1) << " postselection)\n";
    out << "cases " << rep.cases << " passed " << rep.passed << std::fixed << std::setprecision(2) << " ("
        << (rep.cases ? 100.0 * double(rep.passed) / double(rep.cases) : 100.0) << "%)\n";
    for (size_t i = 0; i < rep.failures.size() && i < 20; i++) {
        out << "  FAIL " << rep.failures[i] << "\n";
    }
    out << (rep.passed == rep.cases ? "result: every output block error-free or on the fault support\n"
                                    : "result: violations found\n");
    return 0;
}

int cmd_inject(const std::string &scenario_path, const std::string &config_path, bool show_trace,
               std::ostream &out) {
    ExperimentConfig ec = load_experiment_config(config_path);
    DistillationConfig cfg = to_distillation_config(ec);
    // Only the scripted faults act.
    cfg.model = FailureModel{};
    cfg.perfect_prep = true;
    std::string text = read_text(scenario_path);
    SweepRequest sweep = parse_sweep(text);
    if (sweep.present) {
        return cmd_sweep(cfg, sweep, out);
    }
    ProtocolInjection inj;
    try {
        inj = ProtocolInjection::parse(text);
    } catch (const std::invalid_argument &e) {
        throw ValidationError(scenario_path + ": " + e.what());
    }
    Distiller d(cfg, ec.w_cap);
    const size_t m = cfg.spec.num_blocks();
    const size_t w_cap = d.weights().w_cap();
    try {
        for (const auto &[u, fi] : inj.prep) {
            fi.validate(d.prep_circuit());
        }
        for (size_t r = 0; r < 2; r++) {
            for (const auto &[g, fi] : inj.round(r)) {
                fi.validate(d.round_circuit(r));
            }
        }
    } catch (const std::invalid_argument &e) {
        throw ValidationError(scenario_path + ": " + e.what());
    }

    out << "config " << (ec.label.empty() ? config_path : ec.label) << ": C_c1 " << cfg.cc1->name() << ", C_c2 "
        << cfg.cc2->name() << ", postselection " << ps_label(cfg) << "\n";

    Rng rng(ec.seed);
    TrialOutcome outcome;
    ProtocolTrace trace;
    d.run(rng, outcome, &inj, &trace);

    out << "effective supports:\n";
    auto print_support = [&](const std::string &where, const FaultInjection &fi, const Circuit &c,
                             const std::vector<size_t> &units) {
        EffectiveSupport qe = effective_support(fi, c);
        for (size_t b = 0; b < qe.x.size(); b++) {
            if (qe.x[b].none() && qe.z[b].none()) {
                continue;
            }
            out << "  " << where << ": unit " << units[b / m] << " block " << b % m << " X " << qubit_list(qe.x[b])
                << " Z " << qubit_list(qe.z[b]) << "\n";
        }
    };
    for (const auto &[u, fi] : inj.prep) {
        print_support("prep", fi, d.prep_circuit(), {u});
    }
    for (size_t r = 0; r < 2; r++) {
        for (const auto &[g, fi] : inj.round(r)) {
            for (const auto &rt : trace.rounds) {
                if (rt.round == r && rt.group == g) {
                    print_support(std::string(r == 0 ? "round1" : "round2") + " group " + std::to_string(g), fi,
                                  d.round_circuit(r), rt.units);
                }
            }
        }
    }

    for (const auto &rt : trace.rounds) {
        bool interesting = rt.sigma.rows() && !rt.sigma.is_zero();
        size_t k = rt.outputs.size();
        interesting |= rt.accepted.popcount() != k;
        for (const auto &fr : rt.outputs) {
            interesting |= !fr.is_zero();
        }
        if (!interesting && !show_trace) {
            continue;
        }
        out << (rt.round == 0 ? "round1" : "round2") << " group " << rt.group << ": accepted " << rt.accepted.str()
            << (rt.uncorrectable ? " (uncorrectable column)" : "") << "\n";
        size_t first_data = rt.units.size() - k;
        for (size_t t = 0; t < k; t++) {
            ResidualWeight w = d.weights().residual_weight(rt.outputs[t]);
            out << "  unit " << rt.units[first_data + t] << ": X weight " << weight_str(w.x, w_cap) << ", Z weight "
                << weight_str(w.z, w_cap) << (rt.accepted.get(t) ? "" : ", rejected") << "\n";
        }
        if (show_trace) {
            out << ProtocolTrace{{rt}}.str();
        }
    }

    if (outcome.aborted) {
        out << "aborted: not enough accepted spare blocks\n";
        return 0;
    }
    out << "final outputs: " << outcome.accepted.size() << " accepted of " << outcome.round2_outputs << "\n";
    size_t max_x = 0, max_z = 0;
    std::vector<std::string> heavy;
    const size_t t_limit = 3;
    for (const auto &ob : outcome.accepted) {
        max_x = std::max(max_x, ob.weight.x);
        max_z = std::max(max_z, ob.weight.z);
        if (ob.weight.x || ob.weight.z) {
            out << "  unit " << ob.unit << " (round2 group " << ob.group << " position " << ob.position
                << "): X weight " << weight_str(ob.weight.x, w_cap) << ", Z weight "
                << weight_str(ob.weight.z, w_cap) << "\n";
        }
        if (ob.weight.x > t_limit) {
            heavy.push_back(std::to_string(ob.unit));
        }
    }
    out << "max weight X " << weight_str(max_x, w_cap) << ", Z " << weight_str(max_z, w_cap) << "\n";
    if (!heavy.empty()) {
        out << "blocks with X weight > 3:";
        for (const auto &h : heavy) {
            out << " " << h;
        }
        out << "\n";
    }
    return 0;
}

// ---- analyze ----

int cmd_analyze(const std::string &results_path, const std::string &out_dir, std::ostream &out) {
    RunStats stats;
    try {
        stats = stats_from_json(read_text(results_path));
    } catch (const std::invalid_argument &e) {
        throw ValidationError(e.what());
    }
    fs::path dir(out_dir);
    write_text(dir / "metrics.csv", metrics_csv(all_metrics(stats)));
    out << "wrote " << (dir / "metrics.csv").string() << "\n";
    auto fits = slope_fits(stats);
    if (!fits.empty()) {
        write_text(dir / "slopes.csv", slopes_csv(fits));
        out << "wrote " << (dir / "slopes.csv").string() << "\n";
    }
    out << summary_table(stats);
    return 0;
}

// ---- codes ----

int cmd_codes_list(std::ostream &out) {
    out << "classical codes:\n";
    for (const auto &entry : registry_names()) {
        auto c = registry(entry.name);
        out << "  " << std::left << std::setw(14) << entry.name << "[" << c->n() << "," << c->k() << "," << c->d()
            << "]  " << entry.description << "\n";
    }
    out << "quantum codes:\n";
    for (const auto &name : quantum_registry_names()) {
        auto q = quantum_registry(name);
        out << "  " << std::left << std::setw(14) << name << "[[" << q->n() << "," << q->k() << "]]\n";
    }
    out << "combinations:\n";
    for (const char *c : {"A", "B", "C", "D"}) {
        auto [c1, c2] = resolve_combination(c);
        out << "  " << c << "  " << c1 << " + " << c2 << "\n";
    }
    return 0;
}

}  // namespace

std::pair<std::string, std::string> resolve_combination(const std::string &name) {
    if (name == "A") {
        return {"bch15_7_5", "bch15_7_5"};
    }
    if (name == "B") {
        return {"bch15_7_5", "rep5"};
    }
    if (name == "C") {
        return {"hamming7", "hamming7"};
    }
    if (name == "D") {
        return {"rep3", "rep3"};
    }
    size_t plus = name.find('+');
    if (plus == std::string::npos || plus == 0 || plus + 1 == name.size() ||
        name.find('+', plus + 1) != std::string::npos) {
        throw std::invalid_argument("combination: expected A, B, C, D or '<c_c1>+<c_c2>', got '" + name + "'");
    }
    return {name.substr(0, plus), name.substr(plus + 1)};
}

ExperimentConfig parse_experiment_config(const std::string &json_text, const std::string &base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception &e) {
        throw ValidationError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ValidationError("config: expected a JSON object");
    }
    for (const auto &[key, value] : j.items()) {
        if (!kConfigKeys.count(key)) {
            throw ValidationError("config: unknown field '" + key + "'");
        }
    }
    ExperimentConfig c;
    c.base_dir = base_dir;
    read_field(j, "label", c.label);
    if (j.contains("code")) {
        const json &code = j.at("code");
        if (code.is_string()) {
            c.code = code.get<std::string>();
        } else if (code.is_object() && code.contains("cx") && code.contains("cz") && code.size() == 2) {
            c.code.clear();
            read_field(code, "cx", c.code_cx_file);
            read_field(code, "cz", c.code_cz_file);
        } else {
            throw ValidationError("config field 'code': expected a name or {\"cx\": file, \"cz\": file}");
        }
    }
    read_field(j, "ancilla", c.ancilla);
    read_field(j, "combination", c.combination);
    if (!c.combination.empty()) {
        try {
            std::tie(c.c_c1, c.c_c2) = resolve_combination(c.combination);
        } catch (const std::invalid_argument &e) {
            throw ValidationError(e.what());
        }
        for (auto [key, resolved] : {std::pair{"c_c1", c.c_c1}, std::pair{"c_c2", c.c_c2}}) {
            if (j.contains(key) && j.at(key) != resolved) {
                throw ValidationError(std::string("config field '") + key + "' conflicts with combination '" +
                                      c.combination + "'");
            }
        }
    }
    read_field(j, "c_c1", c.c_c1);
    read_field(j, "c_c2", c.c_c2);
    read_field(j, "c_d1", c.c_d1);
    read_field(j, "c_d2", c.c_d2);
    if (j.contains("p") && j.at("p").is_number()) {
        c.p = {j.at("p").get<double>()};
    } else {
        read_field(j, "p", c.p);
    }
    read_field(j, "trials", c.trials);
    read_field(j, "n_extra", c.n_extra);
    read_field(j, "seed", c.seed);
    read_field(j, "w_cap", c.w_cap);
    read_field(j, "threads", c.threads);
    read_field(j, "mem_ratio", c.mem_ratio);
    read_field(j, "perfect_prep", c.perfect_prep);
    read_field(j, "reject_uncorrectable", c.reject_uncorrectable);
    read_field(j, "output", c.output);

    if (c.p.empty()) {
        throw ValidationError("config field 'p': at least one failure rate is needed");
    }
    for (double p : c.p) {
        if (!(p >= 0 && p <= 1)) {
            throw ValidationError("config field 'p': rates must lie in [0, 1]");
        }
    }
    if (c.trials == 0) {
        throw ValidationError("config field 'trials': must be at least 1");
    }
    if (c.w_cap < 3 || c.w_cap > 8) {
        throw ValidationError("config field 'w_cap': must lie in [3, 8]");
    }
    if (!(c.mem_ratio >= 0)) {
        throw ValidationError("config field 'mem_ratio': must be >= 0");
    }
    return c;
}

std::string experiment_config_to_json(const ExperimentConfig &c) {
    json j;
    j["label"] = c.label;
    if (c.code.empty()) {
        j["code"] = {{"cx", c.code_cx_file}, {"cz", c.code_cz_file}};
    } else {
        j["code"] = c.code;
    }
    j["ancilla"] = c.ancilla;
    if (!c.combination.empty()) {
        j["combination"] = c.combination;
    }
    j["c_c1"] = c.c_c1;
    j["c_c2"] = c.c_c2;
    j["c_d1"] = c.c_d1;
    j["c_d2"] = c.c_d2;
    j["p"] = c.p;
    j["trials"] = c.trials;
    j["n_extra"] = c.n_extra;
    j["seed"] = c.seed;
    j["w_cap"] = c.w_cap;
    j["threads"] = c.threads;
    j["mem_ratio"] = c.mem_ratio;
    j["perfect_prep"] = c.perfect_prep;
    j["reject_uncorrectable"] = c.reject_uncorrectable;
    if (!c.output.empty()) {
        j["output"] = c.output;
    }
    return j.dump(2) + "\n";
}

ExperimentConfig load_experiment_config(const std::string &path) {
    std::string text = read_text(path);
    std::string base = fs::path(path).parent_path().string();
    try {
        return parse_experiment_config(text, base);
    } catch (const std::invalid_argument &e) {
        throw ValidationError(path + ": " + e.what());
    }
}

DistillationConfig to_distillation_config(const ExperimentConfig &c) {
    DistillationConfig cfg;
    std::shared_ptr<const CssCode> css;
    try {
        if (!c.code.empty()) {
            css = quantum_registry(c.code);
        } else {
            auto cx = std::make_shared<LinearCode>(load_code_file(resolve_path(c.code_cx_file, c.base_dir)));
            auto cz = std::make_shared<LinearCode>(load_code_file(resolve_path(c.code_cz_file, c.base_dir)));
            css = std::make_shared<CssCode>(CssCode::build(cx, cz, nullptr, "custom"));
        }
    } catch (const std::exception &e) {
        throw ValidationError(std::string("config field 'code': ") + e.what());
    }
    try {
        auto [kind, params] = parse_ancilla_kind(c.ancilla);
        std::vector<std::shared_ptr<const CssCode>> blocks(ancilla_block_count(kind), css);
        cfg.spec = build_ancilla_spec(blocks, kind, params);
    } catch (const std::exception &e) {
        throw ValidationError(std::string("config field 'ancilla': ") + e.what());
    }
    cfg.cc1 = resolve_code(c.c_c1, c.base_dir, "c_c1");
    cfg.cc2 = resolve_code(c.c_c2, c.base_dir, "c_c2");
    auto detect = [&](const std::string &v, const char *field, PostselectMode &mode,
                      std::shared_ptr<const LinearCode> &cd) {
        if (v == "none") {
            mode = PostselectMode::kNone;
        } else if (v == "ideal") {
            mode = PostselectMode::kIdeal;
        } else {
            mode = PostselectMode::kCode;
            cd = resolve_code(v, c.base_dir, field);
        }
    };
    detect(c.c_d1, "c_d1", cfg.ps1, cfg.cd1);
    detect(c.c_d2, "c_d2", cfg.ps2, cfg.cd2);
    cfg.n_extra = c.n_extra;
    cfg.perfect_prep = c.perfect_prep;
    cfg.reject_uncorrectable = c.reject_uncorrectable;
    try {
        cfg.validate();
    } catch (const std::invalid_argument &e) {
        throw ValidationError(e.what());
    }
    return cfg;
}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Fault-tolerant ancilla distillation simulator"};
    app.require_subcommand(1);

    std::string config_path, out_path, scenario_path, results_path, out_dir;
    int threads = 0;
    bool trace = false;

    auto *simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment from a JSON config");
    simulate->add_option("--config", config_path, "Experiment config (JSON)")->required();
    simulate->add_option("--out", out_path, "Results JSON path; a CSV is written next to it");
    simulate->add_option("--threads", threads, "Worker threads (default: config, FTANCILLA_THREADS, all cores)");

    auto *inject = app.add_subcommand("inject", "Run one deterministic trial with scripted faults");
    inject->add_option("--scenario", scenario_path, "Scenario file")->required();
    inject->add_option("--config", config_path, "Experiment config (JSON)")->required();
    inject->add_flag("--trace", trace, "Print the syndrome arrays of every group");

    auto *analyze = app.add_subcommand("analyze", "Write CSV metrics and slope fits from a results file");
    analyze->add_option("--results", results_path, "Results JSON")->required();
    analyze->add_option("--out-dir", out_dir, "Output directory")->required();

    auto *codes = app.add_subcommand("codes", "Code registry");
    codes->require_subcommand(1);
    auto *codes_list = codes->add_subcommand("list", "List built-in codes and combinations");

    std::vector<std::string> argv_store = {"ftancilla"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char *> argv;
    for (const auto &a : argv_store) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(config_path, out_path, threads, out);
        }
        if (inject->parsed()) {
            return cmd_inject(scenario_path, config_path, trace, out);
        }
        if (analyze->parsed()) {
            return cmd_analyze(results_path, out_dir, out);
        }
        if (codes_list->parsed()) {
            return cmd_codes_list(out);
        }
    } catch (const std::invalid_argument &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        err << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace ftancilla
