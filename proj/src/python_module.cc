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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ftancilla/cli.h"

namespace py = pybind11;
using namespace ftancilla;

namespace {

std::string decode_status(DecodeStatus s) {
    return decode_status_name(s);
}

RateKind rate_kind(const std::string &kind) {
    if (kind == "tail") {
        return RateKind::kTail;
    }
    if (kind == "point") {
        return RateKind::kPoint;
    }
    throw std::invalid_argument("kind must be 'tail' or 'point'");
}

// Runs the experiment described by a config (JSON text) and returns the
// results document (JSON text).
std::string simulate(const std::string &config_json, uint64_t trials, size_t threads, const std::string &base_dir) {
    ExperimentConfig ec = parse_experiment_config(config_json, base_dir);
    if (trials > 0) {
        ec.trials = trials;
    }
    Distiller distiller(to_distillation_config(ec), ec.w_cap);
    ExperimentOptions opt;
    opt.p_grid = ec.p;
    opt.trials = ec.trials;
    opt.seed = ec.seed;
    opt.threads = threads > 0 ? threads : ec.threads;
    opt.mem_ratio = ec.mem_ratio;
    opt.label = ec.label;
    return stats_to_json(run_experiment(distiller, opt));
}

py::dict sweep(const std::string &config_json, size_t group, const std::string &base_dir) {
    SweepReport r = single_fault_sweep(to_distillation_config(parse_experiment_config(config_json, base_dir)), group);
    py::dict d;
    d["cases"] = r.cases;
    d["passed"] = r.passed;
    d["failures"] = r.failures;
    return d;
}

py::dict encoder(const std::string &code, const std::string &ancilla, const std::string &style) {
    EncoderStyle s;
    if (style == "greedy") {
        s = EncoderStyle::kGreedy;
    } else if (style == "fanout") {
        s = EncoderStyle::kFanout;
    } else {
        throw std::invalid_argument("style must be 'greedy' or 'fanout'");
    }
    auto [kind, params] = parse_ancilla_kind(ancilla);
    std::vector<std::shared_ptr<const CssCode>> codes(ancilla_block_count(kind), quantum_registry(code));
    Circuit c = synth_encoding_circuit(build_ancilla_spec(codes, kind, params), s);
    py::dict d;
    d["cnots"] = c.count(GateKind::kCnot);
    d["depth"] = c.steps.size() - 1;
    d["text"] = c.str();
    return d;
}

py::tuple cli(const std::vector<std::string> &args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fault-tolerant ancilla distillation: codes, encoders, Monte Carlo and statistics.";

    py::class_<LinearCode, std::shared_ptr<LinearCode>>(m, "LinearCode")
        .def_property_readonly("name", &LinearCode::name)
        .def_property_readonly("n", &LinearCode::n)
        .def_property_readonly("k", &LinearCode::k)
        .def_property_readonly("d", &LinearCode::d)
        .def_property_readonly("t", &LinearCode::t)
        .def(
            "syndrome", [](const LinearCode &c, const std::string &bits) { return c.syndrome(BitVec::from_string(bits)).str(); },
            py::arg("bits"))
        .def(
            "decode",
            [](const LinearCode &c, const std::string &syndrome) {
                DecodeResult r = c.decode(BitVec::from_string(syndrome));
                return py::make_tuple(r.error.str(), decode_status(r.status));
            },
            py::arg("syndrome"), "Returns (error bits, status).")
        .def("__repr__", [](const LinearCode &c) {
            std::ostringstream s;
            s << "LinearCode('" << c.name() << "', [" << c.n() << "," << c.k() << "," << c.d() << "])";
            return s.str();
        });

    m.def(
        "code",
        [](const std::string &name) { return std::const_pointer_cast<LinearCode>(registry(name)); },
        py::arg("name"), "Registry code by name.");
    m.def(
        "code_names",
        [] {
            std::vector<std::string> names;
            for (const auto &e : registry_names()) {
                names.push_back(e.name);
            }
            return names;
        },
        "Names of the built-in classical codes.");
    m.def("encoder", &encoder, py::arg("code") = "golay23", py::arg("ancilla") = "zero", py::arg("style") = "greedy",
          "Encoding circuit for an ancilla: CNOT count, depth and text.");

    m.def("simulate", &simulate, py::arg("config_json"), py::arg("trials") = 0, py::arg("threads") = 0,
          py::arg("base_dir") = "", "Runs a config (JSON text); returns the results document (JSON text).");
    m.def("single_fault_sweep", &sweep, py::arg("config_json"), py::arg("group") = 0, py::arg("base_dir") = "");
    m.def("run_cli", &cli, py::arg("args"), "Runs the command line; returns (exit code, stdout, stderr).");

    m.def("binomial_tail", &binomial_tail, py::arg("n"), py::arg("t"), py::arg("p"));
    m.def("binomial_point", &binomial_point, py::arg("n"), py::arg("t"), py::arg("p"));
    m.def(
        "effective_rate",
        [](double prob, size_t n, size_t t, const std::string &kind) { return effective_rate(prob, n, t, rate_kind(kind)); },
        py::arg("prob"), py::arg("n"), py::arg("t"), py::arg("kind") = "tail");
    m.def("wilson_ci", &wilson_ci, py::arg("k"), py::arg("n"), py::arg("z") = 1.96);
    m.def(
        "slope_fit",
        [](const std::vector<std::pair<double, double>> &points) {
            FitResult f = slope_fit(points);
            py::dict d;
            d["slope"] = f.slope;
            d["intercept"] = f.intercept;
            d["stderr"] = f.stderr_slope;
            d["points"] = f.points;
            return d;
        },
        py::arg("points"));
}
