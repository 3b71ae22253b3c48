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

#ifndef FTANCILLA_PAULI_FRAME_H
#define FTANCILLA_PAULI_FRAME_H

#include <array>
#include <map>
#include <string>
#include <vector>

#include "ftancilla/css_code.h"
#include "ftancilla/pauli.h"
#include "ftancilla/rng.h"

namespace ftancilla {

enum class GateKind : uint8_t { kPrepZ, kPrepX, kCnot, kPhase, kMeasZ, kMeasX };

const char *gate_kind_name(GateKind kind);

struct Loc {
    uint32_t block = 0;
    uint32_t qubit = 0;
    bool operator==(const Loc &other) const = default;
};

struct Gate {
    GateKind kind;
    /// Target of single-qubit gates; control of CNOT.
    Loc a;
    /// Target of CNOT.
    Loc b;

    size_t arity() const {
        return kind == GateKind::kCnot ? 2 : 1;
    }
    bool operator==(const Gate &other) const = default;
    bool is_measurement() const {
        return kind == GateKind::kMeasZ || kind == GateKind::kMeasX;
    }
    bool is_prep() const {
        return kind == GateKind::kPrepZ || kind == GateKind::kPrepX;
    }
};

/// Time-ordered gate list over several code blocks.
struct Circuit {
    std::vector<size_t> block_lengths;
    std::vector<std::vector<Gate>> steps;

    Circuit() = default;
    explicit Circuit(std::vector<size_t> lengths) : block_lengths(std::move(lengths)) {
    }

    size_t num_blocks() const {
        return block_lengths.size();
    }
    size_t num_gates() const;
    size_t count(GateKind kind) const;
    /// Adds a gate to the given step, growing the step list as needed.
    void add(size_t step, const Gate &gate);
    /// Throws std::invalid_argument if a qubit is used twice in a step, a
    /// measured qubit is reused, a Z-measured qubit is ever a CNOT control or
    /// an X-measured qubit is ever a CNOT target.
    void validate() const;
    std::string str() const;
};

struct FailureModel {
    double p_gate = 0;
    double p_meas = 0;
    double p_mem = 0;

    static FailureModel uniform(double p) {
        return {p, p, 0};
    }
    void validate() const;
};

/// A Pauli fault attached to a circuit location. For gates the Pauli acts on
/// the gate's qubits (control first for CNOT) right after the gate; for
/// measurements it acts right before, and only flips the record. Idle faults
/// (gate == kIdle) act on `idle` at the end of the step.
struct InjectedFault {
    static constexpr size_t kIdle = SIZE_MAX;
    size_t step = 0;
    size_t gate = 0;
    PauliString pauli;
    Loc idle;
};

struct FaultInjection {
    std::vector<InjectedFault> faults;

    bool empty() const {
        return faults.empty();
    }
    /// Scenario text: one "step gate_idx pauli" line per fault; idle faults use
    /// "step @block:qubit pauli". '#' starts a comment.
    std::string str() const;
    static FaultInjection parse(const std::string &text);
    /// Throws if a fault does not fit the circuit.
    void validate(const Circuit &circuit) const;
};

/// Measurement records: records[b] bit q holds the error contribution of the
/// measurement of (b, q) (0 for unmeasured qubits).
struct NoisyRun {
    PauliFrame frame;
    std::vector<BitVec> records;
};

void apply_gate(PauliFrame &frame, const Gate &gate);
/// Applies the Pauli (over the gate's qubits) to the frame.
void apply_pauli_at(PauliFrame &frame, const Circuit &circuit, const InjectedFault &fault);

NoisyRun run_noisy(const Circuit &circuit, const FaultInjection &injection);
NoisyRun run_noisy(const Circuit &circuit, const FaultInjection &injection, const PauliFrame &input);

struct EffectiveSupport {
    /// Per block, qubits touched by an odd number of X (resp. Z) fault parts.
    std::vector<BitVec> x;
    std::vector<BitVec> z;
};

EffectiveSupport effective_support(const FaultInjection &injection, const Circuit &circuit);

enum class EncoderStyle : uint8_t {
    /// CNOTs fan each pivot out to its row of the reduced X-generator matrix.
    kFanout,
    /// Greedy column elimination run backwards from the target state; any
    /// qubit may act as control or target. Best of many random restarts,
    /// never worse than kFanout.
    kGreedy,
};

/// Prepares a CSS-type spec from PrepX / PrepZ and CNOTs only.
Circuit synth_encoding_circuit(const AncillaSpec &spec, EncoderStyle style = EncoderStyle::kGreedy);

/// Heisenberg picture: the stabilizers of the circuit's output state, obtained
/// by pushing each prepared single-qubit stabilizer through the circuit.
std::vector<PauliString> circuit_output_stabilizers(const Circuit &circuit);

enum class SiteClass : uint8_t { kTwoQubit, kOneQubit, kMeasure, kIdle };

struct FaultSite {
    SiteClass cls;
    uint32_t step;
    uint32_t gate;
    Loc a;
    Loc b;
};

/// A sampled fault: site index within its class and a Pauli code. Two-qubit:
/// bits (xa, za, xb, zb) in 1..15; one-qubit and idle: bits (x, z) in 1..3;
/// measurement: 1.
struct SampledFault {
    SiteClass cls;
    uint32_t site;
    uint8_t code;
};

/// A circuit together with the precomputed linear effect of every elementary
/// fault and every input error bit on its outputs. Output layout (words): for
/// B blocks, e of block b at b, f at B + b, measurement records at 2B + b.
/// Requires block lengths <= 64.
class CompiledCircuit {
   public:
    CompiledCircuit() = default;
    CompiledCircuit(Circuit circuit, bool with_idle_sites);

    const Circuit &circuit() const {
        return circuit_;
    }
    size_t num_blocks() const {
        return circuit_.num_blocks();
    }
    size_t state_words() const {
        return 3 * num_blocks();
    }
    const std::vector<FaultSite> &sites(SiteClass cls) const {
        return sites_[static_cast<size_t>(cls)];
    }

    /// state = propagation of the input frame words (e then f, one word per block).
    void propagate_input(const uint64_t *input_e, const uint64_t *input_f, uint64_t *state) const;
    void apply_fault(const SampledFault &fault, uint64_t *state) const;
    /// Equivalent of run_noisy through the effect tables.
    NoisyRun run(const PauliFrame &input, const std::vector<SampledFault> &faults) const;

    /// Converts between scenario faults and sampled faults.
    SampledFault to_sampled(const InjectedFault &fault) const;
    InjectedFault to_injected(const SampledFault &fault) const;

   private:
    struct Term {
        uint32_t word;
        uint64_t mask;
    };
    struct Span {
        uint32_t begin;
        uint32_t end;
    };
    Span record_effect(const std::vector<uint64_t> &state);
    void apply_span(Span s, uint64_t *state) const {
        for (uint32_t k = s.begin; k < s.end; k++) {
            state[terms_[k].word] ^= terms_[k].mask;
        }
    }
    // Simulates the word-level frame from the start of `step` (after the pre
    // step action) to the end of the circuit.
    void simulate_from(size_t step, std::vector<uint64_t> &state) const;

    Circuit circuit_;
    std::array<std::vector<FaultSite>, 4> sites_;
    // Per site: component spans (two-qubit: xa, za, xb, zb; one-qubit: x, z; measure: flip).
    std::array<std::vector<Span>, 4> site_effects_;
    // Per block per qubit: spans for an input X and an input Z.
    std::vector<std::vector<std::array<Span, 2>>> input_effects_;
    std::vector<Term> terms_;
    // Site index lookup for (step, gate).
    std::vector<std::vector<std::pair<SiteClass, uint32_t>>> gate_site_;
    // Idle site index for (step, block, qubit).
    std::map<std::array<uint32_t, 3>, uint32_t> idle_site_;
};

/// Bernoulli(p) trials over a long, concatenated sequence of locations.
class BernoulliStream {
   public:
    BernoulliStream(double p, Rng &rng) : skip_(p) {
        next_ = skip_.gap(rng);
    }
    /// Visits the successes among the next `count` locations.
    template <typename Fn>
    void scan(uint64_t count, Rng &rng, Fn &&on_hit) {
        while (next_ < count) {
            on_hit(next_);
            next_ += 1 + skip_.gap(rng);
        }
        next_ -= count;
    }

   private:
    GeometricSkipper skip_;
    uint64_t next_;
};

/// Streams for one class each, in SiteClass order.
struct FaultStreams {
    BernoulliStream two, one, meas, idle;
    FaultStreams(const FailureModel &model, Rng &rng)
        : two(model.p_gate, rng), one(model.p_gate, rng), meas(model.p_meas, rng), idle(model.p_mem, rng) {
    }
};

/// Appends the faults of one circuit execution to `out`.
void sample_faults(const CompiledCircuit &circuit, FaultStreams &streams, Rng &rng, std::vector<SampledFault> &out);

/// Independent sample of the failure model on a circuit.
FaultInjection sample_failures(const FailureModel &model, const Circuit &circuit, Rng &rng);

}  // namespace ftancilla

#endif
