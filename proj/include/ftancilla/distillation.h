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

#ifndef FTANCILLA_DISTILLATION_H
#define FTANCILLA_DISTILLATION_H

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ftancilla/classical_code.h"
#include "ftancilla/css_code.h"
#include "ftancilla/pauli_frame.h"
#include "ftancilla/rng.h"

namespace ftancilla {

/// How the estimated syndromes of a round are screened.
/// kNone: accept everything. kCode: the parities of an error-detecting code
/// C_d over the extended set [S' | S]. kIdeal: every product of S elements is
/// decoded independently and compared with the XOR of its factors.
enum class PostselectMode : uint8_t { kNone, kCode, kIdeal };

const char *postselect_mode_name(PostselectMode mode);

struct DistillationConfig {
    AncillaSpec spec;
    /// Classical codes of the two rounds; used in systematic form.
    std::shared_ptr<const LinearCode> cc1, cc2;
    PostselectMode ps1 = PostselectMode::kCode;
    PostselectMode ps2 = PostselectMode::kCode;
    /// Error-detecting codes, required when the matching mode is kCode.
    std::shared_ptr<const LinearCode> cd1, cd2;
    /// Spare round-1 groups used to refill rejected blocks.
    size_t n_extra = 2;
    FailureModel model;
    /// Skip faults in the encoding circuits.
    bool perfect_prep = false;
    /// Reject every data block of a group in which the classical decoder
    /// flags a syndrome column uncorrectable.
    bool reject_uncorrectable = true;

    const LinearCode &cc(size_t round) const {
        return round == 0 ? *cc1 : *cc2;
    }
    PostselectMode ps(size_t round) const {
        return round == 0 ? ps1 : ps2;
    }
    const std::shared_ptr<const LinearCode> &cd(size_t round) const {
        return round == 0 ? cd1 : cd2;
    }
    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Transversal check network of one round over n_c ancilla units of
/// lengths.size() blocks each. Unit u occupies blocks u * m .. u * m + m - 1;
/// units 0..r-1 are the check units. For A[i][j] = 1, unit r + j is coupled
/// to unit i: on a kZ block data controls check and the check is measured in
/// the Z basis, on a kX block the directions are reversed and the check is
/// measured in the X basis. Layers sharing a unit go to distinct steps.
Circuit build_round_circuit(
    const BitMatrix &a, const std::vector<CheckBasis> &bases, const std::vector<size_t> &lengths);
Circuit build_round_circuit(const BitMatrix &a, CheckBasis basis, size_t n);

/// Extended element list [S' | S]: row j of A_d (C_d systematic) gives the
/// product S'_j. cd == nullptr returns S.
std::vector<PauliString> extend_stabilizers(const std::vector<PauliString> &s, const LinearCode *cd);

/// sigma[i][c] = parity of check record i with element c. A record frame holds
/// the flips of Z-basis measurements in e and of X-basis measurements in f,
/// so the parity is the symplectic product with the element.
BitMatrix compute_sigma(const std::vector<PauliFrame> &check_records, const std::vector<PauliString> &elements);

/// Decodes each sigma column with the systematic code cc; row j of the result
/// is the estimated syndrome of unit j. Statuses per column if requested.
BitMatrix decode_columns(const BitMatrix &sigma, const LinearCode &cc, std::vector<DecodeStatus> *status = nullptr);

/// Accept mask over the rows of se_hat (columns [S' | S]); cd == nullptr
/// accepts all.
BitVec postselect(const BitMatrix &se_hat, const LinearCode *cd);

/// Ideal postselection from the sigma columns of the S elements alone.
BitVec postselect_ideal(const BitMatrix &sigma_s, const LinearCode &cc);

/// Correction of one unit from the estimated S bits of a round: decode the
/// generator bits block by block, then fix each logical element whose parity
/// disagrees with its estimate. Word-level; blocks must be <= 64 qubits.
class RoundCorrector {
   public:
    RoundCorrector() = default;
    RoundCorrector(const AncillaSpec &spec, size_t round);

    size_t num_elements() const {
        return reps_.size();
    }
    /// Element c restricted to the checked Pauli type on block b.
    uint64_t rep(size_t c, size_t b) const {
        return reps_[c][b];
    }
    CheckBasis basis(size_t b) const {
        return blocks_[b].basis;
    }
    /// err[b] is the e word of kZ blocks and the f word of kX blocks. Returns
    /// false if a block's decoder flags the syndrome uncorrectable.
    bool correct(uint64_t s_bits, uint64_t *err) const;
    /// PauliFrame version.
    bool correct(const BitVec &s_row, PauliFrame &frame) const;

   private:
    struct Block {
        CheckBasis basis;
        const LinearCode *decoder;
        std::vector<uint32_t> gen_elements;
    };
    struct Logical {
        uint32_t element;
        std::vector<uint64_t> flip;
    };
    std::vector<Block> blocks_;
    std::vector<Logical> logicals_;
    std::vector<std::vector<uint64_t>> reps_;
};

/// Single-round correction of a frame from estimated S bits (generator part
/// and logical bits). Returns false on an uncorrectable block.
bool correct_block(const AncillaSpec &spec, size_t round, const BitVec &s_row, PauliFrame &frame);

/// Faults to inject into a run, keyed by stage. Scenario text: a header line
/// "@ prep <unit>", "@ round1 <group>" or "@ round2 <group>" followed by fault
/// lines in the FaultInjection format.
struct ProtocolInjection {
    std::map<size_t, FaultInjection> prep;
    std::map<size_t, FaultInjection> round1;
    std::map<size_t, FaultInjection> round2;

    bool empty() const {
        return prep.empty() && round1.empty() && round2.empty();
    }
    const std::map<size_t, FaultInjection> &round(size_t r) const {
        return r == 0 ? round1 : round2;
    }
    std::string str() const;
    static ProtocolInjection parse(const std::string &text);
};

struct OutputBlock {
    /// Index of the prepared unit.
    size_t unit = 0;
    /// Round-2 group and position inside it.
    size_t group = 0;
    size_t position = 0;
    /// Residual error words per block of the unit.
    std::vector<uint64_t> e;
    std::vector<uint64_t> f;
    ResidualWeight weight;
};

struct TrialOutcome {
    bool aborted = false;
    uint64_t round1_outputs = 0;
    uint64_t round1_rejected = 0;
    uint64_t round2_outputs = 0;
    uint64_t round2_rejected = 0;
    std::vector<OutputBlock> accepted;
};

struct RoundTrace {
    size_t round = 0;
    size_t group = 0;
    /// Unit ids of the group in position order.
    std::vector<size_t> units;
    /// r x |SE| parities and n_c x |SE| estimates, columns [S' | S].
    BitMatrix sigma;
    BitMatrix se_hat;
    /// Over data positions (k_c bits).
    BitVec accepted;
    /// Any decoder column flagged uncorrectable.
    bool uncorrectable = false;
    /// Frames of the data units after correction (before rejection).
    std::vector<PauliFrame> outputs;
};

struct ProtocolTrace {
    std::vector<RoundTrace> rounds;
    std::string str() const;
};

/// Precompiled protocol for a configuration; run() is const and thread-safe.
class Distiller {
   public:
    explicit Distiller(DistillationConfig config, size_t w_cap = 4);

    const DistillationConfig &config() const {
        return config_;
    }
    const WeightTable &weights() const {
        return weights_;
    }
    const Circuit &prep_circuit() const {
        return prep_.circuit();
    }
    const Circuit &round_circuit(size_t round) const {
        return rounds_[round].circuit.circuit();
    }
    size_t units_per_trial() const;
    size_t round_groups(size_t round) const;

    /// One trial with the configured failure model plus injected faults.
    void run(Rng &rng, TrialOutcome &out, const ProtocolInjection *injection = nullptr,
             ProtocolTrace *trace = nullptr) const;
    void run(const FailureModel &model, Rng &rng, TrialOutcome &out, const ProtocolInjection *injection = nullptr,
             ProtocolTrace *trace = nullptr) const;

   private:
    struct Round {
        std::shared_ptr<const LinearCode> cc;
        size_t n_c = 0, r_c = 0, k_c = 0;
        CompiledCircuit circuit;
        size_t num_s = 0;
        size_t num_extra = 0;
        // S' row j as a mask over S indices.
        std::vector<uint64_t> extra_rows;
        RoundCorrector corrector;
    };
    struct Scratch;

    // Runs one group; returns the accept mask over data positions.
    uint64_t run_group(const Round &rd, size_t round, size_t group, const std::vector<size_t> &units,
                       const std::vector<SampledFault> &faults, Scratch &sc, ProtocolTrace *trace) const;

    DistillationConfig config_;
    size_t m_ = 1;
    CompiledCircuit prep_;
    Round rounds_[2];
    WeightTable weights_;
};

TrialOutcome run_protocol(const DistillationConfig &config, Rng &rng, const ProtocolInjection *injection = nullptr,
                          ProtocolTrace *trace = nullptr);

/// Exhaustive single-fault sweep over the round-1 CNOTs of one group (all
/// locations x 15 Paulis) with every other fault source off. A case passes if
/// every output block's X error is zero or exactly the fault's X support.
struct SweepReport {
    size_t cases = 0;
    size_t passed = 0;
    std::vector<std::string> failures;
};
SweepReport single_fault_sweep(const DistillationConfig &config, size_t group = 0);

/// Steane extraction: transversal CNOT data -> x_anc, then z_anc -> data;
/// MeasZ on x_anc, MeasX on z_anc. Returns the parities of the records with
/// [H_Z; L_Z] and [H_X; D].
struct SteaneSyndrome {
    BitVec gz;
    BitVec gx;
};
SteaneSyndrome steane_extract(const PauliFrame &data, const PauliFrame &x_anc, const PauliFrame &z_anc,
                              const CssCode &css);

}  // namespace ftancilla

#endif
