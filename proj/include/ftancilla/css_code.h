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

#ifndef FTANCILLA_CSS_CODE_H
#define FTANCILLA_CSS_CODE_H

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ftancilla/classical_code.h"
#include "ftancilla/pauli.h"

namespace ftancilla {

/// [[n, k]] CSS code. X stabilizers are X^{rows of H_X}, Z stabilizers Z^{rows of H_Z};
/// X errors are decoded with C_Z and Z errors with C_X.
class CssCode {
   public:
    /// logical_x (optional) pins the logical-X representatives D; otherwise D
    /// extends rowspace(H_X) to C_Z via row reduction.
    static CssCode build(
        std::shared_ptr<const LinearCode> cx,
        std::shared_ptr<const LinearCode> cz,
        const BitMatrix *logical_x = nullptr,
        std::string name = "");

    const std::string &name() const {
        return name_;
    }
    size_t n() const {
        return hx().cols();
    }
    size_t k() const {
        return d_.rows();
    }
    size_t r_x() const {
        return hx().rows();
    }
    size_t r_z() const {
        return hz().rows();
    }
    const LinearCode &cx() const {
        return *cx_;
    }
    const LinearCode &cz() const {
        return *cz_;
    }
    const BitMatrix &hx() const {
        return cx_->h();
    }
    const BitMatrix &hz() const {
        return cz_->h();
    }
    /// Logical X representatives, one row per logical qubit.
    const BitMatrix &d() const {
        return d_;
    }
    /// Logical Z representatives with L_Z D^T = I.
    const BitMatrix &lz() const {
        return lz_;
    }
    /// [H_Z; L_Z].
    const BitMatrix &hz_ext() const {
        return hz_ext_;
    }
    /// [H_X; D].
    const BitMatrix &hx_ext() const {
        return hx_ext_;
    }
    /// rowspace(H_X) == rowspace(H_Z).
    bool is_symmetric() const;

   private:
    std::string name_;
    std::shared_ptr<const LinearCode> cx_, cz_;
    BitMatrix d_, lz_, hz_ext_, hx_ext_;
};

/// Named quantum codes: "golay23" ([[23,1,7]] with the standard logical
/// vector), "steane" ([[7,1,3]] from hamming7).
std::shared_ptr<const CssCode> quantum_registry(const std::string &name);
std::vector<std::string> quantum_registry_names();

/// Conditions under which transversal phase gates act as a logical phase on
/// logical qubit j: symmetric code, doubly-even C_X^perp, odd-weight D row j.
bool check_phase_gate_compatible(const CssCode &css, size_t j);
/// All logical qubits compatible.
bool check_phase_gate_compatible(const CssCode &css);

enum class AncillaKind : uint8_t { kZero, kPlus, kMixed, kBell, kOmega, kTheta };

/// Basis of the check measurements applied to a block in a round.
/// kZ: Z-type checks, bitwise MeasZ on check blocks, removes X errors.
/// kX: X-type checks, bitwise MeasX, removes Z errors.
enum class CheckBasis : uint8_t { kZ, kX };

struct AncillaParams {
    size_t i = 0;
    size_t j = 0;
    /// For mixed: kZ prepares ||Z|X_j>, kX prepares ||X|Z_j>.
    CheckBasis basis = CheckBasis::kZ;
};

enum class ElementRole : uint8_t { kZGenerator, kXGenerator, kLogical };

struct SpecElement {
    /// Operator over the concatenated qubits of all blocks.
    PauliString op;
    ElementRole role;
    /// For generators: the block and row of H_Z / H_X.
    size_t block = 0;
    size_t row = 0;
    std::string label;
};

/// Stabilizer state over m code blocks, with its stabilizer set split into the
/// elements checked in round 1 (S1) and round 2 (S2).
struct AncillaSpec {
    AncillaKind kind = AncillaKind::kZero;
    AncillaParams params;
    std::vector<std::shared_ptr<const CssCode>> blocks;
    std::vector<size_t> offsets;
    size_t num_qubits = 0;
    std::array<std::vector<SpecElement>, 2> rounds;
    /// rounds_basis[mu][b]: check basis of block b in round mu.
    std::array<std::vector<CheckBasis>, 2> round_basis;

    size_t num_blocks() const {
        return blocks.size();
    }
    std::vector<size_t> block_lengths() const;
    const std::vector<SpecElement> &s1() const {
        return rounds[0];
    }
    const std::vector<SpecElement> &s2() const {
        return rounds[1];
    }
    /// S1 followed by S2.
    std::vector<PauliString> all_elements() const;
    /// Every element has a single Pauli type on each block, matching the round basis.
    bool is_distillable() const;
    /// Every element is purely X-type or purely Z-type.
    bool is_css_type() const;
    std::string kind_name() const;
};

std::string ancilla_kind_name(AncillaKind kind, const AncillaParams &params);
/// Parses "zero", "plus", "mixed(j,Z|X)", "bell(i,j)", "omega(i,j)", "theta(j)".
std::pair<AncillaKind, AncillaParams> parse_ancilla_kind(const std::string &text);
size_t ancilla_block_count(AncillaKind kind);

AncillaSpec build_ancilla_spec(
    const std::vector<std::shared_ptr<const CssCode>> &codes, AncillaKind kind, const AncillaParams &params = {});

/// Theta(j) spec obtained from omega(j, j) by bitwise phase gates on block b.
AncillaSpec apply_bitwise_phase(const AncillaSpec &omega);

/// One bit per element of S1 followed by S2; 1 = anticommutes with the frame.
BitVec generalized_syndrome(const AncillaSpec &spec, const PauliFrame &frame);

/// Minimum weights of the X part and Z part of a residual error, taken over
/// all Paulis of the same kind with the same generalized syndrome.
struct ResidualWeight {
    /// w_cap + 1 encodes "> w_cap".
    size_t x = 0;
    size_t z = 0;
    bool operator==(const ResidualWeight &other) const = default;
};

/// Lookup tables from generalized syndrome to minimum equivalent weight,
/// built by enumerating all single-type Paulis of weight <= w_cap.
class WeightTable {
   public:
    static WeightTable build(const AncillaSpec &spec, size_t w_cap = 4);

    size_t w_cap() const {
        return w_cap_;
    }
    size_t above_cap() const {
        return w_cap_ + 1;
    }
    ResidualWeight residual_weight(const PauliFrame &frame) const;

    /// Word-level access for blocks of length <= 64: e_blocks[b] holds block b's bits.
    bool has_word_path() const {
        return word_path_;
    }
    size_t x_weight_words(const uint64_t *e_blocks) const;
    size_t z_weight_words(const uint64_t *f_blocks) const;

   private:
    struct Part {
        size_t key_bits = 0;
        // Per block, per qubit: contribution to the syndrome key (key_bits <= 64).
        std::vector<std::vector<uint64_t>> col_key;
        // Rows used to build BitVec keys when key_bits > 64.
        std::vector<PauliString> rows;
        std::vector<uint8_t> dense;
        std::unordered_map<uint64_t, uint8_t> sparse;
        std::unordered_map<BitVec, uint8_t, BitVecHash> wide;
    };
    void build_part(Part &part, const std::vector<PauliString> &checks, bool x_errors);
    size_t lookup(const Part &part, uint64_t key) const;
    size_t part_weight(const Part &part, const PauliString &error, bool x_errors) const;

    size_t w_cap_ = 4;
    std::vector<size_t> lengths_;
    bool word_path_ = false;
    Part x_part_, z_part_;
};

/// Convenience wrapper building a table on the fly.
ResidualWeight residual_weight(const AncillaSpec &spec, const PauliFrame &frame, size_t w_cap = 4);

}  // namespace ftancilla

#endif
