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

#ifndef FTANCILLA_PAULI_H
#define FTANCILLA_PAULI_H

#include <string>
#include <vector>

#include "ftancilla/gf2.h"

namespace ftancilla {

/// Phase-free Pauli operator X^x Z^z over a flat qubit range.
struct PauliString {
    BitVec x;
    BitVec z;

    PauliString() = default;
    explicit PauliString(size_t n) : x(n), z(n) {
    }
    PauliString(BitVec x_part, BitVec z_part);

    size_t size() const {
        return x.size();
    }
    size_t weight() const;
    bool is_x_type() const {
        return z.none();
    }
    bool is_z_type() const {
        return x.none();
    }
    bool is_identity() const {
        return x.none() && z.none();
    }
    /// Symplectic inner product: true iff the two operators anticommute.
    bool anticommutes(const PauliString &other) const;
    PauliString &operator*=(const PauliString &other);
    bool operator==(const PauliString &other) const = default;

    /// "IXYZ..." notation.
    std::string str() const;
    static PauliString from_str(const std::string &text);
};

/// Pauli error X^e Z^f tracked per code block.
struct PauliFrame {
    std::vector<BitVec> e;
    std::vector<BitVec> f;

    PauliFrame() = default;
    explicit PauliFrame(const std::vector<size_t> &block_lengths);
    static PauliFrame uniform(size_t num_blocks, size_t n);

    size_t num_blocks() const {
        return e.size();
    }
    std::vector<size_t> block_lengths() const;
    size_t total_qubits() const;
    bool is_zero() const;
    void clear();

    /// Concatenation over blocks in order.
    PauliString flatten() const;
    static PauliFrame unflatten(const PauliString &p, const std::vector<size_t> &block_lengths);

    PauliFrame &operator^=(const PauliFrame &other);
    bool operator==(const PauliFrame &other) const = default;
    std::string str() const;
};

}  // namespace ftancilla

#endif
