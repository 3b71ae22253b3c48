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

#ifndef FTANCILLA_GF2_H
#define FTANCILLA_GF2_H

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ftancilla {

constexpr size_t words_for_bits(size_t n) {
    return (n + 63) >> 6;
}

/// Packed GF(2) vector. Bits at or beyond size() are always zero.
class BitVec {
   public:
    BitVec() = default;
    explicit BitVec(size_t num_bits);

    static BitVec from_string(std::string_view bits);
    static BitVec from_indices(size_t num_bits, std::initializer_list<size_t> ones);
    static BitVec from_indices(size_t num_bits, const std::vector<size_t> &ones);
    static BitVec from_word(size_t num_bits, uint64_t word);

    size_t size() const {
        return num_bits_;
    }
    size_t num_words() const {
        return words_.size();
    }
    bool get(size_t k) const {
        return (words_[k >> 6] >> (k & 63)) & 1;
    }
    void set(size_t k, bool value) {
        uint64_t m = uint64_t{1} << (k & 63);
        if (value) {
            words_[k >> 6] |= m;
        } else {
            words_[k >> 6] &= ~m;
        }
    }
    void flip(size_t k) {
        words_[k >> 6] ^= uint64_t{1} << (k & 63);
    }
    void clear();

    std::span<uint64_t> words() {
        return words_;
    }
    std::span<const uint64_t> words() const {
        return words_;
    }
    /// Low 64 bits (the whole vector when size() <= 64).
    uint64_t word0() const {
        return words_.empty() ? 0 : words_[0];
    }

    size_t popcount() const;
    bool any() const;
    bool none() const {
        return !any();
    }
    /// Parity of the bitwise AND (the GF(2) inner product).
    bool dot(const BitVec &other) const;
    std::vector<size_t> ones() const;

    BitVec &operator^=(const BitVec &other);
    BitVec &operator&=(const BitVec &other);
    BitVec &operator|=(const BitVec &other);
    BitVec operator^(const BitVec &other) const;
    BitVec operator&(const BitVec &other) const;
    bool operator==(const BitVec &other) const = default;
    bool operator<(const BitVec &other) const;

    /// Bits [start, start + len) as a new vector.
    BitVec slice(size_t start, size_t len) const;
    /// Overwrites bits [start, start + src.size()) with src.
    void splice(size_t start, const BitVec &src);
    BitVec concat(const BitVec &other) const;

    std::string str() const;
    size_t hash() const;

   private:
    size_t num_bits_ = 0;
    std::vector<uint64_t> words_;
};

std::ostream &operator<<(std::ostream &out, const BitVec &v);

struct BitVecHash {
    size_t operator()(const BitVec &v) const {
        return v.hash();
    }
};

/// Dense GF(2) matrix stored as packed rows.
class BitMatrix {
   public:
    BitMatrix() = default;
    BitMatrix(size_t rows, size_t cols);

    static BitMatrix identity(size_t n);
    static BitMatrix from_rows(const std::vector<std::string> &rows, size_t cols = SIZE_MAX);
    static BitMatrix from_rows(std::vector<BitVec> rows, size_t cols);

    size_t rows() const {
        return rows_.size();
    }
    size_t cols() const {
        return cols_;
    }
    bool get(size_t r, size_t c) const {
        return rows_[r].get(c);
    }
    void set(size_t r, size_t c, bool v) {
        rows_[r].set(c, v);
    }
    BitVec &row(size_t r) {
        return rows_[r];
    }
    const BitVec &row(size_t r) const {
        return rows_[r];
    }
    const std::vector<BitVec> &row_list() const {
        return rows_;
    }
    BitVec column(size_t c) const;
    size_t column_weight(size_t c) const;

    void append_row(BitVec row);
    BitMatrix transpose() const;
    /// M v^T.
    BitVec mul(const BitVec &v) const;
    /// M N.
    BitMatrix mul(const BitMatrix &other) const;
    /// M N^T (row-by-row inner products, the natural packed product).
    BitMatrix mul_transpose(const BitMatrix &other) const;
    /// Rows of this followed by rows of other.
    BitMatrix vstack(const BitMatrix &other) const;
    /// Column c of the result is column perm[c] of this.
    BitMatrix permute_columns(const std::vector<size_t> &perm) const;
    BitMatrix select_columns(size_t start, size_t len) const;
    bool is_zero() const;
    bool operator==(const BitMatrix &other) const = default;

    std::string str() const;

   private:
    size_t cols_ = 0;
    std::vector<BitVec> rows_;
};

std::ostream &operator<<(std::ostream &out, const BitMatrix &m);

struct RrefResult {
    BitMatrix reduced;
    std::vector<size_t> pivots;
    size_t rank = 0;
};

/// Reduced row echelon form. Pivot rows are taken in increasing row order.
RrefResult rref(const BitMatrix &m);
size_t rank(const BitMatrix &m);

struct SystematicForm {
    /// r x (n - r) block so that the permuted, row-reduced H equals [I_r | A].
    BitMatrix a;
    /// Column c of the systematic matrix is column col_perm[c] of H.
    std::vector<size_t> col_perm;
};

/// Throws std::invalid_argument("not full rank") on rank-deficient input.
SystematicForm systematic_form(const BitMatrix &h);

/// Basis of {v : M v^T = 0}, one row per free column in increasing order.
BitMatrix null_space_basis(const BitMatrix &m);

/// Throws std::invalid_argument("singular matrix").
BitMatrix invert(const BitMatrix &m);

/// True iff the two matrices have equal row spaces.
bool same_row_space(const BitMatrix &a, const BitMatrix &b);
/// True iff v lies in the row space of m.
bool in_row_space(const BitMatrix &m, const BitVec &v);

/// Parses "rows cols" followed by rows of 0/1 characters (spaces between
/// characters allowed). Blank lines and lines starting with '#' are skipped.
BitMatrix parse_matrix(std::string_view text);
std::string format_matrix(const BitMatrix &m);

}  // namespace ftancilla

#endif
