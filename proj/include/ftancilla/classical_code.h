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

#ifndef FTANCILLA_CLASSICAL_CODE_H
#define FTANCILLA_CLASSICAL_CODE_H

#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ftancilla/gf2.h"

namespace ftancilla {

enum class DecodeStatus : uint8_t {
    /// Syndrome has a coset leader of weight <= t.
    kInTable,
    /// Leader of weight in (t, w_max] found by bounded enumeration.
    kEnumerated,
    /// No leader of weight <= w_max; the estimate is zero.
    kUncorrectable,
};

const char *decode_status_name(DecodeStatus s);

struct DecodeResult {
    BitVec error;
    DecodeStatus status;
};

/// Binary linear [n, k, d] code given by a full-rank parity-check matrix,
/// with a syndrome-table decoder.
class LinearCode {
   public:
    /// w_max = 0 selects the default t + 1.
    static LinearCode build(const BitMatrix &h, size_t d, size_t w_max = 0, std::string name = "");

    const std::string &name() const {
        return name_;
    }
    size_t n() const {
        return n_;
    }
    size_t k() const {
        return k_;
    }
    size_t r() const {
        return n_ - k_;
    }
    size_t d() const {
        return d_;
    }
    size_t t() const {
        return (d_ - 1) / 2;
    }
    size_t w_max() const {
        return w_max_;
    }
    const BitMatrix &h() const {
        return h_;
    }
    const BitMatrix &g() const {
        return g_;
    }
    const BitMatrix &a() const {
        return sys_.a;
    }
    const std::vector<size_t> &col_perm() const {
        return sys_.col_perm;
    }
    /// Largest number of ones in any column of A.
    size_t max_column_weight() const {
        return max_col_weight_;
    }
    bool is_systematic() const;
    /// Number of syndromes with a leader of weight <= t.
    size_t table_size() const {
        return table_size_;
    }
    bool is_perfect() const;

    BitVec syndrome(const BitVec &v) const;
    DecodeResult decode(const BitVec &s) const;

    /// Equivalent code with parity check [I_r | A] (columns permuted by col_perm).
    LinearCode systematic() const;

    /// Word-level decoder for n <= 64 and r <= 24: leader bits packed in a word.
    bool has_word_decoder() const {
        return n_ <= 64 && !dense_weight_.empty();
    }
    uint64_t decode_word(uint64_t syndrome, DecodeStatus *status) const {
        uint8_t w = dense_weight_[syndrome];
        if (w == kNoLeader) {
            *status = DecodeStatus::kUncorrectable;
            return 0;
        }
        *status = w <= t() ? DecodeStatus::kInTable : DecodeStatus::kEnumerated;
        return dense_leader_[syndrome];
    }

   private:
    static constexpr uint8_t kNoLeader = 0xFF;

    void build_tables();

    std::string name_;
    size_t n_ = 0, k_ = 0, d_ = 1, w_max_ = 1;
    BitMatrix h_, g_;
    SystematicForm sys_;
    size_t max_col_weight_ = 0;
    size_t table_size_ = 0;
    // Dense tables indexed by the syndrome word (r <= 24).
    std::vector<uint8_t> dense_weight_;
    std::vector<uint64_t> dense_leader_;
    std::vector<BitVec> dense_leader_vec_;
    // Sparse tables for larger r.
    std::unordered_map<BitVec, BitVec, BitVecHash> sparse_table_;
};

/// Minimum weight of a nonzero codeword of the code with generator rows g
/// (exhaustive; requires rows <= 26).
size_t min_codeword_weight(const BitMatrix &g);

struct RegistryEntry {
    std::string name;
    std::string description;
};

std::vector<RegistryEntry> registry_names();
/// Shared, lazily built instances; throws std::invalid_argument for unknown names.
std::shared_ptr<const LinearCode> registry(std::string_view name);
/// Matrix text (with "d=" header) of a registry code, as stored in data/codes.
std::string registry_text(std::string_view name);

/// Parses "d=<int>" followed by the matrix text format.
LinearCode parse_code(std::string_view text, std::string name = "");
std::string format_code(const LinearCode &code);
LinearCode load_code_file(const std::string &path);

}  // namespace ftancilla

#endif
