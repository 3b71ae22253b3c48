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

#include "ftancilla/classical_code.h"

#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ftancilla {

namespace {

constexpr size_t kDenseSyndromeBits = 24;
constexpr size_t kMaxEnumeration = 50'000'000;

// Calls fn(indices) for every weight-w subset of [0, n) in lexicographic order.
// fn returns false to stop early.
template <typename Fn>
bool for_each_subset(size_t n, size_t w, Fn &&fn) {
    if (w > n) {
        return true;
    }
    std::vector<size_t> idx(w);
    for (size_t k = 0; k < w; k++) {
        idx[k] = k;
    }
    while (true) {
        if (!fn(idx)) {
            return false;
        }
        if (w == 0) {
            return true;
        }
        size_t k = w;
        while (k > 0 && idx[k - 1] == n - w + k - 1) {
            k--;
        }
        if (k == 0) {
            return true;
        }
        idx[k - 1]++;
        for (size_t j = k; j < w; j++) {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

double binomial(size_t n, size_t k) {
    double r = 1;
    for (size_t j = 1; j <= k; j++) {
        r = r * double(n - k + j) / double(j);
    }
    return r;
}

}  // namespace

const char *decode_status_name(DecodeStatus s) {
    switch (s) {
        case DecodeStatus::kInTable:
            return "in_table";
        case DecodeStatus::kEnumerated:
            return "enumerated";
        case DecodeStatus::kUncorrectable:
            return "uncorrectable";
    }
    return "?";
}

size_t min_codeword_weight(const BitMatrix &g) {
    if (g.rows() > 26) {
        throw std::invalid_argument("min_codeword_weight: dimension too large for exhaustive scan");
    }
    if (g.rows() == 0) {
        return SIZE_MAX;
    }
    BitVec cur(g.cols());
    size_t best = SIZE_MAX;
    uint64_t total = uint64_t{1} << g.rows();
    for (uint64_t i = 1; i < total; i++) {
        // Gray code: flip the generator indexed by the lowest set bit of i.
        cur ^= g.row(std::countr_zero(i));
        size_t w = cur.popcount();
        if (w < best) {
            best = w;
        }
    }
    return best;
}

LinearCode LinearCode::build(const BitMatrix &h, size_t d, size_t w_max, std::string name) {
    if (d < 1) {
        throw std::invalid_argument("code distance must be >= 1");
    }
    LinearCode c;
    c.name_ = std::move(name);
    c.n_ = h.cols();
    c.sys_ = systematic_form(h);
    c.k_ = c.n_ - h.rows();
    c.d_ = d;
    c.h_ = h;
    c.w_max_ = w_max == 0 ? c.t() + 1 : w_max;
    if (c.w_max_ < c.t()) {
        throw std::invalid_argument("w_max must be >= t");
    }

    // G in systematic coordinates is [A^T | I_k]; undo the column permutation.
    size_t r = c.r();
    c.g_ = BitMatrix(c.k_, c.n_);
    for (size_t j = 0; j < c.k_; j++) {
        for (size_t i = 0; i < r; i++) {
            if (c.sys_.a.get(i, j)) {
                c.g_.set(j, c.sys_.col_perm[i], true);
            }
        }
        c.g_.set(j, c.sys_.col_perm[r + j], true);
    }
    if (!c.h_.mul_transpose(c.g_).is_zero()) {
        throw std::logic_error("internal: H G^T != 0");
    }
    for (size_t j = 0; j < c.k_; j++) {
        c.max_col_weight_ = std::max(c.max_col_weight_, c.sys_.a.column_weight(j));
    }

    // Distance claim: exhaustive for n <= 24, sampled otherwise.
    if (c.k_ > 0) {
        if (c.n_ <= 24) {
            size_t w = min_codeword_weight(c.g_);
            if (w < d) {
                throw std::invalid_argument(
                    "claimed d=" + std::to_string(d) + " but a codeword of weight " + std::to_string(w) +
                    " exists");
            }
        } else {
            std::mt19937_64 rng(0x5EEDC0DEull ^ c.n_);
            for (size_t trial = 0; trial < 20000; trial++) {
                BitVec v(c.n_);
                bool nonzero = false;
                for (size_t j = 0; j < c.k_; j++) {
                    if (rng() & 1) {
                        v ^= c.g_.row(j);
                        nonzero = true;
                    }
                }
                if (nonzero && v.popcount() < d) {
                    throw std::invalid_argument(
                        "claimed d=" + std::to_string(d) + " but a codeword of weight " +
                        std::to_string(v.popcount()) + " exists");
                }
            }
        }
    }
    c.build_tables();
    return c;
}

void LinearCode::build_tables() {
    size_t r = this->r();
    double work = 0;
    for (size_t w = 0; w <= w_max_; w++) {
        work += binomial(n_, w);
    }
    if (work > double(kMaxEnumeration)) {
        throw std::invalid_argument(
            "syndrome table for [" + std::to_string(n_) + "," + std::to_string(k_) + "] up to weight " +
            std::to_string(w_max_) + " is too large");
    }
    // Column syndromes, so a pattern's syndrome is the XOR of its columns.
    std::vector<BitVec> cols;
    for (size_t c = 0; c < n_; c++) {
        cols.push_back(h_.column(c));
    }
    bool dense = r <= kDenseSyndromeBits;
    size_t filled = 0;
    size_t capacity = dense ? (size_t{1} << r) : SIZE_MAX;
    if (dense) {
        dense_weight_.assign(capacity, kNoLeader);
        dense_leader_vec_.assign(capacity, BitVec());
        if (n_ <= 64) {
            dense_leader_.assign(capacity, 0);
        }
    }
    for (size_t w = 0; w <= w_max_ && filled < capacity; w++) {
        for_each_subset(n_, w, [&](const std::vector<size_t> &idx) {
            BitVec s(r);
            for (size_t q : idx) {
                s ^= cols[q];
            }
            if (dense) {
                uint64_t key = s.word0();
                if (dense_weight_[key] != kNoLeader) {
                    return true;
                }
                BitVec e = BitVec::from_indices(n_, idx);
                dense_weight_[key] = static_cast<uint8_t>(w);
                if (n_ <= 64) {
                    dense_leader_[key] = e.word0();
                }
                dense_leader_vec_[key] = std::move(e);
            } else {
                if (sparse_table_.count(s)) {
                    return true;
                }
                sparse_table_.emplace(std::move(s), BitVec::from_indices(n_, idx));
            }
            filled++;
            if (w <= t()) {
                table_size_++;
            }
            return filled < capacity;
        });
    }
}

bool LinearCode::is_systematic() const {
    for (size_t c = 0; c < sys_.col_perm.size(); c++) {
        if (sys_.col_perm[c] != c) {
            return false;
        }
    }
    return h_.select_columns(0, r()) == BitMatrix::identity(r());
}

bool LinearCode::is_perfect() const {
    return r() <= 63 && table_size_ == (size_t{1} << r());
}

BitVec LinearCode::syndrome(const BitVec &v) const {
    if (v.size() != n_) {
        throw std::invalid_argument(
            "syndrome: word has " + std::to_string(v.size()) + " bits, code length is " + std::to_string(n_));
    }
    return h_.mul(v);
}

DecodeResult LinearCode::decode(const BitVec &s) const {
    if (s.size() != r()) {
        throw std::invalid_argument(
            "decode: syndrome has " + std::to_string(s.size()) + " bits, expected " + std::to_string(r()));
    }
    if (!dense_weight_.empty()) {
        uint64_t key = s.word0();
        uint8_t w = dense_weight_[key];
        if (w == kNoLeader) {
            return {BitVec(n_), DecodeStatus::kUncorrectable};
        }
        return {dense_leader_vec_[key], w <= t() ? DecodeStatus::kInTable : DecodeStatus::kEnumerated};
    }
    auto it = sparse_table_.find(s);
    if (it == sparse_table_.end()) {
        return {BitVec(n_), DecodeStatus::kUncorrectable};
    }
    return {it->second, it->second.popcount() <= t() ? DecodeStatus::kInTable : DecodeStatus::kEnumerated};
}

LinearCode LinearCode::systematic() const {
    BitMatrix hs(r(), n_);
    for (size_t i = 0; i < r(); i++) {
        hs.set(i, i, true);
        for (size_t j = 0; j < k_; j++) {
            if (sys_.a.get(i, j)) {
                hs.set(i, r() + j, true);
            }
        }
    }
    return build(hs, d_, w_max_, name_);
}

namespace {

struct RegistrySource {
    const char *name;
    const char *description;
    const char *text;
};

// Matrix texts mirror data/codes/<name>.txt.
const RegistrySource kRegistry[] = {
    {"rep3", "[3,1,3] repetition code",
     "d=3\n"
     "2 3\n"
     "110\n"
     "011\n"},
    {"rep5", "[5,1,5] repetition code",
     "d=5\n"
     "4 5\n"
     "10001\n"
     "01001\n"
     "00101\n"
     "00011\n"},
    {"hamming7", "[7,4,3] Hamming code",
     "d=3\n"
     "3 7\n"
     "1001101\n"
     "0101011\n"
     "0010111\n"},
    {"bch15_7_5", "[15,7,5] BCH code",
     "d=5\n"
     "8 15\n"
     "100000001101000\n"
     "010000000110100\n"
     "001000000011010\n"
     "000100000001101\n"
     "000010001101110\n"
     "000001000110111\n"
     "000000101110011\n"
     "000000011010001\n"},
    {"golay23", "[23,12,7] Golay code",
     "d=7\n"
     "11 23\n"
     "10000000000111110010010\n"
     "01000000000011111001001\n"
     "00100000000110001110110\n"
     "00010000000011000111011\n"
     "00001000000110010001111\n"
     "00000100000100111010101\n"
     "00000010000101101111000\n"
     "00000001000010110111100\n"
     "00000000100001011011110\n"
     "00000000010000101101111\n"
     "00000000001111100100101\n"},
    {"golay23_dual", "[23,11,8] even-weight subcode of the Golay code (dual of golay23)",
     "d=8\n"
     "12 23\n"
     "10101110001100000000000\n"
     "11111001001010000000000\n"
     "11010010101001000000000\n"
     "11000111011000100000000\n"
     "11001101100000010000000\n"
     "01100110110000001000000\n"
     "00110011011000000100000\n"
     "10110111100000000010000\n"
     "01011011110000000001000\n"
     "00101101111000000000100\n"
     "10111000110000000000010\n"
     "01011100011000000000001\n"},
};

}  // namespace

std::vector<RegistryEntry> registry_names() {
    std::vector<RegistryEntry> out;
    for (const auto &src : kRegistry) {
        out.push_back({src.name, src.description});
    }
    return out;
}

std::string registry_text(std::string_view name) {
    for (const auto &src : kRegistry) {
        if (name == src.name) {
            return src.text;
        }
    }
    std::string known;
    for (const auto &src : kRegistry) {
        known += known.empty() ? "" : ", ";
        known += src.name;
    }
    throw std::invalid_argument("unknown code '" + std::string(name) + "' (known: " + known + ")");
}

std::shared_ptr<const LinearCode> registry(std::string_view name) {
    static std::mutex mu;
    static std::map<std::string, std::shared_ptr<const LinearCode>, std::less<>> cache;
    std::string text = registry_text(name);
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(name);
    if (it != cache.end()) {
        return it->second;
    }
    auto code = std::make_shared<const LinearCode>(parse_code(text, std::string(name)));
    cache.emplace(std::string(name), code);
    return code;
}

LinearCode parse_code(std::string_view text, std::string name) {
    size_t pos = 0;
    // Skip comments/blank lines before the d= header.
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        std::string_view line = text.substr(pos, eol - pos);
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string_view::npos || line[a] == '#') {
            pos = eol + 1;
            continue;
        }
        line = line.substr(a);
        if (line.substr(0, 2) != "d=") {
            throw std::invalid_argument("code file must start with a 'd=<int>' line");
        }
        std::string num(line.substr(2));
        while (!num.empty() && (num.back() == '\r' || num.back() == ' ')) {
            num.pop_back();
        }
        size_t used = 0;
        long long d = -1;
        try {
            d = std::stoll(num, &used);
        } catch (const std::exception &) {
        }
        if (d < 1 || used != num.size()) {
            throw std::invalid_argument("bad distance header '" + std::string(line) + "'");
        }
        return LinearCode::build(
            parse_matrix(eol >= text.size() ? std::string_view() : text.substr(eol + 1)), static_cast<size_t>(d),
            0, std::move(name));
    }
    throw std::invalid_argument("code text is empty");
}

std::string format_code(const LinearCode &code) {
    return "d=" + std::to_string(code.d()) + "\n" + format_matrix(code.h());
}

LinearCode load_code_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open code file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_code(ss.str(), path);
}

}  // namespace ftancilla
