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

#include "ftancilla/gf2.h"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ftancilla {

namespace {

uint64_t tail_mask(size_t num_bits) {
    size_t r = num_bits & 63;
    return r == 0 ? ~uint64_t{0} : (uint64_t{1} << r) - 1;
}

void require_same_size(const BitVec &a, const BitVec &b, const char *op) {
    if (a.size() != b.size()) {
        throw std::invalid_argument(
            std::string(op) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
            std::to_string(b.size()) + ")");
    }
}

}  // namespace

BitVec::BitVec(size_t num_bits) : num_bits_(num_bits), words_(words_for_bits(num_bits), 0) {
}

BitVec BitVec::from_string(std::string_view bits) {
    std::vector<bool> vals;
    for (char c : bits) {
        if (c == '0' || c == '1') {
            vals.push_back(c == '1');
        } else if (c == ' ' || c == '\t' || c == '_') {
            continue;
        } else {
            throw std::invalid_argument("bit string contains '" + std::string(1, c) + "'");
        }
    }
    BitVec v(vals.size());
    for (size_t k = 0; k < vals.size(); k++) {
        v.set(k, vals[k]);
    }
    return v;
}

BitVec BitVec::from_indices(size_t num_bits, std::initializer_list<size_t> ones) {
    return from_indices(num_bits, std::vector<size_t>(ones));
}

BitVec BitVec::from_indices(size_t num_bits, const std::vector<size_t> &ones) {
    BitVec v(num_bits);
    for (size_t k : ones) {
        if (k >= num_bits) {
            throw std::out_of_range("bit index " + std::to_string(k) + " >= " + std::to_string(num_bits));
        }
        v.set(k, true);
    }
    return v;
}

BitVec BitVec::from_word(size_t num_bits, uint64_t word) {
    BitVec v(num_bits);
    if (!v.words_.empty()) {
        v.words_[0] = num_bits >= 64 ? word : word & tail_mask(num_bits);
    }
    return v;
}

void BitVec::clear() {
    std::fill(words_.begin(), words_.end(), 0);
}

size_t BitVec::popcount() const {
    size_t total = 0;
    for (uint64_t w : words_) {
        total += std::popcount(w);
    }
    return total;
}

bool BitVec::any() const {
    for (uint64_t w : words_) {
        if (w) {
            return true;
        }
    }
    return false;
}

bool BitVec::dot(const BitVec &other) const {
    require_same_size(*this, other, "dot");
    uint64_t acc = 0;
    for (size_t k = 0; k < words_.size(); k++) {
        acc ^= words_[k] & other.words_[k];
    }
    return std::popcount(acc) & 1;
}

std::vector<size_t> BitVec::ones() const {
    std::vector<size_t> out;
    for (size_t w = 0; w < words_.size(); w++) {
        uint64_t bits = words_[w];
        while (bits) {
            out.push_back((w << 6) + std::countr_zero(bits));
            bits &= bits - 1;
        }
    }
    return out;
}

BitVec &BitVec::operator^=(const BitVec &other) {
    require_same_size(*this, other, "xor");
    for (size_t k = 0; k < words_.size(); k++) {
        words_[k] ^= other.words_[k];
    }
    return *this;
}

BitVec &BitVec::operator&=(const BitVec &other) {
    require_same_size(*this, other, "and");
    for (size_t k = 0; k < words_.size(); k++) {
        words_[k] &= other.words_[k];
    }
    return *this;
}

BitVec &BitVec::operator|=(const BitVec &other) {
    require_same_size(*this, other, "or");
    for (size_t k = 0; k < words_.size(); k++) {
        words_[k] |= other.words_[k];
    }
    return *this;
}

BitVec BitVec::operator^(const BitVec &other) const {
    BitVec r = *this;
    r ^= other;
    return r;
}

BitVec BitVec::operator&(const BitVec &other) const {
    BitVec r = *this;
    r &= other;
    return r;
}

bool BitVec::operator<(const BitVec &other) const {
    if (num_bits_ != other.num_bits_) {
        return num_bits_ < other.num_bits_;
    }
    return words_ < other.words_;
}

BitVec BitVec::slice(size_t start, size_t len) const {
    if (start + len > num_bits_) {
        throw std::out_of_range("slice past end");
    }
    BitVec r(len);
    if ((start & 63) == 0) {
        size_t w0 = start >> 6;
        for (size_t k = 0; k < r.words_.size(); k++) {
            r.words_[k] = words_[w0 + k];
        }
        if (!r.words_.empty()) {
            r.words_.back() &= tail_mask(len);
        }
        return r;
    }
    for (size_t k = 0; k < len; k++) {
        if (get(start + k)) {
            r.set(k, true);
        }
    }
    return r;
}

void BitVec::splice(size_t start, const BitVec &src) {
    if (start + src.size() > num_bits_) {
        throw std::out_of_range("splice past end");
    }
    for (size_t k = 0; k < src.size(); k++) {
        set(start + k, src.get(k));
    }
}

BitVec BitVec::concat(const BitVec &other) const {
    BitVec r(num_bits_ + other.num_bits_);
    r.splice(0, *this);
    r.splice(num_bits_, other);
    return r;
}

std::string BitVec::str() const {
    std::string s(num_bits_, '0');
    for (size_t k = 0; k < num_bits_; k++) {
        if (get(k)) {
            s[k] = '1';
        }
    }
    return s;
}

size_t BitVec::hash() const {
    uint64_t h = 0x9E3779B97F4A7C15ull ^ num_bits_;
    for (uint64_t w : words_) {
        h ^= w + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
        h *= 0xBF58476D1CE4E5B9ull;
    }
    return static_cast<size_t>(h ^ (h >> 31));
}

std::ostream &operator<<(std::ostream &out, const BitVec &v) {
    return out << v.str();
}

BitMatrix::BitMatrix(size_t rows, size_t cols) : cols_(cols), rows_(rows, BitVec(cols)) {
}

BitMatrix BitMatrix::identity(size_t n) {
    BitMatrix m(n, n);
    for (size_t k = 0; k < n; k++) {
        m.set(k, k, true);
    }
    return m;
}

BitMatrix BitMatrix::from_rows(const std::vector<std::string> &rows, size_t cols) {
    std::vector<BitVec> parsed;
    for (const auto &r : rows) {
        parsed.push_back(BitVec::from_string(r));
    }
    if (cols == SIZE_MAX) {
        if (parsed.empty()) {
            throw std::invalid_argument("from_rows: cannot infer column count of an empty matrix");
        }
        cols = parsed[0].size();
    }
    return from_rows(std::move(parsed), cols);
}

BitMatrix BitMatrix::from_rows(std::vector<BitVec> rows, size_t cols) {
    BitMatrix m;
    m.cols_ = cols;
    for (auto &r : rows) {
        if (r.size() != cols) {
            throw std::invalid_argument(
                "row has " + std::to_string(r.size()) + " bits, expected " + std::to_string(cols));
        }
        m.rows_.push_back(std::move(r));
    }
    return m;
}

BitVec BitMatrix::column(size_t c) const {
    BitVec v(rows());
    for (size_t r = 0; r < rows(); r++) {
        v.set(r, rows_[r].get(c));
    }
    return v;
}

size_t BitMatrix::column_weight(size_t c) const {
    size_t w = 0;
    for (const auto &r : rows_) {
        w += r.get(c);
    }
    return w;
}

void BitMatrix::append_row(BitVec row) {
    if (row.size() != cols_) {
        throw std::invalid_argument("append_row: length mismatch");
    }
    rows_.push_back(std::move(row));
}

BitMatrix BitMatrix::transpose() const {
    BitMatrix t(cols_, rows());
    for (size_t r = 0; r < rows(); r++) {
        for (size_t c : rows_[r].ones()) {
            t.set(c, r, true);
        }
    }
    return t;
}

BitVec BitMatrix::mul(const BitVec &v) const {
    if (v.size() != cols_) {
        throw std::invalid_argument(
            "mul: matrix has " + std::to_string(cols_) + " columns but vector has " +
            std::to_string(v.size()) + " bits");
    }
    BitVec out(rows());
    for (size_t r = 0; r < rows(); r++) {
        if (rows_[r].dot(v)) {
            out.set(r, true);
        }
    }
    return out;
}

BitMatrix BitMatrix::mul(const BitMatrix &other) const {
    return mul_transpose(other.transpose());
}

BitMatrix BitMatrix::mul_transpose(const BitMatrix &other) const {
    if (other.cols() != cols_) {
        throw std::invalid_argument(
            "mul_transpose: column mismatch (" + std::to_string(cols_) + " vs " +
            std::to_string(other.cols()) + ")");
    }
    BitMatrix out(rows(), other.rows());
    for (size_t r = 0; r < rows(); r++) {
        for (size_t c = 0; c < other.rows(); c++) {
            if (rows_[r].dot(other.rows_[c])) {
                out.set(r, c, true);
            }
        }
    }
    return out;
}

BitMatrix BitMatrix::vstack(const BitMatrix &other) const {
    if (other.cols() != cols_ && other.rows() != 0 && rows() != 0) {
        throw std::invalid_argument("vstack: column mismatch");
    }
    BitMatrix out = rows() == 0 ? BitMatrix(0, other.cols()) : *this;
    for (const auto &r : other.rows_) {
        out.append_row(r);
    }
    return out;
}

BitMatrix BitMatrix::permute_columns(const std::vector<size_t> &perm) const {
    if (perm.size() != cols_) {
        throw std::invalid_argument("permute_columns: permutation length mismatch");
    }
    BitMatrix out(rows(), cols_);
    for (size_t r = 0; r < rows(); r++) {
        for (size_t c = 0; c < cols_; c++) {
            if (rows_[r].get(perm[c])) {
                out.set(r, c, true);
            }
        }
    }
    return out;
}

BitMatrix BitMatrix::select_columns(size_t start, size_t len) const {
    BitMatrix out(rows(), len);
    for (size_t r = 0; r < rows(); r++) {
        out.rows_[r] = rows_[r].slice(start, len);
    }
    return out;
}

bool BitMatrix::is_zero() const {
    for (const auto &r : rows_) {
        if (r.any()) {
            return false;
        }
    }
    return true;
}

std::string BitMatrix::str() const {
    std::string s;
    for (const auto &r : rows_) {
        s += r.str();
        s += '\n';
    }
    return s;
}

std::ostream &operator<<(std::ostream &out, const BitMatrix &m) {
    return out << m.str();
}

RrefResult rref(const BitMatrix &m) {
    RrefResult res;
    res.reduced = m;
    BitMatrix &r = res.reduced;
    size_t next_row = 0;
    for (size_t c = 0; c < m.cols() && next_row < m.rows(); c++) {
        size_t pivot = next_row;
        while (pivot < m.rows() && !r.get(pivot, c)) {
            pivot++;
        }
        if (pivot == m.rows()) {
            continue;
        }
        std::swap(r.row(pivot), r.row(next_row));
        for (size_t k = 0; k < m.rows(); k++) {
            if (k != next_row && r.get(k, c)) {
                r.row(k) ^= r.row(next_row);
            }
        }
        res.pivots.push_back(c);
        next_row++;
    }
    res.rank = res.pivots.size();
    return res;
}

size_t rank(const BitMatrix &m) {
    return rref(m).rank;
}

SystematicForm systematic_form(const BitMatrix &h) {
    RrefResult red = rref(h);
    if (red.rank != h.rows()) {
        throw std::invalid_argument(
            "not full rank: rank " + std::to_string(red.rank) + " < " + std::to_string(h.rows()) + " rows");
    }
    SystematicForm out;
    std::vector<bool> is_pivot(h.cols(), false);
    for (size_t p : red.pivots) {
        is_pivot[p] = true;
        out.col_perm.push_back(p);
    }
    for (size_t c = 0; c < h.cols(); c++) {
        if (!is_pivot[c]) {
            out.col_perm.push_back(c);
        }
    }
    BitMatrix permuted = red.reduced.permute_columns(out.col_perm);
    out.a = permuted.select_columns(h.rows(), h.cols() - h.rows());
    return out;
}

BitMatrix null_space_basis(const BitMatrix &m) {
    RrefResult red = rref(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (size_t p : red.pivots) {
        is_pivot[p] = true;
    }
    BitMatrix basis(0, m.cols());
    for (size_t f = 0; f < m.cols(); f++) {
        if (is_pivot[f]) {
            continue;
        }
        BitVec v(m.cols());
        v.set(f, true);
        for (size_t i = 0; i < red.rank; i++) {
            if (red.reduced.get(i, f)) {
                v.set(red.pivots[i], true);
            }
        }
        basis.append_row(std::move(v));
    }
    return basis;
}

BitMatrix invert(const BitMatrix &m) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("invert: matrix is not square");
    }
    size_t n = m.rows();
    BitMatrix work = m;
    BitMatrix inv = BitMatrix::identity(n);
    for (size_t c = 0; c < n; c++) {
        size_t pivot = c;
        while (pivot < n && !work.get(pivot, c)) {
            pivot++;
        }
        if (pivot == n) {
            throw std::invalid_argument("singular matrix");
        }
        std::swap(work.row(pivot), work.row(c));
        std::swap(inv.row(pivot), inv.row(c));
        for (size_t k = 0; k < n; k++) {
            if (k != c && work.get(k, c)) {
                work.row(k) ^= work.row(c);
                inv.row(k) ^= inv.row(c);
            }
        }
    }
    return inv;
}

bool same_row_space(const BitMatrix &a, const BitMatrix &b) {
    if (a.cols() != b.cols()) {
        return false;
    }
    size_t ra = rank(a);
    return ra == rank(b) && ra == rank(a.vstack(b));
}

bool in_row_space(const BitMatrix &m, const BitVec &v) {
    BitMatrix one(0, v.size());
    one.append_row(v);
    return rank(m) == rank(m.vstack(one));
}

BitMatrix parse_matrix(std::string_view text) {
    std::vector<std::string> lines;
    std::string cur;
    for (size_t k = 0; k <= text.size(); k++) {
        if (k == text.size() || text[k] == '\n') {
            size_t a = cur.find_first_not_of(" \t\r");
            if (a != std::string::npos && cur[a] != '#') {
                size_t b = cur.find_last_not_of(" \t\r");
                lines.push_back(cur.substr(a, b - a + 1));
            }
            cur.clear();
        } else {
            cur.push_back(text[k]);
        }
    }
    if (lines.empty()) {
        throw std::invalid_argument("matrix text is empty");
    }
    std::istringstream header(lines[0]);
    long long rows = -1, cols = -1;
    std::string extra;
    if (!(header >> rows >> cols) || (header >> extra) || rows < 0 || cols < 0) {
        throw std::invalid_argument("matrix header must be 'rows cols', got '" + lines[0] + "'");
    }
    if (lines.size() - 1 != static_cast<size_t>(rows)) {
        throw std::invalid_argument(
            "matrix header declares " + std::to_string(rows) + " rows but " + std::to_string(lines.size() - 1) +
            " were given");
    }
    BitMatrix m(0, static_cast<size_t>(cols));
    for (size_t r = 1; r < lines.size(); r++) {
        const std::string &line = lines[r];
        // Characters may be separated by single spaces.
        for (size_t k = 0; k < line.size(); k++) {
            char c = line[k];
            bool spaced = c == ' ' && k > 0 && k + 1 < line.size() && line[k - 1] != ' ' && line[k + 1] != ' ';
            if (c != '0' && c != '1' && !spaced) {
                throw std::invalid_argument("matrix row " + std::to_string(r) + " is malformed: '" + line + "'");
            }
        }
        BitVec v = BitVec::from_string(line);
        if (v.size() != static_cast<size_t>(cols)) {
            throw std::invalid_argument(
                "matrix row " + std::to_string(r) + " has " + std::to_string(v.size()) + " entries, expected " +
                std::to_string(cols));
        }
        m.append_row(std::move(v));
    }
    return m;
}

std::string format_matrix(const BitMatrix &m) {
    return std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n" + m.str();
}

}  // namespace ftancilla
