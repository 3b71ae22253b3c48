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

#include "ftancilla/pauli.h"

#include <stdexcept>

namespace ftancilla {

PauliString::PauliString(BitVec x_part, BitVec z_part) : x(std::move(x_part)), z(std::move(z_part)) {
    if (x.size() != z.size()) {
        throw std::invalid_argument("PauliString: x and z parts differ in length");
    }
}

size_t PauliString::weight() const {
    size_t w = 0;
    for (size_t k = 0; k < x.num_words(); k++) {
        w += std::popcount(x.words()[k] | z.words()[k]);
    }
    return w;
}

bool PauliString::anticommutes(const PauliString &other) const {
    return x.dot(other.z) ^ z.dot(other.x);
}

PauliString &PauliString::operator*=(const PauliString &other) {
    x ^= other.x;
    z ^= other.z;
    return *this;
}

std::string PauliString::str() const {
    std::string s(size(), 'I');
    for (size_t k = 0; k < size(); k++) {
        bool a = x.get(k), b = z.get(k);
        s[k] = a ? (b ? 'Y' : 'X') : (b ? 'Z' : 'I');
    }
    return s;
}

PauliString PauliString::from_str(const std::string &text) {
    PauliString p(text.size());
    for (size_t k = 0; k < text.size(); k++) {
        switch (text[k]) {
            case 'I':
            case '_':
                break;
            case 'X':
                p.x.set(k, true);
                break;
            case 'Y':
                p.x.set(k, true);
                p.z.set(k, true);
                break;
            case 'Z':
                p.z.set(k, true);
                break;
            default:
                throw std::invalid_argument("bad Pauli character '" + std::string(1, text[k]) + "'");
        }
    }
    return p;
}

PauliFrame::PauliFrame(const std::vector<size_t> &block_lengths) {
    for (size_t n : block_lengths) {
        e.emplace_back(n);
        f.emplace_back(n);
    }
}

PauliFrame PauliFrame::uniform(size_t num_blocks, size_t n) {
    return PauliFrame(std::vector<size_t>(num_blocks, n));
}

std::vector<size_t> PauliFrame::block_lengths() const {
    std::vector<size_t> out;
    for (const auto &b : e) {
        out.push_back(b.size());
    }
    return out;
}

size_t PauliFrame::total_qubits() const {
    size_t total = 0;
    for (const auto &b : e) {
        total += b.size();
    }
    return total;
}

bool PauliFrame::is_zero() const {
    for (size_t b = 0; b < e.size(); b++) {
        if (e[b].any() || f[b].any()) {
            return false;
        }
    }
    return true;
}

void PauliFrame::clear() {
    for (size_t b = 0; b < e.size(); b++) {
        e[b].clear();
        f[b].clear();
    }
}

PauliString PauliFrame::flatten() const {
    PauliString p(total_qubits());
    size_t off = 0;
    for (size_t b = 0; b < e.size(); b++) {
        p.x.splice(off, e[b]);
        p.z.splice(off, f[b]);
        off += e[b].size();
    }
    return p;
}

PauliFrame PauliFrame::unflatten(const PauliString &p, const std::vector<size_t> &block_lengths) {
    PauliFrame out(block_lengths);
    size_t off = 0;
    for (size_t b = 0; b < block_lengths.size(); b++) {
        out.e[b] = p.x.slice(off, block_lengths[b]);
        out.f[b] = p.z.slice(off, block_lengths[b]);
        off += block_lengths[b];
    }
    if (off != p.size()) {
        throw std::invalid_argument("unflatten: block lengths do not sum to the Pauli length");
    }
    return out;
}

PauliFrame &PauliFrame::operator^=(const PauliFrame &other) {
    if (other.e.size() != e.size()) {
        throw std::invalid_argument("PauliFrame xor: block count mismatch");
    }
    for (size_t b = 0; b < e.size(); b++) {
        e[b] ^= other.e[b];
        f[b] ^= other.f[b];
    }
    return *this;
}

std::string PauliFrame::str() const {
    std::string s;
    for (size_t b = 0; b < e.size(); b++) {
        if (b) {
            s += " | ";
        }
        s += PauliString(e[b], f[b]).str();
    }
    return s;
}

}  // namespace ftancilla
