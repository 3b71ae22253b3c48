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

#include "ftancilla/css_code.h"

#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace ftancilla {

namespace {

// Picks rows of `candidates` that extend rowspace(base), until `count` are found.
BitMatrix extend_row_space(const BitMatrix &base, const BitMatrix &candidates, size_t count) {
    BitMatrix acc = base;
    BitMatrix out(0, candidates.cols());
    size_t r = rank(acc);
    for (const auto &row : candidates.row_list()) {
        if (out.rows() == count) {
            break;
        }
        BitMatrix trial = acc;
        trial.append_row(row);
        size_t r2 = rank(trial);
        if (r2 > r) {
            acc = std::move(trial);
            r = r2;
            out.append_row(row);
        }
    }
    return out;
}

}  // namespace

CssCode CssCode::build(
    std::shared_ptr<const LinearCode> cx,
    std::shared_ptr<const LinearCode> cz,
    const BitMatrix *logical_x,
    std::string name) {
    if (!cx || !cz) {
        throw std::invalid_argument("build_css: null classical code");
    }
    if (cx->n() != cz->n()) {
        throw std::invalid_argument(
            "build_css: codes have different lengths (" + std::to_string(cx->n()) + " vs " +
            std::to_string(cz->n()) + ")");
    }
    if (!cx->h().mul_transpose(cz->h()).is_zero()) {
        throw std::invalid_argument("build_css: CSS condition violated (H_X H_Z^T != 0)");
    }
    size_t n = cx->n();
    if (cx->k() + cz->k() < n) {
        throw std::invalid_argument("build_css: k_X + k_Z < n");
    }
    size_t k = cx->k() + cz->k() - n;

    CssCode c;
    c.name_ = std::move(name);
    c.cx_ = std::move(cx);
    c.cz_ = std::move(cz);
    const BitMatrix &hx = c.hx();
    const BitMatrix &hz = c.hz();

    if (logical_x != nullptr) {
        if (logical_x->rows() != k || logical_x->cols() != n) {
            throw std::invalid_argument(
                "build_css: expected " + std::to_string(k) + " logical X rows of length " + std::to_string(n));
        }
        if (!hz.mul_transpose(*logical_x).is_zero()) {
            throw std::invalid_argument("build_css: supplied logical X operators are not in C_Z");
        }
        if (rank(hx.vstack(*logical_x)) != hx.rows() + k) {
            throw std::invalid_argument("build_css: supplied logical X operators are dependent modulo stabilizers");
        }
        c.d_ = *logical_x;
    } else {
        c.d_ = extend_row_space(hx, c.cz_->g(), k);
    }
    if (c.d_.rows() != k) {
        throw std::logic_error("build_css: could not find k independent logical operators");
    }

    // Z logicals: L_Z = (E D^T)^{-1} E with E = D for symmetric codes.
    BitMatrix e = c.is_symmetric() ? c.d_ : extend_row_space(hz, c.cx_->g(), k);
    BitMatrix ed = e.mul_transpose(c.d_);
    BitMatrix inv;
    try {
        inv = invert(ed);
    } catch (const std::invalid_argument &) {
        throw std::invalid_argument("build_css: D D^T is singular; logical pairing is undefined");
    }
    c.lz_ = k == 0 ? BitMatrix(0, n) : inv.mul(e);

    c.hz_ext_ = hz.vstack(c.lz_);
    c.hx_ext_ = hx.vstack(c.d_);

    if (!c.lz_.mul_transpose(c.d_).operator==(BitMatrix::identity(k)) || !hz.mul_transpose(c.d_).is_zero() ||
        !hx.mul_transpose(c.lz_).is_zero()) {
        throw std::logic_error("build_css: logical operator invariants failed");
    }
    return c;
}

bool CssCode::is_symmetric() const {
    return same_row_space(hx(), hz());
}

std::vector<std::string> quantum_registry_names() {
    return {"golay23", "steane"};
}

std::shared_ptr<const CssCode> quantum_registry(const std::string &name) {
    static std::mutex mu;
    static std::map<std::string, std::shared_ptr<const CssCode>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(name);
    if (it != cache.end()) {
        return it->second;
    }
    std::shared_ptr<const CssCode> out;
    if (name == "golay23") {
        auto g = registry("golay23");
        BitMatrix l = BitMatrix::from_rows({"00000000000101011100011"});
        out = std::make_shared<const CssCode>(CssCode::build(g, g, &l, name));
    } else if (name == "steane") {
        auto h = registry("hamming7");
        out = std::make_shared<const CssCode>(CssCode::build(h, h, nullptr, name));
    } else {
        throw std::invalid_argument("unknown quantum code '" + name + "' (known: golay23, steane)");
    }
    cache.emplace(name, out);
    return out;
}

bool check_phase_gate_compatible(const CssCode &css, size_t j) {
    if (j >= css.k()) {
        throw std::out_of_range("logical index out of range");
    }
    if (!css.is_symmetric()) {
        return false;
    }
    const BitMatrix &g = css.hx();
    for (size_t a = 0; a < g.rows(); a++) {
        if (g.row(a).popcount() % 4 != 0) {
            return false;
        }
        for (size_t b = a + 1; b < g.rows(); b++) {
            if (g.row(a).dot(g.row(b))) {
                return false;
            }
        }
    }
    return css.d().row(j).popcount() % 2 == 1;
}

bool check_phase_gate_compatible(const CssCode &css) {
    if (css.k() == 0) {
        return false;
    }
    for (size_t j = 0; j < css.k(); j++) {
        if (!check_phase_gate_compatible(css, j)) {
            return false;
        }
    }
    return true;
}

std::vector<size_t> AncillaSpec::block_lengths() const {
    std::vector<size_t> out;
    for (const auto &b : blocks) {
        out.push_back(b->n());
    }
    return out;
}

std::vector<PauliString> AncillaSpec::all_elements() const {
    std::vector<PauliString> out;
    for (const auto &round : rounds) {
        for (const auto &el : round) {
            out.push_back(el.op);
        }
    }
    return out;
}

bool AncillaSpec::is_distillable() const {
    for (size_t mu = 0; mu < 2; mu++) {
        for (const auto &el : rounds[mu]) {
            for (size_t b = 0; b < blocks.size(); b++) {
                size_t n = blocks[b]->n();
                bool has_x = el.op.x.slice(offsets[b], n).any();
                bool has_z = el.op.z.slice(offsets[b], n).any();
                if (round_basis[mu][b] == CheckBasis::kZ ? has_x : has_z) {
                    return false;
                }
            }
        }
    }
    return true;
}

bool AncillaSpec::is_css_type() const {
    for (const auto &round : rounds) {
        for (const auto &el : round) {
            if (!el.op.is_x_type() && !el.op.is_z_type()) {
                return false;
            }
        }
    }
    return true;
}

std::string AncillaSpec::kind_name() const {
    return ancilla_kind_name(kind, params);
}

std::string ancilla_kind_name(AncillaKind kind, const AncillaParams &p) {
    switch (kind) {
        case AncillaKind::kZero:
            return "zero";
        case AncillaKind::kPlus:
            return "plus";
        case AncillaKind::kMixed:
            return "mixed(" + std::to_string(p.j) + "," + (p.basis == CheckBasis::kZ ? "Z" : "X") + ")";
        case AncillaKind::kBell:
            return "bell(" + std::to_string(p.i) + "," + std::to_string(p.j) + ")";
        case AncillaKind::kOmega:
            return "omega(" + std::to_string(p.i) + "," + std::to_string(p.j) + ")";
        case AncillaKind::kTheta:
            return "theta(" + std::to_string(p.j) + ")";
    }
    return "?";
}

std::pair<AncillaKind, AncillaParams> parse_ancilla_kind(const std::string &text) {
    std::string head = text;
    std::vector<std::string> args;
    size_t lp = text.find('(');
    if (lp != std::string::npos) {
        if (text.back() != ')') {
            throw std::invalid_argument("bad ancilla kind '" + text + "'");
        }
        head = text.substr(0, lp);
        std::string inner = text.substr(lp + 1, text.size() - lp - 2);
        std::stringstream ss(inner);
        std::string item;
        while (std::getline(ss, item, ',')) {
            size_t a = item.find_first_not_of(' ');
            size_t b = item.find_last_not_of(' ');
            args.push_back(a == std::string::npos ? "" : item.substr(a, b - a + 1));
        }
    }
    auto num = [&](size_t idx) -> size_t {
        const std::string &s = args.at(idx);
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
            throw std::invalid_argument("bad index '" + s + "' in ancilla kind '" + text + "'");
        }
        return std::stoul(s);
    };
    auto want = [&](size_t count) {
        if (args.size() != count) {
            throw std::invalid_argument(
                "ancilla kind '" + head + "' takes " + std::to_string(count) + " parameter(s): '" + text + "'");
        }
    };
    AncillaParams p;
    if (head == "zero") {
        want(0);
        return {AncillaKind::kZero, p};
    }
    if (head == "plus") {
        want(0);
        return {AncillaKind::kPlus, p};
    }
    if (head == "mixed") {
        want(2);
        p.j = num(0);
        if (args[1] == "Z") {
            p.basis = CheckBasis::kZ;
        } else if (args[1] == "X") {
            p.basis = CheckBasis::kX;
        } else {
            throw std::invalid_argument("mixed basis must be Z or X: '" + text + "'");
        }
        return {AncillaKind::kMixed, p};
    }
    if (head == "bell" || head == "omega") {
        want(2);
        p.i = num(0);
        p.j = num(1);
        return {head == "bell" ? AncillaKind::kBell : AncillaKind::kOmega, p};
    }
    if (head == "theta") {
        want(1);
        p.i = p.j = num(0);
        return {AncillaKind::kTheta, p};
    }
    throw std::invalid_argument("unknown ancilla kind '" + text + "'");
}

size_t ancilla_block_count(AncillaKind kind) {
    switch (kind) {
        case AncillaKind::kBell:
        case AncillaKind::kOmega:
        case AncillaKind::kTheta:
            return 2;
        default:
            return 1;
    }
}

namespace {

struct SpecBuilder {
    AncillaSpec &spec;

    PauliString embed(size_t block, const BitVec *x, const BitVec *z) const {
        PauliString p(spec.num_qubits);
        if (x) {
            p.x.splice(spec.offsets[block], *x);
        }
        if (z) {
            p.z.splice(spec.offsets[block], *z);
        }
        return p;
    }

    void z_generators(size_t mu, size_t b) {
        const BitMatrix &hz = spec.blocks[b]->hz();
        for (size_t r = 0; r < hz.rows(); r++) {
            spec.rounds[mu].push_back(
                {embed(b, nullptr, &hz.row(r)), ElementRole::kZGenerator, b, r,
                 "Zgen[" + std::to_string(b) + "," + std::to_string(r) + "]"});
        }
    }
    void x_generators(size_t mu, size_t b) {
        const BitMatrix &hx = spec.blocks[b]->hx();
        for (size_t r = 0; r < hx.rows(); r++) {
            spec.rounds[mu].push_back(
                {embed(b, &hx.row(r), nullptr), ElementRole::kXGenerator, b, r,
                 "Xgen[" + std::to_string(b) + "," + std::to_string(r) + "]"});
        }
    }
    PauliString zbar(size_t b, size_t u) const {
        return embed(b, nullptr, &spec.blocks[b]->lz().row(u));
    }
    PauliString xbar(size_t b, size_t u) const {
        return embed(b, &spec.blocks[b]->d().row(u), nullptr);
    }
    void logical(size_t mu, PauliString op, std::string label) {
        spec.rounds[mu].push_back({std::move(op), ElementRole::kLogical, 0, 0, std::move(label)});
    }
};

void require_logical(const AncillaSpec &spec, size_t b, size_t u) {
    if (u >= spec.blocks[b]->k()) {
        throw std::invalid_argument(
            "logical index " + std::to_string(u) + " out of range for block " + std::to_string(b) + " (k = " +
            std::to_string(spec.blocks[b]->k()) + ")");
    }
}

void validate_spec(const AncillaSpec &spec) {
    std::vector<PauliString> all = spec.all_elements();
    if (all.size() != spec.num_qubits) {
        throw std::logic_error(
            "ancilla spec has " + std::to_string(all.size()) + " stabilizers for " +
            std::to_string(spec.num_qubits) + " qubits");
    }
    BitMatrix sym(0, 2 * spec.num_qubits);
    for (size_t a = 0; a < all.size(); a++) {
        for (size_t b = a + 1; b < all.size(); b++) {
            if (all[a].anticommutes(all[b])) {
                throw std::logic_error("ancilla spec stabilizers do not commute");
            }
        }
        sym.append_row(all[a].x.concat(all[a].z));
    }
    if (rank(sym) != all.size()) {
        throw std::logic_error("ancilla spec stabilizers are dependent");
    }
}

}  // namespace

AncillaSpec build_ancilla_spec(
    const std::vector<std::shared_ptr<const CssCode>> &codes, AncillaKind kind, const AncillaParams &params) {
    if (kind == AncillaKind::kTheta) {
        AncillaParams op = params;
        op.i = op.j = params.j;
        return apply_bitwise_phase(build_ancilla_spec(codes, AncillaKind::kOmega, op));
    }
    size_t m = ancilla_block_count(kind);
    if (codes.size() != m) {
        throw std::invalid_argument(
            ancilla_kind_name(kind, params) + " needs " + std::to_string(m) + " code block(s), got " +
            std::to_string(codes.size()));
    }
    AncillaSpec spec;
    spec.kind = kind;
    spec.params = params;
    spec.blocks = codes;
    for (const auto &c : codes) {
        if (!c) {
            throw std::invalid_argument("null code block");
        }
        spec.offsets.push_back(spec.num_qubits);
        spec.num_qubits += c->n();
    }
    SpecBuilder sb{spec};
    auto &rb = spec.round_basis;
    switch (kind) {
        case AncillaKind::kZero:
            sb.z_generators(0, 0);
            for (size_t u = 0; u < codes[0]->k(); u++) {
                sb.logical(0, sb.zbar(0, u), "Zbar[" + std::to_string(u) + "]");
            }
            sb.x_generators(1, 0);
            rb = {std::vector<CheckBasis>{CheckBasis::kZ}, std::vector<CheckBasis>{CheckBasis::kX}};
            break;
        case AncillaKind::kPlus:
            sb.x_generators(0, 0);
            for (size_t u = 0; u < codes[0]->k(); u++) {
                sb.logical(0, sb.xbar(0, u), "Xbar[" + std::to_string(u) + "]");
            }
            sb.z_generators(1, 0);
            rb = {std::vector<CheckBasis>{CheckBasis::kX}, std::vector<CheckBasis>{CheckBasis::kZ}};
            break;
        case AncillaKind::kMixed: {
            require_logical(spec, 0, params.j);
            bool zfirst = params.basis == CheckBasis::kZ;
            if (zfirst) {
                sb.z_generators(0, 0);
            } else {
                sb.x_generators(0, 0);
            }
            for (size_t u = 0; u < codes[0]->k(); u++) {
                if (u != params.j) {
                    sb.logical(
                        0, zfirst ? sb.zbar(0, u) : sb.xbar(0, u),
                        std::string(zfirst ? "Zbar[" : "Xbar[") + std::to_string(u) + "]");
                }
            }
            if (zfirst) {
                sb.x_generators(1, 0);
            } else {
                sb.z_generators(1, 0);
            }
            sb.logical(
                1, zfirst ? sb.xbar(0, params.j) : sb.zbar(0, params.j),
                std::string(zfirst ? "Xbar[" : "Zbar[") + std::to_string(params.j) + "]");
            CheckBasis first = zfirst ? CheckBasis::kZ : CheckBasis::kX;
            CheckBasis second = zfirst ? CheckBasis::kX : CheckBasis::kZ;
            rb = {std::vector<CheckBasis>{first}, std::vector<CheckBasis>{second}};
            break;
        }
        case AncillaKind::kBell: {
            require_logical(spec, 0, params.i);
            require_logical(spec, 1, params.j);
            std::string tag = "[" + std::to_string(params.i) + "," + std::to_string(params.j) + "]";
            sb.z_generators(0, 0);
            sb.z_generators(0, 1);
            for (size_t u = 0; u < codes[0]->k(); u++) {
                if (u != params.i) {
                    sb.logical(0, sb.zbar(0, u), "Zbar_a[" + std::to_string(u) + "]");
                }
            }
            for (size_t u = 0; u < codes[1]->k(); u++) {
                if (u != params.j) {
                    sb.logical(0, sb.zbar(1, u), "Zbar_b[" + std::to_string(u) + "]");
                }
            }
            PauliString zz = sb.zbar(0, params.i);
            zz *= sb.zbar(1, params.j);
            sb.logical(0, zz, "ZbarZbar" + tag);
            sb.x_generators(1, 0);
            sb.x_generators(1, 1);
            PauliString xx = sb.xbar(0, params.i);
            xx *= sb.xbar(1, params.j);
            sb.logical(1, xx, "XbarXbar" + tag);
            rb = {std::vector<CheckBasis>{CheckBasis::kZ, CheckBasis::kZ},
                  std::vector<CheckBasis>{CheckBasis::kX, CheckBasis::kX}};
            break;
        }
        case AncillaKind::kOmega: {
            require_logical(spec, 0, params.i);
            require_logical(spec, 1, params.j);
            std::string tag = "[" + std::to_string(params.i) + "," + std::to_string(params.j) + "]";
            // Round 1 removes X errors on block a and Z errors on block b.
            sb.z_generators(0, 0);
            sb.x_generators(0, 1);
            PauliString zx = sb.zbar(0, params.i);
            zx *= sb.xbar(1, params.j);
            sb.logical(0, zx, "ZbarXbar" + tag);
            sb.x_generators(1, 0);
            sb.z_generators(1, 1);
            PauliString xz = sb.xbar(0, params.i);
            xz *= sb.zbar(1, params.j);
            sb.logical(1, xz, "XbarZbar" + tag);
            // Remaining logical qubits: block a in |+>, block b in |0>.
            for (size_t u = 0; u < codes[0]->k(); u++) {
                if (u != params.i) {
                    sb.logical(1, sb.xbar(0, u), "Xbar_a[" + std::to_string(u) + "]");
                }
            }
            for (size_t u = 0; u < codes[1]->k(); u++) {
                if (u != params.j) {
                    sb.logical(1, sb.zbar(1, u), "Zbar_b[" + std::to_string(u) + "]");
                }
            }
            rb = {std::vector<CheckBasis>{CheckBasis::kZ, CheckBasis::kX},
                  std::vector<CheckBasis>{CheckBasis::kX, CheckBasis::kZ}};
            break;
        }
        case AncillaKind::kTheta:
            break;
    }
    validate_spec(spec);
    return spec;
}

AncillaSpec apply_bitwise_phase(const AncillaSpec &omega) {
    if (omega.kind != AncillaKind::kOmega || omega.params.i != omega.params.j) {
        throw std::invalid_argument("apply_bitwise_phase needs an omega(j,j) spec, got " + omega.kind_name());
    }
    size_t j = omega.params.j;
    const CssCode &cb = *omega.blocks[1];
    if (!check_phase_gate_compatible(cb, j)) {
        throw std::invalid_argument(
            "block b code is not compatible with transversal phase gates for logical qubit " + std::to_string(j));
    }
    AncillaSpec theta = omega;
    theta.kind = AncillaKind::kTheta;
    size_t off = omega.offsets[1];
    size_t n = cb.n();
    for (auto &round : theta.rounds) {
        for (auto &el : round) {
            // P X P^dag = Y: the z part picks up the x part on block b.
            for (size_t q = 0; q < n; q++) {
                if (el.op.x.get(off + q)) {
                    el.op.z.flip(off + q);
                }
            }
            if (el.role == ElementRole::kLogical && el.label.rfind("ZbarXbar", 0) == 0) {
                el.label = "ZbarYbar" + el.label.substr(8);
            }
        }
    }
    validate_spec(theta);
    return theta;
}

BitVec generalized_syndrome(const AncillaSpec &spec, const PauliFrame &frame) {
    std::vector<size_t> lengths = spec.block_lengths();
    if (frame.block_lengths() != lengths) {
        throw std::invalid_argument("generalized_syndrome: frame shape does not match spec");
    }
    PauliString err = frame.flatten();
    BitVec out(spec.num_qubits);
    size_t k = 0;
    for (const auto &round : spec.rounds) {
        for (const auto &el : round) {
            out.set(k++, el.op.anticommutes(err));
        }
    }
    return out;
}

namespace {

constexpr uint8_t kUnset = 0xFF;
constexpr size_t kDenseKeyBits = 24;

}  // namespace

void WeightTable::build_part(Part &part, const std::vector<PauliString> &checks, bool x_errors) {
    // X errors are seen through the z parts of the checks, Z errors through the x parts.
    for (const auto &c : checks) {
        if ((x_errors ? c.z : c.x).any()) {
            part.rows.push_back(c);
        }
    }
    part.key_bits = part.rows.size();
    size_t total = 0;
    for (size_t n : lengths_) {
        total += n;
    }
    if (part.key_bits <= 64) {
        std::vector<uint64_t> flat(total, 0);
        for (size_t r = 0; r < part.rows.size(); r++) {
            const BitVec &v = x_errors ? part.rows[r].z : part.rows[r].x;
            for (size_t q : v.ones()) {
                flat[q] |= uint64_t{1} << r;
            }
        }
        size_t off = 0;
        for (size_t n : lengths_) {
            part.col_key.emplace_back(flat.begin() + off, flat.begin() + off + n);
            off += n;
        }
        if (part.key_bits <= kDenseKeyBits) {
            part.dense.assign(size_t{1} << part.key_bits, kUnset);
        }
        // Enumerate supports by increasing weight; the first hit is the minimum.
        std::vector<size_t> idx;
        auto record = [&](uint64_t key, size_t w) {
            if (!part.dense.empty()) {
                if (part.dense[key] == kUnset) {
                    part.dense[key] = static_cast<uint8_t>(w);
                }
            } else {
                part.sparse.emplace(key, static_cast<uint8_t>(w));
            }
        };
        for (size_t w = 0; w <= w_cap_; w++) {
            auto rec = [&](auto &&self, size_t start, size_t depth, uint64_t key) -> void {
                if (depth == w) {
                    record(key, w);
                    return;
                }
                for (size_t q = start; q + (w - depth) <= total; q++) {
                    self(self, q + 1, depth + 1, key ^ flat[q]);
                }
            };
            rec(rec, 0, 0, 0);
        }
        return;
    }
    // Wide keys: slow path for large stabilizer sets.
    for (size_t w = 0; w <= w_cap_; w++) {
        auto rec = [&](auto &&self, size_t start, size_t depth, PauliString &err) -> void {
            if (depth == w) {
                BitVec key(part.key_bits);
                for (size_t r = 0; r < part.rows.size(); r++) {
                    key.set(r, part.rows[r].anticommutes(err));
                }
                part.wide.emplace(std::move(key), static_cast<uint8_t>(w));
                return;
            }
            for (size_t q = start; q + (w - depth) <= total; q++) {
                (x_errors ? err.x : err.z).flip(q);
                self(self, q + 1, depth + 1, err);
                (x_errors ? err.x : err.z).flip(q);
            }
        };
        PauliString err(total);
        rec(rec, 0, 0, err);
    }
}

WeightTable WeightTable::build(const AncillaSpec &spec, size_t w_cap) {
    if (w_cap >= 64) {
        throw std::invalid_argument("w_cap too large");
    }
    WeightTable t;
    t.w_cap_ = w_cap;
    t.lengths_ = spec.block_lengths();
    std::vector<PauliString> checks = spec.all_elements();
    t.build_part(t.x_part_, checks, true);
    t.build_part(t.z_part_, checks, false);
    t.word_path_ = t.x_part_.key_bits <= 64 && t.z_part_.key_bits <= 64;
    for (size_t n : t.lengths_) {
        t.word_path_ = t.word_path_ && n <= 64;
    }
    return t;
}

size_t WeightTable::lookup(const Part &part, uint64_t key) const {
    if (!part.dense.empty()) {
        uint8_t w = part.dense[key];
        return w == kUnset ? above_cap() : w;
    }
    auto it = part.sparse.find(key);
    return it == part.sparse.end() ? above_cap() : it->second;
}

size_t WeightTable::part_weight(const Part &part, const PauliString &error, bool x_errors) const {
    if (part.key_bits <= 64) {
        uint64_t key = 0;
        const BitVec &bits = x_errors ? error.x : error.z;
        size_t off = 0;
        for (size_t b = 0; b < lengths_.size(); b++) {
            for (size_t q = 0; q < lengths_[b]; q++) {
                if (bits.get(off + q)) {
                    key ^= part.col_key[b][q];
                }
            }
            off += lengths_[b];
        }
        return lookup(part, key);
    }
    PauliString only(error.size());
    (x_errors ? only.x : only.z) = x_errors ? error.x : error.z;
    BitVec key(part.key_bits);
    for (size_t r = 0; r < part.rows.size(); r++) {
        key.set(r, part.rows[r].anticommutes(only));
    }
    auto it = part.wide.find(key);
    return it == part.wide.end() ? above_cap() : it->second;
}

ResidualWeight WeightTable::residual_weight(const PauliFrame &frame) const {
    if (frame.block_lengths() != lengths_) {
        throw std::invalid_argument("residual_weight: frame shape does not match spec");
    }
    PauliString err = frame.flatten();
    return {part_weight(x_part_, err, true), part_weight(z_part_, err, false)};
}

size_t WeightTable::x_weight_words(const uint64_t *e_blocks) const {
    uint64_t key = 0;
    for (size_t b = 0; b < lengths_.size(); b++) {
        uint64_t bits = e_blocks[b];
        while (bits) {
            key ^= x_part_.col_key[b][std::countr_zero(bits)];
            bits &= bits - 1;
        }
    }
    return lookup(x_part_, key);
}

size_t WeightTable::z_weight_words(const uint64_t *f_blocks) const {
    uint64_t key = 0;
    for (size_t b = 0; b < lengths_.size(); b++) {
        uint64_t bits = f_blocks[b];
        while (bits) {
            key ^= z_part_.col_key[b][std::countr_zero(bits)];
            bits &= bits - 1;
        }
    }
    return lookup(z_part_, key);
}

ResidualWeight residual_weight(const AncillaSpec &spec, const PauliFrame &frame, size_t w_cap) {
    return WeightTable::build(spec, w_cap).residual_weight(frame);
}

}  // namespace ftancilla
