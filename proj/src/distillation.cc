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

#include "ftancilla/distillation.h"

#include <algorithm>
#include <bit>
#include <sstream>
#include <stdexcept>

namespace ftancilla {

namespace {

constexpr size_t kMaxIdealElements = 24;

inline bool parity(uint64_t w) {
    return std::popcount(w) & 1;
}

inline uint64_t low_mask(size_t bits) {
    return bits >= 64 ? ~uint64_t{0} : (uint64_t{1} << bits) - 1;
}

std::string round_name(size_t round) {
    return round == 0 ? "round1" : "round2";
}

uint64_t block_word(const BitVec &v, size_t offset, size_t n) {
    return v.slice(offset, n).word0();
}

}  // namespace

const char *postselect_mode_name(PostselectMode mode) {
    switch (mode) {
        case PostselectMode::kNone:
            return "none";
        case PostselectMode::kCode:
            return "code";
        case PostselectMode::kIdeal:
            return "ideal";
    }
    return "?";
}

void DistillationConfig::validate() const {
    if (spec.blocks.empty()) {
        throw std::invalid_argument("spec: no code blocks");
    }
    if (!spec.is_distillable()) {
        throw std::invalid_argument("spec: " + spec.kind_name() + " is not distillable with transversal CNOTs");
    }
    if (!perfect_prep && !spec.is_css_type()) {
        throw std::invalid_argument("spec: " + spec.kind_name() + " is not preparable by a CNOT encoding circuit");
    }
    for (size_t n : spec.block_lengths()) {
        if (n > 64) {
            throw std::invalid_argument("spec: blocks longer than 64 qubits are not supported");
        }
    }
    for (size_t round = 0; round < 2; round++) {
        std::string tag = round == 0 ? "1" : "2";
        const auto &cc_ptr = round == 0 ? cc1 : cc2;
        if (!cc_ptr) {
            throw std::invalid_argument("C_c" + tag + ": missing");
        }
        if (cc_ptr->n() > 64 || cc_ptr->r() > 24) {
            throw std::invalid_argument("C_c" + tag + ": needs n <= 64 and n - k <= 24");
        }
        if (cc_ptr->k() == 0) {
            throw std::invalid_argument("C_c" + tag + ": k must be positive");
        }
        size_t num_s = spec.rounds[round].size();
        if (num_s > 64) {
            throw std::invalid_argument("S" + tag + ": more than 64 elements");
        }
        PostselectMode mode = ps(round);
        if (mode == PostselectMode::kCode) {
            const auto &d = cd(round);
            if (!d) {
                throw std::invalid_argument("C_d" + tag + ": missing while postselection is enabled");
            }
            if (d->k() != num_s) {
                throw std::invalid_argument(
                    "C_d" + tag + ": k = " + std::to_string(d->k()) + " does not match |S" + tag +
                    "| = " + std::to_string(num_s));
            }
            if (d->n() > 64) {
                throw std::invalid_argument("C_d" + tag + ": n must be <= 64");
            }
        }
        if (mode == PostselectMode::kIdeal && num_s > kMaxIdealElements) {
            throw std::invalid_argument(
                "S" + tag + ": ideal postselection supports at most " + std::to_string(kMaxIdealElements) +
                " elements");
        }
    }
    model.validate();
}

Circuit build_round_circuit(
    const BitMatrix &a, const std::vector<CheckBasis> &bases, const std::vector<size_t> &lengths) {
    if (bases.size() != lengths.size()) {
        throw std::invalid_argument("build_round_circuit: one basis per block expected");
    }
    const size_t m = lengths.size();
    const size_t r = a.rows();
    const size_t n_c = r + a.cols();
    std::vector<size_t> block_lengths;
    for (size_t u = 0; u < n_c; u++) {
        block_lengths.insert(block_lengths.end(), lengths.begin(), lengths.end());
    }
    Circuit c(block_lengths);
    auto at = [&](size_t unit, size_t b, size_t q) {
        return Loc{uint32_t(unit * m + b), uint32_t(q)};
    };
    std::vector<size_t> free_step(n_c, 0);
    for (size_t i = 0; i < r; i++) {
        for (size_t j = 0; j < a.cols(); j++) {
            if (!a.get(i, j)) {
                continue;
            }
            size_t d = r + j;
            size_t s = std::max(free_step[i], free_step[d]);
            for (size_t b = 0; b < m; b++) {
                for (size_t q = 0; q < lengths[b]; q++) {
                    if (bases[b] == CheckBasis::kZ) {
                        c.add(s, {GateKind::kCnot, at(d, b, q), at(i, b, q)});
                    } else {
                        c.add(s, {GateKind::kCnot, at(i, b, q), at(d, b, q)});
                    }
                }
            }
            free_step[i] = free_step[d] = s + 1;
        }
    }
    for (size_t i = 0; i < r; i++) {
        for (size_t b = 0; b < m; b++) {
            GateKind kind = bases[b] == CheckBasis::kZ ? GateKind::kMeasZ : GateKind::kMeasX;
            for (size_t q = 0; q < lengths[b]; q++) {
                c.add(free_step[i], {kind, at(i, b, q), {}});
            }
        }
    }
    return c;
}

Circuit build_round_circuit(const BitMatrix &a, CheckBasis basis, size_t n) {
    return build_round_circuit(a, std::vector<CheckBasis>{basis}, std::vector<size_t>{n});
}

std::vector<PauliString> extend_stabilizers(const std::vector<PauliString> &s, const LinearCode *cd) {
    if (!cd) {
        return s;
    }
    if (cd->k() != s.size()) {
        throw std::invalid_argument(
            "extend_stabilizers: C_d has k = " + std::to_string(cd->k()) + " but |S| = " + std::to_string(s.size()));
    }
    const BitMatrix &ad = cd->a();
    std::vector<PauliString> out;
    for (size_t j = 0; j < ad.rows(); j++) {
        PauliString p(s.empty() ? 0 : s[0].size());
        for (size_t i = 0; i < s.size(); i++) {
            if (ad.get(j, i)) {
                p *= s[i];
            }
        }
        out.push_back(std::move(p));
    }
    out.insert(out.end(), s.begin(), s.end());
    return out;
}

BitMatrix compute_sigma(const std::vector<PauliFrame> &check_records, const std::vector<PauliString> &elements) {
    BitMatrix sigma(check_records.size(), elements.size());
    for (size_t i = 0; i < check_records.size(); i++) {
        PauliString rec = check_records[i].flatten();
        for (size_t c = 0; c < elements.size(); c++) {
            sigma.set(i, c, rec.anticommutes(elements[c]));
        }
    }
    return sigma;
}

BitMatrix decode_columns(const BitMatrix &sigma, const LinearCode &cc, std::vector<DecodeStatus> *status) {
    if (!cc.is_systematic()) {
        throw std::invalid_argument("decode_columns: classical code must be in systematic form");
    }
    if (sigma.rows() != cc.r()) {
        throw std::invalid_argument(
            "decode_columns: sigma has " + std::to_string(sigma.rows()) + " rows, code has r = " +
            std::to_string(cc.r()));
    }
    BitMatrix out(cc.n(), sigma.cols());
    if (status) {
        status->clear();
    }
    for (size_t c = 0; c < sigma.cols(); c++) {
        DecodeResult res = cc.decode(sigma.column(c));
        for (size_t j : res.error.ones()) {
            out.set(j, c, true);
        }
        if (status) {
            status->push_back(res.status);
        }
    }
    return out;
}

BitVec postselect(const BitMatrix &se_hat, const LinearCode *cd) {
    BitVec accept(se_hat.rows());
    for (size_t j = 0; j < se_hat.rows(); j++) {
        accept.set(j, true);
    }
    if (!cd) {
        return accept;
    }
    if (se_hat.cols() != cd->n()) {
        throw std::invalid_argument(
            "postselect: " + std::to_string(se_hat.cols()) + " syndrome columns, C_d has n = " +
            std::to_string(cd->n()));
    }
    const BitMatrix &ad = cd->a();
    const size_t r = cd->r();
    for (size_t j = 0; j < se_hat.rows(); j++) {
        const BitVec &row = se_hat.row(j);
        for (size_t p = 0; p < r; p++) {
            bool v = row.get(p);
            for (size_t i = 0; i < ad.cols(); i++) {
                v ^= ad.get(p, i) && row.get(r + i);
            }
            if (v) {
                accept.set(j, false);
                break;
            }
        }
    }
    return accept;
}

namespace {

// Rows whose independently decoded product columns disagree with the XOR of
// the decoded generator columns. sigma_cols are r-bit words.
uint64_t ideal_conflicts(const std::vector<uint64_t> &sigma_cols, const LinearCode &cc) {
    const size_t ns = sigma_cols.size();
    std::vector<uint64_t> leaders(ns);
    DecodeStatus st;
    for (size_t i = 0; i < ns; i++) {
        leaders[i] = cc.decode_word(sigma_cols[i], &st);
    }
    uint64_t bad = 0;
    uint64_t sig = 0;
    uint64_t expected = 0;
    const uint64_t total = uint64_t{1} << ns;
    for (uint64_t g = 1; g < total; g++) {
        // Gray code: consecutive products differ in one factor.
        int i = std::countr_zero(g);
        sig ^= sigma_cols[i];
        expected ^= leaders[i];
        bad |= cc.decode_word(sig, &st) ^ expected;
    }
    return bad;
}

}  // namespace

BitVec postselect_ideal(const BitMatrix &sigma_s, const LinearCode &cc) {
    if (!cc.is_systematic() || !cc.has_word_decoder()) {
        throw std::invalid_argument("postselect_ideal: needs a systematic code with a word decoder");
    }
    if (sigma_s.rows() != cc.r()) {
        throw std::invalid_argument("postselect_ideal: sigma rows do not match the code");
    }
    if (sigma_s.cols() > kMaxIdealElements) {
        throw std::invalid_argument("postselect_ideal: too many elements");
    }
    std::vector<uint64_t> cols;
    for (size_t c = 0; c < sigma_s.cols(); c++) {
        cols.push_back(sigma_s.column(c).word0());
    }
    uint64_t bad = ideal_conflicts(cols, cc);
    BitVec accept(cc.n());
    for (size_t j = 0; j < cc.n(); j++) {
        accept.set(j, !((bad >> j) & 1));
    }
    return accept;
}

RoundCorrector::RoundCorrector(const AncillaSpec &spec, size_t round) {
    const size_t m = spec.num_blocks();
    const auto &elements = spec.rounds[round];
    const auto &bases = spec.round_basis[round];
    for (size_t b = 0; b < m; b++) {
        if (spec.blocks[b]->n() > 64) {
            throw std::invalid_argument("RoundCorrector: blocks longer than 64 qubits are not supported");
        }
    }
    reps_.assign(elements.size(), std::vector<uint64_t>(m));
    for (size_t c = 0; c < elements.size(); c++) {
        for (size_t b = 0; b < m; b++) {
            size_t off = spec.offsets[b], n = spec.blocks[b]->n();
            const BitVec &part = bases[b] == CheckBasis::kZ ? elements[c].op.z : elements[c].op.x;
            reps_[c][b] = block_word(part, off, n);
        }
    }
    blocks_.resize(m);
    for (size_t b = 0; b < m; b++) {
        Block &blk = blocks_[b];
        blk.basis = bases[b];
        const CssCode &css = *spec.blocks[b];
        blk.decoder = blk.basis == CheckBasis::kZ ? &css.cz() : &css.cx();
        ElementRole role = blk.basis == CheckBasis::kZ ? ElementRole::kZGenerator : ElementRole::kXGenerator;
        blk.gen_elements.assign(blk.decoder->r(), UINT32_MAX);
        size_t found = 0;
        for (size_t c = 0; c < elements.size(); c++) {
            if (elements[c].role == role && elements[c].block == b) {
                blk.gen_elements.at(elements[c].row) = uint32_t(c);
                found++;
            }
        }
        if (found != blk.decoder->r()) {
            throw std::logic_error("RoundCorrector: block " + std::to_string(b) + " generators missing from round");
        }
        if (!blk.decoder->has_word_decoder()) {
            throw std::invalid_argument("RoundCorrector: block code has no word decoder");
        }
    }

    // Flip operators: logical X (resp. Z) representatives of the blocks,
    // combined so that each anticommutes with exactly one logical element.
    std::vector<std::vector<uint64_t>> cands;
    for (size_t b = 0; b < m; b++) {
        const CssCode &css = *spec.blocks[b];
        const BitMatrix &reps = blocks_[b].basis == CheckBasis::kZ ? css.d() : css.lz();
        for (size_t u = 0; u < reps.rows(); u++) {
            std::vector<uint64_t> w(m, 0);
            w[b] = reps.row(u).word0();
            cands.push_back(std::move(w));
        }
    }
    std::vector<uint32_t> logical_ids;
    for (size_t c = 0; c < elements.size(); c++) {
        if (elements[c].role == ElementRole::kLogical) {
            logical_ids.push_back(uint32_t(c));
        }
    }
    const size_t nl = logical_ids.size();
    if (nl == 0) {
        return;
    }
    // Augmented [M | I] with M[l][v] = anticommutation of logical l with candidate v.
    BitMatrix aug(nl, cands.size() + nl);
    for (size_t l = 0; l < nl; l++) {
        for (size_t v = 0; v < cands.size(); v++) {
            bool bit = false;
            for (size_t b = 0; b < m; b++) {
                bit ^= parity(cands[v][b] & reps_[logical_ids[l]][b]);
            }
            aug.set(l, v, bit);
        }
        aug.set(l, cands.size() + l, true);
    }
    RrefResult rr = rref(aug);
    if (rr.rank < nl || rr.pivots[nl - 1] >= cands.size()) {
        throw std::logic_error("RoundCorrector: logical elements cannot be flipped independently");
    }
    for (size_t l = 0; l < nl; l++) {
        Logical lg{logical_ids[l], std::vector<uint64_t>(m, 0)};
        for (size_t i = 0; i < nl; i++) {
            if (rr.reduced.get(i, cands.size() + l)) {
                for (size_t b = 0; b < m; b++) {
                    lg.flip[b] ^= cands[rr.pivots[i]][b];
                }
            }
        }
        logicals_.push_back(std::move(lg));
    }
}

bool RoundCorrector::correct(uint64_t s_bits, uint64_t *err) const {
    const size_t m = blocks_.size();
    uint64_t fix[8];
    std::vector<uint64_t> fix_big;
    uint64_t *fx = fix;
    if (m > 8) {
        fix_big.resize(m);
        fx = fix_big.data();
    }
    for (size_t b = 0; b < m; b++) {
        const Block &blk = blocks_[b];
        uint64_t syn = 0;
        for (size_t r = 0; r < blk.gen_elements.size(); r++) {
            syn |= ((s_bits >> blk.gen_elements[r]) & 1) << r;
        }
        DecodeStatus st;
        fx[b] = blk.decoder->decode_word(syn, &st);
        if (st == DecodeStatus::kUncorrectable) {
            return false;
        }
    }
    for (const Logical &lg : logicals_) {
        bool p = false;
        for (size_t b = 0; b < m; b++) {
            p ^= parity(fx[b] & reps_[lg.element][b]);
        }
        if (p != bool((s_bits >> lg.element) & 1)) {
            for (size_t b = 0; b < m; b++) {
                fx[b] ^= lg.flip[b];
            }
        }
    }
    for (size_t b = 0; b < m; b++) {
        err[b] ^= fx[b];
    }
    return true;
}

bool RoundCorrector::correct(const BitVec &s_row, PauliFrame &frame) const {
    const size_t m = blocks_.size();
    if (s_row.size() != reps_.size() || frame.num_blocks() != m) {
        throw std::invalid_argument("RoundCorrector::correct: shape mismatch");
    }
    std::vector<uint64_t> err(m);
    for (size_t b = 0; b < m; b++) {
        err[b] = (blocks_[b].basis == CheckBasis::kZ ? frame.e[b] : frame.f[b]).word0();
    }
    if (!correct(s_row.word0(), err.data())) {
        return false;
    }
    for (size_t b = 0; b < m; b++) {
        BitVec &dst = blocks_[b].basis == CheckBasis::kZ ? frame.e[b] : frame.f[b];
        dst = BitVec::from_word(dst.size(), err[b]);
    }
    return true;
}

bool correct_block(const AncillaSpec &spec, size_t round, const BitVec &s_row, PauliFrame &frame) {
    return RoundCorrector(spec, round).correct(s_row, frame);
}

std::string ProtocolInjection::str() const {
    std::ostringstream out;
    auto section = [&](const char *name, const std::map<size_t, FaultInjection> &m) {
        for (const auto &[idx, inj] : m) {
            out << "@ " << name << " " << idx << "\n" << inj.str();
        }
    };
    section("prep", prep);
    section("round1", round1);
    section("round2", round2);
    return out.str();
}

ProtocolInjection ProtocolInjection::parse(const std::string &text) {
    ProtocolInjection out;
    std::istringstream in(text);
    std::string line;
    std::map<size_t, FaultInjection> *section = nullptr;
    size_t index = 0;
    std::string body;
    size_t line_no = 0;
    auto flush = [&]() {
        if (section) {
            FaultInjection parsed = FaultInjection::parse(body);
            auto &dst = (*section)[index].faults;
            dst.insert(dst.end(), parsed.faults.begin(), parsed.faults.end());
        }
        body.clear();
    };
    while (std::getline(in, line)) {
        line_no++;
        std::string trimmed = line.substr(0, line.find('#'));
        std::istringstream fields(trimmed);
        std::string first;
        if (!(fields >> first)) {
            body += "\n";
            continue;
        }
        if (first[0] != '@') {
            if (!section) {
                throw std::invalid_argument(
                    "scenario line " + std::to_string(line_no) + ": fault before any '@ stage index' header");
            }
            body += line + "\n";
            continue;
        }
        flush();
        std::string stage = first.substr(1);
        if (stage.empty() && !(fields >> stage)) {
            throw std::invalid_argument("scenario line " + std::to_string(line_no) + ": empty header");
        }
        std::string idx_s, extra;
        if (!(fields >> idx_s) || (fields >> extra)) {
            throw std::invalid_argument(
                "scenario line " + std::to_string(line_no) + ": expected '@ prep|round1|round2 <index>'");
        }
        if (stage == "prep") {
            section = &out.prep;
        } else if (stage == "round1") {
            section = &out.round1;
        } else if (stage == "round2") {
            section = &out.round2;
        } else {
            throw std::invalid_argument(
                "scenario line " + std::to_string(line_no) + ": unknown stage '" + stage + "'");
        }
        try {
            size_t used = 0;
            index = std::stoul(idx_s, &used);
            if (used != idx_s.size()) {
                throw std::invalid_argument(idx_s);
            }
        } catch (const std::logic_error &) {
            throw std::invalid_argument(
                "scenario line " + std::to_string(line_no) + ": bad index '" + idx_s + "'");
        }
        (*section)[index];
    }
    flush();
    return out;
}

std::string ProtocolTrace::str() const {
    std::ostringstream out;
    for (const auto &rt : rounds) {
        out << round_name(rt.round) << " group " << rt.group << " units";
        for (size_t u : rt.units) {
            out << " " << u;
        }
        out << "\nsigma\n" << format_matrix(rt.sigma) << "se_hat\n" << format_matrix(rt.se_hat);
        out << "accepted " << rt.accepted.str() << (rt.uncorrectable ? " (uncorrectable column)" : "") << "\n";
    }
    return out.str();
}

struct Distiller::Scratch {
    std::vector<uint64_t> pool_e, pool_f;
    std::vector<SampledFault> faults;
    std::vector<uint64_t> state, in_e, in_f;
    std::vector<uint64_t> sigma_s;
    std::vector<uint64_t> est_s, est_x;
    std::vector<uint64_t> err;
};

Distiller::Distiller(DistillationConfig config, size_t w_cap) : config_(std::move(config)) {
    config_.validate();
    const AncillaSpec &spec = config_.spec;
    m_ = spec.num_blocks();
    if (spec.is_css_type()) {
        prep_ = CompiledCircuit(synth_encoding_circuit(spec), true);
    }
    for (size_t round = 0; round < 2; round++) {
        Round &rd = rounds_[round];
        const LinearCode &cc = config_.cc(round);
        rd.cc = cc.is_systematic() ? std::make_shared<LinearCode>(cc) : std::make_shared<LinearCode>(cc.systematic());
        rd.n_c = cc.n();
        rd.r_c = cc.r();
        rd.k_c = cc.k();
        rd.circuit = CompiledCircuit(
            build_round_circuit(rd.cc->a(), spec.round_basis[round], spec.block_lengths()), true);
        rd.num_s = spec.rounds[round].size();
        if (config_.ps(round) == PostselectMode::kCode) {
            const BitMatrix &ad = config_.cd(round)->a();
            rd.num_extra = ad.rows();
            for (size_t j = 0; j < ad.rows(); j++) {
                rd.extra_rows.push_back(ad.row(j).word0());
            }
        }
        rd.corrector = RoundCorrector(spec, round);
    }
    weights_ = WeightTable::build(spec, w_cap);
    if (!weights_.has_word_path()) {
        throw std::invalid_argument("spec too large for word-level residual weights");
    }
}

size_t Distiller::units_per_trial() const {
    return rounds_[0].n_c * (rounds_[1].n_c + config_.n_extra);
}

size_t Distiller::round_groups(size_t round) const {
    return round == 0 ? rounds_[1].n_c + config_.n_extra : rounds_[0].k_c;
}

void Distiller::run(Rng &rng, TrialOutcome &out, const ProtocolInjection *injection, ProtocolTrace *trace) const {
    run(config_.model, rng, out, injection, trace);
}

uint64_t Distiller::run_group(const Round &rd, size_t round, size_t group, const std::vector<size_t> &units,
                              const std::vector<SampledFault> &faults, Scratch &sc, ProtocolTrace *trace) const {
    const size_t m = m_;
    const size_t nb = rd.n_c * m;
    const uint64_t all_data = low_mask(rd.k_c);
    bool any_input = false;
    for (size_t p = 0; p < rd.n_c; p++) {
        for (size_t b = 0; b < m; b++) {
            size_t src = units[p] * m + b;
            sc.in_e[p * m + b] = sc.pool_e[src];
            sc.in_f[p * m + b] = sc.pool_f[src];
            any_input |= (sc.pool_e[src] | sc.pool_f[src]) != 0;
        }
    }
    if (!any_input && faults.empty() && !trace) {
        return all_data;
    }
    uint64_t *state = sc.state.data();
    rd.circuit.propagate_input(sc.in_e.data(), sc.in_f.data(), state);
    for (const auto &f : faults) {
        rd.circuit.apply_fault(f, state);
    }
    for (size_t p = rd.r_c; p < rd.n_c; p++) {
        for (size_t b = 0; b < m; b++) {
            sc.pool_e[units[p] * m + b] = state[p * m + b];
            sc.pool_f[units[p] * m + b] = state[nb + p * m + b];
        }
    }
    const RoundCorrector &corr = rd.corrector;
    bool any_sigma = false;
    for (size_t c = 0; c < rd.num_s; c++) {
        uint64_t col = 0;
        for (size_t i = 0; i < rd.r_c; i++) {
            uint64_t acc = 0;
            for (size_t b = 0; b < m; b++) {
                acc ^= state[2 * nb + i * m + b] & corr.rep(c, b);
            }
            col |= uint64_t(parity(acc)) << i;
        }
        sc.sigma_s[c] = col;
        any_sigma |= col != 0;
    }
    if (!any_sigma && !trace) {
        return all_data;
    }

    const LinearCode &cc = *rd.cc;
    const PostselectMode mode = config_.ps(round);
    bool uncorrectable = false;
    DecodeStatus st;
    std::fill(sc.est_s.begin(), sc.est_s.begin() + rd.n_c, 0);
    std::fill(sc.est_x.begin(), sc.est_x.begin() + rd.n_c, 0);
    for (size_t c = 0; c < rd.num_s; c++) {
        uint64_t lead = cc.decode_word(sc.sigma_s[c], &st);
        uncorrectable |= st == DecodeStatus::kUncorrectable;
        while (lead) {
            int p = std::countr_zero(lead);
            lead &= lead - 1;
            sc.est_s[p] |= uint64_t{1} << c;
        }
    }
    uint64_t reject = 0;
    if (mode == PostselectMode::kCode) {
        for (size_t j = 0; j < rd.num_extra; j++) {
            uint64_t sig = 0;
            uint64_t row = rd.extra_rows[j];
            while (row) {
                int i = std::countr_zero(row);
                row &= row - 1;
                sig ^= sc.sigma_s[i];
            }
            uint64_t lead = cc.decode_word(sig, &st);
            uncorrectable |= st == DecodeStatus::kUncorrectable;
            while (lead) {
                int p = std::countr_zero(lead);
                lead &= lead - 1;
                sc.est_x[p] |= uint64_t{1} << j;
            }
        }
        for (size_t p = rd.r_c; p < rd.n_c; p++) {
            for (size_t j = 0; j < rd.num_extra; j++) {
                if (((sc.est_x[p] >> j) & 1) != uint64_t(parity(sc.est_s[p] & rd.extra_rows[j]))) {
                    reject |= uint64_t{1} << (p - rd.r_c);
                    break;
                }
            }
        }
    } else if (mode == PostselectMode::kIdeal) {
        std::vector<uint64_t> cols(sc.sigma_s.begin(), sc.sigma_s.begin() + rd.num_s);
        reject |= ideal_conflicts(cols, cc) >> rd.r_c;
    }
    if (uncorrectable && config_.reject_uncorrectable) {
        reject = all_data;
    }
    RoundTrace *rt = nullptr;
    if (trace) {
        trace->rounds.emplace_back();
        rt = &trace->rounds.back();
        rt->round = round;
        rt->group = group;
        rt->units = units;
        rt->uncorrectable = uncorrectable;
        size_t ncols = rd.num_extra + rd.num_s;
        rt->sigma = BitMatrix(rd.r_c, ncols);
        rt->se_hat = BitMatrix(rd.n_c, ncols);
        for (size_t j = 0; j < rd.num_extra; j++) {
            for (size_t i = 0; i < rd.r_c; i++) {
                bool v = false;
                for (size_t c = 0; c < rd.num_s; c++) {
                    v ^= ((rd.extra_rows[j] >> c) & 1) && ((sc.sigma_s[c] >> i) & 1);
                }
                rt->sigma.set(i, j, v);
            }
            for (size_t p = 0; p < rd.n_c; p++) {
                rt->se_hat.set(p, j, (sc.est_x[p] >> j) & 1);
            }
        }
        for (size_t c = 0; c < rd.num_s; c++) {
            for (size_t i = 0; i < rd.r_c; i++) {
                rt->sigma.set(i, rd.num_extra + c, (sc.sigma_s[c] >> i) & 1);
            }
            for (size_t p = 0; p < rd.n_c; p++) {
                rt->se_hat.set(p, rd.num_extra + c, (sc.est_s[p] >> c) & 1);
            }
        }
    }
    uint64_t *err = sc.err.data();
    for (size_t p = rd.r_c; p < rd.n_c; p++) {
        size_t base = units[p] * m;
        for (size_t b = 0; b < m; b++) {
            err[b] = corr.basis(b) == CheckBasis::kZ ? sc.pool_e[base + b] : sc.pool_f[base + b];
        }
        if (!corr.correct(sc.est_s[p], err)) {
            reject |= uint64_t{1} << (p - rd.r_c);
        }
        for (size_t b = 0; b < m; b++) {
            (corr.basis(b) == CheckBasis::kZ ? sc.pool_e[base + b] : sc.pool_f[base + b]) = err[b];
        }
        if (rt) {
            PauliFrame fr(config_.spec.block_lengths());
            for (size_t b = 0; b < m; b++) {
                fr.e[b] = BitVec::from_word(fr.e[b].size(), sc.pool_e[base + b]);
                fr.f[b] = BitVec::from_word(fr.f[b].size(), sc.pool_f[base + b]);
            }
            rt->outputs.push_back(std::move(fr));
        }
    }
    uint64_t accept = all_data & ~reject;
    if (rt) {
        rt->accepted = BitVec::from_word(rd.k_c, accept);
    }
    return accept;
}

void Distiller::run(const FailureModel &model, Rng &rng, TrialOutcome &out, const ProtocolInjection *injection,
                    ProtocolTrace *trace) const {
    model.validate();
    out.aborted = false;
    out.round1_outputs = out.round1_rejected = out.round2_outputs = out.round2_rejected = 0;
    out.accepted.clear();
    if (trace) {
        trace->rounds.clear();
    }
    const size_t m = m_;
    const Round &r1 = rounds_[0];
    const Round &r2 = rounds_[1];
    const size_t num_units = units_per_trial();

    Scratch sc;
    FaultStreams streams(model, rng);
    sc.pool_e.assign(num_units * m, 0);
    sc.pool_f.assign(num_units * m, 0);
    size_t max_nc = std::max(r1.n_c, r2.n_c);
    sc.state.resize(3 * max_nc * m);
    sc.in_e.resize(max_nc * m);
    sc.in_f.resize(max_nc * m);
    sc.sigma_s.resize(std::max(r1.num_s, r2.num_s));
    sc.est_s.resize(max_nc);
    sc.est_x.resize(max_nc);
    sc.err.resize(m);

    auto add_injected = [&](const CompiledCircuit &cc, const std::map<size_t, FaultInjection> *section, size_t idx) {
        if (!section) {
            return;
        }
        auto it = section->find(idx);
        if (it == section->end()) {
            return;
        }
        for (const auto &f : it->second.faults) {
            sc.faults.push_back(cc.to_sampled(f));
        }
    };

    // Step 1: encode every unit.
    const bool prep_injected = injection && !injection->prep.empty();
    if (!config_.perfect_prep || prep_injected) {
        if (prep_injected && prep_.num_blocks() == 0) {
            throw std::invalid_argument("prep faults need a CNOT-preparable spec");
        }
        if (prep_injected && injection->prep.rbegin()->first >= num_units) {
            throw std::invalid_argument("prep fault on unit " + std::to_string(injection->prep.rbegin()->first) +
                                        " but only " + std::to_string(num_units) + " units are prepared");
        }
        std::vector<uint64_t> st(prep_.state_words());
        for (size_t u = 0; u < num_units; u++) {
            sc.faults.clear();
            if (!config_.perfect_prep) {
                sample_faults(prep_, streams, rng, sc.faults);
            }
            add_injected(prep_, injection ? &injection->prep : nullptr, u);
            if (sc.faults.empty()) {
                continue;
            }
            std::fill(st.begin(), st.end(), 0);
            for (const auto &f : sc.faults) {
                prep_.apply_fault(f, st.data());
            }
            for (size_t b = 0; b < m; b++) {
                sc.pool_e[u * m + b] = st[b];
                sc.pool_f[u * m + b] = st[m + b];
            }
        }
    }
    for (size_t round = 0; round < 2; round++) {
        if (injection && !injection->round(round).empty() &&
            injection->round(round).rbegin()->first >= round_groups(round)) {
            throw std::invalid_argument(round_name(round) + " fault on group " +
                                        std::to_string(injection->round(round).rbegin()->first) + " but only " +
                                        std::to_string(round_groups(round)) + " groups run");
        }
    }

    // Steps 2-5: round 1 on every group, including the spares.
    const size_t groups1 = round_groups(0);
    std::vector<std::vector<size_t>> outputs(groups1);
    std::vector<size_t> units(r1.n_c);
    for (size_t g = 0; g < groups1; g++) {
        for (size_t p = 0; p < r1.n_c; p++) {
            units[p] = g * r1.n_c + p;
        }
        sc.faults.clear();
        sample_faults(r1.circuit, streams, rng, sc.faults);
        add_injected(r1.circuit, injection ? &injection->round1 : nullptr, g);
        uint64_t accept = run_group(r1, 0, g, units, sc.faults, sc, trace);
        out.round1_outputs += r1.k_c;
        out.round1_rejected += r1.k_c - std::popcount(accept);
        for (size_t t = 0; t < r1.k_c; t++) {
            if ((accept >> t) & 1) {
                outputs[g].push_back(units[r1.r_c + t]);
            }
        }
    }
    // Refill the primary groups from the spares, in order.
    const size_t primaries = r2.n_c;
    size_t spare_group = primaries, spare_pos = 0;
    for (size_t g = 0; g < primaries; g++) {
        while (outputs[g].size() < r1.k_c) {
            while (spare_group < groups1 && spare_pos >= outputs[spare_group].size()) {
                spare_group++;
                spare_pos = 0;
            }
            if (spare_group >= groups1) {
                out.aborted = true;
                return;
            }
            outputs[g].push_back(outputs[spare_group][spare_pos++]);
        }
    }

    // Steps 6-9: regroup and run round 2.
    units.resize(r2.n_c);
    for (size_t h = 0; h < r1.k_c; h++) {
        for (size_t p = 0; p < r2.n_c; p++) {
            units[p] = outputs[p][h];
        }
        sc.faults.clear();
        sample_faults(r2.circuit, streams, rng, sc.faults);
        add_injected(r2.circuit, injection ? &injection->round2 : nullptr, h);
        uint64_t accept = run_group(r2, 1, h, units, sc.faults, sc, trace);
        out.round2_outputs += r2.k_c;
        out.round2_rejected += r2.k_c - std::popcount(accept);
        for (size_t t = 0; t < r2.k_c; t++) {
            if (!((accept >> t) & 1)) {
                continue;
            }
            size_t u = units[r2.r_c + t];
            OutputBlock ob;
            ob.unit = u;
            ob.group = h;
            ob.position = r2.r_c + t;
            ob.e.assign(sc.pool_e.begin() + u * m, sc.pool_e.begin() + (u + 1) * m);
            ob.f.assign(sc.pool_f.begin() + u * m, sc.pool_f.begin() + (u + 1) * m);
            ob.weight = {weights_.x_weight_words(ob.e.data()), weights_.z_weight_words(ob.f.data())};
            out.accepted.push_back(std::move(ob));
        }
    }
}

TrialOutcome run_protocol(
    const DistillationConfig &config, Rng &rng, const ProtocolInjection *injection, ProtocolTrace *trace) {
    Distiller d(config);
    TrialOutcome out;
    d.run(rng, out, injection, trace);
    return out;
}

SweepReport single_fault_sweep(const DistillationConfig &config, size_t group) {
    DistillationConfig cfg = config;
    cfg.model = FailureModel{};
    cfg.perfect_prep = true;
    Distiller d(cfg);
    const Circuit &circ = d.round_circuit(0);
    const size_t m = cfg.spec.num_blocks();
    SweepReport rep;
    Rng rng(0);
    TrialOutcome out;
    for (size_t s = 0; s < circ.steps.size(); s++) {
        for (size_t g = 0; g < circ.steps[s].size(); g++) {
            if (circ.steps[s][g].kind != GateKind::kCnot) {
                continue;
            }
            for (int code = 1; code < 16; code++) {
                InjectedFault f;
                f.step = s;
                f.gate = g;
                f.pauli = PauliString(2);
                f.pauli.x.set(0, code & 1);
                f.pauli.z.set(0, (code >> 1) & 1);
                f.pauli.x.set(1, (code >> 2) & 1);
                f.pauli.z.set(1, (code >> 3) & 1);
                ProtocolInjection inj;
                inj.round1[group].faults.push_back(f);
                EffectiveSupport qe = effective_support(inj.round1[group], circ);
                std::vector<uint64_t> support(m, 0);
                for (size_t b = 0; b < qe.x.size(); b++) {
                    support[b % m] |= qe.x[b].word0();
                }
                d.run(rng, out, &inj);
                rep.cases++;
                std::string bad;
                for (const auto &ob : out.accepted) {
                    for (size_t b = 0; b < m; b++) {
                        if (ob.e[b] != 0 && ob.e[b] != support[b]) {
                            bad = "unit " + std::to_string(ob.unit) + " block " + std::to_string(b) + " X error " +
                                  BitVec::from_word(cfg.spec.blocks[b]->n(), ob.e[b]).str() + " outside support " +
                                  BitVec::from_word(cfg.spec.blocks[b]->n(), support[b]).str();
                        }
                    }
                }
                if (out.aborted) {
                    bad = "aborted";
                }
                if (bad.empty()) {
                    rep.passed++;
                } else {
                    rep.failures.push_back(
                        "step " + std::to_string(s) + " gate " + std::to_string(g) + " " + f.pauli.str() + ": " + bad);
                }
            }
        }
    }
    return rep;
}

SteaneSyndrome steane_extract(const PauliFrame &data, const PauliFrame &x_anc, const PauliFrame &z_anc,
                              const CssCode &css) {
    const size_t n = css.n();
    for (const PauliFrame *f : {&data, &x_anc, &z_anc}) {
        if (f->num_blocks() != 1 || f->e[0].size() != n) {
            throw std::invalid_argument("steane_extract: frames must be single blocks of the code length");
        }
    }
    Circuit c({n, n, n});
    for (size_t q = 0; q < n; q++) {
        uint32_t qq = uint32_t(q);
        c.add(0, {GateKind::kCnot, {0, qq}, {1, qq}});
        c.add(1, {GateKind::kCnot, {2, qq}, {0, qq}});
        c.add(2, {GateKind::kMeasZ, {1, qq}, {}});
        c.add(2, {GateKind::kMeasX, {2, qq}, {}});
    }
    PauliFrame input(c.block_lengths);
    input.e = {data.e[0], x_anc.e[0], z_anc.e[0]};
    input.f = {data.f[0], x_anc.f[0], z_anc.f[0]};
    NoisyRun run = run_noisy(c, FaultInjection{}, input);
    return {css.hz_ext().mul(run.records[1]), css.hx_ext().mul(run.records[2])};
}

}  // namespace ftancilla
