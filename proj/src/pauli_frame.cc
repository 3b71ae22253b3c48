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

#include "ftancilla/pauli_frame.h"

#include <algorithm>
#include <bit>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ftancilla {

namespace {

std::string loc_str(const Loc &loc) {
    return std::to_string(loc.block) + ":" + std::to_string(loc.qubit);
}

// True iff the Pauli component acting on a measured qubit flips the outcome.
bool flips_measurement(GateKind kind, const PauliString &p) {
    return kind == GateKind::kMeasZ ? p.x.get(0) : p.z.get(0);
}

inline uint64_t bit_of(uint64_t w, uint32_t q) {
    return (w >> q) & 1;
}

}  // namespace

const char *gate_kind_name(GateKind kind) {
    switch (kind) {
        case GateKind::kPrepZ:
            return "PrepZ";
        case GateKind::kPrepX:
            return "PrepX";
        case GateKind::kCnot:
            return "CNOT";
        case GateKind::kPhase:
            return "PhaseP";
        case GateKind::kMeasZ:
            return "MeasZ";
        case GateKind::kMeasX:
            return "MeasX";
    }
    return "?";
}

size_t Circuit::num_gates() const {
    size_t total = 0;
    for (const auto &step : steps) {
        total += step.size();
    }
    return total;
}

size_t Circuit::count(GateKind kind) const {
    size_t total = 0;
    for (const auto &step : steps) {
        for (const auto &g : step) {
            total += g.kind == kind;
        }
    }
    return total;
}

void Circuit::add(size_t step, const Gate &gate) {
    if (steps.size() <= step) {
        steps.resize(step + 1);
    }
    steps[step].push_back(gate);
}

void Circuit::validate() const {
    auto check_loc = [&](const Loc &loc) {
        if (loc.block >= block_lengths.size() || loc.qubit >= block_lengths[loc.block]) {
            throw std::invalid_argument("circuit location " + loc_str(loc) + " out of range");
        }
    };
    std::set<std::pair<uint32_t, uint32_t>> measured_z, measured_x, measured;
    for (const auto &step : steps) {
        for (const auto &g : step) {
            if (g.is_measurement()) {
                auto key = std::make_pair(g.a.block, g.a.qubit);
                (g.kind == GateKind::kMeasZ ? measured_z : measured_x).insert(key);
            }
        }
    }
    for (size_t s = 0; s < steps.size(); s++) {
        std::set<std::pair<uint32_t, uint32_t>> used;
        auto use = [&](const Loc &loc) {
            check_loc(loc);
            auto key = std::make_pair(loc.block, loc.qubit);
            if (!used.insert(key).second) {
                throw std::invalid_argument(
                    "qubit " + loc_str(loc) + " used twice in step " + std::to_string(s));
            }
            if (measured.count(key)) {
                throw std::invalid_argument("qubit " + loc_str(loc) + " reused after measurement");
            }
        };
        for (const auto &g : steps[s]) {
            use(g.a);
            if (g.kind == GateKind::kCnot) {
                use(g.b);
                if (measured_z.count({g.a.block, g.a.qubit})) {
                    throw std::invalid_argument("Z-measured qubit " + loc_str(g.a) + " is a CNOT control");
                }
                if (measured_x.count({g.b.block, g.b.qubit})) {
                    throw std::invalid_argument("X-measured qubit " + loc_str(g.b) + " is a CNOT target");
                }
            }
        }
        for (const auto &g : steps[s]) {
            if (g.is_measurement()) {
                measured.insert({g.a.block, g.a.qubit});
            }
        }
    }
}

std::string Circuit::str() const {
    std::ostringstream out;
    for (size_t s = 0; s < steps.size(); s++) {
        out << s << ":";
        for (const auto &g : steps[s]) {
            out << " " << gate_kind_name(g.kind) << "(" << loc_str(g.a);
            if (g.kind == GateKind::kCnot) {
                out << "," << loc_str(g.b);
            }
            out << ")";
        }
        out << "\n";
    }
    return out.str();
}

void FailureModel::validate() const {
    for (double p : {p_gate, p_meas, p_mem}) {
        if (!(p >= 0 && p <= 1)) {
            throw std::invalid_argument("failure probabilities must lie in [0, 1]");
        }
    }
}

std::string FaultInjection::str() const {
    std::ostringstream out;
    for (const auto &f : faults) {
        out << f.step << " ";
        if (f.gate == InjectedFault::kIdle) {
            out << "@" << loc_str(f.idle);
        } else {
            out << f.gate;
        }
        out << " " << f.pauli.str() << "\n";
    }
    return out.str();
}

FaultInjection FaultInjection::parse(const std::string &text) {
    FaultInjection out;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.resize(hash);
        }
        std::istringstream fields(line);
        std::string step_s, gate_s, pauli_s, extra;
        if (!(fields >> step_s)) {
            continue;
        }
        auto fail = [&](const std::string &why) {
            throw std::invalid_argument("scenario line " + std::to_string(line_no) + ": " + why);
        };
        if (!(fields >> gate_s >> pauli_s) || (fields >> extra)) {
            fail("expected 'step gate pauli'");
        }
        InjectedFault f;
        try {
            size_t used = 0;
            f.step = std::stoul(step_s, &used);
            if (used != step_s.size()) {
                fail("bad step '" + step_s + "'");
            }
            if (gate_s[0] == '@') {
                auto colon = gate_s.find(':');
                if (colon == std::string::npos) {
                    fail("idle location must be @block:qubit");
                }
                f.gate = InjectedFault::kIdle;
                f.idle.block = static_cast<uint32_t>(std::stoul(gate_s.substr(1, colon - 1)));
                f.idle.qubit = static_cast<uint32_t>(std::stoul(gate_s.substr(colon + 1)));
            } else {
                f.gate = std::stoul(gate_s, &used);
                if (used != gate_s.size()) {
                    fail("bad gate index '" + gate_s + "'");
                }
            }
            f.pauli = PauliString::from_str(pauli_s);
        } catch (const std::logic_error &e) {
            if (std::string(e.what()).rfind("scenario line", 0) == 0) {
                throw;
            }
            fail(e.what());
        }
        out.faults.push_back(std::move(f));
    }
    return out;
}

void FaultInjection::validate(const Circuit &circuit) const {
    for (const auto &f : faults) {
        if (f.step >= circuit.steps.size()) {
            throw std::invalid_argument("fault step " + std::to_string(f.step) + " out of range");
        }
        if (f.gate == InjectedFault::kIdle) {
            if (f.idle.block >= circuit.num_blocks() || f.idle.qubit >= circuit.block_lengths[f.idle.block]) {
                throw std::invalid_argument("idle fault location " + loc_str(f.idle) + " out of range");
            }
            if (f.pauli.size() != 1) {
                throw std::invalid_argument("idle fault must be a single-qubit Pauli");
            }
            continue;
        }
        if (f.gate >= circuit.steps[f.step].size()) {
            throw std::invalid_argument(
                "fault gate index " + std::to_string(f.gate) + " out of range in step " + std::to_string(f.step));
        }
        const Gate &g = circuit.steps[f.step][f.gate];
        if (f.pauli.size() != g.arity()) {
            throw std::invalid_argument(
                "fault Pauli '" + f.pauli.str() + "' does not match the arity of " + gate_kind_name(g.kind));
        }
    }
}

void apply_gate(PauliFrame &frame, const Gate &gate) {
    const Loc &a = gate.a;
    switch (gate.kind) {
        case GateKind::kCnot: {
            const Loc &b = gate.b;
            if (frame.e[a.block].get(a.qubit)) {
                frame.e[b.block].flip(b.qubit);
            }
            if (frame.f[b.block].get(b.qubit)) {
                frame.f[a.block].flip(a.qubit);
            }
            break;
        }
        case GateKind::kPhase:
            if (frame.e[a.block].get(a.qubit)) {
                frame.f[a.block].flip(a.qubit);
            }
            break;
        case GateKind::kPrepZ:
        case GateKind::kPrepX:
            frame.e[a.block].set(a.qubit, false);
            frame.f[a.block].set(a.qubit, false);
            break;
        case GateKind::kMeasZ:
        case GateKind::kMeasX:
            break;
    }
}

void apply_pauli_at(PauliFrame &frame, const Circuit &circuit, const InjectedFault &fault) {
    auto hit = [&](const Loc &loc, size_t k) {
        if (fault.pauli.x.get(k)) {
            frame.e[loc.block].flip(loc.qubit);
        }
        if (fault.pauli.z.get(k)) {
            frame.f[loc.block].flip(loc.qubit);
        }
    };
    if (fault.gate == InjectedFault::kIdle) {
        hit(fault.idle, 0);
        return;
    }
    const Gate &g = circuit.steps[fault.step][fault.gate];
    hit(g.a, 0);
    if (g.kind == GateKind::kCnot) {
        hit(g.b, 1);
    }
}

NoisyRun run_noisy(const Circuit &circuit, const FaultInjection &injection) {
    return run_noisy(circuit, injection, PauliFrame(circuit.block_lengths));
}

NoisyRun run_noisy(const Circuit &circuit, const FaultInjection &injection, const PauliFrame &input) {
    injection.validate(circuit);
    if (input.block_lengths() != circuit.block_lengths) {
        throw std::invalid_argument("input frame does not match the circuit's blocks");
    }
    std::vector<std::vector<const InjectedFault *>> by_step(circuit.steps.size());
    for (const auto &f : injection.faults) {
        by_step[f.step].push_back(&f);
    }
    NoisyRun out{input, {}};
    for (size_t n : circuit.block_lengths) {
        out.records.emplace_back(n);
    }
    for (size_t s = 0; s < circuit.steps.size(); s++) {
        const auto &step = circuit.steps[s];
        for (size_t g = 0; g < step.size(); g++) {
            const Gate &gate = step[g];
            if (gate.is_measurement()) {
                bool flip = false;
                for (const auto *f : by_step[s]) {
                    if (f->gate == g) {
                        flip ^= flips_measurement(gate.kind, f->pauli);
                    }
                }
                const auto &part = gate.kind == GateKind::kMeasZ ? out.frame.e : out.frame.f;
                out.records[gate.a.block].set(gate.a.qubit, part[gate.a.block].get(gate.a.qubit) ^ flip);
                continue;
            }
            apply_gate(out.frame, gate);
            for (const auto *f : by_step[s]) {
                if (f->gate == g) {
                    apply_pauli_at(out.frame, circuit, *f);
                }
            }
        }
        for (const auto *f : by_step[s]) {
            if (f->gate == InjectedFault::kIdle) {
                apply_pauli_at(out.frame, circuit, *f);
            }
        }
    }
    return out;
}

EffectiveSupport effective_support(const FaultInjection &injection, const Circuit &circuit) {
    injection.validate(circuit);
    EffectiveSupport out;
    for (size_t n : circuit.block_lengths) {
        out.x.emplace_back(n);
        out.z.emplace_back(n);
    }
    for (const auto &f : injection.faults) {
        auto hit = [&](const Loc &loc, size_t k) {
            if (f.pauli.x.get(k)) {
                out.x[loc.block].flip(loc.qubit);
            }
            if (f.pauli.z.get(k)) {
                out.z[loc.block].flip(loc.qubit);
            }
        };
        if (f.gate == InjectedFault::kIdle) {
            hit(f.idle, 0);
            continue;
        }
        const Gate &g = circuit.steps[f.step][f.gate];
        if (g.is_measurement()) {
            // A flipped readout is not a Pauli on the qubit's support.
            continue;
        }
        hit(g.a, 0);
        if (g.kind == GateKind::kCnot) {
            hit(g.b, 1);
        }
    }
    return out;
}

namespace {

struct EncoderPlan {
    /// Pivot qubit of each reduced row.
    std::vector<size_t> pivots;
    /// CNOTs (control, target) in dependency order.
    std::vector<std::pair<size_t, size_t>> cnots;
    /// Step of each CNOT after the preparation layer, and the depth.
    std::vector<size_t> steps;
    size_t depth = 0;
};

// Fully reduces rows, taking pivots in the given column order.
std::vector<size_t> reduce_in_order(std::vector<BitVec> &rows, const std::vector<size_t> &order) {
    std::vector<size_t> pivots;
    size_t r = 0;
    for (size_t c : order) {
        if (r == rows.size()) {
            break;
        }
        size_t k = r;
        while (k < rows.size() && !rows[k].get(c)) {
            k++;
        }
        if (k == rows.size()) {
            continue;
        }
        std::swap(rows[r], rows[k]);
        for (size_t j = 0; j < rows.size(); j++) {
            if (j != r && rows[j].get(c)) {
                rows[j] ^= rows[r];
            }
        }
        pivots.push_back(c);
        r++;
    }
    return pivots;
}

// First-fit scheduling; with `ordered` each gate follows the earlier gates on
// both of its qubits, otherwise the gates are assumed to commute.
void schedule(EncoderPlan &plan, size_t n, bool ordered) {
    std::vector<size_t> ready(n, 0);
    std::vector<std::vector<bool>> busy;
    plan.steps.clear();
    for (auto [a, b] : plan.cnots) {
        size_t s = ordered ? std::max(ready[a], ready[b]) : 0;
        while (s < busy.size() && (busy[s][a] || busy[s][b])) {
            s++;
        }
        while (s >= busy.size()) {
            busy.emplace_back(n, false);
        }
        busy[s][a] = busy[s][b] = true;
        ready[a] = ready[b] = s + 1;
        plan.steps.push_back(s);
    }
    plan.depth = busy.size();
}

EncoderPlan fanout_plan(std::vector<BitVec> rows, const std::vector<size_t> &order) {
    EncoderPlan plan;
    plan.pivots = reduce_in_order(rows, order);
    for (size_t r = 0; r < plan.pivots.size(); r++) {
        for (size_t t : rows[r].ones()) {
            if (t != plan.pivots[r]) {
                plan.cnots.emplace_back(plan.pivots[r], t);
            }
        }
    }
    return plan;
}

size_t xor_weight(const BitVec &a, const BitVec &b) {
    size_t w = 0;
    for (size_t k = 0; k < a.num_words(); k++) {
        w += std::popcount(a.words()[k] ^ b.words()[k]);
    }
    return w;
}

// Works backwards from the target state. Undoing CNOT a->b adds column a to
// column b of the X-generator matrix; once only rank-many columns are nonzero
// the state is a product of |+> (those columns) and |0>. Greedy: apply the op
// that lowers the column weight most, breaking ties at random.
std::optional<EncoderPlan> greedy_plan(
    std::vector<BitVec> rows, const std::vector<size_t> &order, size_t n, size_t max_ops, std::mt19937_64 &rng) {
    reduce_in_order(rows, order);
    const size_t rank = rows.size();
    std::vector<BitVec> col(n, BitVec(rank));
    for (size_t r = 0; r < rank; r++) {
        for (size_t q : rows[r].ones()) {
            col[q].set(r, true);
        }
    }
    size_t nonzero = 0;
    for (const auto &c : col) {
        nonzero += c.any();
    }
    std::vector<std::pair<size_t, size_t>> undo;
    std::vector<std::pair<size_t, size_t>> ties;
    while (nonzero > rank) {
        if (undo.size() == max_ops) {
            return std::nullopt;
        }
        ptrdiff_t best = PTRDIFF_MAX;
        ties.clear();
        for (size_t a = 0; a < n; a++) {
            if (col[a].none()) {
                continue;
            }
            for (size_t b = 0; b < n; b++) {
                if (a == b || col[b].none()) {
                    continue;
                }
                ptrdiff_t d = static_cast<ptrdiff_t>(xor_weight(col[a], col[b])) -
                              static_cast<ptrdiff_t>(col[b].popcount());
                if (d < best) {
                    best = d;
                    ties.clear();
                }
                if (d == best) {
                    ties.emplace_back(a, b);
                }
            }
        }
        auto [a, b] = ties[std::uniform_int_distribution<size_t>(0, ties.size() - 1)(rng)];
        col[b] ^= col[a];
        nonzero -= col[b].none();
        undo.emplace_back(a, b);
    }
    EncoderPlan plan;
    for (size_t q = 0; q < n; q++) {
        if (col[q].any()) {
            plan.pivots.push_back(q);
        }
    }
    plan.cnots.assign(undo.rbegin(), undo.rend());
    return plan;
}

}  // namespace

Circuit synth_encoding_circuit(const AncillaSpec &spec, EncoderStyle style) {
    if (!spec.is_css_type()) {
        throw std::invalid_argument(
            "ancilla '" + spec.kind_name() + "' is not preparable with CNOT + |0>/|+> encoding (non-CSS stabilizers)");
    }
    size_t n = spec.num_qubits;
    std::vector<BitVec> x_rows;
    for (const auto &p : spec.all_elements()) {
        if (p.is_x_type()) {
            x_rows.push_back(p.x);
        }
    }
    if (rank(BitMatrix::from_rows(x_rows, n)) != x_rows.size()) {
        throw std::invalid_argument("degenerate ancilla spec: dependent X-type generators");
    }
    std::vector<size_t> order(n);
    for (size_t q = 0; q < n; q++) {
        order[q] = q;
    }
    EncoderPlan plan;
    if (style == EncoderStyle::kFanout) {
        plan = fanout_plan(x_rows, order);
        schedule(plan, n, false);
    } else {
        // The fan-out circuit is the fallback; the seed is fixed so the circuit
        // is a deterministic function of the ancilla spec.
        plan = fanout_plan(x_rows, order);
        schedule(plan, n, true);
        std::mt19937_64 rng(0x5eed);
        constexpr size_t kCandidates = 256;
        for (size_t i = 0; i < kCandidates; i++) {
            std::shuffle(order.begin(), order.end(), rng);
            auto cand = greedy_plan(x_rows, order, n, plan.cnots.size(), rng);
            if (!cand) {
                continue;
            }
            schedule(*cand, n, true);
            if (cand->cnots.size() < plan.cnots.size() ||
                (cand->cnots.size() == plan.cnots.size() && cand->depth < plan.depth)) {
                plan = std::move(*cand);
            }
        }
    }
    std::vector<Loc> loc(n);
    for (size_t b = 0; b < spec.num_blocks(); b++) {
        for (size_t q = 0; q < spec.blocks[b]->n(); q++) {
            loc[spec.offsets[b] + q] = {static_cast<uint32_t>(b), static_cast<uint32_t>(q)};
        }
    }
    Circuit c(spec.block_lengths());
    std::vector<bool> is_pivot(n, false);
    for (size_t p : plan.pivots) {
        is_pivot[p] = true;
    }
    for (size_t q = 0; q < n; q++) {
        c.add(0, Gate{is_pivot[q] ? GateKind::kPrepX : GateKind::kPrepZ, loc[q], {}});
    }
    for (size_t i = 0; i < plan.cnots.size(); i++) {
        auto [a, b] = plan.cnots[i];
        c.add(plan.steps[i] + 1, Gate{GateKind::kCnot, loc[a], loc[b]});
    }
    c.validate();
    return c;
}

std::vector<PauliString> circuit_output_stabilizers(const Circuit &circuit) {
    std::vector<PauliString> out;
    for (size_t s = 0; s < circuit.steps.size(); s++) {
        for (const auto &g : circuit.steps[s]) {
            if (!g.is_prep()) {
                continue;
            }
            PauliFrame frame(circuit.block_lengths);
            (g.kind == GateKind::kPrepZ ? frame.f : frame.e)[g.a.block].set(g.a.qubit, true);
            for (size_t s2 = s + 1; s2 < circuit.steps.size(); s2++) {
                for (const auto &h : circuit.steps[s2]) {
                    if (!h.is_prep()) {
                        apply_gate(frame, h);
                    }
                }
            }
            out.push_back(frame.flatten());
        }
    }
    return out;
}

CompiledCircuit::CompiledCircuit(Circuit circuit, bool with_idle_sites) : circuit_(std::move(circuit)) {
    circuit_.validate();
    const size_t nb = circuit_.num_blocks();
    for (size_t n : circuit_.block_lengths) {
        if (n > 64) {
            throw std::invalid_argument("compiled circuits require block lengths <= 64");
        }
    }
    std::vector<uint64_t> state(3 * nb);
    auto unit = [&](const Loc &loc, bool z) {
        std::fill(state.begin(), state.end(), 0);
        state[(z ? nb : 0) + loc.block] = uint64_t{1} << loc.qubit;
    };

    input_effects_.resize(nb);
    for (size_t b = 0; b < nb; b++) {
        for (size_t q = 0; q < circuit_.block_lengths[b]; q++) {
            std::array<Span, 2> spans{};
            for (int z = 0; z < 2; z++) {
                unit({uint32_t(b), uint32_t(q)}, z);
                simulate_from(0, state);
                spans[z] = record_effect(state);
            }
            input_effects_[b].push_back(spans);
        }
    }

    // Liveness for idle sites: a qubit is alive from its first gate (or from
    // the start when its first gate is not a preparation) until measured.
    std::vector<std::vector<int64_t>> first(nb), last(nb);
    for (size_t b = 0; b < nb; b++) {
        first[b].assign(circuit_.block_lengths[b], -1);
        last[b].assign(circuit_.block_lengths[b], int64_t(circuit_.steps.size()));
    }
    for (size_t s = 0; s < circuit_.steps.size(); s++) {
        for (const auto &g : circuit_.steps[s]) {
            for (const Loc *l : {&g.a, g.kind == GateKind::kCnot ? &g.b : nullptr}) {
                if (l == nullptr) {
                    continue;
                }
                auto &fs = first[l->block][l->qubit];
                if (fs < 0) {
                    fs = g.is_prep() ? int64_t(s) : 0;
                }
                if (g.is_measurement()) {
                    last[l->block][l->qubit] = int64_t(s);
                }
            }
        }
    }

    gate_site_.resize(circuit_.steps.size());
    for (size_t s = 0; s < circuit_.steps.size(); s++) {
        const auto &step = circuit_.steps[s];
        std::vector<std::vector<bool>> touched(nb);
        for (size_t b = 0; b < nb; b++) {
            touched[b].assign(circuit_.block_lengths[b], false);
        }
        for (uint32_t g = 0; g < step.size(); g++) {
            const Gate &gate = step[g];
            touched[gate.a.block][gate.a.qubit] = true;
            SiteClass cls;
            if (gate.kind == GateKind::kCnot) {
                touched[gate.b.block][gate.b.qubit] = true;
                cls = SiteClass::kTwoQubit;
            } else if (gate.is_measurement()) {
                cls = SiteClass::kMeasure;
            } else {
                cls = SiteClass::kOneQubit;
            }
            auto ci = static_cast<size_t>(cls);
            gate_site_[s].emplace_back(cls, uint32_t(sites_[ci].size()));
            sites_[ci].push_back(FaultSite{cls, uint32_t(s), g, gate.a, gate.b});
            if (cls == SiteClass::kMeasure) {
                std::fill(state.begin(), state.end(), 0);
                state[2 * nb + gate.a.block] = uint64_t{1} << gate.a.qubit;
                site_effects_[ci].push_back(record_effect(state));
                continue;
            }
            std::vector<std::pair<Loc, bool>> comps{{gate.a, false}, {gate.a, true}};
            if (cls == SiteClass::kTwoQubit) {
                comps.push_back({gate.b, false});
                comps.push_back({gate.b, true});
            }
            for (auto [loc, z] : comps) {
                unit(loc, z);
                simulate_from(s + 1, state);
                site_effects_[ci].push_back(record_effect(state));
            }
        }
        if (!with_idle_sites) {
            continue;
        }
        for (uint32_t b = 0; b < nb; b++) {
            for (uint32_t q = 0; q < circuit_.block_lengths[b]; q++) {
                int64_t f = first[b][q];
                if (touched[b][q] || f < 0 || int64_t(s) < f || int64_t(s) >= last[b][q]) {
                    continue;
                }
                auto ci = static_cast<size_t>(SiteClass::kIdle);
                idle_site_[{uint32_t(s), b, q}] = uint32_t(sites_[ci].size());
                sites_[ci].push_back(FaultSite{SiteClass::kIdle, uint32_t(s), 0, Loc{b, q}, {}});
                for (int z = 0; z < 2; z++) {
                    unit({b, q}, z);
                    simulate_from(s + 1, state);
                    site_effects_[ci].push_back(record_effect(state));
                }
            }
        }
    }
}

CompiledCircuit::Span CompiledCircuit::record_effect(const std::vector<uint64_t> &state) {
    Span span{uint32_t(terms_.size()), 0};
    for (uint32_t w = 0; w < state.size(); w++) {
        if (state[w]) {
            terms_.push_back(Term{w, state[w]});
        }
    }
    span.end = uint32_t(terms_.size());
    return span;
}

void CompiledCircuit::simulate_from(size_t step, std::vector<uint64_t> &state) const {
    const size_t nb = num_blocks();
    uint64_t *e = state.data();
    uint64_t *f = e + nb;
    uint64_t *rec = f + nb;
    for (size_t s = step; s < circuit_.steps.size(); s++) {
        for (const auto &g : circuit_.steps[s]) {
            const uint32_t ab = g.a.block, aq = g.a.qubit;
            switch (g.kind) {
                case GateKind::kCnot:
                    e[g.b.block] ^= bit_of(e[ab], aq) << g.b.qubit;
                    f[ab] ^= bit_of(f[g.b.block], g.b.qubit) << aq;
                    break;
                case GateKind::kPhase:
                    f[ab] ^= bit_of(e[ab], aq) << aq;
                    break;
                case GateKind::kPrepZ:
                case GateKind::kPrepX:
                    e[ab] &= ~(uint64_t{1} << aq);
                    f[ab] &= ~(uint64_t{1} << aq);
                    break;
                case GateKind::kMeasZ:
                    rec[ab] ^= bit_of(e[ab], aq) << aq;
                    break;
                case GateKind::kMeasX:
                    rec[ab] ^= bit_of(f[ab], aq) << aq;
                    break;
            }
        }
    }
}

void CompiledCircuit::propagate_input(const uint64_t *input_e, const uint64_t *input_f, uint64_t *state) const {
    std::fill(state, state + state_words(), 0);
    for (size_t b = 0; b < num_blocks(); b++) {
        for (int z = 0; z < 2; z++) {
            uint64_t w = z ? input_f[b] : input_e[b];
            while (w) {
                int q = std::countr_zero(w);
                w &= w - 1;
                apply_span(input_effects_[b][q][z], state);
            }
        }
    }
}

void CompiledCircuit::apply_fault(const SampledFault &fault, uint64_t *state) const {
    auto ci = static_cast<size_t>(fault.cls);
    const auto &eff = site_effects_[ci];
    switch (fault.cls) {
        case SiteClass::kTwoQubit:
            for (int c = 0; c < 4; c++) {
                if ((fault.code >> c) & 1) {
                    apply_span(eff[size_t(fault.site) * 4 + c], state);
                }
            }
            break;
        case SiteClass::kOneQubit:
        case SiteClass::kIdle:
            for (int c = 0; c < 2; c++) {
                if ((fault.code >> c) & 1) {
                    apply_span(eff[size_t(fault.site) * 2 + c], state);
                }
            }
            break;
        case SiteClass::kMeasure:
            if (fault.code & 1) {
                apply_span(eff[fault.site], state);
            }
            break;
    }
}

NoisyRun CompiledCircuit::run(const PauliFrame &input, const std::vector<SampledFault> &faults) const {
    const size_t nb = num_blocks();
    if (input.block_lengths() != circuit_.block_lengths) {
        throw std::invalid_argument("input frame does not match the circuit's blocks");
    }
    std::vector<uint64_t> in_e(nb), in_f(nb), state(state_words());
    for (size_t b = 0; b < nb; b++) {
        in_e[b] = input.e[b].word0();
        in_f[b] = input.f[b].word0();
    }
    propagate_input(in_e.data(), in_f.data(), state.data());
    for (const auto &f : faults) {
        apply_fault(f, state.data());
    }
    NoisyRun out{PauliFrame(circuit_.block_lengths), {}};
    for (size_t b = 0; b < nb; b++) {
        size_t n = circuit_.block_lengths[b];
        out.frame.e[b] = BitVec::from_word(n, state[b]);
        out.frame.f[b] = BitVec::from_word(n, state[nb + b]);
        out.records.push_back(BitVec::from_word(n, state[2 * nb + b]));
    }
    return out;
}

SampledFault CompiledCircuit::to_sampled(const InjectedFault &fault) const {
    if (fault.gate == InjectedFault::kIdle) {
        auto it = idle_site_.find({uint32_t(fault.step), fault.idle.block, fault.idle.qubit});
        if (it == idle_site_.end()) {
            throw std::invalid_argument("no idle location " + loc_str(fault.idle) + " at step " +
                                        std::to_string(fault.step));
        }
        uint8_t code = uint8_t(fault.pauli.x.get(0) | (fault.pauli.z.get(0) << 1));
        return {SiteClass::kIdle, it->second, code};
    }
    if (fault.step >= gate_site_.size() || fault.gate >= gate_site_[fault.step].size()) {
        throw std::invalid_argument("fault location out of range");
    }
    auto [cls, site] = gate_site_[fault.step][fault.gate];
    const Gate &g = circuit_.steps[fault.step][fault.gate];
    if (fault.pauli.size() != g.arity()) {
        throw std::invalid_argument("fault Pauli does not match the gate arity");
    }
    uint8_t code = 0;
    if (cls == SiteClass::kMeasure) {
        code = flips_measurement(g.kind, fault.pauli);
    } else {
        for (size_t k = 0; k < g.arity(); k++) {
            code |= uint8_t((fault.pauli.x.get(k) | (fault.pauli.z.get(k) << 1)) << (2 * k));
        }
    }
    return {cls, site, code};
}

InjectedFault CompiledCircuit::to_injected(const SampledFault &fault) const {
    const FaultSite &site = sites(fault.cls).at(fault.site);
    InjectedFault out;
    out.step = site.step;
    if (fault.cls == SiteClass::kIdle) {
        out.gate = InjectedFault::kIdle;
        out.idle = site.a;
        out.pauli = PauliString(1);
        out.pauli.x.set(0, fault.code & 1);
        out.pauli.z.set(0, (fault.code >> 1) & 1);
        return out;
    }
    out.gate = site.gate;
    const Gate &g = circuit_.steps[site.step][site.gate];
    out.pauli = PauliString(g.arity());
    if (fault.cls == SiteClass::kMeasure) {
        (g.kind == GateKind::kMeasZ ? out.pauli.x : out.pauli.z).set(0, fault.code & 1);
        return out;
    }
    for (size_t k = 0; k < g.arity(); k++) {
        out.pauli.x.set(k, (fault.code >> (2 * k)) & 1);
        out.pauli.z.set(k, (fault.code >> (2 * k + 1)) & 1);
    }
    return out;
}

void sample_faults(const CompiledCircuit &circuit, FaultStreams &streams, Rng &rng, std::vector<SampledFault> &out) {
    streams.two.scan(circuit.sites(SiteClass::kTwoQubit).size(), rng, [&](uint64_t i) {
        out.push_back({SiteClass::kTwoQubit, uint32_t(i), uint8_t(1 + rng.below(15))});
    });
    streams.one.scan(circuit.sites(SiteClass::kOneQubit).size(), rng, [&](uint64_t i) {
        out.push_back({SiteClass::kOneQubit, uint32_t(i), uint8_t(1 + rng.below(3))});
    });
    streams.meas.scan(circuit.sites(SiteClass::kMeasure).size(), rng, [&](uint64_t i) {
        out.push_back({SiteClass::kMeasure, uint32_t(i), 1});
    });
    streams.idle.scan(circuit.sites(SiteClass::kIdle).size(), rng, [&](uint64_t i) {
        out.push_back({SiteClass::kIdle, uint32_t(i), uint8_t(1 + rng.below(3))});
    });
}

FaultInjection sample_failures(const FailureModel &model, const Circuit &circuit, Rng &rng) {
    model.validate();
    CompiledCircuit compiled(circuit, model.p_mem > 0);
    FaultStreams streams(model, rng);
    std::vector<SampledFault> sampled;
    sample_faults(compiled, streams, rng, sampled);
    FaultInjection out;
    for (const auto &f : sampled) {
        out.faults.push_back(compiled.to_injected(f));
    }
    return out;
}

}  // namespace ftancilla
