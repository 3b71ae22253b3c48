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

#include <gtest/gtest.h>

#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>

using namespace ftancilla;

namespace {

const AncillaSpec &golay_zero() {
    static const AncillaSpec spec = build_ancilla_spec({quantum_registry("golay23")}, AncillaKind::kZero);
    return spec;
}

DistillationConfig config(const std::string &cc, PostselectMode ps) {
    DistillationConfig cfg;
    cfg.spec = golay_zero();
    cfg.cc1 = cfg.cc2 = registry(cc);
    cfg.ps1 = cfg.ps2 = ps;
    cfg.cd1 = registry("golay23");
    cfg.cd2 = registry("golay23_dual");
    return cfg;
}

// Parities of a frame with the elements of one round.
BitVec round_syndrome(const AncillaSpec &spec, size_t round, const PauliFrame &frame) {
    PauliString flat = frame.flatten();
    BitVec s(spec.rounds[round].size());
    for (size_t c = 0; c < s.size(); c++) {
        s.set(c, flat.anticommutes(spec.rounds[round][c].op));
    }
    return s;
}

PauliFrame x_error(const std::vector<size_t> &qubits) {
    PauliFrame f({23});
    for (size_t q : qubits) {
        f.e[0].set(q, true);
    }
    return f;
}

std::string read_file(const std::string &path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(distillation, postselect_mode_names) {
    EXPECT_STREQ(postselect_mode_name(PostselectMode::kNone), "none");
    EXPECT_STREQ(postselect_mode_name(PostselectMode::kCode), "code");
    EXPECT_STREQ(postselect_mode_name(PostselectMode::kIdeal), "ideal");
}

TEST(distillation, round_circuit_rep3_topology) {
    LinearCode cc = registry("rep3")->systematic();
    Circuit c = build_round_circuit(cc.a(), CheckBasis::kZ, 23);
    c.validate();
    ASSERT_EQ(c.num_blocks(), 3u);
    EXPECT_EQ(c.count(GateKind::kCnot), 46u);
    EXPECT_EQ(c.count(GateKind::kMeasZ), 46u);
    EXPECT_EQ(c.count(GateKind::kMeasX), 0u);
    ASSERT_GE(c.steps.size(), 2u);
    for (const Gate &g : c.steps[0]) {
        ASSERT_EQ(g.kind, GateKind::kCnot);
        EXPECT_EQ(g.a.block, 2u);
        EXPECT_EQ(g.b.block, 0u);
    }
    for (const Gate &g : c.steps[1]) {
        if (g.kind == GateKind::kCnot) {
            EXPECT_EQ(g.a.block, 2u);
            EXPECT_EQ(g.b.block, 1u);
        }
    }
}

TEST(distillation, round_circuit_empty) {
    Circuit c = build_round_circuit(BitMatrix(0, 1), CheckBasis::kZ, 5);
    EXPECT_EQ(c.num_blocks(), 1u);
    EXPECT_EQ(c.num_gates(), 0u);
}

TEST(distillation, round_circuit_directions) {
    BitMatrix a = BitMatrix::from_rows({"1"});
    Circuit c = build_round_circuit(a, {CheckBasis::kZ, CheckBasis::kX}, {3, 2});
    c.validate();
    ASSERT_EQ(c.num_blocks(), 4u);
    size_t z_cnots = 0, x_cnots = 0;
    for (const auto &step : c.steps) {
        for (const Gate &g : step) {
            if (g.kind == GateKind::kCnot) {
                if (g.a.block == 2) {
                    EXPECT_EQ(g.b.block, 0u);
                    z_cnots++;
                } else {
                    EXPECT_EQ(g.a.block, 1u);
                    EXPECT_EQ(g.b.block, 3u);
                    x_cnots++;
                }
            } else if (g.kind == GateKind::kMeasZ) {
                EXPECT_EQ(g.a.block, 0u);
            } else {
                ASSERT_EQ(g.kind, GateKind::kMeasX);
                EXPECT_EQ(g.a.block, 1u);
            }
        }
    }
    EXPECT_EQ(z_cnots, 3u);
    EXPECT_EQ(x_cnots, 2u);
    EXPECT_EQ(c.count(GateKind::kMeasZ), 3u);
    EXPECT_EQ(c.count(GateKind::kMeasX), 2u);
}

TEST(distillation, round_circuit_transversal) {
    for (const char *name : {"hamming7", "bch15_7_5"}) {
        LinearCode cc = registry(name)->systematic();
        Circuit c = build_round_circuit(cc.a(), CheckBasis::kX, 23);
        c.validate();
        size_t ones = 0;
        for (size_t i = 0; i < cc.a().rows(); i++) {
            ones += cc.a().row(i).popcount();
        }
        EXPECT_EQ(c.count(GateKind::kCnot), 23 * ones) << name;
        EXPECT_EQ(c.count(GateKind::kMeasX), 23 * cc.r()) << name;
        for (const auto &step : c.steps) {
            for (const Gate &g : step) {
                if (g.kind == GateKind::kCnot) {
                    EXPECT_EQ(g.a.qubit, g.b.qubit);
                    // Check units are the CNOT controls in the X basis.
                    EXPECT_LT(g.a.block, cc.r());
                    EXPECT_GE(g.b.block, cc.r());
                }
            }
        }
    }
}

TEST(distillation, bch15_round_circuit_size) {
    Distiller d(config("bch15_7_5", PostselectMode::kCode));
    EXPECT_EQ(d.round_circuit(0).count(GateKind::kCnot), 690u);
    EXPECT_EQ(d.round_circuit(0).count(GateKind::kMeasZ), 184u);
    EXPECT_EQ(d.round_circuit(1).count(GateKind::kMeasX), 184u);
}

TEST(distillation, every_registry_code_is_a_valid_round_code) {
    for (const auto &entry : registry_names()) {
        auto cfg = config(entry.name, PostselectMode::kIdeal);
        if (cfg.cc1->r() > 24) {
            continue;
        }
        EXPECT_NO_THROW(Distiller d(cfg)) << entry.name;
    }
}

TEST(distillation, config_validation_messages) {
    auto expect_error = [](const DistillationConfig &cfg, const std::string &needle) {
        try {
            cfg.validate();
            ADD_FAILURE() << "no error, expected " << needle;
        } catch (const std::invalid_argument &e) {
            EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
        }
    };
    auto cfg = config("rep3", PostselectMode::kCode);
    EXPECT_NO_THROW(cfg.validate());

    auto swapped = cfg;
    std::swap(swapped.cd1, swapped.cd2);
    expect_error(swapped, "C_d1: k = 11 does not match |S1| = 12");

    auto missing = cfg;
    missing.cd2 = nullptr;
    expect_error(missing, "C_d2: missing");

    auto no_cc = cfg;
    no_cc.cc1 = nullptr;
    expect_error(no_cc, "C_c1: missing");

    auto big = cfg;
    big.cc2 = registry("golay23");
    EXPECT_NO_THROW(big.validate());

    auto bad_model = cfg;
    bad_model.model.p_gate = 1.5;
    EXPECT_THROW(bad_model.validate(), std::invalid_argument);

    auto bell = cfg;
    bell.spec = build_ancilla_spec({quantum_registry("golay23"), quantum_registry("golay23")}, AncillaKind::kBell);
    bell.ps1 = bell.ps2 = PostselectMode::kNone;
    EXPECT_NO_THROW(bell.validate());
}

TEST(distillation, extend_stabilizers) {
    std::vector<PauliString> s = {PauliString::from_str("ZZI"), PauliString::from_str("IZZ")};
    auto same = extend_stabilizers(s, nullptr);
    ASSERT_EQ(same.size(), 2u);
    EXPECT_EQ(same[0], s[0]);

    // Single parity check: S' = S_0 S_1.
    LinearCode parity = LinearCode::build(BitMatrix::from_rows({"111"}), 2);
    auto ext = extend_stabilizers(s, &parity);
    ASSERT_EQ(ext.size(), 3u);
    EXPECT_EQ(ext[0], PauliString::from_str("ZIZ"));
    EXPECT_EQ(ext[1], s[0]);
    EXPECT_EQ(ext[2], s[1]);

    // A row of A_d with a single 1 repeats an element.
    LinearCode dup = LinearCode::build(BitMatrix::from_rows({"110"}), 1);
    auto ext2 = extend_stabilizers(s, &dup);
    ASSERT_EQ(ext2.size(), 3u);
    EXPECT_EQ(ext2[0], s[0]);

    std::vector<PauliString> s1;
    for (const auto &el : golay_zero().s1()) {
        s1.push_back(el.op);
    }
    auto golay = extend_stabilizers(s1, registry("golay23").get());
    ASSERT_EQ(golay.size(), 23u);
    for (size_t i = 0; i < 12; i++) {
        EXPECT_EQ(golay[11 + i], s1[i]);
    }
    for (size_t j = 0; j < 11; j++) {
        EXPECT_TRUE(golay[j].is_z_type());
        EXPECT_FALSE(golay[j].is_identity());
    }
    EXPECT_THROW(extend_stabilizers(s1, registry("golay23_dual").get()), std::invalid_argument);
}

TEST(distillation, compute_sigma_basic) {
    std::vector<PauliString> s1;
    for (const auto &el : golay_zero().s1()) {
        s1.push_back(el.op);
    }
    std::vector<PauliFrame> records(2, PauliFrame({23}));
    EXPECT_TRUE(compute_sigma(records, s1).is_zero());

    records[1].e[0].set(7, true);
    BitMatrix sigma = compute_sigma(records, s1);
    const CssCode &css = *quantum_registry("golay23");
    EXPECT_TRUE(sigma.row(0).none());
    EXPECT_EQ(sigma.row(1), css.hz_ext().column(7));
}

TEST(distillation, sigma_of_x_on_data_qubit_zero) {
    // rep3 round over Golay |0>: an X on data qubit 0 reaches both checks.
    LinearCode cc = registry("rep3")->systematic();
    Circuit c = build_round_circuit(cc.a(), CheckBasis::kZ, 23);
    PauliFrame input({23, 23, 23});
    input.e[2].set(0, true);
    NoisyRun run = run_noisy(c, FaultInjection{}, input);
    std::vector<PauliFrame> records(2, PauliFrame({23}));
    records[0].e[0] = run.records[0];
    records[1].e[0] = run.records[1];
    std::vector<PauliString> s1;
    for (const auto &el : golay_zero().s1()) {
        s1.push_back(el.op);
    }
    BitMatrix sigma = compute_sigma(records, s1);
    EXPECT_EQ(sigma.row(0).str(), "100000000000");
    EXPECT_EQ(sigma.row(1).str(), "100000000000");
}

TEST(distillation, decode_columns_recovers_low_weight_patterns) {
    LinearCode cc = registry("bch15_7_5")->systematic();
    EXPECT_TRUE(decode_columns(BitMatrix(8, 5), cc).is_zero());
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 200; trial++) {
        BitMatrix truth(15, 6);
        for (size_t c = 0; c < 6; c++) {
            size_t w = gen() % 3;
            for (size_t k = 0; k < w; k++) {
                truth.set(gen() % 15, c, true);
            }
        }
        BitMatrix sigma = cc.h().mul(truth);
        std::vector<DecodeStatus> st;
        BitMatrix est = decode_columns(sigma, cc, &st);
        ASSERT_EQ(st.size(), 6u);
        for (size_t r = 0; r < 15; r++) {
            ASSERT_EQ(est.row(r), truth.row(r));
        }
    }
}

TEST(distillation, decode_columns_misattributes_two_check_flips) {
    // Both rep3 checks flipped look like one error on the data unit.
    LinearCode cc = registry("rep3")->systematic();
    BitMatrix sigma = BitMatrix::from_rows({"1", "1"});
    BitMatrix est = decode_columns(sigma, cc);
    EXPECT_FALSE(est.get(0, 0));
    EXPECT_FALSE(est.get(1, 0));
    EXPECT_TRUE(est.get(2, 0));
    EXPECT_THROW(decode_columns(sigma, *registry("hamming7")), std::invalid_argument);
    EXPECT_THROW(decode_columns(BitMatrix(3, 1), cc), std::invalid_argument);
}

TEST(distillation, postselect_code_mode) {
    const LinearCode &cd = *registry("golay23");
    EXPECT_EQ(postselect(BitMatrix(4, 23), &cd).popcount(), 4u);
    EXPECT_EQ(postselect(BitMatrix(4, 7), nullptr).popcount(), 4u);
    EXPECT_THROW(postselect(BitMatrix(4, 22), &cd), std::invalid_argument);

    // Consistent rows [A_d s | s] pass; up to d - 1 = 6 flipped bits fail.
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 300; trial++) {
        BitVec s = BitVec::from_word(12, gen() & 0xFFF);
        BitVec row = cd.a().mul(s).concat(s);
        BitMatrix m = BitMatrix::from_rows({row, row}, 23);
        size_t flips = 1 + gen() % 6;
        std::set<size_t> pos;
        while (pos.size() < flips) {
            pos.insert(gen() % 23);
        }
        for (size_t p : pos) {
            m.row(1).flip(p);
        }
        BitVec acc = postselect(m, &cd);
        ASSERT_TRUE(acc.get(0));
        ASSERT_FALSE(acc.get(1));
    }
}

TEST(distillation, good_patterns_always_pass) {
    // Good pattern: every nonzero row of the true syndrome array equals v.
    // Exhaustive over v and the set of faulty units, rep3 on Golay |0>.
    LinearCode cc = registry("rep3")->systematic();
    const LinearCode &cd = *registry("golay23");
    for (uint64_t v = 0; v < (1u << 12); v++) {
        BitVec vs = BitVec::from_word(12, v);
        BitVec vx = cd.a().mul(vs);
        for (uint64_t rows = 1; rows < 8; rows++) {
            BitVec s_r = cc.h().mul(BitVec::from_word(3, rows));
            BitMatrix sigma_s(2, 12), sigma_ext(2, 23);
            for (size_t i = 0; i < 2; i++) {
                if (!s_r.get(i)) {
                    continue;
                }
                for (size_t c = 0; c < 12; c++) {
                    sigma_s.set(i, c, vs.get(c));
                    sigma_ext.set(i, 11 + c, vs.get(c));
                }
                for (size_t j = 0; j < 11; j++) {
                    sigma_ext.set(i, j, vx.get(j));
                }
            }
            ASSERT_EQ(postselect_ideal(sigma_s, cc).popcount(), 3u) << v << " " << rows;
            ASSERT_EQ(postselect(decode_columns(sigma_ext, cc), &cd).popcount(), 3u) << v << " " << rows;
        }
    }
}

TEST(distillation, ideal_postselection_matches_brute_force) {
    LinearCode cc = registry("hamming7")->systematic();
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 300; trial++) {
        size_t ns = 1 + gen() % 6;
        BitMatrix sigma(3, ns);
        for (size_t i = 0; i < 3; i++) {
            for (size_t c = 0; c < ns; c++) {
                sigma.set(i, c, gen() % 3 == 0);
            }
        }
        std::vector<BitVec> leaders;
        for (size_t c = 0; c < ns; c++) {
            leaders.push_back(cc.decode(sigma.column(c)).error);
        }
        BitVec bad(7);
        for (uint64_t subset = 1; subset < (uint64_t{1} << ns); subset++) {
            BitVec col(3), expect(7);
            for (size_t c = 0; c < ns; c++) {
                if ((subset >> c) & 1) {
                    col ^= sigma.column(c);
                    expect ^= leaders[c];
                }
            }
            bad |= cc.decode(col).error ^ expect;
        }
        BitVec acc = postselect_ideal(sigma, cc);
        for (size_t j = 0; j < 7; j++) {
            ASSERT_EQ(acc.get(j), !bad.get(j)) << sigma.str();
        }
    }
}

TEST(distillation, correct_block_low_weight_x_errors) {
    const AncillaSpec &spec = golay_zero();
    RoundCorrector corr(spec, 0);
    EXPECT_EQ(corr.num_elements(), 12u);
    PauliFrame zero({23});
    EXPECT_TRUE(correct_block(spec, 0, BitVec(12), zero));
    EXPECT_TRUE(zero.is_zero());
    for (size_t a = 0; a < 23; a++) {
        for (size_t b = a; b < 23; b++) {
            for (size_t c = b; c < 23; c += 5) {
                std::set<size_t> support = {a, b, c};
                PauliFrame f = x_error(std::vector<size_t>(support.begin(), support.end()));
                ASSERT_TRUE(corr.correct(round_syndrome(spec, 0, f), f));
                ASSERT_TRUE(f.is_zero()) << a << " " << b << " " << c;
            }
        }
    }
}

TEST(distillation, correct_block_low_weight_z_errors) {
    const AncillaSpec &spec = golay_zero();
    RoundCorrector corr(spec, 1);
    EXPECT_EQ(corr.num_elements(), 11u);
    for (size_t a = 0; a < 23; a++) {
        for (size_t b = a; b < 23; b += 3) {
            PauliFrame f({23});
            f.f[0].set(a, true);
            f.f[0].flip(b);
            f.f[0].flip((a + 2 * b) % 23);
            ASSERT_TRUE(corr.correct(round_syndrome(spec, 1, f), f));
            EXPECT_EQ(residual_weight(spec, f).z, 0u);
        }
    }
}

TEST(distillation, correct_block_fixes_logical_flip) {
    const AncillaSpec &spec = golay_zero();
    const CssCode &css = *spec.blocks[0];
    PauliFrame f({23});
    f.e[0] = css.d().row(0);
    BitVec s = round_syndrome(spec, 0, f);
    EXPECT_EQ(s.str(), "000000000001");
    ASSERT_TRUE(correct_block(spec, 0, s, f));
    EXPECT_EQ(residual_weight(spec, f).x, 0u);

    // Wrong logical estimate on an otherwise clean block inserts a logical X.
    PauliFrame g({23});
    ASSERT_TRUE(correct_block(spec, 0, s, g));
    EXPECT_TRUE(round_syndrome(spec, 0, g).get(11));
}

TEST(distillation, injection_text_round_trip) {
    std::string text = "@ prep 2\n0 12 X\n@ round1 0\n0 11 XI\n3 @1:4 Z\n@round2 1\n2 0 ZZ\n";
    ProtocolInjection inj = ProtocolInjection::parse(text);
    ASSERT_EQ(inj.prep.size(), 1u);
    ASSERT_EQ(inj.round1.at(0).faults.size(), 2u);
    ASSERT_EQ(inj.round2.at(1).faults.size(), 1u);
    EXPECT_EQ(inj.round1.at(0).faults[1].gate, InjectedFault::kIdle);
    ProtocolInjection again = ProtocolInjection::parse(inj.str());
    EXPECT_EQ(again.str(), inj.str());
    EXPECT_TRUE(ProtocolInjection::parse("# nothing\n").empty());
    EXPECT_THROW(ProtocolInjection::parse("0 1 X\n"), std::invalid_argument);
    EXPECT_THROW(ProtocolInjection::parse("@ round3 0\n"), std::invalid_argument);
    EXPECT_THROW(ProtocolInjection::parse("@ sweep round1\n"), std::invalid_argument);
    EXPECT_THROW(ProtocolInjection::parse("@ prep x\n"), std::invalid_argument);
    EXPECT_THROW(ProtocolInjection::parse("@ prep 1 2\n"), std::invalid_argument);
}

TEST(distillation, injection_out_of_range) {
    Distiller d(config("rep3", PostselectMode::kNone));
    Rng rng(1);
    TrialOutcome out;
    auto inj = ProtocolInjection::parse("@ round1 5\n0 0 XI\n");
    EXPECT_THROW(d.run(rng, out, &inj), std::invalid_argument);
    auto inj2 = ProtocolInjection::parse("@ prep 15\n0 0 X\n");
    EXPECT_THROW(d.run(rng, out, &inj2), std::invalid_argument);
}

TEST(distillation, noiseless_run_outputs_clean_blocks) {
    for (auto ps : {PostselectMode::kNone, PostselectMode::kCode, PostselectMode::kIdeal}) {
        Distiller d(config("hamming7", ps));
        EXPECT_EQ(d.units_per_trial(), 63u);
        EXPECT_EQ(d.round_groups(0), 9u);
        EXPECT_EQ(d.round_groups(1), 4u);
        Rng rng(2);
        TrialOutcome out;
        d.run(rng, out);
        EXPECT_FALSE(out.aborted);
        EXPECT_EQ(out.round1_outputs, 36u);
        EXPECT_EQ(out.round1_rejected, 0u);
        EXPECT_EQ(out.round2_outputs, 16u);
        EXPECT_EQ(out.round2_rejected, 0u);
        ASSERT_EQ(out.accepted.size(), 16u);
        std::set<size_t> units;
        for (const auto &ob : out.accepted) {
            EXPECT_EQ(ob.weight.x, 0u);
            EXPECT_EQ(ob.weight.z, 0u);
            units.insert(ob.unit);
        }
        EXPECT_EQ(units.size(), 16u);
    }
}

TEST(distillation, runs_are_deterministic) {
    auto cfg = config("hamming7", PostselectMode::kCode);
    cfg.model = FailureModel::uniform(1e-3);
    Distiller d(cfg);
    for (uint64_t t = 0; t < 20; t++) {
        Rng a = Rng::for_stream(9, 0, t), b = Rng::for_stream(9, 0, t);
        TrialOutcome oa, ob;
        d.run(a, oa);
        d.run(b, ob);
        ASSERT_EQ(oa.aborted, ob.aborted);
        ASSERT_EQ(oa.round1_rejected, ob.round1_rejected);
        ASSERT_EQ(oa.accepted.size(), ob.accepted.size());
        for (size_t i = 0; i < oa.accepted.size(); i++) {
            EXPECT_EQ(oa.accepted[i].unit, ob.accepted[i].unit);
            EXPECT_EQ(oa.accepted[i].e, ob.accepted[i].e);
            EXPECT_EQ(oa.accepted[i].f, ob.accepted[i].f);
        }
    }
}

TEST(distillation, noisy_runs_reject_and_keep_counts_consistent) {
    auto cfg = config("rep3", PostselectMode::kCode);
    cfg.model = FailureModel::uniform(2e-3);
    Distiller d(cfg);
    uint64_t rejected = 0;
    for (uint64_t t = 0; t < 200; t++) {
        Rng rng = Rng::for_stream(4, 0, t);
        TrialOutcome out;
        d.run(rng, out);
        rejected += out.round1_rejected + out.round2_rejected;
        if (out.aborted) {
            continue;
        }
        EXPECT_EQ(out.round1_outputs, 5u);
        EXPECT_EQ(out.round2_outputs, 1u);
        EXPECT_EQ(out.accepted.size(), out.round2_outputs - out.round2_rejected);
    }
    EXPECT_GT(rejected, 0u);
}

TEST(distillation, benign_single_cnot_faults) {
    for (const char *cc : {"rep3", "bch15_7_5"}) {
        for (auto ps : {PostselectMode::kNone, PostselectMode::kCode}) {
            SweepReport rep = single_fault_sweep(config(cc, ps));
            size_t cnots = Distiller(config(cc, ps)).round_circuit(0).count(GateKind::kCnot);
            EXPECT_EQ(rep.cases, cnots * 15) << cc;
            EXPECT_EQ(rep.passed, rep.cases) << cc << ": " << (rep.failures.empty() ? "" : rep.failures[0]);
        }
    }
}

TEST(distillation, faults_on_data_cnots_leave_their_qubits) {
    // X faults on the controls of the first CNOT layer of rep3 group 2: each
    // error reaches check 1 only, so the decoder blames check 1 and the data
    // unit keeps X exactly on the faulty qubits.
    auto cfg = config("rep3", PostselectMode::kNone);
    cfg.perfect_prep = true;
    Distiller d(cfg);
    auto inj = ProtocolInjection::parse("@ round1 2\n0 1 XI\n0 5 XI\n0 9 XI\n");
    EffectiveSupport qe = effective_support(inj.round1.at(2), d.round_circuit(0));
    EXPECT_EQ(qe.x[2].str(), x_error({1, 5, 9}).e[0].str());

    Rng rng(0);
    TrialOutcome out;
    ProtocolTrace trace;
    d.run(rng, out, &inj, &trace);
    const RoundTrace *rt = nullptr;
    for (const auto &r : trace.rounds) {
        if (r.round == 0 && r.group == 2) {
            rt = &r;
        }
    }
    ASSERT_NE(rt, nullptr);
    EXPECT_TRUE(rt->sigma.row(0).none());
    EXPECT_TRUE(rt->sigma.row(1).any());
    EXPECT_TRUE(rt->se_hat.row(2).none());
    ASSERT_EQ(rt->outputs.size(), 1u);
    EXPECT_EQ(rt->outputs[0].e[0], qe.x[2]);
    ASSERT_EQ(out.accepted.size(), 1u);
    EXPECT_EQ(out.accepted[0].unit, 8u);
    EXPECT_EQ(out.accepted[0].weight.x, 3u);
    EXPECT_NE(trace.str().find("round1 group 2 units 6 7 8"), std::string::npos);
}

TEST(distillation, two_fault_scenario_without_postselection) {
    auto inj = ProtocolInjection::parse(read_file(std::string(FTANCILLA_DATA_DIR) + "/scenarios/two_fault_no_go.txt"));
    ASSERT_FALSE(inj.empty());
    auto cfg = config("hamming7", PostselectMode::kNone);
    cfg.perfect_prep = true;
    Distiller d(cfg);
    Rng rng(0);
    TrialOutcome out;
    ProtocolTrace trace;
    d.run(rng, out, &inj, &trace);
    const RoundTrace &g0 = trace.rounds[0];
    ASSERT_EQ(g0.group, 0u);
    ASSERT_EQ(g0.units[5], 5u);
    EXPECT_EQ(g0.accepted.popcount(), 4u);
    EXPECT_EQ(d.weights().residual_weight(g0.outputs[2]).x, 4u);
    EXPECT_EQ(d.weights().residual_weight(g0.outputs[0]).x, 1u);

    // Unit 5 becomes check 0 of round-2 group 2 and spreads its error.
    std::set<size_t> heavy;
    for (const auto &ob : out.accepted) {
        if (ob.weight.x > 3) {
            heavy.insert(ob.unit);
            EXPECT_EQ(ob.group, 2u);
        }
    }
    EXPECT_EQ(heavy, (std::set<size_t>{26, 33, 47}));

    cfg.ps1 = cfg.ps2 = PostselectMode::kCode;
    Distiller ps(cfg);
    ps.run(rng, out, &inj, &trace);
    EXPECT_EQ(trace.rounds[0].accepted.str(), "1101");
    for (const auto &ob : out.accepted) {
        EXPECT_LE(ob.weight.x, 1u) << ob.unit;
    }
}

TEST(distillation, ideal_postselection_passes_two_prep_faults) {
    // rep3 corrects one faulty unit per column. The same heavy encoder fault
    // on both checks of a group is a good pattern: it passes ideal
    // postselection and is copied onto the data unit.
    auto cfg = config("rep3", PostselectMode::kIdeal);
    cfg.perfect_prep = true;
    Distiller d(cfg);
    const Circuit &prep = d.prep_circuit();
    std::optional<InjectedFault> heavy;
    for (size_t s = 0; s < prep.steps.size() && !heavy; s++) {
        for (size_t g = 0; g < prep.steps[s].size() && !heavy; g++) {
            const Gate &gate = prep.steps[s][g];
            std::vector<std::string> paulis =
                gate.kind == GateKind::kCnot ? std::vector<std::string>{"XI", "IX", "XX"} : std::vector<std::string>{"X"};
            for (const auto &p : paulis) {
                InjectedFault f{s, g, PauliString::from_str(p), {}};
                NoisyRun run = run_noisy(prep, FaultInjection{{f}});
                if (d.weights().residual_weight(run.frame).x >= 4) {
                    heavy = f;
                    break;
                }
            }
        }
    }
    ASSERT_TRUE(heavy.has_value());

    ProtocolInjection inj;
    inj.prep[6].faults.push_back(*heavy);
    inj.prep[7].faults.push_back(*heavy);
    Rng rng(0);
    TrialOutcome out;
    ProtocolTrace trace;
    d.run(rng, out, &inj, &trace);
    const RoundTrace &g2 = trace.rounds[2];
    ASSERT_EQ(g2.group, 2u);
    EXPECT_TRUE(g2.accepted.get(0));
    EXPECT_EQ(g2.sigma.row(0), g2.sigma.row(1));
    ASSERT_EQ(out.accepted.size(), 1u);
    EXPECT_EQ(out.accepted[0].unit, 8u);
    EXPECT_GT(out.accepted[0].weight.x, 3u);
}

TEST(distillation, other_ancilla_kinds_run_clean) {
    auto g = quantum_registry("golay23");
    for (auto kind : {AncillaKind::kPlus, AncillaKind::kBell}) {
        std::vector<std::shared_ptr<const CssCode>> codes(ancilla_block_count(kind), g);
        DistillationConfig cfg;
        cfg.spec = build_ancilla_spec(codes, kind);
        cfg.cc1 = cfg.cc2 = registry("rep3");
        cfg.ps1 = cfg.ps2 = PostselectMode::kIdeal;
        Distiller d(cfg);
        Rng rng(0);
        TrialOutcome out;
        d.run(rng, out);
        ASSERT_EQ(out.accepted.size(), 1u);
        EXPECT_EQ(out.accepted[0].weight.x, 0u);
        EXPECT_EQ(out.accepted[0].weight.z, 0u);
        EXPECT_EQ(out.accepted[0].e.size(), codes.size());
    }
}

TEST(distillation, steane_extraction_syndromes) {
    const CssCode &css = *quantum_registry("golay23");
    PauliFrame zero({23});
    SteaneSyndrome s0 = steane_extract(zero, zero, zero, css);
    EXPECT_TRUE(s0.gz.none());
    EXPECT_TRUE(s0.gx.none());

    PauliFrame data({23});
    data.e[0].set(4, true);
    data.f[0].set(9, true);
    SteaneSyndrome s = steane_extract(data, zero, zero, css);
    EXPECT_EQ(s.gz, css.hz_ext().column(4));
    EXPECT_EQ(s.gx, css.hx_ext().column(9));

    // Ancilla errors show up the same way.
    PauliFrame xa({23});
    xa.e[0].set(4, true);
    EXPECT_EQ(steane_extract(zero, xa, zero, css).gz, css.hz_ext().column(4));
    PauliFrame za({23});
    za.f[0].set(9, true);
    EXPECT_EQ(steane_extract(zero, zero, za, css).gx, css.hx_ext().column(9));
    EXPECT_THROW(steane_extract(PauliFrame({7}), zero, zero, css), std::invalid_argument);
}
