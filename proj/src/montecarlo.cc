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

#include "ftancilla/montecarlo.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace ftancilla {

namespace {

constexpr uint64_t kChunk = 64;

const char *const kBinNames[kWeightBins] = {"0", "1", "2", "3", ">3"};

double ratio(uint64_t a, uint64_t b) {
    return b == 0 ? 0.0 : double(a) / double(b);
}

double log_choose(size_t n, size_t k) {
    return std::lgamma(double(n) + 1) - std::lgamma(double(k) + 1) - std::lgamma(double(n - k) + 1);
}

double binomial_term(size_t n, size_t w, double p) {
    if (p <= 0) {
        return w == 0 ? 1.0 : 0.0;
    }
    if (p >= 1) {
        return w == n ? 1.0 : 0.0;
    }
    return std::exp(log_choose(n, w) + double(w) * std::log(p) + double(n - w) * std::log1p(-p));
}

// Increasing f on [lo, hi] with f(lo) <= target <= f(hi).
template <typename F>
double bisect(F f, double target, double lo, double hi) {
    for (int it = 0; it < 2000 && hi - lo > 1e-14 * hi; it++) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

void PointStats::add(const TrialOutcome &out) {
    trials++;
    aborted += out.aborted;
    accepted += out.accepted.size();
    round1_outputs += out.round1_outputs;
    round1_rejected += out.round1_rejected;
    round2_outputs += out.round2_outputs;
    round2_rejected += out.round2_rejected;
    for (const auto &ob : out.accepted) {
        x_hist[std::min(ob.weight.x, kWeightBins - 1)]++;
        z_hist[std::min(ob.weight.z, kWeightBins - 1)]++;
    }
}

void PointStats::merge(const PointStats &other) {
    trials += other.trials;
    aborted += other.aborted;
    accepted += other.accepted;
    round1_outputs += other.round1_outputs;
    round1_rejected += other.round1_rejected;
    round2_outputs += other.round2_outputs;
    round2_rejected += other.round2_rejected;
    for (size_t w = 0; w < kWeightBins; w++) {
        x_hist[w] += other.x_hist[w];
        z_hist[w] += other.z_hist[w];
    }
}

double PointStats::r1() const {
    return ratio(round1_rejected, round1_outputs);
}

double PointStats::r2() const {
    return ratio(round2_rejected, round2_outputs);
}

double PointStats::r_ft() const {
    return 1 - (1 - r1()) * (1 - r2());
}

size_t default_threads() {
    if (const char *env = std::getenv("FTANCILLA_THREADS")) {
        char *end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return size_t(v);
        }
    }
    return std::max<size_t>(1, std::thread::hardware_concurrency());
}

RunStats run_experiment(const Distiller &distiller, const ExperimentOptions &options) {
    if (options.trials == 0) {
        throw std::invalid_argument("trials must be at least 1");
    }
    const DistillationConfig &cfg = distiller.config();
    RunStats stats;
    stats.label = options.label;
    stats.seed = options.seed;
    stats.n = cfg.spec.num_qubits;
    stats.t = SIZE_MAX;
    for (const auto &b : cfg.spec.blocks) {
        stats.t = std::min({stats.t, b->cz().t(), b->cx().t()});
    }
    stats.n_c1 = cfg.cc1->n();
    stats.k_c1 = cfg.cc1->k();
    stats.n_c2 = cfg.cc2->n();
    stats.k_c2 = cfg.cc2->k();

    const size_t threads = options.threads ? options.threads : default_threads();
    for (size_t pi = 0; pi < options.p_grid.size(); pi++) {
        const double p = options.p_grid[pi];
        FailureModel model{p, p, p * options.mem_ratio};
        model.validate();
        const uint64_t chunks = (options.trials + kChunk - 1) / kChunk;
        std::atomic<uint64_t> next{0};
        std::vector<PointStats> partial(std::min<uint64_t>(threads, chunks));
        auto worker = [&](PointStats &acc) {
            TrialOutcome out;
            for (uint64_t c; (c = next.fetch_add(1)) < chunks;) {
                uint64_t end = std::min(options.trials, (c + 1) * kChunk);
                for (uint64_t j = c * kChunk; j < end; j++) {
                    Rng rng = Rng::for_stream(options.seed, pi, j);
                    distiller.run(model, rng, out);
                    acc.add(out);
                }
            }
        };
        if (partial.size() <= 1) {
            partial.resize(1);
            worker(partial[0]);
        } else {
            std::vector<std::thread> pool;
            for (size_t w = 1; w < partial.size(); w++) {
                pool.emplace_back(worker, std::ref(partial[w]));
            }
            worker(partial[0]);
            for (auto &th : pool) {
                th.join();
            }
        }
        PointStats total;
        for (const auto &ps : partial) {
            total.merge(ps);
        }
        total.p = p;
        stats.points.push_back(total);
    }
    return stats;
}

std::pair<double, double> wilson_ci(uint64_t k, uint64_t n, double z) {
    if (n == 0) {
        throw std::invalid_argument("wilson_ci: no trials");
    }
    double ph = double(k) / double(n);
    double z2 = z * z;
    double denom = 1 + z2 / double(n);
    double center = (ph + z2 / (2 * double(n))) / denom;
    double half = z * std::sqrt(ph * (1 - ph) / double(n) + z2 / (4 * double(n) * double(n))) / denom;
    double lo = k == 0 ? 0.0 : std::max(0.0, center - half);
    double hi = k == n ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

double binomial_tail(size_t n, size_t t, double p) {
    double sum = 0;
    for (size_t w = t + 1; w <= n; w++) {
        sum += binomial_term(n, w, p);
    }
    return sum;
}

double binomial_point(size_t n, size_t t, double p) {
    if (t > n) {
        return 0;
    }
    return binomial_term(n, t, p);
}

double effective_rate(double prob, size_t n, size_t t, RateKind kind) {
    if (!(prob >= 0)) {
        throw std::domain_error("effective_rate: probability must be >= 0");
    }
    if (prob == 0) {
        return 0;
    }
    if (kind == RateKind::kTail) {
        if (t >= n || prob >= 1) {
            throw std::domain_error("effective_rate: tail probability out of range");
        }
        return bisect([&](double p) { return binomial_tail(n, t, p); }, prob, 0.0, 1.0);
    }
    if (t == 0 || t > n) {
        throw std::domain_error("effective_rate: point kind needs 1 <= t <= n");
    }
    double mode = double(t) / double(n);
    double max_prob = binomial_point(n, t, mode);
    if (prob > max_prob * (1 + 1e-12)) {
        throw std::domain_error("effective_rate: point probability above its maximum " + std::to_string(max_prob));
    }
    return bisect([&](double p) { return binomial_point(n, t, p); }, std::min(prob, max_prob), 0.0, mode);
}

FitResult slope_fit(const std::vector<std::pair<double, double>> &points) {
    if (points.size() < 2) {
        throw std::invalid_argument("slope_fit: needs at least 2 points");
    }
    double sx = 0, sy = 0;
    for (const auto &[p, v] : points) {
        if (!(p > 0) || !(v > 0)) {
            throw std::invalid_argument("slope_fit: values must be positive");
        }
        sx += std::log(p);
        sy += std::log(v);
    }
    const double m = double(points.size());
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (const auto &[p, v] : points) {
        double dx = std::log(p) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(v) - my);
    }
    if (sxx == 0) {
        throw std::invalid_argument("slope_fit: needs distinct p values");
    }
    FitResult fit;
    fit.points = points.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (points.size() > 2) {
        double ssr = 0;
        for (const auto &[p, v] : points) {
            double r = std::log(v) - (fit.intercept + fit.slope * std::log(p));
            ssr += r * r;
        }
        fit.stderr_slope = std::sqrt(ssr / (m - 2) / sxx);
    }
    return fit;
}

Yields yields(const RunStats &stats, const PointStats &point, size_t t, double r_naive) {
    Yields y;
    double rate = ratio(stats.k_c1 * stats.k_c2, stats.n_c1 * stats.n_c2);
    y.ft = rate * (1 - point.r1()) * (1 - point.r2());
    y.naive = (1 - r_naive) / double(t * t + t);
    return y;
}

std::vector<MetricRow> point_metrics(const RunStats &stats, size_t index) {
    const PointStats &pt = stats.points.at(index);
    std::vector<MetricRow> rows;
    auto fraction = [&](const std::string &name, uint64_t k, uint64_t n) {
        MetricRow row;
        row.p = pt.p;
        row.metric = name;
        row.count = k;
        if (n > 0) {
            row.value = ratio(k, n);
            std::tie(row.ci_lo, row.ci_hi) = wilson_ci(k, n);
        }
        rows.push_back(row);
        return row;
    };
    for (size_t w = 0; w < kWeightBins; w++) {
        fraction(std::string("P_X(") + kBinNames[w] + ")", pt.x_hist[w], pt.accepted);
    }
    for (size_t w = 0; w < kWeightBins; w++) {
        fraction(std::string("P_Z(") + kBinNames[w] + ")", pt.z_hist[w], pt.accepted);
    }
    fraction("R1", pt.round1_rejected, pt.round1_outputs);
    fraction("R2", pt.round2_rejected, pt.round2_outputs);
    fraction("abort", pt.aborted, pt.trials);

    MetricRow rft;
    rft.p = pt.p;
    rft.metric = "R_FT";
    rft.count = pt.round1_rejected + pt.round2_rejected;
    if (pt.round1_outputs > 0 && pt.round2_outputs > 0) {
        rft.value = pt.r_ft();
        rft.ci_lo = rft.ci_hi = *rft.value;
    }
    rows.push_back(rft);

    MetricRow yft;
    yft.p = pt.p;
    yft.metric = "yield_FT";
    yft.count = pt.accepted;
    if (pt.round1_outputs > 0 && pt.round2_outputs > 0) {
        yft.value = yields(stats, pt, stats.t).ft;
        yft.ci_lo = yft.ci_hi = *yft.value;
    }
    rows.push_back(yft);

    uint64_t prepared = pt.trials * stats.n_c1 * stats.n_c2;
    fraction("yield_accepted", pt.accepted, prepared);

    // Effective rates; the interval is the image of the Wilson interval.
    auto effective = [&](const std::string &name, uint64_t k, RateKind kind) {
        MetricRow row;
        row.p = pt.p;
        row.metric = name;
        row.count = k;
        if (pt.accepted > 0 && stats.n > stats.t && stats.t > 0) {
            auto [lo, hi] = wilson_ci(k, pt.accepted);
            double v = ratio(k, pt.accepted);
            double cap = kind == RateKind::kPoint ? binomial_point(stats.n, stats.t, double(stats.t) / double(stats.n))
                                                  : 1.0 - 1e-12;
            if (v <= cap) {
                row.value = effective_rate(v, stats.n, stats.t, kind);
                row.ci_lo = effective_rate(std::min(lo, cap), stats.n, stats.t, kind);
                row.ci_hi = effective_rate(std::min(hi, cap), stats.n, stats.t, kind);
            }
        }
        rows.push_back(row);
    };
    if (stats.t > 0) {
        uint64_t above = 0;
        for (size_t w = stats.t + 1; w < kWeightBins; w++) {
            above += pt.x_hist[w];
        }
        effective("p_eff_X", stats.t + 1 < kWeightBins ? above : 0, RateKind::kTail);
        effective("p_eff_Z", stats.t < kWeightBins ? pt.z_hist[stats.t] : 0, RateKind::kPoint);
    }
    return rows;
}

std::vector<MetricRow> all_metrics(const RunStats &stats) {
    std::vector<MetricRow> rows;
    for (size_t i = 0; i < stats.points.size(); i++) {
        auto part = point_metrics(stats, i);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

std::vector<SlopeRow> slope_fits(const RunStats &stats) {
    std::vector<std::string> names;
    for (size_t w = 1; w < kWeightBins; w++) {
        names.push_back(std::string("P_X(") + kBinNames[w] + ")");
    }
    for (size_t w = 1; w < kWeightBins; w++) {
        names.push_back(std::string("P_Z(") + kBinNames[w] + ")");
    }
    names.push_back("R1");
    names.push_back("R2");
    auto rows = all_metrics(stats);
    std::vector<SlopeRow> out;
    for (const auto &name : names) {
        std::vector<std::pair<double, double>> pts;
        for (const auto &r : rows) {
            if (r.metric == name && r.value && *r.value > 0 && r.p > 0) {
                pts.emplace_back(r.p, *r.value);
            }
        }
        std::sort(pts.begin(), pts.end());
        bool distinct = pts.size() >= 2 && pts.front().first != pts.back().first;
        if (distinct) {
            out.push_back({name, slope_fit(pts)});
        }
    }
    return out;
}

std::string metrics_csv(const std::vector<MetricRow> &rows) {
    std::ostringstream out;
    out << std::setprecision(10);
    out << "p,metric,value,ci_lo,ci_hi,count\n";
    for (const auto &r : rows) {
        out << r.p << "," << r.metric << ",";
        if (r.value) {
            out << *r.value << "," << r.ci_lo << "," << r.ci_hi;
        } else {
            out << ",,";
        }
        out << "," << r.count << "\n";
    }
    return out.str();
}

std::string slopes_csv(const std::vector<SlopeRow> &rows) {
    std::ostringstream out;
    out << std::setprecision(10);
    out << "metric,slope,intercept,stderr,points\n";
    for (const auto &r : rows) {
        out << r.metric << "," << r.fit.slope << "," << r.fit.intercept << "," << r.fit.stderr_slope << ","
            << r.fit.points << "\n";
    }
    return out.str();
}

std::string summary_table(const RunStats &stats) {
    std::ostringstream out;
    if (!stats.label.empty()) {
        out << stats.label << "\n";
    }
    const std::vector<std::string> cols = {
        "P_X(1)", "P_X(2)", "P_X(3)", "P_X(>3)", "P_Z(1)", "P_Z(2)", "P_Z(3)", "R1", "R2", "yield_FT",
        "p_eff_X", "p_eff_Z"};
    out << std::left << std::setw(10) << "p" << std::setw(10) << "trials";
    for (const auto &c : cols) {
        out << std::setw(11) << c;
    }
    out << "\n";
    for (size_t i = 0; i < stats.points.size(); i++) {
        auto rows = point_metrics(stats, i);
        std::ostringstream p;
        p << std::setprecision(3) << stats.points[i].p;
        out << std::setw(10) << p.str() << std::setw(10) << stats.points[i].trials;
        for (const auto &c : cols) {
            std::string cell = "-";
            for (const auto &r : rows) {
                if (r.metric == c && r.value) {
                    std::ostringstream v;
                    v << std::setprecision(3) << *r.value;
                    cell = v.str();
                }
            }
            out << std::setw(11) << cell;
        }
        out << "\n";
    }
    auto fits = slope_fits(stats);
    if (!fits.empty()) {
        out << "slopes:";
        for (const auto &f : fits) {
            std::ostringstream v;
            v << std::setprecision(3) << f.fit.slope;
            out << " " << f.metric << "=" << v.str();
        }
        out << "\n";
    }
    return out.str();
}

std::string stats_to_json(const RunStats &stats) {
    using nlohmann::json;
    json j;
    j["label"] = stats.label;
    j["n"] = stats.n;
    j["t"] = stats.t;
    j["n_c1"] = stats.n_c1;
    j["k_c1"] = stats.k_c1;
    j["n_c2"] = stats.n_c2;
    j["k_c2"] = stats.k_c2;
    j["seed"] = stats.seed;
    j["points"] = json::array();
    for (size_t i = 0; i < stats.points.size(); i++) {
        const PointStats &pt = stats.points[i];
        json jp;
        jp["p"] = pt.p;
        jp["trials"] = pt.trials;
        jp["aborted"] = pt.aborted;
        jp["accepted"] = pt.accepted;
        jp["round1_outputs"] = pt.round1_outputs;
        jp["round1_rejected"] = pt.round1_rejected;
        jp["round2_outputs"] = pt.round2_outputs;
        jp["round2_rejected"] = pt.round2_rejected;
        jp["x_hist"] = pt.x_hist;
        jp["z_hist"] = pt.z_hist;
        json metrics = json::object();
        for (const auto &r : point_metrics(stats, i)) {
            json m;
            m["value"] = r.value ? json(*r.value) : json(nullptr);
            m["ci_lo"] = r.ci_lo;
            m["ci_hi"] = r.ci_hi;
            m["count"] = r.count;
            metrics[r.metric] = m;
        }
        jp["metrics"] = metrics;
        j["points"].push_back(jp);
    }
    j["slopes"] = json::object();
    for (const auto &s : slope_fits(stats)) {
        j["slopes"][s.metric] = {{"slope", s.fit.slope}, {"intercept", s.fit.intercept},
                                 {"stderr", s.fit.stderr_slope}, {"points", s.fit.points}};
    }
    return j.dump(2) + "\n";
}

RunStats stats_from_json(const std::string &text) {
    using nlohmann::json;
    RunStats stats;
    try {
        json j = json::parse(text);
        stats.label = j.value("label", "");
        stats.n = j.at("n").get<size_t>();
        stats.t = j.at("t").get<size_t>();
        stats.n_c1 = j.at("n_c1").get<size_t>();
        stats.k_c1 = j.at("k_c1").get<size_t>();
        stats.n_c2 = j.at("n_c2").get<size_t>();
        stats.k_c2 = j.at("k_c2").get<size_t>();
        stats.seed = j.value("seed", uint64_t{0});
        for (const auto &jp : j.at("points")) {
            PointStats pt;
            pt.p = jp.at("p").get<double>();
            pt.trials = jp.at("trials").get<uint64_t>();
            pt.aborted = jp.at("aborted").get<uint64_t>();
            pt.accepted = jp.at("accepted").get<uint64_t>();
            pt.round1_outputs = jp.at("round1_outputs").get<uint64_t>();
            pt.round1_rejected = jp.at("round1_rejected").get<uint64_t>();
            pt.round2_outputs = jp.at("round2_outputs").get<uint64_t>();
            pt.round2_rejected = jp.at("round2_rejected").get<uint64_t>();
            pt.x_hist = jp.at("x_hist").get<std::array<uint64_t, kWeightBins>>();
            pt.z_hist = jp.at("z_hist").get<std::array<uint64_t, kWeightBins>>();
            uint64_t sx = 0, sz = 0;
            for (size_t w = 0; w < kWeightBins; w++) {
                sx += pt.x_hist[w];
                sz += pt.z_hist[w];
            }
            if (sx != pt.accepted || sz != pt.accepted) {
                throw std::invalid_argument("histogram counts do not sum to the accepted count");
            }
            stats.points.push_back(pt);
        }
    } catch (const nlohmann::json::exception &e) {
        throw std::invalid_argument(std::string("results file: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw std::invalid_argument(std::string("results file: ") + e.what());
    }
    return stats;
}

}  // namespace ftancilla
