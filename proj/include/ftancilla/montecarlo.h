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

#ifndef FTANCILLA_MONTECARLO_H
#define FTANCILLA_MONTECARLO_H

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ftancilla/distillation.h"

namespace ftancilla {

/// Residual weight classes 0, 1, 2, 3 and "> 3".
constexpr size_t kWeightBins = 5;

/// Integer counters of one grid point. Merging is a plain sum, so results do
/// not depend on how trials were split over workers.
struct PointStats {
    double p = 0;
    uint64_t trials = 0;
    uint64_t aborted = 0;
    uint64_t accepted = 0;
    uint64_t round1_outputs = 0;
    uint64_t round1_rejected = 0;
    uint64_t round2_outputs = 0;
    uint64_t round2_rejected = 0;
    std::array<uint64_t, kWeightBins> x_hist{};
    std::array<uint64_t, kWeightBins> z_hist{};

    void add(const TrialOutcome &out);
    void merge(const PointStats &other);
    double r1() const;
    double r2() const;
    /// 1 - (1 - R1)(1 - R2).
    double r_ft() const;
    bool operator==(const PointStats &other) const = default;
};

struct RunStats {
    std::string label;
    /// Qubits and correctable weight used by the effective rates.
    size_t n = 0;
    size_t t = 0;
    size_t n_c1 = 0, k_c1 = 0, n_c2 = 0, k_c2 = 0;
    uint64_t seed = 0;
    std::vector<PointStats> points;
    bool operator==(const RunStats &other) const = default;
};

struct ExperimentOptions {
    std::vector<double> p_grid;
    uint64_t trials = 1000;
    uint64_t seed = 0;
    /// 0: FTANCILLA_THREADS if set, else the hardware concurrency.
    size_t threads = 0;
    /// Memory fault rate as a multiple of p (0 disables idle faults).
    double mem_ratio = 0;
    std::string label;
};

/// FTANCILLA_THREADS or the hardware concurrency (at least 1).
size_t default_threads();

/// Trial (p index i, trial j) uses Rng::for_stream(seed, i, j) with gate and
/// measurement fault rate p.
RunStats run_experiment(const Distiller &distiller, const ExperimentOptions &options);

/// Wilson score interval for k successes out of n.
std::pair<double, double> wilson_ci(uint64_t k, uint64_t n, double z = 1.96);

enum class RateKind : uint8_t { kTail, kPoint };

/// sum_{w > t} C(n, w) p^w (1 - p)^(n - w).
double binomial_tail(size_t n, size_t t, double p);
/// C(n, t) p^t (1 - p)^(n - t).
double binomial_point(size_t n, size_t t, double p);

/// Rate p reproducing P under the binomial model: the tail above t, or the
/// point mass at t (restricted to p <= t / n, where it is increasing). Throws
/// std::domain_error if P is out of range.
double effective_rate(double prob, size_t n, size_t t, RateKind kind);

struct FitResult {
    double slope = 0;
    double intercept = 0;
    double stderr_slope = 0;
    size_t points = 0;
};

/// Least squares of log P against log p; needs >= 2 points with P > 0.
FitResult slope_fit(const std::vector<std::pair<double, double>> &points);

struct Yields {
    double ft = 0;
    double naive = 0;
};

/// Yield_FT = k_c1 k_c2 / (n_c1 n_c2) (1 - R1)(1 - R2) and the naive scheme's
/// (1 - R_naive) / (t^2 + t).
Yields yields(const RunStats &stats, const PointStats &point, size_t t, double r_naive = 0);

/// One reported quantity at one grid point. An absent value (no accepted
/// blocks) is reported as such rather than as zero.
struct MetricRow {
    double p = 0;
    std::string metric;
    std::optional<double> value;
    double ci_lo = 0;
    double ci_hi = 0;
    uint64_t count = 0;
};

std::vector<MetricRow> point_metrics(const RunStats &stats, size_t index);
std::vector<MetricRow> all_metrics(const RunStats &stats);

struct SlopeRow {
    std::string metric;
    FitResult fit;
};

/// Fits for the weight classes and rejection rates over all points where the
/// metric is present and positive.
std::vector<SlopeRow> slope_fits(const RunStats &stats);

std::string metrics_csv(const std::vector<MetricRow> &rows);
std::string slopes_csv(const std::vector<SlopeRow> &rows);
std::string summary_table(const RunStats &stats);

std::string stats_to_json(const RunStats &stats);
/// Throws std::invalid_argument on malformed input.
RunStats stats_from_json(const std::string &text);

}  // namespace ftancilla

#endif
