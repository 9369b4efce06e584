// Copyright 2026 The MCL Authors
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

// Mixed-state observables of trajectory ensembles.
//
// Adaptive circuits average over everything (noise and outcomes) into one
// density matrix. U(1) circuits average over noise for a fixed script of
// unitaries and outcomes, evaluate observables per script, then average the
// observables over scripts. Charge moments of a mixture are the means of the
// members' moments, so no 2^L x 2^L matrix is ever formed.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mcl/circuits.hpp"
#include "mcl/parallel.hpp"
#include "mcl/qstate.hpp"
#include "mcl/rng.hpp"

namespace mcl {

struct Histogram {
    double lo = 0;
    double hi = 1;
    std::vector<size_t> counts;
    std::vector<double> mass;

    size_t bins() const {
        return counts.size();
    }
    double bin_width() const {
        return (hi - lo) / static_cast<double>(bins());
    }
    double bin_left(size_t i) const {
        return lo + bin_width() * static_cast<double>(i);
    }
    double bin_right(size_t i) const {
        return i + 1 == bins() ? hi : bin_left(i + 1);
    }
    size_t peak_bin() const {
        return static_cast<size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    }
};

/// Histogram on [0, hi) normalized to unit mass, with
/// hi = 1.01 * max(nominal_upper, largest value); with neither positive the
/// range is [0, 1). Values below zero (round-off) land in the first bin.
inline Histogram fluctuation_histogram(std::span<const double> values, size_t n_bins = 20,
                                       double nominal_upper = 0) {
    if (n_bins == 0) {
        throw std::invalid_argument("fluctuation_histogram: need at least one bin");
    }
    Histogram h;
    h.counts.assign(n_bins, 0);
    h.mass.assign(n_bins, 0.0);
    double vmax = nominal_upper;
    for (double v : values) {
        vmax = std::max(vmax, v);
    }
    h.hi = vmax > 0 ? vmax * 1.01 : 1.0;
    if (!(h.hi > h.lo)) {
        throw std::invalid_argument("fluctuation_histogram: empty range");
    }
    double w = h.bin_width();
    for (double v : values) {
        double pos = std::floor((v - h.lo) / w);
        size_t b = pos <= 0 ? 0 : std::min(n_bins - 1, static_cast<size_t>(pos));
        ++h.counts[b];
    }
    if (!values.empty()) {
        for (size_t i = 0; i < n_bins; ++i) {
            h.mass[i] = static_cast<double>(h.counts[i]) / static_cast<double>(values.size());
        }
    }
    return h;
}

/// Tr(rho^2) of the uniform mixture of `states`:
/// (1/N^2) sum_ij |<psi_i|psi_j>|^2.
inline double purity_from_overlaps(std::span<const StateVector> states) {
    if (states.empty()) {
        throw std::invalid_argument("purity_from_overlaps: need at least one state");
    }
    const size_t n = states.size();
    detail::CompensatedSum acc;
    for (size_t i = 0; i < n; ++i) {
        acc.add(std::norm(overlap(states[i], states[i])));
        for (size_t j = i + 1; j < n; ++j) {
            acc.add(2 * std::norm(overlap(states[i], states[j])));
        }
    }
    return acc.value() / static_cast<double>(n * n);
}

struct EnsembleOptions {
    size_t workers = 1;
    bool retain_states = false;
};

struct EnsembleMetadata {
    CircuitConfig config;
    size_t runs = 0;           // adaptive trajectories
    size_t scripts = 0;        // U(1) circuit scripts requested
    size_t noise_reps = 0;     // U(1) noise realizations per script
    size_t discarded = 0;      // replays dropped on a zero-probability branch
    size_t dropped_scripts = 0;
    size_t window_begin = 0;   // steady-state window, inclusive layer indices
    size_t window_end = 0;
};

struct EnsembleResult {
    std::vector<double> n_bar;          // order parameter of the mixture, per layer
    std::vector<double> fluct;          // <Q^2> - <Q>^2 of the mixture, per layer
    std::vector<double> mean_variance;  // mean per-trajectory variance, per layer
    double steady_n = 0;
    double steady_fluct = 0;
    std::optional<double> purity;
    std::vector<double> script_fluct;   // U(1): per-script fluctuation at t = T
    std::vector<double> script_purity;  // U(1): per-script purity
    std::optional<Histogram> histogram;
    EnsembleMetadata meta;
    std::vector<StateVector> final_states;                 // adaptive, if retained
    std::vector<std::vector<StateVector>> script_states;  // U(1), if retained

    double steady_fluct_scaled() const {
        return steady_fluct / (static_cast<double>(meta.config.num_qubits) / 4);
    }
};

/// Layers (3L, 4L) exclusive when the depth reaches them, else the last layer.
inline std::pair<size_t, size_t> steady_window(Model model, size_t num_qubits, size_t depth) {
    if (model == Model::kAdaptive && depth >= 4 * num_qubits - 1 && num_qubits >= 1) {
        return {3 * num_qubits + 1, 4 * num_qubits - 1};
    }
    return {depth, depth};
}

namespace detail {

inline double window_mean(const std::vector<double> &series, size_t begin, size_t end) {
    double s = 0;
    for (size_t t = begin; t <= end; ++t) {
        s += series[t];
    }
    return s / static_cast<double>(end - begin + 1);
}

}  // namespace detail

/// Non-postselected ensemble of adaptive trajectories.
inline EnsembleResult adaptive_ensemble(const CircuitConfig &config, size_t n_runs,
                                        const EnsembleOptions &options = {}) {
    config.validate();
    if (config.model != Model::kAdaptive) {
        throw std::invalid_argument("adaptive_ensemble: config is not adaptive");
    }
    if (n_runs < 2) {
        throw std::invalid_argument("adaptive_ensemble: need at least two runs");
    }
    const size_t depth = config.effective_depth();
    const double n = static_cast<double>(config.num_qubits);

    std::vector<TrajectoryRecord> records(n_runs);
    RunOptions run_opts{options.retain_states};
    parallel_for(n_runs, options.workers,
                 [&](size_t i) { records[i] = run_adaptive_trajectory(config, i, run_opts); });

    EnsembleResult res;
    res.meta.config = config;
    res.meta.runs = n_runs;
    res.n_bar.resize(depth + 1);
    res.fluct.resize(depth + 1);
    res.mean_variance.resize(depth + 1);
    for (size_t t = 0; t <= depth; ++t) {
        double s1 = 0, s2 = 0, sv = 0;
        for (const auto &r : records) {
            s1 += r.q1[t];
            s2 += r.q2[t];
            sv += r.q2[t] - r.q1[t] * r.q1[t];
        }
        double m1 = s1 / static_cast<double>(n_runs);
        double m2 = s2 / static_cast<double>(n_runs);
        res.n_bar[t] = 2 * m1 / n - 1;
        res.fluct[t] = m2 - m1 * m1;
        res.mean_variance[t] = sv / static_cast<double>(n_runs);
    }
    auto [b, e] = steady_window(config.model, config.num_qubits, depth);
    res.meta.window_begin = b;
    res.meta.window_end = e;
    res.steady_n = detail::window_mean(res.n_bar, b, e);
    res.steady_fluct = detail::window_mean(res.fluct, b, e);
    if (options.retain_states) {
        res.final_states.reserve(n_runs);
        for (auto &r : records) {
            res.final_states.push_back(std::move(*r.final_state));
        }
    }
    return res;
}

namespace detail {

struct ScriptSummary {
    bool dropped = true;
    size_t discarded = 0;
    std::vector<double> n_bar, fluct, mean_variance;
    double purity = 0;
    std::vector<StateVector> states;
};

inline ScriptSummary summarize_script(const CircuitConfig &config, uint64_t script_index, size_t n_noise,
                                      bool keep_states) {
    const size_t depth = config.effective_depth();
    const double n = static_cast<double>(config.num_qubits);
    CircuitScript script = build_circuit_script(config, script_index);

    ScriptSummary out;
    std::vector<TrajectoryRecord> kept;
    for (size_t r = 0; r < n_noise; ++r) {
        uint64_t seed = derive_seed(config.master_seed, script_index, Stream::kReplayNoise, r);
        TrajectoryRecord rec = replay_with_noise(script, config.theta, config.gamma, seed, {true});
        if (rec.discarded) {
            ++out.discarded;
        } else {
            kept.push_back(std::move(rec));
        }
    }
    if (kept.empty()) {
        return out;
    }
    out.dropped = false;
    const double k = static_cast<double>(kept.size());
    out.n_bar.resize(depth + 1);
    out.fluct.resize(depth + 1);
    out.mean_variance.resize(depth + 1);
    for (size_t t = 0; t <= depth; ++t) {
        double s1 = 0, s2 = 0, sv = 0;
        for (const auto &r : kept) {
            s1 += r.q1[t];
            s2 += r.q2[t];
            sv += r.q2[t] - r.q1[t] * r.q1[t];
        }
        out.n_bar[t] = 2 * (s1 / k) / n - 1;
        out.fluct[t] = s2 / k - (s1 / k) * (s1 / k);
        out.mean_variance[t] = sv / k;
    }
    out.states.reserve(kept.size());
    for (auto &r : kept) {
        out.states.push_back(std::move(*r.final_state));
    }
    out.purity = purity_from_overlaps(out.states);
    if (!keep_states) {
        out.states.clear();
    }
    return out;
}

}  // namespace detail

/// Postselected U(1) ensemble: n_noise noise replays of each of n_scripts
/// frozen scripts. Observables are evaluated per script at every layer and
/// then averaged over scripts; purity and the histogram use t = T.
inline EnsembleResult u1_ensemble(const CircuitConfig &config, size_t n_scripts, size_t n_noise,
                                  const EnsembleOptions &options = {}) {
    config.validate();
    if (config.model != Model::kU1) {
        throw std::invalid_argument("u1_ensemble: config is not U(1)");
    }
    if (n_scripts < 1 || n_noise < 2) {
        throw std::invalid_argument("u1_ensemble: need >= 1 script and >= 2 noise realizations");
    }
    const size_t depth = config.effective_depth();

    std::vector<detail::ScriptSummary> summaries(n_scripts);
    parallel_for(n_scripts, options.workers, [&](size_t i) {
        summaries[i] = detail::summarize_script(config, i, n_noise, options.retain_states);
    });

    EnsembleResult res;
    res.meta.config = config;
    res.meta.scripts = n_scripts;
    res.meta.noise_reps = n_noise;
    res.n_bar.assign(depth + 1, 0.0);
    res.fluct.assign(depth + 1, 0.0);
    res.mean_variance.assign(depth + 1, 0.0);
    double purity_sum = 0;
    size_t used = 0;
    for (auto &s : summaries) {
        res.meta.discarded += s.discarded;
        if (s.dropped) {
            ++res.meta.dropped_scripts;
            continue;
        }
        ++used;
        for (size_t t = 0; t <= depth; ++t) {
            res.n_bar[t] += s.n_bar[t];
            res.fluct[t] += s.fluct[t];
            res.mean_variance[t] += s.mean_variance[t];
        }
        purity_sum += s.purity;
        res.script_fluct.push_back(s.fluct[depth]);
        res.script_purity.push_back(s.purity);
        if (options.retain_states) {
            res.script_states.push_back(std::move(s.states));
        }
    }
    if (used == 0) {
        throw std::runtime_error("u1_ensemble: every script was dropped");
    }
    for (size_t t = 0; t <= depth; ++t) {
        res.n_bar[t] /= static_cast<double>(used);
        res.fluct[t] /= static_cast<double>(used);
        res.mean_variance[t] /= static_cast<double>(used);
    }
    res.purity = purity_sum / static_cast<double>(used);
    res.histogram = fluctuation_histogram(res.script_fluct, 20, static_cast<double>(config.num_qubits) / 4);
    auto [b, e] = steady_window(config.model, config.num_qubits, depth);
    res.meta.window_begin = b;
    res.meta.window_end = e;
    res.steady_n = detail::window_mean(res.n_bar, b, e);
    res.steady_fluct = detail::window_mean(res.fluct, b, e);
    return res;
}

struct SweepCounts {
    size_t runs = 1000;     // adaptive trajectories per cell
    size_t scripts = 200;   // U(1) scripts per cell
    size_t noise_reps = 100;
    size_t depth = 0;       // 0 selects the model default
    double gamma = 0.5;
};

struct SweepRow {
    double p_m;
    double theta;
    EnsembleResult result;
};

/// One ensemble per (p_m, theta) cell, p_m outer. Every cell uses the same
/// master seed, so cells share unitaries and measurement draws and differ
/// only through the parameters.
inline std::vector<SweepRow> sweep_grid(Model model, size_t num_qubits, std::span<const double> p_m_values,
                                        std::span<const double> theta_values, const SweepCounts &counts,
                                        uint64_t master_seed, size_t workers = 1) {
    if (p_m_values.empty() || theta_values.empty()) {
        throw std::invalid_argument("sweep_grid: empty parameter grid");
    }
    std::vector<SweepRow> rows;
    rows.reserve(p_m_values.size() * theta_values.size());
    for (double pm : p_m_values) {
        for (double th : theta_values) {
            CircuitConfig cfg{model, num_qubits, counts.depth, pm, th, counts.gamma, master_seed};
            EnsembleOptions opts{workers, false};
            EnsembleResult r = model == Model::kAdaptive ? adaptive_ensemble(cfg, counts.runs, opts)
                                                         : u1_ensemble(cfg, counts.scripts, counts.noise_reps, opts);
            rows.push_back({pm, th, std::move(r)});
        }
    }
    return rows;
}

}  // namespace mcl
