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

// Trajectory execution for the two circuit families.
//
// One time step is one brickwork layer on an open chain: layer t (t = 1..T)
// applies gates to the pairs (o, o+1), (o+2, o+3), ... with o = t mod 2. Each
// gate is followed by independent rotation noise on each of its two qubits,
// then every qubit is measured with probability p_m. In the adaptive family a
// measured |0> is flipped to |1> by sigma_x.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mcl/gates.hpp"
#include "mcl/qstate.hpp"
#include "mcl/rng.hpp"

namespace mcl {

enum class Model { kAdaptive, kU1 };

inline std::string_view model_name(Model m) {
    return m == Model::kAdaptive ? "adaptive" : "u1";
}

struct CircuitConfig {
    Model model = Model::kAdaptive;
    size_t num_qubits = 12;
    size_t depth = 0;  // 0 selects the model default
    double p_m = 0;
    double theta = 0;  // noise amplitude; max angle is pi * theta
    double gamma = 0.5;
    uint64_t master_seed = 0;

    /// 4L for adaptive runs (covers the 3L < t < 4L window), 2L for U(1).
    static size_t default_depth(Model model, size_t num_qubits) {
        return model == Model::kAdaptive ? 4 * num_qubits : 2 * num_qubits;
    }

    size_t effective_depth() const {
        return depth ? depth : default_depth(model, num_qubits);
    }

    void validate() const {
        if (num_qubits < 2 || num_qubits > StateVector::kMaxQubits) {
            throw std::invalid_argument("CircuitConfig: L must be in [2, 30]");
        }
        check_unit_interval(p_m, "measurement rate");
        check_unit_interval(theta, "noise amplitude");
        check_unit_interval(gamma, "noise rate");
    }
};

/// First qubit of each pair touched by layer t.
inline std::vector<size_t> brickwork_pairs(size_t num_qubits, size_t layer) {
    std::vector<size_t> firsts;
    for (size_t q = layer % 2; q + 1 < num_qubits; q += 2) {
        firsts.push_back(q);
    }
    return firsts;
}

struct TrajectorySeeds {
    uint64_t unitaries = 0;
    uint64_t measurement_sites = 0;
    uint64_t born_draws = 0;
    uint64_t noise = 0;
};

struct TrajectoryRecord {
    std::vector<double> q1;  // <Q>(t), t = 0..T
    std::vector<double> q2;  // <Q^2>(t)
    std::optional<StateVector> final_state;
    bool discarded = false;
    size_t discarded_at_layer = 0;
    TrajectorySeeds seeds;

    double order_parameter(size_t t, size_t num_qubits) const {
        return 2 * q1.at(t) / static_cast<double>(num_qubits) - 1;
    }
};

struct RunOptions {
    bool retain_state = false;
};

namespace detail {

/// Gate followed by the pair's noise: (R_first (x) R_second) * U.
/// The three uniform draws per qubit are always consumed.
inline Mat4 attach_noise(const Mat4 &u, size_t first, double gamma, double theta, Rng &noise_rng) {
    NoiseEvent ev{};
    Mat2 r0 = Mat2::Identity(), r1 = Mat2::Identity();
    bool hit0 = sample_noise_event(first, gamma, theta, noise_rng, ev);
    if (hit0) {
        r0 = rotation_gate(ev.axis, ev.angle);
    }
    bool hit1 = sample_noise_event(first + 1, gamma, theta, noise_rng, ev);
    if (hit1) {
        r1 = rotation_gate(ev.axis, ev.angle);
    }
    if (!hit0 && !hit1) {
        return u;
    }
    return kron(r0, r1) * u;
}

inline void record_moments(const StateVector &s, TrajectoryRecord &rec) {
    ChargeMoments m = s.charge_moments();
    rec.q1.push_back(m.q1);
    rec.q2.push_back(m.q2);
}

/// Born measurement that never lands on a degenerate branch.
inline int born_measure(StateVector &s, size_t q, double draw) {
    try {
        return s.measure_qubit(q, draw).outcome;
    } catch (const ZeroBranchError &e) {
        int other = 1 - e.outcome;
        s.force_outcome(q, other);
        return other;
    }
}

}  // namespace detail

inline TrajectorySeeds trajectory_seeds(uint64_t master, uint64_t index) {
    return {derive_seed(master, index, Stream::kUnitaries), derive_seed(master, index, Stream::kMeasurementSites),
            derive_seed(master, index, Stream::kBornDraws), derive_seed(master, index, Stream::kNoise)};
}

/// One adaptive trajectory from the product |+> state.
inline TrajectoryRecord run_adaptive_trajectory(const CircuitConfig &config, uint64_t trajectory_index,
                                                const RunOptions &options = {}) {
    config.validate();
    if (config.model != Model::kAdaptive) {
        throw std::invalid_argument("run_adaptive_trajectory: config is not adaptive");
    }
    const size_t n = config.num_qubits;
    const size_t depth = config.effective_depth();

    TrajectoryRecord rec;
    rec.seeds = trajectory_seeds(config.master_seed, trajectory_index);
    Rng unitary_rng = make_rng(rec.seeds.unitaries);
    Rng site_rng = make_rng(rec.seeds.measurement_sites);
    Rng born_rng = make_rng(rec.seeds.born_draws);
    Rng noise_rng = make_rng(rec.seeds.noise);
    const Mat2 flip = pauli(Axis::kX);

    StateVector state = StateVector::plus_state(n);
    rec.q1.reserve(depth + 1);
    rec.q2.reserve(depth + 1);
    detail::record_moments(state, rec);
    for (size_t t = 1; t <= depth; ++t) {
        for (size_t first : brickwork_pairs(n, t)) {
            Mat4 u = sample_absorbing_unitary(unitary_rng).matrix;
            state.apply_two_qubit(detail::attach_noise(u, first, config.gamma, config.theta, noise_rng), first);
        }
        for (size_t q = 0; q < n; ++q) {
            double u_site = uniform01(site_rng);
            double draw = uniform01(born_rng);
            if (u_site < config.p_m && detail::born_measure(state, q, draw) == 0) {
                state.apply_single_qubit(flip, q);
            }
        }
        detail::record_moments(state, rec);
    }
    if (options.retain_state) {
        rec.final_state = std::move(state);
    }
    return rec;
}

struct ScriptGate {
    size_t first;
    Mat4 matrix;
};

struct ScriptMeasurement {
    size_t qubit;
    int outcome;
};

struct ScriptLayer {
    std::vector<ScriptGate> gates;
    std::vector<ScriptMeasurement> measurements;
};

/// Frozen unitaries, measurement sites and outcomes of one reference run.
struct CircuitScript {
    size_t num_qubits = 0;
    std::vector<ScriptLayer> layers;  // layers[t-1] holds layer t
    uint64_t script_index = 0;
    TrajectorySeeds seeds;  // of the reference run
    double reference_theta = 0;
    double reference_gamma = 0;

    size_t depth() const {
        return layers.size();
    }
    size_t measurement_count() const {
        size_t c = 0;
        for (const auto &l : layers) {
            c += l.measurements.size();
        }
        return c;
    }
};

struct RecordedScript {
    CircuitScript script;
    TrajectoryRecord reference;
};

/// Runs the U(1) reference trajectory for `script_index` with Born-sampled
/// outcomes and noise from the reference noise stream, and freezes it.
inline RecordedScript record_circuit_script(const CircuitConfig &config, uint64_t script_index,
                                            const RunOptions &options = {}) {
    config.validate();
    if (config.model != Model::kU1) {
        throw std::invalid_argument("build_circuit_script: config is not U(1)");
    }
    const size_t n = config.num_qubits;
    const size_t depth = config.effective_depth();

    RecordedScript out;
    CircuitScript &script = out.script;
    TrajectoryRecord &rec = out.reference;
    script.num_qubits = n;
    script.script_index = script_index;
    script.seeds = trajectory_seeds(config.master_seed, script_index);
    script.reference_theta = config.theta;
    script.reference_gamma = config.gamma;
    rec.seeds = script.seeds;

    Rng unitary_rng = make_rng(script.seeds.unitaries);
    Rng site_rng = make_rng(script.seeds.measurement_sites);
    Rng born_rng = make_rng(script.seeds.born_draws);
    Rng noise_rng = make_rng(script.seeds.noise);

    StateVector state = StateVector::plus_state(n);
    detail::record_moments(state, rec);
    script.layers.resize(depth);
    for (size_t t = 1; t <= depth; ++t) {
        ScriptLayer &layer = script.layers[t - 1];
        for (size_t first : brickwork_pairs(n, t)) {
            Mat4 u = sample_u1_unitary(unitary_rng).matrix;
            layer.gates.push_back({first, u});
            state.apply_two_qubit(detail::attach_noise(u, first, config.gamma, config.theta, noise_rng), first);
        }
        for (size_t q = 0; q < n; ++q) {
            double u_site = uniform01(site_rng);
            double draw = uniform01(born_rng);
            if (u_site < config.p_m) {
                layer.measurements.push_back({q, detail::born_measure(state, q, draw)});
            }
        }
        detail::record_moments(state, rec);
    }
    if (options.retain_state) {
        rec.final_state = std::move(state);
    }
    return out;
}

inline CircuitScript build_circuit_script(const CircuitConfig &config, uint64_t script_index) {
    return record_circuit_script(config, script_index).script;
}

/// Replays `script` under fresh noise, forcing every recorded outcome. A
/// forced outcome with probability below 1e-12 marks the record discarded and
/// stops the run.
inline TrajectoryRecord replay_with_noise(const CircuitScript &script, double theta, double gamma,
                                          uint64_t noise_seed, const RunOptions &options = {}) {
    check_unit_interval(theta, "noise amplitude");
    check_unit_interval(gamma, "noise rate");
    TrajectoryRecord rec;
    rec.seeds = script.seeds;
    rec.seeds.noise = noise_seed;
    Rng noise_rng = make_rng(noise_seed);

    StateVector state = StateVector::plus_state(script.num_qubits);
    detail::record_moments(state, rec);
    for (size_t t = 1; t <= script.depth(); ++t) {
        const ScriptLayer &layer = script.layers[t - 1];
        for (const auto &g : layer.gates) {
            state.apply_two_qubit(detail::attach_noise(g.matrix, g.first, gamma, theta, noise_rng), g.first);
        }
        try {
            for (const auto &m : layer.measurements) {
                state.force_outcome(m.qubit, m.outcome);
            }
        } catch (const ZeroBranchError &) {
            rec.discarded = true;
            rec.discarded_at_layer = t;
            return rec;
        }
        detail::record_moments(state, rec);
    }
    if (options.retain_state) {
        rec.final_state = std::move(state);
    }
    return rec;
}

/// First layer t with n(t') >= threshold for every t' >= t.
inline std::optional<size_t> absorbing_time(const TrajectoryRecord &record, size_t num_qubits,
                                            double threshold = 0.99) {
    std::optional<size_t> result;
    for (size_t t = record.q1.size(); t-- > 0;) {
        if (record.order_parameter(t, num_qubits) >= threshold) {
            result = t;
        } else {
            break;
        }
    }
    return result;
}

}  // namespace mcl
