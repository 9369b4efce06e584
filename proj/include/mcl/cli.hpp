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

// Command-line driver. Every subcommand writes one CSV whose first line is
//
//   # meta: {"schema": "mcl-csv/1", "subcommand": ..., "argv": [...], ...}
//
// where "argv" is the fully resolved argument list (explicit seed included)
// that regenerates the file byte for byte. The worker count is not part of
// the metadata because results do not depend on it.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcl/channels.hpp"
#include "mcl/circuits.hpp"
#include "mcl/ensemble.hpp"
#include "mcl/parallel.hpp"

namespace mcl::cli {

inline constexpr const char *kSchema = "mcl-csv/1";

enum ExitCode : int { kOk = 0, kUsageError = 1, kRuntimeError = 2 };

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Parses "start:stop:step" (endpoints inclusive within 1e-12), a single
/// number, or a comma-separated list.
inline std::vector<double> parse_grid(const std::string &text) {
    auto to_double = [&](const std::string &s) {
        size_t used = 0;
        double v;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception &) {
            throw UsageError("invalid number '" + s + "' in grid '" + text + "'");
        }
        if (used != s.size() || !std::isfinite(v)) {
            throw UsageError("invalid number '" + s + "' in grid '" + text + "'");
        }
        return v;
    };
    if (text.empty()) {
        throw UsageError("empty grid");
    }
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) {
            parts.push_back(p);
        }
        if (parts.size() != 3) {
            throw UsageError("grid '" + text + "' must have the form start:stop:step");
        }
        double start = to_double(parts[0]), stop = to_double(parts[1]), step = to_double(parts[2]);
        if (!(step > 0) || stop < start) {
            throw UsageError("grid '" + text + "' needs step > 0 and stop >= start");
        }
        size_t count = static_cast<size_t>(std::floor((stop - start) / step + 1e-12 / step)) + 1;
        for (size_t i = 0; i < count; ++i) {
            double v = start + static_cast<double>(i) * step;
            out.push_back(std::min(v, stop));
        }
        return out;
    }
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) {
        out.push_back(to_double(p));
    }
    return out;
}

/// 9 significant digits, dot decimal.
inline std::string fmt_num(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (v == 0) {
        v = 0;  // no "-0"
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline std::string fmt_num(size_t v) {
    return std::to_string(v);
}

/// Resolved invocation shared by all subcommands.
struct ExperimentSpec {
    std::string subcommand;
    size_t num_qubits = 12;
    size_t depth = 0;
    std::string pm_text = "0.5";
    std::string theta_text = "0";
    std::string gamma_text = "0.5";
    double gamma = 0.5;
    size_t runs = 1000;
    size_t scripts = 200;
    size_t noise_reps = 100;
    size_t bins = 20;
    double nbar = 1;
    std::string seed_text = "1";
    uint64_t seed = 1;
    size_t workers = 1;
    std::string out_path = "-";
    std::string format = "csv";

    std::vector<double> pm_grid() const {
        return parse_grid(pm_text);
    }
    std::vector<double> theta_grid() const {
        return parse_grid(theta_text);
    }
    std::vector<double> gamma_grid() const {
        return parse_grid(gamma_text);
    }
};

namespace detail {

inline void check_rates(const std::vector<double> &v, const char *what) {
    for (double x : v) {
        if (!(x >= 0 && x <= 1)) {
            throw UsageError(std::string(what) + " values must lie in [0, 1]");
        }
    }
}

inline std::vector<std::string> canonical_argv(const ExperimentSpec &s) {
    std::vector<std::string> a = {s.subcommand};
    auto add = [&](const char *flag, const std::string &v) {
        a.push_back(flag);
        a.push_back(v);
    };
    const std::string &c = s.subcommand;
    if (c == "benchmark-noise") {
        add("--nbar", fmt_num(s.nbar));
        add("--pm", s.pm_text);
        add("--gamma", fmt_num(s.gamma));
        return a;
    }
    if (c == "analytics") {
        add("--pm", s.pm_text);
        add("--theta", s.theta_text);
        add("--gamma", s.gamma_text);
        return a;
    }
    add("--L", std::to_string(s.num_qubits));
    add("--pm", s.pm_text);
    add("--theta", s.theta_text);
    add("--gamma", fmt_num(s.gamma));
    if (s.depth) {
        add("--depth", std::to_string(s.depth));
    }
    if (c == "u1-sweep" || c == "u1-hist") {
        add("--scripts", std::to_string(s.scripts));
        add("--noise", std::to_string(s.noise_reps));
    } else {
        add("--runs", std::to_string(s.runs));
    }
    if (c == "u1-hist") {
        add("--bins", std::to_string(s.bins));
    }
    add("--seed", std::to_string(s.seed));
    return a;
}

inline std::string meta_line(const ExperimentSpec &s, const nlohmann::ordered_json &extra = {}) {
    nlohmann::ordered_json j;
    j["schema"] = kSchema;
    j["subcommand"] = s.subcommand;
    j["argv"] = canonical_argv(s);
    if (s.subcommand != "analytics" && s.subcommand != "benchmark-noise") {
        j["seed"] = s.seed;
    }
    for (auto it = extra.begin(); it != extra.end(); ++it) {
        j[it.key()] = it.value();
    }
    return "# meta: " + j.dump() + "\n";
}

class CsvWriter {
   public:
    explicit CsvWriter(std::ostream &os) : os_(os) {
    }
    void header(std::initializer_list<const char *> cols) {
        bool first = true;
        for (const char *c : cols) {
            os_ << (first ? "" : ",") << c;
            first = false;
        }
        os_ << "\n";
    }
    template <typename... Ts>
    void row(const Ts &...vals) {
        bool first = true;
        ((os_ << (first ? "" : ",") << cell(vals), first = false), ...);
        os_ << "\n";
    }

   private:
    static std::string cell(double v) {
        return fmt_num(v);
    }
    static std::string cell(size_t v) {
        return std::to_string(v);
    }
    static std::string cell(const std::string &v) {
        if (v.find_first_of(",\"\n") == std::string::npos) {
            return v;
        }
        std::string q = "\"";
        for (char ch : v) {
            q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        }
        return q + "\"";
    }
    static std::string cell(const char *v) {
        return cell(std::string(v));
    }
    std::ostream &os_;
};

inline CircuitConfig make_config(const ExperimentSpec &s, Model model, double pm, double theta) {
    return {model, s.num_qubits, s.depth, pm, theta, s.gamma, s.seed};
}

inline void run_adaptive_sweep(const ExperimentSpec &s, std::ostream &os) {
    auto pms = s.pm_grid(), thetas = s.theta_grid();
    SweepCounts counts{s.runs, 0, 0, s.depth, s.gamma};
    auto rows = sweep_grid(Model::kAdaptive, s.num_qubits, pms, thetas, counts, s.seed, s.workers);
    const auto &m = rows.front().result.meta;
    os << meta_line(s, {{"window", {m.window_begin, m.window_end}}});
    CsvWriter w(os);
    w.header({"pm", "theta", "gamma", "L", "steady_n", "steady_fluct_scaled", "discarded", "runs"});
    for (const auto &r : rows) {
        w.row(r.p_m, r.theta, s.gamma, s.num_qubits, r.result.steady_n, r.result.steady_fluct_scaled(),
              r.result.meta.discarded, r.result.meta.runs);
    }
}

inline void run_adaptive_dynamics(const ExperimentSpec &s, std::ostream &os) {
    auto pms = s.pm_grid(), thetas = s.theta_grid();
    os << meta_line(s);
    CsvWriter w(os);
    w.header({"pm", "theta", "gamma", "L", "t", "t_over_L", "n_bar", "fluct_scaled"});
    const double quarter = static_cast<double>(s.num_qubits) / 4;
    for (double pm : pms) {
        for (double th : thetas) {
            auto r = adaptive_ensemble(make_config(s, Model::kAdaptive, pm, th), s.runs, {s.workers, false});
            for (size_t t = 0; t < r.n_bar.size(); ++t) {
                w.row(pm, th, s.gamma, s.num_qubits, t, static_cast<double>(t) / static_cast<double>(s.num_qubits),
                      r.n_bar[t], r.fluct[t] / quarter);
            }
        }
    }
}

inline void run_u1_sweep(const ExperimentSpec &s, std::ostream &os) {
    auto pms = s.pm_grid(), thetas = s.theta_grid();
    SweepCounts counts{0, s.scripts, s.noise_reps, s.depth, s.gamma};
    auto rows = sweep_grid(Model::kU1, s.num_qubits, pms, thetas, counts, s.seed, s.workers);
    os << meta_line(s, {{"evaluated_at", "final_layer"}});
    CsvWriter w(os);
    w.header({"pm", "theta", "gamma", "L", "fluct_scaled", "purity", "n_bar", "discarded", "dropped_scripts",
              "scripts", "noise_reps"});
    for (const auto &r : rows) {
        w.row(r.p_m, r.theta, s.gamma, s.num_qubits, r.result.steady_fluct_scaled(), *r.result.purity,
              r.result.steady_n, r.result.meta.discarded, r.result.meta.dropped_scripts, r.result.meta.scripts,
              r.result.meta.noise_reps);
    }
}

inline void run_u1_hist(const ExperimentSpec &s, std::ostream &os) {
    auto pms = s.pm_grid(), thetas = s.theta_grid();
    if (s.bins == 0) {
        throw UsageError("--bins must be positive");
    }
    os << meta_line(s, {{"evaluated_at", "final_layer"}});
    CsvWriter w(os);
    w.header({"pm", "theta", "gamma", "L", "bin_left", "bin_right", "mass", "count"});
    for (double pm : pms) {
        for (double th : thetas) {
            auto r = u1_ensemble(make_config(s, Model::kU1, pm, th), s.scripts, s.noise_reps, {s.workers, false});
            Histogram h = fluctuation_histogram(r.script_fluct, s.bins, static_cast<double>(s.num_qubits) / 4);
            for (size_t i = 0; i < h.bins(); ++i) {
                w.row(pm, th, s.gamma, s.num_qubits, h.bin_left(i), h.bin_right(i), h.mass[i], h.counts[i]);
            }
        }
    }
}

inline void run_classical_compare(const ExperimentSpec &s, std::ostream &os) {
    auto pms = s.pm_grid(), thetas = s.theta_grid();
    os << meta_line(s);
    CsvWriter w(os);
    w.header({"pm", "theta", "gamma", "L", "simulated_n", "closed_form_n", "fixed_point_n", "runs"});
    for (double pm : pms) {
        for (double th : thetas) {
            double sim = std::nan("");
            if (s.runs > 0) {
                sim = adaptive_ensemble(make_config(s, Model::kAdaptive, pm, th), s.runs, {s.workers, false}).steady_n;
            }
            w.row(pm, th, s.gamma, s.num_qubits, sim, classical_steady_n(pm, th, s.gamma),
                  classical_fixed_point_n(pm, th, s.gamma), s.runs);
        }
    }
}

inline void run_analytics(const ExperimentSpec &s, std::ostream &os) {
    auto pms = s.pm_grid(), thetas = s.theta_grid(), gammas = s.gamma_grid();
    os << meta_line(s);
    CsvWriter w(os);
    w.header({"section", "theta", "gamma", "pm", "name", "re", "im"});
    const double nan = std::nan("");
    for (double th : thetas) {
        for (double g : gammas) {
            w.row("fidelity", th, g, nan, "F_ave", avg_gate_fidelity(th, g), 0.0);
        }
    }
    auto dump = [&](const char *section, double th, double g, double pm, const std::string &name, const SuperOp &op) {
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                w.row(section, th, g, pm, name + "[" + std::to_string(r) + "][" + std::to_string(c) + "]",
                      op.matrix(r, c).real(), op.matrix(r, c).imag());
            }
        }
    };
    for (double th : thetas) {
        double tmax = std::numbers::pi * th;
        auto d = decompose_error_channel(tmax);
        auto err = error_channel_coefficients(tmax);
        auto comb = combined_coefficients(d.phi, d.eta);
        SuperOp exact = error_channel(tmax);
        w.row("decomposition", th, nan, nan, "phi", d.phi, 0.0);
        w.row("decomposition", th, nan, nan, "eta", d.eta, 0.0);
        w.row("decomposition", th, nan, nan, "X_err", err.x, 0.0);
        w.row("decomposition", th, nan, nan, "Y_err", err.y, 0.0);
        w.row("decomposition", th, nan, nan, "X_combined", comb.x, 0.0);
        w.row("decomposition", th, nan, nan, "Y_combined", comb.y, 0.0);
        w.row("decomposition", th, nan, nan, "max_residual", exact.max_abs_diff(recombine(d)), 0.0);
        w.row("decomposition", th, nan, nan, "min_choi_eigenvalue", exact.min_choi_eigenvalue(), 0.0);
        dump("superop", th, nan, nan, "error_channel", exact);
    }
    for (double pm : pms) {
        dump("superop", nan, nan, pm, "measurement_feedback", measurement_feedback_channel(pm));
        dump("superop", nan, nan, pm, "measurement", measurement_channel(pm));
        for (double th : thetas) {
            for (double g : gammas) {
                auto p = channel_params(std::numbers::pi * th, g, pm);
                w.row("classical", th, g, pm, "nu", p.nu, 0.0);
                w.row("classical", th, g, pm, "nu_prime", p.nu_prime, 0.0);
                w.row("classical", th, g, pm, "xi", p.xi, 0.0);
                w.row("classical", th, g, pm, "steady_n_closed_form", classical_steady_n(pm, th, g), 0.0);
                w.row("classical", th, g, pm, "steady_n_fixed_point", classical_fixed_point_n(pm, th, g), 0.0);
            }
        }
    }
    dump("superop", nan, nan, nan, "commutator_x", commutator_superop(Axis::kX));
    dump("superop", nan, nan, nan, "commutator_y", commutator_superop(Axis::kY));
    dump("superop", nan, nan, nan, "commutator_z", commutator_superop(Axis::kZ));
}

inline void run_benchmark_noise(const ExperimentSpec &s, std::ostream &os) {
    auto pms = s.pm_grid();
    os << meta_line(s);
    CsvWriter w(os);
    w.header({"nbar", "pm", "gamma", "theta_hat", "fidelity_hat", "nbar_floor"});
    for (double pm : pms) {
        auto est = infer_noise_amplitude(s.nbar, pm, s.gamma);
        w.row(s.nbar, pm, s.gamma, est.theta_amp, est.fidelity, classical_steady_n(pm, 1.0, s.gamma));
    }
}

inline void validate(const ExperimentSpec &s) {
    if (s.format != "csv") {
        throw UsageError("unsupported output format '" + s.format + "' (only csv)");
    }
    const std::string &c = s.subcommand;
    check_rates(s.pm_grid(), "--pm");
    if (c != "benchmark-noise") {
        check_rates(s.theta_grid(), "--theta");
    }
    check_rates(s.gamma_grid(), "--gamma");
    if (c == "analytics" || c == "benchmark-noise") {
        return;
    }
    if (s.num_qubits < 2 || s.num_qubits > 24) {
        throw UsageError("--L must be in [2, 24]");
    }
    if ((c == "adaptive-sweep" || c == "adaptive-dynamics") && s.runs < 2) {
        throw UsageError("--runs must be at least 2");
    }
    if ((c == "u1-sweep" || c == "u1-hist") && (s.scripts < 1 || s.noise_reps < 2)) {
        throw UsageError("--scripts must be >= 1 and --noise >= 2");
    }
    if (c == "classical-compare" && s.runs == 1) {
        throw UsageError("--runs must be 0 (closed form only) or at least 2");
    }
}

}  // namespace detail

/// Runs the CLI with `args` (excluding the program name). CSV goes to
/// `--out` or, by default, to `out`; diagnostics go to `err`.
inline int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Noisy monitored circuit simulator"};
    app.require_subcommand(1, 1);
    ExperimentSpec spec;
    spec.workers = default_workers();

    auto common = [&](CLI::App *sub, bool simulation) {
        sub->add_option("--pm", spec.pm_text, "measurement rate grid start:stop:step or list");
        sub->add_option("--out,-o", spec.out_path, "output CSV path ('-' for stdout)");
        sub->add_option("--format", spec.format, "output format")->check(CLI::IsMember({"csv"}));
        if (simulation) {
            sub->add_option("--L", spec.num_qubits, "number of qubits");
            sub->add_option("--theta", spec.theta_text, "noise amplitude grid");
            sub->add_option("--gamma", spec.gamma, "noise rate");
            sub->add_option("--depth", spec.depth, "circuit depth (0 = model default)");
            sub->add_option("--seed", spec.seed_text, "master seed, or 'random'");
            sub->add_option("--workers", spec.workers, "worker threads (default MCL_WORKERS or all cores)");
        }
    };
    auto *adaptive_sweep = app.add_subcommand("adaptive-sweep", "steady order parameter and fluctuations over (pm, theta)");
    common(adaptive_sweep, true);
    adaptive_sweep->add_option("--runs", spec.runs, "trajectories per cell");
    auto *adaptive_dyn = app.add_subcommand("adaptive-dynamics", "order parameter time series");
    common(adaptive_dyn, true);
    adaptive_dyn->add_option("--runs", spec.runs, "trajectories per cell");
    auto *u1_sweep = app.add_subcommand("u1-sweep", "U(1) fluctuations and purity over (pm, theta)");
    common(u1_sweep, true);
    u1_sweep->add_option("--scripts", spec.scripts, "circuit scripts per cell");
    u1_sweep->add_option("--noise", spec.noise_reps, "noise realizations per script");
    auto *u1_hist = app.add_subcommand("u1-hist", "histogram of per-script charge fluctuations");
    common(u1_hist, true);
    u1_hist->add_option("--scripts", spec.scripts, "circuit scripts per cell");
    u1_hist->add_option("--noise", spec.noise_reps, "noise realizations per script");
    u1_hist->add_option("--bins", spec.bins, "histogram bins");
    auto *compare = app.add_subcommand("classical-compare", "simulated vs classical steady order parameter");
    common(compare, true);
    compare->add_option("--runs", spec.runs, "trajectories per cell (0 skips simulation)");
    auto *analytics = app.add_subcommand("analytics", "fidelity, channel decomposition and superoperator tables");
    common(analytics, false);
    analytics->add_option("--theta", spec.theta_text, "noise amplitude grid");
    analytics->add_option("--gamma", spec.gamma_text, "noise rate grid");
    auto *bench = app.add_subcommand("benchmark-noise", "infer noise amplitude and fidelity from a measured order parameter");
    common(bench, false);
    bench->add_option("--nbar", spec.nbar, "measured steady order parameter")->required();
    bench->add_option("--gamma", spec.gamma, "noise rate");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }
    spec.subcommand = app.get_subcommands().front()->get_name();
    if (spec.subcommand != "analytics") {
        spec.gamma_text = fmt_num(spec.gamma);
    }

    try {
        if (spec.seed_text == "random") {
            spec.seed = std::random_device{}();
            spec.seed = (spec.seed << 32) ^ std::random_device{}();
            err << "seed: " << spec.seed << "\n";
        } else {
            size_t used = 0;
            try {
                spec.seed = std::stoull(spec.seed_text, &used);
            } catch (const std::exception &) {
                used = 0;
            }
            if (used == 0 || used != spec.seed_text.size()) {
                throw UsageError("--seed must be a non-negative integer or 'random'");
            }
        }
        detail::validate(spec);
    } catch (const std::invalid_argument &e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }

    std::ostringstream buffer;
    try {
        const std::string &c = spec.subcommand;
        if (c == "adaptive-sweep") {
            detail::run_adaptive_sweep(spec, buffer);
        } else if (c == "adaptive-dynamics") {
            detail::run_adaptive_dynamics(spec, buffer);
        } else if (c == "u1-sweep") {
            detail::run_u1_sweep(spec, buffer);
        } else if (c == "u1-hist") {
            detail::run_u1_hist(spec, buffer);
        } else if (c == "classical-compare") {
            detail::run_classical_compare(spec, buffer);
        } else if (c == "analytics") {
            detail::run_analytics(spec, buffer);
        } else if (c == "benchmark-noise") {
            detail::run_benchmark_noise(spec, buffer);
        }
    } catch (const UsageError &e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::domain_error &e) {
        // Inputs outside the range a model can represent.
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeError;
    }

    if (spec.out_path == "-") {
        out << buffer.str();
        return kOk;
    }
    std::ofstream f(spec.out_path, std::ios::binary);
    if (!f || !(f << buffer.str()) || !f.flush()) {
        err << "error: cannot write '" << spec.out_path << "'\n";
        return kRuntimeError;
    }
    return kOk;
}

inline int run(int argc, char **argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace mcl::cli
