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

// Single-qubit channel algebra for gate noise made of random rotations
// R_a(theta) = exp(i theta sigma_a / 2), a uniform over {x, y, z} and theta
// uniform on [0, theta_max], plus measurement/feedback channels and the
// classical (diagonal) reduction of their composition.
//
// Superoperators act on the row-major vectorization of a 2x2 density matrix
// in the basis {|u><u|, |u><d|, |d><u|, |d><d|}, where |u> is the charged
// state |1> (the absorbing target) and |d> is |0>. Pauli matrices here take
// their textbook form in the (|u>, |d>) ordering.

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "mcl/gates.hpp"
#include "mcl/qstate.hpp"
#include "mcl/rng.hpp"

namespace mcl {

using Vec4 = Eigen::Vector4cd;

struct SuperOp {
    Mat4 matrix = Mat4::Identity();

    static SuperOp identity() {
        return {};
    }

    /// rho -> A rho B.
    static SuperOp sandwich(const Mat2 &a, const Mat2 &b) {
        return {kron(a, b.transpose())};
    }

    Vec4 apply(const Vec4 &v) const {
        return matrix * v;
    }

    Mat2 apply(const Mat2 &rho) const {
        Vec4 out = matrix * vectorize(rho);
        return unvectorize(out);
    }

    /// (this o other): apply `other` first.
    SuperOp after(const SuperOp &other) const {
        return {matrix * other.matrix};
    }

    SuperOp operator+(const SuperOp &o) const {
        return {matrix + o.matrix};
    }
    SuperOp operator*(cplx s) const {
        return {matrix * s};
    }

    static Vec4 vectorize(const Mat2 &rho) {
        return Vec4(rho(0, 0), rho(0, 1), rho(1, 0), rho(1, 1));
    }
    static Mat2 unvectorize(const Vec4 &v) {
        Mat2 m;
        m << v(0), v(1), v(2), v(3);
        return m;
    }

    bool is_trace_preserving(double tol = 1e-12) const {
        Eigen::RowVector4cd t = matrix.row(0) + matrix.row(3);
        return (t - Eigen::RowVector4cd(1, 0, 0, 1)).cwiseAbs().maxCoeff() <= tol;
    }

    bool is_unital(double tol = 1e-12) const {
        Vec4 id(1, 0, 0, 1);
        return (matrix * id - id).cwiseAbs().maxCoeff() <= tol;
    }

    /// Phi(rho)^dagger = Phi(rho^dagger): row 2 is row 1 conjugated with
    /// columns 1 and 2 exchanged; rows 0 and 3 map onto themselves likewise.
    bool preserves_hermiticity(double tol = 1e-12) const {
        auto mirror = [](int i) { return i == 1 ? 2 : i == 2 ? 1 : i; };
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                if (std::abs(matrix(mirror(r), mirror(c)) - std::conj(matrix(r, c))) > tol) {
                    return false;
                }
            }
        }
        return true;
    }

    /// Choi matrix sum_ij |i><j| (x) Phi(|i><j|).
    Mat4 choi() const {
        Mat4 j;
        for (int i = 0; i < 2; ++i) {
            for (int jj = 0; jj < 2; ++jj) {
                for (int k = 0; k < 2; ++k) {
                    for (int l = 0; l < 2; ++l) {
                        j(2 * i + k, 2 * jj + l) = matrix(2 * k + l, 2 * i + jj);
                    }
                }
            }
        }
        return j;
    }

    double min_choi_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Mat4> es(choi(), Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    double max_abs_diff(const SuperOp &o) const {
        return (matrix - o.matrix).cwiseAbs().maxCoeff();
    }
};

namespace detail {

inline constexpr double kSeriesCutoff = 1e-4;

/// sin(x) / x.
inline double sinc(double x) {
    if (std::abs(x) < kSeriesCutoff) {
        return 1 - x * x / 6;
    }
    return std::sin(x) / x;
}

/// (1 - cos x) / (2x), evaluated as sin^2(x/2) / x.
inline double versine_ratio(double x) {
    if (std::abs(x) < kSeriesCutoff) {
        return x / 4 - x * x * x / 48;
    }
    double s = std::sin(x / 2);
    return s * s / x;
}

inline void check_angle(double theta_max) {
    if (!(theta_max >= 0 && theta_max <= std::numbers::pi + 1e-12)) {
        throw std::invalid_argument("theta_max must lie in [0, pi]");
    }
}

}  // namespace detail

/// Coefficients of the averaged error channel written as
/// (1/3) sum_a [(1 - X) rho + X s_a rho s_a + i Y [s_a, rho]].
struct PauliCoefficients {
    double x;
    double y;
};

inline PauliCoefficients error_channel_coefficients(double theta_max) {
    detail::check_angle(theta_max);
    return {0.5 - 0.5 * detail::sinc(theta_max), detail::versine_ratio(theta_max)};
}

/// Coefficients of incoherent(eta) o coherent(phi) in the same form.
inline PauliCoefficients combined_coefficients(double phi, double eta) {
    double c = std::cos(phi / 2), s = std::sin(phi / 2);
    return {eta * c * c + (1 - eta) * s * s, (0.5 - eta) * std::sin(phi)};
}

/// rho -> [sigma_a, rho].
inline SuperOp commutator_superop(Axis axis) {
    Mat2 s = pauli(axis);
    return {SuperOp::sandwich(s, Mat2::Identity()).matrix - SuperOp::sandwich(Mat2::Identity(), s).matrix};
}

inline SuperOp pauli_conjugation(Axis axis) {
    Mat2 s = pauli(axis);
    return SuperOp::sandwich(s, s);
}

/// Noise channel averaged over axis and angle, in closed form.
inline SuperOp error_channel(double theta_max) {
    auto [x, y] = error_channel_coefficients(theta_max);
    Mat4 acc = Mat4::Zero();
    for (Axis a : kAllAxes) {
        acc += (1 - x) * Mat4::Identity() + x * pauli_conjugation(a).matrix +
               cplx(0, y) * commutator_superop(a).matrix;
    }
    return {acc / 3.0};
}

/// gamma * error + (1 - gamma) * identity.
inline SuperOp noisy_channel(double theta_max, double gamma) {
    check_unit_interval(gamma, "noise rate");
    return {gamma * error_channel(theta_max).matrix + (1 - gamma) * Mat4::Identity()};
}

/// rho -> R_a(phi) rho R_a(phi)^dagger.
inline SuperOp coherent_channel(Axis axis, double phi) {
    Mat2 r = rotation_gate(axis, phi);
    return SuperOp::sandwich(r, r.adjoint());
}

/// rho -> (1 - eta) rho + eta s_a rho s_a.
inline SuperOp incoherent_channel(Axis axis, double eta) {
    if (!(eta >= 0 && eta <= 1)) {
        throw std::invalid_argument("depolarization rate must lie in [0, 1]");
    }
    return {(1 - eta) * Mat4::Identity() + eta * pauli_conjugation(axis).matrix};
}

struct ErrorChannelDecomposition {
    double phi;  // coherent rotation angle
    double eta;  // Pauli depolarization rate
};

/// Coherent angle and incoherent rate such that
/// error_channel(theta_max) = (1/3) sum_a incoherent(a, eta) o coherent(a, phi).
inline ErrorChannelDecomposition decompose_error_channel(double theta_max) {
    detail::check_angle(theta_max);
    double half = theta_max / 2;
    // sin(t/2)/t = sinc(t/2)/2
    return {half, 0.5 - 0.5 * detail::sinc(half)};
}

/// (1/3) sum_a incoherent(a, eta) o coherent(a, phi).
inline SuperOp recombine(const ErrorChannelDecomposition &d) {
    Mat4 acc = Mat4::Zero();
    for (Axis a : kAllAxes) {
        acc += incoherent_channel(a, d.eta).after(coherent_channel(a, d.phi)).matrix;
    }
    return {acc / 3.0};
}

inline void check_rate(double p, const char *what) {
    check_unit_interval(p, what);
}

/// Measurement in the computational basis followed by a flip of outcome |d>.
inline SuperOp measurement_feedback_channel(double p_m) {
    check_rate(p_m, "measurement rate");
    Mat4 m = Mat4::Zero();
    m(0, 0) = 1;
    m(0, 3) = p_m;
    m(1, 1) = 1 - p_m;
    m(2, 2) = 1 - p_m;
    m(3, 3) = 1 - p_m;
    return {m};
}

/// Measurement without feedback.
inline SuperOp measurement_channel(double p_m) {
    check_rate(p_m, "measurement rate");
    Mat4 m = Mat4::Zero();
    m(0, 0) = 1;
    m(1, 1) = 1 - p_m;
    m(2, 2) = 1 - p_m;
    m(3, 3) = 1;
    return {m};
}

/// Average gate fidelity of the single-qubit noise at amplitude theta_amp
/// (theta_max = pi * theta_amp) and rate gamma.
inline double avg_gate_fidelity(double theta_amp, double gamma) {
    check_unit_interval(theta_amp, "noise amplitude");
    check_unit_interval(gamma, "noise rate");
    if (theta_amp == 0) {
        return 1.0;
    }
    return 1 - gamma / 3 * (1 - detail::sinc(std::numbers::pi * theta_amp));
}

struct MonteCarloEstimate {
    double mean;
    double std_error;
};

/// Monte Carlo estimate of the Haar-averaged fidelity <psi|E(|psi><psi|)|psi>
/// over uniform Bloch-sphere states and the noise ensemble.
inline MonteCarloEstimate mc_gate_fidelity(double theta_amp, double gamma, size_t n_samples, Rng &rng) {
    check_unit_interval(theta_amp, "noise amplitude");
    check_unit_interval(gamma, "noise rate");
    if (n_samples == 0) {
        throw std::invalid_argument("mc_gate_fidelity: need at least one sample");
    }
    const double theta_max = std::numbers::pi * theta_amp;
    detail::CompensatedSum sum, sum_sq;
    for (size_t i = 0; i < n_samples; ++i) {
        double cos_polar = 2 * uniform01(rng) - 1;
        double azimuth = 2 * std::numbers::pi * uniform01(rng);
        double c = std::sqrt(0.5 * (1 + cos_polar));
        double s = std::sqrt(std::max(0.0, 0.5 * (1 - cos_polar)));
        Eigen::Vector2cd psi(c, std::polar(s, azimuth));

        double f = 1.0;
        if (uniform01(rng) < gamma) {
            Axis axis = static_cast<Axis>(std::min(2, static_cast<int>(uniform01(rng) * 3)));
            double theta = theta_max * uniform01(rng);
            cplx amp = psi.dot(rotation_gate(axis, theta) * psi);  // conj(psi) . R psi
            f = std::norm(amp);
        }
        sum.add(f);
        sum_sq.add(f * f);
    }
    double n = static_cast<double>(n_samples);
    double mean = sum.value() / n;
    double var = n > 1 ? std::max(0.0, (sum_sq.value() - n * mean * mean) / (n - 1)) : 0.0;
    return {mean, std::sqrt(var / n)};
}

/// Derived channel parameters for a (theta_max, gamma, p_m) triple.
struct ChannelParams {
    double theta_max;
    double gamma;
    double phi;
    double eta;
    double nu;
    double nu_prime;
    double xi;
    PauliCoefficients coefficients;
};

inline ChannelParams channel_params(double theta_max, double gamma, double p_m) {
    detail::check_angle(theta_max);
    check_unit_interval(gamma, "noise rate");
    check_rate(p_m, "measurement rate");
    auto d = decompose_error_channel(theta_max);
    double nu = 0.5 * (1 - detail::sinc(theta_max));
    double nu_prime = gamma * nu;
    return {theta_max, gamma, d.phi, d.eta, nu, nu_prime, 2.0 / 3.0 * nu_prime * (1 - p_m),
            error_channel_coefficients(theta_max)};
}

/// Error channel with its commutator terms dropped:
/// (1 - nu') rho + (nu'/3) sum_a s_a rho s_a.
struct ClassicalErrorChannel {
    double nu_prime;
    Eigen::Matrix2d transfer;  // action on (rho_uu, rho_dd)
    SuperOp superop;
};

inline ClassicalErrorChannel classical_error_channel(double theta_amp, double gamma) {
    check_unit_interval(theta_amp, "noise amplitude");
    check_unit_interval(gamma, "noise rate");
    double nu_prime = gamma * 0.5 * (1 - detail::sinc(std::numbers::pi * theta_amp));
    Mat4 acc = (1 - nu_prime) * Mat4::Identity();
    for (Axis a : kAllAxes) {
        acc += nu_prime / 3 * pauli_conjugation(a).matrix;
    }
    // x and y conjugations swap the populations, z leaves them alone.
    double flip = 2 * nu_prime / 3;
    Eigen::Matrix2d t;
    t << 1 - flip, flip, flip, 1 - flip;
    return {nu_prime, t, {acc}};
}

inline double classical_xi(double p_m, double theta_amp, double gamma) {
    check_rate(p_m, "measurement rate");
    check_unit_interval(theta_amp, "noise amplitude");
    check_unit_interval(gamma, "noise rate");
    return gamma / 3 * (1 - p_m) * (1 - detail::sinc(std::numbers::pi * theta_amp));
}

/// Column-stochastic map on (rho_uu, rho_dd) for measurement+feedback after
/// the classical noise channel.
inline Eigen::Matrix2d classical_combined_transfer(double p_m, double theta_amp, double gamma) {
    double xi = classical_xi(p_m, theta_amp, gamma);
    Eigen::Matrix2d t;
    t << 1 - xi, p_m + xi, xi, (1 - p_m) - xi;
    return t;
}

/// Closed-form steady order parameter of the classical model,
/// p / sqrt(p^2 + 2 xi (p + xi)). Returns 0 at p_m = 0 (fully mixed).
///
/// This is an approximation: the exact fixed point of the transfer matrix is
/// classical_fixed_point_n, which lies at or below it.
inline double classical_steady_n(double p_m, double theta_amp, double gamma) {
    double xi = classical_xi(p_m, theta_amp, gamma);
    if (p_m == 0) {
        return 0.0;
    }
    return p_m / std::sqrt(p_m * p_m + 2 * xi * (p_m + xi));
}

/// rho_uu - rho_dd at the stationary vector of classical_combined_transfer,
/// p / (p + 2 xi). Returns 0 at p_m = 0.
inline double classical_fixed_point_n(double p_m, double theta_amp, double gamma) {
    double xi = classical_xi(p_m, theta_amp, gamma);
    if (p_m == 0) {
        return 0.0;
    }
    return p_m / (p_m + 2 * xi);
}

struct NoiseAmplitudeEstimate {
    double theta_amp;
    double fidelity;
};

/// Inverts classical_steady_n in the noise amplitude by bisection.
/// Throws std::domain_error if n_observed is outside [n(theta=1), 1].
inline NoiseAmplitudeEstimate infer_noise_amplitude(double n_observed, double p_m, double gamma) {
    check_rate(p_m, "measurement rate");
    check_unit_interval(gamma, "noise rate");
    if (p_m == 0) {
        throw std::domain_error("infer_noise_amplitude: measurement rate must be positive");
    }
    // The closed form must fall monotonically in theta for the inversion to be unique.
    double prev = classical_steady_n(p_m, 0.0, gamma);
    for (int i = 1; i <= 32; ++i) {
        double cur = classical_steady_n(p_m, i / 32.0, gamma);
        if (cur > prev) {
            throw std::logic_error("infer_noise_amplitude: steady state not monotone in noise amplitude");
        }
        prev = cur;
    }
    const double ceiling = 1.0;
    const double floor = classical_steady_n(p_m, 1.0, gamma);
    if (!(n_observed <= ceiling && n_observed >= floor)) {
        throw std::domain_error("infer_noise_amplitude: order parameter " + std::to_string(n_observed) +
                                " outside attainable range [" + std::to_string(floor) + ", 1]");
    }
    if (n_observed == ceiling) {
        return {0.0, 1.0};
    }
    double lo = 0, hi = 1;
    while (hi - lo > 1e-13) {
        double mid = 0.5 * (lo + hi);
        if (classical_steady_n(p_m, mid, gamma) > n_observed) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    double theta = 0.5 * (lo + hi);
    return {theta, avg_gate_fidelity(theta, gamma)};
}

}  // namespace mcl
