#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

namespace pullin {

template <std::size_t N>
using ArrayState = std::array<double, N>;

struct StepControl {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_max = std::numeric_limits<double>::infinity();
    double h_init = 0.0;  // 0: automatic
    double safety = 0.9;
    double shrink_limit = 0.2;
    double grow_limit = 5.0;
};

// Dormand-Prince 5(4) embedded pair with the classic quartic dense-output
// interpolant and FSAL. One instance integrates one IVP; step() advances
// exactly one accepted step and the interpolant covers [t_prev, t].
template <std::size_t N, class Rhs>
class Dopri5 {
public:
    enum class Status { Ok, Underflow };

    Dopri5(Rhs rhs, double t0, const ArrayState<N>& y0, StepControl ctl = {})
        : rhs_(std::move(rhs)), ctl_(ctl), t_(t0), y_(y0), t_prev_(t0),
          y_prev_(y0) {
        rhs_(t_, y_, k1_);
        h_prop_ = ctl_.h_init > 0.0 ? ctl_.h_init : initial_step();
    }

    double t() const { return t_; }
    double t_prev() const { return t_prev_; }
    const ArrayState<N>& y() const { return y_; }
    const ArrayState<N>& y_prev() const { return y_prev_; }
    double last_h() const { return h_used_; }

    // Advances one accepted step, never past t_limit and never larger than
    // h_ceiling. Requires t() < t_limit.
    Status step(double t_limit,
                double h_ceiling = std::numeric_limits<double>::infinity()) {
        ArrayState<N> w{}, y1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{};
        bool rejected = false;
        for (;;) {
            const double h = std::min({h_prop_, ctl_.h_max, h_ceiling, t_limit - t_});
            if (!(h > 0.0) || t_ + h == t_) return Status::Underflow;

            for (std::size_t i = 0; i < N; ++i)
                w[i] = y_[i] + h * a21 * k1_[i];
            rhs_(t_ + c2 * h, w, k2);
            for (std::size_t i = 0; i < N; ++i)
                w[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2[i]);
            rhs_(t_ + c3 * h, w, k3);
            for (std::size_t i = 0; i < N; ++i)
                w[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2[i] + a43 * k3[i]);
            rhs_(t_ + c4 * h, w, k4);
            for (std::size_t i = 0; i < N; ++i)
                w[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2[i] + a53 * k3[i] +
                                    a54 * k4[i]);
            rhs_(t_ + c5 * h, w, k5);
            for (std::size_t i = 0; i < N; ++i)
                w[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2[i] + a63 * k3[i] +
                                    a64 * k4[i] + a65 * k5[i]);
            rhs_(t_ + h, w, k6);
            for (std::size_t i = 0; i < N; ++i)
                y1[i] = y_[i] + h * (b1 * k1_[i] + b3 * k3[i] + b4 * k4[i] +
                                     b5 * k5[i] + b6 * k6[i]);
            rhs_(t_ + h, y1, k7);

            double err = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const double e = h * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] +
                                      e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                const double sc = ctl_.atol + ctl_.rtol * std::max(std::fabs(y_[i]),
                                                                   std::fabs(y1[i]));
                err += (e / sc) * (e / sc);
            }
            err = std::sqrt(err / N);

            if (err <= 1.0) {
                for (std::size_t i = 0; i < N; ++i) {
                    const double dy = y1[i] - y_[i];
                    const double bspl = h * k1_[i] - dy;
                    rcont1_[i] = y_[i];
                    rcont2_[i] = dy;
                    rcont3_[i] = bspl;
                    rcont4_[i] = dy - h * k7[i] - bspl;
                    rcont5_[i] = h * (d1 * k1_[i] + d3 * k3[i] + d4 * k4[i] +
                                      d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
                }
                t_prev_ = t_;
                y_prev_ = y_;
                t_ += h;
                y_ = y1;
                k1_ = k7;  // FSAL
                h_used_ = h;
                double fac = ctl_.safety * std::pow(std::max(err, 1e-30), -0.2);
                fac = std::clamp(fac, ctl_.shrink_limit,
                                 rejected ? 1.0 : ctl_.grow_limit);
                h_prop_ = h * fac;
                return Status::Ok;
            }
            rejected = true;
            h_prop_ = h * std::clamp(ctl_.safety * std::pow(err, -0.2),
                                     ctl_.shrink_limit, 1.0);
        }
    }

    // Interpolant over the last accepted step.
    ArrayState<N> dense(double ti) const {
        const double theta = (ti - t_prev_) / h_used_;
        const double theta1 = 1.0 - theta;
        ArrayState<N> out{};
        for (std::size_t i = 0; i < N; ++i) {
            out[i] = rcont1_[i] +
                     theta * (rcont2_[i] +
                              theta1 * (rcont3_[i] +
                                        theta * (rcont4_[i] + theta1 * rcont5_[i])));
        }
        return out;
    }

private:
    double scaled_rms(const ArrayState<N>& v, const ArrayState<N>& ref) const {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = ctl_.atol + ctl_.rtol * std::fabs(ref[i]);
            s += (v[i] / sc) * (v[i] / sc);
        }
        return std::sqrt(s / N);
    }

    // Hairer-style starting step: probe the second derivative with one Euler
    // step so the first attempt is rarely rejected.
    double initial_step() const {
        const double d0 = scaled_rms(y_, y_);
        const double d1n = scaled_rms(k1_, y_);
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h0 = std::min(h0, ctl_.h_max);
        ArrayState<N> y1{}, f1{}, diff{};
        for (std::size_t i = 0; i < N; ++i) y1[i] = y_[i] + h0 * k1_[i];
        rhs_(t_ + h0, y1, f1);
        for (std::size_t i = 0; i < N; ++i) diff[i] = f1[i] - k1_[i];
        const double d2 = scaled_rms(diff, y_) / h0;
        const double dm = std::max(d1n, d2);
        const double h1 =
            dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        return std::min({100.0 * h0, h1, ctl_.h_max});
    }

    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0,
                            c5 = 8.0 / 9.0;
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0,
                            a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                            a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                            a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0,
                            b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                            b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                            e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                            e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0,
                            d7 = 69997945.0 / 29380423.0;

    Rhs rhs_;
    StepControl ctl_;
    double t_;
    ArrayState<N> y_;
    double t_prev_;
    ArrayState<N> y_prev_;
    ArrayState<N> k1_{};
    ArrayState<N> rcont1_{}, rcont2_{}, rcont3_{}, rcont4_{}, rcont5_{};
    double h_prop_ = 0.0;
    double h_used_ = 0.0;
};

}  // namespace pullin
