#include "pullin/models.hpp"

#include <cmath>
#include <sstream>

#include "pullin/errors.hpp"

namespace pullin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw DomainError(std::string(what) + " must be positive and finite");
}

}  // namespace

GModel GModel::power_even(int k, double beta) {
    if (k < 1) throw DomainError("power_even: k must be a positive integer");
    require_positive(beta, "beta");
    GModel m;
    m.family_ = GFamily::PowerEven;
    m.k_ = k;
    m.beta_ = beta;
    return m;
}

GModel GModel::exponential(double beta) {
    require_positive(beta, "beta");
    GModel m;
    m.family_ = GFamily::Exponential;
    m.beta_ = beta;
    return m;
}

GModel GModel::poly_even(int k, double beta) {
    if (k < 1) throw DomainError("poly_even: k must be a positive integer");
    require_positive(beta, "beta");
    GModel m;
    m.family_ = GFamily::PolyEven;
    m.k_ = k;
    m.beta_ = beta;
    return m;
}

GModel GModel::inverse_power(double p, double beta) {
    if (!(p > 1.0)) throw DomainError("inverse_power: p must exceed 1");
    require_positive(beta, "beta");
    GModel m;
    m.family_ = GFamily::InversePower;
    m.p_ = p;
    m.b_ = 1.0;
    m.beta_ = beta;
    return m;
}

GModel GModel::tabulated(GCallbacks cb, double b, double beta) {
    if (!cb.g || !cb.g1 || !cb.g2 || !cb.antiderivative)
        throw DomainError("tabulated: all four callbacks are required");
    if (!(b > 0.0)) throw DomainError("tabulated: b must be positive");
    require_positive(beta, "beta");
    GModel m;
    m.family_ = GFamily::Tabulated;
    m.b_ = b;
    m.beta_ = beta;
    m.callbacks_ = std::make_shared<const GCallbacks>(std::move(cb));
    return m;
}

std::string GModel::describe() const {
    std::ostringstream os;
    switch (family_) {
        case GFamily::PowerEven: os << "power_even(k=" << k_ << ")"; break;
        case GFamily::Exponential: os << "exponential"; break;
        case GFamily::PolyEven: os << "poly_even(k=" << k_ << ")"; break;
        case GFamily::InversePower: os << "inverse_power(p=" << p_ << ")"; break;
        case GFamily::Tabulated: os << "tabulated(b=" << b_ << ")"; break;
    }
    return os.str();
}

GBundle GModel::eval(double u) const {
    if (!(u < b_))
        throw DomainError("g evaluation at u >= b");
    GBundle out{};
    switch (family_) {
        case GFamily::PowerEven: {
            const int n = 2 * k_;
            const double w = 1.0 + u;
            const double wn2 = std::pow(w, n - 2);  // (1+u)^{2k-2}
            out.g = wn2 * w * w;
            out.g1 = n * wn2 * w;
            out.g2 = static_cast<double>(n) * (n - 1) * wn2;
            out.G = (std::pow(w, n + 1) - 1.0) / (n + 1);
            break;
        }
        case GFamily::Exponential: {
            const double e = std::exp(u);
            out.g = e;
            out.g1 = e;
            out.g2 = e;
            out.G = e - 1.0;
            break;
        }
        case GFamily::PolyEven: {
            const int n = 2 * k_;
            const double un2 = std::pow(u, n - 2);
            out.g = 1.0 + un2 * u * u;
            out.g1 = n * un2 * u;
            out.g2 = static_cast<double>(n) * (n - 1) * un2;
            out.G = u + std::pow(u, n + 1) / (n + 1);
            break;
        }
        case GFamily::InversePower: {
            const double w = 1.0 - u;
            const double wp = std::pow(w, -p_);
            out.g = wp;
            out.g1 = p_ * wp / w;
            out.g2 = p_ * (p_ + 1.0) * wp / (w * w);
            out.G = (std::pow(w, 1.0 - p_) - 1.0) / (p_ - 1.0);
            break;
        }
        case GFamily::Tabulated: {
            out.g = callbacks_->g(u);
            out.g1 = callbacks_->g1(u);
            out.g2 = callbacks_->g2(u);
            out.G = callbacks_->antiderivative(u);
            break;
        }
    }
    if (!std::isfinite(out.g) || !std::isfinite(out.g1) ||
        !std::isfinite(out.g2) || !std::isfinite(out.G))
        throw NonFiniteError("g evaluation overflowed");
    return out;
}

FModel FModel::linear() {
    FModel m;
    m.family_ = FFamily::Linear;
    m.theta_ = 0.0;
    m.c_ = 1.0;
    m.eta_ = 1.0;
    m.f_prime0_ = 1.0;
    return m;
}

FModel FModel::odd_power(double theta, double c) {
    if (!(theta > 0.0)) throw DomainError("odd_power: theta must be positive");
    require_positive(c, "c");
    FModel m;
    m.family_ = FFamily::OddPower;
    m.theta_ = theta;
    m.c_ = c;
    m.eta_ = c;  // |f(v)| = c |v|^{theta+1} exactly
    m.f_prime0_ = 0.0;
    return m;
}

std::string FModel::describe() const {
    if (family_ == FFamily::Linear) return "linear";
    std::ostringstream os;
    os << "odd_power(theta=" << theta_ << ", c=" << c_ << ")";
    return os.str();
}

FBundle FModel::eval(double v) const {
    if (family_ == FFamily::Linear) return {v, 1.0};
    const double a = std::pow(std::fabs(v), theta_);
    return {c_ * a * v, c_ * (theta_ + 1.0) * a};
}

bool ValidationReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

const AssumptionCheck* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

// Midpoint grid over (lo, hi): endpoints and lattice values are never sampled.
std::vector<double> midpoint_grid(double lo, double hi, int n) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    const double h = (hi - lo) / n;
    for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = lo + (i + 0.5) * h;
    return xs;
}

struct SafeG {
    const GModel& m;
    // +inf stands in for overflow when probing u -> b^-.
    GBundle operator()(double u) const {
        try {
            return m.eval(u);
        } catch (const NonFiniteError&) {
            return {kInf, kInf, kInf, kInf};
        }
    }
};

}  // namespace

ValidationReport validate_assumptions(const GModel& g, const FModel& f,
                                      const GridSpec& grid) {
    if (grid.points < 1000)
        throw PreconditionError("validate_assumptions: grid must have >= 1000 points");

    ValidationReport rep;
    auto add = [&rep](AssumptionCheck c) { rep.checks.push_back(std::move(c)); };

    // --- damping ---
    const auto f0 = f.eval(0.0);
    add({"(f2)", std::fabs(f0.f) <= 1e-12, 0.0, f0.f, "f(0) = 0"});

    {
        AssumptionCheck c{"(f3)", true, 0.0, kInf, "f(v) v > 0 for v != 0"};
        AssumptionCheck c4{"(f4)", true, 0.0, -kInf,
                           "|f(v)| <= eta |v|^{theta+1}"};
        for (double v : midpoint_grid(-grid.v_max, grid.v_max, grid.points)) {
            const double fv = f.eval(v).f;
            const double sign_margin = fv * v;
            if (sign_margin < c.witness_value) {
                c.witness_value = sign_margin;
                c.witness_x = v;
            }
            if (sign_margin <= 0.0) c.passed = false;
            const double bound = f.eta() * std::pow(std::fabs(v), f.theta() + 1.0);
            const double excess = std::fabs(fv) - bound * (1.0 + 1e-12);
            if (excess > c4.witness_value) {
                c4.witness_value = excess;
                c4.witness_x = v;
            }
            if (excess > 0.0) c4.passed = false;
        }
        add(std::move(c));
        add(std::move(c4));
    }

    add({"(f')", f.f_prime0() >= 0.0, 0.0, f.f_prime0(), "f'(0) >= 0"});

    // --- nonlinearity ---
    SafeG sg{g};
    const double b = g.b();
    const bool finite_b = g.singular();
    const double u_hi = finite_b ? b * (1.0 - grid.b_margin_rel) : grid.u_cap;
    const auto us = midpoint_grid(grid.u_min, u_hi, grid.points);

    {
        const double g_at_0 = sg(0.0).g;
        add({"(g2) normalization", std::fabs(g_at_0 - 1.0) <= 1e-12, 0.0, g_at_0,
             "g(0) = 1"});
    }
    {
        AssumptionCheck pos{"(g2)", true, 0.0, kInf, "g(u) > 0 on the grid"};
        AssumptionCheck conv{"(g4)", true, 0.0, kInf, "g''(u) > 0 on the grid"};
        for (double u : us) {
            const GBundle bu = sg(u);
            if (bu.g < pos.witness_value) {
                pos.witness_value = bu.g;
                pos.witness_x = u;
            }
            if (!(bu.g > 0.0)) pos.passed = false;
            if (bu.g2 < conv.witness_value) {
                conv.witness_value = bu.g2;
                conv.witness_x = u;
            }
            if (!(bu.g2 > 0.0)) conv.passed = false;
        }
        add(std::move(pos));
        add(std::move(conv));
    }
    {
        const double g1_at_0 = sg(0.0).g1;
        add({"(g3)", g1_at_0 >= -1e-12, 0.0, g1_at_0, "g'(0) >= 0"});
    }

    if (!finite_b) {
        // (g5) with I = R: g'' bounded below by tau = g''(R) on [R, 10R].
        const double R = grid.growth_R;
        const double tau = sg(R).g2;
        AssumptionCheck c{"(g5)", tau > 0.0, R, tau,
                          "g'' >= g''(R) on [R, 10R], R = 10"};
        for (double u : midpoint_grid(R, 10.0 * R, grid.points)) {
            const double g2u = sg(u).g2;
            if (g2u < tau * (1.0 - 1e-12)) {
                c.passed = false;
                c.witness_x = u;
                c.witness_value = g2u;
                break;
            }
        }
        add(std::move(c));
    } else {
        // (g5) with b < inf: g, g', g'', and the antiderivative diverge, while
        // G(u) - (u/2) g(u) approaches a negative limit. Probed on a geometric
        // grid u = b (1 - 2^-j).
        AssumptionCheck div{"(g5) divergence", true, 0.0, 0.0,
                            "g, g', g'', int g -> +inf as u -> b^-"};
        AssumptionCheck neg{"(g5) deficit", true, 0.0, 0.0,
                            "int_0^u g - (u/2) g(u) has negative limit"};
        double prev_g = 0.0, last_deficit = 0.0, last_u = 0.0;
        bool monotone = true;
        double final_g = 0.0, final_G = 0.0;
        for (int j = 2; j <= 45; ++j) {
            const double u = b * (1.0 - std::ldexp(1.0, -j));
            const GBundle bu = sg(u);
            if (bu.g < prev_g) monotone = false;
            prev_g = bu.g;
            final_g = std::min(bu.g, std::min(bu.g1, bu.g2));
            final_G = bu.G;
            if (std::isfinite(bu.G) && std::isfinite(bu.g)) {
                last_deficit = bu.G - 0.5 * u * bu.g;
                last_u = u;
            }
        }
        if (!(monotone && final_g > 1e8 && final_G > 1e6)) {
            div.passed = false;
            div.witness_x = last_u;
            div.witness_value = final_g;
        }
        neg.passed = last_deficit < 0.0;
        neg.witness_x = last_u;
        neg.witness_value = last_deficit;
        add(std::move(div));
        add(std::move(neg));
    }

    return rep;
}

}  // namespace pullin
