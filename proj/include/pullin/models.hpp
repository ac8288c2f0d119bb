#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace pullin {

enum class GFamily { PowerEven, Exponential, PolyEven, InversePower, Tabulated };
enum class FFamily { Linear, OddPower };

// g(u), g'(u), g''(u) and the antiderivative \int_0^u g(s) ds at one point.
struct GBundle {
    double g;
    double g1;
    double g2;
    double G;
};

// User-supplied nonlinearity. All four callbacks are required; no numerical
// differentiation is performed on top of them.
struct GCallbacks {
    std::function<double(double)> g;
    std::function<double(double)> g1;
    std::function<double(double)> g2;
    std::function<double(double)> antiderivative;
};

// Nonlinearity family on I = (-inf, b), normalized to g(0) = 1, convex and
// positive. Antiderivatives are closed-form per family so energy evaluations
// carry no quadrature error. Immutable after construction; eval is pure.
class GModel {
public:
    static GModel power_even(int k, double beta = 1.0);      // (1+u)^{2k}
    static GModel exponential(double beta = 1.0);            // e^u
    static GModel poly_even(int k, double beta = 1.0);       // 1 + u^{2k}
    static GModel inverse_power(double p, double beta = 1.0);  // (1-u)^{-p}, b = 1
    static GModel tabulated(GCallbacks cb, double b, double beta = 1.0);

    GFamily family() const { return family_; }
    double b() const { return b_; }
    double beta() const { return beta_; }
    bool singular() const { return b_ < std::numeric_limits<double>::infinity(); }
    int k() const { return k_; }
    double p() const { return p_; }
    std::string describe() const;

    // Throws DomainError for u >= b, NonFiniteError on overflow.
    GBundle eval(double u) const;

private:
    GModel() = default;

    GFamily family_ = GFamily::Exponential;
    double b_ = std::numeric_limits<double>::infinity();
    double beta_ = 1.0;
    int k_ = 1;
    double p_ = 2.0;
    std::shared_ptr<const GCallbacks> callbacks_;
};

struct FBundle {
    double f;
    double f1;
};

// Damping family: f(0) = 0, f(v) v > 0 off the origin, |f| <= eta |v|^{theta+1}.
class FModel {
public:
    static FModel linear();                         // f(v) = v
    static FModel odd_power(double theta, double c);  // c |v|^theta v, theta > 0

    FFamily family() const { return family_; }
    double eta() const { return eta_; }
    double theta() const { return theta_; }
    double f_prime0() const { return f_prime0_; }
    bool is_linear() const { return family_ == FFamily::Linear; }
    std::string describe() const;

    FBundle eval(double v) const;

private:
    FModel() = default;

    FFamily family_ = FFamily::Linear;
    double theta_ = 0.0;
    double c_ = 1.0;
    double eta_ = 1.0;
    double f_prime0_ = 1.0;
};

// Sampling plan for validate_assumptions. Grids use midpoint sampling so
// lattice points like u = 0 or u = -1 are never hit exactly.
struct GridSpec {
    int points = 2000;         // per interval, must be >= 1000
    double v_max = 10.0;       // damping checks sample (-v_max, v_max)
    double u_min = -5.0;
    double u_cap = 10.0;       // upper end when b = +inf
    double b_margin_rel = 1e-6;  // grid stops at b (1 - margin) when b < inf
    double growth_R = 10.0;    // (g5), b = +inf: tau = g''(R) on [R, 10R]
};

struct AssumptionCheck {
    std::string name;      // "(f2)", "(g4)", ...
    bool passed = true;
    double witness_x = 0;  // worst sampled point
    double witness_value = 0;
    std::string detail;
};

struct ValidationReport {
    std::vector<AssumptionCheck> checks;

    bool all_passed() const;
    const AssumptionCheck* find(const std::string& name) const;
};

// Checks Assumptions (f1)-(f4) and (g1)-(g5) numerically on the given grid.
// Failures are report entries, never exceptions.
ValidationReport validate_assumptions(const GModel& g, const FModel& f,
                                      const GridSpec& grid = {});

}  // namespace pullin
