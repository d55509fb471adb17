#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "zrp/errors.hpp"

namespace zrp {

/// Test function G on [0,1] with first and second derivatives, analytic or
/// user-supplied. validate() probes d1/d2 against central finite differences.
class TestFunction {
public:
    TestFunction() = default;

    TestFunction(std::string name, std::function<double(double)> f,
                 std::function<double(double)> d1, std::function<double(double)> d2)
        : name_(std::move(name)), f_(std::move(f)), d1_(std::move(d1)), d2_(std::move(d2)) {}

    double operator()(double u) const { return f_(u); }
    double d1(double u) const { return d1_(u); }
    double d2(double u) const { return d2_(u); }
    const std::string& name() const { return name_; }

    /// G(u) = sum_i c_i u^i.
    static TestFunction polynomial(std::vector<double> coeffs, std::string name = "") {
        if (name.empty()) {
            name = "poly(";
            for (std::size_t i = 0; i < coeffs.size(); ++i)
                name += (i ? "," : "") + std::to_string(coeffs[i]);
            name += ")";
        }
        auto c = std::make_shared<std::vector<double>>(std::move(coeffs));
        auto horner = [](const std::vector<double>& a, double u) {
            double v = 0.0;
            for (std::size_t i = a.size(); i-- > 0;) v = v * u + a[i];
            return v;
        };
        auto deriv = [](const std::vector<double>& a) {
            std::vector<double> d;
            for (std::size_t i = 1; i < a.size(); ++i) d.push_back(a[i] * static_cast<double>(i));
            return d;
        };
        auto c1 = std::make_shared<std::vector<double>>(deriv(*c));
        auto c2 = std::make_shared<std::vector<double>>(deriv(*c1));
        return TestFunction(
            std::move(name), [=](double u) { return horner(*c, u); },
            [=](double u) { return horner(*c1, u); }, [=](double u) { return horner(*c2, u); });
    }

    /// G(u) = sin(a u + b).
    static TestFunction sine(double a, double b = 0.0) {
        return TestFunction("sin(" + std::to_string(a) + "u+" + std::to_string(b) + ")",
                            [=](double u) { return std::sin(a * u + b); },
                            [=](double u) { return a * std::cos(a * u + b); },
                            [=](double u) { return -a * a * std::sin(a * u + b); });
    }

    /// G(u) = cos(a u + b).
    static TestFunction cosine(double a, double b = 0.0) {
        return TestFunction("cos(" + std::to_string(a) + "u+" + std::to_string(b) + ")",
                            [=](double u) { return std::cos(a * u + b); },
                            [=](double u) { return -a * std::sin(a * u + b); },
                            [=](double u) { return -a * a * std::cos(a * u + b); });
    }

    /// Piecewise-linear interpolation of (u, f, f', f'') columns.
    static TestFunction from_table(std::vector<double> u, std::vector<double> f,
                                   std::vector<double> d1, std::vector<double> d2) {
        if (u.size() < 2 || f.size() != u.size() || d1.size() != u.size() || d2.size() != u.size())
            throw ConfigError("test function table needs matching columns of length >= 2");
        if (!std::is_sorted(u.begin(), u.end())) throw ConfigError("table abscissae must be sorted");
        auto interp = [](std::shared_ptr<std::vector<double>> xs,
                         std::shared_ptr<std::vector<double>> ys) {
            return [xs, ys](double x) {
                const auto& u = *xs;
                const auto& v = *ys;
                if (x <= u.front()) return v.front();
                if (x >= u.back()) return v.back();
                auto it = std::upper_bound(u.begin(), u.end(), x);
                std::size_t i = static_cast<std::size_t>(it - u.begin());
                double w = (x - u[i - 1]) / (u[i] - u[i - 1]);
                return (1.0 - w) * v[i - 1] + w * v[i];
            };
        };
        auto xs = std::make_shared<std::vector<double>>(std::move(u));
        auto fp = std::make_shared<std::vector<double>>(std::move(f));
        auto d1p = std::make_shared<std::vector<double>>(std::move(d1));
        auto d2p = std::make_shared<std::vector<double>>(std::move(d2));
        return TestFunction("table", interp(xs, fp), interp(xs, d1p), interp(xs, d2p));
    }

    /// Registry lookup: "one", "x", "x2", "x(1-x)", "poly(c0,c1,...)",
    /// "sin(a)", "cos(a)".
    static TestFunction from_name(const std::string& name) {
        if (name == "one") return polynomial({1.0}, "one");
        if (name == "x") return polynomial({0.0, 1.0}, "x");
        if (name == "x2") return polynomial({0.0, 0.0, 1.0}, "x2");
        if (name == "x(1-x)") return polynomial({0.0, 1.0, -1.0}, "x(1-x)");
        auto args = [&](std::size_t off) {
            std::vector<double> vals;
            std::string body = name.substr(off, name.size() - off - 1);
            std::size_t pos = 0;
            while (pos < body.size()) {
                std::size_t next = body.find(',', pos);
                if (next == std::string::npos) next = body.size();
                vals.push_back(std::stod(body.substr(pos, next - pos)));
                pos = next + 1;
            }
            return vals;
        };
        if (name.rfind("poly(", 0) == 0 && name.back() == ')') return polynomial(args(5));
        if (name.rfind("sin(", 0) == 0 && name.back() == ')') return sine(args(4).at(0));
        if (name.rfind("cos(", 0) == 0 && name.back() == ')') return cosine(args(4).at(0));
        throw ConfigError("unknown test function '" + name + "'");
    }

    /// Check d1/d2 against central differences on a probe grid.
    bool validate(double tol = 1e-6, int probe = 33, double h = 1e-4) const {
        for (int i = 1; i < probe - 1; ++i) {
            double u = static_cast<double>(i) / (probe - 1);
            double fd1 = (f_(u + h) - f_(u - h)) / (2 * h);
            double fd2 = (f_(u + h) - 2 * f_(u) + f_(u - h)) / (h * h);
            double scale = std::max({1.0, std::abs(d1_(u)), std::abs(d2_(u))});
            if (std::abs(fd1 - d1_(u)) > tol * scale) return false;
            if (std::abs(fd2 - d2_(u)) > tol * scale) return false;
        }
        return true;
    }

private:
    std::string name_;
    std::function<double(double)> f_, d1_, d2_;
};

/// G(s,u) in C^{1,2}([0,T] x [0,1]) for the weak formulation: value, time
/// derivative, and two space derivatives.
struct SpaceTimeFunction {
    std::function<double(double, double)> f;    // G(s,u)
    std::function<double(double, double)> ds;   // d_s G
    std::function<double(double, double)> du;   // d_u G
    std::function<double(double, double)> duu;  // Laplacian in u

    static SpaceTimeFunction time_independent(const TestFunction& G) {
        return {[G](double, double u) { return G(u); }, [](double, double) { return 0.0; },
                [G](double, double u) { return G.d1(u); },
                [G](double, double u) { return G.d2(u); }};
    }

    /// G(s,u) = a(s) b(u) with a given analytically.
    static SpaceTimeFunction separable(std::function<double(double)> a,
                                       std::function<double(double)> a_prime,
                                       const TestFunction& b) {
        return {[=](double s, double u) { return a(s) * b(u); },
                [=](double s, double u) { return a_prime(s) * b(u); },
                [=](double s, double u) { return a(s) * b.d1(u); },
                [=](double s, double u) { return a(s) * b.d2(u); }};
    }
};

/// Discrete Laplacian N^2 [G((x+1)/N) + G((x-1)/N) - 2G(x/N)].
inline double laplacian_N(const TestFunction& G, int N, int x) {
    double h = 1.0 / N;
    return static_cast<double>(N) * N * (G((x + 1) * h) + G((x - 1) * h) - 2.0 * G(x * h));
}

/// Forward gradient N [G((x+1)/N) - G(x/N)].
inline double grad_plus_N(const TestFunction& G, int N, int x) {
    double h = 1.0 / N;
    return N * (G((x + 1) * h) - G(x * h));
}

/// Backward gradient N [G(x/N) - G((x-1)/N)].
inline double grad_minus_N(const TestFunction& G, int N, int x) {
    double h = 1.0 / N;
    return N * (G(x * h) - G((x - 1) * h));
}

struct DiscreteOps {
    std::vector<double> laplacian;   // site x at [x-1]
    std::vector<double> grad_plus;
    std::vector<double> grad_minus;
};

/// All three discrete operators at every lattice site x = 1..N-1.
inline DiscreteOps discrete_ops(const TestFunction& G, int N) {
    DiscreteOps ops;
    ops.laplacian.resize(static_cast<std::size_t>(N - 1));
    ops.grad_plus.resize(static_cast<std::size_t>(N - 1));
    ops.grad_minus.resize(static_cast<std::size_t>(N - 1));
    for (int x = 1; x <= N - 1; ++x) {
        ops.laplacian[static_cast<std::size_t>(x - 1)] = laplacian_N(G, N, x);
        ops.grad_plus[static_cast<std::size_t>(x - 1)] = grad_plus_N(G, N, x);
        ops.grad_minus[static_cast<std::size_t>(x - 1)] = grad_minus_N(G, N, x);
    }
    return ops;
}

} // namespace zrp
