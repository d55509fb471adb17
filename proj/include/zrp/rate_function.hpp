#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "zrp/errors.hpp"

namespace zrp {

/// Jump-rate function g with its structural certificates. g(0) = 0 always;
/// the bounded-variation constant g* = sup_k |g(k+1) - g(k)| and the
/// monotonicity flag are probed over k <= k_probe at construction.
///
/// The radius of convergence phi_star of the partition function is estimated
/// as lim g(k) ~ g(k_probe) for non-decreasing g (ratio test); for a
/// non-monotone table an explicit override is required.
class RateFunction {
public:
    enum class Family { Linear, Constant, Capped, Table };
    enum class TailRule { Constant, Linear };

    static RateFunction linear(unsigned k_probe = 256,
                               std::optional<double> phi_star_override = std::nullopt) {
        return RateFunction(Family::Linear, 0.0, {}, TailRule::Constant, 0.0, phi_star_override,
                            k_probe);
    }

    /// g(k) = 1 for k >= 1.
    static RateFunction constant(unsigned k_probe = 256,
                                 std::optional<double> phi_star_override = std::nullopt) {
        return RateFunction(Family::Constant, 0.0, {}, TailRule::Constant, 0.0, phi_star_override,
                            k_probe);
    }

    /// g(k) = min(k, cap).
    static RateFunction capped(double cap, unsigned k_probe = 256,
                               std::optional<double> phi_star_override = std::nullopt) {
        if (!(cap > 0)) throw ConfigError("capped rate function needs cap > 0");
        return RateFunction(Family::Capped, cap, {}, TailRule::Constant, 0.0, phi_star_override,
                            k_probe);
    }

    /// Explicit values g(1..n) plus a tail rule for k > n. A non-monotone
    /// table must come with a phi_star override.
    static RateFunction table(std::vector<double> values, TailRule tail = TailRule::Constant,
                              double tail_slope = 0.0,
                              std::optional<double> phi_star_override = std::nullopt,
                              unsigned k_probe = 256) {
        if (values.empty()) throw ConfigError("table rate function needs at least one value");
        for (double v : values)
            if (!(v >= 0) || !std::isfinite(v)) throw ConfigError("table rate values must be finite and >= 0");
        if (tail == TailRule::Linear && tail_slope < 0)
            throw ConfigError("linear tail rule needs slope >= 0");
        return RateFunction(Family::Table, 0.0, std::move(values), tail, tail_slope,
                            phi_star_override, k_probe);
    }

    /// Parse "linear", "constant", "capped(c)".
    static RateFunction from_name(const std::string& name, unsigned k_probe = 256,
                                  std::optional<double> phi_star_override = std::nullopt) {
        if (name == "linear") return linear(k_probe, phi_star_override);
        if (name == "constant") return constant(k_probe, phi_star_override);
        if (name.rfind("capped(", 0) == 0 && name.back() == ')') {
            double c = std::stod(name.substr(7, name.size() - 8));
            return capped(c, k_probe, phi_star_override);
        }
        throw ConfigError("unknown rate function '" + name + "'");
    }

    double operator()(std::uint64_t k) const {
        if (k == 0) return 0.0;
        switch (family_) {
        case Family::Linear: return static_cast<double>(k);
        case Family::Constant: return 1.0;
        case Family::Capped: return std::min(static_cast<double>(k), cap_);
        case Family::Table:
            if (k <= values_.size()) return values_[k - 1];
            if (tail_ == TailRule::Constant) return values_.back();
            return values_.back() + tail_slope_ * static_cast<double>(k - values_.size());
        }
        return 0.0;
    }

    double g_star() const { return g_star_; }
    bool non_decreasing() const { return non_decreasing_; }
    unsigned k_probe() const { return k_probe_; }

    /// Estimated radius of convergence of Z. May be infinity (override).
    double phi_star() const { return phi_star_; }

    /// True when g(j) takes one constant value for every j > k, which makes
    /// partition-series tails exactly geometric.
    bool constant_beyond(std::uint64_t k) const {
        switch (family_) {
        case Family::Linear: return false;
        case Family::Constant: return true;
        case Family::Capped: return static_cast<double>(k + 1) >= cap_;
        case Family::Table:
            return tail_ == TailRule::Constant && k >= values_.size();
        }
        return false;
    }

    /// inf_{j > k} g(j); used to certify geometric series tails.
    double tail_inf(std::uint64_t k) const {
        switch (family_) {
        case Family::Linear: return static_cast<double>(k + 1);
        case Family::Constant: return 1.0;
        case Family::Capped: return std::min(static_cast<double>(k + 1), cap_);
        case Family::Table: {
            double m = std::numeric_limits<double>::infinity();
            for (std::uint64_t j = k + 1; j <= values_.size(); ++j) m = std::min(m, values_[j - 1]);
            if (tail_ == TailRule::Constant || tail_slope_ == 0.0) {
                m = std::min(m, values_.back());
            } else if (k + 1 > values_.size()) {
                m = std::min(m, (*this)(k + 1));
            } else {
                m = std::min(m, values_.back());  // tail starts at last value and grows
            }
            return m;
        }
        }
        return 0.0;
    }

    /// log of g(k)! = log Π_{j=1..k} g(j); log(1) = 0 for k = 0.
    double log_factorial(std::uint64_t k) const {
        double s = 0.0;
        for (std::uint64_t j = 1; j <= k; ++j) {
            double gj = (*this)(j);
            if (gj <= 0.0) {
                std::ostringstream os;
                os << "g(" << j << ") = 0 inside g(" << k << ")!";
                throw ZeroRateInFactorial(os.str());
            }
            s += std::log(gj);
        }
        return s;
    }

    /// g(k)!; computed in log space, returned as the product value.
    double factorial(std::uint64_t k) const { return std::exp(log_factorial(k)); }

private:
    RateFunction(Family f, double cap, std::vector<double> values, TailRule tail,
                 double tail_slope, std::optional<double> phi_star_override, unsigned k_probe)
        : family_(f), cap_(cap), values_(std::move(values)), tail_(tail),
          tail_slope_(tail_slope), k_probe_(k_probe) {
        if (k_probe_ == 0) throw ConfigError("k_probe must be positive");
        g_star_ = 0.0;
        non_decreasing_ = true;
        double prev = 0.0;
        for (std::uint64_t k = 1; k <= k_probe_; ++k) {
            double cur = (*this)(k);
            g_star_ = std::max(g_star_, std::abs(cur - prev));
            if (cur < prev) non_decreasing_ = false;
            prev = cur;
        }
        if (phi_star_override) {
            if (!(*phi_star_override > 0)) throw ConfigError("phi_star override must be positive");
            phi_star_ = *phi_star_override;
        } else if (non_decreasing_) {
            phi_star_ = (*this)(k_probe_);
        } else {
            throw ConfigError("non-monotone rate function requires an explicit phi_star");
        }
    }

    Family family_;
    double cap_ = 0.0;
    std::vector<double> values_;
    TailRule tail_ = TailRule::Constant;
    double tail_slope_ = 0.0;
    unsigned k_probe_;
    double g_star_ = 0.0;
    bool non_decreasing_ = true;
    double phi_star_ = 0.0;
};

} // namespace zrp
