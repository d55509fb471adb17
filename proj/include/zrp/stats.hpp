#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "zrp/errors.hpp"

namespace zrp {

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Unbiased sample variance.
inline double variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double standard_error(const std::vector<double>& v) {
    return std::sqrt(variance(v) / static_cast<double>(v.size()));
}

/// P[chi2_dof >= stat].
inline double chi_squared_pvalue(double stat, int dof) {
    if (dof <= 0) throw ConfigError("chi-squared needs dof >= 1");
    return boost::math::gamma_q(0.5 * dof, 0.5 * stat);
}

struct ChiSquaredResult {
    double statistic = 0.0;
    int dof = 0;
    double pvalue = 1.0;
};

/// Pearson chi-squared of observed counts against expected probabilities.
/// Cells are merged from the tail upward until every expected count is at
/// least min_expected; the remaining probability mass joins the last cell.
inline ChiSquaredResult chi_squared_test(const std::vector<std::int64_t>& observed,
                                         const std::vector<double>& expected_prob,
                                         std::int64_t total, double min_expected = 5.0) {
    std::vector<double> exp_counts;
    std::vector<double> obs_counts;
    double tail_prob = 1.0;
    double acc_exp = 0.0, acc_obs = 0.0;
    for (std::size_t k = 0; k < expected_prob.size(); ++k) {
        acc_exp += expected_prob[k] * static_cast<double>(total);
        acc_obs += static_cast<double>(k < observed.size() ? observed[k] : 0);
        tail_prob -= expected_prob[k];
        double tail_exp = std::max(tail_prob, 0.0) * static_cast<double>(total);
        if (acc_exp >= min_expected && tail_exp >= min_expected) {
            exp_counts.push_back(acc_exp);
            obs_counts.push_back(acc_obs);
            acc_exp = acc_obs = 0.0;
        }
    }
    // everything left, including observed mass beyond the table
    double obs_rest = 0.0;
    for (std::size_t k = expected_prob.size(); k < observed.size(); ++k)
        obs_rest += static_cast<double>(observed[k]);
    acc_obs += obs_rest;
    acc_exp += std::max(tail_prob, 0.0) * static_cast<double>(total);
    if (!exp_counts.empty() && acc_exp < min_expected) {
        exp_counts.back() += acc_exp;
        obs_counts.back() += acc_obs;
    } else {
        exp_counts.push_back(std::max(acc_exp, 1e-300));
        obs_counts.push_back(acc_obs);
    }

    ChiSquaredResult r;
    r.dof = static_cast<int>(exp_counts.size()) - 1;
    if (r.dof < 1) {
        r.dof = 0;
        r.pvalue = 1.0;
        return r;
    }
    for (std::size_t i = 0; i < exp_counts.size(); ++i) {
        double d = obs_counts[i] - exp_counts[i];
        r.statistic += d * d / exp_counts[i];
    }
    r.pvalue = chi_squared_pvalue(r.statistic, r.dof);
    return r;
}

/// Delete-one jackknife standard error of a statistic computed from replica
/// summaries. `stat(skip)` must evaluate the statistic with replica `skip`
/// left out (skip = -1 for the full-sample value).
template <class Fn>
double jackknife_se(int replicas, Fn&& stat) {
    std::vector<double> loo(static_cast<std::size_t>(replicas));
    for (int r = 0; r < replicas; ++r) loo[static_cast<std::size_t>(r)] = stat(r);
    double m = mean(loo);
    double s = 0.0;
    for (double v : loo) s += (v - m) * (v - m);
    double n = static_cast<double>(replicas);
    return std::sqrt((n - 1.0) / n * s);
}

} // namespace zrp
