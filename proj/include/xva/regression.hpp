#pragma once

#include <span>
#include <vector>

namespace xva {

/// Least-squares fit on a total-degree polynomial basis of standardized
/// regressors. Evaluates as a function of the raw regressors.
struct RegressionFit {
    int degree = 0;
    std::vector<double> center;  // per regressor
    std::vector<double> scale;   // 0 marks a regressor dropped as constant
    std::vector<std::vector<int>> exponents;
    std::vector<double> coef;
    double condition = 1.0;
    /// True when the fit fell back to the (weighted) mean of the samples.
    bool fallback = false;

    double operator()(std::span<const double> vars) const;
    double operator()(double x) const { return (*this)(std::span<const double>(&x, 1)); }

    static RegressionFit constant(double value, std::size_t n_vars);
};

/// Regression inputs. Features are row-major, n_vars per sample. Samples with
/// a zero mask entry are excluded; empty weights mean equal weights.
struct RegressionSamples {
    std::span<const double> features;
    std::size_t n_vars = 1;
    std::span<const double> targets;
    std::span<const double> weights;
    std::span<const unsigned char> mask;
};

/// Ordinary least squares of targets on polynomials up to `degree`.
/// Needs 10 samples per basis function: the degree is lowered until that
/// holds, and again whenever the normal matrix is numerically singular.
/// Degree 0 is the weighted mean.
RegressionFit regress(const RegressionSamples& samples, int degree);

/// Fitted conditional expectation at every sample (masked-out rows included).
std::vector<double> regress_conditional(const RegressionSamples& samples, int degree);

}  // namespace xva
