#include "xva/regression.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "xva/log.hpp"

namespace xva {

namespace {

void monomials(std::size_t n_vars, const std::vector<double>& scale, int degree,
               std::vector<std::vector<int>>& out) {
    out.clear();
    std::vector<int> e(n_vars, 0);
    // Enumerate exponent vectors by total degree, lexicographically.
    for (int total = 0; total <= degree; ++total) {
        auto rec = [&](auto&& self, std::size_t v, int left) -> void {
            if (v + 1 == n_vars) {
                if (left > 0 && scale[v] == 0.0)
                    return;
                e[v] = left;
                out.push_back(e);
                return;
            }
            for (int k = left; k >= 0; --k) {
                if (k > 0 && scale[v] == 0.0)
                    continue;
                e[v] = k;
                self(self, v + 1, left - k);
            }
            e[v] = 0;
        };
        rec(rec, 0, total);
    }
}

double basis_value(const std::vector<int>& exps, const double* z) {
    double v = 1.0;
    for (std::size_t j = 0; j < exps.size(); ++j)
        for (int k = 0; k < exps[j]; ++k)
            v *= z[j];
    return v;
}

}  // namespace

double RegressionFit::operator()(std::span<const double> vars) const {
    if (center.size() == 1) {
        // One regressor: exponents are 0..degree in order.
        const double z = scale[0] > 0.0 ? (vars[0] - center[0]) / scale[0] : 0.0;
        double v = 0.0;
        for (std::size_t b = coef.size(); b-- > 0;)
            v = v * z + coef[b];
        return v;
    }
    double z[8];
    for (std::size_t j = 0; j < center.size(); ++j)
        z[j] = scale[j] > 0.0 ? (vars[j] - center[j]) / scale[j] : 0.0;
    double v = 0.0;
    for (std::size_t b = 0; b < exponents.size(); ++b)
        v += coef[b] * basis_value(exponents[b], z);
    return v;
}

RegressionFit RegressionFit::constant(double value, std::size_t n_vars) {
    RegressionFit f;
    f.center.assign(n_vars, 0.0);
    f.scale.assign(n_vars, 0.0);
    f.exponents.push_back(std::vector<int>(n_vars, 0));
    f.coef.push_back(value);
    f.fallback = true;
    return f;
}

RegressionFit regress(const RegressionSamples& s, int degree) {
    const std::size_t nv = s.n_vars;
    if (nv == 0 || nv > 8)
        throw std::invalid_argument("regress: between 1 and 8 regressors supported");
    const std::size_t n = s.targets.size();
    auto included = [&](std::size_t i) { return s.mask.empty() || s.mask[i] != 0; };
    auto weight = [&](std::size_t i) { return s.weights.empty() ? 1.0 : s.weights[i]; };

    double wsum = 0.0;
    std::size_t count = 0;
    std::vector<double> center(nv, 0.0), scale(nv, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = weight(i);
        if (!included(i) || w <= 0.0)
            continue;
        ++count;
        wsum += w;
        for (std::size_t j = 0; j < nv; ++j)
            center[j] += w * s.features[i * nv + j];
    }
    if (count == 0) {
        log_warn("regress: no samples, returning zero fit");
        return RegressionFit::constant(0.0, nv);
    }
    for (auto& c : center)
        c /= wsum;
    for (std::size_t i = 0; i < n; ++i) {
        if (!included(i) || weight(i) <= 0.0)
            continue;
        for (std::size_t j = 0; j < nv; ++j) {
            double d = s.features[i * nv + j] - center[j];
            scale[j] += weight(i) * d * d;
        }
    }
    for (std::size_t j = 0; j < nv; ++j) {
        scale[j] = std::sqrt(scale[j] / wsum);
        if (scale[j] <= 1e-12 * std::max(1.0, std::abs(center[j])))
            scale[j] = 0.0;
    }

    RegressionFit fit;
    fit.center = center;
    fit.scale = scale;
    for (int d = degree; d >= 0; --d) {
        monomials(nv, scale, d, fit.exponents);
        const std::size_t nb = fit.exponents.size();
        if (d > 0 && count < 10 * nb)
            continue;
        if (nb == 1) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double wi = weight(i);
                if (included(i) && wi > 0.0)
                    mean += wi / wsum * s.targets[i];
            }
            fit.coef.assign(1, mean);
            fit.condition = 1.0;
            fit.degree = d;
            fit.fallback = d < degree;
            if (d == 0 && degree > 0 && count < 10)
                log_warn("regress: too few samples, using sample mean");
            return fit;
        }
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nb, nb);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nb);
        std::vector<double> phi(nb);
        double z[8];
        for (std::size_t i = 0; i < n; ++i) {
            const double wi = weight(i);
            if (!included(i) || wi <= 0.0)
                continue;
            for (std::size_t j = 0; j < nv; ++j)
                z[j] = scale[j] > 0.0 ? (s.features[i * nv + j] - center[j]) / scale[j] : 0.0;
            if (nv == 1) {
                phi[0] = 1.0;
                for (std::size_t b = 1; b < nb; ++b)
                    phi[b] = phi[b - 1] * z[0];
            } else {
                for (std::size_t b = 0; b < nb; ++b)
                    phi[b] = basis_value(fit.exponents[b], z);
            }
            double w = wi / wsum;
            for (std::size_t a = 0; a < nb; ++a) {
                rhs(a) += w * phi[a] * s.targets[i];
                for (std::size_t b = 0; b <= a; ++b)
                    A(a, b) += w * phi[a] * phi[b];
            }
        }
        for (std::size_t a = 0; a < nb; ++a)
            for (std::size_t b = a + 1; b < nb; ++b)
                A(a, b) = A(b, a);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        double lmax = es.eigenvalues().maxCoeff(), lmin = es.eigenvalues().minCoeff();
        if (d > 0 && !(lmin > 1e-13 * lmax)) {
            log_warn("regress: rank-deficient basis at degree " + std::to_string(d) + ", reducing degree");
            continue;
        }
        Eigen::VectorXd c = A.ldlt().solve(rhs);
        // One step of iterative refinement on the normal equations.
        c += A.ldlt().solve(rhs - A * c);
        fit.coef.assign(c.data(), c.data() + nb);
        fit.condition = lmin > 0.0 ? lmax / lmin : INFINITY;
        fit.degree = d;
        fit.fallback = d < degree;
        if (d == 0 && degree > 0 && count < 10)
            log_warn("regress: too few samples, using sample mean");
        return fit;
    }
    return RegressionFit::constant(0.0, nv);
}

std::vector<double> regress_conditional(const RegressionSamples& s, int degree) {
    RegressionFit fit = regress(s, degree);
    std::size_t n = s.targets.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = fit(s.features.subspan(i * s.n_vars, s.n_vars));
    return out;
}

}  // namespace xva
