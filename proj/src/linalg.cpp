#include "c3/linalg.hpp"

#include <cmath>

namespace c3 {

void jacobi_eigen(std::vector<double> a, int n, std::vector<double>& values,
                  std::vector<double>* vectors) {
    std::vector<double> v;
    if (vectors) {
        v.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;
    }
    auto at = [&](std::vector<double>& m, int r, int c) -> double& {
        return m[static_cast<std::size_t>(r) * n + c];
    };

    double fro = 0.0;
    for (double x : a) fro += x * x;
    fro = std::sqrt(fro);
    const double tol = 1e-12 * std::max(fro, 1e-300);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(a, p, q);
                off += 2.0 * apq * apq;
            }
        }
        if (std::sqrt(off) < tol) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(a, p, q);
                if (std::abs(apq) == 0.0) continue;
                const double app = at(a, p, p), aqq = at(a, q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                at(a, p, p) = app - t * apq;
                at(a, q, q) = aqq + t * apq;
                at(a, p, q) = 0.0;
                at(a, q, p) = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = at(a, i, p), aiq = at(a, i, q);
                    at(a, i, p) = c * aip - s * aiq;
                    at(a, p, i) = at(a, i, p);
                    at(a, i, q) = s * aip + c * aiq;
                    at(a, q, i) = at(a, i, q);
                }
                if (vectors) {
                    for (int i = 0; i < n; ++i) {
                        const double vip = at(v, i, p), viq = at(v, i, q);
                        at(v, i, p) = c * vip - s * viq;
                        at(v, i, q) = s * vip + c * viq;
                    }
                }
            }
        }
    }

    values.resize(n);
    for (int i = 0; i < n; ++i) values[i] = a[static_cast<std::size_t>(i) * n + i];
    if (vectors) *vectors = std::move(v);
}

std::vector<double> sym_sqrt(const std::vector<double>& a, int n) {
    std::vector<double> w, v;
    jacobi_eigen(a, n, w, &v);
    for (double& x : w) x = std::sqrt(std::max(0.0, x));

    // V diag(sqrt(w)) V^T
    std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) {
                acc += v[static_cast<std::size_t>(i) * n + k] * w[k] *
                       v[static_cast<std::size_t>(j) * n + k];
            }
            out[static_cast<std::size_t>(i) * n + j] = acc;
            out[static_cast<std::size_t>(j) * n + i] = acc;
        }
    }
    return out;
}

std::vector<double> mat_mul(const std::vector<double>& a, const std::vector<double>& b, int n) {
    std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const double aik = a[static_cast<std::size_t>(i) * n + k];
            if (aik == 0.0) continue;
            const double* brow = b.data() + static_cast<std::size_t>(k) * n;
            double* orow = out.data() + static_cast<std::size_t>(i) * n;
            for (int j = 0; j < n; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

}  // namespace c3
