#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include "flowrank/google_matrix.hpp"

namespace flowrank {

/// One eigenvalue and its right eigenvector, stored with the quadratic
/// normalization sum |psi_i|^2 = 1 and the phase fixed so that the
/// largest-magnitude component is real and positive.
struct EigenPair {
    std::complex<double> lambda;
    Eigen::VectorXcd psi;
};

struct SpectrumResult {
    std::vector<EigenPair> pairs;  // sorted by |lambda| desc, then Re desc, Im asc
    double alpha = 0.0;
    Direction direction = Direction::Forward;
};

/// Dense decomposition of the full spectrum. Guarded to moderate sizes; the
/// matrices here are small enough that nothing iterative is needed.
inline SpectrumResult full_spectrum(const GoogleMatrix& g) {
    const int n = g.size();
    if (n > 10000)
        throw ValidationError("full_spectrum: dense decomposition guarded to N <= 10000, got N = " +
                              std::to_string(n));
    Eigen::MatrixXd dense = g.dense();
    Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success)
        throw Error("full_spectrum: decomposition failed (info=" + std::to_string(solver.info()) +
                    ", N=" + std::to_string(n) + ")");

    SpectrumResult result;
    result.alpha = g.alpha();
    result.direction = g.direction();
    result.pairs.resize(n);
    for (int k = 0; k < n; ++k) {
        EigenPair& pair = result.pairs[k];
        pair.lambda = solver.eigenvalues()(k);
        pair.psi = solver.eigenvectors().col(k);
        // phase fix: largest-magnitude component real positive, then unit
        // quadratic norm
        int imax = 0;
        double amax = -1.0;
        for (int i = 0; i < n; ++i) {
            double a = std::abs(pair.psi(i));
            if (a > amax) {
                amax = a;
                imax = i;
            }
        }
        if (amax > 0.0) pair.psi *= std::conj(pair.psi(imax)) / std::abs(pair.psi(imax));
        double norm = pair.psi.norm();
        if (norm > 0.0) pair.psi /= norm;
    }
    std::sort(result.pairs.begin(), result.pairs.end(), [](const EigenPair& a, const EigenPair& b) {
        double ma = std::abs(a.lambda), mb = std::abs(b.lambda);
        if (ma != mb) return ma > mb;
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() > b.lambda.real();
        return a.lambda.imag() < b.lambda.imag();
    });
    return result;
}

/// Inverse participation ratio (sum |psi|^2)^2 / sum |psi|^4: the effective
/// number of nodes carrying an eigenstate. Invariant under rescaling.
inline double ipr(const Eigen::VectorXcd& psi) {
    double s2 = 0.0, s4 = 0.0;
    for (int i = 0; i < psi.size(); ++i) {
        double a2 = std::norm(psi(i));
        s2 += a2;
        s4 += a2 * a2;
    }
    if (!(s2 > 0.0)) throw std::invalid_argument("ipr: zero vector");
    return s2 * s2 / s4;
}

struct EigenstateEntry {
    int node = 0;  // 1-based
    std::string label;
    double amplitude = 0.0;  // |psi| under the display normalization sum|psi| = 1
};

struct EigenstateReport {
    std::complex<double> lambda;
    double xi = 0.0;  // IPR
    std::vector<EigenstateEntry> top;
};

namespace detail {

inline EigenstateReport make_eigenstate_report(const EigenPair& pair, int top_n,
                                               const Registry& reg) {
    EigenstateReport report;
    report.lambda = pair.lambda;
    report.xi = ipr(pair.psi);
    const int n = static_cast<int>(pair.psi.size());
    double l1 = 0.0;
    for (int i = 0; i < n; ++i) l1 += std::abs(pair.psi(i));
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return std::abs(pair.psi(a)) > std::abs(pair.psi(b));
    });
    const int take = std::min(top_n, n);
    report.top.reserve(take);
    for (int k = 0; k < take; ++k) {
        int i = idx[k];
        report.top.push_back({i + 1, reg.node_label(i + 1), std::abs(pair.psi(i)) / l1});
    }
    return report;
}

}  // namespace detail

/// Report for the eigenvector whose eigenvalue is nearest to `target`
/// (within match_tol): top-n nodes by amplitude, amplitudes renormalized so
/// they sum to 1 over the full state.
inline EigenstateReport eigenstate_report(const SpectrumResult& spectrum,
                                          std::complex<double> target, int top_n,
                                          const Registry& reg, double match_tol = 1e-6) {
    const EigenPair* best = nullptr;
    double best_dist = match_tol;
    for (const auto& pair : spectrum.pairs) {
        double d = std::abs(pair.lambda - target);
        if (d <= best_dist) {
            best_dist = d;
            best = &pair;
        }
    }
    if (!best)
        throw Error("eigenstate_report: no eigenvalue within " + format_double(match_tol) +
                    " of " + format_double(target.real()) + (target.imag() < 0 ? "-" : "+") +
                    format_double(std::abs(target.imag())) + "i");
    return detail::make_eigenstate_report(*best, top_n, reg);
}

/// Report for the k-th pair in sorted order (1-based), mostly a convenience
/// for "second largest |lambda|" style selections.
inline EigenstateReport eigenstate_report_by_index(const SpectrumResult& spectrum, int sorted_index,
                                                   int top_n, const Registry& reg) {
    if (sorted_index < 1 || sorted_index > static_cast<int>(spectrum.pairs.size()))
        throw std::out_of_range("eigenstate_report_by_index: index out of range");
    return detail::make_eigenstate_report(spectrum.pairs[sorted_index - 1], top_n, reg);
}

}  // namespace flowrank
