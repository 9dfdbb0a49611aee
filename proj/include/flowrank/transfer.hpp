#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "flowrank/common.hpp"
#include "flowrank/google_matrix.hpp"

namespace flowrank {

/// Multi-hop transfer operator T = (1-eta) (1 - eta G*)^-1 G: flows enter
/// through G and relax through repeated G* scattering at rate eta. T stays
/// in the column-stochastic class.
struct TransferMatrix {
    Eigen::MatrixXd t;
    double eta = 0.7;
};

/// Builds T by the geometric series (1-eta) sum_k (eta G*)^k G. Each series
/// term is column-stochastic scaled by eta^k, so the series is truncated
/// once the appended term's column sum eta^k drops below 1e-12; the
/// remainder after k terms is bounded by eta^(k+1)/(1-eta) per column.
/// Column blocks are independent, so the result is identical for any thread
/// count.
inline TransferMatrix transfer_matrix(const GoogleMatrix& g, const GoogleMatrix& gstar, double eta,
                                      int threads = 1) {
    if (!(eta > 0.0) || !(eta < 1.0)) {
        if (eta == 0.0) return TransferMatrix{g.dense(), 0.0};  // resolvent collapses to G
        throw ValidationError("transfer_matrix: eta must be in [0, 1), got " + format_double(eta));
    }
    if (g.size() != gstar.size())
        throw std::invalid_argument("transfer_matrix: operand size mismatch");
    const int n = g.size();
    const double term_cutoff = 1e-12;
    const Eigen::MatrixXd g_dense = g.dense();
    Eigen::MatrixXd t(n, n);

    const int block = 256;
    const int nblocks = (n + block - 1) / block;
    parallel_for(nblocks, threads, [&](int bi) {
        const int j0 = bi * block;
        const int width = std::min(block, n - j0);
        Eigen::MatrixXd term = g_dense.middleCols(j0, width);
        Eigen::MatrixXd acc = term;
        double scale = 1.0;  // column sum of the current term
        while (true) {
            scale *= eta;
            if (scale < term_cutoff) break;
            term = eta * gstar.apply_block(term);
            acc += term;
        }
        t.middleCols(j0, width) = (1.0 - eta) * acc;
    });
    return TransferMatrix{std::move(t), eta};
}

/// Sector-to-sector transformation seen from one source country: the T
/// columns of (c', s') summed over destination countries,
/// R_ss'(c') = sum_c T[(c,s), (c',s')]. Columns inherit T's unit sums.
inline Eigen::MatrixXd reduced_transfer(const TransferMatrix& transfer, const Registry& reg,
                                        int source_country) {
    if (source_country < 1 || source_country > reg.num_countries())
        throw std::out_of_range("reduced_transfer: unknown country id " +
                                std::to_string(source_country));
    const int nc = reg.num_countries(), ns = reg.num_sectors();
    if (transfer.t.rows() != reg.num_nodes())
        throw std::invalid_argument("reduced_transfer: matrix does not match registry");
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(ns, ns);
    for (int sp = 1; sp <= ns; ++sp) {
        int col = reg.node_offset(source_country, sp);
        for (int c = 1; c <= nc; ++c)
            for (int s = 1; s <= ns; ++s) r(s - 1, sp - 1) += transfer.t(reg.node_offset(c, s), col);
    }
    return r;
}

/// Unweighted mean of the per-country reductions over all source countries.
inline Eigen::MatrixXd reduced_transfer_world(const TransferMatrix& transfer, const Registry& reg) {
    const int ns = reg.num_sectors();
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(ns, ns);
    for (int c = 1; c <= reg.num_countries(); ++c) r += reduced_transfer(transfer, reg, c);
    return r / reg.num_countries();
}

/// Profile v(s): how sector s' of the reduced matrix spreads over sectors.
/// This is just the s'-th column; it sums to 1.
inline Eigen::VectorXd transform_vector(const Eigen::MatrixXd& reduced, int source_sector) {
    if (source_sector < 1 || source_sector > reduced.cols())
        throw std::out_of_range("transform_vector: sector id out of range");
    return reduced.col(source_sector - 1);
}

/// Single-hop baseline: the (c', s') column of the raw tensor summed over
/// destination countries and normalized. Columns with no outgoing value
/// have no profile (nullopt); zero columns are not replaced here.
inline std::optional<Eigen::VectorXd> raw_m_transform(const MoneyTensor& tensor, int source_country,
                                                      int source_sector) {
    const Registry& reg = tensor.registry();
    int col = reg.node_offset(source_country, source_sector);
    const int nc = reg.num_countries(), ns = reg.num_sectors();
    Eigen::VectorXd profile = Eigen::VectorXd::Zero(ns);
    for (int c = 1; c <= nc; ++c)
        for (int s = 1; s <= ns; ++s) profile(s - 1) += tensor.matrix()(reg.node_offset(c, s), col);
    double total = profile.sum();
    if (!(total > 0.0)) return std::nullopt;
    return profile / total;
}

}  // namespace flowrank
