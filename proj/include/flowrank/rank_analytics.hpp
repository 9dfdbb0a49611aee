#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "flowrank/google_matrix.hpp"

namespace flowrank {

/// Combined two-dimensional rank. Nodes are ordered by first appearance in
/// the growing squares [1..k] x [1..k] of the (K, K*) plane. Within one
/// growth step k the node sitting at K = k (if its K* <= k) is admitted
/// before the node sitting at K* = k (if its K <= k); a corner node with
/// K = K* = k is admitted once.
inline std::vector<int> two_d_rank(const std::vector<int>& k_rank,
                                   const std::vector<int>& kstar_rank) {
    const int m = static_cast<int>(k_rank.size());
    if (static_cast<int>(kstar_rank.size()) != m)
        throw std::invalid_argument("two_d_rank: rank lists differ in length");
    std::vector<int> at_k(m + 1, 0), at_kstar(m + 1, 0);
    for (int i = 0; i < m; ++i) {
        int k = k_rank[i], ks = kstar_rank[i];
        if (k < 1 || k > m || at_k[k]) throw std::invalid_argument("two_d_rank: K is not a permutation");
        if (ks < 1 || ks > m || at_kstar[ks])
            throw std::invalid_argument("two_d_rank: K* is not a permutation");
        at_k[k] = i + 1;
        at_kstar[ks] = i + 1;
    }
    std::vector<int> k2(m, 0);
    int next = 1;
    for (int k = 1; k <= m; ++k) {
        int via_k = at_k[k];  // node at PageRank position k
        if (kstar_rank[via_k - 1] <= k && k2[via_k - 1] == 0) k2[via_k - 1] = next++;
        int via_kstar = at_kstar[k];  // node at CheiRank position k
        if (k_rank[via_kstar - 1] <= k && k2[via_kstar - 1] == 0) k2[via_kstar - 1] = next++;
    }
    return k2;
}

enum class RankScope { Nodes, Countries, Sectors, CountriesWithinSector };

inline const char* rank_scope_name(RankScope s) {
    switch (s) {
        case RankScope::Nodes: return "nodes";
        case RankScope::Countries: return "countries";
        case RankScope::Sectors: return "sectors";
        case RankScope::CountriesWithinSector: return "countries_within_sector";
    }
    return "?";
}

struct RankPlaneRow {
    int entity = 0;  // node, country or sector id depending on scope
    std::string label;
    int k = 0;
    int kstar = 0;
    int k2 = 0;
    double p = 0.0;
    double pstar = 0.0;
};

/// One scope's (K, K*, K_2) table, plot-ready.
struct RankPlane {
    RankScope scope = RankScope::Nodes;
    int sector = 0;  // set for CountriesWithinSector
    std::vector<RankPlaneRow> rows;
};

/// Builds the rank-plane table for a scope from a pair of probability
/// vectors over nodes. For CountriesWithinSector the probabilities are the
/// fixed-sector slices P_(c,s); they are ranked as-is, without
/// renormalization.
inline RankPlane rank_plane(RankScope scope, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& pstar, const Registry& reg, int sector = 0) {
    if (p.size() != reg.num_nodes() || pstar.size() != reg.num_nodes())
        throw std::invalid_argument("rank_plane: probability vectors must cover all nodes");
    RankPlane plane;
    plane.scope = scope;

    Eigen::VectorXd a, b;
    std::vector<int> entities;
    std::vector<std::string> labels;
    switch (scope) {
        case RankScope::Nodes:
            a = p;
            b = pstar;
            for (int i = 1; i <= reg.num_nodes(); ++i) {
                entities.push_back(i);
                labels.push_back(reg.node_label(i));
            }
            break;
        case RankScope::Countries: {
            a = reduce_over_sectors(p, reg).p;
            b = reduce_over_sectors(pstar, reg).p;
            for (const auto& c : reg.countries()) {
                entities.push_back(c.id);
                labels.push_back(c.code);
            }
            break;
        }
        case RankScope::Sectors: {
            a = reduce_over_countries(p, reg).p;
            b = reduce_over_countries(pstar, reg).p;
            for (const auto& s : reg.sectors()) {
                entities.push_back(s.id);
                labels.push_back(s.code);
            }
            break;
        }
        case RankScope::CountriesWithinSector: {
            if (sector < 1 || sector > reg.num_sectors())
                throw std::out_of_range("rank_plane: sector id out of range");
            plane.sector = sector;
            a.resize(reg.num_countries());
            b.resize(reg.num_countries());
            for (int c = 1; c <= reg.num_countries(); ++c) {
                a(c - 1) = p(reg.node_offset(c, sector));
                b(c - 1) = pstar(reg.node_offset(c, sector));
            }
            for (const auto& c : reg.countries()) {
                entities.push_back(c.id);
                labels.push_back(c.code);
            }
            break;
        }
    }

    std::vector<int> k = rank_order(a);
    std::vector<int> kstar = rank_order(b);
    std::vector<int> k2 = two_d_rank(k, kstar);
    plane.rows.resize(entities.size());
    for (size_t i = 0; i < entities.size(); ++i)
        plane.rows[i] = RankPlaneRow{entities[i], labels[i], k[i],     kstar[i],
                                     k2[i],       a(i),      b(i)};
    return plane;
}

struct ExponentFit {
    double beta = 0.0;    // p(K) ~ K^(-beta)
    double std_err = 0.0;  // standard error of the fitted slope
    int points = 0;
};

/// Ordinary least squares of ln p against ln K over ranks k_min..k_max.
inline ExponentFit fit_exponent(const RankVector& rank, int k_min, int k_max) {
    const int n = rank.size();
    if (k_min < 1 || k_max > n || k_max - k_min + 1 < 10)
        throw std::invalid_argument("fit_exponent: need at least 10 ranks inside 1..N");
    const int m = k_max - k_min + 1;
    double sx = 0, sy = 0;
    std::vector<double> xs(m), ys(m);
    for (int k = k_min; k <= k_max; ++k) {
        double pk = rank.p_at_rank(k);
        if (!(pk > 0.0))
            throw ValidationError("fit_exponent: nonpositive probability at rank " + std::to_string(k));
        xs[k - k_min] = std::log(static_cast<double>(k));
        ys[k - k_min] = std::log(pk);
        sx += xs[k - k_min];
        sy += ys[k - k_min];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    double ssr = 0;
    for (int i = 0; i < m; ++i) {
        double r = ys[i] - my - slope * (xs[i] - mx);
        ssr += r * r;
    }
    const double se = m > 2 ? std::sqrt(ssr / (m - 2) / sxx) : 0.0;
    return ExponentFit{-slope, se, m};
}

}  // namespace flowrank
