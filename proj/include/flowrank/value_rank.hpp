#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "flowrank/money_tensor.hpp"

namespace flowrank {

/// Per-node import value V_cs, export value V*_cs and the total exchange V.
struct ValueTable {
    Eigen::VectorXd node_import;  // V_cs, indexed by node offset
    Eigen::VectorXd node_export;  // V*_cs
    double total = 0.0;           // V
};

inline ValueTable import_export_values(const MoneyTensor& tensor) {
    const Eigen::MatrixXd& m = tensor.matrix();
    ValueTable t;
    t.node_import = m.rowwise().sum();
    t.node_export = m.colwise().sum().transpose();
    t.total = m.sum();
    return t;
}

/// Non-increasing ordering of a probability (or score) vector.
/// Returns ranks[i] = rank of entry i, 1-based; ties broken by ascending
/// entry index so orderings are reproducible.
inline std::vector<int> rank_order(const Eigen::VectorXd& p) {
    const int n = static_cast<int>(p.size());
    for (int i = 0; i < n; ++i)
        if (std::isnan(p(i))) throw std::invalid_argument("rank_order: NaN at entry " + std::to_string(i + 1));
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&p](int a, int b) { return p(a) > p(b); });
    std::vector<int> ranks(n);
    for (int r = 0; r < n; ++r) ranks[idx[r]] = r + 1;
    return ranks;
}

/// A probability vector over entries together with both directions of its
/// rank permutation.
struct Ranking {
    Eigen::VectorXd p;
    std::vector<int> rank_of;  // rank_of[i] = rank (1-based) of entry i
    std::vector<int> at_rank;  // at_rank[r-1] = entry index (1-based) at rank r

    static Ranking make(Eigen::VectorXd probabilities) {
        Ranking r;
        r.rank_of = rank_order(probabilities);
        r.at_rank.resize(r.rank_of.size());
        for (size_t i = 0; i < r.rank_of.size(); ++i) r.at_rank[r.rank_of[i] - 1] = static_cast<int>(i) + 1;
        r.p = std::move(probabilities);
        return r;
    }

    double p_at_rank(int r) const { return p(at_rank[r - 1] - 1); }
};

enum class RankKind { PageRank, CheiRank, ImportRank, ExportRank };

inline const char* rank_kind_name(RankKind k) {
    switch (k) {
        case RankKind::PageRank: return "PageRank";
        case RankKind::CheiRank: return "CheiRank";
        case RankKind::ImportRank: return "ImportRank";
        case RankKind::ExportRank: return "ExportRank";
    }
    return "?";
}

/// A normalized probability vector over the N nodes with its rank order.
class RankVector {
public:
    RankVector(Eigen::VectorXd p, RankKind kind) : kind_(kind) {
        const double sum = p.sum();
        if (!(std::abs(sum - 1.0) <= 1e-12 * std::max(1.0, std::abs(sum))))
            throw ValidationError(std::string(rank_kind_name(kind)) +
                                  " probabilities must sum to 1, got " + format_double(sum));
        for (int i = 0; i < p.size(); ++i)
            if (!(p(i) >= 0.0))
                throw ValidationError(std::string(rank_kind_name(kind)) +
                                      " probability negative or NaN at node " + std::to_string(i + 1));
        ranking_ = Ranking::make(std::move(p));
    }

    RankKind kind() const { return kind_; }
    const Eigen::VectorXd& probabilities() const { return ranking_.p; }
    const Ranking& ranking() const { return ranking_; }
    int size() const { return static_cast<int>(ranking_.p.size()); }

    /// Rank K of a node (1-based node id).
    int rank_of(int node) const { return ranking_.rank_of[node - 1]; }
    /// Node id holding rank K.
    int node_at(int rank) const { return ranking_.at_rank[rank - 1]; }
    /// Probability at rank K (non-increasing in K).
    double p_at_rank(int rank) const { return ranking_.p_at_rank(rank); }

private:
    Ranking ranking_;
    RankKind kind_;
};

/// ImportRank and ExportRank: node value shares of the total exchange value.
inline std::pair<RankVector, RankVector> value_probabilities(const ValueTable& values) {
    if (!(values.total > 0.0))
        throw ValidationError("value_probabilities: total exchange value is zero");
    return {RankVector(values.node_import / values.total, RankKind::ImportRank),
            RankVector(values.node_export / values.total, RankKind::ExportRank)};
}

/// P_c = sum over sectors of P_(c,s).
inline Ranking reduce_over_sectors(const Eigen::VectorXd& p, const Registry& reg) {
    if (p.size() != reg.num_nodes())
        throw std::invalid_argument("reduce_over_sectors: vector size mismatch");
    Eigen::VectorXd pc = Eigen::VectorXd::Zero(reg.num_countries());
    for (int c = 1; c <= reg.num_countries(); ++c)
        for (int s = 1; s <= reg.num_sectors(); ++s) pc(c - 1) += p(reg.node_offset(c, s));
    return Ranking::make(std::move(pc));
}

/// P_s = sum over countries of P_(c,s).
inline Ranking reduce_over_countries(const Eigen::VectorXd& p, const Registry& reg) {
    if (p.size() != reg.num_nodes())
        throw std::invalid_argument("reduce_over_countries: vector size mismatch");
    Eigen::VectorXd ps = Eigen::VectorXd::Zero(reg.num_sectors());
    for (int c = 1; c <= reg.num_countries(); ++c)
        for (int s = 1; s <= reg.num_sectors(); ++s) ps(s - 1) += p(reg.node_offset(c, s));
    return Ranking::make(std::move(ps));
}

}  // namespace flowrank
