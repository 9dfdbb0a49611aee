#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "flowrank/value_rank.hpp"

namespace flowrank {

/// Which flow direction a stochastic matrix describes. Forward follows the
/// money (column = source node, import view); Reversed follows the inverted
/// links (export view).
enum class Direction { Forward, Reversed };

inline const char* direction_name(Direction d) {
    return d == Direction::Forward ? "forward" : "reversed";
}

/// Column-stochastic transition matrix built from a money tensor. Columns
/// with no outgoing value (dangling nodes) are replaced by the uniform
/// column 1/N at build time.
class StochasticMatrix {
public:
    StochasticMatrix(Eigen::MatrixXd a, Direction direction, std::vector<int> dangling)
        : a_(std::move(a)), direction_(direction), dangling_(std::move(dangling)) {}

    const Eigen::MatrixXd& matrix() const { return a_; }
    Direction direction() const { return direction_; }
    /// 1-based node ids whose columns were replaced by 1/N.
    const std::vector<int>& dangling_nodes() const { return dangling_; }
    int size() const { return static_cast<int>(a_.rows()); }

private:
    Eigen::MatrixXd a_;
    Direction direction_;
    std::vector<int> dangling_;
};

inline StochasticMatrix build_stochastic(const MoneyTensor& tensor, Direction direction) {
    const int n = tensor.registry().num_nodes();
    Eigen::MatrixXd a = tensor.matrix();
    if (direction == Direction::Reversed) a.transposeInPlace();
    std::vector<int> dangling;
    for (int j = 0; j < n; ++j) {
        double colsum = a.col(j).sum();
        if (colsum > 0.0) {
            a.col(j) /= colsum;
        } else {
            a.col(j).setConstant(1.0 / n);
            dangling.push_back(j + 1);
        }
    }
    return StochasticMatrix(std::move(a), direction, std::move(dangling));
}

/// G = alpha*S + (1-alpha) * v * e^T, applied without materializing the
/// rank-one term. alpha in (0, 1]; v is a probability vector (entries may be
/// zero for untraded sectors).
class GoogleMatrix {
public:
    GoogleMatrix(StochasticMatrix s, double alpha, Eigen::VectorXd v)
        : s_(std::move(s)), alpha_(alpha), v_(std::move(v)) {
        if (!(alpha_ > 0.0) || alpha_ > 1.0)
            throw ValidationError("damping factor must be in (0, 1], got " + format_double(alpha_));
        if (v_.size() != s_.size())
            throw ValidationError("personalization vector size mismatch");
        double sum = v_.sum();
        if (std::abs(sum - 1.0) > 1e-12)
            throw ValidationError("personalization vector must sum to 1, got " + format_double(sum));
        for (int i = 0; i < v_.size(); ++i)
            if (!(v_(i) >= 0.0))
                throw ValidationError("personalization entry negative or NaN at node " +
                                      std::to_string(i + 1));
    }

    int size() const { return s_.size(); }
    double alpha() const { return alpha_; }
    const Eigen::VectorXd& personalization() const { return v_; }
    const StochasticMatrix& stochastic() const { return s_; }
    Direction direction() const { return s_.direction(); }

    /// y = alpha*S*x + (1-alpha)*v*sum(x)
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
        Eigen::VectorXd y = alpha_ * (s_.matrix() * x);
        y.noalias() += (1.0 - alpha_) * x.sum() * v_;
        return y;
    }

    /// Same contraction applied to each column of a block.
    Eigen::MatrixXd apply_block(const Eigen::MatrixXd& x) const {
        Eigen::MatrixXd y = alpha_ * (s_.matrix() * x);
        Eigen::RowVectorXd colsums = x.colwise().sum();
        y.noalias() += (1.0 - alpha_) * v_ * colsums;
        return y;
    }

    /// Materialized dense form (used for spectra).
    Eigen::MatrixXd dense() const {
        Eigen::MatrixXd g = alpha_ * s_.matrix();
        g.noalias() += (1.0 - alpha_) * v_ * Eigen::RowVectorXd::Ones(size());
        return g;
    }

private:
    StochasticMatrix s_;
    double alpha_;
    Eigen::VectorXd v_;
};

/// First-pass personalization: within each country the mass 1/N_c is split
/// across sectors by value share (import values for Forward, export values
/// for Reversed). A country with zero total gets the uniform split, keeping
/// its 1/N_c mass.
inline Eigen::VectorXd personalization_first(const MoneyTensor& tensor, Direction direction) {
    const Registry& reg = tensor.registry();
    ValueTable vt = import_export_values(tensor);
    const Eigen::VectorXd& node_value =
        direction == Direction::Forward ? vt.node_import : vt.node_export;
    const int nc = reg.num_countries(), ns = reg.num_sectors();
    Eigen::VectorXd v(reg.num_nodes());
    for (int c = 1; c <= nc; ++c) {
        double country_total = 0.0;
        for (int s = 1; s <= ns; ++s) country_total += node_value(reg.node_offset(c, s));
        for (int s = 1; s <= ns; ++s) {
            int i = reg.node_offset(c, s);
            v(i) = country_total > 0.0 ? node_value(i) / (nc * country_total)
                                       : 1.0 / (static_cast<double>(nc) * ns);
        }
    }
    return v;
}

/// Second-pass personalization: the same sector profile, taken from the
/// reduced first-pass sector probabilities, replicated for every country.
inline Eigen::VectorXd personalization_second(const Eigen::VectorXd& sector_probabilities,
                                              const Registry& reg) {
    if (sector_probabilities.size() != reg.num_sectors())
        throw std::invalid_argument("personalization_second: expected one probability per sector");
    const int nc = reg.num_countries(), ns = reg.num_sectors();
    Eigen::VectorXd v(reg.num_nodes());
    for (int c = 1; c <= nc; ++c)
        for (int s = 1; s <= ns; ++s) v(reg.node_offset(c, s)) = sector_probabilities(s - 1) / nc;
    return v;
}

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;  // L1 norm of G*p - p at exit
};

/// Power iteration with L1 renormalization. Deterministic for fixed inputs;
/// the result does not depend on the start vector beyond the tolerance.
inline RankVector pagerank(const GoogleMatrix& g, const Eigen::VectorXd& start, double tol = 1e-12,
                           int max_iter = 100000, SolveStats* stats = nullptr) {
    if (start.size() != g.size()) throw std::invalid_argument("pagerank: start vector size mismatch");
    if (max_iter < 1) throw std::invalid_argument("pagerank: max_iter must be at least 1");
    double ssum = start.sum();
    if (!(ssum > 0.0)) throw std::invalid_argument("pagerank: start vector must have positive mass");
    for (int i = 0; i < start.size(); ++i)
        if (!(start(i) >= 0.0))
            throw std::invalid_argument("pagerank: start vector must be nonnegative");
    Eigen::VectorXd x = start / ssum;
    double residual = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        Eigen::VectorXd y = g.apply(x);
        y /= y.sum();
        residual = (y - x).lpNorm<1>();
        x.swap(y);
        if (residual <= tol) break;
    }
    if (residual > tol)
        throw ConvergenceError("pagerank did not reach tolerance " + format_double(tol) + " after " +
                                   std::to_string(max_iter) + " iterations (residual " +
                                   format_double(residual) + ")",
                               residual);
    if (stats) *stats = SolveStats{it + 1, residual};
    x /= x.sum();
    return RankVector(x, g.direction() == Direction::Forward ? RankKind::PageRank
                                                             : RankKind::CheiRank);
}

/// One iteration of the personalized solve for one direction.
struct GpvmIteration {
    Eigen::VectorXd personalization;
    Eigen::VectorXd p;
    SolveStats stats;
};

struct GpvmSide {
    GpvmIteration first;
    GpvmIteration second;
    double l1_change = 0.0;  // |p_first - p_second|_1
};

/// Result of the two-pass personalized ranking: final PageRank/CheiRank plus
/// the personalization vectors and probabilities of both passes.
struct GpvmResult {
    RankVector pagerank;
    RankVector cheirank;
    GpvmSide forward;
    GpvmSide reversed;
    double alpha = 0.5;
};

namespace detail {

inline GpvmSide gpvm_side(const MoneyTensor& tensor, Direction dir, double alpha, double tol,
                          int max_iter) {
    const Registry& reg = tensor.registry();
    StochasticMatrix s = build_stochastic(tensor, dir);
    GpvmSide side;
    side.first.personalization = personalization_first(tensor, dir);
    GoogleMatrix g1(s, alpha, side.first.personalization);
    side.first.p =
        pagerank(g1, side.first.personalization, tol, max_iter, &side.first.stats).probabilities();

    Ranking sector = reduce_over_countries(side.first.p, reg);
    side.second.personalization = personalization_second(sector.p, reg);
    GoogleMatrix g2(std::move(s), alpha, side.second.personalization);
    side.second.p =
        pagerank(g2, side.second.personalization, tol, max_iter, &side.second.stats).probabilities();
    side.l1_change = (side.first.p - side.second.p).lpNorm<1>();
    return side;
}

}  // namespace detail

/// Two-pass personalized ranking of both directions. The second pass reuses
/// the first pass's reduced sector probabilities as the sector profile of
/// its personalization vector.
inline GpvmResult gpvm(const MoneyTensor& tensor, double alpha = 0.5, double tol = 1e-12,
                       int max_iter = 100000) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw ValidationError("gpvm: damping factor must be in (0, 1)");
    GpvmSide fwd = detail::gpvm_side(tensor, Direction::Forward, alpha, tol, max_iter);
    GpvmSide rev = detail::gpvm_side(tensor, Direction::Reversed, alpha, tol, max_iter);
    RankVector p(fwd.second.p, RankKind::PageRank);
    RankVector pstar(rev.second.p, RankKind::CheiRank);
    return GpvmResult{std::move(p), std::move(pstar), std::move(fwd), std::move(rev), alpha};
}

}  // namespace flowrank
