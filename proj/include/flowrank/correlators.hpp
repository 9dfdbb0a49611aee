#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "flowrank/value_rank.hpp"

namespace flowrank {

/// kappa = N * sum_i P(i) P*(i) - 1. Zero for independent uniform vectors,
/// N-1 for identical point masses, -1 for disjoint supports.
inline double global_correlator(const Eigen::VectorXd& p, const Eigen::VectorXd& pstar) {
    if (p.size() != pstar.size())
        throw std::invalid_argument("global_correlator: vector length mismatch");
    return static_cast<double>(p.size()) * p.dot(pstar) - 1.0;
}

/// Sector-sector correlator matrix. Entries where a sector marginal
/// vanishes are undefined and carried as explicit markers, never as zeros.
struct SectorCorrelatorMatrix {
    Eigen::MatrixXd value;                              // kappa_ss'
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> defined;

    Eigen::VectorXd diagonal() const { return value.diagonal(); }
};

/// kappa_ss' = N_c * sum_c P_(c,s) P*_(c,s') / (P_s P*_s') - 1, where P_s
/// and P*_s' are the sector marginals.
inline SectorCorrelatorMatrix sector_sector_correlator(const Eigen::VectorXd& p,
                                                       const Eigen::VectorXd& pstar,
                                                       const Registry& reg) {
    if (p.size() != reg.num_nodes() || pstar.size() != reg.num_nodes())
        throw std::invalid_argument("sector_sector_correlator: vectors must cover all nodes");
    const int nc = reg.num_countries(), ns = reg.num_sectors();
    Eigen::VectorXd ps = reduce_over_countries(p, reg).p;
    Eigen::VectorXd pstars = reduce_over_countries(pstar, reg).p;
    SectorCorrelatorMatrix out;
    out.value.resize(ns, ns);
    out.defined.resize(ns, ns);
    for (int s = 1; s <= ns; ++s)
        for (int sp = 1; sp <= ns; ++sp) {
            double denom = ps(s - 1) * pstars(sp - 1);
            if (denom > 0.0) {
                double acc = 0.0;
                for (int c = 1; c <= nc; ++c)
                    acc += p(reg.node_offset(c, s)) * pstar(reg.node_offset(c, sp));
                out.value(s - 1, sp - 1) = nc * acc / denom - 1.0;
                out.defined(s - 1, sp - 1) = true;
            } else {
                out.value(s - 1, sp - 1) = std::numeric_limits<double>::quiet_NaN();
                out.defined(s - 1, sp - 1) = false;
            }
        }
    return out;
}

/// kappa(c) = N_c sum_c P_c P*_c - 1 and kappa(s) = N_s sum_s P_s P*_s - 1
/// from the traced probabilities.
inline std::pair<double, double> reduced_correlators(const Eigen::VectorXd& p,
                                                     const Eigen::VectorXd& pstar,
                                                     const Registry& reg) {
    Eigen::VectorXd pc = reduce_over_sectors(p, reg).p;
    Eigen::VectorXd pstarc = reduce_over_sectors(pstar, reg).p;
    Eigen::VectorXd ps = reduce_over_countries(p, reg).p;
    Eigen::VectorXd pstars = reduce_over_countries(pstar, reg).p;
    double kc = reg.num_countries() * pc.dot(pstarc) - 1.0;
    double ks = reg.num_sectors() * ps.dot(pstars) - 1.0;
    return {kc, ks};
}

/// Which probability pair fed a correlator computation.
enum class ProbabilityBasis { Gpvm, Value };

inline const char* basis_name(ProbabilityBasis b) {
    return b == ProbabilityBasis::Gpvm ? "gpvm" : "value";
}

/// The full correlator family for one probability pair.
struct CorrelatorReport {
    double kappa = 0.0;                // global
    SectorCorrelatorMatrix kappa_ss;   // sector-sector matrix
    Eigen::VectorXd kappa_s;           // diagonal of kappa_ss
    double kappa_c = 0.0;              // over traced country probabilities
    double kappa_sectors = 0.0;        // over traced sector probabilities
    ProbabilityBasis basis = ProbabilityBasis::Gpvm;
};

inline CorrelatorReport correlator_report(const Eigen::VectorXd& p, const Eigen::VectorXd& pstar,
                                          const Registry& reg, ProbabilityBasis basis) {
    CorrelatorReport rep;
    rep.kappa = global_correlator(p, pstar);
    rep.kappa_ss = sector_sector_correlator(p, pstar, reg);
    rep.kappa_s = rep.kappa_ss.diagonal();
    auto [kc, ks] = reduced_correlators(p, pstar, reg);
    rep.kappa_c = kc;
    rep.kappa_sectors = ks;
    rep.basis = basis;
    return rep;
}

}  // namespace flowrank
