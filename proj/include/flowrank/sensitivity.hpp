#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "flowrank/common.hpp"
#include "flowrank/correlators.hpp"
#include "flowrank/google_matrix.hpp"

namespace flowrank {

enum class ShockKind { SectorPrice, CountryLabor };

/// Which side of a flow the multiplicative factor attaches to. ScaleSource
/// inflates everything originating in the shocked sector/country (a price or
/// labor-cost rise makes its output dearer); ScaleDestination inflates
/// everything it absorbs.
enum class ShockConvention { ScaleSource, ScaleDestination };

inline const char* shock_kind_name(ShockKind k) {
    return k == ShockKind::SectorPrice ? "sector_price" : "country_labor";
}
inline const char* shock_convention_name(ShockConvention c) {
    return c == ShockConvention::ScaleSource ? "scale_source" : "scale_destination";
}

/// A multiplicative perturbation of the tensor: flows tied to `target` (a
/// sector id for SectorPrice, a country id for CountryLabor) are scaled by
/// 1 + magnitude.
struct ShockSpec {
    ShockKind kind = ShockKind::SectorPrice;
    int target = 0;
    double magnitude = 0.0;
    ShockConvention convention = ShockConvention::ScaleSource;

    ShockSpec with_magnitude(double m) const {
        ShockSpec s = *this;
        s.magnitude = m;
        return s;
    }
};

inline MoneyTensor apply_shock(const MoneyTensor& tensor, const ShockSpec& shock) {
    const Registry& reg = tensor.registry();
    if (shock.kind == ShockKind::SectorPrice) {
        if (shock.target < 1 || shock.target > reg.num_sectors())
            throw std::out_of_range("apply_shock: unknown sector id " + std::to_string(shock.target));
    } else {
        if (shock.target < 1 || shock.target > reg.num_countries())
            throw std::out_of_range("apply_shock: unknown country id " + std::to_string(shock.target));
    }
    if (!(shock.magnitude > -1.0))
        throw ValidationError("apply_shock: magnitude must exceed -1");
    const double factor = 1.0 + shock.magnitude;
    Eigen::MatrixXd m = tensor.matrix();
    const bool on_source = shock.convention == ShockConvention::ScaleSource;
    for (int i = 1; i <= reg.num_nodes(); ++i) {
        NodeIndex ni = reg.node_split(i);
        int id = shock.kind == ShockKind::SectorPrice ? ni.sector : ni.country;
        if (id != shock.target) continue;
        if (on_source)
            m.col(i - 1) *= factor;
        else
            m.row(i - 1) *= factor;
    }
    return MoneyTensor(reg, std::move(m), tensor.year(), IntraCountryPolicy::Keep);
}

/// Trade balance per country, B_c = (P*_c - P_c)/(P*_c + P_c), and its
/// per-sector split B_(c,s) = (P*_(c,s) - P_(c,s))/(P*_c + P_c). The sector
/// rows of one country sum to that country's B_c identically.
struct BalanceReport {
    Eigen::VectorXd b_c;                                     // per country, NaN if undefined
    Eigen::MatrixXd b_cs;                                    // countries x sectors
    std::vector<uint8_t> defined;                            // per country
    ProbabilityBasis basis = ProbabilityBasis::Gpvm;
};

inline BalanceReport balance(const Eigen::VectorXd& p, const Eigen::VectorXd& pstar,
                             const Registry& reg,
                             ProbabilityBasis basis = ProbabilityBasis::Gpvm) {
    if (p.size() != reg.num_nodes() || pstar.size() != reg.num_nodes())
        throw std::invalid_argument("balance: probability vectors must cover all nodes");
    const int nc = reg.num_countries(), ns = reg.num_sectors();
    BalanceReport rep;
    rep.basis = basis;
    rep.b_c.resize(nc);
    rep.b_cs.resize(nc, ns);
    rep.defined.assign(nc, 1);
    for (int c = 1; c <= nc; ++c) {
        double pc = 0.0, pstarc = 0.0;
        for (int s = 1; s <= ns; ++s) {
            pc += p(reg.node_offset(c, s));
            pstarc += pstar(reg.node_offset(c, s));
        }
        double denom = pc + pstarc;
        if (denom > 0.0) {
            rep.b_c(c - 1) = (pstarc - pc) / denom;
            for (int s = 1; s <= ns; ++s) {
                int i = reg.node_offset(c, s);
                rep.b_cs(c - 1, s - 1) = (pstar(i) - p(i)) / denom;
            }
        } else {
            rep.defined[c - 1] = 0;
            rep.b_c(c - 1) = std::numeric_limits<double>::quiet_NaN();
            rep.b_cs.row(c - 1).setConstant(std::numeric_limits<double>::quiet_NaN());
        }
    }
    return rep;
}

/// Solver knobs shared by every probe of a derivative run.
struct SensitivityOptions {
    double alpha = 0.5;
    double solver_tol = 1e-12;
    int solver_max_iter = 100000;
    double step = 0.01;       // initial probe step
    int max_halvings = 4;
    double linearity_rtol = 0.01;   // probe pair must agree to 1% ...
    double linearity_floor = 1e-12; // ... on components above this magnitude
};

struct DerivativeDiagnostics {
    double step_used = 0.0;
    int halvings = 0;
    double worst_rel_disagreement = 0.0;
    int worst_component = -1;  // 0-based index into the tracked quantity vector
    bool linear_ok = false;
};

namespace detail {

/// Pipeline probabilities for one tensor under one basis.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> pipeline_probabilities(
    const MoneyTensor& tensor, ProbabilityBasis basis, const SensitivityOptions& opts) {
    if (basis == ProbabilityBasis::Gpvm) {
        GpvmResult r = gpvm(tensor, opts.alpha, opts.solver_tol, opts.solver_max_iter);
        return {r.pagerank.probabilities(), r.cheirank.probabilities()};
    }
    auto [imp, exp] = value_probabilities(import_export_values(tensor));
    return {imp.probabilities(), exp.probabilities()};
}

struct FdOutcome {
    Eigen::VectorXd derivative;
    DerivativeDiagnostics diag;
};

/// Forward difference of `probe` with the two-step linearity check: the
/// estimates at h and h/2 must agree within rtol on every component above
/// the floor; the step is halved (up to max_halvings) until they do. The
/// smaller-step estimate is returned.
inline FdOutcome finite_difference(const ShockSpec& shock,
                                   const std::function<Eigen::VectorXd(double)>& probe,
                                   const Eigen::VectorXd& baseline,
                                   const SensitivityOptions& opts) {
    double h = shock.magnitude != 0.0 ? shock.magnitude : opts.step;
    if (h == 0.0) throw std::invalid_argument("finite_difference: probe step is zero");
    FdOutcome out;
    Eigen::VectorXd est_h = (probe(h) - baseline) / h;
    for (int halving = 0; halving <= opts.max_halvings; ++halving) {
        Eigen::VectorXd est_half = (probe(h / 2.0) - baseline) / (h / 2.0);
        double worst = 0.0;
        int worst_i = -1;
        for (int i = 0; i < est_h.size(); ++i) {
            double scale = std::max(std::abs(est_h(i)), std::abs(est_half(i)));
            if (scale <= opts.linearity_floor) continue;
            double rel = std::abs(est_h(i) - est_half(i)) / scale;
            if (rel > worst) {
                worst = rel;
                worst_i = i;
            }
        }
        if (worst <= opts.linearity_rtol) {
            out.derivative = std::move(est_half);
            out.diag = DerivativeDiagnostics{h / 2.0, halving, worst, worst_i, true};
            return out;
        }
        if (halving == opts.max_halvings) {
            out.derivative = std::move(est_half);
            out.diag = DerivativeDiagnostics{h / 2.0, halving, worst, worst_i, false};
            return out;
        }
        h /= 2.0;
        est_h = std::move(est_half);
    }
    return out;  // unreachable
}

}  // namespace detail

/// Node-level derivatives of the rank probabilities with respect to one
/// shock: D = dP/ddelta, D* = dP*/ddelta and their logarithmic forms
/// D_l = D/P, D*_l = D*/P*.
struct NodeDerivatives {
    Eigen::VectorXd d_p, d_pstar;
    Eigen::VectorXd dl_p, dl_pstar;  // NaN where the baseline probability is 0
    ShockSpec shock;
    ProbabilityBasis basis = ProbabilityBasis::Gpvm;
    DerivativeDiagnostics diag;
};

inline NodeDerivatives rank_derivatives(const MoneyTensor& tensor, const ShockSpec& shock,
                                        ProbabilityBasis basis, const SensitivityOptions& opts = {}) {
    const int n = tensor.registry().num_nodes();
    auto [p0, pstar0] = detail::pipeline_probabilities(tensor, basis, opts);
    Eigen::VectorXd baseline(2 * n);
    baseline << p0, pstar0;
    auto probe = [&](double h) {
        auto [p, pstar] = detail::pipeline_probabilities(apply_shock(tensor, shock.with_magnitude(h)),
                                                         basis, opts);
        Eigen::VectorXd out(2 * n);
        out << p, pstar;
        return out;
    };
    detail::FdOutcome fd = detail::finite_difference(shock, probe, baseline, opts);
    if (!fd.diag.linear_ok)
        throw LinearityError(
            "rank_derivatives: linearity not reached after " + std::to_string(fd.diag.halvings) +
                " halvings; worst component " + std::to_string(fd.diag.worst_component) +
                " disagrees by " + format_double(fd.diag.worst_rel_disagreement),
            fd.diag.worst_component, fd.diag.worst_rel_disagreement);

    NodeDerivatives nd;
    nd.d_p = fd.derivative.head(n);
    nd.d_pstar = fd.derivative.tail(n);
    nd.dl_p.resize(n);
    nd.dl_pstar.resize(n);
    for (int i = 0; i < n; ++i) {
        nd.dl_p(i) = p0(i) > 0.0 ? nd.d_p(i) / p0(i) : std::numeric_limits<double>::quiet_NaN();
        nd.dl_pstar(i) =
            pstar0(i) > 0.0 ? nd.d_pstar(i) / pstar0(i) : std::numeric_limits<double>::quiet_NaN();
    }
    nd.shock = shock;
    nd.basis = basis;
    nd.diag = fd.diag;
    return nd;
}

/// Balance derivatives over a whole shock family: every sector for
/// SectorPrice, every country for CountryLabor. Targets run as independent
/// jobs; failed targets are marked and the sweep continues. If
/// `cross_countries` is nonempty, the per-sector balance derivatives
/// dB_(c,s)/ddelta are kept for those countries as N_s x n_targets matrices.
struct BalanceSweep {
    ShockKind family = ShockKind::SectorPrice;
    ShockConvention convention = ShockConvention::ScaleSource;
    ProbabilityBasis basis = ProbabilityBasis::Gpvm;
    int n_targets = 0;
    Eigen::MatrixXd db_c;                       // N_c x n_targets
    std::map<int, Eigen::MatrixXd> db_cs;       // country id -> N_s x n_targets
    std::vector<DerivativeDiagnostics> per_target;
    std::vector<uint8_t> target_failed;
    std::vector<std::string> failure_reason;
};

inline BalanceSweep balance_derivative_matrix(const MoneyTensor& tensor, ShockKind family,
                                              ProbabilityBasis basis,
                                              const SensitivityOptions& opts = {},
                                              const std::vector<int>& cross_countries = {},
                                              ShockConvention convention = ShockConvention::ScaleSource,
                                              int threads = 1) {
    const Registry& reg = tensor.registry();
    const int nc = reg.num_countries(), ns = reg.num_sectors();
    const int n_targets = family == ShockKind::SectorPrice ? ns : nc;

    // The baseline solve is shared by all targets of the sweep.
    auto [p0, pstar0] = detail::pipeline_probabilities(tensor, basis, opts);
    BalanceReport b0 = balance(p0, pstar0, reg, basis);

    auto tracked = [&](const BalanceReport& b) {
        // b_c followed by the requested countries' b_cs rows
        Eigen::VectorXd t(nc + static_cast<int>(cross_countries.size()) * ns);
        t.head(nc) = b.b_c;
        int at = nc;
        for (int c : cross_countries) {
            t.segment(at, ns) = b.b_cs.row(c - 1).transpose();
            at += ns;
        }
        return t;
    };
    Eigen::VectorXd baseline = tracked(b0);

    BalanceSweep sweep;
    sweep.family = family;
    sweep.convention = convention;
    sweep.basis = basis;
    sweep.n_targets = n_targets;
    sweep.db_c.resize(nc, n_targets);
    sweep.db_c.setZero();
    for (int c : cross_countries) {
        if (c < 1 || c > nc) throw std::out_of_range("balance_derivative_matrix: bad cross country id");
        sweep.db_cs[c] = Eigen::MatrixXd::Zero(ns, n_targets);
    }
    sweep.per_target.resize(n_targets);
    sweep.target_failed.assign(n_targets, 0);
    sweep.failure_reason.assign(n_targets, "");

    parallel_for(n_targets, threads, [&](int t) {
        ShockSpec shock{family, t + 1, opts.step, convention};
        auto probe = [&](double h) {
            auto [p, pstar] = detail::pipeline_probabilities(
                apply_shock(tensor, shock.with_magnitude(h)), basis, opts);
            return tracked(balance(p, pstar, reg, basis));
        };
        try {
            detail::FdOutcome fd = detail::finite_difference(shock, probe, baseline, opts);
            sweep.per_target[t] = fd.diag;
            if (!fd.diag.linear_ok) {
                sweep.target_failed[t] = 1;
                sweep.failure_reason[t] =
                    "linearity not reached; worst component " +
                    std::to_string(fd.diag.worst_component) + " disagrees by " +
                    format_double(fd.diag.worst_rel_disagreement);
            }
            sweep.db_c.col(t) = fd.derivative.head(nc);
            int at = nc;
            for (int c : cross_countries) {
                sweep.db_cs[c].col(t) = fd.derivative.segment(at, ns);
                at += ns;
            }
        } catch (const std::exception& e) {
            sweep.target_failed[t] = 1;
            sweep.failure_reason[t] = e.what();
        }
    });
    return sweep;
}

}  // namespace flowrank
