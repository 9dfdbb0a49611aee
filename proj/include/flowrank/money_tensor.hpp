#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "flowrank/registry.hpp"

namespace flowrank {

/// Whether flows between sectors of the same country are kept or zeroed.
/// The cross-border analysis drops them; Keep is available for experiments
/// but none of the reference results use it.
enum class IntraCountryPolicy { Drop, Keep };

/// Dense 4-index money-transfer tensor M[c][c'][s][s'] = value moved from
/// source (c', s') to destination (c, s), stored as the node-indexed N x N
/// matrix with row = destination node and column = source node.
class MoneyTensor {
public:
    MoneyTensor(Registry registry, Eigen::MatrixXd values, int year = 0,
                IntraCountryPolicy policy = IntraCountryPolicy::Drop)
        : registry_(std::move(registry)), m_(std::move(values)), year_(year) {
        const int n = registry_.num_nodes();
        if (m_.rows() != n || m_.cols() != n)
            throw ValidationError("tensor matrix must be " + std::to_string(n) + "x" +
                                  std::to_string(n) + ", got " + std::to_string(m_.rows()) +
                                  "x" + std::to_string(m_.cols()));
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                double v = m_(i, j);
                if (!std::isfinite(v))
                    throw ValidationError("non-finite tensor entry at row " + std::to_string(i + 1) +
                                          ", col " + std::to_string(j + 1));
                if (v < 0.0)
                    throw ValidationError("negative tensor entry at row " + std::to_string(i + 1) +
                                          ", col " + std::to_string(j + 1));
            }
        if (policy == IntraCountryPolicy::Drop) {
            const int ns = registry_.num_sectors();
            for (int c = 1; c <= registry_.num_countries(); ++c) {
                int base = (c - 1) * ns;
                auto block = m_.block(base, base, ns, ns);
                dropped_intra_value_ += block.sum();
                block.setZero();
            }
        }
    }

    const Registry& registry() const { return registry_; }
    int year() const { return year_; }

    /// Node-indexed view: matrix()(dest_offset, src_offset).
    const Eigen::MatrixXd& matrix() const { return m_; }

    double value(int c, int c_src, int s, int s_src) const {
        return m_(registry_.node_offset(c, s), registry_.node_offset(c_src, s_src));
    }

    double total() const { return m_.sum(); }

    /// Intra-country value zeroed at construction (0 when input was clean).
    double dropped_intra_value() const { return dropped_intra_value_; }

    MoneyTensor scaled(double k) const {
        if (!(k > 0.0)) throw ValidationError("scale factor must be positive");
        return MoneyTensor(registry_, m_ * k, year_, IntraCountryPolicy::Keep);
    }

private:
    Registry registry_;
    Eigen::MatrixXd m_;
    int year_ = 0;
    double dropped_intra_value_ = 0.0;
};

/// Deterministic random tensor for tests and demos. Each admissible
/// cross-border cell is filled with probability `density`; values are
/// log-uniform in [1, 1e4]. Low densities leave some nodes without outgoing
/// (or incoming) flow, which downstream code must tolerate.
inline MoneyTensor synth_generate(int n_countries, int n_sectors, double density, uint64_t seed,
                                  int year = 0) {
    if (n_countries < 2) throw ValidationError("synthetic tensor needs at least 2 countries");
    if (n_sectors < 1) throw ValidationError("synthetic tensor needs at least 1 sector");
    if (!(density > 0.0) || density > 1.0)
        throw ValidationError("density must be in (0, 1]");
    Registry reg = Registry::synthetic(n_countries, n_sectors);
    const int n = reg.num_nodes();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);

    // splitmix64 stream; fixed cell order makes the tensor a pure function
    // of the arguments.
    uint64_t state = seed;
    auto next_u64 = [&state]() {
        state += 0x9e3779b97f4a7c15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    };
    auto next_unit = [&next_u64]() { return (next_u64() >> 11) * 0x1.0p-53; };

    for (int c_src = 1; c_src <= n_countries; ++c_src)
        for (int s_src = 1; s_src <= n_sectors; ++s_src)
            for (int c = 1; c <= n_countries; ++c) {
                if (c == c_src) continue;
                for (int s = 1; s <= n_sectors; ++s) {
                    double gate = next_unit();
                    double mag = next_unit();
                    if (gate < density)
                        m(reg.node_offset(c, s), reg.node_offset(c_src, s_src)) =
                            std::exp(mag * std::log(1e4));
                }
            }
    return MoneyTensor(std::move(reg), std::move(m), year);
}

/// Report-only health summary of a tensor.
struct ValidationReport {
    double total_value = 0.0;              // V
    Eigen::VectorXd country_import;        // V_c
    Eigen::VectorXd country_export;        // V*_c
    std::vector<int> dangling_export_nodes;  // 1-based nodes with zero outgoing value
    std::vector<int> dangling_import_nodes;  // 1-based nodes with zero incoming value
    int nan_count = 0;
    int negative_count = 0;

    bool fatal() const { return !(total_value > 0.0) || nan_count > 0 || negative_count > 0; }
};

inline ValidationReport validate(const MoneyTensor& tensor) {
    const Registry& reg = tensor.registry();
    const Eigen::MatrixXd& m = tensor.matrix();
    const int n = reg.num_nodes();
    ValidationReport rep;
    rep.country_import = Eigen::VectorXd::Zero(reg.num_countries());
    rep.country_export = Eigen::VectorXd::Zero(reg.num_countries());
    Eigen::VectorXd in = m.rowwise().sum();    // V_cs
    Eigen::VectorXd out = m.colwise().sum();   // V*_cs
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double v = m(i, j);
            if (std::isnan(v)) ++rep.nan_count;
            else if (v < 0.0) ++rep.negative_count;
        }
    rep.total_value = m.sum();
    for (int i = 1; i <= n; ++i) {
        NodeIndex ni = reg.node_split(i);
        rep.country_import(ni.country - 1) += in(i - 1);
        rep.country_export(ni.country - 1) += out(i - 1);
        if (out(i - 1) == 0.0) rep.dangling_export_nodes.push_back(i);
        if (in(i - 1) == 0.0) rep.dangling_import_nodes.push_back(i);
    }
    return rep;
}

}  // namespace flowrank
