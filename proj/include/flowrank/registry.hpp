#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "flowrank/common.hpp"

namespace flowrank {

struct CountryInfo {
    int id = 0;  // 1-based, contiguous
    std::string code;
    std::string name;
};

struct SectorInfo {
    int id = 0;  // 1-based, contiguous
    std::string code;
    std::string name;
};

/// A node of the flow network: one (country, sector) pair. Nodes are numbered
/// i = s + (c-1)*N_s with i in 1..N, so all sectors of country 1 come first.
struct NodeIndex {
    int value = 0;  // 1-based
    int country = 0;
    int sector = 0;
};

/// Ordered country and sector lists shared by every structure in a run.
class Registry {
public:
    Registry(std::vector<CountryInfo> countries, std::vector<SectorInfo> sectors)
        : countries_(std::move(countries)), sectors_(std::move(sectors)) {
        if (countries_.size() < 2) throw ValidationError("registry needs at least 2 countries");
        if (sectors_.empty()) throw ValidationError("registry needs at least 1 sector");
        for (size_t k = 0; k < countries_.size(); ++k) {
            if (countries_[k].id != static_cast<int>(k) + 1)
                throw ValidationError("country ids must be contiguous from 1, got id " +
                                      std::to_string(countries_[k].id) + " at position " +
                                      std::to_string(k + 1));
            if (!country_by_code_.emplace(countries_[k].code, countries_[k].id).second)
                throw ValidationError("duplicate country code: " + countries_[k].code);
        }
        for (size_t k = 0; k < sectors_.size(); ++k) {
            if (sectors_[k].id != static_cast<int>(k) + 1)
                throw ValidationError("sector ids must be contiguous from 1, got id " +
                                      std::to_string(sectors_[k].id) + " at position " +
                                      std::to_string(k + 1));
            if (!sector_by_code_.emplace(sectors_[k].code, sectors_[k].id).second)
                throw ValidationError("duplicate sector code: " + sectors_[k].code);
        }
    }

    /// Deterministic registry for synthetic runs: countries AAA, AAB, ...
    /// and sectors S01, S02, ...
    static Registry synthetic(int n_countries, int n_sectors) {
        std::vector<CountryInfo> cs;
        cs.reserve(n_countries);
        for (int c = 1; c <= n_countries; ++c) {
            int k = c - 1;
            std::string code = {char('A' + k / 676 % 26), char('A' + k / 26 % 26),
                                char('A' + k % 26)};
            cs.push_back({c, code, "Country " + code});
        }
        std::vector<SectorInfo> ss;
        ss.reserve(n_sectors);
        for (int s = 1; s <= n_sectors; ++s) {
            char code[8];
            std::snprintf(code, sizeof(code), "S%02d", s);
            ss.push_back({s, code, std::string("Sector ") + code});
        }
        return Registry(std::move(cs), std::move(ss));
    }

    int num_countries() const { return static_cast<int>(countries_.size()); }
    int num_sectors() const { return static_cast<int>(sectors_.size()); }
    int num_nodes() const { return num_countries() * num_sectors(); }

    const std::vector<CountryInfo>& countries() const { return countries_; }
    const std::vector<SectorInfo>& sectors() const { return sectors_; }

    const CountryInfo& country(int id) const {
        check_country(id);
        return countries_[id - 1];
    }
    const SectorInfo& sector(int id) const {
        check_sector(id);
        return sectors_[id - 1];
    }

    std::optional<int> find_country(const std::string& code) const {
        auto it = country_by_code_.find(code);
        if (it == country_by_code_.end()) return std::nullopt;
        return it->second;
    }
    std::optional<int> find_sector(const std::string& code) const {
        auto it = sector_by_code_.find(code);
        if (it == sector_by_code_.end()) return std::nullopt;
        return it->second;
    }

    /// i = s + (c-1)*N_s, 1-based.
    NodeIndex node_index(int c, int s) const {
        check_country(c);
        check_sector(s);
        return NodeIndex{s + (c - 1) * num_sectors(), c, s};
    }

    /// Inverse of node_index; round-trips exactly.
    NodeIndex node_split(int i) const {
        if (i < 1 || i > num_nodes())
            throw std::out_of_range("node index " + std::to_string(i) + " outside 1.." +
                                    std::to_string(num_nodes()));
        int c = (i - 1) / num_sectors() + 1;
        int s = (i - 1) % num_sectors() + 1;
        return NodeIndex{i, c, s};
    }

    /// 0-based position of node (c, s) in vectors and matrix rows/columns.
    int node_offset(int c, int s) const {
        check_country(c);
        check_sector(s);
        return (c - 1) * num_sectors() + (s - 1);
    }

    /// Short label "CODE SECTOR" for reports.
    std::string node_label(int i) const {
        NodeIndex ni = node_split(i);
        return countries_[ni.country - 1].code + " " + sectors_[ni.sector - 1].code;
    }

    bool same_shape(const Registry& other) const {
        return num_countries() == other.num_countries() && num_sectors() == other.num_sectors();
    }

private:
    void check_country(int id) const {
        if (id < 1 || id > num_countries())
            throw std::out_of_range("country id " + std::to_string(id) + " outside 1.." +
                                    std::to_string(num_countries()));
    }
    void check_sector(int id) const {
        if (id < 1 || id > num_sectors())
            throw std::out_of_range("sector id " + std::to_string(id) + " outside 1.." +
                                    std::to_string(num_sectors()));
    }

    std::vector<CountryInfo> countries_;
    std::vector<SectorInfo> sectors_;
    std::unordered_map<std::string, int> country_by_code_;
    std::unordered_map<std::string, int> sector_by_code_;
};

/// Free-function form of Registry::node_index.
inline NodeIndex node_index(int c, int s, const Registry& registry) {
    return registry.node_index(c, s);
}

}  // namespace flowrank
