#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "flowrank/money_tensor.hpp"

namespace flowrank {

namespace detail {

inline std::string trim(std::string s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_n(const std::string& line, size_t max_fields) {
    // Splits on ',' into at most max_fields pieces; the last piece keeps any
    // remaining commas (registry names contain commas).
    std::vector<std::string> out;
    size_t pos = 0;
    while (out.size() + 1 < max_fields) {
        size_t comma = line.find(',', pos);
        if (comma == std::string::npos) break;
        out.push_back(trim(line.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    out.push_back(trim(line.substr(pos)));
    return out;
}

inline double parse_value(const std::string& field, const std::string& where) {
    std::string t = trim(field);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw IngestError(where + ": cannot parse number '" + field + "'");
    return v;
}

inline int parse_int(const std::string& field, const std::string& where) {
    std::string t = trim(field);
    int v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw IngestError(where + ": cannot parse integer '" + field + "'");
    return v;
}

}  // namespace detail

/// Reads one `id,code,name` table. Names may contain commas (the name is
/// everything after the second comma).
template <typename Info>
std::vector<Info> load_registry_rows(std::istream& in, const std::string& what) {
    std::vector<Info> rows;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (t.rfind("id,", 0) == 0) continue;  // header row
        }
        auto f = detail::split_n(t, 3);
        if (f.size() != 3)
            throw IngestError(what + " line " + std::to_string(lineno) + ": expected id,code,name");
        Info info;
        info.id = detail::parse_int(f[0], what + " line " + std::to_string(lineno));
        info.code = f[1];
        info.name = f[2];
        rows.push_back(std::move(info));
    }
    return rows;
}

inline Registry load_registry(std::istream& countries, std::istream& sectors) {
    return Registry(load_registry_rows<CountryInfo>(countries, "countries"),
                    load_registry_rows<SectorInfo>(sectors, "sectors"));
}

inline Registry load_registry_files(const std::string& countries_path,
                                    const std::string& sectors_path) {
    std::ifstream c(countries_path), s(sectors_path);
    if (!c) throw IngestError("cannot open countries file: " + countries_path);
    if (!s) throw IngestError("cannot open sectors file: " + sectors_path);
    return load_registry(c, s);
}

inline void save_registry(const Registry& reg, std::ostream& countries, std::ostream& sectors) {
    countries << "id,code,name\n";
    for (const auto& c : reg.countries()) countries << c.id << ',' << c.code << ',' << c.name << '\n';
    sectors << "id,code,name\n";
    for (const auto& s : reg.sectors()) sectors << s.id << ',' << s.code << ',' << s.name << '\n';
}

struct LoadResult {
    MoneyTensor tensor;
    double dropped_intra_value = 0.0;  // source rows with src_country == dst_country
    long dropped_intra_records = 0;
};

/// Reads `src_country,src_sector,dst_country,dst_sector,value` records into a
/// dense tensor. Unlisted cells are zero. Intra-country records are dropped
/// (their total is reported); duplicates and unknown codes are errors.
inline LoadResult load_tensor(std::istream& in, const Registry& registry, int year = 0) {
    const int n = registry.num_nodes();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    std::vector<uint8_t> seen(static_cast<size_t>(n) * n, 0);
    double dropped = 0.0;
    long dropped_records = 0;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (t.rfind("src_country,", 0) == 0) continue;
        }
        const std::string where = "tensor line " + std::to_string(lineno);
        std::stringstream fields(t);
        std::string f[5];
        for (int k = 0; k < 5; ++k)
            if (!std::getline(fields, f[k], ','))
                throw IngestError(where + ": expected 5 fields, got '" + t + "'");
        auto src_c = registry.find_country(detail::trim(f[0]));
        if (!src_c) throw IngestError(where + ": unknown source country '" + f[0] + "'");
        auto src_s = registry.find_sector(detail::trim(f[1]));
        if (!src_s) throw IngestError(where + ": unknown source sector '" + f[1] + "'");
        auto dst_c = registry.find_country(detail::trim(f[2]));
        if (!dst_c) throw IngestError(where + ": unknown destination country '" + f[2] + "'");
        auto dst_s = registry.find_sector(detail::trim(f[3]));
        if (!dst_s) throw IngestError(where + ": unknown destination sector '" + f[3] + "'");
        double v = detail::parse_value(f[4], where);
        if (!std::isfinite(v)) throw ValidationError(where + ": non-finite value");
        if (v < 0.0) throw ValidationError(where + ": negative value " + f[4]);
        if (*src_c == *dst_c) {
            dropped += v;
            ++dropped_records;
            continue;
        }
        int row = registry.node_offset(*dst_c, *dst_s);
        int col = registry.node_offset(*src_c, *src_s);
        size_t flat = static_cast<size_t>(col) * n + row;
        if (seen[flat])
            throw IngestError(where + ": duplicate cell " + f[0] + "," + f[1] + " -> " + f[2] +
                              "," + f[3]);
        seen[flat] = 1;
        m(row, col) = v;
    }
    return LoadResult{MoneyTensor(registry, std::move(m), year), dropped, dropped_records};
}

inline LoadResult load_tensor_file(const std::string& path, const Registry& registry,
                                   int year = 0) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open tensor file: " + path);
    return load_tensor(in, registry, year);
}

/// Writes one record per nonzero cell in fixed (source, destination) order.
inline void save_tensor(const MoneyTensor& tensor, std::ostream& out) {
    const Registry& reg = tensor.registry();
    out << "src_country,src_sector,dst_country,dst_sector,value\n";
    for (int c_src = 1; c_src <= reg.num_countries(); ++c_src)
        for (int s_src = 1; s_src <= reg.num_sectors(); ++s_src)
            for (int c = 1; c <= reg.num_countries(); ++c)
                for (int s = 1; s <= reg.num_sectors(); ++s) {
                    double v = tensor.value(c, c_src, s, s_src);
                    if (v != 0.0)
                        out << reg.country(c_src).code << ',' << reg.sector(s_src).code << ','
                            << reg.country(c).code << ',' << reg.sector(s).code << ','
                            << format_double(v) << '\n';
                }
}

/// Digest of registry plus tensor contents; identifies the input of a run.
inline std::string input_digest(const MoneyTensor& tensor) {
    Fnv1a h;
    const Registry& reg = tensor.registry();
    for (const auto& c : reg.countries()) {
        h.update(c.code);
        h.update(c.name);
    }
    for (const auto& s : reg.sectors()) {
        h.update(s.code);
        h.update(s.name);
    }
    int year = tensor.year();
    h.update(&year, sizeof(year));
    const Eigen::MatrixXd& m = tensor.matrix();
    h.update(m.data(), sizeof(double) * static_cast<size_t>(m.size()));
    return h.hex();
}

}  // namespace flowrank
