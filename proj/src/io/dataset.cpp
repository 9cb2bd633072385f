#include "polytg/io/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace polytg::io {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

[[noreturn]] void fail(const std::string& path, size_t line, const std::string& msg) {
    throw DatasetError(path + ":" + std::to_string(line) + ": " + msg);
}

double parse_number(const std::string& s, const std::string& path, size_t line,
                    const std::string& col) {
    double v = 0.0;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        fail(path, line, "cannot parse number in column '" + col + "': '" + s + "'");
    }
    return v;
}

}  // namespace

std::vector<PolymerRecord> read_dataset_csv(const std::string& path,
                                            std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw DatasetError(path + ": cannot open");

    std::string line;
    if (!std::getline(in, line)) throw DatasetError(path + ": empty file");
    const auto header = split_csv_line(line);
    std::unordered_map<std::string, size_t> col;
    for (size_t i = 0; i < header.size(); ++i) col[header[i]] = i;

    auto require = [&](const char* name) {
        const auto it = col.find(name);
        if (it == col.end()) throw DatasetError(path + ": missing column '" + std::string(name) + "'");
        return it->second;
    };
    const size_t c_id = require("id");
    const size_t c_p1 = require("psmiles_1");
    const size_t c_p2 = require("psmiles_2");
    const size_t c_phi1 = require("phi_1");
    const size_t c_phi2 = require("phi_2");
    const size_t c_mn = require("mn_g_mol");
    const size_t c_mw = require("mw_g_mol");
    const size_t c_m0 = require("m0_g_mol");
    const size_t c_tg = require("tg_K");
    const auto c_m01 = col.count("m0_1") ? std::optional<size_t>(col["m0_1"]) : std::nullopt;
    const auto c_m02 = col.count("m0_2") ? std::optional<size_t>(col["m0_2"]) : std::nullopt;

    auto warn = [&](const std::string& msg) {
        if (warnings) warnings->push_back(msg);
    };

    std::vector<PolymerRecord> out;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() < header.size()) fail(path, lineno, "too few fields");

        PolymerRecord r;
        r.id = f[c_id];
        if (r.id.empty()) fail(path, lineno, "empty id");
        r.psmiles1 = f[c_p1];
        if (r.psmiles1.empty()) fail(path, lineno, "empty psmiles_1");
        r.psmiles2 = f[c_p2];
        r.phi1 = parse_number(f[c_phi1], path, lineno, "phi_1");
        r.phi2 = parse_number(f[c_phi2], path, lineno, "phi_2");
        r.mn = parse_number(f[c_mn], path, lineno, "mn_g_mol");
        r.mw = parse_number(f[c_mw], path, lineno, "mw_g_mol");
        r.m0 = parse_number(f[c_m0], path, lineno, "m0_g_mol");
        if (c_m01 && !f[*c_m01].empty()) r.m0_1 = parse_number(f[*c_m01], path, lineno, "m0_1");
        if (c_m02 && !f[*c_m02].empty()) r.m0_2 = parse_number(f[*c_m02], path, lineno, "m0_2");
        if (!f[c_tg].empty()) r.tg = parse_number(f[c_tg], path, lineno, "tg_K");

        if (std::abs(r.phi1 + r.phi2 - 1.0) > 1e-9) {
            fail(path, lineno, "phi_1 + phi_2 must equal 1");
        }
        if (r.phi1 < 0.0 || r.phi1 > 1.0 || r.phi2 < 0.0 || r.phi2 > 1.0) {
            fail(path, lineno, "phi values must lie in [0, 1]");
        }
        if (!r.is_copolymer() && (r.phi1 != 1.0 || r.phi2 != 0.0)) {
            fail(path, lineno, "homopolymer rows must have phi = (1, 0)");
        }
        if (r.mn <= 0.0 || r.m0 <= 0.0) fail(path, lineno, "mn and m0 must be positive");
        if (r.mw < r.mn * (1.0 - 1e-9)) fail(path, lineno, "mw must be >= mn");

        if (r.mn < 800.0 || r.mn > 2.0e6) {
            warn(r.id + ": mn " + std::to_string(r.mn) + " outside the plausible range");
        }
        if (r.tg && (*r.tg < 150.0 || *r.tg > 550.0)) {
            warn(r.id + ": tg " + std::to_string(*r.tg) + " K outside the plausible range");
        }
        if (r.is_copolymer() && r.m0_1 && r.m0_2) {
            const double eff = r.phi1 * *r.m0_1 + r.phi2 * *r.m0_2;
            if (std::abs(eff - r.m0) > 1e-6 * std::max(1.0, r.m0)) {
                warn(r.id + ": m0_g_mol disagrees with phi-weighted m0_1/m0_2; using per-unit masses");
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

void write_dataset_csv(const std::string& path, const std::vector<PolymerRecord>& records) {
    std::ofstream out(path);
    if (!out) throw DatasetError(path + ": cannot open for writing");
    out << "id,psmiles_1,psmiles_2,phi_1,phi_2,mn_g_mol,mw_g_mol,m0_g_mol,m0_1,m0_2,tg_K\n";
    out.precision(17);
    for (const auto& r : records) {
        out << r.id << ',' << r.psmiles1 << ',' << r.psmiles2 << ',' << r.phi1 << ',' << r.phi2
            << ',' << r.mn << ',' << r.mw << ',' << r.m0 << ',';
        if (r.m0_1) out << *r.m0_1;
        out << ',';
        if (r.m0_2) out << *r.m0_2;
        out << ',';
        if (r.tg) out << *r.tg;
        out << '\n';
    }
}

std::vector<std::string> read_corpus_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError(path + ": cannot open");
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        out.push_back(line);
    }
    return out;
}

void write_corpus_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path);
    if (!out) throw DatasetError(path + ": cannot open for writing");
    for (const auto& l : lines) out << l << '\n';
}

}  // namespace polytg::io
