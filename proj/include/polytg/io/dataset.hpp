#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace polytg::io {

class DatasetError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// One labeled polymer sample as read from a dataset CSV row.
struct PolymerRecord {
    std::string id;
    std::string psmiles1;
    std::string psmiles2;  // empty for homopolymers
    double phi1 = 1.0;
    double phi2 = 0.0;
    double mn = 0.0;
    double mw = 0.0;
    double m0 = 0.0;  // effective repeat-unit mass as given in m0_g_mol
    std::optional<double> m0_1, m0_2;  // per-unit masses when provided
    std::optional<double> tg;          // Kelvin

    bool is_copolymer() const { return !psmiles2.empty(); }

    // phi-weighted effective repeat-unit mass.
    double m0_eff() const {
        if (m0_1 && m0_2) return phi1 * *m0_1 + phi2 * *m0_2;
        return m0;
    }
};

// Reads the frozen-schema CSV (header: id, psmiles_1, psmiles_2, phi_1,
// phi_2, mn_g_mol, mw_g_mol, m0_g_mol[, m0_1, m0_2], tg_K). Structural
// problems throw DatasetError with file/line context; plausibility issues
// are appended to `warnings`.
std::vector<PolymerRecord> read_dataset_csv(const std::string& path,
                                            std::vector<std::string>* warnings = nullptr);

void write_dataset_csv(const std::string& path, const std::vector<PolymerRecord>& records);

// One PSMILES per line; blank lines and '#' comments are skipped.
std::vector<std::string> read_corpus_lines(const std::string& path);
void write_corpus_lines(const std::string& path, const std::vector<std::string>& lines);

}  // namespace polytg::io
