#include <array>
#include <cstdio>
#include <map>
#include <sstream>

#include "emoladder/experiment.hpp"

namespace emoladder {

namespace {

const std::array<Variant, 5> kVariantOrder = {Variant::autoencoder, Variant::stl, Variant::mtl,
                                              Variant::ladder_stl, Variant::ladder_mtl};

std::string display_name(Variant v) {
    switch (v) {
        case Variant::autoencoder: return "Autoencoder";
        case Variant::stl: return "STL";
        case Variant::mtl: return "MTL";
        case Variant::ladder_stl: return "Ladder+STL";
        case Variant::ladder_mtl: return "Ladder+MTL";
    }
    return "?";
}

bool is_baseline(Variant v) {
    return v == Variant::autoencoder || v == Variant::stl || v == Variant::mtl;
}

struct Cell {
    const AttrSummary* attr = nullptr;
    bool best = false;
    bool significant = false;
};

// (variant, attribute) -> aggregated stats. When several runs of one variant
// cover an attribute (the per-attribute training protocol), the run whose
// early-stopping monitor was that attribute wins.
std::map<std::pair<Variant, Attr>, const AttrSummary*> collect_cells(
    const std::vector<RunSummary>& summaries) {
    std::map<std::pair<Variant, Attr>, const AttrSummary*> cells;
    std::map<std::pair<Variant, Attr>, bool> from_primary;
    for (const RunSummary& run : summaries) {
        for (const AttrSummary& a : run.attrs) {
            const auto key = std::make_pair(run.variant, a.attr);
            const bool primary = run.primary_attr == a.attr;
            auto it = cells.find(key);
            if (it == cells.end() || (primary && !from_primary[key])) {
                cells[key] = &a;
                from_primary[key] = primary;
            }
        }
    }
    return cells;
}

std::string format_cell(double mean, double stddev, bool best, bool significant) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f ± %.3f", mean, stddev);
    std::string s = buf;
    if (best) s = "[" + s + "]";
    if (significant) s += "*";
    return s;
}

// Display width of the UTF-8 cell text ("±" is 2 bytes, 1 column).
std::size_t display_width(const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80) ++w;
    }
    return w;
}

struct Table {
    // [variant][split(0=val,1=test)][attr] resolved cells
    std::map<Variant, std::array<std::array<Cell, 3>, 2>> rows;
};

Table build_table(const std::vector<RunSummary>& summaries) {
    auto cells = collect_cells(summaries);
    Table table;
    for (auto& [key, attr] : cells) {
        auto& row = table.rows[key.first];
        const std::size_t a = static_cast<std::size_t>(key.second);
        row[0][a].attr = attr;
        row[1][a].attr = attr;
    }
    // best mean per (split, attribute)
    for (int split = 0; split < 2; ++split) {
        for (std::size_t a = 0; a < 3; ++a) {
            double best = -2.0;
            for (auto& [v, row] : table.rows) {
                const Cell& c = row[split][a];
                if (!c.attr) continue;
                const double m = split == 0 ? c.attr->val_mean : c.attr->test_mean;
                if (m > best) best = m;
            }
            for (auto& [v, row] : table.rows) {
                Cell& c = row[split][a];
                if (!c.attr) continue;
                const double m = split == 0 ? c.attr->val_mean : c.attr->test_mean;
                if (m == best) c.best = true;
            }
        }
    }
    // ladder significance vs every baseline present
    for (auto& [v, row] : table.rows) {
        if (is_baseline(v)) continue;
        for (int split = 0; split < 2; ++split) {
            for (std::size_t a = 0; a < 3; ++a) {
                Cell& c = row[split][a];
                if (!c.attr) continue;
                const std::vector<double>& sample =
                    split == 0 ? c.attr->val_ccc_per_seed : c.attr->test_ccc_per_seed;
                if (sample.size() < 2) continue;
                bool any_baseline = false;
                bool beats_all = true;
                for (auto& [bv, brow] : table.rows) {
                    if (!is_baseline(bv)) continue;
                    const Cell& bc = brow[split][a];
                    if (!bc.attr) continue;
                    const std::vector<double>& bsample =
                        split == 0 ? bc.attr->val_ccc_per_seed : bc.attr->test_ccc_per_seed;
                    if (bsample.size() < 2) continue;
                    any_baseline = true;
                    if (t_test_one_tailed(sample, bsample) >= 0.05) {
                        beats_all = false;
                        break;
                    }
                }
                c.significant = any_baseline && beats_all;
            }
        }
    }
    return table;
}

} // namespace

std::string render_report(const std::vector<RunSummary>& summaries) {
    Table table = build_table(summaries);
    const std::array<std::string, 3> attr_heads = {"Aro", "Val", "Dom"};

    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header = {"Task"};
    for (const char* split : {"Val", "Test"}) {
        for (const std::string& a : attr_heads) header.push_back(std::string(split) + " " + a);
    }
    grid.push_back(header);
    for (Variant v : kVariantOrder) {
        auto it = table.rows.find(v);
        if (it == table.rows.end()) continue;
        std::vector<std::string> row = {display_name(v)};
        for (int split = 0; split < 2; ++split) {
            for (std::size_t a = 0; a < 3; ++a) {
                const Cell& c = it->second[split][a];
                if (!c.attr) {
                    row.push_back("-");
                    continue;
                }
                const double m = split == 0 ? c.attr->val_mean : c.attr->test_mean;
                const double s = split == 0 ? c.attr->val_std : c.attr->test_std;
                row.push_back(format_cell(m, s, c.best, c.significant));
            }
        }
        grid.push_back(row);
    }

    std::vector<std::size_t> widths(grid.front().size(), 0);
    for (const auto& row : grid) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            widths[i] = std::max(widths[i], display_width(row[i]));
        }
    }
    std::ostringstream os;
    os << "CCC (mean ± std over seeds); [best per column], "
          "* ladder variant beats all baselines at one-tailed p < 0.05\n";
    for (std::size_t r = 0; r < grid.size(); ++r) {
        for (std::size_t i = 0; i < grid[r].size(); ++i) {
            const std::string& cell = grid[r][i];
            os << cell << std::string(widths[i] - display_width(cell), ' ');
            if (i + 1 < grid[r].size()) os << "  ";
        }
        os << '\n';
        if (r == 0) {
            std::size_t total = 0;
            for (std::size_t w : widths) total += w;
            os << std::string(total + 2 * (widths.size() - 1), '-') << '\n';
        }
    }
    return os.str();
}

std::string render_report_delimited(const std::vector<RunSummary>& summaries) {
    Table table = build_table(summaries);
    std::ostringstream os;
    os << "variant,attribute,split,mean_ccc,std_ccc,n_seeds,best,significant\n";
    for (Variant v : kVariantOrder) {
        auto it = table.rows.find(v);
        if (it == table.rows.end()) continue;
        for (int split = 0; split < 2; ++split) {
            for (std::size_t a = 0; a < 3; ++a) {
                const Cell& c = it->second[split][a];
                if (!c.attr) continue;
                const double m = split == 0 ? c.attr->val_mean : c.attr->test_mean;
                const double s = split == 0 ? c.attr->val_std : c.attr->test_std;
                const std::size_t n = split == 0 ? c.attr->val_ccc_per_seed.size()
                                                 : c.attr->test_ccc_per_seed.size();
                char buf[128];
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g", m, s);
                os << variant_name(v) << ',' << attr_name(static_cast<Attr>(a)) << ','
                   << (split == 0 ? "validation" : "test") << ',' << buf << ',' << n << ','
                   << (c.best ? 1 : 0) << ',' << (c.significant ? 1 : 0) << '\n';
            }
        }
    }
    return os.str();
}

} // namespace emoladder
