#include "emoladder/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "emoladder/errors.hpp"

namespace emoladder {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, delim)) fields.push_back(field);
    if (!line.empty() && line.back() == delim) fields.push_back("");
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const std::string& path, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size() || !std::isfinite(v)) {
            throw std::invalid_argument("trailing characters or non-finite");
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
    }
}

// Renders a double so that parsing it back recovers the identical bits.
std::string render_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct LabelRow {
    double aro, val, dom;
    std::string speaker;
};

} // namespace

FullTable load_corpus(const std::string& features_path, const std::string& labels_path) {
    std::ifstream lf(labels_path);
    if (!lf) throw ParseError("cannot open labels file: " + labels_path);

    std::unordered_map<std::string, LabelRow> labels;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(lf, line)) throw ParseError(labels_path + ": empty file");
    ++line_no;
    while (std::getline(lf, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> f = split_line(line, ',');
        if (f.size() != 5) {
            throw ParseError(labels_path + ":" + std::to_string(line_no) +
                             ": expected 5 fields, got " + std::to_string(f.size()));
        }
        const std::string id = trim(f[0]);
        LabelRow row;
        row.aro = parse_double(trim(f[1]), labels_path, line_no);
        row.val = parse_double(trim(f[2]), labels_path, line_no);
        row.dom = parse_double(trim(f[3]), labels_path, line_no);
        row.speaker = trim(f[4]);
        for (double v : {row.aro, row.val, row.dom}) {
            if (v < 1.0 || v > 7.0) {
                throw DataError(labels_path + ":" + std::to_string(line_no) +
                                ": rating outside [1, 7]");
            }
        }
        if (!labels.emplace(id, row).second) {
            throw DataError(labels_path + ":" + std::to_string(line_no) +
                            ": duplicate segment id '" + id + "'");
        }
    }

    std::ifstream ff(features_path);
    if (!ff) throw ParseError("cannot open features file: " + features_path);
    line_no = 0;
    if (!std::getline(ff, line)) throw ParseError(features_path + ": empty file");
    ++line_no;
    const std::size_t n_cols = split_line(line, ',').size();
    if (n_cols < 2) throw ParseError(features_path + ": header needs segment_id + features");
    const std::size_t dim = n_cols - 1;

    FullTable table;
    std::unordered_set<std::string> seen;
    std::vector<double> values;
    while (std::getline(ff, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> f = split_line(line, ',');
        if (f.size() != n_cols) {
            throw ParseError(features_path + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(n_cols) + " fields, got " +
                             std::to_string(f.size()));
        }
        const std::string id = trim(f[0]);
        if (!seen.insert(id).second) {
            throw DataError(features_path + ":" + std::to_string(line_no) +
                            ": duplicate segment id '" + id + "'");
        }
        auto it = labels.find(id);
        if (it == labels.end()) {
            ++table.dropped_missing_labels;
            continue;
        }
        for (std::size_t c = 1; c < n_cols; ++c) {
            values.push_back(parse_double(trim(f[c]), features_path, line_no));
        }
        table.segment_ids.push_back(id);
        table.speaker_ids.push_back(it->second.speaker);
    }
    const std::size_t n = table.segment_ids.size();
    table.features = Matrix(n, dim, std::move(values));
    table.features.require_finite("loaded features");
    table.targets = Matrix(n, 3);
    for (std::size_t r = 0; r < n; ++r) {
        const LabelRow& row = labels.at(table.segment_ids[r]);
        table.targets.at(r, 0) = row.aro;
        table.targets.at(r, 1) = row.val;
        table.targets.at(r, 2) = row.dom;
    }
    return table;
}

void write_features_file(const DatasetSplit& table, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path);
    os << "segment_id";
    for (std::size_t c = 0; c < table.features.cols(); ++c) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "f%04zu", c + 1);
        os << ',' << buf;
    }
    os << '\n';
    for (std::size_t r = 0; r < table.size(); ++r) {
        os << table.segment_ids[r];
        for (std::size_t c = 0; c < table.features.cols(); ++c) {
            os << ',' << render_double(table.features.at(r, c));
        }
        os << '\n';
    }
}

void write_labels_file(const DatasetSplit& table, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path);
    os << "segment_id,arousal,valence,dominance,speaker_id\n";
    for (std::size_t r = 0; r < table.size(); ++r) {
        os << table.segment_ids[r] << ',' << render_double(table.targets.at(r, 0)) << ','
           << render_double(table.targets.at(r, 1)) << ','
           << render_double(table.targets.at(r, 2)) << ',' << table.speaker_ids[r] << '\n';
    }
}

namespace {

DatasetSplit gather(const DatasetSplit& table, const std::vector<std::size_t>& idx) {
    DatasetSplit s;
    s.features = take_rows(table.features, idx);
    s.targets = take_rows(table.targets, idx);
    s.segment_ids.reserve(idx.size());
    s.speaker_ids.reserve(idx.size());
    for (std::size_t i : idx) {
        s.segment_ids.push_back(table.segment_ids[i]);
        s.speaker_ids.push_back(table.speaker_ids[i]);
    }
    return s;
}

} // namespace

Splits split_by_speaker(const FullTable& table, const SplitFractions& fractions, Rng& rng) {
    const double sum = fractions.train + fractions.validation + fractions.test;
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ArgumentError("split_by_speaker: fractions must sum to 1");
    }
    if (fractions.train < 0 || fractions.validation < 0 || fractions.test < 0) {
        throw ArgumentError("split_by_speaker: fractions must be >= 0");
    }

    std::unordered_map<std::string, std::vector<std::size_t>> by_speaker;
    std::vector<std::string> speakers; // first-appearance order, then shuffled
    for (std::size_t i = 0; i < table.size(); ++i) {
        auto [it, fresh] = by_speaker.try_emplace(table.speaker_ids[i]);
        if (fresh) speakers.push_back(table.speaker_ids[i]);
        it->second.push_back(i);
    }
    if (speakers.size() < 3) {
        throw ArgumentError("split_by_speaker: need at least 3 speakers");
    }
    rng.shuffle(speakers);

    const double total = static_cast<double>(table.size());
    const double quota[3] = {fractions.train * total, fractions.validation * total,
                             fractions.test * total};
    double assigned[3] = {0, 0, 0};
    std::vector<std::size_t> idx[3];
    for (const std::string& spk : speakers) {
        // largest remaining segment deficit wins the whole speaker
        int best = 0;
        double best_deficit = quota[0] - assigned[0];
        for (int s = 1; s < 3; ++s) {
            const double deficit = quota[s] - assigned[s];
            if (deficit > best_deficit) {
                best = s;
                best_deficit = deficit;
            }
        }
        const auto& rows = by_speaker.at(spk);
        idx[best].insert(idx[best].end(), rows.begin(), rows.end());
        assigned[best] += static_cast<double>(rows.size());
    }
    for (auto& v : idx) std::sort(v.begin(), v.end());

    Splits out;
    out.train = gather(table, idx[0]);
    out.validation = gather(table, idx[1]);
    out.test = gather(table, idx[2]);
    return out;
}

Matrix Standardizer::apply(const Matrix& features) const {
    Matrix out(features.rows(), kept.size());
    for (std::size_t r = 0; r < features.rows(); ++r) {
        for (std::size_t c = 0; c < kept.size(); ++c) {
            out.at(r, c) = (features.at(r, kept[c]) - mean[c]) / std_dev[c];
        }
    }
    return out;
}

Matrix Standardizer::invert(const Matrix& standardized) const {
    if (standardized.cols() != kept.size()) {
        throw ShapeError("Standardizer::invert: width " + standardized.shape_str());
    }
    Matrix out(standardized.rows(), kept.size());
    for (std::size_t r = 0; r < standardized.rows(); ++r) {
        for (std::size_t c = 0; c < kept.size(); ++c) {
            out.at(r, c) = standardized.at(r, c) * std_dev[c] + mean[c];
        }
    }
    return out;
}

Standardizer fit_standardizer(const Matrix& train_features) {
    if (train_features.rows() == 0) {
        throw ArgumentError("fit_standardizer: empty training features");
    }
    const std::size_t n = train_features.rows(), dim = train_features.cols();
    const double inv_n = 1.0 / static_cast<double>(n);
    Standardizer s;
    for (std::size_t c = 0; c < dim; ++c) {
        double m = 0.0;
        for (std::size_t r = 0; r < n; ++r) m += train_features.at(r, c);
        m *= inv_n;
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double d = train_features.at(r, c) - m;
            var += d * d;
        }
        var *= inv_n;
        if (var > 0.0) {
            s.kept.push_back(c);
            s.mean.push_back(m);
            s.std_dev.push_back(std::sqrt(var));
        } else {
            s.dropped.push_back(c);
        }
    }
    return s;
}

Standardizer standardize(Splits& splits) {
    Standardizer s = fit_standardizer(splits.train.features);
    splits.train.features = s.apply(splits.train.features);
    splits.validation.features = s.apply(splits.validation.features);
    splits.test.features = s.apply(splits.test.features);
    return s;
}

std::vector<Batch> batches(const DatasetSplit& split, std::size_t batch_size, Rng& rng,
                           bool drop_last) {
    if (batch_size < 2) {
        throw ArgumentError("batches: batch_size must be >= 2 (batch norm)");
    }
    std::vector<std::size_t> order(split.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    std::vector<Batch> out;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        if (end - start < batch_size && drop_last) break;
        if (end - start < 2) break; // even without drop_last, a 1-row batch is unusable
        std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(end));
        out.push_back(Batch{take_rows(split.features, idx), take_rows(split.targets, idx)});
    }
    return out;
}

} // namespace emoladder
