#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "emoladder/data.hpp"
#include "emoladder/errors.hpp"

namespace emoladder {

namespace {

// Cholesky factor of a 3x3 correlation matrix, with a tiny jitter so exact
// semidefinite matrices are accepted.
std::array<std::array<double, 3>, 3> cholesky3(const std::array<std::array<double, 3>, 3>& a) {
    std::array<std::array<double, 3>, 3> l{};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
            if (i == j) {
                s += 1e-12;
                if (s < 0.0) {
                    throw ArgumentError("attr_corr is not positive semidefinite");
                }
                l[i][j] = std::sqrt(s);
            } else {
                l[i][j] = l[j][j] > 0.0 ? s / l[j][j] : 0.0;
            }
        }
    }
    return l;
}

std::string zero_pad(std::size_t v, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*zu", width, v);
    return buf;
}

} // namespace

void SynthSpec::validate() const {
    if (n_samples < 4) throw ArgumentError("synth: n_samples must be >= 4");
    if (feature_dim == 0) throw ArgumentError("synth: feature_dim must be > 0");
    if (latent_rank < 3) throw ArgumentError("synth: latent_rank must be >= 3");
    if (latent_rank > feature_dim) {
        throw ArgumentError("synth: latent_rank must be <= feature_dim");
    }
    if (!(feature_noise >= 0.0) || !(target_noise >= 0.0)) {
        throw ArgumentError("synth: noise levels must be >= 0");
    }
    if (n_speakers < 3 || n_speakers > n_samples) {
        throw ArgumentError("synth: n_speakers must be in [3, n_samples]");
    }
    for (std::size_t i = 0; i < 3; ++i) {
        if (std::abs(attr_corr[i][i] - 1.0) > 1e-12) {
            throw ArgumentError("synth: attr_corr diagonal must be 1");
        }
        for (std::size_t j = 0; j < 3; ++j) {
            if (std::abs(attr_corr[i][j] - attr_corr[j][i]) > 1e-12) {
                throw ArgumentError("synth: attr_corr must be symmetric");
            }
        }
    }
    cholesky3(attr_corr); // PSD check
}

FullTable generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const std::size_t n = spec.n_samples, d = spec.feature_dim, r = spec.latent_rank;

    // latent factors
    Matrix latents = gaussian_sample(n, r, 1.0, rng);

    // features: tanh of a random projection plus noise; the projection is
    // scaled so the pre-activation has roughly unit variance
    Matrix mix = gaussian_sample(r, d, 1.0 / static_cast<double>(r), rng);
    Matrix pre = matmul(latents, mix);
    Matrix noise = gaussian_sample(n, d, spec.feature_noise * spec.feature_noise, rng);
    Matrix features(n, d);
    for (std::size_t i = 0; i < features.size(); ++i) {
        features.data()[i] = std::tanh(pre.data()[i]) + noise.data()[i];
    }

    // three orthonormal latent directions -> uncorrelated unit-variance raw
    // scores, colored by the Cholesky factor of the requested correlation
    Matrix q = gaussian_sample(r, 3, 1.0, rng);
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t prev = 0; prev < c; ++prev) {
            double dot = 0.0;
            for (std::size_t k = 0; k < r; ++k) dot += q.at(k, c) * q.at(k, prev);
            for (std::size_t k = 0; k < r; ++k) q.at(k, c) -= dot * q.at(k, prev);
        }
        double norm = 0.0;
        for (std::size_t k = 0; k < r; ++k) norm += q.at(k, c) * q.at(k, c);
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw NumericError("synth: degenerate latent directions");
        for (std::size_t k = 0; k < r; ++k) q.at(k, c) /= norm;
    }
    Matrix raw = matmul(latents, q);
    const auto l = cholesky3(spec.attr_corr);
    Matrix tnoise = gaussian_sample(n, 3, spec.target_noise * spec.target_noise, rng);
    Matrix targets(n, 3);
    for (std::size_t row = 0; row < n; ++row) {
        for (std::size_t a = 0; a < 3; ++a) {
            double y = 0.0;
            for (std::size_t k = 0; k <= a; ++k) y += l[a][k] * raw.at(row, k);
            y += tnoise.at(row, a);
            targets.at(row, a) = 4.0 + 3.0 * std::tanh(0.7 * y); // smooth map into (1, 7)
        }
    }

    FullTable table;
    table.features = std::move(features);
    table.targets = std::move(targets);
    table.segment_ids.reserve(n);
    table.speaker_ids.reserve(n);
    const std::size_t base = n / spec.n_speakers;
    const std::size_t extra = n % spec.n_speakers;
    std::size_t row = 0;
    for (std::size_t s = 0; s < spec.n_speakers; ++s) {
        const std::size_t block = base + (s < extra ? 1 : 0);
        for (std::size_t k = 0; k < block; ++k, ++row) {
            table.segment_ids.push_back("seg" + zero_pad(row + 1, 6));
            table.speaker_ids.push_back("spk" + zero_pad(s + 1, 4));
        }
    }
    return table;
}

namespace {

double spec_double(const std::map<std::string, std::string>& kv, const std::string& key,
                   double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    return std::stod(it->second);
}

std::size_t spec_size(const std::map<std::string, std::string>& kv, const std::string& key,
                      std::size_t fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    return static_cast<std::size_t>(std::stoull(it->second));
}

} // namespace

SynthSpec load_synth_spec(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open synth spec: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::size_t begin = line.find_first_not_of(" \t\r\n");
        if (begin == std::string::npos) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        auto strip = [](std::string s) {
            const std::size_t a = s.find_first_not_of(" \t\r\n");
            if (a == std::string::npos) return std::string();
            const std::size_t b = s.find_last_not_of(" \t\r\n");
            return s.substr(a, b - a + 1);
        };
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        static const std::vector<std::string> known = {
            "n_samples",     "feature_dim",          "latent_rank",
            "feature_noise", "target_noise",         "n_speakers",
            "seed",          "corr_arousal_valence", "corr_arousal_dominance",
            "corr_valence_dominance"};
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": unknown key '" + key +
                             "'");
        }
        kv[key] = value;
    }
    SynthSpec s;
    try {
        s.n_samples = spec_size(kv, "n_samples", s.n_samples);
        s.feature_dim = spec_size(kv, "feature_dim", s.feature_dim);
        s.latent_rank = spec_size(kv, "latent_rank", s.latent_rank);
        s.feature_noise = spec_double(kv, "feature_noise", s.feature_noise);
        s.target_noise = spec_double(kv, "target_noise", s.target_noise);
        s.n_speakers = spec_size(kv, "n_speakers", s.n_speakers);
        s.seed = spec_size(kv, "seed", static_cast<std::size_t>(s.seed));
        const double av = spec_double(kv, "corr_arousal_valence", s.attr_corr[0][1]);
        const double ad = spec_double(kv, "corr_arousal_dominance", s.attr_corr[0][2]);
        const double vd = spec_double(kv, "corr_valence_dominance", s.attr_corr[1][2]);
        s.attr_corr = {{{1.0, av, ad}, {av, 1.0, vd}, {ad, vd, 1.0}}};
    } catch (const std::invalid_argument&) {
        throw ParseError(path + ": malformed numeric value");
    }
    s.validate();
    return s;
}

void save_synth_spec(const SynthSpec& spec, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path);
    os << "# synthetic corpus spec\n";
    os << "n_samples = " << spec.n_samples << "\n";
    os << "feature_dim = " << spec.feature_dim << "\n";
    os << "latent_rank = " << spec.latent_rank << "\n";
    os << "feature_noise = " << spec.feature_noise << "\n";
    os << "target_noise = " << spec.target_noise << "\n";
    os << "n_speakers = " << spec.n_speakers << "\n";
    os << "seed = " << spec.seed << "\n";
    os << "corr_arousal_valence = " << spec.attr_corr[0][1] << "\n";
    os << "corr_arousal_dominance = " << spec.attr_corr[0][2] << "\n";
    os << "corr_valence_dominance = " << spec.attr_corr[1][2] << "\n";
}

} // namespace emoladder
