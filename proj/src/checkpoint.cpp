#include "emoladder/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "emoladder/config_io.hpp"
#include "emoladder/errors.hpp"

namespace emoladder {

using nlohmann::json;

namespace {

constexpr char kMagic[] = "EMOLADDER.CKPT.1\n";

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw ParseError("checkpoint: truncated header length");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void write_doubles(std::ostream& os, const Matrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &m.data()[i], 8);
        write_u64(os, bits);
    }
}

void read_doubles(std::istream& is, Matrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i) {
        const std::uint64_t bits = read_u64(is);
        std::memcpy(&m.data()[i], &bits, 8);
    }
}

json tensor_entry(const std::string& name, const Matrix& m) {
    return {{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}};
}

} // namespace

void save_checkpoint(const ModelParams& params, const std::string& path,
                     const NadamState* optimizer, const Standardizer* standardizer) {
    ModelParams& p = const_cast<ModelParams&>(params); // registry needs mutable refs
    std::vector<ParamRef> prefs = all_parameters(p);
    std::vector<ParamRef> srefs = state_tensors(p);

    json header;
    header["config"] = json::parse(model_config_to_json(params.config));
    header["encoder_frozen"] = params.encoder_frozen;
    if (standardizer) {
        header["standardizer"] = {{"mean", standardizer->mean},
                                  {"std_dev", standardizer->std_dev},
                                  {"kept", standardizer->kept},
                                  {"dropped", standardizer->dropped}};
    }
    json manifest = json::array();
    for (const ParamRef& r : prefs) manifest.push_back(tensor_entry("param:" + r.name, *r.tensor));
    for (const ParamRef& r : srefs) manifest.push_back(tensor_entry("state:" + r.name, *r.tensor));
    if (optimizer) {
        if (optimizer->m.size() != prefs.size()) {
            throw StateError("save_checkpoint: optimizer state does not match parameters");
        }
        header["optimizer"] = {{"t", optimizer->t},
                               {"learning_rate", optimizer->config.learning_rate},
                               {"beta1", optimizer->config.beta1},
                               {"beta2", optimizer->config.beta2},
                               {"epsilon", optimizer->config.epsilon}};
        for (std::size_t k = 0; k < prefs.size(); ++k) {
            manifest.push_back(tensor_entry("optim:m:" + prefs[k].name, optimizer->m[k]));
            manifest.push_back(tensor_entry("optim:v:" + prefs[k].name, optimizer->v[k]));
        }
    }
    header["tensors"] = manifest;
    const std::string header_text = header.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw ParseError("cannot open for writing: " + path);
    os.write(kMagic, sizeof(kMagic) - 1);
    write_u64(os, header_text.size());
    os.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (const ParamRef& r : prefs) write_doubles(os, *r.tensor);
    for (const ParamRef& r : srefs) write_doubles(os, *r.tensor);
    if (optimizer) {
        for (std::size_t k = 0; k < prefs.size(); ++k) {
            write_doubles(os, optimizer->m[k]);
            write_doubles(os, optimizer->v[k]);
        }
    }
    if (!os) throw ParseError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError("cannot open: " + path);
    char magic[sizeof(kMagic)];
    is.read(magic, sizeof(kMagic) - 1);
    magic[sizeof(kMagic) - 1] = '\0';
    if (!is || std::string(magic) != kMagic) {
        throw ParseError("checkpoint: bad magic in " + path);
    }
    const std::uint64_t header_len = read_u64(is);
    std::string header_text(header_len, '\0');
    is.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (!is) throw ParseError("checkpoint: truncated header");
    json header = json::parse(header_text, nullptr, false);
    if (header.is_discarded()) throw ParseError("checkpoint: malformed header JSON");

    Checkpoint ckpt;
    ckpt.params.config = model_config_from_json(header.at("config").dump());
    // rebuild tensor storage deterministically, then overwrite with the file's
    // values; shapes must agree with the manifest
    Rng scratch(0);
    ckpt.params = build_model(ckpt.params.config, scratch);
    ckpt.params.encoder_frozen = header.value("encoder_frozen", false);
    if (header.contains("standardizer")) {
        const json& s = header.at("standardizer");
        Standardizer st;
        st.mean = s.at("mean").get<std::vector<double>>();
        st.std_dev = s.at("std_dev").get<std::vector<double>>();
        st.kept = s.at("kept").get<std::vector<std::size_t>>();
        st.dropped = s.at("dropped").get<std::vector<std::size_t>>();
        ckpt.standardizer = std::move(st);
    }

    std::vector<ParamRef> prefs = all_parameters(ckpt.params);
    std::vector<ParamRef> srefs = state_tensors(ckpt.params);

    const bool has_optim = header.contains("optimizer");
    if (has_optim) {
        NadamState opt;
        const json& o = header.at("optimizer");
        opt.t = o.at("t").get<std::uint64_t>();
        opt.config.learning_rate = o.at("learning_rate").get<double>();
        opt.config.beta1 = o.at("beta1").get<double>();
        opt.config.beta2 = o.at("beta2").get<double>();
        opt.config.epsilon = o.at("epsilon").get<double>();
        std::vector<const Matrix*> pview;
        for (ParamRef& r : prefs) pview.push_back(r.tensor);
        const std::uint64_t t = opt.t;
        opt.init(pview);
        opt.t = t;
        ckpt.optimizer = std::move(opt);
    }

    std::vector<std::pair<std::string, Matrix*>> expected;
    for (ParamRef& r : prefs) expected.emplace_back("param:" + r.name, r.tensor);
    for (ParamRef& r : srefs) expected.emplace_back("state:" + r.name, r.tensor);
    if (has_optim) {
        for (std::size_t k = 0; k < prefs.size(); ++k) {
            expected.emplace_back("optim:m:" + prefs[k].name, &ckpt.optimizer->m[k]);
            expected.emplace_back("optim:v:" + prefs[k].name, &ckpt.optimizer->v[k]);
        }
    }

    const json& manifest = header.at("tensors");
    if (manifest.size() != expected.size()) {
        throw ParseError("checkpoint: manifest lists " + std::to_string(manifest.size()) +
                         " tensors, model needs " + std::to_string(expected.size()));
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const json& entry = manifest.at(i);
        if (entry.at("name").get<std::string>() != expected[i].first ||
            entry.at("rows").get<std::size_t>() != expected[i].second->rows() ||
            entry.at("cols").get<std::size_t>() != expected[i].second->cols()) {
            throw ParseError("checkpoint: manifest mismatch at tensor " + std::to_string(i) +
                             " (" + expected[i].first + ")");
        }
        read_doubles(is, *expected[i].second);
    }
    if (!is) throw ParseError("checkpoint: truncated payload");
    return ckpt;
}

} // namespace emoladder
