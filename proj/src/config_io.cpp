#include "emoladder/config_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "emoladder/errors.hpp"

namespace emoladder {

using nlohmann::json;

namespace {

json config_to_json_obj(const ModelConfig& c) {
    json j;
    j["variant"] = variant_name(c.variant);
    j["input_dim"] = c.input_dim;
    j["hidden_dims"] = c.hidden_dims;
    json attrs = json::array();
    for (Attr a : c.output_attrs) attrs.push_back(attr_name(a));
    j["output_attrs"] = attrs;
    j["noise_variance"] = c.noise_variance;
    j["lambda"] = c.lambda;
    j["dropout_input"] = c.dropout_input;
    j["dropout_hidden1"] = c.dropout_hidden1;
    j["mtl_alpha"] = c.mtl_weights.alpha;
    j["mtl_beta"] = c.mtl_weights.beta;
    return j;
}

ModelConfig config_from_json_obj(const json& j) {
    ModelConfig c;
    c.variant = variant_from_name(j.at("variant").get<std::string>());
    c.input_dim = j.at("input_dim").get<std::size_t>();
    if (j.contains("hidden_dims")) {
        c.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
    }
    if (j.contains("output_attrs")) {
        c.output_attrs.clear();
        for (const auto& a : j.at("output_attrs")) {
            c.output_attrs.push_back(attr_from_name(a.get<std::string>()));
        }
    } else if (c.is_mtl()) {
        c.output_attrs = {Attr::arousal, Attr::valence, Attr::dominance};
    }
    c.noise_variance = j.value("noise_variance", c.noise_variance);
    c.lambda = j.value("lambda", c.lambda);
    const double default_dropout = c.is_ladder() ? 0.1 : 0.5;
    c.dropout_input = j.value("dropout_input", default_dropout);
    c.dropout_hidden1 = j.value("dropout_hidden1", default_dropout);
    c.mtl_weights.alpha = j.value("mtl_alpha", c.mtl_weights.alpha);
    c.mtl_weights.beta = j.value("mtl_beta", c.mtl_weights.beta);
    c.validate();
    return c;
}

json run_config_to_json_obj(const RunConfig& c) {
    json j;
    j["model"] = config_to_json_obj(c.model);
    j["optimizer"] = {{"learning_rate", c.optimizer.learning_rate},
                      {"beta1", c.optimizer.beta1},
                      {"beta2", c.optimizer.beta2},
                      {"epsilon", c.optimizer.epsilon}};
    j["max_epochs"] = c.max_epochs;
    j["batch_size"] = c.batch_size;
    j["seeds"] = c.seeds;
    j["primary_attr"] = attr_name(c.primary_attr);
    j["output_dir"] = c.output_dir;
    j["features_path"] = c.features_path;
    j["labels_path"] = c.labels_path;
    j["synth_spec_path"] = c.synth_spec_path;
    j["fractions"] = {{"train", c.fractions.train},
                      {"validation", c.fractions.validation},
                      {"test", c.fractions.test}};
    j["split_seed"] = c.split_seed;
    j["dae_pretrain"] = {{"learning_rate", c.dae_pretrain.learning_rate},
                         {"epochs", c.dae_pretrain.epochs},
                         {"batch_size", c.dae_pretrain.batch_size}};
    return j;
}

RunConfig run_config_from_json_obj(const json& j) {
    RunConfig c;
    c.model = config_from_json_obj(j.at("model"));
    if (j.contains("optimizer")) {
        const json& o = j.at("optimizer");
        c.optimizer.learning_rate = o.value("learning_rate", c.optimizer.learning_rate);
        c.optimizer.beta1 = o.value("beta1", c.optimizer.beta1);
        c.optimizer.beta2 = o.value("beta2", c.optimizer.beta2);
        c.optimizer.epsilon = o.value("epsilon", c.optimizer.epsilon);
    }
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("primary_attr")) {
        c.primary_attr = attr_from_name(j.at("primary_attr").get<std::string>());
    } else if (!c.model.output_attrs.empty()) {
        c.primary_attr = c.model.output_attrs.front();
    }
    c.output_dir = j.value("output_dir", std::string());
    c.features_path = j.value("features_path", std::string());
    c.labels_path = j.value("labels_path", std::string());
    c.synth_spec_path = j.value("synth_spec_path", std::string());
    if (j.contains("fractions")) {
        const json& f = j.at("fractions");
        c.fractions.train = f.value("train", c.fractions.train);
        c.fractions.validation = f.value("validation", c.fractions.validation);
        c.fractions.test = f.value("test", c.fractions.test);
    }
    c.split_seed = j.value("split_seed", c.split_seed);
    if (j.contains("dae_pretrain")) {
        const json& d = j.at("dae_pretrain");
        c.dae_pretrain.learning_rate = d.value("learning_rate", c.dae_pretrain.learning_rate);
        c.dae_pretrain.epochs = d.value("epochs", c.dae_pretrain.epochs);
        c.dae_pretrain.batch_size = d.value("batch_size", c.dae_pretrain.batch_size);
    }
    c.validate();
    return c;
}

json summary_to_json_obj(const RunSummary& s) {
    json j;
    j["variant"] = variant_name(s.variant);
    j["primary_attr"] = attr_name(s.primary_attr);
    j["seeds"] = s.seeds;
    j["failed_seeds"] = s.failed_seeds;
    json per_seed = json::array();
    for (const SeedRecord& r : s.per_seed) {
        json e;
        e["seed"] = r.seed;
        e["failed"] = r.failed;
        e["failure"] = r.failure;
        e["best_epoch"] = r.best_epoch;
        e["best_val_ccc"] = r.best_val_ccc;
        e["test_ccc"] = r.test_ccc;
        json log = json::array();
        for (const EpochRecord& rec : r.log) {
            log.push_back({{"epoch", rec.epoch},
                           {"train_loss", rec.train_loss},
                           {"val_ccc", rec.val_ccc}});
        }
        e["log"] = log;
        per_seed.push_back(e);
    }
    j["per_seed"] = per_seed;
    json attrs = json::array();
    for (const AttrSummary& a : s.attrs) {
        attrs.push_back({{"attr", attr_name(a.attr)},
                         {"val_ccc_per_seed", a.val_ccc_per_seed},
                         {"test_ccc_per_seed", a.test_ccc_per_seed},
                         {"val_mean", a.val_mean},
                         {"val_std", a.val_std},
                         {"test_mean", a.test_mean},
                         {"test_std", a.test_std}});
    }
    j["attrs"] = attrs;
    return j;
}

RunSummary summary_from_json_obj(const json& j) {
    RunSummary s;
    s.variant = variant_from_name(j.at("variant").get<std::string>());
    s.primary_attr = attr_from_name(j.at("primary_attr").get<std::string>());
    s.seeds = j.value("seeds", std::vector<std::uint64_t>{});
    s.failed_seeds = j.value("failed_seeds", std::vector<std::uint64_t>{});
    for (const json& e : j.value("per_seed", json::array())) {
        SeedRecord r;
        r.seed = e.at("seed").get<std::uint64_t>();
        r.failed = e.value("failed", false);
        r.failure = e.value("failure", std::string());
        r.best_epoch = e.value("best_epoch", std::size_t{0});
        r.best_val_ccc = e.value("best_val_ccc", std::vector<double>{});
        r.test_ccc = e.value("test_ccc", std::vector<double>{});
        for (const json& rec : e.value("log", json::array())) {
            EpochRecord er;
            er.epoch = rec.at("epoch").get<std::size_t>();
            er.train_loss = rec.at("train_loss").get<double>();
            er.val_ccc = rec.at("val_ccc").get<std::vector<double>>();
            r.log.push_back(std::move(er));
        }
        s.per_seed.push_back(std::move(r));
    }
    for (const json& e : j.value("attrs", json::array())) {
        AttrSummary a;
        a.attr = attr_from_name(e.at("attr").get<std::string>());
        a.val_ccc_per_seed = e.value("val_ccc_per_seed", std::vector<double>{});
        a.test_ccc_per_seed = e.value("test_ccc_per_seed", std::vector<double>{});
        a.val_mean = e.value("val_mean", 0.0);
        a.val_std = e.value("val_std", 0.0);
        a.test_mean = e.value("test_mean", 0.0);
        a.test_std = e.value("test_std", 0.0);
        s.attrs.push_back(std::move(a));
    }
    return s;
}

json parse_json(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw ParseError("malformed JSON in " + what);
    }
    return j;
}

std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open: " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path);
    os << text;
}

} // namespace

std::string model_config_to_json(const ModelConfig& config) {
    return config_to_json_obj(config).dump(2);
}

ModelConfig model_config_from_json(const std::string& text) {
    try {
        return config_from_json_obj(parse_json(text, "model config"));
    } catch (const json::exception& e) {
        throw ParseError(std::string("model config: ") + e.what());
    }
}

std::string run_config_to_json(const RunConfig& config) {
    return run_config_to_json_obj(config).dump(2);
}

RunConfig run_config_from_json(const std::string& text) {
    try {
        return run_config_from_json_obj(parse_json(text, "run config"));
    } catch (const json::exception& e) {
        throw ParseError(std::string("run config: ") + e.what());
    }
}

RunConfig load_run_config(const std::string& path) {
    return run_config_from_json(read_file(path));
}

void save_run_config(const RunConfig& config, const std::string& path) {
    write_file(path, run_config_to_json(config) + "\n");
}

std::string run_summary_to_json(const RunSummary& summary) {
    return summary_to_json_obj(summary).dump(2);
}

RunSummary run_summary_from_json(const std::string& text) {
    try {
        return summary_from_json_obj(parse_json(text, "run summary"));
    } catch (const json::exception& e) {
        throw ParseError(std::string("run summary: ") + e.what());
    }
}

RunSummary load_run_summary(const std::string& path) {
    return run_summary_from_json(read_file(path));
}

void save_run_summary(const RunSummary& summary, const std::string& path) {
    write_file(path, run_summary_to_json(summary) + "\n");
}

} // namespace emoladder
