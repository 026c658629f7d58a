#include "qualit/error.hpp"
#include "qualit/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace qualit::pipeline {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ConfigError("unknown config key: " + where + "." + key);
        }
    }
}

template <typename T>
T read(const json& obj, const char* key, const std::string& where, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key " + where + "." + key + " has the wrong type");
    }
}

std::string read_string(const json& obj, const char* key, const std::string& where, std::string fallback) {
    if (obj.contains(key) && !obj.at(key).is_string()) {
        throw ConfigError("config key " + where + "." + key + " must be a string");
    }
    return read<std::string>(obj, key, where, std::move(fallback));
}

int read_int(const json& obj, const char* key, const std::string& where, int fallback) {
    if (obj.contains(key) && !obj.at(key).is_number_integer()) {
        throw ConfigError("config key " + where + "." + key + " must be an integer");
    }
    return read<int>(obj, key, where, fallback);
}

double read_number(const json& obj, const char* key, const std::string& where, double fallback) {
    if (obj.contains(key) && !obj.at(key).is_number()) {
        throw ConfigError("config key " + where + "." + key + " must be a number");
    }
    return read<double>(obj, key, where, fallback);
}

std::optional<std::string> read_optional_path(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    return read_string(obj, key, where, "");
}

providers::ProviderSpec read_provider(const json& j, const std::string& where, const char* default_model) {
    reject_unknown(j, where, {"kind", "model", "adapter"});
    providers::ProviderSpec spec;
    spec.kind = read_string(j, "kind", where, "mock");
    spec.model = read_string(j, "model", where, default_model);
    spec.adapter = read_string(j, "adapter", where, "generic");
    return spec;
}

}  // namespace

std::vector<int> ClusteringSpec::fixed_ks() const {
    if (!k_sweep.empty()) return k_sweep;
    if (k) return {*k};
    return {};
}

RunConfig RunConfig::from_json(const json& j) {
    reject_unknown(j, "config",
                   {"corpus", "preprocess", "provider", "embedder", "extraction", "clustering", "eval", "report",
                    "concurrency"});
    RunConfig cfg;
    if (!j.contains("corpus")) throw ConfigError("config is missing required key: corpus");
    const auto& c = j["corpus"];
    reject_unknown(c, "corpus", {"kind", "path"});
    if (!c.contains("path")) throw ConfigError("config is missing required key: corpus.path");
    cfg.corpus.path = read_string(c, "path", "corpus", "");
    cfg.corpus.kind = read_string(c, "kind", "corpus", "jsonl");

    if (j.contains("preprocess")) {
        const auto& p = j["preprocess"];
        reject_unknown(p, "preprocess",
                       {"min_token_len", "stopword_list_id", "normalize_mode", "stopwords_path",
                        "lemma_dictionary_path"});
        auto& o = cfg.preprocess.options;
        o.min_token_len = read_int(p, "min_token_len", "preprocess", o.min_token_len);
        o.stopword_list_id = read_string(p, "stopword_list_id", "preprocess", o.stopword_list_id);
        try {
            o.normalize_mode = corpus::parse_normalize_mode(
                read_string(p, "normalize_mode", "preprocess", std::string(corpus::normalize_mode_name(o.normalize_mode))));
        } catch (const InputError& e) {
            throw ConfigError(e.what());
        }
        cfg.preprocess.stopwords_path = read_optional_path(p, "stopwords_path", "preprocess");
        cfg.preprocess.lemma_dictionary_path = read_optional_path(p, "lemma_dictionary_path", "preprocess");
    }

    cfg.provider = j.contains("provider") ? read_provider(j["provider"], "provider", "mock-chat")
                                          : providers::ProviderSpec{"mock", "mock-chat", "generic"};
    cfg.embedder = j.contains("embedder") ? read_provider(j["embedder"], "embedder", "mock-embed")
                                          : providers::ProviderSpec{"mock", "mock-embed", "generic"};

    if (j.contains("extraction")) {
        const auto& e = j["extraction"];
        reject_unknown(e, "extraction",
                       {"max_phrases_per_doc", "coherence_threshold", "prompt_version", "threshold_mode",
                        "coherence_percentile"});
        auto& x = cfg.extraction;
        x.max_phrases_per_doc = read_int(e, "max_phrases_per_doc", "extraction", x.max_phrases_per_doc);
        x.coherence_threshold = read_number(e, "coherence_threshold", "extraction", x.coherence_threshold);
        x.prompt_version = read_string(e, "prompt_version", "extraction", x.prompt_version);
        const auto mode = read_string(e, "threshold_mode", "extraction", "absolute");
        if (mode == "absolute") {
            x.threshold_mode = keyphrase::ThresholdMode::absolute;
        } else if (mode == "percentile") {
            x.threshold_mode = keyphrase::ThresholdMode::percentile;
        } else {
            throw ConfigError("extraction.threshold_mode must be \"absolute\" or \"percentile\"");
        }
        x.coherence_percentile = read_number(e, "coherence_percentile", "extraction", x.coherence_percentile);
    }

    if (j.contains("clustering")) {
        const auto& k = j["clustering"];
        reject_unknown(k, "clustering", {"mode", "k", "k_sweep", "seed", "k_ceiling", "sub_min_members"});
        auto& cl = cfg.clustering;
        cl.mode = read_string(k, "mode", "clustering", cl.mode);
        if (k.contains("k") && !k["k"].is_null()) cl.k = read_int(k, "k", "clustering", 0);
        if (k.contains("k_sweep")) {
            if (!k["k_sweep"].is_array()) throw ConfigError("clustering.k_sweep must be an array of integers");
            for (const auto& v : k["k_sweep"]) {
                if (!v.is_number_integer()) throw ConfigError("clustering.k_sweep must be an array of integers");
                cl.k_sweep.push_back(v.get<int>());
            }
        }
        if (k.contains("seed")) {
            if (!k["seed"].is_number_unsigned()) throw ConfigError("clustering.seed must be a non-negative integer");
            cl.seed = k["seed"].get<std::uint64_t>();
        }
        cl.k_ceiling = read_int(k, "k_ceiling", "clustering", cl.k_ceiling);
        cl.sub_min_members = read_int(k, "sub_min_members", "clustering", cl.sub_min_members);
    }

    if (j.contains("eval")) {
        reject_unknown(j["eval"], "eval", {"enabled"});
        if (j["eval"].contains("enabled") && !j["eval"]["enabled"].is_boolean()) {
            throw ConfigError("eval.enabled must be a boolean");
        }
        cfg.eval_enabled = read<bool>(j["eval"], "enabled", "eval", true);
    }
    if (j.contains("report")) {
        reject_unknown(j["report"], "report", {"formats"});
        if (j["report"].contains("formats")) {
            const auto& f = j["report"]["formats"];
            if (!f.is_array()) throw ConfigError("report.formats must be an array");
            cfg.report_formats.clear();
            for (const auto& v : f) {
                if (!v.is_string()) throw ConfigError("report.formats must contain strings");
                cfg.report_formats.push_back(v.get<std::string>());
            }
        }
    }
    cfg.concurrency = read_int(j, "concurrency", "config", cfg.concurrency);
    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    if (corpus.kind != "20ng" && corpus.kind != "jsonl") throw ConfigError("corpus.kind must be \"20ng\" or \"jsonl\"");
    if (corpus.path.empty()) throw ConfigError("corpus.path must not be empty");
    if (preprocess.options.min_token_len < 1) throw ConfigError("preprocess.min_token_len must be >= 1");
    if (preprocess.options.normalize_mode == corpus::NormalizeMode::lemma_dictionary &&
        !preprocess.lemma_dictionary_path) {
        throw ConfigError("normalize_mode lemma_dictionary requires preprocess.lemma_dictionary_path");
    }
    try {
        corpus::builtin_stopwords(preprocess.options.stopword_list_id);
    } catch (const InputError& e) {
        throw ConfigError(e.what());
    }
    for (const auto* p : {&provider, &embedder}) {
        if (p->kind != "mock" && p->kind != "http") throw ConfigError("provider kind must be \"mock\" or \"http\"");
    }
    providers::parse_chat_adapter(provider.adapter);
    providers::parse_embed_adapter(embedder.adapter);
    extraction.validate();
    if (extraction.prompt_version != keyphrase::kExtractionPromptVersion) {
        throw ConfigError("unsupported extraction.prompt_version: " + extraction.prompt_version);
    }
    if (clustering.mode != "auto" && clustering.mode != "fixed") {
        throw ConfigError("clustering.mode must be \"auto\" or \"fixed\"");
    }
    if (clustering.mode == "fixed" && clustering.fixed_ks().empty()) {
        throw ConfigError("clustering.mode \"fixed\" requires clustering.k or clustering.k_sweep");
    }
    for (int k : clustering.fixed_ks()) {
        if (k < 1) throw ConfigError("clustering k values must be >= 1");
    }
    if (clustering.k_ceiling < 2) throw ConfigError("clustering.k_ceiling must be >= 2");
    if (clustering.sub_min_members < 3) throw ConfigError("clustering.sub_min_members must be >= 3");
    if (report_formats.empty()) throw ConfigError("report.formats must not be empty");
    for (const auto& f : report_formats) {
        if (std::find(kReportFormats.begin(), kReportFormats.end(), f) == kReportFormats.end()) {
            throw ConfigError("unknown report format: " + f);
        }
    }
    if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const auto j = json::parse(buf.str(), nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path.string());
    return from_json(j);
}

json RunConfig::to_json() const {
    const auto& o = preprocess.options;
    json j;
    j["corpus"] = {{"kind", corpus.kind}, {"path", corpus.path}};
    j["preprocess"] = {{"min_token_len", o.min_token_len},
                       {"stopword_list_id", o.stopword_list_id},
                       {"normalize_mode", corpus::normalize_mode_name(o.normalize_mode)},
                       {"stopwords_path", preprocess.stopwords_path ? json(*preprocess.stopwords_path) : json()},
                       {"lemma_dictionary_path",
                        preprocess.lemma_dictionary_path ? json(*preprocess.lemma_dictionary_path) : json()}};
    j["provider"] = {{"kind", provider.kind}, {"model", provider.model}, {"adapter", provider.adapter}};
    j["embedder"] = {{"kind", embedder.kind}, {"model", embedder.model}, {"adapter", embedder.adapter}};
    j["extraction"] = {{"max_phrases_per_doc", extraction.max_phrases_per_doc},
                       {"coherence_threshold", extraction.coherence_threshold},
                       {"prompt_version", extraction.prompt_version},
                       {"threshold_mode",
                        extraction.threshold_mode == keyphrase::ThresholdMode::absolute ? "absolute" : "percentile"},
                       {"coherence_percentile", extraction.coherence_percentile}};
    j["clustering"] = {{"mode", clustering.mode},
                       {"k", clustering.k ? json(*clustering.k) : json()},
                       {"k_sweep", clustering.k_sweep},
                       {"seed", clustering.seed},
                       {"k_ceiling", clustering.k_ceiling},
                       {"sub_min_members", clustering.sub_min_members}};
    j["eval"] = {{"enabled", eval_enabled}};
    j["report"] = {{"formats", report_formats}};
    j["concurrency"] = concurrency;
    return j;
}

}  // namespace qualit::pipeline
