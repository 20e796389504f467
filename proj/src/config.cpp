#include "tsg/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <functional>
#include <sstream>

extern char** environ;

namespace tsg {

namespace {

struct Field {
    std::string section;
    std::string key;
    std::function<void(PipelineConfig&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

[[noreturn]] void bad_value(const std::string& name, const std::string& value, const std::string& expected) {
    throw ValidationError("config " + name + ": '" + value + "' is not " + expected);
}

long long parse_int(const std::string& name, const std::string& v) {
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &used);
    } catch (const std::exception&) {
        bad_value(name, v, "an integer");
    }
    if (used != v.size()) bad_value(name, v, "an integer");
    return out;
}

double parse_double(const std::string& name, const std::string& v) {
    std::size_t used = 0;
    double out = 0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        bad_value(name, v, "a number");
    }
    if (used != v.size()) bad_value(name, v, "a number");
    return out;
}

bool parse_bool(const std::string& name, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad_value(name, v, "a boolean");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

// Shortest text that reads back to the same double.
std::string fmt(double v) {
    std::array<char, 32> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), r.ptr);
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::ostringstream s;
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
    return s.str();
}

#define TSG_INT(sec, k, expr)                                                                                  \
    Field {                                                                                                    \
        sec, k, [](PipelineConfig& c, const std::string& v) { expr = static_cast<std::decay_t<decltype(expr)>>( \
                                                                   parse_int(std::string(sec) + "." + k, v)); }, \
            [](const PipelineConfig& c) { return std::to_string(expr); }                                      \
    }
#define TSG_DBL(sec, k, expr)                                                                                         \
    Field {                                                                                                           \
        sec, k, [](PipelineConfig& c, const std::string& v) { expr = parse_double(std::string(sec) + "." + k, v); }, \
            [](const PipelineConfig& c) { return fmt(expr); }                                                        \
    }
#define TSG_PATH(k, expr)                                                                                  \
    Field {                                                                                                \
        "paths", k, [](PipelineConfig& c, const std::string& v) { expr = v; },                             \
            [](const PipelineConfig& c) { return expr.string(); }                                          \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        TSG_PATH("root", c.paths.root),
        TSG_PATH("data", c.paths.data),
        TSG_PATH("cache", c.paths.cache),
        TSG_PATH("checkpoints", c.paths.checkpoints),
        TSG_PATH("embeddings", c.paths.embeddings),
        TSG_PATH("reports", c.paths.reports),

        TSG_INT("generate", "count_per_family", c.generate.count_per_family),
        Field{"generate", "families",
              [](PipelineConfig& c, const std::string& v) { c.generate.families = split_list(v); },
              [](const PipelineConfig& c) { return join(c.generate.families); }},
        TSG_DBL("generate", "train_ratio", c.generate.train_ratio),

        TSG_INT("builder", "temporal_reach", c.builder.temporal_reach),
        TSG_DBL("builder", "o2o_radius", c.builder.o2o_radius),
        TSG_DBL("builder", "road_buffer", c.builder.road_buffer),
        TSG_INT("builder", "centerline_points", c.builder.centerline_points),
        TSG_INT("builder", "pe_dim", c.builder.pe_dim),

        TSG_DBL("augment", "p_edge_drop", c.augment.p_edge_drop),
        TSG_DBL("augment", "p_attr_drop", c.augment.p_attr_drop),
        TSG_DBL("augment", "p_attr_noise", c.augment.p_attr_noise),
        TSG_DBL("augment", "noise_sigma", c.augment.noise_sigma),
        TSG_DBL("augment", "p_min", c.augment.p_min),
        TSG_DBL("augment", "p_max", c.augment.p_max),
        Field{"augment", "resample_p",
              [](PipelineConfig& c, const std::string& v) { c.augment.resample_p = parse_bool("augment.resample_p", v); },
              [](const PipelineConfig& c) { return std::string(c.augment.resample_p ? "true" : "false"); }},
        Field{"augment", "mask_mode",
              [](PipelineConfig& c, const std::string& v) {
                  if (v == "column") c.augment.mask_mode = MaskMode::column;
                  else if (v == "cell") c.augment.mask_mode = MaskMode::cell;
                  else bad_value("augment.mask_mode", v, "column or cell");
              },
              [](const PipelineConfig& c) {
                  return std::string(c.augment.mask_mode == MaskMode::column ? "column" : "cell");
              }},

        TSG_INT("train", "epochs", c.train.epochs),
        TSG_INT("train", "batch_size", c.train.batch_size),
        TSG_DBL("train", "lr", c.train.lr),
        TSG_DBL("train", "weight_decay", c.train.weight_decay),
        TSG_DBL("train", "m_base", c.train.m_base),
        TSG_DBL("train", "tau", c.train.tau),
        TSG_INT("train", "ema_interval", c.train.ema_interval),
        TSG_DBL("train", "grad_clip", c.train.grad_clip),
        TSG_INT("train", "predictor_hidden", c.train.predictor_hidden),

        TSG_INT("eval", "validity_trials", c.eval.validity_trials),
        Field{"eval", "mcs_sweep",
              [](PipelineConfig& c, const std::string& v) {
                  c.eval.mcs_sweep.clear();
                  for (const auto& s : split_list(v)) {
                      c.eval.mcs_sweep.push_back(static_cast<int>(parse_int("eval.mcs_sweep", s)));
                  }
              },
              [](const PipelineConfig& c) { return join(c.eval.mcs_sweep); }},
        TSG_INT("eval", "mcs", c.eval.mcs),
        TSG_INT("eval", "min_samples", c.eval.min_samples),
        TSG_INT("eval", "k", c.eval.k),
        TSG_INT("eval", "classifier_epochs", c.eval.classifier.epochs),
        TSG_INT("eval", "classifier_batch_size", c.eval.classifier.batch_size),
        TSG_DBL("eval", "classifier_lr", c.eval.classifier.lr),
        TSG_DBL("eval", "classifier_weight_decay", c.eval.classifier.weight_decay),
        TSG_INT("eval", "classifier_hidden", c.eval.classifier.hidden),
        TSG_DBL("eval", "classifier_threshold", c.eval.classifier.threshold),

        TSG_INT("global", "seed", c.seed),
    };
    return f;
}

#undef TSG_INT
#undef TSG_DBL
#undef TSG_PATH

std::string env_name(const Field& f) {
    std::string s = "TSG_" + f.section + "_" + f.key;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::toupper(ch); });
    return s;
}

}  // namespace

std::filesystem::path PathsConfig::resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : root / p;
}

void PipelineConfig::propagate_seed() {
    train.seed = seed;
    augment.seed = seed;
    eval.classifier.seed = seed;
}

void PipelineConfig::validate() const {
    builder.validate();
    augment.validate();
    train.validate();
    eval.classifier.validate();
    if (generate.count_per_family < 1) throw ValidationError("generate.count_per_family must be >= 1");
    if (!(generate.train_ratio > 0.0 && generate.train_ratio < 1.0)) {
        throw ValidationError("generate.train_ratio must lie in (0, 1)");
    }
    if (eval.validity_trials < 1) throw ValidationError("eval.validity_trials must be >= 1");
    if (eval.mcs < 2) throw ValidationError("eval.mcs must be >= 2");
    for (int m : eval.mcs_sweep) {
        if (m < 2) throw ValidationError("eval.mcs_sweep entries must be >= 2");
    }
    if (eval.k < 1) throw ValidationError("eval.k must be >= 1");
}

PipelineConfig load_pipeline_config(const std::optional<std::filesystem::path>& file,
                                    const std::map<std::string, std::string>& env) {
    PipelineConfig c;
    std::filesystem::path base = ".";
    if (file) {
        if (!std::filesystem::exists(*file)) throw Error("missing_input", "config file '" + file->string() + "' not found");
        boost::property_tree::ptree tree;
        try {
            boost::property_tree::ini_parser::read_ini(file->string(), tree);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw Error("config_error", std::string("cannot parse config: ") + e.what());
        }
        base = file->parent_path().empty() ? std::filesystem::path(".") : file->parent_path();
        for (const auto& [section, body] : tree) {
            for (const auto& [key, value] : body) {
                const auto it = std::find_if(fields().begin(), fields().end(),
                                             [&](const Field& f) { return f.section == section && f.key == key; });
                if (it == fields().end()) throw ValidationError("config: unknown key '" + section + "." + key + "'");
                it->set(c, value.get_value<std::string>());
            }
            if (body.empty() && !body.data().empty()) {
                throw ValidationError("config: key '" + section + "' outside any section");
            }
        }
    }
    for (const auto& f : fields()) {
        const auto it = env.find(env_name(f));
        if (it != env.end()) f.set(c, it->second);
    }
    for (const auto& [name, value] : env) {
        const bool known = std::any_of(fields().begin(), fields().end(), [&](const Field& f) { return env_name(f) == name; });
        if (!known) throw ValidationError("environment: unknown override '" + name + "'");
    }
    if (c.paths.root.is_relative()) c.paths.root = base / c.paths.root;
    c.paths.root = c.paths.root.lexically_normal();
    c.propagate_seed();
    c.validate();
    return c;
}

std::map<std::string, std::string> tsg_environment() {
    std::map<std::string, std::string> out;
    for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
        const std::string entry(*e);
        if (entry.rfind("TSG_", 0) != 0) continue;
        const auto eq = entry.find('=');
        if (eq != std::string::npos) out[entry.substr(0, eq)] = entry.substr(eq + 1);
    }
    return out;
}

std::string to_ini(const PipelineConfig& config) {
    std::ostringstream out;
    std::string section;
    for (const auto& f : fields()) {
        if (f.section != section) {
            if (!section.empty()) out << '\n';
            section = f.section;
            out << '[' << section << "]\n";
        }
        out << f.key << " = " << f.get(config) << '\n';
    }
    return out.str();
}

}  // namespace tsg
