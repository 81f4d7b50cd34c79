#include "config.hpp"

#include <cmath>

#include <yaml-cpp/yaml.h>

#include "jumpbsde/drivers.hpp"
#include "jumpbsde/report.hpp"

namespace jumpbsde::cli {

namespace {

const std::vector<std::string> kKnownKeys{
    "states",      "rates",         "horizon",         "start_time",          "start_state",
    "modulation",  "modulation_params", "model_file",  "driver",              "driver_params",
    "terminal",    "grid",          "solver",          "picard_tol",          "max_iter",
    "radii",       "delta",         "cascade_tol",     "seed",                "paths",
    "threads",     "sigma",         "stability_indices", "stability_scale",   "stability_tol",
    "verify_residual_tol", "value_file"};

template <class T>
T read(const YAML::Node& node, const std::string& key) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

void merge_model_file(YAML::Node& root, const std::filesystem::path& base) {
    if (!root["model_file"]) return;
    const std::filesystem::path file = base / read<std::string>(root["model_file"], "model_file");
    YAML::Node model;
    try {
        model = YAML::LoadFile(file.string());
    } catch (const YAML::Exception& e) {
        throw ConfigError("cannot read model file " + file.string() + ": " + e.what());
    }
    for (const char* key : {"states", "rates", "horizon", "modulation", "modulation_params"}) {
        if (model[key] && !root[key]) root[key] = model[key];
    }
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::Exception& e) {
        throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
    }
    if (!root.IsMap()) {
        throw ConfigError("config must be a mapping of keys to values");
    }
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    merge_model_file(root, path.parent_path());

    ExperimentConfig c;
    if (!root["states"]) throw ConfigError("config key 'states' is required");
    if (!root["rates"]) throw ConfigError("config key 'rates' is required");
    if (!root["terminal"]) throw ConfigError("config key 'terminal' is required");
    c.states = read<std::vector<std::string>>(root["states"], "states");
    c.rates = read<std::vector<std::vector<double>>>(root["rates"], "rates");
    c.terminal = read<std::vector<double>>(root["terminal"], "terminal");
    if (root["horizon"]) c.horizon = read<double>(root["horizon"], "horizon");
    if (root["start_time"]) c.start_time = read<double>(root["start_time"], "start_time");
    c.start_state = root["start_state"] ? read<std::string>(root["start_state"], "start_state")
                                        : (c.states.empty() ? "" : c.states.front());
    if (root["modulation"]) c.modulation = read<std::string>(root["modulation"], "modulation");
    if (root["modulation_params"]) {
        c.modulation_params = read<std::vector<double>>(root["modulation_params"],
                                                        "modulation_params");
    }
    if (root["driver"]) c.driver = read<std::string>(root["driver"], "driver");
    if (root["driver_params"]) {
        c.driver_params = read<std::map<std::string, double>>(root["driver_params"],
                                                              "driver_params");
    }
    if (root["grid"]) {
        const long long n = read<long long>(root["grid"], "grid");
        if (n < 2) throw ConfigError("grid must be at least 2");
        c.grid = static_cast<std::size_t>(n);
    }
    if (root["solver"]) c.solver = read<std::string>(root["solver"], "solver");
    if (root["picard_tol"]) c.picard_tol = read<double>(root["picard_tol"], "picard_tol");
    if (root["max_iter"]) c.max_iter = read<std::size_t>(root["max_iter"], "max_iter");
    if (root["radii"]) c.radii = read<std::vector<double>>(root["radii"], "radii");
    if (root["delta"]) c.delta = read<double>(root["delta"], "delta");
    if (root["cascade_tol"]) c.cascade_tol = read<double>(root["cascade_tol"], "cascade_tol");
    if (root["seed"]) c.seed = read<std::uint64_t>(root["seed"], "seed");
    if (root["paths"]) c.paths = read<std::size_t>(root["paths"], "paths");
    if (root["threads"]) c.threads = read<unsigned>(root["threads"], "threads");
    if (root["sigma"]) c.sigma = read<double>(root["sigma"], "sigma");
    if (root["stability_indices"]) {
        c.stability_indices = read<std::vector<double>>(root["stability_indices"],
                                                        "stability_indices");
    }
    if (root["stability_scale"]) {
        c.stability_scale = read<double>(root["stability_scale"], "stability_scale");
    }
    if (root["stability_tol"]) c.stability_tol = read<double>(root["stability_tol"], "stability_tol");
    if (root["verify_residual_tol"]) {
        c.verify_residual_tol = read<double>(root["verify_residual_tol"], "verify_residual_tol");
    }
    if (root["value_file"]) {
        c.value_file = path.parent_path() / read<std::string>(root["value_file"], "value_file");
    }
    validate(c);
    return c;
}

void validate(const ExperimentConfig& c) {
    const auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError(std::string(name) + " must be positive");
        }
    };
    if (c.states.empty()) throw ConfigError("states must not be empty");
    if (c.terminal.size() != c.states.size()) {
        throw ConfigError("terminal needs one value per state");
    }
    if (c.grid < 2) throw ConfigError("grid must be at least 2");
    positive(c.picard_tol, "picard_tol");
    positive(c.cascade_tol, "cascade_tol");
    positive(c.stability_tol, "stability_tol");
    positive(c.verify_residual_tol, "verify_residual_tol");
    positive(c.sigma, "sigma");
    if (c.max_iter == 0) throw ConfigError("max_iter must be positive");
    if (c.paths == 0) throw ConfigError("paths must be positive");
    if (!(c.start_time >= 0.0 && c.start_time < c.horizon)) {
        throw ConfigError("start_time must lie in [0, horizon)");
    }
    if (std::find(c.states.begin(), c.states.end(), c.start_state) == c.states.end()) {
        throw ConfigError("start_state '" + c.start_state + "' is not a state");
    }
    if (c.solver != "lipschitz" && c.solver != "local") {
        throw ConfigError("solver must be 'lipschitz' or 'local'");
    }
    for (double n : c.stability_indices) positive(n, "stability_indices entries");
    if (!(c.stability_scale >= 0.0)) throw ConfigError("stability_scale must be nonnegative");

    // Building the pieces surfaces the remaining constraints with their own messages.
    try {
        (void)build_model(c);
        const Driver d = build_driver(c);
        if (c.solver == "lipschitz" && !d.global_L) {
            throw ConfigError("solver 'lipschitz' needs a globally Lipschitz driver");
        }
        if (c.solver == "local") {
            TruncationSchedule s{c.radii, c.delta.value_or(0.9 * (1.0 - d.alpha) / 4.0), d.alpha};
            s.validate();
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

nlohmann::json canonical(const ExperimentConfig& c) {
    nlohmann::json j;
    j["states"] = c.states;
    j["rates"] = c.rates;
    j["horizon"] = c.horizon;
    j["start_time"] = c.start_time;
    j["start_state"] = c.start_state;
    j["modulation"] = c.modulation;
    j["modulation_params"] = c.modulation_params;
    j["driver"] = c.driver;
    j["driver_params"] = c.driver_params;
    j["terminal"] = c.terminal;
    j["grid"] = c.grid;
    j["solver"] = c.solver;
    j["picard_tol"] = c.picard_tol;
    j["max_iter"] = c.max_iter;
    j["radii"] = c.radii;
    j["delta"] = c.delta ? nlohmann::json(*c.delta) : nlohmann::json(nullptr);
    j["cascade_tol"] = c.cascade_tol;
    j["seed"] = c.seed;
    j["paths"] = c.paths;
    j["sigma"] = c.sigma;
    j["stability_indices"] = c.stability_indices;
    j["stability_scale"] = c.stability_scale;
    j["stability_tol"] = c.stability_tol;
    j["verify_residual_tol"] = c.verify_residual_tol;
    j["value_file"] = c.value_file ? nlohmann::json(c.value_file->filename().string())
                                   : nlohmann::json(nullptr);
    return j;
}

std::string fingerprint(const ExperimentConfig& config) {
    return hex64(fnv1a64(canonical(config).dump()));
}

MarkovModel build_model(const ExperimentConfig& c) {
    return MarkovModel(c.states, c.rates, c.horizon,
                       Modulation::parse(c.modulation, c.modulation_params));
}

Driver build_driver(const ExperimentConfig& c) {
    try {
        return drivers::make(c.driver, c.driver_params);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace jumpbsde::cli
