#include "config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ace/errors.hpp"

namespace ace::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) throw InputError("config: bad value '" + value + "' for " + key);
    return out;
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_number<std::size_t>(key, item));
    }
    return out;
}

std::string join(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string real(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::stringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InputError("config line " + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto& t = c.train;
        if (key == "data") {
            c.data_dir = value;
        } else if (key == "train_subset") {
            c.train_subset = parse_number<std::size_t>(key, value);
        } else if (key == "test_subset") {
            c.test_subset = parse_number<std::size_t>(key, value);
        } else if (key == "batch_size") {
            t.batch_size = parse_number<std::size_t>(key, value);
        } else if (key == "epochs") {
            t.epochs = parse_number<std::size_t>(key, value);
            c.epochs_set = true;
        } else if (key == "seed") {
            t.seed = parse_number<std::uint64_t>(key, value);
        } else if (key == "hardcoded") {
            t.hardcoded = parse_list(key, value);
        } else if (key == "learning_rate") {
            t.adam.learning_rate = parse_number<double>(key, value);
        } else if (key == "half_decay_epochs") {
            t.adam.half_decay_epochs = parse_number<double>(key, value);
        } else if (key == "checkpoint_every") {
            t.checkpoint_every = parse_number<std::size_t>(key, value);
        } else if (key == "hidden_residual") {
            t.model.hidden[0] = parse_number<std::size_t>(key, value);
        } else if (key == "hidden_coarse") {
            t.model.hidden[1] = parse_number<std::size_t>(key, value);
        } else if (key == "classifier_channels") {
            const auto v = parse_list(key, value);
            if (v.size() != 3) throw InputError("config: classifier_channels needs three widths");
            t.model.classifier_channels = {v[0], v[1], v[2]};
        } else {
            throw InputError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    c.train.model.init_seed = c.train.seed;
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open config " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::map<std::string, std::string> RunConfig::echo() const {
    const auto& t = train;
    return {
        {"data", data_dir ? data_dir->string() : ""},
        {"train_subset", std::to_string(train_subset)},
        {"test_subset", std::to_string(test_subset)},
        {"batch_size", std::to_string(t.batch_size)},
        {"epochs", epochs_set ? std::to_string(t.epochs) : ""},
        {"seed", std::to_string(t.seed)},
        {"hardcoded", join(t.hardcoded)},
        {"learning_rate", real(t.adam.learning_rate)},
        {"half_decay_epochs", real(t.adam.half_decay_epochs)},
        {"checkpoint_every", std::to_string(t.checkpoint_every)},
        {"hidden_residual", std::to_string(t.model.hidden[0])},
        {"hidden_coarse", std::to_string(t.model.hidden[1])},
        {"classifier_channels", join({t.model.classifier_channels.begin(), t.model.classifier_channels.end()})},
    };
}

}  // namespace ace::cli
