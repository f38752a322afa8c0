#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <optional>
#include <stdexcept>

#include "ace/checkpoint.hpp"
#include "ace/dataio.hpp"
#include "ace/errors.hpp"
#include "ace/generator.hpp"
#include "ace/rng.hpp"
#include "ace/trainer.hpp"
#include "config.hpp"

namespace ace::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Accumulates inputs and artifacts and writes manifest.json into the output
// directory.
class Manifest {
public:
    Manifest(std::string command, fs::path out) : out_(std::move(out)) {
        doc_["command"] = std::move(command);
        doc_["inputs"] = json::object();
        doc_["artifacts"] = json::array();
    }

    void set(const std::string& key, json value) { doc_[key] = std::move(value); }
    void config(const RunConfig& c) {
        doc_["config"] = c.echo();
        doc_["seed"] = c.train.seed;
    }
    void input(const std::string& role, const fs::path& path) {
        doc_["inputs"][role] = {{"path", path.string()}, {"git_blob", dataio::git_blob_hash_file(path)}};
    }
    fs::path artifact(const fs::path& relative) {
        artifacts_.push_back(relative);
        const fs::path full = out_ / relative;
        fs::create_directories(full.parent_path());
        return full;
    }
    void write() {
        std::sort(artifacts_.begin(), artifacts_.end());
        for (const auto& a : artifacts_) {
            doc_["artifacts"].push_back({{"path", a.generic_string()},
                                         {"git_blob", dataio::git_blob_hash_file(out_ / a)}});
        }
        std::ofstream f(out_ / "manifest.json", std::ios::trunc);
        if (!f) throw InputError("cannot write " + (out_ / "manifest.json").string());
        f << doc_.dump(2) << "\n";
    }

private:
    fs::path out_;
    json doc_;
    std::vector<fs::path> artifacts_;
};

struct Common {
    std::string config;
    std::string data;
    std::string out;
};

RunConfig resolve_config(const Common& c, bool required) {
    if (c.config.empty()) {
        if (required) throw UsageError("--config is required");
        RunConfig r;
        r.train.model.init_seed = r.train.seed;
        return r;
    }
    return load_config(c.config);
}

fs::path resolve_data(const Common& c, const RunConfig& rc) {
    if (!c.data.empty()) return c.data;
    if (rc.data_dir) return *rc.data_dir;
    if (const char* env = std::getenv("ACE_DATA_DIR"); env && *env) return env;
    throw InputError("no dataset directory: pass --data, set data= in the config, or set ACE_DATA_DIR");
}

dataio::Dataset load_set(const fs::path& dir, bool test, std::size_t count) {
    const auto files = test ? dataio::cifar_test_files(dir) : dataio::cifar_train_files(dir);
    dataio::Dataset d = dataio::load_cifar10(files);
    if (count == 0) return d;
    if (count > d.size()) {
        throw InputError("subset of " + std::to_string(count) + " exceeds the " + std::to_string(d.size()) +
                         " observations under " + dir.string());
    }
    return dataio::subset(d, count);
}

std::vector<dataio::RgbImage> to_tiles(const Tensor& images) {
    const std::size_t side = images.dim(2);
    const std::size_t width = images.size() / images.dim(0);
    std::vector<dataio::RgbImage> tiles;
    auto v = images.values();
    for (std::size_t i = 0; i < images.dim(0); ++i) tiles.push_back(dataio::to_rgb(v.subspan(i * width, width), side));
    return tiles;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw InputError("cannot write " + path.string());
    for (const auto& l : lines) f << l << "\n";
}

std::vector<std::string> mse_lines(const dataio::Dataset& data, const std::vector<double>& mse) {
    std::vector<std::string> lines{"index,label,mse"};
    for (std::size_t i = 0; i < mse.size(); ++i) {
        lines.push_back(std::to_string(i) + "," + std::to_string(data.labels[i]) + "," + real(mse[i]));
    }
    return lines;
}

AceModel load_model(const fs::path& path, Manifest& m, int* run_number = nullptr) {
    const Checkpoint ckpt = read_checkpoint(path);
    m.input("checkpoint", path);
    if (run_number) *run_number = checkpoint_run_number(ckpt);
    return model_from_checkpoint(ckpt);
}

DriftRegistry load_registry(const fs::path& path, Manifest& m) {
    DriftRegistry r = DriftRegistry::read(path);
    m.input("registry", path);
    return r;
}

// Writes a sheet plus one PNG per cell and an index of grid offsets.
void write_grid(Manifest& m, const std::string& stem, const Tensor& images, const GridSpec& spec) {
    const auto tiles = to_tiles(images);
    dataio::write_png(m.artifact(stem + ".png"), dataio::tile_sheet(tiles, spec.n_per_axis));
    const auto cells = grid_cells(spec);
    std::vector<std::string> index{"cell,row,column,gx,gy"};
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        char name[64];
        std::snprintf(name, sizeof name, "cell_%02zu_%02zu.png", c.row, c.column);
        dataio::write_png(m.artifact(fs::path(stem) / name), tiles[i]);
        index.push_back(std::to_string(i) + "," + std::to_string(c.row) + "," + std::to_string(c.column) + "," +
                        real(c.gx) + "," + real(c.gy));
    }
    write_lines(m.artifact(fs::path(stem) / "index.csv"), index);
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    Common common;
    int run = 1;
    std::string registry;
    std::string checkpoint;
};

std::string cmd_train(const TrainArgs& a, std::ostream& log) {
    if (a.run < 1) throw UsageError("--run must be 1 or more");
    if (a.run >= 2 && a.registry.empty()) throw UsageError("train --run " + std::to_string(a.run) + " needs --registry");
    if (a.run >= 2 && a.checkpoint.empty()) {
        throw UsageError("train --run " + std::to_string(a.run) + " needs --checkpoint from the previous run");
    }
    if (a.run == 1 && !a.registry.empty()) throw UsageError("run 1 trains against the prior; drop --registry");
    RunConfig rc = resolve_config(a.common, true);
    if (!rc.epochs_set) throw InputError("config must set epochs");
    rc.train.run_number = a.run;
    const fs::path out = a.common.out;
    fs::create_directories(out);
    Manifest m("train", out);
    m.config(rc);
    m.set("run", a.run);
    m.input("config", a.common.config);

    const dataio::Dataset data = load_set(resolve_data(a.common, rc), false, rc.train_subset);
    m.set("dataset_sha1", dataio::dataset_checksum(data));
    std::optional<DriftRegistry> registry;
    std::optional<Checkpoint> resume;
    if (!a.registry.empty()) registry = load_registry(a.registry, m);
    if (!a.checkpoint.empty()) {
        resume = read_checkpoint(a.checkpoint);
        m.input("checkpoint", a.checkpoint);
    }

    std::vector<std::string> metrics{EpochMetrics::csv_header()};
    TrainHooks hooks;
    hooks.on_epoch = [&](const EpochMetrics& e) {
        metrics.push_back(e.csv_line());
        log << "epoch " << e.epoch << " objective " << real(e.objective) << "\n";
    };
    hooks.on_checkpoint = [&](std::size_t done, const AceModel& model, const AdamState& adam) {
        write_checkpoint(m.artifact("checkpoint_epoch" + std::to_string(done) + ".ace"),
                         make_checkpoint(model, &adam, a.run));
    };
    TrainResult r = train_run(rc.train, data, registry ? &*registry : nullptr, resume ? &*resume : nullptr, hooks);

    write_checkpoint(m.artifact("checkpoint.ace"), make_checkpoint(r.model, &r.optimizer, a.run));
    r.registry.write(m.artifact("registry.csv"));
    write_lines(m.artifact("metrics.csv"), metrics);

    const auto mse = reconstruction_report(r.model, data);
    write_lines(m.artifact("mse.csv"), mse_lines(data, mse));
    std::vector<std::string> dominant{"batch,index,label,mse"};
    if (!r.metrics.empty()) {
        const auto& last = r.metrics.back().dominant;
        for (std::size_t t = 0; t < last.size(); ++t) {
            dominant.push_back(std::to_string(t) + "," + std::to_string(last[t]) + "," +
                               std::to_string(data.labels[last[t]]) + "," + real(mse[last[t]]));
        }
    }
    write_lines(m.artifact("dominant.csv"), dominant);
    if (!r.initial_generative_error.empty()) {
        std::vector<std::string> lines{"index,generative_error"};
        for (std::size_t i = 0; i < r.initial_generative_error.size(); ++i) {
            lines.push_back(std::to_string(i) + "," + real(r.initial_generative_error[i]));
        }
        write_lines(m.artifact("epoch0_generative_error.csv"), lines);
    }
    m.write();
    return "run " + std::to_string(a.run) + ": " + std::to_string(data.size()) + " observations, " +
           std::to_string(rc.train.epochs) + " epochs -> " + (out / "checkpoint.ace").string();
}

struct CheckpointArgs {
    Common common;
    std::string checkpoint;
};

std::string cmd_extract(const CheckpointArgs& a) {
    const RunConfig rc = resolve_config(a.common, false);
    const fs::path out = a.common.out;
    fs::create_directories(out);
    Manifest m("extract-drifts", out);
    m.config(rc);
    if (!a.common.config.empty()) m.input("config", a.common.config);
    AceModel model = load_model(a.checkpoint, m);
    const dataio::Dataset data = load_set(resolve_data(a.common, rc), false, rc.train_subset);
    m.set("dataset_sha1", dataio::dataset_checksum(data));
    extract_drifts(model, data).write(m.artifact("registry.csv"));
    m.write();
    return "registry of " + std::to_string(data.size()) + " observations -> " + (out / "registry.csv").string();
}

struct ReconstructArgs {
    Common common;
    std::string checkpoint;
    std::string set = "train";
    std::size_t first = 10;
};

std::string cmd_reconstruct(const ReconstructArgs& a) {
    const RunConfig rc = resolve_config(a.common, false);
    const fs::path out = a.common.out;
    fs::create_directories(out);
    Manifest m("reconstruct", out);
    m.config(rc);
    m.set("set", a.set);
    m.set("first", a.first);
    if (!a.common.config.empty()) m.input("config", a.common.config);
    AceModel model = load_model(a.checkpoint, m);
    const bool test = a.set == "test";
    const dataio::Dataset data =
        load_set(resolve_data(a.common, rc), test, test ? rc.test_subset : rc.train_subset);
    m.set("dataset_sha1", dataio::dataset_checksum(data));
    if (a.first == 0 || a.first > data.size()) {
        throw UsageError("--first must lie in 1.." + std::to_string(data.size()));
    }

    const auto mse = reconstruction_report(model, data);
    write_lines(m.artifact("mse_" + a.set + ".csv"), mse_lines(data, mse));

    // Panel columns: input, reconstruction at the drift, a sample around it.
    const dataio::Dataset head = dataio::subset(data, a.first);
    const DriftRegistry drifts = extract_drifts(model, head);
    std::vector<dataio::RgbImage> tiles;
    for (std::size_t i = 0; i < head.size(); ++i) {
        const std::size_t cls = head.labels[i];
        const ObservationDrift& d = drifts.at(i);
        ObservationDrift sampled = d;
        for (std::size_t l = 0; l < 2; ++l) {
            for (std::size_t k = 0; k < kLatentDim; ++k) {
                const double u = counter_uniform(rc.train.seed, 0xFFFFFFFFu, static_cast<std::uint32_t>(i),
                                                 static_cast<std::uint32_t>(l + 1), static_cast<std::uint32_t>(k));
                sampled[l][k].mu = laplace::sample(u, d[l][k].density());
            }
        }
        tiles.push_back(dataio::to_rgb(head.image(i), head.side));
        tiles.push_back(to_tiles(decode_at(model, d, cls))[0]);
        tiles.push_back(to_tiles(decode_at(model, sampled, cls))[0]);
    }
    dataio::write_png(m.artifact("reconstruct_" + a.set + ".png"), dataio::tile_sheet(tiles, 3));
    m.write();
    return a.set + " median per-pixel MSE " + real(median(mse)) + " over " + std::to_string(data.size()) +
           " observations";
}

struct GridArgs {
    Common common;
    std::string checkpoint;
    std::string registry;
    std::size_t center = 0;
    std::optional<std::size_t> cls;
    double span = 7.0;
    std::size_t n = 15;
    int level = 2;
};

std::size_t observation_class(const Common& c, const RunConfig& rc, std::size_t index) {
    const dataio::Dataset data = load_set(resolve_data(c, rc), false, 0);
    if (index >= data.size()) throw InputError("observation " + std::to_string(index) + " is not in the training set");
    return data.labels[index];
}

GridSpec grid_spec(const GridArgs& a) {
    if (a.level != 1 && a.level != 2) throw UsageError("--level must be 1 or 2");
    GridSpec spec{a.n, a.span, a.center, static_cast<Level>(a.level)};
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return spec;
}

std::string cmd_generate(const GridArgs& a) {
    const GridSpec spec = grid_spec(a);
    const RunConfig rc = resolve_config(a.common, false);
    const fs::path out = a.common.out;
    fs::create_directories(out);
    Manifest m("generate", out);
    m.config(rc);
    m.set("grid", {{"center", a.center}, {"n", a.n}, {"span", a.span}, {"level", a.level}});
    int run = 0;
    AceModel model = load_model(a.checkpoint, m, &run);
    const DriftRegistry registry = load_registry(a.registry, m);
    const std::size_t cls = a.cls ? *a.cls : observation_class(a.common, rc, a.center);
    m.set("class", cls);
    const Tensor images = perturbation_grid(model, spec, registry.at(a.center), cls);
    write_grid(m, "center" + std::to_string(a.center) + "_run" + std::to_string(run), images, spec);
    m.write();
    return std::to_string(images.dim(0)) + " images around observation " + std::to_string(a.center);
}

std::string cmd_baseline(const GridArgs& a) {
    const GridSpec spec = grid_spec(a);
    const RunConfig rc = resolve_config(a.common, false);
    const fs::path out = a.common.out;
    fs::create_directories(out);
    Manifest m("baseline", out);
    m.config(rc);
    m.set("grid", {{"n", a.n}, {"span", a.span}, {"level", a.level}});
    int run = 0;
    AceModel model = load_model(a.checkpoint, m, &run);
    const std::size_t cls = a.cls.value_or(7);
    m.set("class", cls);
    const Tensor images = zero_drift_baseline(model, spec, cls);
    write_grid(m, "baseline_class" + std::to_string(cls) + "_run" + std::to_string(run), images, spec);
    m.write();
    return std::to_string(images.dim(0)) + " images around the zero drift, class " + std::to_string(cls);
}

struct InterpolateArgs {
    Common common;
    std::string checkpoint;
    std::string registry;
    std::size_t from = 0;
    std::size_t to = 0;
    std::size_t steps = 11;
};

std::string cmd_interpolate(const InterpolateArgs& a) {
    if (a.steps < 2) throw UsageError("--steps must be at least 2");
    const RunConfig rc = resolve_config(a.common, false);
    const fs::path out = a.common.out;
    fs::create_directories(out);
    Manifest m("interpolate", out);
    m.config(rc);
    m.set("path", {{"from", a.from}, {"to", a.to}, {"steps", a.steps}});
    AceModel model = load_model(a.checkpoint, m);
    const DriftRegistry registry = load_registry(a.registry, m);
    const std::size_t ca = observation_class(a.common, rc, a.from);
    const std::size_t cb = observation_class(a.common, rc, a.to);
    const Tensor images = interpolate(model, registry.at(a.from), ca, registry.at(a.to), cb, a.steps);
    const auto tiles = to_tiles(images);
    const std::string stem = "interpolate_" + std::to_string(a.from) + "_" + std::to_string(a.to);
    dataio::write_png(m.artifact(stem + ".png"), dataio::tile_sheet(tiles, tiles.size()));
    for (std::size_t k = 0; k < tiles.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "step_%02zu.png", k);
        dataio::write_png(m.artifact(fs::path(stem) / name), tiles[k]);
    }
    m.write();
    return std::to_string(a.steps) + " images from " + std::to_string(a.from) + " to " + std::to_string(a.to);
}

void add_common(CLI::App* sub, Common& c, bool config_required) {
    auto* opt = sub->add_option("--config", c.config, "key=value run configuration")->check(CLI::ExistingFile);
    if (config_required) opt->required();
    sub->add_option("--data", c.data, "CIFAR-10 binary directory (default: config data= or ACE_DATA_DIR)");
    sub->add_option("--out", c.out, "output directory")->required();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Auto-classifier-encoder training and generation", "ace"};
    app.require_subcommand(1);

    TrainArgs train;
    auto* s_train = app.add_subcommand("train", "train one run of the drift protocol");
    add_common(s_train, train.common, true);
    s_train->add_option("--run", train.run, "run number")->required();
    s_train->add_option("--registry", train.registry, "drift registry of the previous run");
    s_train->add_option("--checkpoint", train.checkpoint, "checkpoint of the previous run");

    CheckpointArgs extract;
    auto* s_extract = app.add_subcommand("extract-drifts", "write the drift registry of a checkpoint");
    add_common(s_extract, extract.common, false);
    s_extract->add_option("--checkpoint", extract.checkpoint, "trained checkpoint")->required();

    ReconstructArgs recon;
    auto* s_recon = app.add_subcommand("reconstruct", "input / reconstruction / sample panel and MSE table");
    add_common(s_recon, recon.common, false);
    s_recon->add_option("--checkpoint", recon.checkpoint, "trained checkpoint")->required();
    s_recon->add_option("--set", recon.set, "dataset split")->check(CLI::IsMember({"train", "test"}))->capture_default_str();
    s_recon->add_option("--first", recon.first, "observations in the panel")->capture_default_str();

    GridArgs gen;
    auto* s_gen = app.add_subcommand("generate", "perturbation grid around an observation's drift");
    add_common(s_gen, gen.common, false);
    s_gen->add_option("--checkpoint", gen.checkpoint, "trained checkpoint")->required();
    s_gen->add_option("--registry", gen.registry, "drift registry")->required();
    s_gen->add_option("--center", gen.center, "observation index at the grid centre")->required();
    s_gen->add_option("--span", gen.span, "largest offset along each axis")->capture_default_str();
    s_gen->add_option("--n", gen.n, "grid cells per axis (odd)")->capture_default_str();
    s_gen->add_option("--level", gen.level, "pyramid level the grid varies")->capture_default_str();
    s_gen->add_option("--class", gen.cls, "class override (default: the observation's label)");

    InterpolateArgs interp;
    auto* s_interp = app.add_subcommand("interpolate", "linear latent path between two observations");
    add_common(s_interp, interp.common, false);
    s_interp->add_option("--checkpoint", interp.checkpoint, "trained checkpoint")->required();
    s_interp->add_option("--registry", interp.registry, "drift registry")->required();
    s_interp->add_option("--from", interp.from, "first observation index")->required();
    s_interp->add_option("--to", interp.to, "last observation index")->required();
    s_interp->add_option("--steps", interp.steps, "images on the path, endpoints included")->capture_default_str();

    GridArgs base;
    auto* s_base = app.add_subcommand("baseline", "grid around the zero drift");
    add_common(s_base, base.common, false);
    s_base->add_option("--checkpoint", base.checkpoint, "trained checkpoint")->required();
    s_base->add_option("--class", base.cls, "decoder class (default 7)");
    s_base->add_option("--span", base.span, "largest offset along each axis")->capture_default_str();
    s_base->add_option("--n", base.n, "grid cells per axis (odd)")->capture_default_str();
    s_base->add_option("--level", base.level, "pyramid level the grid varies")->capture_default_str();

    std::vector<const char*> argv{"ace"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "ace: " << e.what() << "\n";
        return kUsage;
    }

    try {
        std::string summary;
        if (s_train->parsed()) summary = cmd_train(train, err);
        else if (s_extract->parsed()) summary = cmd_extract(extract);
        else if (s_recon->parsed()) summary = cmd_reconstruct(recon);
        else if (s_gen->parsed()) summary = cmd_generate(gen);
        else if (s_interp->parsed()) summary = cmd_interpolate(interp);
        else summary = cmd_baseline(base);
        out << summary << "\n";
        return kSuccess;
    } catch (const UsageError& e) {
        err << "ace: " << e.what() << "\n";
        return kUsage;
    } catch (const NumericError& e) {
        err << "ace: numeric failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        err << "ace: " << e.what() << "\n";
        return kBadInput;
    }
}

}  // namespace ace::cli
