// Acceptance harness: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ace/generator.hpp"
#include "ace/grad_check.hpp"
#include "ace/laplace.hpp"
#include "ace/pyramid.hpp"
#include "ace/rng.hpp"
#include "ace/trainer.hpp"
#include "cli.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using namespace ace;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::ofstream g_report;
int g_failures = 0;

void report(int id, const std::string& title, const Outcome& o) {
    std::ostringstream line;
    line << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << title << ": " << o.detail;
    std::cout << line.str() << std::endl;
    g_report << line.str() << "\n";
    g_report.flush();
    if (!o.pass) ++g_failures;
}

void run_criterion(int id, const std::string& title, const std::function<Outcome()>& fn) {
    try {
        report(id, title, fn());
    } catch (const std::exception& e) {
        report(id, title, {false, std::string("exception: ") + e.what()});
    }
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines_of(const fs::path& p) {
    std::ifstream f(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(f, l);) out.push_back(l);
    return out;
}

int ace_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int rc = cli::run(args, out, err);
    if (rc != 0) throw std::runtime_error("ace " + args.front() + " exited " + std::to_string(rc) + ": " + err.str());
    return rc;
}

bool bit_identical_rows(const Tensor& a, std::size_t row, const Tensor& b) {
    const std::size_t w = b.size();
    for (std::size_t i = 0; i < w; ++i) {
        if (std::bit_cast<std::uint64_t>(a.values()[row * w + i]) != std::bit_cast<std::uint64_t>(b.values()[i])) {
            return false;
        }
    }
    return true;
}

double image_mse(const Tensor& img, std::span<const double> x) {
    double acc = 0.0;
    for (std::size_t p = 0; p < x.size(); ++p) {
        const double d = img.values()[p] - x[p];
        acc += d * d;
    }
    return acc / static_cast<double>(x.size());
}

// Every file below `dir`, relative path -> bytes.
std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
    }
    return out;
}

// ---------------------------------------------------------------------------

Outcome kl_consistency(const fs::path& work) {
    const auto t0 = Clock::now();
    const std::vector<double> mus{-20, -5, -1, 0, 1, 5, 20};
    const std::vector<double> sigmas{0.1, 0.5, 1, 2, 10};
    const auto rows = laplace::discrepancy_report(mus, sigmas, 1e-9);
    const double elapsed = seconds_since(t0);
    double worst_equal = 0.0, worst_unequal = 0.0;
    std::ofstream csv(work / "kl_discrepancy.csv");
    csv << "mu1,sigma1,mu2,sigma2,closed_form,quadrature,difference\n";
    csv.precision(17);
    for (const auto& r : rows) {
        csv << r.posterior.mu << "," << r.posterior.sigma << "," << r.target.mu << "," << r.target.sigma << ","
            << r.closed_form << "," << r.quadrature << "," << r.difference() << "\n";
        const double d = std::abs(r.difference());
        if (r.posterior.sigma == r.target.sigma) worst_equal = std::max(worst_equal, d);
        else worst_unequal = std::max(worst_unequal, d);
    }
    const bool pass = rows.size() == 1225 && worst_equal <= 1e-6 && elapsed < 10.0;
    return {pass, "max |closed - quadrature| at equal scales " + fmt("%.3g", worst_equal) + " (tol 1e-6) over " +
                      std::to_string(rows.size()) + " rows; unequal-scale max " + fmt("%.4g", worst_unequal) +
                      " written to kl_discrepancy.csv; " + fmt("%.2f", elapsed) + " s (limit 10 s)"};
}

Outcome gradient_fidelity() {
    const auto t0 = Clock::now();
    const auto& train = testing::synthetic_train();
    // Four observations of one class, 4x4 block-averaged to 8x8.
    const std::size_t cls = train.labels[0];
    std::vector<double> pixels;
    std::size_t taken = 0;
    for (std::size_t i = 0; i < train.size() && taken < 4; ++i) {
        if (train.labels[i] != cls) continue;
        auto img = train.image(i);
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < 8; ++y)
                for (std::size_t x = 0; x < 8; ++x) {
                    double acc = 0;
                    for (std::size_t i2 = 0; i2 < 4; ++i2)
                        for (std::size_t j = 0; j < 4; ++j) acc += img[(c * 32 + 4 * y + i2) * 32 + 4 * x + j];
                    pixels.push_back(acc / 16.0);
                }
        ++taken;
    }
    const Tensor images({4, 3, 8, 8}, pixels);
    ModelConfig mc;
    mc.image_side = 8;
    mc.classifier_channels = {8, 8, 16};
    mc.init_seed = 5;
    AceModel model(mc);
    const auto mb = make_minibatch(images);
    LatentNoise noise;
    LatentTargets targets;
    for (std::size_t l = 0; l < 2; ++l) {
        for (std::uint32_t i = 0; i < 4 * kLatentDim; ++i) {
            noise.u[l].push_back(counter_uniform(5, 0, i, static_cast<std::uint32_t>(l), 0));
            targets.mu[l].push_back(counter_uniform(5, 1, i, static_cast<std::uint32_t>(l), 0) - 0.5);
            targets.sigma[l].push_back(0.5 + counter_uniform(5, 2, i, static_cast<std::uint32_t>(l), 0));
        }
    }
    auto objective = [&] {
        const Tensor w = classifier_weights(model, images, std::nullopt, Mode::train);
        const auto loss = vae_loss(model, mb, cls, targets, noise, Mode::train);
        return weighted_minibatch_loss(loss, w).objective;
    };
    const auto rep = grad_check(objective, model.parameters());
    const double elapsed = seconds_since(t0);
    const bool pass = rep.max_rel_error <= 1e-4 && rep.passed() && elapsed < 120.0;
    return {pass, "max relative error " + fmt("%.3g", rep.max_rel_error) + " (tol 1e-4) over " +
                      std::to_string(rep.checked) + " parameters, " + std::to_string(rep.kinks) +
                      " kinks judged by subgradient, worst " + rep.worst.name + "; " + fmt("%.1f", elapsed) +
                      " s (limit 120 s)"};
}

Outcome pyramid_exactness() {
    CounterRng rng(31, 0);
    double worst = 0.0;
    for (int batch = 0; batch < 10; ++batch) {
        std::vector<double> v(100 * 3 * 32 * 32);
        for (double& x : v) x = rng.uniform();
        const Tensor x({100, 3, 32, 32}, v);
        const Tensor r = pyramid::reconstruct(pyramid::decompose(x));
        for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(r.values()[i] - v[i]));
    }
    std::size_t nonzero = 0;
    for (int k = 0; k < 100; ++k) {
        std::vector<double> v(3 * 32 * 32);
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < 16; ++y)
                for (std::size_t x = 0; x < 16; ++x) {
                    const double val = rng.uniform();
                    for (std::size_t i = 0; i < 2; ++i)
                        for (std::size_t j = 0; j < 2; ++j) v[(c * 32 + 2 * y + i) * 32 + 2 * x + j] = val;
                }
        const auto d = pyramid::decompose_image(Tensor({3, 32, 32}, v));
        for (double r : d.residual.values()) nonzero += r != 0.0;
    }
    return {worst <= 1e-12 && nonzero == 0, "1000 random images, max abs round-trip error " + fmt("%.3g", worst) +
                                                " (tol 1e-12); 100 blockwise-constant images, " +
                                                std::to_string(nonzero) + " nonzero residual values"};
}

// Dominant selections over one pass of `n` observations with random logits.
std::size_t count_dominants(std::size_t n, std::size_t batch, const std::vector<std::size_t>& hardcoded,
                            std::uint64_t seed, bool& hard_ok) {
    TrainConfig cfg;
    cfg.batch_size = batch;
    cfg.hardcoded = hardcoded;
    cfg.validate(n);
    CounterRng rng(seed, 0);
    std::set<std::size_t> dominant;
    std::vector<std::size_t> per_batch(n / batch, 0);
    for (std::size_t t = 0; t < n / batch; ++t) {
        std::vector<double> logits(batch);
        for (double& x : logits) x = 8.0 * rng.normal();
        const auto hard = cfg.hardcoded_in(t);
        const auto w = observation_weights(Tensor({batch}, logits), hard);
        const std::size_t d = t * batch + dominant_index(w.values(), hard);
        if (hard && d != t * batch + *hard) hard_ok = false;
        dominant.insert(d);
        ++per_batch[d / batch];
    }
    for (std::size_t c : per_batch) {
        if (c != 1) hard_ok = false;
    }
    return dominant.size();
}

Outcome weight_protocol() {
    CounterRng rng(41, 0);
    std::size_t bad_sum = 0, bad_ratio = 0, bad_override = 0;
    double worst_sum = 0.0, worst_ratio = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t b = 2 + static_cast<std::size_t>(rng.uniform() * 999);
        const double spread = std::pow(10.0, rng.uniform(-2, 2.5));
        std::vector<double> logits(b);
        for (double& x : logits) x = spread * rng.normal();
        std::optional<std::size_t> hard;
        if (trial % 2) hard = static_cast<std::size_t>(rng.uniform() * static_cast<double>(b));
        const auto w = observation_weights(Tensor({b}, logits), hard);
        double total = 0.0, lo = 1e300, hi = 0.0;
        for (double v : w.values()) {
            total += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double sum_err = std::abs(total - static_cast<double>(b)) / static_cast<double>(b);
        worst_sum = std::max(worst_sum, sum_err);
        worst_ratio = std::max(worst_ratio, hi / lo);
        bad_sum += sum_err > 1e-6;
        bad_ratio += hi / lo > 1e6;
        if (hard && w.values()[*hard] != hi) ++bad_override;
    }
    bool full_ok = true, desk_ok = true;
    const std::size_t full = count_dominants(50000, 1000, {8, 1020, 2016}, 42, full_ok);
    const std::size_t desk = count_dominants(1000, 100, {8, 120, 216}, 43, desk_ok);
    const bool pass = bad_sum == 0 && bad_ratio == 0 && bad_override == 0 && full == 50 && desk == 10 &&
                      full_ok && desk_ok;
    return {pass, "1000 draws: max |sum W - B|/B " + fmt("%.2g", worst_sum) + ", max ratio " +
                      fmt("%.6g", worst_ratio) + ", override misses " + std::to_string(bad_override) +
                      "; dominant weights per epoch 50000/1000 -> " + std::to_string(full) + ", 1000/100 -> " +
                      std::to_string(desk)};
}

// ---------------------------------------------------------------------------

struct DeskState {
    fs::path run1, run2, config;
    dataio::Dataset train;
    std::vector<std::size_t> dominant;
    std::vector<double> run1_mse;
    double run1_seconds = 0.0;
    bool run1_ok = false;
};

void write_desk_config(const fs::path& path, const fs::path& data) {
    std::ofstream(path) << "data = " << data.string() << "\n"
                        << "train_subset = 1000\n"
                        << "test_subset = 1000\n"
                        << "batch_size = 100\n"
                        << "epochs = 30\n"
                        << "seed = 7\n"
                        << "hardcoded = 8,120,216\n";
}

std::vector<std::size_t> last_dominants(const fs::path& metrics) {
    const auto lines = lines_of(metrics);
    const std::string last = lines.back();
    std::vector<std::size_t> out;
    std::stringstream ss(last.substr(last.rfind(',') + 1));
    for (std::string item; std::getline(ss, item, ';');) out.push_back(std::stoul(item));
    return out;
}

Outcome selective_reconstruction(DeskState& s) {
    const auto t0 = Clock::now();
    ace_cli({"train", "--run", "1", "--config", s.config.string(), "--out", s.run1.string()});
    s.run1_seconds = seconds_since(t0);
    AceModel model = model_from_checkpoint(read_checkpoint(s.run1 / "checkpoint.ace"));
    s.run1_mse = reconstruction_report(model, s.train);
    s.dominant = last_dominants(s.run1 / "metrics.csv");
    std::size_t below = 0;
    std::ostringstream per;
    for (std::size_t t = 0; t < s.dominant.size(); ++t) {
        std::vector<double> batch(s.run1_mse.begin() + static_cast<std::ptrdiff_t>(t * 100),
                                  s.run1_mse.begin() + static_cast<std::ptrdiff_t>((t + 1) * 100));
        const double med = median(batch);
        below += s.run1_mse[s.dominant[t]] < med;
        per << (t ? " " : "") << s.dominant[t] << ":" << fmt("%.3f", s.run1_mse[s.dominant[t]]) << "/"
            << fmt("%.3f", med);
    }
    s.run1_ok = true;
    const bool pass = s.dominant.size() == 10 && below >= 9 && s.run1_seconds < 1800.0;
    return {pass, std::to_string(below) + "/10 minibatches with dominant MSE below the minibatch median (need 9); "
                  "dominant:mse/median " + per.str() + "; run 1 took " + fmt("%.0f", s.run1_seconds) +
                  " s (limit 1800 s)"};
}

Outcome drift_protocol(DeskState& s) {
    if (!s.run1_ok) return {false, "run 1 unavailable"};
    ace_cli({"train", "--run", "2", "--config", s.config.string(), "--checkpoint",
             (s.run1 / "checkpoint.ace").string(), "--registry", (s.run1 / "registry.csv").string(), "--out",
             s.run2.string()});
    const auto lines = lines_of(s.run2 / "epoch0_generative_error.csv");
    std::size_t nonzero = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        nonzero += std::strtod(lines[i].c_str() + lines[i].find(',') + 1, nullptr) != 0.0;
    }
    AceModel model = model_from_checkpoint(read_checkpoint(s.run2 / "checkpoint.ace"));
    const DriftRegistry reg2 = DriftRegistry::read(s.run2 / "registry.csv");
    const DriftRegistry reg1 = DriftRegistry::read(s.run1 / "registry.csv");
    bool within = true;
    std::ostringstream per;
    for (std::size_t h : {8u, 120u, 216u}) {
        const double after = image_mse(decode_at(model, reg2.at(h), s.train.labels[h]), s.train.image(h));
        const double at_targets = image_mse(decode_at(model, reg1.at(h), s.train.labels[h]), s.train.image(h));
        within = within && after <= 1.1 * s.run1_mse[h];
        per << " " << h << ": " << fmt("%.4f", after) << " vs " << fmt("%.4f", s.run1_mse[h]) << " (ratio "
            << fmt("%.3f", after / s.run1_mse[h]) << "; at run-1 drifts " << fmt("%.4f", at_targets) << ")";
    }
    const bool pass = lines.size() == 1001 && nonzero == 0 && within;
    return {pass, "epoch-0 generative error nonzero for " + std::to_string(nonzero) + " of " +
                      std::to_string(lines.size() - 1) + " observations; run-2 decode_at MSE vs run-1 (limit 1.1x):" +
                      per.str()};
}

Outcome generation_geometry(DeskState& s, const fs::path& work) {
    if (!s.run1_ok) return {false, "run 1 unavailable"};
    const fs::path gen = work / "generate";
    const std::string ck = (s.run1 / "checkpoint.ace").string(), reg = (s.run1 / "registry.csv").string();
    ace_cli({"generate", "--checkpoint", ck, "--registry", reg, "--center", "8", "--config", s.config.string(),
             "--out", gen.string()});
    std::size_t cells = 0;
    for (const auto& e : fs::directory_iterator(gen / "center8_run1")) cells += e.path().extension() == ".png";

    AceModel model = model_from_checkpoint(read_checkpoint(s.run1 / "checkpoint.ace"));
    const DriftRegistry registry = DriftRegistry::read(s.run1 / "registry.csv");
    const std::size_t cls = s.train.labels[8];
    GridSpec spec;
    spec.center_index = 8;
    const Tensor center = decode_at(model, registry.at(8), cls);
    const bool grid_center = bit_identical_rows(perturbation_grid(model, spec, registry.at(8), cls), 112, center);
    const fs::path probe = work / "decode_at_8.png";
    dataio::write_png(probe, dataio::to_rgb(center.values(), 32));
    const bool png_center = slurp(probe) == slurp(gen / "center8_run1" / "cell_07_07.png");

    std::size_t other = 9;
    while (s.train.labels[other] != cls) ++other;
    const fs::path interp = work / "interpolate";
    ace_cli({"interpolate", "--checkpoint", ck, "--registry", reg, "--from", "8", "--to", std::to_string(other),
             "--steps", "11", "--config", s.config.string(), "--out", interp.string()});
    const Tensor path = interpolate(model, registry.at(8), cls, registry.at(other), cls, 11);
    const Tensor end = decode_at(model, registry.at(other), cls);
    const bool ends = bit_identical_rows(path, 0, center) && bit_identical_rows(path, 10, end);
    const std::string stem = "interpolate_8_" + std::to_string(other);
    const fs::path probe_end = work / "decode_at_other.png";
    dataio::write_png(probe_end, dataio::to_rgb(end.values(), 32));
    const bool png_ends = slurp(interp / stem / "step_00.png") == slurp(probe) &&
                          slurp(interp / stem / "step_10.png") == slurp(probe_end);
    const bool pass = cells == 225 && grid_center && png_center && ends && png_ends;
    return {pass, std::to_string(cells) + " grid images; centre cell bit-identical to decode_at: " +
                      (grid_center && png_center ? "yes" : "no") + "; interpolate 8 -> " + std::to_string(other) +
                      " with 11 steps, endpoints bit-identical: " + (ends && png_ends ? "yes" : "no")};
}

Outcome test_non_prediction(DeskState& s) {
    if (!s.run1_ok) return {false, "run 1 unavailable"};
    AceModel model = model_from_checkpoint(read_checkpoint(s.run1 / "checkpoint.ace"));
    const auto test = dataio::subset(testing::synthetic_test(), 1000);
    const double test_median = median(reconstruction_report(model, test));
    std::vector<double> dom;
    for (std::size_t d : s.dominant) dom.push_back(s.run1_mse[d]);
    const double dom_median = median(dom);
    const double factor = test_median / dom_median;
    return {factor >= 2.0, "test median MSE " + fmt("%.4f", test_median) + " / dominant median " +
                               fmt("%.4f", dom_median) + " = " + fmt("%.2f", factor) + " (need >= 2)"};
}

Outcome determinism(DeskState& s, const fs::path& work) {
    if (!s.run1_ok) return {false, "run 1 unavailable"};
    const fs::path cfg = work / "small.conf";
    std::ofstream(cfg) << "data = " << testing::synthetic_data_dir().string() << "\n"
                       << "train_subset = 200\nbatch_size = 50\nepochs = 2\nseed = 11\nhardcoded = 8\n"
                       << "classifier_channels = 16,16,32\n";
    const std::string ck = (s.run1 / "checkpoint.ace").string(), reg = (s.run1 / "registry.csv").string();
    const std::string conf = s.config.string();
    const std::vector<std::pair<std::string, std::vector<std::string>>> commands = {
        {"train", {"train", "--run", "1", "--config", cfg.string()}},
        {"extract-drifts", {"extract-drifts", "--checkpoint", ck, "--config", conf}},
        {"reconstruct", {"reconstruct", "--checkpoint", ck, "--config", conf, "--set", "test", "--first", "8"}},
        {"generate", {"generate", "--checkpoint", ck, "--registry", reg, "--center", "120", "--config", conf}},
        {"interpolate", {"interpolate", "--checkpoint", ck, "--registry", reg, "--from", "120", "--to", "216",
                         "--steps", "11", "--config", conf}},
        {"baseline", {"baseline", "--checkpoint", ck}},
    };
    std::size_t files = 0;
    std::vector<std::string> differing;
    for (const auto& [name, args] : commands) {
        std::map<std::string, std::string> outputs[2];
        for (int k = 0; k < 2; ++k) {
            const fs::path out = work / "determinism" / (name + "_" + std::to_string(k));
            fs::remove_all(out);
            auto a = args;
            a.push_back("--out");
            a.push_back(out.string());
            ace_cli(a);
            outputs[k] = tree(out);
        }
        files += outputs[0].size();
        if (outputs[0] != outputs[1]) differing.push_back(name);
    }
    std::string detail = std::to_string(commands.size()) + " subcommands run twice, " + std::to_string(files) +
                         " files compared byte for byte";
    for (const auto& d : differing) detail += "; differs: " + d;
    return {differing.empty() && files > 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
    fs::path work = fs::temp_directory_path() / "ace_acceptance";
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--work") work = argv[i + 1];
    }
    fs::remove_all(work);
    fs::create_directories(work);
    g_report.open(work / "acceptance_report.txt");

    const fs::path data = testing::synthetic_data_dir();
    DeskState desk;
    desk.run1 = work / "run1";
    desk.run2 = work / "run2";
    desk.config = work / "desk.conf";
    write_desk_config(desk.config, data);
    desk.train = dataio::subset(testing::synthetic_train(), 1000);

    run_criterion(1, "KL consistency", [&] { return kl_consistency(work); });
    run_criterion(2, "Gradient fidelity", gradient_fidelity);
    run_criterion(3, "Pyramid exactness", pyramid_exactness);
    run_criterion(4, "Weight protocol", weight_protocol);
    run_criterion(5, "Desk-scale selective reconstruction", [&] { return selective_reconstruction(desk); });
    run_criterion(6, "Two-run drift protocol", [&] { return drift_protocol(desk); });
    run_criterion(7, "Generation geometry", [&] { return generation_geometry(desk, work); });
    run_criterion(8, "Test-set non-prediction", [&] { return test_non_prediction(desk); });
    run_criterion(9, "Determinism", [&] { return determinism(desk, work); });

    std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed")
              << std::endl;
    return g_failures == 0 ? 0 : 1;
}
