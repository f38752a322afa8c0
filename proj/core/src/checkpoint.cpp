#include "ace/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ace/errors.hpp"

namespace ace {

namespace {

constexpr char kMagic[4] = {'A', 'C', 'E', '1'};

template <class T>
void put(std::string& out, T v) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    const U bits = std::bit_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

void put_record(std::string& out, const TensorRecord& r) {
    put(out, static_cast<std::uint32_t>(r.name.size()));
    out += r.name;
    put(out, static_cast<std::uint32_t>(r.shape.size()));
    for (std::size_t e : r.shape) put(out, static_cast<std::uint64_t>(e));
    for (double v : r.values) put(out, v);
}

class Reader {
public:
    Reader(const std::string& data, std::string origin) : data_(data), origin_(std::move(origin)) {}

    template <class T>
    T get() {
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
        need(sizeof(U));
        U bits = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) {
            bits |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(U);
        return std::bit_cast<T>(bits);
    }

    std::string bytes(std::size_t n) {
        need(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    TensorRecord record() {
        TensorRecord r;
        r.name = bytes(get<std::uint32_t>());
        const auto rank = get<std::uint32_t>();
        std::size_t count = 1;
        for (std::uint32_t i = 0; i < rank; ++i) {
            r.shape.push_back(static_cast<std::size_t>(get<std::uint64_t>()));
            count *= r.shape.back();
        }
        need(count * 8);
        r.values.resize(count);
        for (auto& v : r.values) v = get<double>();
        return r;
    }

    bool done() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw InputError(origin_ + ": truncated checkpoint");
    }

    const std::string& data_;
    std::string origin_;
    std::size_t pos_ = 0;
};

}  // namespace

const TensorRecord* Checkpoint::find(const std::string& name) const {
    for (const auto& r : tensors) {
        if (r.name == name) return &r;
    }
    for (const auto& r : optimizer) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

const TensorRecord& Checkpoint::at(const std::string& name) const {
    if (const auto* r = find(name)) return *r;
    throw InputError("checkpoint has no record named " + name);
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::string out(kMagic, 4);
    put(out, static_cast<std::uint64_t>(ckpt.tensors.size()));
    for (const auto& r : ckpt.tensors) put_record(out, r);
    put(out, static_cast<std::uint64_t>(ckpt.optimizer.size()));
    for (const auto& r : ckpt.optimizer) put_record(out, r);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot open " + path.string() + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw InputError("failed writing " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open checkpoint " + path.string());
    const std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    Reader in(data, path.string());
    if (in.bytes(4) != std::string(kMagic, 4)) throw InputError(path.string() + ": bad checkpoint magic");
    Checkpoint ckpt;
    const auto n_tensors = in.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < n_tensors; ++i) ckpt.tensors.push_back(in.record());
    const auto n_opt = in.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < n_opt; ++i) ckpt.optimizer.push_back(in.record());
    if (!in.done()) throw InputError(path.string() + ": trailing bytes after checkpoint");
    return ckpt;
}

std::vector<TensorRecord> parameter_records(const ParameterSet& params) {
    std::vector<TensorRecord> out;
    for (const auto& p : params) {
        auto v = p.tensor.values();
        out.push_back({p.name, p.tensor.shape(), std::vector<double>(v.begin(), v.end())});
    }
    return out;
}

void load_parameters(const std::vector<TensorRecord>& records, ParameterSet& params) {
    for (auto& p : params) {
        const TensorRecord* match = nullptr;
        for (const auto& r : records) {
            if (r.name == p.name) {
                match = &r;
                break;
            }
        }
        if (!match) throw InputError("checkpoint is missing parameter " + p.name);
        if (match->shape != p.tensor.shape()) {
            throw InputError("checkpoint parameter " + p.name + " has shape " +
                             shape_string(match->shape) + ", model expects " +
                             shape_string(p.tensor.shape()));
        }
        auto dst = p.tensor.mutable_values();
        std::copy(match->values.begin(), match->values.end(), dst.begin());
    }
}

std::vector<TensorRecord> adam_records(const AdamState& state, const ParameterSet& params) {
    const auto& c = state.config;
    std::vector<TensorRecord> out;
    out.push_back({"adam.step", {}, {static_cast<double>(state.step)}});
    out.push_back({"adam.config", {5}, {c.learning_rate, c.half_decay_epochs, c.beta1, c.beta2, c.epsilon}});
    if (state.m.empty()) return out;
    std::size_t i = 0;
    for (const auto& p : params) {
        out.push_back({"adam.m." + p.name, p.tensor.shape(), state.m[i]});
        out.push_back({"adam.v." + p.name, p.tensor.shape(), state.v[i]});
        ++i;
    }
    return out;
}

AdamState adam_from_records(const std::vector<TensorRecord>& records, const ParameterSet& params) {
    auto lookup = [&](const std::string& name) -> const TensorRecord* {
        for (const auto& r : records) {
            if (r.name == name) return &r;
        }
        return nullptr;
    };
    AdamState state;
    const auto* step = lookup("adam.step");
    const auto* cfg = lookup("adam.config");
    if (!step || !cfg || step->values.size() != 1 || cfg->values.size() != 5) {
        throw InputError("checkpoint has no valid optimizer state");
    }
    state.step = static_cast<std::uint64_t>(step->values[0]);
    state.config = {cfg->values[0], cfg->values[1], cfg->values[2], cfg->values[3], cfg->values[4]};
    if (!lookup("adam.m." + params[0].name)) return state;  // optimizer never stepped
    for (const auto& p : params) {
        const auto* m = lookup("adam.m." + p.name);
        const auto* v = lookup("adam.v." + p.name);
        if (!m || !v || m->values.size() != p.tensor.size() || v->values.size() != p.tensor.size()) {
            throw InputError("checkpoint optimizer state does not match parameter " + p.name);
        }
        state.m.push_back(m->values);
        state.v.push_back(v->values);
    }
    return state;
}

}  // namespace ace
