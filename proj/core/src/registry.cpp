#include "ace/registry.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "ace/errors.hpp"

namespace ace {

void DriftRegistry::set(std::size_t index, const ObservationDrift& drift) {
    for (const auto& level : drift) {
        for (const auto& p : level) {
            if (!std::isfinite(p.mu) || !std::isfinite(p.sigma) || p.sigma <= 0.0) {
                throw NumericError("observation " + std::to_string(index) + ": drift (" +
                                   std::to_string(p.mu) + ", " + std::to_string(p.sigma) +
                                   ") is not a finite location with positive scale");
            }
        }
    }
    rows_[index] = drift;
}

const ObservationDrift& DriftRegistry::at(std::size_t index) const {
    auto it = rows_.find(index);
    if (it == rows_.end()) throw InputError("registry has no rows for observation " + std::to_string(index));
    return it->second;
}

bool DriftRegistry::complete(std::size_t n) const {
    if (rows_.size() < n) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (!contains(i)) return false;
    }
    return true;
}

LatentTargets DriftRegistry::targets(std::size_t first, std::size_t count) const {
    LatentTargets t;
    for (std::size_t l = 0; l < 2; ++l) {
        t.mu[l].resize(count * kLatentDim);
        t.sigma[l].resize(count * kLatentDim);
    }
    for (std::size_t r = 0; r < count; ++r) {
        const auto& drift = at(first + r);
        for (std::size_t l = 0; l < 2; ++l) {
            for (std::size_t d = 0; d < kLatentDim; ++d) {
                t.mu[l][r * kLatentDim + d] = drift[l][d].mu;
                t.sigma[l][r * kLatentDim + d] = drift[l][d].sigma;
            }
        }
    }
    return t;
}

void DriftRegistry::write(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw InputError("cannot open " + path.string() + " for writing");
    f << "index,level,dim,mu,sigma\n";
    char buf[128];
    for (const auto& [index, drift] : rows_) {
        for (std::size_t l = 0; l < 2; ++l) {
            for (std::size_t d = 0; d < kLatentDim; ++d) {
                std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.17g,%.17g\n", index, l + 1, d,
                              drift[l][d].mu, drift[l][d].sigma);
                f << buf;
            }
        }
    }
    if (!f) throw InputError("failed writing " + path.string());
}

DriftRegistry DriftRegistry::read(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open registry " + path.string());
    std::string line;
    if (!std::getline(f, line) || line != "index,level,dim,mu,sigma") {
        throw InputError(path.string() + ": missing header index,level,dim,mu,sigma");
    }
    std::map<std::size_t, std::pair<ObservationDrift, unsigned>> partial;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto where = path.string() + ":" + std::to_string(lineno);
        std::size_t index = 0, level = 0, dim = 0;
        double mu = 0.0, sigma = 0.0;
        char tail = 0;
        if (std::sscanf(line.c_str(), "%zu,%zu,%zu,%lf,%lf%c", &index, &level, &dim, &mu, &sigma, &tail) != 5) {
            throw InputError(where + ": malformed row '" + line + "'");
        }
        if (level < 1 || level > 2 || dim >= kLatentDim) {
            throw InputError(where + ": level must be 1 or 2 and dim 0 or 1");
        }
        if (!std::isfinite(mu) || !std::isfinite(sigma) || sigma <= 0.0) {
            throw InputError(where + ": sigma must be positive and values finite");
        }
        auto& [drift, seen] = partial[index];
        const unsigned bit = 1u << ((level - 1) * kLatentDim + dim);
        if (seen & bit) throw InputError(where + ": duplicate row");
        seen |= bit;
        drift[level - 1][dim] = {mu, sigma};
    }
    DriftRegistry out;
    for (const auto& [index, entry] : partial) {
        if (entry.second != 0xF) {
            throw InputError(path.string() + ": observation " + std::to_string(index) + " lacks some rows");
        }
        out.rows_[index] = entry.first;
    }
    return out;
}

bool DriftRegistry::operator==(const DriftRegistry& other) const {
    if (rows_.size() != other.rows_.size()) return false;
    for (auto a = rows_.begin(), b = other.rows_.begin(); a != rows_.end(); ++a, ++b) {
        if (a->first != b->first) return false;
        for (std::size_t l = 0; l < 2; ++l) {
            for (std::size_t d = 0; d < kLatentDim; ++d) {
                if (a->second[l][d].mu != b->second[l][d].mu || a->second[l][d].sigma != b->second[l][d].sigma) {
                    return false;
                }
            }
        }
    }
    return true;
}

}  // namespace ace
