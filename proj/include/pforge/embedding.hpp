#pragma once

// Embedding providers and vector similarity.
//
// cosine_similarity takes one square root over the product of squared
// norms, so integer vectors whose squared-norm product is a perfect
// square give exact results (e.g. (1,2,0)x(0,1,2) -> exactly 0.4), and
// identical nonzero vectors short-circuit to exactly 1.0.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "pforge/hash.hpp"
#include "pforge/text.hpp"

namespace pforge {

inline double cosine_similarity(const std::vector<double>& a,
                                const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("embedding dimensions differ");
    }
    if (a == b) {
        for (double v : a) {
            if (v != 0.0) return 1.0;
        }
        return 0.0;
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

class Embedder {
  public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(const std::string& text) = 0;
    virtual std::vector<std::vector<double>> embed_many(
        const std::vector<std::string>& texts) {
        std::vector<std::vector<double>> out;
        out.reserve(texts.size());
        for (const auto& text : texts) out.push_back(embed(text));
        return out;
    }
};

// Deterministic stand-in for a sentence-embedding service: each token
// hashes to a seeded pseudo-random direction and the text embeds to the
// normalized sum of its token directions, so texts sharing tokens land
// closer together. Empty text embeds to the zero vector.
class HashEmbedder : public Embedder {
  public:
    explicit HashEmbedder(size_t dim = 64, uint64_t seed = 0)
        : dim_(dim), seed_(seed) {}

    std::vector<double> embed(const std::string& text) override {
        std::vector<double> sum(dim_, 0.0);
        for (const auto& token : tokenize(text)) {
            std::mt19937_64 rng(seed_ ^ fnv1a64(token));
            for (double& component : sum) {
                // uniform in [-1, 1)
                component += static_cast<double>(rng() >> 11) * 0x1p-52 - 1.0;
            }
        }
        double norm_sq = 0.0;
        for (double component : sum) norm_sq += component * component;
        if (norm_sq == 0.0) return sum;
        const double norm = std::sqrt(norm_sq);
        for (double& component : sum) component /= norm;
        return sum;
    }

  private:
    size_t dim_;
    uint64_t seed_;
};

// Fixed-table embedder for tests and controlled similarity corpora.
// Unknown text is a scripting mistake and throws.
class TableEmbedder : public Embedder {
  public:
    explicit TableEmbedder(std::map<std::string, std::vector<double>> table)
        : table_(std::move(table)) {}

    std::vector<double> embed(const std::string& text) override {
        auto it = table_.find(text);
        if (it == table_.end()) {
            throw std::out_of_range("no embedding scripted for: " + text);
        }
        return it->second;
    }

  private:
    std::map<std::string, std::vector<double>> table_;
};

}  // namespace pforge
