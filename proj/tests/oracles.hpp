#pragma once

// Brute-force reference implementations of every text metric, written
// against the documented contracts only. They deliberately use different
// algorithms and containers than the library (recursive memoized LCS,
// map-of-token-vector n-gram keys, product-form BLEU) so a bug in either
// side shows up as disagreement.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pforge/text.hpp"

namespace oracle {

using Tokens = std::vector<std::string>;

inline std::map<Tokens, int> ngrams(const Tokens& tokens, int n) {
    std::map<Tokens, int> out;
    if (n <= 0) return out;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
        out[Tokens(tokens.begin() + i, tokens.begin() + i + n)] += 1;
    }
    return out;
}

inline long long clipped_overlap(const std::map<Tokens, int>& cand,
                                 const std::map<Tokens, int>& ref) {
    long long total = 0;
    for (const auto& [gram, count] : cand) {
        auto it = ref.find(gram);
        if (it != ref.end()) total += std::min(count, it->second);
    }
    return total;
}

// BLEU-4 in product form: BP * (p1*p2*p3*p4)^(1/4). Smoothing contract:
// for n >= 2 a zero clipped count becomes 1/(total+1); a candidate
// shorter than n tokens contributes p_n = 1.
inline double bleu(const Tokens& cand, const Tokens& ref) {
    if (cand.empty() || ref.empty()) return 0.0;
    double product = 1.0;
    for (int n = 1; n <= 4; ++n) {
        const auto cgrams = ngrams(cand, n);
        const auto rgrams = ngrams(ref, n);
        long long total = 0;
        for (const auto& [gram, count] : cgrams) total += count;
        const long long clipped = clipped_overlap(cgrams, rgrams);
        double p;
        if (n == 1) {
            if (clipped == 0) return 0.0;
            p = static_cast<double>(clipped) / static_cast<double>(total);
        } else if (clipped == 0) {
            p = 1.0 / static_cast<double>(total + 1);
        } else {
            p = static_cast<double>(clipped) / static_cast<double>(total);
        }
        product *= p;
    }
    const double c = static_cast<double>(cand.size());
    const double r = static_cast<double>(ref.size());
    const double bp = cand.size() >= ref.size() ? 1.0 : std::exp(1.0 - r / c);
    return bp * std::pow(product, 0.25);
}

inline double f1(double p, double r) {
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

inline double rouge_n(const Tokens& cand, const Tokens& ref, int n) {
    const auto cgrams = ngrams(cand, n);
    const auto rgrams = ngrams(ref, n);
    long long cand_total = 0;
    long long ref_total = 0;
    for (const auto& [gram, count] : cgrams) cand_total += count;
    for (const auto& [gram, count] : rgrams) ref_total += count;
    if (cand_total == 0 || ref_total == 0) return 0.0;
    const long long m = clipped_overlap(cgrams, rgrams);
    return f1(static_cast<double>(m) / static_cast<double>(cand_total),
              static_cast<double>(m) / static_cast<double>(ref_total));
}

// Recursive memoized LCS (the library uses an iterative table).
inline size_t lcs_rec(const Tokens& a, const Tokens& b, size_t i, size_t j,
                      std::map<std::pair<size_t, size_t>, size_t>& memo) {
    if (i == a.size() || j == b.size()) return 0;
    const auto key = std::make_pair(i, j);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    size_t best;
    if (a[i] == b[j]) {
        best = 1 + lcs_rec(a, b, i + 1, j + 1, memo);
    } else {
        best = std::max(lcs_rec(a, b, i + 1, j, memo),
                        lcs_rec(a, b, i, j + 1, memo));
    }
    memo[key] = best;
    return best;
}

inline double rouge_l(const Tokens& cand, const Tokens& ref) {
    if (cand.empty() || ref.empty()) return 0.0;
    std::map<std::pair<size_t, size_t>, size_t> memo;
    const double l = static_cast<double>(lcs_rec(cand, ref, 0, 0, memo));
    return f1(l / static_cast<double>(cand.size()),
              l / static_cast<double>(ref.size()));
}

// Two-stage greedy in-order alignment: pass 1 exact token equality,
// pass 2 stem equality over what is left. Each candidate token scans the
// reference left to right and takes the first free slot. Chunks are
// maximal runs adjacent in BOTH sequences.
inline double meteor(const Tokens& cand, const Tokens& ref) {
    if (cand.empty() || ref.empty()) return 0.0;
    std::vector<std::pair<size_t, size_t>> pairs;  // (cand index, ref index)
    std::vector<bool> cand_done(cand.size(), false);
    std::vector<bool> ref_done(ref.size(), false);
    for (int pass = 0; pass < 2; ++pass) {
        for (size_t i = 0; i < cand.size(); ++i) {
            if (cand_done[i]) continue;
            for (size_t j = 0; j < ref.size(); ++j) {
                if (ref_done[j]) continue;
                const bool hit = pass == 0
                                     ? cand[i] == ref[j]
                                     : pforge::stem(cand[i]) == pforge::stem(ref[j]);
                if (hit) {
                    pairs.emplace_back(i, j);
                    cand_done[i] = true;
                    ref_done[j] = true;
                    break;
                }
            }
        }
    }
    if (pairs.empty()) return 0.0;
    std::sort(pairs.begin(), pairs.end());
    long long chunks = 1;
    for (size_t k = 1; k < pairs.size(); ++k) {
        const bool adjacent = pairs[k].first == pairs[k - 1].first + 1 &&
                              pairs[k].second == pairs[k - 1].second + 1;
        if (!adjacent) ++chunks;
    }
    const long long m = static_cast<long long>(pairs.size());
    const double precision = static_cast<double>(m) / static_cast<double>(cand.size());
    const double recall = static_cast<double>(m) / static_cast<double>(ref.size());
    const double alpha = 0.9;
    const double fmean =
        precision * recall / (alpha * precision + (1.0 - alpha) * recall);
    const double frag = static_cast<double>(chunks) / static_cast<double>(m);
    const double penalty = 0.5 * std::pow(frag, 3.0);
    return fmean * (1.0 - penalty);
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Exhaustive greedy-matching score: every pairwise cosine computed up
// front, row maxima give precision, column maxima give recall.
inline double bert_f1(const std::vector<std::vector<double>>& cand_vecs,
                      const std::vector<std::vector<double>>& ref_vecs) {
    if (cand_vecs.empty() || ref_vecs.empty()) return 0.0;
    std::vector<std::vector<double>> sim(cand_vecs.size(),
                                         std::vector<double>(ref_vecs.size()));
    for (size_t i = 0; i < cand_vecs.size(); ++i) {
        for (size_t j = 0; j < ref_vecs.size(); ++j) {
            sim[i][j] = cand_vecs[i] == ref_vecs[j]
                            ? 1.0
                            : cosine(cand_vecs[i], ref_vecs[j]);
        }
    }
    double p = 0.0;
    for (size_t i = 0; i < cand_vecs.size(); ++i) {
        double best = sim[i][0];
        for (size_t j = 1; j < ref_vecs.size(); ++j) best = std::max(best, sim[i][j]);
        p += best;
    }
    p /= static_cast<double>(cand_vecs.size());
    double r = 0.0;
    for (size_t j = 0; j < ref_vecs.size(); ++j) {
        double best = sim[0][j];
        for (size_t i = 1; i < cand_vecs.size(); ++i) best = std::max(best, sim[i][j]);
        r += best;
    }
    r /= static_cast<double>(ref_vecs.size());
    p = std::min(std::max(p, 0.0), 1.0);
    r = std::min(std::max(r, 0.0), 1.0);
    return f1(p, r);
}

// Shared hand-constructed sentence pairs exercising identity, disjoint
// inputs, clipping, reordering, stem matches, brevity, multibyte tokens,
// and punctuation-only differences.
inline std::vector<std::pair<std::string, std::string>> metric_pairs() {
    return {
        {"the cat sat on the mat", "the cat sat on the mat"},
        {"the cat sat", "the cat sat down"},
        {"a b c", "a b d"},
        {"a b c d", "a c b d"},
        {"completely different words here", "nothing shared at all"},
        {"the the the the", "the the"},
        {"big red ball", "red big ball"},
        {"I love coffee in the morning", "i LOVE coffee at night"},
        {"she was walking quickly", "she walks quick"},
        {"they played games", "they play games"},
        {"one", "one"},
        {"one", "two"},
        {"a", "a b c d e"},
        {"a b c d e", "a"},
        {"caf\xc3\xa9 au lait", "caf\xc3\xa9 au lait"},
        {"caf\xc3\xa9 noir", "cafe noir"},
        {"the quick brown fox jumps over the lazy dog",
         "the quick brown dog jumps over the lazy fox"},
        {"to be or not to be", "to be or to be or not"},
        {"hello, world!", "hello world"},
        {"numbers 1 2 3 count", "numbers 3 2 1 count"},
        {"repeat repeat repeat something", "repeat something repeat"},
        {"greetings friend", "greetings my friend"},
        {"x y z w v u", "x y z w v u t s"},
        {"alpha beta gamma delta", "alpha gamma beta delta"},
        {"running dogs ran", "runs dog run"},
        {"this is a much longer sentence used to exercise brevity penalties "
         "and chunk counting across the implementations",
         "a much longer sentence to exercise penalties and counting across "
         "implementations"},
        {"w w w w w w w w w w", "w w w w w w w w w w"},
        {"mixed CASE Tokens", "MIXED case tokens"},
    };
}

}  // namespace oracle
