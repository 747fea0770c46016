#pragma once

// Scoring: multiple-choice outcome parsing, n-gram and alignment metrics,
// and embedding-based similarity. Every function here is pure. Degenerate
// inputs (empty texts, reference shorter than n) score 0 by contract
// rather than raising; misuse (empty record lists, missing outcomes,
// non-positive improvement base) throws std::invalid_argument.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pforge/core.hpp"
#include "pforge/embedding.hpp"
#include "pforge/text.hpp"

namespace pforge {

enum class ScoreScale { Unit, Percent };

struct ScoreReport {
    std::string metric;
    double value = 0.0;
    ScoreScale scale = ScoreScale::Unit;

    static ScoreReport unit(std::string name, double v) {
        if (v < -1e-12 || v > 1.0 + 1e-12) {
            throw std::invalid_argument("unit score out of range: " + name);
        }
        return {std::move(name), std::min(std::max(v, 0.0), 1.0),
                ScoreScale::Unit};
    }
    static ScoreReport percent_scale(std::string name, double v) {
        return {std::move(name), v, ScoreScale::Percent};
    }
    double percent() const {
        return scale == ScoreScale::Percent ? value : value * 100.0;
    }
};

namespace detail {

// n-grams keyed by joining tokens with the 0x1f unit separator; the
// default tokenizer never emits that byte.
inline std::unordered_map<std::string, int> ngram_counts(
    const std::vector<std::string>& tokens, int n) {
    std::unordered_map<std::string, int> counts;
    if (n <= 0 || tokens.size() < static_cast<size_t>(n)) return counts;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int k = 1; k < n; ++k) {
            key.push_back('\x1f');
            key += tokens[i + k];
        }
        counts[key] += 1;
    }
    return counts;
}

inline long long clipped_count(
    const std::unordered_map<std::string, int>& cand,
    const std::unordered_map<std::string, int>& ref) {
    long long clipped = 0;
    for (const auto& [gram, count] : cand) {
        auto it = ref.find(gram);
        if (it != ref.end()) clipped += std::min(count, it->second);
    }
    return clipped;
}

inline double f1(double p, double r) {
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

inline double clamp01(double v) { return std::min(std::max(v, 0.0), 1.0); }

}  // namespace detail

// BLEU-4: geometric mean of modified n-gram precisions (n = 1..4) times
// the brevity penalty min(1, e^{1-r/c}). Zero clipped counts for n >= 2
// smooth to 1/(total+1); a candidate shorter than n tokens contributes
// p_n = 1. Zero unigram overlap scores 0. Identical non-empty inputs
// score exactly 1.
inline double bleu(const std::vector<std::string>& cand,
                   const std::vector<std::string>& ref) {
    if (cand.empty() || ref.empty()) return 0.0;
    double log_sum = 0.0;
    for (int n = 1; n <= 4; ++n) {
        const auto cand_counts = detail::ngram_counts(cand, n);
        long long total = 0;
        for (const auto& [gram, count] : cand_counts) total += count;
        const long long clipped =
            detail::clipped_count(cand_counts, detail::ngram_counts(ref, n));
        double p;
        if (n == 1) {
            if (clipped == 0) return 0.0;
            p = static_cast<double>(clipped) / static_cast<double>(total);
        } else if (clipped == 0) {
            p = 1.0 / static_cast<double>(total + 1);
        } else {
            p = static_cast<double>(clipped) / static_cast<double>(total);
        }
        log_sum += 0.25 * std::log(p);
    }
    const double bp =
        cand.size() >= ref.size()
            ? 1.0
            : std::exp(1.0 - static_cast<double>(ref.size()) /
                                 static_cast<double>(cand.size()));
    return bp * std::exp(log_sum);
}

inline double bleu(std::string_view cand, std::string_view ref) {
    return bleu(tokenize(cand), tokenize(ref));
}

// F1 of clipped n-gram overlap.
inline double rouge_n(const std::vector<std::string>& cand,
                      const std::vector<std::string>& ref, int n) {
    const auto cand_counts = detail::ngram_counts(cand, n);
    const auto ref_counts = detail::ngram_counts(ref, n);
    long long cand_total = 0;
    long long ref_total = 0;
    for (const auto& [gram, count] : cand_counts) cand_total += count;
    for (const auto& [gram, count] : ref_counts) ref_total += count;
    if (cand_total == 0 || ref_total == 0) return 0.0;
    const long long m = detail::clipped_count(cand_counts, ref_counts);
    return detail::f1(static_cast<double>(m) / static_cast<double>(cand_total),
                      static_cast<double>(m) / static_cast<double>(ref_total));
}

inline double rouge_n(std::string_view cand, std::string_view ref, int n) {
    return rouge_n(tokenize(cand), tokenize(ref), n);
}

// F1 over the longest common subsequence of tokens.
inline double rouge_l(const std::vector<std::string>& cand,
                      const std::vector<std::string>& ref) {
    if (cand.empty() || ref.empty()) return 0.0;
    std::vector<std::vector<size_t>> table(cand.size() + 1,
                                           std::vector<size_t>(ref.size() + 1, 0));
    for (size_t i = 1; i <= cand.size(); ++i) {
        for (size_t j = 1; j <= ref.size(); ++j) {
            table[i][j] = cand[i - 1] == ref[j - 1]
                              ? table[i - 1][j - 1] + 1
                              : std::max(table[i - 1][j], table[i][j - 1]);
        }
    }
    const double lcs = static_cast<double>(table[cand.size()][ref.size()]);
    return detail::f1(lcs / static_cast<double>(cand.size()),
                      lcs / static_cast<double>(ref.size()));
}

inline double rouge_l(std::string_view cand, std::string_view ref) {
    return rouge_l(tokenize(cand), tokenize(ref));
}

inline constexpr double kMeteorAlpha = 0.9;
inline constexpr double kMeteorGamma = 0.5;

// Two-stage greedy in-order alignment (exact tokens, then stems), Fmean
// weighted toward recall (alpha = 0.9), fragmentation penalty
// gamma * (chunks/matches)^3 with the cube taken over integers so round
// ratios stay exact (1 chunk over 10 matches -> exactly 0.9995). A chunk
// is a maximal run of matches adjacent in both sequences.
inline double meteor(const std::vector<std::string>& cand,
                     const std::vector<std::string>& ref) {
    if (cand.empty() || ref.empty()) return 0.0;
    std::vector<int> match_of(cand.size(), -1);  // cand index -> ref index
    std::vector<bool> ref_taken(ref.size(), false);
    for (size_t i = 0; i < cand.size(); ++i) {
        for (size_t j = 0; j < ref.size(); ++j) {
            if (!ref_taken[j] && cand[i] == ref[j]) {
                match_of[i] = static_cast<int>(j);
                ref_taken[j] = true;
                break;
            }
        }
    }
    std::vector<std::string> ref_stems(ref.size());
    for (size_t j = 0; j < ref.size(); ++j) ref_stems[j] = stem(ref[j]);
    for (size_t i = 0; i < cand.size(); ++i) {
        if (match_of[i] >= 0) continue;
        const std::string cand_stem = stem(cand[i]);
        for (size_t j = 0; j < ref.size(); ++j) {
            if (!ref_taken[j] && cand_stem == ref_stems[j]) {
                match_of[i] = static_cast<int>(j);
                ref_taken[j] = true;
                break;
            }
        }
    }
    long long matches = 0;
    long long chunks = 0;
    int prev_i = -2;
    int prev_j = -2;
    for (size_t i = 0; i < cand.size(); ++i) {
        if (match_of[i] < 0) continue;
        ++matches;
        if (!(static_cast<int>(i) == prev_i + 1 && match_of[i] == prev_j + 1)) {
            ++chunks;
        }
        prev_i = static_cast<int>(i);
        prev_j = match_of[i];
    }
    if (matches == 0) return 0.0;
    const double p =
        static_cast<double>(matches) / static_cast<double>(cand.size());
    const double r =
        static_cast<double>(matches) / static_cast<double>(ref.size());
    const double fmean = p * r / (kMeteorAlpha * p + (1.0 - kMeteorAlpha) * r);
    const double penalty =
        kMeteorGamma * (static_cast<double>(chunks * chunks * chunks) /
                        static_cast<double>(matches * matches * matches));
    return fmean * (1.0 - penalty);
}

inline double meteor(std::string_view cand, std::string_view ref) {
    return meteor(tokenize(cand), tokenize(ref));
}

// Outcome precedence: (1) a case-insensitive "sorry" anywhere abstains;
// (2) a unique standalone uppercase option letter A-D chooses; (3) a
// unique case-insensitive option-title substring chooses; anything else
// is unparsed.
inline ChoiceOutcome parse_choice(const std::string& generation,
                                  const std::vector<std::string>& options) {
    const std::string lower = to_lower(generation);
    if (lower.find("sorry") != std::string::npos) {
        return ChoiceOutcome::abstain();
    }
    bool seen[4] = {false, false, false, false};
    for (size_t i = 0; i < generation.size(); ++i) {
        const char c = generation[i];
        if (c < 'A' || c > 'D') continue;
        const bool left_ok =
            i == 0 || !std::isalnum(static_cast<unsigned char>(generation[i - 1]));
        const bool right_ok =
            i + 1 == generation.size() ||
            !std::isalnum(static_cast<unsigned char>(generation[i + 1]));
        if (left_ok && right_ok) seen[c - 'A'] = true;
    }
    int letter = -1;
    int distinct = 0;
    for (int k = 0; k < 4; ++k) {
        if (seen[k]) {
            ++distinct;
            letter = k;
        }
    }
    if (distinct == 1 && letter < static_cast<int>(options.size())) {
        return ChoiceOutcome::chosen(letter);
    }
    int title = -1;
    int hits = 0;
    for (int k = 0; k < static_cast<int>(options.size()); ++k) {
        if (!options[k].empty() &&
            lower.find(to_lower(options[k])) != std::string::npos) {
            ++hits;
            title = k;
        }
    }
    if (hits == 1) return ChoiceOutcome::chosen(title);
    return ChoiceOutcome::unparsed();
}

namespace detail {

inline void require_choice_outcome(const RunRecord& rec) {
    if (!rec.outcome || !rec.answer_index) {
        throw std::invalid_argument("record lacks a multiple-choice outcome: " +
                                    rec.instance_id);
    }
}

}  // namespace detail

// Correct / total; abstained and unparsed answers count as incorrect.
inline double accuracy(const std::vector<RunRecord>& records) {
    if (records.empty()) {
        throw std::invalid_argument("accuracy needs at least one record");
    }
    long long correct = 0;
    for (const auto& rec : records) {
        detail::require_choice_outcome(rec);
        if (rec.outcome->kind == ChoiceOutcome::Kind::Chosen &&
            rec.outcome->index == *rec.answer_index) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(records.size());
}

struct AbstainBreakdown {
    double correct_pct = 0.0;
    double incorrect_pct = 0.0;
    double abstain_pct = 0.0;
};

// Percentages over all records; unparsed responses fold into incorrect.
inline AbstainBreakdown abstain_breakdown(const std::vector<RunRecord>& records) {
    if (records.empty()) {
        throw std::invalid_argument("abstain breakdown needs at least one record");
    }
    long long correct = 0;
    long long abstain = 0;
    for (const auto& rec : records) {
        detail::require_choice_outcome(rec);
        if (rec.outcome->kind == ChoiceOutcome::Kind::Abstain) {
            ++abstain;
        } else if (rec.outcome->kind == ChoiceOutcome::Kind::Chosen &&
                   rec.outcome->index == *rec.answer_index) {
            ++correct;
        }
    }
    const auto total = static_cast<double>(records.size());
    const long long incorrect =
        static_cast<long long>(records.size()) - correct - abstain;
    return {100.0 * static_cast<double>(correct) / total,
            100.0 * static_cast<double>(incorrect) / total,
            100.0 * static_cast<double>(abstain) / total};
}

// Cosine similarity of the two sentence embeddings, clamped to [0,1].
inline double embed_cosine(const std::string& cand, const std::string& ref,
                           Embedder& embedder) {
    return detail::clamp01(
        cosine_similarity(embedder.embed(cand), embedder.embed(ref)));
}

// Greedy matching: each candidate token pairs with its max-cosine
// reference token (precision) and vice versa (recall); F1 of the two
// means, clamped to [0,1]. No IDF weighting.
inline double bertscore_f1(const std::vector<std::string>& cand_tokens,
                           const std::vector<std::string>& ref_tokens,
                           Embedder& token_embedder) {
    if (cand_tokens.empty() || ref_tokens.empty()) return 0.0;
    const auto cand_vecs = token_embedder.embed_many(cand_tokens);
    const auto ref_vecs = token_embedder.embed_many(ref_tokens);
    double precision_sum = 0.0;
    for (const auto& cv : cand_vecs) {
        double best = std::numeric_limits<double>::lowest();
        for (const auto& rv : ref_vecs) {
            best = std::max(best, cosine_similarity(cv, rv));
        }
        precision_sum += best;
    }
    double recall_sum = 0.0;
    for (const auto& rv : ref_vecs) {
        double best = std::numeric_limits<double>::lowest();
        for (const auto& cv : cand_vecs) {
            best = std::max(best, cosine_similarity(cv, rv));
        }
        recall_sum += best;
    }
    const double p = detail::clamp01(precision_sum /
                                     static_cast<double>(cand_vecs.size()));
    const double r =
        detail::clamp01(recall_sum / static_cast<double>(ref_vecs.size()));
    return detail::f1(p, r);
}

inline double bertscore_f1(std::string_view cand, std::string_view ref,
                           Embedder& token_embedder) {
    return bertscore_f1(tokenize(cand), tokenize(ref), token_embedder);
}

// (improved - base) / base, in percent.
inline double relative_improvement(double base, double improved) {
    if (base <= 0.0) {
        throw std::invalid_argument("relative improvement needs a positive base");
    }
    return (improved - base) / base * 100.0;
}

}  // namespace pforge
