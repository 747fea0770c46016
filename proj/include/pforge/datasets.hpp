#pragma once

// Builders for the three evaluation datasets. Every builder is a pure
// function of (input, seed), so a fixed input and seed reproduce the
// dataset byte for byte on any platform. All randomness goes through
// std::mt19937_64 with modulo draws; distribution adapters are avoided
// because their output is not portable across standard libraries.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "pforge/core.hpp"
#include "pforge/embedding.hpp"
#include "pforge/hash.hpp"
#include "pforge/text.hpp"

namespace pforge {

struct PurchaseRecord {
    std::string user_id;
    std::string product_title;
    std::string category;

    bool operator==(const PurchaseRecord&) const = default;
};

struct BuildSkip {
    std::string user_id;
    std::string reason;

    bool operator==(const BuildSkip&) const = default;
};

struct PreferenceBuild {
    std::vector<TaskInstance> instances;  // sorted by instance_id
    std::vector<BuildSkip> skips;         // with-reason exclusions, input order
};

inline constexpr const char* kPreferenceStem =
    "Which of the following products is this person most likely to purchase "
    "next?";

// One purchase per line: {"user_id": ..., "product_title": ..., "category": ...}
inline std::vector<PurchaseRecord> purchases_from_jsonl(std::istream& in) {
    std::vector<PurchaseRecord> records;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            const auto j = nlohmann::ordered_json::parse(line);
            PurchaseRecord record{j.at("user_id").get<std::string>(),
                                  j.at("product_title").get<std::string>(),
                                  j.at("category").get<std::string>()};
            if (record.user_id.empty() || record.product_title.empty() ||
                record.category.empty()) {
                throw std::runtime_error("empty field");
            }
            records.push_back(std::move(record));
        } catch (const std::exception& e) {
            throw std::runtime_error("purchase line " +
                                     std::to_string(line_no) + ": " +
                                     e.what());
        }
    }
    return records;
}

inline std::vector<PurchaseRecord> purchases_from_jsonl(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return purchases_from_jsonl(in);
}

namespace detail {

// The two draw primitives every seeded decision goes through. The
// modulo bias is negligible for the pool sizes involved and keeps the
// byte-level replay protocol trivial to restate.
inline uint64_t draw(std::mt19937_64& rng, size_t n) {
    return rng() % n;
}

template <typename T>
void seeded_shuffle(std::vector<T>& values, std::mt19937_64& rng) {
    for (size_t i = values.size(); i-- > 1;) {
        const size_t j = static_cast<size_t>(draw(rng, i + 1));
        std::swap(values[i], values[j]);
    }
}

}  // namespace detail

// Per eligible user (>= 5 distinct purchased categories) emits one
// four-option instance. Draw protocol, per user, from
// mt19937_64(seed ^ fnv1a64(user_id)):
//   1. target category: index into the lexicographically sorted list of
//      the user's categories holding >= 2 (title-distinct) products
//   2. answer: index into the target category's products, input order
//   3-5. three distractors from the global never-purchased pool
//        (title-deduplicated, input order, answer title excluded);
//        after each pick, same-category entries leave the pool and only
//        return if it empties before three are drawn
//   6-8. one shuffle of the four options (descending-index swaps)
inline PreferenceBuild build_preference_dataset(
    const std::vector<PurchaseRecord>& records, uint64_t seed) {
    for (const auto& record : records) {
        if (record.user_id.empty() || record.product_title.empty() ||
            record.category.empty()) {
            throw std::invalid_argument("purchase record with empty field");
        }
    }

    std::vector<std::string> user_order;
    std::unordered_map<std::string, std::vector<PurchaseRecord>> by_user;
    for (const auto& record : records) {
        auto [it, inserted] = by_user.try_emplace(record.user_id);
        if (inserted) user_order.push_back(record.user_id);
        // a re-purchase of the same title adds nothing
        bool seen = false;
        for (const auto& kept : it->second) {
            if (kept.product_title == record.product_title) {
                seen = true;
                break;
            }
        }
        if (!seen) it->second.push_back(record);
    }

    PreferenceBuild out;
    for (const auto& user_id : user_order) {
        const auto& purchases = by_user.at(user_id);

        std::set<std::string> categories;
        std::map<std::string, int> category_sizes;
        for (const auto& purchase : purchases) {
            categories.insert(purchase.category);
            ++category_sizes[purchase.category];
        }
        if (categories.size() < 5) continue;  // lacks personal context

        std::vector<std::string> candidates;  // sorted: map iterates in order
        for (const auto& [category, size] : category_sizes) {
            if (size >= 2) candidates.push_back(category);
        }
        if (candidates.empty()) {
            out.skips.push_back(
                {user_id, "no category with at least 2 products"});
            continue;
        }

        std::mt19937_64 rng(seed ^ fnv1a64(user_id));

        const auto& target =
            candidates[detail::draw(rng, candidates.size())];
        std::vector<const PurchaseRecord*> members;
        for (const auto& purchase : purchases) {
            if (purchase.category == target) members.push_back(&purchase);
        }
        const auto& answer = *members[detail::draw(rng, members.size())];

        std::vector<const PurchaseRecord*> pool;
        {
            std::unordered_set<std::string> pool_titles;
            for (const auto& record : records) {
                if (categories.count(record.category)) continue;
                if (record.product_title == answer.product_title) continue;
                if (!pool_titles.insert(record.product_title).second) continue;
                pool.push_back(&record);
            }
        }
        if (pool.size() < 3) {
            out.skips.push_back(
                {user_id, "distractor pool has only " +
                              std::to_string(pool.size()) +
                              " never-purchased-category products"});
            continue;
        }

        std::vector<size_t> chosen;
        std::vector<bool> used(pool.size(), false);
        std::vector<size_t> avail(pool.size());
        for (size_t i = 0; i < pool.size(); ++i) avail[i] = i;
        while (chosen.size() < 3) {
            if (avail.empty()) {
                // fewer never-purchased categories than distractor slots;
                // allow category repeats but never the same product
                for (size_t i = 0; i < pool.size(); ++i) {
                    if (!used[i]) avail.push_back(i);
                }
            }
            const size_t pick = avail[detail::draw(rng, avail.size())];
            chosen.push_back(pick);
            used[pick] = true;
            std::erase_if(avail, [&](size_t i) {
                return pool[i]->category == pool[pick]->category;
            });
        }

        std::vector<std::string> options = {answer.product_title};
        for (const size_t pick : chosen) {
            options.push_back(pool[pick]->product_title);
        }
        detail::seeded_shuffle(options, rng);
        int answer_index = 0;
        for (size_t i = 0; i < options.size(); ++i) {
            if (options[i] == answer.product_title) {
                answer_index = static_cast<int>(i);
                break;
            }
        }

        PersonalContext context;
        context.user_id = user_id;
        for (const auto& purchase : purchases) {
            if (purchase.product_title == answer.product_title) continue;
            context.items.push_back(
                {purchase.product_title, ItemKind::Purchase});
        }

        TaskInstance instance;
        instance.instance_id = "preference-" + user_id + "-0";
        instance.task = TaskKind::PreferencePrediction;
        instance.context = std::move(context);
        instance.query = MultipleChoiceQuery{kPreferenceStem,
                                             std::move(options), answer_index};
        out.instances.push_back(std::move(instance));
    }

    std::sort(out.instances.begin(), out.instances.end(),
              [](const TaskInstance& a, const TaskInstance& b) {
                  return a.instance_id < b.instance_id;
              });
    return out;
}

struct ParaphraseLoad {
    std::vector<TaskInstance> instances;  // sorted by instance_id
    std::vector<std::string> warnings;    // position-annotated rejections
};

// Document layout: a top-level array of records shaped like
//   {"id": "...", "input": <neutralized tweet>, "output": <original tweet>,
//    "profile": [<past tweet> | {"text": <past tweet>}, ...]}
// The profile lists the person's other tweets; the paraphrase target is
// not among them.
inline ParaphraseLoad load_paraphrase_dataset(
    const nlohmann::ordered_json& doc) {
    if (!doc.is_array()) {
        throw std::invalid_argument(
            "paraphrase dataset: expected a top-level array");
    }
    ParaphraseLoad out;
    std::unordered_set<std::string> seen_ids;
    size_t index = 0;
    for (const auto& record : doc) {
        const std::string label = "record " + std::to_string(index);
        ++index;
        if (!record.is_object()) {
            out.warnings.push_back(label + ": not an object");
            continue;
        }
        std::string id;
        if (record.contains("id")) {
            const auto& raw = record["id"];
            id = raw.is_string() ? raw.get<std::string>() : raw.dump();
        } else {
            id = std::to_string(index - 1);
        }
        const std::string input =
            record.contains("input") && record["input"].is_string()
                ? record["input"].get<std::string>()
                : "";
        if (trim(input).empty()) {
            out.warnings.push_back(label + ": missing input");
            continue;
        }
        const std::string output =
            record.contains("output") && record["output"].is_string()
                ? record["output"].get<std::string>()
                : "";
        if (trim(output).empty()) {
            out.warnings.push_back(label + ": missing reference");
            continue;
        }
        std::vector<ContextItem> items;
        bool profile_ok = true;
        if (record.contains("profile") && record["profile"].is_array()) {
            for (const auto& entry : record["profile"]) {
                std::string text;
                if (entry.is_string()) {
                    text = entry.get<std::string>();
                } else if (entry.is_object() && entry.contains("text") &&
                           entry["text"].is_string()) {
                    text = entry["text"].get<std::string>();
                } else {
                    profile_ok = false;
                    break;
                }
                if (trim(text).empty()) continue;
                items.push_back({std::move(text), ItemKind::Tweet});
            }
        }
        if (!profile_ok) {
            out.warnings.push_back(label + ": malformed profile entry");
            continue;
        }
        if (items.empty()) {
            out.warnings.push_back(label + ": empty profile");
            continue;
        }
        if (!seen_ids.insert(id).second) {
            out.warnings.push_back(label + ": duplicate id " + id);
            continue;
        }

        TaskInstance instance;
        instance.instance_id = "paraphrase-" + id;
        instance.task = TaskKind::TextParaphrase;
        instance.context = {id, std::move(items)};
        instance.query = ParaphraseQuery{input, output};
        out.instances.push_back(std::move(instance));
    }
    std::sort(out.instances.begin(), out.instances.end(),
              [](const TaskInstance& a, const TaskInstance& b) {
                  return a.instance_id < b.instance_id;
              });
    return out;
}

inline ParaphraseLoad load_paraphrase_dataset(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw std::runtime_error("paraphrase dataset: " + std::string(e.what()));
    }
    return load_paraphrase_dataset(doc);
}

struct DialogueCandidate {
    std::string user_id;
    std::vector<std::string> comment_history;
    std::string question;
    std::string response;

    bool operator==(const DialogueCandidate&) const = default;
};

// One candidate per line:
// {"user_id": ..., "history": [...], "question": ..., "response": ...}
inline std::vector<DialogueCandidate> dialogue_candidates_from_jsonl(
    std::istream& in) {
    std::vector<DialogueCandidate> candidates;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            const auto j = nlohmann::ordered_json::parse(line);
            DialogueCandidate candidate{
                j.at("user_id").get<std::string>(),
                j.at("history").get<std::vector<std::string>>(),
                j.at("question").get<std::string>(),
                j.at("response").get<std::string>()};
            if (candidate.user_id.empty() || candidate.question.empty() ||
                candidate.response.empty()) {
                throw std::runtime_error("empty field");
            }
            candidates.push_back(std::move(candidate));
        } catch (const std::exception& e) {
            throw std::runtime_error("dialogue line " +
                                     std::to_string(line_no) + ": " +
                                     e.what());
        }
    }
    return candidates;
}

inline std::vector<DialogueCandidate> dialogue_candidates_from_jsonl(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return dialogue_candidates_from_jsonl(in);
}

struct DialogueBuild {
    std::vector<TaskInstance> instances;  // sorted by instance_id
    std::vector<double> similarities;     // aligned with instances
    int dropped = 0;                      // resolved but outside the band
    std::vector<BuildSkip> unresolved;    // embedder failures, input order
};

// Keeps a candidate iff lower < max_similarity <= upper, where
// max_similarity is the maximum cosine between the response embedding
// and each history-entry embedding, floored at zero. Membership is
// relative to the embedder supplied.
inline DialogueBuild build_dialogue_subset(
    const std::vector<DialogueCandidate>& candidates, Embedder& embedder,
    double lower = 0.4, double upper = 0.6) {
    DialogueBuild out;
    std::vector<std::pair<TaskInstance, double>> kept;
    std::unordered_map<std::string, int> per_user_index;
    for (const auto& candidate : candidates) {
        const int ordinal = per_user_index[candidate.user_id]++;
        double max_similarity = 0.0;
        try {
            const auto response_vec = embedder.embed(candidate.response);
            for (const auto& entry : candidate.comment_history) {
                max_similarity =
                    std::max(max_similarity,
                             cosine_similarity(embedder.embed(entry),
                                               response_vec));
            }
        } catch (const std::exception& e) {
            out.unresolved.push_back({candidate.user_id, e.what()});
            continue;
        }
        if (!(lower < max_similarity && max_similarity <= upper)) {
            ++out.dropped;
            continue;
        }
        TaskInstance instance;
        instance.instance_id =
            "dialogue-" + candidate.user_id + "-" + std::to_string(ordinal);
        instance.task = TaskKind::DialogueResponse;
        instance.context.user_id = candidate.user_id;
        for (const auto& entry : candidate.comment_history) {
            instance.context.items.push_back({entry, ItemKind::Comment});
        }
        instance.query =
            DialogueQuery{candidate.question, candidate.response};
        kept.emplace_back(std::move(instance), max_similarity);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        return a.first.instance_id < b.first.instance_id;
    });
    for (auto& [instance, similarity] : kept) {
        out.instances.push_back(std::move(instance));
        out.similarities.push_back(similarity);
    }
    return out;
}

}  // namespace pforge
