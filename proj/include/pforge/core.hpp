#pragma once

// Domain types shared by every module: personal contexts, task instances,
// prompting strategies and their ablation flags, and per-run records.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pforge/text.hpp"

namespace pforge {

enum class TaskKind { PreferencePrediction, TextParaphrase, DialogueResponse };

enum class ItemKind { Purchase, Tweet, Comment };

inline ItemKind item_kind_for(TaskKind task) {
    switch (task) {
        case TaskKind::PreferencePrediction: return ItemKind::Purchase;
        case TaskKind::TextParaphrase: return ItemKind::Tweet;
        case TaskKind::DialogueResponse: return ItemKind::Comment;
    }
    throw std::logic_error("unknown task kind");
}

inline std::string_view to_string(TaskKind task) {
    switch (task) {
        case TaskKind::PreferencePrediction: return "preference";
        case TaskKind::TextParaphrase: return "paraphrase";
        case TaskKind::DialogueResponse: return "dialogue";
    }
    throw std::logic_error("unknown task kind");
}

inline std::optional<TaskKind> task_from_string(std::string_view s) {
    if (s == "preference") return TaskKind::PreferencePrediction;
    if (s == "paraphrase") return TaskKind::TextParaphrase;
    if (s == "dialogue") return TaskKind::DialogueResponse;
    return std::nullopt;
}

struct ContextItem {
    std::string text;
    ItemKind kind = ItemKind::Purchase;

    bool operator==(const ContextItem&) const = default;
};

// Ordered user activity items (purchase titles, past tweets, or comments).
struct PersonalContext {
    std::string user_id;
    std::vector<ContextItem> items;

    bool operator==(const PersonalContext&) const = default;
};

// Output of the context-digestion stage, kept verbatim together with the
// prompt that produced it.
struct Guidance {
    std::string text;
    std::string source_prompt;

    bool operator==(const Guidance&) const = default;
};

struct PersonalProfile {
    std::string text;

    bool operator==(const PersonalProfile&) const = default;
};

struct MultipleChoiceQuery {
    std::string stem;
    std::vector<std::string> options;  // exactly 4 when valid
    int answer_index = 0;              // index into options, presentation order

    bool operator==(const MultipleChoiceQuery&) const = default;
};

struct ParaphraseQuery {
    std::string neutralized_text;
    std::string reference_tweet;

    bool operator==(const ParaphraseQuery&) const = default;
};

struct DialogueQuery {
    std::string question;
    std::string reference_response;

    bool operator==(const DialogueQuery&) const = default;
};

using Query = std::variant<MultipleChoiceQuery, ParaphraseQuery, DialogueQuery>;

struct TaskInstance {
    std::string instance_id;
    TaskKind task = TaskKind::PreferencePrediction;
    PersonalContext context;
    Query query;

    bool operator==(const TaskInstance&) const = default;
};

inline bool query_matches_task(TaskKind task, const Query& query) {
    return (task == TaskKind::PreferencePrediction &&
            std::holds_alternative<MultipleChoiceQuery>(query)) ||
           (task == TaskKind::TextParaphrase &&
            std::holds_alternative<ParaphraseQuery>(query)) ||
           (task == TaskKind::DialogueResponse &&
            std::holds_alternative<DialogueQuery>(query));
}

// Returns every violated invariant; an empty list means the instance is ok.
// Violations are data, not failures.
inline std::vector<std::string> validate_instance(const TaskInstance& instance) {
    std::vector<std::string> violations;
    if (instance.instance_id.empty()) {
        violations.push_back("instance_id empty");
    }
    if (instance.context.items.empty()) {
        violations.push_back("context empty");
    }
    const ItemKind expected_kind = item_kind_for(instance.task);
    for (size_t i = 0; i < instance.context.items.size(); ++i) {
        const auto& item = instance.context.items[i];
        if (trim(item.text).empty()) {
            violations.push_back("context item " + std::to_string(i) + " empty");
        }
        if (item.kind != expected_kind) {
            violations.push_back("context item " + std::to_string(i) +
                                 " kind mismatches task");
        }
    }
    if (!query_matches_task(instance.task, instance.query)) {
        violations.push_back("query kind mismatches task");
        return violations;
    }
    if (const auto* mc = std::get_if<MultipleChoiceQuery>(&instance.query)) {
        if (mc->options.size() != 4) {
            violations.push_back("options != 4");
        }
        bool duplicate = false;
        for (size_t i = 0; i < mc->options.size() && !duplicate; ++i) {
            for (size_t j = i + 1; j < mc->options.size() && !duplicate; ++j) {
                duplicate = mc->options[i] == mc->options[j];
            }
        }
        if (duplicate) {
            violations.push_back("options not distinct");
        }
        if (mc->answer_index < 0 ||
            static_cast<size_t>(mc->answer_index) >= mc->options.size()) {
            violations.push_back("answer_index out of range");
        }
        for (size_t i = 0; i < mc->options.size(); ++i) {
            if (trim(mc->options[i]).empty()) {
                violations.push_back("option " + std::to_string(i) + " empty");
            }
        }
    } else if (const auto* pq = std::get_if<ParaphraseQuery>(&instance.query)) {
        if (trim(pq->reference_tweet).empty()) {
            violations.push_back("missing reference");
        }
        if (trim(pq->neutralized_text).empty()) {
            violations.push_back("neutralized text empty");
        }
    } else if (const auto* dq = std::get_if<DialogueQuery>(&instance.query)) {
        if (trim(dq->reference_response).empty()) {
            violations.push_back("missing reference");
        }
        if (trim(dq->question).empty()) {
            violations.push_back("question empty");
        }
    }
    return violations;
}

enum class Strategy { DGNoPC, DGWithPC, PG, GPG };

inline std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::DGNoPC: return "dg-no-pc";
        case Strategy::DGWithPC: return "dg-with-pc";
        case Strategy::PG: return "pg";
        case Strategy::GPG: return "gpg";
    }
    throw std::logic_error("unknown strategy");
}

inline std::optional<Strategy> strategy_from_string(std::string_view s) {
    if (s == "dg-no-pc") return Strategy::DGNoPC;
    if (s == "dg-with-pc") return Strategy::DGWithPC;
    if (s == "pg") return Strategy::PG;
    if (s == "gpg") return Strategy::GPG;
    return std::nullopt;
}

// Inclusion switches for the final-prompt segments.
struct AblationFlags {
    bool include_pc = false;
    bool include_guidance = false;
    bool include_profile = false;

    bool operator==(const AblationFlags&) const = default;
};

// A strategy plus its ablation flags. Only the ten canonical rows are
// valid: DG with/without PC, PG with/without PC, and the six GPG flag
// combinations where guidance or profile is present in the final prompt.
struct StrategyConfig {
    Strategy strategy = Strategy::DGNoPC;
    AblationFlags flags;

    bool operator==(const StrategyConfig&) const = default;

    static StrategyConfig dg(bool with_pc) {
        return {with_pc ? Strategy::DGWithPC : Strategy::DGNoPC,
                {with_pc, false, false}};
    }

    static StrategyConfig pg(bool with_pc = true) {
        return {Strategy::PG, {with_pc, false, true}};
    }

    static StrategyConfig gpg(bool with_pc, bool with_guidance, bool with_profile) {
        return {Strategy::GPG, {with_pc, with_guidance, with_profile}};
    }

    // Best-performing flag combination per task.
    static StrategyConfig gpg_default(TaskKind task) {
        switch (task) {
            case TaskKind::PreferencePrediction: return gpg(true, false, true);
            case TaskKind::TextParaphrase: return gpg(true, true, true);
            case TaskKind::DialogueResponse: return gpg(true, false, true);
        }
        throw std::logic_error("unknown task kind");
    }

    // The ten canonical rows of the ablation matrix, in report order.
    static std::vector<StrategyConfig> ablation_rows() {
        return {
            dg(true),
            dg(false),
            pg(true),
            pg(false),
            gpg(true, false, true),
            gpg(false, false, true),
            gpg(true, true, true),
            gpg(false, true, true),
            gpg(true, true, false),
            gpg(false, true, false),
        };
    }

    // nullopt when this is one of the ten canonical configurations,
    // otherwise the reason the pair is rejected.
    std::optional<std::string> invalid_reason() const {
        switch (strategy) {
            case Strategy::DGNoPC:
                if (flags.include_pc) return "DG w/o PC cannot include PC";
                if (flags.include_guidance || flags.include_profile)
                    return "DG strategies include neither guidance nor profile";
                return std::nullopt;
            case Strategy::DGWithPC:
                if (!flags.include_pc) return "DG w/ PC must include PC";
                if (flags.include_guidance || flags.include_profile)
                    return "DG strategies include neither guidance nor profile";
                return std::nullopt;
            case Strategy::PG:
                if (!flags.include_profile) return "PG must include the profile";
                if (flags.include_guidance) return "PG has no guidance to include";
                return std::nullopt;
            case Strategy::GPG:
                if (!flags.include_guidance && !flags.include_profile)
                    return "GPG must include guidance or profile";
                return std::nullopt;
        }
        return "unknown strategy";
    }

    // LLM calls made before the final response: 0 for DG, 1 for PG
    // (unguided profile), 2 for GPG (digestion then guided profile).
    int intermediate_stage_count() const {
        switch (strategy) {
            case Strategy::DGNoPC:
            case Strategy::DGWithPC: return 0;
            case Strategy::PG: return 1;
            case Strategy::GPG: return 2;
        }
        throw std::logic_error("unknown strategy");
    }

    bool performs_digestion() const { return strategy == Strategy::GPG; }
    bool generates_profile() const {
        return strategy == Strategy::PG || strategy == Strategy::GPG;
    }

    std::string label() const {
        switch (strategy) {
            case Strategy::DGNoPC: return "DG w/o PC";
            case Strategy::DGWithPC: return "DG w/ PC";
            case Strategy::PG: return flags.include_pc ? "PG" : "PG w/o PC";
            case Strategy::GPG: {
                std::string parts;
                if (flags.include_pc) parts += "PC,";
                if (flags.include_guidance) parts += "G,";
                if (flags.include_profile) parts += "PP,";
                if (!parts.empty()) parts.pop_back();
                return "GPG [" + parts + "]";
            }
        }
        throw std::logic_error("unknown strategy");
    }

    // Filesystem-friendly identifier, e.g. "gpg_pc-pp".
    std::string slug() const {
        std::string out(to_string(strategy));
        out += '_';
        if (flags.include_pc) out += "pc-";
        if (flags.include_guidance) out += "g-";
        if (flags.include_profile) out += "pp-";
        if (out.back() == '-') out.pop_back();
        if (out.back() == '_') out.pop_back();
        return out;
    }
};

// Outcome of parsing a multiple-choice generation.
struct ChoiceOutcome {
    enum class Kind { Chosen, Abstain, Unparsed };

    Kind kind = Kind::Unparsed;
    int index = -1;  // valid only when kind == Chosen

    static ChoiceOutcome chosen(int index) { return {Kind::Chosen, index}; }
    static ChoiceOutcome abstain() { return {Kind::Abstain, -1}; }
    static ChoiceOutcome unparsed() { return {Kind::Unparsed, -1}; }

    bool operator==(const ChoiceOutcome&) const = default;
};

// One strategy x instance execution with all stage artifacts and counters.
struct RunRecord {
    std::string instance_id;
    StrategyConfig config;
    std::optional<Guidance> guidance;       // present iff the strategy digested
    std::optional<PersonalProfile> profile; // present iff a profile was generated
    std::string final_prompt;
    std::string generation;
    std::optional<ChoiceOutcome> outcome;
    std::optional<int> answer_index;  // gold option index, multiple-choice only
    int llm_calls = 0;                // provider round-trips (cache misses)
    int cache_hits = 0;
    bool failed = false;
    std::string failure_stage;  // "digestion" | "profile" | "final"
    std::string error;

    bool operator==(const RunRecord&) const = default;
};

}  // namespace pforge
