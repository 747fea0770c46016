#pragma once

// Multi-stage prompting workflow. GPG runs two intermediate stages
// (context digestion, then guided profile generation) before the final
// response; PG runs one (unguided profile); direct generation runs none.
// Prompt wording lives in plain-text templates with {PC}/{G}/{PP}/{Q}
// placeholders so experiments stay auditable and overridable on disk.

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pforge/core.hpp"
#include "pforge/gateway.hpp"
#include "pforge/metrics.hpp"
#include "pforge/text.hpp"

namespace pforge {

enum class Placeholder { PC, G, PP, Q };

inline std::string_view placeholder_token(Placeholder p) {
    switch (p) {
        case Placeholder::PC: return "{PC}";
        case Placeholder::G: return "{G}";
        case Placeholder::PP: return "{PP}";
        case Placeholder::Q: return "{Q}";
    }
    throw std::logic_error("unknown placeholder");
}

enum class TemplateStage { Digestion, Profile, Final };

struct TemplateSegment {
    bool is_placeholder = false;
    std::string literal;
    Placeholder placeholder = Placeholder::PC;
};

struct PromptTemplate {
    TaskKind task = TaskKind::PreferencePrediction;
    TemplateStage stage = TemplateStage::Digestion;
    std::vector<TemplateSegment> segments;

    static PromptTemplate parse(TaskKind task, TemplateStage stage,
                                std::string_view text) {
        static constexpr std::array<Placeholder, 4> kAll = {
            Placeholder::PC, Placeholder::G, Placeholder::PP, Placeholder::Q};
        PromptTemplate result;
        result.task = task;
        result.stage = stage;
        while (!text.empty()) {
            size_t best_pos = std::string_view::npos;
            Placeholder best = Placeholder::PC;
            for (const auto p : kAll) {
                const size_t pos = text.find(placeholder_token(p));
                if (pos < best_pos) {
                    best_pos = pos;
                    best = p;
                }
            }
            if (best_pos == std::string_view::npos) {
                result.segments.push_back({false, std::string(text)});
                break;
            }
            if (best_pos > 0) {
                result.segments.push_back(
                    {false, std::string(text.substr(0, best_pos))});
            }
            TemplateSegment segment;
            segment.is_placeholder = true;
            segment.placeholder = best;
            result.segments.push_back(segment);
            text.remove_prefix(best_pos + placeholder_token(best).size());
        }
        if (stage == TemplateStage::Final && result.count(Placeholder::Q) != 1) {
            throw std::invalid_argument(
                "final template must use {Q} exactly once");
        }
        return result;
    }

    int count(Placeholder p) const {
        int n = 0;
        for (const auto& segment : segments) {
            if (segment.is_placeholder && segment.placeholder == p) ++n;
        }
        return n;
    }

    // Source form of the template, placeholders re-tokenized.
    std::string text() const {
        std::string out;
        for (const auto& segment : segments) {
            if (segment.is_placeholder) {
                out += placeholder_token(segment.placeholder);
            } else {
                out += segment.literal;
            }
        }
        return out;
    }

    // Every placeholder present in the template must have a value.
    std::string render(const std::map<Placeholder, std::string>& values) const {
        std::string out;
        for (const auto& segment : segments) {
            if (!segment.is_placeholder) {
                out += segment.literal;
                continue;
            }
            const auto it = values.find(segment.placeholder);
            if (it == values.end()) {
                throw std::invalid_argument(
                    "template needs a value for " +
                    std::string(placeholder_token(segment.placeholder)));
            }
            out += it->second;
        }
        return out;
    }
};

namespace detail {

struct TemplateSlotInfo {
    TemplateStage stage;
    bool guided;  // meaningful for Profile only
    const char* suffix;
};

inline constexpr std::array<TemplateSlotInfo, 3> kTemplateSlots = {{
    {TemplateStage::Digestion, false, "_digestion.txt"},
    {TemplateStage::Profile, false, "_profile_unguided.txt"},
    {TemplateStage::Profile, true, "_profile_guided.txt"},
}};

inline const char* default_template_text(TaskKind task, int slot) {
    switch (task) {
        case TaskKind::PreferencePrediction:
            switch (slot) {
                case 0:
                    return "{PC}\n\nProvide the product category of above one "
                           "by one, each of them use less than 10 words, "
                           "split by a comma:";
                case 1:
                    return "{PC}\n\nWrite a short profile of this person with "
                           "descriptive sentences based on the above "
                           "purchases:";
                case 2:
                    return "{PC}\n\nProduct categories of the purchases "
                           "above:\n{G}\n\nWrite a short profile of this "
                           "person with descriptive sentences, focusing on "
                           "the product categories listed above:";
            }
            break;
        case TaskKind::TextParaphrase:
            switch (slot) {
                case 0:
                    return "{PC}\n\nAmong the usage of 1. Capitalization, 2. "
                           "Emoji, 3. Abbreviation, 4. Punctuation, which is "
                           "the most distinctive feature of the above tweets?";
                case 1:
                    return "{PC}\n\nWrite a short profile of this person's "
                           "writing style with descriptive sentences based on "
                           "the above tweets:";
                case 2:
                    return "{PC}\n\nThe most distinctive writing feature of "
                           "the above tweets:\n{G}\n\nWrite a short profile "
                           "of this person's writing style with descriptive "
                           "sentences, focusing on the feature identified "
                           "above:";
            }
            break;
        case TaskKind::DialogueResponse:
            switch (slot) {
                case 0:
                    return "{PC}\n\nProvide the basic personal information of "
                           "the person writing the above comments, covering "
                           "the aspects \"pets\", \"family\", \"residence\", "
                           "\"favorites\", \"partner\", \"possessions\", "
                           "\"gender\", \"self-description\":";
                case 1:
                    return "{PC}\n\nWrite a short profile of this person with "
                           "descriptive sentences based on the above "
                           "comments:";
                case 2:
                    return "{PC}\n\nBasic personal information about this "
                           "person:\n{G}\n\nWrite a short profile of this "
                           "person with descriptive sentences, covering the "
                           "personal information listed above:";
            }
            break;
    }
    throw std::logic_error("unknown template slot");
}

inline void validate_template(const PromptTemplate& t, const std::string& name,
                              bool guided) {
    auto expect = [&name](int actual, int wanted, Placeholder p) {
        if (actual != wanted) {
            throw std::invalid_argument(
                "template " + name + ": must use " +
                std::string(placeholder_token(p)) + " exactly " +
                std::to_string(wanted) + " time(s)");
        }
    };
    expect(t.count(Placeholder::PC), 1, Placeholder::PC);
    expect(t.count(Placeholder::G), guided ? 1 : 0, Placeholder::G);
    expect(t.count(Placeholder::PP), 0, Placeholder::PP);
    expect(t.count(Placeholder::Q), 0, Placeholder::Q);
}

}  // namespace detail

// The digestion and profile templates for all tasks. Defaults are
// compiled in; from_dir() overlays any template files found on disk.
// A single trailing newline in a template file is not part of the
// template.
class TemplateSet {
  public:
    static std::string asset_name(TaskKind task, int slot) {
        return std::string(to_string(task)) +
               detail::kTemplateSlots.at(slot).suffix;
    }

    static const TemplateSet& defaults() {
        static const TemplateSet instance;
        return instance;
    }

    static TemplateSet from_dir(const std::filesystem::path& dir) {
        TemplateSet set;
        for (const auto task : {TaskKind::PreferencePrediction,
                                TaskKind::TextParaphrase,
                                TaskKind::DialogueResponse}) {
            for (int slot = 0; slot < 3; ++slot) {
                const auto file = dir / asset_name(task, slot);
                if (!std::filesystem::exists(file)) continue;
                std::ifstream in(file, std::ios::binary);
                std::ostringstream buffer;
                buffer << in.rdbuf();
                std::string text = buffer.str();
                if (!text.empty() && text.back() == '\n') text.pop_back();
                set.assign(task, slot, text);
            }
        }
        return set;
    }

    // Emits the compiled-in defaults as editable asset files.
    static void write_assets(const std::filesystem::path& dir) {
        std::filesystem::create_directories(dir);
        for (const auto task : {TaskKind::PreferencePrediction,
                                TaskKind::TextParaphrase,
                                TaskKind::DialogueResponse}) {
            for (int slot = 0; slot < 3; ++slot) {
                std::ofstream out(dir / asset_name(task, slot),
                                  std::ios::binary);
                out << detail::default_template_text(task, slot) << '\n';
            }
        }
    }

    const PromptTemplate& digestion(TaskKind task) const {
        return slots_[index_of(task)][0];
    }

    const PromptTemplate& profile(TaskKind task, bool guided) const {
        return slots_[index_of(task)][guided ? 2 : 1];
    }

    // Stable digest over all nine template texts, stamped into reports so
    // a wording tweak is visible in the output it produced.
    std::string fingerprint() const {
        std::string blob;
        for (const auto& per_task : slots_) {
            for (const auto& slot : per_task) {
                blob += slot.text();
                blob += '\x1e';
            }
        }
        return sha256_hex(blob).substr(0, 12);
    }

  private:
    TemplateSet() {
        for (const auto task : {TaskKind::PreferencePrediction,
                                TaskKind::TextParaphrase,
                                TaskKind::DialogueResponse}) {
            for (int slot = 0; slot < 3; ++slot) {
                assign(task, slot, detail::default_template_text(task, slot));
            }
        }
    }

    static int index_of(TaskKind task) { return static_cast<int>(task); }

    void assign(TaskKind task, int slot, std::string_view text) {
        const auto& slot_info = detail::kTemplateSlots.at(slot);
        auto parsed = PromptTemplate::parse(task, slot_info.stage, text);
        detail::validate_template(parsed, asset_name(task, slot), slot_info.guided);
        slots_[index_of(task)][slot] = std::move(parsed);
    }

    std::array<std::array<PromptTemplate, 3>, 3> slots_;
};

// A stage failure carries the stage tag the run record stores.
class StageError : public std::runtime_error {
  public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error(what), stage_(std::move(stage)) {}

    const std::string& stage() const { return stage_; }

  private:
    std::string stage_;
};

inline std::string context_header(TaskKind task) {
    switch (task) {
        case TaskKind::PreferencePrediction:
            return "The person purchased the following products:";
        case TaskKind::TextParaphrase:
            return "The person wrote the following tweets:";
        case TaskKind::DialogueResponse:
            return "The person wrote the following comments:";
    }
    throw std::logic_error("unknown task");
}

inline std::string render_context(TaskKind task, const PersonalContext& pc) {
    if (pc.items.empty()) {
        throw std::invalid_argument("personal context is empty");
    }
    std::string out = context_header(task);
    for (const auto& item : pc.items) {
        out += '\n';
        out += item.text;
    }
    return out;
}

inline std::string render_query(TaskKind task, const Query& query) {
    if (!query_matches_task(task, query)) {
        throw std::invalid_argument("query kind mismatches task");
    }
    return std::visit(
        [](const auto& q) -> std::string {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, MultipleChoiceQuery>) {
                std::string out = q.stem;
                const char* letters[] = {"A) ", "B) ", "C) ", "D) "};
                for (size_t i = 0; i < q.options.size(); ++i) {
                    out += '\n';
                    out += letters[i];
                    out += q.options[i];
                }
                out += "\nAnswer with a single letter (A, B, C, or D):";
                return out;
            } else if constexpr (std::is_same_v<T, ParaphraseQuery>) {
                return "Paraphrase the following sentence in this person's "
                       "tweet style:\n" +
                       q.neutralized_text;
            } else {
                return "Reply to the following message as this person "
                       "would:\n" +
                       q.question;
            }
        },
        query);
}

inline std::string digestion_prompt(
    TaskKind task, const PersonalContext& pc,
    const TemplateSet& templates = TemplateSet::defaults()) {
    return templates.digestion(task).render(
        {{Placeholder::PC, render_context(task, pc)}});
}

inline std::string profile_prompt(
    TaskKind task, const PersonalContext& pc,
    const std::optional<Guidance>& guidance,
    const TemplateSet& templates = TemplateSet::defaults()) {
    std::map<Placeholder, std::string> values = {
        {Placeholder::PC, render_context(task, pc)}};
    if (guidance) values[Placeholder::G] = guidance->text;
    return templates.profile(task, guidance.has_value()).render(values);
}

struct CallCounters {
    int llm_calls = 0;  // cache misses that reached the provider
    int cache_hits = 0;
};

namespace detail {

inline std::string stage_completion(Gateway& gateway, const std::string& model,
                                    const std::string& prompt,
                                    const std::string& stage,
                                    CallCounters* counters) {
    try {
        const auto result =
            gateway.complete(CompletionRequest::user_prompt(model, prompt));
        if (counters) {
            result.cached ? ++counters->cache_hits : ++counters->llm_calls;
        }
        return result.text;
    } catch (const ProviderError& e) {
        throw StageError(stage, e.what());
    }
}

}  // namespace detail

inline Guidance digest_context(
    TaskKind task, const PersonalContext& pc, Gateway& gateway,
    const std::string& model,
    const TemplateSet& templates = TemplateSet::defaults(),
    CallCounters* counters = nullptr) {
    const std::string prompt = digestion_prompt(task, pc, templates);
    std::string text =
        detail::stage_completion(gateway, model, prompt, "digestion", counters);
    if (trim(text).empty()) {
        throw StageError("digestion", "empty digestion output");
    }
    return Guidance{std::move(text), prompt};
}

inline PersonalProfile generate_profile(
    TaskKind task, const PersonalContext& pc,
    const std::optional<Guidance>& guidance, Gateway& gateway,
    const std::string& model,
    const TemplateSet& templates = TemplateSet::defaults(),
    CallCounters* counters = nullptr) {
    const std::string prompt = profile_prompt(task, pc, guidance, templates);
    std::string text =
        detail::stage_completion(gateway, model, prompt, "profile", counters);
    if (trim(text).empty()) {
        throw StageError("profile", "empty profile output");
    }
    return PersonalProfile{std::move(text)};
}

// Final prompt = the flagged segments, always in the order PC, G, PP, Q,
// separated by one blank line. Segment text is never trimmed.
inline std::string compose_final_prompt(
    const StrategyConfig& config, TaskKind task, const PersonalContext& pc,
    const std::optional<Guidance>& guidance,
    const std::optional<PersonalProfile>& profile, const Query& query) {
    if (const auto reason = config.invalid_reason()) {
        throw std::invalid_argument(*reason);
    }
    std::vector<std::string> parts;
    if (config.flags.include_pc) {
        parts.push_back(render_context(task, pc));
    }
    if (config.flags.include_guidance) {
        if (!guidance) throw StageError("final", "missing segment: guidance");
        parts.push_back(guidance->text);
    }
    if (config.flags.include_profile) {
        if (!profile) throw StageError("final", "missing segment: profile");
        parts.push_back(profile->text);
    }
    parts.push_back(render_query(task, query));
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += "\n\n";
        out += parts[i];
    }
    return out;
}

// Runs every stage the strategy requires and never throws: failures are
// recorded with their stage tag so a batch can continue.
inline RunRecord run_instance(
    const StrategyConfig& config, const TaskInstance& instance,
    Gateway& gateway, const std::string& model,
    const TemplateSet& templates = TemplateSet::defaults()) {
    RunRecord record;
    record.instance_id = instance.instance_id;
    record.config = config;
    CallCounters counters;
    try {
        if (const auto reason = config.invalid_reason()) {
            throw StageError("config", *reason);
        }
        std::optional<Guidance> guidance;
        std::optional<PersonalProfile> profile;
        if (config.performs_digestion()) {
            guidance = digest_context(instance.task, instance.context, gateway,
                                      model, templates, &counters);
            record.guidance = guidance;
        }
        if (config.generates_profile()) {
            profile = generate_profile(instance.task, instance.context,
                                       guidance, gateway, model, templates,
                                       &counters);
            record.profile = profile;
        }
        record.final_prompt =
            compose_final_prompt(config, instance.task, instance.context,
                                 guidance, profile, instance.query);
        record.generation = detail::stage_completion(
            gateway, model, record.final_prompt, "final", &counters);
        if (const auto* mc =
                std::get_if<MultipleChoiceQuery>(&instance.query)) {
            record.outcome = parse_choice(record.generation, mc->options);
            record.answer_index = mc->answer_index;
        }
    } catch (const StageError& e) {
        record.failed = true;
        record.failure_stage = e.stage();
        record.error = e.what();
    } catch (const std::exception& e) {
        record.failed = true;
        record.failure_stage = "run";
        record.error = e.what();
    }
    record.llm_calls = counters.llm_calls;
    record.cache_hits = counters.cache_hits;
    return record;
}

}  // namespace pforge
