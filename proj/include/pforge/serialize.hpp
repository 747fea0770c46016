#pragma once

// JSONL (de)serialization for task instances and run records.
//
// Instance schema, one object per line:
//   {"instance_id": "...", "task": "preference|paraphrase|dialogue",
//    "user_id": "...", "context": ["...", ...], "query": {...}}
//
// Query payloads by task:
//   preference: {"stem", "options" (4 strings), "answer_index"}
//   paraphrase: {"neutralized_text", "reference_tweet"}
//   dialogue:   {"question", "reference_response"}
//
// Emission uses a fixed field order so identical data serializes to
// identical bytes.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pforge/core.hpp"

namespace pforge {

using ordered_json = nlohmann::ordered_json;

inline ordered_json instance_to_json(const TaskInstance& instance) {
    ordered_json j;
    j["instance_id"] = instance.instance_id;
    j["task"] = std::string(to_string(instance.task));
    j["user_id"] = instance.context.user_id;
    ordered_json context = ordered_json::array();
    for (const auto& item : instance.context.items) {
        context.push_back(item.text);
    }
    j["context"] = std::move(context);
    ordered_json query;
    if (const auto* mc = std::get_if<MultipleChoiceQuery>(&instance.query)) {
        query["stem"] = mc->stem;
        query["options"] = mc->options;
        query["answer_index"] = mc->answer_index;
    } else if (const auto* pq = std::get_if<ParaphraseQuery>(&instance.query)) {
        query["neutralized_text"] = pq->neutralized_text;
        query["reference_tweet"] = pq->reference_tweet;
    } else if (const auto* dq = std::get_if<DialogueQuery>(&instance.query)) {
        query["question"] = dq->question;
        query["reference_response"] = dq->reference_response;
    }
    j["query"] = std::move(query);
    return j;
}

inline TaskInstance instance_from_json(const ordered_json& j) {
    TaskInstance instance;
    instance.instance_id = j.at("instance_id").get<std::string>();
    const auto task = task_from_string(j.at("task").get<std::string>());
    if (!task) {
        throw std::invalid_argument("unknown task: " +
                                    j.at("task").get<std::string>());
    }
    instance.task = *task;
    instance.context.user_id = j.at("user_id").get<std::string>();
    const ItemKind kind = item_kind_for(instance.task);
    for (const auto& text : j.at("context")) {
        instance.context.items.push_back({text.get<std::string>(), kind});
    }
    const auto& query = j.at("query");
    switch (instance.task) {
        case TaskKind::PreferencePrediction: {
            MultipleChoiceQuery mc;
            mc.stem = query.at("stem").get<std::string>();
            mc.options = query.at("options").get<std::vector<std::string>>();
            mc.answer_index = query.at("answer_index").get<int>();
            instance.query = std::move(mc);
            break;
        }
        case TaskKind::TextParaphrase: {
            ParaphraseQuery pq;
            pq.neutralized_text = query.at("neutralized_text").get<std::string>();
            pq.reference_tweet = query.at("reference_tweet").get<std::string>();
            instance.query = std::move(pq);
            break;
        }
        case TaskKind::DialogueResponse: {
            DialogueQuery dq;
            dq.question = query.at("question").get<std::string>();
            dq.reference_response = query.at("reference_response").get<std::string>();
            instance.query = std::move(dq);
            break;
        }
    }
    return instance;
}

inline void write_instances_jsonl(std::ostream& out,
                                  const std::vector<TaskInstance>& instances) {
    for (const auto& instance : instances) {
        out << instance_to_json(instance).dump() << '\n';
    }
}

inline void write_instances_jsonl(const std::filesystem::path& path,
                                  const std::vector<TaskInstance>& instances) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    write_instances_jsonl(out, instances);
}

inline std::string instances_to_jsonl(const std::vector<TaskInstance>& instances) {
    std::ostringstream out;
    write_instances_jsonl(out, instances);
    return out.str();
}

inline std::vector<TaskInstance> read_instances_jsonl(std::istream& in) {
    std::vector<TaskInstance> instances;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            instances.push_back(instance_from_json(ordered_json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error("instance line " + std::to_string(line_no) +
                                     ": " + e.what());
        }
    }
    return instances;
}

inline std::vector<TaskInstance> read_instances_jsonl(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open dataset: " + path.string());
    }
    return read_instances_jsonl(in);
}

inline ordered_json strategy_to_json(const StrategyConfig& config) {
    ordered_json j;
    j["name"] = std::string(to_string(config.strategy));
    j["include_pc"] = config.flags.include_pc;
    j["include_guidance"] = config.flags.include_guidance;
    j["include_profile"] = config.flags.include_profile;
    return j;
}

inline StrategyConfig strategy_from_json(const ordered_json& j) {
    const auto strategy = strategy_from_string(j.at("name").get<std::string>());
    if (!strategy) {
        throw std::invalid_argument("unknown strategy: " +
                                    j.at("name").get<std::string>());
    }
    StrategyConfig config;
    config.strategy = *strategy;
    config.flags.include_pc = j.at("include_pc").get<bool>();
    config.flags.include_guidance = j.at("include_guidance").get<bool>();
    config.flags.include_profile = j.at("include_profile").get<bool>();
    return config;
}

inline ordered_json record_to_json(const RunRecord& record) {
    ordered_json j;
    j["instance_id"] = record.instance_id;
    j["strategy"] = strategy_to_json(record.config);
    if (record.guidance) {
        j["guidance"] = {{"text", record.guidance->text},
                         {"source_prompt", record.guidance->source_prompt}};
    } else {
        j["guidance"] = nullptr;
    }
    if (record.profile) {
        j["profile"] = record.profile->text;
    } else {
        j["profile"] = nullptr;
    }
    j["final_prompt"] = record.final_prompt;
    j["generation"] = record.generation;
    if (record.outcome) {
        const char* kind = record.outcome->kind == ChoiceOutcome::Kind::Chosen
                               ? "chosen"
                               : record.outcome->kind == ChoiceOutcome::Kind::Abstain
                                     ? "abstain"
                                     : "unparsed";
        j["outcome"] = {{"kind", kind}, {"index", record.outcome->index}};
    } else {
        j["outcome"] = nullptr;
    }
    if (record.answer_index) {
        j["answer_index"] = *record.answer_index;
    } else {
        j["answer_index"] = nullptr;
    }
    j["llm_calls"] = record.llm_calls;
    j["cache_hits"] = record.cache_hits;
    j["failed"] = record.failed;
    j["failure_stage"] = record.failure_stage;
    j["error"] = record.error;
    return j;
}

inline RunRecord record_from_json(const ordered_json& j) {
    RunRecord record;
    record.instance_id = j.at("instance_id").get<std::string>();
    record.config = strategy_from_json(j.at("strategy"));
    if (!j.at("guidance").is_null()) {
        record.guidance = Guidance{
            j["guidance"].at("text").get<std::string>(),
            j["guidance"].at("source_prompt").get<std::string>()};
    }
    if (!j.at("profile").is_null()) {
        record.profile = PersonalProfile{j["profile"].get<std::string>()};
    }
    record.final_prompt = j.at("final_prompt").get<std::string>();
    record.generation = j.at("generation").get<std::string>();
    if (!j.at("outcome").is_null()) {
        const std::string kind = j["outcome"].at("kind").get<std::string>();
        ChoiceOutcome outcome;
        if (kind == "chosen") {
            outcome = ChoiceOutcome::chosen(j["outcome"].at("index").get<int>());
        } else if (kind == "abstain") {
            outcome = ChoiceOutcome::abstain();
        } else {
            outcome = ChoiceOutcome::unparsed();
        }
        record.outcome = outcome;
    }
    if (!j.at("answer_index").is_null()) {
        record.answer_index = j["answer_index"].get<int>();
    }
    record.llm_calls = j.at("llm_calls").get<int>();
    record.cache_hits = j.at("cache_hits").get<int>();
    record.failed = j.at("failed").get<bool>();
    record.failure_stage = j.at("failure_stage").get<std::string>();
    record.error = j.at("error").get<std::string>();
    return record;
}

inline void write_records_jsonl(const std::filesystem::path& path,
                                const std::vector<RunRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    for (const auto& record : records) {
        out << record_to_json(record).dump() << '\n';
    }
}

inline std::vector<RunRecord> read_records_jsonl(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open records: " + path.string());
    }
    std::vector<RunRecord> records;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            records.push_back(record_from_json(ordered_json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error("record line " + std::to_string(line_no) +
                                     ": " + e.what());
        }
    }
    return records;
}

}  // namespace pforge
